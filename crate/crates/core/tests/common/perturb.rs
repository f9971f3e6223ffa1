//! Reordering oracle for race-freedom: wherever two machines can both send
//! to the same receiver, apply the two sends in both orders and explore the
//! continuations from each.

use std::collections::BTreeSet;

use caa_core::semantics::{explore_from, step, Bounds, ExplorationResult, GlobalState, Protocol, StepEvent};

/// A configuration with its mailboxes compared as multisets.
fn normalise(g: &GlobalState) -> Vec<(String, Vec<String>, String)> {
    g.locals()
        .iter()
        .map(|l| {
            let mut mb: Vec<String> = l
                .mailbox
                .iter()
                .map(|m| format!("{}@{}", m.value, m.sender.0))
                .collect();
            mb.sort();
            (l.state.to_string(), mb, l.env.to_string())
        })
        .collect()
}

pub fn outcomes(r: &ExplorationResult) -> BTreeSet<Vec<(String, Vec<String>, String)>> {
    (0..r.trace_count()).map(|i| normalise(r.terminal_state(i))).collect()
}

#[derive(Debug, Default)]
pub struct Checked {
    /// Pairs of simultaneous sends that were swapped.
    pub swaps: usize,
    /// First swap after which the two orders give different trace counts.
    pub count_mismatch: Option<String>,
    /// First swap after which the two orders reach different terminal
    /// configurations.
    pub outcome_mismatch: Option<String>,
}

fn after(p: &Protocol, g: &GlobalState, sender: caa_core::terms::Pid) -> Option<GlobalState> {
    step(p, g)
        .ok()?
        .into_iter()
        .find(|(e, _)| matches!(e, StepEvent::Sent { from, .. } if *from == sender))
        .map(|(_, s)| s)
}

pub fn check(p: &Protocol, result: &ExplorationResult, bounds: &Bounds) -> Checked {
    let mut checked = Checked::default();
    for id in 0..result.state_count() {
        let g = result.state(id);
        let sends: Vec<_> = result
            .node(id)
            .edges
            .iter()
            .filter_map(|e| match &e.event {
                StepEvent::Sent { from, to, .. } => Some((*from, *to)),
                StepEvent::Received { .. } => None,
            })
            .collect();
        for (i, &(a, ta)) in sends.iter().enumerate() {
            for &(b, tb) in &sends[i + 1..] {
                if ta != tb {
                    continue;
                }
                let ab = after(p, g, a).and_then(|g| after(p, &g, b));
                let ba = after(p, g, b).and_then(|g| after(p, &g, a));
                let (Some(ab), Some(ba)) = (ab, ba) else {
                    continue;
                };
                checked.swaps += 1;
                let (Ok(rab), Ok(rba)) = (explore_from(p, ab, bounds), explore_from(p, ba, bounds)) else {
                    checked
                        .count_mismatch
                        .get_or_insert(format!("exploration failed after swapping at {g}"));
                    continue;
                };
                if rab.trace_count() != rba.trace_count() {
                    checked.count_mismatch.get_or_insert(format!(
                        "at {g}: {a} then {b} gives {} traces, {b} then {a} gives {}",
                        rab.trace_count(),
                        rba.trace_count()
                    ));
                }
                if outcomes(&rab) != outcomes(&rba) {
                    checked.outcome_mismatch.get_or_insert(format!(
                        "at {g}: {a} then {b} and {b} then {a} reach different terminal configurations"
                    ));
                }
            }
        }
    }
    checked
}
