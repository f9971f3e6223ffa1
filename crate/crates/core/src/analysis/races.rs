//! Race detection along explored traces.
//!
//! At each position of a trace, the messages a step could append to machine
//! `i` form the incoming group of that position. A delivered message keeps
//! its group alive until `i` consumes it. A machine waiting in a receive
//! state races when, scanning its live groups oldest-first, the first group
//! containing anything it could accept contains at least two such messages:
//! they were sendable at the same moment and may arrive in either order.

use std::collections::{BTreeMap, HashSet};

use thiserror::Error;

use crate::automaton::{ReceiveArm, StateId, StateKind};
use crate::semantics::{pick_arms, ExplorationResult, NodeId, Protocol, StepEvent, Trace, Verdict};
use crate::terms::{Pid, Value};

use super::{incoming_at, Multiset};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RaceWitness {
    pub first: Value,
    pub first_target: StateId,
    pub second: Value,
    pub second_target: StateId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RaceReport {
    /// Index of the witnessing maximal trace in the exploration result.
    pub trace_index: usize,
    /// Position in that trace where the race is observed.
    pub position: usize,
    pub machine: Pid,
    pub state: StateId,
    /// Trace position whose incoming group races.
    pub group_index: usize,
    pub group: Multiset<Value>,
    /// Members of the group the state can consume (at least two).
    pub racing_messages: Multiset<Value>,
    /// Number of distinct successor states the racing messages lead to.
    pub distinct_targets: usize,
    /// Two racing messages leading to different states, when there are such.
    pub witness: Option<RaceWitness>,
}

impl RaceReport {
    /// The witnessing trace up to and including the racing position.
    pub fn trace_prefix(&self, result: &ExplorationResult) -> Trace {
        let mut t = result.trace(self.trace_index);
        t.states.truncate(self.position + 1);
        t.events.truncate(self.position);
        t.truncated = None;
        t
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RaceError {
    #[error("race detection needs a complete exploration, got: {0}")]
    RequiresCompleteExploration(Verdict),
}

/// Where a mailbox entry came from.
#[derive(Debug, Clone, Copy)]
enum Origin {
    /// Sent at this trace position.
    Step(usize),
    /// Already present in the start configuration.
    Initial,
}

pub fn detect_races(p: &Protocol, result: &ExplorationResult) -> Result<Vec<RaceReport>, RaceError> {
    if !result.is_complete() {
        return Err(RaceError::RequiresCompleteExploration(result.verdict()));
    }
    let mut incoming: Vec<Option<BTreeMap<Pid, Multiset<Value>>>> = vec![None; result.state_count()];
    let mut incoming_of = |node: NodeId| -> BTreeMap<Pid, Multiset<Value>> {
        incoming[node]
            .get_or_insert_with(|| incoming_at(p, result, node))
            .clone()
    };

    let mut reports = Vec::new();
    let mut seen: HashSet<(Pid, StateId, Multiset<Value>)> = HashSet::new();
    let empty = Multiset::new();

    for (trace_index, path) in result.trace_paths().iter().enumerate() {
        let start = result.state(path.nodes[0]);
        let mut origins: Vec<Vec<Origin>> = start
            .locals()
            .iter()
            .map(|l| vec![Origin::Initial; l.mailbox.len()])
            .collect();
        let mut groups_by_position: Vec<BTreeMap<Pid, Multiset<Value>>> = Vec::with_capacity(path.nodes.len());

        for (position, &node) in path.nodes.iter().enumerate() {
            groups_by_position.push(incoming_of(node));
            let g = result.state(node);
            for (i, m) in p.machines().iter().enumerate() {
                let local = g.local(i);
                let Ok(StateKind::Receive(arms)) = m.caa.state_kind(&local.state) else {
                    continue;
                };
                let live = local.mailbox.iter().zip(&origins[i]).map(|(msg, origin)| match origin {
                    Origin::Step(x) => (Some(*x), groups_by_position[*x].get(&m.pid).unwrap_or(&empty).clone()),
                    Origin::Initial => (None, std::iter::once(msg.value.clone()).collect()),
                });
                let current = groups_by_position[position].get(&m.pid).unwrap_or(&empty).clone();
                let candidates = live.chain((!current.is_empty()).then_some((Some(position), current)));
                if let Some((group_index, group, racing)) = first_consumable_group(&arms, candidates) {
                    if racing.len() < 2 {
                        continue;
                    }
                    let group_index = group_index.expect("initial mailbox entries form singleton groups");
                    if !seen.insert((m.pid, local.state.clone(), group.clone())) {
                        continue;
                    }
                    let targets: Vec<(Value, StateId)> = racing
                        .iter()
                        .map(|v| {
                            let picked = pick_arms(&arms, [v]).expect("racing messages are consumable");
                            (v.clone(), picked.next.clone())
                        })
                        .collect();
                    let distinct: HashSet<&StateId> = targets.iter().map(|(_, s)| s).collect();
                    let witness = targets
                        .iter()
                        .find(|(_, s)| *s != targets[0].1)
                        .map(|(v, s)| RaceWitness {
                            first: targets[0].0.clone(),
                            first_target: targets[0].1.clone(),
                            second: v.clone(),
                            second_target: s.clone(),
                        });
                    reports.push(RaceReport {
                        trace_index,
                        position,
                        machine: m.pid,
                        state: local.state.clone(),
                        group_index,
                        group,
                        racing_messages: racing,
                        distinct_targets: distinct.len(),
                        witness,
                    });
                }
            }
            if let Some(&edge) = path.edges.get(position) {
                match &result.node(node).edges[edge].event {
                    StepEvent::Sent { to, .. } => {
                        let j = p.index_of(*to).expect("target is a machine");
                        origins[j].push(Origin::Step(position));
                    }
                    StepEvent::Received {
                        by, mailbox_position, ..
                    } => {
                        let j = p.index_of(*by).expect("receiver is a machine");
                        origins[j].remove(*mailbox_position);
                    }
                }
            }
        }
    }
    Ok(reports)
}

/// Scans groups oldest-first and returns the first one with a consumable
/// member, together with its consumable members.
fn first_consumable_group(
    arms: &[ReceiveArm<'_>],
    groups: impl Iterator<Item = (Option<usize>, Multiset<Value>)>,
) -> Option<(Option<usize>, Multiset<Value>, Multiset<Value>)> {
    for (index, group) in groups {
        let consumable: Multiset<Value> = group
            .iter()
            .filter(|v| pick_arms(arms, [*v]).is_some())
            .cloned()
            .collect();
        if !consumable.is_empty() {
            return Some((index, group, consumable));
        }
    }
    None
}
