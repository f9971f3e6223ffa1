use std::collections::BTreeMap;

use crate::semantics::{step, ExplorationResult, GlobalState, NodeId, Protocol, StepError, StepEvent};
use crate::terms::{Pid, Value};

use super::Multiset;

/// Messages that some single step from `g` could add to each mailbox.
///
/// Each successor appends at most one message, so this is the multiset sum
/// of the appended messages; every machine of the protocol gets an entry.
pub fn incoming_multisets(p: &Protocol, g: &GlobalState) -> Result<BTreeMap<Pid, Multiset<Value>>, StepError> {
    let successors = step(p, g)?;
    Ok(collect(p, successors.iter().map(|(e, _)| e)))
}

/// Same as [`incoming_multisets`], read off the out-edges of an explored node.
pub fn incoming_at(p: &Protocol, result: &ExplorationResult, node: NodeId) -> BTreeMap<Pid, Multiset<Value>> {
    collect(p, result.node(node).edges.iter().map(|e| &e.event))
}

fn collect<'a>(p: &Protocol, events: impl Iterator<Item = &'a StepEvent>) -> BTreeMap<Pid, Multiset<Value>> {
    let mut out: BTreeMap<Pid, Multiset<Value>> = p.pids().map(|pid| (pid, Multiset::new())).collect();
    for event in events {
        if let StepEvent::Sent { to, value, .. } = event {
            out.entry(*to).or_default().insert(value.clone());
        }
    }
    out
}
