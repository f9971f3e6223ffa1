use std::fmt;

use thiserror::Error;

use crate::automaton::{AutomatonError, Caa, ReceiveArm, StateId, StateKind, Target};
use crate::terms::{evaluate, match_pattern, substitute, Env, EvalError, Pattern, Pid, Value};

use super::{GlobalState, Message, Protocol};

/// The outcome of a successful pick: which message, which arm, what bindings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Picked<'a> {
    pub index: usize,
    pub pattern: &'a Pattern,
    pub next: &'a StateId,
    pub env: Env,
}

/// Erlang-style selective receive.
///
/// Scans the mailbox oldest-first; the first message matching any arm is
/// taken, and among the arms it matches the earliest declared wins.
pub fn pick_arms<'a, 'm>(arms: &[ReceiveArm<'a>], mailbox: impl IntoIterator<Item = &'m Value>) -> Option<Picked<'a>> {
    mailbox.into_iter().enumerate().find_map(|(index, value)| {
        arms.iter().find_map(|arm| {
            match_pattern(value, arm.pattern).map(|env| Picked {
                index,
                pattern: arm.pattern,
                next: arm.next,
                env,
            })
        })
    })
}

/// [`pick_arms`] on the receive arms of `state`.
pub fn pick<'a, 'm>(
    caa: &'a Caa,
    state: &StateId,
    mailbox: impl IntoIterator<Item = &'m Value>,
) -> Result<Option<Picked<'a>>, AutomatonError> {
    match caa.state_kind(state)? {
        StateKind::Receive(arms) => Ok(pick_arms(&arms, mailbox)),
        _ => Err(AutomatonError::NotReceiving(state.clone())),
    }
}

/// Edge label of the reachability graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum StepEvent {
    Sent {
        from: Pid,
        to: Pid,
        value: Value,
    },
    Received {
        by: Pid,
        value: Value,
        pattern: Pattern,
        /// Index into the mailbox before the step.
        mailbox_position: usize,
    },
}

impl StepEvent {
    /// The machine that moved.
    pub fn actor(&self) -> Pid {
        match self {
            StepEvent::Sent { from, .. } => *from,
            StepEvent::Received { by, .. } => *by,
        }
    }
}

impl fmt::Display for StepEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepEvent::Sent { from, to, value } => write!(f, "{from} sends {value} to {to}"),
            StepEvent::Received {
                by,
                value,
                pattern,
                mailbox_position,
            } => write!(
                f,
                "{by} receives {value} at position {mailbox_position} with ?{pattern}"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StepError {
    #[error("machine {machine} in state `{state}` sends to itself with `{label}`")]
    SelfMessage {
        machine: Pid,
        state: StateId,
        label: String,
    },
    #[error("machine {machine} in state `{state}`: target `{target}` of `{label}` is not a pid of the protocol")]
    UnknownTarget {
        machine: Pid,
        state: StateId,
        label: String,
        target: String,
    },
    #[error("machine {machine} in state `{state}`: cannot evaluate payload of `{label}`: {source}")]
    Eval {
        machine: Pid,
        state: StateId,
        label: String,
        source: EvalError,
    },
    #[error("machine {machine}: {source}")]
    Malformed { machine: Pid, source: AutomatonError },
}

impl StepError {
    pub fn machine(&self) -> Pid {
        match self {
            StepError::SelfMessage { machine, .. }
            | StepError::UnknownTarget { machine, .. }
            | StepError::Eval { machine, .. }
            | StepError::Malformed { machine, .. } => *machine,
        }
    }
}

/// All successors of `g`, at most one per machine, in protocol order.
///
/// A send whose payload still mentions an unbound variable is not enabled:
/// the machine waits, exactly like a receive with no matching message.
pub fn step(p: &Protocol, g: &GlobalState) -> Result<Vec<(StepEvent, GlobalState)>, StepError> {
    let mut out = Vec::new();
    for (i, m) in p.machines().iter().enumerate() {
        let local = g.local(i);
        let kind = m
            .caa
            .state_kind(&local.state)
            .map_err(|source| StepError::Malformed { machine: m.pid, source })?;
        match kind {
            StateKind::Terminal => {}
            StateKind::Send { target, payload, next } => {
                let label = || format!("{target}!{payload}");
                let to = resolve_target(target, &local.env).ok_or_else(|| StepError::UnknownTarget {
                    machine: m.pid,
                    state: local.state.clone(),
                    label: label(),
                    target: match target {
                        Target::Var(v) => match local.env.get(v) {
                            Some(bound) => format!("{v} = {bound}"),
                            None => format!("{v} (unbound)"),
                        },
                        Target::Pid(p) => p.to_string(),
                    },
                })?;
                let j = p.index_of(to).ok_or_else(|| StepError::UnknownTarget {
                    machine: m.pid,
                    state: local.state.clone(),
                    label: label(),
                    target: to.to_string(),
                })?;
                if j == i {
                    return Err(StepError::SelfMessage {
                        machine: m.pid,
                        state: local.state.clone(),
                        label: label(),
                    });
                }
                let value = match evaluate(&substitute(&local.env, payload)) {
                    Ok(v) => v,
                    Err(EvalError::OpenTerm(_)) => continue,
                    Err(source) => {
                        return Err(StepError::Eval {
                            machine: m.pid,
                            state: local.state.clone(),
                            label: label(),
                            source,
                        })
                    }
                };
                let mut next_g = g.clone();
                let locals = next_g.locals_mut();
                locals[i].state = next.clone();
                locals[j].mailbox.push(Message {
                    value: value.clone(),
                    sender: m.pid,
                });
                out.push((StepEvent::Sent { from: m.pid, to, value }, next_g));
            }
            StateKind::Receive(arms) => {
                let Some(picked) = pick_arms(&arms, local.mailbox_values()) else {
                    continue;
                };
                let mut next_g = g.clone();
                let target = &mut next_g.locals_mut()[i];
                let msg = target.mailbox.remove(picked.index);
                target.state = picked.next.clone();
                target.env = target.env.merge(&picked.env);
                out.push((
                    StepEvent::Received {
                        by: m.pid,
                        value: msg.value,
                        pattern: picked.pattern.clone(),
                        mailbox_position: picked.index,
                    },
                    next_g,
                ));
            }
        }
    }
    Ok(out)
}

fn resolve_target(target: &Target, env: &Env) -> Option<Pid> {
    match target {
        Target::Pid(p) => Some(*p),
        Target::Var(v) => env.get(v).and_then(Value::as_pid),
    }
}
