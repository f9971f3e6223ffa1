//! Convergence of binary protocols.
//!
//! Two machines without mixed states, with affine sends and without
//! self-messaging are expected to behave deterministically. The check here
//! does not assume that: it explores the protocol and reports what it finds.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::automaton::{Label, Severity, StateId, Target};
use crate::semantics::{
    explore, Bound, Bounds, ExplorationResult, ExploreError, GlobalState, Protocol, ProtocolIssue, StepError, Trace,
    Verdict,
};
use crate::terms::{Pid, Term};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PreconditionViolation {
    /// Only two-machine protocols are covered.
    Arity(usize),
    /// An automaton well-formedness error (mixed state, non-affine send, ...).
    Malformed(ProtocolIssue),
    /// A literal send to the sender's own pid.
    SelfSend { machine: Pid, state: StateId },
    /// The target variable can be bound to the sender's own pid.
    PossibleSelfSend { machine: Pid, state: StateId, var: String },
    /// The target variable's binding cannot be determined statically; it is
    /// checked while exploring instead.
    UnprovenTarget { machine: Pid, state: StateId, var: String },
}

impl PreconditionViolation {
    /// Whether the violation rules out the convergence check.
    pub fn is_blocking(&self) -> bool {
        !matches!(self, PreconditionViolation::UnprovenTarget { .. })
    }
}

impl fmt::Display for PreconditionViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PreconditionViolation::Arity(n) => write!(f, "protocol has {n} machines, not 2"),
            PreconditionViolation::Malformed(issue) => write!(f, "{issue}"),
            PreconditionViolation::SelfSend { machine, state } => {
                write!(f, "machine {machine} sends to itself from state `{state}`")
            }
            PreconditionViolation::PossibleSelfSend { machine, state, var } => {
                write!(
                    f,
                    "machine {machine}: `{var}` in state `{state}` may be bound to its own pid"
                )
            }
            PreconditionViolation::UnprovenTarget { machine, state, var } => {
                write!(
                    f,
                    "machine {machine}: binding of target `{var}` in state `{state}` is only known at run time"
                )
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Preconditions {
    Satisfied,
    Violations(Vec<PreconditionViolation>),
}

impl Preconditions {
    pub fn is_satisfied(&self) -> bool {
        matches!(self, Preconditions::Satisfied)
    }

    pub fn violations(&self) -> &[PreconditionViolation] {
        match self {
            Preconditions::Satisfied => &[],
            Preconditions::Violations(v) => v,
        }
    }

    /// True when no violation blocks the check.
    pub fn permits_check(&self) -> bool {
        self.violations().iter().all(|v| !v.is_blocking())
    }
}

/// What a variable target may hold, as far as the peer's literal payloads tell.
#[derive(Debug, Default)]
struct TargetFacts {
    pids: BTreeSet<Pid>,
    opaque: bool,
    bound_somewhere: bool,
}

pub fn check_convergence_preconditions(p: &Protocol) -> Preconditions {
    let mut violations = Vec::new();
    if p.arity() != 2 {
        violations.push(PreconditionViolation::Arity(p.arity()));
    }
    for issue in p.validate() {
        if issue.severity() != Severity::Error {
            continue;
        }
        if let crate::automaton::ValidationIssue::SelfSend { state, .. } = &issue.issue {
            violations.push(PreconditionViolation::SelfSend {
                machine: issue.pid,
                state: state.clone(),
            });
        } else {
            violations.push(PreconditionViolation::Malformed(issue));
        }
    }
    for (i, m) in p.machines().iter().enumerate() {
        let peers: Vec<_> = p
            .machines()
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, m)| m)
            .collect();
        for t in m.caa.transitions() {
            let Label::Send {
                target: Target::Var(var),
                ..
            } = &t.label
            else {
                continue;
            };
            let mut facts = TargetFacts::default();
            for pattern in m.caa.transitions().iter().filter_map(|t| match &t.label {
                Label::Receive(p) => Some(p),
                Label::Send { .. } => None,
            }) {
                for peer in &peers {
                    for payload in peer.caa.transitions().iter().filter_map(|t| match &t.label {
                        Label::Send { payload, .. } => Some(payload),
                        Label::Receive(_) => None,
                    }) {
                        flow(pattern.as_term(), payload, var, &mut facts);
                    }
                }
            }
            let state = t.from.clone();
            if facts.pids.contains(&m.pid) {
                violations.push(PreconditionViolation::PossibleSelfSend {
                    machine: m.pid,
                    state,
                    var: var.clone(),
                });
            } else if facts.opaque || !facts.bound_somewhere {
                violations.push(PreconditionViolation::UnprovenTarget {
                    machine: m.pid,
                    state,
                    var: var.clone(),
                });
            }
        }
    }
    if violations.is_empty() {
        Preconditions::Satisfied
    } else {
        Preconditions::Violations(violations)
    }
}

/// Records what `payload` would bind `var` to if it matched `pattern`.
/// Variables and arithmetic in the payload are opaque.
fn flow(pattern: &Term, payload: &Term, var: &str, facts: &mut TargetFacts) {
    if !could_match(pattern, payload) {
        return;
    }
    bind(pattern, Some(payload), var, facts);
}

fn bind(pattern: &Term, payload: Option<&Term>, var: &str, facts: &mut TargetFacts) {
    match pattern {
        Term::Var(v) if v == var => {
            facts.bound_somewhere = true;
            match payload {
                Some(Term::Pid(pid)) => {
                    facts.pids.insert(*pid);
                }
                Some(Term::Atom(_) | Term::Int(_) | Term::Tuple(_)) => {}
                Some(Term::Var(_) | Term::BinOp(..)) | None => facts.opaque = true,
            }
        }
        Term::Tuple(ps) => match payload {
            Some(Term::Tuple(ts)) => ps.iter().zip(ts).for_each(|(p, t)| bind(p, Some(t), var, facts)),
            _ => ps.iter().for_each(|p| bind(p, None, var, facts)),
        },
        _ => {}
    }
}

fn could_match(pattern: &Term, payload: &Term) -> bool {
    match (pattern, payload) {
        (Term::Var(_), _) | (_, Term::Var(_)) => true,
        (Term::Atom(a), Term::Atom(b)) => a == b,
        (Term::Int(_), Term::BinOp(..)) => true,
        (Term::Int(a), Term::Int(b)) => a == b,
        (Term::Pid(a), Term::Pid(b)) => a == b,
        (Term::Tuple(ps), Term::Tuple(ts)) => ps.len() == ts.len() && ps.iter().zip(ts).all(|(p, t)| could_match(p, t)),
        _ => false,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Convergence {
    /// Exactly one maximal trace.
    Converges {
        trace: Trace,
    },
    /// At least two maximal traces; the pair differs first at `first_difference`.
    Diverges {
        first: Trace,
        second: Trace,
        first_difference: usize,
        /// Whether all maximal traces end in the same configuration.
        same_terminal: bool,
        trace_count: usize,
    },
    Unknown(Bound),
}

#[derive(Debug, Error)]
pub enum ConvergenceError {
    #[error("convergence preconditions do not hold: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Preconditions(Vec<PreconditionViolation>),
    #[error("self-message at run time: {0}")]
    RuntimeSelfMessage(StepError),
    #[error(transparent)]
    Explore(ExploreError),
}

pub fn check_convergence(p: &Protocol, bounds: &Bounds) -> Result<Convergence, ConvergenceError> {
    let pre = check_convergence_preconditions(p);
    if !pre.permits_check() {
        return Err(ConvergenceError::Preconditions(
            pre.violations().iter().filter(|v| v.is_blocking()).cloned().collect(),
        ));
    }
    let result = explore(p, bounds).map_err(|e| match e {
        ExploreError::Step(err @ StepError::SelfMessage { .. }) => ConvergenceError::RuntimeSelfMessage(err),
        other => ConvergenceError::Explore(other),
    })?;
    Ok(convergence_of(&result))
}

/// Distinct last configurations over all maximal traces.
pub fn terminal_states(result: &ExplorationResult) -> BTreeSet<&GlobalState> {
    (0..result.trace_count()).map(|i| result.terminal_state(i)).collect()
}

pub fn convergence_of(result: &ExplorationResult) -> Convergence {
    if let Verdict::BoundExceeded(b) = result.verdict() {
        return Convergence::Unknown(b);
    }
    if result.trace_count() == 1 {
        return Convergence::Converges { trace: result.trace(0) };
    }
    let base = result.terminal_state(0);
    let other = (1..result.trace_count())
        .find(|&i| result.terminal_state(i) != base)
        .unwrap_or(1);
    let first = result.trace(0);
    let second = result.trace(other);
    let first_difference = first
        .states
        .iter()
        .zip(&second.states)
        .position(|(a, b)| a != b)
        .unwrap_or_else(|| first.len().min(second.len()));
    Convergence::Diverges {
        first,
        second,
        first_difference,
        same_terminal: terminal_states(result).len() == 1,
        trace_count: result.trace_count(),
    }
}
