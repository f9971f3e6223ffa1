//! Single-actor automata and their well-formedness rules.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::terms::{Pattern, Pid, Term};

/// Name of a control state, unique within one automaton.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateId(Arc<str>);

impl StateId {
    pub fn new(name: impl AsRef<str>) -> StateId {
        StateId(Arc::from(name.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for StateId {
    fn from(s: &str) -> StateId {
        StateId::new(s)
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Destination of a send: a variable resolved through the environment, or a literal pid.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Target {
    Var(String),
    Pid(Pid),
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Var(v) => f.write_str(v),
            Target::Pid(p) => write!(f, "{p}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Label {
    Receive(Pattern),
    Send { target: Target, payload: Term },
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Receive(p) => write!(f, "?{p}"),
            Label::Send { target, payload } => write!(f, "{target}!{payload}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Transition {
    pub from: StateId,
    pub label: Label,
    pub to: StateId,
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -- {} -> {}", self.from, self.label, self.to)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Send,
    Receive,
    Terminal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReceiveArm<'a> {
    pub pattern: &'a Pattern,
    pub next: &'a StateId,
}

/// The outgoing behaviour of one control state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StateKind<'a> {
    Send {
        target: &'a Target,
        payload: &'a Term,
        next: &'a StateId,
    },
    /// Arms in priority order.
    Receive(Vec<ReceiveArm<'a>>),
    Terminal,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AutomatonError {
    #[error("unknown state `{0}`")]
    UnknownState(StateId),
    #[error("state `{0}` mixes send and receive transitions")]
    MixedState(StateId),
    #[error("state `{0}` has more than one send transition")]
    NonAffineSend(StateId),
    #[error("state `{0}` is not a receive state")]
    NotReceiving(StateId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidationIssue {
    MixedState {
        state: StateId,
    },
    NonAffineSend {
        state: StateId,
        sends: usize,
    },
    UnreachableState {
        state: StateId,
    },
    FinalStateSends {
        state: StateId,
    },
    NonLinearPattern {
        state: StateId,
        pattern: Pattern,
        var: String,
    },
    DuplicatePattern {
        state: StateId,
        pattern: Pattern,
    },
    /// A literal send to the automaton's own pid.
    SelfSend {
        state: StateId,
        pid: Pid,
    },
    /// A literal pid target that names no machine of the protocol.
    UnknownTarget {
        state: StateId,
        pid: Pid,
    },
}

impl ValidationIssue {
    pub fn severity(&self) -> Severity {
        match self {
            ValidationIssue::UnreachableState { .. } | ValidationIssue::FinalStateSends { .. } => Severity::Warning,
            _ => Severity::Error,
        }
    }

    pub fn state(&self) -> &StateId {
        match self {
            ValidationIssue::MixedState { state }
            | ValidationIssue::NonAffineSend { state, .. }
            | ValidationIssue::UnreachableState { state }
            | ValidationIssue::FinalStateSends { state }
            | ValidationIssue::NonLinearPattern { state, .. }
            | ValidationIssue::DuplicatePattern { state, .. }
            | ValidationIssue::SelfSend { state, .. }
            | ValidationIssue::UnknownTarget { state, .. } => state,
        }
    }

    /// Stable identifier used in diagnostics, e.g. `MixedState`.
    pub fn code(&self) -> &'static str {
        match self {
            ValidationIssue::MixedState { .. } => "MixedState",
            ValidationIssue::NonAffineSend { .. } => "NonAffineSend",
            ValidationIssue::UnreachableState { .. } => "UnreachableState",
            ValidationIssue::FinalStateSends { .. } => "FinalStateSends",
            ValidationIssue::NonLinearPattern { .. } => "NonLinearPattern",
            ValidationIssue::DuplicatePattern { .. } => "DuplicatePattern",
            ValidationIssue::SelfSend { .. } => "SelfSend",
            ValidationIssue::UnknownTarget { .. } => "UnknownTarget",
        }
    }
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let code = self.code();
        match self {
            ValidationIssue::MixedState { state } => {
                write!(f, "{code}: state `{state}` has both send and receive transitions")
            }
            ValidationIssue::NonAffineSend { state, sends } => {
                write!(f, "{code}: state `{state}` has {sends} send transitions")
            }
            ValidationIssue::UnreachableState { state } => {
                write!(f, "{code}: state `{state}` is unreachable from the initial state")
            }
            ValidationIssue::FinalStateSends { state } => {
                write!(f, "{code}: final state `{state}` has an outgoing send")
            }
            ValidationIssue::NonLinearPattern { state, pattern, var } => {
                write!(
                    f,
                    "{code}: pattern `{pattern}` in state `{state}` binds `{var}` more than once"
                )
            }
            ValidationIssue::DuplicatePattern { state, pattern } => {
                write!(f, "{code}: pattern `{pattern}` occurs twice in state `{state}`")
            }
            ValidationIssue::SelfSend { state, pid } => {
                write!(f, "{code}: state `{state}` sends to its own pid {pid}")
            }
            ValidationIssue::UnknownTarget { state, pid } => {
                write!(
                    f,
                    "{code}: state `{state}` sends to {pid}, which is not in the protocol"
                )
            }
        }
    }
}

/// One actor's automaton.
///
/// States are exactly those mentioned by the initial state, the final states,
/// and the transitions, kept in order of first mention. The relative order of
/// receive transitions leaving one state is that state's pattern priority.
#[derive(Debug, Clone)]
pub struct Caa {
    states: Vec<StateId>,
    initial: StateId,
    finals: BTreeSet<StateId>,
    transitions: Vec<Transition>,
    outgoing: HashMap<StateId, Vec<usize>>,
}

impl PartialEq for Caa {
    fn eq(&self, other: &Caa) -> bool {
        self.initial == other.initial
            && self.finals == other.finals
            && self.transitions == other.transitions
            && self.states.iter().collect::<BTreeSet<_>>() == other.states.iter().collect::<BTreeSet<_>>()
    }
}

impl Eq for Caa {}

impl Caa {
    pub fn new(initial: StateId, finals: impl IntoIterator<Item = StateId>, transitions: Vec<Transition>) -> Caa {
        let finals: Vec<StateId> = finals.into_iter().collect();
        let mut states: Vec<StateId> = Vec::new();
        let mut seen = BTreeSet::new();
        let mentioned = std::iter::once(&initial)
            .chain(finals.iter())
            .chain(transitions.iter().flat_map(|t| [&t.from, &t.to]));
        for s in mentioned {
            if seen.insert(s.clone()) {
                states.push(s.clone());
            }
        }
        let mut outgoing: HashMap<StateId, Vec<usize>> = HashMap::new();
        for (i, t) in transitions.iter().enumerate() {
            outgoing.entry(t.from.clone()).or_default().push(i);
        }
        Caa {
            states,
            initial,
            finals: finals.into_iter().collect(),
            transitions,
            outgoing,
        }
    }

    pub fn builder(initial: &str) -> CaaBuilder {
        CaaBuilder {
            initial: StateId::new(initial),
            finals: Vec::new(),
            transitions: Vec::new(),
        }
    }

    pub fn states(&self) -> &[StateId] {
        &self.states
    }

    pub fn initial(&self) -> &StateId {
        &self.initial
    }

    pub fn finals(&self) -> &BTreeSet<StateId> {
        &self.finals
    }

    pub fn is_final(&self, s: &StateId) -> bool {
        self.finals.contains(s)
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn has_state(&self, s: &StateId) -> bool {
        self.states.contains(s)
    }

    /// Transitions leaving `s`, in declaration order.
    pub fn outgoing(&self, s: &StateId) -> impl Iterator<Item = &Transition> {
        self.outgoing
            .get(s)
            .into_iter()
            .flatten()
            .map(move |&i| &self.transitions[i])
    }

    pub fn enabled_kind(&self, s: &StateId) -> Result<Kind, AutomatonError> {
        Ok(match self.state_kind(s)? {
            StateKind::Send { .. } => Kind::Send,
            StateKind::Receive(_) => Kind::Receive,
            StateKind::Terminal => Kind::Terminal,
        })
    }

    pub fn state_kind(&self, s: &StateId) -> Result<StateKind<'_>, AutomatonError> {
        if !self.has_state(s) {
            return Err(AutomatonError::UnknownState(s.clone()));
        }
        let mut sends = self.outgoing(s).filter(|t| matches!(t.label, Label::Send { .. }));
        let first_send = sends.next();
        let extra_sends = sends.count();
        let arms: Vec<ReceiveArm<'_>> = self
            .outgoing(s)
            .filter_map(|t| match &t.label {
                Label::Receive(pattern) => Some(ReceiveArm { pattern, next: &t.to }),
                Label::Send { .. } => None,
            })
            .collect();
        match (first_send, arms.is_empty()) {
            (Some(_), false) => Err(AutomatonError::MixedState(s.clone())),
            (Some(_), true) if extra_sends > 0 => Err(AutomatonError::NonAffineSend(s.clone())),
            (Some(t), true) => match &t.label {
                Label::Send { target, payload } => Ok(StateKind::Send {
                    target,
                    payload,
                    next: &t.to,
                }),
                Label::Receive(_) => unreachable!(),
            },
            (None, false) => Ok(StateKind::Receive(arms)),
            (None, true) => Ok(StateKind::Terminal),
        }
    }

    /// Receive patterns of a state in priority order.
    pub fn receive_patterns(&self, s: &StateId) -> Vec<&Pattern> {
        self.outgoing(s)
            .filter_map(|t| match &t.label {
                Label::Receive(p) => Some(p),
                Label::Send { .. } => None,
            })
            .collect()
    }

    pub fn reachable_states(&self) -> BTreeSet<StateId> {
        let mut seen = BTreeSet::from([self.initial.clone()]);
        let mut queue = VecDeque::from([self.initial.clone()]);
        while let Some(s) = queue.pop_front() {
            for t in self.outgoing(&s) {
                if seen.insert(t.to.clone()) {
                    queue.push_back(t.to.clone());
                }
            }
        }
        seen
    }

    /// Every well-formedness violation, errors and warnings alike.
    pub fn validate(&self) -> Vec<ValidationIssue> {
        self.validate_as(None)
    }

    /// Like [`Caa::validate`], additionally flagging literal sends to `own`.
    pub fn validate_as(&self, own: Option<Pid>) -> Vec<ValidationIssue> {
        let mut issues = Vec::new();
        let reachable = self.reachable_states();
        for s in &self.states {
            let sends: Vec<&Transition> = self
                .outgoing(s)
                .filter(|t| matches!(t.label, Label::Send { .. }))
                .collect();
            let patterns = self.receive_patterns(s);
            if !sends.is_empty() && !patterns.is_empty() {
                issues.push(ValidationIssue::MixedState { state: s.clone() });
            }
            if sends.len() > 1 {
                issues.push(ValidationIssue::NonAffineSend {
                    state: s.clone(),
                    sends: sends.len(),
                });
            }
            if !reachable.contains(s) {
                issues.push(ValidationIssue::UnreachableState { state: s.clone() });
            }
            if !sends.is_empty() && self.is_final(s) {
                issues.push(ValidationIssue::FinalStateSends { state: s.clone() });
            }
            for (i, p) in patterns.iter().enumerate() {
                if let Some(var) = p.repeated_var() {
                    issues.push(ValidationIssue::NonLinearPattern {
                        state: s.clone(),
                        pattern: (*p).clone(),
                        var: var.to_string(),
                    });
                }
                if patterns[..i].contains(p) {
                    issues.push(ValidationIssue::DuplicatePattern {
                        state: s.clone(),
                        pattern: (*p).clone(),
                    });
                }
            }
            if let Some(own) = own {
                for t in &sends {
                    if let Label::Send {
                        target: Target::Pid(p), ..
                    } = &t.label
                    {
                        if *p == own {
                            issues.push(ValidationIssue::SelfSend {
                                state: s.clone(),
                                pid: own,
                            });
                        }
                    }
                }
            }
        }
        issues
    }
}

/// Incremental construction of a [`Caa`], mainly for tests and bindings.
#[derive(Debug, Clone)]
pub struct CaaBuilder {
    initial: StateId,
    finals: Vec<StateId>,
    transitions: Vec<Transition>,
}

impl CaaBuilder {
    pub fn final_state(mut self, s: &str) -> Self {
        self.finals.push(StateId::new(s));
        self
    }

    pub fn receive(mut self, from: &str, pattern: Pattern, to: &str) -> Self {
        self.transitions.push(Transition {
            from: StateId::new(from),
            label: Label::Receive(pattern),
            to: StateId::new(to),
        });
        self
    }

    pub fn send(mut self, from: &str, target: Target, payload: Term, to: &str) -> Self {
        self.transitions.push(Transition {
            from: StateId::new(from),
            label: Label::Send { target, payload },
            to: StateId::new(to),
        });
        self
    }

    pub fn build(self) -> Caa {
        Caa::new(self.initial, self.finals, self.transitions)
    }
}
