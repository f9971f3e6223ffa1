use std::fmt;

use crate::automaton::StateId;
use crate::terms::{Env, Pid, Value};

use super::Protocol;

/// A mailbox entry. Equality ignores when the message was sent so that
/// configurations reached along different paths are shared.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Message {
    pub value: Value,
    pub sender: Pid,
}

/// A mailbox entry annotated with the trace position of its send.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TaggedMessage {
    pub value: Value,
    pub sender: Pid,
    pub origin_step: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LocalState {
    pub state: StateId,
    /// Oldest message first.
    pub mailbox: Vec<Message>,
    pub env: Env,
}

impl LocalState {
    pub fn mailbox_values(&self) -> impl Iterator<Item = &Value> {
        self.mailbox.iter().map(|m| &m.value)
    }
}

impl fmt::Display for LocalState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, [", self.state)?;
        for (i, m) in self.mailbox.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}", m.value)?;
        }
        write!(f, "], {})", self.env)
    }
}

/// One local state per machine, in protocol order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GlobalState {
    locals: Vec<LocalState>,
}

impl GlobalState {
    pub fn new(locals: Vec<LocalState>) -> GlobalState {
        GlobalState { locals }
    }

    pub fn locals(&self) -> &[LocalState] {
        &self.locals
    }

    pub(crate) fn locals_mut(&mut self) -> &mut [LocalState] {
        &mut self.locals
    }

    pub fn local(&self, index: usize) -> &LocalState {
        &self.locals[index]
    }

    pub fn max_mailbox_len(&self) -> usize {
        self.locals.iter().map(|l| l.mailbox.len()).max().unwrap_or(0)
    }

    pub fn mailboxes_empty(&self) -> bool {
        self.locals.iter().all(|l| l.mailbox.is_empty())
    }
}

impl fmt::Display for GlobalState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<")?;
        for (i, l) in self.locals.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{l}")?;
        }
        f.write_str(">")
    }
}

/// Every machine in its initial state with an empty mailbox and memory.
pub fn initial_state(p: &Protocol) -> GlobalState {
    GlobalState::new(
        p.machines()
            .iter()
            .map(|m| LocalState {
                state: m.caa.initial().clone(),
                mailbox: Vec::new(),
                env: Env::new(),
            })
            .collect(),
    )
}
