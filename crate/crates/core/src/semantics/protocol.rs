use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::automaton::{Caa, Label, Severity, Target, ValidationIssue};
use crate::terms::Pid;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Machine {
    pub pid: Pid,
    pub caa: Caa,
}

/// A finite family of automata with distinct pids, in declaration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Protocol {
    machines: Vec<Machine>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("duplicate machine pid {0}")]
    DuplicatePid(Pid),
    #[error("a protocol needs at least one machine")]
    Empty,
}

/// A validation issue located in one machine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtocolIssue {
    pub pid: Pid,
    pub issue: ValidationIssue,
}

impl ProtocolIssue {
    pub fn severity(&self) -> Severity {
        self.issue.severity()
    }
}

impl fmt::Display for ProtocolIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "machine {}: {}", self.pid, self.issue)
    }
}

impl Protocol {
    pub fn new(machines: impl IntoIterator<Item = (Pid, Caa)>) -> Result<Protocol, ProtocolError> {
        let machines: Vec<Machine> = machines.into_iter().map(|(pid, caa)| Machine { pid, caa }).collect();
        if machines.is_empty() {
            return Err(ProtocolError::Empty);
        }
        let mut seen = BTreeSet::new();
        for m in &machines {
            if !seen.insert(m.pid) {
                return Err(ProtocolError::DuplicatePid(m.pid));
            }
        }
        Ok(Protocol { machines })
    }

    pub fn machines(&self) -> &[Machine] {
        &self.machines
    }

    pub fn arity(&self) -> usize {
        self.machines.len()
    }

    pub fn index_of(&self, pid: Pid) -> Option<usize> {
        self.machines.iter().position(|m| m.pid == pid)
    }

    pub fn machine(&self, pid: Pid) -> Option<&Machine> {
        self.machines.iter().find(|m| m.pid == pid)
    }

    pub fn pids(&self) -> impl Iterator<Item = Pid> + '_ {
        self.machines.iter().map(|m| m.pid)
    }

    /// Automaton issues of every machine plus protocol-level target checks.
    pub fn validate(&self) -> Vec<ProtocolIssue> {
        let mut out = Vec::new();
        for m in &self.machines {
            for issue in m.caa.validate_as(Some(m.pid)) {
                out.push(ProtocolIssue { pid: m.pid, issue });
            }
            for t in m.caa.transitions() {
                if let Label::Send {
                    target: Target::Pid(p), ..
                } = &t.label
                {
                    if self.index_of(*p).is_none() {
                        out.push(ProtocolIssue {
                            pid: m.pid,
                            issue: ValidationIssue::UnknownTarget {
                                state: t.from.clone(),
                                pid: *p,
                            },
                        });
                    }
                }
            }
        }
        out
    }

    pub fn errors(&self) -> Vec<ProtocolIssue> {
        self.validate()
            .into_iter()
            .filter(|i| i.severity() == Severity::Error)
            .collect()
    }
}
