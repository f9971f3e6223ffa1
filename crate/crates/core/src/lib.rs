//! Communicating actor automata.
//!
//! Finite-state actors exchange messages through Erlang-style mailboxes:
//! sends append to the receiver's mailbox, and a receive takes the oldest
//! message matching any of the current state's patterns, trying patterns in
//! declaration order. Send targets may be variables bound by earlier
//! receives, so the communication topology can change at run time.
//!
//! * [`terms`]: terms, values, patterns, matching and evaluation.
//! * [`automaton`]: single-actor automata and their validation.
//! * [`semantics`]: protocols, the step relation, exhaustive exploration.
//! * [`analysis`]: incoming-message multisets, races, convergence, compatibility tiers.
//! * [`dsl`]: the `.caa` text format and Erlang skeleton generation.
//! * [`report`]: text and JSON renderings used by the CLI and bindings.

pub mod analysis;
pub mod automaton;
pub mod dsl;
pub mod report;
pub mod semantics;
pub mod terms;

pub use automaton::{Caa, Label, StateId, Target, Transition};
pub use semantics::{explore, Bounds, ExplorationResult, GlobalState, Protocol, Trace};
pub use terms::{Env, Pattern, Pid, Term, Value};
