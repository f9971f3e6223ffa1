//! Protocols of communicating automata and their operational semantics.

mod explore;
mod protocol;
mod simulate;
mod state;
mod step;

pub use explore::{
    explore, explore_from, Bound, Bounds, Edge, ExplorationResult, ExploreError, Explorer, Node, NodeId, Trace,
    TracePath, Verdict,
};
pub use protocol::{Machine, Protocol, ProtocolError, ProtocolIssue};
pub use simulate::run_one;
pub use state::{initial_state, GlobalState, LocalState, Message, TaggedMessage};
pub use step::{pick, pick_arms, step, Picked, StepError, StepEvent};
