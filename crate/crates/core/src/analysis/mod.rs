//! Analyses over explored protocols: incoming-message multisets, races,
//! convergence of binary protocols, and compatibility tiers.

mod convergence;
mod incoming;
mod multiset;
mod races;
mod tiers;

pub use convergence::{
    check_convergence, check_convergence_preconditions, convergence_of, terminal_states, Convergence, ConvergenceError,
    PreconditionViolation, Preconditions,
};
pub use incoming::{incoming_at, incoming_multisets};
pub use multiset::Multiset;
pub use races::{detect_races, RaceError, RaceReport, RaceWitness};
pub use tiers::{all_final, classify, none_final, TierVerdict};
