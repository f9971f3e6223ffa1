use std::fmt;

use crate::semantics::{Bound, ExplorationResult, GlobalState, Protocol, Verdict};

/// Compatibility tier of a protocol, judged on the last configuration of
/// every maximal trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TierVerdict {
    /// Every trace ends with all machines final and all mailboxes empty.
    StronglyCompatible,
    /// Every trace ends with all machines final.
    WeaklyCompatible,
    /// Every trace ends with all mailboxes empty and no machine final.
    CommunicationLacking,
    Incompatible,
    Unknown(Bound),
}

impl TierVerdict {
    pub fn tier(self) -> Option<u8> {
        match self {
            TierVerdict::StronglyCompatible => Some(1),
            TierVerdict::WeaklyCompatible => Some(2),
            TierVerdict::CommunicationLacking => Some(3),
            TierVerdict::Incompatible => Some(4),
            TierVerdict::Unknown(_) => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TierVerdict::StronglyCompatible => "StronglyCompatible",
            TierVerdict::WeaklyCompatible => "WeaklyCompatible",
            TierVerdict::CommunicationLacking => "CommunicationLacking",
            TierVerdict::Incompatible => "Incompatible",
            TierVerdict::Unknown(_) => "Unknown",
        }
    }
}

impl fmt::Display for TierVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TierVerdict::Unknown(b) => write!(f, "Unknown (bound {b} exceeded)"),
            other => f.write_str(other.name()),
        }
    }
}

pub fn all_final(p: &Protocol, g: &GlobalState) -> bool {
    p.machines()
        .iter()
        .zip(g.locals())
        .all(|(m, l)| m.caa.is_final(&l.state))
}

pub fn none_final(p: &Protocol, g: &GlobalState) -> bool {
    p.machines()
        .iter()
        .zip(g.locals())
        .all(|(m, l)| !m.caa.is_final(&l.state))
}

/// Tiers are tried in order 1 to 4; the first whose condition holds on every
/// terminal configuration is returned.
pub fn classify(p: &Protocol, result: &ExplorationResult) -> TierVerdict {
    if let Verdict::BoundExceeded(b) = result.verdict() {
        return TierVerdict::Unknown(b);
    }
    let terminals: Vec<&GlobalState> = (0..result.trace_count()).map(|i| result.terminal_state(i)).collect();
    let every = |cond: &dyn Fn(&GlobalState) -> bool| terminals.iter().all(|g| cond(g));
    if every(&|g| all_final(p, g) && g.mailboxes_empty()) {
        TierVerdict::StronglyCompatible
    } else if every(&|g| all_final(p, g)) {
        TierVerdict::WeaklyCompatible
    } else if every(&|g| none_final(p, g) && g.mailboxes_empty()) {
        TierVerdict::CommunicationLacking
    } else {
        TierVerdict::Incompatible
    }
}
