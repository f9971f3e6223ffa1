use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{initial_state, step, Bound, Bounds, ExploreError, Protocol, Trace};

/// One random maximal (or truncated) trace.
///
/// Each step chooses uniformly among the successors using a ChaCha8 stream
/// seeded by `seed`, so equal seeds give equal traces.
pub fn run_one(p: &Protocol, seed: u64, bounds: &Bounds) -> Result<Trace, ExploreError> {
    let errors = p.errors();
    if !errors.is_empty() {
        return Err(ExploreError::Invalid(errors));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut current = initial_state(p);
    let mut trace = Trace {
        states: Vec::new(),
        events: Vec::new(),
        truncated: None,
    };
    loop {
        let mut successors = step(p, &current)?;
        if successors.is_empty() {
            break;
        }
        if trace.events.len() >= bounds.max_depth {
            trace.truncated = Some(Bound::MaxDepth);
            break;
        }
        let (event, next) = successors.swap_remove(rng.random_range(0..successors.len()));
        if next.max_mailbox_len() > bounds.max_mailbox_len {
            trace.truncated = Some(Bound::MaxMailboxLen);
            break;
        }
        trace.states.push(std::mem::replace(&mut current, next));
        trace.events.push(event);
    }
    trace.states.push(current);
    Ok(trace)
}
