//! Bounded exhaustive exploration of the step relation.
//!
//! Exploration runs in two phases. A level-synchronous breadth-first pass
//! builds the reachability graph, memoizing configurations by structural
//! equality; successor computation for one level is spread over a rayon pool
//! but results are merged in frontier order, so node numbering is independent
//! of scheduling. A depth-first pass then enumerates the maximal paths of that
//! graph.

use std::fmt;

use indexmap::IndexSet;
use rayon::prelude::*;
use thiserror::Error;

use super::{initial_state, step, GlobalState, Protocol, ProtocolIssue, StepError, StepEvent};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    /// Longest trace, in steps.
    pub max_depth: usize,
    pub max_mailbox_len: usize,
    pub max_states: usize,
    /// Number of maximal traces enumerated before giving up.
    pub max_traces: usize,
}

impl Default for Bounds {
    fn default() -> Bounds {
        Bounds {
            max_depth: 10_000,
            max_mailbox_len: 64,
            max_states: 1_000_000,
            max_traces: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Bound {
    MaxDepth,
    MaxMailboxLen,
    MaxStates,
    MaxTraces,
}

impl Bound {
    pub fn name(self) -> &'static str {
        match self {
            Bound::MaxDepth => "max_depth",
            Bound::MaxMailboxLen => "max_mailbox_len",
            Bound::MaxStates => "max_states",
            Bound::MaxTraces => "max_traces",
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Complete,
    BoundExceeded(Bound),
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Complete => f.write_str("complete"),
            Verdict::BoundExceeded(b) => write!(f, "bound exceeded ({b})"),
        }
    }
}

#[derive(Debug, Error)]
pub enum ExploreError {
    #[error("protocol has validation errors: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<ProtocolIssue>),
    #[error(transparent)]
    Step(#[from] StepError),
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub event: StepEvent,
    pub target: NodeId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub edges: Vec<Edge>,
    /// Breadth-first distance from the start configuration.
    pub depth: usize,
    /// Set when some successors were not explored.
    pub truncated: Option<Bound>,
}

/// A maximal path through the reachability graph, by node and edge index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TracePath {
    pub nodes: Vec<NodeId>,
    /// `edges[k]` indexes the out-edges of `nodes[k]`.
    pub edges: Vec<usize>,
    pub truncated: Option<Bound>,
}

/// A sequence of configurations linked by steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub states: Vec<GlobalState>,
    pub events: Vec<StepEvent>,
    pub truncated: Option<Bound>,
}

impl Trace {
    pub fn last(&self) -> &GlobalState {
        self.states.last().expect("a trace has at least one state")
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExplorationResult {
    states: IndexSet<GlobalState>,
    nodes: Vec<Node>,
    traces: Vec<TracePath>,
    verdict: Verdict,
}

impl ExplorationResult {
    pub fn verdict(&self) -> Verdict {
        self.verdict
    }

    pub fn is_complete(&self) -> bool {
        self.verdict == Verdict::Complete
    }

    /// Node 0 is the start configuration.
    pub fn state(&self, id: NodeId) -> &GlobalState {
        &self.states[id]
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn node_id(&self, g: &GlobalState) -> Option<NodeId> {
        self.states.get_index_of(g)
    }

    pub fn state_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.nodes.iter().map(|n| n.edges.len()).sum()
    }

    pub fn trace_count(&self) -> usize {
        self.traces.len()
    }

    pub fn trace_paths(&self) -> &[TracePath] {
        &self.traces
    }

    pub fn trace(&self, index: usize) -> Trace {
        self.materialize(&self.traces[index])
    }

    pub fn traces(&self) -> impl Iterator<Item = Trace> + '_ {
        self.traces.iter().map(|p| self.materialize(p))
    }

    /// The last configuration of each maximal trace.
    pub fn terminal_state(&self, index: usize) -> &GlobalState {
        let path = &self.traces[index];
        self.state(*path.nodes.last().expect("non-empty path"))
    }

    fn materialize(&self, path: &TracePath) -> Trace {
        Trace {
            states: path.nodes.iter().map(|&n| self.states[n].clone()).collect(),
            events: path
                .nodes
                .iter()
                .zip(&path.edges)
                .map(|(&n, &e)| self.nodes[n].edges[e].event.clone())
                .collect(),
            truncated: path.truncated,
        }
    }
}

/// Exploration with a configurable worker count.
#[derive(Debug, Clone)]
pub struct Explorer<'p> {
    protocol: &'p Protocol,
    bounds: Bounds,
    jobs: Option<usize>,
}

impl<'p> Explorer<'p> {
    pub fn new(protocol: &'p Protocol) -> Explorer<'p> {
        Explorer {
            protocol,
            bounds: Bounds::default(),
            jobs: None,
        }
    }

    pub fn bounds(mut self, bounds: Bounds) -> Self {
        self.bounds = bounds;
        self
    }

    /// Worker threads; `None` uses rayon's global pool.
    pub fn jobs(mut self, jobs: Option<usize>) -> Self {
        self.jobs = jobs;
        self
    }

    pub fn run(&self) -> Result<ExplorationResult, ExploreError> {
        self.run_from(initial_state(self.protocol))
    }

    pub fn run_from(&self, start: GlobalState) -> Result<ExplorationResult, ExploreError> {
        let errors = self.protocol.errors();
        if !errors.is_empty() {
            return Err(ExploreError::Invalid(errors));
        }
        match self.jobs {
            None => build(self.protocol, start, &self.bounds),
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| ExploreError::Pool(e.to_string()))?
                .install(|| build(self.protocol, start, &self.bounds)),
        }
    }
}

pub fn explore(p: &Protocol, bounds: &Bounds) -> Result<ExplorationResult, ExploreError> {
    Explorer::new(p).bounds(*bounds).run()
}

/// Explores from an arbitrary configuration of `p`.
pub fn explore_from(p: &Protocol, start: GlobalState, bounds: &Bounds) -> Result<ExplorationResult, ExploreError> {
    Explorer::new(p).bounds(*bounds).run_from(start)
}

fn build(p: &Protocol, start: GlobalState, bounds: &Bounds) -> Result<ExplorationResult, ExploreError> {
    let mut states = IndexSet::new();
    states.insert(start);
    let mut nodes = vec![Node {
        edges: Vec::new(),
        depth: 0,
        truncated: None,
    }];
    let mut verdict = Verdict::Complete;
    let mut frontier: Vec<NodeId> = vec![0];
    let mut depth = 0;

    while !frontier.is_empty() {
        let expanded: Vec<Result<Vec<(StepEvent, GlobalState)>, StepError>> =
            frontier.par_iter().map(|&id| step(p, &states[id])).collect();
        let mut next_frontier = Vec::new();
        for (&id, successors) in frontier.iter().zip(expanded) {
            let successors = successors?;
            if successors.is_empty() {
                continue;
            }
            if depth >= bounds.max_depth {
                nodes[id].truncated = Some(Bound::MaxDepth);
                verdict = exceeded(verdict, Bound::MaxDepth);
                continue;
            }
            let fresh = successors.iter().filter(|(_, g)| !states.contains(g)).count();
            if states.len() + fresh > bounds.max_states {
                nodes[id].truncated = Some(Bound::MaxStates);
                verdict = exceeded(verdict, Bound::MaxStates);
                continue;
            }
            for (event, g) in successors {
                if g.max_mailbox_len() > bounds.max_mailbox_len {
                    nodes[id].truncated = Some(Bound::MaxMailboxLen);
                    verdict = exceeded(verdict, Bound::MaxMailboxLen);
                    continue;
                }
                let (target, inserted) = states.insert_full(g);
                if inserted {
                    nodes.push(Node {
                        edges: Vec::new(),
                        depth: depth + 1,
                        truncated: None,
                    });
                    next_frontier.push(target);
                }
                nodes[id].edges.push(Edge { event, target });
            }
        }
        frontier = next_frontier;
        depth += 1;
    }

    let (traces, trace_verdict) = enumerate_paths(&nodes, bounds);
    if let Verdict::BoundExceeded(b) = trace_verdict {
        verdict = exceeded(verdict, b);
    }
    Ok(ExplorationResult {
        states,
        nodes,
        traces,
        verdict,
    })
}

fn exceeded(current: Verdict, bound: Bound) -> Verdict {
    match current {
        Verdict::Complete => Verdict::BoundExceeded(bound),
        other => other,
    }
}

/// Depth-first enumeration of maximal paths from node 0.
///
/// A path that closes a cycle could be extended forever; it is cut at the
/// repeated node and marked as exceeding the depth bound.
fn enumerate_paths(nodes: &[Node], bounds: &Bounds) -> (Vec<TracePath>, Verdict) {
    let mut traces: Vec<TracePath> = Vec::new();
    let mut verdict = Verdict::Complete;
    let mut on_path = vec![false; nodes.len()];
    // (node, next out-edge to try)
    let mut stack: Vec<(NodeId, usize)> = vec![(0, 0)];
    on_path[0] = true;

    let mut emit = |path: TracePath, traces: &mut Vec<TracePath>| -> bool {
        if traces.len() >= bounds.max_traces {
            verdict = exceeded(verdict, Bound::MaxTraces);
            return false;
        }
        if let Some(b) = path.truncated {
            verdict = exceeded(verdict, b);
        }
        traces.push(path);
        true
    };

    while let Some(&(node, next)) = stack.last() {
        let n = &nodes[node];
        if next == 0 {
            let leaf = if n.edges.is_empty() {
                Some(n.truncated)
            } else if stack.len() > bounds.max_depth {
                Some(Some(Bound::MaxDepth))
            } else {
                None
            };
            if let Some(truncated) = leaf {
                if !emit(path_of(&stack, None, truncated), &mut traces) {
                    break;
                }
                on_path[node] = false;
                stack.pop();
                continue;
            }
            if let Some(b) = n.truncated {
                if !emit(path_of(&stack, None, Some(b)), &mut traces) {
                    break;
                }
            }
        }
        if next < n.edges.len() {
            let target = n.edges[next].target;
            stack.last_mut().expect("non-empty").1 += 1;
            if on_path[target] {
                if !emit(path_of(&stack, Some(target), Some(Bound::MaxDepth)), &mut traces) {
                    break;
                }
            } else {
                on_path[target] = true;
                stack.push((target, 0));
            }
        } else {
            on_path[node] = false;
            stack.pop();
        }
    }
    (traces, verdict)
}

/// The current DFS path, optionally extended through the last taken edge to `extra`.
fn path_of(stack: &[(NodeId, usize)], extra: Option<NodeId>, truncated: Option<Bound>) -> TracePath {
    let mut nodes: Vec<NodeId> = stack.iter().map(|&(n, _)| n).collect();
    // The edge taken out of each node is the one before its cursor.
    let mut edges: Vec<usize> = stack[..stack.len() - 1].iter().map(|&(_, e)| e - 1).collect();
    if let Some(n) = extra {
        edges.push(stack.last().expect("non-empty").1 - 1);
        nodes.push(n);
    }
    TracePath {
        nodes,
        edges,
        truncated,
    }
}
