//! Python bindings: parse protocols, explore them and run the analyses.

use std::sync::Arc;

use caa_core::analysis::{self, Convergence, TierVerdict};
use caa_core::automaton::Severity;
use caa_core::dsl::{emit_erlang, parse_protocol, print_protocol, ProtocolDoc};
use caa_core::report;
use caa_core::semantics::{self, Bounds, ExplorationResult, ExploreError, Explorer, Protocol, Verdict};
use pyo3::create_exception;
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

create_exception!(caa, ParseError, PyValueError, "The protocol text does not parse.");
create_exception!(
    caa,
    ValidationError,
    PyValueError,
    "The protocol has validation errors."
);
create_exception!(
    caa,
    StepError,
    PyRuntimeError,
    "A step of the protocol failed at run time."
);
create_exception!(
    caa,
    PreconditionError,
    PyValueError,
    "Convergence preconditions do not hold."
);

fn explore_err(e: ExploreError) -> PyErr {
    match e {
        ExploreError::Invalid(_) => ValidationError::new_err(e.to_string()),
        ExploreError::Step(_) => StepError::new_err(e.to_string()),
        ExploreError::Pool(_) => PyRuntimeError::new_err(e.to_string()),
    }
}

fn bounds(
    max_depth: Option<usize>,
    max_mailbox: Option<usize>,
    max_states: Option<usize>,
    max_traces: Option<usize>,
) -> PyResult<Bounds> {
    let d = Bounds::default();
    let b = Bounds {
        max_depth: max_depth.unwrap_or(d.max_depth),
        max_mailbox_len: max_mailbox.unwrap_or(d.max_mailbox_len),
        max_states: max_states.unwrap_or(d.max_states),
        max_traces: max_traces.unwrap_or(d.max_traces),
    };
    if b.max_depth == 0 || b.max_mailbox_len == 0 || b.max_states == 0 || b.max_traces == 0 {
        return Err(PyValueError::new_err("bounds must be at least 1"));
    }
    Ok(b)
}

/// A validation finding.
#[pyclass(module = "caa", frozen, get_all)]
struct Issue {
    pid: u32,
    code: String,
    severity: String,
    state: String,
    message: String,
    line: Option<usize>,
    column: Option<usize>,
}

#[pymethods]
impl Issue {
    fn __repr__(&self) -> String {
        format!("Issue({} {} at #{} {})", self.severity, self.code, self.pid, self.state)
    }
}

/// A sequence of configurations, rendered in the text trace syntax.
#[pyclass(module = "caa", frozen, get_all)]
struct Trace {
    states: Vec<String>,
    events: Vec<String>,
    /// Name of the bound that cut the trace short, if any.
    truncated: Option<String>,
    text: String,
    json: String,
}

impl Trace {
    fn new(p: &Protocol, t: &semantics::Trace) -> Trace {
        Trace {
            states: t.states.iter().map(ToString::to_string).collect(),
            events: t.events.iter().map(ToString::to_string).collect(),
            truncated: t.truncated.map(|b| b.name().to_string()),
            text: report::trace_text(t),
            json: report::trace_json(p, t, 0).to_string(),
        }
    }
}

#[pymethods]
impl Trace {
    fn __len__(&self) -> usize {
        self.states.len()
    }

    fn __str__(&self) -> String {
        self.text.clone()
    }
}

#[pyclass(module = "caa", frozen, get_all)]
struct RaceReport {
    trace_index: usize,
    position: usize,
    machine: u32,
    state: String,
    group_index: usize,
    group: Vec<String>,
    racing: Vec<String>,
    distinct_targets: usize,
}

#[pymethods]
impl RaceReport {
    fn __repr__(&self) -> String {
        format!("RaceReport(#{} at {}: {:?})", self.machine, self.state, self.racing)
    }
}

/// Outcome of a convergence check: `kind` is `converges`, `diverges` or
/// `unknown`.
#[pyclass(module = "caa", frozen, get_all)]
struct ConvergenceResult {
    kind: String,
    traces: Py<pyo3::types::PyList>,
    first_difference: Option<usize>,
    same_terminal: Option<bool>,
    trace_count: Option<usize>,
    bound: Option<String>,
}

#[pyclass(module = "caa", frozen)]
struct Exploration {
    protocol: Arc<Protocol>,
    result: Arc<ExplorationResult>,
}

#[pymethods]
impl Exploration {
    #[getter]
    fn complete(&self) -> bool {
        self.result.is_complete()
    }

    #[getter]
    fn verdict(&self) -> String {
        self.result.verdict().to_string()
    }

    #[getter]
    fn bound(&self) -> Option<&'static str> {
        match self.result.verdict() {
            Verdict::Complete => None,
            Verdict::BoundExceeded(b) => Some(b.name()),
        }
    }

    #[getter]
    fn state_count(&self) -> usize {
        self.result.state_count()
    }

    #[getter]
    fn edge_count(&self) -> usize {
        self.result.edge_count()
    }

    #[getter]
    fn trace_count(&self) -> usize {
        self.result.trace_count()
    }

    fn trace(&self, index: usize) -> PyResult<Trace> {
        if index >= self.result.trace_count() {
            return Err(pyo3::exceptions::PyIndexError::new_err("trace index out of range"));
        }
        Ok(Trace::new(&self.protocol, &self.result.trace(index)))
    }

    fn traces(&self) -> Vec<Trace> {
        self.result.traces().map(|t| Trace::new(&self.protocol, &t)).collect()
    }

    /// Distinct last configurations of the maximal traces.
    fn terminal_states(&self) -> Vec<String> {
        analysis::terminal_states(&self.result)
            .into_iter()
            .map(ToString::to_string)
            .collect()
    }

    /// Compatibility tier, e.g. `StronglyCompatible`, or `Unknown(...)`.
    fn classify(&self) -> String {
        analysis::classify(&self.protocol, &self.result).to_string()
    }

    fn races(&self) -> PyResult<Vec<RaceReport>> {
        let reports =
            analysis::detect_races(&self.protocol, &self.result).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(reports
            .into_iter()
            .map(|r| RaceReport {
                trace_index: r.trace_index,
                position: r.position,
                machine: r.machine.0,
                state: r.state.to_string(),
                group_index: r.group_index,
                group: r.group.iter().map(ToString::to_string).collect(),
                racing: r.racing_messages.iter().map(ToString::to_string).collect(),
                distinct_targets: r.distinct_targets,
            })
            .collect())
    }

    /// JSON lines: the summary, then each trace if asked.
    #[pyo3(signature = (traces = false))]
    fn to_json(&self, traces: bool) -> String {
        report::exploration_json(&self.protocol, &self.result, traces)
            .iter()
            .map(|d| format!("{d}\n"))
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Exploration({} states, {} traces, {})",
            self.result.state_count(),
            self.result.trace_count(),
            self.result.verdict()
        )
    }
}

#[pyclass(name = "Protocol", module = "caa", frozen)]
struct PyProtocol {
    inner: Arc<Protocol>,
    issues: Vec<Issue>,
}

impl PyProtocol {
    fn from_doc(doc: ProtocolDoc) -> PyProtocol {
        let issues = doc
            .issues
            .iter()
            .map(|d| Issue {
                pid: d.issue.pid.0,
                code: d.issue.issue.code().to_string(),
                severity: match d.issue.severity() {
                    Severity::Error => "error",
                    Severity::Warning => "warning",
                }
                .to_string(),
                state: d.issue.issue.state().to_string(),
                message: d.issue.to_string(),
                line: Some(d.span.line),
                column: Some(d.span.column),
            })
            .collect();
        PyProtocol {
            inner: Arc::new(doc.protocol),
            issues,
        }
    }

    fn valid(&self) -> PyResult<&Protocol> {
        let errors = self.inner.errors();
        if errors.is_empty() {
            Ok(&self.inner)
        } else {
            Err(explore_err(ExploreError::Invalid(errors)))
        }
    }
}

#[pymethods]
impl PyProtocol {
    #[staticmethod]
    fn parse(text: &str) -> PyResult<PyProtocol> {
        parse_protocol(text)
            .map(PyProtocol::from_doc)
            .map_err(|errs| ParseError::new_err(errs.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n")))
    }

    #[staticmethod]
    fn load(path: std::path::PathBuf) -> PyResult<PyProtocol> {
        let text =
            std::fs::read_to_string(&path).map_err(|e| PyOSError::new_err(format!("{}: {e}", path.display())))?;
        PyProtocol::parse(&text)
    }

    #[getter]
    fn pids(&self) -> Vec<u32> {
        self.inner.pids().map(|p| p.0).collect()
    }

    /// Validation findings, errors and warnings, in source order.
    fn issues(&self) -> Vec<Issue> {
        self.issues
            .iter()
            .map(|i| Issue {
                pid: i.pid,
                code: i.code.clone(),
                severity: i.severity.clone(),
                state: i.state.clone(),
                message: i.message.clone(),
                line: i.line,
                column: i.column,
            })
            .collect()
    }

    #[getter]
    fn is_valid(&self) -> bool {
        self.inner.errors().is_empty()
    }

    #[pyo3(signature = (*, max_depth = None, max_mailbox = None, max_states = None, max_traces = None, jobs = None))]
    fn explore(
        &self,
        py: Python<'_>,
        max_depth: Option<usize>,
        max_mailbox: Option<usize>,
        max_states: Option<usize>,
        max_traces: Option<usize>,
        jobs: Option<usize>,
    ) -> PyResult<Exploration> {
        let b = bounds(max_depth, max_mailbox, max_states, max_traces)?;
        if jobs == Some(0) {
            return Err(PyValueError::new_err("jobs must be at least 1"));
        }
        let p = self.valid()?;
        let result = py
            .detach(|| Explorer::new(p).bounds(b).jobs(jobs).run())
            .map_err(explore_err)?;
        Ok(Exploration {
            protocol: Arc::clone(&self.inner),
            result: Arc::new(result),
        })
    }

    /// One random maximal trace, reproducible by seed.
    #[pyo3(signature = (seed, *, max_depth = None, max_mailbox = None, max_states = None, max_traces = None))]
    fn run(
        &self,
        seed: u64,
        max_depth: Option<usize>,
        max_mailbox: Option<usize>,
        max_states: Option<usize>,
        max_traces: Option<usize>,
    ) -> PyResult<Trace> {
        let b = bounds(max_depth, max_mailbox, max_states, max_traces)?;
        let p = self.valid()?;
        let t = semantics::run_one(p, seed, &b).map_err(explore_err)?;
        Ok(Trace::new(p, &t))
    }

    #[pyo3(signature = (*, max_depth = None, max_mailbox = None, max_states = None, max_traces = None))]
    fn check_convergence(
        &self,
        py: Python<'_>,
        max_depth: Option<usize>,
        max_mailbox: Option<usize>,
        max_states: Option<usize>,
        max_traces: Option<usize>,
    ) -> PyResult<ConvergenceResult> {
        let b = bounds(max_depth, max_mailbox, max_states, max_traces)?;
        let p = self.valid()?;
        let outcome = analysis::check_convergence(p, &b).map_err(|e| match e {
            analysis::ConvergenceError::Preconditions(_) => PreconditionError::new_err(e.to_string()),
            analysis::ConvergenceError::RuntimeSelfMessage(_) => StepError::new_err(e.to_string()),
            analysis::ConvergenceError::Explore(inner) => explore_err(inner),
        })?;
        let list =
            |ts: Vec<Trace>| -> PyResult<Py<pyo3::types::PyList>> { Ok(pyo3::types::PyList::new(py, ts)?.unbind()) };
        Ok(match outcome {
            Convergence::Converges { trace } => ConvergenceResult {
                kind: "converges".into(),
                traces: list(vec![Trace::new(p, &trace)])?,
                first_difference: None,
                same_terminal: Some(true),
                trace_count: Some(1),
                bound: None,
            },
            Convergence::Diverges {
                first,
                second,
                first_difference,
                same_terminal,
                trace_count,
            } => ConvergenceResult {
                kind: "diverges".into(),
                traces: list(vec![Trace::new(p, &first), Trace::new(p, &second)])?,
                first_difference: Some(first_difference),
                same_terminal: Some(same_terminal),
                trace_count: Some(trace_count),
                bound: None,
            },
            Convergence::Unknown(bound) => ConvergenceResult {
                kind: "unknown".into(),
                traces: list(Vec::new())?,
                first_difference: None,
                same_terminal: None,
                trace_count: None,
                bound: Some(bound.name().to_string()),
            },
        })
    }

    /// Compatibility tier at the given bounds.
    #[pyo3(signature = (*, max_depth = None, max_mailbox = None, max_states = None, max_traces = None))]
    fn classify(
        &self,
        py: Python<'_>,
        max_depth: Option<usize>,
        max_mailbox: Option<usize>,
        max_states: Option<usize>,
        max_traces: Option<usize>,
    ) -> PyResult<String> {
        let exploration = self.explore(py, max_depth, max_mailbox, max_states, max_traces, None)?;
        Ok(match analysis::classify(&self.inner, &exploration.result) {
            TierVerdict::Unknown(_) => "Unknown".to_string(),
            v => v.to_string(),
        })
    }

    /// Erlang skeleton source per module name.
    fn codegen(&self) -> PyResult<std::collections::BTreeMap<String, String>> {
        emit_erlang(&self.inner).map_err(|e| ValidationError::new_err(e.to_string()))
    }

    fn __str__(&self) -> String {
        print_protocol(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!("Protocol(pids={:?})", self.pids())
    }

    fn __eq__(&self, other: &PyProtocol) -> bool {
        self.inner == other.inner
    }
}

#[pymodule]
pub mod caa {
    use super::PyProtocol;
    use pyo3::prelude::*;

    #[pymodule_export]
    use super::{
        ConvergenceResult, Exploration, Issue, ParseError, PreconditionError, RaceReport, StepError, Trace,
        ValidationError,
    };

    #[pymodule_export]
    use super::PyProtocol as Protocol;

    #[pyfunction]
    fn parse(text: &str) -> PyResult<PyProtocol> {
        PyProtocol::parse(text)
    }

    #[pyfunction]
    fn load(path: std::path::PathBuf) -> PyResult<PyProtocol> {
        PyProtocol::load(path)
    }
}
