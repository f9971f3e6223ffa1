//! Text and JSON renderings of traces and analysis results.
//!
//! Text traces print one configuration per line, each machine's local state
//! as `(state, [mailbox], {env})`, with the step that produced the line after
//! it.
//!
//! JSON output is a sequence of documents, one per line. Terms (message
//! values, patterns, environment entries) are strings in the protocol
//! syntax; machines are identified by their pid number.
//!
//! * Exploration summary: `{"kind": "summary", "verdict": "complete" |
//!   "bound_exceeded", "bound": null | "max_depth" | "max_mailbox_len" |
//!   "max_states" | "max_traces", "states": n, "edges": n, "traces": n,
//!   "machines": [pid, ...]}`.
//! * Trace: `{"kind": "trace", "index": n, "verdict": ..., "bound": ...,
//!   "states": [configuration, ...], "events": [event, ...]}` where a
//!   configuration is a list of `{"machine": pid, "state": name, "mailbox":
//!   [{"value": term, "sender": pid}, ...], "env": {var: term}}` and an event is
//!   `{"kind": "send", "from": pid, "to": pid, "value": term}` or
//!   `{"kind": "receive", "by": pid, "value": term, "pattern": term,
//!   "position": n}`. `verdict` is `complete` for a maximal trace and
//!   `bound_exceeded` for a truncated one.
//! * Race: `{"kind": "race", "trace": n, "position": n, "machine": pid,
//!   "state": name, "group_position": n, "group": [term, ...], "racing":
//!   [term, ...], "distinct_targets": n}`.

use std::fmt::Write;

use serde_json::{json, Map, Value as Json};

use crate::analysis::RaceReport;
use crate::semantics::{Bound, ExplorationResult, GlobalState, Protocol, StepEvent, Trace, Verdict};

pub fn trace_text(trace: &Trace) -> String {
    let width = trace.states.len().saturating_sub(1).to_string().len();
    let mut out = String::new();
    for (i, g) in trace.states.iter().enumerate() {
        write!(out, "{i:>width$}  {g}").unwrap();
        if i > 0 {
            write!(out, "    % {}", trace.events[i - 1]).unwrap();
        }
        out.push('\n');
    }
    if let Some(b) = trace.truncated {
        writeln!(out, "... truncated ({b})").unwrap();
    }
    out
}

pub fn summary_text(result: &ExplorationResult) -> String {
    format!(
        "reachable states: {}\ntransitions: {}\nmaximal traces: {}\nverdict: {}\n",
        result.state_count(),
        result.edge_count(),
        result.trace_count(),
        result.verdict()
    )
}

fn verdict_fields(truncated: Option<Bound>) -> (&'static str, Json) {
    match truncated {
        None => ("complete", Json::Null),
        Some(b) => ("bound_exceeded", json!(b.name())),
    }
}

pub fn summary_json(p: &Protocol, result: &ExplorationResult) -> Json {
    let bound = match result.verdict() {
        Verdict::Complete => None,
        Verdict::BoundExceeded(b) => Some(b),
    };
    let (verdict, bound) = verdict_fields(bound);
    json!({
        "kind": "summary",
        "verdict": verdict,
        "bound": bound,
        "states": result.state_count(),
        "edges": result.edge_count(),
        "traces": result.trace_count(),
        "machines": p.pids().map(|pid| pid.0).collect::<Vec<_>>(),
    })
}

pub fn configuration_json(p: &Protocol, g: &GlobalState) -> Json {
    Json::Array(
        p.machines()
            .iter()
            .zip(g.locals())
            .map(|(m, l)| {
                let env: Map<String, Json> = l
                    .env
                    .iter()
                    .map(|(k, v)| (k.to_string(), json!(v.to_string())))
                    .collect();
                json!({
                    "machine": m.pid.0,
                    "state": l.state.as_str(),
                    "mailbox": l.mailbox.iter().map(|msg| json!({
                        "value": msg.value.to_string(),
                        "sender": msg.sender.0,
                    })).collect::<Vec<_>>(),
                    "env": env,
                })
            })
            .collect(),
    )
}

pub fn event_json(e: &StepEvent) -> Json {
    match e {
        StepEvent::Sent { from, to, value } => json!({
            "kind": "send",
            "from": from.0,
            "to": to.0,
            "value": value.to_string(),
        }),
        StepEvent::Received {
            by,
            value,
            pattern,
            mailbox_position,
        } => json!({
            "kind": "receive",
            "by": by.0,
            "value": value.to_string(),
            "pattern": pattern.to_string(),
            "position": mailbox_position,
        }),
    }
}

pub fn trace_json(p: &Protocol, trace: &Trace, index: usize) -> Json {
    let (verdict, bound) = verdict_fields(trace.truncated);
    json!({
        "kind": "trace",
        "index": index,
        "verdict": verdict,
        "bound": bound,
        "states": trace.states.iter().map(|g| configuration_json(p, g)).collect::<Vec<_>>(),
        "events": trace.events.iter().map(event_json).collect::<Vec<_>>(),
    })
}

/// The summary document followed, if asked, by one document per trace.
pub fn exploration_json(p: &Protocol, result: &ExplorationResult, with_traces: bool) -> Vec<Json> {
    let mut docs = vec![summary_json(p, result)];
    if with_traces {
        docs.extend(result.traces().enumerate().map(|(i, t)| trace_json(p, &t, i)));
    }
    docs
}

pub fn race_text(report: &RaceReport, result: &ExplorationResult) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "race: machine {} in state `{}` can take any of {} from the group sent at position {} (trace {}, position {})",
        report.machine, report.state, report.racing_messages, report.group_index, report.trace_index, report.position
    )
    .unwrap();
    match &report.witness {
        Some(w) => writeln!(
            out,
            "  {} leads to `{}`, {} leads to `{}`",
            w.first, w.first_target, w.second, w.second_target
        )
        .unwrap(),
        None => writeln!(out, "  all racing messages lead to the same state").unwrap(),
    }
    writeln!(out, "  witness:").unwrap();
    for line in trace_text(&report.trace_prefix(result)).lines() {
        writeln!(out, "    {line}").unwrap();
    }
    out
}

pub fn race_json(report: &RaceReport) -> Json {
    json!({
        "kind": "race",
        "trace": report.trace_index,
        "position": report.position,
        "machine": report.machine.0,
        "state": report.state.as_str(),
        "group_position": report.group_index,
        "group": report.group.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "racing": report.racing_messages.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "distinct_targets": report.distinct_targets,
    })
}
