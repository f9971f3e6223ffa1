//! Erlang skeletons: one module per machine, one function per control state.
//!
//! Every state function takes the same parameters: the pids the machine
//! mentions, then its variables in sorted order. Receive clauses bind fresh
//! names so that a receive overwrites a variable instead of matching against
//! its old value, then tail-call the successor with the new binding.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use thiserror::Error;

use crate::automaton::{Caa, StateId, StateKind, Target};
use crate::semantics::{Protocol, ProtocolIssue};
use crate::terms::{Pid, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EmitError {
    #[error("cannot emit code for an invalid protocol: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<ProtocolIssue>),
}

const RESERVED: &[&str] = &[
    "after", "and", "andalso", "band", "begin", "bnot", "bor", "bsl", "bsr", "bxor", "case", "catch", "cond", "div",
    "else", "end", "fun", "if", "let", "maybe", "not", "of", "or", "orelse", "receive", "rem", "try", "when", "xor",
];

/// Names the emitter defines itself or Erlang defines implicitly.
const GENERATED: &[&str] = &["start", "module_info"];

pub fn module_name(pid: Pid) -> String {
    format!("caa_m{}", pid.0)
}

/// Emits one module per machine, keyed by module name.
pub fn emit_erlang(p: &Protocol) -> Result<BTreeMap<String, String>, EmitError> {
    let errors = p.errors();
    if !errors.is_empty() {
        return Err(EmitError::Invalid(errors));
    }
    Ok(p.machines()
        .iter()
        .map(|m| (module_name(m.pid), emit_machine(m.pid, &m.caa)))
        .collect())
}

fn quote_atom(name: &str) -> String {
    let plain = name.starts_with(|c: char| c.is_ascii_lowercase())
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '@');
    if plain && !RESERVED.contains(&name) {
        name.to_string()
    } else {
        format!("'{}'", name.replace('\\', "\\\\").replace('\'', "\\'"))
    }
}

struct Names {
    taken: BTreeSet<String>,
}

impl Names {
    fn fresh(&mut self, base: &str) -> String {
        let mut n = 1;
        loop {
            let candidate = format!("{base}_{n}");
            if self.taken.insert(candidate.clone()) {
                return candidate;
            }
            n += 1;
        }
    }

    fn claim(&mut self, base: &str) -> String {
        if self.taken.insert(base.to_string()) {
            base.to_string()
        } else {
            self.fresh(base)
        }
    }
}

struct Machine<'a> {
    own: Pid,
    caa: &'a Caa,
    /// Parameter names of the pids the machine mentions.
    pids: BTreeMap<Pid, String>,
    vars: Vec<String>,
    functions: BTreeMap<StateId, String>,
}

fn mentioned(caa: &Caa) -> (BTreeSet<Pid>, BTreeSet<String>) {
    let mut pids = BTreeSet::new();
    let mut vars = BTreeSet::new();
    let mut visit = |t: &Term| {
        pids.extend(t.pids());
        vars.extend(t.var_occurrences().into_iter().map(str::to_string));
    };
    for t in caa.transitions() {
        match &t.label {
            crate::automaton::Label::Receive(p) => visit(p.as_term()),
            crate::automaton::Label::Send { target, payload } => {
                visit(payload);
                match target {
                    Target::Pid(pid) => visit(&Term::Pid(*pid)),
                    Target::Var(v) => visit(&Term::Var(v.clone())),
                }
            }
        }
    }
    (pids, vars)
}

fn emit_machine(own: Pid, caa: &Caa) -> String {
    let (pids, vars) = mentioned(caa);
    let mut names = Names {
        taken: vars.iter().cloned().collect(),
    };
    let pids: BTreeMap<Pid, String> = pids
        .into_iter()
        .map(|p| (p, names.claim(&format!("Pid{}", p.0))))
        .collect();

    let mut function_names: BTreeSet<String> = GENERATED.iter().map(|s| s.to_string()).collect();
    let mut functions = BTreeMap::new();
    for s in caa.states() {
        let mut name = quote_atom(s.as_str());
        while function_names.contains(&name) {
            name = quote_atom(&format!("{}_state", name.trim_matches('\'')));
        }
        function_names.insert(name.clone());
        functions.insert(s.clone(), name);
    }

    let m = Machine {
        own,
        caa,
        pids,
        vars: vars.into_iter().collect(),
        functions,
    };
    m.render(&mut names)
}

impl Machine<'_> {
    fn params(&self) -> Vec<String> {
        self.pids.values().cloned().chain(self.vars.iter().cloned()).collect()
    }

    fn arity(&self) -> usize {
        self.pids.len() + self.vars.len()
    }

    fn render(&self, names: &mut Names) -> String {
        let mut out = String::new();
        let module = module_name(self.own);
        let peers: Vec<&String> = self
            .pids
            .iter()
            .filter(|(p, _)| **p != self.own)
            .map(|(_, n)| n)
            .collect();
        let exports: Vec<String> = std::iter::once(format!("start/{}", peers.len()))
            .chain(
                self.caa
                    .states()
                    .iter()
                    .map(|s| format!("{}/{}", self.functions[s], self.arity())),
            )
            .collect();
        writeln!(out, "%% Generated skeleton for machine {}.", self.own).unwrap();
        writeln!(out, "-module({module}).").unwrap();
        writeln!(out, "-export([{}]).", exports.join(", ")).unwrap();
        out.push('\n');

        let peer_params: Vec<&str> = peers.iter().map(|s| s.as_str()).collect();
        let initial_args: Vec<String> = self
            .pids
            .iter()
            .map(|(p, n)| {
                if *p == self.own {
                    "self()".to_string()
                } else {
                    n.clone()
                }
            })
            .chain(self.vars.iter().map(|_| "undefined".to_string()))
            .collect();
        writeln!(out, "start({}) ->", peer_params.join(", ")).unwrap();
        writeln!(
            out,
            "    %% TODO: peers are passed in as pids; spawn them in an order that makes their pids available here."
        )
        .unwrap();
        writeln!(
            out,
            "    spawn(fun() -> {}({}) end).",
            self.functions[self.caa.initial()],
            initial_args.join(", ")
        )
        .unwrap();

        for s in self.caa.states() {
            out.push('\n');
            self.render_state(&mut out, s, names);
        }
        out
    }

    fn call(&self, state: &StateId, bindings: &BTreeMap<String, String>) -> String {
        let args: Vec<String> = self
            .params()
            .into_iter()
            .map(|p| bindings.get(&p).cloned().unwrap_or(p))
            .collect();
        format!("{}({})", self.functions[state], args.join(", "))
    }

    fn term(&self, t: &Term, rename: &BTreeMap<String, String>) -> String {
        match t {
            Term::Atom(a) => quote_atom(a),
            Term::Int(n) => n.to_string(),
            Term::Var(v) => rename.get(v).cloned().unwrap_or_else(|| v.clone()),
            Term::Pid(p) => self.pids[p].clone(),
            Term::Tuple(items) => {
                let items: Vec<String> = items.iter().map(|i| self.term(i, rename)).collect();
                format!("{{{}}}", items.join(", "))
            }
            Term::BinOp(op, lhs, rhs) => {
                let wrap = |inner: &Term, strict: bool| {
                    let s = self.term(inner, rename);
                    match inner {
                        Term::BinOp(iop, ..)
                            if (strict && iop.precedence() <= op.precedence())
                                || (!strict && iop.precedence() < op.precedence()) =>
                        {
                            format!("({s})")
                        }
                        Term::Int(n) if *n < 0 => format!("({s})"),
                        _ => s,
                    }
                };
                format!("{} {} {}", wrap(lhs, false), op.symbol(), wrap(rhs, true))
            }
        }
    }

    fn render_state(&self, out: &mut String, s: &StateId, names: &mut Names) {
        let name = &self.functions[s];
        let (body, used) = match self.caa.state_kind(s).expect("validated protocol") {
            StateKind::Terminal => ("    ok.\n".to_string(), BTreeSet::new()),
            StateKind::Send { target, payload, next } => {
                let none = BTreeMap::new();
                let target = match target {
                    Target::Var(v) => v.clone(),
                    Target::Pid(p) => self.pids[p].clone(),
                };
                let body = format!(
                    "    {} ! {},\n    {}.\n",
                    target,
                    self.term(payload, &none),
                    self.call(next, &none)
                );
                (body, self.params().into_iter().collect())
            }
            StateKind::Receive(arms) => {
                let mut used = BTreeSet::new();
                let mut clauses = Vec::new();
                for arm in &arms {
                    let rename: BTreeMap<String, String> = arm
                        .pattern
                        .vars()
                        .into_iter()
                        .map(|v| (v.to_string(), names.fresh(v)))
                        .collect();
                    for p in self.params() {
                        if !rename.contains_key(&p) {
                            used.insert(p);
                        }
                    }
                    for pid in arm.pattern.as_term().pids() {
                        used.insert(self.pids[&pid].clone());
                    }
                    clauses.push(format!(
                        "        {} ->\n            {}",
                        self.term(arm.pattern.as_term(), &rename),
                        self.call(arm.next, &rename)
                    ));
                }
                (format!("    receive\n{}\n    end.\n", clauses.join(";\n")), used)
            }
        };
        let params: Vec<String> = self
            .params()
            .into_iter()
            .map(|p| if used.contains(&p) { p } else { format!("_{p}") })
            .collect();
        writeln!(out, "{}({}) ->", name, params.join(", ")).unwrap();
        out.push_str(&body);
    }
}
