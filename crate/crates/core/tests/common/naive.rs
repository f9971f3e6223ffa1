//! A deliberately simple interleaving enumerator with its own matching,
//! mailbox scan and step rules. It shares nothing with the library except
//! the protocol description it reads.

use std::collections::BTreeMap;

use caa_core::automaton::{Label, Target};
use caa_core::semantics::{GlobalState, Protocol};
use caa_core::terms::{ArithOp, Term};

#[derive(Debug, Clone, PartialEq, Eq)]
enum V {
    Atom(String),
    Int(i64),
    Pid(u32),
    Tup(Vec<V>),
}

fn show(v: &V) -> String {
    match v {
        V::Atom(a) => a.clone(),
        V::Int(n) => n.to_string(),
        V::Pid(p) => format!("#{p}"),
        V::Tup(items) => format!("{{{}}}", items.iter().map(show).collect::<Vec<_>>().join(", ")),
    }
}

#[derive(Debug, Clone)]
struct Local {
    state: String,
    mailbox: Vec<(V, u32)>,
    env: BTreeMap<String, V>,
}

type Config = Vec<Local>;

enum Arm {
    Recv(Term, String),
    Send(Target, Term, String),
}

struct Machine {
    pid: u32,
    initial: String,
    arms: BTreeMap<String, Vec<Arm>>,
}

/// Renders a configuration including message senders.
fn render(c: &Config) -> String {
    let parts: Vec<String> = c
        .iter()
        .map(|l| {
            let mb: Vec<String> = l.mailbox.iter().map(|(v, s)| format!("{}@{s}", show(v))).collect();
            let env: Vec<String> = l.env.iter().map(|(k, v)| format!("{k}={}", show(v))).collect();
            format!("({}|{}|{})", l.state, mb.join(","), env.join(","))
        })
        .collect();
    parts.join(" ")
}

/// The same rendering for a library configuration.
pub fn render_global(g: &GlobalState) -> String {
    let parts: Vec<String> = g
        .locals()
        .iter()
        .map(|l| {
            let mb: Vec<String> = l
                .mailbox
                .iter()
                .map(|m| format!("{}@{}", m.value, m.sender.0))
                .collect();
            let env: Vec<String> = l.env.iter().map(|(k, v)| format!("{k}={v}")).collect();
            format!("({}|{}|{})", l.state, mb.join(","), env.join(","))
        })
        .collect();
    parts.join(" ")
}

fn matches(p: &Term, v: &V, env: &mut BTreeMap<String, V>) -> bool {
    match (p, v) {
        (Term::Var(x), _) => match env.get(x) {
            Some(bound) => bound == v,
            None => {
                env.insert(x.clone(), v.clone());
                true
            }
        },
        (Term::Atom(a), V::Atom(b)) => a == b,
        (Term::Int(a), V::Int(b)) => a == b,
        (Term::Pid(a), V::Pid(b)) => a.0 == *b,
        (Term::Tuple(ps), V::Tup(vs)) => ps.len() == vs.len() && ps.iter().zip(vs).all(|(p, v)| matches(p, v, env)),
        _ => false,
    }
}

enum Eval {
    Value(V),
    Open,
    Fault,
}

fn unbound(t: &Term, env: &BTreeMap<String, V>) -> bool {
    match t {
        Term::Var(x) => !env.contains_key(x),
        Term::Tuple(items) => items.iter().any(|i| unbound(i, env)),
        Term::BinOp(_, l, r) => unbound(l, env) || unbound(r, env),
        _ => false,
    }
}

/// An expression with an unbound variable cannot be built at all; only a
/// fully bound one can fail on arithmetic.
fn eval(t: &Term, env: &BTreeMap<String, V>) -> Eval {
    if unbound(t, env) {
        return Eval::Open;
    }
    match t {
        Term::Atom(a) => Eval::Value(V::Atom(a.clone())),
        Term::Int(n) => Eval::Value(V::Int(*n)),
        Term::Pid(p) => Eval::Value(V::Pid(p.0)),
        Term::Var(x) => env.get(x).cloned().map_or(Eval::Open, Eval::Value),
        Term::Tuple(items) => {
            let mut out = Vec::new();
            let mut open = false;
            for i in items {
                match eval(i, env) {
                    Eval::Value(v) => out.push(v),
                    Eval::Open => open = true,
                    Eval::Fault => return Eval::Fault,
                }
            }
            if open {
                Eval::Open
            } else {
                Eval::Value(V::Tup(out))
            }
        }
        Term::BinOp(op, l, r) => {
            let (l, r) = (eval(l, env), eval(r, env));
            match (l, r) {
                (Eval::Fault, _) | (_, Eval::Fault) => Eval::Fault,
                (Eval::Open, _) | (_, Eval::Open) => Eval::Open,
                (Eval::Value(V::Int(a)), Eval::Value(V::Int(b))) => {
                    let r = match op {
                        ArithOp::Add => a.checked_add(b),
                        ArithOp::Sub => a.checked_sub(b),
                        ArithOp::Mul => a.checked_mul(b),
                    };
                    r.map_or(Eval::Fault, |n| Eval::Value(V::Int(n)))
                }
                _ => Eval::Fault,
            }
        }
    }
}

pub struct Naive {
    machines: Vec<Machine>,
}

#[derive(Debug, PartialEq, Eq)]
pub struct StepFault;

impl Naive {
    pub fn new(p: &Protocol) -> Naive {
        let machines = p
            .machines()
            .iter()
            .map(|m| {
                let mut arms: BTreeMap<String, Vec<Arm>> = BTreeMap::new();
                for t in m.caa.transitions() {
                    let arm = match &t.label {
                        Label::Receive(pat) => Arm::Recv(pat.as_term().clone(), t.to.as_str().to_string()),
                        Label::Send { target, payload } => {
                            Arm::Send(target.clone(), payload.clone(), t.to.as_str().to_string())
                        }
                    };
                    arms.entry(t.from.as_str().to_string()).or_default().push(arm);
                }
                Machine {
                    pid: m.pid.0,
                    initial: m.caa.initial().as_str().to_string(),
                    arms,
                }
            })
            .collect();
        Naive { machines }
    }

    fn successors(&self, c: &Config) -> Result<Vec<Config>, StepFault> {
        let mut out = Vec::new();
        for (i, m) in self.machines.iter().enumerate() {
            let local = &c[i];
            let arms = m.arms.get(&local.state).map(Vec::as_slice).unwrap_or(&[]);
            if let Some(Arm::Send(target, payload, to)) = arms.iter().find(|a| matches!(a, Arm::Send(..))) {
                // A bad target is an error even when the payload cannot be built yet.
                let dest = match target {
                    Target::Pid(p) => p.0,
                    Target::Var(x) => match local.env.get(x) {
                        Some(V::Pid(p)) => *p,
                        _ => return Err(StepFault),
                    },
                };
                if dest == m.pid {
                    return Err(StepFault);
                }
                let Some(j) = self.machines.iter().position(|m| m.pid == dest) else {
                    return Err(StepFault);
                };
                let value = match eval(payload, &local.env) {
                    Eval::Value(v) => v,
                    Eval::Open => continue,
                    Eval::Fault => return Err(StepFault),
                };
                let mut next = c.clone();
                next[i].state = to.clone();
                next[j].mailbox.push((value, m.pid));
                out.push(next);
                continue;
            }
            'scan: for (k, (v, _)) in local.mailbox.iter().enumerate() {
                for arm in arms {
                    if let Arm::Recv(pat, to) = arm {
                        let mut bound = BTreeMap::new();
                        if matches(pat, v, &mut bound) {
                            let mut next = c.clone();
                            next[i].mailbox.remove(k);
                            next[i].state = to.clone();
                            next[i].env.extend(bound);
                            out.push(next);
                            break 'scan;
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// All maximal traces from the initial configuration, each rendered as a
    /// list of configurations. Panics past `depth_limit` steps.
    pub fn traces(&self, depth_limit: usize) -> Result<Vec<Vec<String>>, StepFault> {
        let start: Config = self
            .machines
            .iter()
            .map(|m| Local {
                state: m.initial.clone(),
                mailbox: Vec::new(),
                env: BTreeMap::new(),
            })
            .collect();
        let mut out = Vec::new();
        let mut path = vec![start];
        self.walk(&mut path, &mut out, depth_limit)?;
        Ok(out)
    }

    fn walk(&self, path: &mut Vec<Config>, out: &mut Vec<Vec<String>>, limit: usize) -> Result<(), StepFault> {
        assert!(path.len() <= limit, "naive enumeration exceeded its depth limit");
        let succ = self.successors(path.last().unwrap())?;
        if succ.is_empty() {
            out.push(path.iter().map(render).collect());
            return Ok(());
        }
        for s in succ {
            path.push(s);
            self.walk(path, out, limit)?;
            path.pop();
        }
        Ok(())
    }
}
