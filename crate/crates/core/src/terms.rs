//! The term language shared by messages and receive patterns.
//!
//! Terms are atoms, integers, variables, process identifiers, tuples and
//! integer arithmetic. Three refinements matter to the semantics:
//!
//! * a [`Value`] is a closed term without arithmetic (what travels in a mailbox),
//! * a [`Pattern`] is a term without arithmetic (what a receive matches against),
//! * an [`Env`] maps variable names to values (an actor's memory).
//!
//! Matching is one-way: variables only ever occur on the pattern side.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// A process identifier, written `#<n>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pid(pub u32);

impl fmt::Display for Pid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
        }
    }

    pub(crate) fn precedence(self) -> u8 {
        match self {
            ArithOp::Add | ArithOp::Sub => 1,
            ArithOp::Mul => 2,
        }
    }

    fn apply(self, lhs: i64, rhs: i64) -> Option<i64> {
        match self {
            ArithOp::Add => lhs.checked_add(rhs),
            ArithOp::Sub => lhs.checked_sub(rhs),
            ArithOp::Mul => lhs.checked_mul(rhs),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Atom(String),
    Int(i64),
    Var(String),
    Pid(Pid),
    Tuple(Vec<Term>),
    BinOp(ArithOp, Box<Term>, Box<Term>),
}

pub fn is_atom_name(name: &str) -> bool {
    is_identifier(name, |c| c.is_ascii_lowercase())
}

pub fn is_var_name(name: &str) -> bool {
    is_identifier(name, |c| c.is_ascii_uppercase())
}

fn is_identifier(name: &str, first: impl Fn(char) -> bool) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if first(c) => chars.all(|c| c.is_ascii_alphanumeric() || c == '_'),
        _ => false,
    }
}

impl Term {
    pub fn atom(name: impl Into<String>) -> Term {
        let name = name.into();
        debug_assert!(is_atom_name(&name), "invalid atom name {name:?}");
        Term::Atom(name)
    }

    pub fn var(name: impl Into<String>) -> Term {
        let name = name.into();
        debug_assert!(is_var_name(&name), "invalid variable name {name:?}");
        Term::Var(name)
    }

    pub fn int(value: i64) -> Term {
        Term::Int(value)
    }

    pub fn pid(id: u32) -> Term {
        Term::Pid(Pid(id))
    }

    pub fn tuple(elements: impl IntoIterator<Item = Term>) -> Term {
        Term::Tuple(elements.into_iter().collect())
    }

    pub fn binop(op: ArithOp, lhs: Term, rhs: Term) -> Term {
        Term::BinOp(op, Box::new(lhs), Box::new(rhs))
    }

    /// True when no variable occurs in the term.
    pub fn is_closed(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Atom(_) | Term::Int(_) | Term::Pid(_) => true,
            Term::Tuple(items) => items.iter().all(Term::is_closed),
            Term::BinOp(_, l, r) => l.is_closed() && r.is_closed(),
        }
    }

    pub fn has_arithmetic(&self) -> bool {
        match self {
            Term::BinOp(..) => true,
            Term::Tuple(items) => items.iter().any(Term::has_arithmetic),
            _ => false,
        }
    }

    /// Variable occurrences in left-to-right order, repeats included.
    pub fn var_occurrences(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Term::Var(name) => out.push(name),
            Term::Tuple(items) => items.iter().for_each(|t| t.collect_vars(out)),
            Term::BinOp(_, l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
            Term::Atom(_) | Term::Int(_) | Term::Pid(_) => {}
        }
    }

    /// Every pid literal occurring in the term.
    pub fn pids(&self) -> Vec<Pid> {
        match self {
            Term::Pid(p) => vec![*p],
            Term::Tuple(items) => items.iter().flat_map(Term::pids).collect(),
            Term::BinOp(_, l, r) => {
                let mut out = l.pids();
                out.extend(r.pids());
                out
            }
            _ => Vec::new(),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Atom(name) | Term::Var(name) => f.write_str(name),
            Term::Int(n) => write!(f, "{n}"),
            Term::Pid(p) => write!(f, "{p}"),
            Term::Tuple(items) => {
                f.write_str("{")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str("}")
            }
            Term::BinOp(op, lhs, rhs) => {
                // Left-associative: the right operand needs parentheses at equal precedence.
                let left_parens = matches!(&**lhs, Term::BinOp(inner, ..) if inner.precedence() < op.precedence());
                let right_parens = matches!(&**rhs, Term::BinOp(inner, ..) if inner.precedence() <= op.precedence());
                write_operand(f, lhs, left_parens)?;
                write!(f, " {} ", op.symbol())?;
                write_operand(f, rhs, right_parens)
            }
        }
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, term: &Term, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({term})")
    } else {
        write!(f, "{term}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("term `{term}` contains variable `{var}` and is not a value")]
    NotClosed { term: Term, var: String },
    #[error("term `{0}` contains arithmetic and is not a value or pattern")]
    Arithmetic(Term),
}

/// A closed term without arithmetic.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Value(Term);

impl Value {
    pub fn new(term: Term) -> Result<Value, TermError> {
        if let Some(var) = term.var_occurrences().first() {
            return Err(TermError::NotClosed {
                var: var.to_string(),
                term,
            });
        }
        if term.has_arithmetic() {
            return Err(TermError::Arithmetic(term));
        }
        Ok(Value(term))
    }

    pub fn atom(name: impl Into<String>) -> Value {
        Value(Term::atom(name))
    }

    pub fn tuple(elements: impl IntoIterator<Item = Value>) -> Value {
        Value(Term::Tuple(elements.into_iter().map(Value::into_term).collect()))
    }

    pub fn as_term(&self) -> &Term {
        &self.0
    }

    pub fn into_term(self) -> Term {
        self.0
    }

    pub fn as_pid(&self) -> Option<Pid> {
        match self.0 {
            Term::Pid(p) => Some(p),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self.0 {
            Term::Int(n) => Some(n),
            _ => None,
        }
    }
}

impl From<i64> for Value {
    fn from(n: i64) -> Value {
        Value(Term::Int(n))
    }
}

impl From<Pid> for Value {
    fn from(p: Pid) -> Value {
        Value(Term::Pid(p))
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A term without arithmetic. Linearity is checked separately by
/// automaton validation so that malformed input can still be reported.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pattern(Term);

impl Pattern {
    pub fn new(term: Term) -> Result<Pattern, TermError> {
        if term.has_arithmetic() {
            return Err(TermError::Arithmetic(term));
        }
        Ok(Pattern(term))
    }

    pub fn as_term(&self) -> &Term {
        &self.0
    }

    pub fn into_term(self) -> Term {
        self.0
    }

    pub fn vars(&self) -> Vec<&str> {
        self.0.var_occurrences()
    }

    /// The first variable that occurs more than once, if any.
    pub fn repeated_var(&self) -> Option<&str> {
        let vars = self.vars();
        vars.iter()
            .enumerate()
            .find(|(i, v)| vars[..*i].contains(v))
            .map(|(_, v)| *v)
    }

    pub fn is_linear(&self) -> bool {
        self.repeated_var().is_none()
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Variable bindings. Ordered so that equal environments hash and print alike.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Env(BTreeMap<String, Value>);

impl Env {
    pub fn new() -> Env {
        Env::default()
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.0.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.contains_key(name)
    }

    pub fn insert(&mut self, name: impl Into<String>, value: Value) -> Option<Value> {
        self.0.insert(name.into(), value)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Value)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Right-biased union: bindings in `newer` win.
    pub fn merge(&self, newer: &Env) -> Env {
        let mut out = self.clone();
        for (k, v) in &newer.0 {
            out.0.insert(k.clone(), v.clone());
        }
        out
    }
}

impl<K: Into<String>> FromIterator<(K, Value)> for Env {
    fn from_iter<I: IntoIterator<Item = (K, Value)>>(iter: I) -> Env {
        Env(iter.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }
}

impl fmt::Display for Env {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k} => {v}")?;
        }
        f.write_str("}")
    }
}

/// One-way match of a value against a pattern. `None` is failure.
///
/// A variable occurring twice in a non-linear pattern must bind equal
/// subterms; validation rejects such patterns before they reach the explorer.
pub fn match_pattern(value: &Value, pattern: &Pattern) -> Option<Env> {
    let mut env = Env::new();
    match_into(&value.0, &pattern.0, &mut env).then_some(env)
}

fn match_into(value: &Term, pattern: &Term, env: &mut Env) -> bool {
    match (pattern, value) {
        (Term::Var(name), _) => match env.get(name) {
            Some(bound) => bound.as_term() == value,
            None => {
                env.insert(name.clone(), Value(value.clone()));
                true
            }
        },
        (Term::Atom(a), Term::Atom(b)) => a == b,
        (Term::Int(a), Term::Int(b)) => a == b,
        (Term::Pid(a), Term::Pid(b)) => a == b,
        (Term::Tuple(ps), Term::Tuple(vs)) => {
            ps.len() == vs.len() && ps.iter().zip(vs).all(|(p, v)| match_into(v, p, env))
        }
        _ => false,
    }
}

/// Replaces every variable bound in `env`; unbound variables are kept.
pub fn substitute(env: &Env, term: &Term) -> Term {
    match term {
        Term::Var(name) => match env.get(name) {
            Some(v) => v.as_term().clone(),
            None => term.clone(),
        },
        Term::Tuple(items) => Term::Tuple(items.iter().map(|t| substitute(env, t)).collect()),
        Term::BinOp(op, l, r) => Term::binop(*op, substitute(env, l), substitute(env, r)),
        Term::Atom(_) | Term::Int(_) | Term::Pid(_) => term.clone(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    OpenTerm(String),
    #[error("operand `{operand}` of `{op}` is not an integer")]
    NotAnInteger { op: &'static str, operand: Term },
    #[error("integer overflow in `{lhs} {op} {rhs}`")]
    Overflow { op: &'static str, lhs: i64, rhs: i64 },
}

/// Reduces arithmetic innermost-first, yielding a value.
pub fn evaluate(term: &Term) -> Result<Value, EvalError> {
    eval_term(term).map(Value)
}

fn eval_term(term: &Term) -> Result<Term, EvalError> {
    match term {
        Term::Var(name) => Err(EvalError::OpenTerm(name.clone())),
        Term::Atom(_) | Term::Int(_) | Term::Pid(_) => Ok(term.clone()),
        Term::Tuple(items) => items.iter().map(eval_term).collect::<Result<_, _>>().map(Term::Tuple),
        Term::BinOp(op, l, r) => {
            let lhs = eval_term(l)?;
            let rhs = eval_term(r)?;
            let (a, b) = match (&lhs, &rhs) {
                (Term::Int(a), Term::Int(b)) => (*a, *b),
                (Term::Int(_), other) | (other, _) => {
                    return Err(EvalError::NotAnInteger {
                        op: op.symbol(),
                        operand: other.clone(),
                    })
                }
            };
            op.apply(a, b).map(Term::Int).ok_or(EvalError::Overflow {
                op: op.symbol(),
                lhs: a,
                rhs: b,
            })
        }
    }
}
