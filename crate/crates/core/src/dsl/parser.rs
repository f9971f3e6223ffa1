use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::automaton::{Caa, Label, StateId, Target, Transition, ValidationIssue};
use crate::semantics::{Protocol, ProtocolIssue};
use crate::terms::{is_atom_name, is_var_name, ArithOp, Pattern, Pid, Term};

use super::lexer::{tokenize, Span, Tok, Token};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub message: String,
    pub span: Span,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.span, self.message)
    }
}

impl std::error::Error for ParseError {}

/// A validation issue located in the source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub issue: ProtocolIssue,
    pub span: Span,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.span, self.issue)
    }
}

/// Source locations of the parsed protocol's parts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SpanMap {
    machines: BTreeMap<Pid, Span>,
    states: HashMap<(Pid, StateId), Span>,
    transitions: BTreeMap<(Pid, usize), Span>,
}

impl SpanMap {
    /// The `machine #n` header.
    pub fn machine(&self, pid: Pid) -> Option<Span> {
        self.machines.get(&pid).copied()
    }

    /// First mention of a state inside its machine.
    pub fn state(&self, pid: Pid, state: &StateId) -> Option<Span> {
        self.states.get(&(pid, state.clone())).copied()
    }

    /// The `index`-th transition of a machine, in source order.
    pub fn transition(&self, pid: Pid, index: usize) -> Option<Span> {
        self.transitions.get(&(pid, index)).copied()
    }
}

/// A parsed protocol file.
#[derive(Debug, Clone)]
pub struct ProtocolDoc {
    pub source: String,
    pub protocol: Protocol,
    pub spans: SpanMap,
    /// Validation results (warnings and errors), in machine order.
    pub issues: Vec<Diagnostic>,
}

impl ProtocolDoc {
    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.issues
            .iter()
            .filter(|d| d.issue.severity() == crate::automaton::Severity::Error)
    }

    pub fn has_errors(&self) -> bool {
        self.errors().next().is_some()
    }
}

/// Parses a protocol file and validates every machine in it.
///
/// Syntax errors are all reported together; validation problems do not fail
/// the parse and are returned in [`ProtocolDoc::issues`] instead.
pub fn parse_protocol(text: &str) -> Result<ProtocolDoc, Vec<ParseError>> {
    let (tokens, lex_errors) = tokenize(text);
    let mut parser = Parser {
        tokens,
        pos: 0,
        errors: lex_errors
            .into_iter()
            .map(|e| ParseError {
                message: e.message,
                span: e.span,
            })
            .collect(),
        spans: SpanMap::default(),
    };
    let machines = parser.protocol();
    let Parser { mut errors, spans, .. } = parser;
    if !errors.is_empty() {
        errors.sort_by_key(|e| e.span.start);
        return Err(errors);
    }
    let protocol = Protocol::new(machines).expect("machines are non-empty with distinct pids");
    let issues = protocol
        .validate()
        .into_iter()
        .map(|issue| {
            let span = locate(&protocol, &spans, &issue);
            Diagnostic { issue, span }
        })
        .collect();
    Ok(ProtocolDoc {
        source: text.to_string(),
        protocol,
        spans,
        issues,
    })
}

fn locate(p: &Protocol, spans: &SpanMap, issue: &ProtocolIssue) -> Span {
    let pid = issue.pid;
    let state = issue.issue.state();
    let fallback = spans
        .state(pid, state)
        .or_else(|| spans.machine(pid))
        .expect("every machine has a header span");
    let Some(m) = p.machine(pid) else {
        return fallback;
    };
    let wanted = |t: &Transition| match (&issue.issue, &t.label) {
        (
            ValidationIssue::SelfSend { pid, .. } | ValidationIssue::UnknownTarget { pid, .. },
            Label::Send { target, .. },
        ) => *target == Target::Pid(*pid),
        (
            ValidationIssue::NonLinearPattern { pattern, .. } | ValidationIssue::DuplicatePattern { pattern, .. },
            Label::Receive(q),
        ) => q == pattern,
        (
            ValidationIssue::MixedState { .. }
            | ValidationIssue::NonAffineSend { .. }
            | ValidationIssue::FinalStateSends { .. },
            Label::Send { .. },
        ) => true,
        _ => false,
    };
    let matching: Vec<usize> = m
        .caa
        .transitions()
        .iter()
        .enumerate()
        .filter(|(_, t)| &t.from == state && wanted(t))
        .map(|(i, _)| i)
        .collect();
    // Duplicates are reported at their second occurrence.
    let index = match &issue.issue {
        ValidationIssue::DuplicatePattern { .. } | ValidationIssue::NonAffineSend { .. } => matching.get(1),
        _ => matching.first(),
    };
    index.and_then(|&i| spans.transition(pid, i)).unwrap_or(fallback)
}

/// Marker for an error that has already been recorded.
struct Reported;

type PResult<T> = Result<T, Reported>;

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    errors: Vec<ParseError>,
    spans: SpanMap,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.peek_token().tok
    }

    fn peek_token(&self) -> &Token {
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    fn peek_at(&self, ahead: usize) -> &Tok {
        &self.tokens[(self.pos + ahead).min(self.tokens.len() - 1)].tok
    }

    fn advance(&mut self) -> Token {
        let t = self.peek_token().clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    /// Span to blame for an unexpected token. At the end of input this is the
    /// last real token, so the span stays inside the text.
    fn blame_span(&self) -> Span {
        let t = self.peek_token();
        if t.tok == Tok::Eof && self.pos > 0 {
            self.tokens[self.pos - 1].span
        } else {
            t.span
        }
    }

    fn error_at(&mut self, span: Span, message: impl Into<String>) -> Reported {
        self.errors.push(ParseError {
            message: message.into(),
            span,
        });
        Reported
    }

    fn unexpected(&mut self, expected: &str) -> Reported {
        let found = self.peek().to_string();
        let span = self.blame_span();
        self.error_at(span, format!("expected {expected}, found {found}"))
    }

    fn expect(&mut self, tok: Tok) -> PResult<Span> {
        if *self.peek() == tok {
            Ok(self.advance().span)
        } else {
            Err(self.unexpected(&tok.to_string()))
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> PResult<Span> {
        if self.is_keyword(kw) {
            Ok(self.advance().span)
        } else {
            Err(self.unexpected(&format!("`{kw}`")))
        }
    }

    /// Skips to just after the next `;`, or up to a `}` that closes the
    /// machine (one followed by another machine or the end of input).
    fn recover_statement(&mut self) {
        loop {
            match self.peek() {
                Tok::Semi => {
                    self.advance();
                    return;
                }
                Tok::Eof => return,
                Tok::RBrace if self.closes_machine() => return,
                _ => {
                    self.advance();
                }
            }
        }
    }

    fn closes_machine(&self) -> bool {
        match self.peek_at(1) {
            Tok::Eof => true,
            Tok::Ident(kw) => kw == "machine" && matches!(self.peek_at(2), Tok::Pid(_)),
            _ => false,
        }
    }

    /// Skips to the next `machine` keyword that starts a line of tokens
    /// (i.e. is not itself followed by `--`).
    fn recover_machine(&mut self) {
        while *self.peek() != Tok::Eof {
            if self.is_keyword("machine") && matches!(self.peek_at(1), Tok::Pid(_)) {
                return;
            }
            self.advance();
        }
    }

    fn protocol(&mut self) -> Vec<(Pid, Caa)> {
        let mut machines: Vec<(Pid, Caa)> = Vec::new();
        if *self.peek() == Tok::Eof {
            let span = self.peek_token().span;
            self.error_at(span, "expected `machine`");
            return machines;
        }
        while *self.peek() != Tok::Eof {
            if !self.is_keyword("machine") {
                self.unexpected("`machine`");
                self.advance();
                self.recover_machine();
                continue;
            }
            if let Some((pid, caa)) = self.machine() {
                machines.push((pid, caa));
            }
        }
        machines
    }

    fn machine(&mut self) -> Option<(Pid, Caa)> {
        let header = self.advance().span;
        let (pid, pid_span) = match self.peek().clone() {
            Tok::Pid(n) => (Pid(n), self.advance().span),
            _ => {
                self.unexpected("a process identifier like `#0`");
                self.recover_machine();
                return None;
            }
        };
        let duplicate = self.spans.machines.contains_key(&pid);
        if duplicate {
            self.error_at(header.to(pid_span), format!("duplicate machine {pid}"));
        } else {
            self.spans.machines.insert(pid, header.to(pid_span));
        }
        if self.expect(Tok::LBrace).is_err() {
            self.recover_machine();
            return None;
        }
        let mut ok = true;
        let mention = |spans: &mut SpanMap, state: &StateId, span: Span| {
            if !duplicate {
                spans.states.entry((pid, state.clone())).or_insert(span);
            }
        };

        let initial = match self.initial() {
            Ok((s, span)) => {
                mention(&mut self.spans, &s, span);
                Some(s)
            }
            Err(Reported) => {
                ok = false;
                self.recover_statement();
                None
            }
        };

        let mut finals = Vec::new();
        if self.is_keyword("final") && *self.peek_at(1) != Tok::DashDash {
            self.advance();
            match self.state_list() {
                Ok(list) => {
                    for (s, span) in list {
                        mention(&mut self.spans, &s, span);
                        finals.push(s);
                    }
                }
                Err(Reported) => {
                    ok = false;
                    self.recover_statement();
                }
            }
        }

        let mut transitions = Vec::new();
        while !matches!(self.peek(), Tok::RBrace | Tok::Eof) {
            match self.transition() {
                Ok((t, from_span, to_span, span)) => {
                    mention(&mut self.spans, &t.from, from_span);
                    mention(&mut self.spans, &t.to, to_span);
                    if !duplicate {
                        self.spans.transitions.insert((pid, transitions.len()), span);
                    }
                    transitions.push(t);
                }
                Err(Reported) => {
                    ok = false;
                    self.recover_statement();
                }
            }
        }
        if self.expect(Tok::RBrace).is_err() {
            return None;
        }
        match initial {
            Some(initial) if ok && !duplicate => Some((pid, Caa::new(initial, finals, transitions))),
            _ => None,
        }
    }

    fn initial(&mut self) -> PResult<(StateId, Span)> {
        self.expect_keyword("initial")?;
        let s = self.state()?;
        self.expect(Tok::Semi)?;
        Ok(s)
    }

    fn state_list(&mut self) -> PResult<Vec<(StateId, Span)>> {
        let mut out = vec![self.state()?];
        while *self.peek() != Tok::Semi {
            if !matches!(self.peek(), Tok::Ident(_)) {
                return Err(self.unexpected("a state name or `;`"));
            }
            out.push(self.state()?);
        }
        self.advance();
        Ok(out)
    }

    fn state(&mut self) -> PResult<(StateId, Span)> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let span = self.advance().span;
                Ok((StateId::new(name), span))
            }
            _ => Err(self.unexpected("a state name")),
        }
    }

    fn transition(&mut self) -> PResult<(Transition, Span, Span, Span)> {
        let (from, from_span) = self.state()?;
        self.expect(Tok::DashDash)?;
        let label = self.label()?;
        self.expect(Tok::Arrow)?;
        let (to, to_span) = self.state()?;
        let end = self.expect(Tok::Semi)?;
        Ok((Transition { from, label, to }, from_span, to_span, from_span.to(end)))
    }

    fn label(&mut self) -> PResult<Label> {
        match self.peek().clone() {
            Tok::Question => {
                self.advance();
                let start = self.peek_token().span;
                let term = self.term()?;
                let span = start.to(self.tokens[self.pos - 1].span);
                match Pattern::new(term) {
                    Ok(p) => Ok(Label::Receive(p)),
                    Err(_) => Err(self.error_at(span, "receive patterns cannot contain arithmetic")),
                }
            }
            Tok::Pid(n) => {
                self.advance();
                self.expect(Tok::Bang)?;
                let payload = self.term()?;
                Ok(Label::Send {
                    target: Target::Pid(Pid(n)),
                    payload,
                })
            }
            Tok::Ident(name) if is_var_name(&name) => {
                self.advance();
                self.expect(Tok::Bang)?;
                let payload = self.term()?;
                Ok(Label::Send {
                    target: Target::Var(name),
                    payload,
                })
            }
            _ => Err(self.unexpected("`?pattern` or `Target ! term`")),
        }
    }

    fn term(&mut self) -> PResult<Term> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => ArithOp::Add,
                Tok::Minus => ArithOp::Sub,
                _ => return Ok(lhs),
            };
            self.advance();
            let rhs = self.product()?;
            lhs = Term::binop(op, lhs, rhs);
        }
    }

    fn product(&mut self) -> PResult<Term> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::Star {
            self.advance();
            let rhs = self.unary()?;
            lhs = Term::binop(ArithOp::Mul, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Term> {
        if *self.peek() != Tok::Minus {
            return self.primary();
        }
        let minus = self.advance().span;
        match self.peek().clone() {
            Tok::Int(n) => {
                let span = minus.to(self.advance().span);
                match i64::try_from(n).map(i64::wrapping_neg) {
                    Ok(v) => Ok(Term::Int(v)),
                    Err(_) if n == i64::MIN.unsigned_abs() => Ok(Term::Int(i64::MIN)),
                    Err(_) => Err(self.error_at(span, "integer literal out of range")),
                }
            }
            _ => Err(self.unexpected("an integer literal after unary `-`")),
        }
    }

    fn primary(&mut self) -> PResult<Term> {
        let token = self.peek_token().clone();
        match token.tok {
            Tok::Int(n) => {
                self.advance();
                i64::try_from(n)
                    .map(Term::Int)
                    .map_err(|_| self.error_at(token.span, "integer literal out of range"))
            }
            Tok::Pid(n) => {
                self.advance();
                Ok(Term::Pid(Pid(n)))
            }
            Tok::Ident(name) => {
                self.advance();
                if is_atom_name(&name) {
                    Ok(Term::Atom(name))
                } else if is_var_name(&name) {
                    Ok(Term::Var(name))
                } else {
                    Err(self.error_at(
                        token.span,
                        format!("`{name}` is neither an atom (lowercase) nor a variable (uppercase)"),
                    ))
                }
            }
            Tok::LBrace => {
                self.advance();
                let mut items = Vec::new();
                if *self.peek() != Tok::RBrace {
                    items.push(self.term()?);
                    while *self.peek() == Tok::Comma {
                        self.advance();
                        items.push(self.term()?);
                    }
                }
                self.expect(Tok::RBrace)?;
                Ok(Term::Tuple(items))
            }
            Tok::LParen => {
                self.advance();
                let inner = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            _ => Err(self.unexpected("a term")),
        }
    }
}
