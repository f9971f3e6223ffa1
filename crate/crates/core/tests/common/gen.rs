//! Seeded random protocol generators.

use std::ops::RangeInclusive;

use caa_core::automaton::{Caa, Label, StateId, Target, Transition};
use caa_core::semantics::Protocol;
use caa_core::terms::{ArithOp, Pattern, Pid, Term};
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct Shape {
    pub machines: RangeInclusive<usize>,
    pub states: RangeInclusive<usize>,
    pub max_sends: usize,
    pub max_arms: usize,
    /// Allow `?p` transitions from a state to itself.
    pub receive_loops: bool,
    /// Allow sends whose target is a variable.
    pub var_targets: bool,
    /// Allow arithmetic in payloads.
    pub arithmetic: bool,
    /// Draw state names from a pool that includes keywords and odd casing.
    pub fancy_names: bool,
    /// Chance in ten that a state which may send does.
    pub send_odds: u32,
    /// Machine #0 only receives and every other machine sends only to it.
    pub common_receiver: bool,
}

impl Shape {
    /// Protocols small enough for exhaustive naive enumeration.
    pub fn tiny() -> Shape {
        Shape {
            machines: 2..=3,
            states: 1..=3,
            max_sends: 2,
            max_arms: 2,
            receive_loops: true,
            var_targets: true,
            arithmetic: true,
            fancy_names: false,
            send_odds: 6,
            common_receiver: false,
        }
    }

    /// Two machines, as in the convergence class.
    pub fn binary() -> Shape {
        Shape {
            machines: 2..=2,
            states: 2..=5,
            max_sends: 3,
            max_arms: 3,
            receive_loops: true,
            var_targets: true,
            arithmetic: true,
            fancy_names: false,
            send_odds: 4,
            common_receiver: false,
        }
    }

    /// Several machines that tend to send to a common receiver.
    pub fn racy() -> Shape {
        Shape {
            machines: 3..=4,
            states: 2..=4,
            max_sends: 2,
            max_arms: 3,
            receive_loops: true,
            var_targets: false,
            arithmetic: false,
            fancy_names: false,
            send_odds: 7,
            common_receiver: true,
        }
    }

    /// Larger, syntactically varied protocols for printing and parsing.
    pub fn textual() -> Shape {
        Shape {
            machines: 1..=4,
            states: 1..=6,
            max_sends: 4,
            max_arms: 3,
            receive_loops: true,
            var_targets: true,
            arithmetic: true,
            fancy_names: true,
            send_odds: 4,
            common_receiver: false,
        }
    }
}

const ATOMS: &[&str] = &["a", "b", "who", "ok"];
const VARS: &[&str] = &["X", "Y", "P"];
const FANCY: &[&str] = &[
    "s0", "machine", "initial", "final", "Idle", "busy_1", "x", "end", "_q", "S",
];

pub struct Generator<'r> {
    rng: &'r mut ChaCha8Rng,
    shape: Shape,
}

impl<'r> Generator<'r> {
    pub fn new(rng: &'r mut ChaCha8Rng, shape: Shape) -> Self {
        Generator { rng, shape }
    }

    pub fn protocol(&mut self) -> Protocol {
        let n = self.rng.random_range(self.shape.machines.clone());
        let pids: Vec<Pid> = (0..n as u32).map(Pid).collect();
        let machines: Vec<(Pid, Caa)> = pids.iter().map(|&pid| (pid, self.machine(pid, &pids))).collect();
        Protocol::new(machines).expect("distinct pids")
    }

    fn state_names(&mut self, k: usize) -> Vec<StateId> {
        if !self.shape.fancy_names {
            return (0..k).map(|i| StateId::new(format!("s{i}"))).collect();
        }
        let mut pool: Vec<&str> = FANCY.to_vec();
        let mut names = Vec::new();
        for i in 0..k {
            if pool.is_empty() || self.rng.random_bool(0.3) {
                names.push(StateId::new(format!("q{i}")));
            } else {
                let j = self.rng.random_range(0..pool.len());
                names.push(StateId::new(pool.swap_remove(j)));
            }
        }
        names
    }

    fn machine(&mut self, own: Pid, pids: &[Pid]) -> Caa {
        let k = self.rng.random_range(self.shape.states.clone());
        let names = self.state_names(k);
        let peers: Vec<Pid> = if !self.shape.common_receiver {
            pids.iter().copied().filter(|p| *p != own).collect()
        } else if own == Pid(0) {
            Vec::new()
        } else {
            vec![Pid(0)]
        };
        let mut transitions = Vec::new();
        let mut sends = 0;
        for i in 0..k {
            let can_send = i + 1 < k && sends < self.shape.max_sends && !peers.is_empty();
            let roll = self.rng.random_range(0..10);
            if can_send && roll < self.shape.send_odds {
                sends += 1;
                let to = self.rng.random_range(i + 1..k);
                let target = self.target(&peers);
                let payload = self.payload(own);
                transitions.push(Transition {
                    from: names[i].clone(),
                    label: Label::Send { target, payload },
                    to: names[to].clone(),
                });
            } else if (roll < 8 || peers.is_empty()) && (i + 1 < k || self.shape.receive_loops) {
                let arms = self.rng.random_range(1..=self.shape.max_arms);
                let mut patterns: Vec<Pattern> = Vec::new();
                for _ in 0..arms {
                    let p = self.pattern(pids);
                    if patterns.contains(&p) {
                        continue;
                    }
                    let lo = if self.shape.receive_loops { i } else { i + 1 };
                    if lo >= k {
                        continue;
                    }
                    let to = self.rng.random_range(lo..k);
                    patterns.push(p.clone());
                    transitions.push(Transition {
                        from: names[i].clone(),
                        label: Label::Receive(p),
                        to: names[to].clone(),
                    });
                }
            }
        }
        let finals: Vec<StateId> = names.iter().filter(|_| self.rng.random_bool(0.4)).cloned().collect();
        Caa::new(names[0].clone(), finals, transitions)
    }

    fn target(&mut self, peers: &[Pid]) -> Target {
        if self.shape.var_targets && self.rng.random_bool(0.25) {
            Target::Var("P".into())
        } else {
            Target::Pid(*peers.choose(self.rng).expect("at least one peer"))
        }
    }

    fn atom(&mut self) -> Term {
        Term::atom(*ATOMS.choose(self.rng).unwrap())
    }

    fn var(&mut self) -> Term {
        Term::var(*VARS.choose(self.rng).unwrap())
    }

    fn int(&mut self) -> Term {
        Term::Int(self.rng.random_range(-1..=2))
    }

    /// Message payloads. A pid inside a payload is always the sender's own,
    /// the usual way of telling a peer where to reply.
    fn payload(&mut self, own: Pid) -> Term {
        match self.rng.random_range(0..9) {
            0 | 1 => self.atom(),
            2 => self.int(),
            3 => Term::tuple([Term::atom("who"), Term::Pid(own)]),
            4 => Term::tuple([self.atom(), self.int()]),
            5 => Term::tuple([self.atom(), self.var()]),
            6 if self.shape.arithmetic => {
                let op = *[ArithOp::Add, ArithOp::Sub, ArithOp::Mul].choose(self.rng).unwrap();
                Term::tuple([self.atom(), Term::binop(op, Term::var("X"), self.int())])
            }
            7 => self.var(),
            _ => Term::tuple([self.atom(), self.atom()]),
        }
    }

    fn pattern(&mut self, pids: &[Pid]) -> Pattern {
        let t = match self.rng.random_range(0..9) {
            0 | 1 => self.atom(),
            2 => self.int(),
            3 => Term::tuple([Term::atom("who"), Term::var("P")]),
            4 => Term::tuple([self.atom(), self.int()]),
            5 => Term::tuple([self.atom(), Term::var("X")]),
            6 => Term::var("X"),
            7 => Term::tuple([Term::var("Y"), Term::var("X")]),
            _ => Term::tuple([self.atom(), Term::Pid(*pids.choose(self.rng).unwrap())]),
        };
        Pattern::new(t).expect("no arithmetic in patterns")
    }
}

/// Shorthand: one protocol from a seed.
pub fn protocol(seed: u64, shape: Shape) -> Protocol {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Generator::new(&mut rng, shape).protocol()
}
