//! Explicit energy parity games and their bounded unfolding into parity games.
//!
//! Player 0 is the system and wins a play iff the least priority seen
//! infinitely often is even (and, in energy games, the energy level stays
//! non-negative). A player who cannot move loses.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;

use crate::energy::EnergyValue;
use crate::error::{Error, Result};
use crate::game::{submasks, State, WeightedGameStructure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Player {
    Zero,
    One,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::Zero => Player::One,
            Player::One => Player::Zero,
        }
    }

    /// The player favoured by a priority under the min-even convention.
    pub fn of_priority(p: u32) -> Player {
        if p.is_multiple_of(2) {
            Player::Zero
        } else {
            Player::One
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// A parity game: states with owners and priorities, and unweighted edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityGame {
    owner: Vec<Player>,
    prio: Vec<u32>,
    succ: Vec<Vec<usize>>,
}

/// A parity game whose edges carry integer weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnergyParityGame {
    owner: Vec<Player>,
    prio: Vec<u32>,
    edges: Vec<Vec<(usize, i64)>>,
}

impl EnergyParityGame {
    pub fn new() -> Self {
        EnergyParityGame {
            owner: Vec::new(),
            prio: Vec::new(),
            edges: Vec::new(),
        }
    }

    pub fn add_state(&mut self, owner: Player, prio: u32) -> usize {
        self.owner.push(owner);
        self.prio.push(prio);
        self.edges.push(Vec::new());
        self.owner.len() - 1
    }

    pub fn add_edge(&mut self, from: usize, to: usize, weight: i64) {
        assert!(to < self.owner.len(), "edge target out of range");
        self.edges[from].push((to, weight));
    }

    pub fn num_states(&self) -> usize {
        self.owner.len()
    }

    pub fn owner(&self, v: usize) -> Player {
        self.owner[v]
    }

    pub fn priority(&self, v: usize) -> u32 {
        self.prio[v]
    }

    pub fn edges(&self, v: usize) -> &[(usize, i64)] {
        &self.edges[v]
    }

    /// Number of distinct priorities.
    pub fn num_priorities(&self) -> usize {
        self.prio.iter().collect::<BTreeSet<_>>().len()
    }

    pub fn max_abs_weight(&self) -> u64 {
        self.edges
            .iter()
            .flatten()
            .map(|&(_, w)| w.unsigned_abs())
            .max()
            .unwrap_or(0)
    }

    /// The game without weights.
    pub fn parity_game(&self) -> ParityGame {
        ParityGame {
            owner: self.owner.clone(),
            prio: self.prio.clone(),
            succ: self
                .edges
                .iter()
                .map(|es| es.iter().map(|&(t, _)| t).collect())
                .collect(),
        }
    }

    /// Line-oriented text: `state <id> <owner> <priority>` lines in id
    /// order, then `edge <src> <dst> <weight>` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for v in 0..self.num_states() {
            writeln!(out, "state {v} {} {}", self.owner[v].index(), self.prio[v]).unwrap();
        }
        for (v, es) in self.edges.iter().enumerate() {
            for &(t, w) in es {
                writeln!(out, "edge {v} {t} {w}").unwrap();
            }
        }
        out
    }

    /// Parses [`to_text`](Self::to_text) output. Blank lines and `#`
    /// comments are ignored; state ids must be `0..n` in order.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut g = EnergyParityGame::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |m: &str| Error::ExplicitFormat {
                line,
                message: m.to_string(),
            };
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let fields: Vec<&str> = body.split_whitespace().collect();
            match fields.as_slice() {
                ["state", id, owner, prio] => {
                    let id: usize = id.parse().map_err(|_| err("bad state id"))?;
                    if id != g.num_states() {
                        return Err(err(&format!("expected state id {}, found {id}", g.num_states())));
                    }
                    let owner = match *owner {
                        "0" => Player::Zero,
                        "1" => Player::One,
                        _ => return Err(err("owner must be 0 or 1")),
                    };
                    let prio: u32 = prio.parse().map_err(|_| err("bad priority"))?;
                    g.add_state(owner, prio);
                }
                ["edge", src, dst, w] => {
                    let src: usize = src.parse().map_err(|_| err("bad edge source"))?;
                    let dst: usize = dst.parse().map_err(|_| err("bad edge target"))?;
                    let w: i64 = w.parse().map_err(|_| err("bad edge weight"))?;
                    if src >= g.num_states() || dst >= g.num_states() {
                        return Err(err("edge refers to an undeclared state"));
                    }
                    g.add_edge(src, dst, w);
                }
                _ => {
                    return Err(err(
                        "expected `state <id> <owner> <prio>` or `edge <src> <dst> <weight>`",
                    ))
                }
            }
        }
        Ok(g)
    }
}

impl Default for EnergyParityGame {
    fn default() -> Self {
        EnergyParityGame::new()
    }
}

/// Explicit game of a symbolic weighted game with priorities. Environment
/// (player 1) states are the original states `0..N`; system (player 0)
/// states `(s, u)` for every input assignment `u` follow at
/// `N + s * 2^|X| + rank(u)`. Edges `s -> (s, u)` exist when `u` is a valid
/// input and weigh 0; edges `(s, u) -> t` carry the system transition weight.
pub fn from_parity_wgs(game: &WeightedGameStructure) -> Result<EnergyParityGame> {
    let prio = game.priority_vector()?;
    let vars = game.vars();
    let n = vars.num_states();
    let inputs: Vec<u32> = submasks(vars.input_mask()).collect();
    let mut g = EnergyParityGame::new();
    for &p in &prio {
        g.add_state(Player::One, p);
    }
    for &p in &prio {
        for _ in &inputs {
            g.add_state(Player::Zero, p);
        }
    }
    for s in vars.states() {
        for (r, &u) in inputs.iter().enumerate() {
            let mid = n + s.index() * inputs.len() + r;
            if !game.env_allows(s, u) {
                continue;
            }
            g.add_edge(s.index(), mid, 0);
            for y in submasks(vars.output_mask()) {
                let t = State(u | y);
                if game.sys_allows(s, t) {
                    g.add_edge(mid, t.index(), game.rule_weight(s, t)?);
                }
            }
        }
    }
    Ok(g)
}

/// Bounded unfolding: state `(v, k)` at index `v * (c + 2) + k`, where
/// `k = c + 1` stands for the exhausted (`+inf`) layer. From `(v, k)` with
/// `k <= c`, an edge of weight `w` to `t` leads to `(t, min(c, k + w))` when
/// `k + w >= 0` and to `(t, +inf)` otherwise. Exhausted states are
/// player-0 deadlocks.
pub fn unfold_with_bound(g: &EnergyParityGame, c: u64) -> ParityGame {
    let layers = c as usize + 2;
    let inf = c as usize + 1;
    let n = g.num_states();
    let mut owner = Vec::with_capacity(n * layers);
    let mut prio = Vec::with_capacity(n * layers);
    let mut succ = Vec::with_capacity(n * layers);
    for v in 0..n {
        for k in 0..layers {
            prio.push(g.prio[v]);
            if k == inf {
                owner.push(Player::Zero);
                succ.push(Vec::new());
                continue;
            }
            owner.push(g.owner[v]);
            succ.push(
                g.edges[v]
                    .iter()
                    .map(|&(t, w)| {
                        let next = k as i128 + w as i128;
                        let k2 = if next < 0 { inf } else { next.min(c as i128) as usize };
                        t * layers + k2
                    })
                    .collect(),
            );
        }
    }
    ParityGame { owner, prio, succ }
}

/// `d (n - 1) K`: a bound at which every energy parity game with `n`
/// states, `d` priorities and largest absolute weight `K` is already won
/// whenever it is won at all.
pub fn bound_ep(n: u64, d: u64, k: u64) -> u64 {
    d * n.saturating_sub(1) * k
}

/// `d (n - 1) K + 1`: memory sufficient for winning strategies.
pub fn memory_bound(n: u64, d: u64, k: u64) -> u64 {
    bound_ep(n, d, k) + 1
}

/// Minimum winning credit of every state at bound `c` (`+inf` if none),
/// obtained by solving the unfolding.
pub fn solve_energy_parity(g: &EnergyParityGame, c: u64) -> Result<Vec<EnergyValue>> {
    let unfolded = unfold_with_bound(g, c);
    let (w0, w1) = unfolded.solve();
    if w0.iter().zip(&w1).any(|(a, b)| a == b) {
        return Err(Error::Consistency(
            "parity winning regions do not partition the unfolding".into(),
        ));
    }
    let layers = c as usize + 2;
    (0..g.num_states())
        .map(|v| {
            let wins: Vec<u64> = (0..=c).filter(|&k| w0[v * layers + k as usize]).collect();
            match wins.first() {
                None => Ok(EnergyValue::INFINITY),
                Some(&k0) if wins.len() as u64 == c + 1 - k0 => Ok(EnergyValue::finite(k0)),
                Some(_) => Err(Error::Consistency(format!(
                    "winning credits {wins:?} of state {v} are not upward closed"
                ))),
            }
        })
        .collect()
}

impl ParityGame {
    pub fn new(owner: Vec<Player>, prio: Vec<u32>, succ: Vec<Vec<usize>>) -> Self {
        assert!(owner.len() == prio.len() && prio.len() == succ.len());
        assert!(
            succ.iter().flatten().all(|&t| t < owner.len()),
            "successor out of range"
        );
        ParityGame { owner, prio, succ }
    }

    pub fn num_states(&self) -> usize {
        self.owner.len()
    }

    pub fn owner(&self, v: usize) -> Player {
        self.owner[v]
    }

    pub fn priority(&self, v: usize) -> u32 {
        self.prio[v]
    }

    pub fn successors(&self, v: usize) -> &[usize] {
        &self.succ[v]
    }

    fn predecessors(&self) -> Vec<Vec<usize>> {
        let mut pred = vec![Vec::new(); self.num_states()];
        for (v, ts) in self.succ.iter().enumerate() {
            for &t in ts {
                pred[t].push(v);
            }
        }
        pred
    }

    /// States from which `player` can force reaching `target`, or a state
    /// where the opponent must move but cannot.
    pub fn attractor(&self, player: Player, target: &[bool]) -> Vec<bool> {
        let all = vec![true; self.num_states()];
        attractor_in(self, &self.predecessors(), &all, player, target)
    }

    /// Winning regions `(W0, W1)` as membership vectors.
    pub fn solve(&self) -> (Vec<bool>, Vec<bool>) {
        let pred = self.predecessors();
        let all = vec![true; self.num_states()];
        let [w0, w1] = zielonka(self, &pred, &all);
        (w0, w1)
    }
}

/// Attractor restricted to the subgame `within`; `target` must lie inside it.
fn attractor_in(g: &ParityGame, pred: &[Vec<usize>], within: &[bool], player: Player, target: &[bool]) -> Vec<bool> {
    let n = g.num_states();
    let mut attr = vec![false; n];
    // Remaining successors inside the subgame that are not yet attracted.
    let mut open: Vec<usize> = (0..n)
        .map(|v| {
            if within[v] {
                g.succ[v].iter().filter(|&&t| within[t]).count()
            } else {
                0
            }
        })
        .collect();
    let mut queue = VecDeque::new();
    for v in 0..n {
        if within[v] && (target[v] || (g.owner[v] != player && open[v] == 0)) {
            attr[v] = true;
            queue.push_back(v);
        }
    }
    while let Some(t) = queue.pop_front() {
        for &v in &pred[t] {
            if !within[v] || attr[v] {
                continue;
            }
            if g.owner[v] == player {
                attr[v] = true;
                queue.push_back(v);
            } else {
                open[v] -= 1;
                if open[v] == 0 {
                    attr[v] = true;
                    queue.push_back(v);
                }
            }
        }
    }
    attr
}

fn minus(a: &[bool], b: &[bool]) -> Vec<bool> {
    a.iter().zip(b).map(|(&x, &y)| x && !y).collect()
}

fn union(a: &[bool], b: &[bool]) -> Vec<bool> {
    a.iter().zip(b).map(|(&x, &y)| x || y).collect()
}

fn zielonka(g: &ParityGame, pred: &[Vec<usize>], within: &[bool]) -> [Vec<bool>; 2] {
    let n = g.num_states();
    let none = vec![false; n];
    if !within.iter().any(|&b| b) {
        return [none.clone(), none];
    }
    // Peel off positions where some player can force the other into a
    // deadlock; the remainder is deadlock-free.
    for p in [Player::Zero, Player::One] {
        let forced = attractor_in(g, pred, within, p, &none);
        if forced.iter().any(|&b| b) {
            let mut w = zielonka(g, pred, &minus(within, &forced));
            w[p.index()] = union(&w[p.index()], &forced);
            return w;
        }
    }
    let p = (0..n)
        .filter(|&v| within[v])
        .map(|v| g.prio[v])
        .min()
        .expect("nonempty");
    let i = Player::of_priority(p);
    let top: Vec<bool> = (0..n).map(|v| within[v] && g.prio[v] == p).collect();
    let a = attractor_in(g, pred, within, i, &top);
    let w = zielonka(g, pred, &minus(within, &a));
    let o = i.opponent();
    if !w[o.index()].iter().any(|&b| b) {
        let mut out = [none.clone(), none];
        out[i.index()] = within.to_vec();
        return out;
    }
    let b = attractor_in(g, pred, within, o, &w[o.index()]);
    let mut w2 = zielonka(g, pred, &minus(within, &b));
    w2[o.index()] = union(&w2[o.index()], &b);
    w2
}
