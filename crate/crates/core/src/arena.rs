//! Explicit transition tables compiled from a symbolic game.
//!
//! For every state the table lists the environment inputs that satisfy
//! `rho_e`, and for each such input the successor states the system may
//! choose (those satisfying `rho_s`) together with their weights. Inputs
//! violating `rho_e` and outputs violating `rho_s` are omitted; the
//! predecessor operators treat them through their empty-max/empty-min cases.

use crate::error::Result;
use crate::game::{submasks, State, VariableSet, WeightedGameStructure};

#[derive(Debug, Clone)]
pub struct Arena {
    vars: VariableSet,
    state_moves: Vec<u32>,
    move_input: Vec<u32>,
    move_succ: Vec<u32>,
    succ: Vec<u32>,
    weight: Vec<i64>,
    max_abs_weight: u64,
}

/// One valid environment input at a state and the system's answers to it.
#[derive(Debug, Clone, Copy)]
pub struct Move<'a> {
    pub input: u32,
    pub succs: &'a [u32],
    pub weights: &'a [i64],
}

impl Arena {
    pub fn from_game(game: &WeightedGameStructure) -> Result<Self> {
        let vars = game.vars().clone();
        let mut b = ArenaBuilder::new(vars.clone());
        for s in vars.states() {
            for x in submasks(vars.input_mask()) {
                if !game.env_allows(s, x) {
                    continue;
                }
                b.begin_move(x);
                for y in submasks(vars.output_mask()) {
                    let t = State(x | y);
                    if game.sys_allows(s, t) {
                        b.push_succ(t.0, game.rule_weight(s, t)?);
                    }
                }
            }
            b.end_state();
        }
        Ok(b.finish())
    }

    pub fn vars(&self) -> &VariableSet {
        &self.vars
    }

    pub fn num_states(&self) -> usize {
        self.state_moves.len() - 1
    }

    pub fn max_abs_weight(&self) -> u64 {
        self.max_abs_weight
    }

    pub fn moves(&self, s: usize) -> impl Iterator<Item = Move<'_>> + '_ {
        let (lo, hi) = (self.state_moves[s] as usize, self.state_moves[s + 1] as usize);
        (lo..hi).map(move |m| {
            let (a, b) = (self.move_succ[m] as usize, self.move_succ[m + 1] as usize);
            Move {
                input: self.move_input[m],
                succs: &self.succ[a..b],
                weights: &self.weight[a..b],
            }
        })
    }

    pub fn is_env_deadlock(&self, s: usize) -> bool {
        self.state_moves[s] == self.state_moves[s + 1]
    }
}

/// Incremental construction, state by state in index order.
pub(crate) struct ArenaBuilder {
    vars: VariableSet,
    state_moves: Vec<u32>,
    move_input: Vec<u32>,
    move_succ: Vec<u32>,
    succ: Vec<u32>,
    weight: Vec<i64>,
    max_abs_weight: u64,
}

impl ArenaBuilder {
    pub(crate) fn new(vars: VariableSet) -> Self {
        ArenaBuilder {
            vars,
            state_moves: vec![0],
            move_input: Vec::new(),
            move_succ: vec![0],
            succ: Vec::new(),
            weight: Vec::new(),
            max_abs_weight: 0,
        }
    }

    pub(crate) fn begin_move(&mut self, input: u32) {
        self.move_input.push(input);
        self.move_succ.push(self.succ.len() as u32);
    }

    pub(crate) fn push_succ(&mut self, t: u32, w: i64) {
        self.succ.push(t);
        self.weight.push(w);
        self.max_abs_weight = self.max_abs_weight.max(w.unsigned_abs());
        *self.move_succ.last_mut().expect("begin_move first") = self.succ.len() as u32;
    }

    pub(crate) fn end_state(&mut self) {
        self.state_moves.push(self.move_input.len() as u32);
    }

    pub(crate) fn finish(self) -> Arena {
        assert_eq!(self.state_moves.len() - 1, self.vars.num_states());
        Arena {
            vars: self.vars,
            state_moves: self.state_moves,
            move_input: self.move_input,
            move_succ: self.move_succ,
            succ: self.succ,
            weight: self.weight,
            max_abs_weight: self.max_abs_weight,
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::fixtures::g1;
    use crate::game::State;

    #[test]
    fn arena_matches_symbolic_successors() {
        let g = g1();
        let a = g.arena().unwrap();
        assert_eq!(a.num_states(), 4);
        assert_eq!(a.max_abs_weight(), 1);
        for s in g.vars().states() {
            let mut from_table: Vec<u32> = a.moves(s.index()).flat_map(|m| m.succs.to_vec()).collect();
            from_table.sort();
            let symbolic: Vec<u32> = g.successors(s).into_iter().map(|t| t.0).collect();
            assert_eq!(from_table, symbolic);
            for m in a.moves(s.index()) {
                for (&t, &w) in m.succs.iter().zip(m.weights) {
                    assert_eq!(w, g.weight(s, State(t)).unwrap());
                }
            }
        }
    }
}
