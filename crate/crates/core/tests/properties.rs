use emu_core::classical::eval_classical;
use emu_core::energy::{ec_env_step, ec_step, eval_energy};
use emu_core::formula::{self, buchi};
use emu_core::parity::{bound_ep, solve_energy_parity, ParityGame, Player};
use emu_core::random::{random_energy_parity_game, random_formula, random_game, random_state_assertion, GameShape};
use emu_core::solver::{solve, sufficient_bound, SolveRequest};
use emu_core::{
    Bound, EnergyValuation, EnergyValue, Formula, PlayPrefix, SetValuation, State, StateSet, WeightedGameStructure,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn small_game(seed: u64) -> WeightedGameStructure {
    random_game(&mut rng(seed), &GameShape::default())
}

/// A random play prefix following valid transitions, stopping early at a
/// state without successors.
fn random_prefix<R: Rng>(rng: &mut R, game: &WeightedGameStructure, len: usize) -> PlayPrefix {
    let mut s = State(rng.gen_range(0..game.num_states() as u32));
    let mut states = vec![s];
    for _ in 0..len {
        let succ = game.successors(s);
        if succ.is_empty() {
            break;
        }
        s = succ[rng.gen_range(0..succ.len())];
        states.push(s);
    }
    PlayPrefix::new(game, states).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn energy_level_monotone_in_credit_and_truncation(seed in any::<u64>(), c in 0u64..10, len in 0usize..12) {
        let game = small_game(seed);
        let prefix = random_prefix(&mut rng(seed ^ 1), &game, len);
        for c0 in 0..c {
            let lo = game.energy_level(Bound::Finite(c), c0, &prefix).unwrap();
            let hi = game.energy_level(Bound::Finite(c), c0 + 1, &prefix).unwrap();
            prop_assert!(lo <= hi);
            // Truncation never adds energy.
            prop_assert!(lo <= game.energy_level(Bound::Infinite, c0, &prefix).unwrap());
            // Winning is upward closed in the initial credit.
            if game.wins_energy_objective(Bound::Finite(c), c0, &prefix).unwrap() {
                prop_assert!(game.wins_energy_objective(Bound::Finite(c), c0 + 1, &prefix).unwrap());
            }
        }
    }

    #[test]
    fn step_functions_stay_in_range(c in 0u64..20, w in -5i64..=5, e in prop::option::of(0u64..20)) {
        let e = e.filter(|&e| e <= c).map_or(EnergyValue::INFINITY, EnergyValue::finite);
        for v in [ec_step(c, w, e), ec_env_step(c, w, e)] {
            prop_assert!(v.is_infinite() || v.get().unwrap() <= c);
        }
        // Requiring more afterwards never lowers the requirement now.
        if let Some(x) = e.get().filter(|&x| x < c) {
            let more = EnergyValue::finite(x + 1);
            prop_assert!(ec_step(c, w, e).get().unwrap_or(u64::MAX) <= ec_step(c, w, more).get().unwrap_or(u64::MAX));
        }
    }

    #[test]
    fn formulas_print_and_parse_back(seed in any::<u64>(), depth in 0u32..5) {
        let game = small_game(seed);
        let f = random_formula(&mut rng(seed), game.vars(), depth);
        let text = f.to_string();
        let back = Formula::parse(&text).unwrap();
        prop_assert_eq!(&back, &f, "{}", text);
        prop_assert_eq!(back.to_string(), text);
    }

    #[test]
    fn metrics_ignore_bound_variable_names(seed in any::<u64>(), depth in 0u32..5) {
        let game = small_game(seed);
        let f = random_formula(&mut rng(seed), game.vars(), depth);
        let renamed = Formula::parse(&f.to_string().replace('X', "Renamed")).unwrap();
        prop_assert_eq!(renamed.metrics(), f.metrics());
        prop_assert_eq!(f.rename_apart().metrics(), f.metrics());
        // Pushing negations inward does not change the alternation depth.
        prop_assert_eq!(f.push_negations().alternation_depth(), f.alternation_depth());
    }

    #[test]
    fn classical_negation_is_complement(seed in any::<u64>(), depth in 0u32..4) {
        let game = small_game(seed);
        let arena = game.arena().unwrap();
        let f = random_formula(&mut rng(seed), game.vars(), depth);
        let v = SetValuation::new();
        let pos = eval_classical(&arena, &f, &v).unwrap();
        let neg = eval_classical(&arena, &Formula::negate(f.clone()), &v).unwrap();
        prop_assert_eq!(&neg, &pos.complement());
        // Determinacy: the dual formula wins exactly where f loses.
        let dual = eval_classical(&arena, &f.dual(), &v).unwrap();
        prop_assert_eq!(dual, pos.complement());
    }

    #[test]
    fn energy_negation_is_lattice_negation(seed in any::<u64>(), depth in 0u32..4, c in 0u64..6) {
        let game = small_game(seed);
        let arena = game.arena().unwrap();
        let f = random_formula(&mut rng(seed), game.vars(), depth);
        let v = EnergyValuation::new();
        let pos = eval_energy(&arena, c, &f, &v).unwrap();
        prop_assert_eq!(eval_energy(&arena, c, &Formula::negate(f.clone()), &v).unwrap(), pos.neg());
        prop_assert_eq!(eval_energy(&arena, c, &f.dual(), &v).unwrap(), pos.neg());
    }

    #[test]
    fn energy_winning_refines_classical_winning(seed in any::<u64>(), c in 0u64..6) {
        // Ignoring weights can only help the system.
        let game = small_game(seed);
        let arena = game.arena().unwrap();
        let j = random_state_assertion(&mut rng(seed), game.vars(), 2);
        let f = buchi(Formula::Prop(j));
        let classical = eval_classical(&arena, &f, &SetValuation::new()).unwrap();
        let energy = eval_energy(&arena, c, &f, &EnergyValuation::new()).unwrap();
        let finite = StateSet::from_fn(energy.len(), |s| energy.get(s).is_finite());
        prop_assert!(finite.is_subset(&classical));
    }

    #[test]
    fn attractors_are_idempotent(seed in any::<u64>(), n in 1usize..10) {
        let mut r = rng(seed);
        let g = random_energy_parity_game(&mut r, n, 3, 1).parity_game();
        let target: Vec<bool> = (0..n).map(|_| r.gen_bool(0.3)).collect();
        for p in [Player::Zero, Player::One] {
            let a = g.attractor(p, &target);
            prop_assert!(target.iter().zip(&a).all(|(t, a)| !t || *a));
            prop_assert_eq!(g.attractor(p, &a), a);
        }
    }

    #[test]
    fn zielonka_matches_strategy_enumeration(seed in any::<u64>(), n in 1usize..7) {
        let mut r = rng(seed);
        let mut g = random_energy_parity_game(&mut r, n, 4, 0).parity_game();
        // Remove some edges so that deadlocks occur.
        if r.gen_bool(0.3) {
            let v = r.gen_range(0..n);
            let succ: Vec<Vec<usize>> = (0..n)
                .map(|u| if u == v { Vec::new() } else { g.successors(u).to_vec() })
                .collect();
            g = ParityGame::new((0..n).map(|u| g.owner(u)).collect(), (0..n).map(|u| g.priority(u)).collect(), succ);
        }
        let (w0, w1) = g.solve();
        let brute = brute_force_parity(&g);
        prop_assert_eq!(&w0, &brute);
        prop_assert!(w0.iter().zip(&w1).all(|(a, b)| a != b));
    }

    #[test]
    fn energy_parity_credits_stabilize(seed in any::<u64>(), n in 1usize..7, d in 1u32..4, k in 1i64..3) {
        let g = random_energy_parity_game(&mut rng(seed), n, d, k);
        let b = bound_ep(n as u64, g.num_priorities() as u64, g.max_abs_weight());
        let at_b = solve_energy_parity(&g, b).unwrap();
        let beyond = solve_energy_parity(&g, b + 3).unwrap();
        // Beyond the bound nothing changes; below it winning can only shrink.
        prop_assert_eq!(&at_b, &beyond);
        if b > 0 {
            let below = solve_energy_parity(&g, b - 1).unwrap();
            for (lo, hi) in below.iter().zip(&at_b) {
                prop_assert!(lo.is_infinite() || hi.is_finite());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sufficient_bound_caps_credits(seed in any::<u64>()) {
        let shape = GameShape { min_vars: 1, max_vars: 3, max_weight: 2 };
        let game = random_game(&mut rng(seed), &shape);
        let j = random_state_assertion(&mut rng(seed ^ 7), game.vars(), 2);
        for f in [buchi(Formula::Prop(j.clone())), formula::reachability(Formula::Prop(j.clone())), formula::safety()] {
            let b = sufficient_bound(&game, &f).unwrap();
            let report = solve(&SolveRequest::new(game.clone(), f.clone(), Bound::Infinite)).unwrap();
            prop_assert_eq!(report.effective_bound, b.bound);
            for v in report.min_credits.values() {
                prop_assert!(v.get().is_none_or(|x| x <= b.credit_cap), "{} needs {} > {}", f, v, b.credit_cap);
            }
            // Larger bounds neither change who wins nor the credits.
            let arena = game.arena().unwrap();
            for c in [2 * b.bound, 2 * b.bound + b.max_weight] {
                let above = eval_energy(&arena, c, &f, &EnergyValuation::new()).unwrap();
                prop_assert_eq!(above.values(), report.min_credits.values());
            }
        }
    }

    #[test]
    fn bounds_grow_with_the_game(seed in any::<u64>()) {
        let game = small_game(seed);
        let f = random_formula(&mut rng(seed), game.vars(), 3);
        let b = sufficient_bound(&game, &f).unwrap();
        prop_assert!(b.bound >= b.max_weight);
        prop_assert!(b.bound >= b.credit_cap);
        // Wrapping the formula adds length, which never lowers the bound.
        let longer = Formula::and(f.clone(), Formula::Prop(emu_core::Assertion::Const(true)));
        if formula::buchi_target(&f).is_none() {
            prop_assert!(sufficient_bound(&game, &longer).unwrap().bound >= b.bound);
        }
        for c in [0, 1, 3] {
            let arena = game.arena().unwrap();
            let lo = eval_energy(&arena, c, &f, &EnergyValuation::new()).unwrap();
            let hi = eval_energy(&arena, c + 1, &f, &EnergyValuation::new()).unwrap();
            // More headroom never hurts the system.
            if f.fragment() == emu_core::Fragment::Sys {
                for s in 0..lo.len() {
                    prop_assert!(lo.get(s).is_infinite() || hi.get(s).is_finite());
                }
            }
        }
    }
}

/// Player Zero wins from `v` iff some memoryless strategy leaves player One
/// no way to reach a player-Zero deadlock or an odd-minimum cycle.
fn brute_force_parity(g: &ParityGame) -> Vec<bool> {
    let n = g.num_states();
    let zero_states: Vec<usize> = (0..n).filter(|&v| g.owner(v) == Player::Zero).collect();
    let choices: Vec<usize> = zero_states.iter().map(|&v| g.successors(v).len().max(1)).collect();
    let mut wins = vec![false; n];
    let mut pick = vec![0usize; zero_states.len()];
    loop {
        let succ: Vec<Vec<usize>> = (0..n)
            .map(|v| match zero_states.iter().position(|&z| z == v) {
                Some(i) => g.successors(v).get(pick[i]).into_iter().copied().collect(),
                None => g.successors(v).to_vec(),
            })
            .collect();
        let one_wins = one_player_wins(g, &succ);
        for v in 0..n {
            wins[v] |= !one_wins[v];
        }
        // Next strategy in mixed-radix order.
        let mut i = 0;
        loop {
            if i == pick.len() {
                return wins;
            }
            pick[i] += 1;
            if pick[i] < choices[i] {
                break;
            }
            pick[i] = 0;
            i += 1;
        }
    }
}

fn reachable(succ: &[Vec<usize>], from: usize, allowed: impl Fn(usize) -> bool) -> Vec<bool> {
    let mut seen = vec![false; succ.len()];
    let mut stack = vec![from];
    while let Some(v) = stack.pop() {
        for &t in &succ[v] {
            if allowed(t) && !seen[t] {
                seen[t] = true;
                stack.push(t);
            }
        }
    }
    seen
}

/// Where player One wins once player Zero's choices are fixed in `succ`.
fn one_player_wins(g: &ParityGame, succ: &[Vec<usize>]) -> Vec<bool> {
    let n = g.num_states();
    let bad: Vec<bool> = (0..n)
        .map(|u| {
            let zero_stuck = g.owner(u) == Player::Zero && succ[u].is_empty();
            let p = g.priority(u);
            // `u` lies on a cycle whose minimum priority is p (odd).
            let odd_cycle = p % 2 == 1 && reachable(succ, u, |t| g.priority(t) >= p)[u];
            zero_stuck || odd_cycle
        })
        .collect();
    (0..n)
        .map(|v| {
            let r = reachable(succ, v, |_| true);
            bad[v] || (0..n).any(|u| r[u] && bad[u])
        })
        .collect()
}
