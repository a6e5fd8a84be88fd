use poa_core::game::EQUILIBRIUM_TOL;
use poa_core::{Allocation, BasisPair, GameInstance, InstancePoa};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_game(seed: u64, delta: f64) -> GameInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=3);
    let m = rng.gen_range(1..=4);
    let true_values: Vec<f64> = (0..m).map(|_| rng.gen_range(0.5..8.0)).collect();
    let actions = (0..n)
        .map(|_| {
            (0..rng.gen_range(1..=3))
                .map(|_| (0..m).filter(|_| rng.gen_bool(0.5)).collect())
                .collect()
        })
        .collect();
    let valuations = (0..n)
        .map(|_| {
            true_values
                .iter()
                .map(|t| t * (1.0 + rng.gen_range(-delta..=delta)))
                .collect()
        })
        .collect();
    let mut w = vec![0.0, 1.0];
    let mut u = vec![0.0, 1.0];
    for _ in 2..=n {
        w.push(w[w.len() - 1] + rng.gen_range(0.0..1.0));
        u.push(rng.gen_range(0.0..1.5));
    }
    GameInstance::new(true_values, actions, valuations, BasisPair::new(w, u).unwrap()).unwrap()
}

fn all_allocations(game: &GameInstance) -> Vec<Allocation> {
    let mut out = vec![Allocation::new(Vec::new())];
    for set in game.action_sets() {
        out = out
            .into_iter()
            .flat_map(|a| {
                (0..set.len()).map(move |c| {
                    let mut v = a.0.clone();
                    v.push(c);
                    Allocation::new(v)
                })
            })
            .collect();
    }
    out
}

/// Equilibrium test that recomputes the full utility of every deviation.
fn is_equilibrium_naive(game: &GameInstance, a: &Allocation) -> bool {
    (0..game.num_players()).all(|i| {
        let now = game.utility(i, a);
        (0..game.action_sets()[i].len()).all(|c| game.utility(i, &a.with_choice(i, c)) <= now + EQUILIBRIUM_TOL)
    })
}

fn scaled(game: &GameInstance, values: f64, valuations: f64) -> GameInstance {
    GameInstance::new(
        game.true_values().iter().map(|v| v * values).collect(),
        game.action_sets().to_vec(),
        game.valuations()
            .iter()
            .map(|row| row.iter().map(|v| v * valuations).collect())
            .collect(),
        game.basis().clone(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn welfare_ignores_valuations(seed in any::<u64>(), other in any::<u64>()) {
        let game = random_game(seed, 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(other);
        let valuations = game
            .valuations()
            .iter()
            .map(|row| row.iter().map(|_| rng.gen_range(0.1..10.0)).collect())
            .collect();
        let changed = GameInstance::new(
            game.true_values().to_vec(),
            game.action_sets().to_vec(),
            valuations,
            game.basis().clone(),
        )
        .unwrap();
        for a in all_allocations(&game) {
            prop_assert_eq!(game.welfare(&a), changed.welfare(&a));
        }
    }

    #[test]
    fn utility_ignores_true_values(seed in any::<u64>(), other in any::<u64>()) {
        let game = random_game(seed, 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(other);
        let changed = GameInstance::new(
            game.true_values().iter().map(|_| rng.gen_range(0.1..10.0)).collect(),
            game.action_sets().to_vec(),
            game.valuations().to_vec(),
            game.basis().clone(),
        )
        .unwrap();
        for a in all_allocations(&game) {
            for i in 0..game.num_players() {
                prop_assert_eq!(game.utility(i, &a), changed.utility(i, &a));
            }
        }
    }

    #[test]
    fn equilibria_invariant_under_scaling(seed in any::<u64>(), e1 in -4i32..5, e2 in -4i32..5) {
        let game = random_game(seed, 0.4);
        let other = scaled(&game, 2f64.powi(e1), 2f64.powi(e2));
        prop_assert_eq!(game.enumerate_equilibria().unwrap(), other.enumerate_equilibria().unwrap());
    }

    #[test]
    fn equilibrium_test_matches_naive_check(seed in any::<u64>()) {
        let game = random_game(seed, 0.3);
        for a in all_allocations(&game) {
            prop_assert_eq!(game.is_equilibrium(&a), is_equilibrium_naive(&game, &a));
        }
    }

    #[test]
    fn best_response_is_a_maximizer(seed in any::<u64>()) {
        let game = random_game(seed, 0.3);
        for a in all_allocations(&game) {
            for i in 0..game.num_players() {
                let (c, value) = game.best_response(i, &a);
                let moved = a.with_choice(i, c);
                prop_assert!((game.utility(i, &moved) - value).abs() < 1e-9);
                for k in 0..game.action_sets()[i].len() {
                    prop_assert!(game.utility(i, &a.with_choice(i, k)) <= value + EQUILIBRIUM_TOL);
                }
            }
        }
    }

    #[test]
    fn instance_poa_matches_enumeration(seed in any::<u64>()) {
        let game = random_game(seed, 0.3);
        let allocs = all_allocations(&game);
        let best = allocs.iter().map(|a| game.welfare(a)).fold(0.0, f64::max);
        let worst_eq = allocs
            .iter()
            .filter(|a| is_equilibrium_naive(&game, a))
            .map(|a| game.welfare(a))
            .fold(None, |acc: Option<f64>, w| Some(acc.map_or(w, |b| b.min(w))));
        let expected = match worst_eq {
            None => InstancePoa::NoEquilibrium,
            Some(_) if best <= 0.0 => InstancePoa::Ratio(1.0),
            Some(w) => InstancePoa::Ratio(w / best),
        };
        prop_assert_eq!(game.price_of_anarchy().unwrap(), expected);
    }

    #[test]
    fn json_round_trip(seed in any::<u64>()) {
        let game = random_game(seed, 0.3);
        let text = game.to_json().unwrap();
        let back = GameInstance::from_json(&text).unwrap();
        prop_assert_eq!(back.to_json().unwrap(), text);
    }
}

#[test]
fn uncertainty_reports_largest_relative_deviation() {
    let basis = BasisPair::set_covering(vec![0.0, 1.0, 0.5]).unwrap();
    let game = GameInstance::new(
        vec![2.0, 4.0],
        vec![vec![vec![0], vec![1]], vec![vec![0, 1]]],
        vec![vec![2.5, 4.0], vec![2.0, 3.0]],
        basis,
    )
    .unwrap();
    assert!((game.uncertainty() - 0.25).abs() < 1e-15);
}
