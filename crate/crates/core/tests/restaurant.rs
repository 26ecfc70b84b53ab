use mediation::restaurant::{
    central_plan, generate_instance, pareto_mediate_restaurant, predict_ratings, punish_mediate_restaurant,
    realized_utility, rescale, RatingsTable, RestaurantInstance, MAX_CAPACITY,
};
use mediation::MediatedProfile;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn uniform(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.gen()).collect()
}

fn instance(rng: &mut ChaCha8Rng, agents: usize, caps: Vec<u32>, alpha: f64) -> RestaurantInstance {
    let nr = caps.len();
    RestaurantInstance::new(caps, uniform(rng, agents * nr), uniform(rng, agents * nr), alpha).unwrap()
}

/// Best total weight when each listed agent takes one of its options
/// (`Some(r)` consumes a unit of `r`'s capacity, `None` consumes nothing).
fn best_choice(options: &[Vec<(Option<usize>, f64)>], capacity: &mut Vec<usize>, agent: usize) -> f64 {
    if agent == options.len() {
        return 0.0;
    }
    let mut best = f64::NEG_INFINITY;
    for &(slot, w) in &options[agent] {
        if let Some(r) = slot {
            if capacity[r] == 0 {
                continue;
            }
            capacity[r] -= 1;
        }
        best = best.max(w + best_choice(options, capacity, agent + 1));
        if let Some(r) = slot {
            capacity[r] += 1;
        }
    }
    best
}

#[test]
fn realized_utility_follows_congestion_rule() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..100 {
        let nr = rng.gen_range(1..=5);
        let na = rng.gen_range(1..=12);
        let caps: Vec<u32> = (0..nr).map(|_| rng.gen_range(1..=3)).collect();
        let alpha = rng.gen_range(0.0..3.0);
        let inst = instance(&mut rng, na, caps.clone(), alpha);
        let choices: Vec<usize> = (0..na).map(|_| rng.gen_range(0..nr)).collect();
        let (t, p) = realized_utility(&inst, &choices).unwrap();
        for i in 0..na {
            let r = choices[i];
            let n = choices.iter().filter(|&&c| c == r).count() as f64;
            let share = if n <= caps[r] as f64 { 1.0 } else { caps[r] as f64 / n };
            assert_eq!(p[i], share * inst.predicted(i, r));
            assert_eq!(t[i], share * inst.true_utility(i, r));
        }
    }
}

#[test]
fn pareto_matches_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for trial in 0..200 {
        // Two non-delegators plus five delegators; six free tables.
        let caps = vec![2, 1, 3, 1, 1];
        let inst = instance(&mut rng, 7, caps.clone(), 0.0);
        let actions = vec![
            0,
            2,
            rng.gen_range(0..5),
            rng.gen_range(0..5),
            rng.gen_range(0..5),
            rng.gen_range(0..5),
            0,
        ];
        let delegate = vec![false, false, true, true, true, true, true];
        let sm = MediatedProfile::new(actions.clone(), delegate).unwrap();
        let result = pareto_mediate_restaurant(&inst, &sm).unwrap();

        let mut residual: Vec<usize> = caps.iter().map(|&c| c as usize).collect();
        residual[0] -= 1;
        residual[2] -= 1;
        assert_eq!(residual.iter().sum::<usize>(), 6);
        let delegators = sm.delegators();
        let options: Vec<Vec<(Option<usize>, f64)>> = delegators
            .iter()
            .map(|&i| {
                let b = inst.predicted(i, actions[i]);
                let mut o = vec![(None, b)];
                o.extend(
                    (0..5)
                        .filter(|&r| inst.predicted(i, r) >= b)
                        .map(|r| (Some(r), inst.predicted(i, r))),
                );
                o
            })
            .collect();
        let want = best_choice(&options, &mut residual.clone(), 0);
        let got: f64 = delegators.iter().map(|&i| inst.predicted(i, result.choices[i])).sum();
        assert!((got - want).abs() < 1e-9, "trial {trial}: {got} vs {want}");

        for &i in &delegators {
            assert!(inst.predicted(i, result.choices[i]) >= inst.predicted(i, actions[i]));
        }
        for (r, &free) in residual.iter().enumerate() {
            let moved_in = delegators
                .iter()
                .filter(|&&i| result.choices[i] == r && actions[i] != r)
                .count();
            assert!(moved_in <= free);
        }
        assert_eq!(result.choices[0], 0);
        assert_eq!(result.choices[1], 2);
    }
}

#[test]
fn punish_all_delegating_matches_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    for trial in 0..200 {
        let caps = vec![2, 1, 1, 1];
        let inst = instance(&mut rng, 4, caps.clone(), 1.0);
        let actions: Vec<usize> = (0..4).map(|_| rng.gen_range(0..4)).collect();
        let sm = MediatedProfile::all_delegate(actions.clone());
        let result = punish_mediate_restaurant(&inst, &sm).unwrap();
        let options: Vec<Vec<(Option<usize>, f64)>> = (0..4)
            .map(|i| {
                let mut o = vec![(None, inst.predicted(i, actions[i]))];
                o.extend((0..4).map(|r| (Some(r), inst.predicted(i, r))));
                o
            })
            .collect();
        let mut cap: Vec<usize> = caps.iter().map(|&c| c as usize).collect();
        let want = best_choice(&options, &mut cap, 0);
        let got: f64 = (0..4).map(|i| inst.predicted(i, result.choices[i])).sum();
        assert!((got - want).abs() < 1e-9, "trial {trial}");
    }
}

#[test]
fn central_plan_is_optimal_without_private_utility() {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    for _ in 0..100 {
        let caps: Vec<u32> = (0..4).map(|_| rng.gen_range(1..=2)).collect();
        let inst = instance(&mut rng, 4, caps.clone(), 0.0);
        let plan = central_plan(&inst).unwrap();
        let options: Vec<Vec<(Option<usize>, f64)>> = (0..4)
            .map(|i| (0..4).map(|r| (Some(r), inst.predicted(i, r))).collect())
            .collect();
        let mut cap: Vec<usize> = caps.iter().map(|&c| c as usize).collect();
        let want = best_choice(&options, &mut cap, 0);
        assert!((plan.total_true() - want).abs() < 1e-9);
    }
}

#[test]
fn central_plan_misses_anti_correlated_private_utility() {
    let predicted = vec![0.9, 0.1, 0.1, 0.9];
    let private: Vec<f64> = predicted.iter().map(|p| 1.0 - p).collect();
    let inst = RestaurantInstance::new(vec![1, 1], predicted, private, 2.0).unwrap();
    let plan = central_plan(&inst).unwrap();
    assert_eq!(plan.choices, vec![0, 1]);
    let true_optimum = inst.true_utility(0, 1) + inst.true_utility(1, 0);
    assert!(plan.total_true() < true_optimum);
}

#[test]
fn central_plan_single_agent_single_restaurant() {
    let inst = RestaurantInstance::new(vec![3], vec![0.4], vec![0.2], 1.0).unwrap();
    assert_eq!(central_plan(&inst).unwrap().choices, vec![0]);
}

#[test]
fn generated_capacities_stay_in_range() {
    let mut seen = vec![false; MAX_CAPACITY as usize + 1];
    for seed in 0..100 {
        let inst = generate_instance(1, 100, 0.0, seed, None).unwrap();
        for &c in inst.capacities() {
            assert!((1..=MAX_CAPACITY).contains(&c));
            seen[c as usize] = true;
        }
    }
    assert!(seen[1..].iter().all(|&s| s));
    assert_eq!(
        generate_instance(5, 7, 1.0, 9, None).unwrap(),
        generate_instance(5, 7, 1.0, 9, None).unwrap()
    );
}

#[test]
fn knn_beats_global_mean_on_low_rank_ratings() {
    let mut rng = ChaCha8Rng::seed_from_u64(45);
    let (nu, nr) = (20, 30);
    let users: Vec<[f64; 2]> = (0..nu)
        .map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
        .collect();
    let items: Vec<[f64; 2]> = (0..nr)
        .map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
        .collect();
    let truth = |u: usize, r: usize| 3.0 + 2.0 * (users[u][0] * items[r][0] + users[u][1] * items[r][1]) / 2.0;
    let mut observed = Vec::new();
    let mut masked = Vec::new();
    for u in 0..nu {
        for r in 0..nr {
            if rng.gen_bool(0.3) {
                masked.push((u, r));
            } else {
                observed.push((u, r, truth(u, r)));
            }
        }
    }
    let table = RatingsTable::from_triples(nu, nr, &observed).unwrap();
    let pred = predict_ratings(&table).unwrap();
    let global = rescale(observed.iter().map(|t| t.2).sum::<f64>() / observed.len() as f64);
    let rmse = |f: &dyn Fn(usize, usize) -> f64| {
        (masked
            .iter()
            .map(|&(u, r)| (f(u, r) - rescale(truth(u, r))).powi(2))
            .sum::<f64>()
            / masked.len() as f64)
            .sqrt()
    };
    let knn = rmse(&|u, r| pred.get(u, r));
    let baseline = rmse(&|_, _| global);
    assert!(knn < baseline, "knn {knn} vs global mean {baseline}");
    for &(u, r, v) in &observed {
        assert_eq!(pred.get(u, r), rescale(v));
    }
}

#[test]
fn ratings_file_round_trip_through_loader() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ratings.csv");
    let mut text = String::from("user_id,restaurant_id,rating\n");
    for u in ["ann", "bob", "cy"] {
        for r in 0..5 {
            text.push_str(&format!("{u},r{r},{}\n", 1 + (r % 5)));
        }
    }
    text.push_str("dee,r0,4\n");
    std::fs::write(&path, text).unwrap();
    let table = RatingsTable::load_csv(&path).unwrap();
    assert_eq!(table.num_users(), 3);
    assert_eq!(table.num_restaurants(), 5);
}
