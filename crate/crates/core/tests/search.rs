use std::collections::HashSet;

use proptest::prelude::*;
use skyforge_core::measures::LookupEstimator;
use skyforge_core::oracle::{check_div_bound, check_eps_cover, enumerate_all, naive_eps_dominates, DEFAULT_MAX_BITS};
use skyforge_core::search::{
    back_st, dis_score, diversify_level, run, run_apx, run_bi, run_div, Termination,
};
use skyforge_core::skyline::Occupant;
use skyforge_core::synth::{
    budget_fixture, correlated_estimator, product_table, random_table, sandwich_fixture, sandwich_truth,
    small_table, uniform_estimator, unit_measures, SANDWICH_S3, SANDWICH_S4, SANDWICH_S5,
};
use skyforge_core::{Algorithm, Error, SearchConfig, SearchDirection, SearchOutcome, StateBitmap, TestLog};

fn b(s: &str) -> StateBitmap {
    StateBitmap::from_binary(s).unwrap()
}

fn cfg(algorithm: Algorithm, eps: f64) -> SearchConfig {
    SearchConfig {
        algorithm,
        epsilon: eps,
        budget: usize::MAX,
        target: Some("a0".into()),
        ..SearchConfig::default()
    }
}

fn grid_bits(o: &SearchOutcome) -> Vec<String> {
    let mut v: Vec<String> = o.grid.occupants().map(|x| x.bitmap.to_binary()).collect();
    v.sort();
    v
}

/// Everything observable about a run, for equality checks.
fn fingerprint(o: &SearchOutcome) -> String {
    let cells: Vec<String> = o.grid.cells().map(|(p, x)| format!("{:?}:{}:{:?}", p.0, x.bitmap, x.values)).collect();
    let log: Vec<String> = o.log.entries().iter().map(|e| format!("{}:{:?}", e.bitmap, e.values)).collect();
    let edges: Vec<String> = o.graph.edges().iter().map(|t| format!("{}>{}", t.from, t.to)).collect();
    format!(
        "{cells:?}\n{log:?}\n{edges:?}\n{:?}\n{:?}\n{:?}",
        o.stats.submitted, o.stats.termination, o.diversified
    )
}

#[test]
fn budget_one_valuates_only_the_root() {
    let u = small_table(1, &[2, 2], 6);
    let ms = unit_measures(2, 0.05, 1.0);
    let est = uniform_estimator(1, &ms, 0.1, 0.9);
    let c = SearchConfig {
        budget: 1,
        ..cfg(Algorithm::Apx, 0.1)
    };
    let out = run_apx(&u, &ms, &c, &est).unwrap();
    assert_eq!(out.stats.valuations, 1);
    assert_eq!(out.stats.termination, Termination::Budget);
    assert_eq!(grid_bits(&out), vec!["1111"]);
    assert_eq!(out.log.len(), 1);
}

#[test]
fn five_valuations_leave_two_cells() {
    let f = budget_fixture();
    let out = run(&f.table, &f.measures, &f.config, &f.estimator, None).unwrap();
    assert_eq!(out.stats.valuations, 5);
    assert_eq!(out.stats.termination, Termination::Budget);
    assert_eq!(grid_bits(&out), vec!["1011", "1101"]);
    assert_eq!(out.stats.submitted.len(), 5);
    assert!(out.grid.position_of(&b("0111")).is_none());
}

#[test]
fn apx_with_unlimited_budget_visits_every_state() {
    let u = product_table(&[("A", &["x", "y"]), ("B", &["u", "v", "w"])]);
    let ms = unit_measures(2, 0.05, 1.0);
    let est = uniform_estimator(9, &ms, 0.06, 1.0);
    let out = run_apx(&u, &ms, &cfg(Algorithm::Apx, 0.1), &est).unwrap();
    // 2^5 bitmaps minus the empty one.
    assert_eq!(out.stats.valuations, 31);
    assert_eq!(out.stats.termination, Termination::Exhausted);
    let mut log = TestLog::new(2);
    let all = enumerate_all(&u, &ms, &est, &mut log, DEFAULT_MAX_BITS).unwrap();
    assert_eq!(all.states.len(), 31);
    let report = check_eps_cover(&out.grid, &all.states, 0.1);
    assert!(report.passed(), "{:?}", report.eps_cover_violations);
}

#[test]
fn max_length_caps_depth() {
    let u = product_table(&[("A", &["x", "y"]), ("B", &["u", "v", "w"])]);
    let ms = unit_measures(2, 0.05, 1.0);
    let est = uniform_estimator(9, &ms, 0.06, 1.0);
    let c = SearchConfig {
        max_length: 1,
        ..cfg(Algorithm::Apx, 0.1)
    };
    let out = run_apx(&u, &ms, &c, &est).unwrap();
    assert_eq!(out.stats.valuations, 6);
    assert!(out.graph.nodes().all(|s| s.level <= 1));
}

#[test]
fn frontiers_meet() {
    let u = product_table(&[("a0", &["x"]), ("a1", &["y"])]);
    let ms = unit_measures(2, 0.05, 1.0);
    let est = uniform_estimator(2, &ms, 0.1, 0.9);
    let out = run_bi(&u, &ms, &cfg(Algorithm::Bi, 0.1), &est, false).unwrap();
    assert_eq!(out.stats.termination, Termination::Meet);
    assert_eq!(out.stats.meet, Some(b("10")));
    assert_eq!(out.graph.roots(), &[b("11"), b("10")]);

    // With the target covering every literal both starts coincide.
    let one = product_table(&[("a0", &["x", "y"])]);
    let out = run_bi(&one, &ms, &cfg(Algorithm::Bi, 0.1), &est, true).unwrap();
    assert_eq!(out.stats.termination, Termination::Meet);
    assert_eq!(out.stats.valuations, 1);
}

#[test]
fn backward_start_keeps_target_and_required_features() {
    let u = product_table(&[("A", &["x", "y"]), ("T", &["p", "q"]), ("C", &["u", "v"])]);
    assert_eq!(back_st(&u, "T", 0).unwrap(), b("001100"));
    assert_eq!(back_st(&u, "T", 1).unwrap(), b("101100"));
    assert_eq!(back_st(&u, "T", 5).unwrap(), b("101110"));
    assert!(back_st(&u, "Z", 0).is_err());
}

#[test]
fn sandwiched_states_are_pruned() {
    let f = sandwich_fixture();
    let out = run(&f.table, &f.measures, &f.config, &f.estimator, Some(f.prior.clone())).unwrap();
    let pruned: Vec<String> = out.stats.pruned.iter().map(|p| p.bitmap.to_binary()).collect();
    let s4 = out.stats.pruned.iter().find(|p| p.bitmap == b(SANDWICH_S4)).expect("s4 pruned");
    let s5 = out.stats.pruned.iter().find(|p| p.bitmap == b(SANDWICH_S5)).expect("s5 pruned");
    assert_eq!(s5.direction, SearchDirection::Forward);
    assert_eq!(s5.parent, b("01111"));
    assert_eq!(s4.direction, SearchDirection::Backward);
    assert_eq!(s4.parent, b("10001"));
    assert!(s4.pair.1 == b(SANDWICH_S3) && s5.pair.1 == b(SANDWICH_S3));

    // Pruning is sound: every skipped state is ε-dominated by s3.
    let s3 = sandwich_truth(&b(SANDWICH_S3));
    for p in &out.stats.pruned {
        assert!(naive_eps_dominates(&s3, &sandwich_truth(&p.bitmap), 0.3), "{}", p.bitmap.to_binary());
        assert!(!out.log.contains(&p.bitmap));
    }

    // Without pruning the same states get valuated.
    let plain = SearchConfig {
        algorithm: Algorithm::Nobi,
        ..f.config.clone()
    };
    let nobi = run(&f.table, &f.measures, &plain, &f.estimator, Some(f.prior.clone())).unwrap();
    assert!(nobi.stats.pruned.is_empty());
    assert!(nobi.log.contains(&b(SANDWICH_S4)) && nobi.log.contains(&b(SANDWICH_S5)));
    assert!(out.stats.valuations < nobi.stats.valuations, "{pruned:?}");
}

#[test]
fn weak_support_correlation_blocks_pruning() {
    let f = sandwich_fixture();
    let c = SearchConfig {
        theta: 1.0,
        ..f.config.clone()
    };
    let out = run(&f.table, &f.measures, &c, &f.estimator, Some(f.prior)).unwrap();
    assert!(out.stats.pruned.is_empty());
}

#[test]
fn estimator_failure_yields_partial_outcome() {
    let u = product_table(&[("A", &["x", "y"]), ("B", &["u", "v"])]);
    let ms = unit_measures(1, 0.1, 1.0);
    let mut est = LookupEstimator::new(ms.names());
    est.insert(b("1111"), vec![0.5]).unwrap();
    est.insert(b("0111"), vec![0.4]).unwrap();
    let out = run_apx(&u, &ms, &cfg(Algorithm::Apx, 0.1), &est).unwrap();
    assert!(out.is_partial());
    assert_eq!(out.stats.termination, Termination::Failed);
    match &out.failure {
        Some(Error::Estimator { bitmap, .. }) => assert_eq!(*bitmap, b("1011").to_hex()),
        other => panic!("{other:?}"),
    }
    assert_eq!(out.stats.valuations, 2);
    assert_eq!(grid_bits(&out), vec!["0111"]);
}

#[test]
fn configuration_errors() {
    let u = small_table(1, &[2, 2], 6);
    let ms = unit_measures(2, 0.05, 1.0);
    let est = uniform_estimator(1, &ms, 0.1, 0.9);
    let no_target = SearchConfig {
        target: None,
        ..cfg(Algorithm::Bi, 0.1)
    };
    assert!(matches!(run(&u, &ms, &no_target, &est, None), Err(Error::Config(_))));
    assert!(matches!(run(&u, &ms, &cfg(Algorithm::Apx, 0.0), &est, None), Err(Error::Config(_))));
    let other = unit_measures(3, 0.05, 1.0);
    assert!(run(&u, &other, &cfg(Algorithm::Apx, 0.1), &est, None).is_err());
    assert!(run(&u, &ms, &cfg(Algorithm::Apx, 0.1), &est, Some(TestLog::new(3))).is_err());
}

#[test]
fn prior_tests_are_free() {
    let u = small_table(4, &[2, 2], 8);
    let ms = unit_measures(2, 0.05, 1.0);
    let est = uniform_estimator(4, &ms, 0.1, 0.9);
    let first = run_apx(&u, &ms, &cfg(Algorithm::Apx, 0.1), &est).unwrap();
    let again = run(&u, &ms, &cfg(Algorithm::Apx, 0.1), &est, Some(first.log.clone())).unwrap();
    assert_eq!(again.stats.valuations, 0);
    assert_eq!(fingerprint(&first).split('\n').next(), fingerprint(&again).split('\n').next());
}

#[test]
fn div_with_large_k_matches_bi() {
    let u = random_table(11, 4, 3);
    let ms = unit_measures(3, 0.05, 1.0);
    let est = correlated_estimator(11, &ms, u.bit_count(), 0.06, 1.0);
    let bi = run_bi(&u, &ms, &cfg(Algorithm::Bi, 0.2), &est, true).unwrap();
    let c = SearchConfig {
        k: 1000,
        ..cfg(Algorithm::Div, 0.2)
    };
    let div = run_div(&u, &ms, &c, &est).unwrap();
    assert_eq!(bi.stats.submitted, div.stats.submitted);
    assert_eq!(grid_bits(&bi), grid_bits(&div));
    assert_eq!(div.diversified.as_ref().unwrap().len(), div.grid.front().len());
}

#[test]
fn div_final_selection_comes_from_the_grid() {
    let u = random_table(12, 4, 3);
    let ms = unit_measures(3, 0.05, 1.0);
    let est = uniform_estimator(12, &ms, 0.06, 1.0);
    let c = SearchConfig {
        k: 3,
        ..cfg(Algorithm::Div, 0.1)
    };
    let out = run_div(&u, &ms, &c, &est).unwrap();
    let chosen = out.diversified.as_ref().unwrap();
    assert_eq!(chosen.len(), 3.min(out.grid.front().len()));
    assert!(chosen.iter().all(|x| out.grid.position_of(x).is_some()));
}

fn occ(bits: &str, v: &[f64]) -> Occupant {
    Occupant {
        bitmap: b(bits),
        values: v.to_vec(),
    }
}

#[test]
fn dis_examples() {
    let mut log = TestLog::new(2);
    for (bits, v) in [("1100", [0.1, 0.1]), ("0011", [0.9, 0.9]), ("1111", [0.5, 0.5])] {
        log.append(skyforge_core::measures::LogEntry {
            bitmap: b(bits),
            values: v.to_vec(),
            raw: v.to_vec(),
        })
        .unwrap();
    }
    let lo = occ("1100", &[0.1, 0.1]);
    let hi = occ("0011", &[0.9, 0.9]);
    assert!((dis_score(&lo, &hi, 0.0, &log) - 1.0).abs() < 1e-12);
    // Disjoint bitmaps are at cosine distance 1, halved.
    assert!((dis_score(&lo, &hi, 1.0, &log) - 0.5).abs() < 1e-12);
    assert_eq!(dis_score(&lo, &lo, 0.5, &log), 0.0);
}

#[test]
fn diversification_covers_both_clusters() {
    let log = TestLog::new(2);
    let level = vec![
        occ("11110000", &[0.10, 0.10]),
        occ("11100000", &[0.11, 0.10]),
        occ("11010000", &[0.10, 0.11]),
        occ("00001111", &[0.90, 0.90]),
        occ("00000111", &[0.91, 0.90]),
    ];
    let pick = diversify_level(&level, 2, 0.5, &log);
    assert_eq!(pick.len(), 2);
    assert!(pick.iter().any(|&i| i < 3) && pick.iter().any(|&i| i >= 3), "{pick:?}");
}

fn random_level(seed: u64, n: usize) -> (Vec<Occupant>, TestLog) {
    let u = random_table(seed, 4, 3);
    let ms = unit_measures(2, 0.05, 1.0);
    let est = uniform_estimator(seed, &ms, 0.06, 1.0);
    let mut log = TestLog::new(2);
    let all = enumerate_all(&u, &ms, &est, &mut log, DEFAULT_MAX_BITS).unwrap();
    let ground: Vec<Occupant> = all.states.into_iter().take(n).collect();
    (ground, log)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn apx_covers_everything_with_unlimited_budget(seed in 0u64..10_000, eps in prop::sample::select(vec![0.05, 0.2, 0.5])) {
        let u = random_table(seed, 4, 3);
        let ms = unit_measures(3, 0.05, 0.95);
        let est = uniform_estimator(seed, &ms, 0.06, 1.0);
        let out = run_apx(&u, &ms, &cfg(Algorithm::Apx, eps), &est).unwrap();
        let mut log = TestLog::new(3);
        let all = enumerate_all(&u, &ms, &est, &mut log, DEFAULT_MAX_BITS).unwrap();
        prop_assert_eq!(out.stats.valuations, all.states.len());
        let report = check_eps_cover(&out.grid, &all.states, eps);
        prop_assert!(report.passed(), "{:?}", report.eps_cover_violations);
        prop_assert!(out.grid.len() as u128 <= out.grid.capacity_bound());
    }

    #[test]
    fn grid_covers_what_was_valuated(seed in 0u64..10_000, alg in prop::sample::select(vec![Algorithm::Apx, Algorithm::Bi, Algorithm::Nobi, Algorithm::Div]), budget in 1usize..40) {
        let u = random_table(seed, 4, 3);
        let ms = unit_measures(3, 0.05, 0.95);
        let est = if seed % 2 == 0 {
            correlated_estimator(seed, &ms, u.bit_count(), 0.06, 1.0)
        } else {
            uniform_estimator(seed, &ms, 0.06, 1.0)
        };
        let c = SearchConfig { budget, k: 2, ..cfg(alg, 0.2) };
        let out = run(&u, &ms, &c, &est, None).unwrap();
        prop_assert!(out.stats.valuations <= budget);
        let seen: Vec<Occupant> = out.stats.submitted.iter().map(|x| occ(&x.to_binary(), &out.log.get(x).unwrap().values)).collect();
        let report = check_eps_cover(&out.grid, &seen, 0.2);
        prop_assert!(report.passed(), "{:?}", report.eps_cover_violations);
        prop_assert!(out.grid.len() as u128 <= out.grid.capacity_bound());
        // Every non-root node is reachable from a root by one-flip steps.
        for s in out.graph.nodes() {
            let (root, path) = out.graph.path_to(&s.bitmap).unwrap();
            prop_assert!(out.graph.roots().contains(&root));
            prop_assert_eq!(path.len(), s.level);
            for t in &path {
                prop_assert_eq!(t.from.hamming(&t.to), 1);
            }
        }
    }

    #[test]
    fn pruning_is_sound_under_correlation(seed in 0u64..10_000) {
        let u = random_table(seed, 5, 3);
        let ms = unit_measures(3, 0.05, 0.95);
        let est = correlated_estimator(seed, &ms, u.bit_count(), 0.06, 1.0);
        let out = run_bi(&u, &ms, &cfg(Algorithm::Bi, 0.2), &est, true).unwrap();
        let truth = |x: &StateBitmap| {
            let mut log = TestLog::new(3);
            let m = skyforge_core::Materializer::new(&u);
            skyforge_core::measures::valuate(&m, &est, &ms, &mut log, x).unwrap().0
        };
        for p in &out.stats.pruned {
            let v = truth(&p.bitmap);
            let by_pair = [&p.pair.0, &p.pair.1].iter().any(|e| naive_eps_dominates(&out.log.get(e).unwrap().values, &v, 0.2));
            prop_assert!(by_pair, "{} not covered by its pair", p.bitmap);
        }
    }

    #[test]
    fn runs_are_deterministic(seed in 0u64..10_000, alg in prop::sample::select(vec![Algorithm::Apx, Algorithm::Bi, Algorithm::Nobi, Algorithm::Div])) {
        let u = random_table(seed, 4, 3);
        let ms = unit_measures(3, 0.05, 0.95);
        let est = correlated_estimator(seed, &ms, u.bit_count(), 0.06, 1.0);
        let c = SearchConfig { budget: 30, k: 2, ..cfg(alg, 0.2) };
        let a = run(&u, &ms, &c, &est, None).unwrap();
        let b2 = run(&u, &ms, &c, &est, None).unwrap();
        let par = run(&u, &ms, &SearchConfig { workers: 4, ..c.clone() }, &est, None).unwrap();
        prop_assert_eq!(fingerprint(&a), fingerprint(&b2));
        prop_assert_eq!(fingerprint(&a), fingerprint(&par));
    }

    #[test]
    fn dis_is_a_bounded_symmetric_score(seed in 0u64..2000, alpha in 0.0f64..=1.0) {
        let (ground, log) = random_level(seed, 6);
        for x in &ground {
            prop_assert_eq!(dis_score(x, x, alpha, &log), 0.0);
            for y in &ground {
                let d = dis_score(x, y, alpha, &log);
                prop_assert!((0.0..=1.0).contains(&d));
                prop_assert_eq!(d, dis_score(y, x, alpha, &log));
            }
        }
    }

    #[test]
    fn diversification_is_near_optimal(seed in 0u64..2000, k in 2usize..=4, alpha in 0.0f64..=1.0) {
        let (ground, log) = random_level(seed, 12);
        prop_assume!(ground.len() >= k);
        let pick = diversify_level(&ground, k, alpha, &log);
        prop_assert_eq!(pick.len(), k);
        let uniq: HashSet<usize> = pick.iter().copied().collect();
        prop_assert_eq!(uniq.len(), k);
        let chosen: Vec<Occupant> = pick.iter().map(|&i| ground[i].clone()).collect();
        let ratio = check_div_bound(&chosen, &ground, k, alpha, &log).unwrap();
        prop_assert!(ratio >= 0.25, "ratio {}", ratio);
    }
}
