mod common;

use std::collections::BTreeSet;
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use weakrank::analysis::{p_sweep, tcu_sweep};
use weakrank::instances::{eight_items, random_matrix, random_profile_matrix};
use weakrank::solver::{brute_force_solve_capped, TraceEvent};
use weakrank::{
    brute_force_solve, distance, enumerate_optima, solve, utopian, BucketOrder, Error, FairVariant, FairnessSpec,
    PairOrderMatrix, Rational, SolveConfig, Status, Strategy, VariantSpec,
};

fn forced(strategy: Strategy) -> SolveConfig {
    SolveConfig { optima_cap: usize::MAX, ..SolveConfig::sequential().with_strategy(strategy) }
}

fn random_instance(rng: &mut ChaCha8Rng, n: usize) -> PairOrderMatrix {
    if rng.gen_bool(0.5) {
        let denom = rng.gen_range(2..=12);
        random_matrix(rng, n, denom)
    } else {
        let voters = rng.gen_range(1..=9);
        random_profile_matrix(rng, n, voters)
    }
}

#[test]
fn searches_agree_with_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for instance in 0..200 {
        let n = rng.gen_range(3..=7);
        let c = random_instance(&mut rng, n);
        for v in common::variants(&mut rng, n) {
            let oracle = brute_force_solve(&c, &v).unwrap();
            for s in [Strategy::Pairs, Strategy::Buckets] {
                let r = solve(&c, &v, &forced(s)).unwrap();
                assert_eq!(r.status, oracle.status, "#{instance} {s:?} {v:?}");
                assert_eq!(r.objective, oracle.objective, "#{instance} {s:?} {v:?}");
                assert_eq!(r.optima, oracle.optima, "#{instance} {s:?} {v:?}");
                assert!(r.optima_complete);
                if r.status == Status::Optimal {
                    assert_eq!(r.bound, r.objective);
                    assert!(r.optima.iter().all(|o| v.admits(o)));
                } else {
                    assert_eq!(r.status, Status::Infeasible);
                    assert!(matches!(v, VariantSpec::Fair(_) | VariantSpec::Tcu { .. }), "{v:?}");
                }
            }
        }
    }
}

#[test]
fn parallel_workers_find_the_same_optima() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..20 {
        let n = rng.gen_range(6..=9);
        let c = random_instance(&mut rng, n);
        for v in common::variants(&mut rng, n) {
            for s in [Strategy::Pairs, Strategy::Buckets] {
                let one = solve(&c, &v, &forced(s)).unwrap();
                let three = solve(&c, &v, &SolveConfig { workers: 3, ..forced(s) }).unwrap();
                assert_eq!(one.objective, three.objective, "{s:?} {v:?}");
                assert_eq!(one.optima, three.optima, "{s:?} {v:?}");
            }
        }
    }
}

#[test]
fn default_strategy_by_size_and_variant() {
    let small = random_matrix(&mut ChaCha8Rng::seed_from_u64(1), 5, 10);
    assert_eq!(solve(&small, &VariantSpec::Obop, &SolveConfig::default()).unwrap().strategy, Strategy::Exhaustive);
    let c = eight_items();
    assert_eq!(solve(&c, &VariantSpec::Obop, &SolveConfig::default()).unwrap().strategy, Strategy::Pairs);
    let r = solve(&c, &VariantSpec::FixedBuckets { p: 3 }, &SolveConfig::default()).unwrap();
    assert_eq!(r.strategy, Strategy::Buckets);
}

#[test]
fn utopian_bound_is_tight_exactly_when_transitive() {
    // Tenths never hit 1/4 or 3/4, where two relations cost the same.
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut tight = 0;
    for _ in 0..300 {
        let n = rng.gen_range(2..=7);
        let c = random_matrix(&mut rng, n, 10);
        let u = utopian(&c);
        let r = solve(&c, &VariantSpec::Obop, &SolveConfig::sequential()).unwrap();
        let obj = r.objective.unwrap();
        assert!(obj >= u.bound);
        assert_eq!(obj == u.bound, u.is_transitive(), "{c:?}");
        tight += usize::from(u.is_transitive());
    }
    assert!(tight > 10, "too few transitive cases: {tight}");
}

#[test]
fn tcu_minimum_at_full_head_and_tail_matching_head() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..40 {
        let n = rng.gen_range(2..=7);
        let c = random_instance(&mut rng, n);
        let free = solve(&c, &VariantSpec::Obop, &SolveConfig::sequential()).unwrap().objective.unwrap();
        let s = tcu_sweep(&c, 1..=n, &SolveConfig::sequential()).unwrap();
        assert_eq!(s.value(n), Some(&free));
        assert!(s.points.iter().all(|p| p.objective.as_ref().unwrap() >= &free));
        assert!(s.minima.contains(&n));
        for k in s.tail_matching.iter().filter(|&&k| k > 0) {
            assert!(s.minima.contains(k), "k = {k}, minima {:?}", s.minima);
        }
    }
}

#[test]
fn p_sweep_matches_free_optimum_at_its_bucket_counts() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..40 {
        let n = rng.gen_range(2..=7);
        let c = random_instance(&mut rng, n);
        let free = solve(&c, &VariantSpec::Obop, &SolveConfig { optima_cap: usize::MAX, ..SolveConfig::sequential() })
            .unwrap();
        let s = p_sweep(&c, 1..=n, &SolveConfig::sequential()).unwrap();
        let counts: BTreeSet<usize> = free.bucket_counts.iter().copied().collect();
        for p in &s.points {
            let v = p.objective.as_ref().unwrap();
            if counts.contains(&p.param) {
                assert_eq!(Some(v), free.objective.as_ref());
            } else {
                assert!(v >= free.objective.as_ref().unwrap());
            }
        }
        assert_eq!(s.minima.iter().copied().collect::<BTreeSet<_>>(), counts);
    }
}

#[test]
fn single_bucket_value_is_distance_to_indifference() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let n = rng.gen_range(1..=9);
        let c = random_instance(&mut rng, n);
        let r = solve(&c, &VariantSpec::FixedBuckets { p: 1 }, &SolveConfig::sequential()).unwrap();
        let mut want = Rational::zero();
        for i in 0..n {
            for j in 0..n {
                want += (c.get(i, j) - &Rational::half()).abs();
            }
        }
        assert_eq!(r.objective.unwrap(), want);
        assert_eq!(r.optima, [BucketOrder::single_bucket(n)]);
    }
}

#[test]
fn traced_bounds_stay_below_the_optimum_on_the_way_down() {
    let c = random_matrix(&mut ChaCha8Rng::seed_from_u64(40), 9, 10);
    for s in [Strategy::Pairs, Strategy::Buckets] {
        let cfg = SolveConfig { trace: true, ..forced(s) };
        let r = solve(&c, &VariantSpec::Obop, &cfg).unwrap();
        let opt = r.objective.clone().unwrap();
        let TraceEvent::Incumbent { .. } = &r.trace[0] else { panic!("trace starts with the seeded incumbent") };
        let TraceEvent::Node { depth: 0, bound } = &r.trace[1] else { panic!("search starts at the root") };
        assert!(*bound <= opt);
        assert!(*bound >= utopian(&c).bound);
        let incumbents: Vec<&Rational> = r
            .trace
            .iter()
            .filter_map(|e| match e {
                TraceEvent::Incumbent { value } => Some(value),
                _ => None,
            })
            .collect();
        assert!(incumbents.windows(2).all(|w| w[1] < w[0]), "incumbents strictly improve");
        assert_eq!(incumbents.last(), Some(&&opt));
        // Every pruned subtree was cut against some incumbent it could not beat.
        for e in &r.trace {
            if let TraceEvent::Prune { bound, .. } = e {
                assert!(*bound >= opt);
            }
        }
        let json = serde_json::to_string(&r.trace[1]).unwrap();
        assert!(json.starts_with(r#"{"event":"node""#), "{json}");
    }
}

#[test]
fn node_limit_returns_incumbent_and_bound() {
    let c = random_profile_matrix(&mut ChaCha8Rng::seed_from_u64(8), 100, 15);
    for (s, v) in [(Strategy::Pairs, VariantSpec::Obop), (Strategy::Buckets, VariantSpec::FixedBuckets { p: 6 })] {
        let cfg = SolveConfig { node_limit: Some(5_000), ..SolveConfig::sequential().with_strategy(s) };
        let r = solve(&c, &v, &cfg).unwrap();
        assert_eq!(r.status, Status::Limit, "{s:?}");
        let obj = r.objective.clone().expect("incumbent");
        let bound = r.bound.clone().unwrap();
        assert!(bound <= obj);
        assert!(bound >= utopian(&c).bound);
        assert_eq!(distance(&r.optima[0], &c).unwrap(), obj);
        assert!(v.admits(&r.optima[0]));
        assert!(!r.optima_complete);
        assert!(r.gap_percent().unwrap() >= 0.0);
        assert!(matches!(enumerate_optima(&c, &v, &cfg), Err(Error::Incompatible(_))));
    }
}

#[test]
fn time_limit_stops_the_search() {
    let c = random_profile_matrix(&mut ChaCha8Rng::seed_from_u64(9), 100, 25);
    let cfg = SolveConfig { time_limit: Some(Duration::from_millis(300)), ..SolveConfig::sequential() };
    let r = solve(&c, &VariantSpec::Obop, &cfg).unwrap();
    assert_eq!(r.status, Status::Limit);
    assert!(r.elapsed < 5.0);
    assert!(r.bound.unwrap() <= r.objective.unwrap());
}

#[test]
fn warm_start_keeps_the_result() {
    let c = eight_items();
    let best: BucketOrder = "1 3 | 2 4 7 | 8 | 5 6".parse().unwrap();
    for s in [Strategy::Pairs, Strategy::Buckets] {
        let cold = solve(&c, &VariantSpec::Obop, &forced(s)).unwrap();
        let warm = solve(&c, &VariantSpec::Obop, &SolveConfig { warm_start: vec![best.clone()], ..forced(s) }).unwrap();
        assert_eq!(cold.optima, warm.optima);
        assert!(warm.nodes <= cold.nodes);
        // Not a 2-bucket order: ignored.
        let v = VariantSpec::FixedBuckets { p: 2 };
        let r = solve(&c, &v, &SolveConfig { warm_start: vec![best.clone()], ..forced(s) }).unwrap();
        assert_eq!(r.objective.unwrap().to_fixed(2), "12.14");
    }
    let wrong = BucketOrder::single_bucket(3);
    let err = solve(&c, &VariantSpec::Obop, &SolveConfig { warm_start: vec![wrong], ..SolveConfig::sequential() });
    assert!(matches!(err, Err(Error::Dimension { .. })));
}

#[test]
fn contradictory_fairness_is_infeasible() {
    let mut spec = FairnessSpec::unconstrained(vec![vec![0, 1], vec![2, 3]]);
    spec.lambda = vec![weakrank::variant::Proportion::Uniform(Rational::one())];
    let v = VariantSpec::Fair(FairVariant::new(spec));
    let c = random_matrix(&mut ChaCha8Rng::seed_from_u64(5), 4, 10);
    for s in [Strategy::Pairs, Strategy::Buckets, Strategy::Exhaustive] {
        let r = solve(&c, &v, &forced(s)).unwrap();
        assert_eq!(r.status, Status::Infeasible, "{s:?}");
        assert!(r.objective.is_none() && r.optima.is_empty());
    }
    assert!(enumerate_optima(&c, &v, &SolveConfig::sequential()).unwrap().is_empty());
}

#[test]
fn optima_cap_truncates_and_flags() {
    // c_rs = 3/4 above the diagonal: every order splitting 1..n into
    // consecutive runs is optimal, 2^(n-1) of them.
    let c = PairOrderMatrix::from_upper(6, |_, _| Rational::new(3, 4)).unwrap();
    for s in [Strategy::Pairs, Strategy::Buckets, Strategy::Exhaustive] {
        let all = solve(&c, &VariantSpec::Obop, &forced(s)).unwrap();
        assert_eq!(all.optima.len(), 32, "{s:?}");
        assert!(all.optima_complete);
        assert_eq!(all.optima_label(), ">3");
        let capped = solve(&c, &VariantSpec::Obop, &SolveConfig { optima_cap: 5, ..forced(s) }).unwrap();
        assert_eq!(capped.status, Status::Optimal);
        assert_eq!(capped.objective, all.objective);
        assert_eq!(capped.optima.len(), 5, "{s:?}");
        assert!(!capped.optima_complete, "{s:?}");
        assert!(capped.optima.iter().all(|o| all.optima.contains(o)));
    }
}

#[test]
fn enumeration_refuses_large_instances() {
    let c = PairOrderMatrix::indifferent(9);
    assert!(matches!(brute_force_solve(&c, &VariantSpec::Obop), Err(Error::CapExceeded { .. })));
    let c11 = PairOrderMatrix::indifferent(11);
    assert!(matches!(brute_force_solve_capped(&c11, &VariantSpec::Obop, 11), Err(Error::CapExceeded { .. })));
    let four = random_matrix(&mut ChaCha8Rng::seed_from_u64(2), 4, 6);
    let r = brute_force_solve(&four, &VariantSpec::Obop).unwrap();
    assert_eq!(r.nodes, 75);
}

#[test]
fn invalid_parameters_are_errors() {
    let c = eight_items();
    let v = VariantSpec::EqualSizes { p: 4, q: 3 };
    assert!(matches!(solve(&c, &v, &SolveConfig::default()), Err(Error::InvalidVariant(_))));
    assert!(matches!(brute_force_solve(&c, &v), Err(Error::InvalidVariant(_))));
    let bad = SolveConfig { optima_cap: 0, ..SolveConfig::default() };
    assert!(solve(&c, &VariantSpec::Obop, &bad).is_err());
}
