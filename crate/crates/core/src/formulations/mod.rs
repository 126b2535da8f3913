//! Integer programming formulations, their exact checker and LP export.

mod build;
mod fairness;
mod lp;
mod model;
mod solution;

pub use build::{
    alpha_name, beta_name, build_base_model, build_fair_model, build_obop_model, build_p_assignment_model,
    build_p_representative_model, build_tcu_model, build_variant_model, d_name, x_name, y_name, z_name,
    AssignmentOptions, BaseOptions, ObjectiveSpec, RepresentativeOptions, SizeMode, TieInequality,
};
pub use fairness::{validate_fairness_params, DiagnosticKind, FairnessDiagnostic};
pub use lp::{export_lp, parse_lp};
pub use model::{Constraint, IlpModel, ModelKind, ModelMeta, Objective, Sense, VarKind, Variable};
pub use solution::{
    add_exclusion_cut, binary_points, check_solution, encode_solution, fill_deviations, fix_consistent_permutation,
    order_feasible, Assignment, CheckReport,
};

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::instances::{eight_items, random_matrix};
    use crate::matrix::{distance, PairOrderMatrix};
    use crate::order::{enumerate_weak_orders, BucketOrder};
    use crate::rational::Rational;
    use crate::variant::{FairVariant, FairnessSpec};

    fn ord(s: &str) -> BucketOrder {
        s.parse().unwrap()
    }

    fn count(model: &IlpModel, prefix: &str) -> usize {
        model.constraints.iter().filter(|c| c.name.starts_with(prefix)).count()
    }

    fn vars(model: &IlpModel, prefix: &str) -> usize {
        model.variables.iter().filter(|v| v.name.starts_with(prefix)).count()
    }

    fn val(a: &Assignment, name: &str) -> i64 {
        let v = &a[name];
        assert!(v.is_integer());
        if v.is_zero() {
            0
        } else {
            1
        }
    }

    #[test]
    fn base_model_sizes() {
        let m = build_obop_model(&PairOrderMatrix::indifferent(3)).unwrap();
        assert_eq!(vars(&m, "x_"), 6);
        assert_eq!(count(&m, "comp_"), 3);
        assert_eq!(count(&m, "trans_"), 6);
        assert_eq!(vars(&m, "d_"), 3);
        assert_eq!(count(&m, "lin"), 6);
        let m = build_obop_model(&eight_items()).unwrap();
        assert_eq!(vars(&m, "x_"), 56);
        assert_eq!(count(&m, "comp_"), 28);
        assert_eq!(count(&m, "trans_"), 336);
    }

    #[test]
    fn no_ties_two_items_has_two_points() {
        let c = PairOrderMatrix::indifferent(2);
        let m = build_base_model(2, &ObjectiveSpec::Obop(c), BaseOptions { no_ties: true }).unwrap();
        let feasible = binary_points(&m)
            .unwrap()
            .into_iter()
            .filter(|a| {
                let mut a = a.clone();
                fill_deviations(&m, &mut a);
                check_solution(&m, &a).unwrap().feasible
            })
            .count();
        assert_eq!(feasible, 2);
    }

    #[test]
    fn encode_base_model() {
        let m = build_obop_model(&PairOrderMatrix::indifferent(3)).unwrap();
        let a = encode_solution(&ord("1 3 | 2"), &m).unwrap();
        assert_eq!(val(&a, "x_1_3"), 1);
        assert_eq!(val(&a, "x_3_1"), 1);
        assert_eq!(val(&a, "x_1_2"), 1);
        assert_eq!(val(&a, "x_2_1"), 0);
        assert_eq!(val(&a, "x_3_2"), 1);
        assert_eq!(val(&a, "x_2_3"), 0);
    }

    #[test]
    fn encode_assignment_model() {
        let c = PairOrderMatrix::indifferent(3);
        let m = build_p_assignment_model(&c, 2, &AssignmentOptions::strengthened(SizeMode::NonEmpty)).unwrap();
        let a = encode_solution(&ord("1 3 | 2"), &m).unwrap();
        for (name, want) in [("y_1_1", 1), ("y_3_1", 1), ("y_2_2", 1), ("y_1_2", 0), ("y_2_1", 0), ("y_3_2", 0)] {
            assert_eq!(val(&a, name), want, "{name}");
        }
        assert!(check_solution(&m, &a).unwrap().feasible);
        let err = encode_solution(&ord("1 | 2 | 3"), &m).unwrap_err();
        assert!(matches!(err, crate::Error::Incompatible(_)));
    }

    #[test]
    fn encode_representative_model() {
        let c = PairOrderMatrix::indifferent(3);
        let m = build_p_representative_model(&c, 2, &RepresentativeOptions::default()).unwrap();
        let a = encode_solution(&ord("1 3 | 2"), &m).unwrap();
        assert_eq!(val(&a, "a_3"), 1);
        assert_eq!(val(&a, "a_2"), 1);
        assert_eq!(val(&a, "a_1"), 0);
        assert_eq!(val(&a, "b_1_3"), 1);
        assert_eq!(val(&a, "b_1_2"), 0);
        assert!(check_solution(&m, &a).unwrap().feasible);
        assert!(encode_solution(&ord("1 | 2 | 3"), &m).is_err());
    }

    #[test]
    fn optimum_checks_at_its_distance() {
        let c = eight_items();
        let m = build_obop_model(&c).unwrap();
        let a = encode_solution(&ord("1 3 | 2 4 7 | 8 | 5 6"), &m).unwrap();
        let report = check_solution(&m, &a).unwrap();
        assert!(report.feasible);
        assert_eq!(report.objective.to_fixed(2), "10.78");
    }

    #[test]
    fn intransitive_assignment_names_row() {
        let m = build_obop_model(&PairOrderMatrix::indifferent(3)).unwrap();
        let mut a = Assignment::new();
        for (name, v) in [("x_1_2", 1), ("x_2_1", 0), ("x_2_3", 1), ("x_3_2", 0), ("x_1_3", 0), ("x_3_1", 1)] {
            a.insert(name.to_string(), Rational::from_integer(v));
        }
        fill_deviations(&m, &mut a);
        let report = check_solution(&m, &a).unwrap();
        assert!(!report.feasible);
        assert!(report.violated.contains(&"trans_1_2_3".to_string()));
    }

    #[test]
    fn missing_variable_is_an_error() {
        let m = build_obop_model(&PairOrderMatrix::indifferent(2)).unwrap();
        assert!(matches!(check_solution(&m, &Assignment::new()), Err(crate::Error::MissingVariable(_))));
    }

    #[test]
    fn unfair_order_names_fairness_row() {
        let groups = vec![vec![0, 2, 3, 7], vec![1, 4, 5, 6]];
        let fair = FairVariant::new(FairnessSpec::proportional(groups));
        let m = build_fair_model(&eight_items(), &fair).unwrap();
        let a = encode_solution(&ord("1 3 | 2 4 7 | 8 | 5 6"), &m).unwrap();
        let report = check_solution(&m, &a).unwrap();
        assert!(!report.feasible);
        assert!(report.violated.iter().any(|r| r.starts_with("fairlo_") || r.starts_with("fairhi_")));
        let a = encode_solution(&ord("3 | 1 2 4 7 | 5 8 | 6"), &m).unwrap();
        let report = check_solution(&m, &a).unwrap();
        assert!(report.feasible, "{:?}", report.violated);
        assert_eq!(report.objective.to_fixed(2), "11.86");
    }

    #[test]
    fn six_item_fairness_example() {
        let mut spec = FairnessSpec::unconstrained(vec![vec![0, 1, 2], vec![3, 4, 5]]);
        let half = Rational::new(1, 2);
        let per = crate::variant::Proportion::PerPrefix(vec![half.clone(), half]);
        spec.lambda = vec![per.clone(), per.clone()];
        spec.mu = vec![per.clone(), per];
        let m = build_fair_model(&PairOrderMatrix::indifferent(6), &FairVariant::new(spec)).unwrap();
        assert!(order_feasible(&m, &ord("1 4 | 2 | 3 5 6")).unwrap().is_some());
        assert!(order_feasible(&m, &ord("1 2 3 | 4 5 6")).unwrap().is_none());
    }

    #[test]
    fn cut_removes_only_the_cut_order() {
        let c = random_matrix(&mut ChaCha8Rng::seed_from_u64(3), 4, 10);
        let m = build_obop_model(&c).unwrap();
        let target = ord("2 | 1 4 | 3");
        let cut = add_exclusion_cut(&m, &encode_solution(&target, &m).unwrap()).unwrap();
        assert!(cut.constraint("cut_1").is_some());
        for b in enumerate_weak_orders(4).unwrap() {
            let ok = order_feasible(&cut, &b).unwrap().is_some();
            assert_eq!(ok, b != target, "{b}");
        }
    }

    #[test]
    fn cut_on_two_item_linear_model() {
        let c = PairOrderMatrix::indifferent(2);
        let m = build_base_model(2, &ObjectiveSpec::Obop(c), BaseOptions { no_ties: true }).unwrap();
        let cut = add_exclusion_cut(&m, &encode_solution(&ord("1 | 2"), &m).unwrap()).unwrap();
        let feasible: Vec<_> = binary_points(&cut)
            .unwrap()
            .into_iter()
            .filter_map(|mut a| {
                fill_deviations(&cut, &mut a);
                check_solution(&cut, &a).unwrap().feasible.then_some(a)
            })
            .collect();
        assert_eq!(feasible.len(), 1);
        assert_eq!(val(&feasible[0], "x_2_1"), 1);
    }

    fn fixed_points(order: &str, n: usize) -> usize {
        let m = build_obop_model(&PairOrderMatrix::indifferent(n)).unwrap();
        let fixed = fix_consistent_permutation(&m, &ord(order)).unwrap();
        binary_points(&fixed)
            .unwrap()
            .into_iter()
            .filter(|a| {
                let mut a = a.clone();
                fill_deviations(&fixed, &mut a);
                check_solution(&fixed, &a).unwrap().feasible
            })
            .count()
    }

    #[test]
    fn fixing_to_consistent_permutations() {
        assert_eq!(fixed_points("1 3 | 2", 3), 2);
        assert_eq!(fixed_points("2 | 3 | 1", 3), 1);
        assert_eq!(fixed_points("1 2 3", 3), 6);
    }

    #[test]
    fn lp_export_shape() {
        let c = PairOrderMatrix::indifferent(2);
        let m = build_base_model(2, &ObjectiveSpec::Obop(c.clone()), BaseOptions::default()).unwrap();
        let text = export_lp(&m);
        let bins = text.split("Binaries\n").nth(1).unwrap().lines().next().unwrap();
        assert_eq!(bins.split_whitespace().count(), 2);
        assert_eq!(text.lines().filter(|l| l.trim_start().starts_with("comp_")).count(), 1);
        for section in ["Minimize", "Subject To", "Bounds", "Binaries", "End"] {
            assert!(text.lines().any(|l| l == section), "{section}");
        }

        let c = eight_items();
        let m = build_p_assignment_model(&c, 3, &AssignmentOptions::strengthened(SizeMode::NonEmpty)).unwrap();
        let text = export_lp(&m);
        let ys = text.split("Binaries\n").nth(1).unwrap().split_whitespace().filter(|t| t.starts_with("y_")).count();
        assert_eq!(ys, 8 * 3);
    }

    #[test]
    fn lp_round_trip_verdicts() {
        let c = eight_items();
        let m = build_obop_model(&c).unwrap();
        let parsed = parse_lp(&export_lp(&m)).unwrap();
        assert_eq!(parsed.variables.len(), m.variables.len());
        assert_eq!(parsed.constraints.len(), m.constraints.len());
        let mut seen = 0;
        for order in enumerate_weak_orders(8).unwrap().step_by(27_291).take(20) {
            let a = encode_solution(&order, &m).unwrap();
            let mine = check_solution(&m, &a).unwrap();
            let theirs = check_solution(&parsed, &a).unwrap();
            assert_eq!(mine.feasible, theirs.feasible);
            assert_eq!(mine.objective, theirs.objective);
            assert_eq!(mine.objective, distance(&order, &c).unwrap());
            seen += 1;
        }
        assert_eq!(seen, 20);
        // A broken assignment stays broken after the round trip.
        let mut a = encode_solution(&ord("1 3 | 2 4 7 | 8 | 5 6"), &m).unwrap();
        a.insert("x_1_2".into(), Rational::zero());
        a.insert("x_2_1".into(), Rational::zero());
        assert_eq!(check_solution(&m, &a).unwrap().violated, check_solution(&parsed, &a).unwrap().violated);
    }

    #[test]
    fn lp_objective_scale_for_thirds() {
        let c = PairOrderMatrix::from_upper(3, |_, _| Rational::new(1, 3)).unwrap();
        let m = build_obop_model(&c).unwrap();
        let text = export_lp(&m);
        let parsed = parse_lp(&text).unwrap();
        let a = encode_solution(&ord("1 | 2 3"), &m).unwrap();
        assert_eq!(check_solution(&parsed, &a).unwrap().objective, distance(&ord("1 | 2 3"), &c).unwrap());
    }

    #[test]
    fn lp_rejects_garbage() {
        assert!(parse_lp("Minimize\n obj: x\nSubject To\n r: x ?? 1\nEnd\n").is_err());
        assert!(parse_lp("Minimize\n obj: x\n").is_err());
    }

    /// Without comparability rows the tie rows of the item's own bucket still
    /// force x_rs + x_sr ≥ 1, so an unordered pair is rejected.
    #[test]
    fn bare_assignment_model_still_forces_comparability() {
        let c = PairOrderMatrix::from_upper(2, |_, _| Rational::one()).unwrap();
        let opts = AssignmentOptions { sizes: SizeMode::NonEmpty, ..AssignmentOptions::default() };
        let m = build_p_assignment_model(&c, 2, &opts).unwrap();
        assert!(m.constraint("comp_1_2").is_none());
        let mut a = encode_solution(&ord("2 | 1"), &m).unwrap();
        assert!(check_solution(&m, &a).unwrap().feasible);
        a.insert("x_2_1".into(), Rational::zero());
        fill_deviations(&m, &mut a);
        let report = check_solution(&m, &a).unwrap();
        assert!(!report.feasible);
        assert!(report.violated.iter().all(|r| r.starts_with("tie_")), "{:?}", report.violated);
    }

    #[test]
    fn variant_models_cover_every_kind() {
        let c = eight_items();
        for v in [
            crate::VariantSpec::Obop,
            crate::VariantSpec::FixedBuckets { p: 3 },
            crate::VariantSpec::EqualSizes { p: 4, q: 2 },
            crate::VariantSpec::PrescribedSizes { sizes: vec![1, 3, 4] },
            crate::VariantSpec::Tcu { k: 4, tail_bounds: vec![] },
        ] {
            let m = build_variant_model(&c, &v).unwrap();
            assert!(m.to_string().contains("variables"));
        }
    }
}
