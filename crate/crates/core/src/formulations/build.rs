//! Model builders for every formulation.

use num_traits::ToPrimitive;

use super::model::{IlpModel, ModelKind, ModelMeta, Sense};
use crate::error::{Error, Result};
use crate::ingest::PreferenceCounts;
use crate::matrix::PairOrderMatrix;
use crate::rational::Rational;
use crate::variant::{FairVariant, TailBound, VariantSpec};

pub fn x_name(r: usize, s: usize) -> String {
    format!("x_{}_{}", r + 1, s + 1)
}

pub fn y_name(r: usize, u: usize) -> String {
    format!("y_{}_{}", r + 1, u + 1)
}

pub fn d_name(r: usize, s: usize) -> String {
    format!("d_{}_{}", r + 1, s + 1)
}

pub fn alpha_name(r: usize) -> String {
    format!("a_{}", r + 1)
}

pub fn beta_name(r: usize, s: usize) -> String {
    format!("b_{}_{}", r + 1, s + 1)
}

pub fn z_name(r: usize) -> String {
    format!("z_{}", r + 1)
}

/// Objective of the base weak-order model.
#[derive(Debug, Clone)]
pub enum ObjectiveSpec {
    /// Bucket-order distance, linearized with deviation variables.
    Obop(PairOrderMatrix),
    /// Maximize agreement with precedence counts: min −Σ a_rs x_rs.
    Lop(PreferenceCounts),
    /// User-supplied coefficients: min −Σ a_rs (2 x_rs − 1).
    Coefficients(Vec<Vec<Rational>>),
}

impl ObjectiveSpec {
    fn n(&self) -> usize {
        match self {
            ObjectiveSpec::Obop(c) => c.n(),
            ObjectiveSpec::Lop(a) => a.n(),
            ObjectiveSpec::Coefficients(a) => a.len(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct BaseOptions {
    /// Comparability as equality: only linear orders remain.
    pub no_ties: bool,
}

/// Size rule for the assignment model.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub enum SizeMode {
    /// Every bucket non-empty.
    #[default]
    NonEmpty,
    Equal(usize),
    Prescribed(Vec<usize>),
}

/// The eight combinations of these flags are the assignment-model variants.
#[derive(Debug, Clone, Default)]
pub struct AssignmentOptions {
    pub sizes: SizeMode,
    pub comparability: bool,
    pub transitivity: bool,
    pub relax_x: bool,
}

impl AssignmentOptions {
    /// Comparability and transitivity included, x binary.
    pub fn strengthened(sizes: SizeMode) -> AssignmentOptions {
        AssignmentOptions { sizes, comparability: true, transitivity: true, relax_x: false }
    }

    /// All eight flag combinations for a size mode.
    pub fn all_variants(sizes: &SizeMode) -> Vec<AssignmentOptions> {
        let mut out = Vec::with_capacity(8);
        for mask in 0..8u8 {
            out.push(AssignmentOptions {
                sizes: sizes.clone(),
                comparability: mask & 1 != 0,
                transitivity: mask & 2 != 0,
                relax_x: mask & 4 != 0,
            });
        }
        out
    }

    pub fn label(&self) -> String {
        let mut s = String::from("assignment");
        if self.comparability {
            s.push_str("+comp");
        }
        if self.transitivity {
            s.push_str("+trans");
        }
        if self.relax_x {
            s.push_str("+relax-x");
        }
        s
    }
}

/// Handling of the inequality β_rs + α_s ≤ x_rs + x_sr in the representative model.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum TieInequality {
    /// Tie-forcing rows only.
    #[default]
    Omit,
    /// Replace the two tie-forcing rows with the inequality.
    Substitute,
    /// Keep the tie-forcing rows and append the inequality.
    Add,
}

#[derive(Debug, Clone, Default)]
pub struct RepresentativeOptions {
    pub tie_inequality: TieInequality,
    /// Equal bucket sizes q.
    pub equal_size: Option<usize>,
}

fn meta(n: usize, kind: ModelKind, description: String, matrix: Option<&PairOrderMatrix>) -> ModelMeta {
    ModelMeta { n, kind, description, matrix: matrix.cloned() }
}

fn declare_x(model: &mut IlpModel, n: usize, relax: bool) {
    for r in 0..n {
        for s in 0..n {
            if r != s {
                if relax {
                    model.add_unit_continuous(x_name(r, s));
                } else {
                    model.add_binary(x_name(r, s));
                }
            }
        }
    }
}

fn x(model: &IlpModel, r: usize, s: usize) -> usize {
    model.var(&x_name(r, s)).expect("x declared")
}

fn add_comparability(model: &mut IlpModel, n: usize, equality: bool) {
    let sense = if equality { Sense::Eq } else { Sense::Ge };
    for r in 0..n {
        for s in r + 1..n {
            let terms = vec![(x(model, r, s), 1), (x(model, s, r), 1)];
            model.add_row(format!("comp_{}_{}", r + 1, s + 1), terms, sense, 1);
        }
    }
}

fn add_transitivity(model: &mut IlpModel, n: usize) {
    for r in 0..n {
        for s in 0..n {
            for t in 0..n {
                if r == s || s == t || r == t {
                    continue;
                }
                let terms = vec![(x(model, r, s), 1), (x(model, s, t), 1), (x(model, r, t), -1)];
                model.add_row(format!("trans_{}_{}_{}", r + 1, s + 1, t + 1), terms, Sense::Le, 1);
            }
        }
    }
}

fn check_i64(v: &Rational, what: &str) -> Result<()> {
    if v.numer().to_i64().is_none() || v.denom().to_i64().is_none() {
        return Err(Error::InvalidModel(format!("{what} = {v} does not fit 64-bit coefficients")));
    }
    Ok(())
}

/// Deviation variables d_rs (r < s), the two linearization rows per pair and
/// the objective 2 Σ d_rs.
fn add_distance_objective(model: &mut IlpModel, c: &PairOrderMatrix) -> Result<()> {
    let n = c.n();
    let two = Rational::from_integer(2);
    for r in 0..n {
        for s in r + 1..n {
            let c_rs = c.get(r, s);
            check_i64(c_rs, &format!("c_{}_{}", r + 1, s + 1))?;
            let d = model.add_unit_continuous(d_name(r, s));
            let (xrs, xsr) = (x(model, r, s), x(model, s, r));
            // 2d − x_rs + x_sr ≥ 1 − 2c and 2d + x_rs − x_sr ≥ 2c − 1
            let one = Rational::one();
            model.add_rational_row(
                format!("lin1_{}_{}", r + 1, s + 1),
                vec![(d, two.clone()), (xrs, -one.clone()), (xsr, one.clone())],
                Sense::Ge,
                &one - &(&two * c_rs),
            )?;
            model.add_rational_row(
                format!("lin2_{}_{}", r + 1, s + 1),
                vec![(d, two.clone()), (xrs, one.clone()), (xsr, -one.clone())],
                Sense::Ge,
                &(&two * c_rs) - &one,
            )?;
            model.objective.terms.push((d, two.clone()));
        }
    }
    Ok(())
}

/// Weak-order model over x_rs with the chosen objective.
pub fn build_base_model(n: usize, objective: &ObjectiveSpec, opts: BaseOptions) -> Result<IlpModel> {
    if n == 0 {
        return Err(Error::InvalidModel("n must be at least 1".into()));
    }
    if objective.n() != n {
        return Err(Error::Dimension { expected: n, found: objective.n() });
    }
    let (desc, matrix) = match objective {
        ObjectiveSpec::Obop(c) => ("obop", Some(c)),
        ObjectiveSpec::Lop(_) => ("lop", None),
        ObjectiveSpec::Coefficients(_) => ("weighted", None),
    };
    let mut model = IlpModel::new(meta(
        n,
        ModelKind::Base { no_ties: opts.no_ties },
        format!("{desc} base model{}", if opts.no_ties { " (no ties)" } else { "" }),
        matrix,
    ));
    declare_x(&mut model, n, false);
    add_comparability(&mut model, n, opts.no_ties);
    add_transitivity(&mut model, n);
    match objective {
        ObjectiveSpec::Obop(c) => add_distance_objective(&mut model, c)?,
        ObjectiveSpec::Lop(a) => {
            for r in 0..n {
                for s in 0..n {
                    if r != s && a.get(r, s) != 0 {
                        let coef = -Rational::from_big(a.get(r, s).into(), 1.into());
                        model.objective.terms.push((x(&model, r, s), coef));
                    }
                }
            }
        }
        ObjectiveSpec::Coefficients(a) => {
            for (r, row) in a.iter().enumerate() {
                if row.len() != n {
                    return Err(Error::Dimension { expected: n, found: row.len() });
                }
                for (s, a_rs) in row.iter().enumerate() {
                    if r != s && !a_rs.is_zero() {
                        let coef = -(a_rs * &Rational::from_integer(2));
                        model.objective.terms.push((x(&model, r, s), coef));
                        model.objective.constant += a_rs;
                    }
                }
            }
        }
    }
    Ok(model)
}

/// Complete distance model over the weak-order constraints.
pub fn build_obop_model(c: &PairOrderMatrix) -> Result<IlpModel> {
    let mut m = build_base_model(c.n(), &ObjectiveSpec::Obop(c.clone()), BaseOptions::default())?;
    m.meta.description = "obop".into();
    Ok(m)
}

fn declare_y(model: &mut IlpModel, n: usize, slots: usize) -> Vec<Vec<usize>> {
    (0..n).map(|r| (0..slots).map(|u| model.add_binary(y_name(r, u))).collect()).collect()
}

/// Assignment, tie and ordering rows shared by the assignment and fair models.
fn add_assignment_core(model: &mut IlpModel, y: &[Vec<usize>], n: usize, slots: usize) {
    for (r, yr) in y.iter().enumerate() {
        model.add_row(format!("assign_{}", r + 1), yr.iter().map(|&v| (v, 1)).collect(), Sense::Eq, 1);
    }
    for r in 0..n {
        for s in r + 1..n {
            for u in 0..slots {
                let terms = vec![(y[r][u], 1), (y[s][u], 1), (x(model, r, s), -1), (x(model, s, r), -1)];
                model.add_row(format!("tie_{}_{}_{}", r + 1, s + 1, u + 1), terms, Sense::Le, 0);
            }
        }
    }
    for r in 0..n {
        for s in 0..n {
            if r == s {
                continue;
            }
            for u in 0..slots.saturating_sub(1) {
                let mut terms = vec![(x(model, s, r), 1)];
                terms.extend((0..=u).map(|v| (y[r][v], 1)));
                terms.extend((u + 1..slots).map(|v| (y[s][v], 1)));
                model.add_row(format!("order_{}_{}_{}", r + 1, s + 1, u + 1), terms, Sense::Le, 2);
            }
        }
    }
}

fn add_size_rows(model: &mut IlpModel, y: &[Vec<usize>], sizes: &SizeMode, slots: usize) {
    for u in 0..slots {
        let terms: Vec<(usize, i64)> = y.iter().map(|yr| (yr[u], 1)).collect();
        match sizes {
            SizeMode::NonEmpty => model.add_row(format!("nonempty_{}", u + 1), terms, Sense::Ge, 1),
            SizeMode::Equal(q) => model.add_row(format!("size_{}", u + 1), terms, Sense::Eq, *q as i64),
            SizeMode::Prescribed(q) => model.add_row(format!("size_{}", u + 1), terms, Sense::Eq, q[u] as i64),
        }
    }
}

/// Fixed bucket count with item–bucket assignment variables y_ru.
pub fn build_p_assignment_model(c: &PairOrderMatrix, p: usize, opts: &AssignmentOptions) -> Result<IlpModel> {
    let n = c.n();
    match &opts.sizes {
        SizeMode::NonEmpty => VariantSpec::FixedBuckets { p }.validate(n)?,
        SizeMode::Equal(q) => VariantSpec::EqualSizes { p, q: *q }.validate(n)?,
        SizeMode::Prescribed(q) => {
            VariantSpec::PrescribedSizes { sizes: q.clone() }.validate(n)?;
            if q.len() != p {
                return Err(Error::InvalidVariant(format!("{} sizes given for p = {p}", q.len())));
            }
        }
    }
    let mut model = IlpModel::new(meta(n, ModelKind::Assignment { p }, format!("{} p={p}", opts.label()), Some(c)));
    declare_x(&mut model, n, opts.relax_x);
    let y = declare_y(&mut model, n, p);
    add_assignment_core(&mut model, &y, n, p);
    add_size_rows(&mut model, &y, &opts.sizes, p);
    if opts.comparability {
        add_comparability(&mut model, n, false);
    }
    if opts.transitivity {
        add_transitivity(&mut model, n);
    }
    add_distance_objective(&mut model, c)?;
    Ok(model)
}

/// Fixed bucket count where each bucket is represented by its highest-index item.
pub fn build_p_representative_model(c: &PairOrderMatrix, p: usize, opts: &RepresentativeOptions) -> Result<IlpModel> {
    let n = c.n();
    VariantSpec::FixedBuckets { p }.validate(n)?;
    if let Some(q) = opts.equal_size {
        VariantSpec::EqualSizes { p, q }.validate(n)?;
    }
    let label = match opts.tie_inequality {
        TieInequality::Omit => "representative",
        TieInequality::Substitute => "representative+substitute-9",
        TieInequality::Add => "representative+add-9",
    };
    let mut model = IlpModel::new(meta(n, ModelKind::Representative { p }, format!("{label} p={p}"), Some(c)));
    declare_x(&mut model, n, false);
    let alpha: Vec<usize> = (0..n).map(|r| model.add_binary(alpha_name(r))).collect();
    let mut beta = vec![vec![usize::MAX; n]; n];
    for r in 0..n {
        for s in r + 1..n {
            beta[r][s] = model.add_binary(beta_name(r, s));
        }
    }
    add_comparability(&mut model, n, false);
    add_transitivity(&mut model, n);
    model.add_row("reps".into(), alpha.iter().map(|&a| (a, 1)).collect(), Sense::Eq, p as i64);
    for r in 0..n {
        for s in r + 1..n {
            model.add_row(format!("brep_{}_{}", r + 1, s + 1), vec![(beta[r][s], 1), (alpha[s], -1)], Sense::Le, 0);
        }
    }
    for r in 0..n {
        let mut terms: Vec<(usize, i64)> = (r + 1..n).map(|s| (beta[r][s], 1)).collect();
        terms.push((alpha[r], 1));
        model.add_row(format!("own_{}", r + 1), terms, Sense::Eq, 1);
    }
    for r in 0..n {
        for s in r + 1..n {
            let (xrs, xsr, b) = (x(&model, r, s), x(&model, s, r), beta[r][s]);
            if opts.tie_inequality != TieInequality::Substitute {
                model.add_row(format!("tiefwd_{}_{}", r + 1, s + 1), vec![(xrs, 1), (b, -1)], Sense::Ge, 0);
                model.add_row(format!("tiebwd_{}_{}", r + 1, s + 1), vec![(xsr, 1), (b, -1)], Sense::Ge, 0);
            }
            model.add_row(format!("onerep_{}_{}", r + 1, s + 1), vec![(xrs, 1), (xsr, 1), (alpha[r], 1)], Sense::Le, 2);
            if opts.tie_inequality != TieInequality::Omit {
                model.add_row(
                    format!("ineq9_{}_{}", r + 1, s + 1),
                    vec![(b, 1), (alpha[s], 1), (xrs, -1), (xsr, -1)],
                    Sense::Le,
                    0,
                );
            }
        }
    }
    if let Some(q) = opts.equal_size {
        for s in 0..n {
            let mut terms: Vec<(usize, i64)> = (0..s).map(|r| (beta[r][s], 1)).collect();
            terms.push((alpha[s], -(q as i64 - 1)));
            model.add_row(format!("eqsize_{}", s + 1), terms, Sense::Eq, 0);
        }
    }
    add_distance_objective(&mut model, c)?;
    Ok(model)
}

/// Distance model whose last bucket holds exactly n − k items, strictly last.
pub fn build_tcu_model(c: &PairOrderMatrix, k: usize, tail_bounds: &[TailBound]) -> Result<IlpModel> {
    let n = c.n();
    VariantSpec::Tcu { k, tail_bounds: tail_bounds.to_vec() }.validate(n)?;
    let mut model = IlpModel::new(meta(n, ModelKind::Tcu { k }, format!("tcu k={k}"), Some(c)));
    declare_x(&mut model, n, false);
    let z: Vec<usize> = (0..n).map(|r| model.add_binary(z_name(r))).collect();
    add_comparability(&mut model, n, false);
    add_transitivity(&mut model, n);
    model.add_row("tail".into(), z.iter().map(|&v| (v, 1)).collect(), Sense::Eq, (n - k) as i64);
    for r in 0..n {
        for s in 0..n {
            if r == s {
                continue;
            }
            let xrs = x(&model, r, s);
            model.add_row(format!("tailtie_{}_{}", r + 1, s + 1), vec![(xrs, 1), (z[r], 1), (z[s], -1)], Sense::Le, 1);
            model.add_row(format!("tailafter_{}_{}", r + 1, s + 1), vec![(xrs, 1), (z[s], -1)], Sense::Ge, 0);
        }
    }
    for (i, b) in tail_bounds.iter().enumerate() {
        let terms: Vec<(usize, i64)> = b.items.iter().map(|&r| (z[r], 1)).collect();
        if b.min > 0 {
            model.add_row(format!("tailgrp_lo_{}", i + 1), terms.clone(), Sense::Ge, b.min as i64);
        }
        if let Some(m) = b.max {
            model.add_row(format!("tailgrp_hi_{}", i + 1), terms, Sense::Le, m as i64);
        }
    }
    add_distance_objective(&mut model, c)?;
    Ok(model)
}

/// Assignment model over ν bucket positions with proportional-representation rows.
///
/// Without a fixed bucket count, empty positions are pushed to the end; with
/// one, every position is non-empty (or has its prescribed size). The
/// comparability and transitivity rows are always included.
pub fn build_fair_model(c: &PairOrderMatrix, fair: &FairVariant) -> Result<IlpModel> {
    let n = c.n();
    VariantSpec::Fair(fair.clone()).validate(n)?;
    let slots = fair.slots(n);
    let spec = &fair.fairness;
    let mut model = IlpModel::new(meta(n, ModelKind::Fair { slots }, format!("fair slots={slots}"), Some(c)));
    declare_x(&mut model, n, false);
    let y = declare_y(&mut model, n, slots);
    add_assignment_core(&mut model, &y, n, slots);
    if let Some(q) = &fair.capacities {
        add_size_rows(&mut model, &y, &SizeMode::Prescribed(q.clone()), slots);
    } else if fair.fixed_p.is_some() {
        add_size_rows(&mut model, &y, &SizeMode::NonEmpty, slots);
    } else {
        for r in 0..n {
            for u in 0..slots.saturating_sub(1) {
                let mut terms: Vec<(usize, i64)> = (0..n).map(|s| (y[s][u], 1)).collect();
                terms.extend((u + 1..slots).map(|v| (y[r][v], -1)));
                model.add_row(format!("emptylast_{}_{}", r + 1, u + 1), terms, Sense::Ge, 0);
            }
        }
    }
    add_comparability(&mut model, n, false);
    add_transitivity(&mut model, n);

    let of = spec.membership(n)?;
    for i in 0..spec.group_count() {
        for prefix in 1..=slots {
            let lambda = spec.lambda(i, prefix);
            let mu = spec.mu(i, prefix);
            // η T − ρ S ≤ ρ − 1, omitted when λ = 0.
            if !lambda.is_zero() {
                let (eta, rho) = small(&lambda)?;
                let terms = prefix_terms(&y, &of, i, prefix, eta - rho, eta);
                model.add_row(format!("fairlo_{}_{}", i + 1, prefix), terms, Sense::Le, rho - 1);
            }
            // τ S − κ T ≤ τ − 1, omitted when μ = 1.
            if mu != Rational::one() {
                let (kappa, tau) = small(&mu)?;
                let terms = prefix_terms(&y, &of, i, prefix, tau - kappa, -kappa);
                model.add_row(format!("fairhi_{}_{}", i + 1, prefix), terms, Sense::Le, tau - 1);
            }
        }
    }
    for b in &spec.bucket_bounds {
        let items = &spec.groups[b.group - 1];
        let terms: Vec<(usize, i64)> = items.iter().map(|&r| (y[r][b.index - 1], 1)).collect();
        count_rows(&mut model, format!("bktcnt_{}_{}", b.group, b.index), terms, b.min, b.max);
    }
    for b in &spec.prefix_bounds {
        let items = &spec.groups[b.group - 1];
        let terms: Vec<(usize, i64)> =
            items.iter().flat_map(|&r| (0..b.index).map(move |u| (r, u))).map(|(r, u)| (y[r][u], 1)).collect();
        count_rows(&mut model, format!("precnt_{}_{}", b.group, b.index), terms, b.min, b.max);
    }
    add_distance_objective(&mut model, c)?;
    Ok(model)
}

fn count_rows(model: &mut IlpModel, stem: String, terms: Vec<(usize, i64)>, min: usize, max: Option<usize>) {
    if min > 0 {
        model.add_row(format!("{stem}_lo"), terms.clone(), Sense::Ge, min as i64);
    }
    if let Some(m) = max {
        model.add_row(format!("{stem}_hi"), terms, Sense::Le, m as i64);
    }
}

/// Reduced numerator and denominator as i64.
fn small(v: &Rational) -> Result<(i64, i64)> {
    match (v.numer().to_i64(), v.denom().to_i64()) {
        (Some(a), Some(b)) => Ok((a, b)),
        _ => Err(Error::InvalidModel(format!("proportion {v} does not fit 64-bit coefficients"))),
    }
}

/// Coefficients over y_ru for u < prefix: `in_group` for members of group i, `other` for the rest.
fn prefix_terms(
    y: &[Vec<usize>],
    of: &[usize],
    i: usize,
    prefix: usize,
    in_group: i64,
    other: i64,
) -> Vec<(usize, i64)> {
    let mut terms = Vec::new();
    for (r, yr) in y.iter().enumerate() {
        let coef = if of[r] == i { in_group } else { other };
        if coef != 0 {
            terms.extend(yr[..prefix].iter().map(|&v| (v, coef)));
        }
    }
    terms
}

/// Default formulation for a variant: the assignment model with
/// comparability and transitivity for fixed-count variants.
pub fn build_variant_model(c: &PairOrderMatrix, variant: &VariantSpec) -> Result<IlpModel> {
    variant.validate(c.n())?;
    match variant {
        VariantSpec::Obop => build_obop_model(c),
        VariantSpec::FixedBuckets { p } => {
            build_p_assignment_model(c, *p, &AssignmentOptions::strengthened(SizeMode::NonEmpty))
        }
        VariantSpec::EqualSizes { p, q } => {
            build_p_assignment_model(c, *p, &AssignmentOptions::strengthened(SizeMode::Equal(*q)))
        }
        VariantSpec::PrescribedSizes { sizes } => build_p_assignment_model(
            c,
            sizes.len(),
            &AssignmentOptions::strengthened(SizeMode::Prescribed(sizes.clone())),
        ),
        VariantSpec::Tcu { k, tail_bounds } => build_tcu_model(c, *k, tail_bounds),
        VariantSpec::Fair(f) => build_fair_model(c, f),
    }
}
