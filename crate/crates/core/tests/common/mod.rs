//! Random instances and variants shared by the integration suites.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use weakrank::variant::{CountBound, Proportion, TailBound};
use weakrank::{FairVariant, FairnessSpec, Rational, VariantSpec};

/// Random composition of `n` into `p` positive parts.
pub fn composition<R: Rng>(rng: &mut R, n: usize, p: usize) -> Vec<usize> {
    let mut cuts: Vec<usize> = (1..n).collect();
    cuts.shuffle(rng);
    let mut cuts: Vec<usize> = cuts[..p - 1].to_vec();
    cuts.sort_unstable();
    let mut sizes = Vec::with_capacity(p);
    let mut prev = 0;
    for c in cuts.into_iter().chain([n]) {
        sizes.push(c - prev);
        prev = c;
    }
    sizes
}

fn proportion<R: Rng>(rng: &mut R) -> Rational {
    let d = rng.gen_range(1..=5);
    Rational::new(rng.gen_range(0..=d), d)
}

/// Random partition into 2 or 3 groups with random proportion bounds.
pub fn fairness<R: Rng>(rng: &mut R, n: usize, slots: usize) -> FairnessSpec {
    let g = rng.gen_range(2..=3).min(n);
    let mut items: Vec<usize> = (0..n).collect();
    items.shuffle(rng);
    let sizes = composition(rng, n, g);
    let mut groups = Vec::new();
    let mut at = 0;
    for s in sizes {
        let mut grp = items[at..at + s].to_vec();
        grp.sort_unstable();
        groups.push(grp);
        at += s;
    }
    let mut spec = FairnessSpec::unconstrained(groups);
    for _ in 0..g {
        let (a, b) = (proportion(rng), proportion(rng));
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        if rng.gen_bool(0.3) {
            let per: Vec<Rational> = (0..slots).map(|_| lo.clone()).collect();
            spec.lambda.push(Proportion::PerPrefix(per));
        } else {
            spec.lambda.push(Proportion::Uniform(lo));
        }
        spec.mu.push(Proportion::Uniform(hi));
    }
    if rng.gen_bool(0.2) {
        spec.bucket_bounds.push(CountBound { group: 1, index: 1, min: 0, max: Some(rng.gen_range(0..=2)) });
    }
    if rng.gen_bool(0.2) {
        let index = rng.gen_range(1..=slots);
        spec.prefix_bounds.push(CountBound { group: g, index, min: rng.gen_range(0..=1), max: None });
    }
    spec
}

pub fn fair_variant<R: Rng>(rng: &mut R, n: usize) -> FairVariant {
    let mut shape = FairVariant::new(FairnessSpec::unconstrained(vec![(0..n).collect()]));
    match rng.gen_range(0..4) {
        0 => shape.max_buckets = Some(rng.gen_range(1..=n)),
        1 => shape.fixed_p = Some(rng.gen_range(1..=n)),
        2 => {
            let p = rng.gen_range(1..=n);
            shape.capacities = Some(composition(rng, n, p));
        }
        _ => {}
    }
    shape.fairness = fairness(rng, n, shape.slots(n));
    shape
}

/// One random variant of each kind that `n` allows.
pub fn variants<R: Rng>(rng: &mut R, n: usize) -> Vec<VariantSpec> {
    let mut out = vec![VariantSpec::Obop, VariantSpec::FixedBuckets { p: rng.gen_range(1..=n) }];
    let divisors: Vec<usize> = (1..=n).filter(|p| n.is_multiple_of(*p)).collect();
    let p = *divisors.choose(rng).unwrap();
    out.push(VariantSpec::EqualSizes { p, q: n / p });
    let p = rng.gen_range(1..=n);
    out.push(VariantSpec::PrescribedSizes { sizes: composition(rng, n, p) });
    let k = rng.gen_range(1..=n);
    let mut tail_bounds = Vec::new();
    if k < n && rng.gen_bool(0.3) {
        let mut items: Vec<usize> = (0..n).collect();
        items.shuffle(rng);
        items.truncate(rng.gen_range(1..=n));
        tail_bounds.push(TailBound { items, min: rng.gen_range(0..=1), max: Some(rng.gen_range(1..=n - k)) });
    }
    out.push(VariantSpec::Tcu { k, tail_bounds });
    out.push(VariantSpec::Fair(fair_variant(rng, n)));
    out
}
