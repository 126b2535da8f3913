//! Problem variants and their semantic feasibility conditions.
//!
//! JSON layout: a `kind` tag plus parameters, items and groups 1-based,
//! proportions as `"p/q"` strings.
//!
//! ```json
//! {"kind": "fair", "groups": [[1, 3, 4, 8], [2, 5, 6, 7]], "lambda": ["1/2", "1/2"], "mu": ["1/2", "1/2"]}
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::order::BucketOrder;
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VariantSpec {
    Obop,
    FixedBuckets {
        p: usize,
    },
    EqualSizes {
        p: usize,
        q: usize,
    },
    PrescribedSizes {
        sizes: Vec<usize>,
    },
    Tcu {
        k: usize,
        /// Bounds on how many items of a group may fall in the collapsed tail.
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        tail_bounds: Vec<TailBound>,
    },
    Fair(FairVariant),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TailBound {
    #[serde(with = "one_based_items")]
    pub items: Vec<usize>,
    #[serde(default)]
    pub min: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FairVariant {
    #[serde(flatten)]
    pub fairness: FairnessSpec,
    /// Upper bound ν on the number of buckets (default n).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_buckets: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_p: Option<usize>,
    /// Exact bucket sizes, best bucket first.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacities: Option<Vec<usize>>,
}

impl FairVariant {
    pub fn new(fairness: FairnessSpec) -> FairVariant {
        FairVariant { fairness, max_buckets: None, fixed_p: None, capacities: None }
    }

    /// Number of bucket positions in the model: the fixed count when one is
    /// given, otherwise ν. Fairness prefixes range over `1..=slots`.
    pub fn slots(&self, n: usize) -> usize {
        if let Some(c) = &self.capacities {
            c.len()
        } else if let Some(p) = self.fixed_p {
            p
        } else {
            self.max_buckets.unwrap_or(n)
        }
    }

    /// Whether every bucket position must be occupied.
    pub fn fixed_count(&self) -> bool {
        self.capacities.is_some() || self.fixed_p.is_some()
    }
}

/// Proportion bounds for one group: a single value for every prefix, or one
/// value per prefix (missing trailing prefixes take the default).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Proportion {
    Uniform(Rational),
    PerPrefix(Vec<Rational>),
}

impl Proportion {
    fn at(&self, prefix: usize, default: &Rational) -> Rational {
        match self {
            Proportion::Uniform(v) => v.clone(),
            Proportion::PerPrefix(v) => v.get(prefix - 1).cloned().unwrap_or_else(|| default.clone()),
        }
    }
}

/// An absolute bound on the count of a group's items in one bucket or one prefix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountBound {
    /// 1-based group index.
    pub group: usize,
    /// 1-based bucket position (or prefix length).
    pub index: usize,
    #[serde(default)]
    pub min: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FairnessSpec {
    #[serde(with = "one_based_groups")]
    pub groups: Vec<Vec<usize>>,
    /// Lower proportions λ, one entry per group; defaults to 0.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lambda: Vec<Proportion>,
    /// Upper proportions μ, one entry per group; defaults to 1.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mu: Vec<Proportion>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bucket_bounds: Vec<CountBound>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub prefix_bounds: Vec<CountBound>,
}

impl FairnessSpec {
    /// Groups with no proportion or count bounds.
    pub fn unconstrained(groups: Vec<Vec<usize>>) -> FairnessSpec {
        FairnessSpec { groups, lambda: vec![], mu: vec![], bucket_bounds: vec![], prefix_bounds: vec![] }
    }

    /// λ = μ = |G_i|/n for every group and prefix.
    pub fn proportional(groups: Vec<Vec<usize>>) -> FairnessSpec {
        let n: usize = groups.iter().map(Vec::len).sum();
        let share: Vec<Proportion> =
            groups.iter().map(|g| Proportion::Uniform(Rational::new(g.len() as i64, n as i64))).collect();
        FairnessSpec { lambda: share.clone(), mu: share, ..FairnessSpec::unconstrained(groups) }
    }

    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    /// λ for group `i` (0-based) and prefix length `prefix` (1-based).
    pub fn lambda(&self, i: usize, prefix: usize) -> Rational {
        let zero = Rational::zero();
        self.lambda.get(i).map_or(zero.clone(), |p| p.at(prefix, &zero))
    }

    pub fn mu(&self, i: usize, prefix: usize) -> Rational {
        let one = Rational::one();
        self.mu.get(i).map_or(one.clone(), |p| p.at(prefix, &one))
    }

    /// Direct form of the proportional condition: ⌊λT⌋ ≤ S ≤ ⌈μT⌉.
    pub fn proportion_ok(&self, i: usize, prefix: usize, s: usize, t: usize) -> bool {
        let t_r = Rational::from_integer(t as i64);
        let s_b = num_bigint::BigInt::from(s);
        (self.lambda(i, prefix) * &t_r).floor() <= s_b && s_b <= (self.mu(i, prefix) * &t_r).ceil()
    }

    /// Group index of every item.
    pub fn membership(&self, n: usize) -> Result<Vec<usize>> {
        let mut of = vec![usize::MAX; n];
        for (g, items) in self.groups.iter().enumerate() {
            for &r in items {
                if r >= n {
                    return Err(Error::InvalidVariant(format!("group {} lists item {} beyond n = {n}", g + 1, r + 1)));
                }
                if of[r] != usize::MAX {
                    return Err(Error::InvalidVariant(format!("item {} belongs to two groups", r + 1)));
                }
                of[r] = g;
            }
        }
        if let Some(r) = of.iter().position(|&g| g == usize::MAX) {
            return Err(Error::InvalidVariant(format!("item {} belongs to no group", r + 1)));
        }
        Ok(of)
    }

    /// Structural checks: partition, proportions in [0,1] with λ ≤ μ, bound indices.
    pub fn validate(&self, n: usize, slots: usize) -> Result<()> {
        if self.groups.iter().any(Vec::is_empty) {
            return Err(Error::InvalidVariant("groups must be non-empty".into()));
        }
        self.membership(n)?;
        let g = self.groups.len();
        if self.lambda.len() > g || self.mu.len() > g {
            return Err(Error::InvalidVariant(format!("more proportion entries than the {g} groups")));
        }
        for i in 0..g {
            for prefix in 1..=slots.max(1) {
                let (l, u) = (self.lambda(i, prefix), self.mu(i, prefix));
                if !l.in_unit_interval() || !u.in_unit_interval() {
                    return Err(Error::InvalidVariant(format!(
                        "group {} prefix {prefix}: proportions must lie in [0,1]",
                        i + 1
                    )));
                }
                if l > u {
                    return Err(Error::InvalidVariant(format!(
                        "group {} prefix {prefix}: lambda {l} exceeds mu {u}",
                        i + 1
                    )));
                }
            }
        }
        for b in self.bucket_bounds.iter().chain(&self.prefix_bounds) {
            if b.group == 0 || b.group > g {
                return Err(Error::InvalidVariant(format!("count bound refers to group {}", b.group)));
            }
            if b.index == 0 || b.index > slots {
                return Err(Error::InvalidVariant(format!("count bound index {} outside 1..={slots}", b.index)));
            }
            if b.max.is_some_and(|m| m < b.min) {
                return Err(Error::InvalidVariant(format!("count bound for group {} has max < min", b.group)));
            }
        }
        Ok(())
    }
}

impl VariantSpec {
    pub fn name(&self) -> &'static str {
        match self {
            VariantSpec::Obop => "obop",
            VariantSpec::FixedBuckets { .. } => "fixed-p",
            VariantSpec::EqualSizes { .. } => "equal-sizes",
            VariantSpec::PrescribedSizes { .. } => "prescribed-sizes",
            VariantSpec::Tcu { .. } => "tcu",
            VariantSpec::Fair(_) => "fair",
        }
    }

    /// Short human-readable description with parameters.
    pub fn describe(&self) -> String {
        match self {
            VariantSpec::Obop => "obop".into(),
            VariantSpec::FixedBuckets { p } => format!("fixed-p p={p}"),
            VariantSpec::EqualSizes { p, q } => format!("equal-sizes p={p} q={q}"),
            VariantSpec::PrescribedSizes { sizes } => {
                format!("prescribed-sizes {}", sizes.iter().map(ToString::to_string).collect::<Vec<_>>().join(","))
            }
            VariantSpec::Tcu { k, .. } => format!("tcu k={k}"),
            VariantSpec::Fair(f) => format!("fair groups={}", f.fairness.group_count()),
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidVariant(m));
        if n == 0 {
            return bad("no items".into());
        }
        match self {
            VariantSpec::Obop => Ok(()),
            VariantSpec::FixedBuckets { p } => {
                if *p == 0 || *p > n {
                    return bad(format!("p = {p} outside 1..={n}"));
                }
                Ok(())
            }
            VariantSpec::EqualSizes { p, q } => {
                if *p == 0 || *q == 0 || p * q != n {
                    return bad(format!("p·q = {}·{} does not equal n = {n}", p, q));
                }
                Ok(())
            }
            VariantSpec::PrescribedSizes { sizes } => {
                if sizes.is_empty() || sizes.contains(&0) {
                    return bad("bucket sizes must be positive".into());
                }
                let total: usize = sizes.iter().sum();
                if total != n {
                    return bad(format!("bucket sizes sum to {total}, not n = {n}"));
                }
                Ok(())
            }
            VariantSpec::Tcu { k, tail_bounds } => {
                if *k == 0 || *k > n {
                    return bad(format!("k = {k} outside 1..={n}"));
                }
                for b in tail_bounds {
                    if b.items.iter().any(|&r| r >= n) {
                        return bad("tail bound refers to an item beyond n".into());
                    }
                    if b.max.is_some_and(|m| m < b.min) {
                        return bad("tail bound has max < min".into());
                    }
                }
                Ok(())
            }
            VariantSpec::Fair(f) => {
                if let Some(nu) = f.max_buckets {
                    if nu == 0 || nu > n {
                        return bad(format!("max_buckets = {nu} outside 1..={n}"));
                    }
                    if f.fixed_count() {
                        return bad("max_buckets cannot be combined with fixed_p or capacities".into());
                    }
                }
                if let Some(p) = f.fixed_p {
                    if p == 0 || p > n {
                        return bad(format!("fixed_p = {p} outside 1..={n}"));
                    }
                }
                if let Some(c) = &f.capacities {
                    VariantSpec::PrescribedSizes { sizes: c.clone() }.validate(n)?;
                    if f.fixed_p.is_some_and(|p| p != c.len()) {
                        return bad("fixed_p disagrees with the number of capacities".into());
                    }
                }
                f.fairness.validate(n, f.slots(n))
            }
        }
    }

    /// Whether `order` satisfies the variant's defining condition.
    pub fn admits(&self, order: &BucketOrder) -> bool {
        let n = order.n();
        let p = order.bucket_count();
        match self {
            VariantSpec::Obop => true,
            VariantSpec::FixedBuckets { p: want } => p == *want,
            VariantSpec::EqualSizes { p: want, q } => p == *want && order.sizes().iter().all(|s| s == q),
            VariantSpec::PrescribedSizes { sizes } => order.sizes() == *sizes,
            VariantSpec::Tcu { k, tail_bounds } => {
                let tail: &[usize] = if *k == n {
                    &[]
                } else if order.buckets()[p - 1].len() == n - k {
                    &order.buckets()[p - 1]
                } else {
                    return false;
                };
                tail_bounds.iter().all(|b| {
                    let c = tail.iter().filter(|r| b.items.contains(r)).count();
                    c >= b.min && b.max.is_none_or(|m| c <= m)
                })
            }
            VariantSpec::Fair(f) => fair_admits(f, order),
        }
    }
}

fn fair_admits(f: &FairVariant, order: &BucketOrder) -> bool {
    let n = order.n();
    let p = order.bucket_count();
    let slots = f.slots(n);
    if p > slots {
        return false;
    }
    if f.fixed_count() && p != slots {
        return false;
    }
    if let Some(c) = &f.capacities {
        if order.sizes() != *c {
            return false;
        }
    }
    let spec = &f.fairness;
    let Ok(of) = spec.membership(n) else { return false };
    let g = spec.group_count();
    let mut per_bucket = vec![vec![0usize; g]; slots];
    for (u, bucket) in order.buckets().iter().enumerate() {
        for &r in bucket {
            per_bucket[u][of[r]] += 1;
        }
    }
    for b in &spec.bucket_bounds {
        let c = per_bucket[b.index - 1][b.group - 1];
        if c < b.min || b.max.is_some_and(|m| c > m) {
            return false;
        }
    }
    let mut s = vec![0usize; g];
    let mut t = 0usize;
    for prefix in 1..=slots {
        for i in 0..g {
            s[i] += per_bucket[prefix - 1][i];
            t += per_bucket[prefix - 1][i];
        }
        for i in 0..g {
            if !spec.proportion_ok(i, prefix, s[i], t) {
                return false;
            }
        }
        for b in spec.prefix_bounds.iter().filter(|b| b.index == prefix) {
            let c = s[b.group - 1];
            if c < b.min || b.max.is_some_and(|m| c > m) {
                return false;
            }
        }
    }
    true
}

mod one_based_items {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(items: &[usize], s: S) -> Result<S::Ok, S::Error> {
        items.iter().map(|i| i + 1).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<usize>, D::Error> {
        let raw = Vec::<usize>::deserialize(d)?;
        raw.into_iter()
            .map(|i| i.checked_sub(1).ok_or_else(|| serde::de::Error::custom("item ids start at 1")))
            .collect()
    }
}

mod one_based_groups {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(groups: &[Vec<usize>], s: S) -> Result<S::Ok, S::Error> {
        groups.iter().map(|g| g.iter().map(|i| i + 1).collect::<Vec<_>>()).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<usize>>, D::Error> {
        let raw = Vec::<Vec<usize>>::deserialize(d)?;
        raw.into_iter()
            .map(|g| {
                g.into_iter()
                    .map(|i| i.checked_sub(1).ok_or_else(|| serde::de::Error::custom("item ids start at 1")))
                    .collect()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ord(s: &str) -> BucketOrder {
        BucketOrder::parse(s).unwrap()
    }

    fn zero_based(groups: &[&[usize]]) -> Vec<Vec<usize>> {
        groups.iter().map(|g| g.iter().map(|i| i - 1).collect()).collect()
    }

    #[test]
    fn validation() {
        assert!(VariantSpec::FixedBuckets { p: 0 }.validate(4).is_err());
        assert!(VariantSpec::FixedBuckets { p: 4 }.validate(4).is_ok());
        assert!(VariantSpec::EqualSizes { p: 4, q: 3 }.validate(8).is_err());
        assert!(VariantSpec::EqualSizes { p: 4, q: 2 }.validate(8).is_ok());
        assert!(VariantSpec::PrescribedSizes { sizes: vec![1, 3, 4] }.validate(8).is_ok());
        assert!(VariantSpec::PrescribedSizes { sizes: vec![1, 0, 7] }.validate(8).is_err());
        assert!(VariantSpec::PrescribedSizes { sizes: vec![1, 3] }.validate(8).is_err());
        assert!(VariantSpec::Tcu { k: 9, tail_bounds: vec![] }.validate(8).is_err());
        let overlap = FairnessSpec::unconstrained(vec![vec![0, 1], vec![1, 2]]);
        assert!(VariantSpec::Fair(FairVariant::new(overlap)).validate(3).is_err());
        let missing = FairnessSpec::unconstrained(vec![vec![0, 1]]);
        assert!(VariantSpec::Fair(FairVariant::new(missing)).validate(3).is_err());
    }

    #[test]
    fn tail_semantics() {
        let v = VariantSpec::Tcu { k: 4, tail_bounds: vec![] };
        assert!(v.admits(&ord("1 3 | 4 7 | 2 5 6 8")));
        assert!(!v.admits(&ord("1 3 | 4 7 | 2 5 | 6 8")));
        let all = VariantSpec::Tcu { k: 8, tail_bounds: vec![] };
        assert!(all.admits(&ord("1 3 | 2 4 7 | 8 | 5 6")));
    }

    #[test]
    fn six_item_fairness_example() {
        let lam = Proportion::PerPrefix(vec![Rational::half(), Rational::half()]);
        let spec = FairnessSpec {
            lambda: vec![lam.clone(), lam.clone()],
            mu: vec![lam.clone(), lam],
            ..FairnessSpec::unconstrained(zero_based(&[&[1, 2, 3], &[4, 5, 6]]))
        };
        let v = VariantSpec::Fair(FairVariant::new(spec));
        v.validate(6).unwrap();
        assert!(v.admits(&ord("1 4 | 2 | 3 5 6")));
        assert!(!v.admits(&ord("1 2 3 | 4 5 6")));
    }

    #[test]
    fn proportional_rejects_unbalanced_top() {
        let v = VariantSpec::Fair(FairVariant::new(FairnessSpec::proportional(zero_based(&[
            &[1, 3, 4, 8],
            &[2, 5, 6, 7],
        ]))));
        assert!(!v.admits(&ord("1 3 | 2 4 7 | 8 | 5 6")));
        assert!(v.admits(&ord("3 | 1 2 4 7 | 5 8 | 6")));
    }

    #[test]
    fn json_schema() {
        let text = r#"{"kind":"fair","groups":[[1,3,4,8],[2,5,6,7]],"lambda":["1/2",["1/3","1/2"]],"fixed_p":3}"#;
        let v: VariantSpec = serde_json::from_str(text).unwrap();
        let VariantSpec::Fair(f) = &v else { panic!() };
        assert_eq!(f.fairness.groups[0], vec![0, 2, 3, 7]);
        assert_eq!(f.fairness.lambda(1, 1), Rational::new(1, 3));
        assert_eq!(f.fairness.lambda(1, 3), Rational::zero());
        assert_eq!(f.fairness.mu(0, 2), Rational::one());
        assert_eq!(f.fixed_p, Some(3));
        let back: VariantSpec = serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap();
        assert_eq!(back, v);
        let t: VariantSpec = serde_json::from_str(r#"{"kind":"tcu","k":4}"#).unwrap();
        assert_eq!(t, VariantSpec::Tcu { k: 4, tail_bounds: vec![] });
        let e: VariantSpec = serde_json::from_str(r#"{"kind":"equal_sizes","p":4,"q":2}"#).unwrap();
        assert_eq!(e, VariantSpec::EqualSizes { p: 4, q: 2 });
    }

    #[test]
    fn floor_ceil_condition() {
        let spec = FairnessSpec::proportional(vec![vec![0, 1, 2], vec![3, 4, 5, 6]]);
        // λ = μ = 3/7, T = 2: ⌊6/7⌋ = 0 ≤ S ≤ ⌈6/7⌉ = 1.
        assert!(spec.proportion_ok(0, 1, 0, 2));
        assert!(spec.proportion_ok(0, 1, 1, 2));
        assert!(!spec.proportion_ok(0, 1, 2, 2));
    }
}
