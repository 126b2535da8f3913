//! Pair order matrices, the bucket-order distance and the utopian bound.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::order::{bucket_matrix, BucketOrder, Relation};
use crate::rational::Rational;

/// An n×n matrix with c_rs in [0,1], c_rs + c_sr = 1 and c_rr = 1/2.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct PairOrderMatrix {
    n: usize,
    entries: Vec<Rational>,
    labels: Option<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
    entries: Vec<Vec<Rational>>,
}

impl TryFrom<MatrixRepr> for PairOrderMatrix {
    type Error = Error;
    fn try_from(r: MatrixRepr) -> Result<PairOrderMatrix> {
        let m = PairOrderMatrix::new(r.entries)?;
        match r.labels {
            Some(l) => m.with_labels(l),
            None => Ok(m),
        }
    }
}

impl From<PairOrderMatrix> for MatrixRepr {
    fn from(m: PairOrderMatrix) -> MatrixRepr {
        MatrixRepr { entries: m.rows(), labels: m.labels }
    }
}

impl PairOrderMatrix {
    /// Validates and builds a matrix from rows.
    pub fn new(rows: Vec<Vec<Rational>>) -> Result<PairOrderMatrix> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidMatrix("empty matrix".into()));
        }
        let mut entries = Vec::with_capacity(n * n);
        for (r, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidMatrix(format!("row {} has {} entries, expected {n}", r + 1, row.len())));
            }
            entries.extend(row);
        }
        let m = PairOrderMatrix { n, entries, labels: None };
        m.validate()?;
        Ok(m)
    }

    /// Builds a matrix from integer entries divided by `denom`, e.g. percentages.
    pub fn from_scaled(rows: &[&[i64]], denom: i64) -> Result<PairOrderMatrix> {
        PairOrderMatrix::new(rows.iter().map(|row| row.iter().map(|&v| Rational::new(v, denom)).collect()).collect())
    }

    /// Builds a matrix from the upper triangle: `upper(r, s)` for r < s.
    pub fn from_upper(n: usize, mut upper: impl FnMut(usize, usize) -> Rational) -> Result<PairOrderMatrix> {
        let mut rows = vec![vec![Rational::half(); n]; n];
        for r in 0..n {
            for s in r + 1..n {
                let v = upper(r, s);
                rows[s][r] = Rational::one() - &v;
                rows[r][s] = v;
            }
        }
        PairOrderMatrix::new(rows)
    }

    /// The matrix with every entry 1/2.
    pub fn indifferent(n: usize) -> PairOrderMatrix {
        PairOrderMatrix { n, entries: vec![Rational::half(); n * n], labels: None }
    }

    fn validate(&self) -> Result<()> {
        let n = self.n;
        for r in 0..n {
            if self.get(r, r) != &Rational::half() {
                return Err(Error::InvalidMatrix(format!("diagonal entry ({0},{0}) must be 1/2", r + 1)));
            }
            for s in 0..n {
                let v = self.get(r, s);
                if !v.in_unit_interval() {
                    return Err(Error::InvalidMatrix(format!("entry ({},{}) = {v} outside [0,1]", r + 1, s + 1)));
                }
                if r < s && self.get(r, s) + self.get(s, r) != Rational::one() {
                    return Err(Error::InvalidMatrix(format!(
                        "entries ({0},{1}) and ({1},{0}) do not sum to 1",
                        r + 1,
                        s + 1
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<PairOrderMatrix> {
        if labels.len() != self.n {
            return Err(Error::Dimension { expected: self.n, found: labels.len() });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, r: usize, s: usize) -> &Rational {
        &self.entries[r * self.n + s]
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Label for a 0-based item, falling back to its 1-based id.
    pub fn label(&self, item: usize) -> String {
        match &self.labels {
            Some(l) => l[item].clone(),
            None => (item + 1).to_string(),
        }
    }

    pub fn rows(&self) -> Vec<Vec<Rational>> {
        self.entries.chunks(self.n).map(<[Rational]>::to_vec).collect()
    }

    /// |b_rs − c_rs| + |b_sr − c_sr| for the relation of r to s, which is
    /// twice the single-entry deviation.
    pub fn pair_cost(&self, r: usize, s: usize, rel: Relation) -> Rational {
        let d = (rel.value() - self.get(r, s)).abs();
        &d + &d
    }

    /// The principal submatrix on `items` (0-based), renumbered by position.
    pub fn submatrix(&self, items: &[usize]) -> Result<PairOrderMatrix> {
        for &i in items {
            if i >= self.n {
                return Err(Error::Dimension { expected: self.n, found: i + 1 });
            }
        }
        let rows = items.iter().map(|&r| items.iter().map(|&s| self.get(r, s).clone()).collect()).collect();
        let m = PairOrderMatrix::new(rows)?;
        match &self.labels {
            Some(l) => m.with_labels(items.iter().map(|&i| l[i].clone()).collect()),
            None => Ok(m),
        }
    }

    /// Lowest common denominator of all entries.
    pub fn common_denominator(&self) -> num_bigint::BigInt {
        Rational::common_denominator(self.entries.iter())
    }
}

/// D(B,C): sum of |b_rs − c_rs| over all ordered pairs.
pub fn distance(order: &BucketOrder, c: &PairOrderMatrix) -> Result<Rational> {
    if order.n() != c.n() {
        return Err(Error::Dimension { expected: c.n(), found: order.n() });
    }
    let mut total = Rational::zero();
    for r in 0..c.n() {
        for s in r + 1..c.n() {
            total += c.pair_cost(r, s, order.relation(r, s));
        }
    }
    Ok(total)
}

/// Thresholded matrix and the superoptimal bound D(U,C).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UtopianResult {
    /// `matrix[r][s]` is u_rs ∈ {0, 1/2, 1}.
    pub matrix: Vec<Vec<Rational>>,
    pub bound: Rational,
}

impl UtopianResult {
    /// True when the thresholded relation is itself a weak order.
    pub fn is_transitive(&self) -> bool {
        crate::order::BucketMatrix::from_entries(&self.matrix).is_ok()
    }
}

/// u_rs = 1 if c_rs > 3/4, 0 if c_rs < 1/4, else 1/2.
pub fn utopian_relation(c: &Rational) -> Relation {
    if *c > Rational::new(3, 4) {
        Relation::Before
    } else if *c < Rational::new(1, 4) {
        Relation::After
    } else {
        Relation::Tie
    }
}

pub fn utopian(c: &PairOrderMatrix) -> UtopianResult {
    let n = c.n();
    let mut matrix = vec![vec![Rational::half(); n]; n];
    let mut bound = Rational::zero();
    for r in 0..n {
        for s in 0..n {
            if r == s {
                continue;
            }
            let u = utopian_relation(c.get(r, s)).value();
            bound += (&u - c.get(r, s)).abs();
            matrix[r][s] = u;
        }
    }
    UtopianResult { matrix, bound }
}

/// D(B,C) summed over the full bucket matrix, diagonal included.
pub fn distance_full(order: &BucketOrder, c: &PairOrderMatrix) -> Result<Rational> {
    if order.n() != c.n() {
        return Err(Error::Dimension { expected: c.n(), found: order.n() });
    }
    let b = bucket_matrix(order);
    let mut total = Rational::zero();
    for r in 0..c.n() {
        for s in 0..c.n() {
            total += (b.entry(r, s) - c.get(r, s)).abs();
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{eight_items as example_1, random_matrix};
    use crate::order::enumerate_weak_orders;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn example_1_distance_and_bound() {
        let c = example_1();
        let b = BucketOrder::parse("1 3 | 2 4 7 | 8 | 5 6").unwrap();
        assert_eq!(distance(&b, &c).unwrap(), Rational::new(1078, 100));
        assert_eq!(utopian(&c).bound, Rational::new(722, 100));
        assert!(!utopian(&c).is_transitive());
    }

    #[test]
    fn indifferent_matrix_is_zero() {
        let c = PairOrderMatrix::indifferent(5);
        assert!(distance(&BucketOrder::single_bucket(5), &c).unwrap().is_zero());
        let u = utopian(&c);
        assert!(u.bound.is_zero());
        assert!(u.is_transitive());
    }

    #[test]
    fn naive_summation_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let c = random_matrix(&mut rng, 5, 20);
        let b = BucketOrder::parse("4 | 1 3 | 2 5").unwrap();
        // Independent summation straight from the definition of b_rs.
        let pos = [1, 2, 1, 0, 2];
        let mut naive = Rational::zero();
        for r in 0..5 {
            for s in 0..5 {
                let b_rs = if pos[r] < pos[s] {
                    Rational::one()
                } else if pos[r] == pos[s] {
                    Rational::half()
                } else {
                    Rational::zero()
                };
                naive += (b_rs - c.get(r, s)).abs();
            }
        }
        assert_eq!(distance(&b, &c).unwrap(), naive);
    }

    #[test]
    fn utopian_ties_at_thresholds() {
        assert_eq!(utopian_relation(&Rational::new(3, 4)), Relation::Tie);
        assert_eq!(utopian_relation(&Rational::new(1, 4)), Relation::Tie);
        assert_eq!(utopian_relation(&Rational::new(76, 100)), Relation::Before);
        assert_eq!(utopian_relation(&Rational::new(24, 100)), Relation::After);
    }

    #[test]
    fn appendix_b_utopian_by_direct_thresholding() {
        let c = crate::instances::four_items_non_unimodal();
        let raw: [[i64; 4]; 4] = [[50, 55, 90, 100], [45, 50, 20, 80], [10, 80, 50, 65], [0, 20, 35, 50]];
        let mut expected = Rational::zero();
        for (r, row) in raw.iter().enumerate() {
            for (s, &v) in row.iter().enumerate() {
                if r != s {
                    let u = if v > 75 {
                        100
                    } else if v < 25 {
                        0
                    } else {
                        50
                    };
                    expected += Rational::new((u - v).abs(), 100);
                }
            }
        }
        assert_eq!(utopian(&c).bound, expected);
    }

    #[test]
    fn validation_errors() {
        let bad = PairOrderMatrix::from_scaled(&[&[50, 60], &[60, 50]], 100);
        assert!(matches!(bad, Err(Error::InvalidMatrix(m)) if m.contains("(1,2)")));
        assert!(PairOrderMatrix::from_scaled(&[&[50, 120], &[-20, 50]], 100).is_err());
        assert!(PairOrderMatrix::from_scaled(&[&[40]], 100).is_err());
        assert!(PairOrderMatrix::from_scaled(&[&[50]], 100).is_ok());
    }

    #[test]
    fn json_round_trip() {
        let c = example_1();
        let text = serde_json::to_string(&c).unwrap();
        let back: PairOrderMatrix = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
    }

    proptest! {
        #[test]
        fn distance_properties(seed in any::<u64>(), n in 1usize..6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let c = random_matrix(&mut rng, n, 12);
            let bound = utopian(&c).bound;
            for b in enumerate_weak_orders(n).unwrap() {
                let d = distance(&b, &c).unwrap();
                prop_assert_eq!(&d, &distance_full(&b, &c).unwrap());
                prop_assert!(d >= bound);
            }
        }
    }
}
