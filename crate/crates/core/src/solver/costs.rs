//! Integer-scaled pair costs.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Sub, SubAssign};

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::matrix::PairOrderMatrix;
use crate::order::Relation;
use crate::rational::Rational;

/// Exact integer cost type used during search.
pub trait Weight:
    Copy + Ord + Eq + Debug + Send + Sync + Add<Output = Self> + Sub<Output = Self> + AddAssign + SubAssign + 'static
{
    const ZERO: Self;
    fn from_big(v: &BigInt) -> Option<Self>;
    fn to_big(self) -> BigInt;
    /// Saturating conversion used for the lock-free pruning hint.
    fn hint(self) -> u64;
}

impl Weight for i64 {
    const ZERO: i64 = 0;
    fn from_big(v: &BigInt) -> Option<i64> {
        v.to_i64()
    }
    fn to_big(self) -> BigInt {
        BigInt::from(self)
    }
    fn hint(self) -> u64 {
        self.max(0) as u64
    }
}

impl Weight for i128 {
    const ZERO: i128 = 0;
    fn from_big(v: &BigInt) -> Option<i128> {
        v.to_i128()
    }
    fn to_big(self) -> BigInt {
        BigInt::from(self)
    }
    fn hint(self) -> u64 {
        u64::try_from(self.max(0)).unwrap_or(u64::MAX)
    }
}

/// Which integer width a matrix needs.
pub(crate) enum Width {
    Narrow,
    Wide,
}

/// Picks the narrowest width whose range holds the largest possible total cost.
pub(crate) fn width_for(c: &PairOrderMatrix) -> Result<Width> {
    let scale = c.common_denominator();
    let n = c.n() as u64;
    // Every scaled pair cost is at most 2·scale.
    let worst = &scale * BigInt::from(2u8) * BigInt::from(n * n.saturating_sub(1) / 2 + 1);
    if worst.to_i64().is_some_and(|w| w < i64::MAX / 4) {
        Ok(Width::Narrow)
    } else if worst.to_i128().is_some_and(|w| w < i128::MAX / 4) {
        Ok(Width::Wide)
    } else {
        Err(Error::InvalidMatrix(format!("common denominator {scale} is too large for exact search")))
    }
}

/// Costs of the three relations for every ordered pair, multiplied by the
/// common denominator of the matrix.
#[derive(Debug, Clone)]
pub(crate) struct Costs<W> {
    pub n: usize,
    pub scale: BigInt,
    /// `before[x*n+y]`: cost of x strictly before y.
    pub before: Vec<W>,
    pub tie: Vec<W>,
    /// Cheapest of the three relations for the pair.
    pub min: Vec<W>,
}

impl<W: Weight> Costs<W> {
    pub fn new(c: &PairOrderMatrix) -> Result<Costs<W>> {
        let n = c.n();
        let scale = c.common_denominator();
        let conv = |r: Rational| {
            W::from_big(&r.scaled_integer(&scale))
                .ok_or_else(|| Error::InvalidMatrix("scaled cost does not fit the search width".into()))
        };
        let mut before = vec![W::ZERO; n * n];
        let mut tie = vec![W::ZERO; n * n];
        let mut min = vec![W::ZERO; n * n];
        for x in 0..n {
            for y in 0..n {
                if x != y {
                    before[x * n + y] = conv(c.pair_cost(x, y, Relation::Before))?;
                    tie[x * n + y] = conv(c.pair_cost(x, y, Relation::Tie))?;
                }
            }
        }
        for x in 0..n {
            for y in 0..n {
                if x != y {
                    min[x * n + y] = before[x * n + y].min(tie[x * n + y]).min(before[y * n + x]);
                }
            }
        }
        Ok(Costs { n, scale, before, tie, min })
    }

    #[inline]
    pub fn before(&self, x: usize, y: usize) -> W {
        self.before[x * self.n + y]
    }

    #[inline]
    pub fn tie(&self, x: usize, y: usize) -> W {
        self.tie[x * self.n + y]
    }

    #[inline]
    pub fn min(&self, x: usize, y: usize) -> W {
        self.min[x * self.n + y]
    }

    /// Cost of relation `rel` of x to y.
    #[inline]
    pub fn of(&self, x: usize, y: usize, rel: Relation) -> W {
        match rel {
            Relation::Before => self.before(x, y),
            Relation::Tie => self.tie(x, y),
            Relation::After => self.before(y, x),
        }
    }

    /// Sum of per-pair minima: the utopian bound, scaled.
    pub fn utopian(&self) -> W {
        let mut total = W::ZERO;
        for x in 0..self.n {
            for y in x + 1..self.n {
                total += self.min(x, y);
            }
        }
        total
    }

    pub fn value(&self, order: &crate::order::BucketOrder) -> W {
        let mut total = W::ZERO;
        for x in 0..self.n {
            for y in x + 1..self.n {
                total += self.of(x, y, order.relation(x, y));
            }
        }
        total
    }

    pub fn to_rational(&self, w: W) -> Rational {
        Rational::from_big(w.to_big(), self.scale.clone())
    }
}
