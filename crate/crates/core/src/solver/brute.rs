//! Exhaustive enumeration: the reference the searches are tested against.

use std::collections::BTreeSet;
use std::time::Instant;

use num_traits::ToPrimitive;

use super::{finish, SolveResult, Status, Strategy};
use crate::error::Result;
use crate::matrix::{distance, PairOrderMatrix};
use crate::order::{enumerate_weak_orders_capped, BucketOrder, Relation, Surjections};
use crate::rational::Rational;
use crate::variant::VariantSpec;

/// Default item limit for [`brute_force_solve`].
pub const DEFAULT_ENUMERATION_CAP: usize = 8;

/// Every optimum by enumeration of all weak orders; at most
/// [`DEFAULT_ENUMERATION_CAP`] items.
pub fn brute_force_solve(c: &PairOrderMatrix, variant: &VariantSpec) -> Result<SolveResult> {
    brute_force_solve_capped(c, variant, DEFAULT_ENUMERATION_CAP)
}

/// As [`brute_force_solve`] with a different item limit (never above the hard cap).
pub fn brute_force_solve_capped(c: &PairOrderMatrix, variant: &VariantSpec, cap: usize) -> Result<SolveResult> {
    let workers = std::thread::available_parallelism().map_or(1, usize::from);
    solve_exhaustive(c, variant, cap, workers)
}

struct Part {
    best: Option<i128>,
    optima: BTreeSet<BucketOrder>,
    count: u64,
}

/// Orders with `p` buckets for each p in `ps`.
fn scan(n: usize, ps: &[usize], cost: &[i128], variant: &VariantSpec) -> Part {
    let mut part = Part { best: None, optima: BTreeSet::new(), count: 0 };
    for &p in ps {
        for a in Surjections::new(n, p) {
            part.count += 1;
            let mut total = 0i128;
            for r in 0..n {
                for s in r + 1..n {
                    let k = match a[r].cmp(&a[s]) {
                        std::cmp::Ordering::Less => 0,
                        std::cmp::Ordering::Equal => 1,
                        std::cmp::Ordering::Greater => 2,
                    };
                    total += cost[(r * n + s) * 3 + k];
                }
            }
            if part.best.is_some_and(|b| total > b) {
                continue;
            }
            let order = BucketOrder::from_assignment(&a).expect("surjection");
            if !variant.admits(&order) {
                continue;
            }
            if part.best != Some(total) {
                part.best = Some(total);
                part.optima.clear();
            }
            part.optima.insert(order);
        }
    }
    part
}

pub(crate) fn solve_exhaustive(
    c: &PairOrderMatrix,
    variant: &VariantSpec,
    cap: usize,
    workers: usize,
) -> Result<SolveResult> {
    let start = Instant::now();
    let n = c.n();
    variant.validate(n)?;
    // Checks the cap and reports the order count when it is exceeded.
    enumerate_weak_orders_capped(n, cap)?;
    let scale = c.common_denominator();
    let mut cost = vec![0i128; n * n * 3];
    let mut exact = true;
    for r in 0..n {
        for s in r + 1..n {
            for (k, rel) in Relation::ALL.into_iter().enumerate() {
                match c.pair_cost(r, s, rel).scaled_integer(&scale).to_i128() {
                    Some(v) if v < i128::MAX / (n * n + 1) as i128 => cost[(r * n + s) * 3 + k] = v,
                    _ => exact = false,
                }
            }
        }
    }
    if !exact {
        return Ok(slow(c, variant, cap, start));
    }
    // Bucket counts are dealt round-robin to workers.
    let workers = workers.clamp(1, n);
    let parts: Vec<Part> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let ps: Vec<usize> = (1..=n).filter(|p| p % workers == w).collect();
                let cost = &cost;
                scope.spawn(move || scan(n, &ps, cost, variant))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("enumeration worker panicked")).collect()
    });
    let mut best: Option<i128> = None;
    let mut optima = BTreeSet::new();
    let mut count = 0;
    for part in parts {
        count += part.count;
        match (best, part.best) {
            (_, None) => {}
            (Some(b), Some(v)) if v > b => {}
            (Some(b), Some(v)) if v == b => optima.extend(part.optima),
            (_, Some(v)) => {
                best = Some(v);
                optima = part.optima;
            }
        }
    }
    let optima: Vec<BucketOrder> = optima.into_iter().collect();
    Ok(match best {
        Some(v) => {
            let value = Rational::from_big(v.into(), scale);
            debug_assert!(optima.iter().all(|o| distance(o, c).ok().as_ref() == Some(&value)));
            let b = Some(value.clone());
            finish(Status::Optimal, Some(value), optima, true, b, count, start, Strategy::Exhaustive)
        }
        None => finish(Status::Infeasible, None, Vec::new(), true, None, count, start, Strategy::Exhaustive),
    })
}

/// Exact rational evaluation for matrices whose scaled costs overflow.
fn slow(c: &PairOrderMatrix, variant: &VariantSpec, cap: usize, start: Instant) -> SolveResult {
    let mut best: Option<Rational> = None;
    let mut optima = Vec::new();
    let mut count = 0;
    for order in enumerate_weak_orders_capped(c.n(), cap).expect("cap checked") {
        count += 1;
        if !variant.admits(&order) {
            continue;
        }
        let d = distance(&order, c).expect("sizes agree");
        match &best {
            Some(b) if d > *b => {}
            Some(b) if d == *b => optima.push(order),
            _ => {
                best = Some(d);
                optima = vec![order];
            }
        }
    }
    optima.sort();
    match best {
        Some(v) => finish(Status::Optimal, Some(v.clone()), optima, true, Some(v), count, start, Strategy::Exhaustive),
        None => finish(Status::Infeasible, None, Vec::new(), true, None, count, start, Strategy::Exhaustive),
    }
}
