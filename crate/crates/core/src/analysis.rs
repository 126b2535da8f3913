//! Parameter sweeps, fairness trajectories and bound reports.
//!
//! Sweep points are solved one after another, each with the full worker
//! budget, so that the optima of one point can seed the next as candidate
//! orders. Seeds are only evaluated, never assumed optimal.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::RangeInclusive;

use num_bigint::BigInt;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{distance, utopian, PairOrderMatrix};
use crate::order::BucketOrder;
use crate::rational::Rational;
use crate::solver::{solve, SolveConfig, SolveResult, Status};
use crate::variant::{FairnessSpec, TailBound, VariantSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SweepParam {
    /// Number of buckets.
    #[serde(rename = "p")]
    Buckets,
    /// Head size of the tail-collapsed variant.
    #[serde(rename = "k")]
    Head,
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepParam::Buckets => "p",
            SweepParam::Head => "k",
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub param: usize,
    pub status: Status,
    pub objective: Option<Rational>,
    pub optima: Vec<BucketOrder>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub param: SweepParam,
    /// Sorted by parameter.
    pub points: Vec<SweepPoint>,
    /// Parameters attaining the smallest value among optimal points.
    pub minima: Vec<usize>,
    /// For k sweeps: n − |last bucket| over the unconstrained optima.
    pub tail_matching: Vec<usize>,
}

impl SweepResult {
    pub fn value(&self, param: usize) -> Option<&Rational> {
        self.points.iter().find(|p| p.param == param)?.objective.as_ref()
    }

    /// Parameters whose value is strictly above both neighbours.
    pub fn interior_peaks(&self) -> Vec<usize> {
        self.points
            .windows(3)
            .filter_map(|w| {
                let (a, b, c) = (w[0].objective.as_ref()?, w[1].objective.as_ref()?, w[2].objective.as_ref()?);
                (b > a && b > c).then_some(w[1].param)
            })
            .collect()
    }

    /// True when the optimal values first never rise and then never fall.
    pub fn is_unimodal(&self) -> bool {
        let vals: Vec<&Rational> = self.points.iter().filter_map(|p| p.objective.as_ref()).collect();
        let mut rising = false;
        for w in vals.windows(2) {
            if w[1] > w[0] {
                rising = true;
            } else if w[1] < w[0] && rising {
                return false;
            }
        }
        true
    }
}

fn check_range(range: &RangeInclusive<usize>, n: usize) -> Result<()> {
    if range.is_empty() || *range.start() == 0 || *range.end() > n {
        return Err(Error::InvalidVariant(format!("sweep range {}..={} outside 1..={n}", range.start(), range.end())));
    }
    Ok(())
}

fn minima(points: &[SweepPoint]) -> Vec<usize> {
    let Some(best) = points.iter().filter(|p| p.status == Status::Optimal).filter_map(|p| p.objective.as_ref()).min()
    else {
        return Vec::new();
    };
    points
        .iter()
        .filter(|p| p.status == Status::Optimal && p.objective.as_ref() == Some(best))
        .map(|p| p.param)
        .collect()
}

fn point(param: usize, r: SolveResult) -> SweepPoint {
    SweepPoint { param, status: r.status, objective: r.objective, optima: r.optima }
}

fn seeded(cfg: &SolveConfig, seeds: Vec<BucketOrder>) -> SolveConfig {
    let mut cfg = cfg.clone();
    cfg.warm_start.extend(seeds);
    cfg
}

/// Orders with one bucket fewer: each pair of adjacent buckets merged.
fn merges(order: &BucketOrder) -> Vec<BucketOrder> {
    let b = order.buckets();
    (0..b.len().saturating_sub(1))
        .map(|u| {
            let mut out: Vec<Vec<usize>> = b[..u].to_vec();
            out.push(b[u].iter().chain(&b[u + 1]).copied().collect());
            out.extend_from_slice(&b[u + 2..]);
            BucketOrder::new(out).expect("merge of a bucket order")
        })
        .collect()
}

/// Orders whose tail gains one head item.
fn demotions(order: &BucketOrder) -> Vec<BucketOrder> {
    let b = order.buckets();
    let Some((tail, head)) = b.split_last() else { return Vec::new() };
    head.iter()
        .flatten()
        .map(|&r| {
            let mut out: Vec<Vec<usize>> =
                head.iter().map(|bk| bk.iter().copied().filter(|&x| x != r).collect::<Vec<_>>()).collect();
            out.retain(|bk| !bk.is_empty());
            out.push(tail.iter().copied().chain([r]).collect());
            BucketOrder::new(out).expect("demotion of a bucket order")
        })
        .collect()
}

/// Optimal value for every bucket count in `range`.
pub fn p_sweep(c: &PairOrderMatrix, range: RangeInclusive<usize>, cfg: &SolveConfig) -> Result<SweepResult> {
    check_range(&range, c.n())?;
    let mut points = Vec::new();
    let mut seeds = Vec::new();
    for p in range.rev() {
        let r = solve(c, &VariantSpec::FixedBuckets { p }, &seeded(cfg, seeds))?;
        seeds = r.optima.iter().flat_map(merges).collect();
        points.push(point(p, r));
    }
    points.reverse();
    let minima = minima(&points);
    Ok(SweepResult { param: SweepParam::Buckets, points, minima, tail_matching: Vec::new() })
}

/// Optimal tail-collapsed value for every head size in `range`.
pub fn tcu_sweep(c: &PairOrderMatrix, range: RangeInclusive<usize>, cfg: &SolveConfig) -> Result<SweepResult> {
    let n = c.n();
    check_range(&range, n)?;
    let mut points = Vec::new();
    let mut seeds = Vec::new();
    let mut free = None;
    for k in range.clone().rev() {
        let r = solve(c, &VariantSpec::Tcu { k, tail_bounds: vec![] }, &seeded(cfg, seeds))?;
        seeds = r.optima.iter().flat_map(demotions).collect();
        if k == n {
            free = Some(r.clone());
        }
        points.push(point(k, r));
    }
    points.reverse();
    let free = match free {
        Some(r) => r,
        None => solve(c, &VariantSpec::Obop, cfg)?,
    };
    let tail_matching: BTreeSet<usize> = if free.status == Status::Optimal {
        free.optima.iter().map(|o| n - o.buckets().last().map_or(0, Vec::len)).collect()
    } else {
        BTreeSet::new()
    };
    let minima = minima(&points);
    Ok(SweepResult { param: SweepParam::Head, points, minima, tail_matching: tail_matching.into_iter().collect() })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrajectoryRow {
    /// 0-based group index.
    pub group: usize,
    /// Number of leading buckets.
    pub prefix: usize,
    /// Items in the prefix.
    pub t: usize,
    /// Group items in the prefix.
    pub s: usize,
    pub proportion: Rational,
    /// |G_i|/n.
    pub target: Rational,
    /// ⌊λT⌋.
    pub lower: Rational,
    /// ⌈μT⌉.
    pub upper: Rational,
    pub within_bounds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FairnessTrajectory {
    pub rows: Vec<TrajectoryRow>,
}

impl FairnessTrajectory {
    pub fn rows_for(&self, group: usize) -> impl Iterator<Item = &TrajectoryRow> {
        self.rows.iter().filter(move |r| r.group == group)
    }

    pub fn all_within_bounds(&self) -> bool {
        self.rows.iter().all(|r| r.within_bounds)
    }
}

/// Cumulative group shares over every prefix of `order`, checked against
/// ⌊λT⌋ ≤ S ≤ ⌈μT⌉.
pub fn fairness_trajectory(order: &BucketOrder, spec: &FairnessSpec) -> Result<FairnessTrajectory> {
    let n = order.n();
    let of = spec.membership(n)?;
    let g = spec.group_count();
    let mut s = vec![0usize; g];
    let mut t = 0;
    let mut rows = Vec::new();
    for (u, bucket) in order.buckets().iter().enumerate() {
        for &r in bucket {
            s[of[r]] += 1;
        }
        t += bucket.len();
        let t_r = Rational::from_integer(t as i64);
        for (i, &si) in s.iter().enumerate() {
            let prefix = u + 1;
            let lower = (spec.lambda(i, prefix) * &t_r).floor();
            let upper = (spec.mu(i, prefix) * &t_r).ceil();
            let sb = BigInt::from(si);
            rows.push(TrajectoryRow {
                group: i,
                prefix,
                t,
                s: si,
                proportion: Rational::new(si as i64, t as i64),
                target: Rational::new(spec.groups[i].len() as i64, n as i64),
                within_bounds: lower <= sb && sb <= upper,
                lower: Rational::from_big(lower, BigInt::from(1)),
                upper: Rational::from_big(upper, BigInt::from(1)),
            });
        }
    }
    Ok(FairnessTrajectory { rows })
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub status: Status,
    pub objective: Option<Rational>,
    /// Present for the unconstrained variant only.
    pub utopian_bound: Option<Rational>,
    /// objective − utopian bound.
    pub gap_to_utopian: Option<Rational>,
}

pub fn bound_report(c: &PairOrderMatrix, variant: &VariantSpec, cfg: &SolveConfig) -> Result<BoundReport> {
    let r = solve(c, variant, cfg)?;
    let utopian_bound = (*variant == VariantSpec::Obop).then(|| utopian(c).bound);
    let gap_to_utopian = match (&r.objective, &utopian_bound) {
        (Some(o), Some(u)) => Some(o - u),
        _ => None,
    };
    Ok(BoundReport { status: r.status, objective: r.objective, utopian_bound, gap_to_utopian })
}

/// Best order whose last bucket is exactly `tail`.
pub fn best_with_tail(c: &PairOrderMatrix, tail: &[usize], cfg: &SolveConfig) -> Result<SolveResult> {
    let n = c.n();
    let distinct: BTreeSet<usize> = tail.iter().copied().collect();
    if distinct.is_empty() || distinct.len() >= n || distinct.len() != tail.len() {
        return Err(Error::InvalidVariant("tail must be a proper non-empty set of distinct items".into()));
    }
    let bound = TailBound { items: distinct.into_iter().collect(), min: tail.len(), max: None };
    solve(c, &VariantSpec::Tcu { k: n - tail.len(), tail_bounds: vec![bound] }, cfg)
}

/// Two-bucket order made of the first `k` items of `order` and the rest.
/// The cut must fall between buckets.
pub fn split_after(order: &BucketOrder, k: usize) -> Result<BucketOrder> {
    let mut head = Vec::new();
    for bucket in order.buckets() {
        if head.len() >= k {
            break;
        }
        head.extend_from_slice(bucket);
    }
    if head.len() != k || k == 0 || k >= order.n() {
        return Err(Error::Incompatible(format!("no bucket boundary after {k} items")));
    }
    let tail: Vec<usize> = (0..order.n()).filter(|r| !head.contains(r)).collect();
    BucketOrder::new(vec![head, tail])
}

/// Distance of [`split_after`].
pub fn split_value(c: &PairOrderMatrix, order: &BucketOrder, k: usize) -> Result<Rational> {
    distance(&split_after(order, k)?, c)
}

/// `param,objective_exact,objective_2dp,status,is_min,is_peak`, where `is_peak`
/// marks values strictly above both neighbours.
pub fn sweep_csv(sweep: &SweepResult) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["param", "objective_exact", "objective_2dp", "status", "is_min", "is_peak"])?;
    let peaks = sweep.interior_peaks();
    for p in &sweep.points {
        let exact = p.objective.as_ref().map(ToString::to_string).unwrap_or_default();
        let fixed = p.objective.as_ref().map(|o| o.to_fixed(2)).unwrap_or_default();
        let is_min = sweep.minima.contains(&p.param);
        let is_peak = peaks.contains(&p.param);
        w.write_record([
            p.param.to_string(),
            exact,
            fixed,
            p.status.to_string(),
            is_min.to_string(),
            is_peak.to_string(),
        ])?;
    }
    finish_csv(w)
}

/// `group,prefix,T,S,proportion_exact,target,within_bounds` with 1-based groups.
pub fn trajectory_csv(t: &FairnessTrajectory) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["group", "prefix", "T", "S", "proportion_exact", "target", "within_bounds"])?;
    for r in &t.rows {
        w.write_record([
            (r.group + 1).to_string(),
            r.prefix.to_string(),
            r.t.to_string(),
            r.s.to_string(),
            r.proportion.to_string(),
            r.target.to_string(),
            r.within_bounds.to_string(),
        ])?;
    }
    finish_csv(w)
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{eight_items, four_items_non_unimodal, ten_items};

    fn ord(s: &str) -> BucketOrder {
        s.parse().unwrap()
    }

    #[test]
    fn non_unimodal_p_values() {
        let s = p_sweep(&four_items_non_unimodal(), 1..=4, &SolveConfig::sequential()).unwrap();
        let vals: Vec<String> = s.points.iter().map(|p| p.objective.as_ref().unwrap().to_string()).collect();
        assert_eq!(vals, ["17/5", "13/5", "14/5", "13/5"]);
        assert_eq!(s.minima, [2, 4]);
        assert_eq!(s.interior_peaks(), [3]);
        assert!(!s.is_unimodal());
    }

    #[test]
    fn tcu_sweep_eight_items() {
        let c = eight_items();
        let s = tcu_sweep(&c, 1..=8, &SolveConfig::sequential()).unwrap();
        assert_eq!(s.value(8).unwrap().to_fixed(2), "10.78");
        assert_eq!(s.value(6).unwrap().to_fixed(2), "10.78");
        assert_eq!(s.value(4).unwrap().to_fixed(2), "12.66");
        assert_eq!(s.value(7).unwrap().to_fixed(2), "11.58");
        assert_eq!(s.minima, [6, 8]);
        assert_eq!(s.tail_matching, [6]);
        let csv = sweep_csv(&s).unwrap();
        assert!(csv.starts_with("param,objective_exact,objective_2dp,status,is_min,is_peak\n"));
        assert!(csv.contains("\n6,539/50,10.78,optimal,true,false\n"), "{csv}");
    }

    #[test]
    fn counterexample_helpers() {
        let c = ten_items();
        let cfg = SolveConfig::sequential();
        let r = best_with_tail(&c, &[1, 3, 7, 9], &cfg).unwrap();
        assert_eq!(r.objective.unwrap().to_fixed(2), "29.10");
        let got: Vec<String> = r.optima.iter().map(ToString::to_string).collect();
        assert_eq!(got, ["6 | 9 | 5 | 3 7 | 1 | 2 4 8 10", "6 | 9 | 5 | 3 | 7 | 1 | 2 4 8 10"]);
        let free = ord("6 | 9 | 5 | 3 7 | 1 | 4 | 2 | 10 | 8");
        assert_eq!(split_after(&free, 3).unwrap().to_string(), "5 6 9 | 1 2 3 4 7 8 10");
        assert_eq!(split_value(&c, &free, 3).unwrap().to_fixed(2), "32.06");
        assert!(split_after(&free, 4).is_err());
    }

    #[test]
    fn trajectory_of_single_bucket() {
        let spec = FairnessSpec::proportional(vec![vec![0, 2], vec![1, 3]]);
        let t = fairness_trajectory(&BucketOrder::single_bucket(4), &spec).unwrap();
        assert_eq!(t.rows.len(), 2);
        assert!(t.rows.iter().all(|r| r.proportion == Rational::half() && r.within_bounds));
        let csv = trajectory_csv(&t).unwrap();
        assert_eq!(
            csv,
            "group,prefix,T,S,proportion_exact,target,within_bounds\n1,1,4,2,1/2,1/2,true\n2,1,4,2,1/2,1/2,true\n"
        );
    }

    #[test]
    fn trajectory_rejects_bad_partition() {
        let spec = FairnessSpec::proportional(vec![vec![0, 1], vec![1, 2]]);
        assert!(fairness_trajectory(&BucketOrder::single_bucket(3), &spec).is_err());
    }

    #[test]
    fn bound_report_eight_items() {
        let r = bound_report(&eight_items(), &VariantSpec::Obop, &SolveConfig::sequential()).unwrap();
        assert_eq!(r.objective.unwrap().to_fixed(2), "10.78");
        assert_eq!(r.utopian_bound.unwrap().to_fixed(2), "7.22");
        assert_eq!(r.gap_to_utopian.unwrap().to_fixed(2), "3.56");
        let r = bound_report(&eight_items(), &VariantSpec::FixedBuckets { p: 2 }, &SolveConfig::sequential()).unwrap();
        assert!(r.utopian_bound.is_none() && r.gap_to_utopian.is_none());
        let r = bound_report(&PairOrderMatrix::indifferent(5), &VariantSpec::Obop, &SolveConfig::sequential()).unwrap();
        assert!(r.objective.unwrap().is_zero() && r.utopian_bound.unwrap().is_zero());
    }

    #[test]
    fn merges_and_demotions() {
        let o = ord("1 | 2 3 | 4");
        let m: Vec<String> = merges(&o).iter().map(ToString::to_string).collect();
        assert_eq!(m, ["1 2 3 | 4", "1 | 2 3 4"]);
        let d: Vec<String> = demotions(&o).iter().map(ToString::to_string).collect();
        assert_eq!(d, ["2 3 | 1 4", "1 | 3 | 2 4", "1 | 2 | 3 4"]);
    }
}
