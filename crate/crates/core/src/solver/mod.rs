//! Exact optimization over weak orders.
//!
//! [`solve`] runs a depth-first branch and bound whose bound is the sum of
//! per-pair minimum costs, that is the utopian value of the undecided part.
//! Plain problems branch on pair relations; problems with size, tail or
//! fairness rules build the order bucket by bucket. Small instances go to
//! [`brute_force_solve`], which also serves as the reference in tests.

mod brute;
mod buckets;
mod costs;
mod pairs;
mod search;
mod seed;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{utopian, PairOrderMatrix};
use crate::order::BucketOrder;
use crate::rational::Rational;
use crate::variant::VariantSpec;

pub use brute::{brute_force_solve, brute_force_solve_capped, DEFAULT_ENUMERATION_CAP};
pub use buckets::MAX_ITEMS as BUCKET_SEARCH_MAX_ITEMS;

use costs::{width_for, Costs, Weight, Width};
use search::{Event, Limits, Shared, Space};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Branch on the relation of one pair at a time.
    Pairs,
    /// Build the order one bucket at a time.
    Buckets,
    /// Enumerate every weak order.
    Exhaustive,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Pairs => "pairs",
            Strategy::Buckets => "buckets",
            Strategy::Exhaustive => "exhaustive",
        }
    }

    /// The search used when none is requested.
    pub fn default_for(variant: &VariantSpec) -> Strategy {
        match variant {
            VariantSpec::Obop => Strategy::Pairs,
            _ => Strategy::Buckets,
        }
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Strategy> {
        match s {
            "pairs" => Ok(Strategy::Pairs),
            "buckets" => Ok(Strategy::Buckets),
            "exhaustive" => Ok(Strategy::Exhaustive),
            other => Err(Error::InvalidVariant(format!("unknown strategy `{other}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveConfig {
    pub time_limit: Option<Duration>,
    pub node_limit: Option<u64>,
    /// Instances with fewer items are enumerated exhaustively unless a
    /// strategy is forced.
    pub enumeration_threshold: usize,
    /// Most optima collected.
    pub optima_cap: usize,
    pub workers: usize,
    pub strategy: Option<Strategy>,
    /// Orders evaluated before the search; admitted ones seed the incumbent
    /// together with a ranked-and-cut order built for the variant.
    pub warm_start: Vec<BucketOrder>,
    /// Collect node, prune and incumbent events.
    pub trace: bool,
}

impl Default for SolveConfig {
    fn default() -> SolveConfig {
        SolveConfig {
            time_limit: None,
            node_limit: None,
            enumeration_threshold: DEFAULT_ENUMERATION_CAP,
            optima_cap: 64,
            workers: std::thread::available_parallelism().map_or(1, usize::from),
            strategy: None,
            warm_start: Vec::new(),
            trace: false,
        }
    }
}

impl SolveConfig {
    /// Single worker, no limits: fully reproducible.
    pub fn sequential() -> SolveConfig {
        SolveConfig { workers: 1, ..SolveConfig::default() }
    }

    pub fn with_strategy(mut self, strategy: Strategy) -> SolveConfig {
        self.strategy = Some(strategy);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.optima_cap == 0 {
            return Err(Error::InvalidVariant("optima cap must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::InvalidVariant("worker count must be at least 1".into()));
        }
        if self.enumeration_threshold == 0 {
            return Err(Error::InvalidVariant("enumeration threshold must be positive".into()));
        }
        if self.time_limit.is_some_and(|t| t.is_zero()) || self.node_limit == Some(0) {
            return Err(Error::InvalidVariant("limits must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Optimal,
    Infeasible,
    /// A limit stopped the search; the incumbent, if any, is not proven optimal.
    Limit,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Optimal => "optimal",
            Status::Infeasible => "infeasible",
            Status::Limit => "limit",
        })
    }
}

/// One search event, with exact bounds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TraceEvent {
    Node { depth: usize, bound: Rational },
    Prune { depth: usize, bound: Rational },
    Incumbent { value: Rational },
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveResult {
    pub status: Status,
    /// Value of the best order found: the optimum when `status` is optimal.
    pub objective: Option<Rational>,
    /// Best orders found, deduplicated, sorted by bucket count then assignment.
    pub optima: Vec<BucketOrder>,
    /// False when the optima cap stopped collection early.
    pub optima_complete: bool,
    /// Proven lower bound on the optimum.
    pub bound: Option<Rational>,
    pub nodes: u64,
    pub elapsed: f64,
    pub bucket_counts: Vec<usize>,
    pub strategy: Strategy,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<TraceEvent>,
}

impl SolveResult {
    /// 100·(incumbent − bound)/bound. The relative convention is an
    /// assumption; it is zero for optimal results and undefined at bound 0.
    pub fn gap_percent(&self) -> Option<f64> {
        let (obj, bound) = (self.objective.as_ref()?, self.bound.as_ref()?);
        if bound.is_zero() {
            return obj.is_zero().then_some(0.0);
        }
        Some(((obj - bound) / bound.clone()).to_f64() * 100.0)
    }

    /// Optima count in the 1, 2, 3, ">3" convention.
    pub fn optima_label(&self) -> String {
        optima_label(self.optima.len())
    }
}

pub fn optima_label(count: usize) -> String {
    match count {
        0..=3 => count.to_string(),
        _ => ">3".into(),
    }
}

#[allow(clippy::too_many_arguments)]
fn finish(
    status: Status,
    objective: Option<Rational>,
    optima: Vec<BucketOrder>,
    optima_complete: bool,
    bound: Option<Rational>,
    nodes: u64,
    start: Instant,
    strategy: Strategy,
) -> SolveResult {
    let mut bucket_counts: Vec<usize> = optima.iter().map(BucketOrder::bucket_count).collect();
    bucket_counts.sort_unstable();
    SolveResult {
        status,
        objective,
        optima,
        optima_complete,
        bound,
        nodes,
        elapsed: start.elapsed().as_secs_f64(),
        bucket_counts,
        strategy,
        trace: Vec::new(),
    }
}

/// Finds a provably optimal order for the variant, all optima up to the cap,
/// or stops at a limit with the incumbent and a lower bound.
pub fn solve(c: &PairOrderMatrix, variant: &VariantSpec, cfg: &SolveConfig) -> Result<SolveResult> {
    cfg.validate()?;
    variant.validate(c.n())?;
    for order in &cfg.warm_start {
        if order.n() != c.n() {
            return Err(Error::Dimension { expected: c.n(), found: order.n() });
        }
    }
    let strategy = match cfg.strategy {
        Some(s) => s,
        None if c.n() < cfg.enumeration_threshold => Strategy::Exhaustive,
        None => Strategy::default_for(variant),
    };
    if strategy == Strategy::Exhaustive {
        let mut r = brute::solve_exhaustive(c, variant, crate::order::ENUMERATION_HARD_CAP, cfg.workers)?;
        if r.optima.len() > cfg.optima_cap {
            r.optima.truncate(cfg.optima_cap);
            r.optima_complete = false;
            r.bucket_counts = r.optima.iter().map(BucketOrder::bucket_count).collect();
            r.bucket_counts.sort_unstable();
        }
        return Ok(r);
    }
    match width_for(c)? {
        Width::Narrow => run_width::<i64>(c, variant, cfg, strategy),
        Width::Wide => run_width::<i128>(c, variant, cfg, strategy),
    }
}

fn run_width<W: Weight>(
    c: &PairOrderMatrix,
    variant: &VariantSpec,
    cfg: &SolveConfig,
    strategy: Strategy,
) -> Result<SolveResult> {
    let start = Instant::now();
    let costs: Costs<W> = Costs::new(c)?;
    let shared = Shared::new(cfg.optima_cap, Limits { start, time_limit: cfg.time_limit, node_limit: cfg.node_limit });
    for order in cfg.warm_start.iter().cloned().chain(seed::seeds(&costs, variant)) {
        if variant.admits(&order) {
            shared.offer(costs.value(&order), order);
        }
    }
    let seeded = shared.best_value();
    let scale = costs.clone();
    let (pending, mut events) = match strategy {
        Strategy::Pairs => drive(pairs::PairSpace::new(costs, variant.clone()), cfg, &shared),
        Strategy::Buckets => drive(buckets::BucketSpace::new(costs, variant)?, cfg, &shared),
        Strategy::Exhaustive => unreachable!("handled by the caller"),
    };
    if let Some(value) = seeded.filter(|_| cfg.trace) {
        events.insert(0, Event::Incumbent { value });
    }
    let nodes = shared.nodes.load(std::sync::atomic::Ordering::Relaxed);
    let stopped = shared.stopped();
    let (best, optima, incomplete) = shared.into_parts();
    let value = best.map(|w| scale.to_rational(w));
    let mut result = match pending.filter(|_| stopped) {
        Some(open) => {
            let bound = best.map_or(open, |b| b.min(open));
            finish(Status::Limit, value, optima, false, Some(scale.to_rational(bound)), nodes, start, strategy)
        }
        None => match value {
            Some(v) => finish(Status::Optimal, Some(v.clone()), optima, !incomplete, Some(v), nodes, start, strategy),
            None => finish(Status::Infeasible, None, Vec::new(), true, None, nodes, start, strategy),
        },
    };
    result.trace = events
        .into_iter()
        .map(|e| match e {
            Event::Node { depth, bound } => TraceEvent::Node { depth, bound: scale.to_rational(bound) },
            Event::Prune { depth, bound } => TraceEvent::Prune { depth, bound: scale.to_rational(bound) },
            Event::Incumbent { value } => TraceEvent::Incumbent { value: scale.to_rational(value) },
        })
        .collect();
    Ok(result)
}

fn drive<W: Weight, S: Space<W>>(root: S, cfg: &SolveConfig, shared: &Shared<W>) -> (Option<W>, Vec<Event<W>>) {
    let out = search::run(root, cfg.workers, shared, cfg.trace);
    (out.pending, out.trace)
}

/// All optimal orders up to `cfg.optima_cap`, canonically sorted.
pub fn enumerate_optima(c: &PairOrderMatrix, variant: &VariantSpec, cfg: &SolveConfig) -> Result<Vec<BucketOrder>> {
    let r = solve(c, variant, cfg)?;
    match r.status {
        Status::Optimal => Ok(r.optima),
        Status::Infeasible => Ok(Vec::new()),
        Status::Limit => Err(Error::Incompatible("search stopped at a limit before proving optimality".into())),
    }
}

/// Utopian bound in the solver's units; convenience for reports.
pub fn utopian_bound(c: &PairOrderMatrix) -> Rational {
    utopian(c).bound
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{eight_items, four_items_non_unimodal, ten_items};
    use crate::variant::{FairVariant, FairnessSpec};

    fn ord(s: &str) -> BucketOrder {
        s.parse().unwrap()
    }

    fn forced(strategy: Strategy) -> SolveConfig {
        SolveConfig::sequential().with_strategy(strategy)
    }

    fn value(c: &PairOrderMatrix, v: &VariantSpec, strategy: Strategy) -> SolveResult {
        let r = solve(c, v, &forced(strategy)).unwrap();
        assert_eq!(r.status, Status::Optimal);
        r
    }

    #[test]
    fn eight_items_every_strategy() {
        let c = eight_items();
        for s in [Strategy::Pairs, Strategy::Buckets, Strategy::Exhaustive] {
            let r = value(&c, &VariantSpec::Obop, s);
            assert_eq!(r.objective.as_ref().unwrap().to_fixed(2), "10.78", "{s:?}");
            assert_eq!(r.optima, vec![ord("1 3 | 2 4 7 | 8 | 5 6")], "{s:?}");
            assert_eq!(r.bound, r.objective);
        }
    }

    #[test]
    fn eight_items_variants() {
        let c = eight_items();
        let cases: Vec<(VariantSpec, &str)> = vec![
            (VariantSpec::FixedBuckets { p: 2 }, "12.14"),
            (VariantSpec::FixedBuckets { p: 5 }, "11.34"),
            (VariantSpec::FixedBuckets { p: 4 }, "10.78"),
            (VariantSpec::EqualSizes { p: 2, q: 4 }, "13.14"),
            (VariantSpec::EqualSizes { p: 4, q: 2 }, "11.46"),
            (VariantSpec::PrescribedSizes { sizes: vec![1, 3, 4] }, "13.66"),
            (VariantSpec::PrescribedSizes { sizes: vec![1, 2, 2, 3] }, "13.78"),
            (VariantSpec::PrescribedSizes { sizes: vec![2, 3, 1, 2] }, "10.78"),
            (VariantSpec::Tcu { k: 4, tail_bounds: vec![] }, "12.66"),
            (VariantSpec::Tcu { k: 7, tail_bounds: vec![] }, "11.58"),
            (VariantSpec::Tcu { k: 6, tail_bounds: vec![] }, "10.78"),
            (
                VariantSpec::Fair(FairVariant::new(FairnessSpec::proportional(vec![
                    vec![0, 2, 3, 7],
                    vec![1, 4, 5, 6],
                ]))),
                "11.86",
            ),
        ];
        for (v, want) in cases {
            let mut seen = Vec::new();
            for s in [Strategy::Pairs, Strategy::Buckets, Strategy::Exhaustive] {
                let r = value(&c, &v, s);
                assert_eq!(r.objective.as_ref().unwrap().to_fixed(2), want, "{} {s:?}", v.describe());
                seen.push(r.optima);
            }
            assert!(seen.windows(2).all(|w| w[0] == w[1]), "{}", v.describe());
        }
    }

    #[test]
    fn ten_items_two_optima() {
        let c = ten_items();
        for s in [Strategy::Pairs, Strategy::Buckets] {
            let r = value(&c, &VariantSpec::Obop, s);
            // Frozen from exhaustive enumeration of all 102,247,563 weak orders.
            assert_eq!(r.objective.unwrap().to_fixed(2), "26.26");
            let got: Vec<String> = r.optima.iter().map(|o| o.to_string()).collect();
            assert_eq!(
                got,
                ["6 | 9 | 5 | 3 7 | 1 | 4 | 2 | 10 | 8", "6 | 9 | 5 | 3 | 7 | 1 | 4 | 2 | 10 | 8"],
                "{s:?}"
            );
        }
        let cases = [
            (VariantSpec::Tcu { k: 6, tail_bounds: vec![] }, "28.90", "9 | 3 | 1 6 7 | 4 | 2 5 8 10"),
            (VariantSpec::Tcu { k: 3, tail_bounds: vec![] }, "30.10", "6 | 9 | 5 | 1 2 3 4 7 8 10"),
            (VariantSpec::PrescribedSizes { sizes: vec![3, 7] }, "31.38", "6 7 9 | 1 2 3 4 5 8 10"),
        ];
        for (v, want, order) in cases {
            let r = value(&c, &v, Strategy::Buckets);
            assert_eq!(r.objective.unwrap().to_fixed(2), want, "{}", v.describe());
            let got: Vec<String> = r.optima.iter().map(|o| o.to_string()).collect();
            assert_eq!(got, [order], "{}", v.describe());
        }
    }

    /// Walks the whole tree and checks every bound against the best admitted
    /// leaf below it.
    fn admissible<S: Space<i64>>(space: &mut S, scratch: &mut S::Scratch) -> Option<i64> {
        if space.is_complete() {
            return space.order().map(|_| space.bound());
        }
        let mut moves = Vec::new();
        space.moves(&mut moves);
        let mut best: Option<i64> = None;
        for (m, est) in moves {
            if !space.apply(m, scratch) {
                continue;
            }
            assert!(est <= space.bound(), "move estimate above child bound");
            if let Some(v) = admissible(space, scratch) {
                assert!(space.bound() <= v);
                best = Some(best.map_or(v, |b| b.min(v)));
            }
            space.undo();
        }
        if let Some(b) = best {
            assert!(space.bound() <= b);
        }
        best
    }

    #[test]
    fn bounds_never_exceed_reachable_leaves() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        for _ in 0..30 {
            let n = rng.gen_range(2..=5);
            let c = crate::instances::random_matrix(&mut rng, n, 8);
            let variants = [
                VariantSpec::Obop,
                VariantSpec::FixedBuckets { p: rng.gen_range(1..=n) },
                VariantSpec::Tcu { k: rng.gen_range(1..=n), tail_bounds: vec![] },
            ];
            for v in variants {
                let want = brute::solve_exhaustive(&c, &v, 8, 1).unwrap().objective;
                let mut pairs = pairs::PairSpace::new(Costs::<i64>::new(&c).unwrap(), v.clone());
                let got = admissible(&mut pairs, &mut ()).map(|w| Costs::<i64>::new(&c).unwrap().to_rational(w));
                assert_eq!(got, want);
                let costs = Costs::<i64>::new(&c).unwrap();
                let mut buckets = buckets::BucketSpace::new(costs.clone(), &v).unwrap();
                let got = admissible(&mut buckets, &mut Default::default()).map(|w| costs.to_rational(w));
                assert_eq!(got, want);
            }
        }
    }

    #[test]
    fn non_unimodal_sweep() {
        let c = four_items_non_unimodal();
        let vals: Vec<String> = (1..=4)
            .map(|p| value(&c, &VariantSpec::FixedBuckets { p }, Strategy::Buckets).objective.unwrap().to_string())
            .collect();
        assert_eq!(vals, ["17/5", "13/5", "14/5", "13/5"]);
    }
}
