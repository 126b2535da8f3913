//! JSON reports and table rows.

use std::fmt::Write as _;

use anyhow::Result;
use serde::Serialize;
use weakrank::solver::utopian_bound;
use weakrank::{PairOrderMatrix, Rational, SolveResult, Status, Strategy, VariantSpec};

use crate::args::Instance;

pub const SOLVE_SCHEMA: &str = "weakrank.solve/1";
pub const OPTIMA_SCHEMA: &str = "weakrank.optima/1";
pub const SWEEP_SCHEMA: &str = "weakrank.sweep/1";
pub const FAIRNESS_SCHEMA: &str = "weakrank.fairness/1";

pub const EXIT_OPTIMAL: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_LIMIT: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;

pub fn exit_code(status: Status) -> i32 {
    match status {
        Status::Optimal => EXIT_OPTIMAL,
        Status::Limit => EXIT_LIMIT,
        Status::Infeasible => EXIT_INFEASIBLE,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Search,
    BruteForce,
}

fn fixed(v: &Option<Rational>) -> Option<String> {
    v.as_ref().map(|r| r.to_fixed(2))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub schema: &'static str,
    pub instance: String,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub voters: Option<u64>,
    pub variant: VariantSpec,
    pub method: Method,
    pub status: Status,
    pub objective: Option<Rational>,
    pub objective_2dp: Option<String>,
    pub bound: Option<Rational>,
    pub bound_2dp: Option<String>,
    pub gap_percent: Option<f64>,
    pub utopian_bound: Rational,
    pub utopian_bound_2dp: String,
    pub optima: Vec<String>,
    pub optima_count: String,
    pub optima_complete: bool,
    pub bucket_counts: Vec<usize>,
    pub nodes: u64,
    pub elapsed: f64,
    pub strategy: Strategy,
}

impl SolveReport {
    pub fn new(instance: &Instance, variant: &VariantSpec, method: Method, r: &SolveResult) -> SolveReport {
        let utopian = utopian_bound(&instance.matrix);
        SolveReport {
            schema: SOLVE_SCHEMA,
            instance: instance.name.clone(),
            n: instance.matrix.n(),
            voters: instance.voters,
            variant: variant.clone(),
            method,
            status: r.status,
            objective_2dp: fixed(&r.objective),
            objective: r.objective.clone(),
            bound_2dp: fixed(&r.bound),
            bound: r.bound.clone(),
            gap_percent: r.gap_percent(),
            utopian_bound_2dp: utopian.to_fixed(2),
            utopian_bound: utopian,
            optima: r.optima.iter().map(ToString::to_string).collect(),
            optima_count: r.optima_label(),
            optima_complete: r.optima_complete,
            bucket_counts: r.bucket_counts.clone(),
            nodes: r.nodes,
            elapsed: r.elapsed,
            strategy: r.strategy,
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let or_dash = |v: &Option<String>| v.clone().unwrap_or_else(|| "-".into());
        let _ = writeln!(s, "instance   {} (n = {})", self.instance, self.n);
        let _ = writeln!(s, "variant    {}", self.variant.describe());
        let _ = writeln!(s, "status     {}", self.status);
        let _ = writeln!(s, "objective  {}", or_dash(&self.objective_2dp));
        let _ = writeln!(s, "bound      {}", or_dash(&self.bound_2dp));
        let _ = writeln!(s, "utopian    {}", self.utopian_bound_2dp);
        let complete = if self.optima_complete { "" } else { " (capped)" };
        let _ = writeln!(s, "optima     {}{complete}", self.optima.len());
        for o in &self.optima {
            let _ = writeln!(s, "  {o}");
        }
        let _ = writeln!(s, "nodes      {}", self.nodes);
        let _ = writeln!(s, "time       {:.3}s ({})", self.elapsed, self.strategy.name());
        s
    }
}

/// One row of a results table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub instance: String,
    pub n: Option<usize>,
    pub m: Option<u64>,
    pub variant: String,
    /// Present iff the status is optimal.
    pub objective_2dp: Option<String>,
    pub objective_exact: Option<String>,
    /// Best value found under a limit.
    pub incumbent_2dp: Option<String>,
    pub bound_2dp: Option<String>,
    pub utopian_bound: Option<String>,
    pub time_s: Option<String>,
    pub status: String,
    /// 1, 2, 3 or >3; present iff the status is optimal.
    pub optima: Option<String>,
    /// Buckets of each optimum, space separated.
    pub bucket_counts: String,
    pub error: Option<String>,
}

impl BenchRow {
    pub const HEADER: [&'static str; 14] = [
        "instance",
        "n",
        "m",
        "variant",
        "objective_2dp",
        "objective_exact",
        "incumbent_2dp",
        "bound_2dp",
        "utopian_bound",
        "time_s",
        "status",
        "optima",
        "bucket_counts",
        "error",
    ];

    pub fn solved(
        name: &str,
        c: &PairOrderMatrix,
        voters: Option<u64>,
        variant: &VariantSpec,
        r: &SolveResult,
    ) -> BenchRow {
        let optimal = r.status == Status::Optimal;
        BenchRow {
            instance: name.into(),
            n: Some(c.n()),
            m: voters,
            variant: variant.describe(),
            objective_2dp: if optimal { fixed(&r.objective) } else { None },
            objective_exact: if optimal { r.objective.as_ref().map(ToString::to_string) } else { None },
            incumbent_2dp: if optimal { None } else { fixed(&r.objective) },
            bound_2dp: fixed(&r.bound),
            utopian_bound: Some(utopian_bound(c).to_fixed(2)),
            time_s: Some(format!("{:.3}", r.elapsed)),
            status: r.status.to_string(),
            optima: optimal.then(|| r.optima_label()),
            bucket_counts: r.bucket_counts.iter().map(ToString::to_string).collect::<Vec<_>>().join(" "),
            error: None,
        }
    }

    pub fn failed(name: &str, variant: &str, error: String) -> BenchRow {
        BenchRow {
            instance: name.into(),
            n: None,
            m: None,
            variant: variant.into(),
            objective_2dp: None,
            objective_exact: None,
            incumbent_2dp: None,
            bound_2dp: None,
            utopian_bound: None,
            time_s: None,
            status: "error".into(),
            optima: None,
            bucket_counts: String::new(),
            error: Some(error),
        }
    }

    pub fn record(&self) -> [String; 14] {
        let s = |v: &Option<String>| v.clone().unwrap_or_default();
        [
            self.instance.clone(),
            self.n.map(|n| n.to_string()).unwrap_or_default(),
            self.m.map(|m| m.to_string()).unwrap_or_default(),
            self.variant.clone(),
            s(&self.objective_2dp),
            s(&self.objective_exact),
            s(&self.incumbent_2dp),
            s(&self.bound_2dp),
            s(&self.utopian_bound),
            s(&self.time_s),
            self.status.clone(),
            s(&self.optima),
            self.bucket_counts.clone(),
            s(&self.error),
        ]
    }
}

/// Header plus rows as CSV.
pub fn rows_csv(rows: &[BenchRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(BenchRow::HEADER)?;
    for r in rows {
        w.write_record(r.record())?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}
