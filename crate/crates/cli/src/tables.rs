//! Reference tables for PrefLib instances: measuring the columns of one
//! instance and comparing them with `fixtures/preflib/expected.csv`.
//!
//! Every value is a string: two-decimal objectives, `-` where the column does
//! not apply, `infeasible`, or `limit:<incumbent>` when a time limit stopped
//! the search.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use weakrank::{solve, FairVariant, FairnessSpec, PairOrderMatrix, SolveConfig, SolveResult, Status, VariantSpec};

use crate::args::{load_profile_file, parse_groups};

/// Columns of the unconstrained problem.
pub const OBOP_COLUMNS: [&str; 4] = ["obop", "utopian", "optima", "buckets"];

/// Columns of the constrained variants.
pub const VARIANT_COLUMNS: [&str; 13] = [
    "p2",
    "p5",
    "p_low_minus_1",
    "p_high_plus_1",
    "p3_q",
    "tail_matching",
    "k3",
    "k5",
    "k_n10",
    "k_n5",
    "k_n2",
    "fair_top80",
    "fair_mod3",
];

pub type Row = BTreeMap<String, String>;

/// Reads the reference CSV into rows keyed by column name.
pub fn read_expected(text: &str) -> Result<Vec<Row>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header.first().map(String::as_str) != Some("instance") {
        bail!("first column must be `instance`");
    }
    r.records()
        .map(|rec| {
            let rec = rec?;
            Ok(header.iter().cloned().zip(rec.iter().map(str::to_string)).collect())
        })
        .collect()
}

/// Profile file for an instance label: `<dir>/<label>.soi` or `.soc`.
pub fn find_profile(dir: &Path, label: &str) -> Option<PathBuf> {
    ["soi", "soc"].iter().map(|e| dir.join(format!("{label}.{e}"))).find(|p| p.is_file())
}

fn value(r: &SolveResult) -> String {
    match (r.status, &r.objective) {
        (Status::Optimal, Some(o)) => o.to_fixed(2),
        (Status::Infeasible, _) => "infeasible".into(),
        (_, Some(o)) => format!("limit:{}", o.to_fixed(2)),
        (_, None) => "limit".into(),
    }
}

fn joined(v: impl IntoIterator<Item = usize>) -> String {
    v.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

/// The unconstrained optimum and its columns.
pub fn measure_obop(c: &PairOrderMatrix, cfg: &SolveConfig) -> Result<(SolveResult, Row)> {
    let r = solve(c, &VariantSpec::Obop, cfg)?;
    let mut row = Row::new();
    row.insert("obop".into(), value(&r));
    row.insert("utopian".into(), weakrank::utopian(c).bound.to_fixed(2));
    row.insert("optima".into(), if r.status == Status::Optimal { r.optima_label() } else { "-".into() });
    row.insert("buckets".into(), joined(r.bucket_counts.iter().copied()));
    Ok((r, row))
}

fn ceil_div(a: usize, b: usize) -> usize {
    a.div_ceil(b)
}

/// Variant columns, given the unconstrained result. Columns whose parameter
/// falls outside the instance are `-`.
pub fn measure_variants(c: &PairOrderMatrix, obop: &SolveResult, cfg: &SolveConfig) -> Result<Row> {
    let n = c.n();
    if obop.status != Status::Optimal {
        bail!("unconstrained problem not solved to optimality");
    }
    let lo = *obop.bucket_counts.first().expect("optimal result has an optimum");
    let hi = *obop.bucket_counts.last().expect("optimal result has an optimum");
    let mut row = Row::new();
    let mut put = |col: &str, v: Option<VariantSpec>| -> Result<()> {
        let s = match v {
            Some(v) if v.validate(n).is_ok() => value(&solve(c, &v, cfg)?),
            _ => "-".into(),
        };
        row.insert(col.into(), s);
        Ok(())
    };
    let fixed = |p: usize| (p >= 1).then_some(VariantSpec::FixedBuckets { p });
    put("p2", fixed(2))?;
    put("p5", fixed(5))?;
    put("p_low_minus_1", fixed(lo - 1))?;
    put("p_high_plus_1", fixed(hi + 1))?;
    let (q1, q2) = (ceil_div(n, 10), ceil_div(n, 5));
    put("p3_q", (q1 + q2 < n).then(|| VariantSpec::PrescribedSizes { sizes: vec![q1, q2, n - q1 - q2] }))?;
    let tcu = |k: usize| Some(VariantSpec::Tcu { k, tail_bounds: vec![] });
    put("k3", tcu(3))?;
    put("k5", tcu(5))?;
    put("k_n10", tcu(ceil_div(n, 10)))?;
    put("k_n5", tcu(ceil_div(n, 5)))?;
    put("k_n2", tcu(ceil_div(n, 2)))?;
    let mut tails: Vec<usize> = obop.optima.iter().map(|o| n - o.buckets().last().map_or(0, Vec::len)).collect();
    tails.sort_unstable();
    tails.dedup();
    row.insert("tail_matching".into(), joined(tails));
    for (col, groups) in [("fair_top80", "top:4/5"), ("fair_mod3", "mod:3")] {
        let spec = FairnessSpec::proportional(parse_groups(groups, n)?);
        row.insert(col.into(), fair_in_range(c, &spec, lo..=hi, cfg)?);
    }
    Ok(row)
}

/// Best fair value with the bucket count anywhere in `range`.
fn fair_in_range(
    c: &PairOrderMatrix,
    spec: &FairnessSpec,
    range: std::ops::RangeInclusive<usize>,
    cfg: &SolveConfig,
) -> Result<String> {
    let mut best: Option<SolveResult> = None;
    for p in range {
        let v = VariantSpec::Fair(FairVariant { fixed_p: Some(p), ..FairVariant::new(spec.clone()) });
        if v.validate(c.n()).is_err() {
            return Ok("-".into());
        }
        let r = solve(c, &v, cfg)?;
        if r.status == Status::Limit {
            return Ok(value(&r));
        }
        if r.objective.is_some() && best.as_ref().is_none_or(|b| r.objective < b.objective) {
            best = Some(r);
        }
    }
    Ok(best.map_or_else(|| "infeasible".into(), |b| value(&b)))
}

/// `column: expected X, got Y` for every listed column that differs.
pub fn mismatches(expected: &Row, measured: &Row, columns: &[&str]) -> Vec<String> {
    columns
        .iter()
        .filter_map(|&col| {
            let want = expected.get(col).map_or("", String::as_str);
            let got = measured.get(col).map_or("", String::as_str);
            (want != got).then(|| format!("{col}: expected {want}, got {got}"))
        })
        .collect()
}

/// Outcome for one instance of the reference table.
#[derive(Debug, Clone, PartialEq)]
pub enum RowCheck {
    Missing,
    Error(String),
    Checked(Vec<String>),
}

/// Measures one labelled instance from `dir` and compares the listed columns.
pub fn check_row(dir: &Path, expected: &Row, columns: &[&str], cfg: &SolveConfig) -> RowCheck {
    let label = expected.get("instance").map_or("", String::as_str);
    let Some(path) = find_profile(dir, label) else { return RowCheck::Missing };
    let run = || -> Result<Vec<String>> {
        let inst = load_profile_file(&path)?;
        let mut problems = Vec::new();
        for (col, got) in [("n", inst.matrix.n().to_string()), ("m", inst.voters.unwrap_or(0).to_string())] {
            if expected.get(col) != Some(&got) {
                problems.push(format!("{col}: expected {}, got {got}", expected.get(col).map_or("", String::as_str)));
            }
        }
        let (obop, mut measured) = measure_obop(&inst.matrix, cfg)?;
        if columns.iter().any(|c| VARIANT_COLUMNS.contains(c)) {
            measured.extend(measure_variants(&inst.matrix, &obop, cfg)?);
        }
        problems.extend(mismatches(expected, &measured, columns));
        Ok(problems)
    };
    match run().with_context(|| path.display().to_string()) {
        Ok(p) => RowCheck::Checked(p),
        Err(e) => RowCheck::Error(format!("{e:#}")),
    }
}
