//! Benchmark manifests: one instance per line, `name path variant params timelimit`.
//!
//! Blank lines and lines starting with `#` are skipped. Paths are relative to
//! the manifest, `params` is `-` or `key=value` pairs separated by `;`, and
//! `timelimit` is seconds or `-` for the global limit.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use clap::ValueEnum;
use weakrank::{solve, SolveConfig};

use crate::args::{load_path, VariantArgs, VariantKind};
use crate::report::BenchRow;

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub line: usize,
    pub name: String,
    pub path: PathBuf,
    pub variant: String,
    pub params: String,
    pub time_limit: Option<Duration>,
}

/// Parses a manifest; `base` resolves relative paths.
pub fn parse_manifest(text: &str, base: &Path) -> Result<Vec<ManifestEntry>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [name, path, variant, params, limit] = fields[..] else {
            bail!("line {}: expected `name path variant params timelimit`, found {} fields", i + 1, fields.len());
        };
        let time_limit = match limit {
            "-" => None,
            s => {
                let secs: f64 = s.parse().map_err(|_| anyhow!("line {}: bad time limit `{s}`", i + 1))?;
                if !(secs > 0.0 && secs.is_finite()) {
                    bail!("line {}: time limit must be positive", i + 1);
                }
                Some(Duration::from_secs_f64(secs))
            }
        };
        let path = Path::new(path);
        out.push(ManifestEntry {
            line: i + 1,
            name: name.into(),
            path: if path.is_absolute() { path.into() } else { base.join(path) },
            variant: variant.into(),
            params: params.into(),
            time_limit,
        });
    }
    Ok(out)
}

fn run_entry(e: &ManifestEntry, cfg: &SolveConfig) -> Result<BenchRow> {
    let kind = VariantKind::from_str(&e.variant, true).map_err(|_| anyhow!("unknown variant `{}`", e.variant))?;
    let inst = load_path(&e.path)?;
    let variant = VariantArgs::from_params(kind, &e.params)?.spec(inst.matrix.n())?;
    let cfg = SolveConfig { time_limit: e.time_limit.or(cfg.time_limit), ..cfg.clone() };
    let r = solve(&inst.matrix, &variant, &cfg)?;
    Ok(BenchRow::solved(&e.name, &inst.matrix, inst.voters, &variant, &r))
}

/// Solves every entry, at most `jobs` at a time, and writes one CSV row per
/// entry in manifest order as soon as all earlier rows are done. Failures
/// become rows with status `error`.
pub fn run_bench(
    entries: &[ManifestEntry],
    jobs: usize,
    cfg: &SolveConfig,
    out: &mut dyn Write,
) -> Result<Vec<BenchRow>> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(BenchRow::HEADER)?;
    w.flush()?;
    let threads = jobs.max(1).min(entries.len().max(1));
    let cfg = SolveConfig { workers: (jobs.max(1) / threads).max(1), ..cfg.clone() };
    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel::<(usize, BenchRow)>();
    let mut rows = Vec::with_capacity(entries.len());
    std::thread::scope(|scope| -> Result<()> {
        for _ in 0..threads {
            let tx = tx.clone();
            let (next, cfg) = (&next, &cfg);
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(e) = entries.get(i) else { break };
                log::info!("{} ({}) started", e.name, e.variant);
                let row = run_entry(e, cfg)
                    .unwrap_or_else(|err| BenchRow::failed(&e.name, &e.variant, format!("line {}: {err:#}", e.line)));
                if tx.send((i, row)).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        let mut pending = BTreeMap::new();
        for (i, row) in rx {
            pending.insert(i, row);
            while let Some(row) = pending.remove(&rows.len()) {
                w.write_record(row.record())?;
                w.flush()?;
                rows.push(row);
            }
        }
        Ok(())
    })?;
    w.flush().context("writing bench output")?;
    Ok(rows)
}
