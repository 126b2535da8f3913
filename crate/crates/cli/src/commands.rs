use std::fs;
use std::io::Write;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use weakrank::analysis::{
    fairness_trajectory, p_sweep, sweep_csv, tcu_sweep, trajectory_csv, SweepResult, TrajectoryRow,
};
use weakrank::formulations::{
    build_p_assignment_model, build_p_representative_model, build_variant_model, check_solution, encode_solution,
    export_lp, validate_fairness_params, AssignmentOptions, FairnessDiagnostic, IlpModel, RepresentativeOptions,
    SizeMode, TieInequality,
};
use weakrank::ingest::save_matrix_csv;
use weakrank::solver::brute_force_solve_capped;
use weakrank::{distance, BucketOrder, Rational, SolveResult, Status, VariantSpec};

use crate::args::{InputArgs, Instance, VariantKind};
use crate::bench::{parse_manifest, run_bench};
use crate::report::{
    exit_code, rows_csv, BenchRow, Method, SolveReport, EXIT_INFEASIBLE, EXIT_LIMIT, EXIT_OPTIMAL, FAIRNESS_SCHEMA,
    OPTIMA_SCHEMA, SWEEP_SCHEMA,
};
use crate::{
    BenchCmd, Cli, ExportCmd, FairnessCmd, Format, FormulationArg, IngestCmd, OracleCmd, SearchArgs, SolveCmd,
    SweepCmd, SweepOver, TieArg,
};

fn load(cli: &Cli, input: &InputArgs, err: &mut dyn Write) -> Result<Instance> {
    let inst = input.load(cli.seed)?;
    for w in &inst.warnings {
        writeln!(err, "warning: {}: {w}", inst.name)?;
    }
    Ok(inst)
}

fn write_json(out: &mut dyn Write, value: &impl Serialize) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn write_trace(search: &SearchArgs, r: &SolveResult) -> Result<()> {
    let Some(path) = &search.trace else { return Ok(()) };
    let mut text = String::new();
    for e in &r.trace {
        text.push_str(&serde_json::to_string(e)?);
        text.push('\n');
    }
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn write_solve(
    cli: &Cli,
    inst: &Instance,
    variant: &VariantSpec,
    method: Method,
    r: &SolveResult,
    out: &mut dyn Write,
) -> Result<i32> {
    let format = cli.format_or(Format::Json, &[Format::Json, Format::Text, Format::Csv])?;
    let report = SolveReport::new(inst, variant, method, r);
    match format {
        Format::Json => write_json(out, &report)?,
        Format::Text => write!(out, "{}", report.to_text())?,
        Format::Csv => {
            let row = BenchRow::solved(&inst.name, &inst.matrix, inst.voters, variant, r);
            write!(out, "{}", rows_csv(&[row])?)?;
        }
    }
    Ok(exit_code(r.status))
}

pub fn solve(cli: &Cli, cmd: &SolveCmd, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let inst = load(cli, &cmd.input, err)?;
    let variant = cmd.variant.spec(inst.matrix.n())?;
    let cfg = cli.solve_config(&cmd.search)?;
    let r = weakrank::solve(&inst.matrix, &variant, &cfg)?;
    log::debug!("{} nodes in {:.3}s", r.nodes, r.elapsed);
    write_trace(&cmd.search, &r)?;
    write_solve(cli, &inst, &variant, Method::Search, &r, out)
}

/// Default cap of the optima listing.
pub const OPTIMA_LIST_CAP: usize = 1000;

#[derive(Serialize)]
struct OptimaReport<'a> {
    schema: &'static str,
    instance: &'a str,
    variant: &'a VariantSpec,
    status: Status,
    objective: Option<&'a Rational>,
    objective_2dp: Option<String>,
    count: usize,
    complete: bool,
    optima: Vec<String>,
}

pub fn optima(cli: &Cli, cmd: &SolveCmd, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let format = cli.format_or(Format::Json, &[Format::Json, Format::Text, Format::Csv])?;
    let inst = load(cli, &cmd.input, err)?;
    let variant = cmd.variant.spec(inst.matrix.n())?;
    let mut cfg = cli.solve_config(&cmd.search)?;
    if cmd.search.optima_cap.is_none() {
        cfg.optima_cap = OPTIMA_LIST_CAP;
    }
    let r = weakrank::solve(&inst.matrix, &variant, &cfg)?;
    write_trace(&cmd.search, &r)?;
    if !r.optima_complete {
        writeln!(err, "warning: more than {} optima; list truncated", r.optima.len())?;
    }
    let optima: Vec<String> = r.optima.iter().map(ToString::to_string).collect();
    match format {
        Format::Json => write_json(
            out,
            &OptimaReport {
                schema: OPTIMA_SCHEMA,
                instance: &inst.name,
                variant: &variant,
                status: r.status,
                objective: r.objective.as_ref(),
                objective_2dp: r.objective.as_ref().map(|o| o.to_fixed(2)),
                count: optima.len(),
                complete: r.optima_complete,
                optima,
            },
        )?,
        Format::Text => {
            for o in optima {
                writeln!(out, "{o}")?;
            }
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["order", "buckets"])?;
            for o in &r.optima {
                w.write_record([o.to_string(), o.bucket_count().to_string()])?;
            }
            out.write_all(&w.into_inner()?)?;
        }
    }
    Ok(exit_code(r.status))
}

#[derive(Serialize)]
struct SweepReport<'a> {
    schema: &'static str,
    instance: &'a str,
    #[serde(flatten)]
    sweep: &'a SweepResult,
    unimodal: bool,
    interior_peaks: Vec<usize>,
}

pub fn sweep(cli: &Cli, cmd: &SweepCmd, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let format = cli.format_or(Format::Csv, &[Format::Csv, Format::Json, Format::Text])?;
    let inst = load(cli, &cmd.input, err)?;
    let n = inst.matrix.n();
    let range = cmd.from.unwrap_or(1)..=cmd.to.unwrap_or(n);
    let cfg = cli.solve_config(&cmd.search)?;
    if cfg.trace {
        bail!("--trace is not available for sweeps");
    }
    let s = match cmd.sweep {
        SweepOver::P => p_sweep(&inst.matrix, range, &cfg)?,
        SweepOver::K => tcu_sweep(&inst.matrix, range, &cfg)?,
    };
    let peaks = s.interior_peaks();
    let list = |v: &[usize]| v.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ");
    writeln!(err, "minima: {} = {}", s.param, list(&s.minima))?;
    if !s.is_unimodal() {
        writeln!(err, "not unimodal; interior peaks: {} = {}", s.param, list(&peaks))?;
    }
    match format {
        Format::Csv => write!(out, "{}", sweep_csv(&s)?)?,
        Format::Json => write_json(
            out,
            &SweepReport {
                schema: SWEEP_SCHEMA,
                instance: &inst.name,
                sweep: &s,
                unimodal: s.is_unimodal(),
                interior_peaks: peaks,
            },
        )?,
        Format::Text => {
            for p in &s.points {
                let v = p.objective.as_ref().map_or_else(|| p.status.to_string(), |o| o.to_fixed(2));
                let mark = if s.minima.contains(&p.param) { "  min" } else { "" };
                writeln!(out, "{} = {:>3}  {v}{mark}", s.param, p.param)?;
            }
        }
    }
    let limited = s.points.iter().any(|p| p.status == Status::Limit);
    Ok(if limited { EXIT_LIMIT } else { EXIT_OPTIMAL })
}

#[derive(Serialize)]
struct FairnessReport<'a> {
    schema: &'static str,
    instance: &'a str,
    order: String,
    objective: Rational,
    objective_2dp: String,
    within_bounds: bool,
    rows: &'a [TrajectoryRow],
    diagnostics: &'a [FairnessDiagnostic],
}

pub fn fairness(cli: &Cli, cmd: &FairnessCmd, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let format = cli.format_or(Format::Csv, &[Format::Csv, Format::Json])?;
    let inst = load(cli, &cmd.input, err)?;
    let n = inst.matrix.n();
    let spec = cmd.variant.fairness.spec(n)?;
    let diagnostics = validate_fairness_params(&spec, n);
    for d in &diagnostics {
        writeln!(err, "warning: {d}")?;
    }
    let order = match &cmd.order {
        Some(text) => {
            if cmd.variant.variant.is_some() || cmd.variant.variant_file.is_some() {
                bail!("--order cannot be combined with a variant to solve");
            }
            BucketOrder::parse(text)?
        }
        None => {
            let mut v = cmd.variant.clone();
            let kind = *v.variant.get_or_insert(VariantKind::Fair);
            if kind != VariantKind::Fair {
                v.fairness = Default::default();
            }
            let variant = v.spec(n)?;
            let r = weakrank::solve(&inst.matrix, &variant, &cli.solve_config(&cmd.search)?)?;
            write_trace(&cmd.search, &r)?;
            match r.optima.first() {
                Some(o) if r.status == Status::Optimal => o.clone(),
                _ => {
                    writeln!(err, "{}: {}", variant.describe(), r.status)?;
                    return Ok(exit_code(r.status));
                }
            }
        }
    };
    let objective = distance(&order, &inst.matrix)?;
    let t = fairness_trajectory(&order, &spec)?;
    writeln!(err, "order: {order}  objective: {}", objective.to_fixed(2))?;
    match format {
        Format::Json => write_json(
            out,
            &FairnessReport {
                schema: FAIRNESS_SCHEMA,
                instance: &inst.name,
                order: order.to_string(),
                objective_2dp: objective.to_fixed(2),
                objective,
                within_bounds: t.all_within_bounds(),
                rows: &t.rows,
                diagnostics: &diagnostics,
            },
        )?,
        _ => write!(out, "{}", trajectory_csv(&t)?)?,
    }
    Ok(EXIT_OPTIMAL)
}

/// The model written by `export`.
pub fn export_model(cmd: &ExportCmd, inst: &Instance) -> Result<IlpModel> {
    let variant = cmd.variant.spec(inst.matrix.n())?;
    let c = &inst.matrix;
    let assignment_flags = cmd.no_comp || cmd.no_trans || cmd.relax_x;
    let (p, sizes, equal) = match &variant {
        VariantSpec::FixedBuckets { p } => (*p, SizeMode::NonEmpty, None),
        VariantSpec::EqualSizes { p, q } => (*p, SizeMode::Equal(*q), Some(*q)),
        VariantSpec::PrescribedSizes { sizes } => (sizes.len(), SizeMode::Prescribed(sizes.clone()), None),
        _ => {
            if cmd.formulation.is_some() || assignment_flags || cmd.tie_inequality.is_some() {
                bail!("--formulation and its options apply to fixed-p, equal-sizes and prescribed only");
            }
            return Ok(build_variant_model(c, &variant)?);
        }
    };
    match cmd.formulation {
        None if assignment_flags || cmd.tie_inequality.is_some() => {
            bail!("formulation options need --formulation")
        }
        None => Ok(build_variant_model(c, &variant)?),
        Some(FormulationArg::Assignment) => {
            if cmd.tie_inequality.is_some() {
                bail!("--tie-inequality applies to the representative formulation");
            }
            let opts = AssignmentOptions {
                sizes,
                comparability: !cmd.no_comp,
                transitivity: !cmd.no_trans,
                relax_x: cmd.relax_x,
            };
            Ok(build_p_assignment_model(c, p, &opts)?)
        }
        Some(FormulationArg::Representative) => {
            if assignment_flags {
                bail!("--no-comp, --no-trans and --relax-x apply to the assignment formulation");
            }
            if matches!(sizes, SizeMode::Prescribed(_)) {
                bail!("the representative formulation has no prescribed sizes");
            }
            let tie_inequality = match cmd.tie_inequality.unwrap_or(TieArg::Omit) {
                TieArg::Omit => TieInequality::Omit,
                TieArg::Substitute => TieInequality::Substitute,
                TieArg::Add => TieInequality::Add,
            };
            Ok(build_p_representative_model(c, p, &RepresentativeOptions { tie_inequality, equal_size: equal })?)
        }
    }
}

/// `feasible <2dp> (<exact>)` or `infeasible: <reason>`.
pub fn check_verdict(model: &IlpModel, order: &BucketOrder) -> Result<(bool, String)> {
    let a = match encode_solution(order, model) {
        Ok(a) => a,
        Err(weakrank::Error::Incompatible(why)) => return Ok((false, format!("infeasible: {why}"))),
        Err(e) => return Err(e.into()),
    };
    let report = check_solution(model, &a)?;
    if report.feasible {
        return Ok((true, format!("feasible {} ({})", report.objective.to_fixed(2), report.objective)));
    }
    const SHOWN: usize = 8;
    let mut rows = report.violated.iter().take(SHOWN).cloned().collect::<Vec<_>>().join(", ");
    if report.violated.len() > SHOWN {
        rows.push_str(&format!(" and {} more", report.violated.len() - SHOWN));
    }
    Ok((false, format!("infeasible: violates {rows}")))
}

pub fn export(cli: &Cli, cmd: &ExportCmd, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    if cli.format.is_some() {
        bail!("export writes LP files only; --format does not apply");
    }
    let inst = load(cli, &cmd.input, err)?;
    let model = export_model(cmd, &inst)?;
    let lp = export_lp(&model);
    match &cmd.output {
        Some(path) => fs::write(path, &lp).with_context(|| format!("cannot write {}", path.display()))?,
        None => out.write_all(lp.as_bytes())?,
    }
    let Some(text) = &cmd.check else { return Ok(EXIT_OPTIMAL) };
    let order = BucketOrder::parse(text)?;
    let (ok, verdict) = check_verdict(&model, &order)?;
    let target: &mut dyn Write = if cmd.output.is_some() { out } else { err };
    writeln!(target, "{verdict}")?;
    Ok(if ok { EXIT_OPTIMAL } else { EXIT_INFEASIBLE })
}

pub fn bench(cli: &Cli, cmd: &BenchCmd, out: &mut dyn Write) -> Result<i32> {
    cli.format_or(Format::Csv, &[Format::Csv])?;
    let text = fs::read_to_string(&cmd.manifest).with_context(|| format!("cannot read {}", cmd.manifest.display()))?;
    let base = cmd.manifest.parent().unwrap_or(std::path::Path::new("."));
    let entries = parse_manifest(&text, base).with_context(|| cmd.manifest.display().to_string())?;
    let cfg = cli.solve_config(&SearchArgs::default())?;
    let jobs = cfg.workers;
    match &cmd.output {
        Some(path) => {
            let mut f = fs::File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
            run_bench(&entries, jobs, &cfg, &mut f)?;
        }
        None => {
            run_bench(&entries, jobs, &cfg, out)?;
        }
    }
    Ok(EXIT_OPTIMAL)
}

pub fn oracle(cli: &Cli, cmd: &OracleCmd, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let inst = load(cli, &cmd.input, err)?;
    let variant = cmd.variant.spec(inst.matrix.n())?;
    let r = brute_force_solve_capped(&inst.matrix, &variant, cmd.cap)?;
    write_solve(cli, &inst, &variant, Method::BruteForce, &r, out)
}

pub fn ingest(cli: &Cli, cmd: &IngestCmd, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    cli.format_or(Format::Csv, &[Format::Csv])?;
    let inst = load(cli, &cmd.input, err)?;
    let text = save_matrix_csv(&inst.matrix)?;
    match &cmd.output {
        Some(path) => fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(EXIT_OPTIMAL)
}
