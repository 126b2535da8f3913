//! CPLEX-LP text export and a reader for the same dialect.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;

use super::model::{IlpModel, ModelKind, ModelMeta, Sense, VarKind};
use crate::error::{Error, Result};
use crate::rational::Rational;

const WRAP: usize = 200;
const SCALE_TAG: &str = "\\ objective scale:";

/// Smallest integer making every objective coefficient a terminating decimal.
fn objective_scale(model: &IlpModel) -> BigInt {
    let mut scale = BigInt::one();
    let coefs = model.objective.terms.iter().map(|(_, a)| a).chain(std::iter::once(&model.objective.constant));
    for a in coefs {
        let mut d = a.denom().clone();
        for f in [2u32, 5] {
            let f = BigInt::from(f);
            while d.is_multiple_of(&f) {
                d /= &f;
            }
        }
        scale = scale.lcm(&d);
    }
    scale
}

fn push_term(line: &mut String, out: &mut String, coef: &str, name: &str, first: bool) {
    let (sign, mag) = match coef.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("+", coef),
    };
    let piece = match (first, mag == "1" && !name.is_empty()) {
        (true, true) if sign == "+" => name.to_string(),
        (true, true) => format!("- {name}"),
        (true, false) if sign == "+" => format!("{mag} {name}").trim_end().to_string(),
        (true, false) => format!("- {mag} {name}").trim_end().to_string(),
        (false, true) => format!(" {sign} {name}"),
        (false, false) => format!(" {sign} {mag} {name}").trim_end().to_string(),
    };
    if line.len() + piece.len() > WRAP {
        out.push_str(line);
        out.push('\n');
        line.clear();
        line.push_str("   ");
    }
    line.push_str(&piece);
}

/// Renders the model. Rows are integer already; a non-decimal objective is
/// multiplied by an integer scale recorded in a comment.
pub fn export_lp(model: &IlpModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "\\ {}", model.meta.description);
    let _ = writeln!(out, "\\ items: {}", model.n());
    let scale = objective_scale(model);
    if !scale.is_one() {
        let _ = writeln!(out, "{SCALE_TAG} {scale}");
    }
    let scale_r = Rational::from(scale);
    out.push_str("Minimize\n");
    let mut line = String::from(" obj: ");
    let mut first = true;
    for (v, a) in &model.objective.terms {
        let coef = (a * &scale_r).to_exact_decimal().expect("scaled to a decimal");
        push_term(&mut line, &mut out, &coef, &model.variables[*v].name, first);
        first = false;
    }
    if !model.objective.constant.is_zero() || first {
        let coef = (&model.objective.constant * &scale_r).to_exact_decimal().expect("scaled to a decimal");
        push_term(&mut line, &mut out, &coef, "", first);
    }
    out.push_str(&line);
    out.push('\n');

    out.push_str("Subject To\n");
    for row in &model.constraints {
        let mut line = format!(" {}: ", row.name);
        if row.terms.is_empty() {
            line.push('0');
        }
        for (i, (v, a)) in row.terms.iter().enumerate() {
            push_term(&mut line, &mut out, &a.to_string(), &model.variables[*v].name, i == 0);
        }
        let _ = write!(line, " {} {}", row.sense.symbol(), row.rhs);
        out.push_str(&line);
        out.push('\n');
    }

    out.push_str("Bounds\n");
    for v in model.variables.iter().filter(|v| v.kind == VarKind::Continuous) {
        let lo = v.lower.to_exact_decimal().unwrap_or_else(|| v.lower.to_string());
        let hi = v.upper.to_exact_decimal().unwrap_or_else(|| v.upper.to_string());
        let _ = writeln!(out, " {lo} <= {} <= {hi}", v.name);
    }
    let bins: Vec<&str> = model.binaries().map(|v| v.name.as_str()).collect();
    if !bins.is_empty() {
        out.push_str("Binaries\n");
        let mut line = String::from(" ");
        for name in bins {
            if line.len() + name.len() + 1 > WRAP {
                out.push_str(line.trim_end());
                out.push('\n');
                line = String::from(" ");
            }
            line.push_str(name);
            line.push(' ');
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out.push_str("End\n");
    out
}

#[derive(PartialEq, Clone, Copy)]
enum Section {
    Preamble,
    Objective,
    Rows,
    Bounds,
    Binaries,
    Done,
}

fn perr(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

struct Expr {
    terms: Vec<(String, Rational)>,
    constant: Rational,
}

fn parse_expr(text: &str, line: usize) -> Result<Expr> {
    let mut terms = Vec::new();
    let mut constant = Rational::zero();
    let mut sign = Rational::one();
    let mut coef: Option<Rational> = None;
    for tok in text.split_whitespace() {
        match tok {
            "+" => sign = Rational::one(),
            "-" => sign = -Rational::one(),
            _ => {
                if let Ok(v) = tok.parse::<Rational>() {
                    if let Some(c) = coef.take() {
                        constant += &sign * &c;
                        sign = Rational::one();
                    }
                    coef = Some(v);
                } else if tok.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_') {
                    let c = coef.take().unwrap_or_else(Rational::one);
                    terms.push((tok.to_string(), &sign * &c));
                    sign = Rational::one();
                } else {
                    return Err(perr(line, format!("unexpected token `{tok}`")));
                }
            }
        }
    }
    if let Some(c) = coef {
        constant += &sign * &c;
    }
    Ok(Expr { terms, constant })
}

/// Reads the dialect written by [`export_lp`]. The result has no encoding
/// semantics but can be checked against assignments by variable name.
pub fn parse_lp(text: &str) -> Result<IlpModel> {
    let mut section = Section::Preamble;
    let mut scale = Rational::one();
    let mut n = 0usize;
    let mut description = String::from("parsed model");
    let mut objective: Vec<String> = Vec::new();
    let mut rows: Vec<(usize, String)> = Vec::new();
    let mut bounds: Vec<(usize, String)> = Vec::new();
    let mut binaries: Vec<String> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if let Some(rest) = line.strip_prefix(SCALE_TAG) {
            scale = rest.trim().parse().map_err(|_| perr(line_no, "bad objective scale"))?;
            continue;
        }
        if let Some(rest) = line.strip_prefix("\\ items:") {
            n = rest.trim().parse().map_err(|_| perr(line_no, "bad item count"))?;
            continue;
        }
        if let Some(rest) = line.strip_prefix('\\') {
            if idx == 0 {
                description = rest.trim().to_string();
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let lower = line.to_ascii_lowercase();
        let next = match lower.as_str() {
            "minimize" | "minimum" | "min" => Some(Section::Objective),
            "subject to" | "such that" | "st" | "s.t." => Some(Section::Rows),
            "bounds" => Some(Section::Bounds),
            "binaries" | "binary" | "bin" => Some(Section::Binaries),
            "end" => Some(Section::Done),
            _ => None,
        };
        if let Some(s) = next {
            section = s;
            continue;
        }
        match section {
            Section::Preamble => return Err(perr(line_no, "content before `Minimize`")),
            Section::Objective => objective.push(line.to_string()),
            Section::Rows => {
                // A line starting without `name:` continues the previous row.
                let starts_row = line.split_once(':').is_some_and(|(h, _)| !h.contains(' '));
                match rows.last_mut() {
                    Some((_, prev)) if !starts_row => {
                        prev.push(' ');
                        prev.push_str(line);
                    }
                    _ => rows.push((line_no, line.to_string())),
                }
            }
            Section::Bounds => bounds.push((line_no, line.to_string())),
            Section::Binaries => binaries.extend(line.split_whitespace().map(str::to_string)),
            Section::Done => return Err(perr(line_no, "content after `End`")),
        }
    }
    if section != Section::Done {
        return Err(perr(text.lines().count(), "missing `End`"));
    }

    let mut model = IlpModel::new(ModelMeta { n, kind: ModelKind::Parsed, description, matrix: None });
    let ensure = |model: &mut IlpModel, name: &str, binary: bool| -> usize {
        match model.var(name) {
            Some(v) => v,
            None if binary => model.add_binary(name.to_string()),
            None => model.add_var(name.to_string(), VarKind::Continuous, Rational::zero(), Rational::one()),
        }
    };
    for name in &binaries {
        ensure(&mut model, name, true);
    }
    for (line_no, b) in &bounds {
        let parts: Vec<&str> = b.split("<=").map(str::trim).collect();
        if parts.len() != 3 {
            return Err(perr(*line_no, "expected `lo <= name <= hi`"));
        }
        let lo: Rational = parts[0].parse().map_err(|_| perr(*line_no, "bad lower bound"))?;
        let hi: Rational = parts[2].parse().map_err(|_| perr(*line_no, "bad upper bound"))?;
        let v = ensure(&mut model, parts[1], false);
        model.variables[v].lower = lo;
        model.variables[v].upper = hi;
    }

    let obj_text = objective.join(" ");
    let obj_body = obj_text.split_once(':').map_or(obj_text.as_str(), |(_, b)| b);
    let expr = parse_expr(obj_body, 1)?;
    for (name, a) in expr.terms {
        let v = ensure(&mut model, &name, false);
        model.objective.terms.push((v, a / &scale));
    }
    model.objective.constant = expr.constant / &scale;

    for (line_no, row) in rows {
        let (name, body) = row.split_once(':').ok_or_else(|| perr(line_no, "row without a name"))?;
        let (sense, op) = if body.contains("<=") {
            (Sense::Le, "<=")
        } else if body.contains(">=") {
            (Sense::Ge, ">=")
        } else if body.contains('=') {
            (Sense::Eq, "=")
        } else {
            return Err(perr(line_no, "row without a sense"));
        };
        let (lhs, rhs) = body.split_once(op).expect("operator present");
        let lhs = parse_expr(lhs, line_no)?;
        let rhs: Rational =
            rhs.trim().parse().map_err(|_| perr(line_no, format!("bad right-hand side `{}`", rhs.trim())))?;
        let mut terms = Vec::with_capacity(lhs.terms.len());
        for (vname, a) in lhs.terms {
            terms.push((ensure(&mut model, &vname, false), a));
        }
        model.add_rational_row(name.trim().to_string(), terms, sense, rhs - lhs.constant)?;
    }
    model.rebuild_index();
    Ok(model)
}
