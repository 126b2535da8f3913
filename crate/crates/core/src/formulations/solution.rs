//! Encoding bucket orders as variable assignments and checking them.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::Serialize;

use super::build::{alpha_name, beta_name, d_name, x_name, y_name, z_name};
use super::model::{IlpModel, ModelKind, Sense, VarKind};
use crate::error::{Error, Result};
use crate::order::{BucketOrder, Relation};
use crate::rational::Rational;

/// Variable values by name.
pub type Assignment = HashMap<String, Rational>;

fn flag(b: bool) -> Rational {
    if b {
        Rational::one()
    } else {
        Rational::zero()
    }
}

/// Maps a bucket order to values for every variable of `model`.
///
/// x_rs = 1 when r is before or tied with s; y_ru = 1 when r is in bucket u;
/// a_r = 1 for the highest-index item of each bucket and b_rs = 1 when that
/// item is s; z_r = 1 for the collapsed tail; d_rs = |b_rs − c_rs|.
pub fn encode_solution(order: &BucketOrder, model: &IlpModel) -> Result<Assignment> {
    let n = model.n();
    if order.n() != n {
        return Err(Error::Dimension { expected: n, found: order.n() });
    }
    let p = order.bucket_count();
    match model.meta.kind {
        ModelKind::Parsed => {
            return Err(Error::Incompatible("model read from a file has no encoding rules".into()));
        }
        ModelKind::Assignment { p: slots } | ModelKind::Fair { slots } if p > slots => {
            return Err(Error::Incompatible(format!("order has {p} buckets, model has {slots} bucket positions")));
        }
        ModelKind::Representative { p: want } if p != want => {
            return Err(Error::Incompatible(format!("order has {p} buckets, model fixes p = {want}")));
        }
        _ => {}
    }
    let tail: Option<&[usize]> = match model.meta.kind {
        ModelKind::Tcu { k } if k < n => Some(order.buckets().last().expect("non-empty")),
        _ => None,
    };
    let reps: Vec<usize> = (0..n).map(|r| *order.buckets()[order.bucket_of(r)].last().expect("non-empty")).collect();

    let mut out = Assignment::with_capacity(model.variables.len());
    for r in 0..n {
        for s in 0..n {
            if r != s {
                let name = x_name(r, s);
                if model.has_var(&name) {
                    out.insert(name, flag(order.relation(r, s) != Relation::After));
                }
            }
        }
        for u in 0..n {
            let name = y_name(r, u);
            if model.has_var(&name) {
                out.insert(name, flag(order.bucket_of(r) == u));
            }
        }
        let a = alpha_name(r);
        if model.has_var(&a) {
            out.insert(a, flag(reps[r] == r));
        }
        for s in r + 1..n {
            let b = beta_name(r, s);
            if model.has_var(&b) {
                out.insert(b, flag(reps[r] == s));
            }
        }
        let z = z_name(r);
        if model.has_var(&z) {
            out.insert(z, flag(tail.is_some_and(|t| t.contains(&r))));
        }
    }
    if let Some(c) = &model.meta.matrix {
        for r in 0..n {
            for s in r + 1..n {
                let name = d_name(r, s);
                if model.has_var(&name) {
                    out.insert(name, (order.relation(r, s).value() - c.get(r, s)).abs());
                }
            }
        }
    }
    for v in &model.variables {
        if !out.contains_key(&v.name) {
            return Err(Error::Incompatible(format!("no encoding rule for variable `{}`", v.name)));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub feasible: bool,
    /// Names of violated rows, plus `bound:<var>` and `integrality:<var>` entries.
    pub violated: Vec<String>,
    pub objective: Rational,
}

enum Value {
    Int(i64),
    Frac(Rational),
}

/// Evaluates every row, bound and integrality requirement exactly.
pub fn check_solution(model: &IlpModel, assignment: &Assignment) -> Result<CheckReport> {
    let mut values = Vec::with_capacity(model.variables.len());
    let mut violated = Vec::new();
    for v in &model.variables {
        let val = assignment.get(&v.name).ok_or_else(|| Error::MissingVariable(v.name.clone()))?;
        if *val < v.lower || *val > v.upper {
            violated.push(format!("bound:{}", v.name));
        }
        if v.kind == VarKind::Binary && !val.is_integer() {
            violated.push(format!("integrality:{}", v.name));
        }
        values.push(match (val.is_integer(), val.numer().to_i64()) {
            (true, Some(i)) => Value::Int(i),
            _ => Value::Frac(val.clone()),
        });
    }
    for row in &model.constraints {
        let mut int_sum: i128 = 0;
        let mut frac_sum: Option<Rational> = None;
        for &(v, a) in &row.terms {
            match &values[v] {
                Value::Int(x) => int_sum += a as i128 * *x as i128,
                Value::Frac(x) => {
                    let term = x * &Rational::from_integer(a);
                    frac_sum = Some(frac_sum.map_or(term.clone(), |s| s + term));
                }
            }
        }
        let ok = match frac_sum {
            None => row.sense.holds(&int_sum, &(row.rhs as i128)),
            Some(f) => {
                let lhs = f + Rational::from(BigInt::from(int_sum));
                row.sense.holds(&lhs, &Rational::from_integer(row.rhs))
            }
        };
        if !ok {
            violated.push(row.name.clone());
        }
    }
    let mut objective = model.objective.constant.clone();
    for (v, a) in &model.objective.terms {
        match &values[*v] {
            Value::Int(0) => {}
            Value::Int(x) => objective += a * &Rational::from_integer(*x),
            Value::Frac(x) => objective += a * x,
        }
    }
    Ok(CheckReport { feasible: violated.is_empty(), violated, objective })
}

/// Encodes and checks in one step; orders that cannot be encoded are infeasible.
pub fn order_feasible(model: &IlpModel, order: &BucketOrder) -> Result<Option<Rational>> {
    match encode_solution(order, model) {
        Ok(a) => {
            let report = check_solution(model, &a)?;
            Ok(report.feasible.then_some(report.objective))
        }
        Err(Error::Incompatible(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

fn x_values(model: &IlpModel, assignment: &Assignment) -> Result<Vec<(usize, bool)>> {
    let mut out = Vec::new();
    for (i, v) in model.variables.iter().enumerate() {
        if !v.name.starts_with("x_") {
            continue;
        }
        let val = assignment.get(&v.name).ok_or_else(|| Error::MissingVariable(v.name.clone()))?;
        let bit = if val.is_zero() {
            false
        } else if *val == Rational::one() {
            true
        } else {
            return Err(Error::InvalidModel(format!("{} = {val} is not binary", v.name)));
        };
        out.push((i, bit));
    }
    Ok(out)
}

/// Returns a copy of `model` with a row excluding the x-part of `assignment`:
/// Σ_{x̂=0} x − Σ_{x̂=1} x ≥ 1 − |{x̂ = 1}|.
pub fn add_exclusion_cut(model: &IlpModel, assignment: &Assignment) -> Result<IlpModel> {
    let xs = x_values(model, assignment)?;
    let ones = xs.iter().filter(|(_, b)| *b).count() as i64;
    let terms = xs.iter().map(|&(v, b)| (v, if b { -1 } else { 1 })).collect();
    let mut out = model.clone();
    let id = out.constraints.iter().filter(|c| c.name.starts_with("cut_")).count() + 1;
    out.add_row(format!("cut_{id}"), terms, Sense::Ge, 1 - ones);
    Ok(out)
}

/// Restricts a base model to the linear extensions of `order`: comparability
/// becomes equality and x_rs = 1 wherever `order` ranks r strictly first.
pub fn fix_consistent_permutation(model: &IlpModel, order: &BucketOrder) -> Result<IlpModel> {
    let n = model.n();
    if order.n() != n {
        return Err(Error::Dimension { expected: n, found: order.n() });
    }
    let mut out = model.clone();
    for r in 0..n {
        for s in r + 1..n {
            let name = format!("comp_{}_{}", r + 1, s + 1);
            match out.constraints.iter_mut().find(|c| c.name == name) {
                Some(row) => row.sense = Sense::Eq,
                None => {
                    let terms = vec![(var(&out, &x_name(r, s))?, 1), (var(&out, &x_name(s, r))?, 1)];
                    out.add_row(name, terms, Sense::Eq, 1);
                }
            }
        }
    }
    for r in 0..n {
        for s in 0..n {
            if r != s && order.relation(r, s) == Relation::Before {
                let v = var(&out, &x_name(r, s))?;
                out.add_row(format!("fix_{}_{}", r + 1, s + 1), vec![(v, 1)], Sense::Eq, 1);
            }
        }
    }
    if let ModelKind::Base { .. } = out.meta.kind {
        out.meta.kind = ModelKind::Base { no_ties: true };
    }
    out.meta.description.push_str(" (fixed to a consistent permutation)");
    Ok(out)
}

fn var(model: &IlpModel, name: &str) -> Result<usize> {
    model.var(name).ok_or_else(|| Error::MissingVariable(name.to_string()))
}

/// Every 0/1 vector over the binary variables, continuous variables unset.
/// Only for tiny models.
pub fn binary_points(model: &IlpModel) -> Result<Vec<Assignment>> {
    let bins: Vec<&str> = model.binaries().map(|v| v.name.as_str()).collect();
    if bins.len() > 20 {
        return Err(Error::InvalidModel(format!("{} binaries are too many to enumerate", bins.len())));
    }
    let mut out = Vec::with_capacity(1 << bins.len());
    for mask in 0u32..(1 << bins.len()) {
        let a: Assignment =
            bins.iter().enumerate().map(|(i, name)| (name.to_string(), flag(mask >> i & 1 == 1))).collect();
        out.push(a);
    }
    Ok(out)
}

/// Sets every continuous deviation variable to its smallest feasible value
/// for the given x values, as an optimizing solver would.
pub fn fill_deviations(model: &IlpModel, assignment: &mut Assignment) {
    let Some(c) = &model.meta.matrix else { return };
    let n = model.n();
    for r in 0..n {
        for s in r + 1..n {
            let name = d_name(r, s);
            if !model.has_var(&name) {
                continue;
            }
            let get = |k: String| assignment.get(&k).cloned().unwrap_or_else(Rational::zero);
            let b = (get(x_name(r, s)) - get(x_name(s, r)) + Rational::one()) / Rational::from_integer(2);
            assignment.insert(name, (b - c.get(r, s)).abs());
        }
    }
}
