//! Solver-agnostic integer linear programs.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::PairOrderMatrix;
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VarKind {
    Binary,
    Continuous,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: Rational,
    pub upper: Rational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        }
    }

    pub fn holds<T: PartialOrd>(self, lhs: &T, rhs: &T) -> bool {
        match self {
            Sense::Le => lhs <= rhs,
            Sense::Eq => lhs == rhs,
            Sense::Ge => lhs >= rhs,
        }
    }
}

/// A linear row stored with integer coefficients: rational rows are scaled by
/// the lowest common denominator and divided by the gcd when built.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(usize, i64)>,
    pub sense: Sense,
    pub rhs: i64,
}

/// Always minimized.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Objective {
    pub terms: Vec<(usize, Rational)>,
    pub constant: Rational,
}

/// Which formulation produced a model; drives [`encode_solution`](super::encode_solution).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum ModelKind {
    Base {
        no_ties: bool,
    },
    Assignment {
        p: usize,
    },
    Representative {
        p: usize,
    },
    Tcu {
        k: usize,
    },
    Fair {
        slots: usize,
    },
    /// Read back from a file; no encoding semantics.
    Parsed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ModelMeta {
    pub n: usize,
    pub kind: ModelKind,
    pub description: String,
    /// Present when the objective is the bucket-order distance, so that
    /// deviation variables can be encoded.
    #[serde(skip)]
    pub matrix: Option<PairOrderMatrix>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IlpModel {
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    pub objective: Objective,
    pub meta: ModelMeta,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl IlpModel {
    pub fn new(meta: ModelMeta) -> IlpModel {
        IlpModel {
            variables: Vec::new(),
            constraints: Vec::new(),
            objective: Objective::default(),
            meta,
            index: HashMap::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.meta.n
    }

    pub fn var(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn has_var(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn constraint(&self, name: &str) -> Option<&Constraint> {
        self.constraints.iter().find(|c| c.name == name)
    }

    pub fn binaries(&self) -> impl Iterator<Item = &Variable> {
        self.variables.iter().filter(|v| v.kind == VarKind::Binary)
    }

    pub fn add_var(&mut self, name: String, kind: VarKind, lower: Rational, upper: Rational) -> usize {
        assert!(!self.index.contains_key(&name), "duplicate variable {name}");
        let id = self.variables.len();
        self.index.insert(name.clone(), id);
        self.variables.push(Variable { name, kind, lower, upper });
        id
    }

    pub fn add_binary(&mut self, name: String) -> usize {
        self.add_var(name, VarKind::Binary, Rational::zero(), Rational::one())
    }

    pub fn add_unit_continuous(&mut self, name: String) -> usize {
        self.add_var(name, VarKind::Continuous, Rational::zero(), Rational::one())
    }

    /// Adds an integer row; zero coefficients are dropped and like terms merged.
    pub fn add_row(&mut self, name: String, terms: Vec<(usize, i64)>, sense: Sense, rhs: i64) {
        let mut merged: Vec<(usize, i64)> = Vec::with_capacity(terms.len());
        for (v, a) in terms {
            assert!(v < self.variables.len(), "row {name} references an undeclared variable");
            match merged.iter_mut().find(|(w, _)| *w == v) {
                Some(t) => t.1 += a,
                None => merged.push((v, a)),
            }
        }
        merged.retain(|(_, a)| *a != 0);
        self.constraints.push(Constraint { name, terms: merged, sense, rhs });
    }

    /// Adds a row with rational data, scaled to integers.
    pub fn add_rational_row(
        &mut self,
        name: String,
        terms: Vec<(usize, Rational)>,
        sense: Sense,
        rhs: Rational,
    ) -> Result<()> {
        let (ints, rhs) = scale_row(&terms, &rhs)
            .ok_or_else(|| Error::InvalidModel(format!("row {name} does not fit 64-bit coefficients")))?;
        self.add_row(name, ints, sense, rhs);
        Ok(())
    }

    pub(crate) fn rebuild_index(&mut self) {
        self.index = self.variables.iter().enumerate().map(|(i, v)| (v.name.clone(), i)).collect();
    }
}

impl fmt::Display for IlpModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} variables ({} binary), {} constraints",
            self.meta.description,
            self.variables.len(),
            self.binaries().count(),
            self.constraints.len()
        )
    }
}

/// Multiplies a rational row by the lcm of its denominators and divides by the
/// gcd of the resulting integers. Returns None on 64-bit overflow.
pub(crate) fn scale_row(terms: &[(usize, Rational)], rhs: &Rational) -> Option<(Vec<(usize, i64)>, i64)> {
    let denom = Rational::common_denominator(terms.iter().map(|(_, a)| a).chain(std::iter::once(rhs)));
    let mut ints: Vec<(usize, BigInt)> = terms.iter().map(|(v, a)| (*v, a.scaled_integer(&denom))).collect();
    let mut rhs_i = rhs.scaled_integer(&denom);
    let g = ints.iter().fold(rhs_i.clone(), |g, (_, a)| g.gcd(a));
    if !g.is_zero() {
        for (_, a) in ints.iter_mut() {
            *a /= &g;
        }
        rhs_i /= &g;
    }
    let out: Option<Vec<(usize, i64)>> = ints.into_iter().map(|(v, a)| a.to_i64().map(|a| (v, a))).collect();
    Some((out?, rhs_i.to_i64()?))
}
