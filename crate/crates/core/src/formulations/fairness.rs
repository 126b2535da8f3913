//! Consistency diagnostics for fairness parameters.

use std::fmt;

use num_traits::ToPrimitive;
use serde::Serialize;

use crate::rational::Rational;
use crate::variant::FairnessSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    LambdaSumExceedsOne,
    MuSumBelowOne,
    LambdaExceedsShare,
    MuBelowShare,
    LambdaCapsPrefix,
    MuCapsPrefix,
}

/// One warning, covering the prefix lengths `first..=last`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FairnessDiagnostic {
    pub kind: DiagnosticKind,
    /// 0-based group, when the warning concerns one group.
    pub group: Option<usize>,
    pub first: usize,
    pub last: usize,
    /// Offending value: the sum, the proportion, or the implied cap.
    pub value: Rational,
}

impl fmt::Display for FairnessDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = self.group.map_or(0, |g| g + 1);
        let v = &self.value;
        match self.kind {
            DiagnosticKind::LambdaSumExceedsOne => write!(f, "Σλ exceeds 1 ({v})")?,
            DiagnosticKind::MuSumBelowOne => write!(f, "Σμ below 1 ({v})")?,
            DiagnosticKind::LambdaExceedsShare => write!(f, "λ_in exceeds group share for group {g} ({v})")?,
            DiagnosticKind::MuBelowShare => write!(f, "μ_in below group share for group {g} ({v})")?,
            DiagnosticKind::LambdaCapsPrefix => write!(f, "λ of group {g} caps the prefix size at {v} items")?,
            DiagnosticKind::MuCapsPrefix => write!(f, "μ of group {g} caps the prefix size at {v} items")?,
        }
        if self.first == self.last {
            write!(f, " at prefix {}", self.first)
        } else {
            write!(f, " at prefixes {}..={}", self.first, self.last)
        }
    }
}

/// Flags proportion settings that cannot all be met. The caps are the largest
/// prefix sizes T for which S ≥ λT can be met by |G| items and T − S ≤ n − |G|
/// can be met under S ≤ μT. Never fails; groups are assumed to partition the items.
pub fn validate_fairness_params(spec: &FairnessSpec, n: usize) -> Vec<FairnessDiagnostic> {
    let mut out: Vec<FairnessDiagnostic> = Vec::new();
    let mut push = |kind, group, prefix, value: Rational| {
        if let Some(last) = out.last_mut() {
            if last.kind == kind && last.group == group && last.value == value && last.last + 1 == prefix {
                last.last = prefix;
                return;
            }
        }
        out.push(FairnessDiagnostic { kind, group, first: prefix, last: prefix, value });
    };
    let g = spec.group_count();
    let n_r = Rational::from_integer(n as i64);
    let one = Rational::one();

    for prefix in 1..=n {
        let lsum: Rational = (0..g).map(|i| spec.lambda(i, prefix)).sum();
        if lsum > one {
            push(DiagnosticKind::LambdaSumExceedsOne, None, prefix, lsum);
        }
    }
    for prefix in 1..=n {
        let msum: Rational = (0..g).map(|i| spec.mu(i, prefix)).sum();
        if msum < one {
            push(DiagnosticKind::MuSumBelowOne, None, prefix, msum);
        }
    }
    for i in 0..g {
        let size = spec.groups[i].len();
        let share = Rational::from_integer(size as i64) / &n_r;
        let l = spec.lambda(i, n);
        if l > share {
            push(DiagnosticKind::LambdaExceedsShare, Some(i), n, l);
        }
        let u = spec.mu(i, n);
        if u < share {
            push(DiagnosticKind::MuBelowShare, Some(i), n, u);
        }
        for prefix in 1..=n {
            let l = spec.lambda(i, prefix);
            if !l.is_zero() {
                let cap = (Rational::from_integer(size as i64) / &l).floor();
                if cap.to_usize().is_some_and(|c| c < n) {
                    push(DiagnosticKind::LambdaCapsPrefix, Some(i), prefix, Rational::from(cap));
                }
            }
        }
        for prefix in 1..=n {
            let u = spec.mu(i, prefix);
            if u < one {
                let cap = (Rational::from_integer((n - size.min(n)) as i64) / (&one - &u)).floor();
                if cap.to_usize().is_some_and(|c| c < n) {
                    push(DiagnosticKind::MuCapsPrefix, Some(i), prefix, Rational::from(cap));
                }
            }
        }
    }
    out
}
