//! Starting orders for the search: items ranked by net score, then cut into
//! contiguous buckets by dynamic programming.

use super::costs::{Costs, Weight};
use crate::order::BucketOrder;
use crate::variant::VariantSpec;

/// Candidate orders shaped for `variant`. They are not guaranteed to be
/// admitted; the caller filters them.
pub(crate) fn seeds<W: Weight>(costs: &Costs<W>, variant: &VariantSpec) -> Vec<BucketOrder> {
    let n = costs.n;
    if n == 0 {
        return Vec::new();
    }
    let perm = ranking(costs);
    let cuts = Segments::new(costs, &perm);
    let sizes = match variant {
        VariantSpec::Obop => cuts.best(n, None),
        VariantSpec::FixedBuckets { p } => cuts.best(n, Some(*p)),
        VariantSpec::EqualSizes { p, q } => Some(vec![*q; *p]),
        VariantSpec::PrescribedSizes { sizes } => Some(sizes.clone()),
        VariantSpec::Tcu { k, .. } if *k >= n => cuts.best(n, None),
        VariantSpec::Tcu { k, .. } => cuts.best(*k, None).map(|mut s| {
            s.push(n - k);
            s
        }),
        VariantSpec::Fair(f) => match (&f.capacities, f.fixed_p) {
            (Some(c), _) => Some(c.clone()),
            (None, Some(p)) => cuts.best(n, Some(p)),
            (None, None) => cuts.best(n, None),
        },
    };
    sizes.and_then(|s| cut(&perm, &s)).into_iter().collect()
}

/// Items by decreasing Σ_y (cost of y before x − cost of x before y).
fn ranking<W: Weight>(costs: &Costs<W>) -> Vec<usize> {
    let n = costs.n;
    let score: Vec<W> = (0..n)
        .map(|x| {
            let mut s = W::ZERO;
            for y in (0..n).filter(|&y| y != x) {
                s += costs.before(y, x);
                s -= costs.before(x, y);
            }
            s
        })
        .collect();
    let mut perm: Vec<usize> = (0..n).collect();
    perm.sort_by(|&a, &b| score[b].cmp(&score[a]).then(a.cmp(&b)));
    perm
}

fn cut(perm: &[usize], sizes: &[usize]) -> Option<BucketOrder> {
    if sizes.iter().sum::<usize>() != perm.len() || sizes.contains(&0) {
        return None;
    }
    let mut buckets = Vec::with_capacity(sizes.len());
    let mut at = 0;
    for &s in sizes {
        buckets.push(perm[at..at + s].to_vec());
        at += s;
    }
    BucketOrder::new(buckets).ok()
}

/// Extra cost of tying each contiguous run of the ranking instead of keeping
/// it strict.
struct Segments<W> {
    n: usize,
    /// `tie[i * (n + 1) + j]` for the run `i..j`.
    tie: Vec<W>,
}

impl<W: Weight> Segments<W> {
    fn new(costs: &Costs<W>, perm: &[usize]) -> Segments<W> {
        let n = perm.len();
        let w = n + 1;
        let mut tie = vec![W::ZERO; w * w];
        for i in (0..n).rev() {
            let mut row = W::ZERO;
            for j in i + 1..=n {
                if j > i + 1 {
                    let (a, b) = (perm[i], perm[j - 1]);
                    row += costs.tie(a, b);
                    row -= costs.before(a, b);
                }
                tie[i * w + j] = tie[(i + 1) * w + j] + row;
            }
        }
        Segments { n, tie }
    }

    fn run(&self, i: usize, j: usize) -> W {
        self.tie[i * (self.n + 1) + j]
    }

    /// Bucket sizes of the cheapest cut of the first `len` ranked items,
    /// optionally into exactly `p` buckets.
    fn best(&self, len: usize, p: Option<usize>) -> Option<Vec<usize>> {
        if len == 0 || p.is_some_and(|p| p == 0 || p > len) {
            return None;
        }
        let layers = p.unwrap_or(1);
        // value[q][j]: best cut of the first j items into q + 1 buckets (or any count).
        let mut value: Vec<Vec<Option<W>>> = vec![vec![None; len + 1]; layers];
        let mut from = vec![vec![0usize; len + 1]; layers];
        for j in 1..=len {
            value[0][j] = Some(self.run(0, j));
        }
        for q in 0..layers {
            for j in 1..=len {
                for i in 1..j {
                    let prev = if p.is_some() {
                        if q == 0 {
                            continue;
                        }
                        value[q - 1][i]
                    } else {
                        value[q][i]
                    };
                    let Some(prev) = prev else { continue };
                    let v = prev + self.run(i, j);
                    if value[q][j].is_none_or(|cur| v < cur) {
                        value[q][j] = Some(v);
                        from[q][j] = i;
                    }
                }
            }
        }
        value[layers - 1][len]?;
        let mut sizes = Vec::new();
        let (mut q, mut j) = (layers - 1, len);
        while j > 0 {
            let i = from[q][j];
            sizes.push(j - i);
            j = i;
            if p.is_some() && q > 0 {
                q -= 1;
            }
        }
        sizes.reverse();
        Some(sizes)
    }
}
