//! Building the order one bucket at a time, best bucket first.
//!
//! Inside a bucket every remaining item is either put in or left out. Once
//! all are decided the bucket closes: its pairs with every later item are
//! final, so the cost of the future depends only on the items left and the
//! number of buckets placed. A memo on that pair prunes dominated prefixes.

use std::collections::HashMap;
use std::sync::Arc;

use num_traits::ToPrimitive;

use super::costs::{Costs, Weight};
use super::search::Space;
use crate::error::{Error, Result};
use crate::order::BucketOrder;
use crate::rational::Rational;
use crate::variant::VariantSpec;

pub const MAX_ITEMS: usize = 128;

type Set = u128;

fn count(s: Set) -> usize {
    s.count_ones() as usize
}

fn items(mut s: Set) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if s == 0 {
            None
        } else {
            let i = s.trailing_zeros() as usize;
            s &= s - 1;
            Some(i)
        }
    })
}

fn mask(list: &[usize]) -> Set {
    list.iter().fold(0, |m, &r| m | 1 << r)
}

#[derive(Debug)]
struct FairRules {
    slots: usize,
    fixed: bool,
    capacities: Option<Vec<usize>>,
    groups: Vec<Set>,
    /// `lo[i][prefix-1][t]` and `hi[...]`: admissible group counts for t items.
    lo: Vec<Vec<Vec<usize>>>,
    hi: Vec<Vec<Vec<usize>>>,
    /// (group, min, max) per bucket position and per prefix length.
    bucket_bounds: Vec<Vec<(usize, usize, usize)>>,
    prefix_bounds: Vec<Vec<(usize, usize, usize)>>,
}

#[derive(Debug)]
enum Rules {
    Free,
    Fixed(usize),
    Sizes(Vec<usize>),
    Tail { tail: usize, bounds: Vec<(Set, usize, usize)> },
    Fair(Box<FairRules>),
}

impl Rules {
    fn new(variant: &VariantSpec, n: usize) -> Rules {
        match variant {
            VariantSpec::Obop => Rules::Free,
            VariantSpec::FixedBuckets { p } => Rules::Fixed(*p),
            VariantSpec::EqualSizes { p, q } => Rules::Sizes(vec![*q; *p]),
            VariantSpec::PrescribedSizes { sizes } => Rules::Sizes(sizes.clone()),
            VariantSpec::Tcu { k, tail_bounds } => Rules::Tail {
                tail: n - k,
                bounds: tail_bounds.iter().map(|b| (mask(&b.items), b.min, b.max.unwrap_or(n))).collect(),
            },
            VariantSpec::Fair(f) => {
                let spec = &f.fairness;
                let slots = f.slots(n);
                let g = spec.group_count();
                let mut lo = vec![vec![vec![0; n + 1]; slots]; g];
                let mut hi = vec![vec![vec![0; n + 1]; slots]; g];
                for i in 0..g {
                    for prefix in 1..=slots {
                        for t in 0..=n {
                            let tr = Rational::from_integer(t as i64);
                            let a = (spec.lambda(i, prefix) * &tr).floor();
                            let b = (spec.mu(i, prefix) * &tr).ceil();
                            lo[i][prefix - 1][t] = a.to_usize().unwrap_or(usize::MAX);
                            hi[i][prefix - 1][t] = b.to_usize().unwrap_or(0).min(t);
                        }
                    }
                }
                let mut bucket_bounds = vec![Vec::new(); slots];
                for b in &spec.bucket_bounds {
                    bucket_bounds[b.index - 1].push((b.group - 1, b.min, b.max.unwrap_or(n)));
                }
                let mut prefix_bounds = vec![Vec::new(); slots];
                for b in &spec.prefix_bounds {
                    prefix_bounds[b.index - 1].push((b.group - 1, b.min, b.max.unwrap_or(n)));
                }
                Rules::Fair(Box::new(FairRules {
                    slots,
                    fixed: f.fixed_count(),
                    capacities: f.capacities.clone(),
                    groups: spec.groups.iter().map(|g| mask(g)).collect(),
                    lo,
                    hi,
                    bucket_bounds,
                    prefix_bounds,
                }))
            }
        }
    }

    /// Allowed sizes of the bucket at position `layer` (0-based) when `m`
    /// items remain.
    fn size_range(&self, m: usize, layer: usize) -> Option<(usize, usize)> {
        let fixed = |p: usize| {
            if layer >= p || m < p - layer {
                None
            } else if layer + 1 == p {
                Some((m, m))
            } else {
                Some((1, m - (p - layer - 1)))
            }
        };
        let sized = |q: &[usize]| q.get(layer).filter(|&&s| s <= m).map(|&s| (s, s));
        match self {
            Rules::Free => Some((1, m)),
            Rules::Fixed(p) => fixed(*p),
            Rules::Sizes(q) => sized(q),
            Rules::Tail { tail, .. } => match m.cmp(tail) {
                _ if *tail == 0 => Some((1, m)),
                std::cmp::Ordering::Equal => Some((m, m)),
                std::cmp::Ordering::Less => None,
                std::cmp::Ordering::Greater => Some((1, m - tail)),
            },
            Rules::Fair(f) => match &f.capacities {
                Some(q) => sized(q),
                None if f.fixed => fixed(f.slots),
                None if layer >= f.slots => None,
                None if layer + 1 == f.slots => Some((m, m)),
                None => Some((1, m)),
            },
        }
    }

    /// Conditions checked when the bucket `bucket` closes at position `layer`
    /// leaving `rest` unplaced.
    fn close_ok(&self, bucket: Set, rest: Set, layer: usize, n: usize) -> bool {
        match self {
            Rules::Tail { tail, bounds } => {
                if rest != 0 {
                    return true;
                }
                let tail_items = if *tail > 0 { bucket } else { 0 };
                bounds.iter().all(|&(m, lo, hi)| {
                    let c = count(tail_items & m);
                    lo <= c && c <= hi
                })
            }
            Rules::Fair(f) => {
                let within = |v: usize, lo: usize, hi: usize| lo <= v && v <= hi;
                let check_prefix = |prefix: usize, t: usize, placed: &dyn Fn(usize) -> usize| {
                    (0..f.groups.len()).all(|i| {
                        let s = placed(i);
                        within(s, f.lo[i][prefix - 1][t], f.hi[i][prefix - 1][t])
                    }) && f.prefix_bounds[prefix - 1].iter().all(|&(g, lo, hi)| within(placed(g), lo, hi))
                };
                let t = n - count(rest);
                let placed = |i: usize| count(f.groups[i] & !rest);
                if !f.bucket_bounds[layer].iter().all(|&(g, lo, hi)| within(count(bucket & f.groups[g]), lo, hi)) {
                    return false;
                }
                if !check_prefix(layer + 1, t, &placed) {
                    return false;
                }
                if rest == 0 {
                    let all = |i: usize| count(f.groups[i]);
                    for prefix in layer + 2..=f.slots {
                        if !f.bucket_bounds[prefix - 1].iter().all(|&(_, lo, _)| lo == 0) {
                            return false;
                        }
                        if !check_prefix(prefix, n, &all) {
                            return false;
                        }
                    }
                }
                true
            }
            _ => true,
        }
    }

    /// Part of the memo key besides the remaining items.
    fn layer_key(&self, layer: usize) -> u16 {
        match self {
            Rules::Fixed(_) | Rules::Fair(_) => layer as u16,
            _ => 0,
        }
    }
}

#[derive(Debug)]
struct Static<W> {
    costs: Costs<W>,
    rules: Rules,
    /// Items in the order they are decided within a bucket.
    sequence: Vec<usize>,
}

#[derive(Clone, Copy)]
struct Frame<W> {
    rest: Set,
    inside: Set,
    outside: Set,
    layer: usize,
    cursor: usize,
    closed: W,
    in_part: W,
    rest_min: W,
    buckets: usize,
}

#[derive(Clone, Copy)]
pub(crate) struct BucketMove {
    item: u8,
    inside: bool,
}

/// Dominance memo: best closed cost seen per (remaining items, layer key).
pub(crate) struct Memo<W> {
    map: HashMap<(Set, u16), W>,
}

impl<W> Default for Memo<W> {
    fn default() -> Memo<W> {
        Memo { map: HashMap::new() }
    }
}

const MEMO_CAP: usize = 1 << 20;

#[derive(Clone)]
pub(crate) struct BucketSpace<W: Weight> {
    st: Arc<Static<W>>,
    cur: Frame<W>,
    stack: Vec<Frame<W>>,
    closed: Vec<Set>,
}

impl<W: Weight> BucketSpace<W> {
    pub fn new(costs: Costs<W>, variant: &VariantSpec) -> Result<BucketSpace<W>> {
        let n = costs.n;
        if n > MAX_ITEMS {
            return Err(Error::Incompatible(format!("bucket search handles at most {MAX_ITEMS} items, got {n}")));
        }
        let rules = Rules::new(variant, n);
        // Items that gain most from going early are decided first.
        let lead = |x: usize| -> (W, W) {
            let (mut early, mut late) = (W::ZERO, W::ZERO);
            for y in (0..n).filter(|&y| y != x) {
                early += costs.before(x, y);
                late += costs.before(y, x);
            }
            (early, late)
        };
        let mut sequence: Vec<usize> = (0..n).collect();
        let scores: Vec<(W, W)> = (0..n).map(lead).collect();
        sequence.sort_by(|&a, &b| {
            let (ea, la) = scores[a];
            let (eb, lb) = scores[b];
            (ea + lb).cmp(&(eb + la)).then(a.cmp(&b))
        });
        let all: Set = if n == MAX_ITEMS { Set::MAX } else { (1 << n) - 1 };
        let rest_min = costs.utopian();
        Ok(BucketSpace {
            st: Arc::new(Static { costs, rules, sequence }),
            cur: Frame {
                rest: all,
                inside: 0,
                outside: 0,
                layer: 0,
                cursor: 0,
                closed: W::ZERO,
                in_part: W::ZERO,
                rest_min,
                buckets: 0,
            },
            stack: Vec::new(),
            closed: Vec::new(),
        })
    }

    fn undecided(&self) -> Set {
        self.cur.rest & !self.cur.inside & !self.cur.outside
    }

    fn next_item(&self) -> Option<(usize, usize)> {
        let und = self.undecided();
        self.st.sequence[self.cur.cursor..]
            .iter()
            .position(|&x| und >> x & 1 == 1)
            .map(|i| (self.cur.cursor + i, self.st.sequence[self.cur.cursor + i]))
    }

    /// Bound changes for putting x in the bucket or leaving it out:
    /// (in_part change, rest_min change) for each.
    fn deltas(&self, x: usize) -> ((W, W), W) {
        let c = &self.st.costs;
        let (mut add_in, mut sub_rest, mut add_out) = (W::ZERO, W::ZERO, W::ZERO);
        for y in items(self.cur.inside) {
            let was = c.tie(x, y).min(c.before(y, x));
            add_in += c.tie(x, y) - was;
            add_out += c.before(y, x) - was;
        }
        for y in items(self.cur.rest & !self.cur.inside & !(1 << x)) {
            sub_rest += c.min(x, y);
            if self.cur.outside >> y & 1 == 1 {
                add_in += c.before(x, y);
            } else {
                add_in += c.tie(x, y).min(c.before(x, y));
            }
        }
        ((add_in, sub_rest), add_out)
    }

    fn close(&mut self, memo: &mut Memo<W>) -> bool {
        let f = self.cur;
        let rest = f.outside;
        let n = self.st.costs.n;
        if !self.st.rules.close_ok(f.inside, rest, f.layer, n) {
            return false;
        }
        let closed = f.closed + f.in_part;
        let key = (rest, self.st.rules.layer_key(f.layer + 1));
        let room = memo.map.len() < MEMO_CAP;
        match memo.map.get_mut(&key) {
            Some(seen) if *seen < closed => return false,
            Some(seen) => *seen = closed,
            None if room => {
                memo.map.insert(key, closed);
            }
            None => {}
        }
        self.closed.truncate(f.buckets);
        self.closed.push(f.inside);
        self.cur = Frame {
            rest,
            inside: 0,
            outside: 0,
            layer: f.layer + 1,
            cursor: 0,
            closed,
            in_part: W::ZERO,
            rest_min: f.rest_min,
            buckets: f.buckets + 1,
        };
        true
    }
}

impl<W: Weight> Space<W> for BucketSpace<W> {
    type Move = BucketMove;
    type Scratch = Memo<W>;

    fn bound(&self) -> W {
        self.cur.closed + self.cur.in_part + self.cur.rest_min
    }

    fn is_complete(&self) -> bool {
        self.cur.rest == 0
    }

    fn order(&self) -> Option<BucketOrder> {
        let buckets = self.closed[..self.cur.buckets].iter().map(|&b| items(b).collect()).collect();
        BucketOrder::new(buckets).ok()
    }

    fn moves(&self, out: &mut Vec<(Self::Move, W)>) {
        let Some((lo, hi)) = self.st.rules.size_range(count(self.cur.rest), self.cur.layer) else { return };
        let Some((_, x)) = self.next_item() else { return };
        let inside = count(self.cur.inside);
        let open = count(self.undecided());
        let bound = self.bound();
        let ((add_in, sub_rest), add_out) = self.deltas(x);
        if inside < hi {
            let est = bound + add_in - sub_rest;
            out.push((BucketMove { item: x as u8, inside: true }, est));
        }
        if inside + open > lo {
            out.push((BucketMove { item: x as u8, inside: false }, bound + add_out));
        }
    }

    fn apply(&mut self, m: Self::Move, memo: &mut Memo<W>) -> bool {
        let x = m.item as usize;
        let saved = self.cur;
        let Some((idx, _)) = self.next_item() else { return false };
        let ((add_in, sub_rest), add_out) = self.deltas(x);
        if m.inside {
            self.cur.inside |= 1 << x;
            self.cur.in_part += add_in;
            self.cur.rest_min -= sub_rest;
        } else {
            self.cur.outside |= 1 << x;
            self.cur.in_part += add_out;
        }
        self.cur.cursor = idx + 1;
        if self.undecided() == 0 {
            let (lo, hi) = self.st.rules.size_range(count(saved.rest), saved.layer).unwrap_or((1, 0));
            let size = count(self.cur.inside);
            if size < lo.max(1) || size > hi || !self.close(memo) {
                self.cur = saved;
                return false;
            }
        }
        self.stack.push(saved);
        true
    }

    fn undo(&mut self) {
        self.cur = self.stack.pop().expect("undo without apply");
    }
}
