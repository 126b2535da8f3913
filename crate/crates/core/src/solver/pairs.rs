//! Branching on the relation of one pair of items at a time.
//!
//! Decided relations are closed under composition: x R y and y S z fix x∘z
//! whenever the composition is a single relation. For the three relations of
//! a weak order this keeps every remaining choice extendable, so the search
//! never reaches a dead end.

use std::sync::Arc;

use super::costs::{Costs, Weight};
use super::search::Space;
use crate::order::{BucketOrder, Relation};
use crate::variant::VariantSpec;

const UNKNOWN: u8 = 0;
const BEFORE: u8 = 1;
const TIE: u8 = 2;
const AFTER: u8 = 3;

fn code(rel: Relation) -> u8 {
    match rel {
        Relation::Before => BEFORE,
        Relation::Tie => TIE,
        Relation::After => AFTER,
    }
}

fn reverse(code: u8) -> u8 {
    match code {
        BEFORE => AFTER,
        AFTER => BEFORE,
        c => c,
    }
}

/// x∘y when it is a single relation, else UNKNOWN.
fn compose(a: u8, b: u8) -> u8 {
    match (a, b) {
        (TIE, c) | (c, TIE) => c,
        (BEFORE, BEFORE) => BEFORE,
        (AFTER, AFTER) => AFTER,
        _ => UNKNOWN,
    }
}

#[derive(Debug)]
pub(crate) struct PairStatic<W> {
    pub costs: Costs<W>,
    pub variant: VariantSpec,
    /// Unordered pairs, most decisive first.
    pub pairs: Vec<(u32, u32)>,
}

#[derive(Clone)]
pub(crate) struct PairSpace<W: Weight> {
    st: Arc<PairStatic<W>>,
    rel: Vec<u8>,
    fixed: W,
    rest: W,
    undecided: usize,
    cursor: usize,
    trail: Vec<u32>,
    marks: Vec<(usize, usize, W, W)>,
    queue: Vec<u32>,
}

impl<W: Weight> PairSpace<W> {
    pub fn new(costs: Costs<W>, variant: VariantSpec) -> PairSpace<W> {
        let n = costs.n;
        let mut pairs: Vec<(u32, u32)> = (0..n).flat_map(|r| (r + 1..n).map(move |s| (r as u32, s as u32))).collect();
        // |c − 1/2| is proportional to the gap between the two strict costs.
        let decisiveness = |&(r, s): &(u32, u32)| {
            let (a, b) = (costs.before(r as usize, s as usize), costs.before(s as usize, r as usize));
            if a > b {
                a - b
            } else {
                b - a
            }
        };
        pairs.sort_by(|x, y| decisiveness(y).cmp(&decisiveness(x)).then(x.cmp(y)));
        let rest = costs.utopian();
        let undecided = pairs.len();
        PairSpace {
            st: Arc::new(PairStatic { costs, variant, pairs }),
            rel: vec![UNKNOWN; n * n],
            fixed: W::ZERO,
            rest,
            undecided,
            cursor: 0,
            trail: Vec::new(),
            marks: Vec::new(),
            queue: Vec::new(),
        }
    }

    fn n(&self) -> usize {
        self.st.costs.n
    }

    /// Sets x·y to `c`, queueing it for propagation. False on conflict.
    fn set(&mut self, x: usize, y: usize, c: u8) -> bool {
        let n = self.n();
        let cur = self.rel[x * n + y];
        if cur != UNKNOWN {
            return cur == c;
        }
        self.rel[x * n + y] = c;
        self.rel[y * n + x] = reverse(c);
        let (r, s, rc) = if x < y { (x, y, c) } else { (y, x, reverse(c)) };
        let costs = &self.st.costs;
        let rel = match rc {
            BEFORE => Relation::Before,
            TIE => Relation::Tie,
            _ => Relation::After,
        };
        self.fixed += costs.of(r, s, rel);
        self.rest -= costs.min(r, s);
        self.undecided -= 1;
        let id = (x * n + y) as u32;
        self.trail.push(id);
        self.queue.push(id);
        true
    }

    fn propagate(&mut self) -> bool {
        let n = self.n();
        while let Some(id) = self.queue.pop() {
            let (a, b) = (id as usize / n, id as usize % n);
            let ab = self.rel[a * n + b];
            for c in 0..n {
                if c == a || c == b {
                    continue;
                }
                let bc = self.rel[b * n + c];
                if bc != UNKNOWN {
                    let ac = compose(ab, bc);
                    if ac != UNKNOWN && !self.set(a, c, ac) {
                        return false;
                    }
                }
                let ca = self.rel[c * n + a];
                if ca != UNKNOWN {
                    let cb = compose(ca, ab);
                    if cb != UNKNOWN && !self.set(c, b, cb) {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn rollback(&mut self, mark: (usize, usize, W, W)) {
        let n = self.n();
        let (len, cursor, fixed, rest) = mark;
        while self.trail.len() > len {
            let id = self.trail.pop().expect("trail entry") as usize;
            let (x, y) = (id / n, id % n);
            self.rel[x * n + y] = UNKNOWN;
            self.rel[y * n + x] = UNKNOWN;
            self.undecided += 1;
        }
        self.cursor = cursor;
        self.fixed = fixed;
        self.rest = rest;
        self.queue.clear();
    }

    fn next_pair(&self) -> Option<(usize, usize, usize)> {
        let n = self.n();
        self.st.pairs[self.cursor..].iter().position(|&(r, s)| self.rel[r as usize * n + s as usize] == UNKNOWN).map(
            |i| {
                let (r, s) = self.st.pairs[self.cursor + i];
                (self.cursor + i, r as usize, s as usize)
            },
        )
    }

    fn build_order(&self) -> BucketOrder {
        let n = self.n();
        // An item's bucket is the number of distinct levels strictly above it.
        let level: Vec<usize> = (0..n).map(|r| (0..n).filter(|&s| self.rel[s * n + r] == BEFORE).count()).collect();
        let mut levels = level.clone();
        levels.sort_unstable();
        levels.dedup();
        let assignment: Vec<usize> = level.iter().map(|l| levels.binary_search(l).expect("level present")).collect();
        BucketOrder::from_assignment(&assignment).expect("closed relation is a weak order")
    }
}

impl<W: Weight> Space<W> for PairSpace<W> {
    type Move = (u32, u8);
    type Scratch = ();

    fn bound(&self) -> W {
        self.fixed + self.rest
    }

    fn is_complete(&self) -> bool {
        self.undecided == 0
    }

    fn order(&self) -> Option<BucketOrder> {
        let order = self.build_order();
        self.st.variant.admits(&order).then_some(order)
    }

    fn moves(&self, out: &mut Vec<(Self::Move, W)>) {
        let Some((idx, r, s)) = self.next_pair() else { return };
        let costs = &self.st.costs;
        let base = self.bound() - costs.min(r, s);
        for rel in Relation::ALL {
            out.push(((idx as u32, code(rel)), base + costs.of(r, s, rel)));
        }
    }

    fn apply(&mut self, (idx, c): Self::Move, _: &mut ()) -> bool {
        let mark = (self.trail.len(), self.cursor, self.fixed, self.rest);
        let (r, s) = self.st.pairs[idx as usize];
        self.cursor = idx as usize + 1;
        if self.set(r as usize, s as usize, c) && self.propagate() {
            self.marks.push(mark);
            true
        } else {
            self.rollback(mark);
            false
        }
    }

    fn undo(&mut self) {
        let mark = self.marks.pop().expect("undo without apply");
        self.rollback(mark);
    }
}
