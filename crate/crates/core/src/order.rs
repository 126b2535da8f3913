//! Weak orders (bucket orders), their matrices and enumeration.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Position of `r` relative to `s` in a weak order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relation {
    Before,
    Tie,
    After,
}

impl Relation {
    pub const ALL: [Relation; 3] = [Relation::Before, Relation::Tie, Relation::After];

    pub fn reverse(self) -> Relation {
        match self {
            Relation::Before => Relation::After,
            Relation::Tie => Relation::Tie,
            Relation::After => Relation::Before,
        }
    }

    /// The bucket-matrix entry b_rs for this relation.
    pub fn value(self) -> Rational {
        match self {
            Relation::Before => Rational::one(),
            Relation::Tie => Rational::half(),
            Relation::After => Rational::zero(),
        }
    }
}

/// An ordered partition of the items `0..n` into non-empty buckets.
///
/// Items inside a bucket are kept sorted, so two equal orders have equal
/// representations. Ordering is by bucket count, then lexicographically on
/// the assignment vector.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BucketOrder {
    buckets: Vec<Vec<usize>>,
    assignment: Vec<usize>,
}

impl BucketOrder {
    /// Builds an order from 0-based buckets.
    pub fn new(buckets: Vec<Vec<usize>>) -> Result<BucketOrder> {
        let n: usize = buckets.iter().map(Vec::len).sum();
        let mut assignment = vec![usize::MAX; n];
        let mut sorted = Vec::with_capacity(buckets.len());
        for (u, mut bucket) in buckets.into_iter().enumerate() {
            if bucket.is_empty() {
                return Err(Error::InvalidOrder(format!("bucket {} is empty", u + 1)));
            }
            for &item in &bucket {
                if item >= n {
                    return Err(Error::InvalidOrder(format!("item {} out of range for {n} items", item + 1)));
                }
                if assignment[item] != usize::MAX {
                    return Err(Error::InvalidOrder(format!("item {} appears twice", item + 1)));
                }
                assignment[item] = u;
            }
            bucket.sort_unstable();
            sorted.push(bucket);
        }
        if n == 0 {
            return Err(Error::InvalidOrder("no items".into()));
        }
        Ok(BucketOrder { buckets: sorted, assignment })
    }

    /// Builds an order from a surjective assignment `item -> bucket index`.
    pub fn from_assignment(assignment: &[usize]) -> Result<BucketOrder> {
        if assignment.is_empty() {
            return Err(Error::InvalidOrder("no items".into()));
        }
        let p = assignment.iter().max().copied().unwrap_or(0) + 1;
        let mut buckets = vec![Vec::new(); p];
        for (item, &u) in assignment.iter().enumerate() {
            buckets[u].push(item);
        }
        if let Some(u) = buckets.iter().position(Vec::is_empty) {
            return Err(Error::InvalidOrder(format!("bucket {} is empty", u + 1)));
        }
        Ok(BucketOrder { buckets, assignment: assignment.to_vec() })
    }

    /// All items in one bucket.
    pub fn single_bucket(n: usize) -> BucketOrder {
        BucketOrder::from_assignment(&vec![0; n]).expect("n >= 1")
    }

    /// The strict order `0 | 1 | ... | n-1`.
    pub fn identity(n: usize) -> BucketOrder {
        BucketOrder::from_assignment(&(0..n).collect::<Vec<_>>()).expect("n >= 1")
    }

    /// Parses the text notation with 1-based items, e.g. `4 | 1 3 | 2 5`.
    /// `||` (head/tail separator) is read as a plain bucket separator.
    pub fn parse(text: &str) -> Result<BucketOrder> {
        let normalized = text.replace("||", "|");
        let mut buckets = Vec::new();
        for (u, part) in normalized.split('|').enumerate() {
            let mut bucket = Vec::new();
            for tok in part.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()) {
                let id: usize = tok.parse().map_err(|_| Error::InvalidOrder(format!("`{tok}` is not an item id")))?;
                if id == 0 {
                    return Err(Error::InvalidOrder("item ids start at 1".into()));
                }
                bucket.push(id - 1);
            }
            if bucket.is_empty() {
                return Err(Error::InvalidOrder(format!("bucket {} is empty", u + 1)));
            }
            buckets.push(bucket);
        }
        BucketOrder::new(buckets)
    }

    pub fn n(&self) -> usize {
        self.assignment.len()
    }

    pub fn bucket_count(&self) -> usize {
        self.buckets.len()
    }

    pub fn buckets(&self) -> &[Vec<usize>] {
        &self.buckets
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn bucket_of(&self, item: usize) -> usize {
        self.assignment[item]
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.buckets.iter().map(Vec::len).collect()
    }

    pub fn relation(&self, r: usize, s: usize) -> Relation {
        match self.assignment[r].cmp(&self.assignment[s]) {
            Ordering::Less => Relation::Before,
            Ordering::Equal => Relation::Tie,
            Ordering::Greater => Relation::After,
        }
    }

    /// Renders with a `||` before the last bucket when `tail` is set.
    pub fn to_tail_string(&self, tail: bool) -> String {
        let parts: Vec<String> =
            self.buckets.iter().map(|b| b.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(" ")).collect();
        if tail && parts.len() > 1 {
            let (head, last) = parts.split_at(parts.len() - 1);
            format!("{} || {}", head.join(" | "), last[0])
        } else {
            parts.join(" | ")
        }
    }

    /// Restricts the order to `items` (0-based, in the original numbering) and
    /// renumbers them by their position in `items`. Buckets that become empty vanish.
    pub fn restrict(&self, items: &[usize]) -> Result<BucketOrder> {
        let mut keys: Vec<usize> = items.iter().map(|&i| self.assignment[i]).collect();
        let mut distinct = keys.clone();
        distinct.sort_unstable();
        distinct.dedup();
        for k in keys.iter_mut() {
            *k = distinct.binary_search(k).expect("present");
        }
        BucketOrder::from_assignment(&keys)
    }
}

impl Ord for BucketOrder {
    fn cmp(&self, other: &BucketOrder) -> Ordering {
        self.buckets.len().cmp(&other.buckets.len()).then_with(|| self.assignment.cmp(&other.assignment))
    }
}

impl PartialOrd for BucketOrder {
    fn partial_cmp(&self, other: &BucketOrder) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for BucketOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_tail_string(false))
    }
}

impl fmt::Debug for BucketOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BucketOrder({self})")
    }
}

impl FromStr for BucketOrder {
    type Err = Error;
    fn from_str(s: &str) -> Result<BucketOrder> {
        BucketOrder::parse(s)
    }
}

impl Serialize for BucketOrder {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for BucketOrder {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<BucketOrder, D::Error> {
        let s = String::deserialize(deserializer)?;
        BucketOrder::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// The {0, 1/2, 1}-valued matrix induced by a bucket order.
#[derive(Clone, PartialEq, Eq)]
pub struct BucketMatrix {
    n: usize,
    relations: Vec<Relation>,
}

impl BucketMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn relation(&self, r: usize, s: usize) -> Relation {
        self.relations[r * self.n + s]
    }

    pub fn entry(&self, r: usize, s: usize) -> Rational {
        self.relation(r, s).value()
    }

    /// Builds a matrix from explicit entries, checking b_rr = 1/2, b_rs + b_sr = 1
    /// and that it is induced by some bucket order.
    pub fn from_entries(entries: &[Vec<Rational>]) -> Result<BucketMatrix> {
        let n = entries.len();
        let mut relations = Vec::with_capacity(n * n);
        for (r, row) in entries.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Dimension { expected: n, found: row.len() });
            }
            for (s, v) in row.iter().enumerate() {
                let rel = if *v == Rational::one() {
                    Relation::Before
                } else if *v == Rational::half() {
                    Relation::Tie
                } else if v.is_zero() {
                    Relation::After
                } else {
                    return Err(Error::InvalidMatrix(format!("entry ({},{}) = {v} is not 0, 1/2 or 1", r + 1, s + 1)));
                };
                if r == s && rel != Relation::Tie {
                    return Err(Error::InvalidMatrix(format!("diagonal entry {} is not 1/2", r + 1)));
                }
                relations.push(rel);
            }
        }
        let m = BucketMatrix { n, relations };
        for r in 0..n {
            for s in 0..n {
                if m.relation(r, s) != m.relation(s, r).reverse() {
                    return Err(Error::InvalidMatrix(format!("b_{0}{1} + b_{1}{0} != 1", r + 1, s + 1)));
                }
            }
        }
        m.to_order()?;
        Ok(m)
    }

    /// Recovers the bucket order, failing when the relation is not a weak order.
    pub fn to_order(&self) -> Result<BucketOrder> {
        let n = self.n;
        // Rank by the number of items strictly before; a weak order is then
        // reproduced exactly iff the relation is transitive.
        let mut before: Vec<usize> =
            (0..n).map(|r| (0..n).filter(|&s| self.relation(s, r) == Relation::Before).count()).collect();
        let mut levels = before.clone();
        levels.sort_unstable();
        levels.dedup();
        for b in before.iter_mut() {
            *b = levels.binary_search(b).expect("present");
        }
        let order = BucketOrder::from_assignment(&before)?;
        if bucket_matrix(&order) != *self {
            return Err(Error::InvalidMatrix("relation is not transitive".into()));
        }
        Ok(order)
    }
}

impl fmt::Debug for BucketMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|s| self.entry(r, s).to_string()).collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

pub fn bucket_matrix(order: &BucketOrder) -> BucketMatrix {
    let n = order.n();
    let mut relations = Vec::with_capacity(n * n);
    for r in 0..n {
        for s in 0..n {
            relations.push(order.relation(r, s));
        }
    }
    BucketMatrix { n, relations }
}

/// Ordered Bell (Fubini) number: the count of weak orders on `n` items.
pub fn ordered_bell(n: usize) -> BigInt {
    // a(m) = sum_{k=1..m} C(m,k) a(m-k), a(0) = 1
    let mut a: Vec<BigInt> = vec![BigInt::from(1)];
    for m in 1..=n {
        let mut binom = BigInt::from(1);
        let mut total = BigInt::from(0);
        for k in 1..=m {
            binom = binom * BigInt::from(m - k + 1) / BigInt::from(k);
            total += &binom * &a[m - k];
        }
        a.push(total);
    }
    a.swap_remove(n)
}

/// Largest `n` accepted by [`enumerate_weak_orders`].
pub const ENUMERATION_HARD_CAP: usize = 10;

/// Every weak order on `n` items exactly once: by bucket count ascending, then
/// lexicographically on the assignment vector.
pub fn enumerate_weak_orders(n: usize) -> Result<WeakOrders> {
    enumerate_weak_orders_capped(n, ENUMERATION_HARD_CAP)
}

pub fn enumerate_weak_orders_capped(n: usize, cap: usize) -> Result<WeakOrders> {
    let cap = cap.min(ENUMERATION_HARD_CAP);
    if n == 0 {
        return Err(Error::InvalidOrder("no items".into()));
    }
    if n > cap {
        return Err(Error::CapExceeded { n, cap, count: ordered_bell(n).to_string() });
    }
    Ok(WeakOrders { n, p: 1, current: Surjections::new(n, 1) })
}

/// Iterator returned by [`enumerate_weak_orders`].
pub struct WeakOrders {
    n: usize,
    p: usize,
    current: Surjections,
}

impl Iterator for WeakOrders {
    type Item = BucketOrder;

    fn next(&mut self) -> Option<BucketOrder> {
        loop {
            if let Some(a) = self.current.next() {
                return Some(BucketOrder::from_assignment(&a).expect("surjective"));
            }
            if self.p >= self.n {
                return None;
            }
            self.p += 1;
            self.current = Surjections::new(self.n, self.p);
        }
    }
}

/// Surjections `[0,n) -> [0,p)` in lexicographic order.
pub struct Surjections {
    n: usize,
    p: usize,
    next: Option<Vec<usize>>,
}

impl Surjections {
    pub fn new(n: usize, p: usize) -> Surjections {
        let next = if p == 0 || p > n {
            None
        } else {
            let mut a = vec![0; n];
            fill_smallest(&mut a, 0, p);
            Some(a)
        };
        Surjections { n, p, next }
    }
}

// Fills a[from..] with the lexicographically smallest completion that makes
// the whole vector surjective onto [0,p). The prefix must leave enough room.
fn fill_smallest(a: &mut [usize], from: usize, p: usize) {
    let n = a.len();
    let mut seen = vec![false; p];
    for &v in &a[..from] {
        seen[v] = true;
    }
    let mut missing = seen.iter().filter(|s| !**s).count();
    for j in from..n {
        let room = n - j - 1;
        for v in 0..p {
            let after = missing - usize::from(!seen[v]);
            if after <= room {
                a[j] = v;
                if !seen[v] {
                    seen[v] = true;
                    missing -= 1;
                }
                break;
            }
        }
    }
}

impl Iterator for Surjections {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.next.take()?;
        let (n, p) = (self.n, self.p);
        let mut a = out.clone();
        let mut counts = vec![0usize; p];
        for &v in &a {
            counts[v] += 1;
        }
        for i in (0..n).rev() {
            counts[a[i]] -= 1;
            let missing_prefix = |counts: &[usize]| counts.iter().filter(|c| **c == 0).count();
            for v in a[i] + 1..p {
                counts[v] += 1;
                if missing_prefix(&counts) < n - i {
                    a[i] = v;
                    fill_smallest(&mut a, i + 1, p);
                    self.next = Some(a);
                    return Some(out);
                }
                counts[v] -= 1;
            }
        }
        Some(out)
    }
}

/// All total orders obtained by permuting items inside each bucket, as
/// 0-based item sequences. The last bucket varies fastest.
pub fn consistent_linear_extensions(order: &BucketOrder) -> LinearExtensions {
    LinearExtensions { perms: order.buckets().to_vec(), done: false }
}

pub struct LinearExtensions {
    perms: Vec<Vec<usize>>,
    done: bool,
}

impl Iterator for LinearExtensions {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out: Vec<usize> = self.perms.iter().flatten().copied().collect();
        // Odometer over per-bucket permutations in lexicographic order.
        let mut advanced = false;
        for bucket in self.perms.iter_mut().rev() {
            if next_permutation(bucket) {
                advanced = true;
                break;
            }
            // next_permutation wrapped this bucket back to sorted order.
        }
        if !advanced {
            self.done = true;
        }
        Some(out)
    }
}

fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        v.reverse();
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}
