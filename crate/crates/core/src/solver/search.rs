//! Depth-first branch and bound shared by both search spaces.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use super::costs::Weight;
use crate::order::BucketOrder;

/// A search tree over partial bucket orders. `bound` must never exceed the
/// cost of any completion reachable from the current node.
pub(crate) trait Space<W: Weight>: Clone + Send + Sync {
    type Move: Copy + Send;
    type Scratch: Default + Send;

    fn bound(&self) -> W;
    fn is_complete(&self) -> bool;
    /// The order of a complete node if it satisfies the variant.
    fn order(&self) -> Option<BucketOrder>;
    /// Up to three children with admissible bound estimates.
    fn moves(&self, out: &mut Vec<(Self::Move, W)>);
    /// Applies a move; false means the child is infeasible or dominated, in
    /// which case the space is left unchanged.
    fn apply(&mut self, m: Self::Move, scratch: &mut Self::Scratch) -> bool;
    fn undo(&mut self);
}

#[derive(Debug, Clone)]
pub(crate) enum Event<W> {
    Node { depth: usize, bound: W },
    Prune { depth: usize, bound: W },
    Incumbent { value: W },
}

pub(crate) struct Limits {
    pub start: Instant,
    pub time_limit: Option<std::time::Duration>,
    pub node_limit: Option<u64>,
}

struct Best<W> {
    value: Option<W>,
    optima: BTreeSet<BucketOrder>,
}

/// State shared between workers. Pruning reads `hint`, which may lag behind
/// `best` but never undercuts it.
pub(crate) struct Shared<W> {
    best: Mutex<Best<W>>,
    hint: AtomicU64,
    full: AtomicBool,
    incomplete: AtomicBool,
    stop: AtomicBool,
    pub nodes: AtomicU64,
    cap: usize,
    limits: Limits,
}

impl<W: Weight> Shared<W> {
    pub fn new(cap: usize, limits: Limits) -> Shared<W> {
        Shared {
            best: Mutex::new(Best { value: None, optima: BTreeSet::new() }),
            hint: AtomicU64::new(u64::MAX),
            full: AtomicBool::new(false),
            incomplete: AtomicBool::new(false),
            stop: AtomicBool::new(false),
            nodes: AtomicU64::new(0),
            cap,
            limits,
        }
    }

    /// Records a feasible order of cost `value`.
    pub fn offer(&self, value: W, order: BucketOrder) -> bool {
        let mut best = self.best.lock().expect("incumbent lock");
        match best.value {
            Some(v) if value > v => false,
            Some(v) if value == v => {
                if best.optima.len() < self.cap {
                    best.optima.insert(order);
                    if best.optima.len() == self.cap {
                        self.full.store(true, Ordering::Release);
                    }
                } else if !best.optima.contains(&order) {
                    self.incomplete.store(true, Ordering::Relaxed);
                }
                false
            }
            _ => {
                best.value = Some(value);
                best.optima.clear();
                best.optima.insert(order);
                self.incomplete.store(false, Ordering::Relaxed);
                self.full.store(best.optima.len() >= self.cap, Ordering::Release);
                self.hint.store(value.hint(), Ordering::Release);
                true
            }
        }
    }

    pub fn best_value(&self) -> Option<W> {
        self.best.lock().expect("incumbent lock").value
    }

    /// True when no completion below `bound` can matter.
    fn prunable(&self, bound: W) -> bool {
        let hint = self.hint.load(Ordering::Acquire);
        if hint == u64::MAX {
            if bound.hint() < u64::MAX {
                return false;
            }
            // Values beyond the hint range: consult the incumbent itself.
            return match self.best_value() {
                Some(v) => bound > v || (bound == v && self.full.load(Ordering::Acquire)),
                None => false,
            };
        }
        let b = bound.hint();
        if b > hint {
            return true;
        }
        if b == hint && self.full.load(Ordering::Acquire) {
            self.incomplete.store(true, Ordering::Relaxed);
            return true;
        }
        false
    }

    pub fn stopped(&self) -> bool {
        self.stop.load(Ordering::Relaxed)
    }

    fn tick(&self) -> bool {
        let count = self.nodes.fetch_add(1, Ordering::Relaxed) + 1;
        if self.stopped() {
            return true;
        }
        if count.is_multiple_of(256) {
            let over_nodes = self.limits.node_limit.is_some_and(|l| count >= l);
            let over_time = self.limits.time_limit.is_some_and(|t| self.limits.start.elapsed() >= t);
            if over_nodes || over_time {
                self.stop.store(true, Ordering::Relaxed);
                return true;
            }
        }
        false
    }

    pub fn into_parts(self) -> (Option<W>, Vec<BucketOrder>, bool) {
        let incomplete = self.incomplete.load(Ordering::Relaxed);
        let best = self.best.into_inner().expect("incumbent lock");
        (best.value, best.optima.into_iter().collect(), incomplete)
    }
}

fn lower<W: Weight>(a: Option<W>, b: W) -> Option<W> {
    Some(a.map_or(b, |a| a.min(b)))
}

pub(crate) struct Worker<'a, W: Weight, S: Space<W>> {
    pub shared: &'a Shared<W>,
    pub scratch: S::Scratch,
    pub trace: Option<Vec<Event<W>>>,
    buffers: Vec<Vec<(S::Move, W)>>,
}

const TRACE_CAP: usize = 1_000_000;

impl<'a, W: Weight, S: Space<W>> Worker<'a, W, S> {
    pub fn new(shared: &'a Shared<W>, trace: bool) -> Worker<'a, W, S> {
        Worker { shared, scratch: S::Scratch::default(), trace: trace.then(Vec::new), buffers: Vec::new() }
    }

    fn record(&mut self, e: Event<W>) {
        if let Some(t) = &mut self.trace {
            if t.len() < TRACE_CAP {
                t.push(e);
            }
        }
    }

    fn leaf(&mut self, space: &S) {
        if let Some(order) = space.order() {
            let value = space.bound();
            if self.shared.offer(value, order) {
                self.record(Event::Incumbent { value });
            }
        }
    }

    /// Explores the subtree below `space`. Returns a lower bound on the part
    /// left unexplored when a limit interrupts the search.
    pub fn dfs(&mut self, space: &mut S, depth: usize) -> Option<W> {
        let bound = space.bound();
        if self.shared.tick() {
            return Some(bound);
        }
        self.record(Event::Node { depth, bound });
        if space.is_complete() {
            self.leaf(space);
            return None;
        }
        let mut moves = self.buffers.pop().unwrap_or_default();
        moves.clear();
        space.moves(&mut moves);
        moves.sort_by_key(|a| a.1);
        let mut pending = None;
        for i in 0..moves.len() {
            let (m, est) = moves[i];
            if self.shared.stopped() {
                pending = lower(pending, est);
                continue;
            }
            if self.shared.prunable(est) {
                self.record(Event::Prune { depth: depth + 1, bound: est });
                continue;
            }
            if !space.apply(m, &mut self.scratch) {
                continue;
            }
            let child = space.bound();
            if self.shared.prunable(child) {
                self.record(Event::Prune { depth: depth + 1, bound: child });
            } else if let Some(p) = self.dfs(space, depth + 1) {
                pending = lower(pending, p);
            }
            space.undo();
        }
        self.buffers.push(moves);
        pending
    }
}

/// Expands the root breadth-first into at least `target` open subproblems,
/// ordered by bound. Complete nodes met on the way are offered directly.
pub(crate) fn frontier<W: Weight, S: Space<W>>(root: S, target: usize, shared: &Shared<W>) -> Vec<S> {
    let mut open = vec![root];
    let mut scratch = S::Scratch::default();
    let mut moves = Vec::new();
    while open.len() < target {
        let mut next = Vec::with_capacity(open.len() * 3);
        let mut grew = false;
        for space in open {
            if space.is_complete() {
                if let Some(order) = space.order() {
                    shared.offer(space.bound(), order);
                }
                continue;
            }
            moves.clear();
            space.moves(&mut moves);
            grew = true;
            for &(m, _) in &moves {
                let mut child = space.clone();
                if child.apply(m, &mut scratch) {
                    next.push(child);
                }
            }
        }
        open = next;
        if !grew {
            break;
        }
    }
    open.sort_by_key(|s| s.bound());
    open
}

pub(crate) struct RunOutput<W> {
    pub pending: Option<W>,
    pub trace: Vec<Event<W>>,
}

/// Runs the search on `workers` threads. Subproblems are handed out in bound
/// order; each worker keeps its own scratch state across subproblems.
pub(crate) fn run<W: Weight, S: Space<W>>(root: S, workers: usize, shared: &Shared<W>, trace: bool) -> RunOutput<W> {
    let workers = workers.max(1);
    let tasks = if workers == 1 { vec![root] } else { frontier(root, workers * 8, shared) };
    let next = AtomicUsize::new(0);
    let results: Vec<(Option<W>, Vec<Event<W>>)> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers.min(tasks.len().max(1)))
            .map(|_| {
                let tasks = &tasks;
                let next = &next;
                std::thread::Builder::new()
                    .stack_size(64 << 20)
                    .spawn_scoped(scope, move || {
                        let mut worker: Worker<W, S> = Worker::new(shared, trace);
                        let mut pending = None;
                        loop {
                            let i = next.fetch_add(1, Ordering::Relaxed);
                            let Some(task) = tasks.get(i) else { break };
                            let mut space = task.clone();
                            if shared.stopped() {
                                pending = lower(pending, space.bound());
                                continue;
                            }
                            if shared.prunable(space.bound()) {
                                continue;
                            }
                            if let Some(p) = worker.dfs(&mut space, 0) {
                                pending = lower(pending, p);
                            }
                        }
                        (pending, worker.trace.unwrap_or_default())
                    })
                    .expect("spawn search worker")
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("search worker panicked")).collect()
    });
    let mut out = RunOutput { pending: None, trace: Vec::new() };
    for (p, t) in results {
        if let Some(p) = p {
            out.pending = lower(out.pending, p);
        }
        out.trace.extend(t);
    }
    out
}
