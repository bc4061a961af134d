//! Minimum flow with node lower bounds over the cover graph of the subset
//! lattice, and recovery of maximum-weight antichains from its minimum cuts.
//!
//! Each set `v` is split into `in(v) → out(v)` carrying lower bound `w(v)`;
//! cover arcs `out(v) → in(v ∪ {j})`, the source arc into `in(∅)` and the
//! sink arc out of `out([n])` are unbounded. Any flow covers every node with
//! chains, so by weighted Dilworth duality the minimum flow value equals the
//! maximum antichain weight.

use std::collections::VecDeque;

use crate::scalar::{lit, Real};

struct Arc<T> {
    to: usize,
    cap: T,
}

/// Residual network with paired arcs (`k` and `k ^ 1`).
struct Residual<T> {
    arcs: Vec<Arc<T>>,
    adj: Vec<Vec<usize>>,
    eps: T,
}

impl<T: Real> Residual<T> {
    fn new(nodes: usize, eps: T) -> Self {
        Residual {
            arcs: Vec::new(),
            adj: vec![Vec::new(); nodes],
            eps,
        }
    }

    fn add_pair(&mut self, a: usize, b: usize, cap_ab: T, cap_ba: T) {
        self.adj[a].push(self.arcs.len());
        self.arcs.push(Arc { to: b, cap: cap_ab });
        self.adj[b].push(self.arcs.len());
        self.arcs.push(Arc { to: a, cap: cap_ba });
    }

    #[inline]
    fn open(&self, k: usize) -> bool {
        self.arcs[k].cap > self.eps
    }

    fn levels(&self, source: usize, sink: usize) -> Option<Vec<u32>> {
        let mut level = vec![u32::MAX; self.adj.len()];
        level[source] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for &k in &self.adj[u] {
                let v = self.arcs[k].to;
                if self.open(k) && level[v] == u32::MAX {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        (level[sink] != u32::MAX).then_some(level)
    }

    fn augment(&mut self, u: usize, sink: usize, limit: T, level: &[u32], next: &mut [usize]) -> T {
        if u == sink {
            return limit;
        }
        while next[u] < self.adj[u].len() {
            let k = self.adj[u][next[u]];
            let v = self.arcs[k].to;
            if self.open(k) && level[v] == level[u] + 1 {
                let pushed = self.augment(v, sink, limit.min(self.arcs[k].cap), level, next);
                if pushed > T::zero() {
                    self.arcs[k].cap = self.arcs[k].cap - pushed;
                    self.arcs[k ^ 1].cap = self.arcs[k ^ 1].cap + pushed;
                    return pushed;
                }
            }
            next[u] += 1;
        }
        T::zero()
    }

    /// Dinic's algorithm; returns the flow value.
    fn max_flow(&mut self, source: usize, sink: usize) -> T {
        let mut total = T::zero();
        while let Some(level) = self.levels(source, sink) {
            let mut next = vec![0usize; self.adj.len()];
            loop {
                let pushed = self.augment(source, sink, T::infinity(), &level, &mut next);
                if pushed <= T::zero() {
                    break;
                }
                total = total + pushed;
            }
        }
        total
    }
}

/// Solution of the lattice min-flow problem.
pub(crate) struct LatticeOptimum<T> {
    /// Members as raw masks, ascending.
    pub members: Vec<u64>,
    pub min_flow: T,
}

/// Maximum-weight antichain of `{0,1}^n` under node weights `w[v]`
/// (`w.len() == 2^n`). Among optimal antichains the one with the
/// lexicographically smallest ascending member list is returned.
pub(crate) fn max_weight_antichain<T: Real>(n: usize, w: &[T]) -> LatticeOptimum<T> {
    let size = 1usize << n;
    debug_assert_eq!(w.len(), size);
    let node_in = |v: usize| 2 * v;
    let node_out = |v: usize| 2 * v + 1;
    let source = 2 * size;
    let sink = 2 * size + 1;

    // Feasible flow: route w(v) along the chain adding v's bits, then the rest,
    // both in ascending order.
    let mut node_flow = vec![T::zero(); size];
    let mut cover_flow = vec![T::zero(); size * n.max(1)];
    let total: T = w.iter().fold(T::zero(), |a, &x| a + x);
    for (v, &wv) in w.iter().enumerate() {
        if wv <= T::zero() {
            continue;
        }
        let mut cur = 0usize;
        node_flow[cur] = node_flow[cur] + wv;
        let order = (0..n).filter(|j| v >> j & 1 == 1).chain((0..n).filter(|j| v >> j & 1 == 0));
        for j in order {
            cover_flow[cur * n + j] = cover_flow[cur * n + j] + wv;
            cur |= 1 << j;
            node_flow[cur] = node_flow[cur] + wv;
        }
    }

    // Reduce it by a max flow from sink back to source in the residual graph.
    let eps = T::epsilon() * lit(1e4) * total.max(T::one());
    let inf = T::infinity();
    let mut g = Residual::new(2 * size + 2, eps);
    g.add_pair(source, node_in(0), inf, total);
    g.add_pair(node_out(size - 1), sink, inf, total);
    for v in 0..size {
        g.add_pair(node_in(v), node_out(v), inf, node_flow[v] - w[v]);
        for j in (0..n).filter(|j| v >> j & 1 == 0) {
            g.add_pair(node_out(v), node_in(v | 1 << j), inf, cover_flow[v * n + j]);
        }
    }
    let reduced = g.max_flow(sink, source);
    let min_flow = total - reduced;

    // Minimum cuts are the residual-closed sets X with sink ∈ X, source ∉ X;
    // the antichain of X is {v : out(v) ∈ X, in(v) ∉ X}. Fix members greedily
    // in ascending mask order while some closed set still honours them.
    let nodes = g.adj.len();
    let mut rev_adj = vec![Vec::new(); nodes];
    for ks in &g.adj {
        for &k in ks {
            rev_adj[g.arcs[k].to].push(k ^ 1);
        }
    }
    let mut inside = vec![false; nodes];
    let mut outside = vec![false; nodes];
    let mut scratch = Vec::new();
    assert!(grow(&g, &g.adj, sink, &mut inside, &outside, &mut scratch, false));
    scratch.clear();
    assert!(grow(&g, &rev_adj, source, &mut outside, &inside, &mut scratch, true));

    let mut members = Vec::new();
    for v in 0..size {
        let (vi, vo) = (node_in(v), node_out(v));
        if outside[vo] || inside[vi] {
            continue;
        }
        let mut added_in = Vec::new();
        let mut added_out = Vec::new();
        let ok = grow(&g, &g.adj, vo, &mut inside, &outside, &mut added_in, false)
            && grow(&g, &rev_adj, vi, &mut outside, &inside, &mut added_out, true);
        if ok {
            members.push(v as u64);
        } else {
            for u in added_in {
                inside[u] = false;
            }
            for u in added_out {
                outside[u] = false;
            }
        }
    }
    LatticeOptimum { members, min_flow }
}

/// Extends `mark` by everything reachable from `start` along open arcs
/// (reverse arcs when `backward`), recording new nodes in `added`. Returns
/// false as soon as a node marked in `forbid` is reached.
fn grow<T: Real>(
    g: &Residual<T>,
    adj: &[Vec<usize>],
    start: usize,
    mark: &mut [bool],
    forbid: &[bool],
    added: &mut Vec<usize>,
    backward: bool,
) -> bool {
    if forbid[start] {
        return false;
    }
    if mark[start] {
        return true;
    }
    mark[start] = true;
    added.push(start);
    let mut stack = vec![start];
    while let Some(u) = stack.pop() {
        for &k in &adj[u] {
            // Backward search walks arc k = (v → u) recorded as its pair.
            let (v, open) = if backward {
                (g.arcs[k].to, g.open(k ^ 1))
            } else {
                (g.arcs[k].to, g.open(k))
            };
            if !open || mark[v] {
                continue;
            }
            if forbid[v] {
                return false;
            }
            mark[v] = true;
            added.push(v);
            stack.push(v);
        }
    }
    true
}
