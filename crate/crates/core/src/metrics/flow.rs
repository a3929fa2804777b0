//! Maximum coupling mass on a distance band, i.e. max-flow on the bipartite
//! graph joining left atom `i` to right atom `j` when `|x_i - y_j| <= eps`.
//!
//! Both supports are sorted, so the neighbourhood of each left atom is an
//! interval of right atoms whose endpoints are nondecreasing in `i`.

use std::collections::VecDeque;
use std::ops::Range;

/// Augmentations below this are treated as zero and end the search.
pub const MIN_AUGMENT: f64 = 1e-14;

/// Inclusive tolerance when classifying `|x - y| <= eps`.
pub const BAND_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FlowSolver {
    /// Shortest augmenting paths on the explicit bipartite graph.
    AugmentingPath,
    /// Left-to-right greedy fill, exact for monotone interval neighbourhoods.
    IntervalGreedy,
    /// Augmenting paths for small graphs, greedy otherwise.
    #[default]
    Auto,
}

/// Above this many atom pairs `Auto` uses the greedy solver.
const AUTO_PAIRS: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct BandFlow {
    pub value: f64,
    /// `(left, right, mass)` for every pair carrying flow.
    pub entries: Vec<(usize, usize, f64)>,
}

/// Right atoms in band of each left atom, as index ranges.
pub fn band_intervals(xs: &[f64], ys: &[f64], eps: f64) -> Vec<Range<usize>> {
    let reach = eps + BAND_TOLERANCE;
    let (mut lo, mut hi) = (0usize, 0usize);
    xs.iter()
        .map(|&x| {
            while lo < ys.len() && x - ys[lo] > reach {
                lo += 1;
            }
            hi = hi.max(lo);
            while hi < ys.len() && ys[hi] - x <= reach {
                hi += 1;
            }
            lo..hi
        })
        .collect()
}

pub fn max_band_flow(a: &[f64], xs: &[f64], b: &[f64], ys: &[f64], eps: f64, solver: FlowSolver) -> BandFlow {
    let intervals = band_intervals(xs, ys, eps);
    let solver = match solver {
        FlowSolver::Auto if a.len().saturating_mul(b.len()) <= AUTO_PAIRS => FlowSolver::AugmentingPath,
        FlowSolver::Auto => FlowSolver::IntervalGreedy,
        s => s,
    };
    match solver {
        FlowSolver::IntervalGreedy => greedy(a, b, &intervals),
        _ => augmenting_path(a, b, &intervals),
    }
}

/// Processes left atoms in order and fills each from the leftmost right
/// atom with spare capacity. Intervals are sorted by both endpoints, so
/// capacity skipped over can never be used later and the fill is optimal.
fn greedy(a: &[f64], b: &[f64], intervals: &[Range<usize>]) -> BandFlow {
    let mut spare = b.to_vec();
    let mut entries = Vec::new();
    let mut value = 0.0;
    let mut p = 0usize;
    for (i, iv) in intervals.iter().enumerate() {
        p = p.max(iv.start);
        let mut need = a[i];
        while need > 0.0 && p < iv.end {
            // take equals one of the two operands, so one of them hits 0 exactly
            let take = need.min(spare[p]);
            if take > 0.0 {
                entries.push((i, p, take));
                value += take;
                need -= take;
                spare[p] -= take;
            }
            if spare[p] <= 0.0 {
                p += 1;
            }
        }
    }
    BandFlow { value, entries }
}

struct Edge {
    to: usize,
    cap: f64,
}

/// Edmonds-Karp on source -> left -> right -> sink with real capacities.
fn augmenting_path(a: &[f64], b: &[f64], intervals: &[Range<usize>]) -> BandFlow {
    let (na, nb) = (a.len(), b.len());
    let source = na + nb;
    let sink = source + 1;
    let mut edges: Vec<Edge> = Vec::new();
    let mut graph: Vec<Vec<usize>> = vec![Vec::new(); na + nb + 2];
    let add = |edges: &mut Vec<Edge>, graph: &mut Vec<Vec<usize>>, from: usize, to: usize, cap: f64| {
        graph[from].push(edges.len());
        edges.push(Edge { to, cap });
        graph[to].push(edges.len());
        edges.push(Edge { to: from, cap: 0.0 });
    };
    for (i, &w) in a.iter().enumerate() {
        add(&mut edges, &mut graph, source, i, w);
    }
    let mut pair_edges = Vec::new();
    for (i, iv) in intervals.iter().enumerate() {
        for j in iv.clone() {
            pair_edges.push((i, j, edges.len()));
            add(&mut edges, &mut graph, i, na + j, f64::INFINITY);
        }
    }
    for (j, &w) in b.iter().enumerate() {
        add(&mut edges, &mut graph, na + j, sink, w);
    }

    let mut value = 0.0;
    let mut prev: Vec<usize> = vec![usize::MAX; na + nb + 2];
    loop {
        prev.iter_mut().for_each(|p| *p = usize::MAX);
        let mut queue = VecDeque::from([source]);
        let mut reached = false;
        while let Some(u) = queue.pop_front() {
            for &e in &graph[u] {
                let v = edges[e].to;
                if v != source && prev[v] == usize::MAX && edges[e].cap >= MIN_AUGMENT {
                    prev[v] = e;
                    if v == sink {
                        reached = true;
                        break;
                    }
                    queue.push_back(v);
                }
            }
            if reached {
                break;
            }
        }
        if !reached {
            break;
        }
        let mut bottleneck = f64::INFINITY;
        let mut v = sink;
        while v != source {
            let e = prev[v];
            bottleneck = bottleneck.min(edges[e].cap);
            v = edges[e ^ 1].to;
        }
        if bottleneck < MIN_AUGMENT {
            break;
        }
        let mut v = sink;
        while v != source {
            let e = prev[v];
            edges[e].cap -= bottleneck;
            edges[e ^ 1].cap += bottleneck;
            v = edges[e ^ 1].to;
        }
        value += bottleneck;
    }
    let entries = pair_edges
        .into_iter()
        .filter_map(|(i, j, e)| {
            let f = edges[e ^ 1].cap;
            (f > 0.0).then_some((i, j, f))
        })
        .collect();
    BandFlow { value, entries }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intervals_are_inclusive() {
        let xs = [0.0, 1.0, 2.0];
        let ys = [0.5, 1.5, 5.0];
        assert_eq!(band_intervals(&xs, &ys, 0.5), vec![0..1, 0..2, 1..2]);
        assert!(band_intervals(&xs, &ys, 0.1).iter().all(|iv| iv.is_empty()));
    }

    #[test]
    fn full_band_moves_all_mass() {
        let a = [0.2, 0.3, 0.5];
        let b = [0.6, 0.4];
        let xs = [0.0, 1.0, 2.0];
        let ys = [0.5, 3.0];
        for solver in [FlowSolver::AugmentingPath, FlowSolver::IntervalGreedy] {
            let f = max_band_flow(&a, &xs, &b, &ys, 3.0, solver);
            assert!((f.value - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn greedy_matches_augmenting_on_crossing_instance() {
        // left atom 0 can only use right atom 0; greedy must not waste it
        let a = [0.5, 0.5];
        let b = [0.5, 0.5];
        let xs = [0.0, 0.3];
        let ys = [0.1, 0.35];
        let p = max_band_flow(&a, &xs, &b, &ys, 0.2, FlowSolver::AugmentingPath);
        let g = max_band_flow(&a, &xs, &b, &ys, 0.2, FlowSolver::IntervalGreedy);
        assert!((p.value - 1.0).abs() < 1e-15);
        assert!((g.value - 1.0).abs() < 1e-15);
    }
}
