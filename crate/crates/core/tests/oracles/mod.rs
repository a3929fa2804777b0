//! Brute-force reference implementations that share no code with the
//! library algorithms they check.

#![allow(dead_code)]

use std::collections::{BTreeMap, VecDeque};

/// Prohorov distance by enumerating every subset `A` of each support:
/// the smallest `eps` with `a(A) <= b(A^eps) + eps` for all `A`, and the
/// same with the roles swapped. `A^eps` is the closed `eps`-neighbourhood.
pub fn prohorov_subsets(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let mut ds: Vec<f64> = vec![0.0];
    for &(x, _) in a {
        for &(y, _) in b {
            ds.push((x - y).abs());
        }
    }
    ds.sort_by(f64::total_cmp);
    ds.dedup();
    ds.iter()
        .map(|&d| d.max(worst_excess(a, b, d)).max(worst_excess(b, a, d)))
        .fold(f64::INFINITY, f64::min)
}

fn worst_excess(a: &[(f64, f64)], b: &[(f64, f64)], eps: f64) -> f64 {
    let mut worst = 0.0f64;
    for mask in 1u32..(1 << a.len()) {
        let chosen: Vec<f64> = (0..a.len()).filter(|i| mask >> i & 1 == 1).map(|i| a[i].0).collect();
        let inside: f64 = (0..a.len()).filter(|i| mask >> i & 1 == 1).map(|i| a[i].1).sum();
        let near: f64 = b
            .iter()
            .filter(|(y, _)| chosen.iter().any(|x| (x - y).abs() <= eps + 1e-12))
            .map(|p| p.1)
            .sum();
        worst = worst.max(inside - near);
    }
    worst
}

/// Bounded-Lipschitz distance by a dynamic program over function values on
/// a grid of `[-c, c]`, for a fixed Lipschitz constant `L` and `c = 1 - L`.
/// Every grid candidate is feasible, so each value is a lower bound. The
/// optimum is concave in `L`, which a ternary search then maximizes.
pub fn bounded_lipschitz_grid(a: &[(f64, f64)], b: &[(f64, f64)], value_steps: usize) -> f64 {
    let mut signed: BTreeMap<u64, f64> = BTreeMap::new();
    for &(x, w) in a {
        *signed.entry(x.to_bits()).or_default() += w;
    }
    for &(x, w) in b {
        *signed.entry(x.to_bits()).or_default() -= w;
    }
    let mut pts: Vec<(f64, f64)> = signed.into_iter().map(|(k, g)| (f64::from_bits(k), g)).collect();
    pts.sort_by(|p, q| p.0.total_cmp(&q.0));
    let at = |lip: f64| -> f64 {
        let c = 1.0 - lip;
        if c <= 0.0 {
            return 0.0;
        }
        let step = 2.0 * c / value_steps as f64;
        let value = |j: usize| -c + step * j as f64;
        let mut dp: Vec<f64> = (0..=value_steps).map(|j| pts[0].1 * value(j)).collect();
        for i in 1..pts.len() {
            let radius = ((lip * (pts[i].0 - pts[i - 1].0)) / step + 1e-9).floor() as usize;
            let window = sliding_max(&dp, radius);
            dp = (0..=value_steps).map(|j| pts[i].1 * value(j) + window[j]).collect();
        }
        dp.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut best = at(0.0).max(at(1.0));
    for _ in 0..80 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        let (f1, f2) = (at(m1), at(m2));
        best = best.max(f1).max(f2);
        if f1 < f2 {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    best
}

/// `out[j] = max(v[j - r ..= j + r])`.
fn sliding_max(v: &[f64], r: usize) -> Vec<f64> {
    let n = v.len();
    let mut out = vec![f64::NEG_INFINITY; n];
    let mut dq: VecDeque<usize> = VecDeque::new();
    let mut next = 0;
    for j in 0..n {
        while next < n && next <= j + r {
            while dq.back().is_some_and(|&k| v[k] <= v[next]) {
                dq.pop_back();
            }
            dq.push_back(next);
            next += 1;
        }
        while dq.front().is_some_and(|&k| k + r < j) {
            dq.pop_front();
        }
        out[j] = v[*dq.front().unwrap()];
    }
    out
}

/// Law of the total offspring of `count` individuals, by listing every
/// tuple of individual offspring counts.
pub fn tuple_sums(mu: &[(u64, f64)], count: u64) -> BTreeMap<u64, f64> {
    let mut out = BTreeMap::new();
    fn walk(mu: &[(u64, f64)], left: u64, sum: u64, p: f64, out: &mut BTreeMap<u64, f64>) {
        if left == 0 {
            *out.entry(sum).or_insert(0.0) += p;
            return;
        }
        for &(k, w) in mu {
            walk(mu, left - 1, sum + k, p * w, out);
        }
    }
    walk(mu, count, 0, 1.0, &mut out);
    out
}

/// Law of `(Z_1, Z_2)` from `z0` ancestors by exhaustive enumeration of
/// family trees of depth two.
pub fn two_generation_tree(mu: &[(u64, f64)], z0: u64) -> BTreeMap<(u64, u64), f64> {
    let mut out = BTreeMap::new();
    for (z1, p1) in tuple_sums(mu, z0) {
        for (z2, p2) in tuple_sums(mu, z1) {
            *out.entry((z1, z2)).or_insert(0.0) += p1 * p2;
        }
    }
    out
}
