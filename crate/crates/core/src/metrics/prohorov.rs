//! Exact Prohorov distance through Strassen's theorem.
//!
//! With `M(eps)` the largest mass a coupling can put on `|x - y| <= eps` and
//! `T` the larger of the two retained masses, `ρ = inf{eps : M(eps) >= T - eps}`.
//! `M` is a step function that only jumps at pairwise distances, so `ρ` is
//! either such a distance or a value `T - M(d_k)` in the gap after one.

use crate::error::{Error, Result};
use crate::measures::DiscreteMeasure;

use super::flow::{self, band_intervals, max_band_flow, BandFlow, FlowSolver, BAND_TOLERANCE};
use super::{Coupling, MetricResult};

/// Above this many in-band pairs the breakpoint list is not materialized and
/// the threshold is located by bisection instead.
const MAX_BREAKPOINTS: usize = 4_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScanMode {
    /// Binary search over the sorted breakpoints.
    #[default]
    Binary,
    /// Every breakpoint in order; a reference for testing.
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ProhorovOptions {
    pub solver: FlowSolver,
    pub scan: ScanMode,
}

struct Instance<'a> {
    a: &'a DiscreteMeasure,
    b: &'a DiscreteMeasure,
    xs: Vec<f64>,
    ys: Vec<f64>,
    target: f64,
    solver: FlowSolver,
}

impl<'a> Instance<'a> {
    fn new(a: &'a DiscreteMeasure, b: &'a DiscreteMeasure, solver: FlowSolver) -> Self {
        let target = a.total_mass().max(b.total_mass());
        Self { a, b, xs: a.positions(), ys: b.positions(), target, solver }
    }

    fn flow(&self, eps: f64) -> BandFlow {
        max_band_flow(self.a.weights(), &self.xs, self.b.weights(), &self.ys, eps, self.solver)
    }

    /// Mass that must still leave the band, `T - M(eps)`, clamped at 0.
    fn shortfall(&self, f: &BandFlow) -> f64 {
        (self.target - f.value).max(0.0)
    }

    /// Sorted distinct pairwise distances up to 1, starting with 0; `None`
    /// when there are too many.
    fn breakpoints(&self) -> Option<Vec<f64>> {
        let intervals = band_intervals(&self.xs, &self.ys, 1.0);
        let count: usize = intervals.iter().map(|iv| iv.len()).sum();
        if count > MAX_BREAKPOINTS {
            return None;
        }
        let mut ds = Vec::with_capacity(count + 1);
        ds.push(0.0);
        for (x, iv) in self.xs.iter().zip(intervals) {
            ds.extend(self.ys[iv].iter().map(|y| (x - y).abs()).filter(|&d| d <= 1.0));
        }
        ds.sort_unstable_by(f64::total_cmp);
        ds.dedup();
        Some(ds)
    }

    /// Largest pairwise distance not exceeding `eps` (within the band
    /// tolerance), or 0.
    fn last_breakpoint(&self, eps: f64) -> f64 {
        let intervals = band_intervals(&self.xs, &self.ys, eps);
        let mut best: f64 = 0.0;
        for (x, iv) in self.xs.iter().zip(intervals) {
            if !iv.is_empty() {
                best = best.max((x - self.ys[iv.start]).abs()).max((self.ys[iv.end - 1] - x).abs());
            }
        }
        best
    }

    fn solve(&self, scan: ScanMode) -> (f64, BandFlow) {
        match self.breakpoints() {
            Some(ds) => self.scan(&ds, scan),
            None => self.bisect(),
        }
    }

    fn scan(&self, ds: &[f64], scan: ScanMode) -> (f64, BandFlow) {
        let next = |k: usize| ds.get(k + 1).copied().unwrap_or(f64::INFINITY);
        let settle = |k: usize, f: BandFlow| (ds[k].max(self.shortfall(&f)), f);
        match scan {
            ScanMode::Linear => {
                for k in 0..ds.len() {
                    let f = self.flow(ds[k]);
                    if self.shortfall(&f) <= next(k) {
                        return settle(k, f);
                    }
                }
                unreachable!("the last breakpoint is followed by infinity")
            }
            ScanMode::Binary => {
                // first k with T - M(d_k) <= d_{k+1}; the predicate is monotone
                let (mut lo, mut hi) = (0usize, ds.len() - 1);
                let mut found = None;
                while lo < hi {
                    let mid = (lo + hi) / 2;
                    let f = self.flow(ds[mid]);
                    if self.shortfall(&f) <= next(mid) {
                        hi = mid;
                        found = Some((mid, f));
                    } else {
                        lo = mid + 1;
                    }
                }
                match found {
                    Some((k, f)) if k == lo => settle(k, f),
                    _ => settle(lo, self.flow(ds[lo])),
                }
            }
        }
    }

    fn bisect(&self) -> (f64, BandFlow) {
        let feasible = |eps: f64| {
            let f = self.flow(eps);
            (self.shortfall(&f) <= eps, f)
        };
        let (ok, f0) = feasible(0.0);
        if ok {
            return (self.shortfall(&f0), f0);
        }
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let mut f_hi = self.flow(hi);
        while hi - lo > 1e-15 {
            let mid = 0.5 * (lo + hi);
            let (ok, f) = feasible(mid);
            if ok {
                hi = mid;
                f_hi = f;
            } else {
                lo = mid;
            }
        }
        // M is constant between the last jump below hi and hi itself
        let d = self.last_breakpoint(hi);
        (d.max(self.shortfall(&f_hi)).min(1.0), f_hi)
    }

    /// Adds the unmatched residual masses in northwest-corner order so the
    /// flow becomes a coupling.
    fn complete(&self, f: BandFlow, eps: f64) -> Coupling {
        let mut ra = self.a.weights().to_vec();
        let mut rb = self.b.weights().to_vec();
        let mut entries = f.entries;
        for &(i, j, w) in &entries {
            ra[i] -= w;
            rb[j] -= w;
        }
        let (mut i, mut j) = (0, 0);
        while i < ra.len() && j < rb.len() {
            if ra[i] <= 0.0 {
                i += 1;
                continue;
            }
            if rb[j] <= 0.0 {
                j += 1;
                continue;
            }
            let w = ra[i].min(rb[j]);
            entries.push((i, j, w));
            ra[i] -= w;
            rb[j] -= w;
        }
        entries.sort_by_key(|e| (e.0, e.1));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(entries.len());
        for e in entries {
            match merged.last_mut() {
                Some(last) if (last.0, last.1) == (e.0, e.1) => last.2 += e.2,
                _ => merged.push(e),
            }
        }
        let slack = merged
            .iter()
            .filter(|&&(i, j, _)| (self.xs[i] - self.ys[j]).abs() > eps + BAND_TOLERANCE)
            .map(|e| e.2)
            .sum();
        Coupling {
            left: self.a.support().to_vec(),
            right: self.b.support().to_vec(),
            entries: merged,
            eps,
            slack,
        }
    }
}

pub fn prohorov(a: &DiscreteMeasure, b: &DiscreteMeasure) -> MetricResult {
    prohorov_with(a, b, ProhorovOptions::default())
}

pub fn prohorov_with(a: &DiscreteMeasure, b: &DiscreteMeasure, opts: ProhorovOptions) -> MetricResult {
    let defect_slack = a.defect() + b.defect();
    if a.is_empty() || b.is_empty() {
        let value = a.total_mass().max(b.total_mass()).min(1.0);
        return MetricResult { value, certificate: None, defect_slack };
    }
    let inst = Instance::new(a, b, opts.solver);
    let (value, f) = inst.solve(opts.scan);
    let value = value.min(1.0);
    let certificate = inst.complete(f, value);
    MetricResult { value, certificate: Some(certificate), defect_slack }
}

/// `M(eps)`: the maximal coupling mass on `|x - y| <= eps`.
pub fn band_mass(a: &DiscreteMeasure, b: &DiscreteMeasure, eps: f64, solver: FlowSolver) -> f64 {
    let xs = a.positions();
    let ys = b.positions();
    flow::max_band_flow(a.weights(), &xs, b.weights(), &ys, eps, solver).value
}

/// A coupling with at most `eps` mass outside the band `|x - y| <= eps`.
pub fn strassen_coupling(a: &DiscreteMeasure, b: &DiscreteMeasure, eps: f64) -> Result<Coupling> {
    if !(eps.is_finite() && eps >= 0.0) {
        return Err(Error::OutOfRange(format!("eps = {eps} must be finite and >= 0")));
    }
    let inst = Instance::new(a, b, FlowSolver::Auto);
    let f = inst.flow(eps);
    let required = inst.target - eps;
    if f.value < required - 1e-12 {
        return Err(Error::CouplingInfeasible { eps, band_mass: f.value, required });
    }
    Ok(inst.complete(f, eps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{int_point, tv_distance};
    use num_rational::Ratio;

    fn dirac(num: u64, den: u64) -> DiscreteMeasure {
        DiscreteMeasure::dirac(Ratio::new(num, den))
    }

    #[test]
    fn dirac_pairs() {
        for (a, b) in [((0, 1), (3, 10)), ((1, 2), (2, 1)), ((7, 4), (7, 4)), ((0, 1), (1, 1)), ((1, 3), (2, 3))] {
            let (x, y) = (a.0 as f64 / a.1 as f64, b.0 as f64 / b.1 as f64);
            let rho = prohorov(&dirac(a.0, a.1), &dirac(b.0, b.1)).value;
            assert!((rho - (x - y).abs().min(1.0)).abs() < 1e-15, "{a:?} {b:?}: {rho}");
        }
    }

    #[test]
    fn integer_supports_give_tv() {
        let a = DiscreteMeasure::from_dense(&[0.2, 0.3, 0.5], 0.0).unwrap();
        let b = DiscreteMeasure::from_dense(&[0.1, 0.6, 0.0, 0.3], 0.0).unwrap();
        let rho = prohorov(&a, &b).value;
        assert!((rho - tv_distance(&a, &b).distance).abs() < 1e-12);
    }

    #[test]
    fn identical_measures_and_identity_coupling() {
        let a = DiscreteMeasure::from_atoms(
            vec![(Ratio::new(1, 3), 0.4), (Ratio::new(5, 2), 0.6)],
            0.0,
        )
        .unwrap();
        let r = prohorov(&a, &a);
        assert_eq!(r.value, 0.0);
        let c = strassen_coupling(&a, &a, 0.0).unwrap();
        assert_eq!(c.entries, vec![(0, 0, 0.4), (1, 1, 0.6)]);
        assert_eq!(c.slack, 0.0);
    }

    #[test]
    fn coupling_of_diracs_at_their_distance() {
        let c = strassen_coupling(&dirac(0, 1), &dirac(1, 2), 0.5).unwrap();
        assert_eq!(c.entries, vec![(0, 0, 1.0)]);
        assert_eq!(c.slack, 0.0);
        match strassen_coupling(&dirac(0, 1), &dirac(1, 2), 0.4) {
            Err(Error::CouplingInfeasible { band_mass, .. }) => assert_eq!(band_mass, 0.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn scan_modes_and_solvers_agree() {
        let a = DiscreteMeasure::from_atoms(
            (0..9u64).map(|k| (Ratio::new(k * k % 7, 3), 1.0 / 9.0)),
            0.0,
        )
        .unwrap();
        let b = DiscreteMeasure::from_atoms((0..5u64).map(|k| (Ratio::new(k, 2), 0.2)), 0.0).unwrap();
        let mut values = Vec::new();
        for solver in [FlowSolver::AugmentingPath, FlowSolver::IntervalGreedy] {
            for scan in [ScanMode::Binary, ScanMode::Linear] {
                values.push(prohorov_with(&a, &b, ProhorovOptions { solver, scan }).value);
            }
        }
        assert!(values.windows(2).all(|w| (w[0] - w[1]).abs() < 1e-12), "{values:?}");
    }

    #[test]
    fn bisection_matches_breakpoint_scan() {
        let a = DiscreteMeasure::from_atoms((1..40u64).map(|k| (Ratio::new(k, 13), 1.0 / 39.0)), 0.0).unwrap();
        let b = DiscreteMeasure::from_atoms((1..30u64).map(|k| (Ratio::new(k, 9), 1.0 / 29.0)), 0.0).unwrap();
        let inst = Instance::new(&a, &b, FlowSolver::IntervalGreedy);
        let scanned = inst.solve(ScanMode::Binary).0;
        let bisected = inst.bisect().0;
        assert!((scanned - bisected).abs() < 1e-13, "{scanned} vs {bisected}");
    }

    #[test]
    fn defects_go_to_slack() {
        let a = DiscreteMeasure::from_dense(&[0.5, 0.5 - 1e-10], 1e-10).unwrap();
        let b = DiscreteMeasure::dirac_int(0);
        let r = prohorov(&a, &b);
        assert!((r.defect_slack - 1e-10).abs() < 1e-20);
        assert!((r.value - 0.5).abs() < 1e-9);
        assert_eq!(b.mass_at(&int_point(0)), 1.0);
    }
}
