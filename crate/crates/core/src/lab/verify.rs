//! One function per inequality. Each returns reports whose `lhs` is the
//! exactly computed quantity and whose `rhs` is the analytic bound.

use std::ops::RangeInclusive;

use serde::Serialize;
use serde_json::json;

use crate::engine;
use crate::error::{Error, Result};
use crate::estimator::{self, EstimatorLaw};
use crate::measures::{self, int_point, tv_distance, DiscreteMeasure};
use crate::metrics::{self, joint, prohorov::strassen_coupling};
use crate::montecarlo::{self, SimConfig};
use crate::offspring::{self, OffspringLaw};

use super::{VerificationReport, NUMERIC_TOLERANCE};

/// `min(Σ_{i<=n} m1^{i-1}, Σ_{i<=n} m2^{i-1})`, scaled by `z0`, times the
/// offspring TV bounds the TV of the first `n` generations.
pub fn verify_joint_tv_bound(
    mu1: &OffspringLaw,
    mu2: &OffspringLaw,
    n: usize,
    z0: u64,
    budget: f64,
) -> Result<VerificationReport> {
    let trajectory = if n <= joint::TRAJECTORY_MAX_N {
        joint::trajectory_tv(mu1, mu2, n, z0).ok().map(|v| v[n - 1])
    } else {
        None
    };
    let (lhs, scope) = match trajectory {
        Some(tv) => (tv, "trajectory"),
        None => {
            let j1 = engine::joint_law(mu1, n, z0, budget)?;
            let j2 = engine::joint_law(mu2, n, z0, budget)?;
            (joint::joint_tv(&j1, &j2)?, "pair")
        }
    };
    let d = tv_distance(&mu1.measure, &mu2.measure);
    let scale = z0 as f64 * joint::joint_tv_constant(mu1.mean_m, mu2.mean_m, n);
    Ok(VerificationReport::new(
        "lemma-joint-tv",
        json!({ "mu1": mu1.label, "mu2": mu2.label, "n": n, "z0": z0, "scope": scope }),
        lhs.distance,
        scale * d.distance,
        NUMERIC_TOLERANCE + lhs.slack + scale * d.slack,
    ))
}

/// Point `q̄ > q` where the pgf slope drops below one: the midpoint of
/// `[q, 1]`, halved toward `q` until `f'(q̄) < 1 - 1e-6`.
pub fn contraction_point(law: &OffspringLaw, q: f64) -> Option<f64> {
    let mut qbar = 0.5 * (q + 1.0);
    for _ in 0..64 {
        if law.eval_pgf_derivative(qbar) < 1.0 - 1e-6 {
            return Some(qbar);
        }
        qbar = 0.5 * (q + qbar);
    }
    None
}

/// `|f1^{(n)}(0) - f2^{(n)}(0)| <= (Σ_{k<=n} γ^k) d_TV` for `n = 1..=n_max`,
/// with `γ = f1'(q̄)`. Reports are inconclusive when no contraction point
/// exists or `d_TV` exceeds the admissible radius `(q̄ - f1(q̄)) / 2`.
pub fn verify_extinction_bound(mu1: &OffspringLaw, mu2: &OffspringLaw, n_max: usize) -> Result<Vec<VerificationReport>> {
    mu1.require_supercritical()?;
    let q = offspring::supercritical_q(mu1)?;
    let qbar = contraction_point(mu1, q);
    let d = tv_distance(&mu1.measure, &mu2.measure);
    let (gamma, radius) = match qbar {
        Some(s) => (mu1.eval_pgf_derivative(s), 0.5 * (s - mu1.eval_pgf(s))),
        None => (1.0, 0.0),
    };
    let inconclusive = qbar.is_none() || d.distance > radius;
    let mut reports = Vec::with_capacity(n_max);
    let (mut f1, mut f2) = (0.0, 0.0);
    let mut geometric = 1.0;
    let mut power = 1.0;
    for n in 1..=n_max {
        f1 = mu1.eval_pgf(f1);
        f2 = mu2.eval_pgf(f2);
        power *= gamma;
        geometric += power;
        reports.push(
            VerificationReport::new(
                "lemma-extinction-lipschitz",
                json!({ "mu1": mu1.label, "mu2": mu2.label, "n": n }),
                (f1 - f2).abs(),
                geometric * d.distance,
                NUMERIC_TOLERANCE + geometric * d.slack,
            )
            .with_details(json!({ "q": q, "q_bar": qbar, "gamma_bar": gamma, "radius": radius, "d_tv": d.distance }))
            .inconclusive_if(inconclusive),
        );
    }
    Ok(reports)
}

/// `sup_s |f1(s) - f2(s)| <= d_TV` over `points` equally spaced `s` in `[0, 1]`.
pub fn verify_pgf_tv(mu1: &OffspringLaw, mu2: &OffspringLaw, points: usize) -> VerificationReport {
    let points = points.max(2);
    let (worst, at) = (0..points)
        .map(|i| {
            let s = i as f64 / (points - 1) as f64;
            ((mu1.eval_pgf(s) - mu2.eval_pgf(s)).abs(), s)
        })
        .fold((0.0, 0.0), |acc, v| if v.0 > acc.0 { v } else { acc });
    let d = tv_distance(&mu1.measure, &mu2.measure);
    VerificationReport::new(
        "lemma-pgf-tv",
        json!({ "mu1": mu1.label, "mu2": mu2.label, "points": points }),
        worst,
        d.distance,
        NUMERIC_TOLERANCE + d.slack,
    )
    .with_details(json!({ "argmax_s": at }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub n: usize,
    pub probability: f64,
    pub slack: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
    pub method: Method,
}

/// How far exact computation reaches and what replaces it beyond.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactRange {
    pub budget: f64,
    /// Exact laws are used while `z0 · max_offspring^n` stays below this.
    pub exact_atoms: usize,
    pub replications: u64,
    pub seed: u64,
    pub population_cap: u64,
}

impl Default for ExactRange {
    fn default() -> Self {
        Self {
            budget: crate::DEFAULT_BUDGET,
            exact_atoms: 20_000,
            replications: 1_000_000,
            seed: 0,
            population_cap: montecarlo::DEFAULT_POPULATION_CAP,
        }
    }
}

impl ExactRange {
    /// Largest `n` whose a priori support bound `z0 · M^n` stays below the
    /// cutoff.
    pub fn reach(&self, law: &OffspringLaw, z0: u64) -> usize {
        let top = law.max_offspring().max(1) as u128;
        if top == 1 {
            return usize::MAX;
        }
        let mut bound = z0 as u128;
        let mut n = 0;
        while bound * top < self.exact_atoms as u128 {
            bound *= top;
            n += 1;
        }
        n
    }

    fn sim_config(&self, n_max: usize, z0: u64) -> SimConfig {
        SimConfig {
            seed: self.seed,
            replications: self.replications,
            n_max,
            z0,
            population_cap: self.population_cap,
            jobs: 0,
        }
    }
}

/// `P[|m̂_n - m| >= eta | Z_{n-1} > 0]` for each `n` in range: exact within
/// reach, Monte Carlo with standard errors beyond.
pub fn consistency_curve(
    mu: &OffspringLaw,
    eta: f64,
    n_range: RangeInclusive<usize>,
    z0: u64,
    range: &ExactRange,
) -> Result<Vec<CurvePoint>> {
    let (lo, hi) = (*n_range.start(), *n_range.end());
    if lo == 0 || lo > hi {
        return Err(Error::OutOfRange(format!("generation range {lo}..={hi} must satisfy 1 <= lo <= hi")));
    }
    let reach = range.reach(mu, z0);
    let table = if hi > reach {
        Some(montecarlo::simulate_paths(mu, &range.sim_config(hi, z0))?)
    } else {
        None
    };
    let mut curve = Vec::with_capacity(hi - lo + 1);
    for n in lo..=hi {
        if n <= reach {
            let e = estimator::estimator_law_for(mu, n, z0, range.budget, true)?;
            let c = estimator::consistency_probability(&e, mu.mean_m, eta)?;
            curve.push(CurvePoint { n, probability: c.probability, slack: c.slack, std_error: None, method: Method::Exact });
        } else {
            let table = table.as_ref().expect("simulated beyond reach");
            let law = montecarlo::empirical_estimator_law(table, n, true)?;
            let surviving: u64 = table.generation(n)?.pairs.iter().filter(|p| p.0 > 0).map(|p| p.2).sum();
            let e = EstimatorLaw { n, z0, conditioned: true, law, survival_probability: f64::NAN };
            let c = estimator::consistency_probability(&e, mu.mean_m, eta)?;
            curve.push(CurvePoint {
                n,
                probability: c.probability,
                slack: 0.0,
                std_error: Some(montecarlo::standard_error(c.probability, surviving)),
                method: Method::MonteCarlo,
            });
        }
    }
    Ok(curve)
}

/// Finds the first `n` in range with conditional deviation probability at
/// most `eps`. The report's `lhs` is the probability there, or the smallest
/// probability seen when no such `n` exists.
pub fn verify_conditional_consistency(
    mu: &OffspringLaw,
    eta: f64,
    eps: f64,
    n_range: RangeInclusive<usize>,
    z0: u64,
    range: &ExactRange,
) -> Result<VerificationReport> {
    mu.require_supercritical()?;
    let curve = consistency_curve(mu, eta, n_range.clone(), z0, range)?;
    let hit = curve.iter().find(|c| c.probability <= eps);
    let point = hit.unwrap_or_else(|| {
        curve.iter().min_by(|a, b| a.probability.total_cmp(&b.probability)).expect("nonempty range")
    });
    let tail: Vec<f64> = curve.iter().rev().take(4).map(|c| c.probability).collect();
    let decreasing = tail.windows(2).all(|w| w[0] < w[1]);
    Ok(VerificationReport::new(
        "thm-conditional-consistency",
        json!({ "mu": mu.label, "eta": eta, "eps": eps, "n_range": [n_range.start(), n_range.end()], "z0": z0 }),
        point.probability,
        eps,
        point.slack,
    )
    .with_details(json!({
        "threshold_n": hit.map(|c| c.n),
        "decreasing_tail": decreasing,
        "curve": curve,
    })))
}

/// `P[Bin(n, p) <= k]`.
fn binomial_cdf(n: usize, p: f64, k: u64) -> f64 {
    let q = 1.0 - p;
    if q == 0.0 {
        return if k as usize >= n { 1.0 } else { 0.0 };
    }
    let mut pmf = q.powi(n as i32);
    let mut total = 0.0;
    for i in 0..=(k.min(n as u64) as usize) {
        total += pmf;
        if i < n {
            pmf *= (n - i) as f64 / (i + 1) as f64 * p / q;
        }
    }
    total.min(1.0)
}

/// `P[Z_n = k | Z_n > 0] <= P[Bin(n, p) <= k] + z0 q^{z0} m_*^n / P[Z_n > 0]`
/// with `p = 1 - f'(q)` read off the survival transform and `m_*` the mean of
/// the extinction transform. Individuals with an infinite line of descent
/// branch with probability `p` per generation, which gives the binomial
/// term; surviving lines that die out later give the second.
pub fn verify_conditional_occupancy(
    mu: &OffspringLaw,
    k: u64,
    n_range: RangeInclusive<usize>,
    z0: u64,
    budget: f64,
) -> Result<Vec<VerificationReport>> {
    mu.require_supercritical()?;
    let q = offspring::supercritical_q(mu)?;
    let slope = mu.eval_pgf_derivative(q);
    let hat = offspring::survival_transform(mu)?;
    let hat_one = hat.mass_at(1);
    let p = 1.0 - hat_one;
    let star_mean = if q > 0.0 { offspring::extinction_transform(mu)?.mean_m } else { 0.0 };
    let mut reports = Vec::new();
    let mut previous = f64::INFINITY;
    for n in n_range {
        let g = engine::propagate(mu, n, z0, budget)?;
        let alive = 1.0 - g.mass_at_zero();
        let occupancy = if k == 0 { 0.0 } else { g.law.mass_at(&int_point(k)) / alive };
        let binomial = binomial_cdf(n, p, k);
        let leak = z0 as f64 * q.powi(z0 as i32) * star_mean.powi(n as i32) / alive;
        let decreasing = occupancy <= previous + NUMERIC_TOLERANCE;
        previous = occupancy;
        reports.push(
            VerificationReport::new(
                "lemma-conditional-occupancy",
                json!({ "mu": mu.label, "k": k, "n": n, "z0": z0 }),
                occupancy,
                binomial + leak,
                NUMERIC_TOLERANCE + g.law.defect() / alive,
            )
            .with_details(json!({
                "binomial_term": binomial,
                "extinction_term": leak,
                "branching_probability": p,
                "survival_mass_at_one": hat_one,
                "slope_at_q": slope,
                "extinction_mean": star_mean,
                "decreasing": decreasing,
            })),
        );
    }
    Ok(reports)
}

/// Weak law of large numbers for sums of offspring counts on `k = 1..=k_max`.
///
/// The first report locates `k0` with `P[|S_k/k - m| >= eta] <= eps` for all
/// `k >= k0` in the grid. The second checks the exact probabilities against
/// the three-term bound from truncating at `ℓ`:
/// `9 ℓ² / (eta² k) + 3 ψ1(ℓ+1) / eta + 1{ψ1(ℓ+1) >= eta/3}`.
pub fn verify_wlln(mu: &OffspringLaw, eta: f64, eps: f64, k_max: u64, budget: f64) -> Result<Vec<VerificationReport>> {
    if !(eta > 0.0 && eps > 0.0) || k_max == 0 {
        return Err(Error::OutOfRange("wlln check needs eta, eps > 0 and k_max >= 1".into()));
    }
    let m = mu.mean_m;
    let mut sum = mu.measure.clone();
    let mut probs = Vec::with_capacity(k_max as usize);
    let mut slack: f64 = 0.0;
    for k in 1..=k_max {
        if k > 1 {
            sum = measures::convolve(&sum, &mu.measure, budget / k_max as f64)?;
        }
        let kf = k as f64;
        let p: f64 = sum
            .atoms()
            .filter(|(x, _)| (measures::point_value(x) / kf - m).abs() >= eta - 1e-12)
            .map(|(_, w)| w)
            .sum();
        probs.push(p);
        slack = slack.max(sum.defect());
    }
    // k0: start of the final run of probabilities at most eps
    let run = probs.iter().rev().take_while(|&&p| p <= eps).count();
    let k0 = (run > 0).then(|| k_max - run as u64 + 1);
    let lhs = match k0 {
        Some(k0) => probs[(k0 - 1) as usize..].iter().copied().fold(0.0, f64::max),
        None => probs[probs.len() - 1],
    };
    let instance = json!({ "mu": mu.label, "eta": eta, "eps": eps, "k_max": k_max });
    let first = VerificationReport::new("lemma-wlln", instance.clone(), lhs, eps, slack)
        .with_details(json!({ "k0": k0, "probabilities": probs }));

    let top = mu.max_offspring() + 1;
    let ell = (0..=top)
        .find(|&l| {
            let tail = offspring::psi1_tail(mu, l + 1);
            3.0 * tail / eta <= 0.5 * eps && tail < eta / 3.0
        })
        .unwrap_or(top);
    let tail = offspring::psi1_tail(mu, ell + 1);
    let bias = if tail >= eta / 3.0 { 1.0 } else { 0.0 };
    let markov = 3.0 * tail / eta;
    let chebyshev = |k: u64| 9.0 * (ell * ell) as f64 / (eta * eta * k as f64);
    let (gap, worst_k) = probs
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let k = i as u64 + 1;
            (p - (chebyshev(k) + markov + bias).min(1.0), k)
        })
        .fold((f64::NEG_INFINITY, 0), |acc, v| if v.0 > acc.0 { v } else { acc });
    let second = VerificationReport::new("lemma-wlln", instance, gap, 0.0, NUMERIC_TOLERANCE + slack).with_details(json!({
        "ell": ell,
        "markov_term": markov,
        "bias_term": bias,
        "chebyshev_term_at_k_max": chebyshev(k_max),
        "worst_k": worst_k,
    }));
    Ok(vec![first, second])
}

/// Unconditional estimator law = survival-weighted conditional law plus the
/// extinct mass at 0, atom by atom.
pub fn verify_decomposition_identity(mu: &OffspringLaw, n: usize, z0: u64, budget: f64) -> Result<VerificationReport> {
    let joint = engine::joint_law(mu, n, z0, budget)?;
    let plain = estimator::estimator_law(&joint, false)?;
    let cond = estimator::estimator_law(&joint, true)?;
    let s = cond.survival_probability;
    let zero = int_point(0);
    let mut points: Vec<_> = plain.law.support().iter().chain(cond.law.support()).copied().collect();
    points.sort();
    points.dedup();
    let gap = points
        .iter()
        .map(|x| {
            let extinct = if *x == zero { 1.0 - s } else { 0.0 };
            (plain.law.mass_at(x) - (cond.law.mass_at(x) * s + extinct)).abs()
        })
        .fold(0.0, f64::max);
    Ok(VerificationReport::new(
        "lemma-decomposition-identity",
        json!({ "mu": mu.label, "n": n, "z0": z0 }),
        gap,
        0.0,
        1e-12 + plain.defect(),
    )
    .with_details(json!({ "survival_probability": s })))
}

/// `|m1 - m2| <= min_ℓ (2 ℓ d_TV + 2 max(ψ1^{(1)}(ℓ), ψ1^{(2)}(ℓ)))`.
pub fn verify_mean_continuity(mu1: &OffspringLaw, mu2: &OffspringLaw) -> VerificationReport {
    let d = tv_distance(&mu1.measure, &mu2.measure);
    let top = mu1.max_offspring().max(mu2.max_offspring()) + 1;
    let (rhs, ell) = (0..=top)
        .map(|l| {
            let tail = offspring::psi1_tail(mu1, l).max(offspring::psi1_tail(mu2, l));
            (2.0 * l as f64 * d.distance + 2.0 * tail, l)
        })
        .fold((f64::INFINITY, 0), |acc, v| if v.0 < acc.0 { v } else { acc });
    VerificationReport::new(
        "lemma-mean-continuity",
        json!({ "mu1": mu1.label, "mu2": mu2.label }),
        (mu1.mean_m - mu2.mean_m).abs(),
        rhs,
        NUMERIC_TOLERANCE + 2.0 * ell as f64 * d.slack,
    )
    .with_details(json!({ "d_tv": d.distance, "ell": ell }))
}

/// Prohorov and total variation coincide on integer supports.
pub fn verify_prohorov_tv(a: &DiscreteMeasure, b: &DiscreteMeasure) -> Result<VerificationReport> {
    if !(a.is_integer() && b.is_integer()) {
        return Err(Error::NonIntegerSupport);
    }
    let rho = metrics::prohorov(a, b).value;
    let tv = tv_distance(a, b).distance;
    Ok(VerificationReport::new(
        "identity-prohorov-tv",
        json!({ "atoms": [a.len(), b.len()] }),
        (rho - tv).abs(),
        0.0,
        1e-9,
    )
    .with_details(json!({ "prohorov": rho, "tv": tv })))
}

/// `ρ² <= (3/2) β`.
pub fn verify_rho_beta(a: &DiscreteMeasure, b: &DiscreteMeasure) -> Result<VerificationReport> {
    let rho = metrics::prohorov(a, b).value;
    let beta = metrics::bounded_lipschitz(a, b)?.value;
    Ok(VerificationReport::new("bound-rho-beta", json!({ "atoms": [a.len(), b.len()] }), rho * rho, 1.5 * beta, 1e-8)
        .with_details(json!({ "prohorov": rho, "bounded_lipschitz": beta })))
}

/// The coupling built at `eps = ρ(a, b)` has the right marginals and puts
/// all but `eps` of the mass within distance `eps`. `lhs` is the worse of the
/// marginal error and the band-mass shortfall.
pub fn verify_strassen(a: &DiscreteMeasure, b: &DiscreteMeasure) -> Result<VerificationReport> {
    let eps = metrics::prohorov(a, b).value;
    let c = strassen_coupling(a, b, eps)?;
    let marginal = c.marginal_error(a, b);
    let shortfall = (a.total_mass().max(b.total_mass()) - eps) - c.band_mass();
    Ok(VerificationReport::new(
        "thm-strassen-coupling",
        json!({ "atoms": [a.len(), b.len()] }),
        marginal.max(shortfall),
        0.0,
        NUMERIC_TOLERANCE,
    )
    .with_details(json!({ "eps": eps, "marginal_error": marginal, "band_mass": c.band_mass() })))
}

/// `P[Z_n = 0]` from the propagated law equals `f^{(n)}(0)^{z0}`.
pub fn verify_z0_extinction(mu: &OffspringLaw, n: usize, z0: u64, budget: f64) -> Result<VerificationReport> {
    let g = engine::propagate(mu, n, z0, budget)?;
    let closed = engine::extinction_by_n(mu, n, z0);
    Ok(VerificationReport::new(
        "z0-extinction",
        json!({ "mu": mu.label, "n": n, "z0": z0 }),
        (g.mass_at_zero() - closed).abs(),
        0.0,
        1e-12 + g.law.defect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::offspring::{build, FamilySpec};

    fn binary(p: f64) -> OffspringLaw {
        build(&FamilySpec::Binary { p }, 0.0).unwrap()
    }

    fn dirac(k: u64) -> OffspringLaw {
        OffspringLaw::from_measure(DiscreteMeasure::dirac_int(k), format!("dirac({k})")).unwrap()
    }

    #[test]
    fn identical_laws_give_zero_sides() {
        let mu = binary(0.75);
        let r = verify_joint_tv_bound(&mu, &mu, 3, 2, 0.0).unwrap();
        assert_eq!((r.lhs, r.rhs), (0.0, 0.0));
        assert!(r.pass);
    }

    #[test]
    fn first_generation_is_tight() {
        let (a, b) = (binary(0.75), binary(0.7));
        let r = verify_joint_tv_bound(&a, &b, 1, 1, 0.0).unwrap();
        assert!((r.lhs - r.rhs).abs() < 1e-15);
    }

    #[test]
    fn extinction_bound_for_nearby_binary() {
        let reports = verify_extinction_bound(&binary(0.75), &binary(0.74), 20).unwrap();
        assert!(reports.iter().all(|r| r.holds()), "{reports:?}");
    }

    #[test]
    fn dirac_two_is_always_consistent() {
        let r = verify_conditional_consistency(&dirac(2), 0.1, 0.01, 1..=6, 1, &ExactRange::default()).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert_eq!(r.details["threshold_n"], 1);
    }

    #[test]
    fn binary_consistency_threshold_within_exact_range() {
        let r = verify_conditional_consistency(&binary(0.75), 0.4, 0.1, 1..=12, 1, &ExactRange::default()).unwrap();
        assert!(r.holds());
        let curve = r.details["curve"].as_array().unwrap();
        assert!(curve.iter().all(|c| c["method"] == "exact"));
        assert_eq!(curve[1]["probability"].as_f64().unwrap(), 1.0);
    }

    #[test]
    fn beyond_reach_switches_to_simulation() {
        let range = ExactRange { exact_atoms: 40, replications: 20_000, ..ExactRange::default() };
        let curve = consistency_curve(&binary(0.75), 0.4, 4..=6, 1, &range).unwrap();
        assert_eq!(curve[0].method, Method::Exact);
        assert_eq!(curve[2].method, Method::MonteCarlo);
        assert!(curve[2].std_error.unwrap() > 0.0);
    }

    #[test]
    fn occupancy_bound_and_ingredients() {
        let reports = verify_conditional_occupancy(&binary(0.75), 2, 1..=12, 1, 1e-12).unwrap();
        assert!(reports.iter().all(|r| r.holds()), "{reports:?}");
        assert!(reports.iter().all(|r| r.details["decreasing"] == true));
        let d = &reports[0].details;
        assert!((d["survival_mass_at_one"].as_f64().unwrap() - d["slope_at_q"].as_f64().unwrap()).abs() < 1e-12);
    }

    #[test]
    fn occupancy_below_reachable_size_is_zero() {
        let reports = verify_conditional_occupancy(&dirac(2), 1, 1..=4, 1, 0.0).unwrap();
        assert!(reports.iter().all(|r| r.lhs == 0.0 && r.holds()));
    }

    #[test]
    fn wlln_threshold_exists() {
        let reports = verify_wlln(&binary(0.75), 0.25, 0.05, 200, 1e-12).unwrap();
        assert!(reports.iter().all(|r| r.holds()), "{:?}", reports[1]);
        assert!(reports[0].details["k0"].as_u64().is_some());
        let zero = verify_wlln(&dirac(2), 0.25, 0.05, 50, 0.0).unwrap();
        assert_eq!(zero[0].lhs, 0.0);
    }

    #[test]
    fn chebyshev_ingredient_formula() {
        let reports = verify_wlln(&binary(0.75), 0.25, 0.05, 10, 0.0).unwrap();
        let ell = reports[1].details["ell"].as_u64().unwrap() as f64;
        let expected = 9.0 / (0.25f64 * 0.25) * ell * ell / 10.0;
        assert_eq!(reports[1].details["chebyshev_term_at_k_max"].as_f64().unwrap(), expected);
    }

    #[test]
    fn decomposition_identity_cases() {
        let r = verify_decomposition_identity(&binary(0.75), 2, 1, 0.0).unwrap();
        assert!(r.holds());
        assert!((r.details["survival_probability"].as_f64().unwrap() - 0.75).abs() < 1e-15);
        assert!(verify_decomposition_identity(&binary(0.75), 3, 2, 0.0).unwrap().holds());
        let r = verify_decomposition_identity(&dirac(3), 3, 1, 0.0).unwrap();
        assert_eq!(r.details["survival_probability"].as_f64().unwrap(), 1.0);
    }

    #[test]
    fn binomial_cdf_small_cases() {
        assert!((binomial_cdf(3, 0.5, 1) - 0.5).abs() < 1e-15);
        assert_eq!(binomial_cdf(4, 1.0, 3), 0.0);
        assert_eq!(binomial_cdf(4, 1.0, 4), 1.0);
        assert_eq!(binomial_cdf(0, 0.3, 0), 1.0);
    }

    #[test]
    fn mean_continuity_and_metric_identities() {
        assert!(verify_mean_continuity(&binary(0.75), &binary(0.7)).holds());
        let a = DiscreteMeasure::from_dense(&[0.2, 0.5, 0.3], 0.0).unwrap();
        let b = DiscreteMeasure::from_dense(&[0.4, 0.1, 0.1, 0.4], 0.0).unwrap();
        assert!(verify_prohorov_tv(&a, &b).unwrap().holds());
        assert!(verify_rho_beta(&a, &b).unwrap().holds());
        assert!(verify_strassen(&a, &b).unwrap().holds());
        assert!(verify_z0_extinction(&binary(0.75), 4, 3, 0.0).unwrap().holds());
    }
}
