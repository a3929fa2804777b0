//! Offspring laws: parametric families, pgf evaluation, extinction
//! probability and the survival/extinction decomposition.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{self, int_point, DiscreteMeasure};

/// Largest truncation point accepted for budget-driven truncation.
pub const MAX_TRUNCATION: u64 = 5_000_000;

/// Half-width of the band around mean one reported as numerically critical.
pub const CRITICAL_DEAD_ZONE: f64 = 1e-9;

/// Required fixed-point residual for the extinction probability.
pub const EXTINCTION_TOLERANCE: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilySpec {
    /// Mass `1 - p` at 0 and `p` at 2.
    Binary { p: f64 },
    ThreePoint { p0: f64, p2: f64, p3: f64 },
    /// Poisson(lambda) truncated at `k`, or at a budget-driven point when
    /// `k` is absent.
    Poisson {
        lambda: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        k: Option<u64>,
    },
    /// `c_p (k+1)^{-p}` for `p > 2`, truncated like Poisson.
    Polynomial {
        p: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        k: Option<u64>,
    },
    /// Weights indexed by offspring count.
    Raw { weights: Vec<f64> },
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilySpec::Binary { p } => write!(f, "binary(p={p})"),
            FamilySpec::ThreePoint { p0, p2, p3 } => write!(f, "three_point(p0={p0},p2={p2},p3={p3})"),
            FamilySpec::Poisson { lambda, k: Some(k) } => write!(f, "poisson(lambda={lambda},k={k})"),
            FamilySpec::Poisson { lambda, k: None } => write!(f, "poisson(lambda={lambda})"),
            FamilySpec::Polynomial { p, k: Some(k) } => write!(f, "polynomial(p={p},k={k})"),
            FamilySpec::Polynomial { p, k: None } => write!(f, "polynomial(p={p})"),
            FamilySpec::Raw { weights } => write!(f, "raw(len={})", weights.len()),
        }
    }
}

/// Closed-form bound on the first-moment tail of an untruncated family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TailBound {
    Poisson { lambda: f64 },
    Polynomial { p: f64, c: f64 },
}

impl TailBound {
    /// Upper bound on `sum_{k >= from} k mu[{k}]`.
    pub fn psi1_from(&self, from: u64) -> f64 {
        match *self {
            TailBound::Poisson { lambda } => {
                // sum_{k>=m} k pois(k) = lambda P[X >= m-1], Chernoff for m-1 > lambda
                if from == 0 {
                    return lambda;
                }
                let a = (from - 1) as f64;
                if a <= lambda {
                    return lambda;
                }
                let log_tail = -lambda + a * (1.0 + lambda.ln() - a.ln());
                (lambda * log_tail.exp()).min(lambda)
            }
            TailBound::Polynomial { p, c } => {
                // sum_{j >= m+1} j^{1-p} <= int_m^inf x^{1-p} dx; the k = 0 term is 0
                let m = from.max(1) as f64;
                c * m.powf(2.0 - p) / (p - 2.0)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffspringLaw {
    pub measure: DiscreteMeasure,
    /// Mean of the retained support.
    pub mean_m: f64,
    /// Bound on the first-moment tail of the discarded mass, for the
    /// truncated families.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail: Option<TailBound>,
    pub label: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criticality {
    Subcritical,
    NumericallyCritical,
    Supercritical,
}

impl Criticality {
    pub fn as_str(self) -> &'static str {
        match self {
            Criticality::Subcritical => "subcritical",
            Criticality::NumericallyCritical => "numerically critical",
            Criticality::Supercritical => "supercritical",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extinction {
    pub q: f64,
    pub criticality: Criticality,
    /// `|f(q) - q|` at the returned root.
    pub residual: f64,
    pub iterations: usize,
}

impl OffspringLaw {
    pub fn from_measure(measure: DiscreteMeasure, label: impl Into<String>) -> Result<Self> {
        if !measure.is_integer() {
            return Err(Error::NonIntegerSupport);
        }
        Ok(Self { mean_m: measures::mean(&measure), measure, tail: None, label: label.into() })
    }

    /// Mixture `(1 - w) law + w δ_at`.
    pub fn contaminate(&self, w: f64, at: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::OutOfRange(format!("mixture weight {w} not in [0,1]")));
        }
        let atoms = self
            .measure
            .atoms()
            .map(|(x, p)| (x, (1.0 - w) * p))
            .chain(std::iter::once((int_point(at), w)));
        let measure = DiscreteMeasure::from_atoms(atoms, (1.0 - w) * self.measure.defect())?;
        let label = format!("{}+{}·δ{}", self.label, w, at);
        let mut out = Self::from_measure(measure, label)?;
        out.tail = self.tail;
        Ok(out)
    }

    /// `(value, probability)` pairs of the retained support.
    pub fn int_atoms(&self) -> Vec<(u64, f64)> {
        self.measure.int_atoms().expect("offspring support is integer")
    }

    pub fn max_offspring(&self) -> u64 {
        self.measure.max_point().map_or(0, |p| p.to_integer())
    }

    pub fn mass_at(&self, k: u64) -> f64 {
        self.measure.mass_at(&int_point(k))
    }

    pub fn criticality(&self) -> Criticality {
        if (self.mean_m - 1.0).abs() <= CRITICAL_DEAD_ZONE {
            Criticality::NumericallyCritical
        } else if self.mean_m > 1.0 {
            Criticality::Supercritical
        } else {
            Criticality::Subcritical
        }
    }

    pub fn require_supercritical(&self) -> Result<()> {
        match self.criticality() {
            Criticality::Supercritical => Ok(()),
            c => Err(Error::NotSupercritical { mean: self.mean_m, class: c.as_str() }),
        }
    }

    /// `f(s)` without range checks; `s` is assumed to lie in `[0, 1]`.
    pub(crate) fn eval_pgf(&self, s: f64) -> f64 {
        let mut acc = 0.0;
        let mut pow = 1.0;
        let mut at = 0u64;
        for (k, w) in self.int_atoms_iter() {
            pow *= pow_u64(s, k - at);
            at = k;
            acc += w * pow;
        }
        acc
    }

    pub(crate) fn eval_pgf_derivative(&self, s: f64) -> f64 {
        let mut acc = 0.0;
        for (k, w) in self.int_atoms_iter() {
            if k > 0 {
                acc += k as f64 * w * pow_u64(s, k - 1);
            }
        }
        acc
    }

    fn int_atoms_iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.measure.atoms().map(|(x, w)| (x.to_integer(), w))
    }
}

fn pow_u64(s: f64, k: u64) -> f64 {
    if k <= i32::MAX as u64 {
        s.powi(k as i32)
    } else {
        s.powf(k as f64)
    }
}

pub fn build(spec: &FamilySpec, budget: f64) -> Result<OffspringLaw> {
    if !(budget.is_finite() && budget >= 0.0) {
        return Err(Error::OutOfRange(format!("budget {budget} must be finite and >= 0")));
    }
    let label = spec.to_string();
    let invalid = |msg: String| Error::InvalidFamily(msg);
    match spec {
        FamilySpec::Binary { p } => {
            if !(0.0..=1.0).contains(p) {
                return Err(invalid(format!("binary p = {p} not in [0,1]")));
            }
            let measure = DiscreteMeasure::from_dense(&[1.0 - p, 0.0, *p], 0.0)?;
            OffspringLaw::from_measure(measure, label)
        }
        FamilySpec::ThreePoint { p0, p2, p3 } => {
            let ws = [*p0, *p2, *p3];
            if ws.iter().any(|w| !(0.0..=1.0).contains(w)) {
                return Err(invalid(format!("three_point weights {ws:?} not in [0,1]")));
            }
            if (ws.iter().sum::<f64>() - 1.0).abs() > measures::MASS_TOLERANCE {
                return Err(invalid(format!("three_point weights {ws:?} do not sum to 1")));
            }
            let measure = DiscreteMeasure::from_dense(&[*p0, 0.0, *p2, *p3], 0.0)?;
            OffspringLaw::from_measure(measure, label)
        }
        FamilySpec::Raw { weights } => {
            if weights.is_empty() || weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
                return Err(invalid("raw weights must be non-empty and >= 0".into()));
            }
            let measure = DiscreteMeasure::from_dense(weights, 0.0)
                .map_err(|e| invalid(format!("raw weights: {e}")))?;
            OffspringLaw::from_measure(measure, label)
        }
        FamilySpec::Poisson { lambda, k } => build_poisson(*lambda, *k, budget, label),
        FamilySpec::Polynomial { p, k } => build_polynomial(*p, *k, budget, label),
    }
}

fn build_poisson(lambda: f64, k: Option<u64>, budget: f64, label: String) -> Result<OffspringLaw> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidFamily(format!("poisson lambda = {lambda} must be > 0")));
    }
    let tail = TailBound::Poisson { lambda };
    let cut = match k {
        Some(k) => k,
        None => {
            let mut cut = lambda.floor() as u64 + 1;
            while tail.psi1_from(cut + 1) > budget {
                cut += 1;
                if cut > MAX_TRUNCATION {
                    return Err(Error::TruncationInfeasible(format!(
                        "poisson(lambda={lambda}) needs more than {MAX_TRUNCATION} atoms for budget {budget:e}"
                    )));
                }
            }
            cut
        }
    };
    // log-space recursion keeps large lambda from overflowing
    let ln_lambda = lambda.ln();
    let mut ln_p = -lambda;
    let mut probs = Vec::with_capacity(cut as usize + 1);
    probs.push(ln_p.exp());
    for j in 1..=cut {
        ln_p += ln_lambda - (j as f64).ln();
        probs.push(ln_p.exp());
    }
    // sum the discarded tail directly until its terms underflow
    let mut defect = 0.0;
    let mut j = cut;
    loop {
        j += 1;
        ln_p += ln_lambda - (j as f64).ln();
        let term = ln_p.exp();
        defect += term;
        if (j as f64 > lambda && term < defect * 1e-17) || term == 0.0 && j as f64 > lambda {
            break;
        }
    }
    let measure = DiscreteMeasure::from_dense(&probs, defect)?;
    let mut law = OffspringLaw::from_measure(measure, label)?;
    law.tail = Some(tail);
    Ok(law)
}

/// `sum_{j > n} j^{-p}`: explicit terms up to 1000, then Euler-Maclaurin.
fn zeta_tail(p: f64, n: u64) -> f64 {
    const SWITCH: u64 = 1000;
    let em = |n: f64| {
        n.powf(1.0 - p) / (p - 1.0) - 0.5 * n.powf(-p) + p * n.powf(-p - 1.0) / 12.0
            - p * (p + 1.0) * (p + 2.0) * n.powf(-p - 3.0) / 720.0
    };
    if n >= SWITCH {
        return em(n as f64);
    }
    let explicit: f64 = (n + 1..=SWITCH).rev().map(|j| (j as f64).powf(-p)).sum();
    explicit + em(SWITCH as f64)
}

/// Normalizer `c_p = 1 / sum_{k >= 0} (k+1)^{-p}`.
pub fn polynomial_normalizer(p: f64) -> f64 {
    1.0 / zeta_tail(p, 0)
}

fn build_polynomial(p: f64, k: Option<u64>, budget: f64, label: String) -> Result<OffspringLaw> {
    if !(p.is_finite() && p > 2.0) {
        return Err(Error::InvalidFamily(format!(
            "polynomial exponent p = {p} must exceed 2 (mean does not exist otherwise)"
        )));
    }
    let c = polynomial_normalizer(p);
    let tail = TailBound::Polynomial { p, c };
    let cut = match k {
        Some(k) => k,
        None => {
            // c (K+1)^{2-p} / (p-2) <= budget
            let need = (c / ((p - 2.0) * budget)).powf(1.0 / (p - 2.0));
            if !(need.is_finite() && need - 1.0 <= MAX_TRUNCATION as f64) {
                return Err(Error::TruncationInfeasible(format!(
                    "polynomial(p={p}) needs about {need:.3e} atoms for budget {budget:e}; pass an explicit k"
                )));
            }
            let mut cut = (need - 1.0).ceil().max(0.0) as u64;
            while tail.psi1_from(cut + 1) > budget {
                cut += 1;
            }
            cut
        }
    };
    let probs: Vec<f64> = (0..=cut).map(|j| c * ((j + 1) as f64).powf(-p)).collect();
    let defect = c * zeta_tail(p, cut + 1);
    let measure = DiscreteMeasure::from_dense(&probs, defect)?;
    let mut law = OffspringLaw::from_measure(measure, label)?;
    law.tail = Some(tail);
    Ok(law)
}

fn check_unit(s: f64) -> Result<()> {
    if (0.0..=1.0).contains(&s) {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!("pgf argument {s} not in [0,1]")))
    }
}

pub fn pgf(law: &OffspringLaw, s: f64) -> Result<f64> {
    check_unit(s)?;
    Ok(law.eval_pgf(s))
}

pub fn pgf_derivative(law: &OffspringLaw, s: f64) -> Result<f64> {
    check_unit(s)?;
    if s == 1.0 {
        return Ok(law.mean_m);
    }
    Ok(law.eval_pgf_derivative(s))
}

/// `f^{(n)}(s)`, the n-th functional iterate.
pub fn pgf_iterate(law: &OffspringLaw, s: f64, n: usize) -> Result<f64> {
    check_unit(s)?;
    Ok((0..n).fold(s, |acc, _| law.eval_pgf(acc)))
}

/// Smallest root of `f(s) = s` on `[0, 1)`. Laws that are not
/// supercritical return `q = 1` with their classification.
pub fn extinction_probability(law: &OffspringLaw) -> Result<Extinction> {
    let criticality = law.criticality();
    if criticality != Criticality::Supercritical {
        return Ok(Extinction { q: 1.0, criticality, residual: 0.0, iterations: 0 });
    }
    if law.mass_at(0) == 0.0 {
        return Ok(Extinction { q: 0.0, criticality, residual: 0.0, iterations: 0 });
    }
    let g = |s: f64| law.eval_pgf(s) - s;

    // g(0) > 0; move the upper end toward 1 until g turns negative
    let mut eta = 0.5;
    let mut iterations = 0;
    while g(1.0 - eta) >= 0.0 {
        eta *= 0.5;
        iterations += 1;
        if iterations > 60 {
            return Err(Error::NoConvergence { iterations, residual: g(1.0 - eta).abs() });
        }
    }
    let (mut lo, mut hi) = (0.0, 1.0 - eta);
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }

    // safeguarded Newton inside the bracket
    let mut x = 0.5 * (lo + hi);
    let mut newton_steps = 0;
    loop {
        let gx = g(x);
        if gx == 0.0 {
            break;
        }
        if gx > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if gx.abs() <= 0.01 * EXTINCTION_TOLERANCE || hi - lo <= f64::EPSILON * hi {
            break;
        }
        let slope = law.eval_pgf_derivative(x) - 1.0;
        let step = if newton_steps < 50 && slope != 0.0 { x - gx / slope } else { f64::NAN };
        newton_steps += 1;
        iterations += 1;
        x = if step > lo && step < hi { step } else { 0.5 * (lo + hi) };
        if iterations > 500 {
            break;
        }
    }
    let residual = g(x).abs();
    if residual > EXTINCTION_TOLERANCE {
        return Err(Error::NoConvergence { iterations, residual });
    }
    Ok(Extinction { q: x, criticality, residual, iterations })
}

/// `q` for supercritical laws, an error otherwise.
pub(crate) fn supercritical_q(law: &OffspringLaw) -> Result<f64> {
    law.require_supercritical()?;
    Ok(extinction_probability(law)?.q)
}

/// Offspring law of individuals with an infinite line of descent, obtained
/// by binomially thinning each atom with retention probability `1 - q`.
pub fn survival_transform(law: &OffspringLaw) -> Result<OffspringLaw> {
    let q = supercritical_q(law)?;
    let label = format!("survival[{}]", law.label);
    if q == 0.0 {
        let mut out = OffspringLaw::from_measure(law.measure.clone(), label)?;
        out.tail = law.tail;
        return Ok(out);
    }
    let atoms = law.int_atoms();
    let top = law.max_offspring() as usize;
    let mut ln_fact = Vec::with_capacity(top + 1);
    ln_fact.push(0.0f64);
    for j in 1..=top {
        ln_fact.push(ln_fact[j - 1] + (j as f64).ln());
    }
    let (ln_keep, ln_q) = ((1.0 - q).ln(), q.ln());
    let mut hat = vec![0.0; top + 1];
    for &(k, w) in &atoms {
        let k = k as usize;
        for (j, slot) in hat.iter_mut().enumerate().take(k + 1).skip(1) {
            let ln_binom = ln_fact[k] - ln_fact[j] - ln_fact[k - j];
            *slot += w * (ln_binom + j as f64 * ln_keep + (k - j) as f64 * ln_q).exp();
        }
    }
    for v in &mut hat {
        *v /= 1.0 - q;
    }
    let defect = law.measure.defect() / (1.0 - q);
    let mass: f64 = hat.iter().sum();
    // absorb root-finding rounding so the mass invariant holds exactly
    let defect = if (mass + defect - 1.0).abs() <= measures::MASS_TOLERANCE { defect } else { (1.0 - mass).max(0.0) };
    let measure = DiscreteMeasure::from_dense(&hat, defect)?;
    OffspringLaw::from_measure(measure, label)
}

/// Offspring law conditioned on extinction: `mu*[{k}] = mu[{k}] q^{k-1}`.
pub fn extinction_transform(law: &OffspringLaw) -> Result<OffspringLaw> {
    let q = supercritical_q(law)?;
    if q == 0.0 {
        return Err(Error::ZeroExtinction);
    }
    let atoms: Vec<_> = law
        .int_atoms()
        .into_iter()
        .map(|(k, w)| (int_point(k), w * q.powf(k as f64 - 1.0)))
        .collect();
    let mass: f64 = atoms.iter().map(|a| a.1).sum();
    let measure = DiscreteMeasure::from_atoms(atoms, (1.0 - mass).max(0.0))?;
    OffspringLaw::from_measure(measure, format!("extinction[{}]", law.label))
}

/// First-moment tail `sum_{k >= ell} k mu[{k}]`, including the bound on the
/// discarded mass when the law is a truncated family.
pub fn psi1_tail(law: &OffspringLaw, ell: u64) -> f64 {
    let retained: f64 = law
        .int_atoms_iter()
        .filter(|&(k, _)| k >= ell)
        .map(|(k, w)| k as f64 * w)
        .sum();
    let beyond = match law.tail {
        Some(t) if law.measure.defect() > 0.0 => t.psi1_from(ell.max(law.max_offspring() + 1)),
        _ => 0.0,
    };
    retained + beyond
}
