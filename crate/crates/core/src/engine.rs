//! Exact finite-horizon laws of `Z_n` and of the pair `(Z_{n-1}, Z_n)`.
//!
//! Laws of generation sizes are held as dense vectors indexed by population
//! size. One step maps `ν` to `Σ_j ν(j) μ^{*j}`, building the convolution
//! powers incrementally from the sparse offspring atoms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{self, dense, int_point, DiscreteMeasure};
use crate::offspring::{self, OffspringLaw};

/// Largest dense support the engine will allocate for one generation.
pub const SUPPORT_LIMIT: usize = 1 << 22;

/// Cap on multiply-adds in one generation step. A step from a support of
/// length `P` costs about `P^2 · max_offspring · atoms / 2`.
pub const WORK_LIMIT: f64 = 2e10;

/// Survival probabilities below this are treated as null events.
pub const NULL_SURVIVAL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationLaw {
    pub n: usize,
    pub z0: u64,
    pub law: DiscreteMeasure,
}

impl GenerationLaw {
    pub fn mass_at_zero(&self) -> f64 {
        self.law.mass_at(&int_point(0))
    }

    pub fn mean(&self) -> f64 {
        measures::mean(&self.law)
    }
}

/// Law of `(Z_{n-1}, Z_n)` as sorted `(j, k, probability)` triplets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointLaw {
    pub n: usize,
    pub z0: u64,
    pub entries: Vec<(u64, u64, f64)>,
    pub defect: f64,
    /// `P[Z_{n-1} > 0]` when the law has been conditioned on survival.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub survival: Option<f64>,
}

impl JointLaw {
    pub fn is_conditioned(&self) -> bool {
        self.survival.is_some()
    }

    /// Retained mass of the rows with `Z_{n-1} = j`.
    pub fn row_mass(&self, j: u64) -> f64 {
        self.entries.iter().filter(|e| e.0 == j).map(|e| e.2).sum()
    }

    /// Law of `Z_{n-1}` (`prev = true`) or `Z_n`, carrying the joint defect.
    pub fn marginal(&self, prev: bool) -> Result<DiscreteMeasure> {
        let atoms = self.entries.iter().map(|&(j, k, p)| (int_point(if prev { j } else { k }), p));
        DiscreteMeasure::from_atoms(atoms, self.defect)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PropagationPath {
    /// Iterate the one-step recursion from `δ_{z0}`.
    #[default]
    Recursion,
    /// Propagate a single ancestor, then take the `z0`-fold convolution power.
    ConvolutionPower,
}

pub(crate) fn sparse_atoms(law: &OffspringLaw) -> Vec<(usize, f64)> {
    law.int_atoms().into_iter().map(|(k, w)| (k as usize, w)).collect()
}

/// Mass lost to the offspring law's own defect over `j` independent draws.
fn power_loss(d: f64, j: usize) -> f64 {
    if d == 0.0 {
        0.0
    } else {
        -(j as f64 * (-d).ln_1p()).exp_m1()
    }
}

/// Largest support a step may produce for this offspring law, from the
/// allocation and work caps.
pub fn support_limit(law: &OffspringLaw) -> usize {
    let max_offspring = law.max_offspring().max(1) as f64;
    let atoms = law.measure.len().max(1) as f64;
    let by_work = (2.0 * WORK_LIMIT / (max_offspring * atoms)).sqrt() * max_offspring;
    (by_work as usize).min(SUPPORT_LIMIT)
}

fn check_support(step: usize, prev_len: usize, law: &OffspringLaw) -> Result<()> {
    let top = (prev_len.saturating_sub(1) as u128) * law.max_offspring() as u128 + 1;
    let limit = support_limit(law);
    if top > limit as u128 {
        return Err(Error::BudgetExhausted { step, atoms: top.min(usize::MAX as u128) as usize, limit });
    }
    Ok(())
}

/// Calls `visit(j, nu[j], mu^{*j})` for every `j` with `nu[j] > 0`, in
/// increasing order of `j`.
pub(crate) fn for_each_row<F>(nu: &[f64], mu: &[(usize, f64)], mut visit: F)
where
    F: FnMut(usize, f64, &[f64]),
{
    let mut power = vec![1.0];
    for (j, &w) in nu.iter().enumerate() {
        if j > 0 {
            power = dense::convolve_sparse(&power, mu);
        }
        if w != 0.0 {
            visit(j, w, &power);
        }
    }
}

/// One generation step on dense vectors. Returns the new law and the mass
/// lost to the offspring defect.
fn step(nu: &[f64], mu: &[(usize, f64)], mu_defect: f64) -> (Vec<f64>, f64) {
    let max_offspring = mu.last().map_or(0, |a| a.0);
    let mut next = vec![0.0; (nu.len() - 1) * max_offspring + 1];
    let mut lost = 0.0;
    for_each_row(nu, mu, |j, w, row| {
        for (k, &p) in row.iter().enumerate() {
            next[k] += w * p;
        }
        lost += w * power_loss(mu_defect, j);
    });
    dense::trim(&mut next);
    (next, lost)
}

fn check_args(z0: u64, budget: f64) -> Result<()> {
    if z0 == 0 {
        return Err(Error::OutOfRange("initial population z0 must be >= 1".into()));
    }
    if !(budget.is_finite() && budget >= 0.0) {
        return Err(Error::OutOfRange(format!("budget {budget} must be finite and >= 0")));
    }
    if z0 as u128 >= SUPPORT_LIMIT as u128 {
        return Err(Error::BudgetExhausted { step: 0, atoms: z0 as usize, limit: SUPPORT_LIMIT });
    }
    Ok(())
}

/// Dense law of `Z_n` with its defect. Truncation adds at most
/// `budget / n` per step; the offspring law's own defect is carried along.
pub(crate) fn propagate_dense(law: &OffspringLaw, n: usize, z0: u64, budget: f64) -> Result<(Vec<f64>, f64)> {
    check_args(z0, budget)?;
    let mu = sparse_atoms(law);
    let mut nu = vec![0.0; z0 as usize + 1];
    nu[z0 as usize] = 1.0;
    let mut defect = 0.0;
    let step_budget = if n == 0 { 0.0 } else { budget / n as f64 };
    for t in 1..=n {
        check_support(t, nu.len(), law)?;
        let (mut next, lost) = step(&nu, &mu, law.measure.defect());
        defect += lost + dense::truncate_tail(&mut next, step_budget);
        nu = next;
    }
    Ok((nu, defect))
}

pub fn propagate(law: &OffspringLaw, n: usize, z0: u64, budget: f64) -> Result<GenerationLaw> {
    propagate_with(law, n, z0, budget, PropagationPath::Recursion)
}

pub fn propagate_with(
    law: &OffspringLaw,
    n: usize,
    z0: u64,
    budget: f64,
    path: PropagationPath,
) -> Result<GenerationLaw> {
    check_args(z0, budget)?;
    let measure = match path {
        PropagationPath::Recursion => {
            let (nu, defect) = propagate_dense(law, n, z0, budget)?;
            DiscreteMeasure::from_dense(&nu, defect)?
        }
        PropagationPath::ConvolutionPower => {
            let (single, defect) = propagate_dense(law, n, 1, budget / 2.0)?;
            let single = DiscreteMeasure::from_dense(&single, defect)?;
            measures::convolution_power(&single, z0, budget / 2.0)?
        }
    };
    Ok(GenerationLaw { n, z0, law: measure })
}

/// `P[Z_n = 0] = f^{(n)}(0)^{z0}` by pgf iteration; free of truncation.
pub fn extinction_by_n(law: &OffspringLaw, n: usize, z0: u64) -> f64 {
    let single = offspring::pgf_iterate(law, 0.0, n).expect("0 lies in [0,1]");
    single.powf(z0 as f64)
}

pub fn joint_law(law: &OffspringLaw, n: usize, z0: u64, budget: f64) -> Result<JointLaw> {
    if n == 0 {
        return Err(Error::OutOfRange("joint law needs n >= 1".into()));
    }
    // half the budget for Z_{n-1}, half across the rows of the last step
    let (nu, mut defect) = propagate_dense(law, n - 1, z0, budget / 2.0)?;
    check_support(n, nu.len(), law)?;
    let mu = sparse_atoms(law);
    let row_budget = budget / 2.0;
    let mut entries = Vec::new();
    for_each_row(&nu, &mu, |j, w, row| {
        let mut row = row.to_vec();
        let dropped = dense::truncate_tail(&mut row, row_budget);
        defect += w * (dropped + power_loss(law.measure.defect(), j));
        for (k, &p) in row.iter().enumerate() {
            if p != 0.0 {
                entries.push((j as u64, k as u64, w * p));
            }
        }
    });
    Ok(JointLaw { n, z0, entries, defect, survival: None })
}

/// Restricts to `Z_{n-1} > 0` and renormalizes; the normalizer is kept in
/// `survival`.
pub fn condition_on_survival(joint: &JointLaw) -> Result<JointLaw> {
    if joint.is_conditioned() {
        return Ok(joint.clone());
    }
    let extinct: f64 = joint.entries.iter().filter(|e| e.0 == 0).map(|e| e.2).sum();
    let survival = 1.0 - extinct;
    if survival < NULL_SURVIVAL {
        return Err(Error::NullSurvival(survival));
    }
    let entries = joint
        .entries
        .iter()
        .filter(|e| e.0 > 0)
        .map(|&(j, k, p)| (j, k, p / survival))
        .collect();
    Ok(JointLaw { n: joint.n, z0: joint.z0, entries, defect: joint.defect / survival, survival: Some(survival) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WllnProbability {
    pub probability: f64,
    /// Mass of the sum's law not represented in `probability`.
    pub slack: f64,
}

/// Exact `P[|S_k / k - m| >= eta]` with `S_k` a sum of `k` draws from the
/// offspring law and `m` its mean.
pub fn wlln_probability(law: &OffspringLaw, k: u64, eta: f64, budget: f64) -> Result<WllnProbability> {
    if k == 0 {
        return Err(Error::OutOfRange("wlln sample size k must be >= 1".into()));
    }
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::OutOfRange(format!("eta = {eta} must be > 0")));
    }
    let sum = measures::convolution_power(&law.measure, k, budget)?;
    let m = law.mean_m;
    let kf = k as f64;
    let probability = sum
        .atoms()
        .filter(|(x, _)| (measures::point_value(x) / kf - m).abs() >= eta - 1e-12)
        .map(|(_, w)| w)
        .sum();
    Ok(WllnProbability { probability, slack: sum.defect() })
}
