//! Robustness-modulus sweeps: for each alternative offspring law, its TV
//! distance to a center law next to the largest distance between the two
//! estimator laws over a range of generations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator;
use crate::measures::{tv_distance, DiscreteMeasure};
use crate::metrics;
use crate::montecarlo::{self, SimTable};
use crate::offspring::{build, Criticality, FamilySpec, OffspringLaw};

use super::verify::{ExactRange, Method};

pub const MODULUS_SCHEMA: &str = "gw.modulus.v1";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    #[default]
    Prohorov,
    Tv,
    BoundedLipschitz,
}

fn default_schema() -> String {
    MODULUS_SCHEMA.to_string()
}
fn default_scale() -> u64 {
    10
}
fn default_n_range() -> [usize; 2] {
    [1, 8]
}
fn default_z0() -> u64 {
    1
}
fn default_budget() -> f64 {
    crate::DEFAULT_BUDGET
}
fn default_exact_atoms() -> usize {
    20_000
}
fn default_replications() -> u64 {
    1_000_000
}
fn default_cap() -> u64 {
    1_000_000_000_000_000
}

/// JSON description of one sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default = "default_schema")]
    pub schema: String,
    pub center: FamilySpec,
    #[serde(default)]
    pub grid: Vec<FamilySpec>,
    /// Indices `k` of the contaminated laws `(1 - 1/k) center + (1/k) δ_{scale·k}`.
    #[serde(default)]
    pub contamination: Vec<u64>,
    #[serde(default = "default_scale")]
    pub contamination_scale: u64,
    /// Inclusive `[first, last]` generation.
    #[serde(default = "default_n_range")]
    pub n_range: [usize; 2],
    #[serde(default = "default_z0")]
    pub z0: u64,
    #[serde(default)]
    pub metric: MetricKind,
    #[serde(default = "default_budget")]
    pub budget: f64,
    /// Whether to compare laws conditioned on `Z_{n-1} > 0`.
    #[serde(default)]
    pub conditioned: bool,
    #[serde(default = "default_exact_atoms")]
    pub exact_atoms: usize,
    #[serde(default = "default_replications")]
    pub replications: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_cap")]
    pub population_cap: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

impl ExperimentSpec {
    pub fn new(center: FamilySpec) -> Self {
        serde_json::from_value(serde_json::json!({ "center": center })).expect("defaults are valid")
    }

    fn validate(&self) -> Result<()> {
        if self.schema != MODULUS_SCHEMA {
            return Err(Error::InvalidExperiment(format!("schema {:?}, expected {MODULUS_SCHEMA:?}", self.schema)));
        }
        let [lo, hi] = self.n_range;
        if lo == 0 || lo > hi {
            return Err(Error::InvalidExperiment(format!("n_range [{lo}, {hi}] must satisfy 1 <= first <= last")));
        }
        if self.contamination.contains(&0) {
            return Err(Error::InvalidExperiment("contamination index k must be >= 1".into()));
        }
        if self.z0 == 0 || self.replications == 0 || self.exact_atoms == 0 {
            return Err(Error::InvalidExperiment("z0, replications and exact_atoms must be >= 1".into()));
        }
        Ok(())
    }

    fn exact_range(&self) -> ExactRange {
        ExactRange {
            budget: self.budget,
            exact_atoms: self.exact_atoms,
            replications: self.replications,
            seed: self.seed,
            population_cap: self.population_cap,
        }
    }
}

/// One line of the modulus table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulusRow {
    pub label: String,
    pub d_tv: f64,
    /// Largest metric value over the generation range.
    pub modulus: f64,
    pub argmax_n: usize,
    /// `exact`, `monte_carlo`, or `mixed`.
    pub method: String,
    /// Semicolon-separated warnings, empty when none.
    pub flag: String,
    /// Worst-case correction from truncation defects and excluded
    /// replications.
    pub slack: f64,
    pub per_n: Vec<f64>,
}

struct EstimatorLaws {
    laws: Vec<DiscreteMeasure>,
    slack: Vec<f64>,
    methods: Vec<Method>,
    excluded: u64,
}

fn estimator_laws(law: &OffspringLaw, spec: &ExperimentSpec) -> Result<EstimatorLaws> {
    let [lo, hi] = spec.n_range;
    let range = spec.exact_range();
    let reach = range.reach(law, spec.z0);
    let table: Option<SimTable> = if hi > reach {
        let cfg = montecarlo::SimConfig {
            seed: spec.seed,
            replications: spec.replications,
            n_max: hi,
            z0: spec.z0,
            population_cap: spec.population_cap,
            jobs: 0,
        };
        Some(montecarlo::simulate_paths(law, &cfg)?)
    } else {
        None
    };
    let mut out = EstimatorLaws { laws: Vec::new(), slack: Vec::new(), methods: Vec::new(), excluded: 0 };
    for n in lo..=hi {
        if n <= reach {
            let e = estimator::estimator_law_for(law, n, spec.z0, spec.budget, spec.conditioned)?;
            out.slack.push(e.defect());
            out.laws.push(e.law);
            out.methods.push(Method::Exact);
        } else {
            let table = table.as_ref().expect("simulated beyond reach");
            let g = table.generation(n)?;
            out.excluded = out.excluded.max(g.excluded);
            out.slack.push(g.excluded as f64 / table.replications as f64);
            out.laws.push(montecarlo::empirical_estimator_law(table, n, spec.conditioned)?);
            out.methods.push(Method::MonteCarlo);
        }
    }
    Ok(out)
}

fn distance(a: &DiscreteMeasure, b: &DiscreteMeasure, kind: MetricKind) -> Result<f64> {
    Ok(match kind {
        MetricKind::Prohorov => metrics::prohorov(a, b).value,
        MetricKind::Tv => tv_distance(a, b).distance,
        MetricKind::BoundedLipschitz => metrics::bounded_lipschitz(a, b)?.value,
    })
}

fn row(label: String, center: &OffspringLaw, base: &EstimatorLaws, law: &OffspringLaw, spec: &ExperimentSpec) -> Result<ModulusRow> {
    let mut flags = Vec::new();
    match law.criticality() {
        Criticality::Supercritical => {}
        c => flags.push(c.as_str().replace(' ', "_")),
    }
    let other = estimator_laws(law, spec)?;
    if other.excluded > 0 {
        flags.push(format!("cap_excluded={}", other.excluded));
    }
    let mut per_n = Vec::with_capacity(base.laws.len());
    let mut slack: f64 = 0.0;
    for i in 0..base.laws.len() {
        per_n.push(distance(&base.laws[i], &other.laws[i], spec.metric)?);
        slack = slack.max(base.slack[i] + other.slack[i]);
    }
    let (modulus, index) = per_n
        .iter()
        .enumerate()
        .fold((f64::NEG_INFINITY, 0), |acc, (i, &v)| if v > acc.0 { (v, i) } else { acc });
    let methods: Vec<Method> = base.methods.iter().chain(&other.methods).copied().collect();
    let method = if methods.iter().all(|&m| m == Method::Exact) {
        "exact"
    } else if methods.iter().all(|&m| m == Method::MonteCarlo) {
        "monte_carlo"
    } else {
        "mixed"
    };
    Ok(ModulusRow {
        label,
        d_tv: tv_distance(&center.measure, &law.measure).distance,
        modulus,
        argmax_n: spec.n_range[0] + index,
        method: method.to_string(),
        flag: flags.join(";"),
        slack,
        per_n,
    })
}

/// One row per grid member, then one per contamination index, in input
/// order.
pub fn robustness_modulus(spec: &ExperimentSpec) -> Result<Vec<ModulusRow>> {
    spec.validate()?;
    let center = build(&spec.center, spec.budget)?;
    center.require_supercritical()?;
    let base = estimator_laws(&center, spec)?;
    let mut rows = Vec::with_capacity(spec.grid.len() + spec.contamination.len());
    for member in &spec.grid {
        let law = build(member, spec.budget)?;
        rows.push(row(member.to_string(), &center, &base, &law, spec)?);
    }
    for &k in &spec.contamination {
        let at = spec.contamination_scale.checked_mul(k).ok_or_else(|| {
            Error::InvalidExperiment(format!("contamination point {} * {k} overflows", spec.contamination_scale))
        })?;
        let law = center.contaminate(1.0 / k as f64, at)?;
        rows.push(row(format!("contamination(k={k})"), &center, &base, &law, spec)?);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binary_sweep(ps: &[f64]) -> ExperimentSpec {
        ExperimentSpec {
            grid: ps.iter().map(|&p| FamilySpec::Binary { p }).collect(),
            ..ExperimentSpec::new(FamilySpec::Binary { p: 0.75 })
        }
    }

    #[test]
    fn center_against_itself_is_zero() {
        let rows = robustness_modulus(&binary_sweep(&[0.75])).unwrap();
        assert_eq!((rows[0].d_tv, rows[0].modulus), (0.0, 0.0));
        assert_eq!(rows[0].method, "exact");
    }

    #[test]
    fn binary_modulus_grows_away_from_center() {
        let ps = [0.70, 0.72, 0.74, 0.75, 0.76, 0.78, 0.80];
        let rows = robustness_modulus(&binary_sweep(&ps)).unwrap();
        let m: Vec<f64> = rows.iter().map(|r| r.modulus).collect();
        assert_eq!(m[3], 0.0);
        for i in 0..3 {
            assert!(m[i] + 1e-9 >= m[i + 1], "{m:?}");
            assert!(m[6 - i] + 1e-9 >= m[5 - i], "{m:?}");
        }
        assert!(m[0] > 0.0 && m[6] > 0.0);
    }

    #[test]
    fn subcritical_members_are_flagged() {
        let rows = robustness_modulus(&ExperimentSpec { n_range: [1, 3], ..binary_sweep(&[0.4]) }).unwrap();
        assert_eq!(rows[0].flag, "subcritical");
    }

    #[test]
    fn spec_round_trip_and_validation() {
        let spec: ExperimentSpec =
            serde_json::from_str(r#"{"center": {"family": "binary", "p": 0.75}, "contamination": [20]}"#).unwrap();
        assert_eq!(spec.n_range, [1, 8]);
        assert_eq!(spec.schema, MODULUS_SCHEMA);
        let bad = ExperimentSpec { schema: "other".into(), ..spec.clone() };
        assert_eq!(robustness_modulus(&bad).unwrap_err().kind(), "invalid_experiment");
        assert!(serde_json::from_str::<ExperimentSpec>(r#"{"center": {"family": "binary", "p": 0.75}, "typo": 1}"#).is_err());
        let sub = ExperimentSpec::new(FamilySpec::Binary { p: 0.4 });
        assert_eq!(robustness_modulus(&sub).unwrap_err().kind(), "not_supercritical");
    }

    #[test]
    fn contamination_uses_simulation_beyond_reach() {
        let spec = ExperimentSpec {
            contamination: vec![20],
            n_range: [1, 3],
            replications: 20_000,
            ..ExperimentSpec::new(FamilySpec::Binary { p: 0.75 })
        };
        let rows = robustness_modulus(&spec).unwrap();
        assert!((rows[0].d_tv - 0.05).abs() < 1e-12);
        assert_eq!(rows[0].method, "mixed");
        assert!(rows[0].modulus >= 0.1, "{:?}", rows[0]);
    }
}
