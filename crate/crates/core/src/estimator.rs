//! Exact law of the offspring-mean estimator `Z_n / Z_{n-1}` (0 when
//! `Z_{n-1} = 0`), unconditionally or given `Z_{n-1} > 0`.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::engine::{self, JointLaw};
use crate::error::{Error, Result};
use crate::measures::{self, DiscreteMeasure};
use crate::offspring::OffspringLaw;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorLaw {
    pub n: usize,
    pub z0: u64,
    pub conditioned: bool,
    pub law: DiscreteMeasure,
    /// `P[Z_{n-1} > 0]` as seen by the retained joint law.
    pub survival_probability: f64,
}

impl EstimatorLaw {
    pub fn defect(&self) -> f64 {
        self.law.defect()
    }
}

/// Pushforward of the joint law under `(j, k) ↦ k / j`. The extinct rows
/// map to 0 and merge with genuine ratios `0 / j`.
pub fn estimator_law(joint: &JointLaw, conditioned: bool) -> Result<EstimatorLaw> {
    if joint.is_conditioned() && !conditioned {
        return Err(Error::Mismatch("joint law is already conditioned on survival".into()));
    }
    let source = if conditioned { engine::condition_on_survival(joint)? } else { joint.clone() };
    let survival = match source.survival {
        Some(s) => s,
        None => 1.0 - joint.entries.iter().filter(|e| e.0 == 0).map(|e| e.2).sum::<f64>(),
    };
    let atoms = source.entries.iter().map(|&(j, k, p)| {
        let x = if j == 0 { Ratio::from_integer(0) } else { Ratio::new(k, j) };
        (x, p)
    });
    let law = DiscreteMeasure::from_atoms(atoms, source.defect)?;
    Ok(EstimatorLaw { n: joint.n, z0: joint.z0, conditioned, law, survival_probability: survival })
}

/// Convenience wrapper: joint law then pushforward.
pub fn estimator_law_for(
    law: &OffspringLaw,
    n: usize,
    z0: u64,
    budget: f64,
    conditioned: bool,
) -> Result<EstimatorLaw> {
    estimator_law(&engine::joint_law(law, n, z0, budget)?, conditioned)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConsistencyProbability {
    pub probability: f64,
    pub slack: f64,
}

/// `P[|m̂_n - m| >= eta | Z_{n-1} > 0]`, with the law's defect as slack.
pub fn consistency_probability(e: &EstimatorLaw, m: f64, eta: f64) -> Result<ConsistencyProbability> {
    if !e.conditioned {
        return Err(Error::Mismatch("consistency probability needs a conditioned estimator law".into()));
    }
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::OutOfRange(format!("eta = {eta} must be > 0")));
    }
    let probability = e
        .law
        .atoms()
        .filter(|(x, _)| (measures::point_value(x) - m).abs() >= eta - 1e-12)
        .map(|(_, w)| w)
        .sum();
    Ok(ConsistencyProbability { probability, slack: e.law.defect() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::int_point;
    use crate::offspring::{build, FamilySpec};

    fn binary(p: f64) -> OffspringLaw {
        build(&FamilySpec::Binary { p }, 0.0).unwrap()
    }

    #[test]
    fn first_generation_estimator_is_offspring_law() {
        let law = build(&FamilySpec::ThreePoint { p0: 0.2, p2: 0.5, p3: 0.3 }, 0.0).unwrap();
        let e = estimator_law_for(&law, 1, 1, 1e-12, false).unwrap();
        assert_eq!(e.law, law.measure);
    }

    #[test]
    fn binary_second_generation_atoms() {
        let law = binary(0.75);
        let e = estimator_law_for(&law, 2, 1, 1e-12, false).unwrap();
        assert_eq!(e.law.len(), 3);
        assert!((e.law.mass_at(&int_point(0)) - 0.296875).abs() < 1e-15);
        assert!((e.law.mass_at(&int_point(1)) - 0.28125).abs() < 1e-15);
        assert!((e.law.mass_at(&int_point(2)) - 0.421875).abs() < 1e-15);

        let c = estimator_law_for(&law, 2, 1, 1e-12, true).unwrap();
        assert!((c.law.mass_at(&int_point(0)) - 0.0625).abs() < 1e-15);
        assert!((c.law.mass_at(&int_point(1)) - 0.375).abs() < 1e-15);
        assert!((c.law.mass_at(&int_point(2)) - 0.5625).abs() < 1e-15);
        assert!((c.survival_probability - 0.75).abs() < 1e-15);
    }

    #[test]
    fn equal_ratios_merge() {
        // Z_1 = 3 reached via δ_3; k/3 and 2k/6 style ratios must coincide
        let law = build(&FamilySpec::Raw { weights: vec![0.5, 0.0, 0.0, 0.5] }, 0.0).unwrap();
        let e = estimator_law_for(&law, 3, 2, 0.0, true).unwrap();
        let support = e.law.support();
        assert!(support.windows(2).all(|w| w[0] < w[1]));
        assert!(support.iter().all(|r| num_integer::Integer::gcd(r.numer(), r.denom()) == 1));
    }

    #[test]
    fn consistency_probability_binary() {
        let c = estimator_law_for(&binary(0.75), 2, 1, 1e-12, true).unwrap();
        // every conditioned atom of {0, 1, 2} is at least 0.5 from 1.5
        let p = consistency_probability(&c, 1.5, 0.4).unwrap().probability;
        assert!((p - 1.0).abs() < 1e-15);
        let p = consistency_probability(&c, 1.5, 0.6).unwrap().probability;
        assert!((p - 0.0625).abs() < 1e-15);
        assert_eq!(consistency_probability(&c, 1.5, 1.6).unwrap().probability, 0.0);
        let etas: Vec<f64> = (1..40).map(|i| i as f64 * 0.05).collect();
        let probs: Vec<f64> = etas.iter().map(|&eta| consistency_probability(&c, 1.5, eta).unwrap().probability).collect();
        assert!(probs.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn consistency_needs_conditioned_law() {
        let u = estimator_law_for(&binary(0.75), 2, 1, 1e-12, false).unwrap();
        assert!(consistency_probability(&u, 1.5, 0.4).is_err());
    }

    #[test]
    fn decomposition_identity_atomwise() {
        let law = binary(0.75);
        for (n, z0) in [(2, 1), (3, 2), (4, 1)] {
            let u = estimator_law_for(&law, n, z0, 1e-12, false).unwrap();
            let c = estimator_law_for(&law, n, z0, 1e-12, true).unwrap();
            let extinct = engine::extinction_by_n(&law, n - 1, z0);
            for (x, w) in u.law.atoms() {
                let zero = if x == int_point(0) { extinct } else { 0.0 };
                let rhs = c.law.mass_at(&x) * c.survival_probability + zero;
                assert!((w - rhs).abs() < 1e-12, "n={n} z0={z0} x={x}");
            }
        }
    }

    #[test]
    fn conditioned_law_drops_extinct_rows() {
        let law = binary(0.75);
        let j = engine::joint_law(&law, 3, 1, 1e-12).unwrap();
        let c = estimator_law(&j, true).unwrap();
        let expected_zero: f64 = j.entries.iter().filter(|e| e.0 > 0 && e.1 == 0).map(|e| e.2).sum::<f64>()
            / (1.0 - j.row_mass(0));
        assert!((c.law.mass_at(&int_point(0)) - expected_zero).abs() < 1e-15);
    }
}
