//! Default instances for every verified claim.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::measures::DiscreteMeasure;
use crate::offspring::{build, FamilySpec, OffspringLaw};

use super::verify::*;
use super::{random, VerificationReport};

pub const CLAIMS: [&str; 12] = [
    "lemma-joint-tv",
    "lemma-extinction-lipschitz",
    "lemma-pgf-tv",
    "thm-conditional-consistency",
    "lemma-conditional-occupancy",
    "lemma-wlln",
    "lemma-decomposition-identity",
    "lemma-mean-continuity",
    "identity-prohorov-tv",
    "bound-rho-beta",
    "thm-strassen-coupling",
    "z0-extinction",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub budget: f64,
    pub seed: u64,
    /// Random instances per randomized claim.
    pub instances: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self { budget: crate::DEFAULT_BUDGET, seed: 0, instances: 25 }
    }
}

fn law(spec: FamilySpec) -> OffspringLaw {
    build(&spec, 0.0).expect("suite parameters are valid")
}

fn binary(p: f64) -> OffspringLaw {
    law(FamilySpec::Binary { p })
}

fn three_point() -> OffspringLaw {
    law(FamilySpec::ThreePoint { p0: 0.2, p2: 0.5, p3: 0.3 })
}

fn dirac(k: u64) -> OffspringLaw {
    OffspringLaw::from_measure(DiscreteMeasure::dirac_int(k), format!("dirac({k})")).expect("integer point")
}

/// Independent stream for each claim so claims can run in any order.
fn rng(cfg: &SuiteConfig, claim: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(claim as u64);
    rng
}

fn measure_pairs(cfg: &SuiteConfig, claim: usize, atoms: usize, integer: bool) -> Vec<(DiscreteMeasure, DiscreteMeasure)> {
    let mut r = rng(cfg, claim);
    (0..cfg.instances)
        .map(|_| (random::measure(&mut r, atoms, integer), random::measure(&mut r, atoms, integer)))
        .collect()
}

fn run_claim(index: usize, cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    let b = cfg.budget;
    let mut out = Vec::new();
    match CLAIMS[index] {
        "lemma-joint-tv" => {
            let mut r = rng(cfg, index);
            for _ in 0..cfg.instances {
                let (mu1, mu2) = (random::family(&mut r), random::family(&mut r));
                for z0 in 1..=2 {
                    for n in 1..=4 {
                        out.push(verify_joint_tv_bound(&mu1, &mu2, n, z0, b)?);
                    }
                }
            }
        }
        "lemma-extinction-lipschitz" => {
            out.extend(verify_extinction_bound(&binary(0.75), &binary(0.74), 20)?);
            out.extend(verify_extinction_bound(&binary(0.75), &binary(0.76), 20)?);
            let shifted = law(FamilySpec::ThreePoint { p0: 0.21, p2: 0.5, p3: 0.29 });
            out.extend(verify_extinction_bound(&three_point(), &shifted, 20)?);
        }
        "lemma-pgf-tv" => {
            out.push(verify_pgf_tv(&binary(0.75), &binary(0.7), 101));
            out.push(verify_pgf_tv(&binary(0.75), &three_point(), 101));
            let p1 = law(FamilySpec::Poisson { lambda: 2.0, k: Some(40) });
            let p2 = law(FamilySpec::Poisson { lambda: 2.1, k: Some(40) });
            out.push(verify_pgf_tv(&p1, &p2, 101));
        }
        "thm-conditional-consistency" => {
            let range = ExactRange { budget: b, seed: cfg.seed, ..ExactRange::default() };
            out.push(verify_conditional_consistency(&binary(0.75), 0.4, 0.1, 1..=12, 1, &range)?);
            out.push(verify_conditional_consistency(&dirac(2), 0.4, 0.1, 1..=6, 1, &range)?);
        }
        "lemma-conditional-occupancy" => {
            out.extend(verify_conditional_occupancy(&binary(0.75), 2, 1..=12, 1, b)?);
            out.extend(verify_conditional_occupancy(&three_point(), 3, 1..=8, 1, b)?);
            out.extend(verify_conditional_occupancy(&dirac(2), 1, 1..=4, 1, b)?);
        }
        "lemma-wlln" => {
            out.extend(verify_wlln(&binary(0.75), 0.25, 0.05, 200, b)?);
            out.extend(verify_wlln(&dirac(2), 0.25, 0.05, 50, b)?);
        }
        "lemma-decomposition-identity" => {
            out.push(verify_decomposition_identity(&binary(0.75), 2, 1, b)?);
            out.push(verify_decomposition_identity(&binary(0.75), 3, 2, b)?);
            out.push(verify_decomposition_identity(&three_point(), 4, 1, b)?);
            out.push(verify_decomposition_identity(&dirac(3), 3, 1, b)?);
        }
        "lemma-mean-continuity" => {
            for delta in [0.1, 0.01, 0.001] {
                out.push(verify_mean_continuity(&binary(0.75), &binary(0.75 - delta)));
            }
            let center = law(FamilySpec::Poisson { lambda: 2.0, k: None });
            for delta in [0.1, 0.01, 0.001] {
                out.push(verify_mean_continuity(&center, &law(FamilySpec::Poisson { lambda: 2.0 + delta, k: None })));
            }
        }
        "identity-prohorov-tv" => {
            for (a, c) in measure_pairs(cfg, index, 8, true) {
                out.push(verify_prohorov_tv(&a, &c)?);
            }
        }
        "bound-rho-beta" => {
            for (a, c) in measure_pairs(cfg, index, 10, false) {
                out.push(verify_rho_beta(&a, &c)?);
            }
        }
        "thm-strassen-coupling" => {
            for (a, c) in measure_pairs(cfg, index, 8, false) {
                out.push(verify_strassen(&a, &c)?);
            }
        }
        "z0-extinction" => {
            for z0 in 1..=3 {
                for n in 1..=6 {
                    out.push(verify_z0_extinction(&binary(0.75), n, z0, b)?);
                    out.push(verify_z0_extinction(&three_point(), n, z0, b)?);
                }
            }
        }
        _ => unreachable!("CLAIMS lists every handled id"),
    }
    Ok(out)
}

/// Runs every claim (`"all"`) or a single claim id. Reports come back in
/// claim order regardless of scheduling.
pub fn run_suite(suite: &str, cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    let selected: Vec<usize> = if suite == "all" {
        (0..CLAIMS.len()).collect()
    } else {
        match CLAIMS.iter().position(|&c| c == suite) {
            Some(i) => vec![i],
            None => {
                return Err(Error::InvalidExperiment(format!(
                    "unknown suite {suite:?}; expected \"all\" or one of {}",
                    CLAIMS.join(", ")
                )))
            }
        }
    };
    let batches: Vec<Vec<VerificationReport>> =
        selected.par_iter().map(|&i| run_claim(i, cfg)).collect::<Result<_>>()?;
    Ok(batches.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_claim_is_rejected() {
        assert_eq!(run_suite("nope", &SuiteConfig::default()).unwrap_err().kind(), "invalid_experiment");
    }

    #[test]
    fn single_claim_runs() {
        let reports = run_suite("z0-extinction", &SuiteConfig::default()).unwrap();
        assert_eq!(reports.len(), 36);
        assert!(reports.iter().all(|r| r.holds()));
    }
}
