//! Exact finite-horizon laws of Galton–Watson processes and of the
//! Lotka–Nagaev offspring-mean estimator `Z_n / Z_{n-1}`, probability metrics
//! between those laws (total variation, Prohorov, bounded Lipschitz), Strassen
//! couplings, Monte Carlo cross-validation, and a lab of numerical robustness
//! and consistency checks.
//!
//! Everything is built on [`DiscreteMeasure`]: a finite-support probability
//! measure on the non-negative rationals that carries an explicit truncation
//! defect, so every reported number comes with a rigorous slack bound.

pub mod engine;
pub mod error;
pub mod estimator;
pub mod lab;
pub mod measures;
pub mod metrics;
pub mod montecarlo;
pub mod offspring;

pub use engine::{GenerationLaw, JointLaw};
pub use error::{Error, Result};
pub use estimator::EstimatorLaw;
pub use measures::{DiscreteMeasure, Point};
pub use metrics::{Coupling, MetricResult};
pub use offspring::{FamilySpec, OffspringLaw};

/// Default truncation budget for a single engine step.
pub const DEFAULT_BUDGET: f64 = 1e-12;
