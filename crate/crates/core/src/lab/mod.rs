//! Experiment harness: robustness-modulus sweeps and numerical verification
//! of the inequalities behind robustness and consistency of the estimator.

pub mod modulus;
pub mod random;
pub mod suite;
pub mod verify;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub use modulus::{robustness_modulus, ExperimentSpec, MetricKind, ModulusRow};
pub use suite::{run_suite, SuiteConfig, CLAIMS};
pub use verify::*;

/// Floating-point allowance added to every analytic comparison.
pub const NUMERIC_TOLERANCE: f64 = 1e-10;

/// Outcome of checking one inequality `lhs <= rhs` on one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub claim: String,
    pub instance: Value,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    /// `lhs <= rhs + slack`.
    pub pass: bool,
    /// Set when a precondition of the inequality could not be established,
    /// so a pass says nothing about the claim.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub inconclusive: bool,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub details: Value,
}

impl VerificationReport {
    pub fn new(claim: &str, instance: Value, lhs: f64, rhs: f64, slack: f64) -> Self {
        Self {
            claim: claim.to_string(),
            instance,
            lhs,
            rhs,
            slack,
            pass: lhs <= rhs + slack,
            inconclusive: false,
            details: Value::Null,
        }
    }

    pub fn with_details(mut self, details: Value) -> Self {
        self.details = details;
        self
    }

    pub fn inconclusive_if(mut self, flag: bool) -> Self {
        self.inconclusive = flag;
        self
    }

    /// Passed with all preconditions established.
    pub fn holds(&self) -> bool {
        self.pass && !self.inconclusive
    }
}
