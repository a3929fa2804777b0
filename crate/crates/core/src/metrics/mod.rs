//! Probability metrics between finite discrete measures: total variation,
//! Prohorov (via Strassen couplings and band max-flow) and bounded
//! Lipschitz (via a small linear program).
//!
//! Values are computed on retained mass. Truncation defects are reported
//! separately as additive slack.

pub mod bl;
pub mod flow;
pub mod joint;
pub mod prohorov;
pub mod simplex;

use serde::{Deserialize, Serialize};

use crate::measures::{self, DiscreteMeasure, Point};

pub use bl::bounded_lipschitz;
pub use flow::FlowSolver;
pub use joint::{joint_tv, joint_tv_constant, trajectory_tv};
pub use prohorov::{band_mass, prohorov, prohorov_with, strassen_coupling, ProhorovOptions, ScanMode};

/// A finite coupling of two measures, stored as masses on index pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    #[serde(with = "measures::points_serde")]
    pub left: Vec<Point>,
    #[serde(with = "measures::points_serde")]
    pub right: Vec<Point>,
    /// `(left index, right index, mass)`, sorted by index pair.
    pub entries: Vec<(usize, usize, f64)>,
    pub eps: f64,
    /// Mass on pairs farther apart than `eps`.
    pub slack: f64,
}

impl Coupling {
    pub fn total_mass(&self) -> f64 {
        self.entries.iter().map(|e| e.2).sum()
    }

    /// Mass on pairs within `eps` of each other.
    pub fn band_mass(&self) -> f64 {
        self.total_mass() - self.slack
    }

    /// Largest absolute deviation of either marginal from its measure.
    pub fn marginal_error(&self, a: &DiscreteMeasure, b: &DiscreteMeasure) -> f64 {
        let mut left = vec![0.0; self.left.len()];
        let mut right = vec![0.0; self.right.len()];
        for &(i, j, w) in &self.entries {
            left[i] += w;
            right[j] += w;
        }
        let dev = |marg: &[f64], m: &DiscreteMeasure, pts: &[Point]| {
            if pts != m.support() {
                return f64::INFINITY;
            }
            marg.iter().zip(m.weights()).map(|(x, w)| (x - w).abs()).fold(0.0, f64::max)
        };
        dev(&left, a, &self.left).max(dev(&right, b, &self.right))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricResult {
    pub value: f64,
    /// For Prohorov, an optimal coupling at `eps = value`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Coupling>,
    /// Worst-case change of `value` from the inputs' defects.
    pub defect_slack: f64,
}

/// Total variation packaged as a [`MetricResult`].
pub fn total_variation(a: &DiscreteMeasure, b: &DiscreteMeasure) -> MetricResult {
    let tv = measures::tv_distance(a, b);
    MetricResult { value: tv.distance, certificate: None, defect_slack: tv.slack }
}
