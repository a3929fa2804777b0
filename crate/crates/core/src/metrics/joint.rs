//! Total variation between laws of generation-size vectors.

use crate::engine::{self, JointLaw};
use crate::error::{Error, Result};
use crate::measures::{dense, TvDistance};
use crate::offspring::OffspringLaw;

/// Deepest trajectory handled by explicit path enumeration.
pub const TRAJECTORY_MAX_N: usize = 4;

/// TV between two laws of `(Z_{n-1}, Z_n)`.
pub fn joint_tv(j1: &JointLaw, j2: &JointLaw) -> Result<TvDistance> {
    if (j1.n, j1.z0, j1.is_conditioned()) != (j2.n, j2.z0, j2.is_conditioned()) {
        return Err(Error::Mismatch(format!(
            "n/z0/conditioning differ: ({}, {}, {}) vs ({}, {}, {})",
            j1.n,
            j1.z0,
            j1.is_conditioned(),
            j2.n,
            j2.z0,
            j2.is_conditioned()
        )));
    }
    let (a, b) = (&j1.entries, &j2.entries);
    let (mut i, mut k) = (0, 0);
    let mut sum = 0.0;
    while i < a.len() || k < b.len() {
        let ka = a.get(i).map(|e| (e.0, e.1));
        let kb = b.get(k).map(|e| (e.0, e.1));
        match (ka, kb) {
            (Some(x), Some(y)) if x == y => {
                sum += (a[i].2 - b[k].2).abs();
                i += 1;
                k += 1;
            }
            (Some(x), Some(y)) if x < y => {
                sum += a[i].2;
                i += 1;
            }
            (Some(_), None) => {
                sum += a[i].2;
                i += 1;
            }
            _ => {
                sum += b[k].2;
                k += 1;
            }
        }
    }
    Ok(TvDistance { distance: 0.5 * sum, slack: 0.5 * (j1.defect + j2.defect) })
}

/// `min(Σ_{i<=n} m1^{i-1}, Σ_{i<=n} m2^{i-1})`.
pub fn joint_tv_constant(m1: f64, m2: f64, n: usize) -> f64 {
    let geometric = |m: f64| (0..n).map(|i| m.powi(i as i32)).sum::<f64>();
    geometric(m1).min(geometric(m2))
}

/// Convolution powers `mu^{*z}` for `z <= max_z`.
fn powers(law: &OffspringLaw, max_z: usize) -> Vec<Vec<f64>> {
    let atoms = engine::sparse_atoms(law);
    let mut table = vec![vec![1.0]];
    while table.len() <= max_z {
        let next = dense::convolve_sparse(table.last().unwrap(), &atoms);
        table.push(next);
    }
    table
}

struct Walk {
    p1: Vec<Vec<f64>>,
    p2: Vec<Vec<f64>>,
    depth: usize,
    tv: Vec<f64>,
    mass1: Vec<f64>,
    mass2: Vec<f64>,
}

impl Walk {
    fn visit(&mut self, t: usize, z: usize, w1: f64, w2: f64) {
        if t > 0 {
            self.tv[t - 1] += (w1 - w2).abs();
            self.mass1[t - 1] += w1;
            self.mass2[t - 1] += w2;
        }
        if t == self.depth {
            return;
        }
        let len = self.p1[z].len().max(self.p2[z].len());
        for k in 0..len {
            let q1 = w1 * self.p1[z].get(k).copied().unwrap_or(0.0);
            let q2 = w2 * self.p2[z].get(k).copied().unwrap_or(0.0);
            if q1 != 0.0 || q2 != 0.0 {
                self.visit(t + 1, k, q1, q2);
            }
        }
    }
}

/// TV between the laws of `(Z_1, ..., Z_t)` for every `t <= n`, by explicit
/// enumeration of all paths.
pub fn trajectory_tv(mu1: &OffspringLaw, mu2: &OffspringLaw, n: usize, z0: u64) -> Result<Vec<TvDistance>> {
    if n == 0 || n > TRAJECTORY_MAX_N {
        return Err(Error::OutOfRange(format!("trajectory TV needs 1 <= n <= {TRAJECTORY_MAX_N}, got {n}")));
    }
    if z0 == 0 {
        return Err(Error::OutOfRange("initial population z0 must be >= 1".into()));
    }
    let top = mu1.max_offspring().max(mu2.max_offspring()) as usize;
    let max_z = (1..n).fold(z0 as usize, |z, _| z.saturating_mul(top));
    if max_z > engine::SUPPORT_LIMIT {
        return Err(Error::OutOfRange(format!("trajectory TV would need populations up to {max_z}")));
    }
    let mut walk = Walk {
        p1: powers(mu1, max_z),
        p2: powers(mu2, max_z),
        depth: n,
        tv: vec![0.0; n],
        mass1: vec![0.0; n],
        mass2: vec![0.0; n],
    };
    walk.visit(0, z0 as usize, 1.0, 1.0);
    Ok((0..n)
        .map(|t| TvDistance {
            distance: 0.5 * walk.tv[t],
            slack: 0.5 * ((1.0 - walk.mass1[t]).max(0.0) + (1.0 - walk.mass2[t]).max(0.0)),
        })
        .collect())
}
