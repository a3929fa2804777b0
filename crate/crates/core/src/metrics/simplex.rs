//! Dense tableau simplex for `max c·x  s.t.  A x <= b, x >= 0` with `b >= 0`,
//! so the slack basis is feasible from the start. Bland's rule prevents
//! cycling; an iteration guard turns a violation of that guarantee into an
//! error instead of a hang.

use crate::error::{Error, Result};

const PIVOT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub value: f64,
    pub x: Vec<f64>,
}

pub fn maximize(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<LpSolution> {
    let (m, n) = (a.len(), c.len());
    assert_eq!(b.len(), m, "one right-hand side per constraint");
    assert!(a.iter().all(|row| row.len() == n), "constraint rows must match the objective");
    assert!(b.iter().all(|&v| v >= 0.0), "right-hand sides must be nonnegative");

    // columns: n structural, m slack, then the right-hand side
    let width = n + m + 1;
    let mut t = vec![vec![0.0; width]; m + 1];
    for (i, row) in a.iter().enumerate() {
        t[i][..n].copy_from_slice(row);
        t[i][n + i] = 1.0;
        t[i][width - 1] = b[i];
    }
    // objective row holds reduced costs -c
    for (j, &cj) in c.iter().enumerate() {
        t[m][j] = -cj;
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    let limit = 50 * (n + m).max(10) * (n + m).max(10);
    let mut pivots = 0;
    loop {
        // Bland: lowest-index improving column
        let Some(enter) = (0..n + m).find(|&j| t[m][j] < -PIVOT_TOLERANCE) else {
            break;
        };
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for i in 0..m {
            let coef = t[i][enter];
            if coef > PIVOT_TOLERANCE {
                let ratio = t[i][width - 1] / coef;
                let better = ratio < best - PIVOT_TOLERANCE
                    || (ratio <= best + PIVOT_TOLERANCE && leave.is_some_and(|l| basis[i] < basis[l]));
                if better {
                    best = ratio.min(best);
                    leave = Some(i);
                }
            }
        }
        let Some(row) = leave else {
            return Err(Error::OutOfRange("linear program is unbounded".into()));
        };
        pivot(&mut t, row, enter);
        basis[row] = enter;
        pivots += 1;
        if pivots > limit {
            return Err(Error::SimplexCycling(pivots));
        }
    }

    let mut x = vec![0.0; n];
    for (i, &var) in basis.iter().enumerate() {
        if var < n {
            x[var] = t[i][width - 1];
        }
    }
    Ok(LpSolution { value: t[m][width - 1], x })
}

fn pivot(t: &mut [Vec<f64>], row: usize, col: usize) {
    let p = t[row][col];
    for v in t[row].iter_mut() {
        *v /= p;
    }
    let pivot_row = t[row].clone();
    for (i, r) in t.iter_mut().enumerate() {
        if i == row {
            continue;
        }
        let factor = r[col];
        if factor != 0.0 {
            for (v, &pv) in r.iter_mut().zip(&pivot_row) {
                *v -= factor * pv;
            }
        }
    }
}
