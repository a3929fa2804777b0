//! Bounded-Lipschitz distance
//! `β(a, b) = sup { ∫h d(a - b) : ‖h‖_L + ‖h‖_∞ <= 1 }`.
//!
//! Only the values of `h` on the union support matter, and a function on
//! sorted points extends with the same norms as soon as consecutive
//! differences respect the Lipschitz constant. That leaves a linear program
//! in the point values `h_i`, the Lipschitz bound `L` and the sup bound `c`.

use crate::error::Result;
use crate::measures::{DiscreteMeasure, Point};

use super::simplex;
use super::MetricResult;

/// Union support with the signed mass difference at each point.
fn signed_difference(a: &DiscreteMeasure, b: &DiscreteMeasure) -> (Vec<f64>, Vec<f64>) {
    let mut atoms: Vec<(Point, f64)> = a.atoms().chain(b.atoms().map(|(x, w)| (x, -w))).collect();
    atoms.sort_by(|p, q| p.0.cmp(&q.0));
    let mut xs: Vec<Point> = Vec::new();
    let mut g: Vec<f64> = Vec::new();
    for (x, w) in atoms {
        if xs.last() == Some(&x) {
            *g.last_mut().unwrap() += w;
        } else {
            xs.push(x);
            g.push(w);
        }
    }
    (xs.iter().map(crate::measures::point_value).collect(), g)
}

pub fn bounded_lipschitz(a: &DiscreteMeasure, b: &DiscreteMeasure) -> Result<MetricResult> {
    let defect_slack = a.defect() + b.defect();
    let (xs, g) = signed_difference(a, b);
    let n = xs.len();
    if n == 0 {
        return Ok(MetricResult { value: 0.0, certificate: None, defect_slack });
    }
    // h_i = p_i - m_i with p, m >= 0; then L and c
    let vars = 2 * n + 2;
    let (lip, sup) = (2 * n, 2 * n + 1);
    let mut objective = vec![0.0; vars];
    for i in 0..n {
        objective[i] = g[i];
        objective[n + i] = -g[i];
    }
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    let mut push = |coefs: &[(usize, f64)], bound: f64| {
        let mut row = vec![0.0; vars];
        for &(j, v) in coefs {
            row[j] += v;
        }
        rows.push(row);
        rhs.push(bound);
    };
    for i in 0..n {
        push(&[(i, 1.0), (n + i, -1.0), (sup, -1.0)], 0.0);
        push(&[(i, -1.0), (n + i, 1.0), (sup, -1.0)], 0.0);
    }
    for i in 0..n.saturating_sub(1) {
        let gap = xs[i + 1] - xs[i];
        push(&[(i + 1, 1.0), (n + i + 1, -1.0), (i, -1.0), (n + i, 1.0), (lip, -gap)], 0.0);
        push(&[(i + 1, -1.0), (n + i + 1, 1.0), (i, 1.0), (n + i, -1.0), (lip, -gap)], 0.0);
    }
    push(&[(lip, 1.0), (sup, 1.0)], 1.0);

    let sol = simplex::maximize(&objective, &rows, &rhs)?;
    Ok(MetricResult { value: sol.value.max(0.0), certificate: None, defect_slack })
}
