//! Finite discrete measures on the non-negative rationals.
//!
//! A [`DiscreteMeasure`] is kept canonical: support strictly increasing,
//! fractions reduced, no zero weights. Mass removed by tail truncation is
//! accumulated in `defect` and never redistributed, so retained
//! probabilities stay exact.

use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A support point: a reduced non-negative fraction.
pub type Point = Ratio<u64>;

/// Allowed deviation of `sum(weights) + defect` from one.
pub const MASS_TOLERANCE: f64 = 1e-9;

/// Above this many slots, integer convolutions switch from dense to sparse.
const DENSE_LIMIT: u64 = 1 << 22;

pub fn point_value(p: &Point) -> f64 {
    *p.numer() as f64 / *p.denom() as f64
}

pub fn int_point(k: u64) -> Point {
    Ratio::from_integer(k)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMeasure", into = "RawMeasure")]
pub struct DiscreteMeasure {
    support: Vec<Point>,
    weights: Vec<f64>,
    defect: f64,
}

/// Wire form: `{"support": [[num,den],...], "weights": [...], "defect": x}`.
#[derive(Serialize, Deserialize)]
struct RawMeasure {
    support: Vec<(u64, u64)>,
    weights: Vec<f64>,
    defect: f64,
}

impl TryFrom<RawMeasure> for DiscreteMeasure {
    type Error = Error;

    fn try_from(raw: RawMeasure) -> Result<Self> {
        if raw.support.len() != raw.weights.len() {
            return Err(Error::InvalidMeasure(format!(
                "support has {} points but weights has {}",
                raw.support.len(),
                raw.weights.len()
            )));
        }
        let mut support = Vec::with_capacity(raw.support.len());
        for &(num, den) in &raw.support {
            if den == 0 {
                return Err(Error::InvalidMeasure("zero denominator".into()));
            }
            // gcd(0, d) = d, so zero must be written 0/1
            if num.gcd(&den) != 1 {
                return Err(Error::InvalidMeasure(format!("fraction {num}/{den} is not reduced")));
            }
            support.push(Ratio::new_raw(num, den));
        }
        if support.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidMeasure("support is not strictly increasing".into()));
        }
        if raw.weights.iter().any(|&w| w == 0.0) {
            return Err(Error::InvalidMeasure("zero weights must not be stored".into()));
        }
        Self::checked(support, raw.weights, raw.defect)
    }
}

impl From<DiscreteMeasure> for RawMeasure {
    fn from(m: DiscreteMeasure) -> Self {
        RawMeasure {
            support: m.support.iter().map(|p| (*p.numer(), *p.denom())).collect(),
            weights: m.weights,
            defect: m.defect,
        }
    }
}

impl DiscreteMeasure {
    fn checked(support: Vec<Point>, weights: Vec<f64>, defect: f64) -> Result<Self> {
        if !(defect.is_finite() && defect >= 0.0) {
            return Err(Error::InvalidMeasure(format!("defect {defect} must be finite and >= 0")));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidMeasure(format!("weight {w} must be finite and >= 0")));
        }
        let total: f64 = weights.iter().sum::<f64>() + defect;
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidMeasure(format!(
                "weights plus defect sum to {total}, expected 1"
            )));
        }
        Ok(Self { support, weights, defect })
    }

    /// Builds a measure from arbitrary atoms: duplicates are merged, zero
    /// weights dropped, and the support sorted.
    pub fn from_atoms<I>(atoms: I, defect: f64) -> Result<Self>
    where
        I: IntoIterator<Item = (Point, f64)>,
    {
        // stable sort keeps the summation order of merged atoms deterministic
        let mut atoms: Vec<(Point, f64)> = atoms.into_iter().collect();
        atoms.sort_by(|a, b| a.0.cmp(&b.0));
        let mut support: Vec<Point> = Vec::with_capacity(atoms.len());
        let mut weights: Vec<f64> = Vec::with_capacity(atoms.len());
        for (x, w) in atoms {
            if support.last() == Some(&x) {
                *weights.last_mut().unwrap() += w;
            } else {
                support.push(x);
                weights.push(w);
            }
        }
        let (support, weights) = support.into_iter().zip(weights).filter(|&(_, w)| w != 0.0).unzip();
        Self::checked(support, weights, defect)
    }

    /// Builds an integer-supported measure from a dense probability vector
    /// indexed by value.
    pub fn from_dense(probs: &[f64], defect: f64) -> Result<Self> {
        let (support, weights) = probs
            .iter()
            .enumerate()
            .filter(|&(_, &w)| w != 0.0)
            .map(|(k, &w)| (int_point(k as u64), w))
            .unzip();
        Self::checked(support, weights, defect)
    }

    pub fn dirac(x: Point) -> Self {
        Self { support: vec![x], weights: vec![1.0], defect: 0.0 }
    }

    pub fn dirac_int(k: u64) -> Self {
        Self::dirac(int_point(k))
    }

    pub fn support(&self) -> &[Point] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn defect(&self) -> f64 {
        self.defect
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn atoms(&self) -> impl Iterator<Item = (Point, f64)> + '_ {
        self.support.iter().copied().zip(self.weights.iter().copied())
    }

    /// Retained mass, i.e. `1 - defect` up to rounding.
    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn mass_at(&self, x: &Point) -> f64 {
        match self.support.binary_search(x) {
            Ok(i) => self.weights[i],
            Err(_) => 0.0,
        }
    }

    pub fn is_integer(&self) -> bool {
        self.support.iter().all(|p| p.is_integer())
    }

    pub fn max_point(&self) -> Option<Point> {
        self.support.last().copied()
    }

    /// Support points as floats, for metric computations.
    pub fn positions(&self) -> Vec<f64> {
        self.support.iter().map(point_value).collect()
    }

    /// Dense probability vector indexed by value; integer supports only.
    pub fn to_dense(&self) -> Result<Vec<f64>> {
        if !self.is_integer() {
            return Err(Error::NonIntegerSupport);
        }
        let len = self.max_point().map_or(0, |p| p.to_integer() as usize + 1);
        let mut out = vec![0.0; len];
        for (x, w) in self.atoms() {
            out[x.to_integer() as usize] = w;
        }
        Ok(out)
    }

    pub(crate) fn int_atoms(&self) -> Result<Vec<(u64, f64)>> {
        if !self.is_integer() {
            return Err(Error::NonIntegerSupport);
        }
        Ok(self.atoms().map(|(x, w)| (x.to_integer(), w)).collect())
    }

    /// Removes the largest support points while their cumulative mass stays
    /// within `budget`, moving that mass into the defect.
    pub fn truncate_tail(&self, budget: f64) -> Self {
        let mut support = self.support.clone();
        let mut weights = self.weights.clone();
        let mut dropped = 0.0;
        while weights.len() > 1 {
            let last = *weights.last().unwrap();
            if dropped + last > budget {
                break;
            }
            dropped += last;
            weights.pop();
            support.pop();
        }
        Self { support, weights, defect: self.defect + dropped }
    }

}

/// Total variation distance on retained mass plus the worst-case slack from
/// the two defects.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TvDistance {
    pub distance: f64,
    pub slack: f64,
}

pub fn tv_distance(a: &DiscreteMeasure, b: &DiscreteMeasure) -> TvDistance {
    let (mut i, mut j) = (0, 0);
    let mut sum = 0.0;
    let (sa, sb) = (a.support(), b.support());
    while i < sa.len() || j < sb.len() {
        if j == sb.len() || (i < sa.len() && sa[i] < sb[j]) {
            sum += a.weights[i];
            i += 1;
        } else if i == sa.len() || sb[j] < sa[i] {
            sum += b.weights[j];
            j += 1;
        } else {
            sum += (a.weights[i] - b.weights[j]).abs();
            i += 1;
            j += 1;
        }
    }
    TvDistance { distance: 0.5 * sum, slack: 0.5 * (a.defect + b.defect) }
}

pub fn mean(a: &DiscreteMeasure) -> f64 {
    a.atoms().map(|(x, w)| point_value(&x) * w).sum()
}

/// Combined defect of an independent sum.
fn sum_defect(da: f64, db: f64) -> f64 {
    da + db - da * db
}

/// Convolution of two integer-supported measures followed by a tail
/// truncation that adds at most `budget` to the defect.
pub fn convolve(a: &DiscreteMeasure, b: &DiscreteMeasure, budget: f64) -> Result<DiscreteMeasure> {
    check_budget(budget)?;
    let xa = a.int_atoms()?;
    let xb = b.int_atoms()?;
    let top = xa.last().map_or(0, |p| p.0) + xb.last().map_or(0, |p| p.0);
    let defect = sum_defect(a.defect, b.defect);
    let out = if top < DENSE_LIMIT {
        let mut dense = vec![0.0; top as usize + 1];
        for &(x, wx) in &xa {
            for &(y, wy) in &xb {
                dense[(x + y) as usize] += wx * wy;
            }
        }
        DiscreteMeasure::from_dense(&dense, defect)?
    } else {
        let mut pairs: Vec<(u64, f64)> = Vec::with_capacity(xa.len() * xb.len());
        for &(x, wx) in &xa {
            for &(y, wy) in &xb {
                pairs.push((x + y, wx * wy));
            }
        }
        pairs.sort_unstable_by_key(|p| p.0);
        DiscreteMeasure::from_atoms(pairs.into_iter().map(|(v, w)| (int_point(v), w)), defect)?
    };
    Ok(out.truncate_tail(budget))
}

/// `k`-fold convolution power by repeated squaring. The total defect added
/// by truncation is at most `budget`. By convention `k = 0` yields `δ_0`,
/// the law of an empty sum.
pub fn convolution_power(a: &DiscreteMeasure, k: u64, budget: f64) -> Result<DiscreteMeasure> {
    check_budget(budget)?;
    if !a.is_integer() {
        return Err(Error::NonIntegerSupport);
    }
    match k {
        0 => return Ok(DiscreteMeasure::dirac_int(0)),
        1 => return Ok(a.clone()),
        _ => {}
    }
    let bits = 64 - k.leading_zeros() as u64;
    // at most one squaring and one multiply per bit
    let step_budget = budget / (2 * bits) as f64;
    let mut result: Option<DiscreteMeasure> = None;
    let mut base = a.clone();
    let mut e = k;
    loop {
        if e & 1 == 1 {
            result = Some(match result {
                None => base.clone(),
                Some(r) => convolve(&r, &base, step_budget)?,
            });
        }
        e >>= 1;
        if e == 0 {
            break;
        }
        base = convolve(&base, &base, step_budget)?;
    }
    Ok(result.expect("k >= 2 sets at least one bit"))
}

fn check_budget(budget: f64) -> Result<()> {
    if budget.is_finite() && budget >= 0.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!("truncation budget {budget} must be finite and >= 0")))
    }
}

/// Serde adapter writing points as `[num, den]` pairs.
pub(crate) mod points_serde {
    use num_integer::Integer;
    use num_rational::Ratio;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::Point;

    pub fn serialize<S: Serializer>(points: &[Point], s: S) -> Result<S::Ok, S::Error> {
        let raw: Vec<(u64, u64)> = points.iter().map(|p| (*p.numer(), *p.denom())).collect();
        raw.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Point>, D::Error> {
        let raw = Vec::<(u64, u64)>::deserialize(d)?;
        raw.into_iter()
            .map(|(num, den)| {
                if den == 0 || num.gcd(&den) != 1 {
                    Err(D::Error::custom(format!("fraction {num}/{den} is not reduced")))
                } else {
                    Ok(Ratio::new_raw(num, den))
                }
            })
            .collect()
    }
}

/// Dense helpers for integer-supported laws, used by the engine where
/// supports are contiguous ranges of small integers.
pub(crate) mod dense {
    /// Multiplies a dense law by a sparse one given as `(value, prob)` pairs.
    pub fn convolve_sparse(a: &[f64], b: &[(usize, f64)]) -> Vec<f64> {
        let top_b = b.last().map_or(0, |p| p.0);
        let mut out = vec![0.0; a.len() + top_b];
        for (x, &wx) in a.iter().enumerate() {
            if wx == 0.0 {
                continue;
            }
            for &(y, wy) in b {
                out[x + y] += wx * wy;
            }
        }
        trim(&mut out);
        out
    }

    pub fn trim(p: &mut Vec<f64>) {
        while p.len() > 1 && *p.last().unwrap() == 0.0 {
            p.pop();
        }
    }

    /// Drops the largest values while their cumulative mass stays within
    /// `budget`; returns the mass dropped.
    pub fn truncate_tail(p: &mut Vec<f64>, budget: f64) -> f64 {
        trim(p);
        let mut dropped = 0.0;
        while p.len() > 1 {
            let last = *p.last().unwrap();
            if dropped + last > budget {
                break;
            }
            dropped += last;
            p.pop();
            trim(p);
        }
        dropped
    }
}
