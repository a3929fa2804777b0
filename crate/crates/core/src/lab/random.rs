//! Seeded random instances for the verification suites.

use num_rational::Ratio;
use rand::Rng;

use crate::measures::DiscreteMeasure;
use crate::offspring::{build, FamilySpec, OffspringLaw};

/// A supercritical binary or three-point law.
pub fn family<R: Rng>(rng: &mut R) -> OffspringLaw {
    let spec = if rng.random_bool(0.5) {
        FamilySpec::Binary { p: rng.random_range(0.55..0.95) }
    } else {
        let p0 = rng.random_range(0.05..0.4);
        let split = rng.random_range(0.0..1.0);
        FamilySpec::ThreePoint { p0, p2: (1.0 - p0) * split, p3: (1.0 - p0) * (1.0 - split) }
    };
    build(&spec, 0.0).expect("parameters are in range")
}

/// A measure with `1..=max_atoms` atoms on `{0, ..., 10}`, or on fractions
/// `a / b` with `a <= 8`, `b <= 4` when `integer` is false.
pub fn measure<R: Rng>(rng: &mut R, max_atoms: usize, integer: bool) -> DiscreteMeasure {
    let count = rng.random_range(1..=max_atoms);
    let raw: Vec<(Ratio<u64>, f64)> = (0..count)
        .map(|_| {
            let x = if integer {
                Ratio::from_integer(rng.random_range(0..=10))
            } else {
                Ratio::new(rng.random_range(0..=8), rng.random_range(1..=4))
            };
            (x, rng.random_range(0.01..1.0))
        })
        .collect();
    let total: f64 = raw.iter().map(|a| a.1).sum();
    DiscreteMeasure::from_atoms(raw.into_iter().map(|(x, w)| (x, w / total)), 0.0).expect("normalized")
}
