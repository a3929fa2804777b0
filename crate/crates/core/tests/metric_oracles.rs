mod oracles;

use gw_core::measures::{tv_distance, DiscreteMeasure};
use gw_core::metrics::{bounded_lipschitz, prohorov, strassen_coupling};
use num_rational::Ratio;
use proptest::prelude::*;

fn atoms(m: &DiscreteMeasure) -> Vec<(f64, f64)> {
    m.positions().into_iter().zip(m.weights().iter().copied()).collect()
}

fn measure(raw: Vec<(u64, u64, f64)>) -> DiscreteMeasure {
    let total: f64 = raw.iter().map(|r| r.2).sum();
    DiscreteMeasure::from_atoms(raw.into_iter().map(|(n, d, w)| (Ratio::new(n, d), w / total)), 0.0).unwrap()
}

fn rational_measure(max_atoms: usize) -> impl Strategy<Value = DiscreteMeasure> {
    prop::collection::vec((0u64..=8, 1u64..=4, 0.01f64..1.0), 1..=max_atoms).prop_map(measure)
}

fn integer_measure(max_atoms: usize) -> impl Strategy<Value = DiscreteMeasure> {
    prop::collection::vec((0u64..=10, Just(1u64), 0.01f64..1.0), 1..=max_atoms).prop_map(measure)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn prohorov_matches_subset_enumeration(a in rational_measure(8), b in rational_measure(8)) {
        let r = prohorov(&a, &b);
        let brute = oracles::prohorov_subsets(&atoms(&a), &atoms(&b));
        prop_assert!((r.value - brute).abs() <= 1e-9, "flow {} vs subsets {}", r.value, brute);
        let c = r.certificate.unwrap();
        prop_assert!(c.marginal_error(&a, &b) <= 1e-10);
        prop_assert!(c.band_mass() >= 1.0 - r.value - 1e-10);
    }

    #[test]
    fn prohorov_equals_tv_on_integers(a in integer_measure(8), b in integer_measure(8)) {
        prop_assert!((prohorov(&a, &b).value - tv_distance(&a, &b).distance).abs() <= 1e-9);
    }

    #[test]
    fn strassen_coupling_at_any_feasible_eps(a in rational_measure(6), b in rational_measure(6), extra in 0.0f64..0.5) {
        let eps = prohorov(&a, &b).value + extra;
        let c = strassen_coupling(&a, &b, eps).unwrap();
        prop_assert!(c.marginal_error(&a, &b) <= 1e-10);
        prop_assert!(c.band_mass() >= 1.0 - eps - 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn bounded_lipschitz_matches_grid(a in rational_measure(4), b in rational_measure(4)) {
        let beta = bounded_lipschitz(&a, &b).unwrap().value;
        let grid = oracles::bounded_lipschitz_grid(&atoms(&a), &atoms(&b), 20_000);
        prop_assert!(grid <= beta + 1e-9, "grid {} above lp {}", grid, beta);
        prop_assert!(beta - grid <= 2e-3, "lp {} vs grid {}", beta, grid);
    }
}

#[test]
fn prohorov_of_diracs() {
    for a in 0..=12u64 {
        for b in 0..=12u64 {
            let (x, y) = (Ratio::new(a, 4), Ratio::new(b, 4));
            let r = prohorov(&DiscreteMeasure::dirac(x), &DiscreteMeasure::dirac(y)).value;
            let gap = (a as f64 - b as f64).abs() / 4.0;
            assert_eq!(r, gap.min(1.0), "{a}/4 vs {b}/4");
        }
    }
}
