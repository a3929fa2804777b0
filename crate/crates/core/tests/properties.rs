use gw_core::engine::joint_law;
use gw_core::estimator::estimator_law;
use gw_core::lab;
use gw_core::measures::{int_point, tv_distance, DiscreteMeasure};
use gw_core::metrics::{
    bounded_lipschitz, joint_tv, joint_tv_constant, prohorov, prohorov_with, trajectory_tv, FlowSolver,
    ProhorovOptions, ScanMode,
};
use gw_core::montecarlo::{simulate_paths, SimConfig};
use gw_core::offspring::{build, pgf_iterate, FamilySpec};
use gw_core::OffspringLaw;
use num_rational::Ratio;
use proptest::prelude::*;

fn measure(raw: Vec<(u64, u64, f64)>) -> DiscreteMeasure {
    let total: f64 = raw.iter().map(|r| r.2).sum();
    DiscreteMeasure::from_atoms(raw.into_iter().map(|(n, d, w)| (Ratio::new(n, d), w / total)), 0.0).unwrap()
}

fn rational_measure(max_atoms: usize) -> impl Strategy<Value = DiscreteMeasure> {
    prop::collection::vec((0u64..=12, 1u64..=6, 0.01f64..1.0), 1..=max_atoms).prop_map(measure)
}

fn family() -> impl Strategy<Value = OffspringLaw> {
    prop_oneof![
        (0.55f64..0.95).prop_map(|p| FamilySpec::Binary { p }),
        (0.05f64..0.4, 0.0f64..1.0).prop_map(|(p0, s)| FamilySpec::ThreePoint {
            p0,
            p2: (1.0 - p0) * s,
            p3: (1.0 - p0) * (1.0 - s)
        }),
    ]
    .prop_map(|spec| build(&spec, 0.0).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn flow_solvers_and_scans_agree(a in rational_measure(12), b in rational_measure(12)) {
        let reference = prohorov_with(&a, &b, ProhorovOptions { solver: FlowSolver::AugmentingPath, scan: ScanMode::Linear }).value;
        for solver in [FlowSolver::AugmentingPath, FlowSolver::IntervalGreedy, FlowSolver::Auto] {
            for scan in [ScanMode::Binary, ScanMode::Linear] {
                let v = prohorov_with(&a, &b, ProhorovOptions { solver, scan }).value;
                prop_assert!((v - reference).abs() <= 1e-12, "{:?}/{:?}: {} vs {}", solver, scan, v, reference);
            }
        }
    }

    #[test]
    fn prohorov_is_a_metric(a in rational_measure(6), b in rational_measure(6), c in rational_measure(6)) {
        let ab = prohorov(&a, &b).value;
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert!((ab - prohorov(&b, &a).value).abs() <= 1e-12);
        prop_assert_eq!(prohorov(&a, &a).value, 0.0);
        prop_assert!(ab <= prohorov(&a, &c).value + prohorov(&c, &b).value + 1e-12);
    }

    #[test]
    fn prohorov_below_tv_and_beta_bound(a in rational_measure(10), b in rational_measure(10)) {
        let rho = prohorov(&a, &b).value;
        prop_assert!(rho <= tv_distance(&a, &b).distance + 1e-12);
        let beta = bounded_lipschitz(&a, &b).unwrap().value;
        prop_assert!(rho * rho <= 1.5 * beta + 1e-8, "rho {} beta {}", rho, beta);
    }

    #[test]
    fn trajectory_tv_bound(mu1 in family(), mu2 in family(), z0 in 1u64..=2) {
        let d = tv_distance(&mu1.measure, &mu2.measure).distance;
        let traj = trajectory_tv(&mu1, &mu2, 4, z0).unwrap();
        for (i, t) in traj.iter().enumerate() {
            let n = i + 1;
            let bound = z0 as f64 * joint_tv_constant(mu1.mean_m, mu2.mean_m, n) * d;
            prop_assert!(t.distance <= bound + 1e-10, "n = {}: {} > {}", n, t.distance, bound);
            let pair = joint_tv(&joint_law(&mu1, n, z0, 0.0).unwrap(), &joint_law(&mu2, n, z0, 0.0).unwrap()).unwrap();
            prop_assert!(pair.distance <= t.distance + 1e-12);
        }
    }

    #[test]
    fn extinction_by_n_is_lipschitz_in_tv(mu1 in family(), mu2 in family()) {
        let d = tv_distance(&mu1.measure, &mu2.measure).distance;
        for s in 0..=10 {
            let s = s as f64 / 10.0;
            let gap = (pgf_iterate(&mu1, s, 1).unwrap() - pgf_iterate(&mu2, s, 1).unwrap()).abs();
            prop_assert!(gap <= d + 1e-12);
        }
    }

    #[test]
    fn decomposition_identity_holds(mu in family(), n in 1usize..=4, z0 in 1u64..=2) {
        let joint = joint_law(&mu, n, z0, 0.0).unwrap();
        let plain = estimator_law(&joint, false).unwrap();
        let cond = estimator_law(&joint, true).unwrap();
        let s = cond.survival_probability;
        for (x, w) in plain.law.atoms() {
            let extinct = if x == int_point(0) { 1.0 - s } else { 0.0 };
            prop_assert!((w - cond.law.mass_at(&x) * s - extinct).abs() <= 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn simulation_is_seed_deterministic(seed in any::<u64>(), jobs in 1usize..=3) {
        let law = build(&FamilySpec::Binary { p: 0.75 }, 0.0).unwrap();
        let cfg = SimConfig { replications: 10_000, ..SimConfig::new(seed, 1, 4) };
        let a = simulate_paths(&law, &cfg).unwrap();
        let b = simulate_paths(&law, &SimConfig { jobs, ..cfg }).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn every_default_claim_holds() {
    let reports = lab::run_suite("all", &lab::SuiteConfig::default()).unwrap();
    for claim in lab::CLAIMS {
        assert!(reports.iter().any(|r| r.claim == claim), "{claim} missing");
    }
    let failures: Vec<_> = reports.iter().filter(|r| !r.holds()).collect();
    assert!(failures.is_empty(), "{failures:#?}");
}
