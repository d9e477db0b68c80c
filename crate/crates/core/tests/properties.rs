use num_complex::Complex64;
use proptest::prelude::*;

use tripwell::cli::Grid;
use tripwell::dynamics::{propagate, ParameterSchedule};
use tripwell::lz::{lz_formula, run_equal_slope, BranchSelector, LZConfig};
use tripwell::model::{
    apply_hamiltonian, chemical_potential, classical_hamiltonian, from_canonical, to_canonical, ModelParams,
    StateVector,
};
use tripwell::stationary::{find_stationary_states, Classification, SearchConfig};
use tripwell::stirap::{horn_scenario, run_stirap, stirap_feasible, HornScenario, StirapConfig};

fn params(g: std::ops::RangeInclusive<f64>) -> impl Strategy<Value = ModelParams> {
    (-1.0..1.0, -1.0..1.0, 0.05..0.5, 0.05..0.5, g).prop_map(|(epsilon, delta, v, w, g)| ModelParams {
        epsilon,
        delta,
        v,
        w,
        g,
    })
}

fn state() -> impl Strategy<Value = StateVector> {
    prop::array::uniform6(-1.0..1.0f64)
        .prop_filter("nonzero", |x| x.iter().map(|v| v * v).sum::<f64>() > 1e-3)
        .prop_map(|x| {
            StateVector::normalized(
                Complex64::new(x[0], x[1]),
                Complex64::new(x[2], x[3]),
                Complex64::new(x[4], x[5]),
            )
            .unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hamiltonian_action_follows_global_phase(p in params(-1.0..=1.0), s in state(), theta in -3.2..3.2f64) {
        let h = apply_hamiltonian(&s, &p);
        let hr = apply_hamiltonian(&s.with_global_phase(theta), &p);
        let phase = Complex64::from_polar(1.0, theta);
        for i in 0..3 {
            prop_assert!((hr[i] - h[i] * phase).norm() < 1e-13);
        }
        prop_assert!((chemical_potential(&s, &p) - chemical_potential(&s.with_global_phase(theta), &p)).abs() < 1e-13);
    }

    #[test]
    fn linear_action_is_a_matrix_product(p in params(0.0..=0.0), s in state()) {
        let h = apply_hamiltonian(&s, &p);
        let m = p.linear_matrix();
        let psi = s.amplitudes();
        for i in 0..3 {
            let expected: Complex64 = (0..3).map(|j| psi[j] * m[i][j]).sum();
            prop_assert!((h[i] - expected).norm() < 1e-14);
        }
    }

    #[test]
    fn canonical_round_trip(s in state()) {
        prop_assume!(s.b().norm() > 1e-3);
        let back = from_canonical(&to_canonical(&s).unwrap());
        prop_assert!((back.overlap(&s) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn classical_energy_is_the_expectation_value(p in params(-1.0..=1.0), s in state()) {
        prop_assume!(s.b().norm() > 1e-3);
        let pops = s.populations();
        let quartic: f64 = pops.iter().map(|x| x * x).sum();
        // <H> counts the interaction twice relative to the energy
        let h = classical_hamiltonian(&to_canonical(&s).unwrap(), &p);
        prop_assert!((chemical_potential(&s, &p) - (h + 0.5 * p.g * quartic)).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn stationary_states_satisfy_their_equations(p in params(-1.0..=1.0)) {
        let out = find_stationary_states(&p, &SearchConfig::default());
        prop_assert!(out.states.len() >= 3);
        prop_assert_eq!(out.states.len() % 2, 1);
        prop_assert_eq!(out.index_sum(), 3);
        prop_assert!(out.count(Classification::Elliptic) >= 2);
        for s in &out.states {
            prop_assert!(s.residual < 1e-10);
            let pops = s.populations();
            let quartic: f64 = pops.iter().map(|x| x * x).sum();
            if let Ok(c) = to_canonical(&s.state) {
                prop_assert!((classical_hamiltonian(&c, &p) - (s.mu - 0.5 * p.g * quartic)).abs() < 1e-10);
            }
        }
        for w in out.states.windows(2) {
            prop_assert!(w[0].mu <= w[1].mu);
        }
    }

    #[test]
    fn propagation_conserves_the_norm(p in params(-1.0..=1.0), s in state(), alpha in -0.05..0.05f64) {
        let schedule = ParameterSchedule::equal_slope(alpha, p.delta, p.v, p.w, p.g);
        let traj = propagate(&s, &schedule, -20.0, 20.0, 1e-10).unwrap();
        prop_assert!(traj.max_norm_deviation <= 1e-9);
        for pops in &traj.populations {
            prop_assert!((pops.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn lz_formula_is_a_probability_increasing_with_rate(v in 0.01..1.0f64, a in 1e-4..1.0f64, b in 1e-4..1.0f64) {
        let (pa, pb) = (lz_formula(v, a).unwrap(), lz_formula(v, b).unwrap());
        prop_assert!((0.0..=1.0).contains(&pa));
        if a < b {
            prop_assert!(pa <= pb);
        }
    }

    #[test]
    fn feasibility_excludes_horns(g in -1.0..1.0f64, d in -1.0..1.0f64) {
        prop_assume!(d != 0.0);
        let horn = horn_scenario(g, d);
        if stirap_feasible(g, d) {
            prop_assert_eq!(horn, HornScenario::NoHorn);
        }
        if horn == HornScenario::SameSignHorn {
            prop_assert!(!stirap_feasible(g, d));
        }
        prop_assert_eq!(horn_scenario(-g, -d), horn);
        prop_assert_eq!(stirap_feasible(-g, -d), stirap_feasible(g, d));
    }

    #[test]
    fn grids_round_trip(min in -10.0..10.0f64, span in 0.01..5.0f64, n in 2usize..500) {
        let g = Grid::Range { min, max: min + span, count: n };
        let parsed: Grid = g.to_string().parse().unwrap();
        prop_assert_eq!(&parsed, &g);
        let v = parsed.values();
        prop_assert_eq!(v.len(), n);
        prop_assert!(v.windows(2).all(|w| w[1] > w[0]));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn stirap_is_symmetric_under_joint_sign_flip(g in -0.3..0.3f64) {
        let a = run_stirap(&StirapConfig { samples: 2, ..StirapConfig::new(0.1, g) }).unwrap().efficiency;
        let b = run_stirap(&StirapConfig { samples: 2, ..StirapConfig::new(-0.1, -g) }).unwrap().efficiency;
        prop_assert!((a - b).abs() < 1e-6, "{} vs {}", a, b);
    }

    #[test]
    fn lz_mirror_sweep_gives_the_same_probability(g in -0.4..0.0f64, alpha in 0.02..0.1f64) {
        let c = LZConfig { samples: 2, ..LZConfig::new(-0.4, 0.1, 0.2, g, alpha) };
        let mirrored = LZConfig { delta: 0.4, g: -g, alpha: -alpha, branch: BranchSelector::Highest, ..c };
        let (p, q) = (run_equal_slope(&c).unwrap().p, run_equal_slope(&mirrored).unwrap().p);
        prop_assert!((p - q).abs() < 1e-6, "{} vs {}", p, q);
    }
}

/// Efficiency thresholds of the horn classification on the acceptance grid.
#[test]
fn stirap_thresholds_on_the_acceptance_grid() {
    for d in [0.1f64, -0.1] {
        for i in 0..61 {
            let g = d.signum() * (i as f64 - 30.0) / 100.0;
            let e = run_stirap(&StirapConfig { samples: 2, ..StirapConfig::new(d, g) }).unwrap().efficiency;
            if stirap_feasible(g, d) {
                assert!(e > 0.95, "Delta {d}, g {g}: {e}");
            }
            if horn_scenario(g, d) == HornScenario::SameSignHorn {
                assert!(e < 0.9, "Delta {d}, g {g}: {e}");
            }
        }
    }
}
