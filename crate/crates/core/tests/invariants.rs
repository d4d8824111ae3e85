use std::f64::consts::TAU;

use kuramoto_moments::measures::{build_discretization, sample_pairs};
use kuramoto_moments::momentsys::{init_lattice, integrate_moments, invariant_report, MomentLattice};
use kuramoto_moments::orthopoly::{gauss_nodes, recurrence_coefficients};
use kuramoto_moments::{Complex64, Coupling, FrequencyLaw, MeasureSpec, OscillatorState, PhaseLaw};
use proptest::prelude::*;

fn coupling_strategy() -> impl Strategy<Value = Coupling> {
    prop_oneof![
        Just(Coupling::sine()),
        (-0.5..0.5f64, -1.0..1.0f64, -1.0..1.0f64, -0.5..0.5f64, -0.5..0.5f64).prop_map(|(c, a, b, d, e)| {
            Coupling::from_harmonics(c, &[(1, Complex64::new(a, b)), (2, Complex64::new(d, e))]).unwrap()
        }),
    ]
}

fn frequency_strategy() -> impl Strategy<Value = FrequencyLaw> {
    prop_oneof![
        (-1.0..1.0f64, 0.2..2.0f64).prop_map(|(mean, sd)| FrequencyLaw::Gaussian { mean, sd }),
        (-2.0..0.0f64, 0.1..2.0f64).prop_map(|(lo, w)| FrequencyLaw::Uniform { lo, hi: lo + w }),
        (0.5..2.0f64, 0.2..1.0f64).prop_map(|(offset, sd)| FrequencyLaw::BimodalGaussian { offset, sd }),
    ]
}

fn phase_strategy() -> impl Strategy<Value = PhaseLaw> {
    prop_oneof![
        Just(PhaseLaw::Uniform),
        (0.0..TAU, 0.1..2.0f64).prop_map(|(center, sigma)| PhaseLaw::WrappedGaussian { center, sigma }),
        (0.0..TAU).prop_map(|theta| PhaseLaw::PointMass { theta }),
    ]
}

fn state_strategy() -> impl Strategy<Value = OscillatorState> {
    (2usize..40, 0.0..3.0f64, coupling_strategy()).prop_flat_map(|(n, k, f)| {
        (
            prop::collection::vec(0.0..TAU, n),
            prop::collection::vec(-3.0..3.0f64, n),
            Just(k),
            Just(f),
        )
            .prop_map(|(th, om, k, f)| OscillatorState::new(th, om, k, f).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn discretization_weights_sum_to_one(
        phase in phase_strategy(),
        freq in frequency_strategy(),
        n_omega in 1usize..20,
        n_theta in 1usize..40,
    ) {
        let spec = MeasureSpec::new(phase, freq).unwrap();
        let d = build_discretization(&spec, n_omega, n_theta).unwrap();
        let total: f64 = d.nodes().iter().map(|n| n.weight).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(d.nodes().iter().all(|n| n.weight >= 0.0));
    }

    #[test]
    fn sampling_is_a_function_of_the_seed(freq in frequency_strategy(), seed in any::<u64>(), n in 1usize..50) {
        let spec = MeasureSpec::new(PhaseLaw::Uniform, freq).unwrap();
        let a = sample_pairs(&spec, n, seed).unwrap();
        let b = sample_pairs(&spec, n, seed).unwrap();
        prop_assert_eq!(&a, &b);
        let c = sample_pairs(&spec, n, seed.wrapping_add(1)).unwrap();
        prop_assert_ne!(a, c);
    }

    #[test]
    fn mean_field_rhs_matches_pairwise_sum(state in state_strategy()) {
        let fast = state.rhs();
        let slow = state.rhs_pairwise();
        let scale = 1.0 + state.strength().abs() * state.coupling().sup_bound();
        for (a, b) in fast.iter().zip(&slow) {
            prop_assert!((a - b).abs() < 1e-12 * scale, "{a} vs {b}");
        }
    }

    #[test]
    fn gauss_nodes_stay_inside_the_support(lo in -3.0..3.0f64, w in 0.01..4.0f64, n in 1usize..30) {
        let g = FrequencyLaw::Uniform { lo, hi: lo + w };
        let c = recurrence_coefficients(&g, n - 1).unwrap();
        let rule = gauss_nodes(&c, n).unwrap();
        prop_assert!(rule.iter().all(|q| q.x > lo && q.x < lo + w && q.w > 0.0));
        prop_assert!(c.b().iter().all(|&b| b > 0.0));
    }

    #[test]
    fn off_diagonal_coefficients_are_positive(freq in frequency_strategy(), m in 1usize..30) {
        let c = recurrence_coefficients(&freq, m).unwrap();
        prop_assert!(c.b().iter().all(|&b| b > 0.0 && b.is_finite()));
    }

    #[test]
    fn hermite_polynomials_match_their_monomial_form(x in -4.0..4.0f64, m in 0usize..14) {
        // He_m(x) = m! Σ_j (-1)^j x^{m-2j} / (j! (m-2j)! 2^j), P_m = He_m / √m!
        let g = FrequencyLaw::Gaussian { mean: 0.0, sd: 1.0 };
        let c = recurrence_coefficients(&g, m).unwrap();
        let fact = |n: usize| (1..=n).map(|i| i as f64).product::<f64>();
        let he: f64 = (0..=m / 2)
            .map(|j| {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                sign * fact(m) * x.powi((m - 2 * j) as i32) / (fact(j) * fact(m - 2 * j) * 2f64.powi(j as i32))
            })
            .sum();
        let expected = he / fact(m).sqrt();
        let got = c.eval(m, x).unwrap();
        prop_assert!((got - expected).abs() < 1e-10 * (1.0 + expected.abs()), "{got} vs {expected}");
    }

    #[test]
    fn lattice_has_hermitian_symmetry(phase in phase_strategy(), freq in frequency_strategy()) {
        let spec = MeasureSpec::new(phase, freq.clone()).unwrap();
        let h = build_discretization(&spec, 6, 16).unwrap();
        let c = recurrence_coefficients(&freq, 4).unwrap();
        let lat = init_lattice(&h, &c, 4, 5, 1.0, Coupling::sine()).unwrap();
        for m in 0..=4 {
            for k in 0..=5i64 {
                prop_assert!((lat.get(m, -k) - lat.get(m, k).conj()).norm() < 1e-15);
            }
            prop_assert!(lat.get(m, 0).im.abs() < 1e-15);
        }
    }

    #[test]
    fn zero_phase_row_is_conserved(phase in phase_strategy(), freq in frequency_strategy(), k in 0.0..2.0f64) {
        let spec = MeasureSpec::new(phase, freq.clone()).unwrap();
        let h = build_discretization(&spec, 6, 16).unwrap();
        let c = recurrence_coefficients(&freq, 6).unwrap();
        let lat = init_lattice(&h, &c, 6, 8, k, Coupling::sine()).unwrap();
        if let Ok(series) = integrate_moments(&lat, 0.5, 0.01, 10) {
            let r = invariant_report(&series);
            prop_assert!(r.k0_drift < 1e-14, "{}", r.k0_drift);
            prop_assert!(r.z00_error < 1e-15);
            prop_assert!(r.conjugacy_defect < 1e-14);
        }
    }

    #[test]
    fn sine_fast_path_matches_general_rhs(state in state_strategy(), m_max in 1usize..8, k_max in 1usize..8) {
        let g = FrequencyLaw::Gaussian { mean: 0.0, sd: 1.0 };
        let c = recurrence_coefficients(&g, m_max).unwrap();
        let n = state.len() as f64;
        let pts = state.theta().iter().zip(state.omega()).map(|(&t, &o)| (t, o, 1.0 / n));
        let lat = MomentLattice::from_points(pts, &c, m_max, k_max, state.strength(), Coupling::sine()).unwrap();
        let scale = 1.0 + lat.values().iter().map(|z| z.norm()).fold(0.0, f64::max);
        for (a, b) in lat.rhs_sine().iter().zip(&lat.rhs_general()) {
            prop_assert!((a - b).norm() < 1e-13 * scale * (1.0 + state.strength().abs()) * (m_max + k_max) as f64);
        }
    }

    #[test]
    fn particle_lattice_rhs_is_the_time_derivative(state in state_strategy()) {
        // Below the truncation edge, the moment equations are exact for an
        // empirical measure: d/dt Σ w P_m(ω) e^{ikθ} = Σ w P_m(ω) ik θ' e^{ikθ}.
        let (m_max, k_max) = (5usize, 8usize);
        let g = FrequencyLaw::Uniform { lo: -3.0, hi: 3.0 };
        let c = recurrence_coefficients(&g, m_max).unwrap();
        let n = state.len() as f64;
        let pts = state.theta().iter().zip(state.omega()).map(|(&t, &o)| (t, o, 1.0 / n));
        let lat = MomentLattice::from_points(pts, &c, m_max, k_max, state.strength(), state.coupling().clone()).unwrap();
        let rhs = lat.rhs();
        let vel = state.rhs();
        let reach = state.coupling().max_harmonic() as usize;
        let mut poly = vec![0.0; m_max + 1];
        for m in 0..m_max {
            for k in 0..=(k_max - reach) {
                let mut exact = Complex64::new(0.0, 0.0);
                for ((&th, &om), &v) in state.theta().iter().zip(state.omega()).zip(&vel) {
                    c.eval_all(om, &mut poly).unwrap();
                    exact += Complex64::new(0.0, k as f64 * v) * Complex64::from_polar(poly[m] / n, k as f64 * th);
                }
                let got = rhs[m * (k_max + 1) + k];
                prop_assert!((got - exact).norm() < 1e-11 * (1.0 + exact.norm()), "m={m} k={k}: {got} vs {exact}");
            }
        }
    }
}
