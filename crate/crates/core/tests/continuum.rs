use std::f64::consts::{PI, TAU};

use kuramoto_moments::continuum::{integrate_characteristics, spec_density_along_characteristics};
use kuramoto_moments::measures::build_discretization;
use kuramoto_moments::{Complex64, Coupling, FrequencyLaw, MeasureSpec, PhaseLaw};

fn spec() -> MeasureSpec {
    MeasureSpec::new(
        PhaseLaw::WrappedGaussian { center: 1.0, sigma: 0.8 },
        FrequencyLaw::Gaussian { mean: 0.0, sd: 0.5 },
    )
    .unwrap()
}

/// d/dθ of a periodic sample by plain DFT.
fn spectral_derivative(u: &[f64]) -> Vec<f64> {
    let n = u.len();
    let coef: Vec<Complex64> = (0..n)
        .map(|k| {
            u.iter()
                .enumerate()
                .map(|(j, &v)| v * Complex64::from_polar(1.0 / n as f64, -TAU * (k * j) as f64 / n as f64))
                .sum()
        })
        .collect();
    (0..n)
        .map(|j| {
            coef.iter()
                .enumerate()
                .map(|(k, &c)| {
                    let wave = if k < n / 2 { k as f64 } else if k > n / 2 { k as f64 - n as f64 } else { 0.0 };
                    (c * Complex64::new(0.0, wave) * Complex64::from_polar(1.0, TAU * (k * j) as f64 / n as f64)).re
                })
                .sum()
        })
        .collect()
}

#[test]
fn transported_density_times_jacobian_is_the_initial_density() {
    let spec = spec();
    // 64 phase nodes under-resolve the map at t = 2; the density exponent is
    // a trapezoid sum over snapshots, so its error goes like dt².
    let (n_omega, n_theta) = (8, 256);
    let h = build_discretization(&spec, n_omega, n_theta).unwrap();
    let t = 2.0;
    let traj = integrate_characteristics(&h, 1.5, &Coupling::sine(), t, 0.001, 1).unwrap();
    let rho = spec_density_along_characteristics(&traj, &spec, t).unwrap();
    let last = traj.positions.last().unwrap();
    let theta0 = traj.initial.initial_phases();
    let omega = traj.initial.omega();

    let mut worst = 0.0_f64;
    let mut mass = 0.0;
    for i in 0..n_omega {
        let r = i * n_theta..(i + 1) * n_theta;
        let u: Vec<f64> = r.clone().map(|q| last[q] - theta0[q]).collect();
        let jac: Vec<f64> = spectral_derivative(&u).iter().map(|d| 1.0 + d).collect();
        let om = omega[r.start];
        let g = (-0.5 * (om / 0.5).powi(2)).exp() / (0.5 * (TAU).sqrt());
        let gw: f64 = h.nodes()[r.clone()].iter().map(|n| n.weight).sum();
        let mut line = 0.0;
        for (q, &j) in r.zip(&jac) {
            let h0 = spec.density(theta0[q], om).unwrap();
            worst = worst.max((rho[q] * j - h0).abs() / h0.max(1e-3));
            line += rho[q] * j * TAU / n_theta as f64;
        }
        mass += gw * line / g;
    }
    assert!(worst < 1e-6, "rho J vs h: {worst:e}");
    assert!((mass - 1.0).abs() < 1e-6, "mass {mass}");
}

#[test]
fn characteristic_solver_is_fourth_order() {
    let h = build_discretization(&spec(), 6, 32).unwrap();
    let f = Coupling::from_harmonics(0.1, &[(1, Complex64::new(0.2, -0.5)), (2, Complex64::new(0.0, -0.1))]).unwrap();
    let run = |dt: f64| *integrate_characteristics(&h, 2.0, &f, 3.0, dt, usize::MAX).unwrap().order.last().unwrap();
    let (a, b, c) = (run(0.1), run(0.05), run(0.025));
    let ratio = (a - b).norm() / (b - c).norm();
    assert!((ratio.log2() - 4.0).abs() < 0.3, "observed order {}", ratio.log2());
}

#[test]
fn free_rotation_is_exact() {
    // K = 0: Z_01(t) = e^{i c} e^{-σ²/2} e^{-s² t²/2} for N(0, s²) frequencies.
    let h = build_discretization(&spec(), 30, 64).unwrap();
    let traj = integrate_characteristics(&h, 0.0, &Coupling::sine(), 2.0, 0.05, 10).unwrap();
    for (&t, &z) in traj.times.iter().zip(&traj.order) {
        let exact = Complex64::from_polar((-0.32 - 0.125 * t * t).exp(), 1.0);
        assert!((z - exact).norm() < 1e-12, "t={t}: {z} vs {exact}");
    }
    assert!(traj.initial.positions().iter().all(|x| (0.0..=2.0 * PI).contains(x)));
}
