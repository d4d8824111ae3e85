//! The continuum model solved along characteristics.
//!
//! A probability measure `ρ_t` on `S¹ × ℝ` is transported by the velocity
//! field `v(θ, ω) = ω + K ∫∫ f(θ' − θ) dρ_t`. Starting from a discretized
//! initial measure `h ≈ Σ_q w_q δ(θ_q, ω_q)`, the pushforward
//! `ρ_t = Σ_q w_q δ(x_q(t), ω_q)` is exact for the discrete measure, so the
//! solver only has to integrate the characteristic positions
//!
//! ```text
//! dx_q/dt = ω_q + K Σ_l f_l Z_l(t) e^{−il x_q},    Z_l(t) = Σ_q w_q e^{il x_q(t)}
//! ```
//!
//! simultaneously. Positions are kept as unreduced lifts so that differences
//! between two solves, and the Picard iterates, stay continuous in time.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::coupling::Coupling;
use crate::error::{Error, Result};
use crate::meanfield::{self, Weights, Workspace};
use crate::measures::{DiscretizedMeasure, MeasureSpec};
use crate::ode::{self, Rk4};
use crate::orthopoly::RecurrenceCoefficients;

/// Characteristic positions `x_q(t) = x(t, 0; θ_q, ω_q)` of a discretized
/// initial measure.
#[derive(Debug, Clone)]
pub struct CharacteristicEnsemble {
    theta0: Vec<f64>,
    omega: Vec<f64>,
    weights: Vec<f64>,
    x: Vec<f64>,
    t: f64,
    strength: f64,
    coupling: Coupling,
}

impl CharacteristicEnsemble {
    /// The ensemble at `t = 0`, where `x_q = θ_q`.
    pub fn new(h: &DiscretizedMeasure, strength: f64, coupling: Coupling) -> Result<Self> {
        if !(strength.is_finite() && strength >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "coupling strength must be finite and nonnegative, got {strength}"
            )));
        }
        let theta0: Vec<f64> = h.nodes().iter().map(|n| n.theta).collect();
        Ok(Self {
            x: theta0.clone(),
            theta0,
            omega: h.nodes().iter().map(|n| n.omega).collect(),
            weights: h.nodes().iter().map(|n| n.weight).collect(),
            t: 0.0,
            strength,
            coupling,
        })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    /// Current positions (unreduced).
    pub fn positions(&self) -> &[f64] {
        &self.x
    }

    pub fn initial_phases(&self) -> &[f64] {
        &self.theta0
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn strength(&self) -> f64 {
        self.strength
    }

    pub fn coupling(&self) -> &Coupling {
        &self.coupling
    }

    /// `Z^0_1(t) = Σ_q w_q e^{i x_q}`.
    pub fn order_parameter(&self) -> Complex64 {
        self.phase_mode(1)
    }

    /// `Z^0_k(t) = Σ_q w_q e^{ik x_q}`.
    pub fn phase_mode(&self, k: i64) -> Complex64 {
        self.x
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * Complex64::from_polar(1.0, k as f64 * x))
            .sum()
    }

    /// `Z^m_k(t) = Σ_q w_q P_m(ω_q) e^{ik x_q}`.
    pub fn continuum_moment(&self, coeffs: &RecurrenceCoefficients, m: usize, k: i64) -> Result<Complex64> {
        let mut s = Complex64::new(0.0, 0.0);
        for ((&x, &w), &om) in self.x.iter().zip(&self.weights).zip(&self.omega) {
            s += w * coeffs.eval(m, om)? * Complex64::from_polar(1.0, k as f64 * x);
        }
        Ok(s)
    }

    /// `Σ_q w_q a(x_q mod 2π, ω_q)`.
    pub fn integrate(&self, a: impl Fn(f64, f64) -> f64) -> f64 {
        self.x
            .iter()
            .zip(&self.weights)
            .zip(&self.omega)
            .map(|((&x, &w), &om)| w * a(x.rem_euclid(TAU), om))
            .sum()
    }

    /// Advances every characteristic by `duration` with RK4 steps of at most `dt`.
    pub fn advance(&mut self, duration: f64, dt: f64) -> Result<()> {
        check_step(duration, dt)?;
        let (steps, h) = ode::step_plan(duration, dt);
        let mut stepper = Stepper::new(self.len());
        for s in 0..steps {
            stepper.step(self, h, s)?;
        }
        Ok(())
    }

    fn velocity(&self, x: &[f64], ws: &mut Workspace, out: &mut [f64]) {
        meanfield::velocity(
            x,
            &self.omega,
            Weights::Given(&self.weights),
            self.strength,
            &self.coupling,
            ws,
            out,
        );
    }
}

struct Stepper {
    rk: Rk4,
    ws: Workspace,
}

impl Stepper {
    fn new(n: usize) -> Self {
        Self {
            rk: Rk4::new(n),
            ws: Workspace::default(),
        }
    }

    fn step(&mut self, ens: &mut CharacteristicEnsemble, h: f64, step_index: usize) -> Result<()> {
        let mut x = std::mem::take(&mut ens.x);
        let ws = &mut self.ws;
        self.rk.step(ens.t, h, &mut x, |_, y, dy| ens.velocity(y, ws, dy));
        ens.x = x;
        ens.t += h;
        if let Some(node) = ens.x.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                step: step_index + 1,
                node,
            });
        }
        Ok(())
    }
}

fn check_step(duration: f64, dt: f64) -> Result<()> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    if !(duration.is_finite() && duration >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "integration horizon must be finite and nonnegative, got {duration}"
        )));
    }
    Ok(())
}

/// Stored snapshots of a characteristic solve.
#[derive(Debug, Clone)]
pub struct CharacteristicTrajectory {
    /// The ensemble at `t = 0`; carries weights, frequencies and coupling.
    pub initial: CharacteristicEnsemble,
    pub times: Vec<f64>,
    /// Positions at each stored time (unreduced).
    pub positions: Vec<Vec<f64>>,
    pub order: Vec<Complex64>,
}

impl CharacteristicTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// The ensemble at stored time index `i`.
    pub fn ensemble_at(&self, i: usize) -> CharacteristicEnsemble {
        let mut e = self.initial.clone();
        e.x.clone_from(&self.positions[i]);
        e.t = self.times[i];
        e
    }

    pub fn last(&self) -> CharacteristicEnsemble {
        self.ensemble_at(self.len() - 1)
    }
}

/// Integrates all characteristics of `h` to `t_end`, storing every
/// `stride`-th step plus the endpoints.
pub fn integrate_characteristics(
    h: &DiscretizedMeasure,
    strength: f64,
    coupling: &Coupling,
    t_end: f64,
    dt: f64,
    stride: usize,
) -> Result<CharacteristicTrajectory> {
    check_step(t_end, dt)?;
    let stride = stride.max(1);
    let initial = CharacteristicEnsemble::new(h, strength, coupling.clone())?;
    let mut ens = initial.clone();
    let (steps, step) = ode::step_plan(t_end, dt);
    let mut traj = CharacteristicTrajectory {
        times: vec![0.0],
        positions: vec![ens.x.clone()],
        order: vec![ens.order_parameter()],
        initial,
    };
    let mut stepper = Stepper::new(ens.len());
    for s in 0..steps {
        stepper.step(&mut ens, step, s)?;
        if (s + 1) % stride == 0 || s + 1 == steps {
            // Avoid accumulated `t += h` drift in the recorded time.
            traj.times.push((s + 1) as f64 * step);
            traj.positions.push(ens.x.clone());
            traj.order.push(ens.order_parameter());
        }
    }
    Ok(traj)
}

/// Result of [`picard_iterate`].
#[derive(Debug, Clone)]
pub struct PicardRun {
    pub t_grid: Vec<f64>,
    /// `d_n = sup_{t, q} |x_n − x_{n−1}|` for `n = 1..=n_iters`.
    pub diffs: Vec<f64>,
    /// `x_n(t_end)` for `n = 0..=n_iters`.
    pub endpoints: Vec<Vec<f64>>,
    /// The last iterate on the whole grid, `final_iterate[i][q] = x_n(t_i)`.
    pub final_iterate: Vec<Vec<f64>>,
}

impl PicardRun {
    /// `2^{n−1} L^{n−1} K^n M t^n / n!`, the a-priori bound on `d_n`.
    pub fn factorial_bound(n: usize, strength: f64, coupling: &Coupling, t: f64) -> f64 {
        let (lip, sup) = (coupling.lipschitz_bound(), coupling.sup_bound());
        let mut v = sup;
        for j in 1..=n {
            v *= strength * t / j as f64;
            if j > 1 {
                v *= 2.0 * lip;
            }
        }
        v
    }
}

/// Picard iteration `x_{n+1}(t) = θ + ωt + K ∫_0^t Σ_j w_j f(x_n,j − x_n,q) dτ`
/// on the grid `t_grid` (which must start at 0), integrating in `τ` with the
/// cumulative trapezoid rule.
///
/// Successive differences `δ_n = x_n − x_{n−1}` are propagated directly:
/// the force increment is assembled from `e^{ilδ} − 1 = 2i sin(lδ/2) e^{ilδ/2}`,
/// which keeps `d_n` accurate to full relative precision long after it has
/// dropped below the rounding level of `x_n` itself.
pub fn picard_iterate(
    h: &DiscretizedMeasure,
    strength: f64,
    coupling: &Coupling,
    t_grid: &[f64],
    n_iters: usize,
) -> Result<PicardRun> {
    if n_iters == 0 {
        return Err(Error::InvalidArgument("Picard iteration needs n_iters >= 1".into()));
    }
    if t_grid.len() < 2 || t_grid[0] != 0.0 || t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument(
            "Picard grid must start at 0 and increase strictly".into(),
        ));
    }
    let ens = CharacteristicEnsemble::new(h, strength, coupling.clone())?;
    let n = ens.len();
    let weights = &ens.weights;

    // x_0 = θ + ωt
    let mut x: Vec<Vec<f64>> = t_grid
        .iter()
        .map(|&t| ens.theta0.iter().zip(&ens.omega).map(|(th, om)| th + om * t).collect())
        .collect();
    let mut endpoints = vec![x[t_grid.len() - 1].clone()];
    let mut diffs = Vec::with_capacity(n_iters);
    let mut ws = Workspace::default();

    // Force increment F(x_n) − F(x_{n−1}) at every grid time; for n = 0 it is F(x_0).
    let mut increment = vec![vec![0.0; n]; t_grid.len()];
    for (xt, inc) in x.iter().zip(increment.iter_mut()) {
        meanfield::velocity(xt, &vec![0.0; n], Weights::Given(weights), 1.0, coupling, &mut ws, inc);
    }
    let mut delta = vec![vec![0.0; n]; t_grid.len()];
    for iter in 0..n_iters {
        // δ_{n+1}(t) = K ∫_0^t [F(x_n) − F(x_{n−1})] dτ
        let mut sup = 0.0_f64;
        delta[0].iter_mut().for_each(|d| *d = 0.0);
        for i in 1..t_grid.len() {
            let half = 0.5 * (t_grid[i] - t_grid[i - 1]) * strength;
            let (before, after) = delta.split_at_mut(i);
            for q in 0..n {
                let d = before[i - 1][q] + half * (increment[i - 1][q] + increment[i][q]);
                after[0][q] = d;
                sup = sup.max(d.abs());
            }
        }
        diffs.push(sup);
        if iter + 1 < n_iters {
            for i in 0..t_grid.len() {
                force_increment(&x[i], &delta[i], weights, coupling, &mut increment[i]);
            }
        }
        for (xt, dt) in x.iter_mut().zip(&delta) {
            xt.iter_mut().zip(dt).for_each(|(a, d)| *a += d);
        }
        endpoints.push(x[t_grid.len() - 1].clone());
    }
    Ok(PicardRun {
        t_grid: t_grid.to_vec(),
        diffs,
        endpoints,
        final_iterate: x,
    })
}

/// `Σ_j w_j [f(y_j − y_q) − f(x_j − x_q)]` for `y = x + δ`, evaluated without
/// cancellation.
///
/// With `u = e^{ix}` and `E_l(δ) = e^{ilδ} − 1`, the harmonic-`l` part of
/// `Σ_j w_j e^{il(y_j − y_q)} − Σ_j w_j e^{il(x_j − x_q)}` is
/// `ū_q^l [D_l e^{−ilδ_q} + Z_l E_{−l}(δ_q)]` with `Z_l = Σ_j w_j u_j^l` and
/// `D_l = Σ_j w_j u_j^l E_l(δ_j)`.
fn force_increment(x: &[f64], delta: &[f64], weights: &[f64], coupling: &Coupling, out: &mut [f64]) {
    let e = |l: f64, d: f64| {
        let half = 0.5 * l * d;
        Complex64::new(0.0, 2.0 * half.sin()) * Complex64::from_polar(1.0, half)
    };
    out.iter_mut().for_each(|o| *o = 0.0);
    for &(l, c) in coupling.harmonics() {
        let lf = f64::from(l);
        let mut z = Complex64::new(0.0, 0.0);
        let mut dsum = Complex64::new(0.0, 0.0);
        for ((&xj, &dj), &wj) in x.iter().zip(delta).zip(weights) {
            let u = Complex64::from_polar(1.0, lf * xj);
            z += wj * u;
            dsum += wj * u * e(lf, dj);
        }
        for ((o, &xq), &dq) in out.iter_mut().zip(x).zip(delta) {
            let back = Complex64::from_polar(1.0, -lf * xq);
            let change = back * (dsum * Complex64::from_polar(1.0, -lf * dq) + z * e(-lf, dq));
            *o += 2.0 * (c * change).re;
        }
    }
}

/// `ρ_t` at the characteristic positions `x_q(t)`:
///
/// ```text
/// ρ_t(x_q(t), ω_q) = h(θ_q, ω_q) · exp[K ∫_0^t Σ_j w_j f'(x_j(s) − x_q(s)) ds]
/// ```
///
/// The exponent is minus the time-integrated divergence of the velocity
/// field along the characteristic, integrated with the trapezoid rule over
/// the stored snapshots up to time `t` (which must be a stored time).
pub fn density_along_characteristics(
    traj: &CharacteristicTrajectory,
    density: impl Fn(f64, f64) -> Result<f64>,
    t: f64,
) -> Result<Vec<f64>> {
    let end = traj
        .times
        .iter()
        .position(|&s| (s - t).abs() <= 1e-9 * t.abs().max(1.0))
        .ok_or_else(|| Error::InvalidArgument(format!("t = {t} is not a stored trajectory time")))?;
    let ens = &traj.initial;
    let n = ens.len();
    let mut ws = Workspace::default();
    let mut exponent = vec![0.0; n];
    let mut prev = vec![0.0; n];
    let mut cur = vec![0.0; n];
    meanfield::interaction_derivative(&traj.positions[0], Weights::Given(&ens.weights), &ens.coupling, &mut ws, &mut prev);
    for i in 1..=end {
        meanfield::interaction_derivative(&traj.positions[i], Weights::Given(&ens.weights), &ens.coupling, &mut ws, &mut cur);
        let half = 0.5 * (traj.times[i] - traj.times[i - 1]) * ens.strength;
        for q in 0..n {
            exponent[q] += half * (prev[q] + cur[q]);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    ens.theta0
        .iter()
        .zip(&ens.omega)
        .zip(&exponent)
        .map(|((&th, &om), &e)| Ok(density(th, om)? * e.exp()))
        .collect()
}

/// [`density_along_characteristics`] with the density of a [`MeasureSpec`].
pub fn spec_density_along_characteristics(
    traj: &CharacteristicTrajectory,
    spec: &MeasureSpec,
    t: f64,
) -> Result<Vec<f64>> {
    if !spec.has_density() {
        return Err(Error::Unsupported(
            "density reconstruction needs an initial measure with a density".into(),
        ));
    }
    density_along_characteristics(traj, |th, om| spec.density(th, om), t)
}

/// Outcome of [`initial_continuity_probe`].
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuityProbe {
    /// Total-variation distance `Σ_q |w_{1,q} − w_{2,q}|` of the paired weights.
    pub delta: f64,
    /// `max_{t ≤ T} |∫ a dρ_{t,1} − ∫ a dρ_{t,2}|`.
    pub max_diff: f64,
    /// `max_{t ≤ T, q} |x_{1,q}(t) − x_{2,q}(t)|`.
    pub max_position_diff: f64,
    /// `(Mδ / 2L)(e^{2KLT} − 1)`.
    pub growth_bound: f64,
}

/// Runs two paired discretizations side by side up to `t_end` and compares
/// the observable `a(θ, ω)` and the characteristic positions.
pub fn initial_continuity_probe(
    h1: &DiscretizedMeasure,
    h2: &DiscretizedMeasure,
    a: impl Fn(f64, f64) -> f64,
    strength: f64,
    coupling: &Coupling,
    t_end: f64,
    dt: f64,
) -> Result<ContinuityProbe> {
    if h1.len() != h2.len() {
        return Err(Error::InvalidArgument(format!(
            "paired discretizations need equal node counts, got {} and {}",
            h1.len(),
            h2.len()
        )));
    }
    check_step(t_end, dt)?;
    let delta: f64 = h1
        .nodes()
        .iter()
        .zip(h2.nodes())
        .map(|(p, q)| (p.weight - q.weight).abs())
        .sum();
    let mut e1 = CharacteristicEnsemble::new(h1, strength, coupling.clone())?;
    let mut e2 = CharacteristicEnsemble::new(h2, strength, coupling.clone())?;
    let (mut s1, mut s2) = (Stepper::new(e1.len()), Stepper::new(e2.len()));
    let compare = |e1: &CharacteristicEnsemble, e2: &CharacteristicEnsemble| {
        let obs = (e1.integrate(&a) - e2.integrate(&a)).abs();
        let pos = e1.x.iter().zip(&e2.x).fold(0.0_f64, |m, (p, q)| m.max((p - q).abs()));
        (obs, pos)
    };
    let (mut max_diff, mut max_position_diff) = compare(&e1, &e2);
    let (steps, h) = ode::step_plan(t_end, dt);
    for s in 0..steps {
        s1.step(&mut e1, h, s)?;
        s2.step(&mut e2, h, s)?;
        let (obs, pos) = compare(&e1, &e2);
        max_diff = max_diff.max(obs);
        max_position_diff = max_position_diff.max(pos);
    }
    let (lip, sup) = (coupling.lipschitz_bound(), coupling.sup_bound());
    let growth_bound = if lip > 0.0 {
        sup * delta / (2.0 * lip) * (2.0 * strength * lip * t_end).exp_m1()
    } else {
        0.0
    };
    Ok(ContinuityProbe {
        delta,
        max_diff,
        max_position_diff,
        growth_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{build_discretization, FrequencyLaw, Node, PhaseLaw};
    use crate::orthopoly::recurrence_coefficients;

    fn spec() -> MeasureSpec {
        MeasureSpec::new(
            PhaseLaw::WrappedGaussian { center: 0.5, sigma: 0.8 },
            FrequencyLaw::Gaussian { mean: 0.0, sd: 1.0 },
        )
        .unwrap()
    }

    #[test]
    fn free_flow_is_linear() {
        let h = build_discretization(&spec(), 6, 8).unwrap();
        let traj = integrate_characteristics(&h, 0.0, &Coupling::sine(), 1.5, 0.01, 30).unwrap();
        let last = traj.positions.last().unwrap();
        for (node, x) in h.nodes().iter().zip(last) {
            assert!((x - (node.theta + 1.5 * node.omega)).abs() < 1e-12);
        }
    }

    #[test]
    fn single_atom_rotates_freely() {
        let h = DiscretizedMeasure::from_nodes(vec![Node {
            theta: 0.3,
            omega: 1.7,
            weight: 1.0,
        }])
        .unwrap();
        let mut e = CharacteristicEnsemble::new(&h, 2.0, Coupling::sine()).unwrap();
        e.advance(2.0, 0.01).unwrap();
        assert!((e.positions()[0] - (0.3 + 3.4)).abs() < 1e-12);
    }

    #[test]
    fn k0_moments_are_constant() {
        let h = build_discretization(&spec(), 10, 32).unwrap();
        let c = recurrence_coefficients(&FrequencyLaw::Gaussian { mean: 0.0, sd: 1.0 }, 9).unwrap();
        let mut e = CharacteristicEnsemble::new(&h, 1.0, Coupling::sine()).unwrap();
        e.advance(1.0, 0.01).unwrap();
        assert!((e.continuum_moment(&c, 0, 0).unwrap() - 1.0).norm() < 1e-12);
        for m in 1..=5 {
            assert!(e.continuum_moment(&c, m, 0).unwrap().norm() < 1e-12);
        }
    }

    #[test]
    fn picard_starts_from_free_rotation() {
        let h = build_discretization(&spec(), 4, 8).unwrap();
        let grid: Vec<f64> = (0..=100).map(|i| i as f64 * 0.01).collect();
        let run = picard_iterate(&h, 1.0, &Coupling::sine(), &grid, 3).unwrap();
        for (node, x) in h.nodes().iter().zip(&run.endpoints[0]) {
            assert!((x - (node.theta + node.omega)).abs() < 1e-15);
        }
        assert_eq!(run.diffs.len(), 3);
        assert_eq!(run.endpoints.len(), 4);
    }

    #[test]
    fn picard_bound_formula() {
        let f = Coupling::sine();
        assert!((PicardRun::factorial_bound(1, 1.0, &f, 1.0) - 1.0).abs() < 1e-15);
        assert!((PicardRun::factorial_bound(3, 1.0, &f, 1.0) - 4.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn density_without_coupling_is_transported() {
        let s = spec();
        let h = build_discretization(&s, 4, 16).unwrap();
        let traj = integrate_characteristics(&h, 0.0, &Coupling::sine(), 1.0, 0.01, 1).unwrap();
        let rho = spec_density_along_characteristics(&traj, &s, 1.0).unwrap();
        for (node, r) in h.nodes().iter().zip(&rho) {
            assert!((r - s.density(node.theta, node.omega).unwrap()).abs() < 1e-15);
        }
    }

    #[test]
    fn density_needs_a_density() {
        let s = MeasureSpec::new(PhaseLaw::PointMass { theta: 0.0 }, FrequencyLaw::Gaussian { mean: 0.0, sd: 1.0 })
            .unwrap();
        let h = build_discretization(&s, 4, 16).unwrap();
        let traj = integrate_characteristics(&h, 1.0, &Coupling::sine(), 0.1, 0.01, 1).unwrap();
        assert!(matches!(
            spec_density_along_characteristics(&traj, &s, 0.1),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn probe_of_identical_measures_is_zero() {
        let h = build_discretization(&spec(), 4, 16).unwrap();
        let p = initial_continuity_probe(&h, &h, |t, _| t.cos(), 1.0, &Coupling::sine(), 1.0, 0.01).unwrap();
        assert!(p.max_diff < 1e-12);
        assert_eq!(p.delta, 0.0);
        let other = build_discretization(&spec(), 4, 8).unwrap();
        assert!(initial_continuity_probe(&h, &other, |t, _| t.cos(), 1.0, &Coupling::sine(), 1.0, 0.01).is_err());
    }
}
