//! The finite-N Kuramoto–Daido model
//!
//! ```text
//! dθ_i/dt = ω_i + (K/N) Σ_j f(θ_j − θ_i)
//! ```
//!
//! with its order parameter and the empirical moments
//! `Ẑ^m_k = (1/N) Σ_j P_m(ω_j) e^{ikθ_j}`.
//!
//! Forces are evaluated through the generalized order parameters
//! `Ẑ^0_l` in `O(N)` per harmonic; the `O(N²)` pairwise sum is kept as
//! [`OscillatorState::rhs_pairwise`] for cross-checking only.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::coupling::Coupling;
use crate::error::{Error, Result};
use crate::meanfield::{self, Weights, Workspace};
use crate::ode::{self, Rk4};
use crate::orthopoly::RecurrenceCoefficients;

/// Phases, natural frequencies and coupling of N oscillators.
#[derive(Debug, Clone)]
pub struct OscillatorState {
    theta: Vec<f64>,
    omega: Vec<f64>,
    strength: f64,
    coupling: Coupling,
}

impl OscillatorState {
    /// Phases are reduced into `[0, 2π)`.
    pub fn new(theta: Vec<f64>, omega: Vec<f64>, strength: f64, coupling: Coupling) -> Result<Self> {
        if theta.is_empty() {
            return Err(Error::InvalidArgument("need at least one oscillator".into()));
        }
        if theta.len() != omega.len() {
            return Err(Error::InvalidArgument(format!(
                "{} phases but {} frequencies",
                theta.len(),
                omega.len()
            )));
        }
        if !(strength.is_finite() && strength >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "coupling strength must be finite and nonnegative, got {strength}"
            )));
        }
        if let Some(i) = theta.iter().chain(&omega).position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                step: 0,
                node: i % theta.len(),
            });
        }
        let theta = theta.into_iter().map(|t| t.rem_euclid(TAU)).collect();
        Ok(Self {
            theta,
            omega,
            strength,
            coupling,
        })
    }

    /// From `(θ, ω)` pairs, e.g. the output of
    /// [`sample_pairs`](crate::measures::sample_pairs).
    pub fn from_pairs(pairs: &[(f64, f64)], strength: f64, coupling: Coupling) -> Result<Self> {
        let (theta, omega) = pairs.iter().copied().unzip();
        Self::new(theta, omega, strength, coupling)
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn strength(&self) -> f64 {
        self.strength
    }

    pub fn coupling(&self) -> &Coupling {
        &self.coupling
    }

    /// `(1/N) Σ_j e^{iθ_j}`; its modulus is `r`, its argument `ψ`.
    pub fn order_parameter(&self) -> Complex64 {
        self.phase_mode(1)
    }

    /// `Ẑ^0_k = (1/N) Σ_j e^{ikθ_j}`.
    pub fn phase_mode(&self, k: i64) -> Complex64 {
        let s: Complex64 = self
            .theta
            .iter()
            .map(|&t| Complex64::from_polar(1.0, k as f64 * t))
            .sum();
        s / self.len() as f64
    }

    /// `dθ_i/dt` through the mean-field form.
    pub fn rhs(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        meanfield::velocity(
            &self.theta,
            &self.omega,
            Weights::Equal,
            self.strength,
            &self.coupling,
            &mut Workspace::default(),
            &mut out,
        );
        out
    }

    /// `dθ_i/dt` by the direct double sum. `O(N²)`; reference only.
    pub fn rhs_pairwise(&self) -> Vec<f64> {
        let n = self.len() as f64;
        self.theta
            .iter()
            .zip(&self.omega)
            .map(|(ti, wi)| {
                let s: f64 = self.theta.iter().map(|tj| self.coupling.eval(tj - ti)).sum();
                wi + self.strength / n * s
            })
            .collect()
    }

    /// `Ẑ^m_k = (1/N) Σ_j P_m(ω_j) e^{ikθ_j}`. Negative `k` gives the conjugate.
    pub fn empirical_moment(&self, coeffs: &RecurrenceCoefficients, m: usize, k: i64) -> Result<Complex64> {
        let mut s = Complex64::new(0.0, 0.0);
        for (&t, &w) in self.theta.iter().zip(&self.omega) {
            s += coeffs.eval(m, w)? * Complex64::from_polar(1.0, k as f64 * t);
        }
        Ok(s / self.len() as f64)
    }

    /// `|dẐ^m_k/dt − R^m_k(Ẑ)|`, where the left side is differentiated
    /// analytically through `θ̇_j` and the right side is the moments-system
    /// vector field evaluated on the empirical moments.
    ///
    /// For `f = sin` the right side is
    /// `ik(b_m Ẑ^{m+1}_k + a_m Ẑ^m_k + b_{m−1} Ẑ^{m−1}_k) + (kK/2)(Ẑ^0_1 Ẑ^m_{k−1} − Ẑ^0_{−1} Ẑ^m_{k+1})`;
    /// a general coupling replaces the last term with `ikK Σ_l f_l Ẑ^0_l Ẑ^m_{k−l}`.
    pub fn moment_identity_residual(&self, coeffs: &RecurrenceCoefficients, m: usize, k: i64) -> Result<f64> {
        if m + 1 > coeffs.m_max() {
            return Err(Error::IndexOutOfRange {
                what: "moment index m + 1",
                index: m as i64 + 1,
                limit: coeffs.m_max() as i64,
            });
        }
        let velocity = self.rhs();
        let ik = Complex64::new(0.0, k as f64);
        let mut analytic = Complex64::new(0.0, 0.0);
        for ((&t, &w), &v) in self.theta.iter().zip(&self.omega).zip(&velocity) {
            analytic += coeffs.eval(m, w)? * ik * v * Complex64::from_polar(1.0, k as f64 * t);
        }
        analytic /= self.len() as f64;

        let z = |mm: usize, kk: i64| self.empirical_moment(coeffs, mm, kk);
        let a = coeffs.a()[m];
        let b = coeffs.b()[m];
        let b_prev = if m == 0 { 0.0 } else { coeffs.b()[m - 1] };
        let lower = if m == 0 { Complex64::new(0.0, 0.0) } else { z(m - 1, k)? };
        let mut field = ik * (b * z(m + 1, k)? + a * z(m, k)? + b_prev * lower);

        let kk = self.strength;
        if self.coupling.is_sine() {
            let z01 = z(0, 1)?;
            field += 0.5 * k as f64 * kk * (z01 * z(m, k - 1)? - z01.conj() * z(m, k + 1)?);
        } else {
            let mut sum = self.coupling.constant() * z(m, k)?;
            for &(l, c) in self.coupling.harmonics() {
                let l = i64::from(l);
                let z0l = z(0, l)?;
                sum += c * z0l * z(m, k - l)? + c.conj() * z0l.conj() * z(m, k + l)?;
            }
            field += ik * kk * sum;
        }
        Ok((analytic - field).norm())
    }

    /// Advances the state by `duration` with RK4 steps of at most `dt`,
    /// reducing phases mod 2π after every step.
    pub fn advance(&mut self, duration: f64, dt: f64) -> Result<()> {
        let mut stepper = Stepper::new(self.len());
        stepper.advance(self, duration, dt, 0)
    }
}

/// RK4 driver with buffers reused across calls.
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

    fn advance(&mut self, state: &mut OscillatorState, duration: f64, dt: f64, first_step: usize) -> Result<()> {
        check_step(duration, dt)?;
        let (steps, h) = ode::step_plan(duration, dt);
        for s in 0..steps {
            self.step(state, h, first_step + s)?;
        }
        Ok(())
    }

    fn step(&mut self, state: &mut OscillatorState, h: f64, step_index: usize) -> Result<()> {
        let OscillatorState {
            theta,
            omega,
            strength,
            coupling,
        } = state;
        let ws = &mut self.ws;
        self.rk.step(0.0, h, theta, |_, y, dy| {
            meanfield::velocity(y, omega, Weights::Equal, *strength, coupling, ws, dy)
        });
        for (i, t) in theta.iter_mut().enumerate() {
            if !t.is_finite() {
                return Err(Error::NonFinite {
                    step: step_index + 1,
                    node: i,
                });
            }
            *t = t.rem_euclid(TAU);
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

/// Default step `10⁻³ · 2π / max(1, max|ω|, K)`.
pub fn default_dt(omega: &[f64], strength: f64) -> f64 {
    let w = omega.iter().fold(0.0_f64, |s, w| s.max(w.abs()));
    1e-3 * TAU / w.max(strength).max(1.0)
}

/// Snapshots of a finite-N run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub snapshots: Vec<Vec<f64>>,
    pub order: Vec<Complex64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Integrates to `t_end`, recording every `stride`-th step (plus the initial
/// and final states).
pub fn integrate(state: &OscillatorState, t_end: f64, dt: f64, stride: usize) -> Result<Trajectory> {
    check_step(t_end, dt)?;
    let stride = stride.max(1);
    let mut state = state.clone();
    let (steps, h) = ode::step_plan(t_end, dt);
    let mut traj = Trajectory {
        times: vec![0.0],
        snapshots: vec![state.theta.clone()],
        order: vec![state.order_parameter()],
    };
    let mut stepper = Stepper::new(state.len());
    for s in 0..steps {
        stepper.step(&mut state, h, s)?;
        if (s + 1) % stride == 0 || s + 1 == steps {
            traj.times.push((s + 1) as f64 * h);
            traj.snapshots.push(state.theta.clone());
            traj.order.push(state.order_parameter());
        }
    }
    Ok(traj)
}

/// Advances `state` through increasing observation times and calls
/// `observe(t, state)` at each. Cheaper than [`integrate`] when only a few
/// times matter.
pub fn observe_at(
    state: &mut OscillatorState,
    times: &[f64],
    dt: f64,
    mut observe: impl FnMut(f64, &OscillatorState) -> Result<()>,
) -> Result<()> {
    let mut stepper = Stepper::new(state.len());
    let mut now = 0.0;
    let mut steps_done = 0;
    for &t in times {
        if t < now {
            return Err(Error::InvalidArgument("observation times must be nondecreasing".into()));
        }
        check_step(t - now, dt)?;
        let (steps, _) = ode::step_plan(t - now, dt);
        stepper.advance(state, t - now, dt, steps_done)?;
        steps_done += steps;
        now = t;
        observe(t, state)?;
    }
    Ok(())
}
