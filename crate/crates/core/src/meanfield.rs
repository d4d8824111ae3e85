//! Mean-field velocity shared by the finite-N model and the characteristic
//! solver.
//!
//! With generalized order parameters `Z_l = Σ_j w_j e^{ilθ_j}` the pairwise
//! interaction collapses to
//!
//! ```text
//! Σ_j w_j f(θ_j − θ_i) = f_0 + 2 Re Σ_{l>0} f_l Z_l e^{−ilθ_i}
//! ```
//!
//! which costs `O(N · L)` for `L` harmonics instead of `O(N²)`.

use num_complex::Complex64;

use crate::coupling::Coupling;

/// Weights of the empirical measure the force is taken against.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Weights<'a> {
    /// `1/N` each; summed first and divided once.
    Equal,
    Given(&'a [f64]),
}

/// Reusable buffers for [`velocity`].
#[derive(Debug, Clone, Default)]
pub(crate) struct Workspace {
    unit: Vec<Complex64>,
    modes: Vec<Complex64>,
}

fn fill_unit(theta: &[f64], ws: &mut Workspace) {
    ws.unit.clear();
    ws.unit.extend(theta.iter().map(|&t| {
        let (s, c) = t.sin_cos();
        Complex64::new(c, s)
    }));
}

fn accumulate_modes(weights: Weights<'_>, l_max: usize, ws: &mut Workspace) {
    ws.modes.clear();
    ws.modes.resize(l_max, Complex64::new(0.0, 0.0));
    if l_max == 0 {
        return;
    }
    match weights {
        Weights::Equal => {
            for u in &ws.unit {
                let mut p = *u;
                for m in ws.modes.iter_mut() {
                    *m += p;
                    p *= u;
                }
            }
            let inv = 1.0 / ws.unit.len() as f64;
            ws.modes.iter_mut().for_each(|m| *m *= inv);
        }
        Weights::Given(w) => {
            for (u, &wj) in ws.unit.iter().zip(w) {
                let mut p = *u;
                for m in ws.modes.iter_mut() {
                    *m += wj * p;
                    p *= u;
                }
            }
        }
    }
}

/// Writes `ω_i + K Σ_j w_j f(θ_j − θ_i)` into `out`.
pub(crate) fn velocity(
    theta: &[f64],
    omega: &[f64],
    weights: Weights<'_>,
    strength: f64,
    coupling: &Coupling,
    ws: &mut Workspace,
    out: &mut [f64],
) {
    let l_max = coupling.max_harmonic() as usize;
    if strength == 0.0 || l_max == 0 {
        let shift = strength * coupling.constant();
        for (o, w) in out.iter_mut().zip(omega) {
            *o = w + shift;
        }
        return;
    }
    fill_unit(theta, ws);
    accumulate_modes(weights, l_max, ws);

    if coupling.is_sine() {
        // 2 Re[(1/2i) Z e^{-iθ}] = Im(Z e^{-iθ}) = Z_im cos θ − Z_re sin θ
        let z = ws.modes[0];
        for ((o, u), w) in out.iter_mut().zip(&ws.unit).zip(omega) {
            *o = w + strength * (z.im * u.re - z.re * u.im);
        }
        return;
    }

    // Coefficients times modes, indexed by l - 1 (zero where f_l = 0).
    let mut fz = vec![Complex64::new(0.0, 0.0); l_max];
    for &(l, c) in coupling.harmonics() {
        fz[l as usize - 1] = c * ws.modes[l as usize - 1];
    }
    let f0 = coupling.constant();
    for ((o, u), w) in out.iter_mut().zip(&ws.unit).zip(omega) {
        let back = u.conj();
        let mut p = back;
        let mut acc = 0.0;
        for c in &fz {
            acc += (c * p).re;
            p *= back;
        }
        *o = w + strength * (f0 + 2.0 * acc);
    }
}

/// `Σ_j w_j f'(θ_j − θ_i)` for every `i`: minus the divergence of the
/// interaction part of the velocity field (per unit coupling strength).
pub(crate) fn interaction_derivative(
    theta: &[f64],
    weights: Weights<'_>,
    coupling: &Coupling,
    ws: &mut Workspace,
    out: &mut [f64],
) {
    let l_max = coupling.max_harmonic() as usize;
    if l_max == 0 {
        out.iter_mut().for_each(|o| *o = 0.0);
        return;
    }
    fill_unit(theta, ws);
    accumulate_modes(weights, l_max, ws);
    // f'(θ) has coefficients i l f_l.
    let mut fz = vec![Complex64::new(0.0, 0.0); l_max];
    for &(l, c) in coupling.harmonics() {
        fz[l as usize - 1] = Complex64::new(0.0, f64::from(l)) * c * ws.modes[l as usize - 1];
    }
    for (o, u) in out.iter_mut().zip(&ws.unit) {
        let back = u.conj();
        let mut p = back;
        let mut acc = 0.0;
        for c in &fz {
            acc += (c * p).re;
            p *= back;
        }
        *o = 2.0 * acc;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairwise(theta: &[f64], omega: &[f64], k: f64, f: &Coupling) -> Vec<f64> {
        let n = theta.len() as f64;
        theta
            .iter()
            .zip(omega)
            .map(|(ti, wi)| wi + k / n * theta.iter().map(|tj| f.eval(tj - ti)).sum::<f64>())
            .collect()
    }

    #[test]
    fn general_path_matches_pairwise_and_sine_path() {
        let theta: Vec<f64> = (0..37).map(|i| (i as f64 * 1.7).rem_euclid(6.2)).collect();
        let omega: Vec<f64> = (0..37).map(|i| (i as f64 * 0.3).sin()).collect();
        let daido = Coupling::from_harmonics(
            0.1,
            &[(1, Complex64::new(0.2, -0.5)), (3, Complex64::new(0.0, 0.15))],
        )
        .unwrap();
        let mut ws = Workspace::default();
        for f in [Coupling::sine(), daido] {
            let mut out = vec![0.0; 37];
            velocity(&theta, &omega, Weights::Equal, 1.3, &f, &mut ws, &mut out);
            let reference = pairwise(&theta, &omega, 1.3, &f);
            for (a, b) in out.iter().zip(&reference) {
                assert!((a - b).abs() < 1e-13);
            }
        }
    }
}
