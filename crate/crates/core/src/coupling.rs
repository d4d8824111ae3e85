//! Coupling functions as finite Fourier series.
//!
//! A real `2π`-periodic coupling `f(θ) = Σ_l f_l e^{ilθ}` with
//! `f_{-l} = conj(f_l)` is stored as its constant term and the coefficients
//! for `l > 0`. `f = sin` is `f_1 = 1/(2i)`, `f_{-1} = -1/(2i)`.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance for the conjugate-symmetry check `f_{-l} = conj(f_l)`.
const SYMMETRY_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    constant: f64,
    /// `(l, f_l)` for `l ≥ 1`, sorted by `l`, no duplicates.
    harmonics: Vec<(u32, Complex64)>,
}

impl Default for Coupling {
    fn default() -> Self {
        Self::sine()
    }
}

impl Coupling {
    /// `f(θ) = sin θ`, the Kuramoto coupling.
    pub fn sine() -> Self {
        Self {
            constant: 0.0,
            harmonics: vec![(1, Complex64::new(0.0, -0.5))],
        }
    }

    /// From the constant term and the coefficients `f_l`, `l ≥ 1`.
    pub fn from_harmonics(constant: f64, harmonics: &[(u32, Complex64)]) -> Result<Self> {
        if !constant.is_finite() {
            return Err(Error::InvalidArgument("coupling constant term must be finite".into()));
        }
        let mut h: Vec<(u32, Complex64)> = Vec::with_capacity(harmonics.len());
        for &(l, c) in harmonics {
            if l == 0 {
                return Err(Error::InvalidArgument(
                    "harmonic index 0 is the constant term, pass it separately".into(),
                ));
            }
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::InvalidArgument(format!("coupling coefficient f_{l} is not finite")));
            }
            if h.iter().any(|e| e.0 == l) {
                return Err(Error::InvalidArgument(format!("harmonic {l} given twice")));
            }
            h.push((l, c));
        }
        h.sort_by_key(|e| e.0);
        h.retain(|e| e.1 != Complex64::new(0.0, 0.0));
        Ok(Self {
            constant,
            harmonics: h,
        })
    }

    /// From a full two-sided coefficient list `(l, f_l)`, checking that the
    /// function is real (`f_0` real, `f_{-l} = conj(f_l)`).
    pub fn from_fourier(terms: &[(i32, Complex64)]) -> Result<Self> {
        let coef = |l: i32| {
            terms
                .iter()
                .filter(|t| t.0 == l)
                .map(|t| t.1)
                .sum::<Complex64>()
        };
        let c0 = coef(0);
        if c0.im.abs() > SYMMETRY_TOL {
            return Err(Error::InvalidArgument("f_0 must be real".into()));
        }
        let mut positive: Vec<u32> = terms.iter().map(|t| t.0.unsigned_abs()).filter(|&l| l > 0).collect();
        positive.sort_unstable();
        positive.dedup();
        let mut harmonics = Vec::with_capacity(positive.len());
        for l in positive {
            let (plus, minus) = (coef(l as i32), coef(-(l as i32)));
            if (plus - minus.conj()).norm() > SYMMETRY_TOL {
                return Err(Error::InvalidArgument(format!(
                    "f_{{-{l}}} must equal conj(f_{l}) for a real coupling"
                )));
            }
            harmonics.push((l, plus));
        }
        Self::from_harmonics(c0.re, &harmonics)
    }

    pub fn is_sine(&self) -> bool {
        *self == Self::sine()
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    /// `(l, f_l)` for `l ≥ 1`.
    pub fn harmonics(&self) -> &[(u32, Complex64)] {
        &self.harmonics
    }

    /// `f_l` for any integer `l`.
    pub fn coefficient(&self, l: i64) -> Complex64 {
        if l == 0 {
            return Complex64::new(self.constant, 0.0);
        }
        let c = self
            .harmonics
            .iter()
            .find(|h| i64::from(h.0) == l.abs())
            .map_or(Complex64::new(0.0, 0.0), |h| h.1);
        if l > 0 {
            c
        } else {
            c.conj()
        }
    }

    /// Highest harmonic present (0 for a constant coupling).
    pub fn max_harmonic(&self) -> u32 {
        self.harmonics.last().map_or(0, |h| h.0)
    }

    pub fn eval(&self, theta: f64) -> f64 {
        self.constant
            + 2.0
                * self
                    .harmonics
                    .iter()
                    .map(|&(l, c)| (c * Complex64::from_polar(1.0, f64::from(l) * theta)).re)
                    .sum::<f64>()
    }

    pub fn derivative(&self, theta: f64) -> f64 {
        2.0 * self
            .harmonics
            .iter()
            .map(|&(l, c)| {
                let l = f64::from(l);
                (Complex64::new(0.0, l) * c * Complex64::from_polar(1.0, l * theta)).re
            })
            .sum::<f64>()
    }

    /// Upper bound on `max |f|`: `|f_0| + 2 Σ_{l>0} |f_l|` (exact for `sin`).
    pub fn sup_bound(&self) -> f64 {
        self.constant.abs() + 2.0 * self.harmonics.iter().map(|h| h.1.norm()).sum::<f64>()
    }

    /// Upper bound on the Lipschitz constant: `2 Σ_{l>0} l |f_l|` (exact for `sin`).
    pub fn lipschitz_bound(&self) -> f64 {
        2.0 * self.harmonics.iter().map(|h| f64::from(h.0) * h.1.norm()).sum::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sine_evaluates_to_sin() {
        let f = Coupling::sine();
        for i in 0..20 {
            let t = -3.0 + 0.37 * i as f64;
            assert!((f.eval(t) - t.sin()).abs() < 1e-15);
            assert!((f.derivative(t) - t.cos()).abs() < 1e-15);
        }
        assert_eq!(f.sup_bound(), 1.0);
        assert_eq!(f.lipschitz_bound(), 1.0);
        assert_eq!(f.coefficient(-1), Complex64::new(0.0, 0.5));
    }

    #[test]
    fn two_sided_form_matches_sine() {
        let half_over_i = Complex64::new(0.0, -0.5);
        let f = Coupling::from_fourier(&[(1, half_over_i), (-1, -half_over_i)]).unwrap();
        assert!(f.is_sine());
    }

    #[test]
    fn asymmetric_coefficients_rejected() {
        let c = Complex64::new(0.3, 0.1);
        assert!(Coupling::from_fourier(&[(2, c), (-2, c)]).is_err());
        assert!(Coupling::from_fourier(&[(0, Complex64::new(0.0, 1.0))]).is_err());
        assert!(Coupling::from_harmonics(0.0, &[(0, c)]).is_err());
        assert!(Coupling::from_harmonics(0.0, &[(1, c), (1, c)]).is_err());
    }

    #[test]
    fn daido_second_harmonic() {
        // f(θ) = sin θ + 0.5 sin 2θ + 0.2
        let f = Coupling::from_harmonics(
            0.2,
            &[(1, Complex64::new(0.0, -0.5)), (2, Complex64::new(0.0, -0.25))],
        )
        .unwrap();
        let t = 0.9;
        assert!((f.eval(t) - (t.sin() + 0.5 * (2.0 * t).sin() + 0.2)).abs() < 1e-15);
        assert!((f.derivative(t) - (t.cos() + (2.0 * t).cos())).abs() < 1e-15);
        assert_eq!(f.max_harmonic(), 2);
    }
}
