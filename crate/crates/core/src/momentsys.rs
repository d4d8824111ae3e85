//! The truncated moments system.
//!
//! For `Z^m_k = ∫∫ P_m(ω) e^{ikθ} dρ_t` the continuum model (and, identically,
//! the empirical moments of any finite-N state) obey
//!
//! ```text
//! dZ^m_k/dt = ik (b_m Z^{m+1}_k + a_m Z^m_k + b_{m−1} Z^{m−1}_k) + ikK Σ_l f_l Z^0_l Z^m_{k−l}
//! ```
//!
//! which for `f = sin` is
//! `ik(...) + (kK/2)(Z^0_1 Z^m_{k−1} − Z^0_{−1} Z^m_{k+1})`.
//!
//! The lattice keeps `0 ≤ m ≤ M_max`, `0 ≤ k ≤ K_max`; `Z^m_{−k}` is read as
//! `conj(Z^m_k)` and every moment outside the box is taken to be zero. The
//! `k = 0` row has zero derivative and is never integrated.

use num_complex::Complex64;

use crate::coupling::Coupling;
use crate::error::{Error, Result};
use crate::measures::DiscretizedMeasure;
use crate::ode::{self, Rk4};
use crate::orthopoly::RecurrenceCoefficients;

/// Moments beyond this modulus abort an integration.
pub const BLOW_UP_LIMIT: f64 = 10.0;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct MomentLattice {
    /// Row-major in `m`: entry `(m, k)` at `m * (k_max + 1) + k`.
    z: Vec<Complex64>,
    m_max: usize,
    k_max: usize,
    coeffs: RecurrenceCoefficients,
    strength: f64,
    coupling: Coupling,
}

impl MomentLattice {
    /// A lattice from explicit values, `values[m][k]`. `Z[0,0]` is set to 1.
    pub fn from_values(
        values: Vec<Vec<Complex64>>,
        coeffs: &RecurrenceCoefficients,
        strength: f64,
        coupling: Coupling,
    ) -> Result<Self> {
        let m_max = values.len().checked_sub(1).ok_or_else(|| {
            Error::InvalidArgument("lattice needs at least one m row".into())
        })?;
        let k_max = values[0].len().checked_sub(1).ok_or_else(|| {
            Error::InvalidArgument("lattice needs at least one k column".into())
        })?;
        if values.iter().any(|row| row.len() != k_max + 1) {
            return Err(Error::InvalidArgument("lattice rows differ in length".into()));
        }
        let mut lat = Self::zeros(coeffs, m_max, k_max, strength, coupling)?;
        lat.z = values.into_iter().flatten().collect();
        lat.z[0] = Complex64::new(1.0, 0.0);
        Ok(lat)
    }

    /// The incoherent lattice: `Z[0,0] = 1`, everything else zero.
    pub fn zeros(
        coeffs: &RecurrenceCoefficients,
        m_max: usize,
        k_max: usize,
        strength: f64,
        coupling: Coupling,
    ) -> Result<Self> {
        if coeffs.m_max() < m_max {
            return Err(Error::IndexOutOfRange {
                what: "lattice M_max",
                index: m_max as i64,
                limit: coeffs.m_max() as i64,
            });
        }
        if !(strength.is_finite() && strength >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "coupling strength must be finite and nonnegative, got {strength}"
            )));
        }
        let mut z = vec![ZERO; (m_max + 1) * (k_max + 1)];
        z[0] = Complex64::new(1.0, 0.0);
        Ok(Self {
            z,
            m_max,
            k_max,
            coeffs: coeffs.clone(),
            strength,
            coupling,
        })
    }

    /// `Z[m,k] = Σ_q w_q P_m(ω_q) e^{ikθ_q}` over weighted points `(θ, ω, w)`.
    pub fn from_points(
        points: impl IntoIterator<Item = (f64, f64, f64)>,
        coeffs: &RecurrenceCoefficients,
        m_max: usize,
        k_max: usize,
        strength: f64,
        coupling: Coupling,
    ) -> Result<Self> {
        let mut lat = Self::zeros(coeffs, m_max, k_max, strength, coupling)?;
        lat.z[0] = ZERO;
        let mut poly = vec![0.0; m_max + 1];
        let mut wave = vec![ZERO; k_max + 1];
        for (theta, omega, w) in points {
            coeffs.eval_all(omega, &mut poly)?;
            let u = Complex64::from_polar(1.0, theta);
            let mut p = Complex64::new(w, 0.0);
            for c in wave.iter_mut() {
                *c = p;
                p *= u;
            }
            for (m, &pm) in poly.iter().enumerate() {
                let row = &mut lat.z[m * (k_max + 1)..(m + 1) * (k_max + 1)];
                for (z, c) in row.iter_mut().zip(&wave) {
                    *z += pm * c;
                }
            }
        }
        lat.z[0] = Complex64::new(1.0, 0.0);
        Ok(lat)
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn coeffs(&self) -> &RecurrenceCoefficients {
        &self.coeffs
    }

    pub fn strength(&self) -> f64 {
        self.strength
    }

    pub fn coupling(&self) -> &Coupling {
        &self.coupling
    }

    /// Stored half-lattice, row-major in `m`.
    pub fn values(&self) -> &[Complex64] {
        &self.z
    }

    /// `Z^m_k` for any integer `k`, zero outside the truncation box.
    pub fn get(&self, m: usize, k: i64) -> Complex64 {
        read(&self.z, self.m_max, self.k_max, m as i64, k)
    }

    /// `dZ/dt` on the stored half-lattice. Uses the hand-coded `f = sin`
    /// form when it applies.
    pub fn rhs(&self) -> Vec<Complex64> {
        let mut out = vec![ZERO; self.z.len()];
        if self.coupling.is_sine() {
            self.rhs_sine_into(&self.z, &mut out);
        } else {
            self.rhs_general_into(&self.z, &mut out);
        }
        out
    }

    /// `dZ/dt` through the generalized Fourier form, for any coupling.
    pub fn rhs_general(&self) -> Vec<Complex64> {
        let mut out = vec![ZERO; self.z.len()];
        self.rhs_general_into(&self.z, &mut out);
        out
    }

    /// `dZ/dt` for `f = sin` written out term by term; ignores `self.coupling`.
    pub fn rhs_sine(&self) -> Vec<Complex64> {
        let mut out = vec![ZERO; self.z.len()];
        self.rhs_sine_into(&self.z, &mut out);
        out
    }

    fn linear_part(&self, z: &[Complex64], m: usize, k: i64) -> Complex64 {
        let (mm, km) = (self.m_max, self.k_max);
        let a = self.coeffs.a()[m];
        // b_{M_max} only ever multiplies the zero closure.
        let b = self.coeffs.b_at(m as i64).unwrap_or(0.0);
        let b_prev = self.coeffs.b_at(m as i64 - 1).unwrap_or(0.0);
        let mi = m as i64;
        Complex64::new(0.0, k as f64)
            * (b * read(z, mm, km, mi + 1, k) + a * read(z, mm, km, mi, k) + b_prev * read(z, mm, km, mi - 1, k))
    }

    fn rhs_sine_into(&self, z: &[Complex64], out: &mut [Complex64]) {
        let (mm, km) = (self.m_max, self.k_max);
        let z01 = read(z, mm, km, 0, 1);
        for m in 0..=mm {
            for k in 1..=km {
                let ki = k as i64;
                let mi = m as i64;
                let nonlinear = 0.5
                    * ki as f64
                    * self.strength
                    * (z01 * read(z, mm, km, mi, ki - 1) - z01.conj() * read(z, mm, km, mi, ki + 1));
                out[m * (km + 1) + k] = self.linear_part(z, m, ki) + nonlinear;
            }
        }
    }

    fn rhs_general_into(&self, z: &[Complex64], out: &mut [Complex64]) {
        let (mm, km) = (self.m_max, self.k_max);
        let lmax = i64::from(self.coupling.max_harmonic());
        let f: Vec<(i64, Complex64)> = (-lmax..=lmax)
            .map(|l| (l, self.coupling.coefficient(l)))
            .filter(|t| t.1 != ZERO)
            .collect();
        let z0: Vec<Complex64> = f.iter().map(|&(l, _)| read(z, mm, km, 0, l)).collect();
        for m in 0..=mm {
            for k in 1..=km {
                let ki = k as i64;
                let mi = m as i64;
                let mut conv = ZERO;
                for (&(l, fl), &z0l) in f.iter().zip(&z0) {
                    conv += fl * z0l * read(z, mm, km, mi, ki - l);
                }
                let ik = Complex64::new(0.0, ki as f64);
                out[m * (km + 1) + k] = self.linear_part(z, m, ki) + ik * self.strength * conv;
            }
        }
    }
}

fn read(z: &[Complex64], m_max: usize, k_max: usize, m: i64, k: i64) -> Complex64 {
    if m < 0 || m > m_max as i64 || k.unsigned_abs() > k_max as u64 {
        return ZERO;
    }
    let v = z[m as usize * (k_max + 1) + k.unsigned_abs() as usize];
    if k < 0 {
        v.conj()
    } else {
        v
    }
}

/// `Z[m,k]` built from the discretized initial measure `h`.
pub fn init_lattice(
    h: &DiscretizedMeasure,
    coeffs: &RecurrenceCoefficients,
    m_max: usize,
    k_max: usize,
    strength: f64,
    coupling: Coupling,
) -> Result<MomentLattice> {
    MomentLattice::from_points(
        h.nodes().iter().map(|n| (n.theta, n.omega, n.weight)),
        coeffs,
        m_max,
        k_max,
        strength,
        coupling,
    )
}

/// Stored lattices of a moments-system run.
#[derive(Debug, Clone)]
pub struct LatticeSeries {
    pub times: Vec<f64>,
    pub lattices: Vec<MomentLattice>,
}

impl LatticeSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `Z^0_1` at each stored time.
    pub fn order(&self) -> Vec<Complex64> {
        self.lattices.iter().map(|l| l.get(0, 1)).collect()
    }
}

/// RK4 on the `k ≥ 1` part of the lattice; the `k = 0` row is copied through
/// unchanged. Stores every `stride`-th step and the endpoints.
pub fn integrate_moments(lat: &MomentLattice, t_end: f64, dt: f64, stride: usize) -> Result<LatticeSeries> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "integration horizon must be finite and nonnegative, got {t_end}"
        )));
    }
    let stride = stride.max(1);
    let (mm, km) = (lat.m_max, lat.k_max);
    let row = km + 1;
    // Packed state: (re, im) of Z[m, k] for k ≥ 1.
    let dynamic: Vec<usize> = (0..=mm).flat_map(|m| (1..=km).map(move |k| m * row + k)).collect();
    let mut y = vec![0.0; 2 * dynamic.len()];
    for (j, &idx) in dynamic.iter().enumerate() {
        y[2 * j] = lat.z[idx].re;
        y[2 * j + 1] = lat.z[idx].im;
    }
    let mut full = lat.z.clone();
    let mut deriv = vec![ZERO; full.len()];
    let mut rk = Rk4::new(y.len());
    let sine = lat.coupling.is_sine();

    let mut series = LatticeSeries {
        times: vec![0.0],
        lattices: vec![lat.clone()],
    };
    let (steps, h) = ode::step_plan(t_end, dt);
    for s in 0..steps {
        rk.step(0.0, h, &mut y, |_, y, dy| {
            for (j, &idx) in dynamic.iter().enumerate() {
                full[idx] = Complex64::new(y[2 * j], y[2 * j + 1]);
            }
            if sine {
                lat.rhs_sine_into(&full, &mut deriv);
            } else {
                lat.rhs_general_into(&full, &mut deriv);
            }
            for (j, &idx) in dynamic.iter().enumerate() {
                dy[2 * j] = deriv[idx].re;
                dy[2 * j + 1] = deriv[idx].im;
            }
        });
        let t = (s + 1) as f64 * h;
        let mut worst = 0.0_f64;
        for pair in y.chunks_exact(2) {
            let mag = pair[0].hypot(pair[1]);
            if !mag.is_finite() || mag > worst {
                worst = mag;
            }
        }
        if !(worst <= BLOW_UP_LIMIT) {
            return Err(Error::TruncationBlowUp {
                t,
                magnitude: worst,
                limit: BLOW_UP_LIMIT,
            });
        }
        if (s + 1) % stride == 0 || s + 1 == steps {
            let mut snap = lat.clone();
            for (j, &idx) in dynamic.iter().enumerate() {
                snap.z[idx] = Complex64::new(y[2 * j], y[2 * j + 1]);
            }
            series.times.push(t);
            series.lattices.push(snap);
        }
    }
    Ok(series)
}

/// Conservation diagnostics over a lattice series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantReport {
    /// `max_{t, m} |Z^m_0(t) − Z^m_0(0)|`.
    pub k0_drift: f64,
    /// `max_t |Z^0_0(t) − 1|`.
    pub z00_error: f64,
    /// `max_{t, k} |Z^0_k(t)|`.
    pub max_phase_moment: f64,
    /// `max(0, max_{t,k} |Z^0_k(t)| − 1)`.
    pub phase_moment_excess: f64,
    /// `max_{t, m} |Im Z^m_0(t)|`; `Z^m_0` is its own conjugate.
    pub conjugacy_defect: f64,
}

pub fn invariant_report(series: &LatticeSeries) -> InvariantReport {
    let mut r = InvariantReport {
        k0_drift: 0.0,
        z00_error: 0.0,
        max_phase_moment: 0.0,
        phase_moment_excess: 0.0,
        conjugacy_defect: 0.0,
    };
    let Some(first) = series.lattices.first() else {
        return r;
    };
    for lat in &series.lattices {
        for m in 0..=lat.m_max {
            let z = lat.get(m, 0);
            r.k0_drift = r.k0_drift.max((z - first.get(m, 0)).norm());
            r.conjugacy_defect = r.conjugacy_defect.max(z.im.abs());
        }
        r.z00_error = r.z00_error.max((lat.get(0, 0) - 1.0).norm());
        for k in 1..=lat.k_max as i64 {
            r.max_phase_moment = r.max_phase_moment.max(lat.get(0, k).norm());
        }
    }
    r.phase_moment_excess = (r.max_phase_moment - 1.0).max(0.0);
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{build_discretization, FrequencyLaw, MeasureSpec, PhaseLaw};
    use crate::orthopoly::recurrence_coefficients;

    fn gauss_coeffs(m: usize) -> RecurrenceCoefficients {
        recurrence_coefficients(&FrequencyLaw::Gaussian { mean: 0.0, sd: 1.0 }, m).unwrap()
    }

    #[test]
    fn incoherent_lattice_is_a_fixed_point() {
        let c = gauss_coeffs(6);
        let mut lat = MomentLattice::zeros(&c, 6, 6, 2.0, Coupling::sine()).unwrap();
        // Nonzero k = 0 row does not matter.
        lat.z[7] = Complex64::new(0.3, 0.0);
        assert!(lat.rhs().iter().all(|d| *d == ZERO));
        let series = integrate_moments(&lat, 1.0, 0.1, 1).unwrap();
        assert!(series.lattices.iter().all(|l| *l == lat));
        let r = invariant_report(&series);
        assert_eq!(r.k0_drift, 0.0);
        assert_eq!(r.max_phase_moment, 0.0);
    }

    #[test]
    fn single_order_parameter_entry() {
        let c = gauss_coeffs(3);
        let z = Complex64::new(0.2, 0.1);
        let mut values = vec![vec![ZERO; 4]; 4];
        values[0][1] = z;
        let lat = MomentLattice::from_values(values, &c, 1.5, Coupling::sine()).unwrap();
        let d = lat.rhs();
        // dZ[0,1] = (K/2) Z^0_1 Z^0_0 = Kz/2, dZ[1,1] = i b_0 z = i z.
        assert!((d[1] - 0.75 * z).norm() < 1e-15);
        assert!((d[4 + 1] - Complex64::i() * z).norm() < 1e-15);
    }

    #[test]
    fn uniform_phases_give_empty_k_columns() {
        let spec = MeasureSpec::new(PhaseLaw::Uniform, FrequencyLaw::Gaussian { mean: 0.0, sd: 1.0 }).unwrap();
        let h = build_discretization(&spec, 12, 32).unwrap();
        let c = gauss_coeffs(10);
        let lat = init_lattice(&h, &c, 10, 8, 1.0, Coupling::sine()).unwrap();
        assert_eq!(lat.get(0, 0), Complex64::new(1.0, 0.0));
        for m in 0..=10 {
            for k in 1..=8 {
                assert!(lat.get(m, k).norm() < 1e-14);
            }
            if m > 0 {
                assert!(lat.get(m, 0).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn insufficient_coefficients() {
        let c = gauss_coeffs(3);
        assert!(MomentLattice::zeros(&c, 4, 4, 1.0, Coupling::sine()).is_err());
    }

    #[test]
    fn out_of_box_reads_are_zero_and_negative_k_conjugates() {
        let c = gauss_coeffs(2);
        let mut values = vec![vec![ZERO; 3]; 3];
        values[1][2] = Complex64::new(0.1, 0.4);
        let lat = MomentLattice::from_values(values, &c, 1.0, Coupling::sine()).unwrap();
        assert_eq!(lat.get(1, -2), Complex64::new(0.1, -0.4));
        assert_eq!(lat.get(3, 0), ZERO);
        assert_eq!(lat.get(1, 3), ZERO);
    }

    #[test]
    fn blow_up_is_reported() {
        let c = gauss_coeffs(2);
        let mut values = vec![vec![ZERO; 3]; 3];
        values[0][1] = Complex64::new(0.9, 0.0);
        values[0][2] = Complex64::new(0.9, 0.0);
        let lat = MomentLattice::from_values(values, &c, 50.0, Coupling::sine()).unwrap();
        match integrate_moments(&lat, 10.0, 0.001, 1) {
            Err(Error::TruncationBlowUp { limit, .. }) => assert_eq!(limit, BLOW_UP_LIMIT),
            other => panic!("expected blow-up, got {other:?}"),
        }
    }
}
