//! Orthonormal polynomials of a frequency law and their Gauss rules.
//!
//! For a probability law `g` on the real line with all moments, the
//! orthonormal polynomials satisfy the three-term recurrence
//!
//! ```text
//! ω P_n(ω) = b_n P_{n+1}(ω) + a_n P_n(ω) + b_{n-1} P_{n-1}(ω),   P_0 ≡ 1, b_{-1} = 0
//! ```
//!
//! and the coefficients form the symmetric tridiagonal Jacobi matrix, the
//! matrix of multiplication by `ω` in the basis `{P_n}`. The coefficients are
//! computed here by the discretized Stieltjes procedure on a bootstrap
//! quadrature of `g`; Gauss nodes and weights come from the eigenpairs of the
//! truncated Jacobi matrix.

use crate::error::{Error, Result};
use crate::measures::FrequencyLaw;
use crate::tridiag;

/// One node of a quadrature rule for a probability law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadNode {
    pub x: f64,
    pub w: f64,
}

/// Three-term recurrence coefficients `a_0..=a_{m_max}`, `b_0..b_{m_max-1}`.
///
/// `b_n > 0` fixes the sign of each `P_n` (positive leading coefficient).
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceCoefficients {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl RecurrenceCoefficients {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::InvalidArgument("at least a_0 is required".into()));
        }
        if b.len() + 1 != a.len() {
            return Err(Error::InvalidArgument(format!(
                "{} diagonal coefficients need {} off-diagonal ones, got {}",
                a.len(),
                a.len() - 1,
                b.len()
            )));
        }
        if let Some((n, &bn)) = b.iter().enumerate().find(|(_, &bn)| !(bn > 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "b_{n} = {bn} violates the b_n > 0 convention"
            )));
        }
        if a.iter().chain(&b).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite recurrence coefficient".into()));
        }
        Ok(Self { a, b })
    }

    /// Highest polynomial degree these coefficients can evaluate.
    pub fn m_max(&self) -> usize {
        self.a.len() - 1
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// `b_n`, with `b_{-1} = 0`. Returns `None` beyond the stored range.
    pub fn b_at(&self, n: i64) -> Option<f64> {
        if n < 0 {
            Some(0.0)
        } else {
            self.b.get(n as usize).copied()
        }
    }

    /// Keeps only the first `m_max + 1` polynomials.
    pub fn truncated(&self, m_max: usize) -> Result<Self> {
        self.check_degree(m_max)?;
        Ok(Self {
            a: self.a[..=m_max].to_vec(),
            b: self.b[..m_max].to_vec(),
        })
    }

    /// `P_m(ω)` by upward recurrence from `P_0 ≡ 1`.
    pub fn eval(&self, m: usize, omega: f64) -> Result<f64> {
        self.check_degree(m)?;
        let (mut prev, mut cur) = (0.0, 1.0);
        for n in 0..m {
            let b_prev = if n == 0 { 0.0 } else { self.b[n - 1] };
            let next = ((omega - self.a[n]) * cur - b_prev * prev) / self.b[n];
            prev = cur;
            cur = next;
        }
        Ok(cur)
    }

    /// Writes `P_0(ω), ..., P_{out.len()-1}(ω)` into `out`.
    pub fn eval_all(&self, omega: f64, out: &mut [f64]) -> Result<()> {
        if out.is_empty() {
            return Ok(());
        }
        self.check_degree(out.len() - 1)?;
        out[0] = 1.0;
        for n in 1..out.len() {
            let b_prev = if n >= 2 { self.b[n - 2] } else { 0.0 };
            let prev = if n >= 2 { out[n - 2] } else { 0.0 };
            out[n] = ((omega - self.a[n - 1]) * out[n - 1] - b_prev * prev) / self.b[n - 1];
        }
        Ok(())
    }

    fn check_degree(&self, m: usize) -> Result<()> {
        if m > self.m_max() {
            return Err(Error::IndexOutOfRange {
                what: "polynomial degree",
                index: m as i64,
                limit: self.m_max() as i64,
            });
        }
        Ok(())
    }
}

/// Recurrence coefficients of `g` up to degree `m_max`.
///
/// Runs the Stieltjes procedure on a bootstrap rule of at least
/// `4·m_max + 2` nodes: Gauss–Hermite for Gaussian laws (and both components
/// of a bimodal mixture), Gauss–Legendre for uniform laws, and the atoms
/// themselves for discrete laws.
pub fn recurrence_coefficients(g: &FrequencyLaw, m_max: usize) -> Result<RecurrenceCoefficients> {
    g.validate()?;
    let rule = reference_rule(g, 4 * m_max + 2)?;
    stieltjes(&rule, m_max)
}

/// Discretized Stieltjes procedure on an arbitrary positive rule.
///
/// The polynomials are carried as the weighted vectors `√w_i P_n(x_i)`, which
/// stay bounded by one even where `P_n` itself would overflow at far nodes.
pub fn stieltjes(rule: &[QuadNode], m_max: usize) -> Result<RecurrenceCoefficients> {
    let total: f64 = rule.iter().map(|q| q.w).sum();
    if !(total > 0.0) || rule.iter().any(|q| q.w < 0.0 || !q.x.is_finite()) {
        return Err(Error::InvalidArgument(
            "Stieltjes procedure needs a rule with nonnegative weights and positive mass".into(),
        ));
    }
    let support = rule.iter().filter(|q| q.w > 0.0).count();
    if support < m_max + 1 {
        return Err(Error::DegenerateMeasure {
            support,
            requested: m_max + 1,
        });
    }

    let x: Vec<f64> = rule.iter().map(|q| q.x).collect();
    let mut cur: Vec<f64> = rule.iter().map(|q| (q.w / total).sqrt()).collect();
    let mut prev = vec![0.0; x.len()];
    let mut a = Vec::with_capacity(m_max + 1);
    let mut b = Vec::with_capacity(m_max);
    let mut b_prev = 0.0;

    for n in 0..=m_max {
        let an: f64 = x.iter().zip(&cur).map(|(xi, u)| xi * u * u).sum();
        a.push(an);
        if n == m_max {
            break;
        }
        let mut next: Vec<f64> = x
            .iter()
            .zip(cur.iter().zip(&prev))
            .map(|(xi, (u, v))| (xi - an) * u - b_prev * v)
            .collect();
        let bn = next.iter().map(|v| v * v).sum::<f64>().sqrt();
        // Relative to the scale of the support, a vanishing b_n means the
        // rule has run out of independent directions.
        let scale = x.iter().fold(0.0_f64, |s, xi| s.max(xi.abs())).max(1.0);
        if !(bn > 1e-13 * scale) {
            return Err(Error::DegenerateMeasure {
                support: n + 1,
                requested: m_max + 1,
            });
        }
        next.iter_mut().for_each(|v| *v /= bn);
        b.push(bn);
        b_prev = bn;
        prev = std::mem::replace(&mut cur, next);
    }
    RecurrenceCoefficients::new(a, b)
}

/// `n`-point Gauss rule of the law described by `coeffs`.
///
/// Nodes are the eigenvalues of the leading `n×n` block of the Jacobi matrix;
/// weights are the squared first eigenvector components. Exact for
/// polynomials of degree `≤ 2n-1`.
pub fn gauss_nodes(coeffs: &RecurrenceCoefficients, n: usize) -> Result<Vec<QuadNode>> {
    if n == 0 {
        return Err(Error::InvalidArgument("a Gauss rule needs at least one node".into()));
    }
    if n > coeffs.a.len() {
        return Err(Error::IndexOutOfRange {
            what: "Gauss rule size",
            index: n as i64,
            limit: coeffs.a.len() as i64,
        });
    }
    jacobi_rule(&coeffs.a[..n], &coeffs.b[..n - 1])
}

fn jacobi_rule(diag: &[f64], offdiag: &[f64]) -> Result<Vec<QuadNode>> {
    let pairs = tridiag::eigen_first_components(diag, offdiag)?;
    Ok(pairs
        .into_iter()
        .map(|(x, z)| QuadNode { x, w: z * z })
        .collect())
}

/// Bootstrap quadrature of `g` with (at least) `n` nodes per continuous
/// component, built from closed-form Jacobi matrices.
///
/// Discrete laws return their atoms regardless of `n`.
pub fn reference_rule(g: &FrequencyLaw, n: usize) -> Result<Vec<QuadNode>> {
    let n = n.max(1);
    match *g {
        FrequencyLaw::Gaussian { mean, sd } => hermite_rule(mean, sd, n),
        FrequencyLaw::Uniform { lo, hi } => {
            let centre = 0.5 * (lo + hi);
            let half = 0.5 * (hi - lo);
            let diag = vec![centre; n];
            let off: Vec<f64> = (1..n)
                .map(|k| {
                    let k = k as f64;
                    half * k / (4.0 * k * k - 1.0).sqrt()
                })
                .collect();
            jacobi_rule(&diag, &off)
        }
        FrequencyLaw::BimodalGaussian { offset, sd } => {
            let mut rule = hermite_rule(-offset, sd, n)?;
            rule.extend(hermite_rule(offset, sd, n)?);
            rule.iter_mut().for_each(|q| q.w *= 0.5);
            Ok(rule)
        }
        FrequencyLaw::Atoms { ref atoms } => Ok(atoms
            .iter()
            .map(|&(x, w)| QuadNode { x, w })
            .collect()),
        FrequencyLaw::Lorentzian { .. } => Err(g.moments_error()),
    }
}

fn hermite_rule(mean: f64, sd: f64, n: usize) -> Result<Vec<QuadNode>> {
    let diag = vec![mean; n];
    let off: Vec<f64> = (1..n).map(|k| sd * (k as f64).sqrt()).collect();
    jacobi_rule(&diag, &off)
}

/// `|(P_i, P_j) − δ_ij|` for `i, j ≤ m_max`, with inner products taken under
/// the bootstrap rule of `g` (independent of `coeffs`).
pub fn orthonormality_residual(
    coeffs: &RecurrenceCoefficients,
    g: &FrequencyLaw,
    m_max: usize,
) -> Result<Vec<Vec<f64>>> {
    coeffs.check_degree(m_max)?;
    let rule = reference_rule(g, m_max + 2)?;
    let mut gram = vec![vec![0.0; m_max + 1]; m_max + 1];
    let mut p = vec![0.0; m_max + 1];
    for q in &rule {
        coeffs.eval_all(q.x, &mut p)?;
        for i in 0..=m_max {
            for j in 0..=i {
                gram[i][j] += q.w * p[i] * p[j];
            }
        }
    }
    let mut residual = vec![vec![0.0; m_max + 1]; m_max + 1];
    for i in 0..=m_max {
        for j in 0..=i {
            let target = if i == j { 1.0 } else { 0.0 };
            let r = (gram[i][j] - target).abs();
            residual[i][j] = r;
            residual[j][i] = r;
        }
    }
    Ok(residual)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian() -> FrequencyLaw {
        FrequencyLaw::Gaussian { mean: 0.0, sd: 1.0 }
    }

    /// Stieltjes on a dense trapezoid grid of the standard normal density;
    /// shares no code path with the Hermite bootstrap rule.
    fn trapezoid_oracle(m_max: usize) -> RecurrenceCoefficients {
        let h = 0.01;
        let n = 4001;
        let rule: Vec<QuadNode> = (0..n)
            .map(|i| {
                let x = -20.0 + h * i as f64;
                QuadNode {
                    x,
                    w: h * (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt(),
                }
            })
            .collect();
        stieltjes(&rule, m_max).unwrap()
    }

    #[test]
    fn gaussian_matches_normalized_hermite_recurrence() {
        let c = recurrence_coefficients(&gaussian(), 5).unwrap();
        let oracle = trapezoid_oracle(5);
        for n in 0..=5 {
            assert!(c.a()[n].abs() < 1e-12);
            assert!(oracle.a()[n].abs() < 1e-12);
        }
        for n in 0..5 {
            let exact = ((n + 1) as f64).sqrt();
            assert!((c.b()[n] - exact).abs() < 1e-12, "b_{n} = {}", c.b()[n]);
            assert!((oracle.b()[n] - exact).abs() < 1e-10);
        }
    }

    #[test]
    fn uniform_first_coefficients() {
        let c = recurrence_coefficients(&FrequencyLaw::Uniform { lo: -1.0, hi: 1.0 }, 2).unwrap();
        assert!(c.a().iter().all(|a| a.abs() < 1e-14));
        assert!((c.b()[0] - 1.0 / 3f64.sqrt()).abs() < 1e-14);
        assert!((c.b()[1] - 2.0 / 15f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn point_mass_is_one_dimensional() {
        let g = FrequencyLaw::Atoms {
            atoms: vec![(0.7, 1.0)],
        };
        let c = recurrence_coefficients(&g, 0).unwrap();
        assert_eq!(c.a(), &[0.7]);
        assert!(c.b().is_empty());
        let err = recurrence_coefficients(&g, 1).unwrap_err();
        assert!(matches!(err, Error::DegenerateMeasure { support: 1, requested: 2 }));
    }

    #[test]
    fn eval_examples() {
        let c = recurrence_coefficients(&gaussian(), 4).unwrap();
        assert_eq!(c.eval(0, 3.3).unwrap(), 1.0);
        assert!((c.eval(1, 2.0).unwrap() - 2.0).abs() < 1e-14);
        assert!((c.eval(2, 0.0).unwrap() + 1.0 / 2f64.sqrt()).abs() < 1e-14);
        assert!(matches!(
            c.eval(5, 0.0),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn eval_all_agrees_with_eval() {
        let c = recurrence_coefficients(&FrequencyLaw::Uniform { lo: -2.0, hi: 3.0 }, 8).unwrap();
        let mut buf = vec![0.0; 9];
        c.eval_all(1.3, &mut buf).unwrap();
        for (m, v) in buf.iter().enumerate() {
            assert_eq!(*v, c.eval(m, 1.3).unwrap());
        }
    }

    #[test]
    fn gauss_rule_examples() {
        let c = recurrence_coefficients(&gaussian(), 3).unwrap();
        let one = gauss_nodes(&c, 1).unwrap();
        assert_eq!(one.len(), 1);
        assert!((one[0].x - c.a()[0]).abs() < 1e-15);
        assert!((one[0].w - 1.0).abs() < 1e-15);

        let two = gauss_nodes(&c, 2).unwrap();
        assert!((two[0].x + 1.0).abs() < 1e-14 && (two[1].x - 1.0).abs() < 1e-14);
        assert!((two[0].w - 0.5).abs() < 1e-14 && (two[1].w - 0.5).abs() < 1e-14);

        for n in 2..=4 {
            let rule = gauss_nodes(&c, n).unwrap();
            let var: f64 = rule.iter().map(|q| q.w * q.x * q.x).sum();
            assert!((var - 1.0).abs() < 1e-12);
        }
        assert!(gauss_nodes(&c, 5).is_err());
        assert!(gauss_nodes(&c, 0).is_err());
    }

    #[test]
    fn orthonormality_examples() {
        for g in [gaussian(), FrequencyLaw::Uniform { lo: -1.0, hi: 1.0 }] {
            let c = recurrence_coefficients(&g, 10).unwrap();
            let r = orthonormality_residual(&c, &g, 10).unwrap();
            let worst = r.iter().flatten().fold(0.0_f64, |s, v| s.max(*v));
            assert!(worst < 1e-10, "{g:?}: {worst}");
        }
        let pm = FrequencyLaw::Atoms {
            atoms: vec![(2.0, 1.0)],
        };
        let c = recurrence_coefficients(&pm, 0).unwrap();
        assert_eq!(orthonormality_residual(&c, &pm, 0).unwrap(), vec![vec![0.0]]);
    }

    #[test]
    fn bimodal_coefficients_are_symmetric() {
        let g = FrequencyLaw::BimodalGaussian { offset: 1.5, sd: 0.5 };
        let c = recurrence_coefficients(&g, 12).unwrap();
        assert!(c.a().iter().all(|a| a.abs() < 1e-12));
        // b_0² is the variance: offset² + sd².
        assert!((c.b()[0] * c.b()[0] - (2.25 + 0.25)).abs() < 1e-12);
        let r = orthonormality_residual(&c, &g, 12).unwrap();
        assert!(r.iter().flatten().all(|v| *v < 1e-10));
    }

    #[test]
    fn lorentzian_rejected() {
        let g = FrequencyLaw::Lorentzian {
            center: 0.0,
            width: 1.0,
        };
        assert!(matches!(
            recurrence_coefficients(&g, 2),
            Err(Error::MomentsDoNotExist { .. })
        ));
    }

    #[test]
    fn rejects_bad_coefficients() {
        assert!(RecurrenceCoefficients::new(vec![0.0, 0.0], vec![-1.0]).is_err());
        assert!(RecurrenceCoefficients::new(vec![0.0, 0.0], vec![]).is_err());
        assert!(RecurrenceCoefficients::new(vec![], vec![]).is_err());
    }
}
