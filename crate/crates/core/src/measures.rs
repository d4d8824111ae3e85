//! Initial measures `h(θ, ω) = ĥ(θ) · ĝ(ω)` on the cylinder `S¹ × ℝ`.
//!
//! A [`MeasureSpec`] pairs a phase law with a natural-frequency law. It can be
//! sampled (for the finite-N model), discretized into a weighted node set (for
//! the continuum solver and the moment lattice), and queried for the absolute
//! moments of its frequency marginal.
//!
//! Every frequency law used downstream must have all absolute moments: the
//! orthonormal polynomial basis of `L²(g)` does not exist otherwise. The
//! Lorentzian law is representable so that configuration files can name it,
//! but every construction rejects it.

use std::f64::consts::{PI, TAU};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::{Normal, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::orthopoly;
use crate::rng;

/// Tolerance for "sums to one" checks on weights.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Law of the initial phases on `[0, 2π)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PhaseLaw {
    Uniform,
    /// Normal law with standard deviation `sigma` wrapped onto the circle.
    /// Its `k`-th Fourier moment is `e^{ik·center} e^{-k²σ²/2}`.
    WrappedGaussian { center: f64, sigma: f64 },
    PointMass { theta: f64 },
    /// Weighted atoms `(θ, weight)`.
    Atoms { atoms: Vec<(f64, f64)> },
}

/// Law `g` of the natural frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FrequencyLaw {
    Gaussian { mean: f64, sd: f64 },
    Uniform { lo: f64, hi: f64 },
    /// Weighted atoms `(ω, weight)`.
    Atoms { atoms: Vec<(f64, f64)> },
    /// Equal mixture of normals centred at `±offset`.
    BimodalGaussian { offset: f64, sd: f64 },
    /// Cauchy law. Has no absolute moments of order ≥ 1; always rejected.
    Lorentzian { center: f64, width: f64 },
}

fn check_atoms(atoms: &[(f64, f64)], what: &str) -> Result<()> {
    if atoms.is_empty() {
        return Err(Error::InvalidSpec(format!("{what}: empty atom list")));
    }
    if atoms.iter().any(|&(x, w)| !x.is_finite() || !w.is_finite() || w < 0.0) {
        return Err(Error::InvalidSpec(format!(
            "{what}: atoms need finite locations and nonnegative weights"
        )));
    }
    let total: f64 = atoms.iter().map(|a| a.1).sum();
    if (total - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(Error::InvalidSpec(format!(
            "{what}: atom weights sum to {total}, not 1"
        )));
    }
    Ok(())
}

fn check_positive(value: f64, name: &str) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidSpec(format!("{name} must be finite and positive, got {value}")))
    }
}

fn check_finite(value: f64, name: &str) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidSpec(format!("{name} must be finite, got {value}")))
    }
}

impl PhaseLaw {
    pub fn validate(&self) -> Result<()> {
        match self {
            PhaseLaw::Uniform => Ok(()),
            PhaseLaw::WrappedGaussian { center, sigma } => {
                check_finite(*center, "phase center")?;
                check_positive(*sigma, "phase sigma")
            }
            PhaseLaw::PointMass { theta } => check_finite(*theta, "phase point mass"),
            PhaseLaw::Atoms { atoms } => check_atoms(atoms, "phase atoms"),
        }
    }

    /// Density with respect to `dθ` on `[0, 2π)`, if the law has one.
    pub fn density(&self, theta: f64) -> Option<f64> {
        match *self {
            PhaseLaw::Uniform => Some(1.0 / TAU),
            PhaseLaw::WrappedGaussian { center, sigma } => {
                let d = (theta - center).rem_euclid(TAU);
                let images = (6.0 * sigma / TAU).ceil() as i64 + 1;
                let norm = 1.0 / (sigma * TAU.sqrt());
                let sum: f64 = (-images..=images)
                    .map(|j| {
                        let u = (d + TAU * j as f64) / sigma;
                        (-0.5 * u * u).exp()
                    })
                    .sum();
                Some(norm * sum)
            }
            PhaseLaw::PointMass { .. } | PhaseLaw::Atoms { .. } => None,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            PhaseLaw::Uniform => rng.random::<f64>() * TAU,
            PhaseLaw::WrappedGaussian { center, sigma } => {
                let z: f64 = rng.sample(StandardNormal);
                (center + sigma * z).rem_euclid(TAU)
            }
            PhaseLaw::PointMass { theta } => theta.rem_euclid(TAU),
            PhaseLaw::Atoms { atoms } => atoms[pick_atom(atoms, rng)].0.rem_euclid(TAU),
        }
    }

    /// Equispaced trapezoid nodes weighted by the density, or the atoms.
    fn discretize(&self, n_theta: usize) -> Vec<(f64, f64)> {
        match self {
            PhaseLaw::PointMass { theta } => vec![(theta.rem_euclid(TAU), 1.0)],
            PhaseLaw::Atoms { atoms } => atoms.iter().map(|&(t, w)| (t.rem_euclid(TAU), w)).collect(),
            PhaseLaw::Uniform | PhaseLaw::WrappedGaussian { .. } => {
                let step = TAU / n_theta as f64;
                let mut nodes: Vec<(f64, f64)> = (0..n_theta)
                    .map(|j| {
                        let t = step * j as f64;
                        (t, self.density(t).unwrap_or(0.0) * step)
                    })
                    .collect();
                let total: f64 = nodes.iter().map(|n| n.1).sum();
                nodes.iter_mut().for_each(|n| n.1 /= total);
                nodes
            }
        }
    }
}

fn pick_atom<R: Rng + ?Sized>(atoms: &[(f64, f64)], rng: &mut R) -> usize {
    if atoms.len() == 1 {
        return 0;
    }
    // Validated weights are nonnegative with positive total.
    let dist = WeightedIndex::new(atoms.iter().map(|a| a.1)).expect("validated atom weights");
    dist.sample(rng)
}

/// Outcome of the Carleman determinacy heuristic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CarlemanVerdict {
    /// Compact support: the law is determined by its moments.
    Determinate,
    /// The terms `(M_n + 1)^{-1/n}` decay no faster than `c/n`, as for a
    /// divergent series. Evidence, not proof.
    ConsistentWithDeterminate,
    /// The partial sums do not look divergent; nothing is claimed.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CarlemanReport {
    pub partial_sum: f64,
    pub terms: Vec<f64>,
    pub verdict: CarlemanVerdict,
}

impl FrequencyLaw {
    pub fn validate(&self) -> Result<()> {
        match self {
            FrequencyLaw::Gaussian { mean, sd } => {
                check_finite(*mean, "frequency mean")?;
                check_positive(*sd, "frequency sd")
            }
            FrequencyLaw::Uniform { lo, hi } => {
                check_finite(*lo, "frequency lo")?;
                check_finite(*hi, "frequency hi")?;
                if hi > lo {
                    Ok(())
                } else {
                    Err(Error::InvalidSpec(format!("uniform law needs lo < hi, got [{lo}, {hi}]")))
                }
            }
            FrequencyLaw::Atoms { atoms } => check_atoms(atoms, "frequency atoms"),
            FrequencyLaw::BimodalGaussian { offset, sd } => {
                check_finite(*offset, "bimodal offset")?;
                check_positive(*sd, "bimodal sd")
            }
            FrequencyLaw::Lorentzian { center, width } => {
                check_finite(*center, "lorentzian center")?;
                check_positive(*width, "lorentzian width")
            }
        }
    }

    pub fn has_all_moments(&self) -> bool {
        !matches!(self, FrequencyLaw::Lorentzian { .. })
    }

    pub(crate) fn moments_error(&self) -> Error {
        Error::MomentsDoNotExist {
            law: self.name().to_string(),
            order: 1,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FrequencyLaw::Gaussian { .. } => "gaussian",
            FrequencyLaw::Uniform { .. } => "uniform",
            FrequencyLaw::Atoms { .. } => "atoms",
            FrequencyLaw::BimodalGaussian { .. } => "bimodal-gaussian",
            FrequencyLaw::Lorentzian { .. } => "lorentzian",
        }
    }

    /// Bounds of the support when it is compact.
    pub fn compact_support(&self) -> Option<(f64, f64)> {
        match self {
            FrequencyLaw::Uniform { lo, hi } => Some((*lo, *hi)),
            FrequencyLaw::Atoms { atoms } => {
                let lo = atoms.iter().map(|a| a.0).fold(f64::INFINITY, f64::min);
                let hi = atoms.iter().map(|a| a.0).fold(f64::NEG_INFINITY, f64::max);
                Some((lo, hi))
            }
            _ => None,
        }
    }

    /// Density with respect to `dω`, if the law has one.
    pub fn density(&self, omega: f64) -> Option<f64> {
        let normal = |x: f64, m: f64, s: f64| {
            let u = (x - m) / s;
            (-0.5 * u * u).exp() / (s * TAU.sqrt())
        };
        match *self {
            FrequencyLaw::Gaussian { mean, sd } => Some(normal(omega, mean, sd)),
            FrequencyLaw::Uniform { lo, hi } => {
                Some(if (lo..=hi).contains(&omega) { 1.0 / (hi - lo) } else { 0.0 })
            }
            FrequencyLaw::BimodalGaussian { offset, sd } => {
                Some(0.5 * (normal(omega, offset, sd) + normal(omega, -offset, sd)))
            }
            FrequencyLaw::Lorentzian { center, width } => {
                let u = (omega - center) / width;
                Some(1.0 / (PI * width * (1.0 + u * u)))
            }
            FrequencyLaw::Atoms { .. } => None,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        Ok(match self {
            FrequencyLaw::Gaussian { mean, sd } => {
                Normal::new(*mean, *sd).map_err(|e| Error::InvalidSpec(e.to_string()))?.sample(rng)
            }
            FrequencyLaw::Uniform { lo, hi } => rng.random_range(*lo..*hi),
            FrequencyLaw::Atoms { atoms } => atoms[pick_atom(atoms, rng)].0,
            FrequencyLaw::BimodalGaussian { offset, sd } => {
                let centre = if rng.random_bool(0.5) { *offset } else { -offset };
                let z: f64 = rng.sample(StandardNormal);
                centre + sd * z
            }
            FrequencyLaw::Lorentzian { .. } => return Err(self.moments_error()),
        })
    }

    /// `∫ |ω|ⁿ dg`, in closed form where one exists, otherwise by adaptive
    /// quadrature.
    pub fn absolute_moment(&self, n: u32) -> Result<f64> {
        self.validate()?;
        if n == 0 {
            return Ok(1.0);
        }
        match *self {
            FrequencyLaw::Gaussian { mean, sd } => Ok(gaussian_abs_moment(mean, sd, n)),
            FrequencyLaw::BimodalGaussian { offset, sd } => Ok(gaussian_abs_moment(offset, sd, n)),
            FrequencyLaw::Uniform { lo, hi } => {
                let p = n as i32 + 1;
                let signed_pow = |x: f64| x.abs().powi(p).copysign(x);
                Ok((signed_pow(hi) - signed_pow(lo)) / (f64::from(p) * (hi - lo)))
            }
            FrequencyLaw::Atoms { ref atoms } => {
                Ok(atoms.iter().map(|&(x, w)| w * x.abs().powi(n as i32)).sum())
            }
            FrequencyLaw::Lorentzian { .. } => Err(self.moments_error()),
        }
    }

    /// `ln ∫ |ω|ⁿ dg`, overflow-free for the centred Gaussian family.
    fn ln_absolute_moment(&self, n: u32) -> Result<f64> {
        match *self {
            FrequencyLaw::Gaussian { mean: centre, sd } | FrequencyLaw::BimodalGaussian { offset: centre, sd }
                if centre == 0.0 =>
            {
                Ok(centred_gaussian_ln_abs_moment(sd, n))
            }
            _ => Ok(self.absolute_moment(n)?.ln()),
        }
    }

    /// Partial sum of Carleman's series `Σ_{n=1}^{n_terms} (M_n + 1)^{-1/n}`
    /// and a labelled verdict.
    ///
    /// Compact support short-circuits to [`CarlemanVerdict::Determinate`].
    /// Otherwise the verdict compares `n·t_n` at `n_terms` and `n_terms/2`:
    /// a harmonic-like (or slower) decay of the terms is reported as
    /// consistent with determinacy, anything faster as inconclusive.
    pub fn carleman_check(&self, n_terms: usize) -> Result<CarlemanReport> {
        if n_terms < 2 {
            return Err(Error::InvalidArgument("Carleman check needs at least 2 terms".into()));
        }
        self.validate()?;
        if !self.has_all_moments() {
            return Err(self.moments_error());
        }
        let terms = (1..=n_terms as u32)
            .map(|n| {
                let ln_m = self.ln_absolute_moment(n)?;
                // ln(M + 1) without overflowing M.
                let ln_m1 = if ln_m > 30.0 { ln_m + (-ln_m).exp().ln_1p() } else { ln_m.exp().ln_1p() };
                Ok((-ln_m1 / f64::from(n)).exp())
            })
            .collect::<Result<Vec<f64>>>()?;
        let partial_sum = terms.iter().sum();
        let verdict = if self.compact_support().is_some() {
            CarlemanVerdict::Determinate
        } else {
            let last = n_terms as f64 * terms[n_terms - 1];
            let half = n_terms / 2;
            let mid = half as f64 * terms[half - 1];
            if last >= 0.5 * mid {
                CarlemanVerdict::ConsistentWithDeterminate
            } else {
                CarlemanVerdict::Inconclusive
            }
        };
        Ok(CarlemanReport {
            partial_sum,
            terms,
            verdict,
        })
    }
}

fn centred_gaussian_ln_abs_moment(sd: f64, n: u32) -> f64 {
    let n = f64::from(n);
    n * sd.ln() + 0.5 * n * 2f64.ln() + ln_gamma(0.5 * (n + 1.0)) - 0.5 * PI.ln()
}

fn gaussian_abs_moment(mean: f64, sd: f64, n: u32) -> f64 {
    if mean == 0.0 {
        return centred_gaussian_ln_abs_moment(sd, n).exp();
    }
    if n % 2 == 0 {
        // E[ω^n] = Σ_{j even} C(n, j) μ^{n-j} σ^j (j-1)!!
        let mut total = 0.0;
        let mut binom = 1.0;
        let mut double_fact = 1.0;
        for j in 0..=n {
            if j > 0 {
                binom *= f64::from(n - j + 1) / f64::from(j);
            }
            if j % 2 == 0 {
                if j >= 2 {
                    double_fact *= f64::from(j - 1);
                }
                total += binom * mean.powi((n - j) as i32) * sd.powi(j as i32) * double_fact;
            }
        }
        return total;
    }
    let nf = f64::from(n);
    let spread = (mean * mean + 4.0 * nf * sd * sd).sqrt();
    let lo = 0.5 * (mean - spread) - 14.0 * sd;
    let hi = 0.5 * (mean + spread) + 14.0 * sd;
    let f = |x: f64| {
        let u = (x - mean) / sd;
        x.abs().powi(n as i32) * (-0.5 * u * u).exp() / (sd * TAU.sqrt())
    };
    let mut breaks = vec![lo, hi];
    if lo < 0.0 && hi > 0.0 {
        breaks.insert(1, 0.0);
    }
    breaks
        .windows(2)
        .map(|w| panel_integral(&f, w[0], w[1], 64))
        .sum()
}

/// Adaptive Simpson on `panels` equal sub-panels of `[a, b]`.
fn panel_integral(f: &impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let (l, r) = (a + h * i as f64, a + h * (i + 1) as f64);
            let (fl, fm, fr) = (f(l), f(0.5 * (l + r)), f(r));
            let whole = (r - l) / 6.0 * (fl + 4.0 * fm + fr);
            simpson(f, l, r, fl, fm, fr, whole, 1e-15 * whole.abs().max(1e-300), 40)
        })
        .sum()
}

#[allow(clippy::too_many_arguments)]
fn simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Product measure `ĥ(θ)·ĝ(ω)` on `S¹ × ℝ`. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMeasureSpec", into = "RawMeasureSpec")]
pub struct MeasureSpec {
    phase: PhaseLaw,
    frequency: FrequencyLaw,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMeasureSpec {
    phase: PhaseLaw,
    frequency: FrequencyLaw,
}

impl TryFrom<RawMeasureSpec> for MeasureSpec {
    type Error = Error;
    fn try_from(raw: RawMeasureSpec) -> Result<Self> {
        MeasureSpec::new(raw.phase, raw.frequency)
    }
}

impl From<MeasureSpec> for RawMeasureSpec {
    fn from(spec: MeasureSpec) -> Self {
        RawMeasureSpec {
            phase: spec.phase,
            frequency: spec.frequency,
        }
    }
}

impl MeasureSpec {
    /// Validates both marginals. Frequency laws without all absolute moments
    /// are rejected.
    pub fn new(phase: PhaseLaw, frequency: FrequencyLaw) -> Result<Self> {
        phase.validate()?;
        frequency.validate()?;
        if !frequency.has_all_moments() {
            return Err(frequency.moments_error());
        }
        Ok(Self { phase, frequency })
    }

    pub fn phase(&self) -> &PhaseLaw {
        &self.phase
    }

    pub fn frequency(&self) -> &FrequencyLaw {
        &self.frequency
    }

    pub fn has_density(&self) -> bool {
        self.phase.density(0.0).is_some() && self.frequency.density(0.0).is_some()
    }

    /// Joint density `ĥ(θ)·ĝ(ω)`.
    pub fn density(&self, theta: f64, omega: f64) -> Result<f64> {
        match (self.phase.density(theta), self.frequency.density(omega)) {
            (Some(p), Some(f)) => Ok(p * f),
            _ => Err(Error::Unsupported(
                "measure has atoms and therefore no density".into(),
            )),
        }
    }

    pub fn absolute_moment(&self, n: u32) -> Result<f64> {
        self.frequency.absolute_moment(n)
    }

    pub fn carleman_check(&self, n_terms: usize) -> Result<CarlemanReport> {
        self.frequency.carleman_check(n_terms)
    }

    /// One `(θ, ω)` draw from `h`.
    pub fn sample_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(f64, f64)> {
        let theta = self.phase.sample(rng);
        let omega = self.frequency.sample(rng)?;
        Ok((theta, omega))
    }

    /// `n` i.i.d. pairs drawn from the given generator.
    pub fn sample_pairs_with<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<(f64, f64)>> {
        (0..n).map(|_| self.sample_pair(rng)).collect()
    }
}

/// `n` i.i.d. draws from `spec`; a pure function of `(spec, n, seed)`.
pub fn sample_pairs(spec: &MeasureSpec, n: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    spec.sample_pairs_with(n, &mut rng::seeded(seed))
}

/// A weighted node of a discretized measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub theta: f64,
    pub omega: f64,
    pub weight: f64,
}

/// Finite weighted node set standing in for `∫∫ · dh`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedMeasure {
    nodes: Vec<Node>,
    source: Option<MeasureSpec>,
    grid: Option<(usize, usize)>,
}

impl DiscretizedMeasure {
    /// Arbitrary nodes, e.g. a particle sample with weights `1/N`.
    pub fn from_nodes(nodes: Vec<Node>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidSpec("discretization has no nodes".into()));
        }
        if nodes
            .iter()
            .any(|n| !(n.theta.is_finite() && n.omega.is_finite() && n.weight.is_finite()) || n.weight < 0.0)
        {
            return Err(Error::InvalidSpec(
                "discretization nodes need finite values and nonnegative weights".into(),
            ));
        }
        let total: f64 = nodes.iter().map(|n| n.weight).sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidSpec(format!("node weights sum to {total}, not 1")));
        }
        Ok(Self {
            nodes,
            source: None,
            grid: None,
        })
    }

    /// Equal-weight particles.
    pub fn from_particles(pairs: &[(f64, f64)]) -> Result<Self> {
        let w = 1.0 / pairs.len() as f64;
        Self::from_nodes(
            pairs
                .iter()
                .map(|&(theta, omega)| Node { theta, omega, weight: w })
                .collect(),
        )
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn source(&self) -> Option<&MeasureSpec> {
        self.source.as_ref()
    }

    /// `(frequency nodes, phase nodes)` of a tensor-product discretization.
    /// Nodes are stored frequency-major.
    pub fn grid_shape(&self) -> Option<(usize, usize)> {
        self.grid
    }

    /// `Σ_q w_q a(θ_q, ω_q)`.
    pub fn integrate(&self, a: impl Fn(f64, f64) -> f64) -> f64 {
        self.nodes.iter().map(|n| n.weight * a(n.theta, n.omega)).sum()
    }
}

/// Tensor grid: Gauss nodes of `ĝ` (from its Jacobi matrix) times equispaced
/// phase nodes weighted by `ĥ`. Atom laws contribute their atoms unchanged.
pub fn build_discretization(spec: &MeasureSpec, n_omega: usize, n_theta: usize) -> Result<DiscretizedMeasure> {
    if n_omega == 0 || n_theta == 0 {
        return Err(Error::InvalidArgument(
            "discretization needs n_omega >= 1 and n_theta >= 1".into(),
        ));
    }
    let freq: Vec<(f64, f64)> = match spec.frequency() {
        FrequencyLaw::Atoms { atoms } => atoms.clone(),
        g => {
            let coeffs = orthopoly::recurrence_coefficients(g, n_omega - 1)?;
            orthopoly::gauss_nodes(&coeffs, n_omega)?
                .into_iter()
                .map(|q| (q.x, q.w))
                .collect()
        }
    };
    let phase = spec.phase().discretize(n_theta);

    let mut nodes = Vec::with_capacity(freq.len() * phase.len());
    for &(omega, wf) in &freq {
        for &(theta, wp) in &phase {
            nodes.push(Node {
                theta,
                omega,
                weight: wf * wp,
            });
        }
    }
    let total: f64 = nodes.iter().map(|n| n.weight).sum();
    nodes.iter_mut().for_each(|n| n.weight /= total);
    let mut disc = DiscretizedMeasure::from_nodes(nodes)?;
    disc.source = Some(spec.clone());
    disc.grid = Some((freq.len(), phase.len()));
    Ok(disc)
}
