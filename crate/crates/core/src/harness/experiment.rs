//! The convergence study: finite-N empirical moments against the continuum
//! reference, across sizes and independent trials.

use num_complex::Complex64;
use rayon::prelude::*;
use statrs::statistics::{Data, OrderStatistics};

use super::config::SimConfig;
use super::fit::fit_scaling_exponent;
use crate::continuum::CharacteristicEnsemble;
use crate::error::{Error, Result};
use crate::measures::build_discretization;
use crate::orthopoly::{recurrence_coefficients, RecurrenceCoefficients};
use crate::oscillators::{self, OscillatorState};
use crate::rng;

/// `|Ẑ^m_k(t) − Z^m_k(t)|` for one trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRow {
    pub n: usize,
    pub trial: usize,
    pub t: f64,
    pub m: usize,
    pub k: i64,
    pub err: f64,
}

/// Aggregates over trials at fixed `(N, t, m, k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryRow {
    pub n: usize,
    pub t: f64,
    pub m: usize,
    pub k: i64,
    pub rms: f64,
    /// `(1 − δ)`-quantile of `√N · err`.
    pub quantile_c: f64,
}

/// Fitted exponent `p` in `rms ≈ c N^p` at fixed `(m, k, t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitRow {
    pub m: usize,
    pub k: i64,
    pub t: f64,
    pub p: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    /// Rows in `(N, trial, t, moment)` order.
    pub errors: Vec<ErrorRow>,
    pub summary: Vec<SummaryRow>,
    /// One row per `(moment, t)` whose RMS errors are all positive.
    pub fits: Vec<FitRow>,
    pub delta: f64,
    /// `reference[i][j]`: continuum value of moment `j` at observation time `i`.
    pub reference: Vec<Vec<Complex64>>,
}

fn coefficients(cfg: &SimConfig) -> Result<RecurrenceCoefficients> {
    recurrence_coefficients(cfg.measure.frequency(), cfg.max_observed_m())
}

fn observe(
    moments: &[(usize, i64)],
    mut value: impl FnMut(usize, i64) -> Result<Complex64>,
) -> Result<Vec<Complex64>> {
    moments.iter().map(|&(m, k)| value(m, k)).collect()
}

/// Continuum values of the configured moments at each of `times`.
pub fn continuum_reference(cfg: &SimConfig, times: &[f64]) -> Result<Vec<Vec<Complex64>>> {
    let coeffs = coefficients(cfg)?;
    let h = build_discretization(&cfg.measure, cfg.discretization.n_omega, cfg.discretization.n_theta)?;
    let mut ens = CharacteristicEnsemble::new(&h, cfg.model.strength, cfg.coupling()?)?;
    let dt = cfg.dt();
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        ens.advance(t - ens.time(), dt)?;
        out.push(observe(&cfg.observables.moments, |m, k| {
            ens.continuum_moment(&coeffs, m, k)
        })?);
    }
    Ok(out)
}

fn run_trial(cfg: &SimConfig, coeffs: &RecurrenceCoefficients, cell: usize, n: usize, trial: usize, times: &[f64]) -> Result<Vec<Vec<Complex64>>> {
    let mut rng = rng::substream(cfg.seed, rng::trial_stream(cell as u32, trial as u32));
    let pairs = cfg.measure.sample_pairs_with(n, &mut rng)?;
    let mut state = OscillatorState::from_pairs(&pairs, cfg.model.strength, cfg.coupling()?)?;
    let mut out = Vec::with_capacity(times.len());
    oscillators::observe_at(&mut state, times, cfg.dt(), |_, s| {
        out.push(observe(&cfg.observables.moments, |m, k| {
            if m == 0 {
                Ok(s.phase_mode(k))
            } else {
                s.empirical_moment(coeffs, m, k)
            }
        })?);
        Ok(())
    })?;
    Ok(out)
}

/// Solves the continuum reference once, then runs every `(N, trial)` cell
/// (in parallel, each on its own random substream) and compares.
pub fn run_convergence_experiment(cfg: &SimConfig) -> Result<ConvergenceReport> {
    let ex = cfg
        .experiment
        .as_ref()
        .ok_or_else(|| Error::Config("the convergence study needs an [experiment] section".into()))?;
    let coeffs = coefficients(cfg)?;
    let reference = continuum_reference(cfg, &ex.times)?;

    let cells: Vec<(usize, usize, usize)> = ex
        .n_list
        .iter()
        .enumerate()
        .flat_map(|(cell, &n)| (0..ex.trials).map(move |trial| (cell, n, trial)))
        .collect();
    let results: Vec<Vec<Vec<Complex64>>> = cells
        .par_iter()
        .map(|&(cell, n, trial)| run_trial(cfg, &coeffs, cell, n, trial, &ex.times))
        .collect::<Result<_>>()?;

    let moments = &cfg.observables.moments;
    let mut errors = Vec::with_capacity(cells.len() * ex.times.len() * moments.len());
    for (&(_, n, trial), values) in cells.iter().zip(&results) {
        for (i, &t) in ex.times.iter().enumerate() {
            for (j, &(m, k)) in moments.iter().enumerate() {
                errors.push(ErrorRow {
                    n,
                    trial,
                    t,
                    m,
                    k,
                    err: (values[i][j] - reference[i][j]).norm(),
                });
            }
        }
    }

    let mut summary = Vec::new();
    for &n in &ex.n_list {
        for &t in &ex.times {
            for &(m, k) in moments {
                let errs: Vec<f64> = errors
                    .iter()
                    .filter(|r| r.n == n && r.t == t && r.m == m && r.k == k)
                    .map(|r| r.err)
                    .collect();
                let rms = (errs.iter().map(|e| e * e).sum::<f64>() / errs.len() as f64).sqrt();
                let scaled: Vec<f64> = errs.iter().map(|e| e * (n as f64).sqrt()).collect();
                let quantile_c = Data::new(scaled).quantile(1.0 - ex.delta);
                summary.push(SummaryRow { n, t, m, k, rms, quantile_c });
            }
        }
    }

    let mut fits = Vec::new();
    if ex.n_list.len() >= 3 {
        for &(m, k) in moments {
            for &t in &ex.times {
                let pairs: Vec<(usize, f64)> = summary
                    .iter()
                    .filter(|r| r.t == t && r.m == m && r.k == k)
                    .map(|r| (r.n, r.rms))
                    .collect();
                if pairs.iter().all(|p| p.1 > 0.0) {
                    let fit = fit_scaling_exponent(&pairs)?;
                    fits.push(FitRow { m, k, t, p: fit.p, stderr: fit.stderr });
                }
            }
        }
    }

    Ok(ConvergenceReport {
        errors,
        summary,
        fits,
        delta: ex.delta,
        reference,
    })
}
