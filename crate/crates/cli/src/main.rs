use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kuramoto_moments::continuum::integrate_characteristics;
use kuramoto_moments::harness::{self, SimConfig};
use kuramoto_moments::io::{self, MomentColumn};
use kuramoto_moments::measures::{build_discretization, sample_pairs};
use kuramoto_moments::momentsys::{init_lattice, integrate_moments};
use kuramoto_moments::orthopoly::recurrence_coefficients;
use kuramoto_moments::oscillators::{integrate, OscillatorState};
use kuramoto_moments::{Error, Result};

/// Kuramoto oscillators, their continuum limit and the moments system.
#[derive(Parser)]
#[command(name = "kmoments", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Overrides the configured seed.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Overrides the configured output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// One finite-N run; writes trajectory.csv.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Number of oscillators (default: largest size in [experiment]).
        #[arg(long)]
        n: Option<usize>,
    },
    /// Continuum reference run along characteristics; writes trajectory.csv.
    Continuum {
        #[command(flatten)]
        common: Common,
    },
    /// Truncated moments-system run; writes lattice.csv.
    Moments {
        #[command(flatten)]
        common: Common,
    },
    /// Finite-N versus continuum convergence study; writes errors.csv,
    /// summary.csv and fit.csv.
    Converge {
        #[command(flatten)]
        common: Common,
    },
    /// Recurrence coefficients of the frequency law; writes recurrence.csv.
    Orthopoly {
        #[command(flatten)]
        common: Common,
    },
}

fn load(common: &Common) -> Result<(SimConfig, PathBuf)> {
    let mut cfg = SimConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.output_dir.clone_from(out);
    }
    let out = cfg.output_dir.clone();
    harness::write_effective_config(&cfg, &out)?;
    Ok((cfg, out))
}

fn extra_columns(cfg: &SimConfig) -> Vec<(usize, i64)> {
    cfg.observables
        .moments
        .iter()
        .copied()
        .filter(|&mk| mk != (0, 1))
        .collect()
}

fn simulate(common: &Common, n: Option<usize>) -> Result<Vec<PathBuf>> {
    let (cfg, out) = load(common)?;
    let n = match n.or_else(|| cfg.experiment.as_ref().and_then(|e| e.n_list.last().copied())) {
        Some(n) => n,
        None => return Err(Error::Config("simulate needs --n or an [experiment] n_list".into())),
    };
    let pairs = sample_pairs(&cfg.measure, n, cfg.seed)?;
    let state = OscillatorState::from_pairs(&pairs, cfg.model.strength, cfg.coupling()?)?;
    let traj = integrate(&state, cfg.integrator.t_end, cfg.dt(), cfg.integrator.stride)?;
    let extra = extra_columns(&cfg);
    let coeffs = recurrence_coefficients(cfg.measure.frequency(), cfg.max_observed_m())?;
    let mut columns = Vec::new();
    for (m, k) in extra {
        let values = traj
            .snapshots
            .iter()
            .map(|theta| {
                OscillatorState::new(theta.clone(), state.omega().to_vec(), cfg.model.strength, cfg.coupling()?)?
                    .empirical_moment(&coeffs, m, k)
            })
            .collect::<Result<_>>()?;
        columns.push(MomentColumn { m, k, values });
    }
    let path = out.join("trajectory.csv");
    io::write_trajectory(&path, &traj.times, &traj.order, &columns, None)?;
    Ok(vec![path])
}

fn continuum(common: &Common) -> Result<Vec<PathBuf>> {
    let (cfg, out) = load(common)?;
    let h = build_discretization(&cfg.measure, cfg.discretization.n_omega, cfg.discretization.n_theta)?;
    let traj = integrate_characteristics(
        &h,
        cfg.model.strength,
        &cfg.coupling()?,
        cfg.integrator.t_end,
        cfg.dt(),
        cfg.integrator.stride,
    )?;
    let coeffs = recurrence_coefficients(cfg.measure.frequency(), cfg.max_observed_m())?;
    let mut columns = Vec::new();
    for (m, k) in extra_columns(&cfg) {
        let values = (0..traj.len())
            .map(|i| traj.ensemble_at(i).continuum_moment(&coeffs, m, k))
            .collect::<Result<_>>()?;
        columns.push(MomentColumn { m, k, values });
    }
    let path = out.join("trajectory.csv");
    io::write_trajectory(&path, &traj.times, &traj.order, &columns, Some("continuum"))?;
    Ok(vec![path])
}

fn moments(common: &Common) -> Result<Vec<PathBuf>> {
    let (cfg, out) = load(common)?;
    let t = cfg.truncation;
    let h = build_discretization(&cfg.measure, cfg.discretization.n_omega, cfg.discretization.n_theta)?;
    let coeffs = recurrence_coefficients(cfg.measure.frequency(), t.m_max)?;
    let lat = init_lattice(&h, &coeffs, t.m_max, t.k_max, cfg.model.strength, cfg.coupling()?)?;
    let series = integrate_moments(&lat, cfg.integrator.t_end, cfg.dt(), cfg.integrator.stride)?;
    let path = out.join("lattice.csv");
    io::write_lattice_series(&path, &series)?;
    Ok(vec![path])
}

fn converge(common: &Common) -> Result<Vec<PathBuf>> {
    let (cfg, out) = load(common)?;
    let report = harness::run_convergence_experiment(&cfg)?;
    for f in &report.fits {
        eprintln!("m={} k={} t={}: p = {:.4} ± {:.4}", f.m, f.k, f.t, f.p, f.stderr);
    }
    harness::emit_report(&report, &out)
}

fn orthopoly(common: &Common) -> Result<Vec<PathBuf>> {
    let (cfg, out) = load(common)?;
    let coeffs = recurrence_coefficients(cfg.measure.frequency(), cfg.truncation.m_max)?;
    let path = out.join("recurrence.csv");
    io::write_recurrence(&path, &coeffs)?;
    Ok(vec![path])
}

fn report(paths: &[PathBuf]) {
    for p in paths {
        println!("{}", Path::new(p).display());
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate { common, n } => simulate(common, *n),
        Command::Continuum { common } => continuum(common),
        Command::Moments { common } => moments(common),
        Command::Converge { common } => converge(common),
        Command::Orthopoly { common } => orthopoly(common),
    };
    match result {
        Ok(paths) => {
            report(&paths);
            ExitCode::SUCCESS
        }
        Err(e) => {
            let category = e.category();
            eprintln!("kmoments: {} error: {e}", category.as_str());
            ExitCode::from(category.exit_code() as u8)
        }
    }
}
