use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use sigbound::bounds::{check_assumptions, singular_bound_cluster, GatePolicy};
use sigbound::harness::{emit_trials, parse_cluster_spec, run_trials, verify, ExperimentConfig, TrialMedians};
use sigbound::kernel::{read_dmat, svd_full, write_dmat};
use sigbound::matgen::{assemble, create_sigmas};
use sigbound::precision::{demote, perturbation, rotate_blocks, PrecisionLevel};

#[derive(Parser)]
#[command(name = "sigbound", version, about = "Smallest singular values under precision demotion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a test matrix with a two-cluster spectrum and known factors.
    Gen {
        /// Configuration file with the spectrum keys s1, d1, g, d2, k1, k2.
        #[arg(long)]
        spec: PathBuf,
        /// Number of rows.
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Write the full m×m left factor instead of its first n columns.
        #[arg(long)]
        full_u: bool,
    },
    /// Round a matrix to single or half precision.
    Demote {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        level: Level,
        #[arg(long)]
        out: PathBuf,
        /// Also write E = demoted − original.
        #[arg(long)]
        emit_perturbation: Option<PathBuf>,
    },
    /// Lower bounds for the r smallest singular values of A + E, as CSV.
    Bounds {
        #[arg(long = "A")]
        a: PathBuf,
        #[arg(long = "E")]
        e: PathBuf,
        #[arg(long)]
        r: usize,
        /// Evaluate even when the assumption gates fail.
        #[arg(long)]
        force: bool,
    },
    /// Run an experiment configuration and write reports.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Use the configured size as is instead of shrinking to 64 columns.
        #[arg(long)]
        paper_scale: bool,
        /// Evaluate bounds even when the assumption gates fail.
        #[arg(long)]
        force: bool,
    },
    /// Check the perturbation invariants on one instance.
    Verify {
        #[arg(long = "A")]
        a: PathBuf,
        #[arg(long = "E")]
        e: PathBuf,
        #[arg(long)]
        r: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Level {
    Single,
    Half,
}

impl From<Level> for PrecisionLevel {
    fn from(l: Level) -> Self {
        match l {
            Level::Single => PrecisionLevel::Single,
            Level::Half => PrecisionLevel::Half,
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Gen { spec, m, seed, out, full_u } => gen(&spec, m, seed, &out, full_u),
        Command::Demote {
            input,
            level,
            out,
            emit_perturbation,
        } => {
            let a = read_dmat(&input)?;
            let demoted = demote(&a, level.into())?;
            write_dmat(&out, &demoted)?;
            if let Some(path) = emit_perturbation {
                write_dmat(&path, &perturbation(&a, &demoted)?)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Bounds { a, e, r, force } => bounds(&a, &e, r, force),
        Command::Experiment {
            config,
            out,
            paper_scale,
            force,
        } => experiment(&config, &out, paper_scale, force),
        Command::Verify { a, e, r } => {
            let ledger = verify(&read_dmat(&a)?, &read_dmat(&e)?, r)?;
            print!("{ledger}");
            Ok(if ledger.passed() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
    }
}

fn gen(spec_path: &Path, m: usize, seed: u64, out: &Path, full_u: bool) -> Result<ExitCode> {
    let text = fs::read_to_string(spec_path).with_context(|| format!("reading {}", spec_path.display()))?;
    let mut spec = parse_cluster_spec(&text, &spec_path.display().to_string())?;
    spec.seed = seed;
    let spectrum = create_sigmas(&spec)?;
    let built = assemble(&spectrum, m, seed)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    write_dmat(out.join("A.dmat"), built.a())?;
    let u = if full_u { built.factors().u().to_dense() } else { built.factors().u().thin() };
    write_dmat(out.join("U.dmat"), &u)?;
    write_dmat(out.join("V.dmat"), built.factors().v())?;
    let k1 = spectrum.n() - spectrum.split();
    let mut csv = String::from("index,value,cluster_id\n");
    for (i, s) in spectrum.sigma().iter().enumerate() {
        let _ = writeln!(csv, "{},{s:e},{}", i + 1, if i < k1 { 1 } else { 2 });
    }
    fs::write(out.join("sigma.csv"), csv).context("writing sigma.csv")?;
    Ok(ExitCode::SUCCESS)
}

fn bounds(a_path: &Path, e_path: &Path, r: usize, force: bool) -> Result<ExitCode> {
    let a = read_dmat(a_path)?;
    let e = read_dmat(e_path)?;
    let factors = svd_full(&a)?;
    let p = rotate_blocks(&factors, &e, r)?;
    let status = check_assumptions(factors.sigma(), &p)?;
    if !status.passes() && !force {
        bail!(
            "assumption gates fail (gap margin {:e}, small-cluster margin {:e}); rerun with --force to evaluate anyway",
            status.gap_margin,
            status.small_margin
        );
    }
    let report = singular_bound_cluster(factors.sigma(), &p, GatePolicy::Override)?;
    println!("j,bound,leading_j,r3_norm,r4,gap_margin,small_margin");
    for (j, (b, l)) in report.bounds.iter().zip(&report.leading).enumerate() {
        println!(
            "{},{b:e},{l:e},{:e},{:e},{:e},{:e}",
            j + 1,
            report.r3_norm,
            report.r4,
            status.gap_margin,
            status.small_margin
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn experiment(config_path: &Path, out: &Path, paper_scale: bool, force: bool) -> Result<ExitCode> {
    let mut config = ExperimentConfig::read(config_path)?;
    if !paper_scale {
        config = config.desk_scaled();
    }
    config.force_bounds |= force;
    let reports = run_trials(&config)?;
    emit_trials(&reports, out)?;
    let medians = TrialMedians::of(&reports);
    let gated = reports.iter().filter(|r| r.status.is_some_and(|s| s.passes())).count();
    let nominal = reports.iter().filter(|r| r.nominal_status.is_some_and(|s| s.passes())).count();
    println!(
        "{}: {}x{} {} trials={} median min exact={:e} double={:e} {}={:e}; gates pass in {gated}/{} (with ‖E‖ ≈ u·σmax: {nominal})",
        config.label,
        config.m,
        config.n(),
        config.level,
        reports.len(),
        medians.min_exact,
        medians.min_double,
        config.level,
        medians.min_demoted,
        reports.len(),
    );
    let mut ok = true;
    for report in &reports {
        for failure in report.invariant_failures() {
            eprintln!("seed {}: {failure}", report.seed);
            ok = false;
        }
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}
