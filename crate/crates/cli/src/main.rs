use clap::{Parser, Subcommand};
use lagns_cli::config::ExperimentConfig;
use lagns_cli::error::{HarnessError, Result};
use lagns_cli::experiments::{
    run_besov, run_decay, run_linear_check, run_picard, run_simulate, run_stability,
    run_visco_limit,
};
use lagns_cli::report::{write_summary, write_tables};
use lagns_core::SpectralField;
use std::path::PathBuf;
use std::process::ExitCode;

/// Pseudospectral solver and norm-analysis toolkit for 1D compressible
/// Navier-Stokes in mass-Lagrangian coordinates.
#[derive(Parser)]
#[command(name = "lagns", version, about)]
struct Cli {
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for CSV series and JSON summaries.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Worker threads for parameter sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verify the closed-form propagator against an adaptive ODE oracle.
    LinearCheck,
    /// Run one simulation with residual and Lyapunov monitors.
    Simulate,
    /// Decay-rate experiment: L2 slope and decay functionals.
    Decay,
    /// High-viscosity limit sweep against the pointwise limit ODE.
    ViscoLimit,
    /// Continuous dependence on the data: perturbation-halving ratios.
    Stability,
    /// Picard iteration: contraction diagnostics.
    Picard,
    /// One-shot Besov norm evaluation of a datum.
    Besov {
        /// Plain-text file with one sample per line (defaults to the
        /// configured datum recipe).
        #[arg(long)]
        datum: Option<PathBuf>,
    },
}

fn load_config(cli: &Cli, expected_kind: &str) -> Result<ExperimentConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| HarnessError::Config("--config <file.toml> is required".into()))?;
    let cfg = ExperimentConfig::from_path(path)?;
    if cfg.experiment.kind != expected_kind {
        return Err(HarnessError::Config(format!(
            "config declares experiment kind '{}' but the subcommand runs '{}'",
            cfg.experiment.kind, expected_kind
        )));
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<bool> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
    }
    let out = &cli.out_dir;
    match &cli.command {
        Command::LinearCheck => {
            let cfg = load_config(cli, "linear-check")?;
            let (report, tables) = run_linear_check(&cfg)?;
            write_tables(out, &tables)?;
            write_summary(out, "linear_check", &cfg, &report, report.pass)?;
            println!(
                "linear-check: {} samples, max rel err {:.3e}, boundary jump {:.3e} -> {}",
                report.samples,
                report.max_rel_err,
                report.max_boundary_jump,
                verdict(report.pass)
            );
            Ok(report.pass)
        }
        Command::Simulate => {
            let cfg = load_config(cli, "simulate")?;
            let (report, tables) = run_simulate(&cfg)?;
            write_tables(out, &tables)?;
            write_summary(out, "simulate", &cfg, &report, report.pass)?;
            println!(
                "simulate: smallness {:.3e}, X2 {:.6e} (data {:.6e}), max residuals {:.3e}/{:.3e}",
                report.smallness_ratio,
                report.x2,
                report.x20,
                report.max_relaxation_residual,
                report.max_heat_residual
            );
            Ok(report.pass)
        }
        Command::Decay => {
            let cfg = load_config(cli, "decay")?;
            let (report, tables) = run_decay(&cfg)?;
            write_tables(out, &tables)?;
            write_summary(out, "decay", &cfg, &report, report.pass)?;
            match &report.l2_fit {
                Some(fit) => println!(
                    "decay: L2 slope {:.4} (heat control {:.4}), high slope {:.4} -> {}",
                    fit.exponent,
                    report.heat_control_fit.as_ref().map_or(f64::NAN, |f| f.exponent),
                    report.high_freq_fit.as_ref().map_or(f64::NAN, |f| f.exponent),
                    verdict(report.pass)
                ),
                None => println!("decay: {}", report.status),
            }
            Ok(report.pass)
        }
        Command::ViscoLimit => {
            let cfg = load_config(cli, "visco-limit")?;
            let (report, tables) = run_visco_limit(&cfg)?;
            write_tables(out, &tables)?;
            write_summary(out, "visco_limit", &cfg, &report, report.pass)?;
            println!(
                "visco-limit: slope {:.4} (bound {:.4}), gaps decreasing: {} -> {}",
                report.error_fit.exponent,
                report.theoretical_exponent,
                report.gaps_decreasing,
                verdict(report.pass)
            );
            Ok(report.pass)
        }
        Command::Stability => {
            let cfg = load_config(cli, "stability")?;
            let (report, tables) = run_stability(&cfg)?;
            write_tables(out, &tables)?;
            write_summary(out, "stability", &cfg, &report, report.pass)?;
            println!("stability: ratios {:?} -> {}", report.ratios, verdict(report.pass));
            Ok(report.pass)
        }
        Command::Picard => {
            let cfg = load_config(cli, "picard")?;
            let (report, tables) = run_picard(&cfg)?;
            write_tables(out, &tables)?;
            write_summary(out, "picard", &cfg, &report, report.pass)?;
            println!(
                "picard: differences {:?} -> {}",
                report.differences,
                verdict(report.pass)
            );
            Ok(report.pass)
        }
        Command::Besov { datum } => {
            let cfg = load_config(cli, "besov")?;
            let field = match datum {
                Some(path) => {
                    let text = std::fs::read_to_string(path)?;
                    let samples: std::result::Result<Vec<f64>, _> = text
                        .lines()
                        .filter(|l| !l.trim().is_empty())
                        .map(|l| l.trim().parse())
                        .collect();
                    let samples =
                        samples.map_err(|e| HarnessError::Config(format!("bad datum file: {e}")))?;
                    if samples.len() != cfg.grid.n {
                        return Err(HarnessError::Config(format!(
                            "datum has {} samples, grid expects {}",
                            samples.len(),
                            cfg.grid.n
                        )));
                    }
                    Some(SpectralField::from_samples(cfg.domain_length(), samples))
                }
                None => None,
            };
            let (report, tables) = run_besov(&cfg, field.as_ref())?;
            write_tables(out, &tables)?;
            write_summary(out, "besov", &cfg, &report, report.pass)?;
            for (label, value) in &report.norms {
                println!("{label}: {value:.12e}");
            }
            println!("smallness ratio: {:.6e}", report.smallness_ratio);
            Ok(true)
        }
    }
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
