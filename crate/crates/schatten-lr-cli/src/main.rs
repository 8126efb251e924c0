//! Experiment harness for factored Schatten quasi-norm recovery.
//!
//! Subcommands: `synth-mc` (matrix completion on generated instances),
//! `rpca` (robust low-rank + sparse separation), `cf` (collaborative
//! filtering over a ratings file), `verify` (quasi-norm certification
//! battery). Exit codes: 0 success, 1 runtime or solver failure, 2 usage
//! error.

mod cf;
mod report;
mod rpca;
mod runner;
mod synth_mc;
mod verify;

use clap::{Parser, Subcommand, ValueEnum};
use schatten_lr::data::RatingsFormat;
use schatten_lr::solvers::Loss;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug)]
pub struct CliError(String);

impl CliError {
    fn runtime(msg: String) -> Self {
        CliError(msg)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<schatten_lr::Error> for CliError {
    fn from(e: schatten_lr::Error) -> Self {
        CliError(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverChoice {
    /// Two-factor penalty (Schatten-1/2 surrogate).
    Bitr,
    /// Three-factor penalty (Schatten-1/3 surrogate).
    Tritr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LossChoice {
    L1,
    Lhalf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatChoice {
    /// `user::item::rating[::timestamp]`
    Doublecolon,
    /// Comma-separated.
    Comma,
    /// Tab-separated.
    Tab,
}

fn parse_sampling_ratio(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if v > 0.0 && v <= 1.0 {
        Ok(v)
    } else {
        Err(format!("sampling ratio must lie in (0, 1], got {v}"))
    }
}

fn parse_fraction(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if (0.0..1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("fraction must lie in [0, 1), got {v}"))
    }
}

fn parse_open_fraction(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("fraction must lie in (0, 1), got {v}"))
    }
}

fn parse_non_negative(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if v >= 0.0 {
        Ok(v)
    } else {
        Err(format!("value must be non-negative, got {v}"))
    }
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("value must be positive, got {v}"))
    }
}

/// Comma-separated rank list, newtyped so clap takes it as one value.
#[derive(Debug, Clone)]
struct DGrid(Vec<usize>);

fn parse_d_grid(s: &str) -> Result<DGrid, String> {
    let grid: Result<Vec<usize>, _> = s.split(',').map(|t| t.trim().parse::<usize>()).collect();
    match grid {
        Ok(g) if !g.is_empty() && g.iter().all(|&d| d > 0) => Ok(DGrid(g)),
        _ => Err(format!("'{s}' is not a comma-separated list of positive ranks")),
    }
}

#[derive(Parser)]
#[command(
    name = "schatten-lr",
    about = "Low-rank recovery experiments with bi-trace / tri-trace quasi-norm penalties",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Matrix completion on synthetic low-rank instances.
    SynthMc {
        #[arg(long, default_value_t = 100)]
        m: usize,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 5)]
        rank: usize,
        /// Sampling ratio |observed| / (m n), in (0, 1].
        #[arg(long, value_parser = parse_sampling_ratio, default_value_t = 0.3)]
        sr: f64,
        /// Noise factor on the observed entries.
        #[arg(long, value_parser = parse_non_negative, default_value_t = 0.0)]
        nf: f64,
        #[arg(long, value_enum, default_value_t = SolverChoice::Bitr)]
        solver: SolverChoice,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Inner rank d; defaults to floor(1.25 rank).
        #[arg(long)]
        d: Option<usize>,
        /// Loss weight; defaults to 1 (noiseless) or 5 (noisy).
        #[arg(long, value_parser = parse_positive)]
        mu: Option<f64>,
        #[arg(long, default_value_t = 500)]
        max_iters: usize,
        #[arg(long, value_parser = parse_positive, default_value_t = 1e-4)]
        rel_tol: f64,
        #[arg(long, default_value_t = 400)]
        baseline_iters: usize,
        /// Skip the trace-norm baseline comparison run.
        #[arg(long)]
        no_baseline: bool,
        #[arg(long, default_value = "out/synth-mc")]
        out: PathBuf,
    },
    /// Robust separation of a low-rank part and sparse corruption.
    Rpca {
        #[arg(long, default_value_t = 256)]
        m: usize,
        #[arg(long, default_value_t = 256)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        rank: usize,
        /// Probability an observed cell carries a spike.
        #[arg(long, value_parser = parse_fraction, default_value_t = 0.05)]
        spike_frac: f64,
        #[arg(long, value_parser = parse_positive, default_value_t = 5.0)]
        spike_mag: f64,
        /// Fraction of cells dropped from the observation set.
        #[arg(long, value_parser = parse_fraction, default_value_t = 0.0)]
        missing: f64,
        #[arg(long, value_enum, default_value_t = LossChoice::L1)]
        loss: LossChoice,
        #[arg(long, value_enum, default_value_t = SolverChoice::Bitr)]
        solver: SolverChoice,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Inner rank d; defaults to floor(1.25 rank).
        #[arg(long)]
        d: Option<usize>,
        /// Loss weight; defaults to sqrt(max(m, n)).
        #[arg(long, value_parser = parse_positive)]
        mu: Option<f64>,
        #[arg(long, default_value_t = 3000)]
        max_iters: usize,
        /// Separate this dense matrix file instead of a generated instance.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value = "out/rpca")]
        out: PathBuf,
    },
    /// Collaborative filtering on a ratings file.
    Cf {
        /// Ratings file: `user<sep>item<sep>rating[<sep>timestamp]` lines.
        #[arg(long)]
        ratings: PathBuf,
        #[arg(long, value_enum, default_value_t = FormatChoice::Doublecolon)]
        format: FormatChoice,
        #[arg(long, value_parser = parse_open_fraction, default_value_t = 0.9)]
        train_frac: f64,
        /// Comma-separated inner ranks to sweep.
        #[arg(long, value_parser = parse_d_grid, default_value = "5,10,15,20")]
        d_grid: DGrid,
        #[arg(long, value_parser = parse_positive, default_value_t = 100.0)]
        mu: f64,
        #[arg(long, value_enum, default_value_t = SolverChoice::Bitr)]
        solver: SolverChoice,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 300)]
        max_iters: usize,
        #[arg(long, default_value = "out/cf")]
        out: PathBuf,
    },
    /// Numerical certification battery for the quasi-norm identities.
    Verify {
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 20)]
        max_dim: usize,
        #[arg(long, default_value_t = 100)]
        factorizations: usize,
        #[arg(long, default_value_t = 0x5eed)]
        seed: u64,
        /// Test hook: perturb the bi-trace evaluations by 1e-3 so the
        /// battery must fail.
        #[arg(long)]
        inject_fault: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::SynthMc {
            m,
            n,
            rank,
            sr,
            nf,
            solver,
            trials,
            seed,
            d,
            mu,
            max_iters,
            rel_tol,
            baseline_iters,
            no_baseline,
            out,
        } => synth_mc::run(&synth_mc::SynthMcArgs {
            m,
            n,
            rank,
            sr,
            nf,
            solver,
            trials,
            seed,
            inner_rank: d,
            mu,
            max_iters,
            rel_tol,
            baseline_iters,
            no_baseline,
            out,
        }),
        Command::Rpca {
            m,
            n,
            rank,
            spike_frac,
            spike_mag,
            missing,
            loss,
            solver,
            trials,
            seed,
            d,
            mu,
            max_iters,
            input,
            out,
        } => rpca::run(&rpca::RpcaArgs {
            m,
            n,
            rank,
            spike_frac,
            spike_mag,
            missing,
            loss: match loss {
                LossChoice::L1 => Loss::L1,
                LossChoice::Lhalf => Loss::LHalf,
            },
            solver,
            trials,
            seed,
            inner_rank: d,
            mu,
            max_iters,
            input,
            out,
        }),
        Command::Cf {
            ratings,
            format,
            train_frac,
            d_grid,
            mu,
            solver,
            seed,
            max_iters,
            out,
        } => cf::run(&cf::CfArgs {
            ratings,
            format: match format {
                FormatChoice::Doublecolon => RatingsFormat::DoubleColon,
                FormatChoice::Comma => RatingsFormat::Comma,
                FormatChoice::Tab => RatingsFormat::Tab,
            },
            train_fraction: train_frac,
            d_grid: d_grid.0,
            mu,
            solver,
            seed,
            max_iters,
            out,
        }),
        Command::Verify {
            trials,
            max_dim,
            factorizations,
            seed,
            inject_fault,
        } => match verify::run(&verify::VerifyArgs {
            trials,
            max_dim,
            factorizations,
            seed,
            inject_fault,
        }) {
            Ok(true) => Ok(()),
            Ok(false) => Err(CliError::runtime("certification failed".to_string())),
            Err(e) => Err(e),
        },
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
