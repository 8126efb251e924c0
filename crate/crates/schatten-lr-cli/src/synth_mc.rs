//! `synth-mc`: matrix completion on generated low-rank instances.

use crate::report::{self, InstanceInfo, TrialReport};
use crate::runner;
use crate::{CliError, SolverChoice};
use schatten_lr::data::SyntheticInstance;
use schatten_lr::metrics::{c1_constant, c3_constant, c3_lower_bound, rse};
use schatten_lr::solvers::{palm_bitr_mc, palm_tritr_mc, trace_baseline_mc, PalmConfig};
use std::path::{Path, PathBuf};
use std::time::Instant;

pub struct SynthMcArgs {
    pub m: usize,
    pub n: usize,
    pub rank: usize,
    pub sr: f64,
    pub nf: f64,
    pub solver: SolverChoice,
    pub trials: usize,
    pub seed: u64,
    pub inner_rank: Option<usize>,
    pub mu: Option<f64>,
    pub max_iters: usize,
    pub rel_tol: f64,
    pub baseline_iters: usize,
    pub no_baseline: bool,
    pub out: PathBuf,
}

/// Default inner rank when the true rank is known.
pub fn default_inner_rank(rank: usize) -> usize {
    ((1.25 * rank as f64).floor() as usize).max(1)
}

/// Loss weight default: light shrinkage for exact data, moderate under
/// noise.
pub fn default_mu(nf: f64) -> f64 {
    if nf == 0.0 {
        1.0
    } else {
        5.0
    }
}

/// Threshold for the trace-norm baseline, calibrated to the expected
/// spectral norm of the sampled noise.
pub fn baseline_mu(m: usize, n: usize, sr: f64, nf: f64) -> f64 {
    let spectral = nf * ((m as f64).sqrt() + (n as f64).sqrt()) * sr.sqrt();
    if spectral > 0.0 {
        2.0 * spectral
    } else {
        1e-6
    }
}

pub fn run(args: &SynthMcArgs) -> Result<(), CliError> {
    std::fs::create_dir_all(&args.out)
        .map_err(|e| CliError::runtime(format!("cannot create {}: {e}", args.out.display())))?;
    let inner_rank = args.inner_rank.unwrap_or_else(|| default_inner_rank(args.rank));
    let mu = args.mu.unwrap_or_else(|| default_mu(args.nf));

    let reports = runner::run_trials(args.trials, |trial| {
        run_trial(args, trial, inner_rank, mu)
    });
    let mut failures = 0;
    let mut ok = Vec::new();
    for (i, r) in reports.into_iter().enumerate() {
        match r {
            Ok(rep) => ok.push(rep),
            Err(e) => {
                eprintln!("trial {i} failed: {e}");
                failures += 1;
            }
        }
    }
    report::write_atomic(&args.out.join("aggregate.csv"), &report::aggregate_csv(&ok))
        .map_err(|e| CliError::runtime(format!("write aggregate: {e}")))?;
    if !ok.is_empty() {
        println!(
            "synth-mc: {} trial(s), mean RSE {:.6}",
            ok.len(),
            ok.iter().filter_map(|r| r.metrics.rse).sum::<f64>() / ok.len() as f64
        );
    }
    if failures > 0 && ok.is_empty() {
        return Err(CliError::runtime("all trials failed".to_string()));
    }
    Ok(())
}

fn run_trial(
    args: &SynthMcArgs,
    trial: usize,
    inner_rank: usize,
    mu: f64,
) -> Result<TrialReport, CliError> {
    let started = Instant::now();
    let seed = args.seed.wrapping_add(trial as u64);
    let inst = SyntheticInstance::generate(args.m, args.n, args.rank, args.sr, args.nf, seed)
        .map_err(CliError::from)?;

    let mut cfg = PalmConfig::new(inner_rank, mu);
    cfg.max_iters = args.max_iters;
    cfg.rel_tol = args.rel_tol;
    cfg.seed = seed;
    let (name, result) = match args.solver {
        SolverChoice::Bitr => ("palm-bitr", palm_bitr_mc(&inst.observations, &cfg)?),
        SolverChoice::Tritr => ("palm-tritr", palm_tritr_mc(&inst.observations, &cfg)?),
    };

    let trace_name = format!("trial_{trial:03}_trace.csv");
    report::write_atomic(
        &args.out.join(&trace_name),
        &report::trace_to_csv(&result.trace),
    )
    .map_err(|e| CliError::runtime(format!("write trace: {e}")))?;

    let instance = InstanceInfo {
        rows: args.m,
        cols: args.n,
        rank: Some(args.rank),
        sampling_ratio: Some(args.sr),
        noise_factor: Some(args.nf),
        spike_fraction: None,
        missing_fraction: None,
        observed: inst.observations.len(),
        seed,
    };
    let mut trial_report = report::base_report(
        instance,
        report::solver_info_palm(name, &cfg),
        &result,
        trace_name,
        0,
    );
    trial_report.metrics.rse = Some(rse(&result.recovered(), &inst.ground_truth)?);
    if let Some(fp) = result.factors.as_pair() {
        if let Ok(c3) = c3_constant(&inst.observations, fp) {
            trial_report.metrics.c3 = Some(c3);
            trial_report.metrics.c3_lower_bound =
                Some(c3_lower_bound(mu, inst.observations.values_norm()));
        }
        if let Ok(c1) = c1_constant(&inst.observations, fp) {
            trial_report.metrics.c1 = Some(c1);
        }
    }
    if !args.no_baseline {
        let base = trace_baseline_mc(
            &inst.observations,
            baseline_mu(args.m, args.n, args.sr, args.nf),
            args.baseline_iters,
        )?;
        trial_report.baseline_rse = Some(rse(&base, &inst.ground_truth)?);
    }
    trial_report.wall_ms = started.elapsed().as_millis();
    write_trial(&args.out, trial, &trial_report)?;
    Ok(trial_report)
}

pub fn write_trial(out: &Path, trial: usize, report: &TrialReport) -> Result<(), CliError> {
    report::write_json(&out.join(format!("trial_{trial:03}.json")), report)
        .map_err(|e| CliError::runtime(format!("write trial json: {e}")))
}
