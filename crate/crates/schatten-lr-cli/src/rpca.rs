//! `rpca`: robust low-rank + sparse separation with `l1` or `l1/2` losses.

use crate::report::{self, InstanceInfo};
use crate::runner;
use crate::{CliError, SolverChoice};
use schatten_lr::data::gen_spiked;
use schatten_lr::metrics::{auc, rse, support_f1};
use schatten_lr::observations::ObservationSet;
use schatten_lr::solvers::{ladm_bitr, ladm_tritr, LadmConfig, Loss};
use schatten_lr::DenseMatrix;
use std::path::PathBuf;
use std::time::Instant;

pub struct RpcaArgs {
    pub m: usize,
    pub n: usize,
    pub rank: usize,
    pub spike_frac: f64,
    pub spike_mag: f64,
    pub missing: f64,
    pub loss: Loss,
    pub solver: SolverChoice,
    pub trials: usize,
    pub seed: u64,
    pub inner_rank: Option<usize>,
    pub mu: Option<f64>,
    pub max_iters: usize,
    /// Dense matrix file to separate instead of a generated instance.
    pub input: Option<PathBuf>,
    pub out: PathBuf,
}

/// Penalty ramp start, scaled so the first shrinkage thresholds sit below
/// the data's spectral mass regardless of units.
pub fn default_beta0(obs: &ObservationSet) -> f64 {
    2.5 / obs.values_norm().max(1e-12)
}

pub fn run(args: &RpcaArgs) -> Result<(), CliError> {
    std::fs::create_dir_all(&args.out)
        .map_err(|e| CliError::runtime(format!("cannot create {}: {e}", args.out.display())))?;
    if let Some(input) = &args.input {
        let matrix = DenseMatrix::read_file(input)?;
        let one = run_separation(args, 0, args.seed, &matrix, None, None)?;
        report::write_atomic(&args.out.join("aggregate.csv"), &report::aggregate_csv(&[one]))
            .map_err(|e| CliError::runtime(format!("write aggregate: {e}")))?;
        return Ok(());
    }

    let reports = runner::run_trials(args.trials, |trial| {
        let seed = args.seed.wrapping_add(trial as u64);
        let inst = gen_spiked(
            args.m,
            args.n,
            args.rank,
            args.spike_frac,
            args.spike_mag,
            args.missing,
            seed,
        )?;
        let dense = inst.observations.to_dense();
        run_separation(
            args,
            trial,
            seed,
            &dense,
            Some(&inst.observations),
            Some((&inst.ground_truth, &inst.spike_mask)),
        )
    });
    let mut ok = Vec::new();
    let mut failures = 0;
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
    if failures > 0 && ok.is_empty() {
        return Err(CliError::runtime("all trials failed".to_string()));
    }
    Ok(())
}

fn run_separation(
    args: &RpcaArgs,
    trial: usize,
    seed: u64,
    data: &DenseMatrix,
    observations: Option<&ObservationSet>,
    truth: Option<(&DenseMatrix, &[bool])>,
) -> Result<report::TrialReport, CliError> {
    let started = Instant::now();
    // A file input counts every cell as observed.
    let full_obs;
    let obs = match observations {
        Some(o) => o,
        None => {
            let mut entries = Vec::with_capacity(data.rows() * data.cols());
            for i in 0..data.rows() {
                for j in 0..data.cols() {
                    entries.push((i, j, data.get(i, j)));
                }
            }
            full_obs = ObservationSet::new(data.rows(), data.cols(), entries)?;
            &full_obs
        }
    };

    let inner_rank = args
        .inner_rank
        .unwrap_or_else(|| crate::synth_mc::default_inner_rank(args.rank));
    let mu = args
        .mu
        .unwrap_or_else(|| (args.m.max(args.n) as f64).sqrt());
    let mut cfg = LadmConfig::new(inner_rank, mu);
    cfg.beta0 = default_beta0(obs);
    cfg.loss = args.loss;
    cfg.max_iters = args.max_iters;
    cfg.seed = seed;

    let (name, result) = match args.solver {
        SolverChoice::Bitr => ("ladm-bitr", ladm_bitr(obs, &cfg)?),
        SolverChoice::Tritr => ("ladm-tritr", ladm_tritr(obs, &cfg)?),
    };

    let low_rank = result.recovered();
    let e = result.sparse.clone().unwrap_or_default();
    // The sparse component carries the data-minus-low-rank values: -e.
    let sparse = obs.scatter(&e.iter().map(|v| -v).collect::<Vec<_>>())?;
    low_rank.write_file(&args.out.join(format!("trial_{trial:03}_low_rank.txt")))?;
    sparse.write_file(&args.out.join(format!("trial_{trial:03}_sparse.txt")))?;

    let trace_name = format!("trial_{trial:03}_trace.csv");
    report::write_atomic(
        &args.out.join(&trace_name),
        &report::trace_to_csv(&result.trace),
    )
    .map_err(|e| CliError::runtime(format!("write trace: {e}")))?;

    let instance = InstanceInfo {
        rows: data.rows(),
        cols: data.cols(),
        rank: truth.map(|_| args.rank),
        sampling_ratio: None,
        noise_factor: None,
        spike_fraction: truth.map(|_| args.spike_frac),
        missing_fraction: truth.map(|_| args.missing),
        observed: obs.len(),
        seed,
    };
    let mut rep = report::base_report(
        instance,
        report::solver_info_ladm(name, &cfg),
        &result,
        trace_name,
        0,
    );
    if let Some((ground_truth, mask)) = truth {
        rep.metrics.rse = Some(rse(&low_rank, ground_truth)?);
        let scores: Vec<f64> = e.iter().map(|v| v.abs()).collect();
        // AUC is undefined when the instance has no spikes (or only
        // spikes); the field is simply omitted then.
        if let Ok(a) = auc(&scores, mask) {
            rep.metrics.auc = Some(a);
        }
        println!(
            "rpca trial {trial}: status {} f1 {:.4}",
            report::status_str(result.status),
            support_f1(&e, mask, 1e-3)?
        );
    }
    rep.wall_ms = started.elapsed().as_millis();
    crate::synth_mc::write_trial(&args.out, trial, &rep)?;
    Ok(rep)
}
