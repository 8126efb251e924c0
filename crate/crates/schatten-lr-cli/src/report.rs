//! Result schemas: per-trial JSON, trace CSV, and aggregate CSV.
//!
//! Timing lives only in the `wall_ms` fields (JSON) and the `wall_ms`
//! column (aggregate CSV); everything else is byte-identical across runs
//! with the same seed.

use schatten_lr::metrics::EvalReport;
use schatten_lr::solvers::{RecoveryResult, SolverStatus, SolverTrace};
use serde::Serialize;
use std::fmt::Write as _;
use std::io;
use std::path::Path;

#[derive(Debug, Clone, Serialize)]
pub struct InstanceInfo {
    pub rows: usize,
    pub cols: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sampling_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_factor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spike_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub missing_fraction: Option<f64>,
    pub observed: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverInfo {
    pub name: String,
    pub inner_rank: usize,
    pub mu: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub loss: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    pub max_iters: usize,
    pub seed: u64,
}

/// One trial's result file.
#[derive(Debug, Clone, Serialize)]
pub struct TrialReport {
    pub instance: InstanceInfo,
    pub solver: SolverInfo,
    pub status: SolverStatus,
    pub iterations: usize,
    pub kkt_residual: f64,
    pub metrics: EvalReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub baseline_rse: Option<f64>,
    pub trace_path: String,
    /// Wall-clock duration; excluded from determinism comparisons.
    pub wall_ms: u128,
}

pub fn status_str(status: SolverStatus) -> &'static str {
    match status {
        SolverStatus::Converged => "converged",
        SolverStatus::MaxIters => "max-iters",
    }
}

/// Renders a trace in the fixed CSV schema; inapplicable cells stay empty.
pub fn trace_to_csv(trace: &SolverTrace) -> String {
    let mut out = String::from("iter,objective,feasibility,step_u,step_v,step_w,beta,iterate_delta\n");
    let fmt_opt = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
    for (k, row) in trace.rows.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            k + 1,
            row.objective,
            fmt_opt(row.feasibility),
            row.step_u,
            row.step_v,
            fmt_opt(row.step_w),
            fmt_opt(row.beta),
            row.iterate_delta,
        );
    }
    out
}

/// Mean/standard-deviation aggregate over the trial reports.
pub fn aggregate_csv(reports: &[TrialReport]) -> String {
    let rses: Vec<f64> = reports.iter().filter_map(|r| r.metrics.rse).collect();
    let iters: Vec<f64> = reports.iter().map(|r| r.iterations as f64).collect();
    let walls: Vec<f64> = reports.iter().map(|r| r.wall_ms as f64).collect();
    let base: Vec<f64> = reports.iter().filter_map(|r| r.baseline_rse).collect();
    let mean = |v: &[f64]| {
        if v.is_empty() {
            f64::NAN
        } else {
            v.iter().sum::<f64>() / v.len() as f64
        }
    };
    let std = |v: &[f64]| {
        if v.len() < 2 {
            0.0
        } else {
            let m = mean(v);
            (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
        }
    };
    let opt = |x: f64| if x.is_nan() { String::new() } else { format!("{x}") };
    let mut out =
        String::from("trials,mean_rse,std_rse,mean_baseline_rse,mean_iterations,mean_wall_ms\n");
    let _ = writeln!(
        out,
        "{},{},{},{},{},{}",
        reports.len(),
        opt(mean(&rses)),
        opt(std(&rses)),
        opt(mean(&base)),
        mean(&iters),
        mean(&walls),
    );
    out
}

/// Writes atomically: temp file in the same directory, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, &text)
}

pub fn solver_info_palm(
    name: &str,
    cfg: &schatten_lr::solvers::PalmConfig,
) -> SolverInfo {
    SolverInfo {
        name: name.to_string(),
        inner_rank: cfg.inner_rank,
        mu: cfg.mu,
        loss: None,
        beta0: None,
        rho: None,
        eps: None,
        rel_tol: Some(cfg.rel_tol),
        max_iters: cfg.max_iters,
        seed: cfg.seed,
    }
}

pub fn solver_info_ladm(
    name: &str,
    cfg: &schatten_lr::solvers::LadmConfig,
) -> SolverInfo {
    SolverInfo {
        name: name.to_string(),
        inner_rank: cfg.inner_rank,
        mu: cfg.mu,
        loss: Some(
            match cfg.loss {
                schatten_lr::solvers::Loss::L1 => "l1",
                schatten_lr::solvers::Loss::LHalf => "lhalf",
            }
            .to_string(),
        ),
        beta0: Some(cfg.beta0),
        rho: Some(cfg.rho),
        eps: Some(cfg.eps),
        rel_tol: None,
        max_iters: cfg.max_iters,
        seed: cfg.seed,
    }
}

/// Minimal summary of a finished solve, shared by the subcommands.
pub fn base_report(
    instance: InstanceInfo,
    solver: SolverInfo,
    result: &RecoveryResult,
    trace_path: String,
    wall_ms: u128,
) -> TrialReport {
    TrialReport {
        instance,
        solver,
        status: result.status,
        iterations: result.iterations,
        kkt_residual: result.kkt_residual,
        metrics: EvalReport::default(),
        baseline_rse: None,
        trace_path,
        wall_ms,
    }
}
