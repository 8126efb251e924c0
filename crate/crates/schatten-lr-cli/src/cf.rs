//! `cf`: collaborative filtering on a ratings file, sweeping the inner rank.

use crate::report;
use crate::{CliError, SolverChoice};
use schatten_lr::data::{load_ratings, split_ratings, RatingModel, RatingsFormat};
use schatten_lr::metrics::rmse;
use schatten_lr::solvers::{palm_bitr_mc, palm_tritr_mc, PalmConfig};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

pub struct CfArgs {
    pub ratings: PathBuf,
    pub format: RatingsFormat,
    pub train_fraction: f64,
    pub d_grid: Vec<usize>,
    pub mu: f64,
    pub solver: SolverChoice,
    pub seed: u64,
    pub max_iters: usize,
    pub out: PathBuf,
}

#[derive(Serialize)]
struct CfSummary {
    num_users: usize,
    num_items: usize,
    train_size: usize,
    test_size: usize,
    train_mean: f64,
    mean_predictor_rmse: f64,
    results: Vec<CfPoint>,
    wall_ms: u128,
}

#[derive(Serialize)]
struct CfPoint {
    d: usize,
    rmse: f64,
    iterations: usize,
}

pub fn run(args: &CfArgs) -> Result<(), CliError> {
    let started = Instant::now();
    std::fs::create_dir_all(&args.out)
        .map_err(|e| CliError::runtime(format!("cannot create {}: {e}", args.out.display())))?;
    let triples = load_ratings(&args.ratings, args.format)?;
    let ds = split_ratings(&triples, args.train_fraction, args.seed)?;
    let truths = ds.test.values();
    let mean_predictor_rmse = rmse(&vec![ds.train_mean(); truths.len()], &truths)?;
    let centered = ds.centered_train()?;

    let mut results = Vec::new();
    for &d in &args.d_grid {
        let mut cfg = PalmConfig::new(d, args.mu);
        cfg.max_iters = args.max_iters;
        cfg.seed = args.seed;
        let result = match args.solver {
            SolverChoice::Bitr => palm_bitr_mc(&centered, &cfg)?,
            SolverChoice::Tritr => palm_tritr_mc(&centered, &cfg)?,
        };
        let model = RatingModel::new(&ds, result.recovered());
        let preds = model.predict_all(&ds.test);
        let score = rmse(&preds, &truths)?;
        println!("cf d={d}: rmse {score:.6}");
        results.push(CfPoint {
            d,
            rmse: score,
            iterations: result.iterations,
        });
    }

    let mut csv = String::from("d,rmse\n");
    for p in &results {
        let _ = writeln!(csv, "{},{}", p.d, p.rmse);
    }
    report::write_atomic(&args.out.join("rmse_vs_d.csv"), &csv)
        .map_err(|e| CliError::runtime(format!("write csv: {e}")))?;

    let summary = CfSummary {
        num_users: ds.num_users,
        num_items: ds.num_items,
        train_size: ds.train.len(),
        test_size: ds.test.len(),
        train_mean: ds.train_mean(),
        mean_predictor_rmse,
        results,
        wall_ms: started.elapsed().as_millis(),
    };
    report::write_json(&args.out.join("summary.json"), &summary)
        .map_err(|e| CliError::runtime(format!("write summary: {e}")))?;
    Ok(())
}
