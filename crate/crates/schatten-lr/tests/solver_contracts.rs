//! Contract tests for the PALM and LADM solvers: descent, feasibility,
//! multiplier bounds, stationarity at convergence, determinism, and the
//! exactness of every singular-value shrinkage step.

use schatten_lr::data::{gen_spiked, SyntheticInstance};
use schatten_lr::matrix::thin_svd;
use schatten_lr::metrics::{c3_constant, c3_lower_bound, rse, support_f1};
use schatten_lr::observations::ObservationSet;
use schatten_lr::prox::svt;
use schatten_lr::solvers::*;
use schatten_lr::{spectral_norm, DenseMatrix, Factors, InitMode};

fn all_zero_obs(m: usize, n: usize, count: usize) -> ObservationSet {
    let entries = (0..count).map(|k| (k / n, k % n, 0.0)).collect();
    ObservationSet::new(m, n, entries).unwrap()
}

fn assert_monotone(objectives: &[f64]) {
    for (k, w) in objectives.windows(2).enumerate() {
        assert!(
            w[1] <= w[0] + 1e-12,
            "objective rose at iteration {}: {} -> {}",
            k + 1,
            w[0],
            w[1]
        );
    }
}

fn rpca_config(obs: &ObservationSet, d: usize) -> LadmConfig {
    let mut cfg = LadmConfig::new(d, (obs.host_rows().max(obs.host_cols()) as f64).sqrt());
    cfg.beta0 = 2.5 / obs.values_norm().max(1e-12);
    cfg.max_iters = 3000;
    cfg
}

#[test]
fn palm_zero_data_converges_to_zero() {
    let obs = all_zero_obs(6, 5, 12);
    let cfg = PalmConfig::new(2, 1.0);
    let res = palm_bitr_mc(&obs, &cfg).unwrap();
    assert_eq!(res.status, SolverStatus::Converged);
    assert!(res.recovered().is_zero());
    assert_eq!(*res.trace.objectives().last().unwrap(), 0.0);

    let res3 = palm_tritr_mc(&obs, &cfg).unwrap();
    assert!(res3.recovered().is_zero());
}

#[test]
fn palm_rejects_empty_observations() {
    let obs = ObservationSet::new(4, 4, vec![]).unwrap();
    assert!(palm_bitr_mc(&obs, &PalmConfig::new(2, 1.0)).is_err());
    assert!(palm_tritr_mc(&obs, &PalmConfig::new(2, 1.0)).is_err());
    assert!(ladm_bitr(&obs, &LadmConfig::new(2, 1.0)).is_err());
    assert!(ladm_tritr(&obs, &LadmConfig::new(2, 1.0)).is_err());
}

fn rank_one_instance() -> (ObservationSet, DenseMatrix) {
    let u = DenseMatrix::from_fn(8, 1, |i, _| ((i + 1) as f64).sin());
    let v = DenseMatrix::from_fn(6, 1, |j, _| ((j + 2) as f64).cos());
    let scale = 10.0 / (u.frobenius_norm() * v.frobenius_norm());
    let d = u.matmul(&v.transpose()).scale(scale);
    let mut entries = Vec::new();
    for i in 0..8 {
        for j in 0..6 {
            entries.push((i, j, d.get(i, j)));
        }
    }
    (ObservationSet::new(8, 6, entries).unwrap(), d)
}

#[test]
fn palm_recovers_fully_observed_rank_one() {
    let (obs, d) = rank_one_instance();
    let mut cfg = PalmConfig::new(2, 1e-3);
    cfg.rel_tol = 1e-6;
    let res = palm_bitr_mc(&obs, &cfg).unwrap();
    assert!(rse(&res.recovered(), &d).unwrap() < 1e-2);
    let res3 = palm_tritr_mc(&obs, &cfg).unwrap();
    assert!(rse(&res3.recovered(), &d).unwrap() < 1e-2);
}

#[test]
fn palm_bitr_recovers_seeded_noiseless_instance() {
    let inst = SyntheticInstance::generate(50, 50, 3, 0.5, 0.0, 7).unwrap();
    let mut cfg = PalmConfig::new(3, 1.0);
    cfg.rel_tol = 1e-5;
    let res = palm_bitr_mc(&inst.observations, &cfg).unwrap();
    assert!(rse(&res.recovered(), &inst.ground_truth).unwrap() < 1e-2);
    assert_monotone(&res.trace.objectives());
}

#[test]
fn palm_solvers_agree_on_noiseless_instance() {
    let inst = SyntheticInstance::generate(50, 50, 3, 0.5, 0.0, 7).unwrap();
    let mut cfg = PalmConfig::new(3, 1.0);
    cfg.rel_tol = 1e-5;
    let two = palm_bitr_mc(&inst.observations, &cfg).unwrap();
    let three = palm_tritr_mc(&inst.observations, &cfg).unwrap();
    assert_monotone(&three.trace.objectives());
    let gap = rse(&three.recovered(), &two.recovered()).unwrap();
    assert!(gap < 0.05, "solvers disagree: cross RSE {gap}");
}

#[test]
fn palm_descent_and_stagnation_across_seeds() {
    for seed in 0..5u64 {
        let inst = SyntheticInstance::generate(40, 30, 3, 0.5, 0.1, seed).unwrap();
        let mut cfg = PalmConfig::new(4, 5.0);
        cfg.rel_tol = 1e-6;
        cfg.max_iters = 5000;
        cfg.seed = seed;
        let res = palm_bitr_mc(&inst.observations, &cfg).unwrap();
        assert_monotone(&res.trace.objectives());
        assert_eq!(res.status, SolverStatus::Converged, "seed {seed}");
        let deltas = res.trace.iterate_deltas();
        assert!(*deltas.last().unwrap() < cfg.rel_tol);
        for d in deltas.iter().rev().take(10) {
            assert!(*d < 10.0 * cfg.rel_tol, "late delta {d} too large");
        }
    }
}

#[test]
fn palm_trace_is_deterministic() {
    let inst = SyntheticInstance::generate(30, 30, 2, 0.5, 0.1, 3).unwrap();
    let mut cfg = PalmConfig::new(3, 2.0);
    cfg.seed = 9;
    cfg.init = InitMode::GaussianScaled;
    cfg.max_iters = 50;
    let a = palm_bitr_mc(&inst.observations, &cfg).unwrap();
    let b = palm_bitr_mc(&inst.observations, &cfg).unwrap();
    assert_eq!(
        serde_json::to_string(&a.trace).unwrap(),
        serde_json::to_string(&b.trace).unwrap()
    );
}

/// Replays the two-factor completion loop step by step with the public
/// primitives and checks (a) every singular value of every post-step factor
/// is the exact shrinkage of its pre-prox matrix, and (b) the replay lands
/// on the solver's own iterates.
#[test]
fn palm_steps_are_exact_singular_value_shrinkages() {
    let inst = SyntheticInstance::generate(25, 20, 2, 0.6, 0.05, 13).unwrap();
    let obs = &inst.observations;
    let mut cfg = PalmConfig::new(3, 2.0);
    cfg.max_iters = 6;
    cfg.rel_tol = 1e-14;
    let reference = palm_bitr_mc(obs, &cfg).unwrap();

    let b = obs.values();
    let mut fp =
        schatten_lr::factors::init_factors(obs, cfg.inner_rank, cfg.seed, cfg.init).unwrap();
    for _k in 0..cfg.max_iters {
        for side in ["u", "v"] {
            let (t, target, threshold);
            if side == "u" {
                t = step_size(&fp.v, 1.0, cfg.t_min, cfg.step_safety).unwrap();
                let fitted = obs.project_pair(&fp.u, &fp.v);
                let r: Vec<f64> = fitted.iter().zip(&b).map(|(f, y)| f - y).collect();
                let grad = obs.scatter_times(&r, &fp.v);
                target = fp.u.sub(&grad.scale(1.0 / t));
                threshold = cfg.mu / (2.0 * t);
            } else {
                t = step_size(&fp.u, 1.0, cfg.t_min, cfg.step_safety).unwrap();
                let fitted = obs.project_pair(&fp.u, &fp.v);
                let r: Vec<f64> = fitted.iter().zip(&b).map(|(f, y)| f - y).collect();
                let grad = obs.scatter_transpose_times(&r, &fp.u);
                target = fp.v.sub(&grad.scale(1.0 / t));
                threshold = cfg.mu / (2.0 * t);
            }
            let before = thin_svd(&target).unwrap().singulars;
            let stepped = svt(&target, threshold).unwrap();
            let after = thin_svd(&stepped).unwrap().singulars;
            for (a, b) in after.iter().zip(&before) {
                assert!(
                    (a - (b - threshold).max(0.0)).abs() < 1e-9,
                    "not an exact shrinkage: {a} vs {b} at threshold {threshold}"
                );
            }
            if side == "u" {
                fp.u = stepped;
            } else {
                fp.v = stepped;
            }
        }
    }
    let reference_pair = reference.factors.as_pair().unwrap();
    assert_eq!(fp.u.data(), reference_pair.u.data());
    assert_eq!(fp.v.data(), reference_pair.v.data());
}

#[test]
fn palm_stationarity_bounds_at_convergence() {
    for seed in 0..3u64 {
        let inst = SyntheticInstance::generate(60, 60, 3, 0.4, 0.1, seed).unwrap();
        let mu = 5.0;
        let mut cfg = PalmConfig::new(3, mu);
        cfg.rel_tol = 1e-9;
        cfg.max_iters = 50_000;
        cfg.seed = seed;
        let res = palm_bitr_mc(&inst.observations, &cfg).unwrap();
        assert_eq!(res.status, SolverStatus::Converged, "seed {seed}");
        assert!(
            res.kkt_residual <= 1e-3 * mu,
            "seed {seed}: KKT residual {}",
            res.kkt_residual
        );

        let fp = res.factors.as_pair().unwrap();
        let fitted = inst.observations.project_pair(&fp.u, &fp.v);
        let residual: Vec<f64> = inst
            .observations
            .values()
            .iter()
            .zip(&fitted)
            .map(|(y, f)| y - f)
            .collect();
        let q_u = inst.observations.scatter_times(&residual, &fp.v);
        let spec = spectral_norm(&q_u).unwrap();
        assert!(spec <= mu / 2.0 * (1.0 + 1e-3), "seed {seed}: |Q|_2 = {spec}");
        assert!(!fp.u.is_zero());
        let fro = q_u.frobenius_norm();
        assert!(fro >= mu / 2.0 * (1.0 - 1e-2), "seed {seed}: |Q|_F = {fro}");

        // The supplement's data-dependent constant stays above its bound.
        let c3 = c3_constant(&inst.observations, fp).unwrap();
        let bound = c3_lower_bound(mu, inst.observations.values_norm());
        assert!(c3 > bound, "seed {seed}: c3 {c3} <= bound {bound}");

        // A deliberately truncated run sits strictly farther from
        // stationarity.
        let mut short_cfg = cfg.clone();
        short_cfg.max_iters = 2;
        short_cfg.rel_tol = 1e-16;
        let short = palm_bitr_mc(&inst.observations, &short_cfg).unwrap();
        assert!(short.kkt_residual > res.kkt_residual);
    }
}

#[test]
fn ladm_zero_data_is_immediately_feasible() {
    let obs = all_zero_obs(5, 5, 10);
    let cfg = LadmConfig::new(2, 1.0);
    let res = ladm_bitr(&obs, &cfg).unwrap();
    assert_eq!(res.status, SolverStatus::Converged);
    assert_eq!(res.iterations, 1);
    assert!(res.recovered().is_zero());
    assert!(res.sparse.unwrap().iter().all(|&v| v == 0.0));
    assert_eq!(*res.trace.feasibilities().last().unwrap(), 0.0);
}

#[test]
fn ladm_consistent_observations_drive_e_to_zero() {
    let inst = SyntheticInstance::generate(40, 40, 3, 0.6, 0.0, 11).unwrap();
    for tri in [false, true] {
        let cfg = rpca_config(&inst.observations, 3);
        let res = if tri {
            ladm_tritr(&inst.observations, &cfg).unwrap()
        } else {
            ladm_bitr(&inst.observations, &cfg).unwrap()
        };
        assert_eq!(res.status, SolverStatus::Converged);
        let feas = *res.trace.feasibilities().last().unwrap();
        assert!(feas < cfg.eps, "feasibility {feas}");
        let e = res.sparse.as_ref().unwrap();
        let e_norm = e.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(e_norm <= 10.0 * cfg.eps, "terminal |e| = {e_norm}");
    }
}

#[test]
fn ladm_recovers_spike_support() {
    for tri in [false, true] {
        let mut passes = 0;
        for seed in 0..4u64 {
            let inst = gen_spiked(60, 60, 3, 0.05, 5.0, 0.0, seed).unwrap();
            let mut cfg = rpca_config(&inst.observations, 3);
            cfg.seed = seed;
            let res = if tri {
                ladm_tritr(&inst.observations, &cfg).unwrap()
            } else {
                ladm_bitr(&inst.observations, &cfg).unwrap()
            };
            assert_eq!(res.status, SolverStatus::Converged, "seed {seed}");
            let feas = *res.trace.feasibilities().last().unwrap();
            assert!(feas < cfg.eps);
            // The residual cannot have climbed over the last stretch.
            let all = res.trace.feasibilities();
            if all.len() > 10 {
                assert!(all[all.len() - 1] <= all[all.len() - 11]);
            }
            // Multipliers stay in the l1 dual ball scaled by 1/mu.
            for row in &res.trace.rows {
                assert!(row.multiplier_inf.unwrap() <= 1.0 / cfg.mu + 1e-9);
            }
            let f1 =
                support_f1(res.sparse.as_ref().unwrap(), &inst.spike_mask, 1e-3).unwrap();
            if f1 >= 0.9 {
                passes += 1;
            }
        }
        assert!(passes >= 3, "tri={tri}: only {passes}/4 seeds reached F1 0.9");
    }
}

#[test]
fn ladm_lhalf_loss_recovers_support_with_missing_data() {
    let inst = gen_spiked(50, 50, 3, 0.05, 5.0, 0.1, 21).unwrap();
    let mut cfg = rpca_config(&inst.observations, 3);
    cfg.loss = Loss::LHalf;
    cfg.seed = 21;
    let res = ladm_bitr(&inst.observations, &cfg).unwrap();
    assert_eq!(res.status, SolverStatus::Converged);
    let f1 = support_f1(res.sparse.as_ref().unwrap(), &inst.spike_mask, 1e-3).unwrap();
    assert!(f1 >= 0.9, "lhalf support F1 = {f1}");
    let r = rse(&res.recovered(), &inst.ground_truth).unwrap();
    assert!(r < 0.2, "lhalf RSE = {r}");
}

#[test]
fn ladm_trace_is_deterministic() {
    let inst = gen_spiked(30, 30, 2, 0.05, 5.0, 0.0, 2).unwrap();
    let mut cfg = rpca_config(&inst.observations, 2);
    cfg.max_iters = 60;
    let a = ladm_bitr(&inst.observations, &cfg).unwrap();
    let b = ladm_bitr(&inst.observations, &cfg).unwrap();
    assert_eq!(
        serde_json::to_string(&a.trace).unwrap(),
        serde_json::to_string(&b.trace).unwrap()
    );
}

#[test]
fn kkt_residual_is_zero_for_zero_problem() {
    let obs = all_zero_obs(4, 4, 8);
    let zero = RecoveryResult {
        factors: Factors::Pair(
            schatten_lr::FactorPair::new(DenseMatrix::zeros(4, 2), DenseMatrix::zeros(4, 2))
                .unwrap(),
        ),
        status: SolverStatus::Converged,
        iterations: 1,
        trace: SolverTrace::default(),
        kkt_residual: 0.0,
        sparse: None,
    };
    assert_eq!(kkt_residual_mc(&zero, &obs, 1.0).unwrap(), 0.0);
}

#[test]
fn baseline_is_beaten_by_factored_solver_on_noisy_completion() {
    let mut wins = 0;
    for seed in 0..3u64 {
        let inst = SyntheticInstance::generate(80, 80, 5, 0.2, 0.1, seed).unwrap();
        let mut cfg = PalmConfig::new(6, 5.0);
        cfg.rel_tol = 1e-5;
        cfg.seed = seed;
        let palm = palm_bitr_mc(&inst.observations, &cfg).unwrap();
        let palm_rse = rse(&palm.recovered(), &inst.ground_truth).unwrap();
        let mu_b = 2.0 * 0.1 * (2.0 * (80f64).sqrt()) * (0.2f64).sqrt();
        let base = trace_baseline_mc(&inst.observations, mu_b, 400).unwrap();
        let base_rse = rse(&base, &inst.ground_truth).unwrap();
        if palm_rse <= base_rse {
            wins += 1;
        }
    }
    assert!(wins >= 2, "factored solver won only {wins}/3");
}
