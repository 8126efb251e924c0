//! `verify`: the quasi-norm certification battery with pass/fail lines.

use crate::CliError;
use schatten_lr::certify::{all_passed, run_certification, CertifyConfig};

pub struct VerifyArgs {
    pub trials: usize,
    pub max_dim: usize,
    pub factorizations: usize,
    pub seed: u64,
    /// Test hook: shifts bi-trace evaluations inside the battery to prove
    /// the failure path works end to end.
    pub inject_fault: bool,
}

pub fn run(args: &VerifyArgs) -> Result<bool, CliError> {
    let cfg = CertifyConfig {
        trials: args.trials,
        max_dim: args.max_dim,
        factorizations: args.factorizations,
        seed: args.seed,
        fault_offset: if args.inject_fault { 1e-3 } else { 0.0 },
    };
    let reports = run_certification(&cfg)?;
    for r in &reports {
        println!(
            "{} [{} cases, max deviation {:.3e}, tolerance {:.0e}] ... {}",
            r.name,
            r.cases,
            r.max_deviation,
            r.tolerance,
            if r.passed { "PASS" } else { "FAIL" }
        );
    }
    Ok(all_passed(&reports))
}
