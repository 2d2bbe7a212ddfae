//! Seeded end-to-end simulation: users perturb, the server estimates, the
//! adversary guesses.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attacks::{argmax, guess_from_support, AsrResult};
use crate::error::{Error, Result};
use crate::harness::dataset::Dataset;
use crate::model::{Family, ProtocolConfig, Report};
use crate::protocols::{estimate_from_counts, perturb, pure_params, support};
use crate::rng::derive_stream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub protocol: ProtocolConfig,
    pub runs: usize,
    pub master_seed: u64,
    pub dataset: Dataset,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub run: usize,
    pub empirical_asr: AsrResult,
    pub empirical_mse: f64,
    pub f_hat: Vec<f64>,
}

/// Means over runs, merged in run order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub mean_asr: f64,
    /// Binomial standard error over all `n · runs` guesses.
    pub asr_stderr: f64,
    pub mean_mse: f64,
    pub n: usize,
    pub runs: usize,
}

pub fn summarize(outcomes: &[RunOutcome]) -> Result<ExperimentSummary> {
    let first = outcomes.first().ok_or(Error::EmptyInput)?;
    let runs = outcomes.len();
    let n = first.empirical_asr.n as usize;
    let mut asr = 0.0;
    let mut mse = 0.0;
    for o in outcomes {
        asr += o.empirical_asr.asr;
        mse += o.empirical_mse;
    }
    let mean_asr = asr / runs as f64;
    Ok(ExperimentSummary {
        mean_asr,
        asr_stderr: (mean_asr * (1.0 - mean_asr) / (n * runs) as f64).sqrt(),
        mean_mse: mse / runs as f64,
        n,
        runs,
    })
}

/// Runs every repetition. Runs execute in parallel; each user draws from
/// its own stream `(master_seed, run, user)`, so results do not depend on
/// scheduling or thread count.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<RunOutcome>> {
    if cfg.runs == 0 {
        return Err(Error::range("runs", ">= 1", 0));
    }
    if cfg.dataset.is_empty() {
        return Err(Error::EmptyInput);
    }
    if cfg.dataset.k != cfg.protocol.k {
        return Err(Error::range(
            "k",
            format!("the dataset's domain size {}", cfg.dataset.k),
            cfg.protocol.k,
        ));
    }
    let truth = cfg.dataset.frequencies();
    (0..cfg.runs)
        .into_par_iter()
        .map(|run| simulate_run(cfg, &truth, run))
        .collect()
}

fn simulate_run(cfg: &ExperimentConfig, truth: &[f64], run: usize) -> Result<RunOutcome> {
    let proto = &cfg.protocol;
    let k = proto.k;
    let values = &cfg.dataset.values;
    let n = values.len();
    let mut hits = 0u64;

    let f_hat = if proto.family == Family::She {
        let mut sums = vec![0.0; k];
        for (user, &x) in values.iter().enumerate() {
            let mut rng = derive_stream(cfg.master_seed, run as u64, user as u64);
            let Report::RealVector(v) = perturb(proto, x, &mut rng)? else {
                unreachable!("SHE always reports a real vector")
            };
            for (s, y) in sums.iter_mut().zip(&v) {
                *s += y;
            }
            hits += (argmax(&v) == x) as u64;
        }
        sums.into_iter().map(|s| s / n as f64).collect()
    } else {
        // Support sets feed both the count estimator and the attack.
        let mut counts = vec![0u64; k];
        for (user, &x) in values.iter().enumerate() {
            let mut rng = derive_stream(cfg.master_seed, run as u64, user as u64);
            let report = perturb(proto, x, &mut rng)?;
            let s = support(&report, proto)?;
            for &i in &s.members {
                counts[i] += 1;
            }
            hits += (guess_from_support(&s.members, k, &mut rng) == x) as u64;
        }
        estimate_from_counts(&counts, n as u64, pure_params(proto)?)?.f_hat
    };

    let empirical_mse = f_hat.iter().zip(truth).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / k as f64;
    Ok(RunOutcome {
        run,
        empirical_asr: AsrResult::from_counts(hits, n as u64)?,
        empirical_mse,
        f_hat,
    })
}
