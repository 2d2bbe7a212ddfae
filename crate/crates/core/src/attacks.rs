//! Distinguishability attacks and attacker success rate (ASR).
//!
//! Every attack assumes a uniform prior over inputs, so the Bayes-optimal
//! guess is the most likely input given the report. For pure protocols this
//! is a uniform draw from the report's support set (or from the whole
//! domain when the support is empty). For SHE it is the argmax coordinate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Family, FamilyParam, ProtocolConfig, Report};
use crate::protocols::{
    grr_probs, laplace, laplace_scale, lh_hash, lh_keep_prob, outcome_distribution, support, the_probs,
};
use crate::rng::{derive_stream, RngStream};

/// Number of hash seeds averaged by the LH oracle.
pub const LH_ORACLE_SEEDS: usize = 10_000;
/// Default trial count for the SHE Monte Carlo ASR.
pub const SHE_MC_TRIALS: u64 = 1_000_000;

const LH_ORACLE_MASTER_SEED: u64 = 0x4C48_5F4F_5241_434C;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttackPrediction {
    /// 0-based guessed category.
    pub x_hat: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsrResult {
    pub asr: f64,
    pub n: u64,
    /// Binomial standard error `sqrt(asr (1 - asr) / n)`.
    pub stderr: f64,
}

impl AsrResult {
    pub fn from_counts(successes: u64, n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyInput);
        }
        let asr = successes as f64 / n as f64;
        Ok(Self {
            asr,
            n,
            stderr: (asr * (1.0 - asr) / n as f64).sqrt(),
        })
    }
}

/// Uniform pick from `members`, or from `0..k` when `members` is empty.
pub fn guess_from_support(members: &[usize], k: usize, rng: &mut RngStream) -> usize {
    if members.is_empty() {
        rng.below(k)
    } else {
        members[rng.below(members.len())]
    }
}

/// Index of the largest coordinate; lowest index wins ties, NaN never wins.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (i, &x) in v.iter().enumerate() {
        if x > best_val {
            best = i;
            best_val = x;
        }
    }
    best
}

/// Runs the family's attack against one report.
pub fn attack(report: &Report, cfg: &ProtocolConfig, rng: &mut RngStream) -> Result<AttackPrediction> {
    let x_hat = match (cfg.family, report) {
        (Family::Grr, Report::Category(y)) if *y < cfg.k => *y,
        (Family::She, Report::RealVector(v)) if v.len() == cfg.k => argmax(v),
        (Family::She, _) => return Err(Error::FamilyMismatch { expected: Family::She }),
        _ => guess_from_support(&support(report, cfg)?.members, cfg.k, rng),
    };
    Ok(AttackPrediction { x_hat })
}

/// Fraction of `(true, guess)` pairs that match.
pub fn empirical_asr(pairs: &[(usize, usize)]) -> Result<AsrResult> {
    let hits = pairs.iter().filter(|(x, g)| x == g).count() as u64;
    AsrResult::from_counts(hits, pairs.len() as u64)
}

pub fn grr_expected_asr(eps: f64, k: usize) -> f64 {
    grr_probs(eps, k).0
}

pub fn ss_expected_asr(eps: f64, k: usize, omega: usize) -> f64 {
    let e = eps.exp();
    e / (omega as f64 * e + (k - omega) as f64)
}

/// Expected ASR of the uniform-over-support attack on a `k`-bit vector whose
/// true bit is set with probability `p` and every other bit with `q`:
///
/// `(1-p)(1-q)^(k-1)/k + Σ_{m=1..k} p/m · C(k-1,m-1) q^(m-1) (1-q)^(k-m)`.
///
/// The sum is accumulated in log space with incremental binomial ratios so
/// that large `k` neither overflows the coefficients nor underflows the
/// powers.
pub fn ue_expected_asr(p: f64, q: f64, k: usize) -> f64 {
    let kf = k as f64;
    let l1q = (-q).ln_1p();
    let empty = (1.0 - p) * ((kf - 1.0) * l1q).exp() / kf;
    if q <= 0.0 {
        return empty + p;
    }
    if q >= 1.0 {
        return p / kf;
    }
    let lq = q.ln();
    let mut log_binom = 0.0; // ln C(k-1, m-1)
    let mut terms = Vec::with_capacity(k);
    for m in 1..=k {
        if m > 1 {
            log_binom += ((k - m + 1) as f64).ln() - ((m - 1) as f64).ln();
        }
        let mf = m as f64;
        terms.push(log_binom + (mf - 1.0) * lq + (kf - mf) * l1q - mf.ln());
    }
    let top = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = terms.iter().map(|t| (t - top).exp()).sum();
    empty + p * top.exp() * sum
}

/// `e^ε / ((e^ε + g - 1) · max(k/g, 1))`: treats the preimage of the true
/// hash as having exactly `max(k/g, 1)` members.
pub fn lh_expected_asr(eps: f64, k: usize, g: usize) -> f64 {
    let e = eps.exp();
    e / ((e + g as f64 - 1.0) * (k as f64 / g as f64).max(1.0))
}

/// Expected ASR of the LH attack when the hash behaves as a uniformly random
/// function, accounting for the binomial preimage size and the empty-preimage
/// fallback:
///
/// `p · (g/k)(1 - (1-1/g)^k) + (1-p)(1-1/g)^(k-1) / k`.
pub fn lh_expected_asr_random_hash(eps: f64, k: usize, g: usize) -> f64 {
    let p = lh_keep_prob(eps, g);
    let (kf, gf) = (k as f64, g as f64);
    let miss = (-1.0 / gf).ln_1p();
    let share = -(kf * miss).exp_m1();
    p * gf / kf * share + (1.0 - p) * ((kf - 1.0) * miss).exp() / kf
}

/// Closed-form expected ASR. SHE has none; see [`expected_asr_she_mc`].
pub fn expected_asr(cfg: &ProtocolConfig) -> Result<f64> {
    let (eps, k) = (cfg.eps, cfg.k);
    Ok(match cfg.param {
        FamilyParam::None if cfg.family == Family::Grr => grr_expected_asr(eps, k),
        FamilyParam::None => return Err(Error::UnsupportedFamily(Family::She)),
        FamilyParam::SubsetSize(w) => ss_expected_asr(eps, k, w),
        FamilyParam::Unary { p, q } => ue_expected_asr(p, q, k),
        FamilyParam::HashRange(g) => lh_expected_asr(eps, k, g),
        FamilyParam::Threshold(theta) => {
            let (p, q) = the_probs(eps, theta);
            ue_expected_asr(p, q, k)
        }
    })
}

/// Laplace quantile function.
fn laplace_quantile(b: f64, u: f64) -> f64 {
    if u <= 0.5 {
        b * (2.0 * u).ln()
    } else {
        -b * (2.0 * (1.0 - u)).ln()
    }
}

/// Monte Carlo estimate of `Pr[1 + Z_x > max_{i≠x} Z_i]`, `Z ~ Laplace(0, 2/ε)` i.i.d.
///
/// Each trial draws `Z_x` and the competitor maximum `M`. `M` is sampled
/// exactly from its distribution `F_M = F_Z^(k-1)` by inverting a single
/// uniform (`M = F_Z⁻¹(U^(1/(k-1)))`), which is equivalent in law to drawing
/// the `k-1` competitors and taking their maximum.
pub fn expected_asr_she_mc(eps: f64, k: usize, trials: u64, rng: &mut RngStream) -> Result<AsrResult> {
    if trials == 0 {
        return Err(Error::range("trials", ">= 1", 0));
    }
    if k <= 1 {
        return AsrResult::from_counts(trials, trials);
    }
    let b = laplace_scale(eps);
    let inv = 1.0 / (k - 1) as f64;
    let mut hits = 0u64;
    for _ in 0..trials {
        let zx = laplace(b, rng);
        let log_v = rng.open01().ln() * inv;
        let m = if log_v > -std::f64::consts::LN_2 {
            // upper half: 1 - v computed without cancellation
            -b * (2.0 * -log_v.exp_m1()).ln()
        } else {
            laplace_quantile(b, log_v.exp())
        };
        if 1.0 + zx > m {
            hits += 1;
        }
    }
    AsrResult::from_counts(hits, trials)
}

/// Probability that [`attack`] returns `true_x` for this report.
pub fn success_probability(report: &Report, cfg: &ProtocolConfig, true_x: usize) -> Result<f64> {
    match cfg.family {
        Family::She => Err(Error::UnsupportedFamily(Family::She)),
        Family::Grr => match report {
            Report::Category(y) => Ok(if *y == true_x { 1.0 } else { 0.0 }),
            _ => Err(Error::FamilyMismatch { expected: Family::Grr }),
        },
        _ => {
            let s = support(report, cfg)?;
            Ok(if s.is_empty() {
                1.0 / cfg.k as f64
            } else if s.contains(true_x) {
                1.0 / s.len() as f64
            } else {
                0.0
            })
        }
    }
}

/// Oracle value: exact when the output space was enumerated, otherwise a
/// sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleEstimate {
    pub value: f64,
    pub stderr: f64,
    pub exact: bool,
}

/// Expected ASR for a fixed true input, by summing
/// `Pr[y | x] · Pr[guess = x | y]` over every output.
///
/// LH is averaged over [`LH_ORACLE_SEEDS`] sampled hash seeds, each
/// enumerated exactly; see [`lh_seed_averaged_asr`].
pub fn brute_force_expected_asr(cfg: &ProtocolConfig, true_x: usize) -> Result<OracleEstimate> {
    if cfg.family == Family::Lh {
        return lh_seed_averaged_asr(cfg, true_x, LH_ORACLE_SEEDS, LH_ORACLE_MASTER_SEED);
    }
    let mut total = 0.0;
    for (y, pr) in outcome_distribution(cfg, true_x, None)? {
        total += pr * success_probability(&y, cfg, true_x)?;
    }
    Ok(OracleEstimate {
        value: total,
        stderr: 0.0,
        exact: true,
    })
}

/// Exact conditional ASR per sampled hash seed, averaged over `seeds` seeds.
pub fn lh_seed_averaged_asr(cfg: &ProtocolConfig, true_x: usize, seeds: usize, master_seed: u64) -> Result<OracleEstimate> {
    let g = match cfg.param {
        FamilyParam::HashRange(g) => g,
        _ => return Err(Error::FamilyMismatch { expected: Family::Lh }),
    };
    if seeds == 0 {
        return Err(Error::range("seeds", ">= 1", 0));
    }
    let k = cfg.k;
    if true_x >= k {
        return Err(Error::range("x", format!("0 <= x < {k}"), true_x));
    }
    let p = lh_keep_prob(cfg.eps, g);
    let q = (1.0 - p) / (g as f64 - 1.0);
    let mut rng = derive_stream(master_seed, 0, 0);
    let mut preimage_size = vec![0usize; g];
    let (mut sum, mut sum2) = (0.0, 0.0);
    for _ in 0..seeds {
        let seed = rand::RngCore::next_u64(&mut rng);
        preimage_size.iter_mut().for_each(|c| *c = 0);
        for x in 0..k {
            preimage_size[lh_hash(seed, x, g)] += 1;
        }
        let h = lh_hash(seed, true_x, g);
        let mut asr = p / preimage_size[h] as f64;
        let empty = preimage_size.iter().enumerate().filter(|&(y, &c)| y != h && c == 0).count();
        asr += q * empty as f64 / k as f64;
        sum += asr;
        sum2 += asr * asr;
    }
    let n = seeds as f64;
    let mean = sum / n;
    let var = (sum2 / n - mean * mean).max(0.0) * n / (n - 1.0).max(1.0);
    Ok(OracleEstimate {
        value: mean,
        stderr: (var / n).sqrt(),
        exact: false,
    })
}
