use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Family, FamilyParam, FrequencyEstimate, ProtocolConfig, PureParams, Report};
use crate::protocols::hash::{lh_hash, lh_preimage};
use crate::protocols::perturb::{grr_probs, lh_keep_prob, ss_inclusion_prob, the_probs};

/// Categories (0-based, ascending) that a report supports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportSet {
    pub members: Vec<usize>,
}

impl SupportSet {
    pub fn contains(&self, x: usize) -> bool {
        self.members.binary_search(&x).is_ok()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

fn mismatch(cfg: &ProtocolConfig) -> Error {
    Error::FamilyMismatch { expected: cfg.family }
}

/// Support set of a report under `cfg`. SHE has none.
pub fn support(report: &Report, cfg: &ProtocolConfig) -> Result<SupportSet> {
    let k = cfg.k;
    let members = match (cfg.family, cfg.param, report) {
        (Family::She, _, _) => return Err(Error::UnsupportedFamily(Family::She)),
        (Family::Grr, _, Report::Category(y)) if *y < k => vec![*y],
        (Family::Ss, FamilyParam::SubsetSize(w), Report::Subset(s))
            if s.len() == w && s.iter().all(|&v| v < k) =>
        {
            s.clone()
        }
        (Family::Ue | Family::The, _, Report::BitVector(bits)) if bits.len() == k => bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect(),
        (Family::Lh, FamilyParam::HashRange(g), Report::Hashed { seed, value }) if *value < g => {
            lh_preimage(*seed, *value, k, g)
        }
        _ => return Err(mismatch(cfg)),
    };
    Ok(SupportSet { members })
}

/// Adds one to `counts[i]` for every `i` the report supports, without allocating.
pub(crate) fn accumulate_support(report: &Report, cfg: &ProtocolConfig, counts: &mut [u64]) -> Result<()> {
    match (cfg.param, report) {
        (FamilyParam::HashRange(g), Report::Hashed { seed, value }) if *value < g => {
            for (x, c) in counts.iter_mut().enumerate() {
                if lh_hash(*seed, x, g) == *value {
                    *c += 1;
                }
            }
            Ok(())
        }
        (_, Report::BitVector(bits)) if bits.len() == counts.len() && cfg.family != Family::She => {
            for (c, &b) in counts.iter_mut().zip(bits) {
                *c += b as u64;
            }
            Ok(())
        }
        _ => {
            for i in support(report, cfg)?.members {
                counts[i] += 1;
            }
            Ok(())
        }
    }
}

/// `(p*, q*)` for every pure family.
pub fn pure_params(cfg: &ProtocolConfig) -> Result<PureParams> {
    let (eps, k) = (cfg.eps, cfg.k);
    let (p, q) = match cfg.param {
        FamilyParam::None if cfg.family == Family::Grr => grr_probs(eps, k),
        FamilyParam::None => return Err(Error::UnsupportedFamily(Family::She)),
        FamilyParam::SubsetSize(w) => {
            let we = w as f64 * eps.exp();
            let kf = k as f64;
            let wf = w as f64;
            let q = (we * (wf - 1.0) + (kf - wf) * wf) / ((kf - 1.0) * (we + kf - wf));
            (ss_inclusion_prob(eps, k, w), q)
        }
        FamilyParam::Unary { p, q } => (p, q),
        FamilyParam::HashRange(g) => (lh_keep_prob(eps, g), 1.0 / g as f64),
        FamilyParam::Threshold(theta) => the_probs(eps, theta),
    };
    PureParams::new(p, q)
}

/// `f̂_i = (C_i - n q*) / (n (p* - q*))` from raw support counts.
pub fn estimate_from_counts(counts: &[u64], n: u64, pp: PureParams) -> Result<FrequencyEstimate> {
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let nf = n as f64;
    let scale = nf * (pp.p_star - pp.q_star);
    let f_hat = counts
        .iter()
        .map(|&c| (c as f64 - nf * pp.q_star) / scale)
        .collect();
    Ok(FrequencyEstimate { f_hat })
}

/// Unbiased frequency estimate for a pure protocol.
pub fn estimate_frequencies(reports: &[Report], cfg: &ProtocolConfig) -> Result<FrequencyEstimate> {
    if reports.is_empty() {
        return Err(Error::EmptyInput);
    }
    let pp = pure_params(cfg)?;
    let mut counts = vec![0u64; cfg.k];
    for r in reports {
        accumulate_support(r, cfg, &mut counts)?;
    }
    estimate_from_counts(&counts, reports.len() as u64, pp)
}

/// SHE aggregation: coordinate-wise mean of the noisy histograms.
pub fn she_estimate(reports: &[Report]) -> Result<FrequencyEstimate> {
    let first = match reports.first() {
        Some(Report::RealVector(v)) => v.len(),
        Some(_) => return Err(Error::FamilyMismatch { expected: Family::She }),
        None => return Err(Error::EmptyInput),
    };
    let mut sums = vec![0.0; first];
    for r in reports {
        match r {
            Report::RealVector(v) if v.len() == first => {
                for (s, x) in sums.iter_mut().zip(v) {
                    *s += x;
                }
            }
            _ => return Err(Error::FamilyMismatch { expected: Family::She }),
        }
    }
    let n = reports.len() as f64;
    Ok(FrequencyEstimate {
        f_hat: sums.into_iter().map(|s| s / n).collect(),
    })
}
