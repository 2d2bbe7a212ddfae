//! Exact output distributions for small discrete configurations.

use crate::error::{Error, Result};
use crate::model::{Family, FamilyParam, ProtocolConfig, Report};
use crate::protocols::hash::lh_hash;
use crate::protocols::perturb::{grr_probs, lh_keep_prob, ss_inclusion_prob, the_probs};

/// Largest outcome space [`outcome_distribution`] will materialise.
pub const OUTCOME_CAP: u128 = 1 << 22;

pub(crate) fn binomial(n: usize, r: usize) -> u128 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    (0..r).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Number of distinct outputs for `cfg` (LH counted per fixed hash seed).
pub fn outcome_space_size(cfg: &ProtocolConfig) -> Result<u128> {
    let k = cfg.k;
    match cfg.param {
        FamilyParam::None if cfg.family == Family::Grr => Ok(k as u128),
        FamilyParam::None => Err(Error::UnsupportedFamily(Family::She)),
        FamilyParam::SubsetSize(w) => Ok(binomial(k, w)),
        FamilyParam::Unary { .. } | FamilyParam::Threshold(_) => {
            Ok(if k >= 127 { u128::MAX } else { 1u128 << k })
        }
        FamilyParam::HashRange(g) => Ok(g as u128),
    }
}

fn all_subsets(k: usize, w: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(w);
    fn rec(start: usize, k: usize, w: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == w {
            out.push(cur.clone());
            return;
        }
        for v in start..k {
            if k - v < w - cur.len() {
                break;
            }
            cur.push(v);
            rec(v + 1, k, w, cur, out);
            cur.pop();
        }
    }
    rec(0, k, w, &mut cur, &mut out);
    out
}

/// Every output `y` with `Pr[M(x) = y]`, enumerated directly from the
/// perturbation rule. LH is conditioned on `lh_seed` (the hash function).
pub fn outcome_distribution(cfg: &ProtocolConfig, x: usize, lh_seed: Option<u64>) -> Result<Vec<(Report, f64)>> {
    let (eps, k) = (cfg.eps, cfg.k);
    if x >= k {
        return Err(Error::range("x", format!("0 <= x < {k}"), x));
    }
    let size = outcome_space_size(cfg)?;
    if size > OUTCOME_CAP {
        return Err(Error::TooLarge { size, cap: OUTCOME_CAP });
    }
    let out = match cfg.param {
        FamilyParam::None => {
            let (p, q) = grr_probs(eps, k);
            (0..k)
                .map(|y| (Report::Category(y), if y == x { p } else { q }))
                .collect()
        }
        FamilyParam::SubsetSize(w) => {
            let p = ss_inclusion_prob(eps, k, w);
            // x ∈ S: x plus a uniform (w-1)-subset of the other k-1 values.
            let with_x = p / binomial(k - 1, w - 1) as f64;
            let without_x = (1.0 - p) / binomial(k - 1, w) as f64;
            all_subsets(k, w)
                .into_iter()
                .map(|s| {
                    let pr = if s.contains(&x) { with_x } else { without_x };
                    (Report::Subset(s), pr)
                })
                .collect()
        }
        FamilyParam::Unary { p, q } => bit_vectors(k, x, p, q),
        FamilyParam::Threshold(theta) => {
            let (p, q) = the_probs(eps, theta);
            bit_vectors(k, x, p, q)
        }
        FamilyParam::HashRange(g) => {
            let seed = lh_seed.ok_or(Error::range("lh_seed", "a hash seed for LH", "none"))?;
            let h = lh_hash(seed, x, g);
            let p = lh_keep_prob(eps, g);
            let q = (1.0 - p) / (g as f64 - 1.0);
            (0..g)
                .map(|y| (Report::Hashed { seed, value: y }, if y == h { p } else { q }))
                .collect()
        }
    };
    Ok(out)
}

fn bit_vectors(k: usize, x: usize, p: f64, q: f64) -> Vec<(Report, f64)> {
    (0u64..1u64 << k)
        .map(|mask| {
            let bits: Vec<bool> = (0..k).map(|i| mask >> i & 1 == 1).collect();
            let pr = bits
                .iter()
                .enumerate()
                .map(|(i, &b)| {
                    let on = if i == x { p } else { q };
                    if b {
                        on
                    } else {
                        1.0 - on
                    }
                })
                .product();
            (Report::BitVector(bits), pr)
        })
        .collect()
}

/// Largest likelihood ratio `Pr[y|x] / Pr[y|x']` over all outputs and input pairs.
pub fn max_likelihood_ratio(cfg: &ProtocolConfig, lh_seed: Option<u64>) -> Result<f64> {
    let dists: Vec<Vec<f64>> = (0..cfg.k)
        .map(|x| outcome_distribution(cfg, x, lh_seed).map(|d| d.into_iter().map(|(_, p)| p).collect()))
        .collect::<Result<_>>()?;
    let outcomes = dists[0].len();
    let mut worst: f64 = 0.0;
    for y in 0..outcomes {
        let hi = dists.iter().map(|d| d[y]).fold(f64::MIN, f64::max);
        let lo = dists.iter().map(|d| d[y]).fold(f64::MAX, f64::min);
        worst = worst.max(if hi == 0.0 { 1.0 } else { hi / lo });
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_configs() -> Vec<ProtocolConfig> {
        let mut v = Vec::new();
        for &eps in &[0.5, 1.0, 2.0] {
            for k in 2..=5 {
                v.push(ProtocolConfig::grr(eps, k).unwrap());
                for w in 1..k {
                    v.push(ProtocolConfig::ss(eps, k, w).unwrap());
                }
                v.push(ProtocolConfig::sue(eps, k).unwrap());
                v.push(ProtocolConfig::oue(eps, k).unwrap());
                v.push(ProtocolConfig::ue_from_p(eps, k, 0.8).unwrap());
                v.push(ProtocolConfig::the(eps, k, 0.5).unwrap());
                v.push(ProtocolConfig::the(eps, k, 0.8).unwrap());
                v.push(ProtocolConfig::lh(eps, k, 2).unwrap());
                v.push(ProtocolConfig::lh(eps, k, 3).unwrap());
            }
        }
        v
    }

    #[test]
    fn distributions_normalise() {
        for cfg in small_configs() {
            for x in 0..cfg.k {
                let total: f64 = outcome_distribution(&cfg, x, Some(17)).unwrap().iter().map(|(_, p)| p).sum();
                assert!((total - 1.0).abs() < 1e-12, "{cfg:?} x={x} total={total}");
            }
        }
    }

    #[test]
    fn likelihood_ratios_respect_budget() {
        for cfg in small_configs() {
            let r = max_likelihood_ratio(&cfg, Some(99)).unwrap();
            assert!(r <= cfg.eps.exp() * (1.0 + 1e-9), "{cfg:?} ratio {r}");
        }
    }

    #[test]
    fn binomial_small_values() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(6, 0), 1);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(all_subsets(5, 3).len(), 10);
    }

    #[test]
    fn oversized_space_is_rejected() {
        let cfg = ProtocolConfig::oue(1.0, 40).unwrap();
        assert!(matches!(outcome_distribution(&cfg, 0, None), Err(Error::TooLarge { .. })));
    }
}
