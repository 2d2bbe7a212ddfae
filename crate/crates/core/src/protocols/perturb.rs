//! Client-side randomisers. All category arguments and payloads are 0-based.

use rand::seq::index;
use rand::RngCore;

use crate::error::{Error, Result};
use crate::model::{FamilyParam, ProtocolConfig, Report};
use crate::protocols::hash::lh_hash;
use crate::rng::RngStream;

fn check_category(x: usize, k: usize) -> Result<()> {
    if x < k {
        Ok(())
    } else {
        Err(Error::range("x", format!("0 <= x < {k}"), x))
    }
}

/// GRR keep probability and per-other-value probability.
pub fn grr_probs(eps: f64, k: usize) -> (f64, f64) {
    let e = eps.exp();
    let denom = e + k as f64 - 1.0;
    (e / denom, 1.0 / denom)
}

/// Replaces `x` by a uniformly chosen different value with probability `1 - p`.
/// `eps = +inf` is accepted and never flips.
pub fn grr_perturb(x: usize, eps: f64, k: usize, rng: &mut RngStream) -> Result<Report> {
    check_category(x, k)?;
    Ok(Report::Category(grr_draw(x, eps, k, rng)))
}

fn grr_draw(x: usize, eps: f64, k: usize, rng: &mut RngStream) -> usize {
    let (p, _) = grr_probs(eps, k);
    let p = if p.is_nan() { 1.0 } else { p };
    if rng.bernoulli(p) {
        x
    } else {
        let other = rng.below(k - 1);
        if other >= x {
            other + 1
        } else {
            other
        }
    }
}

/// Probability that the true value is included in an SS report.
pub fn ss_inclusion_prob(eps: f64, k: usize, omega: usize) -> f64 {
    let we = omega as f64 * eps.exp();
    we / (we + (k - omega) as f64)
}

/// Subset selection: returns a sorted subset of exactly `omega` distinct values.
pub fn ss_perturb(x: usize, eps: f64, k: usize, omega: usize, rng: &mut RngStream) -> Result<Report> {
    check_category(x, k)?;
    if omega == 0 || omega >= k {
        return Err(Error::range("omega", format!("1 <= omega < {k}"), omega));
    }
    let keep = rng.bernoulli(ss_inclusion_prob(eps, k, omega));
    let fill = if keep { omega - 1 } else { omega };
    let mut out = Vec::with_capacity(omega);
    if keep {
        out.push(x);
    }
    // Sample from the k-1 other values, indexed by skipping x.
    for i in index::sample(rng, k - 1, fill) {
        out.push(if i >= x { i + 1 } else { i });
    }
    out.sort_unstable();
    Ok(Report::Subset(out))
}

/// Unary encoding: bit `x` is set with probability `p`, every other bit with `q`.
pub fn ue_perturb(x: usize, p: f64, q: f64, k: usize, rng: &mut RngStream) -> Result<Report> {
    check_category(x, k)?;
    let bits = (0..k)
        .map(|i| rng.bernoulli(if i == x { p } else { q }))
        .collect();
    Ok(Report::BitVector(bits))
}

/// GRR keep probability over the hash range.
pub fn lh_keep_prob(eps: f64, g: usize) -> f64 {
    let e = eps.exp();
    e / (e + g as f64 - 1.0)
}

/// Local hashing: draws a fresh seed, hashes `x` into `0..g` and perturbs
/// the hash with GRR over `g` values.
pub fn lh_perturb(x: usize, eps: f64, k: usize, g: usize, rng: &mut RngStream) -> Result<Report> {
    check_category(x, k)?;
    if g < 2 {
        return Err(Error::range("g", ">= 2", g));
    }
    let seed = rng.next_u64();
    let h = lh_hash(seed, x, g);
    Ok(Report::Hashed {
        seed,
        value: grr_draw(h, eps, g, rng),
    })
}

/// Laplace scale for the histogram encoding (L1 sensitivity 2).
pub fn laplace_scale(eps: f64) -> f64 {
    2.0 / eps
}

/// Inverse-CDF Laplace draw: `-b · sgn(u) · ln(1 - 2|u|)` with `u` uniform on (-½, ½).
#[inline]
pub fn laplace(b: f64, rng: &mut RngStream) -> f64 {
    let u = rng.open01() - 0.5;
    let mag = -b * (1.0 - 2.0 * u.abs()).ln();
    if u < 0.0 {
        -mag
    } else if u > 0.0 {
        mag
    } else {
        0.0
    }
}

/// One-hot histogram plus independent Laplace(2/eps) noise per coordinate.
pub fn she_perturb(x: usize, eps: f64, k: usize, rng: &mut RngStream) -> Result<Report> {
    check_category(x, k)?;
    let b = laplace_scale(eps);
    let v = (0..k)
        .map(|i| if i == x { 1.0 } else { 0.0 } + laplace(b, rng))
        .collect();
    Ok(Report::RealVector(v))
}

/// `(p, q)` of thresholding a noisy histogram at `theta`.
pub fn the_probs(eps: f64, theta: f64) -> (f64, f64) {
    let p = 1.0 - 0.5 * (eps * (theta - 1.0) / 2.0).exp();
    let q = 0.5 * (-eps * theta / 2.0).exp();
    (p, q)
}

/// Bit `i` is set iff `v_i > theta`.
pub fn the_threshold(v: &[f64], theta: f64) -> Report {
    Report::BitVector(v.iter().map(|&c| c > theta).collect())
}

/// Perturbs `x` with whatever protocol `cfg` describes.
pub fn perturb(cfg: &ProtocolConfig, x: usize, rng: &mut RngStream) -> Result<Report> {
    match cfg.param {
        FamilyParam::None if cfg.family == crate::model::Family::Grr => grr_perturb(x, cfg.eps, cfg.k, rng),
        FamilyParam::None => she_perturb(x, cfg.eps, cfg.k, rng),
        FamilyParam::SubsetSize(w) => ss_perturb(x, cfg.eps, cfg.k, w, rng),
        FamilyParam::Unary { p, q } => ue_perturb(x, p, q, cfg.k, rng),
        FamilyParam::HashRange(g) => lh_perturb(x, cfg.eps, cfg.k, g, rng),
        FamilyParam::Threshold(theta) => match she_perturb(x, cfg.eps, cfg.k, rng)? {
            Report::RealVector(v) => Ok(the_threshold(&v, theta)),
            _ => unreachable!(),
        },
    }
}
