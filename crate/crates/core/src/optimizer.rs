//! Weighted ASR + MSE objective and the four adaptive solvers.
//!
//! The objective sums raw values, `J = w_asr · E[ASR] + w_mse · MSE`, with
//! no normalisation, so what a given weight pair means depends on ε, k and
//! the `n` the MSE is evaluated at (per user by default).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attacks::expected_asr;
use crate::error::{Error, Result};
use crate::model::{olh_hash_range, ss_reference_omega, FamilyParam, ProtocolConfig};
use crate::protocols::{analytic_mse, the_mse};

/// Coarse grid size for the continuous solvers.
pub const CONTINUOUS_GRID: usize = 1024;
/// Refinement tolerance for the continuous solvers.
pub const REFINE_TOL: f64 = 1e-6;
/// Largest `p` the AUE solver probes; `p = 1` makes `q = 1`.
pub const AUE_P_MAX: f64 = 1.0 - 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveWeights {
    pub w_asr: f64,
    pub w_mse: f64,
}

impl ObjectiveWeights {
    pub fn new(w_asr: f64, w_mse: f64) -> Result<Self> {
        for (field, w) in [("w_asr", w_asr), ("w_mse", w_mse)] {
            if !(0.0..=1.0).contains(&w) {
                return Err(Error::range(field, "[0, 1]", w));
            }
        }
        if (w_asr + w_mse - 1.0).abs() > 1e-12 {
            return Err(Error::range("weights", "w_asr + w_mse = 1", w_asr + w_mse));
        }
        Ok(Self { w_asr, w_mse })
    }

    /// `(w, 1 - w)`.
    pub fn asr_share(w_asr: f64) -> Result<Self> {
        Self::new(w_asr, 1.0 - w_asr)
    }

    pub fn balanced() -> Self {
        Self { w_asr: 0.5, w_mse: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub config: ProtocolConfig,
    pub theta_star: FamilyParam,
    pub objective_value: f64,
    pub asr_at_opt: f64,
    pub mse_at_opt: f64,
    pub evaluations: u64,
}

/// `(J, E[ASR], MSE)` for one candidate configuration.
fn terms(cfg: &ProtocolConfig, w: ObjectiveWeights, n: f64) -> Result<(f64, f64, f64)> {
    let asr = expected_asr(cfg)?;
    let mse = analytic_mse(cfg, n)?;
    Ok((w.w_asr * asr + w.w_mse * mse, asr, mse))
}

pub fn objective(cfg: &ProtocolConfig, weights: ObjectiveWeights, n: f64) -> Result<f64> {
    terms(cfg, weights, n).map(|t| t.0)
}

fn finish(cfg: ProtocolConfig, w: ObjectiveWeights, n: f64, evaluations: u64) -> Result<OptimizationResult> {
    let (objective_value, asr_at_opt, mse_at_opt) = terms(&cfg, w, n)?;
    Ok(OptimizationResult {
        theta_star: cfg.param,
        config: cfg,
        objective_value,
        asr_at_opt,
        mse_at_opt,
        evaluations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarMinimum {
    pub x: f64,
    pub fx: f64,
    pub evaluations: u64,
}

/// Bounded Brent minimisation (golden section with parabolic steps) on
/// `[lo, hi]`, stopping when the bracket is within `tol` of the best point.
///
/// Both endpoints are also evaluated, so a minimiser sitting on the boundary
/// is returned exactly rather than `tol` inside it.
pub fn minimize_scalar_bounded<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<ScalarMinimum>
where
    F: FnMut(f64) -> f64,
{
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::range("bounds", "finite lo < hi", format!("[{lo}, {hi}]")));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::range("tol", "> 0", tol));
    }
    let mut evaluations = 0u64;
    let mut eval = |x: f64| {
        evaluations += 1;
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite { x, value: v })
        }
    };

    const SQRT_EPS: f64 = 1.490_116_119_384_765_6e-8;
    let golden_mean = 0.5 * (3.0 - 5f64.sqrt());
    let (mut a, mut b) = (lo, hi);
    let mut fulc = a + golden_mean * (b - a);
    let mut nfc = fulc;
    let mut xf = fulc;
    let (mut rat, mut e) = (0.0f64, 0.0f64);
    let mut fx = eval(xf)?;
    let (mut ffulc, mut fnfc) = (fx, fx);
    let mut xm = 0.5 * (a + b);
    let mut tol1 = SQRT_EPS * xf.abs() + tol / 3.0;
    let mut tol2 = 2.0 * tol1;

    for _ in 0..500 {
        if (xf - xm).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            golden = false;
            let mut r = (xf - nfc) * (fx - ffulc);
            let mut q = (xf - fulc) * (fx - fnfc);
            let mut p = (xf - fulc) * q - (xf - nfc) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            r = e;
            e = rat;
            if p.abs() < (0.5 * q * r).abs() && p > q * (a - xf) && p < q * (b - xf) {
                rat = p / q;
                let x = xf + rat;
                if x - a < tol2 || b - x < tol2 {
                    rat = if xm >= xf { tol1 } else { -tol1 };
                }
            } else {
                golden = true;
            }
        }
        if golden {
            e = if xf >= xm { a - xf } else { b - xf };
            rat = golden_mean * e;
        }
        let step = if rat >= 0.0 { rat.abs().max(tol1) } else { -rat.abs().max(tol1) };
        let x = xf + step;
        let fu = eval(x)?;
        if fu <= fx {
            if x >= xf {
                a = xf;
            } else {
                b = xf;
            }
            fulc = nfc;
            ffulc = fnfc;
            nfc = xf;
            fnfc = fx;
            xf = x;
            fx = fu;
        } else {
            if x < xf {
                a = x;
            } else {
                b = x;
            }
            if fu <= fnfc || nfc == xf {
                fulc = nfc;
                ffulc = fnfc;
                nfc = x;
                fnfc = fu;
            } else if fu <= ffulc || fulc == xf || fulc == nfc {
                fulc = x;
                ffulc = fu;
            }
        }
        xm = 0.5 * (a + b);
        tol1 = SQRT_EPS * xf.abs() + tol / 3.0;
        tol2 = 2.0 * tol1;
    }

    for edge in [lo, hi] {
        let fe = eval(edge)?;
        if fe < fx || (fe == fx && (edge - xf).abs() <= tol) {
            xf = edge;
            fx = fe;
        }
    }
    Ok(ScalarMinimum { x: xf, fx, evaluations })
}

/// Argmin over `candidates`; equal values go to the smallest candidate.
/// Candidates are evaluated in parallel and reduced in index order.
pub fn grid_search<F>(f: F, candidates: &[f64]) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64 + Sync,
{
    if candidates.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    let values: Vec<f64> = candidates.par_iter().map(|&x| f(x)).collect();
    let mut best = (candidates[0], values[0]);
    for (&x, &v) in candidates.iter().zip(&values) {
        if !v.is_finite() {
            return Err(Error::NonFinite { x, value: v });
        }
        if v < best.1 || (v == best.1 && x < best.0) {
            best = (x, v);
        }
    }
    Ok(best)
}

/// Grid over `[lo, hi]` followed by a Brent refinement in the cells either
/// side of the best grid point. Returns the better of the two.
fn grid_then_refine<F>(f: F, lo: f64, hi: f64) -> Result<ScalarMinimum>
where
    F: Fn(f64) -> f64 + Sync,
{
    let m = CONTINUOUS_GRID;
    let step = (hi - lo) / (m - 1) as f64;
    let grid: Vec<f64> = (0..m).map(|i| if i == m - 1 { hi } else { lo + i as f64 * step }).collect();
    let (x0, f0) = grid_search(&f, &grid)?;
    let i = ((x0 - lo) / step).round() as usize;
    let (a, b) = (grid[i.saturating_sub(1)], grid[(i + 1).min(m - 1)]);
    let refined = minimize_scalar_bounded(&f, a, b, REFINE_TOL)?;
    let evaluations = m as u64 + refined.evaluations;
    Ok(if refined.fx <= f0 {
        ScalarMinimum { evaluations, ..refined }
    } else {
        ScalarMinimum { x: x0, fx: f0, evaluations }
    })
}

/// Wraps a fallible objective for the numeric searches; failures surface
/// as NaN, which the searches report as `NonFinite`.
fn scalar<G>(g: G) -> impl Fn(f64) -> f64 + Sync
where
    G: Fn(f64) -> Result<f64> + Sync,
{
    move |x| g(x).unwrap_or(f64::NAN)
}

/// ASS: `ω ∈ {1, …, k-1}`.
pub fn optimize_ass(eps: f64, k: usize, w: ObjectiveWeights, n: f64) -> Result<OptimizationResult> {
    ProtocolConfig::grr(eps, k)?;
    if w.w_asr == 0.0 {
        return finish(ProtocolConfig::ss(eps, k, ss_reference_omega(eps, k))?, w, n, 1);
    }
    let f = scalar(|x| objective(&ProtocolConfig::ss(eps, k, x as usize)?, w, n));
    let grid: Vec<f64> = (1..k).map(|v| v as f64).collect();
    let (omega, _) = grid_search(f, &grid)?;
    finish(ProtocolConfig::ss(eps, k, omega as usize)?, w, n, grid.len() as u64)
}

/// AUE: `p ∈ [0.5, 1)` with `q` fixed by the ε-tightness constraint.
pub fn optimize_aue(eps: f64, k: usize, w: ObjectiveWeights, n: f64) -> Result<OptimizationResult> {
    ProtocolConfig::grr(eps, k)?;
    if w.w_asr == 0.0 {
        return finish(ProtocolConfig::oue(eps, k)?, w, n, 1);
    }
    let f = scalar(|p| objective(&ProtocolConfig::ue_from_p(eps, k, p)?, w, n));
    let m = grid_then_refine(f, 0.5, AUE_P_MAX)?;
    finish(ProtocolConfig::ue_from_p(eps, k, m.x)?, w, n, m.evaluations)
}

/// ALH: `g ∈ {2, …, max(k, round(e^ε + 1))}`.
pub fn optimize_alh(eps: f64, k: usize, w: ObjectiveWeights, n: f64) -> Result<OptimizationResult> {
    ProtocolConfig::grr(eps, k)?;
    if w.w_asr == 0.0 {
        return finish(ProtocolConfig::olh(eps, k)?, w, n, 1);
    }
    let g_max = k.max(olh_hash_range(eps));
    let f = scalar(|x| objective(&ProtocolConfig::lh(eps, k, x as usize)?, w, n));
    let grid: Vec<f64> = (2..=g_max).map(|v| v as f64).collect();
    let (g, _) = grid_search(f, &grid)?;
    finish(ProtocolConfig::lh(eps, k, g as usize)?, w, n, grid.len() as u64)
}

/// ATHE: `θ ∈ [0.5, 1]`.
pub fn optimize_athe(eps: f64, k: usize, w: ObjectiveWeights, n: f64) -> Result<OptimizationResult> {
    ProtocolConfig::grr(eps, k)?;
    if w.w_asr == 0.0 {
        return finish(ProtocolConfig::the(eps, k, the_reference_theta(eps)?)?, w, n, 1);
    }
    let f = scalar(|t| objective(&ProtocolConfig::the(eps, k, t)?, w, n));
    let m = grid_then_refine(f, 0.5, 1.0)?;
    finish(ProtocolConfig::the(eps, k, m.x)?, w, n, m.evaluations)
}

/// MSE-minimising THE threshold on `[0.5, 1]` (about 0.816 at ε = 4).
pub fn the_reference_theta(eps: f64) -> Result<f64> {
    crate::model::PrivacyBudget::new(eps)?;
    Ok(grid_then_refine(|t| the_mse(eps, t, 1.0), 0.5, 1.0)?.x)
}
