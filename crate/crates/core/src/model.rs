//! Domain types shared by every protocol, attack and solver.
//!
//! Categories are 0-based everywhere inside the library (`0..k`). Files and
//! the command line use 1-based categories; conversion happens at those
//! boundaries only.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance on `ln(p(1-q)/((1-p)q)) - eps` for unary encoding.
pub const UE_TIGHTNESS_TOL: f64 = 1e-9;

/// Privacy budget in nats.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct PrivacyBudget(f64);

impl PrivacyBudget {
    pub fn new(eps: f64) -> Result<Self> {
        if eps.is_finite() && eps > 0.0 {
            Ok(Self(eps))
        } else {
            Err(Error::range("eps", "finite and > 0", eps))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `e^eps`
    pub fn exp(self) -> f64 {
        self.0.exp()
    }
}

impl TryFrom<f64> for PrivacyBudget {
    type Error = Error;

    fn try_from(eps: f64) -> Result<Self> {
        Self::new(eps)
    }
}

impl From<PrivacyBudget> for f64 {
    fn from(b: PrivacyBudget) -> f64 {
        b.0
    }
}

/// Number of categories `k`; at least two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct Domain(usize);

impl Domain {
    pub fn new(k: usize) -> Result<Self> {
        if k >= 2 {
            Ok(Self(k))
        } else {
            Err(Error::range("k", ">= 2", k))
        }
    }

    pub fn size(self) -> usize {
        self.0
    }

    pub fn contains(self, x: usize) -> bool {
        x < self.0
    }
}

impl TryFrom<usize> for Domain {
    type Error = Error;

    fn try_from(k: usize) -> Result<Self> {
        Self::new(k)
    }
}

impl From<Domain> for usize {
    fn from(d: Domain) -> usize {
        d.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    Grr,
    Ss,
    Ue,
    Lh,
    She,
    The,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Grr => "GRR",
            Family::Ss => "SS",
            Family::Ue => "UE",
            Family::Lh => "LH",
            Family::She => "SHE",
            Family::The => "THE",
        }
    }

    /// Pure families admit a support set and the unbiased count estimator.
    pub fn is_pure(self) -> bool {
        self != Family::She
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The free parameter of a protocol family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyParam {
    None,
    SubsetSize(usize),
    Unary { p: f64, q: f64 },
    HashRange(usize),
    Threshold(f64),
}

impl FamilyParam {
    /// Name and scalar value as exported in result tables.
    pub fn label(&self) -> Option<(&'static str, f64)> {
        match *self {
            FamilyParam::None => None,
            FamilyParam::SubsetSize(w) => Some(("omega", w as f64)),
            FamilyParam::Unary { p, .. } => Some(("p", p)),
            FamilyParam::HashRange(g) => Some(("g", g as f64)),
            FamilyParam::Threshold(t) => Some(("theta", t)),
        }
    }
}

/// A fully parameterised protocol instance.
///
/// Fields are public so that callers can assemble arbitrary combinations;
/// [`validate_config`] (also run by every constructor) is the gatekeeper.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub family: Family,
    pub eps: f64,
    pub k: usize,
    pub param: FamilyParam,
}

impl ProtocolConfig {
    fn build(family: Family, eps: f64, k: usize, param: FamilyParam) -> Result<Self> {
        let cfg = Self { family, eps, k, param };
        validate_config(&cfg)?;
        Ok(cfg)
    }

    pub fn grr(eps: f64, k: usize) -> Result<Self> {
        Self::build(Family::Grr, eps, k, FamilyParam::None)
    }

    pub fn ss(eps: f64, k: usize, omega: usize) -> Result<Self> {
        Self::build(Family::Ss, eps, k, FamilyParam::SubsetSize(omega))
    }

    pub fn ue(eps: f64, k: usize, p: f64, q: f64) -> Result<Self> {
        Self::build(Family::Ue, eps, k, FamilyParam::Unary { p, q })
    }

    /// Unary encoding with `q` fixed by the ε-LDP equality for a given `p`.
    pub fn ue_from_p(eps: f64, k: usize, p: f64) -> Result<Self> {
        let e = eps.exp();
        let q = p / (e * (1.0 - p) + p);
        Self::ue(eps, k, p, q)
    }

    pub fn sue(eps: f64, k: usize) -> Result<Self> {
        let h = (eps / 2.0).exp();
        Self::ue(eps, k, h / (h + 1.0), 1.0 / (h + 1.0))
    }

    pub fn oue(eps: f64, k: usize) -> Result<Self> {
        Self::ue(eps, k, 0.5, 1.0 / (eps.exp() + 1.0))
    }

    pub fn lh(eps: f64, k: usize, g: usize) -> Result<Self> {
        Self::build(Family::Lh, eps, k, FamilyParam::HashRange(g))
    }

    pub fn blh(eps: f64, k: usize) -> Result<Self> {
        Self::lh(eps, k, 2)
    }

    pub fn olh(eps: f64, k: usize) -> Result<Self> {
        Self::lh(eps, k, olh_hash_range(eps))
    }

    pub fn she(eps: f64, k: usize) -> Result<Self> {
        Self::build(Family::She, eps, k, FamilyParam::None)
    }

    pub fn the(eps: f64, k: usize, theta: f64) -> Result<Self> {
        Self::build(Family::The, eps, k, FamilyParam::Threshold(theta))
    }

    pub fn budget(&self) -> PrivacyBudget {
        PrivacyBudget(self.eps)
    }

    pub fn domain(&self) -> Domain {
        Domain(self.k)
    }

    /// Returns the same protocol with a different free parameter, validated.
    pub fn with_param(&self, param: FamilyParam) -> Result<Self> {
        Self::build(self.family, self.eps, self.k, param)
    }
}

/// `⌊e^eps + 1⌉`, rounding halves away from zero.
pub fn olh_hash_range(eps: f64) -> usize {
    (eps.exp() + 1.0).round() as usize
}

/// MSE-optimal subset size `max(1, ⌊k / (e^eps + 1)⌉)`.
pub fn ss_reference_omega(eps: f64, k: usize) -> usize {
    let w = (k as f64 / (eps.exp() + 1.0)).round() as usize;
    w.clamp(1, k.saturating_sub(1).max(1))
}

/// Checks every invariant of a [`ProtocolConfig`].
pub fn validate_config(cfg: &ProtocolConfig) -> Result<()> {
    PrivacyBudget::new(cfg.eps)?;
    Domain::new(cfg.k)?;
    let k = cfg.k;
    match (cfg.family, cfg.param) {
        (Family::Grr | Family::She, FamilyParam::None) => Ok(()),
        (Family::Ss, FamilyParam::SubsetSize(w)) => {
            if w >= 1 && w < k {
                Ok(())
            } else {
                Err(Error::range("omega", format!("1 <= omega < {k}"), w))
            }
        }
        (Family::Ue, FamilyParam::Unary { p, q }) => {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::range("p", "0 < p < 1", p));
            }
            if !(q > 0.0 && q < 1.0) {
                return Err(Error::range("q", "0 < q < 1", q));
            }
            let implied = (p * (1.0 - q) / ((1.0 - p) * q)).ln();
            if (implied - cfg.eps).abs() <= UE_TIGHTNESS_TOL {
                Ok(())
            } else {
                Err(Error::range(
                    "ue_tightness",
                    format!("ln(p(1-q)/((1-p)q)) = {} within {UE_TIGHTNESS_TOL:e}", cfg.eps),
                    implied,
                ))
            }
        }
        (Family::Lh, FamilyParam::HashRange(g)) => {
            if g >= 2 {
                Ok(())
            } else {
                Err(Error::range("g", ">= 2", g))
            }
        }
        (Family::The, FamilyParam::Threshold(t)) => {
            if (0.5..=1.0).contains(&t) {
                Ok(())
            } else {
                Err(Error::range("theta", "0.5 <= theta <= 1", t))
            }
        }
        (family, param) => Err(Error::range(
            "param",
            format!("parameter kind matching {family}"),
            format!("{param:?}"),
        )),
    }
}

/// An obfuscated user report. Category payloads are 0-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Report {
    Category(usize),
    /// Sorted, distinct members.
    Subset(Vec<usize>),
    BitVector(Vec<bool>),
    Hashed { seed: u64, value: usize },
    RealVector(Vec<f64>),
}

/// The `(p*, q*)` pair of a pure protocol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PureParams {
    pub p_star: f64,
    pub q_star: f64,
}

impl PureParams {
    pub fn new(p_star: f64, q_star: f64) -> Result<Self> {
        if !(p_star > 0.0 && p_star <= 1.0) {
            return Err(Error::range("p_star", "0 < p* <= 1", p_star));
        }
        if !(0.0..1.0).contains(&q_star) {
            return Err(Error::range("q_star", "0 <= q* < 1", q_star));
        }
        if p_star <= q_star {
            return Err(Error::range("p_star", format!("> q* = {q_star}"), p_star));
        }
        Ok(Self { p_star, q_star })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyEstimate {
    pub f_hat: Vec<f64>,
}

impl FrequencyEstimate {
    pub fn len(&self) -> usize {
        self.f_hat.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f_hat.is_empty()
    }

    /// `(1/k) Σ (f̂_i - f_i)²`
    pub fn mse_against(&self, truth: &[f64]) -> f64 {
        assert_eq!(self.f_hat.len(), truth.len(), "length mismatch");
        let sum: f64 = self
            .f_hat
            .iter()
            .zip(truth)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        sum / truth.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ss_zero_omega_is_a_range_error() {
        let err = ProtocolConfig::ss(1.0, 10, 0).unwrap_err();
        assert!(matches!(err, Error::Range { field: "omega", .. }), "{err}");
    }

    #[test]
    fn the_at_fixed_threshold_validates() {
        assert!(ProtocolConfig::the(4.0, 100, 0.816).is_ok());
    }

    #[test]
    fn ue_half_quarter_is_tight_at_ln3() {
        assert!(ProtocolConfig::ue(3f64.ln(), 10, 0.5, 0.25).is_ok());
        let err = ProtocolConfig::ue(3f64.ln(), 10, 0.5, 0.3).unwrap_err();
        assert!(matches!(err, Error::Range { field: "ue_tightness", .. }));
    }

    #[test]
    fn rejects_degenerate_budget_and_domain() {
        assert!(ProtocolConfig::grr(0.0, 4).is_err());
        assert!(ProtocolConfig::grr(f64::NAN, 4).is_err());
        assert!(ProtocolConfig::grr(f64::INFINITY, 4).is_err());
        assert!(ProtocolConfig::grr(1.0, 1).is_err());
    }

    #[test]
    fn mismatched_param_kind_is_rejected() {
        let cfg = ProtocolConfig {
            family: Family::Lh,
            eps: 1.0,
            k: 5,
            param: FamilyParam::Threshold(0.7),
        };
        assert!(validate_config(&cfg).is_err());
    }

    #[test]
    fn reference_parameters_round_half_away() {
        assert_eq!(olh_hash_range(4.0), 56);
        assert_eq!(olh_hash_range(1.0), 4);
        assert_eq!(ss_reference_omega(4.0, 100), 2);
        assert_eq!(ss_reference_omega(8.0, 100), 1);
    }

    #[test]
    fn pure_params_require_gap() {
        assert!(PureParams::new(0.5, 0.5).is_err());
        assert!(PureParams::new(1.0, 0.0).is_ok());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn any_param() -> impl Strategy<Value = FamilyParam> {
            prop_oneof![
                Just(FamilyParam::None),
                any::<usize>().prop_map(FamilyParam::SubsetSize),
                (any::<f64>(), any::<f64>()).prop_map(|(p, q)| FamilyParam::Unary { p, q }),
                any::<usize>().prop_map(FamilyParam::HashRange),
                any::<f64>().prop_map(FamilyParam::Threshold),
            ]
        }

        fn any_family() -> impl Strategy<Value = Family> {
            prop_oneof![
                Just(Family::Grr),
                Just(Family::Ss),
                Just(Family::Ue),
                Just(Family::Lh),
                Just(Family::She),
                Just(Family::The),
            ]
        }

        proptest! {
            // Validation is total: arbitrary input yields Ok or a typed error, never a panic.
            #[test]
            fn validation_never_panics(family in any_family(), eps in any::<f64>(), k in any::<usize>(), param in any_param()) {
                let cfg = ProtocolConfig { family, eps, k, param };
                let _ = validate_config(&cfg);
            }
        }
    }
}
