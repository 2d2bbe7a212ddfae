//! Local differential privacy frequency estimation with attack-aware
//! parameter tuning.
//!
//! The crate covers eight frequency oracles (GRR, SS, SUE/OUE, BLH/OLH,
//! SHE, THE), the distinguishability attack against each, closed-form and
//! Monte Carlo attacker success rates, closed-form estimator variances, and
//! four adaptive variants (ASS, AUE, ALH, ATHE) whose free parameter
//! minimises a weighted sum of expected attacker success rate and MSE.
//!
//! Categories are 0-based in every public function; the harness converts to
//! 1-based values at file and command-line boundaries.

pub mod attacks;
pub mod error;
pub mod harness;
pub mod model;
pub mod optimizer;
pub mod protocols;
pub mod rng;

pub use error::{Error, ErrorKind, Result};
pub use model::{
    validate_config, Domain, Family, FamilyParam, FrequencyEstimate, PrivacyBudget, ProtocolConfig,
    PureParams, Report,
};
pub use rng::{derive_stream, RngStream};
