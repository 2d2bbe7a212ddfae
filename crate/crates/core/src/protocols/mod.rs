//! The eight frequency oracles: client perturbation, server support sets,
//! pure parameters, estimators and closed-form variances.

mod enumerate;
mod estimate;
mod hash;
mod perturb;
mod variance;

pub use enumerate::{max_likelihood_ratio, outcome_distribution, outcome_space_size, OUTCOME_CAP};
pub use estimate::{
    estimate_frequencies, estimate_from_counts, pure_params, she_estimate, support, SupportSet,
};
pub use hash::{lh_hash, lh_preimage};
pub use perturb::{
    grr_perturb, grr_probs, laplace, laplace_scale, lh_keep_prob, lh_perturb, perturb, she_perturb,
    ss_inclusion_prob, ss_perturb, the_probs, the_threshold, ue_perturb,
};
pub use variance::{
    analytic_mse, exact_pure_mse, generic_pure_mse, grr_mse, lh_mse, she_mse, ss_mse_published,
    the_mse, ue_mse,
};
