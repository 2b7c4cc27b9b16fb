//! Model mathematics: score scale, data model, parameter state, likelihood and prior.
//!
//! Scores follow a proportional-odds cumulative-logit model,
//! `logit P(y <= s) = lambda_s - mu`, with `mu` linear in the performance
//! covariates plus a pair effect `alpha_vp ~ Normal(theta_vp, sigma_alpha^2)`.
//! Everything here is a pure function of its inputs.

pub(crate) mod data;
mod likelihood;
mod prior;
mod scale;
mod state;

pub use data::{
    ActType, CovariateProfile, Dataset, DatasetParts, Language, PairStructure, Performance, Record,
    BETA_LABELS, N_BETA,
};
pub use likelihood::{
    category_log_prob, category_probs, linear_predictor, log_likelihood, log_sigmoid, sigmoid,
    theta_mean, LOG_PROB_FLOOR,
};
pub use prior::{dirichlet_log_pdf, log_prior, normal_log_pdf};
pub use scale::ScoreScale;
pub use state::{ModelConfig, ParameterState};
