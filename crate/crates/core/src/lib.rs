//! Bayesian cumulative-logit model for ordinal scores exchanged between voters
//! and performers, with pair effects clustered into latent voter regions.
//!
//! The crate covers the model mathematics ([`model`]), a Metropolis-within-Gibbs
//! sampler ([`mcmc`]), convergence diagnostics and DIC ([`diagnostics`]),
//! posterior summaries ([`analysis`]), data input/output ([`io`]) and the
//! command-line front end ([`cli`]).

pub mod analysis;
pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod io;
pub mod mcmc;
pub mod model;
pub mod stats;

pub use error::{Error, Result};
