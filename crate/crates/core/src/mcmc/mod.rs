//! Multi-chain Metropolis-within-Gibbs sampler.
//!
//! Every sweep applies the kernels in [`kernels::sweep`] once. Proposal scales
//! adapt during burn-in only and are frozen for the retained part of the chain.
//! Chain `c` draws from a ChaCha8 stream seeded with the run seed and stream
//! number `c`, so results do not depend on how chains are scheduled.

mod archive;
mod init;
pub mod kernels;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{log_likelihood, Dataset, ModelConfig, ParameterState};

pub(crate) use archive::fmt_f64;
pub use archive::{read_archive, write_archive, Archive, Layout, METADATA_FILE};
pub use init::{empirical_cutpoints, init_state};
pub use kernels::{
    sweep, update_alpha, update_beta_block, update_cutpoints, update_regions, update_theta_block,
    update_variances, update_zeta, region_conditional, sample_dirichlet, theta_conditional, zeta_posterior,
    NormalParams, ProposalScale, ThetaCoordinate, Tuning,
};

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    pub chains: usize,
    /// Sweeps after burn-in (or in total, see `burn_in_included`).
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    /// Number of burn-in sweeps with proposal adaptation; `None` adapts for the
    /// whole burn-in.
    pub adapt_window: Option<usize>,
    /// Read `iterations` as the total including burn-in instead of the number of
    /// sweeps that follow it.
    pub burn_in_included: bool,
    /// Worker threads used to run chains.
    pub jobs: usize,
    /// Check every state invariant after each sweep.
    pub check_invariants: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            chains: 2,
            iterations: 11_000,
            burn_in: 1_000,
            thin: 20,
            seed: 1,
            adapt_window: None,
            burn_in_included: false,
            jobs: 2,
            check_invariants: cfg!(debug_assertions),
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.chains == 0 {
            return Err(Error::config("at least one chain is required"));
        }
        if self.thin == 0 {
            return Err(Error::config("thinning stride must be at least 1"));
        }
        if self.jobs == 0 {
            return Err(Error::config("jobs must be at least 1"));
        }
        if self.burn_in_included && self.iterations < self.burn_in {
            return Err(Error::config(format!(
                "{} total iterations cannot include {} burn-in sweeps",
                self.iterations, self.burn_in
            )));
        }
        Ok(())
    }

    /// Sweeps run after burn-in.
    pub fn retained_sweeps(&self) -> usize {
        if self.burn_in_included {
            self.iterations.saturating_sub(self.burn_in)
        } else {
            self.iterations
        }
    }

    /// Stored draws per chain.
    pub fn draws_per_chain(&self) -> usize {
        self.retained_sweeps() / self.thin
    }

    pub fn adapt_sweeps(&self) -> usize {
        self.adapt_window.unwrap_or(self.burn_in).min(self.burn_in)
    }
}

/// A retained state with its deviance `-2 log L`.
#[derive(Debug, Clone, PartialEq)]
pub struct Draw {
    pub state: ParameterState,
    pub deviance: f64,
}

/// Thinned draws of every chain plus the settings that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorDraws {
    pub layout: Layout,
    pub chains: Vec<Vec<Draw>>,
    pub sampler: SamplerConfig,
    pub model: ModelConfig,
    pub dataset_digest: String,
}

impl PosteriorDraws {
    pub fn n_chains(&self) -> usize {
        self.chains.len()
    }

    pub fn draws_per_chain(&self) -> usize {
        self.chains.first().map_or(0, Vec::len)
    }

    pub fn total_draws(&self) -> usize {
        self.chains.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.total_draws() == 0
    }

    /// All draws, chain by chain.
    pub fn iter(&self) -> impl Iterator<Item = &Draw> {
        self.chains.iter().flatten()
    }

    /// Flattened scalar traces: `traces[column][chain][draw]`.
    pub fn traces(&self) -> Vec<Vec<Vec<f64>>> {
        let names = self.layout.column_names();
        let mut out = vec![vec![Vec::with_capacity(self.draws_per_chain()); self.n_chains()]; names.len()];
        for (c, chain) in self.chains.iter().enumerate() {
            for d in chain {
                for (col, x) in self.layout.flatten(&d.state, d.deviance).into_iter().enumerate() {
                    out[col][c].push(x);
                }
            }
        }
        out
    }
}

/// Runs one chain and returns its retained draws.
pub fn run_chain(
    chain: usize,
    sampler: &SamplerConfig,
    model: &ModelConfig,
    data: &Dataset,
) -> Result<Vec<Draw>> {
    let mut rng = ChaCha8Rng::seed_from_u64(sampler.seed);
    rng.set_stream(chain as u64);
    let mut state = init_state(model, data, &mut rng)?;
    let mut tuning = Tuning::new(data);
    let adapt = sampler.adapt_sweeps();
    let retained = sampler.retained_sweeps();
    let mut draws = Vec::with_capacity(sampler.draws_per_chain());

    for it in 0..sampler.burn_in + retained {
        tuning.set_adaptation((it < adapt).then_some(it));
        sweep(&mut state, data, model, &mut tuning, &mut rng);
        if sampler.check_invariants {
            state.check(model, data).map_err(|e| {
                Error::invariant(format!("chain {} sweep {}: {e}", chain + 1, it + 1))
            })?;
        }
        if it >= sampler.burn_in {
            let kept = it + 1 - sampler.burn_in;
            if kept % sampler.thin == 0 {
                let deviance = -2.0 * log_likelihood(&state, data);
                draws.push(Draw {
                    state: state.clone(),
                    deviance,
                });
            }
        }
    }
    Ok(draws)
}

/// Runs every chain, `sampler.jobs` at a time.
pub fn run(sampler: &SamplerConfig, model: &ModelConfig, data: &Dataset) -> Result<PosteriorDraws> {
    sampler.validate()?;
    model.validate()?;
    if data.records().is_empty() {
        return Err(Error::data("dataset has no records"));
    }

    let results: Mutex<Vec<Option<Result<Vec<Draw>>>>> =
        Mutex::new((0..sampler.chains).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    let workers = sampler.jobs.min(sampler.chains);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let c = next.fetch_add(1, Ordering::SeqCst);
                if c >= sampler.chains {
                    break;
                }
                let out = run_chain(c, sampler, model, data);
                results.lock().expect("results lock")[c] = Some(out);
            });
        }
    });
    let chains = results
        .into_inner()
        .expect("results lock")
        .into_iter()
        .map(|r| r.expect("every chain ran"))
        .collect::<Result<Vec<_>>>()?;

    Ok(PosteriorDraws {
        layout: Layout::for_data(data, model.k),
        chains,
        sampler: sampler.clone(),
        model: model.clone(),
        dataset_digest: crate::io::dataset_digest(data),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stored_draw_count_follows_thinning() {
        let s = SamplerConfig::default();
        assert_eq!(s.draws_per_chain(), 550);
        let alt = SamplerConfig {
            burn_in_included: true,
            ..SamplerConfig::default()
        };
        assert_eq!(alt.draws_per_chain(), 500);
        let zero = SamplerConfig {
            iterations: 0,
            ..SamplerConfig::default()
        };
        assert_eq!(zero.draws_per_chain(), 0);
    }

    #[test]
    fn invalid_sampler_settings() {
        for bad in [
            SamplerConfig { chains: 0, ..Default::default() },
            SamplerConfig { thin: 0, ..Default::default() },
            SamplerConfig { jobs: 0, ..Default::default() },
            SamplerConfig { burn_in_included: true, iterations: 10, ..Default::default() },
        ] {
            assert!(matches!(bad.validate(), Err(Error::Config(_))));
        }
    }
}
