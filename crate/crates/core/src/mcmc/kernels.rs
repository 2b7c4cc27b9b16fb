//! Transition kernels of the Metropolis-within-Gibbs sweep.
//!
//! Each kernel updates one block of a [`ParameterState`] in place and leaves
//! the joint posterior invariant. Metropolis kernels expose their log
//! acceptance ratio so it can be checked directly.

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::model::{category_log_prob, Dataset, ModelConfig, ParameterState, N_BETA};
use crate::stats::{log_normal_mass, truncated_normal};

/// Acceptance rate targeted during burn-in adaptation.
pub const TARGET_ACCEPTANCE: f64 = 0.44;

const MIN_SCALE: f64 = 1e-6;
const MAX_SCALE: f64 = 1e3;

/// Random-walk proposal scale with acceptance bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct ProposalScale {
    pub scale: f64,
    pub accepted: u64,
    pub proposed: u64,
}

impl ProposalScale {
    pub fn new(scale: f64) -> Self {
        ProposalScale {
            scale,
            accepted: 0,
            proposed: 0,
        }
    }

    fn record(&mut self, accepted: bool, adapt_weight: Option<f64>) {
        self.proposed += 1;
        if accepted {
            self.accepted += 1;
        }
        if let Some(w) = adapt_weight {
            let a = if accepted { 1.0 } else { 0.0 };
            self.scale = (self.scale * (w * (a - TARGET_ACCEPTANCE)).exp()).clamp(MIN_SCALE, MAX_SCALE);
        }
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.proposed == 0 {
            f64::NAN
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }
}

/// Proposal scales of every Metropolis kernel in a chain.
#[derive(Debug, Clone, PartialEq)]
pub struct Tuning {
    pub cutpoints: Vec<ProposalScale>,
    pub beta: Vec<ProposalScale>,
    pub alpha: Vec<ProposalScale>,
    pub log_sigma_alpha: ProposalScale,
    pub log_sigma_delta: ProposalScale,
    adapt_weight: Option<f64>,
}

impl Tuning {
    pub fn new(data: &Dataset) -> Self {
        Tuning {
            cutpoints: vec![ProposalScale::new(0.1); data.scale().n_cutpoints()],
            beta: (0..N_BETA)
                .map(|j| ProposalScale::new(if j == 0 { 0.01 } else { 0.1 }))
                .collect(),
            alpha: vec![ProposalScale::new(0.5); data.n_pairs()],
            log_sigma_alpha: ProposalScale::new(0.2),
            log_sigma_delta: ProposalScale::new(0.2),
            adapt_weight: None,
        }
    }

    /// Turns Robbins-Monro adaptation on for sweep `iteration` (0-based), or
    /// freezes the scales when `None`.
    pub fn set_adaptation(&mut self, iteration: Option<usize>) {
        self.adapt_weight = iteration.map(|n| (n as f64 + 1.0).powf(-0.6));
    }

    pub fn is_adapting(&self) -> bool {
        self.adapt_weight.is_some()
    }

    pub fn reset_counts(&mut self) {
        for p in self
            .cutpoints
            .iter_mut()
            .chain(self.beta.iter_mut())
            .chain(self.alpha.iter_mut())
            .chain([&mut self.log_sigma_alpha, &mut self.log_sigma_delta])
        {
            p.accepted = 0;
            p.proposed = 0;
        }
    }
}

/// Metropolis decision for a log acceptance ratio; `NaN` is rejected.
pub fn metropolis_accept<R: Rng + ?Sized>(log_ratio: f64, rng: &mut R) -> bool {
    if log_ratio >= 0.0 {
        return true;
    }
    if !(log_ratio > f64::NEG_INFINITY) {
        return false;
    }
    rng.random::<f64>().ln() < log_ratio
}

fn gaussian_step<R: Rng + ?Sized>(rng: &mut R, center: f64, scale: f64) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    center + scale * z
}

/// Interval that keeps cutpoint `s` between its neighbours.
pub fn cutpoint_bounds(cutpoints: &[f64], s: usize) -> (f64, f64) {
    let lo = if s == 0 { f64::NEG_INFINITY } else { cutpoints[s - 1] };
    let hi = cutpoints.get(s + 1).copied().unwrap_or(f64::INFINITY);
    (lo, hi)
}

/// Unnormalised full conditional of cutpoint `s` evaluated at `value`.
///
/// Only the records in categories `s` and `s + 1` depend on it.
pub fn cutpoint_log_target(state: &ParameterState, data: &Dataset, config: &ModelConfig, s: usize, value: f64) -> f64 {
    let mut cut = state.cutpoints.clone();
    cut[s] = value;
    let mut lp = -0.5 * value * value / config.sigma2_lambda;
    for c in [s, s + 1] {
        for &r in data.category_records(c) {
            lp += category_log_prob(&cut, data.record_mu(state, r), c);
        }
    }
    lp
}

/// Log acceptance ratio for moving cutpoint `s` to `proposal` under a normal
/// proposal of width `scale` truncated to the neighbour interval.
pub fn cutpoint_log_ratio(
    state: &ParameterState,
    data: &Dataset,
    config: &ModelConfig,
    s: usize,
    proposal: f64,
    scale: f64,
) -> f64 {
    let current = state.cutpoints[s];
    if proposal == current {
        return 0.0;
    }
    let (lo, hi) = cutpoint_bounds(&state.cutpoints, s);
    cutpoint_log_target(state, data, config, s, proposal) - cutpoint_log_target(state, data, config, s, current)
        + log_normal_mass(current, scale, lo, hi)
        - log_normal_mass(proposal, scale, lo, hi)
}

pub fn update_cutpoints<R: Rng + ?Sized>(
    state: &mut ParameterState,
    data: &Dataset,
    config: &ModelConfig,
    tuning: &mut Tuning,
    rng: &mut R,
) {
    let adapt = tuning.adapt_weight;
    for s in 0..state.cutpoints.len() {
        let (lo, hi) = cutpoint_bounds(&state.cutpoints, s);
        let scale = tuning.cutpoints[s].scale;
        let accepted = match truncated_normal(rng, state.cutpoints[s], scale, lo, hi) {
            Some(prop) => {
                let ratio = cutpoint_log_ratio(state, data, config, s, prop, scale);
                let ok = metropolis_accept(ratio, rng);
                if ok {
                    state.cutpoints[s] = prop;
                }
                ok
            }
            None => false,
        };
        tuning.cutpoints[s].record(accepted, adapt);
    }
}

/// Log acceptance ratio for moving coefficient `j` of `beta` to `proposal`.
pub fn beta_log_ratio(state: &ParameterState, data: &Dataset, config: &ModelConfig, j: usize, proposal: f64) -> f64 {
    let current = state.beta[j];
    let d = proposal - current;
    if d == 0.0 {
        return 0.0;
    }
    let var = config.beta_sd * config.beta_sd;
    let mut lr = -0.5 * (proposal * proposal - current * current) / var;
    for &r in data.feature_records(j) {
        let mu = data.record_mu(state, r);
        let c = data.records()[r].category;
        let x = data.record_design(r)[j];
        lr += category_log_prob(&state.cutpoints, mu + d * x, c) - category_log_prob(&state.cutpoints, mu, c);
    }
    lr
}

pub fn update_beta_block<R: Rng + ?Sized>(
    state: &mut ParameterState,
    data: &Dataset,
    config: &ModelConfig,
    tuning: &mut Tuning,
    rng: &mut R,
) {
    let adapt = tuning.adapt_weight;
    for j in 0..N_BETA {
        let prop = gaussian_step(rng, state.beta[j], tuning.beta[j].scale);
        let ok = metropolis_accept(beta_log_ratio(state, data, config, j, prop), rng);
        if ok {
            state.beta[j] = prop;
        }
        tuning.beta[j].record(ok, adapt);
    }
}

/// Log acceptance ratio for moving the effect of observed pair `h` to `proposal`.
pub fn alpha_log_ratio(state: &ParameterState, data: &Dataset, h: usize, proposal: f64) -> f64 {
    let current = state.alpha[h];
    let d = proposal - current;
    if d == 0.0 {
        return 0.0;
    }
    let theta = data.pair_theta(state, h);
    let var = state.sigma_alpha * state.sigma_alpha;
    let mut lr = -0.5 * ((proposal - theta).powi(2) - (current - theta).powi(2)) / var;
    for &r in data.pair_records(h) {
        let mu = data.record_mu(state, r);
        let c = data.records()[r].category;
        lr += category_log_prob(&state.cutpoints, mu + d, c) - category_log_prob(&state.cutpoints, mu, c);
    }
    lr
}

pub fn update_alpha<R: Rng + ?Sized>(state: &mut ParameterState, data: &Dataset, tuning: &mut Tuning, rng: &mut R) {
    let adapt = tuning.adapt_weight;
    for h in 0..state.alpha.len() {
        let prop = gaussian_step(rng, state.alpha[h], tuning.alpha[h].scale);
        let ok = metropolis_accept(alpha_log_ratio(state, data, h, prop), rng);
        if ok {
            state.alpha[h] = prop;
        }
        tuning.alpha[h].record(ok, adapt);
    }
}

/// One coefficient of the pair-effect mean `theta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThetaCoordinate {
    Gamma,
    Psi,
    Phi,
    Delta { cluster: usize, performer: usize },
}

/// Mean and variance of a normal distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalParams {
    pub mean: f64,
    pub variance: f64,
}

impl NormalParams {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        gaussian_step(rng, self.mean, self.variance.sqrt())
    }
}

fn coordinate_value(state: &ParameterState, coord: ThetaCoordinate) -> f64 {
    match coord {
        ThetaCoordinate::Gamma => state.gamma,
        ThetaCoordinate::Psi => state.psi,
        ThetaCoordinate::Phi => state.phi,
        ThetaCoordinate::Delta { cluster, performer } => state.delta(cluster, performer),
    }
}

fn covariate_of(state: &ParameterState, data: &Dataset, coord: ThetaCoordinate, h: usize) -> f64 {
    match coord {
        ThetaCoordinate::Gamma => 1.0,
        ThetaCoordinate::Psi => data.pair_border(h),
        ThetaCoordinate::Phi => data.pair_migration(h),
        ThetaCoordinate::Delta { cluster, performer } => {
            let (v, p) = data.observed_pairs()[h];
            if p == performer && state.regions[v] == cluster {
                1.0
            } else {
                0.0
            }
        }
    }
}

/// Posterior precision-weighted normal for a coefficient entering every
/// `alpha_h ~ Normal(theta_h, sigma_alpha^2)` linearly with covariate `x_h`,
/// under a `Normal(0, prior_variance)` prior.
fn conjugate_normal(prior_variance: f64, noise_variance: f64, sum_xx: f64, sum_xy: f64) -> NormalParams {
    let precision = sum_xx / noise_variance + 1.0 / prior_variance;
    NormalParams {
        mean: (sum_xy / noise_variance) / precision,
        variance: 1.0 / precision,
    }
}

/// Exact full conditional of one `theta` coefficient given everything else.
pub fn theta_conditional(state: &ParameterState, data: &Dataset, config: &ModelConfig, coord: ThetaCoordinate) -> NormalParams {
    let coef = coordinate_value(state, coord);
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for h in 0..data.n_pairs() {
        let x = covariate_of(state, data, coord, h);
        if x == 0.0 {
            continue;
        }
        let partial = state.alpha[h] - data.pair_theta(state, h) + coef * x;
        sxx += x * x;
        sxy += x * partial;
    }
    let prior_variance = match coord {
        ThetaCoordinate::Delta { .. } => state.sigma_delta * state.sigma_delta,
        _ => config.hyper_variance,
    };
    conjugate_normal(prior_variance, state.sigma_alpha * state.sigma_alpha, sxx, sxy)
}

/// Gibbs update of intercept, border effect, migration effect and cluster
/// effects, in that order, each from its exact normal conditional.
pub fn update_theta_block<R: Rng + ?Sized>(state: &mut ParameterState, data: &Dataset, config: &ModelConfig, rng: &mut R) {
    if !config.pin_gamma {
        state.gamma = theta_conditional(state, data, config, ThetaCoordinate::Gamma).sample(rng);
    }
    state.psi = theta_conditional(state, data, config, ThetaCoordinate::Psi).sample(rng);
    state.phi = theta_conditional(state, data, config, ThetaCoordinate::Phi).sample(rng);

    // Cluster effects are conditionally independent: each pair loads on one of them.
    let n_perf = state.n_performers();
    let mut count = vec![0.0; state.delta.len()];
    let mut resid = vec![0.0; state.delta.len()];
    for (h, &(v, p)) in data.observed_pairs().iter().enumerate() {
        let idx = state.regions[v] * n_perf + p;
        count[idx] += 1.0;
        resid[idx] += state.alpha[h] - data.pair_theta(state, h) + state.delta[idx];
    }
    let noise = state.sigma_alpha * state.sigma_alpha;
    let prior = state.sigma_delta * state.sigma_delta;
    for idx in 0..state.delta.len() {
        state.delta[idx] = conjugate_normal(prior, noise, count[idx], resid[idx]).sample(rng);
    }
}

/// Log weights `ln zeta_k + sum_p ln Normal(alpha_vp | theta_vp(k), sigma_alpha^2)`
/// for each cluster `k` of voter `v`, up to a shared constant.
pub fn region_log_weights(state: &ParameterState, data: &Dataset, voter: usize) -> Vec<f64> {
    let var = state.sigma_alpha * state.sigma_alpha;
    let current = state.regions[voter];
    (0..state.k())
        .map(|k| {
            let mut lw = state.zeta[k].ln();
            for &h in data.voter_pairs(voter) {
                let p = data.observed_pairs()[h].1;
                let theta = data.pair_theta(state, h) - state.delta(current, p) + state.delta(k, p);
                let d = state.alpha[h] - theta;
                lw -= 0.5 * d * d / var;
            }
            lw
        })
        .collect()
}

/// Normalised full conditional of the cluster of `voter`.
pub fn region_conditional(state: &ParameterState, data: &Dataset, voter: usize) -> Vec<f64> {
    let lw = region_log_weights(state, data, voter);
    let max = lw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = lw.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

fn sample_categorical<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (k, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return k;
        }
    }
    probs.len() - 1
}

pub fn update_regions<R: Rng + ?Sized>(state: &mut ParameterState, data: &Dataset, rng: &mut R) {
    if state.k() == 1 {
        return;
    }
    for v in 0..state.regions.len() {
        let probs = region_conditional(state, data, v);
        state.regions[v] = sample_categorical(&probs, rng);
    }
}

/// Dirichlet parameters of the cluster-weight full conditional.
pub fn zeta_posterior(state: &ParameterState, config: &ModelConfig) -> Vec<f64> {
    let mut a = config.dirichlet.clone();
    for &r in &state.regions {
        a[r] += 1.0;
    }
    a
}

/// Draw from a Dirichlet distribution by normalising independent gammas.
pub fn sample_dirichlet<R: Rng + ?Sized>(concentration: &[f64], rng: &mut R) -> Vec<f64> {
    let mut g: Vec<f64> = concentration
        .iter()
        .map(|&a| {
            Gamma::new(a, 1.0)
                .expect("positive concentration")
                .sample(rng)
                .max(f64::MIN_POSITIVE)
        })
        .collect();
    let total: f64 = g.iter().sum();
    for x in &mut g {
        *x /= total;
    }
    g
}

pub fn update_zeta<R: Rng + ?Sized>(state: &mut ParameterState, config: &ModelConfig, rng: &mut R) {
    if state.k() == 1 {
        state.zeta = vec![1.0];
        return;
    }
    state.zeta = sample_dirichlet(&zeta_posterior(state, config), rng);
}

/// Log full conditional of `log(sigma_alpha)` at `log_sd`, up to a constant.
pub fn log_sigma_alpha_target(state: &ParameterState, data: &Dataset, config: &ModelConfig, log_sd: f64) -> f64 {
    let (lo, hi) = config.logsd_bounds;
    if !(lo..=hi).contains(&log_sd) {
        return f64::NEG_INFINITY;
    }
    let ss: f64 = (0..data.n_pairs())
        .map(|h| (state.alpha[h] - data.pair_theta(state, h)).powi(2))
        .sum();
    -(data.n_pairs() as f64) * log_sd - 0.5 * ss * (-2.0 * log_sd).exp()
}

/// Log full conditional of `log(sigma_delta)` at `log_sd`, up to a constant.
pub fn log_sigma_delta_target(state: &ParameterState, config: &ModelConfig, log_sd: f64) -> f64 {
    let (lo, hi) = config.logsd_bounds;
    if !(lo..=hi).contains(&log_sd) {
        return f64::NEG_INFINITY;
    }
    let ss: f64 = state.delta.iter().map(|d| d * d).sum();
    -(state.delta.len() as f64) * log_sd - 0.5 * ss * (-2.0 * log_sd).exp()
}

pub fn update_variances<R: Rng + ?Sized>(
    state: &mut ParameterState,
    data: &Dataset,
    config: &ModelConfig,
    tuning: &mut Tuning,
    rng: &mut R,
) {
    let adapt = tuning.adapt_weight;

    let cur = state.sigma_alpha.ln();
    let prop = gaussian_step(rng, cur, tuning.log_sigma_alpha.scale);
    let ratio = if prop == cur {
        0.0
    } else {
        log_sigma_alpha_target(state, data, config, prop) - log_sigma_alpha_target(state, data, config, cur)
    };
    let ok = metropolis_accept(ratio, rng);
    if ok {
        state.sigma_alpha = prop.exp();
    }
    tuning.log_sigma_alpha.record(ok, adapt);

    let cur = state.sigma_delta.ln();
    let prop = gaussian_step(rng, cur, tuning.log_sigma_delta.scale);
    let ratio = if prop == cur {
        0.0
    } else {
        log_sigma_delta_target(state, config, prop) - log_sigma_delta_target(state, config, cur)
    };
    let ok = metropolis_accept(ratio, rng);
    if ok {
        state.sigma_delta = prop.exp();
    }
    tuning.log_sigma_delta.record(ok, adapt);
}

/// One full sweep in the fixed order: cutpoints, fixed effects, pair effects,
/// theta block, regions, cluster weights, scales.
pub fn sweep<R: Rng + ?Sized>(
    state: &mut ParameterState,
    data: &Dataset,
    config: &ModelConfig,
    tuning: &mut Tuning,
    rng: &mut R,
) {
    update_cutpoints(state, data, config, tuning, rng);
    update_beta_block(state, data, config, tuning, rng);
    update_alpha(state, data, tuning, rng);
    update_theta_block(state, data, config, rng);
    update_regions(state, data, rng);
    update_zeta(state, config, rng);
    update_variances(state, data, config, tuning, rng);
}
