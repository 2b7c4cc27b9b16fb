use statrs::function::gamma::ln_gamma;

use crate::model::{Dataset, ModelConfig, ParameterState};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Normal log-density with variance `var`.
pub fn normal_log_pdf(x: f64, mean: f64, var: f64) -> f64 {
    let d = x - mean;
    -0.5 * (LN_2PI + var.ln() + d * d / var)
}

/// Dirichlet log-density of `x` on the simplex.
pub fn dirichlet_log_pdf(x: &[f64], concentration: &[f64]) -> f64 {
    let total: f64 = concentration.iter().sum();
    let norm = ln_gamma(total) - concentration.iter().map(|&a| ln_gamma(a)).sum::<f64>();
    norm + x
        .iter()
        .zip(concentration)
        .map(|(&xi, &a)| if a == 1.0 { 0.0 } else { (a - 1.0) * xi.ln() })
        .sum::<f64>()
}

/// Joint log prior density of `state`, `-inf` when any constraint fails.
///
/// The cutpoint term is the product of `Normal(0, sigma2_lambda)` kernels over
/// the ordered region, without the normalising constant of the truncation.
/// The scale priors are densities on the log-standard-deviation scale.
pub fn log_prior(state: &ParameterState, config: &ModelConfig, data: &Dataset) -> f64 {
    if state.check(config, data).is_err() {
        return f64::NEG_INFINITY;
    }
    let (lo, hi) = config.logsd_bounds;
    let mut lp = 0.0;
    lp += state
        .cutpoints
        .iter()
        .map(|&l| normal_log_pdf(l, 0.0, config.sigma2_lambda))
        .sum::<f64>();
    let beta_var = config.beta_sd * config.beta_sd;
    lp += state.beta.iter().map(|&b| normal_log_pdf(b, 0.0, beta_var)).sum::<f64>();

    let var_alpha = state.sigma_alpha * state.sigma_alpha;
    lp += (0..data.n_pairs())
        .map(|h| normal_log_pdf(state.alpha[h], data.pair_theta(state, h), var_alpha))
        .sum::<f64>();
    let var_delta = state.sigma_delta * state.sigma_delta;
    lp += state.delta.iter().map(|&d| normal_log_pdf(d, 0.0, var_delta)).sum::<f64>();

    if !config.pin_gamma {
        lp += normal_log_pdf(state.gamma, 0.0, config.hyper_variance);
    }
    lp += normal_log_pdf(state.psi, 0.0, config.hyper_variance);
    lp += normal_log_pdf(state.phi, 0.0, config.hyper_variance);

    lp += state.regions.iter().map(|&r| state.zeta[r].ln()).sum::<f64>();
    lp += dirichlet_log_pdf(&state.zeta, &config.dirichlet);
    lp -= 2.0 * (hi - lo).ln();
    lp
}
