use crate::error::{Error, Result};
use crate::model::{CovariateProfile, Dataset, PairStructure, ParameterState, N_BETA};

/// Lower clamp applied to log-probabilities before exponentiation.
pub const LOG_PROB_FLOOR: f64 = -745.0;

/// `ln(1 / (1 + e^-x))` without overflow.
pub fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(sigmoid(b) - sigmoid(a))` for `a < b`.
fn log_sigmoid_diff(a: f64, b: f64) -> f64 {
    if a >= b {
        return f64::NEG_INFINITY;
    }
    if a + b > 0.0 {
        // Both in the upper tail: work with 1 - sigmoid(x) = sigmoid(-x).
        let la = log_sigmoid(-a);
        let lb = log_sigmoid(-b);
        la + (-(lb - la).exp_m1()).ln()
    } else {
        let la = log_sigmoid(a);
        let lb = log_sigmoid(b);
        lb + (-(la - lb).exp_m1()).ln()
    }
}

/// Log-probability of `category` (0-based) under the cumulative-logit link.
///
/// Assumes the cutpoints are ordered; the first and last categories use one
/// cutpoint each.
pub fn category_log_prob(cutpoints: &[f64], mu: f64, category: usize) -> f64 {
    let last = cutpoints.len();
    if category == 0 {
        log_sigmoid(cutpoints[0] - mu)
    } else if category == last {
        log_sigmoid(mu - cutpoints[last - 1])
    } else {
        log_sigmoid_diff(cutpoints[category - 1] - mu, cutpoints[category] - mu)
    }
}

fn check_ordered(cutpoints: &[f64]) -> Result<()> {
    if cutpoints.is_empty() {
        return Err(Error::invariant("at least one cutpoint is required"));
    }
    if let Some(w) = cutpoints.windows(2).find(|w| !(w[0] < w[1])) {
        return Err(Error::invariant(format!(
            "cutpoints must be strictly increasing ({} then {})",
            w[0], w[1]
        )));
    }
    Ok(())
}

/// Category probabilities for linear predictor `mu`, one per category.
pub fn category_probs(cutpoints: &[f64], mu: f64) -> Result<Vec<f64>> {
    check_ordered(cutpoints)?;
    Ok((0..=cutpoints.len())
        .map(|c| category_log_prob(cutpoints, mu, c).max(LOG_PROB_FLOOR).exp())
        .collect())
}

/// `mu = x' beta + alpha` for one performance and the given pair effect.
pub fn linear_predictor(beta: &[f64; N_BETA], profile: &CovariateProfile, alpha: f64) -> f64 {
    dot(beta, &profile.design()) + alpha
}

/// Mean of the structured effect of voter `voter` on performer `performer`.
pub fn theta_mean(state: &ParameterState, voter: usize, performer: usize, structure: &PairStructure) -> f64 {
    let k = state.regions[voter];
    state.gamma
        + state.delta(k, performer)
        + state.psi * structure.border(voter, performer)
        + state.phi * structure.migration_term(voter, performer)
}

pub(crate) fn dot(beta: &[f64; N_BETA], x: &[f64; N_BETA]) -> f64 {
    beta.iter().zip(x).map(|(b, x)| b * x).sum()
}

impl Dataset {
    /// Linear predictor of record `r` under `state`.
    pub fn record_mu(&self, state: &ParameterState, r: usize) -> f64 {
        dot(&state.beta, self.record_design(r)) + state.alpha[self.record_pair(r)]
    }

    pub fn record_log_lik(&self, state: &ParameterState, r: usize) -> f64 {
        category_log_prob(&state.cutpoints, self.record_mu(state, r), self.records()[r].category)
    }

    /// Sum of record log-likelihoods over a subset of records.
    pub fn log_lik_of(&self, state: &ParameterState, records: &[usize]) -> f64 {
        records.iter().map(|&r| self.record_log_lik(state, r)).sum()
    }

    /// `theta` of observed pair `h`.
    pub fn pair_theta(&self, state: &ParameterState, h: usize) -> f64 {
        let (v, p) = self.observed_pairs()[h];
        state.gamma
            + state.delta(state.regions[v], p)
            + state.psi * self.pair_border(h)
            + state.phi * self.pair_migration(h)
    }
}

/// Log-likelihood of every record in `data`.
///
/// Returns `-inf` when some record's category probability is exactly zero,
/// which only happens for coincident cutpoints.
pub fn log_likelihood(state: &ParameterState, data: &Dataset) -> f64 {
    (0..data.records().len()).map(|r| data.record_log_lik(state, r)).sum()
}
