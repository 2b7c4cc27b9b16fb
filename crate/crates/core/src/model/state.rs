use crate::error::{Error, Result};
use crate::model::{Dataset, N_BETA};

/// Prior hyperparameters and structural switches of the model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    /// Number of latent voter clusters.
    pub k: usize,
    /// Variance of the normal kernel on each cutpoint.
    pub sigma2_lambda: f64,
    /// Prior standard deviation of each fixed-effect coefficient.
    pub beta_sd: f64,
    /// Prior variance of the intercept, border and migration effects.
    pub hyper_variance: f64,
    /// Dirichlet concentration on the cluster weights, one entry per cluster.
    pub dirichlet: Vec<f64>,
    /// Support of the uniform prior on `log(sigma_alpha)` and `log(sigma_delta)`.
    pub logsd_bounds: (f64, f64),
    /// Fix the intercept at 0 instead of sampling it.
    pub pin_gamma: bool,
}

impl ModelConfig {
    pub fn new(k: usize) -> Self {
        ModelConfig {
            k,
            sigma2_lambda: 10.0,
            beta_sd: 1e4,
            hyper_variance: 1e4,
            dirichlet: vec![1.0; k],
            logsd_bounds: (-3.0, 3.0),
            pin_gamma: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::config("number of clusters must be at least 1"));
        }
        for (name, v) in [
            ("sigma2_lambda", self.sigma2_lambda),
            ("beta_sd", self.beta_sd),
            ("hyper_variance", self.hyper_variance),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if self.dirichlet.len() != self.k {
            return Err(Error::config(format!(
                "dirichlet concentration has {} entries for {} clusters",
                self.dirichlet.len(),
                self.k
            )));
        }
        if self.dirichlet.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
            return Err(Error::config("dirichlet concentrations must be positive"));
        }
        let (lo, hi) = self.logsd_bounds;
        if !(lo < hi && lo.is_finite() && hi.is_finite()) {
            return Err(Error::config(format!("log-sd bounds ({lo}, {hi}) are not well ordered")));
        }
        Ok(())
    }
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self::new(4)
    }
}

/// One complete assignment of every unknown in the model.
///
/// `delta` is stored row-major by cluster: entry `k * P + p` is the effect of
/// cluster `k` on performer `p`. Regions are 0-based cluster indices.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterState {
    pub cutpoints: Vec<f64>,
    pub beta: [f64; N_BETA],
    /// One entry per observed pair, in [`Dataset::observed_pairs`] order.
    pub alpha: Vec<f64>,
    pub gamma: f64,
    pub delta: Vec<f64>,
    pub psi: f64,
    pub phi: f64,
    pub regions: Vec<usize>,
    pub zeta: Vec<f64>,
    pub sigma_alpha: f64,
    pub sigma_delta: f64,
}

impl ParameterState {
    /// All-zero state with uniform cluster weights, unit scales and every voter
    /// in cluster 0. The cutpoints are zero too and therefore not yet ordered
    /// unless there is only one of them.
    pub fn zeros(n_cutpoints: usize, n_pairs: usize, n_voters: usize, n_performers: usize, k: usize) -> Self {
        ParameterState {
            cutpoints: vec![0.0; n_cutpoints],
            beta: [0.0; N_BETA],
            alpha: vec![0.0; n_pairs],
            gamma: 0.0,
            delta: vec![0.0; k * n_performers],
            psi: 0.0,
            phi: 0.0,
            regions: vec![0; n_voters],
            zeta: vec![1.0 / k as f64; k],
            sigma_alpha: 1.0,
            sigma_delta: 1.0,
        }
    }

    /// Zero state shaped for `data` with `k` clusters.
    pub fn zeros_for(data: &Dataset, k: usize) -> Self {
        Self::zeros(
            data.scale().n_cutpoints(),
            data.n_pairs(),
            data.n_voters(),
            data.n_performers(),
            k,
        )
    }

    pub fn k(&self) -> usize {
        self.zeta.len()
    }

    pub fn n_performers(&self) -> usize {
        if self.zeta.is_empty() {
            0
        } else {
            self.delta.len() / self.zeta.len()
        }
    }

    pub fn delta(&self, k: usize, p: usize) -> f64 {
        self.delta[k * self.n_performers() + p]
    }

    pub fn delta_mut(&mut self, k: usize, p: usize) -> &mut f64 {
        let n = self.n_performers();
        &mut self.delta[k * n + p]
    }

    /// Checks ordering, simplex and scale-bound invariants plus shape agreement
    /// with `data`.
    pub fn check(&self, config: &ModelConfig, data: &Dataset) -> Result<()> {
        if self.cutpoints.len() != data.scale().n_cutpoints() {
            return Err(Error::invariant(format!(
                "{} cutpoints for a {}-category scale",
                self.cutpoints.len(),
                data.scale().len()
            )));
        }
        if self.alpha.len() != data.n_pairs() {
            return Err(Error::invariant(format!(
                "{} alpha values for {} observed pairs",
                self.alpha.len(),
                data.n_pairs()
            )));
        }
        if self.regions.len() != data.n_voters() || self.delta.len() != self.k() * data.n_performers() {
            return Err(Error::invariant("region or delta dimensions do not match the data"));
        }
        self.check_structure(config)
    }

    /// Data-independent invariants.
    pub fn check_structure(&self, config: &ModelConfig) -> Result<()> {
        if let Some(i) = (1..self.cutpoints.len()).find(|&i| !(self.cutpoints[i - 1] < self.cutpoints[i])) {
            return Err(Error::invariant(format!(
                "cutpoints not strictly increasing at position {i}: {:?}",
                &self.cutpoints[i - 1..=i]
            )));
        }
        if self.k() != config.k {
            return Err(Error::invariant(format!(
                "state has {} clusters, config expects {}",
                self.k(),
                config.k
            )));
        }
        if self.zeta.iter().any(|z| !(*z > 0.0)) {
            return Err(Error::invariant("cluster weights must be positive"));
        }
        let total: f64 = self.zeta.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invariant(format!("cluster weights sum to {total}")));
        }
        if let Some(r) = self.regions.iter().find(|&&r| r >= self.k()) {
            return Err(Error::invariant(format!("region {r} outside 0..{}", self.k())));
        }
        let (lo, hi) = config.logsd_bounds;
        for (name, s) in [("sigma_alpha", self.sigma_alpha), ("sigma_delta", self.sigma_delta)] {
            let ls = s.ln();
            if !(s > 0.0) || ls < lo || ls > hi {
                return Err(Error::invariant(format!("log({name}) = {ls} outside [{lo}, {hi}]")));
            }
        }
        if config.pin_gamma && self.gamma != 0.0 {
            return Err(Error::invariant("gamma is pinned at 0"));
        }
        let all_finite = self
            .cutpoints
            .iter()
            .chain(self.beta.iter())
            .chain(self.alpha.iter())
            .chain(self.delta.iter())
            .chain([self.gamma, self.psi, self.phi].iter())
            .all(|x| x.is_finite());
        if !all_finite {
            return Err(Error::invariant("non-finite parameter value"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        let c = ModelConfig::default();
        c.validate().unwrap();
        assert_eq!(c.sigma2_lambda, 10.0);
        assert_eq!(c.beta_sd, 1e4);
        assert_eq!(c.logsd_bounds, (-3.0, 3.0));
    }

    #[test]
    fn config_validation_catches_bad_values() {
        let mut c = ModelConfig::new(2);
        c.dirichlet = vec![1.0];
        assert!(c.validate().is_err());
        let mut c = ModelConfig::new(2);
        c.logsd_bounds = (1.0, -1.0);
        assert!(c.validate().is_err());
        let mut c = ModelConfig::new(2);
        c.sigma2_lambda = 0.0;
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        assert!(ModelConfig::new(0).validate().is_err());
    }

    #[test]
    fn structural_invariants() {
        let config = ModelConfig::new(2);
        let mut s = ParameterState::zeros(3, 1, 2, 2, 2);
        assert!(s.check_structure(&config).is_err());
        s.cutpoints = vec![-1.0, 0.0, 1.0];
        s.check_structure(&config).unwrap();
        s.sigma_alpha = (3.5f64).exp();
        assert!(s.check_structure(&config).is_err());
        s.sigma_alpha = 1.0;
        s.zeta = vec![0.7, 0.4];
        assert!(s.check_structure(&config).is_err());
        s.zeta = vec![0.5, 0.5];
        s.regions[0] = 2;
        assert!(s.check_structure(&config).is_err());
    }

    #[test]
    fn delta_layout_is_row_major_by_cluster() {
        let mut s = ParameterState::zeros(1, 0, 1, 3, 2);
        *s.delta_mut(1, 2) = 4.0;
        assert_eq!(s.delta[5], 4.0);
        assert_eq!(s.delta(1, 2), 4.0);
        assert_eq!(s.n_performers(), 3);
    }
}
