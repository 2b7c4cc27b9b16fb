//! Synthetic panels drawn from the model with known parameters.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::mcmc::{fmt_f64, Layout};
use crate::model::{
    sigmoid, ActType, Dataset, DatasetParts, Language, PairStructure, ParameterState, Performance, Record,
    ScoreScale, N_BETA,
};

/// Draws a category from the cumulative-logit distribution at `mu`.
pub fn sample_category<R: Rng + ?Sized>(cutpoints: &[f64], mu: f64, rng: &mut R) -> usize {
    let u: f64 = rng.random();
    cutpoints
        .iter()
        .position(|&l| u < sigmoid(l - mu))
        .unwrap_or(cutpoints.len())
}

/// One fresh category per record of `data`, in record order.
pub fn simulate_scores<R: Rng + ?Sized>(data: &Dataset, state: &ParameterState, rng: &mut R) -> Vec<usize> {
    (0..data.records().len())
        .map(|r| sample_category(&state.cutpoints, data.record_mu(state, r), rng))
        .collect()
}

/// A design (which voter scores which performer in which year, with what
/// covariates and pair structure) plus the parameters generating its scores.
#[derive(Debug, Clone)]
pub struct TrueParameters {
    /// The design; its scores are ignored.
    pub design: Dataset,
    pub state: ParameterState,
}

/// Scores for every record of the design drawn at the true parameters.
pub fn simulate(truth: &TrueParameters, seed: u64) -> Result<Dataset> {
    if truth.state.alpha.len() != truth.design.n_pairs()
        || truth.state.cutpoints.len() != truth.design.scale().n_cutpoints()
    {
        return Err(Error::invariant("true parameters do not match the design"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let categories = simulate_scores(&truth.design, &truth.state, &mut rng);
    truth.design.with_categories(&categories)
}

/// Writes `truth.csv` (`parameter,value`) with the archive column names.
pub fn write_truth(dir: impl AsRef<Path>, truth: &TrueParameters) -> Result<PathBuf> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::write(dir, e))?;
    let layout = Layout::for_data(&truth.design, truth.state.k());
    let mut text = String::from("parameter,value\n");
    let names = layout.column_names();
    let values = layout.flatten(&truth.state, f64::NAN);
    for (name, value) in names.iter().zip(values).filter(|(n, _)| *n != "deviance") {
        let _ = writeln!(text, "{name},{}", fmt_f64(value));
    }
    let path = dir.join("truth.csv");
    fs::write(&path, text).map_err(|e| Error::write(&path, e))?;
    Ok(path)
}

/// Settings for a fully crossed synthetic panel: every voter scores every
/// performer in every year.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDesign {
    pub n_voters: usize,
    pub n_performers: usize,
    pub n_years: usize,
    pub first_year: i32,
    pub k: usize,
    pub scale: ScoreScale,
    /// Equally spaced on [-2.5, 2.5] when `None`.
    pub cutpoints: Option<Vec<f64>>,
    pub beta: [f64; N_BETA],
    pub gamma: f64,
    pub psi: f64,
    pub phi: f64,
    pub sigma_alpha: f64,
    pub sigma_delta: f64,
    /// Voter `v` goes to cluster `v % k` when `None`.
    pub regions: Option<Vec<usize>>,
    pub border_prob: f64,
    pub migration_prob: f64,
}

impl Default for SyntheticDesign {
    fn default() -> Self {
        SyntheticDesign {
            n_voters: 10,
            n_performers: 8,
            n_years: 15,
            first_year: 1998,
            k: 2,
            scale: ScoreScale::contest(),
            cutpoints: None,
            beta: [-0.034, 0.062, -0.131, 0.232, -0.067],
            gamma: 0.0,
            psi: 1.21,
            phi: 0.5,
            sigma_alpha: 0.3,
            sigma_delta: 1.5,
            regions: None,
            border_prob: 0.25,
            migration_prob: 0.4,
        }
    }
}

fn ids(prefix: char, n: usize) -> Vec<String> {
    let width = n.to_string().len().max(2);
    (1..=n).map(|i| format!("{prefix}{i:0width$}")).collect()
}

impl SyntheticDesign {
    /// Draws covariates, pair structure, cluster effects and pair effects.
    pub fn generate(&self, seed: u64) -> Result<TrueParameters> {
        let (v_n, p_n, k) = (self.n_voters, self.n_performers, self.k);
        if v_n == 0 || p_n == 0 || self.n_years == 0 || k == 0 {
            return Err(Error::config("synthetic design needs voters, performers, years and clusters"));
        }
        if !(self.sigma_alpha > 0.0 && self.sigma_delta > 0.0) {
            return Err(Error::config("synthetic standard deviations must be positive"));
        }
        let n_cut = self.scale.n_cutpoints();
        let cutpoints = match &self.cutpoints {
            Some(c) if c.len() == n_cut => c.clone(),
            Some(c) => {
                return Err(Error::config(format!("{} cutpoints given, scale needs {n_cut}", c.len())));
            }
            None if n_cut == 1 => vec![0.0],
            None => (0..n_cut)
                .map(|s| -2.5 + 5.0 * s as f64 / (n_cut - 1) as f64)
                .collect(),
        };
        let regions = match &self.regions {
            Some(r) if r.len() == v_n && r.iter().all(|&x| x < k) => r.clone(),
            Some(_) => return Err(Error::config("regions must give a cluster below k for every voter")),
            None => (0..v_n).map(|v| v % k).collect(),
        };

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let voters = ids('v', v_n);
        let performers = ids('p', p_n);
        let years: Vec<i32> = (0..self.n_years as i32).map(|t| self.first_year + t).collect();

        let mut covariates = BTreeMap::new();
        for p in 0..p_n {
            for &year in &years {
                let u: f64 = rng.random();
                let language = if u < 0.5 {
                    Language::English
                } else if u < 0.8 {
                    Language::Own
                } else {
                    Language::Mixed
                };
                let u: f64 = rng.random();
                let act_type = if u < 0.4 {
                    ActType::Group
                } else if u < 0.75 {
                    ActType::FemaleSolo
                } else {
                    ActType::MaleSolo
                };
                covariates.insert((p, year), Performance { language, act_type });
            }
        }
        let mut pairs = PairStructure::new(v_n, p_n);
        for v in 0..v_n {
            for p in 0..p_n {
                pairs.set_adjacent(v, p, rng.random::<f64>() < self.border_prob);
                if rng.random::<f64>() < self.migration_prob {
                    pairs.set_migration(v, p, Some(rng.random_range(0.0..4.0)));
                }
            }
        }
        let mut records = Vec::with_capacity(v_n * p_n * years.len());
        for v in 0..v_n {
            for p in 0..p_n {
                for &year in &years {
                    records.push(Record {
                        voter: v,
                        performer: p,
                        year,
                        category: 0,
                    });
                }
            }
        }
        let design = Dataset::new(DatasetParts {
            voters,
            performers,
            scale: self.scale.clone(),
            records,
            covariates,
            pairs,
            base_year: None,
        })?;

        let mut state = ParameterState::zeros_for(&design, k);
        state.cutpoints = cutpoints;
        state.beta = self.beta;
        state.gamma = self.gamma;
        state.psi = self.psi;
        state.phi = self.phi;
        state.sigma_alpha = self.sigma_alpha;
        state.sigma_delta = self.sigma_delta;
        state.zeta = vec![1.0 / k as f64; k];
        state.regions = regions;
        let delta_dist = Normal::new(0.0, self.sigma_delta).expect("positive sd");
        for d in &mut state.delta {
            *d = delta_dist.sample(&mut rng);
        }
        let noise = Normal::new(0.0, self.sigma_alpha).expect("positive sd");
        for h in 0..design.n_pairs() {
            state.alpha[h] = design.pair_theta(&state, h) + noise.sample(&mut rng);
        }
        Ok(TrueParameters { design, state })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::category_probs;

    #[test]
    fn very_negative_mu_gives_lowest_category() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cut = [-1.0, 0.0, 2.0];
        assert!((0..1000).all(|_| sample_category(&cut, -1e6, &mut rng) == 0));
        assert!((0..1000).all(|_| sample_category(&cut, 1e6, &mut rng) == 3));
    }

    #[test]
    fn frequencies_match_category_probs() {
        let cut = [-1.3, -0.2, 0.4, 1.9];
        let mu = 0.3;
        let probs = category_probs(&cut, mu).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 100_000;
        let mut counts = [0usize; 5];
        for _ in 0..n {
            counts[sample_category(&cut, mu, &mut rng)] += 1;
        }
        for (c, p) in counts.iter().zip(&probs) {
            assert!((*c as f64 / n as f64 - p).abs() < 0.005, "{counts:?} vs {probs:?}");
        }
    }

    #[test]
    fn same_seed_same_dataset() {
        let truth = SyntheticDesign {
            n_voters: 4,
            n_performers: 3,
            n_years: 3,
            ..Default::default()
        }
        .generate(5)
        .unwrap();
        assert_eq!(simulate(&truth, 9).unwrap(), simulate(&truth, 9).unwrap());
        assert_ne!(simulate(&truth, 9).unwrap(), simulate(&truth, 10).unwrap());
    }
}
