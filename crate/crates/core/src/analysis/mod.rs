//! Posterior post-processing: standardised pair effects and their tail
//! probabilities, cluster membership, parameter summaries and model selection.

mod relabel;

pub use relabel::{matching_permutation, permute_clusters, relabel, relabel_to};

use crate::error::{Error, Result};
use crate::mcmc::PosteriorDraws;
use crate::stats::{exact_mean, exact_sum, lower_quantile, sorted};

/// Default cut-off on the standardised scale.
pub const DEFAULT_THRESHOLD: f64 = 1.96;

/// `(alpha - mean) / sd` over the pair effects of one draw, with the sample
/// standard deviation (denominator `H - 1`).
pub fn standardize_alpha(alpha: &[f64]) -> Result<Vec<f64>> {
    let h = alpha.len();
    if h < 2 {
        return Err(Error::degenerate(format!("standardising needs at least 2 pair effects, got {h}")));
    }
    let m = exact_mean(alpha);
    let ss = exact_sum(alpha.iter().map(|a| (a - m) * (a - m)));
    let sd = (ss / (h as f64 - 1.0)).sqrt();
    if !(sd > 0.0) {
        return Err(Error::degenerate("all pair effects are equal in this draw"));
    }
    Ok(alpha.iter().map(|a| (a - m) / sd).collect())
}

/// Posterior summary of one standardised pair effect.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasRow {
    pub voter: String,
    pub performer: String,
    pub mean: f64,
    pub q025: f64,
    pub q25: f64,
    pub q75: f64,
    pub q975: f64,
    /// Fraction of draws above `+threshold`.
    pub p_pos: f64,
    /// Fraction of draws below `-threshold`.
    pub p_neg: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiasReport {
    pub threshold: f64,
    /// Ordered by voter, then performer.
    pub rows: Vec<BiasRow>,
}

/// Standardises every draw and tabulates, per observed pair, the posterior
/// mean, quartiles, 95% interval and exceedance fractions of the standardised
/// effect.
pub fn exceedance(draws: &PosteriorDraws, threshold: f64) -> Result<BiasReport> {
    let total = draws.total_draws();
    if total == 0 {
        return Err(Error::data("the archive has no draws"));
    }
    let h = draws.layout.pairs.len();
    let mut per_pair: Vec<Vec<f64>> = vec![Vec::with_capacity(total); h];
    for d in draws.iter() {
        for (slot, x) in per_pair.iter_mut().zip(standardize_alpha(&d.state.alpha)?) {
            slot.push(x);
        }
    }
    let n = total as f64;
    let rows = draws
        .layout
        .pairs
        .iter()
        .zip(per_pair)
        .map(|(&(v, p), values)| {
            let s = sorted(&values);
            let above = values.iter().filter(|&&x| x > threshold).count();
            let below = values.iter().filter(|&&x| x < -threshold).count();
            BiasRow {
                voter: draws.layout.voters[v].clone(),
                performer: draws.layout.performers[p].clone(),
                mean: exact_mean(&values),
                q025: lower_quantile(&s, 0.025),
                q25: lower_quantile(&s, 0.25),
                q75: lower_quantile(&s, 0.75),
                q975: lower_quantile(&s, 0.975),
                p_pos: above as f64 / n,
                p_neg: below as f64 / n,
            }
        })
        .collect();
    Ok(BiasReport { threshold, rows })
}

/// Per-voter summary of the effects on one performer, as plotted in a
/// coefficient plot.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefplotRow {
    pub voter: String,
    pub mean: f64,
    pub q025: f64,
    pub q25: f64,
    pub q75: f64,
    pub q975: f64,
}

pub fn coefplot(report: &BiasReport, performer: &str) -> Vec<CoefplotRow> {
    report
        .rows
        .iter()
        .filter(|r| r.performer == performer)
        .map(|r| CoefplotRow {
            voter: r.voter.clone(),
            mean: r.mean,
            q025: r.q025,
            q25: r.q25,
            q75: r.q75,
            q975: r.q975,
        })
        .collect()
}

/// Posterior cluster-membership frequencies, one row per voter.
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipMatrix {
    pub voters: Vec<String>,
    pub k: usize,
    probs: Vec<f64>,
}

impl MembershipMatrix {
    pub fn get(&self, voter: usize, k: usize) -> f64 {
        self.probs[voter * self.k + k]
    }

    pub fn row(&self, voter: usize) -> &[f64] {
        &self.probs[voter * self.k..(voter + 1) * self.k]
    }

    /// Most probable cluster of each voter (lowest index on ties).
    pub fn modal_clusters(&self) -> Vec<usize> {
        (0..self.voters.len())
            .map(|v| {
                let row = self.row(v);
                (0..self.k).fold(0, |best, k| if row[k] > row[best] { k } else { best })
            })
            .collect()
    }
}

/// Fraction of draws placing each voter in each cluster. Run [`relabel`] first
/// when `k > 1`.
pub fn membership(draws: &PosteriorDraws) -> MembershipMatrix {
    let k = draws.layout.k;
    let v = draws.layout.voters.len();
    let mut counts = vec![0usize; v * k];
    for d in draws.iter() {
        for (voter, &r) in d.state.regions.iter().enumerate() {
            counts[voter * k + r] += 1;
        }
    }
    let n = draws.total_draws() as f64;
    MembershipMatrix {
        voters: draws.layout.voters.clone(),
        k,
        probs: counts.into_iter().map(|c| c as f64 / n).collect(),
    }
}

/// Posterior mean and empirical quantiles of one scalar parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSummary {
    pub name: String,
    pub mean: f64,
    pub q025: f64,
    pub q25: f64,
    pub q75: f64,
    pub q975: f64,
}

/// Summaries of every scalar column except the cluster labels.
///
/// Quantiles use the lower empirical rule of [`lower_quantile`]: the smallest
/// draw whose empirical CDF reaches the requested level.
pub fn summarize(draws: &PosteriorDraws) -> Result<Vec<ParameterSummary>> {
    if draws.is_empty() {
        return Err(Error::data("the archive has no draws"));
    }
    let names = draws.layout.column_names();
    let traces = draws.traces();
    Ok(names
        .into_iter()
        .zip(traces)
        .filter(|(name, _)| !name.starts_with("R."))
        .map(|(name, chains)| {
            let all: Vec<f64> = chains.into_iter().flatten().collect();
            let s = sorted(&all);
            ParameterSummary {
                name,
                mean: exact_mean(&all),
                q025: lower_quantile(&s, 0.025),
                q25: lower_quantile(&s, 0.25),
                q75: lower_quantile(&s, 0.75),
                q975: lower_quantile(&s, 0.975),
            }
        })
        .collect())
}

/// Rows of the fixed-effect table: coefficients, border and migration effects.
pub fn fixed_effects_table(summaries: &[ParameterSummary]) -> Vec<&ParameterSummary> {
    summaries
        .iter()
        .filter(|s| s.name.starts_with("beta.") || s.name == "psi" || s.name == "phi")
        .collect()
}

/// Number of clusters with the smallest DIC; ties go to the smaller `k`.
pub fn select_model(results: &[(usize, f64)]) -> Result<usize> {
    results
        .iter()
        .copied()
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        .map(|(k, _)| k)
        .ok_or_else(|| Error::data("no models to compare"))
}
