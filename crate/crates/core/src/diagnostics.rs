//! Convergence diagnostics and the deviance information criterion.

use crate::error::{Error, Result};
use crate::mcmc::PosteriorDraws;
use crate::model::{log_likelihood, Dataset, N_BETA};
use crate::stats::{exact_mean, exact_sum, mean, sample_variance};

/// PSRF above which a parameter is flagged.
pub const PSRF_WARN: f64 = 1.1;
/// Effective sample size below which a parameter is flagged.
pub const ESS_WARN: f64 = 100.0;

fn check_traces(traces: &[&[f64]], min_len: usize) -> Result<usize> {
    let n = traces.first().map_or(0, |t| t.len());
    if traces.iter().any(|t| t.len() != n) {
        return Err(Error::data("traces must have equal lengths"));
    }
    if n < min_len {
        return Err(Error::data(format!("need at least {min_len} draws per chain, got {n}")));
    }
    Ok(n)
}

/// Classic (non-split) Gelman-Rubin potential scale reduction factor.
///
/// `sqrt(((n-1)/n W + B/n) / W)` with `W` the mean within-chain variance and
/// `B/n` the variance of the chain means.
pub fn gelman_rubin(traces: &[&[f64]]) -> Result<f64> {
    if traces.len() < 2 {
        return Err(Error::data("PSRF needs at least two chains"));
    }
    let n = check_traces(traces, 10)? as f64;
    let means: Vec<f64> = traces.iter().map(|t| mean(t)).collect();
    let within = mean(&traces.iter().map(|t| sample_variance(t)).collect::<Vec<_>>());
    if !(within > 0.0) {
        return Err(Error::degenerate("zero within-chain variance (constant trace)"));
    }
    let b_over_n = sample_variance(&means);
    Ok((((n - 1.0) / n * within + b_over_n) / within).sqrt())
}

/// PSRF after splitting each chain into halves (odd middle draw dropped).
pub fn gelman_rubin_split(traces: &[&[f64]]) -> Result<f64> {
    let n = check_traces(traces, 20)?;
    let half = n / 2;
    let mut halves: Vec<&[f64]> = Vec::with_capacity(2 * traces.len());
    for t in traces {
        halves.push(&t[..half]);
        halves.push(&t[n - half..]);
    }
    gelman_rubin(&halves)
}

/// Biased autocovariance at `lag` (denominator `n`).
fn autocovariance(trace: &[f64], centre: f64, lag: usize) -> f64 {
    let n = trace.len();
    trace[..n - lag]
        .iter()
        .zip(&trace[lag..])
        .map(|(a, b)| (a - centre) * (b - centre))
        .sum::<f64>()
        / n as f64
}

/// Sample autocorrelation at `lag` with the usual biased normalisation.
pub fn autocorrelation(trace: &[f64], lag: usize) -> Result<f64> {
    if lag >= trace.len() {
        return Err(Error::data(format!("lag {lag} is not below the trace length {}", trace.len())));
    }
    let m = mean(trace);
    let c0 = autocovariance(trace, m, 0);
    if !(c0 > 0.0) {
        return Err(Error::degenerate("constant trace has no autocorrelation"));
    }
    if lag == 0 {
        return Ok(1.0);
    }
    Ok((autocovariance(trace, m, lag) / c0).clamp(-1.0, 1.0))
}

/// Effective sample size pooled over chains.
///
/// Autocorrelations combine within-chain autocovariances with the between-chain
/// variance, then `1 + 2 sum rho` is truncated with Geyer's initial positive
/// sequence: summing stops at the first pair `rho_{2k} + rho_{2k+1}` that is
/// negative. The result lies in `[1, chains * n]`.
pub fn effective_sample_size(traces: &[&[f64]]) -> Result<f64> {
    if traces.is_empty() {
        return Err(Error::data("no traces"));
    }
    let n = check_traces(traces, 10)?;
    let m = traces.len();
    let nf = n as f64;
    let means: Vec<f64> = traces.iter().map(|t| mean(t)).collect();
    let acov0: Vec<f64> = traces.iter().zip(&means).map(|(t, &mu)| autocovariance(t, mu, 0)).collect();
    let within = mean(&acov0) * nf / (nf - 1.0);
    let mut var_plus = within * (nf - 1.0) / nf;
    if m > 1 {
        var_plus += sample_variance(&means);
    }
    if !(within > 0.0) || !(var_plus > 0.0) {
        return Err(Error::degenerate("constant trace has no effective sample size"));
    }
    let rho = |lag: usize| -> f64 {
        let acov: f64 = traces
            .iter()
            .zip(&means)
            .map(|(t, &mu)| autocovariance(t, mu, lag))
            .sum::<f64>()
            / m as f64;
        1.0 - (within - acov) / var_plus
    };

    let mut tau = -1.0;
    let mut lag = 0;
    while lag + 1 < n {
        let first = if lag == 0 { 1.0 } else { rho(lag) };
        let pair = first + rho(lag + 1);
        if pair < 0.0 {
            break;
        }
        tau += 2.0 * pair;
        lag += 2;
    }
    let total = (m * n) as f64;
    Ok((total / tau).clamp(1.0, total))
}

/// Deviance information criterion of an archive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dic {
    pub dic: f64,
    pub p_d: f64,
    pub mean_deviance: f64,
    /// Deviance at the posterior means of cutpoints, fixed effects and pair effects.
    pub plugin_deviance: f64,
    /// The averaged cutpoints had to be re-sorted.
    pub resorted_cutpoints: bool,
}

/// `DIC = Dbar + pD` with `pD = Dbar - D(plug-in)`.
///
/// The plug-in point replaces the cutpoints, fixed effects and pair effects (the
/// parameters that enter the likelihood directly) by their posterior means.
/// Means use exact summation, so the result does not depend on draw order.
pub fn dic(draws: &PosteriorDraws, data: &Dataset) -> Result<Dic> {
    let total = draws.total_draws();
    if total == 0 {
        return Err(Error::data("DIC needs at least one stored draw"));
    }
    let first = &draws.iter().next().expect("non-empty").state;
    if first.cutpoints.len() != data.scale().n_cutpoints() || first.alpha.len() != data.n_pairs() {
        return Err(Error::data("draws do not match the dataset"));
    }
    let n = total as f64;
    let mean_deviance = exact_sum(draws.iter().map(|d| d.deviance)) / n;

    let mut plug = first.clone();
    for (s, x) in plug.cutpoints.iter_mut().enumerate() {
        *x = exact_sum(draws.iter().map(|d| d.state.cutpoints[s])) / n;
    }
    for j in 0..N_BETA {
        plug.beta[j] = exact_sum(draws.iter().map(|d| d.state.beta[j])) / n;
    }
    for (h, x) in plug.alpha.iter_mut().enumerate() {
        *x = exact_sum(draws.iter().map(|d| d.state.alpha[h])) / n;
    }
    let resorted_cutpoints = plug.cutpoints.windows(2).any(|w| !(w[0] < w[1]));
    if resorted_cutpoints {
        plug.cutpoints.sort_by(f64::total_cmp);
    }
    let plugin_deviance = -2.0 * log_likelihood(&plug, data);
    let p_d = mean_deviance - plugin_deviance;
    Ok(Dic {
        dic: mean_deviance + p_d,
        p_d,
        mean_deviance,
        plugin_deviance,
        resorted_cutpoints,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flag {
    Ok,
    Warn,
    Degenerate,
}

impl std::fmt::Display for Flag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Flag::Ok => "ok",
            Flag::Warn => "warn",
            Flag::Degenerate => "degenerate",
        })
    }
}

/// Diagnostics of one scalar parameter. `None` marks a statistic that is
/// unavailable (single chain, too few draws, constant trace).
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticRow {
    pub parameter: String,
    pub psrf: Option<f64>,
    pub ess: Option<f64>,
    pub ac1: Option<f64>,
    pub ac5: Option<f64>,
    pub ac10: Option<f64>,
    pub flag: Flag,
}

fn pooled_autocorrelation(traces: &[&[f64]], lag: usize) -> Option<f64> {
    let vals: Vec<f64> = traces.iter().filter_map(|t| autocorrelation(t, lag).ok()).collect();
    (!vals.is_empty()).then(|| exact_mean(&vals))
}

/// PSRF, ESS and lag-1/5/10 autocorrelation (averaged over chains) for every
/// scalar column except the cluster labels.
///
/// A row is `warn` when PSRF exceeds [`PSRF_WARN`] or ESS falls below
/// [`ESS_WARN`], and `degenerate` when the parameter never moves.
pub fn diagnose_all(draws: &PosteriorDraws) -> Vec<DiagnosticRow> {
    let names = draws.layout.column_names();
    let traces = draws.traces();
    names
        .into_iter()
        .zip(traces)
        .filter(|(name, _)| !name.starts_with("R."))
        .map(|(parameter, chains)| {
            let refs: Vec<&[f64]> = chains.iter().map(Vec::as_slice).collect();
            let constant = refs
                .iter()
                .flat_map(|t| t.iter())
                .all(|x| Some(x) == refs.first().and_then(|t| t.first()));
            let psrf = if refs.len() >= 2 { gelman_rubin(&refs).ok() } else { None };
            let ess = effective_sample_size(&refs).ok();
            let flag = if constant {
                Flag::Degenerate
            } else if psrf.is_some_and(|r| r > PSRF_WARN) || ess.is_some_and(|e| e < ESS_WARN) {
                Flag::Warn
            } else {
                Flag::Ok
            };
            DiagnosticRow {
                parameter,
                psrf,
                ess,
                ac1: pooled_autocorrelation(&refs, 1),
                ac5: pooled_autocorrelation(&refs, 5),
                ac10: pooled_autocorrelation(&refs, 10),
                flag,
            }
        })
        .collect()
}
