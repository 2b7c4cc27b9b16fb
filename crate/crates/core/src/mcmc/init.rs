use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{Dataset, ModelConfig, ParameterState};

/// Smallest gap kept between consecutive starting cutpoints.
const MIN_CUTPOINT_GAP: f64 = 0.05;

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Empirical logits of the cumulative score frequencies, `logit(P(y <= s))`.
///
/// Frequencies are clamped half a record away from 0 and 1, and ties caused by
/// empty categories are spread by a small fixed gap.
pub fn empirical_cutpoints(data: &Dataset) -> Vec<f64> {
    let n = data.records().len() as f64;
    let n_cut = data.scale().n_cutpoints();
    let floor = 0.5 / n;
    let mut cum = 0.0;
    let mut out: Vec<f64> = Vec::with_capacity(n_cut);
    for s in 0..n_cut {
        cum += data.category_records(s).len() as f64;
        let f = (cum / n).clamp(floor, 1.0 - floor);
        let mut l = logit(f);
        if let Some(&prev) = out.last() {
            if l < prev + MIN_CUTPOINT_GAP {
                l = prev + MIN_CUTPOINT_GAP;
            }
        }
        out.push(l);
    }
    out
}

/// Starting state of a chain.
///
/// Cutpoints come from [`empirical_cutpoints`]; every regression coefficient and
/// effect starts at 0, the cluster weights are uniform, voters are assigned to
/// clusters uniformly at random and both scales start at 1 (or at the centre of
/// the log-scale bounds if 0 lies outside them).
pub fn init_state<R: Rng + ?Sized>(config: &ModelConfig, data: &Dataset, rng: &mut R) -> Result<ParameterState> {
    config.validate()?;
    if data.records().is_empty() {
        return Err(Error::data("cannot initialise a chain on a dataset with no records"));
    }
    let mut state = ParameterState::zeros_for(data, config.k);
    state.cutpoints = empirical_cutpoints(data);
    for r in &mut state.regions {
        *r = rng.random_range(0..config.k);
    }
    let (lo, hi) = config.logsd_bounds;
    let start = if lo <= 0.0 && 0.0 <= hi { 0.0 } else { 0.5 * (lo + hi) };
    state.sigma_alpha = start.exp();
    state.sigma_delta = start.exp();
    state.check(config, data)?;
    Ok(state)
}
