use pathfinding::kuhn_munkres::kuhn_munkres;
use pathfinding::matrix::Matrix;

use crate::mcmc::PosteriorDraws;
use crate::model::ParameterState;

/// Label permutation `perm[old] = new` that maximises agreement between
/// `labels` and `reference` (Hungarian assignment on co-assignment counts).
///
/// Ties resolve to the same permutation for identical inputs.
pub fn matching_permutation(labels: &[usize], reference: &[usize], k: usize) -> Vec<usize> {
    if k <= 1 {
        return vec![0; k];
    }
    let mut counts = Matrix::new(k, k, 0i64);
    for (&a, &b) in labels.iter().zip(reference) {
        counts[(a, b)] += 1;
    }
    // Prefer the identity when counts tie so an unswitched draw keeps its labels.
    let weights = Matrix::from_fn(k, k, |(a, b)| 2 * (k as i64) * counts[(a, b)] + i64::from(a == b));
    kuhn_munkres(&weights).1
}

/// Applies `perm[old] = new` to the cluster labels, cluster effects and weights.
/// Label-invariant quantities (pair means, likelihood) are untouched.
pub fn permute_clusters(state: &mut ParameterState, perm: &[usize]) {
    let k = state.k();
    let n_perf = state.n_performers();
    for r in &mut state.regions {
        *r = perm[*r];
    }
    let mut delta = vec![0.0; state.delta.len()];
    let mut zeta = vec![0.0; k];
    for old in 0..k {
        let new = perm[old];
        delta[new * n_perf..(new + 1) * n_perf].copy_from_slice(&state.delta[old * n_perf..(old + 1) * n_perf]);
        zeta[new] = state.zeta[old];
    }
    state.delta = delta;
    state.zeta = zeta;
}

/// Relabels every draw towards `reference`, a cluster assignment of all voters.
pub fn relabel_to(draws: &PosteriorDraws, reference: &[usize]) -> PosteriorDraws {
    let mut out = draws.clone();
    let k = draws.layout.k;
    if k < 2 {
        return out;
    }
    for d in out.chains.iter_mut().flatten() {
        let perm = matching_permutation(&d.state.regions, reference, k);
        permute_clusters(&mut d.state, &perm);
    }
    out
}

/// Relabels every draw towards the partition of the first retained draw of
/// the first chain.
pub fn relabel(draws: &PosteriorDraws) -> PosteriorDraws {
    match draws.chains.first().and_then(|c| c.first()) {
        Some(first) => {
            let reference = first.state.regions.clone();
            relabel_to(draws, &reference)
        }
        None => draws.clone(),
    }
}
