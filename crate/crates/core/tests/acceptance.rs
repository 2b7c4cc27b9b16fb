//! Acceptance criteria, one PASS/FAIL line each. Runs as a plain binary
//! (`harness = false`) and exits non-zero when any criterion fails.

use std::collections::BTreeMap;
use std::fs;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Normal};

use ordvote::analysis::{
    matching_permutation, membership, relabel, select_model, standardize_alpha, summarize,
};
use ordvote::cli::report_tables;
use ordvote::diagnostics::{dic, gelman_rubin};
use ordvote::io::{simulate, simulate_scores, SyntheticDesign};
use ordvote::mcmc::{
    self, read_archive, region_conditional, sample_dirichlet, sweep, theta_conditional, update_alpha,
    update_beta_block, update_cutpoints, update_variances, write_archive, zeta_posterior, PosteriorDraws,
    SamplerConfig, ThetaCoordinate, Tuning,
};
use ordvote::model::{
    category_probs, linear_predictor, log_prior, theta_mean, ActType, CovariateProfile, Dataset, DatasetParts,
    Language, ModelConfig, PairStructure, ParameterState, Performance, Record, ScoreScale,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

// ---------------------------------------------------------------- helpers

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// P(y = c) written directly from the cumulative-logit definition.
fn direct_prob(cut: &[f64], mu: f64, c: usize) -> f64 {
    let upper = if c < cut.len() { logistic(cut[c] - mu) } else { 1.0 };
    let lower = if c == 0 { 0.0 } else { logistic(cut[c - 1] - mu) };
    upper - lower
}

/// Posterior mean of `g` under the unnormalised log density `logf` by the
/// midpoint rule on `n` cells of [lo, hi].
fn grid_mean(lo: f64, hi: f64, n: usize, logf: impl Fn(f64) -> f64, g: impl Fn(f64) -> f64) -> f64 {
    let step = (hi - lo) / n as f64;
    let xs: Vec<f64> = (0..n).map(|i| lo + (i as f64 + 0.5) * step).collect();
    let lf: Vec<f64> = xs.iter().map(|&x| logf(x)).collect();
    let max = lf.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (mut num, mut den) = (0.0, 0.0);
    for (x, l) in xs.iter().zip(&lf) {
        let w = (l - max).exp();
        num += w * g(*x);
        den += w;
    }
    num / den
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() as f64 - 1.0)
}

/// Monte Carlo standard error of the mean by non-overlapping batch means.
fn batch_se(x: &[f64], batches: usize) -> f64 {
    let b = x.len() / batches;
    let means: Vec<f64> = (0..batches).map(|i| mean(&x[i * b..(i + 1) * b])).collect();
    (variance(&means) / batches as f64).sqrt()
}

fn english_group() -> Performance {
    Performance {
        language: Language::English,
        act_type: ActType::Group,
    }
}

/// Every voter scores every performer in each of `years` years; `category`
/// gives the score category of the i-th record in (voter, performer, year) order.
fn crossed(
    voters: usize,
    performers: usize,
    years: usize,
    scale: ScoreScale,
    category: impl Fn(usize) -> usize,
) -> Dataset {
    let mut records = Vec::new();
    let mut covariates = BTreeMap::new();
    for v in 0..voters {
        for p in 0..performers {
            for t in 0..years {
                let i = records.len();
                records.push(Record {
                    voter: v,
                    performer: p,
                    year: 2000 + t as i32,
                    category: category(i),
                });
            }
        }
    }
    for p in 0..performers {
        for t in 0..years {
            covariates.insert((p, 2000 + t as i32), english_group());
        }
    }
    Dataset::new(DatasetParts {
        voters: (0..voters).map(|v| format!("v{v}")).collect(),
        performers: (0..performers).map(|p| format!("p{p}")).collect(),
        scale,
        records,
        covariates,
        pairs: PairStructure::new(voters, performers),
        base_year: None,
    })
    .expect("valid toy dataset")
}

fn frozen_tuning(data: &Dataset) -> Tuning {
    let mut t = Tuning::new(data);
    t.set_adaptation(None);
    t
}

fn recovery_sampler(seed: u64, thin: usize) -> SamplerConfig {
    SamplerConfig {
        chains: 2,
        iterations: 6000,
        burn_in: 1000,
        thin,
        seed,
        jobs: 2,
        check_invariants: false,
        ..SamplerConfig::default()
    }
}

fn column<'a>(draws: &PosteriorDraws, traces: &'a [Vec<Vec<f64>>], name: &str) -> &'a [Vec<f64>] {
    let idx = draws
        .layout
        .column_names()
        .iter()
        .position(|n| n == name)
        .unwrap_or_else(|| panic!("no column {name}"));
    &traces[idx]
}

// ---------------------------------------------------------------- criteria

fn normalization() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut worst: f64 = 0.0;
    let mut negative = 0;
    for _ in 0..1000 {
        let n_cut = rng.random_range(1..=11);
        let mut cut: Vec<f64> = (0..n_cut).map(|_| rng.random_range(-8.0..8.0)).collect();
        cut.sort_by(f64::total_cmp);
        cut.dedup();
        let mu = rng.random_range(-40.0..40.0);
        let probs = category_probs(&cut, mu).expect("ordered cutpoints");
        worst = worst.max((probs.iter().sum::<f64>() - 1.0).abs());
        negative += probs.iter().filter(|&&p| p < 0.0).count();
    }
    let elapsed = started.elapsed();
    outcome(
        worst <= 1e-12 && negative == 0 && elapsed < Duration::from_secs(1),
        format!("max |sum-1| = {worst:.1e}, negative entries {negative}, {elapsed:.2?} (< 1 s)"),
    )
}

/// Runs `step` `n` times after `warm` discarded iterations and compares the
/// mean of `read` with `oracle`; returns (|z|, detail).
fn mh_check(
    label: &str,
    warm: usize,
    n: usize,
    oracle: f64,
    mut step: impl FnMut(),
    read: impl Fn() -> f64,
) -> (f64, String) {
    for _ in 0..warm {
        step();
    }
    let mut xs = Vec::with_capacity(n);
    for _ in 0..n {
        step();
        xs.push(read());
    }
    let m = mean(&xs);
    let se = batch_se(&xs, 50);
    let z = (m - oracle).abs() / se;
    (z, format!("{label} {m:.4} vs {oracle:.4} ({z:.2} MCSE)"))
}

fn oracle_equivalence() -> Outcome {
    let started = Instant::now();
    let mut details = Vec::new();
    let mut ok = true;

    // Conjugate theta-block coordinates against the normal regression formula.
    let truth = SyntheticDesign {
        n_voters: 6,
        n_performers: 5,
        n_years: 2,
        k: 3,
        ..Default::default()
    }
    .generate(4)
    .unwrap();
    let data = &truth.design;
    let mut state = truth.state.clone();
    state.gamma = 0.4;
    state.psi = -0.7;
    state.phi = 0.25;
    let config = ModelConfig {
        hyper_variance: 2.5,
        ..ModelConfig::new(3)
    };
    let s = data.structure();
    let mut worst: f64 = 0.0;
    let mut coords = vec![ThetaCoordinate::Gamma, ThetaCoordinate::Psi, ThetaCoordinate::Phi];
    for cluster in 0..3 {
        for performer in 0..5 {
            coords.push(ThetaCoordinate::Delta { cluster, performer });
        }
    }
    for coord in coords {
        let (mut sxx, mut sxy) = (0.0, 0.0);
        for (h, &(v, p)) in data.observed_pairs().iter().enumerate() {
            let r = state.regions[v];
            let parts = [
                (ThetaCoordinate::Gamma, 1.0, state.gamma),
                (ThetaCoordinate::Psi, s.border(v, p), state.psi),
                (ThetaCoordinate::Phi, s.migration_term(v, p), state.phi),
                (
                    ThetaCoordinate::Delta { cluster: r, performer: p },
                    1.0,
                    state.delta[r * 5 + p],
                ),
            ];
            let x: f64 = parts.iter().filter(|(c, _, _)| *c == coord).map(|(_, x, _)| x).sum();
            let others: f64 = parts.iter().filter(|(c, _, _)| *c != coord).map(|(_, x, b)| x * b).sum();
            sxx += x * x;
            sxy += x * (state.alpha[h] - others);
        }
        let prior = match coord {
            ThetaCoordinate::Delta { .. } => state.sigma_delta.powi(2),
            _ => config.hyper_variance,
        };
        let noise = state.sigma_alpha.powi(2);
        let precision = sxx / noise + 1.0 / prior;
        let (m, v) = (sxy / noise / precision, 1.0 / precision);
        let got = theta_conditional(&state, data, &config, coord);
        worst = worst
            .max((got.mean - m).abs() / m.abs().max(1.0))
            .max((got.variance - v).abs() / v);
    }
    ok &= worst <= 1e-12;
    details.push(format!("theta block rel err {worst:.1e}"));

    // Region conditional against enumeration of the joint density.
    let config2 = ModelConfig::new(3);
    let mut worst: f64 = 0.0;
    for v in 0..data.n_voters() {
        let got = region_conditional(&state, data, v);
        let logs: Vec<f64> = (0..3)
            .map(|k| {
                let mut st = state.clone();
                st.regions[v] = k;
                log_prior(&st, &config2, data)
            })
            .collect();
        let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let total: f64 = logs.iter().map(|l| (l - max).exp()).sum();
        for k in 0..3 {
            worst = worst.max((got[k] - (logs[k] - max).exp() / total).abs());
        }
    }
    ok &= worst <= 1e-12;
    details.push(format!("regions abs err {worst:.1e}"));

    // Cluster weights: Dirichlet(prior + counts), and Dirichlet(49, 1) draws.
    let mut counts = config2.dirichlet.clone();
    for &r in &state.regions {
        counts[r] += 1.0;
    }
    let post = zeta_posterior(&state, &config2);
    let zeta_err = post.iter().zip(&counts).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    ok &= zeta_err <= 1e-12;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let draws: Vec<f64> = (0..20_000).map(|_| sample_dirichlet(&[49.0, 1.0], &mut rng)[0]).collect();
    let sd = (49.0 * 1.0 / (50.0f64.powi(2) * 51.0)).sqrt() / (20_000f64).sqrt();
    let z = (mean(&draws) - 0.98).abs() / sd;
    ok &= z < 3.0;
    details.push(format!("zeta err {zeta_err:.1e}, Dirichlet(49,1) mean {:.4} ({z:.2} SE)", mean(&draws)));

    // Cutpoint of a two-category model.
    let two = ScoreScale::new(vec![0, 1]).unwrap();
    let data = crossed(1, 6, 5, two, |i| usize::from(i % 3 == 0));
    let mut st = ParameterState::zeros_for(&data, 1);
    let alphas = [-1.0, -0.3, 0.0, 0.4, 1.1, 2.0];
    st.alpha.copy_from_slice(&alphas);
    st.cutpoints = vec![0.0];
    let config = ModelConfig::new(1);
    let mus: Vec<(f64, usize)> = (0..30).map(|i| (alphas[i / 5], usize::from(i % 3 == 0))).collect();
    let oracle = grid_mean(
        -20.0,
        20.0,
        400_000,
        |l| {
            -0.5 * l * l / config.sigma2_lambda
                + mus.iter().map(|&(mu, c)| direct_prob(&[l], mu, c).ln()).sum::<f64>()
        },
        |l| l,
    );
    let mut tuning = frozen_tuning(&data);
    tuning.cutpoints[0].scale = 0.8;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let cell = std::cell::RefCell::new(st);
    let (z, d) = mh_check(
        "lambda_1",
        1000,
        40_000,
        oracle,
        || update_cutpoints(&mut cell.borrow_mut(), &data, &config, &mut tuning, &mut rng),
        || cell.borrow().cutpoints[0],
    );
    ok &= z < 3.0;
    details.push(d);

    // Year coefficient with fixed cutpoints.
    let three = ScoreScale::new(vec![0, 1, 2]).unwrap();
    let data = crossed(1, 2, 10, three, |i| (i * 7 + i / 3) % 3);
    let mut st = ParameterState::zeros_for(&data, 1);
    st.cutpoints = vec![-0.5, 0.8];
    let obs: Vec<(f64, usize)> = data
        .records()
        .iter()
        .map(|r| ((r.year - 2000) as f64, r.category))
        .collect();
    let oracle = grid_mean(
        -3.0,
        3.0,
        200_000,
        |b| {
            -0.5 * b * b / config.beta_sd.powi(2)
                + obs.iter().map(|&(x, c)| direct_prob(&[-0.5, 0.8], b * x, c).ln()).sum::<f64>()
        },
        |b| b,
    );
    let mut tuning = frozen_tuning(&data);
    tuning.beta[0].scale = 0.08;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let cell = std::cell::RefCell::new(st);
    let (z, d) = mh_check(
        "beta_1",
        1000,
        40_000,
        oracle,
        || update_beta_block(&mut cell.borrow_mut(), &data, &config, &mut tuning, &mut rng),
        || cell.borrow().beta[0],
    );
    ok &= z < 3.0;
    details.push(d);

    // One pair effect observed on 15 occasions.
    let data = crossed(1, 1, 15, ScoreScale::contest(), |i| [0, 0, 3, 10, 7, 0, 1, 0, 5, 8, 0, 2, 0, 9, 4][i]);
    let mut st = ParameterState::zeros_for(&data, 1);
    st.cutpoints = (0..10).map(|s| -2.0 + 0.45 * s as f64).collect();
    st.gamma = 0.3;
    st.sigma_alpha = 1.0;
    let cut = st.cutpoints.clone();
    let cats: Vec<usize> = data.records().iter().map(|r| r.category).collect();
    let oracle = grid_mean(
        -10.0,
        10.0,
        200_000,
        |a| -0.5 * (a - 0.3).powi(2) + cats.iter().map(|&c| direct_prob(&cut, a, c).ln()).sum::<f64>(),
        |a| a,
    );
    let mut tuning = frozen_tuning(&data);
    tuning.alpha[0].scale = 1.0;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cell = std::cell::RefCell::new(st);
    let (z, d) = mh_check(
        "alpha",
        1000,
        40_000,
        oracle,
        || update_alpha(&mut cell.borrow_mut(), &data, &mut tuning, &mut rng),
        || cell.borrow().alpha[0],
    );
    ok &= z < 3.0;
    details.push(d);

    // Pair-effect scale from 200 residuals with true sd 0.5.
    let data = crossed(20, 10, 1, ScoreScale::new(vec![0, 1]).unwrap(), |i| i % 2);
    let mut st = ParameterState::zeros_for(&data, 1);
    let noise = Normal::new(0.0, 0.5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for a in &mut st.alpha {
        *a = noise.sample(&mut rng);
    }
    st.sigma_alpha = 0.5;
    let ss: f64 = st.alpha.iter().map(|a| a * a).sum();
    let h = st.alpha.len() as f64;
    let (lo, hi) = config.logsd_bounds;
    let oracle = grid_mean(lo, hi, 200_000, |ls| -h * ls - 0.5 * ss * (-2.0 * ls).exp(), f64::exp);
    let mut tuning = frozen_tuning(&data);
    tuning.log_sigma_alpha.scale = 0.1;
    let cell = std::cell::RefCell::new(st);
    let (z, d) = mh_check(
        "sigma_alpha",
        1000,
        40_000,
        oracle,
        || update_variances(&mut cell.borrow_mut(), &data, &config, &mut tuning, &mut rng),
        || cell.borrow().sigma_alpha,
    );
    ok &= z < 3.0;
    details.push(d);

    let elapsed = started.elapsed();
    ok &= elapsed < Duration::from_secs(120);
    details.push(format!("{elapsed:.2?} (< 2 min)"));
    outcome(ok, details.join("; "))
}

/// Independent draw of every parameter from the prior.
fn prior_draw(config: &ModelConfig, data: &Dataset, rng: &mut ChaCha8Rng) -> ParameterState {
    let k = config.k;
    let mut st = ParameterState::zeros_for(data, k);
    let lam = Normal::new(0.0, config.sigma2_lambda.sqrt()).unwrap();
    st.cutpoints = (0..data.scale().n_cutpoints()).map(|_| lam.sample(rng)).collect();
    st.cutpoints.sort_by(f64::total_cmp);
    let b = Normal::new(0.0, config.beta_sd).unwrap();
    for x in &mut st.beta {
        *x = b.sample(rng);
    }
    let hyper = Normal::new(0.0, config.hyper_variance.sqrt()).unwrap();
    st.gamma = hyper.sample(rng);
    st.psi = hyper.sample(rng);
    st.phi = hyper.sample(rng);
    let (lo, hi) = config.logsd_bounds;
    st.sigma_alpha = rng.random_range(lo..hi).exp();
    st.sigma_delta = rng.random_range(lo..hi).exp();
    let g: Vec<f64> = config
        .dirichlet
        .iter()
        .map(|&a| Gamma::new(a, 1.0).unwrap().sample(rng))
        .collect();
    let total: f64 = g.iter().sum();
    st.zeta = g.iter().map(|x| x / total).collect();
    for r in &mut st.regions {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        *r = k - 1;
        for (j, z) in st.zeta.iter().enumerate() {
            acc += z;
            if u < acc {
                *r = j;
                break;
            }
        }
    }
    let d = Normal::new(0.0, st.sigma_delta).unwrap();
    for x in &mut st.delta {
        *x = d.sample(rng);
    }
    let s = data.structure();
    for (h, &(v, p)) in data.observed_pairs().iter().enumerate() {
        let theta = theta_mean(&st, v, p, s);
        st.alpha[h] = theta + st.sigma_alpha * rng.sample::<f64, _>(rand_distr::StandardNormal);
    }
    st
}

fn geweke() -> Outcome {
    let started = Instant::now();
    let scale = ScoreScale::new(vec![0, 1, 2]).unwrap();
    let mut data = crossed(3, 3, 2, scale, |i| i % 3);
    let mut parts = data.parts();
    parts.pairs.set_adjacent(0, 1, true);
    parts.pairs.set_adjacent(2, 0, true);
    parts.pairs.set_migration(1, 2, Some(1.5));
    parts.pairs.set_migration(0, 0, Some(0.7));
    parts.covariates.insert(
        (1, 2001),
        Performance {
            language: Language::Own,
            act_type: ActType::FemaleSolo,
        },
    );
    data = Dataset::new(parts).unwrap();
    let config = ModelConfig {
        sigma2_lambda: 1.0,
        beta_sd: 0.5,
        hyper_variance: 1.0,
        logsd_bounds: (-1.5, 0.5),
        ..ModelConfig::new(2)
    };
    let n = 20_000;
    let stats = |st: &ParameterState| [st.beta[0], st.sigma_alpha, st.cutpoints[0]];

    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let marginal: Vec<[f64; 3]> = (0..n).map(|_| stats(&prior_draw(&config, &data, &mut rng))).collect();

    let mut st = prior_draw(&config, &data, &mut rng);
    data = data.with_categories(&simulate_scores(&data, &st, &mut rng)).unwrap();
    let mut tuning = Tuning::new(&data);
    let mut successive = Vec::with_capacity(n);
    for it in 0..1000 + n {
        tuning.set_adaptation((it < 1000).then_some(it));
        sweep(&mut st, &data, &config, &mut tuning, &mut rng);
        data = data.with_categories(&simulate_scores(&data, &st, &mut rng)).unwrap();
        if it >= 1000 {
            successive.push(stats(&st));
        }
    }

    let mut ok = true;
    let mut details = Vec::new();
    for (j, name) in ["beta_1", "sigma_alpha", "lambda_1"].iter().enumerate() {
        for (power, label) in [(1, "E"), (2, "E2")] {
            let a: Vec<f64> = marginal.iter().map(|s| s[j].powi(power)).collect();
            let b: Vec<f64> = successive.iter().map(|s| s[j].powi(power)).collect();
            let se = (variance(&a) / n as f64 + batch_se(&b, 50).powi(2)).sqrt();
            let z = (mean(&a) - mean(&b)).abs() / se;
            ok &= z < 4.0;
            details.push(format!("{label}[{name}] {:.3}/{:.3} z={z:.2}", mean(&a), mean(&b)));
        }
    }
    let elapsed = started.elapsed();
    ok &= elapsed < Duration::from_secs(300);
    details.push(format!("{elapsed:.2?} (< 5 min)"));
    outcome(ok, details.join("; "))
}

struct Recovery {
    outcome: Outcome,
    draws: PosteriorDraws,
}

fn recovery() -> Recovery {
    let started = Instant::now();
    let truth = SyntheticDesign::default().generate(1).unwrap();
    let data = simulate(&truth, 2).unwrap();
    let draws = mcmc::run(&recovery_sampler(1, 5), &ModelConfig::new(2), &data).unwrap();
    let relabeled = relabel(&draws);
    let summaries = summarize(&relabeled).unwrap();
    let get = |name: &str| summaries.iter().find(|s| s.name == name).unwrap();

    let mut ok = true;
    let mut details = Vec::new();
    for (name, value) in [("psi", truth.state.psi), ("phi", truth.state.phi)] {
        let s = get(name);
        let inside = s.q025 <= value && value <= s.q975;
        ok &= inside;
        details.push(format!("{name}={value} in [{:.3}, {:.3}]: {inside}", s.q025, s.q975));
    }
    let traces = draws.traces();
    let mut worst = (String::new(), 0.0);
    for name in ["beta.1", "beta.22", "beta.23", "beta.32", "beta.33", "psi", "phi", "sigma.alpha"] {
        let chains = column(&draws, &traces, name);
        let refs: Vec<&[f64]> = chains.iter().map(Vec::as_slice).collect();
        let r = gelman_rubin(&refs).unwrap();
        if r > worst.1 {
            worst = (name.to_string(), r);
        }
    }
    ok &= worst.1 < 1.1;
    details.push(format!("max PSRF {:.3} ({})", worst.1, worst.0));

    let modal = membership(&relabeled).modal_clusters();
    let perm = matching_permutation(&modal, &truth.state.regions, 2);
    let agree = modal
        .iter()
        .zip(&truth.state.regions)
        .filter(|(m, t)| perm[**m] == **t)
        .count();
    let share = agree as f64 / modal.len() as f64;
    ok &= share >= 0.9;
    details.push(format!("partition agreement {agree}/{}", modal.len()));
    let elapsed = started.elapsed();
    ok &= elapsed < Duration::from_secs(600);
    details.push(format!("{elapsed:.2?} (< 10 min)"));
    Recovery {
        outcome: outcome(ok, details.join("; ")),
        draws,
    }
}

fn dic_selection() -> Outcome {
    let started = Instant::now();
    let replicates: Vec<(usize, Vec<f64>)> = std::thread::scope(|scope| {
        let handles: Vec<_> = (1..=5u64)
            .map(|r| {
                scope.spawn(move || {
                    let truth = SyntheticDesign::default().generate(100 + r).unwrap();
                    let data = simulate(&truth, 200 + r).unwrap();
                    let results: Vec<(usize, f64)> = (1..=3)
                        .map(|k| {
                            let sampler = SamplerConfig {
                                iterations: 24_000,
                                burn_in: 2000,
                                ..recovery_sampler(r, 20)
                            };
                            let draws = mcmc::run(&sampler, &ModelConfig::new(k), &data).unwrap();
                            (k, dic(&draws, &data).unwrap().dic)
                        })
                        .collect();
                    (
                        select_model(&results).unwrap(),
                        results.into_iter().map(|(_, d)| d).collect(),
                    )
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let hits = replicates.iter().filter(|(k, _)| *k == 2).count();
    let elapsed = started.elapsed();
    let detail = replicates
        .iter()
        .map(|(k, d)| format!("K={k} ({:.1}/{:.1}/{:.1})", d[0], d[1], d[2]))
        .collect::<Vec<_>>()
        .join(", ");
    outcome(
        hits >= 4 && elapsed < Duration::from_secs(1800),
        format!("{hits}/5 select K=2: {detail}; {elapsed:.2?} (< 30 min)"),
    )
}

fn standardization(draws: &PosteriorDraws) -> Outcome {
    let mut worst: f64 = 0.0;
    for d in draws.iter() {
        let z = standardize_alpha(&d.state.alpha).unwrap();
        let m = z.iter().sum::<f64>() / z.len() as f64;
        let sd = (z.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (z.len() as f64 - 1.0)).sqrt();
        worst = worst.max(m.abs()).max((sd - 1.0).abs());
    }

    let mut doubled = draws.clone();
    for chain in &mut doubled.chains {
        let copy = chain.clone();
        chain.extend(copy);
    }
    let a = report_tables(draws, 1.96).unwrap();
    let b = report_tables(&doubled, 1.96).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let mut identical = a == b;
    for (name, d) in [("orig", draws), ("dup", &doubled)] {
        write_archive(&dir.path().join(name), d, None).unwrap();
        let code = ordvote::cli::main_with_args([
            "ordvote",
            "report",
            "--archive",
            dir.path().join(name).to_str().unwrap(),
            "--out",
            dir.path().join(format!("{name}_report")).to_str().unwrap(),
        ]);
        identical &= code == 0;
    }
    for (name, _) in &a {
        let x = fs::read(dir.path().join("orig_report").join(name)).unwrap();
        let y = fs::read(dir.path().join("dup_report").join(name)).unwrap();
        identical &= x == y;
    }
    outcome(
        worst <= 1e-12 && identical,
        format!(
            "max |mean|, |sd-1| = {worst:.1e} over {} draws; {} report files byte-identical under duplication: {identical}",
            draws.total_draws(),
            a.len()
        ),
    )
}

fn determinism() -> Outcome {
    let truth = SyntheticDesign {
        n_voters: 5,
        n_performers: 4,
        n_years: 4,
        ..Default::default()
    }
    .generate(9)
    .unwrap();
    let data = simulate(&truth, 10).unwrap();
    let base = SamplerConfig {
        chains: 3,
        iterations: 600,
        burn_in: 200,
        thin: 3,
        seed: 77,
        ..SamplerConfig::default()
    };
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for jobs in [1, 3] {
        let draws = mcmc::run(&SamplerConfig { jobs, ..base.clone() }, &ModelConfig::new(2), &data).unwrap();
        let out = dir.path().join(format!("jobs{jobs}"));
        let written = write_archive(&out, &draws, Some(&dic(&draws, &data).unwrap())).unwrap();
        files.push(
            written
                .iter()
                .map(|p| (p.file_name().unwrap().to_owned(), fs::read(p).unwrap()))
                .collect::<Vec<_>>(),
        );
    }
    let same = files[0] == files[1];
    let reread = read_archive(&dir.path().join("jobs1")).unwrap();
    outcome(
        same && reread.draws.total_draws() == 3 * 200,
        format!("{} archive files compared serial vs 3 workers: identical {same}", files[0].len()),
    )
}

fn dic_fixture() -> Outcome {
    let k = select_model(&[(3, 36_868.0), (4, 36_832.0), (5, 36_844.0)]).unwrap();
    outcome(k == 4, format!("DIC (36868, 36832, 36844) for K=(3,4,5) selects K={k}"))
}

fn linear_predictor_fixture() -> Outcome {
    let beta = [-0.034, 0.062, -0.131, 0.232, -0.067];
    let cases = [
        (
            CovariateProfile {
                year_offset: 10,
                language: Language::English,
                act_type: ActType::Group,
            },
            -0.34,
        ),
        (
            CovariateProfile {
                year_offset: 0,
                language: Language::Mixed,
                act_type: ActType::Group,
            },
            0.062,
        ),
        (
            CovariateProfile {
                year_offset: 2,
                language: Language::Own,
                act_type: ActType::FemaleSolo,
            },
            -0.068 - 0.131 + 0.232,
        ),
    ];
    let worst = cases
        .iter()
        .map(|(p, want)| (linear_predictor(&beta, p, 0.0) - want).abs())
        .fold(0.0, f64::max);
    outcome(worst < 1e-12, format!("fixed-effect coefficient fixtures, max abs err {worst:.1e}"))
}

fn main() {
    let mut results: Vec<(&str, Outcome)> = vec![
        ("normalization", normalization()),
        ("dic-fixture", dic_fixture()),
        ("linear-predictor-fixture", linear_predictor_fixture()),
    ];
    let (oracle, geweke, recovery, dic_sel, determinism) = std::thread::scope(|scope| {
        let o = scope.spawn(oracle_equivalence);
        let g = scope.spawn(geweke);
        let r = scope.spawn(recovery);
        let d = scope.spawn(dic_selection);
        let det = scope.spawn(determinism);
        (
            o.join().unwrap(),
            g.join().unwrap(),
            r.join().unwrap(),
            d.join().unwrap(),
            det.join().unwrap(),
        )
    });
    results.push(("oracle-equivalence", oracle));
    results.push(("geweke-joint-distribution", geweke));
    results.push(("standardization", standardization(&recovery.draws)));
    results.push(("synthetic-recovery", recovery.outcome));
    results.push(("dic-selection", dic_sel));
    results.push(("determinism", determinism));

    let mut failed = 0;
    for (name, o) in &results {
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
