//! C interface to the `ordvote` engine.
//!
//! Datasets and posterior draws cross the boundary as opaque handles that the
//! caller releases with the matching `*_free` function. Every fallible call
//! returns an [`OrdvoteStatus`]; on failure, [`ordvote_last_error`] gives the
//! message for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use ordvote::analysis::select_model;
use ordvote::diagnostics::dic;
use ordvote::io::{load, InputBundle};
use ordvote::mcmc::{self, write_archive, PosteriorDraws, SamplerConfig};
use ordvote::model::{category_probs, Dataset, ModelConfig};
use ordvote::Error;

/// Result of a call. Values 1 to 3 match the command-line exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrdvoteStatus {
    Ok = 0,
    /// Runtime failure, including invariant violations.
    Runtime = 1,
    /// Malformed or inconsistent input data.
    Data = 2,
    /// Invalid settings.
    Config = 3,
    /// A required pointer was null or a string was not UTF-8.
    InvalidArgument = 4,
    /// The engine panicked; the handle involved should be freed and not reused.
    Panic = 5,
}

/// A loaded, validated dataset.
pub struct OrdvoteDataset {
    data: Dataset,
}

/// Posterior draws of every chain.
pub struct OrdvoteDraws {
    draws: PosteriorDraws,
}

/// Sampler settings for [`ordvote_fit`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct OrdvoteFitOptions {
    /// Number of latent regions.
    pub k: usize,
    pub chains: usize,
    /// Sweeps after burn-in.
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    /// Chains run concurrently.
    pub jobs: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: OrdvoteStatus, msg: impl Into<String>) -> OrdvoteStatus {
    set_error(msg.into());
    status
}

fn from_error(e: Error) -> OrdvoteStatus {
    let status = match e.exit_code() {
        2 => OrdvoteStatus::Data,
        3 => OrdvoteStatus::Config,
        _ => OrdvoteStatus::Runtime,
    };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> OrdvoteStatus) -> OrdvoteStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(OrdvoteStatus::Panic, "internal panic"),
    }
}

/// # Safety
/// `s` must be null or a valid nul-terminated string.
unsafe fn path_arg(s: *const c_char, name: &str) -> Result<PathBuf, OrdvoteStatus> {
    if s.is_null() {
        return Err(fail(OrdvoteStatus::InvalidArgument, format!("{name} is null")));
    }
    CStr::from_ptr(s)
        .to_str()
        .map(PathBuf::from)
        .map_err(|_| fail(OrdvoteStatus::InvalidArgument, format!("{name} is not UTF-8")))
}

/// Message describing the last failure on this thread, or null if the last
/// call succeeded. The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn ordvote_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn ordvote_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads `votes.csv`, `covariates.csv`, `adjacency.csv`, `migration.csv` (and
/// `scale.txt` if present) from `dir`.
///
/// # Safety
/// `dir` must be a valid nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ordvote_dataset_load(dir: *const c_char, out: *mut *mut OrdvoteDataset) -> OrdvoteStatus {
    guard(|| {
        if out.is_null() {
            return fail(OrdvoteStatus::InvalidArgument, "out is null");
        }
        *out = ptr::null_mut();
        let dir = match path_arg(dir, "dir") {
            Ok(d) => d,
            Err(s) => return s,
        };
        match InputBundle::from_dir(&dir).and_then(|b| load(&b)) {
            Ok(data) => {
                *out = Box::into_raw(Box::new(OrdvoteDataset { data }));
                OrdvoteStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Releases a dataset. Null is ignored.
///
/// # Safety
/// `dataset` must be null or a handle from [`ordvote_dataset_load`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ordvote_dataset_free(dataset: *mut OrdvoteDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

/// Writes the numbers of voters, performers, observed pairs and records.
/// Any output pointer may be null.
///
/// # Safety
/// `dataset` must be a live handle; non-null outputs must be valid.
#[no_mangle]
pub unsafe extern "C" fn ordvote_dataset_dims(
    dataset: *const OrdvoteDataset,
    voters: *mut usize,
    performers: *mut usize,
    pairs: *mut usize,
    records: *mut usize,
) -> OrdvoteStatus {
    guard(|| {
        let Some(ds) = dataset.as_ref() else {
            return fail(OrdvoteStatus::InvalidArgument, "dataset is null");
        };
        let d = &ds.data;
        for (p, v) in [
            (voters, d.n_voters()),
            (performers, d.n_performers()),
            (pairs, d.n_pairs()),
            (records, d.records().len()),
        ] {
            if !p.is_null() {
                *p = v;
            }
        }
        OrdvoteStatus::Ok
    })
}

/// Category probabilities of the cumulative-logit model at linear predictor
/// `mu`. `out` receives `n_cutpoints + 1` values.
///
/// # Safety
/// `cutpoints` must point to `n_cutpoints` doubles and `out` to `out_len`.
#[no_mangle]
pub unsafe extern "C" fn ordvote_category_probs(
    cutpoints: *const f64,
    n_cutpoints: usize,
    mu: f64,
    out: *mut f64,
    out_len: usize,
) -> OrdvoteStatus {
    guard(|| {
        if cutpoints.is_null() || out.is_null() {
            return fail(OrdvoteStatus::InvalidArgument, "null pointer");
        }
        if out_len != n_cutpoints + 1 {
            return fail(
                OrdvoteStatus::InvalidArgument,
                format!("out_len must be {}, got {out_len}", n_cutpoints + 1),
            );
        }
        let cut = std::slice::from_raw_parts(cutpoints, n_cutpoints);
        match category_probs(cut, mu) {
            Ok(p) => {
                std::slice::from_raw_parts_mut(out, out_len).copy_from_slice(&p);
                OrdvoteStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Number of regions with the smallest DIC; ties go to the smaller number.
///
/// # Safety
/// `ks` and `dics` must point to `n` values; `out_k` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ordvote_select_model(
    ks: *const usize,
    dics: *const f64,
    n: usize,
    out_k: *mut usize,
) -> OrdvoteStatus {
    guard(|| {
        if ks.is_null() || dics.is_null() || out_k.is_null() {
            return fail(OrdvoteStatus::InvalidArgument, "null pointer");
        }
        let ks = std::slice::from_raw_parts(ks, n);
        let dics = std::slice::from_raw_parts(dics, n);
        let pairs: Vec<(usize, f64)> = ks.iter().copied().zip(dics.iter().copied()).collect();
        match select_model(&pairs) {
            Ok(k) => {
                *out_k = k;
                OrdvoteStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Default settings: 4 regions, 2 chains, 11000 sweeps after 1000 burn-in,
/// thinning 20, seed 1, 2 jobs.
#[no_mangle]
pub extern "C" fn ordvote_fit_options_default() -> OrdvoteFitOptions {
    let s = SamplerConfig::default();
    OrdvoteFitOptions {
        k: ModelConfig::default().k,
        chains: s.chains,
        iterations: s.iterations,
        burn_in: s.burn_in,
        thin: s.thin,
        seed: s.seed,
        jobs: s.jobs,
    }
}

/// Runs the sampler. `options` may be null for the defaults.
///
/// # Safety
/// `dataset` must be a live handle, `options` null or valid, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn ordvote_fit(
    dataset: *const OrdvoteDataset,
    options: *const OrdvoteFitOptions,
    out: *mut *mut OrdvoteDraws,
) -> OrdvoteStatus {
    guard(|| {
        if out.is_null() {
            return fail(OrdvoteStatus::InvalidArgument, "out is null");
        }
        *out = ptr::null_mut();
        let Some(ds) = dataset.as_ref() else {
            return fail(OrdvoteStatus::InvalidArgument, "dataset is null");
        };
        let o = options.as_ref().copied().unwrap_or_else(|| ordvote_fit_options_default());
        let sampler = SamplerConfig {
            chains: o.chains,
            iterations: o.iterations,
            burn_in: o.burn_in,
            thin: o.thin,
            seed: o.seed,
            jobs: o.jobs,
            ..SamplerConfig::default()
        };
        match mcmc::run(&sampler, &ModelConfig::new(o.k), &ds.data) {
            Ok(draws) => {
                *out = Box::into_raw(Box::new(OrdvoteDraws { draws }));
                OrdvoteStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Releases draws. Null is ignored.
///
/// # Safety
/// `draws` must be null or a handle from [`ordvote_fit`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ordvote_draws_free(draws: *mut OrdvoteDraws) {
    if !draws.is_null() {
        drop(Box::from_raw(draws));
    }
}

/// Number of chains and stored draws per chain.
///
/// # Safety
/// `draws` must be a live handle; non-null outputs must be valid.
#[no_mangle]
pub unsafe extern "C" fn ordvote_draws_shape(
    draws: *const OrdvoteDraws,
    chains: *mut usize,
    per_chain: *mut usize,
) -> OrdvoteStatus {
    guard(|| {
        let Some(d) = draws.as_ref() else {
            return fail(OrdvoteStatus::InvalidArgument, "draws is null");
        };
        if !chains.is_null() {
            *chains = d.draws.n_chains();
        }
        if !per_chain.is_null() {
            *per_chain = d.draws.draws_per_chain();
        }
        OrdvoteStatus::Ok
    })
}

/// DIC and effective number of parameters of `draws` on `dataset`.
///
/// # Safety
/// Both handles must be live; `dic_out` and `p_d_out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ordvote_draws_dic(
    draws: *const OrdvoteDraws,
    dataset: *const OrdvoteDataset,
    dic_out: *mut f64,
    p_d_out: *mut f64,
) -> OrdvoteStatus {
    guard(|| {
        let (Some(d), Some(ds)) = (draws.as_ref(), dataset.as_ref()) else {
            return fail(OrdvoteStatus::InvalidArgument, "null handle");
        };
        if dic_out.is_null() || p_d_out.is_null() {
            return fail(OrdvoteStatus::InvalidArgument, "null output");
        }
        match dic(&d.draws, &ds.data) {
            Ok(r) => {
                *dic_out = r.dic;
                *p_d_out = r.p_d;
                OrdvoteStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Writes the draw archive into `dir`. When `dataset` is non-null the DIC is
/// stored in the archive metadata.
///
/// # Safety
/// `draws` must be a live handle, `dataset` null or live, `dir` a valid string.
#[no_mangle]
pub unsafe extern "C" fn ordvote_draws_write(
    draws: *const OrdvoteDraws,
    dataset: *const OrdvoteDataset,
    dir: *const c_char,
) -> OrdvoteStatus {
    guard(|| {
        let Some(d) = draws.as_ref() else {
            return fail(OrdvoteStatus::InvalidArgument, "draws is null");
        };
        let dir = match path_arg(dir, "dir") {
            Ok(p) => p,
            Err(s) => return s,
        };
        let dic = match dataset.as_ref() {
            Some(ds) if !d.draws.is_empty() => match dic(&d.draws, &ds.data) {
                Ok(r) => Some(r),
                Err(e) => return from_error(e),
            },
            _ => None,
        };
        match write_archive(&dir, &d.draws, dic.as_ref()) {
            Ok(_) => OrdvoteStatus::Ok,
            Err(e) => from_error(e),
        }
    })
}
