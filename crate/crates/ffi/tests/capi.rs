use std::ffi::{CStr, CString};
use std::path::Path;
use std::ptr;

use ordvote::io::{simulate, write_dataset, SyntheticDesign};
use ordvote_ffi::*;

fn dataset_dir() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let truth = SyntheticDesign {
        n_voters: 4,
        n_performers: 3,
        n_years: 3,
        ..Default::default()
    }
    .generate(3)
    .unwrap();
    write_dataset(&simulate(&truth, 4).unwrap(), dir.path()).unwrap();
    dir
}

fn c_path(p: &Path) -> CString {
    CString::new(p.to_str().unwrap()).unwrap()
}

fn last_error() -> String {
    let p = ordvote_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

#[test]
fn load_fit_dic_write_round_trip() {
    let dir = dataset_dir();
    let mut ds = ptr::null_mut();
    let path = c_path(dir.path());
    assert_eq!(unsafe { ordvote_dataset_load(path.as_ptr(), &mut ds) }, OrdvoteStatus::Ok);
    assert!(ordvote_last_error().is_null());

    let (mut v, mut p, mut h, mut n) = (0, 0, 0, 0);
    assert_eq!(unsafe { ordvote_dataset_dims(ds, &mut v, &mut p, &mut h, &mut n) }, OrdvoteStatus::Ok);
    assert_eq!((v, p, h, n), (4, 3, 12, 36));

    let opts = OrdvoteFitOptions {
        k: 2,
        chains: 2,
        iterations: 200,
        burn_in: 100,
        thin: 10,
        seed: 5,
        jobs: 1,
    };
    let mut draws = ptr::null_mut();
    assert_eq!(unsafe { ordvote_fit(ds, &opts, &mut draws) }, OrdvoteStatus::Ok);
    let (mut chains, mut per) = (0, 0);
    unsafe { ordvote_draws_shape(draws, &mut chains, &mut per) };
    assert_eq!((chains, per), (2, 20));

    let (mut dic, mut p_d) = (0.0, 0.0);
    assert_eq!(unsafe { ordvote_draws_dic(draws, ds, &mut dic, &mut p_d) }, OrdvoteStatus::Ok);
    assert!(dic.is_finite() && p_d.is_finite());

    let out = dir.path().join("archive");
    let out_c = c_path(&out);
    assert_eq!(unsafe { ordvote_draws_write(draws, ds, out_c.as_ptr()) }, OrdvoteStatus::Ok);
    let archive = ordvote::mcmc::read_archive(&out).unwrap();
    assert_eq!(archive.dic.unwrap().dic, dic);

    unsafe {
        ordvote_draws_free(draws);
        ordvote_dataset_free(ds);
    }
}

#[test]
fn data_errors_carry_status_and_message() {
    let dir = tempfile::tempdir().unwrap();
    let path = c_path(&dir.path().join("missing"));
    let mut ds = ptr::null_mut();
    assert_eq!(unsafe { ordvote_dataset_load(path.as_ptr(), &mut ds) }, OrdvoteStatus::Data);
    assert!(ds.is_null());
    assert!(last_error().contains("votes.csv"));
}

#[test]
fn config_errors_and_null_arguments() {
    let dir = dataset_dir();
    let path = c_path(dir.path());
    let mut ds = ptr::null_mut();
    unsafe { ordvote_dataset_load(path.as_ptr(), &mut ds) };
    let opts = OrdvoteFitOptions {
        thin: 0,
        ..ordvote_fit_options_default()
    };
    let mut draws = ptr::null_mut();
    assert_eq!(unsafe { ordvote_fit(ds, &opts, &mut draws) }, OrdvoteStatus::Config);
    assert!(draws.is_null());
    assert!(last_error().contains("thin"));
    assert_eq!(
        unsafe { ordvote_fit(ptr::null(), ptr::null(), &mut draws) },
        OrdvoteStatus::InvalidArgument
    );
    assert_eq!(
        unsafe { ordvote_dataset_load(ptr::null(), &mut ds) },
        OrdvoteStatus::InvalidArgument
    );
    unsafe {
        ordvote_dataset_free(ds);
        ordvote_dataset_free(ptr::null_mut());
        ordvote_draws_free(ptr::null_mut());
    }
}

#[test]
fn defaults_match_the_protocol() {
    let o = ordvote_fit_options_default();
    assert_eq!((o.k, o.chains, o.iterations, o.burn_in, o.thin), (4, 2, 11_000, 1_000, 20));
    let v = unsafe { CStr::from_ptr(ordvote_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn probabilities_and_model_selection() {
    let cut = [-1.0, 0.5];
    let mut out = [0.0; 3];
    assert_eq!(
        unsafe { ordvote_category_probs(cut.as_ptr(), 2, 0.2, out.as_mut_ptr(), 3) },
        OrdvoteStatus::Ok
    );
    assert!((out.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert_eq!(
        unsafe { ordvote_category_probs(cut.as_ptr(), 2, 0.2, out.as_mut_ptr(), 2) },
        OrdvoteStatus::InvalidArgument
    );
    let bad = [0.5, -1.0];
    assert_eq!(
        unsafe { ordvote_category_probs(bad.as_ptr(), 2, 0.0, out.as_mut_ptr(), 3) },
        OrdvoteStatus::Runtime
    );

    let ks = [3usize, 4, 5];
    let dics = [36_868.0, 36_832.0, 36_844.0];
    let mut k = 0;
    assert_eq!(unsafe { ordvote_select_model(ks.as_ptr(), dics.as_ptr(), 3, &mut k) }, OrdvoteStatus::Ok);
    assert_eq!(k, 4);
    assert_eq!(
        unsafe { ordvote_select_model(ks.as_ptr(), dics.as_ptr(), 0, &mut k) },
        OrdvoteStatus::Data
    );
}

#[test]
fn header_declares_the_interface() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/ordvote.h")).unwrap();
    for name in [
        "ordvote_dataset_load",
        "ordvote_fit",
        "ordvote_draws_write",
        "ordvote_last_error",
        "OrdvoteStatus",
        "typedef struct OrdvoteDataset OrdvoteDataset",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}
