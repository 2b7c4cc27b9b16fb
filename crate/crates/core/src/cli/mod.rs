//! Command-line front end: `simulate`, `fit`, `diagnose`, `compare`, `report`
//! and `validate`.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 data error, 3 configuration
//! error. Settings are resolved as command-line flag, then `--config` file, then
//! (for the seed) the `ORDVOTE_SEED` environment variable, then the default.

mod config;
mod manifest;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::analysis::{
    coefplot, exceedance, fixed_effects_table, membership, relabel, select_model, summarize, DEFAULT_THRESHOLD,
};
use crate::diagnostics::{diagnose_all, dic, Flag};
use crate::error::{Error, Result};
use crate::io::{self, InputBundle, SyntheticDesign};
use crate::mcmc::{self, fmt_f64, read_archive, write_archive};
use crate::model::{Dataset, ScoreScale};

pub use config::{parse_config, read_config, FitSettings, KEYS};
pub use manifest::{InputDigest, RunManifest, MANIFEST_FILE};

pub const SEED_ENV: &str = "ORDVOTE_SEED";

#[derive(Debug, Parser)]
#[command(name = "ordvote", version, about = "Bayesian cumulative-logit model for voter-to-performer score panels")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset from known parameters.
    Simulate(SimulateArgs),
    /// Run the sampler and write a draw archive.
    Fit(FitArgs),
    /// Convergence diagnostics for every parameter of an archive.
    Diagnose(DiagnoseArgs),
    /// Compare archives fitted with different numbers of regions by DIC.
    Compare(CompareArgs),
    /// Membership, standardised pair effects and parameter summaries.
    Report(ReportArgs),
    /// Load a dataset and describe its shape.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Directory with votes.csv, covariates.csv, adjacency.csv and migration.csv.
    #[arg(long)]
    pub data: PathBuf,
    /// Score values, comma-separated, replacing the contest scale.
    #[arg(long)]
    pub scale: Option<String>,
    /// Use ln(1 + stock) for migration.
    #[arg(long)]
    pub log_migration: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub voters: usize,
    #[arg(long, default_value_t = 8)]
    pub performers: usize,
    #[arg(long, default_value_t = 15)]
    pub years: usize,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub scale: Option<String>,
    #[arg(long, default_value_t = 0.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1.21)]
    pub psi: f64,
    #[arg(long, default_value_t = 0.5)]
    pub phi: f64,
    #[arg(long, default_value_t = 0.3)]
    pub sigma_alpha: f64,
    #[arg(long, default_value_t = 1.5)]
    pub sigma_delta: f64,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Archive directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Flat key=value settings file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of latent regions.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub chains: Option<usize>,
    /// Sweeps after burn-in.
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long)]
    pub burnin: Option<usize>,
    #[arg(long)]
    pub thin: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Chains run concurrently; defaults to the number of chains.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Burn-in sweeps with proposal adaptation.
    #[arg(long)]
    pub adapt_window: Option<usize>,
    /// Count burn-in as part of --iters.
    #[arg(long)]
    pub burn_in_included: bool,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    #[arg(long)]
    pub archive: PathBuf,
    /// Output directory; defaults to the archive directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Archive directories.
    #[arg(required = true)]
    pub archives: Vec<PathBuf>,
    /// Directory for comparison.csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub archive: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Cut-off on the standardised pair-effect scale.
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: f64,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub data: DataArgs,
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 3 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("ordvote: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Fit(a) => cmd_fit(&a),
        Command::Diagnose(a) => cmd_diagnose(&a),
        Command::Compare(a) => cmd_compare(&a),
        Command::Report(a) => cmd_report(&a),
        Command::Validate(a) => cmd_validate(&a),
    }
}

fn env_seed() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(raw) => raw
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::config(format!("{SEED_ENV}='{raw}' is not an unsigned integer"))),
        Err(_) => Ok(None),
    }
}

fn parse_scale(raw: &Option<String>) -> Result<Option<ScoreScale>> {
    raw.as_deref().map(ScoreScale::parse).transpose()
}

fn write_text(path: PathBuf, text: &str) -> Result<PathBuf> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::write(parent, e))?;
    }
    fs::write(&path, text).map_err(|e| Error::write(&path, e))?;
    Ok(path)
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".to_string(), fmt_f64)
}

fn load_data(args: &DataArgs, scale: Option<ScoreScale>, log_migration: bool) -> Result<(InputBundle, Dataset)> {
    let mut bundle = InputBundle::from_dir(&args.data)?;
    if scale.is_some() {
        bundle.scale = scale;
    }
    bundle.log_migration = log_migration;
    let data = io::load(&bundle)?;
    Ok((bundle, data))
}

fn add_bundle_inputs(manifest: &mut RunManifest, bundle: &InputBundle) -> Result<()> {
    for p in [&bundle.votes, &bundle.covariates, &bundle.adjacency, &bundle.migration] {
        manifest.add_input(p)?;
    }
    let scale = bundle.votes.with_file_name(io::SCALE_FILE);
    if scale.exists() {
        manifest.add_input(&scale)?;
    }
    Ok(())
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<()> {
    let started = Instant::now();
    let seed = a.seed.or(env_seed()?).unwrap_or(1);
    let design = SyntheticDesign {
        n_voters: a.voters,
        n_performers: a.performers,
        n_years: a.years,
        k: a.k,
        scale: parse_scale(&a.scale)?.unwrap_or_default(),
        gamma: a.gamma,
        psi: a.psi,
        phi: a.phi,
        sigma_alpha: a.sigma_alpha,
        sigma_delta: a.sigma_delta,
        ..SyntheticDesign::default()
    };
    let truth = design.generate(seed)?;
    let data = io::simulate(&truth, seed.wrapping_add(1))?;
    let mut outputs = io::write_dataset(&data, &a.out)?;
    outputs.push(io::write_truth(&a.out, &truth)?);

    let mut manifest = RunManifest::new("simulate");
    manifest.seed = Some(seed);
    for (k, v) in [
        ("voters", a.voters.to_string()),
        ("performers", a.performers.to_string()),
        ("years", a.years.to_string()),
        ("k", a.k.to_string()),
        ("scale", design.scale.to_string()),
        ("gamma", a.gamma.to_string()),
        ("psi", a.psi.to_string()),
        ("phi", a.phi.to_string()),
        ("sigma_alpha", a.sigma_alpha.to_string()),
        ("sigma_delta", a.sigma_delta.to_string()),
    ] {
        manifest.config.insert(k.to_string(), v);
    }
    manifest.add_outputs(outputs);
    manifest.write(&a.out, started)?;
    println!(
        "simulated {} records over {} pairs into {}",
        data.records().len(),
        data.n_pairs(),
        a.out.display()
    );
    Ok(())
}

/// Resolves fit settings from defaults, the config file, flags and the
/// environment, in increasing order of priority except that the environment
/// seed is used only when neither flag nor file sets one.
pub fn fit_settings(a: &FitArgs) -> Result<FitSettings> {
    let mut s = FitSettings::default();
    let file = match &a.config {
        Some(path) => read_config(path)?,
        None => Default::default(),
    };
    s.apply(&file)?;
    if let Some(k) = a.k {
        s.set_k(k);
    }
    let sampler = &mut s.sampler;
    if let Some(x) = a.chains {
        sampler.chains = x;
    }
    if let Some(x) = a.iters {
        sampler.iterations = x;
    }
    if let Some(x) = a.burnin {
        sampler.burn_in = x;
    }
    if let Some(x) = a.thin {
        sampler.thin = x;
    }
    if a.adapt_window.is_some() {
        sampler.adapt_window = a.adapt_window;
    }
    if a.burn_in_included {
        sampler.burn_in_included = true;
    }
    sampler.seed = match (a.seed, file.get("seed")) {
        (Some(seed), _) => seed,
        (None, Some(_)) => sampler.seed,
        (None, None) => env_seed()?.unwrap_or(sampler.seed),
    };
    sampler.jobs = a.jobs.or(file.get("jobs").map(|_| sampler.jobs)).unwrap_or(sampler.chains);
    if let Some(scale) = parse_scale(&a.data.scale)? {
        s.scale = Some(scale);
    }
    if a.data.log_migration {
        s.log_migration = true;
    }
    s.sampler.validate()?;
    s.model.validate()?;
    Ok(s)
}

pub fn cmd_fit(a: &FitArgs) -> Result<()> {
    let started = Instant::now();
    let settings = fit_settings(a)?;
    let (bundle, data) = load_data(&a.data, settings.scale.clone(), settings.log_migration)?;
    let draws = mcmc::run(&settings.sampler, &settings.model, &data)?;
    let dic = if draws.is_empty() { None } else { Some(dic(&draws, &data)?) };
    let outputs = write_archive(&a.out, &draws, dic.as_ref())?;

    let mut manifest = RunManifest::new("fit");
    manifest.config = settings.echo();
    manifest.seed = Some(settings.sampler.seed);
    add_bundle_inputs(&mut manifest, &bundle)?;
    if let Some(path) = &a.config {
        manifest.add_input(path)?;
    }
    manifest.add_outputs(outputs);
    manifest.write(&a.out, started)?;

    print!(
        "fitted k={} with {} chains x {} draws",
        settings.model.k,
        draws.n_chains(),
        draws.draws_per_chain()
    );
    match dic {
        Some(d) => println!("; DIC {} (pD {})", fmt_f64(d.dic), fmt_f64(d.p_d)),
        None => println!("; no draws stored"),
    }
    Ok(())
}

pub fn diagnostics_csv(draws: &mcmc::PosteriorDraws) -> (String, usize, usize) {
    let rows = diagnose_all(draws);
    let mut text = String::from("parameter,psrf,ess,ac1,ac5,ac10,flag\n");
    for r in &rows {
        let _ = writeln!(
            text,
            "{},{},{},{},{},{},{}",
            r.parameter,
            opt(r.psrf),
            opt(r.ess),
            opt(r.ac1),
            opt(r.ac5),
            opt(r.ac10),
            r.flag
        );
    }
    let warn = rows.iter().filter(|r| r.flag == Flag::Warn).count();
    let degenerate = rows.iter().filter(|r| r.flag == Flag::Degenerate).count();
    (text, warn, degenerate)
}

pub fn cmd_diagnose(a: &DiagnoseArgs) -> Result<()> {
    let started = Instant::now();
    let archive = read_archive(&a.archive)?;
    let out = a.out.clone().unwrap_or_else(|| a.archive.clone());
    let (text, warn, degenerate) = diagnostics_csv(&archive.draws);
    let path = write_text(out.join("diagnostics.csv"), &text)?;

    let mut manifest = RunManifest::new("diagnose");
    manifest.add_input(&a.archive.join(mcmc::METADATA_FILE))?;
    manifest.add_outputs([path.clone()]);
    manifest.write(&out, started)?;
    println!(
        "{}: {} parameters, {warn} flagged, {degenerate} degenerate",
        path.display(),
        text.lines().count() - 1
    );
    Ok(())
}

pub fn cmd_compare(a: &CompareArgs) -> Result<()> {
    let started = Instant::now();
    let mut rows = Vec::new();
    let mut digest: Option<(String, &PathBuf)> = None;
    for dir in &a.archives {
        let archive = read_archive(dir)?;
        let d = &archive.draws.dataset_digest;
        match &digest {
            Some((first, first_dir)) if first != d => {
                return Err(Error::data(format!(
                    "{} and {} were fitted to different datasets",
                    first_dir.display(),
                    dir.display()
                )));
            }
            Some(_) => {}
            None => digest = Some((d.clone(), dir)),
        }
        let dic = archive
            .dic
            .ok_or_else(|| Error::data(format!("{} has no DIC (no stored draws)", dir.display())))?;
        rows.push((archive.draws.model.k, dic.dic, dic.p_d, dir));
    }
    let selected = select_model(&rows.iter().map(|r| (r.0, r.1)).collect::<Vec<_>>())?;
    let mut text = String::from("k,dic,p_d,archive\n");
    for (k, d, p, dir) in &rows {
        let _ = writeln!(text, "{k},{},{},{}", fmt_f64(*d), fmt_f64(*p), dir.display());
    }
    print!("{text}");
    println!("selected k={selected}");
    if let Some(out) = &a.out {
        let path = write_text(out.join("comparison.csv"), &text)?;
        let mut manifest = RunManifest::new("compare");
        for dir in &a.archives {
            manifest.add_input(&dir.join(mcmc::METADATA_FILE))?;
        }
        manifest.config.insert("selected_k".into(), selected.to_string());
        manifest.add_outputs([path]);
        manifest.write(out, started)?;
    }
    Ok(())
}

/// File name for a performer's coefficient-plot table.
pub fn coefplot_file(performer: &str) -> String {
    format!("coefplot_{performer}.csv")
}

/// Report tables keyed by file name, in writing order.
pub fn report_tables(draws: &mcmc::PosteriorDraws, threshold: f64) -> Result<Vec<(String, String)>> {
    if draws.is_empty() {
        return Err(Error::data("the archive has no draws"));
    }
    let draws = relabel(draws);
    let mut tables = Vec::new();

    let m = membership(&draws);
    let mut text = String::from("voter,k,probability\n");
    for (v, voter) in m.voters.iter().enumerate() {
        for k in 0..m.k {
            let _ = writeln!(text, "{voter},{},{}", k + 1, fmt_f64(m.get(v, k)));
        }
    }
    tables.push(("membership.csv".to_string(), text));

    let bias = exceedance(&draws, threshold)?;
    let mut text = String::from("voter,performer,mean,q025,q25,q75,q975,p_pos,p_neg\n");
    for r in &bias.rows {
        let _ = writeln!(
            text,
            "{},{},{},{},{},{},{},{},{}",
            r.voter,
            r.performer,
            fmt_f64(r.mean),
            fmt_f64(r.q025),
            fmt_f64(r.q25),
            fmt_f64(r.q75),
            fmt_f64(r.q975),
            fmt_f64(r.p_pos),
            fmt_f64(r.p_neg)
        );
    }
    tables.push(("bias.csv".to_string(), text));

    let summaries = summarize(&draws)?;
    let mut text = String::from("parameter,mean,q025,q25,q75,q975\n");
    for s in &summaries {
        let _ = writeln!(
            text,
            "{},{},{},{},{},{}",
            s.name,
            fmt_f64(s.mean),
            fmt_f64(s.q025),
            fmt_f64(s.q25),
            fmt_f64(s.q75),
            fmt_f64(s.q975)
        );
    }
    tables.push(("summary.csv".to_string(), text));

    let mut text = String::from("coefficient,mean,lower,upper\n");
    for s in fixed_effects_table(&summaries) {
        let _ = writeln!(text, "{},{},{},{}", s.name, fmt_f64(s.mean), fmt_f64(s.q025), fmt_f64(s.q975));
    }
    tables.push(("table1.csv".to_string(), text));

    for performer in &draws.layout.performers {
        let rows = coefplot(&bias, performer);
        if rows.is_empty() {
            continue;
        }
        let mut text = String::from("voter,mean,q025,q25,q75,q975\n");
        for r in rows {
            let _ = writeln!(
                text,
                "{},{},{},{},{},{}",
                r.voter,
                fmt_f64(r.mean),
                fmt_f64(r.q025),
                fmt_f64(r.q25),
                fmt_f64(r.q75),
                fmt_f64(r.q975)
            );
        }
        tables.push((coefplot_file(performer), text));
    }
    Ok(tables)
}

pub fn cmd_report(a: &ReportArgs) -> Result<()> {
    let started = Instant::now();
    if !a.threshold.is_finite() || a.threshold < 0.0 {
        return Err(Error::config(format!("threshold must be a non-negative number, got {}", a.threshold)));
    }
    let archive = read_archive(&a.archive)?;
    let tables = report_tables(&archive.draws, a.threshold)?;
    let mut outputs = Vec::with_capacity(tables.len());
    for (name, text) in &tables {
        outputs.push(write_text(a.out.join(name), text)?);
    }
    let mut manifest = RunManifest::new("report");
    manifest.config.insert("threshold".into(), a.threshold.to_string());
    manifest.add_input(&a.archive.join(mcmc::METADATA_FILE))?;
    manifest.add_outputs(outputs);
    manifest.write(&a.out, started)?;
    println!("wrote {} tables to {}", tables.len(), a.out.display());
    Ok(())
}

pub fn cmd_validate(a: &ValidateArgs) -> Result<()> {
    let (_, data) = load_data(&a.data, parse_scale(&a.data.scale)?, a.data.log_migration)?;
    let report = io::validate(&data);
    print!("{report}");
    if report.is_ok() {
        Ok(())
    } else {
        Err(Error::data(format!("{} validation errors", report.errors.len())))
    }
}

/// Convenience for tests and scripts: `cmd_*` result as an exit code.
pub fn exit_code(result: &Result<()>) -> i32 {
    result.as_ref().map_or_else(Error::exit_code, |_| 0)
}

