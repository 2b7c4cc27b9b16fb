//! On-disk draw archive: one CSV per chain plus a `key=value` metadata sidecar.
//!
//! Column naming, in order:
//!
//! | columns | meaning |
//! |---|---|
//! | `lambda.1` .. `lambda.{S-1}` | cutpoints |
//! | `beta.1`, `beta.22`, `beta.23`, `beta.32`, `beta.33` | year, Mixed, Own, FemaleSolo, MaleSolo |
//! | `alpha.{voter}.{performer}` | pair effects, observed pairs sorted by voter then performer |
//! | `gamma` | intercept of the pair-effect mean |
//! | `delta.{k}.{performer}` | cluster effects, `k` from 1 |
//! | `psi`, `phi` | border and migration effects |
//! | `R.{voter}` | cluster of each voter, from 1 |
//! | `zeta.{k}` | cluster weights |
//! | `sigma.alpha`, `sigma.delta` | scales |
//! | `deviance` | `-2 log L` of the draw |
//!
//! Numbers use the shortest representation that parses back to the same `f64`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::diagnostics::Dic;
use crate::error::{Error, Result};
use crate::mcmc::{Draw, PosteriorDraws, SamplerConfig};
use crate::model::{Dataset, ModelConfig, ParameterState, BETA_LABELS, N_BETA};

pub const METADATA_FILE: &str = "metadata.txt";
const FORMAT_TAG: &str = "ordvote-draws-1";

/// Shape and naming of a flattened [`ParameterState`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    pub n_cutpoints: usize,
    pub voters: Vec<String>,
    pub performers: Vec<String>,
    pub pairs: Vec<(usize, usize)>,
    pub k: usize,
}

impl Layout {
    pub fn for_data(data: &Dataset, k: usize) -> Self {
        Layout {
            n_cutpoints: data.scale().n_cutpoints(),
            voters: data.voters().to_vec(),
            performers: data.performers().to_vec(),
            pairs: data.observed_pairs().to_vec(),
            k,
        }
    }

    pub fn column_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        names.extend((1..=self.n_cutpoints).map(|s| format!("lambda.{s}")));
        names.extend(BETA_LABELS.iter().map(|l| format!("beta.{l}")));
        names.extend(
            self.pairs
                .iter()
                .map(|&(v, p)| format!("alpha.{}.{}", self.voters[v], self.performers[p])),
        );
        names.push("gamma".into());
        for k in 1..=self.k {
            names.extend(self.performers.iter().map(|p| format!("delta.{k}.{p}")));
        }
        names.push("psi".into());
        names.push("phi".into());
        names.extend(self.voters.iter().map(|v| format!("R.{v}")));
        names.extend((1..=self.k).map(|k| format!("zeta.{k}")));
        names.push("sigma.alpha".into());
        names.push("sigma.delta".into());
        names.push("deviance".into());
        names
    }

    pub fn n_columns(&self) -> usize {
        self.n_cutpoints + N_BETA + self.pairs.len() + 1 + self.k * self.performers.len() + 2 + self.voters.len() + self.k + 3
    }

    pub fn flatten(&self, state: &ParameterState, deviance: f64) -> Vec<f64> {
        let mut row = Vec::with_capacity(self.n_columns());
        row.extend_from_slice(&state.cutpoints);
        row.extend_from_slice(&state.beta);
        row.extend_from_slice(&state.alpha);
        row.push(state.gamma);
        row.extend_from_slice(&state.delta);
        row.push(state.psi);
        row.push(state.phi);
        row.extend(state.regions.iter().map(|&r| (r + 1) as f64));
        row.extend_from_slice(&state.zeta);
        row.push(state.sigma_alpha);
        row.push(state.sigma_delta);
        row.push(deviance);
        row
    }

    pub fn unflatten(&self, row: &[f64]) -> Result<(ParameterState, f64)> {
        if row.len() != self.n_columns() {
            return Err(Error::data(format!(
                "draw has {} values, layout expects {}",
                row.len(),
                self.n_columns()
            )));
        }
        let mut it = row.iter().copied();
        let mut take = |n: usize| -> Vec<f64> { it.by_ref().take(n).collect() };
        let cutpoints = take(self.n_cutpoints);
        let beta: [f64; N_BETA] = take(N_BETA).try_into().expect("beta width");
        let alpha = take(self.pairs.len());
        let gamma = take(1)[0];
        let delta = take(self.k * self.performers.len());
        let psi = take(1)[0];
        let phi = take(1)[0];
        let regions = take(self.voters.len())
            .into_iter()
            .map(|r| {
                if r >= 1.0 && r <= self.k as f64 && r.fract() == 0.0 {
                    Ok(r as usize - 1)
                } else {
                    Err(Error::data(format!("invalid region label {r}")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let zeta = take(self.k);
        let rest = take(3);
        let state = ParameterState {
            cutpoints,
            beta,
            alpha,
            gamma,
            delta,
            psi,
            phi,
            regions,
            zeta,
            sigma_alpha: rest[0],
            sigma_delta: rest[1],
        };
        Ok((state, rest[2]))
    }

    /// Rebuilds a layout from an archive header.
    pub fn from_header(header: &[String]) -> Result<Self> {
        let bad = |msg: String| Error::data(format!("unrecognised draw header: {msg}"));
        let n_cutpoints = header.iter().filter(|h| h.starts_with("lambda.")).count();
        let voters: Vec<String> = header
            .iter()
            .filter_map(|h| h.strip_prefix("R.").map(str::to_string))
            .collect();
        let k = header.iter().filter(|h| h.starts_with("zeta.")).count();
        let performers: Vec<String> = header
            .iter()
            .filter_map(|h| h.strip_prefix("delta.1.").map(str::to_string))
            .collect();
        let mut pairs = Vec::new();
        for h in header.iter().filter_map(|h| h.strip_prefix("alpha.")) {
            let (v, p) = h.split_once('.').ok_or_else(|| bad(format!("alpha.{h}")))?;
            let vi = voters.iter().position(|x| x == v).ok_or_else(|| bad(format!("unknown voter {v}")))?;
            let pi = performers
                .iter()
                .position(|x| x == p)
                .ok_or_else(|| bad(format!("unknown performer {p}")))?;
            pairs.push((vi, pi));
        }
        let layout = Layout {
            n_cutpoints,
            voters,
            performers,
            pairs,
            k,
        };
        if layout.column_names() != header {
            return Err(bad("columns are not in canonical order".into()));
        }
        Ok(layout)
    }
}

/// Shortest round-trip text for a float.
pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

/// Draws read back from disk, with the DIC stored at fit time if any.
#[derive(Debug, Clone, PartialEq)]
pub struct Archive {
    pub draws: PosteriorDraws,
    pub dic: Option<Dic>,
}

fn chain_file(dir: &Path, chain: usize) -> PathBuf {
    dir.join(format!("chain_{}.csv", chain + 1))
}

fn metadata_text(draws: &PosteriorDraws, dic: Option<&Dic>) -> String {
    let s = &draws.sampler;
    let m = &draws.model;
    let mut lines = vec![
        format!("format={FORMAT_TAG}"),
        format!("seed={}", s.seed),
        format!("chains={}", s.chains),
        format!("iterations={}", s.iterations),
        format!("burn_in={}", s.burn_in),
        format!("thin={}", s.thin),
        format!(
            "adapt_window={}",
            s.adapt_window.map_or("burn_in".to_string(), |w| w.to_string())
        ),
        format!("burn_in_included={}", s.burn_in_included),
        format!("k={}", m.k),
        format!("sigma2_lambda={}", fmt_f64(m.sigma2_lambda)),
        format!("beta_sd={}", fmt_f64(m.beta_sd)),
        format!("hyper_variance={}", fmt_f64(m.hyper_variance)),
        format!(
            "dirichlet={}",
            m.dirichlet.iter().map(|a| fmt_f64(*a)).collect::<Vec<_>>().join(",")
        ),
        format!("logsd_lower={}", fmt_f64(m.logsd_bounds.0)),
        format!("logsd_upper={}", fmt_f64(m.logsd_bounds.1)),
        format!("pin_gamma={}", m.pin_gamma),
        format!("dataset_digest={}", draws.dataset_digest),
        format!("draws_per_chain={}", draws.draws_per_chain()),
    ];
    if let Some(d) = dic {
        lines.push(format!("dic={}", fmt_f64(d.dic)));
        lines.push(format!("p_d={}", fmt_f64(d.p_d)));
        lines.push(format!("mean_deviance={}", fmt_f64(d.mean_deviance)));
        lines.push(format!("plugin_deviance={}", fmt_f64(d.plugin_deviance)));
    }
    lines.join("\n") + "\n"
}

/// Writes `chain_<n>.csv` for each chain and the metadata sidecar into `dir`.
/// Returns the paths written.
pub fn write_archive(dir: &Path, draws: &PosteriorDraws, dic: Option<&Dic>) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::write(dir, e))?;
    let names = draws.layout.column_names();
    let mut written = Vec::new();
    for (c, chain) in draws.chains.iter().enumerate() {
        let path = chain_file(dir, c);
        let mut w = csv::Writer::from_path(&path).map_err(|e| Error::csv(&path, e))?;
        w.write_record(&names).map_err(|e| Error::csv(&path, e))?;
        for d in chain {
            let row: Vec<String> = draws.layout.flatten(&d.state, d.deviance).into_iter().map(fmt_f64).collect();
            w.write_record(&row).map_err(|e| Error::csv(&path, e))?;
        }
        w.flush().map_err(|e| Error::write(&path, e))?;
        written.push(path);
    }
    let meta = dir.join(METADATA_FILE);
    fs::write(&meta, metadata_text(draws, dic)).map_err(|e| Error::write(&meta, e))?;
    written.push(meta);
    Ok(written)
}

fn parse_metadata(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::data(format!("{}:{}: expected key=value", path.display(), i + 1)))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn field<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<T> {
    let raw = map
        .get(key)
        .ok_or_else(|| Error::data(format!("metadata is missing '{key}'")))?;
    raw.parse()
        .map_err(|_| Error::data(format!("metadata field {key}={raw} is invalid")))
}

fn optional_field<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>> {
    if map.contains_key(key) {
        field(map, key).map(Some)
    } else {
        Ok(None)
    }
}

/// Reads an archive written by [`write_archive`].
pub fn read_archive(dir: &Path) -> Result<Archive> {
    let meta = parse_metadata(&dir.join(METADATA_FILE))?;
    if meta.get("format").map(String::as_str) != Some(FORMAT_TAG) {
        return Err(Error::data(format!("{} is not a draw archive", dir.display())));
    }
    let adapt_window = match meta.get("adapt_window").map(String::as_str) {
        None | Some("burn_in") => None,
        Some(_) => Some(field(&meta, "adapt_window")?),
    };
    let sampler = SamplerConfig {
        chains: field(&meta, "chains")?,
        iterations: field(&meta, "iterations")?,
        burn_in: field(&meta, "burn_in")?,
        thin: field(&meta, "thin")?,
        seed: field(&meta, "seed")?,
        adapt_window,
        burn_in_included: field(&meta, "burn_in_included")?,
        jobs: 1,
        check_invariants: false,
    };
    let dirichlet = meta
        .get("dirichlet")
        .ok_or_else(|| Error::data("metadata is missing 'dirichlet'"))?
        .split(',')
        .map(|t| t.parse::<f64>().map_err(|_| Error::data(format!("bad dirichlet entry {t}"))))
        .collect::<Result<Vec<_>>>()?;
    let model = ModelConfig {
        k: field(&meta, "k")?,
        sigma2_lambda: field(&meta, "sigma2_lambda")?,
        beta_sd: field(&meta, "beta_sd")?,
        hyper_variance: field(&meta, "hyper_variance")?,
        dirichlet,
        logsd_bounds: (field(&meta, "logsd_lower")?, field(&meta, "logsd_upper")?),
        pin_gamma: field(&meta, "pin_gamma")?,
    };
    let dic = match optional_field::<f64>(&meta, "dic")? {
        Some(dic) => Some(Dic {
            dic,
            p_d: field(&meta, "p_d")?,
            mean_deviance: field(&meta, "mean_deviance")?,
            plugin_deviance: field(&meta, "plugin_deviance")?,
            resorted_cutpoints: false,
        }),
        None => None,
    };

    let mut layout: Option<Layout> = None;
    let mut chains = Vec::with_capacity(sampler.chains);
    for c in 0..sampler.chains {
        let path = chain_file(dir, c);
        let mut rdr = csv::Reader::from_path(&path).map_err(|e| Error::csv(&path, e))?;
        let header: Vec<String> = rdr
            .headers()
            .map_err(|e| Error::csv(&path, e))?
            .iter()
            .map(str::to_string)
            .collect();
        let this = Layout::from_header(&header)?;
        match &layout {
            Some(l) if *l != this => {
                return Err(Error::data(format!("{} has a different layout", path.display())))
            }
            _ => layout = Some(this.clone()),
        }
        let mut draws = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::csv(&path, e))?;
            let row = rec
                .iter()
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| Error::data(format!("{} row {}: bad number '{t}'", path.display(), i + 2)))
                })
                .collect::<Result<Vec<_>>>()?;
            let (state, deviance) = this.unflatten(&row)?;
            draws.push(Draw { state, deviance });
        }
        chains.push(draws);
    }
    if chains.windows(2).any(|w| w[0].len() != w[1].len()) {
        return Err(Error::data("chains in the archive have different lengths"));
    }
    let layout = layout.ok_or_else(|| Error::data("archive has no chains"))?;
    if layout.k != model.k {
        return Err(Error::data("metadata cluster count does not match the draw columns"));
    }
    Ok(Archive {
        draws: PosteriorDraws {
            layout,
            chains,
            sampler,
            model,
            dataset_digest: field(&meta, "dataset_digest")?,
        },
        dic,
    })
}
