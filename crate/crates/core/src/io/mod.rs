//! Reading and writing score panels.
//!
//! A dataset lives in four headered CSV files:
//!
//! | file | columns |
//! |------|---------|
//! | `votes.csv` | `voter,performer,year,score` |
//! | `covariates.csv` | `performer,year,language,act_type` |
//! | `adjacency.csv` | `voter,performer,border` (`1`/`0`) |
//! | `migration.csv` | `voter,performer,stock` |
//!
//! `stock` is the number of people originally from the performer's country
//! living in the voter's country. Cells missing from `migration.csv`, or with an
//! empty stock, are treated as having no migration entry. An optional
//! `scale.txt` holds the comma-separated score values when they differ from the
//! contest scale.
//!
//! Voters are the identifiers in the voter column of `votes.csv`; performers are
//! those in its performer column plus any in `covariates.csv`. Identifiers are
//! opaque strings, sorted on load.

mod simulate;
mod validate;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::mcmc::fmt_f64;
use crate::model::{Dataset, DatasetParts, PairStructure, Performance, Record, ScoreScale};

pub use simulate::{sample_category, simulate, simulate_scores, write_truth, SyntheticDesign, TrueParameters};
pub use validate::{validate, PairCount, ValidationReport};

pub const VOTES_FILE: &str = "votes.csv";
pub const COVARIATES_FILE: &str = "covariates.csv";
pub const ADJACENCY_FILE: &str = "adjacency.csv";
pub const MIGRATION_FILE: &str = "migration.csv";
pub const SCALE_FILE: &str = "scale.txt";

/// Paths of the input tables.
#[derive(Debug, Clone, PartialEq)]
pub struct InputBundle {
    pub votes: PathBuf,
    pub covariates: PathBuf,
    pub adjacency: PathBuf,
    pub migration: PathBuf,
    /// Replaces the contest score scale.
    pub scale: Option<ScoreScale>,
    /// Store `ln(1 + stock)` instead of the raw stock.
    pub log_migration: bool,
}

impl InputBundle {
    /// The four standard file names inside `dir`, with the scale read from
    /// `scale.txt` when that file exists.
    pub fn from_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let scale_path = dir.join(SCALE_FILE);
        let scale = if scale_path.exists() {
            let text = fs::read_to_string(&scale_path).map_err(|e| Error::io(&scale_path, e))?;
            Some(ScoreScale::parse(text.trim()).map_err(|e| Error::data(format!("{}: {e}", scale_path.display())))?)
        } else {
            None
        };
        Ok(InputBundle {
            votes: dir.join(VOTES_FILE),
            covariates: dir.join(COVARIATES_FILE),
            adjacency: dir.join(ADJACENCY_FILE),
            migration: dir.join(MIGRATION_FILE),
            scale,
            log_migration: false,
        })
    }
}

/// Rows of one CSV table with the requested columns picked out by header name.
struct Table {
    path: PathBuf,
    rows: Vec<(u64, Vec<String>)>,
}

impl Table {
    fn read(path: &Path, columns: &[&str]) -> Result<Table> {
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(file);
        let headers = reader.headers().map_err(|e| Error::csv(path, e))?.clone();
        if headers.is_empty() {
            return Ok(Table {
                path: path.to_path_buf(),
                rows: Vec::new(),
            });
        }
        let index = columns
            .iter()
            .map(|c| {
                headers.iter().position(|h| h.eq_ignore_ascii_case(c)).ok_or_else(|| {
                    Error::data(format!("{}: missing column '{c}'", path.display()))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut rows = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| Error::csv(path, e))?;
            let line = rec.position().map_or(0, |p| p.line());
            if rec.iter().all(str::is_empty) {
                continue;
            }
            if rec.len() != headers.len() {
                return Err(Error::data(format!(
                    "{} row {line}: expected {} fields, found {}",
                    path.display(),
                    headers.len(),
                    rec.len()
                )));
            }
            rows.push((line, index.iter().map(|&i| rec[i].to_string()).collect()));
        }
        Ok(Table {
            path: path.to_path_buf(),
            rows,
        })
    }

    fn err(&self, line: u64, msg: impl std::fmt::Display) -> Error {
        Error::data(format!("{} row {line}: {msg}", self.path.display()))
    }

    fn parse<T: std::str::FromStr>(&self, line: u64, field: &str, what: &str) -> Result<T> {
        field
            .parse()
            .map_err(|_| self.err(line, format!("malformed {what} '{field}'")))
    }
}

fn index_of(ids: &[String]) -> HashMap<&str, usize> {
    ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect()
}

/// Reads and validates a dataset.
pub fn load(bundle: &InputBundle) -> Result<Dataset> {
    let scale = bundle.scale.clone().unwrap_or_default();
    let votes = Table::read(&bundle.votes, &["voter", "performer", "year", "score"])?;
    if votes.rows.is_empty() {
        return Err(Error::data(format!("{}: no records", bundle.votes.display())));
    }
    let covs = Table::read(&bundle.covariates, &["performer", "year", "language", "act_type"])?;
    let adjacency = Table::read(&bundle.adjacency, &["voter", "performer", "border"])?;
    let migration = Table::read(&bundle.migration, &["voter", "performer", "stock"])?;

    let voters: Vec<String> = votes
        .rows
        .iter()
        .map(|(_, r)| r[0].clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let performers: Vec<String> = votes
        .rows
        .iter()
        .map(|(_, r)| r[1].clone())
        .chain(covs.rows.iter().map(|(_, r)| r[0].clone()))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let voter_idx = index_of(&voters);
    let perf_idx = index_of(&performers);

    let mut records = Vec::with_capacity(votes.rows.len());
    let mut seen = HashMap::new();
    for (line, row) in &votes.rows {
        let line = *line;
        if row[0] == row[1] {
            return Err(votes.err(line, format!("self-vote by '{}'", row[0])));
        }
        let year: i32 = votes.parse(line, &row[2], "year")?;
        let score: i64 = votes.parse(line, &row[3], "score")?;
        let category = scale
            .category(score)
            .ok_or_else(|| votes.err(line, format!("unknown score {score} (scale is {scale})")))?;
        let voter = voter_idx[row[0].as_str()];
        let performer = perf_idx[row[1].as_str()];
        if let Some(first) = seen.insert((voter, performer, year), line) {
            return Err(votes.err(
                line,
                format!("duplicate record {},{},{year} (first on row {first})", row[0], row[1]),
            ));
        }
        records.push(Record {
            voter,
            performer,
            year,
            category,
        });
    }

    let mut covariates = BTreeMap::new();
    for (line, row) in &covs.rows {
        let line = *line;
        let performer = perf_idx[row[0].as_str()];
        let year: i32 = covs.parse(line, &row[1], "year")?;
        let language = row[2].parse().map_err(|e| covs.err(line, e))?;
        let act_type = row[3].parse().map_err(|e| covs.err(line, e))?;
        if covariates
            .insert((performer, year), Performance { language, act_type })
            .is_some()
        {
            return Err(covs.err(line, format!("duplicate covariates for {},{year}", row[0])));
        }
    }

    let lookup = |table: &Table, line: u64, row: &[String]| -> Result<(usize, usize)> {
        let v = *voter_idx
            .get(row[0].as_str())
            .ok_or_else(|| table.err(line, format!("unknown voter '{}'", row[0])))?;
        let p = *perf_idx
            .get(row[1].as_str())
            .ok_or_else(|| table.err(line, format!("unknown performer '{}'", row[1])))?;
        Ok((v, p))
    };
    let mut pairs = PairStructure::new(voters.len(), performers.len());
    for (line, row) in &adjacency.rows {
        let (v, p) = lookup(&adjacency, *line, row)?;
        let border = match row[2].to_ascii_lowercase().as_str() {
            "1" | "true" => true,
            "0" | "false" => false,
            other => return Err(adjacency.err(*line, format!("malformed border '{other}'"))),
        };
        pairs.set_adjacent(v, p, border);
    }
    for (line, row) in &migration.rows {
        let (v, p) = lookup(&migration, *line, row)?;
        if row[2].is_empty() {
            continue;
        }
        let stock: f64 = migration.parse(*line, &row[2], "stock")?;
        if !stock.is_finite() || stock < 0.0 {
            return Err(migration.err(*line, format!("stock must be finite and non-negative, got {stock}")));
        }
        pairs.set_migration(v, p, Some(stock));
    }
    if bundle.log_migration {
        pairs.log1p_migration();
    }

    Dataset::new(DatasetParts {
        voters,
        performers,
        scale,
        records,
        covariates,
        pairs,
        base_year: None,
    })
}

/// The four tables plus scale in canonical text form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalTables {
    pub votes: String,
    pub covariates: String,
    pub adjacency: String,
    pub migration: String,
    pub scale: String,
}

/// Canonical rendering: rows in index order, floats in shortest round-trip form,
/// only border cells in the adjacency table and only present stocks in the
/// migration table.
pub fn canonical_tables(data: &Dataset) -> CanonicalTables {
    let voters = data.voters();
    let performers = data.performers();
    let scale = data.scale();

    let mut votes = String::from("voter,performer,year,score\n");
    for r in data.records() {
        let _ = writeln!(
            votes,
            "{},{},{},{}",
            voters[r.voter],
            performers[r.performer],
            r.year,
            scale.score(r.category)
        );
    }
    let mut covariates = String::from("performer,year,language,act_type\n");
    for (&(p, year), prof) in data.covariates() {
        let _ = writeln!(covariates, "{},{year},{},{}", performers[p], prof.language, prof.act_type);
    }
    let structure = data.structure();
    let mut adjacency = String::from("voter,performer,border\n");
    let mut migration = String::from("voter,performer,stock\n");
    for (v, voter) in voters.iter().enumerate() {
        for (p, performer) in performers.iter().enumerate() {
            if structure.adjacent(v, p) {
                let _ = writeln!(adjacency, "{voter},{performer},1");
            }
            if let Some(z) = structure.migration(v, p) {
                let _ = writeln!(migration, "{voter},{performer},{}", fmt_f64(z));
            }
        }
    }
    CanonicalTables {
        votes,
        covariates,
        adjacency,
        migration,
        scale: format!("{scale}\n"),
    }
}

/// Writes the canonical tables into `dir` (created if needed) and returns the
/// paths written.
pub fn write_dataset(data: &Dataset, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::write(dir, e))?;
    let t = canonical_tables(data);
    let mut files = vec![
        (VOTES_FILE, t.votes),
        (COVARIATES_FILE, t.covariates),
        (ADJACENCY_FILE, t.adjacency),
        (MIGRATION_FILE, t.migration),
    ];
    if *data.scale() != ScoreScale::contest() {
        files.push((SCALE_FILE, t.scale));
    }
    let mut written = Vec::new();
    for (name, text) in files {
        let path = dir.join(name);
        fs::write(&path, text).map_err(|e| Error::write(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

/// SHA-256 of the canonical tables, as lowercase hex.
pub fn dataset_digest(data: &Dataset) -> String {
    let t = canonical_tables(data);
    let mut hasher = Sha256::new();
    for part in [&t.scale, &t.votes, &t.covariates, &t.adjacency, &t.migration] {
        hasher.update(part.as_bytes());
        hasher.update([0u8]);
    }
    hasher
        .finalize()
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

/// SHA-256 of a file's bytes, as lowercase hex.
pub fn file_digest(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(Sha256::digest(&bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    }))
}
