use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::ScoreScale;

/// Number of fixed-effect coefficients: year, two language dummies, two act dummies.
pub const N_BETA: usize = 5;

/// Coefficient labels in storage order.
pub const BETA_LABELS: [&str; N_BETA] = ["1", "22", "23", "32", "33"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Language {
    English,
    Own,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ActType {
    Group,
    FemaleSolo,
    MaleSolo,
}

impl FromStr for Language {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "english" => Ok(Language::English),
            "own" => Ok(Language::Own),
            "mixed" => Ok(Language::Mixed),
            other => Err(format!(
                "unknown language '{other}' (expected English, Own or Mixed)"
            )),
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Language::English => "English",
            Language::Own => "Own",
            Language::Mixed => "Mixed",
        })
    }
}

impl FromStr for ActType {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "group" => Ok(ActType::Group),
            "femalesolo" | "female_solo" | "female" => Ok(ActType::FemaleSolo),
            "malesolo" | "male_solo" | "male" => Ok(ActType::MaleSolo),
            other => Err(format!(
                "unknown act type '{other}' (expected Group, FemaleSolo or MaleSolo)"
            )),
        }
    }
}

impl fmt::Display for ActType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ActType::Group => "Group",
            ActType::FemaleSolo => "FemaleSolo",
            ActType::MaleSolo => "MaleSolo",
        })
    }
}

/// Covariates of one performance: performer `p` in year `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CovariateProfile {
    /// Years elapsed since the first contest year in the panel.
    pub year_offset: u32,
    pub language: Language,
    pub act_type: ActType,
}

impl CovariateProfile {
    /// Design row matching the coefficient order of [`BETA_LABELS`].
    ///
    /// English and Group are the reference categories and contribute no dummy.
    pub fn design(&self) -> [f64; N_BETA] {
        let ind = |b: bool| if b { 1.0 } else { 0.0 };
        [
            f64::from(self.year_offset),
            ind(self.language == Language::Mixed),
            ind(self.language == Language::Own),
            ind(self.act_type == ActType::FemaleSolo),
            ind(self.act_type == ActType::MaleSolo),
        ]
    }
}

/// Border indicators and migration stocks for every (voter, performer) cell.
///
/// Adjacency is stored exactly as given; no symmetry is imposed.
#[derive(Debug, Clone, PartialEq)]
pub struct PairStructure {
    n_voters: usize,
    n_performers: usize,
    adjacency: Vec<bool>,
    migration: Vec<Option<f64>>,
}

impl PairStructure {
    pub fn new(n_voters: usize, n_performers: usize) -> Self {
        PairStructure {
            n_voters,
            n_performers,
            adjacency: vec![false; n_voters * n_performers],
            migration: vec![None; n_voters * n_performers],
        }
    }

    fn cell(&self, voter: usize, performer: usize) -> usize {
        assert!(voter < self.n_voters && performer < self.n_performers);
        voter * self.n_performers + performer
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.n_voters, self.n_performers)
    }

    pub fn set_adjacent(&mut self, voter: usize, performer: usize, adjacent: bool) {
        let c = self.cell(voter, performer);
        self.adjacency[c] = adjacent;
    }

    pub fn set_migration(&mut self, voter: usize, performer: usize, stock: Option<f64>) {
        let c = self.cell(voter, performer);
        self.migration[c] = stock;
    }

    pub fn adjacent(&self, voter: usize, performer: usize) -> bool {
        self.adjacency[self.cell(voter, performer)]
    }

    /// Migration stock, `None` when no migration is recorded.
    pub fn migration(&self, voter: usize, performer: usize) -> Option<f64> {
        self.migration[self.cell(voter, performer)]
    }

    /// `w_vp` as a number.
    pub fn border(&self, voter: usize, performer: usize) -> f64 {
        if self.adjacent(voter, performer) {
            1.0
        } else {
            0.0
        }
    }

    /// `z_vp` times its presence indicator: exactly 0 when absent.
    pub fn migration_term(&self, voter: usize, performer: usize) -> f64 {
        self.migration(voter, performer).unwrap_or(0.0)
    }

    /// Cells with a border or a migration entry.
    pub fn structured_cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n_voters).flat_map(move |v| {
            (0..self.n_performers).filter_map(move |p| {
                (self.adjacent(v, p) || self.migration(v, p).is_some()).then_some((v, p))
            })
        })
    }

    /// Applies `ln(1 + z)` to every recorded stock.
    pub fn log1p_migration(&mut self) {
        for z in self.migration.iter_mut().flatten() {
            *z = z.ln_1p();
        }
    }
}

/// One observed score: voter `voter` gave performer `performer` the score in
/// category `category` in contest year `year`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Record {
    pub voter: usize,
    pub performer: usize,
    pub year: i32,
    pub category: usize,
}

/// Covariates of a performance before the year offset is resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Performance {
    pub language: Language,
    pub act_type: ActType,
}

/// Raw ingredients of a [`Dataset`].
#[derive(Debug, Clone)]
pub struct DatasetParts {
    pub voters: Vec<String>,
    pub performers: Vec<String>,
    pub scale: ScoreScale,
    pub records: Vec<Record>,
    /// Keyed by (performer index, year).
    pub covariates: BTreeMap<(usize, i32), Performance>,
    pub pairs: PairStructure,
    /// Year with offset 0; defaults to the earliest year among records and covariates.
    pub base_year: Option<i32>,
}

/// Validated, immutable panel of scores with covariates and pair structure.
///
/// Records are kept sorted by (voter, performer, year). Observed pairs are the
/// distinct (voter, performer) combinations with at least one record, sorted the
/// same way; pair `h` owns `alpha[h]` in a [`ParameterState`](crate::model::ParameterState).
#[derive(Debug, Clone)]
pub struct Dataset {
    voters: Vec<String>,
    performers: Vec<String>,
    scale: ScoreScale,
    base_year: i32,
    records: Vec<Record>,
    covariates: BTreeMap<(usize, i32), CovariateProfile>,
    pairs: PairStructure,
    observed_pairs: Vec<(usize, usize)>,

    record_pair: Vec<usize>,
    record_design: Vec<[f64; N_BETA]>,
    pair_records: Vec<Vec<usize>>,
    category_records: Vec<Vec<usize>>,
    feature_records: [Vec<usize>; N_BETA],
    voter_pairs: Vec<Vec<usize>>,
    pair_border: Vec<f64>,
    pair_migration: Vec<f64>,
}

fn check_identifiers(kind: &str, ids: &[String]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for id in ids {
        if id.is_empty() || id.contains(['.', ',', '"']) || id.chars().any(char::is_whitespace) {
            return Err(Error::data(format!(
                "{kind} identifier '{id}' must be non-empty without '.', ',', quotes or spaces"
            )));
        }
        if !seen.insert(id.as_str()) {
            return Err(Error::data(format!("duplicate {kind} identifier '{id}'")));
        }
    }
    Ok(())
}

impl Dataset {
    pub fn new(parts: DatasetParts) -> Result<Self> {
        let DatasetParts {
            voters,
            performers,
            scale,
            mut records,
            covariates,
            pairs,
            base_year,
        } = parts;
        check_identifiers("voter", &voters)?;
        check_identifiers("performer", &performers)?;
        if pairs.dims() != (voters.len(), performers.len()) {
            return Err(Error::data(format!(
                "pair structure is {:?} but there are {} voters and {} performers",
                pairs.dims(),
                voters.len(),
                performers.len()
            )));
        }
        for r in &records {
            if r.voter >= voters.len() || r.performer >= performers.len() {
                return Err(Error::data(format!("record {r:?} references an unknown index")));
            }
            if r.category >= scale.len() {
                return Err(Error::data(format!(
                    "record {r:?} has category outside the {}-point scale",
                    scale.len()
                )));
            }
            if voters[r.voter] == performers[r.performer] {
                return Err(Error::data(format!(
                    "self-vote by '{}' in {}",
                    voters[r.voter], r.year
                )));
            }
        }
        for &(p, _) in covariates.keys() {
            if p >= performers.len() {
                return Err(Error::data(format!("covariates reference performer index {p}")));
            }
        }
        records.sort();
        if let Some(w) = records
            .windows(2)
            .find(|w| (w[0].voter, w[0].performer, w[0].year) == (w[1].voter, w[1].performer, w[1].year))
        {
            return Err(Error::data(format!(
                "duplicate record for voter '{}', performer '{}', year {}",
                voters[w[0].voter], performers[w[0].performer], w[0].year
            )));
        }

        let base_year = match base_year {
            Some(y) => y,
            None => records
                .iter()
                .map(|r| r.year)
                .chain(covariates.keys().map(|&(_, y)| y))
                .min()
                .unwrap_or(0),
        };
        let mut profiles = BTreeMap::new();
        for (&(p, year), perf) in &covariates {
            let offset = year - base_year;
            if offset < 0 {
                return Err(Error::data(format!(
                    "year {year} precedes base year {base_year}"
                )));
            }
            profiles.insert(
                (p, year),
                CovariateProfile {
                    year_offset: offset as u32,
                    language: perf.language,
                    act_type: perf.act_type,
                },
            );
        }

        let mut observed_pairs: Vec<(usize, usize)> = Vec::new();
        let mut pair_index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut record_pair = Vec::with_capacity(records.len());
        let mut record_design = Vec::with_capacity(records.len());
        for r in &records {
            let profile = profiles.get(&(r.performer, r.year)).ok_or_else(|| {
                Error::data(format!(
                    "no covariates for performer '{}' in {}",
                    performers[r.performer], r.year
                ))
            })?;
            let h = *pair_index.entry((r.voter, r.performer)).or_insert_with(|| {
                observed_pairs.push((r.voter, r.performer));
                observed_pairs.len() - 1
            });
            record_pair.push(h);
            record_design.push(profile.design());
        }

        let mut pair_records = vec![Vec::new(); observed_pairs.len()];
        let mut category_records = vec![Vec::new(); scale.len()];
        let mut feature_records: [Vec<usize>; N_BETA] = Default::default();
        for (i, r) in records.iter().enumerate() {
            pair_records[record_pair[i]].push(i);
            category_records[r.category].push(i);
            for (j, x) in record_design[i].iter().enumerate() {
                if *x != 0.0 {
                    feature_records[j].push(i);
                }
            }
        }
        let mut voter_pairs = vec![Vec::new(); voters.len()];
        for (h, &(v, _)) in observed_pairs.iter().enumerate() {
            voter_pairs[v].push(h);
        }
        let pair_border = observed_pairs.iter().map(|&(v, p)| pairs.border(v, p)).collect();
        let pair_migration = observed_pairs
            .iter()
            .map(|&(v, p)| pairs.migration_term(v, p))
            .collect();

        Ok(Dataset {
            voters,
            performers,
            scale,
            base_year,
            records,
            covariates: profiles,
            pairs,
            observed_pairs,
            record_pair,
            record_design,
            pair_records,
            category_records,
            feature_records,
            voter_pairs,
            pair_border,
            pair_migration,
        })
    }

    /// Same design with the score categories replaced, in record order.
    pub fn with_categories(&self, categories: &[usize]) -> Result<Self> {
        if categories.len() != self.records.len() {
            return Err(Error::data(format!(
                "expected {} categories, got {}",
                self.records.len(),
                categories.len()
            )));
        }
        let mut out = self.clone();
        let mut by_category = vec![Vec::new(); self.scale.len()];
        for (i, (r, &c)) in out.records.iter_mut().zip(categories).enumerate() {
            if c >= self.scale.len() {
                return Err(Error::data(format!("category {c} outside the scale")));
            }
            r.category = c;
            by_category[c].push(i);
        }
        out.category_records = by_category;
        Ok(out)
    }

    pub fn parts(&self) -> DatasetParts {
        DatasetParts {
            voters: self.voters.clone(),
            performers: self.performers.clone(),
            scale: self.scale.clone(),
            records: self.records.clone(),
            covariates: self
                .covariates
                .iter()
                .map(|(&k, prof)| {
                    (
                        k,
                        Performance {
                            language: prof.language,
                            act_type: prof.act_type,
                        },
                    )
                })
                .collect(),
            pairs: self.pairs.clone(),
            base_year: Some(self.base_year),
        }
    }

    pub fn voters(&self) -> &[String] {
        &self.voters
    }

    pub fn performers(&self) -> &[String] {
        &self.performers
    }

    pub fn n_voters(&self) -> usize {
        self.voters.len()
    }

    pub fn n_performers(&self) -> usize {
        self.performers.len()
    }

    pub fn scale(&self) -> &ScoreScale {
        &self.scale
    }

    pub fn base_year(&self) -> i32 {
        self.base_year
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn covariates(&self) -> &BTreeMap<(usize, i32), CovariateProfile> {
        &self.covariates
    }

    pub fn profile(&self, performer: usize, year: i32) -> Result<&CovariateProfile> {
        self.covariates.get(&(performer, year)).ok_or_else(|| {
            Error::data(format!(
                "no covariates for performer {} in {year}",
                self.performers
                    .get(performer)
                    .map(String::as_str)
                    .unwrap_or("?")
            ))
        })
    }

    pub fn structure(&self) -> &PairStructure {
        &self.pairs
    }

    /// Distinct observed (voter, performer) pairs; `H` is their count.
    pub fn observed_pairs(&self) -> &[(usize, usize)] {
        &self.observed_pairs
    }

    pub fn n_pairs(&self) -> usize {
        self.observed_pairs.len()
    }

    pub fn pair_index(&self, voter: usize, performer: usize) -> Option<usize> {
        self.observed_pairs.binary_search(&(voter, performer)).ok()
    }

    pub fn record_pair(&self, record: usize) -> usize {
        self.record_pair[record]
    }

    pub fn record_design(&self, record: usize) -> &[f64; N_BETA] {
        &self.record_design[record]
    }

    /// Records of observed pair `h`.
    pub fn pair_records(&self, pair: usize) -> &[usize] {
        &self.pair_records[pair]
    }

    pub fn category_records(&self, category: usize) -> &[usize] {
        &self.category_records[category]
    }

    /// Records whose design entry `j` is non-zero.
    pub fn feature_records(&self, j: usize) -> &[usize] {
        &self.feature_records[j]
    }

    /// Observed pairs in which `voter` takes part.
    pub fn voter_pairs(&self, voter: usize) -> &[usize] {
        &self.voter_pairs[voter]
    }

    pub fn pair_border(&self, pair: usize) -> f64 {
        self.pair_border[pair]
    }

    pub fn pair_migration(&self, pair: usize) -> f64 {
        self.pair_migration[pair]
    }

    pub fn voter_index(&self, id: &str) -> Option<usize> {
        self.voters.iter().position(|v| v == id)
    }

    pub fn performer_index(&self, id: &str) -> Option<usize> {
        self.performers.iter().position(|p| p == id)
    }
}

impl PartialEq for Dataset {
    fn eq(&self, other: &Self) -> bool {
        self.voters == other.voters
            && self.performers == other.performers
            && self.scale == other.scale
            && self.base_year == other.base_year
            && self.records == other.records
            && self.covariates == other.covariates
            && self.pairs == other.pairs
    }
}
