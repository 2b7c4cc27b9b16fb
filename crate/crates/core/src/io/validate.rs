use std::fmt;

use crate::model::Dataset;

/// Number of occasions `T_vp` on which one voter scored one performer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairCount {
    pub voter: String,
    pub performer: String,
    pub occasions: usize,
}

/// Shape and completeness summary of a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub n_voters: usize,
    pub n_performers: usize,
    pub n_pairs: usize,
    pub n_records: usize,
    pub first_year: Option<i32>,
    pub last_year: Option<i32>,
    pub pair_counts: Vec<PairCount>,
    pub min_occasions: usize,
    pub max_occasions: usize,
    pub mean_occasions: f64,
    /// Performances (performer, year) that have covariates.
    pub covariate_rows: usize,
    /// Performances that received scores.
    pub scored_performances: usize,
    /// Scored performances lacking covariates; always 0 for a loaded dataset.
    pub missing_covariates: usize,
    /// Voters who never scored anyone.
    pub silent_voters: Vec<String>,
    /// Cells with a border or migration entry but no scores.
    pub structure_only: Vec<(String, String)>,
    pub errors: Vec<String>,
}

impl ValidationReport {
    pub fn is_balanced(&self) -> bool {
        self.min_occasions == self.max_occasions
    }

    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }
}

/// Summarises a dataset and re-checks the invariants a [`Dataset`] guarantees.
pub fn validate(data: &Dataset) -> ValidationReport {
    let voters = data.voters();
    let performers = data.performers();
    let pair_counts: Vec<PairCount> = data
        .observed_pairs()
        .iter()
        .enumerate()
        .map(|(h, &(v, p))| PairCount {
            voter: voters[v].clone(),
            performer: performers[p].clone(),
            occasions: data.pair_records(h).len(),
        })
        .collect();
    let occ: Vec<usize> = pair_counts.iter().map(|c| c.occasions).collect();

    let mut errors = Vec::new();
    let mut scored: Vec<(usize, i32)> = data.records().iter().map(|r| (r.performer, r.year)).collect();
    scored.sort_unstable();
    scored.dedup();
    let missing = scored.iter().filter(|k| !data.covariates().contains_key(k)).count();
    if missing > 0 {
        errors.push(format!("{missing} scored performances lack covariates"));
    }
    for r in data.records() {
        if voters[r.voter] == performers[r.performer] {
            errors.push(format!("self-vote by {} in {}", voters[r.voter], r.year));
        }
        if r.category >= data.scale().len() {
            errors.push(format!("category {} outside the scale", r.category));
        }
    }

    let structure_only = data
        .structure()
        .structured_cells()
        .filter(|&(v, p)| data.pair_index(v, p).is_none())
        .map(|(v, p)| (voters[v].clone(), performers[p].clone()))
        .collect();
    let silent_voters = (0..data.n_voters())
        .filter(|&v| data.voter_pairs(v).is_empty())
        .map(|v| voters[v].clone())
        .collect();

    ValidationReport {
        n_voters: data.n_voters(),
        n_performers: data.n_performers(),
        n_pairs: data.n_pairs(),
        n_records: data.records().len(),
        first_year: data.records().iter().map(|r| r.year).min(),
        last_year: data.records().iter().map(|r| r.year).max(),
        min_occasions: occ.iter().copied().min().unwrap_or(0),
        max_occasions: occ.iter().copied().max().unwrap_or(0),
        mean_occasions: if occ.is_empty() {
            0.0
        } else {
            occ.iter().sum::<usize>() as f64 / occ.len() as f64
        },
        pair_counts,
        covariate_rows: data.covariates().len(),
        scored_performances: scored.len(),
        missing_covariates: missing,
        silent_voters,
        structure_only,
        errors,
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "voters (V): {}", self.n_voters)?;
        writeln!(f, "performers (P): {}", self.n_performers)?;
        writeln!(f, "observed pairs (H): {}", self.n_pairs)?;
        writeln!(f, "records: {}", self.n_records)?;
        if let (Some(a), Some(b)) = (self.first_year, self.last_year) {
            writeln!(f, "years: {a}-{b}")?;
        }
        writeln!(
            f,
            "occasions per pair: min {} max {} mean {:.2} ({})",
            self.min_occasions,
            self.max_occasions,
            self.mean_occasions,
            if self.is_balanced() { "balanced" } else { "unbalanced" }
        )?;
        writeln!(
            f,
            "covariates: {} rows, {} scored performances, {} missing",
            self.covariate_rows, self.scored_performances, self.missing_covariates
        )?;
        if !self.silent_voters.is_empty() {
            writeln!(f, "voters without scores: {}", self.silent_voters.join(" "))?;
        }
        writeln!(f, "structure-only pairs: {}", self.structure_only.len())?;
        for (v, p) in &self.structure_only {
            writeln!(f, "  {v} -> {p}")?;
        }
        if self.errors.is_empty() {
            writeln!(f, "errors: none")
        } else {
            writeln!(f, "errors: {}", self.errors.len())?;
            for e in &self.errors {
                writeln!(f, "  {e}")?;
            }
            Ok(())
        }
    }
}
