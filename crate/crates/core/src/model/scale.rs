use crate::error::{Error, Result};

/// Ordered set of admissible scores.
///
/// Categories are indexed `0..len()` internally; category `c` holds the
/// `c`-th smallest admissible score.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoreScale {
    values: Vec<i64>,
}

impl ScoreScale {
    /// Scores awarded in the final round: 1 to 8, 10 and 12, plus 0 for no points.
    pub const CONTEST_SCORES: [i64; 11] = [0, 1, 2, 3, 4, 5, 6, 7, 8, 10, 12];

    pub fn new(values: Vec<i64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::config(format!(
                "score scale needs at least 2 values, got {}",
                values.len()
            )));
        }
        if let Some(w) = values.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::config(format!(
                "score scale must be strictly increasing ({} followed by {})",
                w[0], w[1]
            )));
        }
        Ok(ScoreScale { values })
    }

    pub fn contest() -> Self {
        ScoreScale {
            values: Self::CONTEST_SCORES.to_vec(),
        }
    }

    /// Parses a comma-separated list such as `0,1,2,3,4,5,6,7,8,10,12`.
    pub fn parse(text: &str) -> Result<Self> {
        let values = text
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<i64>()
                    .map_err(|_| Error::config(format!("invalid score value '{}'", t.trim())))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(values)
    }

    /// Number of categories.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn n_cutpoints(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn category(&self, score: i64) -> Option<usize> {
        self.values.binary_search(&score).ok()
    }

    pub fn score(&self, category: usize) -> i64 {
        self.values[category]
    }
}

impl Default for ScoreScale {
    fn default() -> Self {
        Self::contest()
    }
}

impl std::fmt::Display for ScoreScale {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.values.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}
