//! Square contingency tables and their empirical probability form.

use std::collections::HashSet;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A validated R×R table of non-negative counts whose rows and columns share
/// the same ordered category labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawTable", into = "RawTable")]
pub struct ContingencyTable {
    labels: Vec<String>,
    counts: Vec<Vec<u64>>,
    total: u64,
}

#[derive(Serialize, Deserialize)]
struct RawTable {
    labels: Vec<String>,
    counts: Vec<Vec<i64>>,
}

impl TryFrom<RawTable> for ContingencyTable {
    type Error = Error;

    fn try_from(raw: RawTable) -> Result<Self> {
        ContingencyTable::new(raw.labels, raw.counts)
    }
}

impl From<ContingencyTable> for RawTable {
    fn from(t: ContingencyTable) -> Self {
        RawTable {
            labels: t.labels,
            counts: t
                .counts
                .into_iter()
                .map(|row| row.into_iter().map(|c| c as i64).collect())
                .collect(),
        }
    }
}

impl ContingencyTable {
    /// Validates labels and counts and builds a table.
    pub fn new<S: Into<String>>(labels: Vec<S>, counts: Vec<Vec<i64>>) -> Result<Self> {
        let size = counts.len();
        for (row, values) in counts.iter().enumerate() {
            if values.len() != size {
                return Err(Error::NonSquare {
                    row,
                    len: values.len(),
                    expected: size,
                });
            }
        }
        if size < 2 {
            return Err(Error::TooFewCategories(size));
        }
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() != size {
            return Err(Error::LabelCountMismatch {
                labels: labels.len(),
                size,
            });
        }
        let mut seen = HashSet::with_capacity(size);
        for label in &labels {
            if !seen.insert(label.as_str()) {
                return Err(Error::DuplicateLabel(label.clone()));
            }
        }

        let mut total: u64 = 0;
        let mut validated = Vec::with_capacity(size);
        for (row, values) in counts.into_iter().enumerate() {
            let mut out = Vec::with_capacity(size);
            for (col, value) in values.into_iter().enumerate() {
                if value < 0 {
                    return Err(Error::NegativeEntry { row, col, value });
                }
                total += value as u64;
                out.push(value as u64);
            }
            validated.push(out);
        }
        if total == 0 {
            return Err(Error::EmptyTable);
        }
        Ok(ContingencyTable {
            labels,
            counts: validated,
            total,
        })
    }

    /// Builds a table with labels "1", "2", ... for quick experiments.
    pub fn unlabeled(counts: Vec<Vec<i64>>) -> Result<Self> {
        let labels = (1..=counts.len()).map(|i| i.to_string()).collect();
        Self::new::<String>(labels, counts)
    }

    pub fn size(&self) -> usize {
        self.counts.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn count(&self, i: usize, j: usize) -> u64 {
        self.counts[i][j]
    }

    /// Total number of observations `n`.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn diagonal_total(&self) -> u64 {
        (0..self.size()).map(|i| self.counts[i][i]).sum()
    }

    /// Multiplies every count by `k`.
    pub fn scaled(&self, k: u64) -> Self {
        assert!(k > 0, "scale factor must be positive");
        ContingencyTable {
            labels: self.labels.clone(),
            counts: self
                .counts
                .iter()
                .map(|row| row.iter().map(|c| c * k).collect())
                .collect(),
            total: self.total * k,
        }
    }

    /// Element-wise sum of two tables over the same categories.
    pub fn pooled(&self, other: &ContingencyTable) -> Result<Self> {
        check_matching(self, other)?;
        Ok(ContingencyTable {
            labels: self.labels.clone(),
            counts: self
                .counts
                .iter()
                .zip(&other.counts)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
                .collect(),
            total: self.total + other.total,
        })
    }

    pub fn probabilities(&self) -> ProbabilityTable {
        ProbabilityTable::from_table(self)
    }
}

/// Fails unless both tables have the same size and identical label order.
pub fn check_matching(left: &ContingencyTable, right: &ContingencyTable) -> Result<()> {
    if left.size() != right.size() {
        return Err(Error::DimensionMismatch {
            left: left.size(),
            right: right.size(),
        });
    }
    if left.labels != right.labels {
        return Err(Error::LabelMismatch {
            left: left.labels.clone(),
            right: right.labels.clone(),
        });
    }
    Ok(())
}

/// Empirical cell probabilities `p_ij = n_ij / n` with margins and the
/// off-diagonal mass `delta`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityTable {
    p: DMatrix<f64>,
    row_margins: DVector<f64>,
    col_margins: DVector<f64>,
    delta: f64,
}

impl ProbabilityTable {
    pub fn from_table(t: &ContingencyTable) -> Self {
        let size = t.size();
        let n = t.total() as f64;
        let p = DMatrix::from_fn(size, size, |i, j| t.count(i, j) as f64 / n);
        let row_margins = DVector::from_fn(size, |i, _| {
            t.counts()[i].iter().sum::<u64>() as f64 / n
        });
        let col_margins =
            DVector::from_fn(size, |j, _| (0..size).map(|i| t.count(i, j)).sum::<u64>() as f64 / n);
        // exact integer subtraction before the single division
        let delta = (t.total() - t.diagonal_total()) as f64 / n;
        ProbabilityTable {
            p,
            row_margins,
            col_margins,
            delta,
        }
    }

    /// Builds a probability table from an arbitrary non-negative matrix,
    /// normalizing it to unit mass. Used for population (truth) tables.
    pub fn from_matrix(weights: &DMatrix<f64>) -> Result<Self> {
        let size = weights.nrows();
        if weights.ncols() != size {
            return Err(Error::NonSquare {
                row: 0,
                len: weights.ncols(),
                expected: size,
            });
        }
        if size < 2 {
            return Err(Error::TooFewCategories(size));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidConfig(
                "probability weights must be finite and non-negative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::EmptyTable);
        }
        let p = weights / total;
        let row_margins = DVector::from_fn(size, |i, _| p.row(i).sum());
        let col_margins = DVector::from_fn(size, |j, _| p.column(j).sum());
        let off: f64 = (0..size)
            .flat_map(|i| (0..size).map(move |j| (i, j)))
            .filter(|(i, j)| i != j)
            .map(|(i, j)| p[(i, j)])
            .sum();
        Ok(ProbabilityTable {
            p,
            row_margins,
            col_margins,
            delta: off,
        })
    }

    pub fn size(&self) -> usize {
        self.p.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.p[(i, j)]
    }

    pub fn row_margins(&self) -> &DVector<f64> {
        &self.row_margins
    }

    pub fn col_margins(&self) -> &DVector<f64> {
        &self.col_margins
    }

    /// Off-diagonal mass; zero for purely diagonal tables.
    pub fn off_diagonal_mass(&self) -> f64 {
        self.delta
    }

    /// Averaged marginal weight `(p_i. + p_.i) / 2` of category `i`.
    pub fn averaged_margin(&self, i: usize) -> f64 {
        0.5 * (self.row_margins[i] + self.col_margins[i])
    }
}
