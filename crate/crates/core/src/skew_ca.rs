//! Correspondence analysis of the signed skew-symmetric departure matrix.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::divergence::{asymmetry_measure, check_lambda, AsymmetryProfile};
use crate::error::{Error, Result};
use crate::linalg::{skew_svd, SkewSvd};
use crate::table::{ContingencyTable, ProbabilityTable};

/// `s_ij = sign(p_ij - p_ji) sqrt(phi_ij)`, exactly skew-symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewMatrix {
    pub s: DMatrix<f64>,
    pub lambda: f64,
}

impl SkewMatrix {
    pub fn from_profile(p: &ProbabilityTable, profile: &AsymmetryProfile) -> Self {
        let size = p.size();
        let mut s = DMatrix::zeros(size, size);
        for i in 0..size {
            for j in (i + 1)..size {
                let (pij, pji) = (p.get(i, j), p.get(j, i));
                if pij == pji {
                    continue;
                }
                let v = profile.phi_cells[(i, j)].sqrt();
                let v = if pij > pji { v } else { -v };
                s[(i, j)] = v;
                s[(j, i)] = -v;
            }
        }
        SkewMatrix {
            s,
            lambda: profile.lambda,
        }
    }

    pub fn size(&self) -> usize {
        self.s.nrows()
    }
}

pub fn skew_matrix(p: &ProbabilityTable, lambda: f64) -> Result<SkewMatrix> {
    let profile = asymmetry_measure(p, lambda)?;
    Ok(SkewMatrix::from_profile(p, &profile))
}

/// Row/column weighting applied to the singular vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    /// `d_i = ((p_i. + p_.i) / 2)^(-1/2)`.
    #[default]
    Averaged,
    Identity,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Averaged => "averaged",
            Metric::Identity => "identity",
        }
    }

    /// Weights `d_i` for a table. A category with zero margins never moves
    /// off the origin, so its weight is set to 0 instead of infinity.
    pub fn weights(self, p: &ProbabilityTable) -> DVector<f64> {
        match self {
            Metric::Identity => DVector::from_element(p.size(), 1.0),
            Metric::Averaged => DVector::from_fn(p.size(), |i, _| {
                let m = p.averaged_margin(i);
                if m > 0.0 {
                    m.sqrt().recip()
                } else {
                    0.0
                }
            }),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "averaged" => Ok(Metric::Averaged),
            "identity" => Ok(Metric::Identity),
            other => Err(Error::InvalidConfig(format!("unknown metric {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryDecomposition {
    pub lambda: f64,
    pub metric: Metric,
    pub svd: SkewSvd,
    /// Metric weights `d_i`.
    pub weights: DVector<f64>,
    /// Row principal coordinates `F = diag(d) A D_mu`.
    pub row_coords: DMatrix<f64>,
    /// Column principal coordinates `G = diag(d) B D_mu`.
    pub col_coords: DMatrix<f64>,
    pub total_inertia: f64,
    /// Percent of the inertia per dimension; all zero when fully symmetric.
    pub contributions: Vec<f64>,
    pub fully_symmetric: bool,
}

impl SymmetryDecomposition {
    pub fn dims(&self) -> usize {
        self.svd.dims()
    }

    pub fn size(&self) -> usize {
        self.svd.left.nrows()
    }

    pub fn left(&self) -> &DMatrix<f64> {
        &self.svd.left
    }

    pub fn right(&self) -> &DMatrix<f64> {
        &self.svd.right
    }

    pub fn singular_values(&self) -> &DVector<f64> {
        &self.svd.singular_values
    }

    pub fn rotation(&self) -> &DMatrix<f64> {
        &self.svd.rotation
    }

    /// Checks that a 1-based dimension index exists.
    pub fn check_dim(&self, dim: usize) -> Result<()> {
        if dim == 0 || dim > self.dims() {
            Err(Error::DimensionOutOfRange {
                dim,
                max: self.dims(),
            })
        } else {
            Ok(())
        }
    }

    /// Angle in degrees between two row points within the plane of the
    /// given 1-based dimensions. `None` when either point is at the origin.
    pub fn planar_angle(&self, i: usize, j: usize, dims: (usize, usize)) -> Result<Option<f64>> {
        self.check_dim(dims.0)?;
        self.check_dim(dims.1)?;
        let f = &self.row_coords;
        let (x1, y1) = (f[(i, dims.0 - 1)], f[(i, dims.1 - 1)]);
        let (x2, y2) = (f[(j, dims.0 - 1)], f[(j, dims.1 - 1)]);
        let (n1, n2) = (x1.hypot(y1), x2.hypot(y2));
        if n1 == 0.0 || n2 == 0.0 {
            return Ok(None);
        }
        let cos = ((x1 * x2 + y1 * y2) / (n1 * n2)).clamp(-1.0, 1.0);
        Ok(Some(cos.acos().to_degrees()))
    }
}

pub fn decompose(
    s: &SkewMatrix,
    p: &ProbabilityTable,
    metric: Metric,
) -> Result<SymmetryDecomposition> {
    if s.size() != p.size() {
        return Err(Error::DimensionMismatch {
            left: s.size(),
            right: p.size(),
        });
    }
    let svd = skew_svd(&s.s)?;
    let weights = metric.weights(p);
    let d = DMatrix::from_diagonal(&weights);
    let mu = DMatrix::from_diagonal(&svd.singular_values);
    let row_coords = &d * &svd.left * &mu;
    let col_coords = &d * &svd.right * &mu;
    let total_inertia: f64 = svd.singular_values.iter().map(|m| m * m).sum();
    let fully_symmetric = total_inertia == 0.0;
    let contributions = if fully_symmetric {
        vec![0.0; svd.dims()]
    } else {
        svd.singular_values
            .iter()
            .map(|m| 100.0 * m * m / total_inertia)
            .collect()
    };
    Ok(SymmetryDecomposition {
        lambda: s.lambda,
        metric,
        svd,
        weights,
        row_coords,
        col_coords,
        total_inertia,
        contributions,
        fully_symmetric,
    })
}

/// Percent of the total inertia carried by each dimension.
pub fn contribution_ratios(dec: &SymmetryDecomposition) -> Result<Vec<f64>> {
    if dec.fully_symmetric {
        return Err(Error::FullySymmetric);
    }
    Ok(dec.contributions.clone())
}

/// Distances of the row and column points from the origin over all dims.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OriginDistances {
    pub rows: Vec<f64>,
    pub columns: Vec<f64>,
}

pub fn origin_distances(dec: &SymmetryDecomposition) -> OriginDistances {
    let norms = |m: &DMatrix<f64>| (0..m.nrows()).map(|i| m.row(i).norm()).collect();
    OriginDistances {
        rows: norms(&dec.row_coords),
        columns: norms(&dec.col_coords),
    }
}

/// Evenly spaced lambda values `start, start + step, ..., <= end`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaGrid {
    pub start: f64,
    pub end: f64,
    pub step: f64,
}

impl Default for LambdaGrid {
    fn default() -> Self {
        LambdaGrid {
            start: -0.99,
            end: 3.0,
            step: 0.01,
        }
    }
}

impl LambdaGrid {
    pub fn new(start: f64, end: f64, step: f64) -> Result<Self> {
        let grid = LambdaGrid { start, end, step };
        grid.validate()?;
        Ok(grid)
    }

    fn validate(&self) -> Result<()> {
        if !(self.start.is_finite() && self.end.is_finite() && self.step.is_finite()) {
            return Err(Error::InvalidGrid("bounds and step must be finite".into()));
        }
        if self.start <= -1.0 {
            return Err(Error::InvalidGrid(format!(
                "start {} must be greater than -1",
                self.start
            )));
        }
        if self.step <= 0.0 {
            return Err(Error::InvalidGrid(format!("step {} must be positive", self.step)));
        }
        if self.end < self.start {
            return Err(Error::InvalidGrid(format!(
                "end {} is below start {}",
                self.end, self.start
            )));
        }
        if (self.end - self.start) / self.step > 1e7 {
            return Err(Error::InvalidGrid("grid has more than 10^7 points".into()));
        }
        Ok(())
    }

    /// Grid values generated from an integer index and rounded to 12
    /// decimals, so that e.g. the default grid hits 0 and 1 exactly.
    pub fn values(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let count = ((self.end - self.start) / self.step + 1e-9).floor() as usize + 1;
        Ok((0..count)
            .map(|k| {
                let v = self.start + k as f64 * self.step;
                (v * 1e12).round() / 1e12
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanEntry {
    pub lambda: f64,
    pub phi_total: f64,
    pub singular_values: Vec<f64>,
    pub contributions: Vec<f64>,
    /// Summed contribution of dimensions 1 and 2.
    pub leading: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaScan {
    pub best_lambda: f64,
    pub best_leading: f64,
    pub entries: Vec<ScanEntry>,
}

/// Margin by which a later grid point must beat the current best; keeps ties
/// on the smaller lambda.
const SCAN_TIE: f64 = 1e-9;

/// Evaluates the leading-plane contribution over a lambda grid and returns
/// the maximizing lambda with the full profile in grid order.
pub fn scan_lambda(t: &ContingencyTable, grid: &LambdaGrid, metric: Metric) -> Result<LambdaScan> {
    let lambdas = grid.values()?;
    let p = t.probabilities();
    let entries: Vec<ScanEntry> = lambdas
        .par_iter()
        .map(|&lambda| {
            check_lambda(lambda)?;
            let profile = asymmetry_measure(&p, lambda)?;
            if profile.is_fully_symmetric() {
                return Err(Error::FullySymmetric);
            }
            let s = SkewMatrix::from_profile(&p, &profile);
            let dec = decompose(&s, &p, metric)?;
            let contributions = contribution_ratios(&dec)?;
            let leading = contributions.iter().take(2).sum();
            Ok(ScanEntry {
                lambda,
                phi_total: profile.phi_total,
                singular_values: dec.singular_values().iter().copied().collect(),
                contributions,
                leading,
            })
        })
        .collect::<Result<_>>()?;

    let mut best = 0;
    for (k, entry) in entries.iter().enumerate() {
        if entry.leading > entries[best].leading + SCAN_TIE {
            best = k;
        }
    }
    Ok(LambdaScan {
        best_lambda: entries[best].lambda,
        best_leading: entries[best].leading,
        entries,
    })
}
