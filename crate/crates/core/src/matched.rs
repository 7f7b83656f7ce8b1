//! Joint analysis of two matched square tables.
//!
//! With skew matrices `S1` and `S2` built at the same lambda, the block matrix
//! `[[S1, S2], [S2, S1]]` is orthogonally similar to `diag(S1 + S2, S1 - S2)`
//! through `Q = [[I, I], [I, -I]] / sqrt(2)`. Its singular values are the
//! union of those of the sum and the difference, and each block singular
//! vector has the form `[u; u] / sqrt(2)` (sum) or `[u; -u] / sqrt(2)`
//! (difference).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::divergence::asymmetry_measure;
use crate::error::{Error, Result};
use crate::linalg::{block_rotation, skew_svd, SkewSvd};
use crate::skew_ca::{Metric, SkewMatrix};
use crate::table::{check_matching, ContingencyTable, ProbabilityTable};

/// Relative tolerance for matching block singular values to the components.
pub const MATCH_TOLERANCE: f64 = 1e-9;

/// Planes whose singular value is this close (relative) to a neighbour are
/// not checked for the block sign pattern, since their vectors may mix.
const DEGENERATE_GAP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Component {
    Sum,
    Difference,
}

/// Origin of one block dimension: which component and which of its
/// dimensions (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimClass {
    pub component: Component,
    pub source_dim: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchedAnalysis {
    pub lambda: f64,
    pub labels: Vec<String>,
    pub s_first: DMatrix<f64>,
    pub s_second: DMatrix<f64>,
    pub s_plus: DMatrix<f64>,
    pub s_minus: DMatrix<f64>,
    pub block: DMatrix<f64>,
    pub svd_plus: SkewSvd,
    pub svd_minus: SkewSvd,
    /// Block SVD assembled from the components, with `2M` dimensions.
    pub block_svd: SkewSvd,
    pub dim_class: Vec<DimClass>,
    /// `(p1 + p2) / 2`, used for the averaged metric.
    pub pooled: ProbabilityTable,
}

impl MatchedAnalysis {
    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn block_singular_values(&self) -> &DVector<f64> {
        &self.block_svd.singular_values
    }

    /// Percent of the block inertia per block dimension.
    pub fn block_contributions(&self) -> Vec<f64> {
        let mu = self.block_singular_values();
        let total: f64 = mu.iter().map(|m| m * m).sum();
        if total == 0.0 {
            return vec![0.0; mu.len()];
        }
        mu.iter().map(|m| 100.0 * m * m / total).collect()
    }

    /// Block dimensions (1-based) that belong to a component, in the
    /// component's own order.
    pub fn block_dims_of(&self, component: Component) -> Vec<usize> {
        let mut dims: Vec<(usize, usize)> = self
            .dim_class
            .iter()
            .enumerate()
            .filter(|(_, c)| c.component == component)
            .map(|(k, c)| (c.source_dim, k + 1))
            .collect();
        dims.sort();
        dims.into_iter().map(|(_, k)| k).collect()
    }
}

struct Plane {
    mu: f64,
    component: Component,
    index: usize,
}

fn planes_of(svd: &SkewSvd, component: Component) -> impl Iterator<Item = Plane> + '_ {
    (0..svd.dims() / 2).map(move |k| Plane {
        mu: svd.singular_values[2 * k],
        component,
        index: k,
    })
}

/// Builds the sum, difference and block decompositions of two tables.
pub fn build_matched(
    t1: &ContingencyTable,
    t2: &ContingencyTable,
    lambda: f64,
) -> Result<MatchedAnalysis> {
    check_matching(t1, t2)?;
    let (p1, p2) = (t1.probabilities(), t2.probabilities());
    let prof1 = asymmetry_measure(&p1, lambda)?;
    let prof2 = asymmetry_measure(&p2, lambda)?;
    let s_first = SkewMatrix::from_profile(&p1, &prof1).s;
    let s_second = SkewMatrix::from_profile(&p2, &prof2).s;
    let s_plus = &s_first + &s_second;
    let s_minus = &s_first - &s_second;
    let size = t1.size();
    let mut block = DMatrix::zeros(2 * size, 2 * size);
    block.view_mut((0, 0), (size, size)).copy_from(&s_first);
    block.view_mut((0, size), (size, size)).copy_from(&s_second);
    block.view_mut((size, 0), (size, size)).copy_from(&s_second);
    block.view_mut((size, size), (size, size)).copy_from(&s_first);

    let (plus, (minus, direct)) = rayon::join(
        || skew_svd(&s_plus),
        || rayon::join(|| skew_svd(&s_minus), || skew_svd(&block)),
    );
    let (svd_plus, svd_minus, direct) = (plus?, minus?, direct?);

    // merge planes by descending value, sum first on ties
    let top = svd_plus.largest().max(svd_minus.largest());
    let mut planes: Vec<Plane> = planes_of(&svd_plus, Component::Sum)
        .chain(planes_of(&svd_minus, Component::Difference))
        .collect();
    planes.sort_by(|x, y| y.mu.total_cmp(&x.mu));
    // near-ties keep the descending order but put the sum plane first
    let mut swapped = true;
    while swapped {
        swapped = false;
        for k in 1..planes.len() {
            let tied = planes[k - 1].mu - planes[k].mu <= MATCH_TOLERANCE * top;
            if tied
                && planes[k - 1].component == Component::Difference
                && planes[k].component == Component::Sum
            {
                planes.swap(k - 1, k);
                swapped = true;
            }
        }
    }

    let dims = 2 * planes.len();
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let mut left = DMatrix::zeros(2 * size, dims);
    let mut singular_values = DVector::zeros(dims);
    let mut dim_class = Vec::with_capacity(dims);
    for (k, plane) in planes.iter().enumerate() {
        let (svd, sign) = match plane.component {
            Component::Sum => (&svd_plus, 1.0),
            Component::Difference => (&svd_minus, -1.0),
        };
        for c in 0..2 {
            let v = svd.left.column(2 * plane.index + c);
            let col = 2 * k + c;
            for i in 0..size {
                left[(i, col)] = scale * v[i];
                left[(size + i, col)] = sign * scale * v[i];
            }
            singular_values[col] = plane.mu;
            dim_class.push(DimClass {
                component: plane.component,
                source_dim: 2 * plane.index + c + 1,
            });
        }
    }
    let rotation = block_rotation(dims);
    let right = &left * rotation.transpose();
    let block_svd = SkewSvd {
        left,
        right,
        singular_values,
        rotation,
    };

    validate_block(&block, &block_svd, &direct, &dim_class, top)?;

    let pooled = ProbabilityTable::from_matrix(&((p1.matrix() + p2.matrix()) * 0.5))?;
    Ok(MatchedAnalysis {
        lambda,
        labels: t1.labels().to_vec(),
        s_first,
        s_second,
        s_plus,
        s_minus,
        block,
        svd_plus,
        svd_minus,
        block_svd,
        dim_class,
        pooled,
    })
}

/// Checks the assembled block factorization against the block matrix and
/// against an independent SVD of it: matching singular values, and the
/// `[u; +-u]` sign pattern on well-separated planes.
fn validate_block(
    block: &DMatrix<f64>,
    assembled: &SkewSvd,
    direct: &SkewSvd,
    dim_class: &[DimClass],
    top: f64,
) -> Result<()> {
    let residual = (assembled.reconstruct() - block).amax();
    if residual > 1e-10 * top.max(1.0) {
        return Err(Error::Numerical(format!(
            "block factorization residual {residual} too large"
        )));
    }
    let dims = assembled.dims();
    for k in 0..dims {
        let (a, b) = (assembled.singular_values[k], direct.singular_values[k]);
        if (a - b).abs() > MATCH_TOLERANCE * top.max(f64::MIN_POSITIVE) {
            return Err(Error::Numerical(format!(
                "block singular value {} is {b}, components give {a}",
                k + 1
            )));
        }
    }
    if direct.singular_values.iter().skip(dims).any(|v| *v > MATCH_TOLERANCE * top) {
        return Err(Error::Numerical("block has unmatched singular values".into()));
    }

    let size = block.nrows() / 2;
    let mu = &direct.singular_values;
    for k in (0..dims).step_by(2) {
        let separated = (k < 2 || mu[k - 2] - mu[k] > DEGENERATE_GAP * top)
            && (k + 2 >= dims || mu[k] - mu[k + 2] > DEGENERATE_GAP * top)
            && mu[k] > DEGENERATE_GAP * top;
        if !separated {
            continue;
        }
        let sign = match dim_class[k].component {
            Component::Sum => 1.0,
            Component::Difference => -1.0,
        };
        for c in [k, k + 1] {
            let u = direct.left.column(c);
            let first = u.rows(0, size);
            let second = u.rows(size, size);
            let mismatch = (second - first * sign).amax();
            if mismatch > 1e-8 {
                return Err(Error::Numerical(format!(
                    "block dimension {} does not have the expected sign pattern",
                    c + 1
                )));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentCoordinates {
    pub component: Component,
    pub singular_values: DVector<f64>,
    /// Block dimension (1-based) of each component dimension.
    pub block_dims: Vec<usize>,
    /// Percent of the block inertia per component dimension.
    pub contributions: Vec<f64>,
    pub row_coords: DMatrix<f64>,
    pub col_coords: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchedCoordinates {
    pub metric: Metric,
    pub weights: DVector<f64>,
    pub sum: ComponentCoordinates,
    pub difference: ComponentCoordinates,
}

/// Principal coordinates from the first block of the block singular
/// vectors, `diag(d) A D_mu / sqrt(2)`, for each component.
pub fn matched_coordinates(m: &MatchedAnalysis, metric: Metric) -> MatchedCoordinates {
    let weights = metric.weights(&m.pooled);
    let d = DMatrix::from_diagonal(&weights) * std::f64::consts::FRAC_1_SQRT_2;
    let block_pct = m.block_contributions();
    let component = |component: Component, svd: &SkewSvd| {
        let block_dims = m.block_dims_of(component);
        let mu = DMatrix::from_diagonal(&svd.singular_values);
        ComponentCoordinates {
            component,
            singular_values: svd.singular_values.clone(),
            contributions: block_dims.iter().map(|k| block_pct[k - 1]).collect(),
            block_dims,
            row_coords: &d * &svd.left * &mu,
            col_coords: &d * &svd.right * &mu,
        }
    };
    MatchedCoordinates {
        metric,
        sum: component(Component::Sum, &m.svd_plus),
        difference: component(Component::Difference, &m.svd_minus),
        weights,
    }
}
