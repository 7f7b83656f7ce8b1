//! Chi-square numerics and per-category confidence circles.
//!
//! The radius around row point `i` in the plane of dimensions 1 and 2 is
//!
//! ```text
//! x_i = d_i mu_1 sqrt( chi2_alpha * c_lambda / (2 n delta Phi) * (a_i1^2 + a_i2^2) )
//! ```
//!
//! with `chi2_alpha` the upper point at `R (R - 1) / 2` degrees of freedom and
//! `c_lambda = lambda (lambda + 1) / (2^lambda - 1)`. The point's squared
//! distance from the origin in that plane is `d_i^2 mu_1^2 (a_i1^2 + a_i2^2)`,
//! so the region excludes the origin exactly when the power-divergence
//! statistic `2 n delta Phi / c_lambda` exceeds `chi2_alpha`.

mod chisq;

pub use chisq::{chi_square_cdf, chi_square_pdf, chi_square_quantile, chi_square_sf, ln_gamma};

use serde::{Deserialize, Serialize};

use crate::divergence::{calibration_constant, AsymmetryProfile};
use crate::error::{Error, Result};
use crate::skew_ca::{Metric, SymmetryDecomposition};
use crate::table::ContingencyTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Row,
    Column,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceRegion {
    pub category: usize,
    pub label: String,
    pub axis: Axis,
    pub center: (f64, f64),
    pub radius_x: f64,
    pub radius_y: f64,
    pub alpha: f64,
    pub contains_origin: bool,
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(alpha))
    }
}

/// Scale `chi2_alpha c_lambda / (2 n delta Phi)` shared by every region.
pub fn region_scale(t: &ContingencyTable, prof: &AsymmetryProfile, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if prof.is_fully_symmetric() {
        return Err(Error::FullySymmetric);
    }
    let size = t.size() as u64;
    let chi2 = chi_square_quantile(size * (size - 1) / 2, alpha)?;
    let n = t.total() as f64;
    Ok(chi2 * calibration_constant(prof.lambda) / (2.0 * n * prof.delta * prof.phi_total))
}

/// Confidence circles for every row category followed by every column
/// category, in the plane of dimensions 1 and 2.
pub fn confidence_regions(
    dec: &SymmetryDecomposition,
    t: &ContingencyTable,
    prof: &AsymmetryProfile,
    alpha: f64,
) -> Result<Vec<ConfidenceRegion>> {
    let size = t.size();
    if dec.size() != size {
        return Err(Error::DimensionMismatch {
            left: dec.size(),
            right: size,
        });
    }
    if size < 3 {
        return Err(Error::UnsupportedDimension(size));
    }
    if dec.metric != Metric::Averaged {
        return Err(Error::IdentityMetricUnsupported);
    }
    if dec.lambda != prof.lambda {
        return Err(Error::InvalidConfig(format!(
            "decomposition lambda {} differs from profile lambda {}",
            dec.lambda, prof.lambda
        )));
    }
    let scale = region_scale(t, prof, alpha)?;
    let mu = dec.singular_values();
    let (mu1, mu2) = (mu[0], mu[1]);

    let mut regions = Vec::with_capacity(2 * size);
    for (axis, vectors, coords) in [
        (Axis::Row, dec.left(), &dec.row_coords),
        (Axis::Column, dec.right(), &dec.col_coords),
    ] {
        for i in 0..size {
            // share of the unit vector e_i inside the plane of dims 1-2
            let share = vectors[(i, 0)].powi(2) + vectors[(i, 1)].powi(2);
            let d = dec.weights[i];
            let radius_x = d * mu1 * (scale * share).sqrt();
            let radius_y = d * mu2 * (scale * share).sqrt();
            let center = (coords[(i, 0)], coords[(i, 1)]);
            let contains_origin = if radius_x > 0.0 && radius_y > 0.0 {
                (center.0 / radius_x).powi(2) + (center.1 / radius_y).powi(2) <= 1.0
            } else {
                center == (0.0, 0.0)
            };
            regions.push(ConfidenceRegion {
                category: i,
                label: t.labels()[i].clone(),
                axis,
                center,
                radius_x,
                radius_y,
                alpha,
                contains_origin,
            });
        }
    }
    Ok(regions)
}
