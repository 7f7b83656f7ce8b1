//! Bowker's symmetry statistic and the power-divergence-type asymmetry
//! measure with its per-cell decomposition.
//!
//! For a table with off-diagonal mass `delta`, write `p*_ij = p_ij / delta`,
//! `p^s_ij = (p*_ij + p*_ji) / 2` and `p^c_ij = p_ij / (p_ij + p_ji)`. The
//! measure is
//!
//! ```text
//! Phi(lambda) = lambda (lambda + 1) / (2^lambda - 1) * I(lambda)
//! I(lambda)   = 1 / (lambda (lambda + 1)) * sum_{i != j} p*_ij [ (p*_ij / p^s_ij)^lambda - 1 ]
//! ```
//!
//! and equivalently the sum of the cell departures
//!
//! ```text
//! phi_ij = (p*_ij + p*_ji) / 2 * [ 1 - 2^lambda (1 - p^c_ij^(lambda+1) - p^c_ji^(lambda+1)) / (2^lambda - 1) ]
//! ```
//!
//! At `lambda = 0` both forms are replaced by their limits (Kullback-Leibler
//! divergence and binary entropy, scaled by `1 / ln 2`).

use std::f64::consts::LN_2;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::confidence::chi_square_sf;
use crate::error::{Error, Result};
use crate::table::{ContingencyTable, ProbabilityTable};

/// `|lambda|` below this uses the closed-form `lambda -> 0` limit.
pub const LAMBDA_ZERO_TOLERANCE: f64 = 1e-10;

/// Agreement required between the two algebraic forms of the measure.
pub const DUAL_FORM_TOLERANCE: f64 = 1e-12;

/// Power-divergence members with conventional names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Divergence {
    Hellinger,
    #[serde(rename = "kl")]
    KullbackLeibler,
    CressieRead,
    Pearson,
}

impl Divergence {
    pub const ALL: [Divergence; 4] = [
        Divergence::Hellinger,
        Divergence::KullbackLeibler,
        Divergence::CressieRead,
        Divergence::Pearson,
    ];

    pub fn lambda(self) -> f64 {
        match self {
            Divergence::Hellinger => -0.5,
            Divergence::KullbackLeibler => 0.0,
            Divergence::CressieRead => 2.0 / 3.0,
            Divergence::Pearson => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Divergence::Hellinger => "hellinger",
            Divergence::KullbackLeibler => "kl",
            Divergence::CressieRead => "cressie-read",
            Divergence::Pearson => "pearson",
        }
    }
}

impl fmt::Display for Divergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Divergence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Divergence::ALL
            .into_iter()
            .find(|d| d.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown divergence {s:?}")))
    }
}

/// Parses either a divergence name or a numeric lambda.
pub fn parse_lambda(s: &str) -> Result<f64> {
    if let Ok(d) = s.parse::<Divergence>() {
        return Ok(d.lambda());
    }
    let lambda: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("lambda {s:?} is neither a number nor a divergence name")))?;
    check_lambda(lambda)?;
    Ok(lambda)
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda > -1.0 {
        Ok(())
    } else {
        Err(Error::LambdaOutOfRange(lambda))
    }
}

fn is_zero_lambda(lambda: f64) -> bool {
    lambda.abs() < LAMBDA_ZERO_TOLERANCE
}

/// The factor `lambda (lambda + 1) / (2^lambda - 1)` linking `I(lambda)`
/// to the normalized measure, with its limit `1 / ln 2` at zero.
pub fn calibration_constant(lambda: f64) -> f64 {
    if is_zero_lambda(lambda) {
        1.0 / LN_2
    } else {
        lambda * (lambda + 1.0) / (lambda * LN_2).exp_m1()
    }
}

fn x_ln_x(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}

/// `x (x^lambda - 1)`, taken as 0 at `x = 0` (its limit for `lambda > -1`).
fn x_pow_m1(x: f64, lambda: f64) -> f64 {
    if x > 0.0 {
        x * (lambda * x.ln()).exp_m1()
    } else {
        0.0
    }
}

/// Bowker's chi-square test of the symmetry hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BowkerResult {
    pub statistic: f64,
    pub dof: u64,
    pub p_value: f64,
}

pub fn bowker_statistic(t: &ContingencyTable) -> BowkerResult {
    let size = t.size();
    let mut statistic = 0.0;
    for i in 0..size {
        for j in (i + 1)..size {
            let (a, b) = (t.count(i, j), t.count(j, i));
            if a + b > 0 {
                let diff = a.abs_diff(b) as f64;
                statistic += diff * diff / (a + b) as f64;
            }
        }
    }
    let dof = (size * (size - 1) / 2) as u64;
    let p_value = chi_square_sf(dof, statistic).expect("dof >= 1 for a valid table");
    BowkerResult {
        statistic,
        dof,
        p_value,
    }
}

fn check_departure_inputs(p: &ProbabilityTable, lambda: f64) -> Result<()> {
    check_lambda(lambda)?;
    if p.off_diagonal_mass() <= 0.0 {
        return Err(Error::DegenerateTable);
    }
    Ok(())
}

fn departure_unchecked(p: &ProbabilityTable, lambda: f64, i: usize, j: usize) -> f64 {
    let (pij, pji) = (p.get(i, j), p.get(j, i));
    let pair = pij + pji;
    if pair == 0.0 || pij == pji {
        return 0.0;
    }
    let weight = 0.5 * pair / p.off_diagonal_mass();
    let (pc, qc) = (pij / pair, pji / pair);
    let bracket = if is_zero_lambda(lambda) {
        1.0 + (x_ln_x(pc) + x_ln_x(qc)) / LN_2
    } else {
        // 1 - p^(l+1) - q^(l+1) = -(p (p^l - 1) + q (q^l - 1)) because p + q = 1
        let entropy_term = -(x_pow_m1(pc, lambda) + x_pow_m1(qc, lambda));
        1.0 - lambda.exp2() * entropy_term / (lambda * LN_2).exp_m1()
    };
    weight * bracket.max(0.0)
}

/// Departure from symmetry carried by cell `(i, j)`.
///
/// Returns 0 when `p_ij = p_ji`, including the case where both are zero.
pub fn cell_departure(p: &ProbabilityTable, lambda: f64, i: usize, j: usize) -> Result<f64> {
    if i == j {
        return Err(Error::DiagonalCell(i));
    }
    check_departure_inputs(p, lambda)?;
    Ok(departure_unchecked(p, lambda, i, j))
}

/// The measure together with its cell decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymmetryProfile {
    pub lambda: f64,
    pub delta: f64,
    pub phi_total: f64,
    /// `phi_ij` for every cell, zero on the diagonal.
    pub phi_cells: DMatrix<f64>,
    /// Off-diagonal pairs `(i, j)`, `i < j`, with `p_ij = p_ji = 0`.
    pub zero_pair_cells: Vec<(usize, usize)>,
}

impl AsymmetryProfile {
    pub fn is_fully_symmetric(&self) -> bool {
        self.phi_total == 0.0
    }
}

/// `I(lambda)` between `p*` and its symmetrized version, or the KL
/// divergence when `lambda` is zero.
fn divergence_to_symmetry(p: &ProbabilityTable, lambda: f64) -> f64 {
    let size = p.size();
    let delta = p.off_diagonal_mass();
    let mut sum = 0.0;
    for i in 0..size {
        for j in 0..size {
            if i == j {
                continue;
            }
            let (pij, pji) = (p.get(i, j), p.get(j, i));
            if pij == 0.0 {
                continue;
            }
            let star = pij / delta;
            // p*_ij / p^s_ij without the delta round trip
            let ratio = 2.0 * pij / (pij + pji);
            sum += if is_zero_lambda(lambda) {
                star * ratio.ln()
            } else {
                star * (lambda * ratio.ln()).exp_m1()
            };
        }
    }
    if is_zero_lambda(lambda) {
        sum
    } else {
        sum / (lambda * (lambda + 1.0))
    }
}

/// Computes the measure by both of its algebraic forms and checks that they
/// agree before returning the cell profile.
pub fn asymmetry_measure(p: &ProbabilityTable, lambda: f64) -> Result<AsymmetryProfile> {
    check_departure_inputs(p, lambda)?;
    let size = p.size();
    let mut phi_cells = DMatrix::zeros(size, size);
    let mut zero_pair_cells = Vec::new();
    for i in 0..size {
        for j in (i + 1)..size {
            if p.get(i, j) + p.get(j, i) == 0.0 {
                zero_pair_cells.push((i, j));
                continue;
            }
            let v = departure_unchecked(p, lambda, i, j);
            phi_cells[(i, j)] = v;
            phi_cells[(j, i)] = departure_unchecked(p, lambda, j, i);
        }
    }
    let phi_total: f64 = phi_cells.iter().sum();

    let phi_from_divergence = calibration_constant(lambda) * divergence_to_symmetry(p, lambda);
    if (phi_from_divergence - phi_total).abs() > DUAL_FORM_TOLERANCE {
        return Err(Error::Numerical(format!(
            "measure forms disagree at lambda = {lambda}: {phi_from_divergence} vs {phi_total}"
        )));
    }

    Ok(AsymmetryProfile {
        lambda,
        delta: p.off_diagonal_mass(),
        phi_total,
        phi_cells,
        zero_pair_cells,
    })
}

/// The power-divergence goodness-of-fit statistic of the symmetry model,
/// `2 n delta I(lambda)`, i.e. `2 / (lambda (lambda + 1)) * sum n_ij [(n_ij / m_ij)^lambda - 1]`
/// with `m_ij = (n_ij + n_ji) / 2`. At `lambda = 1` it equals Bowker's statistic.
pub fn power_divergence_statistic(t: &ContingencyTable, lambda: f64) -> Result<f64> {
    let p = t.probabilities();
    check_departure_inputs(&p, lambda)?;
    let n = t.total() as f64;
    let delta = p.off_diagonal_mass();
    let statistic = 2.0 * n * delta * divergence_to_symmetry(&p, lambda);

    let profile = asymmetry_measure(&p, lambda)?;
    let via_measure = 2.0 * n * delta / calibration_constant(lambda) * profile.phi_total;
    if (statistic - via_measure).abs() > 1e-10 * statistic.abs().max(1.0) {
        return Err(Error::Numerical(format!(
            "power-divergence statistic {statistic} disagrees with measure identity {via_measure}"
        )));
    }
    Ok(statistic)
}
