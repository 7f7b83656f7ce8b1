//! Dense symmetric eigensolver and the paired SVD of skew-symmetric matrices.
//!
//! A real skew-symmetric `S` has singular values in equal pairs and admits
//! the factorization `S = A D J A^T` with `B = A J^T`, where `J` is block
//! diagonal with 2×2 blocks `[[0, 1], [-1, 0]]`. For one pair `(a1, a2)` with
//! value `mu` this means `S a1 = -mu a2` and `S a2 = mu a1`, so once `a1` is
//! known the partner is `a2 = -S a1 / mu`. The SVD is therefore built from
//! the invariant subspaces of `S^T S` (found by cyclic Jacobi) one plane at
//! a time, which makes the pairing and `B = A J^T` hold by construction.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Singular values below this fraction of the largest are structural zeros.
pub const STRUCTURAL_ZERO: f64 = 1e-10;

/// Paired singular values may differ by at most this fraction of the largest.
pub const PAIRING_TOLERANCE: f64 = 1e-8;

/// Relative tolerance under which two in-plane row norms count as tied when
/// picking the anchor category for orientation.
const ANCHOR_TIE: f64 = 1e-9;

const MAX_SWEEPS: usize = 100;

/// Eigenpairs of a symmetric matrix, sorted by descending eigenvalue.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: DVector<f64>,
    /// Eigenvectors stored as columns, in the order of `values`.
    pub vectors: DMatrix<f64>,
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Only the
/// symmetric part `(M + M^T) / 2` is used.
pub fn symmetric_eigen(matrix: &DMatrix<f64>) -> Result<SymmetricEigen> {
    let n = matrix.nrows();
    if matrix.ncols() != n {
        return Err(Error::NonSquare {
            row: 0,
            len: matrix.ncols(),
            expected: n,
        });
    }
    if matrix.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("matrix has non-finite entries".into()));
    }
    let mut a = (matrix + matrix.transpose()) * 0.5;
    let mut v = DMatrix::<f64>::identity(n, n);
    let norm = a.norm();

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| a[(p, q)] * a[(p, q)])
            .sum::<f64>()
            .sqrt();
        if off <= f64::EPSILON * 1e-2 * norm || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let tau = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = if tau.abs() > 1e150 {
                    0.5 / tau
                } else {
                    tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt())
                };
                let t = if tau == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]).then(i.cmp(&j)));
    let values = DVector::from_iterator(n, order.iter().map(|&i| a[(i, i)]));
    let vectors = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(SymmetricEigen { values, vectors })
}

/// SVD `S = A diag(mu) B^T` of a skew-symmetric matrix with `B = A J^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewSvd {
    /// Left singular vectors, R×M.
    pub left: DMatrix<f64>,
    /// Right singular vectors, R×M.
    pub right: DMatrix<f64>,
    /// Singular values in non-increasing, exactly equal pairs.
    pub singular_values: DVector<f64>,
    /// The M×M block rotation `J`.
    pub rotation: DMatrix<f64>,
}

impl SkewSvd {
    pub fn dims(&self) -> usize {
        self.singular_values.len()
    }

    pub fn largest(&self) -> f64 {
        self.singular_values.get(0).copied().unwrap_or(0.0)
    }

    /// `A diag(mu) B^T`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.left * DMatrix::from_diagonal(&self.singular_values) * self.right.transpose()
    }
}

/// The M×M block-diagonal matrix with 2×2 blocks `[[0, 1], [-1, 0]]`.
pub fn block_rotation(m: usize) -> DMatrix<f64> {
    assert!(m % 2 == 0, "block rotation needs an even order");
    let mut j = DMatrix::zeros(m, m);
    for k in (0..m).step_by(2) {
        j[(k, k + 1)] = 1.0;
        j[(k + 1, k)] = -1.0;
    }
    j
}

/// Number of retained dimensions for an R×R skew matrix.
pub fn retained_dims(size: usize) -> usize {
    if size % 2 == 0 {
        size
    } else {
        size - 1
    }
}

fn orthogonalize(v: &DVector<f64>, basis: &[DVector<f64>]) -> DVector<f64> {
    let mut out = v.clone();
    for _ in 0..2 {
        for b in basis {
            let proj = b.dot(&out);
            out.axpy(-proj, b, 1.0);
        }
    }
    out
}

/// Picks the next unused eigenvector, orthogonalized against `basis`:
/// the first one (in eigenvalue order) with a substantial residual, or the
/// largest residual when none qualifies.
fn next_direction(
    eigen: &SymmetricEigen,
    used: &mut [bool],
    basis: &[DVector<f64>],
) -> Option<DVector<f64>> {
    let mut best: Option<(usize, DVector<f64>, f64)> = None;
    for k in 0..used.len() {
        if used[k] {
            continue;
        }
        let residual = orthogonalize(&eigen.vectors.column(k).into_owned(), basis);
        let norm = residual.norm();
        if norm > 0.5 {
            best = Some((k, residual, norm));
            break;
        }
        if best.as_ref().map_or(true, |(_, _, b)| norm > *b) {
            best = Some((k, residual, norm));
        }
    }
    let (k, residual, norm) = best?;
    used[k] = true;
    if norm < 1e-8 {
        return None;
    }
    Some(residual / norm)
}

/// Rotates a plane so that its anchor category (largest in-plane norm, lowest
/// index on ties) lies on the positive first axis.
fn canonicalize_plane(a1: &mut DVector<f64>, a2: &mut DVector<f64>) {
    let norms: Vec<f64> = a1.iter().zip(a2.iter()).map(|(x, y)| x.hypot(*y)).collect();
    let max = norms.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let anchor = norms
        .iter()
        .position(|&r| r >= max * (1.0 - ANCHOR_TIE))
        .expect("maximum exists");
    let r = norms[anchor];
    let (c, s) = (a1[anchor] / r, a2[anchor] / r);
    let rotated1 = &*a1 * c + &*a2 * s;
    let rotated2 = &*a2 * c - &*a1 * s;
    *a1 = rotated1;
    *a2 = rotated2;
    a1[anchor] = r;
    a2[anchor] = 0.0;
}

/// Paired SVD of a skew-symmetric matrix.
///
/// Returns `M = R` (even R) or `R - 1` (odd R) dimensions. Singular values
/// under [`STRUCTURAL_ZERO`] times the largest are set to exactly zero; their
/// vectors complete the orthonormal basis.
pub fn skew_svd(s: &DMatrix<f64>) -> Result<SkewSvd> {
    let size = s.nrows();
    if s.ncols() != size {
        return Err(Error::NonSquare {
            row: 0,
            len: s.ncols(),
            expected: size,
        });
    }
    let scale = s.amax();
    let skew_err = (s + s.transpose()).amax();
    if skew_err > 1e-14 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Numerical(format!(
            "matrix is not skew-symmetric (max |S + S^T| = {skew_err})"
        )));
    }
    let m = retained_dims(size);
    let rotation = block_rotation(m);

    if scale == 0.0 {
        let left = DMatrix::<f64>::identity(size, m);
        let right = &left * rotation.transpose();
        return Ok(SkewSvd {
            left,
            right,
            singular_values: DVector::zeros(m),
            rotation,
        });
    }

    let gram = s.transpose() * s;
    let eigen = symmetric_eigen(&gram)?;
    let mut used = vec![false; size];
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(size);
    let mut planes: Vec<(f64, DVector<f64>, DVector<f64>)> = Vec::new();
    let mut largest: Option<f64> = None;

    while basis.len() + 2 <= m {
        let Some(a1) = next_direction(&eigen, &mut used, &basis) else {
            break;
        };
        let image = s * &a1;
        let mu = image.norm();
        let top = *largest.get_or_insert(mu);
        if mu <= STRUCTURAL_ZERO * top {
            basis.push(a1);
            break;
        }
        let mut a2 = orthogonalize(&(-&image / mu), &[basis.as_slice(), &[a1.clone()]].concat());
        a2 /= a2.norm();
        let mu2 = (s * &a2).norm();
        if (mu - mu2).abs() > PAIRING_TOLERANCE * top {
            return Err(Error::Numerical(format!(
                "singular value pair failed to match: {mu} vs {mu2}"
            )));
        }
        basis.push(a1.clone());
        basis.push(a2.clone());
        planes.push((0.5 * (mu + mu2), a1, a2));
    }

    // zero planes: complete the basis with whatever remains
    let mut spare: Vec<DVector<f64>> = basis.split_off(2 * planes.len());
    while basis.len() + spare.len() < size {
        let all: Vec<DVector<f64>> = basis.iter().chain(spare.iter()).cloned().collect();
        match next_direction(&eigen, &mut used, &all) {
            Some(v) => spare.push(v),
            None => {
                if used.iter().all(|u| *u) {
                    break;
                }
            }
        }
    }
    if basis.len() + spare.len() < m {
        return Err(Error::Numerical("failed to complete orthonormal basis".into()));
    }
    let mut spare = spare.into_iter();
    while planes.len() * 2 < m {
        let a1 = spare.next().expect("basis completed");
        let a2 = spare.next().expect("basis completed");
        planes.push((0.0, a1, a2));
    }

    planes.sort_by(|x, y| y.0.total_cmp(&x.0));
    let mut left = DMatrix::zeros(size, m);
    let mut singular_values = DVector::zeros(m);
    for (k, (mu, mut a1, mut a2)) in planes.into_iter().enumerate() {
        canonicalize_plane(&mut a1, &mut a2);
        left.set_column(2 * k, &a1);
        left.set_column(2 * k + 1, &a2);
        singular_values[2 * k] = mu;
        singular_values[2 * k + 1] = mu;
    }
    let right = &left * rotation.transpose();
    let svd = SkewSvd {
        left,
        right,
        singular_values,
        rotation,
    };

    let residual = (svd.reconstruct() - s).amax();
    if residual > 1e-8 * scale.max(1.0) {
        return Err(Error::Numerical(format!(
            "skew SVD reconstruction residual {residual} too large"
        )));
    }
    Ok(svd)
}
