use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Ridge weight relative to the mean variance, `trace / m`.
pub const REGULARIZATION_EPSILON: f64 = 1e-10;
const MAX_CONDITION: f64 = 1e12;
const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// A symmetric positive (semi)definite `m x m` matrix with its Cholesky factor.
///
/// Near-singular inputs are repaired with a small ridge at construction. The
/// factor is absent only when even the ridge cannot make the matrix positive
/// definite (e.g. the all-zero matrix); norms against such a matrix fail.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    entries: DMatrix<f64>,
    factor: Option<DMatrix<f64>>,
    regularization_applied: bool,
    condition_estimate: f64,
}

impl CovarianceMatrix {
    /// Validates symmetry, regularizes if needed, and factorizes.
    pub fn from_matrix(entries: DMatrix<f64>) -> Result<Self> {
        let m = entries.nrows();
        if m == 0 || entries.ncols() != m {
            return Err(Error::Shape(format!(
                "covariance must be square and non-empty, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("covariance has non-finite entries".into()));
        }
        let scale = entries.amax().max(f64::MIN_POSITIVE);
        for i in 0..m {
            for j in 0..i {
                if (entries[(i, j)] - entries[(j, i)]).abs() > SYMMETRY_TOLERANCE * scale {
                    return Err(Error::InvalidParameter(format!(
                        "covariance is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let mut entries = symmetrize(entries);
        let (lo, hi) = eigen_range(&entries);
        let mut regularization_applied = false;
        let mut condition_estimate = condition(lo, hi);
        if lo <= 0.0 || condition_estimate > MAX_CONDITION {
            let ridge = REGULARIZATION_EPSILON * entries.trace() / m as f64;
            if ridge > 0.0 {
                for i in 0..m {
                    entries[(i, i)] += ridge;
                }
                regularization_applied = true;
                let (lo, hi) = eigen_range(&entries);
                condition_estimate = condition(lo, hi);
            }
        }
        let factor = cholesky_lower(&entries).ok();
        Ok(Self {
            entries,
            factor,
            regularization_applied,
            condition_estimate,
        })
    }

    pub fn identity(m: usize) -> Self {
        Self::diagonal(&vec![1.0; m]).expect("identity is positive definite")
    }

    /// Diagonal matrix of channel variances.
    pub fn diagonal(variances: &[f64]) -> Result<Self> {
        Self::from_matrix(DMatrix::from_diagonal(&DVector::from_column_slice(
            variances,
        )))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn regularization_applied(&self) -> bool {
        self.regularization_applied
    }

    /// Ratio of extreme eigenvalues; infinite when the matrix is singular.
    pub fn condition_estimate(&self) -> f64 {
        self.condition_estimate
    }

    pub fn is_positive_definite(&self) -> bool {
        self.factor.is_some()
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace()
    }

    /// Lower-triangular `L` with `L L^T = Sigma`.
    pub fn cholesky_factor(&self) -> Result<&DMatrix<f64>> {
        self.factor.as_ref().ok_or_else(|| {
            Error::NotPositiveDefinite("covariance is singular even after regularization".into())
        })
    }

    /// `L^{-1} z`, whose Euclidean norm is the Mahalanobis norm of `z`.
    pub fn whiten(&self, z: &[f64]) -> Result<Vec<f64>> {
        let l = self.cholesky_factor()?;
        if z.len() != l.nrows() {
            return Err(Error::DimensionMismatch {
                expected: l.nrows(),
                found: z.len(),
            });
        }
        let mut y = z.to_vec();
        forward_substitute(l, &mut y);
        Ok(y)
    }

    /// Symmetric inverse square root `Q diag(1/sqrt(lambda)) Q^T`.
    pub fn inverse_sqrt(&self) -> Result<DMatrix<f64>> {
        let (values, vectors) = symmetric_eigen(&self.entries);
        if values.iter().any(|&l| l <= 0.0) {
            return Err(Error::NotPositiveDefinite("non-positive eigenvalue".into()));
        }
        let d = DMatrix::from_diagonal(&DVector::from_iterator(
            values.len(),
            values.iter().map(|l| l.sqrt().recip()),
        ));
        Ok(&vectors * d * vectors.transpose())
    }
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

fn eigen_range(m: &DMatrix<f64>) -> (f64, f64) {
    let eig = SymmetricEigen::new(m.clone());
    let lo = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let hi = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

fn condition(lo: f64, hi: f64) -> f64 {
    if lo <= 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Solves `L y = b` in place for lower-triangular `L`.
fn forward_substitute(l: &DMatrix<f64>, b: &mut [f64]) {
    let m = l.nrows();
    for i in 0..m {
        let mut acc = b[i];
        for k in 0..i {
            acc -= l[(i, k)] * b[k];
        }
        b[i] = acc / l[(i, i)];
    }
}

/// Cholesky–Banachiewicz factorization. Fails on non-positive pivots.
pub fn cholesky_lower(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let m = a.nrows();
    let mut l = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        for j in 0..=i {
            let mut sum = a[(i, j)];
            for k in 0..j {
                sum -= l[(i, k)] * l[(j, k)];
            }
            if i == j {
                if sum.is_nan() || sum <= 0.0 {
                    return Err(Error::NotPositiveDefinite(format!("pivot {i} is {sum:e}")));
                }
                l[(i, i)] = sum.sqrt();
            } else {
                l[(i, j)] = sum / l[(j, j)];
            }
        }
    }
    Ok(l)
}

/// `sqrt(z^T Sigma^{-1} z)` via a triangular solve against the cached factor.
pub fn mahalanobis_norm(z: &[f64], sigma: &CovarianceMatrix) -> Result<f64> {
    let y = sigma.whiten(z)?;
    Ok(y.iter().map(|v| v * v).sum::<f64>().sqrt())
}

/// Unbiased sample covariance of observation rows, without regularization.
pub fn sample_covariance(rows: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (n, m) = rows.shape();
    if n < 2 {
        return Err(Error::Shape(format!(
            "covariance needs at least 2 observations, got {n}"
        )));
    }
    if rows.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite observation".into()));
    }
    let mean = rows.row_mean();
    let mut centred = rows.clone();
    for c in 0..m {
        let mu = mean[c];
        centred.column_mut(c).add_scalar_mut(-mu);
    }
    Ok(centred.tr_mul(&centred) / (n - 1) as f64)
}

/// Sample covariance of observation rows (an `n x m` matrix), regularized
/// when near-singular.
pub fn covariance_of(rows: &DMatrix<f64>) -> Result<CovarianceMatrix> {
    CovarianceMatrix::from_matrix(sample_covariance(rows)?)
}

/// Sample covariance of a list of `m`-vectors.
pub fn covariance(rows: &[Vec<f64>]) -> Result<CovarianceMatrix> {
    let m = rows.first().map_or(0, Vec::len);
    if let Some(r) = rows.iter().find(|r| r.len() != m) {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: r.len(),
        });
    }
    covariance_of(&DMatrix::from_fn(rows.len(), m, |i, j| rows[i][j]))
}

/// Eigenvalues in non-increasing order with matching orthonormal eigenvector
/// columns. Each eigenvector's largest-magnitude entry is made positive so the
/// output is reproducible.
pub fn symmetric_eigen(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(a.clone());
    let m = a.nrows();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(m, m);
    for (dst, &src) in order.iter().enumerate() {
        let col = eig.eigenvectors.column(src);
        let pivot = col
            .iter()
            .copied()
            .fold(0.0f64, |acc, v| if v.abs() > acc.abs() { v } else { acc });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        vectors.set_column(dst, &(col * sign));
    }
    (values, vectors)
}
