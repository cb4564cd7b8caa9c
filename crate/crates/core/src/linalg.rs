//! Small dense linear-algebra helpers shared by the geometry and inference code.
//!
//! Everything here works on `nalgebra` dynamic matrices. Hermitian routines are
//! generic over `ComplexField<RealField = f64>` so the same code serves real
//! symmetric and complex Hermitian inputs.

use nalgebra::{ComplexField, DMatrix, DVector};

use crate::error::{Error, Result};

/// Smallest eigenvalue accepted for a matrix to count as positive definite.
pub const PD_TOL: f64 = 1e-12;

/// Eigen-decomposition of a Hermitian matrix with eigenvalues sorted in
/// descending order. Column `j` of `vectors` belongs to `values[j]`.
#[derive(Clone, Debug)]
pub struct SortedEigen<T: ComplexField<RealField = f64>> {
    pub values: Vec<f64>,
    pub vectors: DMatrix<T>,
}

pub fn hermitian_part<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> DMatrix<T> {
    (m + m.adjoint()).map(|x| x * T::from_real(0.5))
}

pub fn eigen_desc<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> SortedEigen<T> {
    let eig = hermitian_part(m).symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])].clone());
    SortedEigen { values, vectors }
}

/// Rebuilds `V diag(f(λ)) V*` from a sorted decomposition.
pub fn spectral_map<T: ComplexField<RealField = f64>>(
    eig: &SortedEigen<T>,
    f: impl Fn(f64) -> f64,
) -> DMatrix<T> {
    let n = eig.values.len();
    let mut out = DMatrix::<T>::zeros(n, n);
    for (j, &lambda) in eig.values.iter().enumerate() {
        let col = eig.vectors.column(j);
        let s = T::from_real(f(lambda));
        out += (&col * col.adjoint()) * s;
    }
    out
}

/// Matrix logarithm of a symmetric positive-definite matrix.
pub fn spd_log(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = eigen_desc(a);
    let min = *eig.values.last().unwrap_or(&0.0);
    if !(min >= PD_TOL) {
        return Err(Error::Degenerate(format!(
            "matrix is not positive definite (smallest eigenvalue {min:e})"
        )));
    }
    Ok(spectral_map(&eig, f64::ln))
}

/// Matrix exponential of a symmetric matrix.
pub fn sym_exp(a: &DMatrix<f64>) -> DMatrix<f64> {
    spectral_map(&eigen_desc(a), f64::exp)
}

pub fn is_positive_definite(a: &DMatrix<f64>) -> bool {
    eigen_desc(a).values.last().is_some_and(|&v| v >= PD_TOL)
}

/// Orthonormal basis (as columns) of the orthogonal complement of `v` in
/// `T^n`, computed by Householder QR of `[v | I]`.
pub fn orthonormal_complement<T: ComplexField<RealField = f64>>(v: &DVector<T>) -> DMatrix<T> {
    let n = v.len();
    let mut a = DMatrix::<T>::zeros(n, n + 1);
    a.set_column(0, v);
    for i in 0..n {
        a[(i, i + 1)] = T::one();
    }
    let q = a.qr().q();
    q.columns(1, n - 1).into_owned()
}

/// Orthonormal basis of the real symmetric `p x p` matrices under the
/// Frobenius inner product: `e_a e_a'` and `(e_a e_b' + e_b e_a')/sqrt(2)`.
pub fn symmetric_basis(p: usize) -> Vec<DMatrix<f64>> {
    let mut out = Vec::with_capacity(p * (p + 1) / 2);
    for a in 0..p {
        for b in a..p {
            let mut m = DMatrix::zeros(p, p);
            if a == b {
                m[(a, a)] = 1.0;
            } else {
                m[(a, b)] = std::f64::consts::FRAC_1_SQRT_2;
                m[(b, a)] = std::f64::consts::FRAC_1_SQRT_2;
            }
            out.push(m);
        }
    }
    out
}

/// The `k x (k-1)` Helmert sub-matrix: column `j` (1-based) is
/// `(a, ..., a, -j a, 0, ..., 0)'` with `a = (j(j+1))^{-1/2}`.
pub fn helmert(k: usize) -> DMatrix<f64> {
    let mut h = DMatrix::zeros(k, k.saturating_sub(1));
    for j in 1..k {
        let a = 1.0 / ((j * (j + 1)) as f64).sqrt();
        for i in 0..j {
            h[(i, j - 1)] = a;
        }
        h[(j, j - 1)] = -(j as f64) * a;
    }
    h
}

/// Inverts a symmetric positive semi-definite matrix, optionally after adding
/// `ridge * I`. Fails with [`Error::SingularCovariance`] when the smallest
/// eigenvalue is below `1e-12` times the largest.
pub fn inverse_psd(m: &DMatrix<f64>, ridge: Option<f64>) -> Result<DMatrix<f64>> {
    let mut a = hermitian_part(m);
    if let Some(eps) = ridge {
        for i in 0..a.nrows() {
            a[(i, i)] += eps;
        }
    }
    let eig = eigen_desc(&a);
    let max = eig.values.first().copied().unwrap_or(0.0);
    let min = eig.values.last().copied().unwrap_or(0.0);
    if !(max > 0.0) || min < 1e-12 * max {
        let ratio = if max > 0.0 { min / max } else { 0.0 };
        return Err(Error::SingularCovariance { ratio });
    }
    Ok(spectral_map(&eig, |x| 1.0 / x))
}

/// Weighted covariance (divisor = total weight) of row-vector observations.
pub fn weighted_covariance(scores: &[DVector<f64>], weights: &[f64]) -> DMatrix<f64> {
    let d = scores.first().map_or(0, |s| s.len());
    let mut mean = DVector::zeros(d);
    for (s, &w) in scores.iter().zip(weights) {
        mean.axpy(w, s, 1.0);
    }
    let mut cov = DMatrix::zeros(d, d);
    for (s, &w) in scores.iter().zip(weights) {
        let c = s - &mean;
        cov += (&c * c.transpose()) * w;
    }
    cov
}

pub fn quadratic_form(v: &DVector<f64>, m: &DMatrix<f64>) -> f64 {
    (v.transpose() * m * v)[(0, 0)]
}

/// Serializes a matrix as a list of rows.
pub fn serialize_rows<S: serde::Serializer>(m: &DMatrix<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(m.nrows()))?;
    for row in m.row_iter() {
        seq.serialize_element(&row.iter().copied().collect::<Vec<f64>>())?;
    }
    seq.end()
}
