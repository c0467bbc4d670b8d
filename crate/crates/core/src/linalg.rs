//! Dense complex linear-algebra helpers shared by the matrix-valued modules.

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen, SVD};
use num_complex::Complex64;
use thiserror::Error;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("Schur decomposition did not converge")]
    NoConvergence,
    #[error("eigenvector matrix is singular")]
    Defective,
    #[error("matrix is singular")]
    Singular,
}

/// Diagonalization `M = V diag(λ) V⁻¹` from a complex Schur form.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<Complex64>,
    pub vectors: CMatrix,
    pub inverse: CMatrix,
}

impl Eigen {
    pub fn new(m: &CMatrix) -> Result<Self, LinalgError> {
        let n = m.nrows();
        let schur = Schur::try_new(m.clone(), 1e-15, 10_000).ok_or(LinalgError::NoConvergence)?;
        let (q, t) = schur.unpack();
        let scale = t.iter().map(|x| x.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let mut w = CMatrix::zeros(n, n);
        for k in 0..n {
            let lam = t[(k, k)];
            w[(k, k)] = Complex64::new(1.0, 0.0);
            for i in (0..k).rev() {
                let mut s = Complex64::new(0.0, 0.0);
                for l in i + 1..=k {
                    s += t[(i, l)] * w[(l, k)];
                }
                let mut d = t[(i, i)] - lam;
                if d.norm() < 1e-14 * scale {
                    d = Complex64::new(1e-14 * scale, 0.0);
                }
                w[(i, k)] = -s / d;
            }
            let norm = w.column(k).norm();
            w.column_mut(k).unscale_mut(norm);
        }
        let vectors = &q * &w;
        let inverse = vectors.clone().try_inverse().ok_or(LinalgError::Defective)?;
        let values = (0..n).map(|k| t[(k, k)]).collect();
        Ok(Self {
            values,
            vectors,
            inverse,
        })
    }

    /// `V diag(f(λ)) V⁻¹`.
    pub fn apply(&self, f: impl Fn(Complex64) -> Complex64) -> CMatrix {
        let mut scaled = self.vectors.clone();
        for (k, lam) in self.values.iter().enumerate() {
            let fk = f(*lam);
            for x in scaled.column_mut(k).iter_mut() {
                *x *= fk;
            }
        }
        scaled * &self.inverse
    }

    /// `V diag(f(λ)) V⁻¹ x` without forming the full matrix.
    pub fn apply_to(&self, f: impl Fn(Complex64) -> Complex64, x: &CVector) -> CVector {
        let mut c = &self.inverse * x;
        for (k, lam) in self.values.iter().enumerate() {
            c[k] *= f(*lam);
        }
        &self.vectors * c
    }

    pub fn spectral_radius(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Largest singular value.
pub fn operator_norm(m: &CMatrix) -> f64 {
    SVD::new(m.clone(), false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

/// Ratio of extreme singular values.
pub fn condition_number(m: &CMatrix) -> f64 {
    let sv = SVD::new(m.clone(), false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// `f(H)` for Hermitian `H` through its eigen-decomposition.
pub fn hermitian_function(h: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let sym = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);
    let mut scaled = eig.eigenvectors.clone();
    for (k, lam) in eig.eigenvalues.iter().enumerate() {
        let fk = f(*lam);
        for x in scaled.column_mut(k).iter_mut() {
            *x *= fk;
        }
    }
    scaled * eig.eigenvectors.adjoint()
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(h: &CMatrix) -> Vec<f64> {
    let sym = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let mut v: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().cloned().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Solves `A X = B`, reporting exact singularity.
pub fn solve(a: &CMatrix, b: &CMatrix) -> Result<CMatrix, LinalgError> {
    a.clone().lu().solve(b).ok_or(LinalgError::Singular)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eigen_reconstructs_matrix() {
        let m = CMatrix::from_row_slice(
            3,
            3,
            &[c(1.0, 0.5), c(2.0, 0.0), c(0.0, 1.0), c(0.3, 0.0), c(-1.0, 0.0), c(0.5, 0.5), c(0.0, 0.0), c(1.0, -1.0), c(2.0, 0.0)],
        );
        let e = Eigen::new(&m).unwrap();
        let back = e.apply(|z| z);
        assert!((back - &m).norm() < 1e-12);
        let sq = e.apply(|z| z * z);
        assert!((sq - &m * &m).norm() < 1e-11);
    }

    #[test]
    fn hermitian_square_root() {
        let a = CMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(3.0, 0.0)]);
        let r = hermitian_function(&a, f64::sqrt);
        assert!((&r * &r - &a).norm() < 1e-13);
    }
}
