//! Tomita–Takesaki data of finite-dimensional standard subspaces.
//!
//! A real subspace `H` is given by `m` complex column vectors in `ℂᴺ`. It is
//! standard in its complex span `K = H + iH` when the columns are linearly
//! independent over `ℂ`. All modular operators act on `K` and are stored in
//! coefficient coordinates `v = Σ cⱼ bⱼ`, where the Tomita operator is plain
//! conjugation `c ↦ c̄` and the metric is the Gram matrix `G = B*B`.
//!
//! Two independent constructions are provided. [`tomita`] splits
//! `G = A + iB`, factors `A = LLᵀ` and diagonalizes the antisymmetric
//! `L⁻¹BL⁻ᵀ`; [`tomita_real_form`] polar-decomposes the real `2m × 2m` form of
//! `S` directly.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::linalg::{self, CMatrix, CVector};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModularError {
    #[error("subspace is not standard (condition number {0:e})")]
    NotStandard(f64),
    #[error("real Gram matrix is ill-conditioned")]
    IllConditionedGram,
    #[error("H₁ is not contained in H (residual {0:e})")]
    NotIncluded(f64),
    #[error("dimension mismatch")]
    DimensionMismatch,
    #[error("malformed basis: {0}")]
    Parse(String),
}

/// Relative pivot below which a real Gram matrix counts as singular.
pub const PIVOT_TOL: f64 = 1e-12;

/// Real subspace spanned by the columns of `basis`.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardSubspace {
    basis: CMatrix,
}

impl StandardSubspace {
    pub fn new(basis: CMatrix) -> Result<Self, ModularError> {
        let (ok, cond) = is_standard(&basis);
        if !ok {
            return Err(ModularError::NotStandard(cond));
        }
        Ok(Self { basis })
    }

    /// `ℝⁿ ⊂ ℂⁿ`.
    pub fn real_form(n: usize) -> Self {
        Self {
            basis: CMatrix::identity(n, n),
        }
    }

    /// Gaussian random basis of `ℂⁿ`; standard with probability one.
    pub fn random(n: usize, rng: &mut impl Rng) -> Self {
        loop {
            let basis = CMatrix::from_fn(n, n, |_, _| {
                Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            });
            if let Ok(h) = Self::new(basis) {
                return h;
            }
        }
    }

    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn gram(&self) -> CMatrix {
        self.basis.adjoint() * &self.basis
    }

    /// Coefficients of `v ∈ K` in the basis (least squares off `K`).
    pub fn coefficients(&self, v: &CVector) -> CVector {
        let g = self.gram();
        let rhs = self.basis.adjoint() * v;
        g.lu().solve(&rhs).expect("Gram of a standard basis is invertible")
    }

    /// `‖v − P_H v‖ / ‖v‖` with `P_H` orthogonal in `Re⟨·,·⟩`.
    pub fn membership_residual(&self, v: &CVector) -> Result<f64, ModularError> {
        let norm = v.norm();
        if norm == 0.0 {
            return Ok(0.0);
        }
        let a = self.gram().map(|z| z.re);
        let r = DVector::from_iterator(self.dim(), (self.basis.adjoint() * v).iter().map(|z| z.re));
        let coef = re_gram_solve(&a, &r)?;
        let proj = &self.basis * coef.map(|x| Complex64::new(x, 0.0));
        Ok((v - proj).norm() / norm)
    }

    /// `max_j` membership residual of `V bⱼ`.
    pub fn maps_into_residual(&self, v: &CMatrix) -> Result<f64, ModularError> {
        if v.ncols() != self.ambient_dim() {
            return Err(ModularError::DimensionMismatch);
        }
        let mut worst: f64 = 0.0;
        for j in 0..self.dim() {
            let image = v * self.basis.column(j);
            worst = worst.max(self.membership_residual(&image)?);
        }
        Ok(worst)
    }

    /// Symplectic complement basis `H′ = (iH)^{⊥_Re}` for square bases.
    pub fn symplectic_complement(&self) -> Result<CMatrix, ModularError> {
        if self.dim() != self.ambient_dim() {
            return Err(ModularError::DimensionMismatch);
        }
        // Im⟨x, bⱼ⟩ = 0 for all j  ⇔  B* x ∈ ℝⁿ, so x = B⁻* r with r real
        self.basis
            .adjoint()
            .try_inverse()
            .ok_or(ModularError::NotStandard(f64::INFINITY))
    }

    /// Rows are basis vectors with interleaved `re,im` columns.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for j in 0..self.dim() {
            let row: Vec<String> = self
                .basis
                .column(j)
                .iter()
                .flat_map(|z| [format!("{:.17e}", z.re), format!("{:.17e}", z.im)])
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, ModularError> {
        let mut rows: Vec<Vec<Complex64>> = Vec::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let nums = line
                .split(',')
                .map(|s| s.trim().parse::<f64>().map_err(|e| ModularError::Parse(e.to_string())))
                .collect::<Result<Vec<_>, _>>()?;
            if nums.len() % 2 != 0 {
                return Err(ModularError::Parse("odd column count".into()));
            }
            rows.push(nums.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect());
        }
        let n = rows.first().map_or(0, Vec::len);
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(ModularError::Parse("ragged rows".into()));
        }
        let basis = CMatrix::from_fn(n, rows.len(), |i, j| rows[j][i]);
        Self::new(basis)
    }
}

fn real_embedding(basis: &CMatrix) -> DMatrix<f64> {
    let (n, m) = basis.shape();
    DMatrix::from_fn(2 * n, 2 * m, |i, j| {
        let z = basis[(i % n, j % m)];
        match (i < n, j < m) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Rank test of the real `2N × 2m` matrix of `{bⱼ, i bⱼ}`; returns the verdict
/// and the ratio of extreme singular values.
pub fn is_standard(basis: &CMatrix) -> (bool, f64) {
    if basis.ncols() == 0 || basis.ncols() > basis.nrows() {
        return (false, f64::INFINITY);
    }
    let sv = real_embedding(basis).singular_values();
    let max = sv.max();
    let min = sv.min();
    let cond = if min > 0.0 { max / min } else { f64::INFINITY };
    (min > 1e-12 * max, cond)
}

/// Solves the real Gram system `A x = r` by Cholesky, rejecting relative
/// pivots below [`PIVOT_TOL`].
pub fn re_gram_solve(a: &DMatrix<f64>, r: &DVector<f64>) -> Result<DVector<f64>, ModularError> {
    let scale = a.diagonal().max();
    let chol = a.clone().cholesky().ok_or(ModularError::IllConditionedGram)?;
    let l = chol.l();
    if scale <= 0.0 || (0..l.nrows()).any(|i| l[(i, i)] * l[(i, i)] < PIVOT_TOL * scale) {
        return Err(ModularError::IllConditionedGram);
    }
    Ok(chol.solve(r))
}

/// Modular data in coefficient coordinates.
///
/// `Δ^z = L⁻ᵀ W diag(λᵏ) W* Lᵀ` with `λ = (1−μ)/(1+μ)` and `μ` the spectrum
/// of `i L⁻¹ (Im G) L⁻ᵀ`; `J c = U c̄` with `U = Δ^{−1/2}` conjugated.
#[derive(Debug, Clone)]
pub struct ModularData {
    gram: CMatrix,
    /// `Lᵀ` and `L⁻ᵀ` lifted to complex matrices.
    lt: CMatrix,
    lt_inv: CMatrix,
    w: CMatrix,
    lambda: Vec<f64>,
}

/// Modular data of `H` from the Gram matrix.
pub fn tomita(h: &StandardSubspace) -> Result<ModularData, ModularError> {
    ModularData::from_gram(&h.gram())
}

impl ModularData {
    /// Modular data of the real span of a basis with Gram matrix `gram`.
    pub fn from_gram(gram: &CMatrix) -> Result<Self, ModularError> {
        let m = gram.nrows();
        let a = gram.map(|z| z.re);
        let b = gram.map(|z| z.im);
        let chol = a.clone().cholesky().ok_or(ModularError::IllConditionedGram)?;
        let l = chol.l();
        let scale = a.diagonal().max();
        if (0..m).any(|i| l[(i, i)] * l[(i, i)] < PIVOT_TOL * scale) {
            return Err(ModularError::IllConditionedGram);
        }
        let l_inv = l.clone().try_inverse().ok_or(ModularError::IllConditionedGram)?;
        let y = &l_inv * &b * l_inv.transpose();
        let iy = y.map(|v| Complex64::new(0.0, v));
        let iy = (&iy + iy.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(iy);
        let mut lambda = Vec::with_capacity(m);
        for &mu in eig.eigenvalues.iter() {
            if mu.abs() >= 1.0 - 1e-14 {
                return Err(ModularError::NotStandard(f64::INFINITY));
            }
            lambda.push((1.0 - mu) / (1.0 + mu));
        }
        let lift = |x: &DMatrix<f64>| x.map(|v| Complex64::new(v, 0.0));
        Ok(Self {
            gram: gram.clone(),
            lt: lift(&l.transpose()),
            lt_inv: lift(&l_inv.transpose()),
            w: eig.eigenvectors,
            lambda,
        })
    }

    pub fn dim(&self) -> usize {
        self.lambda.len()
    }

    pub fn gram(&self) -> &CMatrix {
        &self.gram
    }

    /// Eigenvalues of `Δ` in ascending order of `μ`.
    pub fn spectrum(&self) -> &[f64] {
        &self.lambda
    }

    /// `Δ^z` for complex `z`.
    pub fn delta_pow(&self, z: Complex64) -> CMatrix {
        let mut wd = self.w.clone();
        for (k, l) in self.lambda.iter().enumerate() {
            let f = (z * l.ln()).exp();
            for x in wd.column_mut(k).iter_mut() {
                *x *= f;
            }
        }
        &self.lt_inv * wd * self.w.adjoint() * &self.lt
    }

    pub fn delta(&self) -> CMatrix {
        self.delta_pow(Complex64::new(1.0, 0.0))
    }

    /// `Δ^{it}`, a real matrix in coefficient coordinates.
    pub fn delta_it(&self, t: f64) -> CMatrix {
        self.delta_pow(Complex64::new(0.0, t))
    }

    /// `U` with `J c = U c̄`.
    pub fn j_unitary(&self) -> CMatrix {
        self.delta_pow(Complex64::new(-0.5, 0.0)).map(|z| z.conj())
    }

    pub fn apply_j(&self, c: &CVector) -> CVector {
        self.j_unitary() * c.map(|z| z.conj())
    }

    /// Operator norm in the Gram metric.
    pub fn norm(&self, x: &CMatrix) -> f64 {
        let g_half = linalg::hermitian_function(&self.gram, f64::sqrt);
        let g_half_inv = linalg::hermitian_function(&self.gram, |v| 1.0 / v.sqrt());
        linalg::operator_norm(&(&g_half * x * g_half_inv))
    }

    /// Residuals of `J² = 1`, `JΔJ = Δ⁻¹`, `JΔ^{1/2} = S` and `⟨Jx, Jy⟩ = ⟨y, x⟩`.
    pub fn invariant_residuals(&self) -> [f64; 4] {
        let u = self.j_unitary();
        let ub = u.map(|z| z.conj());
        let id = CMatrix::identity(self.dim(), self.dim());
        let j2 = (&u * &ub - &id).norm();
        let delta = self.delta();
        let jdj = &u * delta.map(|z| z.conj()) * &ub;
        let inv = self.delta_pow(Complex64::new(-1.0, 0.0));
        let r2 = (jdj - &inv).norm() / inv.norm();
        let half = self.delta_pow(Complex64::new(0.5, 0.0));
        let s = &u * half.map(|z| z.conj());
        let r3 = (s - &id).norm();
        let anti = u.adjoint() * &self.gram * &u - self.gram.map(|z| z.conj());
        let r4 = anti.norm() / self.gram.norm();
        [j2, r2, r3, r4]
    }

    /// Membership of the coefficient vector `c` in `H` (real coefficients).
    pub fn coefficient_membership(&self, c: &CVector) -> Result<f64, ModularError> {
        let norm2 = (c.adjoint() * &self.gram * c)[(0, 0)].re;
        if norm2 <= 0.0 {
            return Ok(0.0);
        }
        let a = self.gram.map(|z| z.re);
        let r = DVector::from_iterator(self.dim(), (&self.gram * c).iter().map(|z| z.re));
        let coef = re_gram_solve(&a, &r)?;
        let d = c - coef.map(|x| Complex64::new(x, 0.0));
        let dist2 = (d.adjoint() * &self.gram * &d)[(0, 0)].re.max(0.0);
        Ok((dist2 / norm2).sqrt())
    }

    /// `max_j` membership of `V eⱼ` for `V` in coefficient coordinates.
    pub fn coefficient_maps_into(&self, v: &CMatrix) -> Result<f64, ModularError> {
        let mut worst: f64 = 0.0;
        for j in 0..self.dim() {
            worst = worst.max(self.coefficient_membership(&v.column(j).into_owned())?);
        }
        Ok(worst)
    }

    /// Analytic continuation `V(s + iσ) = Δ^{σ−is} V Δ^{is−σ}` over the strip
    /// `0 ≤ σ ≤ 1/2`, for `V` in coefficient coordinates.
    pub fn azl_extension_check(&self, v: &CMatrix, s_samples: &[f64], sigma_steps: usize) -> AzlReport {
        let mut max_norm: f64 = 0.0;
        for &s in s_samples {
            for k in 0..=sigma_steps {
                let sigma = 0.5 * k as f64 / sigma_steps.max(1) as f64;
                let left = self.delta_pow(Complex64::new(sigma, -s));
                let right = self.delta_pow(Complex64::new(-sigma, s));
                max_norm = max_norm.max(self.norm(&(left * v * right)));
            }
        }
        let top = self.delta_pow(Complex64::new(0.5, 0.0)) * v * self.delta_pow(Complex64::new(-0.5, 0.0));
        let u = self.j_unitary();
        let jvj = &u * v.map(|z| z.conj()) * u.map(|z| z.conj());
        let endpoint_mismatch = self.norm(&(top - jvj));
        AzlReport {
            max_norm,
            endpoint_mismatch,
        }
    }
}

/// Result of [`ModularData::azl_extension_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AzlReport {
    /// Largest Gram-metric norm over the sampled strip.
    pub max_norm: f64,
    /// `‖Δ^{1/2} V Δ^{−1/2} − JVJ‖`.
    pub endpoint_mismatch: f64,
}

/// Modular data from the polar decomposition of the real form of `S`.
///
/// Returns `(Δ, U)` in coefficient coordinates, `J c = U c̄`.
pub fn tomita_real_form(h: &StandardSubspace) -> Result<(CMatrix, CMatrix), ModularError> {
    let m = h.dim();
    let metric = real_embedding(&h.basis);
    let ghat = metric.transpose() * &metric;
    let d = DMatrix::from_fn(2 * m, 2 * m, |i, j| match (i == j, i < m) {
        (true, true) => 1.0,
        (true, false) => -1.0,
        _ => 0.0,
    });
    let chol = ghat.clone().cholesky().ok_or(ModularError::IllConditionedGram)?;
    let r = chol.l();
    let r_inv = r.clone().try_inverse().ok_or(ModularError::IllConditionedGram)?;
    // Δ_real = Ĝ⁻¹ D Ĝ D is Ĝ-self-adjoint; symmetrize with Ĝ = R Rᵀ
    let sym = &r_inv * &d * &ghat * &d * r_inv.transpose();
    let sym = (&sym + sym.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    if eig.eigenvalues.min() <= 0.0 {
        return Err(ModularError::NotStandard(f64::INFINITY));
    }
    let power = |p: f64| {
        let mut q = eig.eigenvectors.clone();
        for (k, l) in eig.eigenvalues.iter().enumerate() {
            let f = l.powf(p);
            for x in q.column_mut(k).iter_mut() {
                *x *= f;
            }
        }
        r_inv.transpose() * q * eig.eigenvectors.transpose() * r.transpose()
    };
    let delta_real = power(1.0);
    let j_real = &d * power(-0.5);
    let complexify = |x: &DMatrix<f64>| CMatrix::from_fn(m, m, |i, j| Complex64::new(x[(i, j)], x[(i + m, j)]));
    Ok((complexify(&delta_real), complexify(&j_real)))
}

/// Ambient matrices `(Δ, U)` of a square standard subspace, `J x = U x̄`.
pub fn ambient_modular(h: &StandardSubspace, data: &ModularData) -> Result<(CMatrix, CMatrix), ModularError> {
    if h.dim() != h.ambient_dim() {
        return Err(ModularError::DimensionMismatch);
    }
    let b = &h.basis;
    let b_inv = b.clone().try_inverse().ok_or(ModularError::NotStandard(f64::INFINITY))?;
    let delta = b * data.delta() * &b_inv;
    let u = b * data.j_unitary() * b_inv.map(|z| z.conj());
    Ok((delta, u))
}

/// Ambient matrix of `Δ^z` for a square standard subspace.
pub fn ambient_delta_pow(h: &StandardSubspace, data: &ModularData, z: Complex64) -> Result<CMatrix, ModularError> {
    if h.dim() != h.ambient_dim() {
        return Err(ModularError::DimensionMismatch);
    }
    let b_inv = h.basis.clone().try_inverse().ok_or(ModularError::NotStandard(f64::INFINITY))?;
    Ok(&h.basis * data.delta_pow(z) * b_inv)
}

/// `max` over `s` of the membership of `Δ_H^{−is} H₁` in `H₁`.
///
/// Both subspaces live in the same ambient space; `H₁` must lie in `H`.
pub fn hsm_residual(h1: &StandardSubspace, h: &StandardSubspace, s_samples: &[f64]) -> Result<f64, ModularError> {
    if h1.ambient_dim() != h.ambient_dim() {
        return Err(ModularError::DimensionMismatch);
    }
    let mut inclusion: f64 = 0.0;
    for j in 0..h1.dim() {
        inclusion = inclusion.max(h.membership_residual(&h1.basis.column(j).into_owned())?);
    }
    if inclusion > 1e-8 {
        return Err(ModularError::NotIncluded(inclusion));
    }
    let data = tomita(h)?;
    let coef = CMatrix::from_columns(
        &(0..h1.dim())
            .map(|j| h.coefficients(&h1.basis.column(j).into_owned()))
            .collect::<Vec<_>>(),
    );
    let mut worst: f64 = 0.0;
    for &s in s_samples {
        let moved = &h.basis * data.delta_it(-s) * &coef;
        for j in 0..moved.ncols() {
            worst = worst.max(h1.membership_residual(&moved.column(j).into_owned())?);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{any, prop_assert, proptest, ProptestConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn standardness_examples() {
        assert!(is_standard(&CMatrix::identity(3, 3)).0);
        let degenerate = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(!is_standard(&degenerate).0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = StandardSubspace::random(4, &mut rng);
        assert!(is_standard(h.basis()).1 < 1e6);
    }

    #[test]
    fn real_form_has_trivial_modular_data() {
        let h = StandardSubspace::real_form(3);
        let d = tomita(&h).unwrap();
        assert!((d.delta() - CMatrix::identity(3, 3)).norm() < 1e-14);
        assert!((d.j_unitary() - CMatrix::identity(3, 3)).norm() < 1e-14);
    }

    #[test]
    fn rotated_line_has_phase_conjugation() {
        // H = e^{iα}ℝ ⊂ ℂ: S(e^{iα}x) = e^{iα}x̄ ⇒ J z = e^{2iα} z̄
        let alpha = 0.7;
        let h = StandardSubspace::new(CMatrix::from_element(1, 1, Complex64::from_polar(1.0, alpha))).unwrap();
        let d = tomita(&h).unwrap();
        let (delta, u) = ambient_modular(&h, &d).unwrap();
        assert!((delta[(0, 0)] - 1.0).norm() < 1e-14);
        assert!((u[(0, 0)] - Complex64::from_polar(1.0, 2.0 * alpha)).norm() < 1e-14);
    }

    #[test]
    fn membership_examples() {
        let h = StandardSubspace::real_form(3);
        let v = CVector::from_vec(vec![c(1.0, 0.0), c(-2.0, 0.0), c(0.5, 0.0)]);
        assert!(h.membership_residual(&v).unwrap() < 1e-14);
        let iv = CVector::from_vec(vec![c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!((h.membership_residual(&iv).unwrap() - 1.0).abs() < 1e-14);
        let i_id = CMatrix::identity(3, 3) * c(0.0, 1.0);
        assert!((h.maps_into_residual(&i_id).unwrap() - 1.0).abs() < 1e-14);
        assert!(h.maps_into_residual(&(CMatrix::identity(3, 3) * c(-1.0, 0.0))).unwrap() < 1e-14);
    }

    #[test]
    fn membership_matches_least_squares() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = StandardSubspace::random(4, &mut rng);
        let v = CVector::from_fn(4, |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)));
        // brute force: minimize ‖v − Σ xⱼ bⱼ‖ over real x via the 8×4 real system
        let m = real_embedding(h.basis()).columns(0, 4).into_owned();
        let rhs = DVector::from_iterator(8, v.iter().map(|z| z.re).chain(v.iter().map(|z| z.im)));
        let x = m.clone().svd(true, true).solve(&rhs, 1e-14).unwrap();
        let brute = (m * x - &rhs).norm() / rhs.norm();
        assert!((h.membership_residual(&v).unwrap() - brute).abs() < 1e-10);
    }

    #[test]
    fn routes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 2..=6 {
            let h = StandardSubspace::random(n, &mut rng);
            let d = tomita(&h).unwrap();
            let (delta, u) = tomita_real_form(&h).unwrap();
            assert!((d.delta() - &delta).norm() / delta.norm() < 1e-9);
            assert!((d.j_unitary() - &u).norm() / u.norm() < 1e-9);
        }
    }

    #[test]
    fn modular_group_and_complement() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let h = StandardSubspace::random(3, &mut rng);
        let d = tomita(&h).unwrap();
        for t in [-2.5, -0.3, 0.8, 3.0] {
            let v = ambient_delta_pow(&h, &d, c(0.0, t)).unwrap();
            assert!(h.maps_into_residual(&v).unwrap() < 1e-8);
            let delta = d.delta();
            let dit = d.delta_it(t);
            assert!((&dit * &delta - &delta * &dit).norm() < 1e-8);
        }
        // J maps H onto H′ = (iH)^{⊥_Re}
        let (_, u) = ambient_modular(&h, &d).unwrap();
        let comp = h.symplectic_complement().unwrap();
        let hp = StandardSubspace::new(comp).unwrap();
        for j in 0..3 {
            let jb = &u * h.basis().column(j).map(|z| z.conj());
            assert!(hp.membership_residual(&jb).unwrap() < 1e-8);
        }
    }

    #[test]
    fn azl_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let h = StandardSubspace::random(4, &mut rng);
        let d = tomita(&h).unwrap();
        let r = d.azl_extension_check(&d.delta_it(0.4), &[0.0, 1.0], 8);
        assert!(r.endpoint_mismatch < 1e-8);
        let minus = CMatrix::identity(4, 4) * c(-1.0, 0.0);
        let r = d.azl_extension_check(&minus, &[0.0, 1.0], 8);
        assert!(r.endpoint_mismatch < 1e-12);
        assert!((r.max_norm - 1.0).abs() < 1e-10);
        // a generic unitary does not preserve H and its continuation grows
        let x = CMatrix::from_fn(4, 4, |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)));
        let v = x.qr().q();
        assert!(d.coefficient_maps_into(&v).unwrap() > 1e-3);
        let r = d.azl_extension_check(&v, &[0.0], 8);
        assert!(r.max_norm > 1.0 && r.endpoint_mismatch > 1e-3);
    }

    #[test]
    fn hsm_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h = StandardSubspace::random(3, &mut rng);
        assert!(hsm_residual(&h, &h, &[0.0, 0.5, 2.0]).unwrap() < 1e-8);
        let other = StandardSubspace::random(3, &mut rng);
        assert!(matches!(hsm_residual(&other, &h, &[0.5]), Err(ModularError::NotIncluded(_))));
    }

    #[test]
    fn csv_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h = StandardSubspace::random(3, &mut rng);
        let back = StandardSubspace::from_csv(&h.to_csv()).unwrap();
        assert_eq!(back, h);
        assert!(StandardSubspace::from_csv("1,0,0\n").is_err());
    }

    #[test]
    fn gram_pivot_rejects_dependent_vectors() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0 + 1e-15]);
        assert_eq!(
            re_gram_solve(&a, &DVector::from_vec(vec![1.0, 1.0])),
            Err(ModularError::IllConditionedGram)
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn modular_invariants_hold(seed in any::<u64>(), n in 2usize..=6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let h = StandardSubspace::random(n, &mut rng);
            let d = tomita(&h).unwrap();
            for r in d.invariant_residuals() {
                prop_assert!(r < 1e-10, "{r:e}");
            }
            prop_assert!(d.spectrum().iter().all(|&l| l > 0.0));
        }
    }
}
