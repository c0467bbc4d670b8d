//! The U(1)-current one-particle spaces in dilation coordinates.
//!
//! A test function on the half-line is written `f(x) = xᵏ g(ln x)` and stored
//! through `ĝ(ω) = ∫ g(y) e^{iωy} dy` sampled on a uniform ω-grid. In these
//! coordinates the dilation `D(s)f = e^{ks} f(e^{−s}·)` is multiplication by
//! `e^{iωs}`, its generator `K` is multiplication by `ω`, and the one-particle
//! inner product `∫₀^∞ p^{2k+1} conj f̂(p) ĝ(p) dp` becomes
//! `(1/2π) ∫ ρₖ(ω) conj ĝ₁ ĝ₂ dω` with
//! `ρₖ(ω) = ∏_{j≤k}(j² + ω²) · 2πω/(1 − e^{−2πω})`.
//!
//! Local subspaces are compressed onto real combinations of cardinal B-splines
//! in `y`; their modular data come from [`crate::modular`] through the
//! weighted samples `√(ρ dω/2π) ĝ`.

use nalgebra::DVector;
use num_complex::Complex64;
use thiserror::Error;

use crate::inner::Multiplier;
use crate::linalg::{self, CMatrix, CVector};
use crate::modular::{re_gram_solve, ModularData, ModularError, StandardSubspace};

/// Order of the cardinal B-splines.
pub const SPLINE_ORDER: usize = 8;
/// Default number of ω samples.
pub const DEFAULT_GRID: usize = 1 << 13;
const OMEGA_MIN: f64 = -12.0;
const OMEGA_MAX: f64 = 400.0;
const TAU: f64 = 2.0 * std::f64::consts::PI;
/// Smallest `ω_max·h/2` accepted; the dropped tail is below `x⁻⁸ ≈ 1e−8` in amplitude.
const MIN_CUTOFF_PHASE: f64 = 10.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurrentError {
    #[error("ω-grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("support leaves the grid after a dilation by {0}")]
    GridOverflow(f64),
    #[error("Gram matrix condition number {0:e} exceeds 1e10")]
    IllConditioned(f64),
    #[error("interval {0} is not a bounded subset of (0, ∞)")]
    DomainViolation(String),
    #[error(transparent)]
    Modular(#[from] ModularError),
}

/// Which weight the ω-grid carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Picture {
    /// Half-line restriction in dilation coordinates; dilations are thermal.
    Thermal,
    /// The log coordinate read as a line with its own vacuum; `ω > 0` only.
    Ground,
}

/// `ρₖ(ω) = ∏_{j≤k}(j² + ω²) · 2πω/(1 − e^{−2πω})`.
pub fn thermal_weight(k: u32, w: f64) -> f64 {
    let x = TAU * w;
    let base = if x.abs() < 1e-12 { 1.0 } else { x / -(-x).exp_m1() };
    (1..=k).map(|j| (j * j) as f64 + w * w).product::<f64>() * base
}

/// `2π ω^{2k+1}` on `ω > 0`.
pub fn ground_weight(k: u32, w: f64) -> f64 {
    if w > 0.0 {
        TAU * w.powi(2 * k as i32 + 1)
    } else {
        0.0
    }
}

/// Normalized cardinal B-spline of order [`SPLINE_ORDER`] with unit knots on `[0, q]`.
pub fn cardinal_bspline(u: f64) -> f64 {
    let q = SPLINE_ORDER;
    if u <= 0.0 || u >= q as f64 {
        return 0.0;
    }
    let mut acc = 0.0;
    let mut binom = 1.0;
    for j in 0..=q {
        let d = u - j as f64;
        if d > 0.0 {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * binom * d.powi(q as i32 - 1);
        }
        binom = binom * (q - j) as f64 / (j + 1) as f64;
    }
    acc / (1..q).map(|i| i as f64).product::<f64>()
}

/// One spline `coef · N((y − center)/width + q/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spline {
    pub coef: f64,
    pub center: f64,
    pub width: f64,
}

impl Spline {
    /// `ĝ(ω) = coef · h · sinc^q(ωh/2) · e^{iωc}`.
    pub fn transform(&self, w: f64) -> Complex64 {
        let x = w * self.width / 2.0;
        let s = if x.abs() < 1e-12 { 1.0 } else { x.sin() / x };
        Complex64::from_polar(self.coef * self.width * s.powi(SPLINE_ORDER as i32), w * self.center)
    }

    pub fn support(&self) -> (f64, f64) {
        let half = SPLINE_ORDER as f64 * self.width / 2.0;
        (self.center - half, self.center + half)
    }
}

/// Real test function on the half-line, a finite sum of splines in `y = ln x`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TestFunction {
    pieces: Vec<Spline>,
}

/// Largest `|y|` a test function may reach.
pub const LOG_RANGE: f64 = 30.0;

impl TestFunction {
    pub fn spline(center: f64, width: f64) -> Self {
        Self {
            pieces: vec![Spline {
                coef: 1.0,
                center,
                width,
            }],
        }
    }

    pub fn from_pieces(pieces: Vec<Spline>) -> Self {
        Self { pieces }
    }

    pub fn pieces(&self) -> &[Spline] {
        &self.pieces
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut pieces = self.pieces.clone();
        pieces.extend_from_slice(&other.pieces);
        Self { pieces }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            pieces: self.pieces.iter().map(|p| Spline { coef: p.coef * c, ..*p }).collect(),
        }
    }

    /// Support in `y = ln x`.
    pub fn log_support(&self) -> (f64, f64) {
        self.pieces.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            let (a, b) = p.support();
            (lo.min(a), hi.max(b))
        })
    }

    /// Support in `x`.
    pub fn support(&self) -> (f64, f64) {
        let (lo, hi) = self.log_support();
        (lo.exp(), hi.exp())
    }

    /// `D(s)`: every center moves by `s`.
    pub fn dilate(&self, s: f64) -> Result<Self, CurrentError> {
        let moved = Self {
            pieces: self.pieces.iter().map(|p| Spline { center: p.center + s, ..*p }).collect(),
        };
        let (lo, hi) = moved.log_support();
        if lo < -LOG_RANGE || hi > LOG_RANGE {
            return Err(CurrentError::GridOverflow(s));
        }
        Ok(moved)
    }

    /// `g(y)`.
    pub fn eval_log(&self, y: f64) -> f64 {
        let q = SPLINE_ORDER as f64;
        self.pieces
            .iter()
            .map(|p| p.coef * cardinal_bspline((y - p.center) / p.width + q / 2.0))
            .sum()
    }

    /// `f(x) = xᵏ g(ln x)`.
    pub fn eval(&self, x: f64, k: u32) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            x.powi(k as i32) * self.eval_log(x.ln())
        }
    }

    pub fn transform(&self, w: f64) -> Complex64 {
        self.pieces.iter().map(|p| p.transform(w)).sum()
    }

    /// CSV `x,f` on the given points.
    pub fn to_csv(&self, xs: &[f64], k: u32) -> String {
        let mut out = String::from("x,f\n");
        for &x in xs {
            out.push_str(&format!("{},{}\n", x, self.eval(x, k)));
        }
        out
    }
}

/// One-particle space of the `k`-th derivative current on an ω-grid.
#[derive(Debug, Clone)]
pub struct CurrentSpace {
    k: u32,
    picture: Picture,
    omega: Vec<f64>,
    weight: Vec<f64>,
}

impl CurrentSpace {
    pub fn new(k: u32, len: usize) -> Result<Self, CurrentError> {
        Self::with_picture(k, len, Picture::Thermal)
    }

    pub fn with_picture(k: u32, len: usize, picture: Picture) -> Result<Self, CurrentError> {
        if len < 1024 {
            return Err(CurrentError::GridTooCoarse(format!("{len} samples")));
        }
        let dw = (OMEGA_MAX - OMEGA_MIN) / (len - 1) as f64;
        if LOG_RANGE * dw > std::f64::consts::PI / 2.0 {
            return Err(CurrentError::GridTooCoarse(format!("dω = {dw}")));
        }
        let omega: Vec<f64> = (0..len).map(|j| OMEGA_MIN + j as f64 * dw).collect();
        let weight = omega
            .iter()
            .map(|&w| {
                let rho = match picture {
                    Picture::Thermal => thermal_weight(k, w),
                    Picture::Ground => ground_weight(k, w),
                };
                rho * dw / TAU
            })
            .collect();
        Ok(Self {
            k,
            picture,
            omega,
            weight,
        })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn picture(&self) -> Picture {
        self.picture
    }

    /// Narrowest spline width [`Self::sample`] accepts.
    pub fn min_width(&self) -> f64 {
        2.0 * MIN_CUTOFF_PHASE / OMEGA_MAX
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    /// Quadrature weights `ρ dω / 2π`.
    pub fn weights(&self) -> &[f64] {
        &self.weight
    }

    /// Samples of `ĝ`; rejects splines narrower than the ω-window resolves.
    pub fn sample(&self, f: &TestFunction) -> Result<CVector, CurrentError> {
        for p in f.pieces() {
            if p.width * OMEGA_MAX / 2.0 < MIN_CUTOFF_PHASE {
                return Err(CurrentError::GridTooCoarse(format!("spline width {}", p.width)));
            }
        }
        let (lo, hi) = f.log_support();
        if lo < -LOG_RANGE || hi > LOG_RANGE {
            return Err(CurrentError::GridTooCoarse("support outside the log range".into()));
        }
        Ok(CVector::from_iterator(self.len(), self.omega.iter().map(|&w| f.transform(w))))
    }

    pub fn inner(&self, a: &CVector, b: &CVector) -> Complex64 {
        a.iter()
            .zip(b.iter())
            .zip(&self.weight)
            .map(|((x, y), w)| x.conj() * y * *w)
            .sum()
    }

    pub fn norm(&self, a: &CVector) -> f64 {
        self.inner(a, a).re.max(0.0).sqrt()
    }

    /// Symplectic form `Im⟨a, b⟩`.
    pub fn symplectic(&self, a: &CVector, b: &CVector) -> f64 {
        self.inner(a, b).im
    }

    /// `√w ⊙ a`, so that the Euclidean product is the space's inner product.
    pub fn weighted(&self, a: &CVector) -> CVector {
        CVector::from_iterator(self.len(), a.iter().zip(&self.weight).map(|(x, w)| x * w.sqrt()))
    }

    /// `D(s)`: multiplication by `e^{iωs}`.
    pub fn dilation(&self, s: f64, a: &CVector) -> CVector {
        self.multiply(a, |w| Complex64::from_polar(1.0, w * s))
    }

    /// `φ(K)`: multiplication by `φ(ω)`.
    pub fn phi_of_kdil(&self, phi: &dyn Multiplier, a: &CVector) -> CVector {
        self.multiply(a, |w| phi.boundary(w))
    }

    /// One-particle action of `Γ(φ(K))` on Weyl generators.
    pub fn gamma_action(&self, phi: &dyn Multiplier, a: &CVector) -> CVector {
        self.phi_of_kdil(phi, a)
    }

    pub fn multiply(&self, a: &CVector, f: impl Fn(f64) -> Complex64) -> CVector {
        CVector::from_iterator(self.len(), a.iter().zip(&self.omega).map(|(x, w)| x * f(*w)))
    }

    /// Quasi-free vacuum functional `ω(W(f)) = exp(−‖f‖²/4)`.
    pub fn weyl_expectation(&self, a: &CVector) -> f64 {
        (-self.inner(a, a).re / 4.0).exp()
    }

    /// `|ω(W(f)W(g)) − e^{−i Im⟨f,g⟩/2} ω(W(f+g))|` with the left side from
    /// the two-point function.
    pub fn weyl_relation_residual(&self, a: &CVector, b: &CVector) -> f64 {
        let ab = self.inner(a, b);
        let lhs = (-(self.inner(a, a).re + self.inner(b, b).re + 2.0 * ab) / 4.0).exp();
        let sum = a + b;
        let rhs = Complex64::from_polar(self.weyl_expectation(&sum), -ab.im / 2.0);
        (lhs - rhs).norm()
    }
}

/// Real span of `m` splines filling a window in `y`.
#[derive(Debug, Clone)]
pub struct Compression {
    functions: Vec<TestFunction>,
    samples: CMatrix,
    weighted: CMatrix,
    condition: f64,
}

impl Compression {
    pub fn functions(&self) -> &[TestFunction] {
        &self.functions
    }

    pub fn dim(&self) -> usize {
        self.functions.len()
    }

    /// Columns are the ω-samples of the basis functions.
    pub fn samples(&self) -> &CMatrix {
        &self.samples
    }

    pub fn condition_number(&self) -> f64 {
        self.condition
    }

    pub fn gram(&self) -> CMatrix {
        self.weighted.adjoint() * &self.weighted
    }

    pub fn subspace(&self) -> Result<StandardSubspace, CurrentError> {
        Ok(StandardSubspace::new(self.weighted.clone())?)
    }

    pub fn modular(&self) -> Result<ModularData, CurrentError> {
        Ok(ModularData::from_gram(&self.gram())?)
    }

    /// Real coefficients of the `Re⟨·,·⟩`-orthogonal projection of `a`.
    pub fn re_coefficients(&self, space: &CurrentSpace, a: &CVector) -> Result<DVector<f64>, CurrentError> {
        let ga = self.gram().map(|z| z.re);
        let wa = space.weighted(a);
        let r = DVector::from_iterator(self.dim(), (self.weighted.adjoint() * wa).iter().map(|z| z.re));
        Ok(re_gram_solve(&ga, &r)?)
    }

    pub fn combine(&self, coef: &CVector) -> CVector {
        &self.samples * coef
    }

    pub fn re_project(&self, space: &CurrentSpace, a: &CVector) -> Result<CVector, CurrentError> {
        let c = self.re_coefficients(space, a)?;
        Ok(self.combine(&c.map(|x| Complex64::new(x, 0.0))))
    }

    /// `‖a − P a‖ / ‖a‖` for the real projection `P`.
    pub fn membership(&self, space: &CurrentSpace, a: &CVector) -> Result<f64, CurrentError> {
        let p = self.re_project(space, a)?;
        Ok(space.norm(&(a - p)) / space.norm(a))
    }
}

/// The splines of [`log_interval_basis`] and their samples, without the
/// conditioning check.
pub fn log_interval_splines(
    space: &CurrentSpace,
    lo: f64,
    hi: f64,
    m: usize,
) -> Result<(Vec<TestFunction>, CMatrix), CurrentError> {
    if !(hi > lo) || m == 0 {
        return Err(CurrentError::DomainViolation(format!("({lo}, {hi})")));
    }
    let q = SPLINE_ORDER as f64;
    let h = (hi - lo) / (m as f64 + q - 1.0);
    let functions: Vec<TestFunction> = (0..m)
        .map(|j| TestFunction::spline(lo + (j as f64 + 0.5) * h + (q - 1.0) * h / 2.0, h))
        .collect();
    let cols = functions.iter().map(|f| space.sample(f)).collect::<Result<Vec<_>, _>>()?;
    Ok((functions, CMatrix::from_columns(&cols)))
}

/// `m` splines of width `h = L/(m+q−1)` exactly filling `(lo, hi)` in `y`.
pub fn log_interval_basis(space: &CurrentSpace, lo: f64, hi: f64, m: usize) -> Result<Compression, CurrentError> {
    if !(hi > lo) || m == 0 {
        return Err(CurrentError::DomainViolation(format!("({lo}, {hi})")));
    }
    let (functions, samples) = log_interval_splines(space, lo, hi, m)?;
    let weighted = CMatrix::from_columns(&samples.column_iter().map(|c| space.weighted(&c.into_owned())).collect::<Vec<_>>());
    let condition = linalg::condition_number(&(weighted.adjoint() * &weighted));
    if condition > 1e10 {
        return Err(CurrentError::IllConditioned(condition));
    }
    Ok(Compression {
        functions,
        samples,
        weighted,
        condition,
    })
}

/// Compression of `H(a, b)` for `0 < a < b < ∞`.
pub fn interval_subspace_basis(space: &CurrentSpace, a: f64, b: f64, m: usize) -> Result<Compression, CurrentError> {
    if !(a > 0.0 && b > a && b.is_finite()) {
        return Err(CurrentError::DomainViolation(format!("({a}, {b})")));
    }
    log_interval_basis(space, a.ln(), b.ln(), m)
}

/// Parameters of the Bisognano–Wichmann and KMS comparisons.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalConfig {
    /// `H(0, ∞)` is compressed to `y ∈ (−span/2, span/2)`.
    pub span: f64,
    pub probe_width: f64,
    /// Probe centers for the KMS pair.
    pub kms_centers: (f64, f64),
}

impl Default for ThermalConfig {
    fn default() -> Self {
        Self {
            span: 16.0,
            probe_width: 1.5,
            kms_centers: (-1.0, 1.0),
        }
    }
}

/// `‖Δ_m^{it} v − C(D(−βt)) v‖ / ‖v‖` for each `t`, where `Δ_m` belongs to the
/// `m`-spline compression of `H(0, ∞)`, `v` is the real projection of a
/// centered probe and `C` is the real projection onto the compression.
pub fn bisognano_wichmann_residual(
    space: &CurrentSpace,
    m: usize,
    ts: &[f64],
    beta: f64,
    cfg: &ThermalConfig,
) -> Result<Vec<f64>, CurrentError> {
    let comp = log_interval_basis(space, -cfg.span / 2.0, cfg.span / 2.0, m)?;
    let data = comp.modular()?;
    let probe = space.sample(&TestFunction::spline(0.0, cfg.probe_width))?;
    let c = comp.re_coefficients(space, &probe)?.map(|x| Complex64::new(x, 0.0));
    let v = comp.combine(&c);
    let vn = space.norm(&v);
    ts.iter()
        .map(|&t| {
            let lhs = comp.combine(&(data.delta_it(t) * &c));
            let rhs = comp.re_project(space, &space.dilation(-beta * t, &v))?;
            Ok(space.norm(&(lhs - rhs)) / vn)
        })
        .collect()
}

/// `max_t |⟨f, Δ_m^{it} Δ_m g⟩ − ⟨g, D(βt) f⟩| / (‖f‖‖g‖)` for two projected
/// probes `f, g` in the compression of `H(0, ∞)`.
pub fn kms_residual(space: &CurrentSpace, m: usize, ts: &[f64], beta: f64, cfg: &ThermalConfig) -> Result<f64, CurrentError> {
    let comp = log_interval_basis(space, -cfg.span / 2.0, cfg.span / 2.0, m)?;
    let data = comp.modular()?;
    let g_mat = comp.gram();
    let project = |center: f64| -> Result<CVector, CurrentError> {
        let p = space.sample(&TestFunction::spline(center, cfg.probe_width))?;
        Ok(comp.re_coefficients(space, &p)?.map(|x| Complex64::new(x, 0.0)))
    };
    let cf = project(cfg.kms_centers.0)?;
    let cg = project(cfg.kms_centers.1)?;
    let f = comp.combine(&cf);
    let g = comp.combine(&cg);
    let scale = space.norm(&f) * space.norm(&g);
    let delta = data.delta();
    let mut worst: f64 = 0.0;
    for &t in ts {
        let moved = data.delta_it(t) * &delta * &cg;
        let lhs = (cf.adjoint() * &g_mat * moved)[(0, 0)];
        let rhs = space.inner(&g, &space.dilation(beta * t, &f));
        worst = worst.max((lhs - rhs).norm() / scale);
    }
    Ok(worst)
}

/// Parameters of the half-line membership test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MembershipConfig {
    /// `H(a, ∞)` is compressed to `y ∈ (ln a, ln a + span)`.
    pub span: f64,
    pub probe_width: f64,
    /// Probe center measured from `ln a`.
    pub probe_offset: f64,
}

impl Default for MembershipConfig {
    fn default() -> Self {
        Self {
            span: 14.0,
            probe_width: 0.75,
            probe_offset: 3.0,
        }
    }
}

/// Distance of `φ(K) v` from the `m`-spline compression of `H(a, ∞)`, where
/// `v` is the real projection of a fixed probe onto that compression.
pub fn semigroup_membership_residual(
    space: &CurrentSpace,
    phi: &dyn Multiplier,
    a: f64,
    m: usize,
    cfg: &MembershipConfig,
) -> Result<f64, CurrentError> {
    if a <= 0.0 {
        return Err(CurrentError::DomainViolation(format!("a = {a}")));
    }
    let lo = a.ln();
    let comp = log_interval_basis(space, lo, lo + cfg.span, m)?;
    let probe = space.sample(&TestFunction::spline(lo + cfg.probe_offset, cfg.probe_width))?;
    let probe = comp.re_project(space, &probe)?;
    comp.membership(space, &space.phi_of_kdil(phi, &probe))
}

/// Residual-versus-size curve.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub points: Vec<(usize, f64)>,
}

impl Curve {
    pub fn last(&self) -> f64 {
        self.points.last().map_or(f64::NAN, |p| p.1)
    }

    /// Each value is below `(1 + noise)` times its predecessor plus `floor`.
    pub fn is_decreasing(&self, noise: f64, floor: f64) -> bool {
        self.points.windows(2).all(|w| w[1].1 < (1.0 + noise) * w[0].1 + floor)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,residual\n");
        for (m, r) in &self.points {
            out.push_str(&format!("{m},{r:.16e}\n"));
        }
        out
    }
}

/// Evaluates `f` at each basis size.
pub fn curve(ms: &[usize], f: impl Fn(usize) -> Result<f64, CurrentError>) -> Result<Curve, CurrentError> {
    Ok(Curve {
        points: ms.iter().map(|&m| Ok((m, f(m)?))).collect::<Result<_, CurrentError>>()?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use crate::inner::{InnerFunction, RawMultiplier};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn space(k: u32) -> CurrentSpace {
        CurrentSpace::new(k, DEFAULT_GRID).unwrap()
    }

    #[test]
    fn bspline_is_a_partition_of_unity() {
        for u in [0.1, 0.37, 0.5, 0.93] {
            let s: f64 = (0..SPLINE_ORDER as i32).map(|j| cardinal_bspline(u + j as f64)).sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
        assert_eq!(cardinal_bspline(-0.1), 0.0);
        assert_eq!(cardinal_bspline(8.0), 0.0);
    }

    #[test]
    fn spline_transform_matches_quadrature() {
        let f = TestFunction::spline(0.4, 0.6);
        let (lo, hi) = f.log_support();
        let n = 4000;
        let dy = (hi - lo) / n as f64;
        for w in [0.0, 1.3, -2.0, 7.5] {
            let direct: Complex64 = (0..=n)
                .map(|j| {
                    let y = lo + j as f64 * dy;
                    Complex64::from_polar(f.eval_log(y), w * y) * dy
                })
                .sum();
            assert!((direct - f.transform(w)).norm() < 1e-9);
        }
    }

    /// `∫₀^∞ p^{2k+1} |f̂(p)|² dp` with `f̂(p) = ∫ f(x) e^{ipx} dx` by direct quadrature.
    fn momentum_norm(f: &TestFunction, k: u32) -> f64 {
        let (lo, hi) = f.log_support();
        let ny = 3000;
        let dy = (hi - lo) / ny as f64;
        let xs: Vec<(f64, f64)> = (0..=ny)
            .map(|j| {
                let y = lo + j as f64 * dy;
                let x = y.exp();
                (x, f.eval(x, k) * x * dy)
            })
            .collect();
        let np = 6000;
        let pmax = 60.0;
        let dp = pmax / np as f64;
        (1..=np)
            .map(|j| {
                let p = j as f64 * dp;
                let fh: Complex64 = xs.iter().map(|(x, w)| Complex64::from_polar(*w, p * x)).sum();
                p.powi(2 * k as i32 + 1) * fh.norm_sqr() * dp
            })
            .sum()
    }

    #[test]
    fn weight_matches_momentum_space() {
        let f = TestFunction::spline(0.2, 0.5);
        for k in [1, 2] {
            let s = space(k);
            let v = s.sample(&f).unwrap();
            let mellin = s.inner(&v, &v).re;
            let brute = momentum_norm(&f, k);
            assert!((mellin - brute).abs() < 1e-6 * brute, "k={k}: {mellin} vs {brute}");
        }
    }

    #[test]
    fn inner_product_examples() {
        let s = space(0);
        let f = s.sample(&TestFunction::spline(-1.0, 0.5)).unwrap();
        let g = s.sample(&TestFunction::spline(2.0, 0.4)).unwrap();
        assert!(s.inner(&f, &f).re > 0.0);
        assert!((s.inner(&f, &g) - s.inner(&g, &f).conj()).norm() < 1e-10);
        for k in 0..=2 {
            let s = space(k);
            let f = s.sample(&TestFunction::spline(-1.0, 0.5)).unwrap();
            let g = s.sample(&TestFunction::spline(3.0, 0.4)).unwrap();
            assert!(s.symplectic(&f, &g).abs() < 1e-8 * s.norm(&f) * s.norm(&g));
        }
    }

    #[test]
    fn dilation_is_a_unitary_group() {
        let s = space(0);
        let f = TestFunction::spline(0.3, 0.5);
        let v = s.sample(&f).unwrap();
        assert!((s.norm(&s.dilation(1.0, &v)) - s.norm(&v)).abs() < 1e-8);
        let two = s.dilation(0.4, &s.dilation(0.7, &v));
        assert!(s.norm(&(two - s.dilation(1.1, &v))) < 1e-12);
        let moved = s.sample(&f.dilate(1.0).unwrap()).unwrap();
        assert!(s.norm(&(moved - s.dilation(1.0, &v))) < 1e-10 * s.norm(&v));
        let unit = TestFunction::spline(2f64.ln() / 2.0, 2f64.ln() / SPLINE_ORDER as f64);
        let (a, b) = unit.support();
        assert!((a - 1.0).abs() < 1e-12 && (b - 2.0).abs() < 1e-12);
        let (a, b) = unit.dilate(0.5).unwrap().support();
        assert!((a - 0.5f64.exp()).abs() < 1e-12 && (b - 2.0 * 0.5f64.exp()).abs() < 1e-12);
        assert!(matches!(f.dilate(40.0), Err(CurrentError::GridOverflow(_))));
    }

    #[test]
    fn phi_of_kdil_examples() {
        let s = space(0);
        let v = s.sample(&TestFunction::spline(0.3, 0.5)).unwrap();
        assert_eq!(s.phi_of_kdil(&InnerFunction::identity(), &v), v);
        let e = InnerFunction::exponential(1.0).unwrap();
        assert!(s.norm(&(s.phi_of_kdil(&e, &v) - s.dilation(1.0, &v))) < 1e-12);
        let b = InnerFunction::blaschke(c(1.0, 1.0)).unwrap();
        let bv = s.phi_of_kdil(&b, &v);
        assert!((s.norm(&bv) - s.norm(&v)).abs() < 1e-9);
        let comm = s.phi_of_kdil(&b, &s.dilation(0.7, &v)) - s.dilation(0.7, &bv);
        assert!(s.norm(&comm) < 1e-8);
        let b2 = InnerFunction::blaschke(c(0.0, 2.0)).unwrap();
        let prod = s.phi_of_kdil(&b.multiply(&b2), &v) - s.phi_of_kdil(&b, &s.phi_of_kdil(&b2, &v));
        assert!(s.norm(&prod) < 1e-8);
    }

    #[test]
    fn basis_examples() {
        let s = space(0);
        let one = interval_subspace_basis(&s, 1.0, 2.0f64.powf(8.0), 1).unwrap();
        let v = one.combine(&CVector::from_element(1, c(1.0, 0.0)));
        assert!(one.membership(&s, &v).unwrap() < 1e-12);
        let comp = log_interval_basis(&s, 0.0, 10.0, 12).unwrap();
        let (lo, hi) = comp.functions()[0].log_support();
        assert!(lo >= -1e-12 && hi < 10.0);
        assert!(comp.functions().last().unwrap().log_support().1 <= 10.0 + 1e-12);
        assert!(linalg::hermitian_eigenvalues(&comp.gram())[0] > 0.0);
        assert!(interval_subspace_basis(&s, 0.0, 1.0, 4).is_err());
    }

    #[test]
    fn bw_residual_vanishes_at_zero_and_converges() {
        let s = space(0);
        let cfg = ThermalConfig::default();
        assert!(bisognano_wichmann_residual(&s, 8, &[0.0], TAU, &cfg).unwrap()[0] < 1e-12);
        let r8 = bisognano_wichmann_residual(&s, 8, &[0.2], TAU, &cfg).unwrap()[0];
        let r24 = bisognano_wichmann_residual(&s, 24, &[0.2], TAU, &cfg).unwrap()[0];
        let wrong = bisognano_wichmann_residual(&s, 24, &[0.2], TAU / 2.0, &cfg).unwrap()[0];
        assert!(r24 < 0.05 && r24 < r8);
        assert!(wrong > 5.0 * r24);
    }

    #[test]
    fn kms_reduces_to_positivity_at_zero() {
        let s = space(0);
        let comp = log_interval_basis(&s, -8.0, 8.0, 12).unwrap();
        let data = comp.modular().unwrap();
        let cf = comp
            .re_coefficients(&s, &s.sample(&TestFunction::spline(0.0, 1.5)).unwrap())
            .unwrap()
            .map(|x| c(x, 0.0));
        let val = (cf.adjoint() * comp.gram() * data.delta() * &cf)[(0, 0)];
        assert!(val.re > 0.0 && val.im.abs() < 1e-10 * val.re);
    }

    #[test]
    fn membership_examples() {
        let s = space(0);
        let cfg = MembershipConfig::default();
        let one = semigroup_membership_residual(&s, &InnerFunction::identity(), 1.0, 16, &cfg).unwrap();
        assert!(one < 1e-8);
        let b = InnerFunction::blaschke(c(0.0, 1.0)).unwrap();
        let r16 = semigroup_membership_residual(&s, &b, 1.0, 16, &cfg).unwrap();
        let r32 = semigroup_membership_residual(&s, &b, 1.0, 32, &cfg).unwrap();
        assert!(r32 < 0.05 && r32 < r16);
        let refl = RawMultiplier::reflected(&b);
        for m in [8, 32] {
            assert!(semigroup_membership_residual(&s, &refl, 1.0, m, &cfg).unwrap() > 0.2);
        }
    }

    #[test]
    fn weyl_examples() {
        let s = space(0);
        let zero = CVector::zeros(s.len());
        assert_eq!(s.weyl_expectation(&zero), 1.0);
        let f = s.sample(&TestFunction::spline(0.0, 0.8)).unwrap();
        let f2 = &f * c(2.0 / s.norm(&f), 0.0);
        assert!((s.weyl_expectation(&f2) - (-1.0f64).exp()).abs() < 1e-12);
        let g = s.sample(&TestFunction::spline(0.5, 0.6)).unwrap();
        assert!(s.weyl_relation_residual(&f, &g) < 1e-10);
        let b = InnerFunction::blaschke(c(0.0, 1.0)).unwrap();
        let vf = s.gamma_action(&b, &f);
        assert!((s.weyl_expectation(&vf) - s.weyl_expectation(&f)).abs() < 1e-9);
    }

    #[test]
    fn forward_locality_of_blaschke() {
        // Im⟨φ(K)f, g⟩ = 0 when g sits to the left of f
        let s = space(0);
        let b = InnerFunction::blaschke(c(0.0, 1.0)).unwrap();
        let f = s.sample(&TestFunction::spline(3.0, 0.5)).unwrap();
        let g = s.sample(&TestFunction::spline(-1.0, 0.5)).unwrap();
        let vf = s.gamma_action(&b, &f);
        assert!(s.symplectic(&vf, &g).abs() < 1e-6 * s.norm(&f) * s.norm(&g));
        // the opposite order is not local
        let late = s.sample(&TestFunction::spline(6.0, 0.5)).unwrap();
        assert!(s.symplectic(&vf, &late).abs() > 1e-4 * s.norm(&f) * s.norm(&late));
    }

    #[test]
    fn curve_rules() {
        let c1 = Curve {
            points: vec![(8, 0.1), (12, 0.05), (16, 0.054), (24, 0.02)],
        };
        assert!(c1.is_decreasing(0.1, 0.0));
        assert!(!c1.is_decreasing(0.05, 0.0));
        assert!(c1.to_csv().starts_with("m,residual\n8,"));
    }


    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn sampling_intertwines_dilations(y in -4.0..4.0f64, w in 0.2..0.6f64, s in -3.0..3.0f64) {
            let sp = space(0);
            let f = TestFunction::spline(y, w);
            let v = sp.sample(&f).unwrap();
            let moved = sp.sample(&f.dilate(s).unwrap()).unwrap();
            prop_assert!(sp.norm(&(moved - sp.dilation(s, &v))) < 1e-10 * sp.norm(&v));
        }

        #[test]
        fn disjoint_supports_are_symplectically_orthogonal(
            k in 0u32..=2,
            y in -6.0..2.0f64,
            w in 0.2..0.5f64,
            gap in 0.0..3.0f64,
        ) {
            let sp = space(k);
            let f = sp.sample(&TestFunction::spline(y, w)).unwrap();
            let g = sp.sample(&TestFunction::spline(y + 8.0 * w + gap, w)).unwrap();
            prop_assert!(sp.symplectic(&f, &g).abs() < 1e-8 * sp.norm(&f) * sp.norm(&g));
            prop_assert!((sp.inner(&f, &g) - sp.inner(&g, &f).conj()).norm() < 1e-10 * sp.norm(&f) * sp.norm(&g));
        }

        #[test]
        fn symmetric_inner_functions_are_forward_local(seed in any::<u64>(), y in -2.0..2.0f64, gap in 0.0..2.0f64) {
            let sp = space(0);
            let phi = InnerFunction::random(&mut ChaCha8Rng::seed_from_u64(seed), 2, 1.0);
            let f = sp.sample(&TestFunction::spline(y, 0.5)).unwrap();
            let g = sp.sample(&TestFunction::spline(y - 4.0 - gap, 0.5)).unwrap();
            let vf = sp.gamma_action(&phi, &f);
            prop_assert!(sp.symplectic(&vf, &g).abs() < 1e-6 * sp.norm(&f) * sp.norm(&g));
        }
    }
}
