//! Schrödinger representation of the ax+b group on a periodic grid.
//!
//! `K = i d/dx` acts spectrally: on the Fourier mode `e^{ikx}` it has eigenvalue
//! `−k`, so `e^{itK}ξ(x) = ξ(x−t)` multiplies mode `k` by `e^{−ikt}` and `φ(K)`
//! multiplies it by `φ(−k)`. `P` is multiplication by `eˣ`. The group element
//! `e^{it(K+zP)}` is applied through its exact kernel
//! `e^{ize^x(1−e^{−t})} ξ(x−t)`.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use thiserror::Error;

use crate::inner::{fourier_profile, InnerError, Mollifier, Multiplier, Profile, TimeGrid};
use crate::linalg::{self, CMatrix, CVector, Eigen, LinalgError};

const TAU: f64 = 2.0 * std::f64::consts::PI;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AxbError {
    #[error("grid needs x_max > x_min and a power-of-two point count >= 256")]
    BadGrid,
    #[error("shift {0} exceeds a quarter of the window")]
    ShiftTooLarge(f64),
    #[error("negative time with Im z > 0 gives an unbounded multiplier")]
    UnboundedRegime,
    #[error("Im z must be non-negative")]
    LowerHalfPlane,
    #[error("time quadrature did not converge: {0}")]
    QuadratureNotConverged(String),
    #[error("resolvent is numerically singular")]
    SingularResolvent,
    #[error("spectral radius {0} is on the unit circle")]
    SpectrumOnCircle(f64),
    #[error("multiplier has no continuation off the real line")]
    NoContinuation,
    #[error("states live on different grids")]
    GridMismatch,
    #[error("malformed state: {0}")]
    Parse(String),
    #[error(transparent)]
    Inner(#[from] InnerError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Periodic grid `x_j = x_min + j h`, `h = (x_max − x_min)/n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    x_min: f64,
    x_max: f64,
    n: usize,
}

impl Default for Grid {
    fn default() -> Self {
        Self {
            x_min: -16.0,
            x_max: 6.0,
            n: 1024,
        }
    }
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self, AxbError> {
        if !(x_max > x_min) || n < 256 || !n.is_power_of_two() {
            return Err(AxbError::BadGrid);
        }
        Ok(Self { x_min, x_max, n })
    }

    /// Small grid for dense-matrix work; skips the 256-point minimum.
    pub fn small(x_min: f64, x_max: f64, n: usize) -> Result<Self, AxbError> {
        if !(x_max > x_min) || n < 8 || !n.is_power_of_two() {
            return Err(AxbError::BadGrid);
        }
        Ok(Self { x_min, x_max, n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn h(&self) -> f64 {
        self.width() / self.n as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.h()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    /// Wavenumbers in FFT order; the Nyquist mode is taken as negative.
    pub fn wavenumbers(&self) -> Vec<f64> {
        wavenumbers(self.n, self.width())
    }
}

fn wavenumbers(n: usize, width: f64) -> Vec<f64> {
    (0..n)
        .map(|m| {
            let mm = if m < n / 2 { m as f64 } else { m as f64 - n as f64 };
            TAU * mm / width
        })
        .collect()
}

/// Complex samples of a wave function on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridState {
    grid: Grid,
    values: Vec<Complex64>,
}

impl GridState {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self, AxbError> {
        if values.len() != grid.n {
            return Err(AxbError::GridMismatch);
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> Complex64) -> Self {
        let values = grid.points().into_iter().map(f).collect();
        Self { grid, values }
    }

    /// Normalized Gaussian `exp(−(x−c)²/(2w²) + ipx)`.
    pub fn gaussian(grid: Grid, center: f64, width: f64, momentum: f64) -> Self {
        let s = Self::from_fn(grid, |x| {
            let g = (-(x - center).powi(2) / (2.0 * width * width)).exp();
            Complex64::from_polar(g, momentum * x)
        });
        let n = s.norm();
        s.scale(Complex64::new(1.0 / n, 0.0))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        }
    }

    /// `⟨self, other⟩ = h Σ conj(self) other`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        let s: Complex64 = self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum();
        s * self.grid.h()
    }

    pub fn norm(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.h()).sqrt()
    }

    /// `‖self − other‖ / ‖other‖`.
    pub fn rel_diff(&self, other: &Self) -> f64 {
        self.sub(other).norm() / other.norm()
    }

    pub fn as_vector(&self) -> CVector {
        CVector::from_column_slice(&self.values)
    }

    /// Two-column CSV body `x,re,im`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,re,im\n");
        for (j, v) in self.values.iter().enumerate() {
            out.push_str(&format!("{},{},{}\n", self.grid.x(j), v.re, v.im));
        }
        out
    }

    /// Reads a CSV written by [`GridState::to_csv`] onto `grid`.
    pub fn from_csv(grid: Grid, text: &str) -> Result<Self, AxbError> {
        let mut values = Vec::with_capacity(grid.n);
        for line in text.lines().skip(1).filter(|l| !l.trim().is_empty()) {
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 3 {
                return Err(AxbError::Parse(line.to_string()));
            }
            let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| AxbError::Parse(e.to_string()));
            values.push(Complex64::new(parse(cols[1])?, parse(cols[2])?));
        }
        Self::new(grid, values)
    }
}

struct Spectral {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    n: usize,
}

impl Spectral {
    fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
            n,
        }
    }

    fn multiply(&self, values: &[Complex64], mult: impl Fn(usize) -> Complex64) -> Vec<Complex64> {
        let mut buf = values.to_vec();
        self.fwd.process(&mut buf);
        let scale = 1.0 / self.n as f64;
        for (m, v) in buf.iter_mut().enumerate() {
            *v *= mult(m) * scale;
        }
        self.inv.process(&mut buf);
        buf
    }
}

fn spectral_multiplier(xi: &GridState, mult: impl Fn(f64) -> Complex64) -> GridState {
    let ks = xi.grid.wavenumbers();
    let sp = Spectral::new(xi.grid.n);
    GridState {
        grid: xi.grid,
        values: sp.multiply(&xi.values, |m| mult(ks[m])),
    }
}

/// `ξ ↦ ξ(· − t)` by a spectral phase shift.
pub fn apply_translation(t: f64, xi: &GridState) -> Result<GridState, AxbError> {
    if t.abs() >= xi.grid.width() / 4.0 {
        return Err(AxbError::ShiftTooLarge(t));
    }
    Ok(spectral_multiplier(xi, |k| Complex64::from_polar(1.0, -k * t)))
}

fn kernel_phase(z: Complex64, x: f64, t: f64) -> Complex64 {
    (Complex64::i() * z * (x.exp() * -(-t).exp_m1())).exp()
}

/// `e^{it(K+zP)}ξ = e^{ize^x(1−e^{−t})} ξ(x−t)`.
pub fn apply_group_element(t: f64, z: Complex64, xi: &GridState) -> Result<GridState, AxbError> {
    if z.im < 0.0 {
        return Err(AxbError::LowerHalfPlane);
    }
    if t < 0.0 && z.im > 0.0 {
        return Err(AxbError::UnboundedRegime);
    }
    let mut out = apply_translation(t, xi)?;
    for (j, v) in out.values.iter_mut().enumerate() {
        *v *= kernel_phase(z, xi.grid.x(j), t);
    }
    Ok(out)
}

/// `e^{iaP}`, multiplication by `e^{iaeˣ}`.
pub fn apply_position_phase(a: f64, xi: &GridState) -> GridState {
    let mut out = xi.clone();
    for (j, v) in out.values.iter_mut().enumerate() {
        *v *= Complex64::from_polar(1.0, a * xi.grid.x(j).exp());
    }
    out
}

/// Spectral multiplier `φ(K)`: mode `k` is multiplied by `φ(−k)`.
pub fn phi_of_k(phi: &dyn Multiplier, xi: &GridState) -> GridState {
    spectral_multiplier(xi, |k| phi.boundary(-k))
}

/// `(φ ĵₙ)(K)`, the mollified multiplier.
pub fn phi_of_k_mollified(phi: &dyn Multiplier, moll: &Mollifier, xi: &GridState) -> GridState {
    spectral_multiplier(xi, |k| phi.boundary(-k) * moll.fourier(-k))
}

/// Strang splitting for `−i∂ₜψ = (K + zP)ψ`, used as an independent reference.
pub fn strang_propagate(t: f64, z: Complex64, xi: &GridState, step: f64) -> GridState {
    let steps = (t.abs() / step).ceil().max(1.0) as usize;
    let dt = t / steps as f64;
    let grid = xi.grid;
    let ks = grid.wavenumbers();
    let sp = Spectral::new(grid.n);
    let half: Vec<Complex64> = grid
        .points()
        .iter()
        .map(|x| (Complex64::i() * z * x.exp() * (dt / 2.0)).exp())
        .collect();
    let kick: Vec<Complex64> = ks.iter().map(|k| Complex64::from_polar(1.0, -k * dt)).collect();
    let mut v = xi.values.clone();
    for _ in 0..steps {
        for (a, h) in v.iter_mut().zip(&half) {
            *a *= h;
        }
        v = sp.multiply(&v, |m| kick[m]);
        for (a, h) in v.iter_mut().zip(&half) {
            *a *= h;
        }
    }
    GridState { grid, values: v }
}

/// Shifts one state by many times without wrap-around, using a zero-padded
/// spectral representation.
pub struct Shifter {
    grid: Grid,
    spectrum: Vec<Complex64>,
    ks: Vec<f64>,
    inv: Arc<dyn Fft<f64>>,
    padded: usize,
}

impl Shifter {
    /// Supports shifts with `|t| ≤ max_shift`.
    pub fn new(xi: &GridState, max_shift: f64) -> Self {
        let grid = xi.grid;
        let factor = (1.0 + max_shift.abs() / grid.width() + 0.25).ceil() as usize;
        let padded = grid.n * factor.next_power_of_two();
        let mut planner = FftPlanner::new();
        let mut spectrum = xi.values.clone();
        spectrum.resize(padded, Complex64::new(0.0, 0.0));
        planner.plan_fft_forward(padded).process(&mut spectrum);
        let scale = 1.0 / padded as f64;
        for v in &mut spectrum {
            *v *= scale;
        }
        let width = grid.h() * padded as f64;
        Self {
            grid,
            spectrum,
            ks: wavenumbers(padded, width),
            inv: planner.plan_fft_inverse(padded),
            padded,
        }
    }

    /// Window samples of `ξ(x − t)`.
    pub fn shifted(&self, t: f64) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = self
            .spectrum
            .iter()
            .zip(&self.ks)
            .map(|(s, k)| s * Complex64::from_polar(1.0, -k * t))
            .collect();
        self.inv.process(&mut buf);
        buf.truncate(self.grid.n);
        buf
    }

    pub fn padded_len(&self) -> usize {
        self.padded
    }
}

fn first_index_from(prof: &Profile, t_start: f64) -> usize {
    (0..prof.grid.len)
        .find(|&j| prof.grid.time(j) >= t_start - 1e-12)
        .unwrap_or(prof.grid.len)
}

/// The profile decays like `e^{−min Im p·(t − a − 1/n)}`; when the scales are
/// known the window must push that bound below 1e−10. Otherwise the sampled tail
/// is compared against the FFT noise floor.
fn check_tail(phi: &dyn Multiplier, moll: &Mollifier, prof: &Profile) -> Result<(), AxbError> {
    if let Some((a, _, min_im)) = phi.scales() {
        let span = prof.grid.end() - a - 1.0 / moll.index() as f64;
        let bound = if min_im.is_finite() { (-min_im * span).exp() } else { 0.0 };
        if span <= 0.0 || bound > 1e-10 {
            return Err(AxbError::QuadratureNotConverged(format!("profile tail bound {bound:e}")));
        }
        return Ok(());
    }
    let total: f64 = prof.values.iter().map(|v| v.norm()).sum();
    let tail_from = prof.grid.len - prof.grid.len / 32;
    let tail: f64 = prof.values[tail_from..].iter().map(|v| v.norm()).sum();
    if tail > 1e-6 * total {
        return Err(AxbError::QuadratureNotConverged(format!(
            "profile tail carries {:e} of the mass",
            tail / total
        )));
    }
    Ok(())
}

/// Trapezoid sum of `f_n(t) e^{it(K+zP)}ξ` over the profile samples from `j0` on.
fn time_integral(prof: &Profile, j0: usize, z: Complex64, xi: &GridState, shifter: &Shifter) -> Vec<Complex64> {
    let n = xi.grid.n;
    let xs = xi.grid.points();
    let last = prof.grid.len - 1;
    let dt = prof.grid.dt;
    let zero = || vec![Complex64::new(0.0, 0.0); n];
    (j0..prof.grid.len)
        .into_par_iter()
        .fold(zero, |mut acc, j| {
            let f = prof.values[j];
            if f.norm() == 0.0 {
                return acc;
            }
            let t = prof.grid.time(j);
            let w = if j == j0 || j == last { 0.5 * dt } else { dt };
            let shifted = shifter.shifted(t);
            for ((a, s), x) in acc.iter_mut().zip(&shifted).zip(&xs) {
                *a += f * s * kernel_phase(z, *x, t) * w;
            }
            acc
        })
        .reduce(zero, |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
            a
        })
}

/// `φ(K+zP)ξ ≈ ∫ f_n(t) e^{it(K+zP)}ξ dt` by trapezoid quadrature on the
/// profile grid and on its halving. For `Im z > 0` only `t ≥ 0` enters.
pub fn phi_of_kzp(
    phi: &dyn Multiplier,
    z: Complex64,
    xi: &GridState,
    moll: &Mollifier,
    tgrid: &TimeGrid,
) -> Result<GridState, AxbError> {
    if z.im < 0.0 {
        return Err(AxbError::LowerHalfPlane);
    }
    let start = if z.im > 0.0 { 0.0 } else { tgrid.t0 };
    let t_max = tgrid.end().abs().max(tgrid.t0.abs());
    let shifter = Shifter::new(xi, t_max);
    let halved = TimeGrid {
        t0: tgrid.t0,
        dt: tgrid.dt / 2.0,
        len: tgrid.len * 2,
    };
    let mut results = Vec::with_capacity(2);
    for g in [tgrid, &halved] {
        let prof = fourier_profile(phi, moll, g)?;
        check_tail(phi, moll, &prof)?;
        let j0 = first_index_from(&prof, start);
        results.push(GridState {
            grid: xi.grid,
            values: time_integral(&prof, j0, z, xi, &shifter),
        });
    }
    let fine = results.pop().expect("two refinements");
    let coarse = results.pop().expect("two refinements");
    let diff = fine.sub(&coarse).norm();
    if diff > 1e-6 * fine.norm().max(1e-300) {
        return Err(AxbError::QuadratureNotConverged(format!(
            "successive refinements differ by {diff:e}"
        )));
    }
    Ok(fine)
}

/// `Re⟨ξ, −i(K+zP)ξ⟩ − Im z ⟨ξ, Pξ⟩`.
pub fn accretivity_residual(z: Complex64, xi: &GridState) -> f64 {
    let kxi = spectral_multiplier(xi, |k| Complex64::new(-k, 0.0));
    let pxi = GridState {
        grid: xi.grid,
        values: xi.values.iter().enumerate().map(|(j, v)| v * xi.grid.x(j).exp()).collect(),
    };
    let bxi = GridState {
        grid: xi.grid,
        values: kxi.values.iter().zip(&pxi.values).map(|(k, p)| k + z * p).collect(),
    };
    let lhs = (xi.inner(&bxi) * Complex64::new(0.0, -1.0)).re;
    let rhs = z.im * xi.inner(&pxi).re;
    lhs - rhs
}

/// Dense spectral matrix of `K` on the grid.
pub fn k_matrix(grid: &Grid) -> CMatrix {
    let n = grid.n;
    let ks = grid.wavenumbers();
    let sp = Spectral::new(n);
    let mut m = CMatrix::zeros(n, n);
    for col in 0..n {
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        e[col] = Complex64::new(1.0, 0.0);
        let out = sp.multiply(&e, |j| Complex64::new(-ks[j], 0.0));
        for (row, v) in out.into_iter().enumerate() {
            m[(row, col)] = v;
        }
    }
    // exact Hermitian symmetry
    (&m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// `B(z) = K + zP`.
pub fn generator_matrix(z: Complex64, grid: &Grid) -> CMatrix {
    let mut b = k_matrix(grid);
    for j in 0..grid.n {
        b[(j, j)] += z * grid.x(j).exp();
    }
    b
}

/// Cayley transform `T(z) = (B − i)(B + i)⁻¹` of `B = K + zP`; equivalently
/// `(A − 1)(A + 1)⁻¹` for the accretive `A = −iB`.
pub fn cayley_contraction(z: Complex64, grid: &Grid) -> Result<CMatrix, AxbError> {
    if z.im < 0.0 {
        return Err(AxbError::LowerHalfPlane);
    }
    cayley_of(&generator_matrix(z, grid))
}

fn cayley_of(b: &CMatrix) -> Result<CMatrix, AxbError> {
    let n = b.nrows();
    let id = CMatrix::identity(n, n);
    let plus = b + &id * Complex64::i();
    let minus = b - &id * Complex64::i();
    if linalg::condition_number(&plus) > 1e12 {
        return Err(AxbError::SingularResolvent);
    }
    // T = (B−i)(B+i)⁻¹ = ((B+i)⁻ᴴ (B−i)ᴴ)ᴴ
    let t = linalg::solve(&plus.adjoint(), &minus.adjoint()).map_err(|_| AxbError::SingularResolvent)?;
    Ok(t.adjoint())
}

/// Disk function `w ↦ φ(i(1+w)/(1−w))` for `φ` on the upper half-plane.
pub fn disk_from_half_plane(phi: impl Fn(Complex64) -> Complex64) -> impl Fn(Complex64) -> Complex64 {
    move |w| phi(Complex64::i() * (1.0 + w) / (1.0 - w))
}

/// `φ(rT)` through the spectral decomposition of `rT`.
pub fn hinfty_apply_r(phi: &dyn Fn(Complex64) -> Complex64, t: &CMatrix, r: f64) -> Result<CMatrix, AxbError> {
    let eig = Eigen::new(&(t * Complex64::new(r, 0.0)))?;
    let rho = eig.spectral_radius();
    if rho >= 1.0 - 1e-12 {
        return Err(AxbError::SpectrumOnCircle(rho));
    }
    Ok(eig.apply(phi))
}

/// `φ(T)` for a contraction with spectrum strictly inside the disk. The limit
/// `r → 1⁻` is attained at `r = 1` since the spectrum stays off the circle.
pub fn hinfty_apply(phi: &dyn Fn(Complex64) -> Complex64, t: &CMatrix) -> Result<CMatrix, AxbError> {
    hinfty_apply_r(phi, t, 1.0)
}

/// One evaluation point of [`split_f`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSample {
    pub z: Complex64,
    /// `t ≥ 0` part; absent in the lower half-plane.
    pub f_plus: Option<Complex64>,
    /// `t < 0` part, continued into the upper half-plane as `F − F₊`.
    pub f_minus: Complex64,
    /// `⟨η, (φĵₙ)(K+zP)ξ⟩`; on the real line an independent check of `F₊ + F₋`.
    pub total: Option<Complex64>,
}

/// Half-line transforms `∫_{t≥0} f_n(t) e^{iλt} dt` and `∫_{t≤0} …` of a
/// profile, each evaluated only where it converges.
struct HalfTransforms<'a> {
    prof: &'a Profile,
    zero: usize,
}

impl<'a> HalfTransforms<'a> {
    fn new(prof: &'a Profile) -> Self {
        let zero = (-prof.grid.t0 / prof.grid.dt).round() as usize;
        Self { prof, zero }
    }

    fn sum(&self, lam: Complex64, range: std::ops::Range<usize>, edge: usize) -> Complex64 {
        let dt = self.prof.grid.dt;
        let mut acc = Complex64::new(0.0, 0.0);
        for j in range {
            let w = if j == edge { 0.5 * dt } else { dt };
            acc += self.prof.values[j] * (Complex64::i() * lam * self.prof.grid.time(j)).exp() * w;
        }
        acc
    }

    fn plus(&self, lam: Complex64) -> Complex64 {
        self.sum(lam, self.zero..self.prof.grid.len, self.zero)
    }

    fn minus(&self, lam: Complex64) -> Complex64 {
        self.sum(lam, 0..self.zero + 1, self.zero)
    }
}

/// Splits `F(z) = ⟨η, φ_n(K+zP)ξ⟩` into the `t ≥ 0` and `t < 0` parts of the
/// profile integral, in the eigenbasis of the discretized `K + zP`.
///
/// Each part is computed directly where its time integral converges; across
/// the real line it is continued through `F = ⟨η, (φĵₙ)(K+zP)ξ⟩`, which needs
/// [`Multiplier::continuation`]. Intended for small grids (dense matrices).
pub fn split_f(
    phi: &dyn Multiplier,
    moll: &Mollifier,
    tgrid: &TimeGrid,
    zs: &[Complex64],
    xi: &GridState,
    eta: &GridState,
) -> Result<Vec<SplitSample>, AxbError> {
    if xi.grid != eta.grid {
        return Err(AxbError::GridMismatch);
    }
    let prof = fourier_profile(phi, moll, tgrid)?;
    let half = HalfTransforms::new(&prof);
    let xv = xi.as_vector();
    let ev = eta.as_vector();
    let h = xi.grid.h();
    let pair = |eig: &Eigen, f: &dyn Fn(Complex64) -> Complex64| ev.dotc(&eig.apply_to(f, &xv)) * h;
    let full = |lam: Complex64| -> Result<Complex64, AxbError> {
        let v = phi.continuation(lam).ok_or(AxbError::NoContinuation)?;
        Ok(v * mollifier_transform(moll, lam))
    };
    let mut out = Vec::with_capacity(zs.len());
    for &z in zs {
        let eig = Eigen::new(&generator_matrix(z, &xi.grid))?;
        let sample = if z.im == 0.0 {
            let f_plus = pair(&eig, &|l| half.plus(l));
            let f_minus = pair(&eig, &|l| half.minus(l));
            let total = pair(&eig, &|l| phi.boundary(l.re) * moll.fourier(l.re));
            SplitSample {
                z,
                f_plus: Some(f_plus),
                f_minus,
                total: Some(total),
            }
        } else {
            // continuation values are checked once per eigenvalue
            for &l in &eig.values {
                full(l)?;
            }
            let total = pair(&eig, &|l| full(l).unwrap_or_default());
            if z.im > 0.0 {
                let f_plus = pair(&eig, &|l| half.plus(l));
                SplitSample {
                    z,
                    f_plus: Some(f_plus),
                    f_minus: total - f_plus,
                    total: Some(total),
                }
            } else {
                SplitSample {
                    z,
                    f_plus: None,
                    f_minus: pair(&eig, &|l| half.minus(l)),
                    total: None,
                }
            }
        };
        out.push(sample);
    }
    Ok(out)
}

/// `ĵₙ(λ) = ∫ jₙ(t) e^{iλt} dt` for complex `λ`.
pub fn mollifier_transform(moll: &Mollifier, lam: Complex64) -> Complex64 {
    moll.quadrature()
        .map(|(t, w)| (Complex64::i() * lam * t).exp() * w)
        .sum()
}

/// `max |F₋| − min |F₋|` over the samples.
pub fn liouville_check(samples: &[SplitSample]) -> f64 {
    let mags: Vec<f64> = samples.iter().map(|s| s.f_minus.norm()).collect();
    let max = mags.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = mags.iter().cloned().fold(f64::INFINITY, f64::min);
    if mags.is_empty() {
        0.0
    } else {
        max - min
    }
}

/// `max_t (|⟨η, e^{it(K+zP)}ξ⟩| − ∫|η(x)||ξ(x−t)|dx)`.
pub fn convolution_bound_check(ts: &[f64], z: Complex64, xi: &GridState, eta: &GridState) -> Result<f64, AxbError> {
    if z.im <= 0.0 {
        return Err(AxbError::LowerHalfPlane);
    }
    let mut worst = f64::NEG_INFINITY;
    for &t in ts {
        let shifted = apply_translation(t, xi)?;
        let moved = apply_group_element(t, z, xi)?;
        let lhs = eta.inner(&moved).norm();
        let rhs: f64 = eta
            .values
            .iter()
            .zip(&shifted.values)
            .map(|(a, b)| a.norm() * b.norm())
            .sum::<f64>()
            * xi.grid.h();
        worst = worst.max(lhs - rhs);
    }
    Ok(worst)
}
