//! Symmetric inner functions on the upper half-plane.
//!
//! An [`InnerFunction`] is `φ(z) = ±e^{iaz} ∏ (z−p)/(z−p̄)` with a finite zero
//! multiset closed under `p ↦ −p̄`, so that `φ(−s) = conj φ(s)` on the real line.
//! Fourier convention throughout: `φ(s) = ∫ f(t) e^{ist} dt`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InnerError {
    #[error("evaluation point {0} lies in the lower half-plane")]
    DomainViolation(Complex64),
    #[error("sign must be +1 or -1, got {0}")]
    BadSign(i32),
    #[error("singular exponent must be finite and non-negative, got {0}")]
    BadExponent(f64),
    #[error("zero {0} is not in the open upper half-plane")]
    ZeroNotInUpperHalfPlane(Complex64),
    #[error("zero multiset is not closed under p -> -conj(p)")]
    NotSymmetric,
    #[error("mollifier index must be positive")]
    BadMollifier,
    #[error("time grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("malformed record: {0}")]
    Parse(String),
}

/// Unimodular boundary multiplier `s ↦ φ(s)` on the real line.
pub trait Multiplier: Send + Sync {
    fn boundary(&self, s: f64) -> Complex64;

    /// Resolution scales `(a, max |p|, min Im p)` when known.
    fn scales(&self) -> Option<(f64, f64, f64)> {
        None
    }

    /// Meromorphic continuation off the real line, when one is known.
    fn continuation(&self, _z: Complex64) -> Option<Complex64> {
        None
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InnerFunction {
    sign: i32,
    a: f64,
    zeros: Vec<Complex64>,
}

fn total_cmp(x: &Complex64, y: &Complex64) -> std::cmp::Ordering {
    x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im))
}

impl InnerFunction {
    pub fn new(sign: i32, a: f64, zeros: Vec<Complex64>) -> Result<Self, InnerError> {
        if sign != 1 && sign != -1 {
            return Err(InnerError::BadSign(sign));
        }
        if !(a.is_finite() && a >= 0.0) {
            return Err(InnerError::BadExponent(a));
        }
        for p in &zeros {
            if !(p.im > 0.0 && p.re.is_finite() && p.im.is_finite()) {
                return Err(InnerError::ZeroNotInUpperHalfPlane(*p));
            }
        }
        let mut sorted = zeros.clone();
        sorted.sort_by(total_cmp);
        // negation is exact in floating point, so closure can be tested by equality
        let mut mirrored: Vec<Complex64> = zeros.iter().map(|p| Complex64::new(-p.re, p.im)).collect();
        mirrored.sort_by(total_cmp);
        let same = sorted
            .iter()
            .zip(&mirrored)
            .all(|(x, y)| x.re == y.re && x.im == y.im);
        if !same {
            return Err(InnerError::NotSymmetric);
        }
        Ok(Self { sign, a, zeros: sorted })
    }

    /// Bypasses every invariant. Only meant for negative tests.
    pub fn unchecked(sign: i32, a: f64, zeros: Vec<Complex64>) -> Self {
        Self { sign, a, zeros }
    }

    pub fn identity() -> Self {
        Self::unchecked(1, 0.0, Vec::new())
    }

    /// `s ↦ e^{ias}`.
    pub fn exponential(a: f64) -> Result<Self, InnerError> {
        Self::new(1, a, Vec::new())
    }

    /// Blaschke factor at `p` together with its mirror `−p̄` (a single factor
    /// when `p` is purely imaginary).
    pub fn blaschke(p: Complex64) -> Result<Self, InnerError> {
        if p.re == 0.0 {
            Self::new(1, 0.0, vec![Complex64::new(0.0, p.im)])
        } else {
            Self::new(1, 0.0, vec![p, Complex64::new(-p.re, p.im)])
        }
    }

    /// Random symmetric inner function with at most `max_zeros` zeros, all
    /// with `Im p ∈ [1.5, 3]`, and exponent `a ≤ max_a`. Never the constant.
    pub fn random(rng: &mut impl Rng, max_zeros: usize, max_a: f64) -> Self {
        let count = rng.gen_range(0..=max_zeros);
        let mut zeros = Vec::with_capacity(count);
        while zeros.len() < count {
            let im = rng.gen_range(1.5..3.0);
            if count - zeros.len() >= 2 && rng.gen_bool(0.6) {
                let re = rng.gen_range(0.2..2.0);
                zeros.push(Complex64::new(re, im));
                zeros.push(Complex64::new(-re, im));
            } else {
                zeros.push(Complex64::new(0.0, im));
            }
        }
        let mut a = rng.gen_range(0.0..=max_a);
        if zeros.is_empty() && a < 0.1 {
            a += 0.5f64.min(max_a);
        }
        let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
        Self::new(sign, a, zeros).expect("mirrored zeros are symmetric")
    }

    pub fn sign(&self) -> i32 {
        self.sign
    }

    pub fn exponent(&self) -> f64 {
        self.a
    }

    pub fn zeros(&self) -> &[Complex64] {
        &self.zeros
    }

    /// Formula evaluation without the domain check; finite away from `p̄`.
    pub fn eval_formula(&self, z: Complex64) -> Complex64 {
        let mut acc = (Complex64::i() * self.a * z).exp() * self.sign as f64;
        for p in &self.zeros {
            acc *= (z - p) / (z - p.conj());
        }
        acc
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64, InnerError> {
        if z.im < 0.0 {
            return Err(InnerError::DomainViolation(z));
        }
        Ok(self.eval_formula(z))
    }

    pub fn multiply(&self, other: &Self) -> Self {
        let mut zeros = self.zeros.clone();
        zeros.extend_from_slice(&other.zeros);
        zeros.sort_by(total_cmp);
        Self {
            sign: self.sign * other.sign,
            a: self.a + other.a,
            zeros,
        }
    }

    /// `max |φ(−s) − conj φ(s)|` over the grid.
    pub fn symmetry_residual(&self, grid: &[f64]) -> f64 {
        grid.iter()
            .map(|&s| (self.eval_formula((-s).into()) - self.eval_formula(s.into()).conj()).norm())
            .fold(0.0, f64::max)
    }

    /// `max ||φ(s)| − 1|` over the grid.
    pub fn modulus_residual(&self, grid: &[f64]) -> f64 {
        grid.iter()
            .map(|&s| (self.eval_formula(s.into()).norm() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn to_record(&self) -> InnerRecord {
        InnerRecord {
            sign: self.sign,
            a: self.a,
            zeros: self.zeros.iter().map(|p| [p.re, p.im]).collect(),
        }
    }

    pub fn from_record(r: &InnerRecord) -> Result<Self, InnerError> {
        Self::new(r.sign, r.a, r.zeros.iter().map(|z| Complex64::new(z[0], z[1])).collect())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_record()).expect("record serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, InnerError> {
        let r: InnerRecord = serde_json::from_str(s).map_err(|e| InnerError::Parse(e.to_string()))?;
        Self::from_record(&r)
    }
}

impl Multiplier for InnerFunction {
    fn boundary(&self, s: f64) -> Complex64 {
        self.eval_formula(s.into())
    }

    fn scales(&self) -> Option<(f64, f64, f64)> {
        let max_abs = self.zeros.iter().map(|p| p.norm()).fold(0.0, f64::max);
        let min_im = self.zeros.iter().map(|p| p.im).fold(f64::INFINITY, f64::min);
        Some((self.a, max_abs, min_im))
    }

    fn continuation(&self, z: Complex64) -> Option<Complex64> {
        Some(self.eval_formula(z))
    }
}

/// Serialized form `{sign, a, zeros: [[re, im], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InnerRecord {
    pub sign: i32,
    pub a: f64,
    pub zeros: Vec<[f64; 2]>,
}

/// Arbitrary boundary function, used for controls that are not inner.
#[derive(Clone)]
pub struct RawMultiplier {
    f: Arc<dyn Fn(f64) -> Complex64 + Send + Sync>,
    g: Option<Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>>,
}

impl RawMultiplier {
    pub fn from_fn(f: impl Fn(f64) -> Complex64 + Send + Sync + 'static) -> Self {
        Self { f: Arc::new(f), g: None }
    }

    /// Boundary values together with a continuation `g` into the plane.
    pub fn with_continuation(
        f: impl Fn(f64) -> Complex64 + Send + Sync + 'static,
        g: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            f: Arc::new(f),
            g: Some(Arc::new(g)),
        }
    }

    /// `s ↦ conj φ(s)`, analytic in the lower half-plane instead of the upper.
    pub fn reflected(phi: &InnerFunction) -> Self {
        let (p1, p2) = (phi.clone(), phi.clone());
        Self::with_continuation(
            move |s| p1.eval_formula(s.into()).conj(),
            move |z| p2.eval_formula(z.conj()).conj(),
        )
    }
}

impl fmt::Debug for RawMultiplier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("RawMultiplier")
    }
}

impl Multiplier for RawMultiplier {
    fn boundary(&self, s: f64) -> Complex64 {
        (self.f)(s)
    }

    fn continuation(&self, z: Complex64) -> Option<Complex64> {
        self.g.as_ref().map(|g| g(z))
    }
}

const MOLLIFIER_NODES: usize = 1025;

fn bump(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        (-1.0 / (x * (1.0 - x))).exp()
    }
}

/// `jₙ(t) = n ψ(nt)` with `ψ ∝ exp(−1/(x(1−x)))` on `(0, 1)`.
#[derive(Debug, Clone)]
pub struct Mollifier {
    n: usize,
    norm: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

fn bump_integral(nodes: usize) -> f64 {
    let h = 1.0 / (nodes - 1) as f64;
    (0..nodes).map(|j| bump(j as f64 * h)).sum::<f64>() * h
}

impl Mollifier {
    pub fn new(n: usize) -> Result<Self, InnerError> {
        if n == 0 {
            return Err(InnerError::BadMollifier);
        }
        let norm = bump_integral(MOLLIFIER_NODES);
        let h = 1.0 / (MOLLIFIER_NODES - 1) as f64;
        let nodes: Vec<f64> = (0..MOLLIFIER_NODES).map(|j| j as f64 * h).collect();
        let weights = nodes.iter().map(|&x| bump(x) * h / norm).collect();
        Ok(Self {
            n,
            norm,
            nodes,
            weights,
        })
    }

    pub fn index(&self) -> usize {
        self.n
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.n as f64;
        n * bump(n * t) / self.norm
    }

    /// Quadrature value of `∫ jₙ`.
    pub fn integral(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `ĵₙ(ω) = ∫ jₙ(t) e^{iωt} dt`.
    pub fn fourier(&self, omega: f64) -> Complex64 {
        let w = omega / self.n as f64;
        let (mut re, mut im) = (0.0, 0.0);
        for (&x, &c) in self.nodes.iter().zip(&self.weights) {
            if c != 0.0 {
                let (s, co) = (w * x).sin_cos();
                re += c * co;
                im += c * s;
            }
        }
        Complex64::new(re, im)
    }

    /// Nodes and weights of the underlying quadrature, mapped to `[0, 1/n]`.
    pub fn quadrature(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let n = self.n as f64;
        self.nodes.iter().zip(&self.weights).map(move |(&x, &w)| (x / n, w))
    }
}

/// Uniform time grid `t_j = t0 + j·dt`, `j < len`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t0: f64,
    pub dt: f64,
    pub len: usize,
}

impl TimeGrid {
    /// Default grid for index `n`: `dt = 1/(16n)` starting at `t = −2`.
    pub fn for_mollifier(n: usize, len: usize) -> Self {
        Self {
            t0: -2.0,
            dt: 1.0 / (16.0 * n as f64),
            len,
        }
    }

    pub fn end(&self) -> f64 {
        self.t0 + self.len as f64 * self.dt
    }

    pub fn time(&self, j: usize) -> f64 {
        self.t0 + j as f64 * self.dt
    }
}

/// Samples of the mollified profile `f_n` on a [`TimeGrid`].
#[derive(Debug, Clone)]
pub struct Profile {
    pub grid: TimeGrid,
    pub values: Vec<Complex64>,
}

impl Profile {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.grid.len).map(|j| self.grid.time(j))
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }
}

fn check_resolution(scales: Option<(f64, f64, f64)>, moll: &Mollifier, grid: &TimeGrid) -> Result<(), InnerError> {
    if !grid.len.is_power_of_two() || grid.len < 256 {
        return Err(InnerError::GridTooCoarse(format!("{} points", grid.len)));
    }
    if moll.n as f64 * grid.dt > 0.125 {
        return Err(InnerError::GridTooCoarse("step does not resolve the mollifier".into()));
    }
    if grid.t0 >= 0.0 {
        return Err(InnerError::GridTooCoarse("grid has no negative times".into()));
    }
    if let Some((a, max_abs, min_im)) = scales {
        if grid.dt * max_abs > 0.25 {
            return Err(InnerError::GridTooCoarse("step does not resolve the zeros".into()));
        }
        let tail = if min_im.is_finite() { 10.0 / min_im } else { 0.0 };
        if grid.end() < a + 1.0 / moll.n as f64 + tail {
            return Err(InnerError::GridTooCoarse("window too short for the profile tail".into()));
        }
    }
    Ok(())
}

/// Inverse Fourier transform of `ĵₙ·φ`, i.e. `f_n = jₙ * f`.
pub fn fourier_profile(phi: &dyn Multiplier, moll: &Mollifier, grid: &TimeGrid) -> Result<Profile, InnerError> {
    check_resolution(phi.scales(), moll, grid)?;
    let n = grid.len;
    let period = n as f64 * grid.dt;
    let mut buf: Vec<Complex64> = (0..n)
        .map(|k| {
            if k == n / 2 {
                return Complex64::new(0.0, 0.0);
            }
            let kk = if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
            let w = 2.0 * std::f64::consts::PI * kk / period;
            phi.boundary(w) * moll.fourier(w) * Complex64::from_polar(1.0, -w * grid.t0)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    for v in &mut buf {
        *v /= period;
    }
    Ok(Profile {
        grid: *grid,
        values: buf,
    })
}

/// L¹ mass of the profile on `t < 0` relative to its total L¹ mass.
pub fn paley_wiener_residual(phi: &dyn Multiplier, moll: &Mollifier, grid: &TimeGrid) -> Result<f64, InnerError> {
    let prof = fourier_profile(phi, moll, grid)?;
    let (mut neg, mut tot) = (0.0, 0.0);
    for (t, v) in prof.times().zip(&prof.values) {
        let m = v.norm();
        tot += m;
        if t < 0.0 {
            neg += m;
        }
    }
    Ok(if tot > 0.0 { neg / tot } else { 0.0 })
}
