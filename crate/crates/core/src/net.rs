//! One-particle assembly of the boundary net on the hyperboloid.
//!
//! A double cone `O = I_u × I_v` gets two generator families: `φ(K)` applied
//! to the spline basis of `H(I_u)`, and the spline basis of `H(R²/I_v)`.
//! Algebras are never formed; commutation is read off the symplectic form
//! `Im⟨·,·⟩` of the generators, which is exact for the quasi-free Weyl net.

use std::fmt;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::Rng;
use thiserror::Error;

use crate::current::{
    self, bisognano_wichmann_residual, kms_residual, log_interval_splines, CurrentError, CurrentSpace, Curve, Picture,
    TestFunction, ThermalConfig, DEFAULT_GRID, LOG_RANGE,
};
use crate::geometry::{self, net_index, DoubleCone, GeometryError, Interval, Order, Rational};
use crate::inner::{InnerError, InnerFunction, Multiplier};
use crate::linalg::{self, CMatrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetError {
    #[error("double cones are not spacelike separated")]
    NotSpacelike,
    #[error("intervals are not in forward order")]
    NotOrdered,
    #[error("interval {0} is unbounded or not strictly positive")]
    Unbounded(String),
    #[error("boost by {0} moves the cone off the grid")]
    GridOverflow(f64),
    #[error("cone radius {cone} differs from the model radius {model}")]
    RadiusMismatch { cone: f64, model: f64 },
    #[error("point u = {0} is outside the chiral domain")]
    DomainViolation(f64),
    #[error("u = {0} is too close to the boundary to evaluate")]
    NearBoundary(f64),
    #[error("model: {0}")]
    Config(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Current(#[from] CurrentError),
    #[error(transparent)]
    Inner(#[from] InnerError),
}

/// Which vacuum the one-particle space carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    /// Restriction to the half-line; boosts act thermally.
    Kms,
    /// Log-coordinate picture with positive boost generator.
    Ground,
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Representation::Kms => "kms",
            Representation::Ground => "ground",
        })
    }
}

/// Net generated from the `k`-th derivative current and the unitary `φ(K)`.
#[derive(Debug, Clone)]
pub struct NetModel {
    k: u32,
    phi: InnerFunction,
    phi_text: String,
    r: f64,
    representation: Representation,
    m: usize,
    grid: usize,
    beta: f64,
    space: CurrentSpace,
}

impl NetModel {
    pub fn new(
        k: u32,
        phi_text: &str,
        r: f64,
        representation: Representation,
        m: usize,
        grid: usize,
    ) -> Result<Self, NetError> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(NetError::Config(format!("R = {r}")));
        }
        if m == 0 {
            return Err(NetError::Config("m = 0".into()));
        }
        let phi = parse_phi(phi_text)?;
        let picture = match representation {
            Representation::Kms => Picture::Thermal,
            Representation::Ground => Picture::Ground,
        };
        let space = CurrentSpace::with_picture(k, grid, picture)?;
        Ok(Self {
            k,
            phi,
            phi_text: phi_text.split_whitespace().collect(),
            r,
            representation,
            m,
            grid,
            beta: 2.0 * std::f64::consts::PI,
            space,
        })
    }

    /// `R = 1`, `k = 0`, `m = 32`, default grid, KMS representation.
    pub fn with_phi(phi_text: &str) -> Result<Self, NetError> {
        Self::new(0, phi_text, 1.0, Representation::Kms, 32, DEFAULT_GRID)
    }

    /// Inverse temperature used for the KMS evidence.
    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_m(mut self, m: usize) -> Self {
        self.m = m;
        self
    }

    /// Same model on an ω-grid of `grid` points.
    pub fn with_grid(self, grid: usize) -> Result<Self, NetError> {
        let beta = self.beta;
        Ok(Self::new(self.k, &self.phi_text, self.r, self.representation, self.m, grid)?.with_beta(beta))
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn phi(&self) -> &InnerFunction {
        &self.phi
    }

    pub fn radius(&self) -> f64 {
        self.r
    }

    pub fn representation(&self) -> Representation {
        self.representation
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn space(&self) -> &CurrentSpace {
        &self.space
    }

    /// Line-oriented `key = value` text; `#` starts a comment.
    pub fn from_config(text: &str) -> Result<Self, NetError> {
        let mut k = 0;
        let mut phi = String::from("1");
        let mut r = 1.0;
        let mut rep = Representation::Kms;
        let mut m = 32;
        let mut grid = DEFAULT_GRID;
        let mut beta = None;
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| NetError::Config(format!("line {}: expected key = value", no + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |what: &str| NetError::Config(format!("line {}: bad {what} '{value}'", no + 1));
            match key {
                "k" => k = value.parse().map_err(|_| bad("k"))?,
                "phi" => phi = value.to_string(),
                "R" | "r" => r = value.parse().map_err(|_| bad("R"))?,
                "representation" => {
                    rep = match value {
                        "kms" | "KMS" => Representation::Kms,
                        "ground" => Representation::Ground,
                        _ => return Err(bad("representation")),
                    }
                }
                "m" => m = value.parse().map_err(|_| bad("m"))?,
                "grid" => grid = value.parse().map_err(|_| bad("grid"))?,
                "beta" => beta = Some(value.parse().map_err(|_| bad("beta"))?),
                _ => return Err(NetError::Config(format!("line {}: unknown key '{key}'", no + 1))),
            }
        }
        let model = Self::new(k, &phi, r, rep, m, grid)?;
        Ok(match beta {
            Some(b) => model.with_beta(b),
            None => model,
        })
    }

    /// Canonical form of the model; parses back to the same model.
    pub fn to_config(&self) -> String {
        format!(
            "k = {}\nphi = {}\nR = {:?}\nrepresentation = {}\nm = {}\ngrid = {}\nbeta = {:?}\n",
            self.k, self.phi_text, self.r, self.representation, self.m, self.grid, self.beta
        )
    }
}

/// Parses `φ` as a `*`-separated product of `1`, `-1`, `exp(a)` and
/// `blaschke(re, im)`; a Blaschke zero off the imaginary axis brings its mirror.
pub fn parse_phi(text: &str) -> Result<InnerFunction, NetError> {
    let compact: String = text.split_whitespace().collect();
    if compact.is_empty() {
        return Err(NetError::Config("empty phi".into()));
    }
    let bad = || NetError::Config(format!("bad phi '{text}'"));
    let mut acc = InnerFunction::identity();
    for factor in compact.split('*') {
        let next = match factor {
            "1" => InnerFunction::identity(),
            "-1" => InnerFunction::new(-1, 0.0, Vec::new())?,
            _ => {
                let (name, rest) = factor.split_once('(').ok_or_else(bad)?;
                let args: Vec<f64> = rest
                    .strip_suffix(')')
                    .ok_or_else(bad)?
                    .split(',')
                    .map(|a| a.parse::<f64>().map_err(|_| bad()))
                    .collect::<Result<_, _>>()?;
                match (name, args.as_slice()) {
                    ("exp", [a]) => InnerFunction::exponential(*a)?,
                    ("blaschke", [re, im]) => InnerFunction::blaschke(Complex64::new(*re, *im))?,
                    _ => return Err(bad()),
                }
            }
        };
        acc = acc.multiply(&next);
    }
    Ok(acc)
}

/// Generators of the one-particle net at a double cone.
#[derive(Debug, Clone)]
pub struct ConeDescriptor {
    pub cone: DoubleCone<Rational>,
    /// `ln I_u`.
    pub log_b: (f64, f64),
    /// `ln(R²/I_v)`.
    pub log_a: (f64, f64),
    /// Columns `φ(K) b_j` on the ω-grid.
    pub generators_b: CMatrix,
    /// Columns `a_j` on the ω-grid.
    pub generators_a: CMatrix,
    pub functions_b: Vec<TestFunction>,
    pub functions_a: Vec<TestFunction>,
}

impl ConeDescriptor {
    pub fn generator_count(&self) -> (usize, usize) {
        (self.generators_b.ncols(), self.generators_a.ncols())
    }
}

fn log_bounds(i: &Interval<Rational>) -> Result<(f64, f64), NetError> {
    let describe = || format!("{i:?}");
    let lo = i.lo().finite().and_then(|x| x.to_f64()).ok_or_else(|| NetError::Unbounded(describe()))?;
    let hi = i.hi().finite().and_then(|x| x.to_f64()).ok_or_else(|| NetError::Unbounded(describe()))?;
    if !(lo > 0.0 && hi.is_finite()) {
        return Err(NetError::Unbounded(describe()));
    }
    Ok((lo.ln(), hi.ln()))
}

fn check_range(log: (f64, f64), s: f64) -> Result<(), NetError> {
    if log.0 < -LOG_RANGE || log.1 > LOG_RANGE {
        Err(NetError::GridOverflow(s))
    } else {
        Ok(())
    }
}

fn generators(model: &NetModel, log_b: (f64, f64), log_a: (f64, f64)) -> Result<ConeDescriptorParts, NetError> {
    let space = &model.space;
    let (fb, mut gb) = log_interval_splines(space, log_b.0, log_b.1, model.m)?;
    let (fa, ga) = log_interval_splines(space, log_a.0, log_a.1, model.m)?;
    for mut col in gb.column_iter_mut() {
        for (x, w) in col.iter_mut().zip(space.omega()) {
            *x *= model.phi.boundary(*w);
        }
    }
    Ok((gb, ga, fb, fa))
}

type ConeDescriptorParts = (CMatrix, CMatrix, Vec<TestFunction>, Vec<TestFunction>);

/// Generators of `V𝒜₀(I_u)V* ∨ 𝒜₀(R²/I_v)` at one-particle level.
pub fn build_cone(model: &NetModel, cone: &DoubleCone<Rational>) -> Result<ConeDescriptor, NetError> {
    let rc = cone.radius().to_f64().unwrap_or(f64::NAN);
    if (rc - model.r).abs() > 1e-12 * model.r {
        return Err(NetError::RadiusMismatch { cone: rc, model: model.r });
    }
    let (ib, ia) = net_index(cone)?;
    let log_b = log_bounds(&ib)?;
    let log_a = log_bounds(&ia)?;
    check_range(log_b, 0.0)?;
    check_range(log_a, 0.0)?;
    let (generators_b, generators_a, functions_b, functions_a) = generators(model, log_b, log_a)?;
    Ok(ConeDescriptor {
        cone: cone.clone(),
        log_b,
        log_a,
        generators_b,
        generators_a,
        functions_b,
        functions_a,
    })
}

/// `max |Im⟨x_i, y_j⟩| / (‖x_i‖‖y_j‖)` over all column pairs.
pub fn max_symplectic(space: &CurrentSpace, x: &CMatrix, y: &CMatrix) -> f64 {
    let wx = weighted_columns(space, x);
    let wy = weighted_columns(space, y);
    let p = wx.adjoint() * &wy;
    let nx: Vec<f64> = wx.column_iter().map(|c| c.norm()).collect();
    let ny: Vec<f64> = wy.column_iter().map(|c| c.norm()).collect();
    let mut worst: f64 = 0.0;
    for j in 0..p.ncols() {
        for i in 0..p.nrows() {
            worst = worst.max(p[(i, j)].im.abs() / (nx[i] * ny[j]));
        }
    }
    worst
}

fn weighted_columns(space: &CurrentSpace, x: &CMatrix) -> CMatrix {
    let mut out = x.clone();
    for mut col in out.column_iter_mut() {
        for (z, w) in col.iter_mut().zip(space.weights()) {
            *z *= w.sqrt();
        }
    }
    out
}

/// Symplectic pairings of the four generator families, ordered
/// `[B₁B₂, B₁A₂, A₁B₂, A₁A₂]`.
pub fn cross_pairings(model: &NetModel, c1: &ConeDescriptor, c2: &ConeDescriptor) -> [f64; 4] {
    let s = &model.space;
    [
        max_symplectic(s, &c1.generators_b, &c2.generators_b),
        max_symplectic(s, &c1.generators_b, &c2.generators_a),
        max_symplectic(s, &c1.generators_a, &c2.generators_b),
        max_symplectic(s, &c1.generators_a, &c2.generators_a),
    ]
}

/// Largest normalized symplectic pairing between the generators of two
/// spacelike cones.
pub fn verify_locality(model: &NetModel, o1: &DoubleCone<Rational>, o2: &DoubleCone<Rational>) -> Result<f64, NetError> {
    if !geometry::cones_spacelike(o1, o2) {
        return Err(NetError::NotSpacelike);
    }
    let c1 = build_cone(model, o1)?;
    let c2 = build_cone(model, o2)?;
    Ok(cross_pairings(model, &c1, &c2).into_iter().fold(0.0, f64::max))
}

/// Exact rational close to `x`.
pub fn rational(x: f64) -> Rational {
    BigRational::from_float(x).expect("finite value")
}

/// `Λ(s)O` with the boost factor rounded to the nearest double.
pub fn boost_cone(cone: &DoubleCone<Rational>, s: f64) -> DoubleCone<Rational> {
    cone.boost_by_factor(&rational(s.exp()))
}

/// `max_j ‖g_j(Λ(s)O) − D(s) g_j(O)‖ / ‖g_j(O)‖` over both generator families.
pub fn verify_covariance(model: &NetModel, s: f64, cone: &DoubleCone<Rational>) -> Result<f64, NetError> {
    let base = build_cone(model, cone)?;
    let boosted_cone = boost_cone(cone, s);
    let (ib, ia) = net_index(&boosted_cone)?;
    check_range(log_bounds(&ib)?, s)?;
    check_range(log_bounds(&ia)?, s)?;
    let boosted = build_cone(model, &boosted_cone)?;
    let space = &model.space;
    let mut worst: f64 = 0.0;
    for (x, y) in [
        (&base.generators_b, &boosted.generators_b),
        (&base.generators_a, &boosted.generators_a),
    ] {
        for (cx, cy) in x.column_iter().zip(y.column_iter()) {
            let cx = cx.into_owned();
            let moved = space.dilation(s, &cx);
            worst = worst.max(space.norm(&(cy.into_owned() - moved)) / space.norm(&cx));
        }
    }
    Ok(worst)
}

/// Hyperboloid cone whose log image is the half-space diamond `I × J`.
pub fn exp_cone(i: &Interval<f64>, j: &Interval<f64>, r: f64) -> Result<DoubleCone<Rational>, NetError> {
    if geometry::forward_order(j, i) != Order::After {
        return Err(NetError::NotOrdered);
    }
    let (il, ih) = finite_bounds(i)?;
    let (jl, jh) = finite_bounds(j)?;
    let r2 = r * r;
    let iu = Interval::finite(rational(il.exp()), rational(ih.exp()))?;
    let iv = Interval::finite(rational(r2 * (-jh).exp()), rational(r2 * (-jl).exp()))?;
    Ok(DoubleCone::new(iu, iv, rational(r))?)
}

fn finite_bounds(i: &Interval<f64>) -> Result<(f64, f64), NetError> {
    match (i.lo().finite(), i.hi().finite()) {
        (Some(a), Some(b)) => Ok((*a, *b)),
        _ => Err(NetError::Unbounded(format!("{i:?}"))),
    }
}

/// Half-space net `ℬ(I) ∨ 𝒜(J)` built directly in log coordinates.
pub fn halfspace_view(model: &NetModel, i: &Interval<f64>, j: &Interval<f64>) -> Result<ConeDescriptor, NetError> {
    let cone = exp_cone(i, j, model.r)?;
    let log_b = finite_bounds(i)?;
    let log_a = finite_bounds(j)?;
    check_range(log_b, 0.0)?;
    check_range(log_a, 0.0)?;
    let (generators_b, generators_a, functions_b, functions_a) = generators(model, log_b, log_a)?;
    Ok(ConeDescriptor {
        cone,
        log_b,
        log_a,
        generators_b,
        generators_a,
        functions_b,
        functions_a,
    })
}

/// Relative generator-wise distance between two descriptors.
pub fn descriptor_distance(model: &NetModel, x: &ConeDescriptor, y: &ConeDescriptor) -> f64 {
    let space = &model.space;
    let mut worst: f64 = 0.0;
    for (a, b) in [(&x.generators_b, &y.generators_b), (&x.generators_a, &y.generators_a)] {
        for (ca, cb) in a.column_iter().zip(b.column_iter()) {
            let ca = ca.into_owned();
            worst = worst.max(space.norm(&(ca.clone() - cb)) / space.norm(&ca));
        }
    }
    worst
}

/// Distance between the half-space view and `build_cone` of its exp image.
pub fn two_path_residual(model: &NetModel, i: &Interval<f64>, j: &Interval<f64>) -> Result<f64, NetError> {
    let direct = halfspace_view(model, i, j)?;
    let via = build_cone(model, &exp_cone(i, j, model.r)?)?;
    Ok(descriptor_distance(model, &direct, &via))
}

/// Outcome of [`classify_state`].
#[derive(Debug, Clone, PartialEq)]
pub enum StateClass {
    Kms { beta: f64 },
    Ground,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Evidence {
    Kms { bw: Curve, kms: Curve },
    Ground { min_eigenvalue: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub class: StateClass,
    pub evidence: Evidence,
    pub pass: bool,
}

/// Sizes, times and tolerances of [`classify_state`].
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifyConfig {
    pub ms: Vec<usize>,
    pub ts: Vec<f64>,
    pub kms_tol: f64,
    /// Allowed relative increase between consecutive curve points.
    pub noise: f64,
    pub ground_tol: f64,
    pub thermal: ThermalConfig,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self {
            ms: vec![8, 12, 16, 24],
            ts: vec![0.1, 0.2],
            kms_tol: 0.05,
            noise: 0.1,
            ground_tol: 1e-6,
            thermal: ThermalConfig::default(),
        }
    }
}

/// Smallest eigenvalue of `K` compressed to the `m`-spline span of
/// `y ∈ (−span/2, span/2)`, in the metric of the space. The span is
/// orthonormalized by a thin QR of the weighted samples, which stays accurate
/// where the Gram matrix itself is too ill-conditioned to invert.
pub fn compressed_generator_min_eigenvalue(space: &CurrentSpace, m: usize, span: f64) -> Result<f64, NetError> {
    let (_, samples) = log_interval_splines(space, -span / 2.0, span / 2.0, m)?;
    let q = weighted_columns(space, &samples).qr().q();
    let kq = CMatrix::from_fn(q.nrows(), q.ncols(), |i, j| q[(i, j)] * space.omega()[i]);
    Ok(linalg::hermitian_eigenvalues(&(q.adjoint() * kq))[0])
}

/// KMS or ground tag with the numerical evidence for it.
pub fn classify_state(model: &NetModel, cfg: &ClassifyConfig) -> Result<Classification, NetError> {
    match model.representation {
        Representation::Kms => {
            let space = &model.space;
            let bw = current::curve(&cfg.ms, |m| {
                Ok(bisognano_wichmann_residual(space, m, &cfg.ts, model.beta, &cfg.thermal)?
                    .into_iter()
                    .fold(0.0, f64::max))
            })?;
            let kms = current::curve(&cfg.ms, |m| kms_residual(space, m, &cfg.ts, model.beta, &cfg.thermal))?;
            let pass = [&bw, &kms]
                .iter()
                .all(|c| c.last() < cfg.kms_tol && c.is_decreasing(cfg.noise, 0.0));
            Ok(Classification {
                class: StateClass::Kms { beta: model.beta },
                evidence: Evidence::Kms { bw, kms },
                pass,
            })
        }
        Representation::Ground => {
            let min_eigenvalue = compressed_generator_min_eigenvalue(&model.space, model.m, cfg.thermal.span)?;
            Ok(Classification {
                class: StateClass::Ground,
                evidence: Evidence::Ground { min_eigenvalue },
                pass: min_eigenvalue >= -cfg.ground_tol,
            })
        }
    }
}

/// Random cone with log intervals `A = ln(R²/I_v)` and `B = ln I_u` given
/// directly in log coordinates.
pub fn cone_from_logs(log_b: (f64, f64), log_a: (f64, f64), r: f64) -> Result<DoubleCone<Rational>, NetError> {
    let i = Interval::finite(log_b.0, log_b.1)?;
    let j = Interval::finite(log_a.0, log_a.1)?;
    exp_cone(&i, &j, r)
}

/// Lengths and gaps, in log units, of randomly placed cone intervals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Placement {
    pub length: (f64, f64),
    pub gap: (f64, f64),
    /// All intervals stay inside `(−reach, reach)`.
    pub reach: f64,
}

impl Default for Placement {
    fn default() -> Self {
        Self {
            length: (7.0, 9.0),
            gap: (0.05, 1.0),
            reach: 29.0,
        }
    }
}

fn consecutive(rng: &mut impl Rng, p: &Placement, count: usize) -> Vec<(f64, f64)> {
    let lens: Vec<f64> = (0..count).map(|_| rng.gen_range(p.length.0..p.length.1)).collect();
    let gaps: Vec<f64> = (1..count).map(|_| rng.gen_range(p.gap.0..p.gap.1)).collect();
    let total: f64 = lens.iter().sum::<f64>() + gaps.iter().sum::<f64>();
    let mut x = rng.gen_range(-p.reach..(p.reach - total).max(-p.reach + 1e-9));
    let mut out = Vec::with_capacity(count);
    for (n, len) in lens.iter().enumerate() {
        out.push((x, x + len));
        x += len + gaps.get(n).copied().unwrap_or(0.0);
    }
    out
}

/// Spacelike pair: in log coordinates `A₂ < A₁ < B₁ < B₂`.
pub fn random_spacelike_pair(
    rng: &mut impl Rng,
    r: f64,
    p: &Placement,
) -> Result<(DoubleCone<Rational>, DoubleCone<Rational>), NetError> {
    let iv = consecutive(rng, p, 4);
    let (a2, a1, b1, b2) = (iv[0], iv[1], iv[2], iv[3]);
    Ok((cone_from_logs(b1, a1, r)?, cone_from_logs(b2, a2, r)?))
}

/// Timelike pair: in log coordinates `A₁ < B₁ < A₂ < B₂`, so `A₂` lies after `B₁`.
pub fn random_timelike_pair(
    rng: &mut impl Rng,
    r: f64,
    p: &Placement,
) -> Result<(DoubleCone<Rational>, DoubleCone<Rational>), NetError> {
    let iv = consecutive(rng, p, 4);
    let (a1, b1, a2, b2) = (iv[0], iv[1], iv[2], iv[3]);
    Ok((cone_from_logs(b1, a1, r)?, cone_from_logs(b2, a2, r)?))
}

/// `(T₀₀, T₀₁) = ((1/u)T(u) − vT(−1/v), (1/u)T(u) + vT(−1/v))`.
pub fn stress_tensor_components(t: impl Fn(f64) -> f64, u: f64, v: f64) -> (f64, f64) {
    let left = t(u) / u;
    let right = v * t(-1.0 / v);
    (left - right, left + right)
}

/// Which side of the boundary a chiral density lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `T_L` on `u > 0`.
    Left,
    /// `T_R` on `w < 0`.
    Right,
}

/// Below this `u` the reflection is reported instead of evaluated.
pub const BOUNDARY_EDGE: f64 = 1e-8;

/// `T(u) = u T_L(u) = −(1/u) T_R(−1/u)` for `u > 0`.
pub fn boundary_reflection(side: Side, density: impl Fn(f64) -> f64, u: f64) -> Result<f64, NetError> {
    if !(u > 0.0) || !u.is_finite() {
        return Err(NetError::DomainViolation(u));
    }
    if u < BOUNDARY_EDGE {
        return Err(NetError::NearBoundary(u));
    }
    Ok(match side {
        Side::Left => u * density(u),
        Side::Right => -density(-1.0 / u) / u,
    })
}

/// Inverse of [`boundary_reflection`]: `T_L(x) = T(x)/x` for `x > 0`, and
/// `T_R(w) = T(−1/w)/w` for `w < 0`.
pub fn chiral_density(side: Side, t: impl Fn(f64) -> f64, x: f64) -> Result<f64, NetError> {
    match side {
        Side::Left if x > 0.0 => Ok(t(x) / x),
        Side::Right if x < 0.0 => Ok(t(-1.0 / x) / x),
        _ => Err(NetError::DomainViolation(x)),
    }
}

/// Energy flux `u T_L(u) + (1/u) T_R(−1/u)` across the boundary `uv = 1`.
pub fn boundary_flux(tl: impl Fn(f64) -> f64, tr: impl Fn(f64) -> f64, u: f64) -> f64 {
    u * tl(u) + tr(-1.0 / u) / u
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use crate::geometry::rat;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn model(phi: &str) -> NetModel {
        NetModel::with_phi(phi).unwrap()
    }

    fn cone(u: (f64, f64), v: (f64, f64)) -> DoubleCone<Rational> {
        DoubleCone::new(
            Interval::finite(rational(u.0), rational(u.1)).unwrap(),
            Interval::finite(rational(v.0), rational(v.1)).unwrap(),
            rat(1, 1),
        )
        .unwrap()
    }

    #[test]
    fn parses_phi_products() {
        let p = parse_phi("blaschke(0, 1) * exp(1)").unwrap();
        assert_eq!(p.zeros().len(), 1);
        assert_eq!(p.exponent(), 1.0);
        assert_eq!(parse_phi("blaschke(1,1)").unwrap().zeros().len(), 2);
        assert_eq!(parse_phi("-1").unwrap().sign(), -1);
        assert!(parse_phi("blaschke(0,-1)").is_err());
        assert!(parse_phi("sin(2)").is_err());
    }

    #[test]
    fn config_round_trip() {
        let m = NetModel::from_config("# model\nk = 1\nphi = exp(0.5)\nR = 2\nrepresentation = ground\nm = 12\n").unwrap();
        assert_eq!((m.k(), m.m(), m.radius()), (1, 12, 2.0));
        assert_eq!(m.representation(), Representation::Ground);
        let again = NetModel::from_config(&m.to_config()).unwrap();
        assert_eq!(again.to_config(), m.to_config());
        assert!(NetModel::from_config("colour = red").is_err());
        assert!(NetModel::from_config("R = -1").is_err());
    }

    #[test]
    fn trivial_phi_gives_plain_bumps() {
        let m = model("1");
        let d = build_cone(&m, &cone((1.0, 5000.0), (2.0, 6000.0))).unwrap();
        assert_eq!(d.generator_count(), (32, 32));
        let direct = m.space().sample(&d.functions_b[5]).unwrap();
        assert!((direct - d.generators_b.column(5)).norm() == 0.0);
    }

    #[test]
    fn a_generators_sit_in_the_inverted_interval() {
        let m = model("1").with_m(8);
        let d = build_cone(&m, &cone((4.0, 40.0), (1.0, 3.0))).unwrap();
        for f in &d.functions_a {
            let (lo, hi) = f.support();
            assert!(lo >= 1.0 / 3.0 - 1e-12 && hi <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn radius_must_match() {
        let m = NetModel::new(0, "1", 2.0, Representation::Kms, 8, DEFAULT_GRID).unwrap();
        assert!(matches!(
            build_cone(&m, &cone((4.0, 50.0), (1.0, 30.0))),
            Err(NetError::RadiusMismatch { .. })
        ));
    }

    #[test]
    fn locality_trivial_and_blaschke() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (o1, o2) = random_spacelike_pair(&mut rng, 1.0, &Placement::default()).unwrap();
        assert!(verify_locality(&model("1"), &o1, &o2).unwrap() < 1e-8);
        assert!(verify_locality(&model("blaschke(0,1)"), &o1, &o2).unwrap() < 1e-5);
    }

    #[test]
    fn timelike_pair_is_rejected_and_detected() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (o1, o2) = random_timelike_pair(&mut rng, 1.0, &Placement::default()).unwrap();
        let m = model("blaschke(0,1)");
        assert_eq!(verify_locality(&m, &o1, &o2), Err(NetError::NotSpacelike));
        let c1 = build_cone(&m, &o1).unwrap();
        let c2 = build_cone(&m, &o2).unwrap();
        let p = cross_pairings(&m, &c1, &c2);
        assert!(p[1] > 1e-3, "{p:?}");
    }

    #[test]
    fn covariance_under_boosts() {
        let o = cone((1.0, 5000.0), (2.0, 6000.0));
        assert_eq!(verify_covariance(&model("blaschke(0,1)"), 0.0, &o).unwrap(), 0.0);
        assert!(verify_covariance(&model("1"), 0.5, &o).unwrap() < 1e-8);
        assert!(verify_covariance(&model("blaschke(0,1)"), 0.5, &o).unwrap() < 1e-6);
        let far = cone((1e12, 1e13), (1.0, 10.0));
        assert!(matches!(
            verify_covariance(&model("1").with_m(8), 3.0, &far),
            Err(NetError::GridOverflow(_))
        ));
    }

    #[test]
    fn halfspace_two_paths_agree() {
        let m = model("blaschke(0,1)*exp(1)");
        let i = Interval::finite(1.0, 9.5).unwrap();
        let j = Interval::finite(-8.0, 0.5).unwrap();
        assert!(two_path_residual(&m, &i, &j).unwrap() < 1e-8);
        assert_eq!(
            halfspace_view(&m, &j, &i).unwrap_err(),
            NetError::NotOrdered
        );
    }

    #[test]
    fn halfspace_view_ignores_the_radius() {
        let m1 = model("blaschke(0,1)");
        let m2 = NetModel::new(0, "blaschke(0,1)", 2.0, Representation::Kms, 32, DEFAULT_GRID).unwrap();
        let i = Interval::finite(0.5, 9.0).unwrap();
        let j = Interval::finite(-9.0, 0.0).unwrap();
        let via1 = build_cone(&m1, &exp_cone(&i, &j, 1.0).unwrap()).unwrap();
        let via2 = build_cone(&m2, &exp_cone(&i, &j, 2.0).unwrap()).unwrap();
        assert!(descriptor_distance(&m1, &via1, &via2) < 1e-8);
        // the R = 2 cone sits at v scaled by 4
        let v1 = via1.cone.iv().to_f64().bounds();
        let v2 = via2.cone.iv().to_f64().bounds();
        assert!((v2.0 / v1.0 - 4.0).abs() < 1e-12);
    }

    #[test]
    fn ground_generator_is_positive_thermal_is_not() {
        let ground = NetModel::new(0, "1", 1.0, Representation::Ground, 32, DEFAULT_GRID).unwrap();
        let c = classify_state(&ground, &ClassifyConfig::default()).unwrap();
        assert_eq!(c.class, StateClass::Ground);
        assert!(c.pass);
        let thermal = CurrentSpace::new(0, DEFAULT_GRID).unwrap();
        assert!(compressed_generator_min_eigenvalue(&thermal, 16, 16.0).unwrap() < -0.1);
    }

    #[test]
    fn stress_tensor_examples() {
        for (u, v) in [(1.0, 2.0), (0.3, 7.0), (5.0, 0.5)] {
            let (t00, t01) = stress_tensor_components(|w| w, u, v);
            assert!((t00 - 2.0).abs() < 1e-14 && t01.abs() < 1e-14);
            let (t00, t01) = stress_tensor_components(|_| 1.0, u, v);
            assert!((t00 - (1.0 / u - v)).abs() < 1e-14);
            assert!((t01 - (1.0 / u + v)).abs() < 1e-14);
        }
    }

    #[test]
    fn reflection_examples() {
        let c = 2.5;
        for u in [0.1, 1.0, 7.0] {
            assert!((boundary_reflection(Side::Left, |x| c / x, u).unwrap() - c).abs() < 1e-14);
        }
        assert_eq!(boundary_reflection(Side::Left, |x| x, -1.0), Err(NetError::DomainViolation(-1.0)));
        assert_eq!(boundary_reflection(Side::Left, |x| x, 1e-12), Err(NetError::NearBoundary(1e-12)));
    }

    #[test]
    fn reflecting_twice_is_the_identity() {
        let tr = |w: f64| (w * 1.3).sin() / (1.0 + w * w);
        for w in [-0.2, -1.0, -3.7] {
            let t = |u: f64| boundary_reflection(Side::Right, tr, u).unwrap();
            let back = chiral_density(Side::Right, t, w).unwrap();
            assert!((back - tr(w)).abs() < 1e-12);
        }
        let tl = |x: f64| (x - 0.5).exp();
        for u in [0.3, 2.0] {
            let t = |x: f64| boundary_reflection(Side::Left, tl, x).unwrap();
            let tr_built = |w: f64| chiral_density(Side::Right, t, w).unwrap();
            let t_again = boundary_reflection(Side::Right, tr_built, u).unwrap();
            assert!((t_again - t(u)).abs() < 1e-12);
        }
    }

    #[test]
    fn flux_vanishes_for_reflected_data() {
        let tr = |w: f64| 1.0 / (1.0 + w * w);
        let t = |u: f64| boundary_reflection(Side::Right, tr, u).unwrap();
        let tl = |u: f64| chiral_density(Side::Left, t, u).unwrap();
        for u in [0.25, 1.0, 3.0] {
            assert!(boundary_flux(tl, tr, u).abs() < 1e-10);
        }
    }


    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn reflection_round_trips(log_u in -15.0..15.0f64, a in 0.1..3.0f64) {
            let u = log_u.exp();
            let tl = |x: f64| (a * x).sin() / (1.0 + x * x);
            let t = |x: f64| boundary_reflection(Side::Left, tl, x).unwrap();
            let back = chiral_density(Side::Left, t, u).unwrap();
            prop_assert!((back - tl(u)).abs() <= 1e-12 * (1.0 + tl(u).abs()));
            let tr = |w: f64| chiral_density(Side::Right, t, w).unwrap();
            prop_assert!(boundary_flux(tl, tr, u).abs() < 1e-10 * (1.0 + t(u).abs()));
        }

        #[test]
        fn config_round_trips(
            k in 0u32..3,
            r in 0.1..10.0f64,
            m in 1usize..64,
            phi in prop::sample::select(vec!["1", "-1", "exp(0.5)", "blaschke(1,2)", "blaschke(0,1)*exp(2)"]),
            ground in any::<bool>(),
            beta in 1.0..10.0f64,
        ) {
            let rep = if ground { Representation::Ground } else { Representation::Kms };
            let model = NetModel::new(k, phi, r, rep, m, DEFAULT_GRID).unwrap().with_beta(beta);
            let back = NetModel::from_config(&model.to_config()).unwrap();
            prop_assert_eq!(back.to_config(), model.to_config());
            prop_assert_eq!(back.phi(), model.phi());
        }

        #[test]
        fn exp_cone_has_the_requested_log_intervals(
            j0 in -10.0..0.0f64,
            lj in 0.5..5.0f64,
            gap in 0.0..2.0f64,
            li in 0.5..5.0f64,
            r in 0.5..3.0f64,
        ) {
            let i = Interval::finite(j0 + lj + gap, j0 + lj + gap + li).unwrap();
            let j = Interval::finite(j0, j0 + lj).unwrap();
            let cone = exp_cone(&i, &j, r).unwrap();
            let (b, a) = crate::geometry::net_index(&cone).unwrap();
            let (b, a) = (b.to_f64().bounds(), a.to_f64().bounds());
            let close = |x: f64, y: f64| (x - y).abs() < 1e-12 * y.abs();
            prop_assert!(close(b.0.ln(), i.bounds().0) || (b.0.ln() - i.bounds().0).abs() < 1e-12);
            prop_assert!(close(b.1, i.bounds().1.exp()));
            prop_assert!(close(a.0, j.bounds().0.exp()) && close(a.1, j.bounds().1.exp()));
        }
    }
}
