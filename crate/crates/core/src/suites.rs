//! Named verification suites.
//!
//! Each suite runs a fixed list of cases and returns one [`Verdict`] per case.
//! Everything random is drawn from a ChaCha stream seeded by the caller, so a
//! fixed seed reproduces the verdicts bit for bit.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::analytic::{cauchy_residual, Rect};
use crate::axb::{self, AxbError, Grid, GridState};
use crate::current::{
    self, bisognano_wichmann_residual, kms_residual, semigroup_membership_residual, CurrentError, CurrentSpace,
    Curve, MembershipConfig, ThermalConfig,
};
use crate::geometry::{self, rat, DoubleCone, Ext, GeometryError, Interval, Justification, Rational};
use crate::inner::{self, InnerError, InnerFunction, Mollifier, Multiplier, RawMultiplier, TimeGrid};
use crate::linalg::{self, CMatrix};
use crate::modular::{self, ModularError, StandardSubspace};
use crate::net::{self, ClassifyConfig, Evidence, NetError, NetModel, Placement, Representation};

pub const SUITES: [&str; 6] = ["geometry", "inner", "axb", "modular", "current", "net"];

const TAU: f64 = 2.0 * std::f64::consts::PI;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SuiteError {
    #[error("unknown suite '{0}'")]
    UnknownSuite(String),
    #[error("unknown tolerance '{0}'")]
    UnknownTolerance(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Inner(#[from] InnerError),
    #[error(transparent)]
    Axb(#[from] AxbError),
    #[error(transparent)]
    Modular(#[from] ModularError),
    #[error(transparent)]
    Current(#[from] CurrentError),
    #[error(transparent)]
    Net(#[from] NetError),
}

/// How a residual is compared with its threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    /// Passes when `residual < threshold`.
    Below,
    /// Passes when `residual ≥ threshold`; used for controls that must fail.
    AtLeast,
}

impl Relation {
    fn holds(self, residual: f64, threshold: f64) -> bool {
        match self {
            Relation::Below => residual < threshold,
            Relation::AtLeast => residual >= threshold,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Below => "<",
            Relation::AtLeast => ">=",
        }
    }
}

/// `(suite, case, default threshold, relation)`.
pub const CASES: &[(&str, &str, f64, Relation)] = &[
    ("geometry", "covariance", 0.5, Relation::Below),
    ("geometry", "locality_classification", 0.5, Relation::Below),
    ("inner", "modulus", 1e-12, Relation::Below),
    ("inner", "symmetry", 1e-12, Relation::Below),
    ("inner", "paley_wiener", 1e-3, Relation::Below),
    ("inner", "reflected_control", 0.1, Relation::AtLeast),
    ("axb", "kernel_identity", 1e-6, Relation::Below),
    ("axb", "analyticity_group", 1e-6, Relation::Below),
    ("axb", "analyticity_calculus", 1e-6, Relation::Below),
    ("axb", "contraction", 1e-8, Relation::Below),
    ("axb", "liouville", 1e-3, Relation::Below),
    ("axb", "liouville_control", 0.05, Relation::AtLeast),
    ("modular", "invariants", 1e-10, Relation::Below),
    ("modular", "delta_it_invariance", 1e-10, Relation::Below),
    ("modular", "azl_endpoint", 1e-8, Relation::Below),
    ("modular", "two_route", 1e-8, Relation::Below),
    ("current", "bisognano_wichmann", 0.05, Relation::Below),
    ("current", "bisognano_wichmann_monotone", 1.1, Relation::Below),
    ("current", "bisognano_wichmann_control_ratio", 5.0, Relation::AtLeast),
    ("current", "kms", 0.05, Relation::Below),
    ("current", "kms_monotone", 1.1, Relation::Below),
    ("current", "kms_control_ratio", 5.0, Relation::AtLeast),
    ("current", "membership", 0.05, Relation::Below),
    ("current", "membership_monotone", 1.1, Relation::Below),
    ("current", "membership_control", 0.2, Relation::AtLeast),
    ("net", "locality", 1e-5, Relation::Below),
    ("net", "timelike_control", 1e-3, Relation::AtLeast),
    ("net", "covariance", 1e-6, Relation::Below),
    ("net", "two_path", 1e-8, Relation::Below),
    ("net", "kms_state", 0.05, Relation::Below),
    ("net", "kms_state_monotone", 1.1, Relation::Below),
    ("net", "ground_state", 1e-6, Relation::Below),
    ("net", "stress_flux", 1e-10, Relation::Below),
    ("net", "reflection_involution", 1e-12, Relation::Below),
];

/// One checked quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub suite: String,
    pub case: String,
    pub residual: f64,
    pub threshold: f64,
    pub relation: Relation,
    pub pass: bool,
    pub grid: usize,
    pub m: usize,
    pub seed: u64,
    pub model_hash: String,
}

/// 17 significant digits; non-finite values become `null`.
pub fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".into()
    }
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("strings serialize")
}

impl Verdict {
    /// Fixed field order; floats via [`fmt_float`].
    pub fn to_json(&self) -> String {
        format!(
            "{{\"suite\":{},\"case\":{},\"residual\":{},\"threshold\":{},\"relation\":{},\"pass\":{},\"grid\":{},\"m\":{},\"seed\":{},\"model_hash\":{}}}",
            json_string(&self.suite),
            json_string(&self.case),
            fmt_float(self.residual),
            fmt_float(self.threshold),
            json_string(self.relation.symbol()),
            self.pass,
            self.grid,
            self.m,
            self.seed,
            json_string(&self.model_hash),
        )
    }

    /// `residual/threshold` for upper bounds, `threshold/residual` for lower bounds.
    pub fn margin(&self) -> f64 {
        let m = match self.relation {
            Relation::Below => self.residual / self.threshold,
            Relation::AtLeast => self.threshold / self.residual,
        };
        if m.is_nan() {
            f64::INFINITY
        } else {
            m
        }
    }
}

/// Everything a suite writes besides timings.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: String,
    pub model_hash: String,
    pub verdicts: Vec<Verdict>,
    /// `(file stem, CSV text)`.
    pub curves: Vec<(String, String)>,
}

impl SuiteReport {
    pub fn pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    /// The verdict closest to (or furthest past) its threshold.
    pub fn worst(&self) -> Option<&Verdict> {
        self.verdicts.iter().max_by(|a, b| a.margin().total_cmp(&b.margin()))
    }

    /// `{suite, model_hash, max_residual, threshold, pass, verdicts}`.
    pub fn to_json(&self) -> String {
        let (res, thr) = self.worst().map_or((f64::NAN, f64::NAN), |v| (v.residual, v.threshold));
        let mut out = format!(
            "{{\"suite\":{},\"model_hash\":{},\"max_residual\":{},\"threshold\":{},\"pass\":{},\"verdicts\":[",
            json_string(&self.suite),
            json_string(&self.model_hash),
            fmt_float(res),
            fmt_float(thr),
            self.pass()
        );
        for (i, v) in self.verdicts.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str("\n  ");
            out.push_str(&v.to_json());
        }
        out.push_str("\n]}\n");
        out
    }
}

/// Inputs shared by all suites.
#[derive(Debug, Clone)]
pub struct SuiteOptions {
    pub seed: u64,
    pub model: NetModel,
    /// Threshold overrides keyed `suite.case`.
    pub tol: BTreeMap<String, f64>,
}

impl SuiteOptions {
    pub fn new(seed: u64, model: NetModel) -> Self {
        Self {
            seed,
            model,
            tol: BTreeMap::new(),
        }
    }

    /// Rejects override names that match no case.
    pub fn with_tolerance(mut self, name: &str, value: f64) -> Result<Self, SuiteError> {
        if !CASES.iter().any(|(s, c, _, _)| format!("{s}.{c}") == name) {
            return Err(SuiteError::UnknownTolerance(name.into()));
        }
        self.tol.insert(name.into(), value);
        Ok(self)
    }

    fn rng(&self, suite: &str) -> ChaCha8Rng {
        // one independent stream per suite, so suites can run in any order
        let stream = SUITES.iter().position(|s| *s == suite).unwrap_or(0) as u64;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

/// First 16 hex digits of the SHA-256 of the canonical model text.
pub fn model_hash(model: &NetModel) -> String {
    let digest = Sha256::digest(model.to_config().as_bytes());
    digest.iter().take(8).fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

struct Recorder<'a> {
    suite: &'static str,
    opts: &'a SuiteOptions,
    hash: String,
    verdicts: Vec<Verdict>,
    curves: Vec<(String, String)>,
}

impl<'a> Recorder<'a> {
    fn new(suite: &'static str, opts: &'a SuiteOptions) -> Self {
        Self {
            suite,
            opts,
            hash: model_hash(&opts.model),
            verdicts: Vec::new(),
            curves: Vec::new(),
        }
    }

    fn record(&mut self, case: &str, residual: f64, grid: usize, m: usize) {
        let (_, _, default, relation) = CASES
            .iter()
            .find(|(s, c, _, _)| *s == self.suite && *c == case)
            .copied()
            .unwrap_or_else(|| panic!("case {}.{case} is not registered", self.suite));
        let threshold = self.opts.tol.get(&format!("{}.{case}", self.suite)).copied().unwrap_or(default);
        self.verdicts.push(Verdict {
            suite: self.suite.into(),
            case: case.into(),
            residual,
            threshold,
            relation,
            pass: relation.holds(residual, threshold),
            grid,
            m,
            seed: self.opts.seed,
            model_hash: self.hash.clone(),
        });
    }

    fn curve(&mut self, name: &str, csv: String) {
        self.curves.push((format!("{}_{name}", self.suite), csv));
    }

    fn finish(self) -> SuiteReport {
        SuiteReport {
            suite: self.suite.into(),
            model_hash: self.hash,
            verdicts: self.verdicts,
            curves: self.curves,
        }
    }
}

/// Runs one suite by name.
pub fn run_suite(name: &str, opts: &SuiteOptions) -> Result<SuiteReport, SuiteError> {
    match name {
        "geometry" => geometry_suite(opts, 100_000),
        "inner" => inner_suite(opts),
        "axb" => axb_suite(opts),
        "modular" => modular_suite(opts),
        "current" => current_suite(opts),
        "net" => net_suite(opts),
        other => Err(SuiteError::UnknownSuite(other.into())),
    }
}

/// Runs the named suites in parallel; results come back in the given order.
pub fn run_suites(names: &[&str], opts: &SuiteOptions) -> Vec<Result<SuiteReport, SuiteError>> {
    names.par_iter().map(|n| run_suite(n, opts)).collect()
}

// ---------------------------------------------------------------- geometry

fn small_rat(rng: &mut impl Rng, num: std::ops::RangeInclusive<i64>) -> Rational {
    rat(rng.gen_range(num), rng.gen_range(1..=8))
}

fn random_cone(rng: &mut impl Rng, r: &Rational) -> DoubleCone<Rational> {
    let u_lo = small_rat(rng, 1..=60);
    let u_hi = &u_lo + small_rat(rng, 1..=40);
    let v_lo = r * r / &u_lo + small_rat(rng, 1..=40);
    let v_hi = &v_lo + small_rat(rng, 1..=40);
    DoubleCone::new(
        Interval::finite(u_lo, u_hi).expect("ordered"),
        Interval::finite(v_lo, v_hi).expect("ordered"),
        r.clone(),
    )
    .expect("cone inside the hyperboloid")
}

/// Second cone placed before, after or across the first in each light-cone
/// direction, with touching endpoints allowed.
fn placed_cone(rng: &mut impl Rng, o: &DoubleCone<Rational>) -> DoubleCone<Rational> {
    let r = o.radius().clone();
    loop {
        let pick = |rng: &mut ChaCha8Rng, i: &Interval<Rational>| -> (Rational, Rational) {
            let (lo, hi) = (fin(i.lo()), fin(i.hi()));
            let len = small_rat(rng, 1..=30);
            match rng.gen_range(0..4) {
                0 => {
                    let gap = if rng.gen_bool(0.3) { Rational::zero() } else { small_rat(rng, 1..=10) };
                    let a = &hi + gap;
                    let b = &a + len;
                    (a, b)
                }
                1 => {
                    let gap = if rng.gen_bool(0.3) { Rational::zero() } else { small_rat(rng, 1..=10) };
                    let b = &lo - gap;
                    let a = &b - len;
                    (a, b)
                }
                _ => {
                    let a = &lo + small_rat(rng, -10..=10);
                    let b = &a + len;
                    (a, b)
                }
            }
        };
        let mut local = ChaCha8Rng::seed_from_u64(rng.gen());
        let (ua, ub) = pick(&mut local, o.iu());
        let (va, vb) = pick(&mut local, o.iv());
        if ua <= Rational::zero() || va <= Rational::zero() {
            continue;
        }
        let (Ok(iu), Ok(iv)) = (Interval::finite(ua, ub), Interval::finite(va, vb)) else {
            continue;
        };
        if let Ok(c) = DoubleCone::new(iu, iv, r.clone()) {
            return c;
        }
    }
}

fn fin(e: &Ext<Rational>) -> Rational {
    e.finite().cloned().expect("finite endpoint")
}

fn corners(o: &DoubleCone<Rational>) -> Vec<(Rational, Rational)> {
    let us = [fin(o.iu().lo()), fin(o.iu().hi())];
    let vs = [fin(o.iv().lo()), fin(o.iv().hi())];
    us.iter().flat_map(|u| vs.iter().map(move |v| (u.clone(), v.clone()))).collect()
}

/// Closed cones are spacelike iff every pair of corners is spacelike or lightlike.
fn corner_oracle(o1: &DoubleCone<Rational>, o2: &DoubleCone<Rational>) -> bool {
    let c2 = corners(o2);
    corners(o1).iter().all(|(u1, v1)| {
        c2.iter()
            .all(|(u2, v2)| (u2 - u1) * (v2 - v1) >= Rational::zero())
    })
}

fn scale_justification(j: &Justification<Rational>, l: &Rational) -> Justification<Rational> {
    match j {
        Justification::Disjoint(a, b) => Justification::Disjoint(a.scale(l), b.scale(l)),
        Justification::Forward { a, b } => Justification::Forward {
            a: a.scale(l),
            b: b.scale(l),
        },
    }
}

/// Exact covariance and locality classification over `cases` random cones.
pub fn geometry_suite(opts: &SuiteOptions, cases: usize) -> Result<SuiteReport, SuiteError> {
    let mut rec = Recorder::new("geometry", opts);
    let mut rng = opts.rng("geometry");
    let (mut cov_fail, mut loc_fail) = (0usize, 0usize);
    for _ in 0..cases {
        let r = rat(rng.gen_range(1..=6), rng.gen_range(1..=4));
        let o1 = random_cone(&mut rng, &r);
        let o2 = placed_cone(&mut rng, &o1);
        let lambda = rat(rng.gen_range(1..=12), rng.gen_range(1..=12));

        let boosted = o1.boost_by_factor(&lambda);
        let (ib, ia) = geometry::net_index(&boosted)?;
        let r2 = &r * &r;
        let expect_b = (&lambda * fin(o1.iu().lo()), &lambda * fin(o1.iu().hi()));
        let expect_a = (&lambda * &r2 / fin(o1.iv().hi()), &lambda * &r2 / fin(o1.iv().lo()));
        if (fin(ib.lo()), fin(ib.hi())) != expect_b || (fin(ia.lo()), fin(ia.hi())) != expect_a {
            cov_fail += 1;
        }

        let oracle = corner_oracle(&o1, &o2);
        let witness = geometry::locality_witness(&o1, &o2);
        let witness_boosted = geometry::locality_witness(&boosted, &o2.boost_by_factor(&lambda));
        let consistent = match (&witness, &witness_boosted) {
            (Ok(w), Ok(wb)) => {
                oracle
                    && w.pairs
                        .iter()
                        .zip(&wb.pairs)
                        .all(|(p, q)| scale_justification(&p.reason, &lambda) == q.reason)
            }
            (Err(GeometryError::NotSpacelike), Err(GeometryError::NotSpacelike)) => !oracle,
            _ => false,
        };
        if !consistent {
            loc_fail += 1;
        }
    }
    rec.record("covariance", cov_fail as f64, 0, 0);
    rec.record("locality_classification", loc_fail as f64, 0, 0);
    Ok(rec.finish())
}

// ---------------------------------------------------------------- inner

pub const INNER_COUNT: usize = 25;
pub const PW_MOLLIFIER: usize = 64;
pub const PW_GRID: usize = 1 << 14;

fn inner_suite(opts: &SuiteOptions) -> Result<SuiteReport, SuiteError> {
    let mut rec = Recorder::new("inner", opts);
    let mut rng = opts.rng("inner");
    let phis: Vec<InnerFunction> = (0..INNER_COUNT).map(|_| InnerFunction::random(&mut rng, 6, 2.0)).collect();
    let line: Vec<f64> = (0..=2000).map(|j| -50.0 + 0.05 * j as f64).collect();
    let moll = Mollifier::new(PW_MOLLIFIER)?;
    let tg = TimeGrid::for_mollifier(PW_MOLLIFIER, PW_GRID);

    let modulus = phis.iter().map(|p| p.modulus_residual(&line)).fold(0.0, f64::max);
    let symmetry = phis.iter().map(|p| p.symmetry_residual(&line)).fold(0.0, f64::max);
    let pw: Vec<f64> = phis
        .par_iter()
        .map(|p| inner::paley_wiener_residual(p, &moll, &tg))
        .collect::<Result<_, _>>()?;
    let controls: Vec<f64> = phis[..5]
        .par_iter()
        .map(|p| inner::paley_wiener_residual(&RawMultiplier::reflected(p), &moll, &tg))
        .collect::<Result<_, _>>()?;

    let mut csv = String::from("index,paley_wiener\n");
    for (i, r) in pw.iter().enumerate() {
        let _ = writeln!(csv, "{i},{}", fmt_float(*r));
    }
    rec.curve("paley_wiener", csv);
    rec.record("modulus", modulus, line.len(), 0);
    rec.record("symmetry", symmetry, line.len(), 0);
    rec.record("paley_wiener", pw.into_iter().fold(0.0, f64::max), PW_GRID, 0);
    rec.record("reflected_control", controls.into_iter().fold(f64::INFINITY, f64::min), PW_GRID, 0);
    Ok(rec.finish())
}

// ---------------------------------------------------------------- axb

/// `(t, z)` pairs of the kernel identity check.
pub fn kernel_cases() -> Vec<(f64, Complex64)> {
    let ts = [0.1, 0.5, 2f64.ln()];
    let zs = [Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(1.0, 1.0)];
    ts.iter().flat_map(|&t| zs.iter().map(move |&z| (t, z))).collect()
}

/// Relative L² distance between the kernel formula and Strang splitting.
pub fn kernel_identity_residual() -> Result<f64, SuiteError> {
    let g = Grid::default();
    let xi = GridState::gaussian(g, -1.0, 1.0, 0.3);
    let worst = kernel_cases()
        .par_iter()
        .map(|&(t, z)| -> Result<f64, AxbError> {
            let a = axb::apply_group_element(t, z, &xi)?;
            let b = axb::strang_propagate(t, z, &xi, 1e-3);
            Ok(a.rel_diff(&b))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(worst.into_iter().fold(0.0, f64::max))
}

/// Rectangles in the upper half-plane used by the analyticity checks.
pub fn rectangles() -> [Rect; 3] {
    [
        Rect::new(-1.0, 1.0, 0.5, 1.5),
        Rect::new(0.5, 2.0, 0.2, 1.0),
        Rect::new(-2.0, 0.0, 1.0, 3.0),
    ]
}

const CONTOUR_NODES: usize = 32;

/// Worst Cauchy residual of `⟨η, e^{it(K+zP)} ξ⟩` and the largest norm ratio
/// on the contours.
pub fn group_analyticity() -> Result<(f64, f64), SuiteError> {
    let g = Grid::default();
    let xi = GridState::gaussian(g, -1.0, 1.0, 0.5);
    let eta = GridState::gaussian(g, -0.5, 0.7, -0.2);
    let mut worst: f64 = 0.0;
    let mut max_norm: f64 = 0.0;
    for rect in rectangles() {
        let contour = rect.contour(CONTOUR_NODES);
        let states = contour
            .par_iter()
            .map(|(z, _)| axb::apply_group_element(0.5, *z, &xi))
            .collect::<Result<Vec<_>, _>>()?;
        let values: Vec<Complex64> = states.iter().map(|s| eta.inner(s)).collect();
        worst = worst.max(crate::analytic::cauchy_residual_from_samples(&rect, &contour, &values));
        max_norm = states.iter().map(|s| s.norm() / xi.norm()).fold(max_norm, f64::max);
    }
    Ok((worst, max_norm))
}

/// `φ = b_{1+i} · e^{iλ/2}`, used for the matrix-valued calculus.
fn calculus_phi() -> InnerFunction {
    InnerFunction::blaschke(Complex64::new(1.0, 1.0))
        .expect("symmetric")
        .multiply(&InnerFunction::exponential(0.5).expect("a ≥ 0"))
}

/// Worst Cauchy residual of a matrix element of `φ(A(z))` and the largest
/// operator norm of `T(z)` and `φ(T(z))` on the contours.
pub fn calculus_analyticity() -> Result<(f64, f64), SuiteError> {
    let gs = Grid::small(-4.0, 2.0, 32)?;
    let phi = calculus_phi();
    let disk = axb::disk_from_half_plane(move |l| phi.eval_formula(l));
    let mut worst: f64 = 0.0;
    let mut max_norm: f64 = 0.0;
    for rect in rectangles() {
        let contour = rect.contour(CONTOUR_NODES);
        let mats = contour
            .par_iter()
            .map(|(z, _)| -> Result<(CMatrix, CMatrix), AxbError> {
                let t = axb::cayley_contraction(*z, &gs)?;
                let f = axb::hinfty_apply(&disk, &t)?;
                Ok((t, f))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let values: Vec<Complex64> = mats.iter().map(|(_, f)| f[(3, 5)]).collect();
        worst = worst.max(crate::analytic::cauchy_residual_from_samples(&rect, &contour, &values));
        for (t, f) in &mats {
            max_norm = max_norm.max(linalg::operator_norm(t)).max(linalg::operator_norm(f));
        }
    }
    Ok((worst, max_norm))
}

fn liouville_setup() -> Result<(GridState, GridState, Mollifier, TimeGrid, Vec<Complex64>), SuiteError> {
    let g = Grid::small(-4.0, 2.0, 64)?;
    let xi = GridState::gaussian(g, -1.0, 0.5, 0.0);
    let eta = GridState::gaussian(g, -0.5, 0.5, 0.3);
    let tg = TimeGrid {
        t0: -30.0,
        dt: 1.0 / 1024.0,
        len: 1 << 16,
    };
    let c = Complex64::new;
    let cloud = vec![c(0.0, 0.5), c(1.0, 1.0), c(-1.0, 2.0), c(0.5, -0.5), c(-1.0, -1.0), c(0.0, 0.0), c(1.0, 0.0)];
    Ok((xi, eta, Mollifier::new(64)?, tg, cloud))
}

/// Largest variation of `F₋` for each multiplier.
pub fn liouville_residuals(phis: &[&dyn Multiplier]) -> Result<Vec<f64>, SuiteError> {
    let (xi, eta, moll, tg, cloud) = liouville_setup()?;
    phis.par_iter()
        .map(|p| Ok(axb::liouville_check(&axb::split_f(*p, &moll, &tg, &cloud, &xi, &eta)?)))
        .collect()
}

fn axb_suite(opts: &SuiteOptions) -> Result<SuiteReport, SuiteError> {
    let mut rec = Recorder::new("axb", opts);
    let grid = Grid::default().len();
    rec.record("kernel_identity", kernel_identity_residual()?, grid, 0);
    let (group, group_norm) = group_analyticity()?;
    rec.record("analyticity_group", group, grid, 0);
    let (calc, calc_norm) = calculus_analyticity()?;
    rec.record("analyticity_calculus", calc, 32, 0);
    rec.record("contraction", group_norm.max(calc_norm) - 1.0, grid, 0);

    let c = Complex64::new;
    let bi = InnerFunction::blaschke(c(0.0, 1.0))?;
    let b1 = InnerFunction::blaschke(c(1.0, 1.0))?;
    let e1 = InnerFunction::exponential(1.0)?;
    let inner_set: Vec<&dyn Multiplier> = vec![&bi, &e1, &b1];
    let r_bi = RawMultiplier::reflected(&bi);
    let r_b1 = RawMultiplier::reflected(&b1);
    let controls: Vec<&dyn Multiplier> = vec![&r_bi, &r_b1];
    let li = liouville_residuals(&inner_set)?;
    let lc = liouville_residuals(&controls)?;
    rec.record("liouville", li.into_iter().fold(0.0, f64::max), 64, 0);
    rec.record("liouville_control", lc.into_iter().fold(f64::INFINITY, f64::min), 64, 0);

    let mut csv = String::from("rectangle,x0,x1,y0,y1,group,calculus\n");
    let g = Grid::default();
    let xi = GridState::gaussian(g, -1.0, 1.0, 0.5);
    let eta = GridState::gaussian(g, -0.5, 0.7, -0.2);
    let gs = Grid::small(-4.0, 2.0, 32)?;
    let phi = calculus_phi();
    let disk = axb::disk_from_half_plane(move |l| phi.eval_formula(l));
    for (i, rect) in rectangles().iter().enumerate() {
        let rg = cauchy_residual(
            |z| eta.inner(&axb::apply_group_element(0.5, z, &xi).expect("upper half-plane")),
            rect,
            CONTOUR_NODES,
        );
        let rc = cauchy_residual(
            |z| {
                let t = axb::cayley_contraction(z, &gs).expect("resolvent exists");
                axb::hinfty_apply(&disk, &t).expect("spectrum inside the disk")[(3, 5)]
            },
            rect,
            CONTOUR_NODES,
        );
        let _ = writeln!(
            csv,
            "{i},{},{},{},{},{},{}",
            rect.x0,
            rect.x1,
            rect.y0,
            rect.y1,
            fmt_float(rg),
            fmt_float(rc)
        );
    }
    rec.curve("analyticity", csv);
    Ok(rec.finish())
}

// ---------------------------------------------------------------- modular

pub const MODULAR_COUNT: usize = 100;

fn modular_suite(opts: &SuiteOptions) -> Result<SuiteReport, SuiteError> {
    let mut rec = Recorder::new("modular", opts);
    let mut rng = opts.rng("modular");
    let subspaces: Vec<StandardSubspace> = (0..MODULAR_COUNT)
        .map(|i| StandardSubspace::random(2 + i % 5, &mut rng))
        .collect();
    let (mut inv, mut dit, mut azl, mut two) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for h in &subspaces {
        let d = modular::tomita(h)?;
        inv = d.invariant_residuals().into_iter().fold(inv, f64::max);
        for t in [0.3, -1.1, 2.5] {
            dit = dit.max(d.coefficient_maps_into(&d.delta_it(t))?);
        }
        let minus = CMatrix::identity(d.dim(), d.dim()) * Complex64::new(-1.0, 0.0);
        for v in [d.delta_it(0.4), minus] {
            azl = azl.max(d.azl_extension_check(&v, &[0.0, 0.7, -1.3], 8).endpoint_mismatch);
        }
        let (delta, u) = modular::tomita_real_form(h)?;
        two = two
            .max((d.delta() - &delta).norm() / delta.norm())
            .max((d.j_unitary() - &u).norm() / u.norm());
    }
    rec.record("invariants", inv, 0, 6);
    rec.record("delta_it_invariance", dit, 0, 6);
    rec.record("azl_endpoint", azl, 0, 6);
    rec.record("two_route", two, 0, 6);
    Ok(rec.finish())
}

// ---------------------------------------------------------------- current

pub const THERMAL_MS: [usize; 4] = [8, 12, 16, 24];
pub const MEMBERSHIP_MS: [usize; 5] = [8, 12, 16, 24, 32];
pub const THERMAL_TS: [f64; 2] = [0.1, 0.2];

/// Largest `r_{k+1} / r_k` along a curve, after subtracting `floor`.
pub fn max_ratio(c: &Curve, floor: f64) -> f64 {
    c.points
        .windows(2)
        .map(|w| (w[1].1 - floor) / w[0].1)
        .fold(0.0, f64::max)
}

/// Ten symmetric inner functions for the membership test.
pub fn membership_family() -> Vec<(&'static str, InnerFunction)> {
    let c = Complex64::new;
    let b = |p| InnerFunction::blaschke(p).expect("symmetric");
    let e = |a| InnerFunction::exponential(a).expect("a ≥ 0");
    vec![
        ("one", InnerFunction::identity()),
        ("blI", b(c(0.0, 1.0))),
        ("exp1", e(1.0)),
        ("pair", b(c(1.0, 1.0))),
        ("bl2i", b(c(0.0, 2.0))),
        ("neg", InnerFunction::new(-1, 0.0, Vec::new()).expect("sign −1")),
        ("exp05", e(0.5)),
        ("prod", b(c(0.0, 1.0)).multiply(&e(1.0))),
        ("pair2", b(c(0.5, 2.0))),
        ("bl05", b(c(0.0, 0.5))),
    ]
}

/// Five reflected or non-symmetric controls for the membership test.
pub fn membership_controls() -> Vec<(&'static str, Box<dyn Multiplier>)> {
    let c = Complex64::new;
    let b = |p| InnerFunction::blaschke(p).expect("symmetric");
    let e1 = InnerFunction::exponential(1.0).expect("a ≥ 0");
    vec![
        ("refl", Box::new(RawMultiplier::reflected(&b(c(0.0, 1.0))))),
        ("nonsym", Box::new(InnerFunction::unchecked(1, 0.0, vec![c(1.0, 1.0)]))),
        ("reflpair", Box::new(RawMultiplier::reflected(&b(c(1.0, 1.0))))),
        ("nonsym2", Box::new(InnerFunction::unchecked(1, 0.0, vec![c(-2.0, 1.0)]))),
        ("reflexp", Box::new(RawMultiplier::reflected(&b(c(0.0, 1.0)).multiply(&e1)))),
    ]
}

/// BW and KMS curves at `beta` over [`THERMAL_MS`].
pub fn thermal_curves(space: &CurrentSpace, beta: f64) -> Result<(Curve, Curve), SuiteError> {
    let cfg = ThermalConfig::default();
    let bw = current::curve(&THERMAL_MS, |m| {
        Ok(bisognano_wichmann_residual(space, m, &THERMAL_TS, beta, &cfg)?
            .into_iter()
            .fold(0.0, f64::max))
    })?;
    let kms = current::curve(&THERMAL_MS, |m| kms_residual(space, m, &THERMAL_TS, beta, &cfg))?;
    Ok((bw, kms))
}

/// Membership curve of one multiplier over [`MEMBERSHIP_MS`] at `a = 1`.
pub fn membership_curve(space: &CurrentSpace, phi: &dyn Multiplier) -> Result<Curve, SuiteError> {
    let cfg = MembershipConfig::default();
    Ok(current::curve(&MEMBERSHIP_MS, |m| semigroup_membership_residual(space, phi, 1.0, m, &cfg))?)
}

fn min_control_ratio(control: &Curve, main: &Curve) -> f64 {
    control
        .points
        .iter()
        .zip(&main.points)
        .map(|(c, m)| c.1 / m.1)
        .fold(f64::INFINITY, f64::min)
}

fn current_suite(opts: &SuiteOptions) -> Result<SuiteReport, SuiteError> {
    let mut rec = Recorder::new("current", opts);
    let grid = opts.model.grid();
    let space = CurrentSpace::new(opts.model.k(), grid)?;
    let (bw, kms) = thermal_curves(&space, TAU)?;
    let (bw_c, kms_c) = thermal_curves(&space, TAU / 2.0)?;
    let top = *THERMAL_MS.last().expect("nonempty");
    rec.record("bisognano_wichmann", bw.last(), grid, top);
    rec.record("bisognano_wichmann_monotone", max_ratio(&bw, 0.0), grid, top);
    rec.record("bisognano_wichmann_control_ratio", min_control_ratio(&bw_c, &bw), grid, top);
    rec.record("kms", kms.last(), grid, top);
    rec.record("kms_monotone", max_ratio(&kms, 0.0), grid, top);
    rec.record("kms_control_ratio", min_control_ratio(&kms_c, &kms), grid, top);
    rec.curve("bisognano_wichmann", bw.to_csv());
    rec.curve("kms", kms.to_csv());
    rec.curve("bisognano_wichmann_beta_pi", bw_c.to_csv());
    rec.curve("kms_beta_pi", kms_c.to_csv());

    let family = membership_family();
    let curves = family
        .par_iter()
        .map(|(_, p)| membership_curve(&space, p))
        .collect::<Result<Vec<_>, _>>()?;
    let controls = membership_controls();
    let control_curves = controls
        .par_iter()
        .map(|(_, p)| membership_curve(&space, p.as_ref()))
        .collect::<Result<Vec<_>, _>>()?;
    let mtop = *MEMBERSHIP_MS.last().expect("nonempty");
    rec.record("membership", curves.iter().map(Curve::last).fold(0.0, f64::max), grid, mtop);
    rec.record(
        "membership_monotone",
        curves.iter().map(|c| max_ratio(c, 1e-4)).fold(0.0, f64::max),
        grid,
        mtop,
    );
    rec.record(
        "membership_control",
        control_curves
            .iter()
            .flat_map(|c| c.points.iter().map(|p| p.1))
            .fold(f64::INFINITY, f64::min),
        grid,
        mtop,
    );
    for ((name, _), c) in family.iter().zip(&curves) {
        rec.curve(&format!("membership_{name}"), c.to_csv());
    }
    for ((name, _), c) in controls.iter().zip(&control_curves) {
        rec.curve(&format!("membership_control_{name}"), c.to_csv());
    }
    Ok(rec.finish())
}

// ---------------------------------------------------------------- net

/// The four `φ` of the locality and covariance checks.
pub const NET_PHIS: [&str; 4] = ["1", "exp(1)", "blaschke(0,1)", "blaschke(0,1)*exp(1)"];
pub const LOCALITY_PAIRS: usize = 50;
pub const TIMELIKE_PAIRS: usize = 10;
pub const COVARIANCE_SHIFTS: [f64; 4] = [-0.5, -0.25, 0.25, 0.5];

fn variant(model: &NetModel, phi: &str, rep: Representation) -> Result<NetModel, NetError> {
    Ok(NetModel::new(model.k(), phi, model.radius(), rep, model.m(), model.grid())?.with_beta(model.beta()))
}

/// Worst locality residual over random spacelike pairs for every `φ` in
/// [`NET_PHIS`] and for `model` itself.
pub fn net_locality(model: &NetModel, rng: &mut impl Rng, pairs: usize) -> Result<f64, SuiteError> {
    let placement = Placement::default();
    let cones = (0..pairs)
        .map(|_| net::random_spacelike_pair(rng, model.radius(), &placement))
        .collect::<Result<Vec<_>, _>>()?;
    let mut models = NET_PHIS
        .iter()
        .map(|phi| variant(model, phi, model.representation()))
        .collect::<Result<Vec<_>, _>>()?;
    models.push(model.clone());
    let mut worst: f64 = 0.0;
    for m in &models {
        let res = cones
            .par_iter()
            .map(|(o1, o2)| net::verify_locality(m, o1, o2))
            .collect::<Result<Vec<_>, _>>()?;
        worst = res.into_iter().fold(worst, f64::max);
    }
    Ok(worst)
}

/// Smallest, over random timelike pairs, of the largest generator pairing
/// for `φ = b_i`.
pub fn net_timelike_control(model: &NetModel, rng: &mut impl Rng, pairs: usize) -> Result<f64, SuiteError> {
    let m = variant(model, "blaschke(0,1)", model.representation())?;
    let placement = Placement::default();
    let cones = (0..pairs)
        .map(|_| net::random_timelike_pair(rng, model.radius(), &placement))
        .collect::<Result<Vec<_>, _>>()?;
    let res = cones
        .par_iter()
        .map(|(o1, o2)| -> Result<f64, NetError> {
            let c1 = net::build_cone(&m, o1)?;
            let c2 = net::build_cone(&m, o2)?;
            Ok(net::cross_pairings(&m, &c1, &c2).into_iter().fold(0.0, f64::max))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(res.into_iter().fold(f64::INFINITY, f64::min))
}

/// Worst covariance residual over [`COVARIANCE_SHIFTS`] and [`NET_PHIS`].
pub fn net_covariance(model: &NetModel, rng: &mut impl Rng, cones: usize) -> Result<f64, SuiteError> {
    let placement = Placement::default();
    let list = (0..cones)
        .map(|_| net::random_spacelike_pair(rng, model.radius(), &placement).map(|p| p.0))
        .collect::<Result<Vec<_>, _>>()?;
    let mut worst: f64 = 0.0;
    for phi in NET_PHIS {
        let m = variant(model, phi, model.representation())?;
        for o in &list {
            let res = COVARIANCE_SHIFTS
                .par_iter()
                .map(|&s| net::verify_covariance(&m, s, o))
                .collect::<Result<Vec<_>, _>>()?;
            worst = res.into_iter().fold(worst, f64::max);
        }
    }
    Ok(worst)
}

/// Two-path residual on random ordered `(I, J)`, at the model radius and at
/// twice it.
pub fn net_two_path(model: &NetModel, rng: &mut impl Rng, cases: usize) -> Result<f64, SuiteError> {
    let doubled = NetModel::new(
        model.k(),
        "blaschke(0,1)",
        2.0 * model.radius(),
        model.representation(),
        model.m(),
        model.grid(),
    )?;
    let base = variant(model, "blaschke(0,1)", model.representation())?;
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let lj = rng.gen_range(7.0..9.0);
        let li = rng.gen_range(7.0..9.0);
        let j0 = rng.gen_range(-12.0..-6.0);
        let i0 = j0 + lj + rng.gen_range(0.05..1.0);
        let i = Interval::finite(i0, i0 + li)?;
        let j = Interval::finite(j0, j0 + lj)?;
        worst = worst.max(net::two_path_residual(&base, &i, &j)?);
        worst = worst.max(net::two_path_residual(&doubled, &i, &j)?);
        let direct = net::halfspace_view(&base, &i, &j)?;
        let via = net::build_cone(&doubled, &net::exp_cone(&i, &j, doubled.radius())?)?;
        worst = worst.max(net::descriptor_distance(&base, &direct, &via));
    }
    Ok(worst)
}

/// `(flux, involution)` residuals of the boundary reflection on sampled data.
pub fn stress_residuals() -> (f64, f64) {
    let tr = |w: f64| (1.0 + 0.3 * w).exp() / (1.0 + w * w);
    let t = |u: f64| net::boundary_reflection(net::Side::Right, tr, u).unwrap_or(f64::NAN);
    let tl = |u: f64| net::chiral_density(net::Side::Left, t, u).unwrap_or(f64::NAN);
    let us: Vec<f64> = (1..=40).map(|j| 0.1 * j as f64).collect();
    let flux = us.iter().map(|&u| net::boundary_flux(tl, tr, u).abs()).fold(0.0, f64::max);
    let ws: Vec<f64> = us.iter().map(|u| -u).collect();
    let inv = ws
        .iter()
        .map(|&w| (net::chiral_density(net::Side::Right, t, w).unwrap_or(f64::NAN) - tr(w)).abs())
        .fold(0.0, f64::max);
    (flux, inv)
}

fn net_suite(opts: &SuiteOptions) -> Result<SuiteReport, SuiteError> {
    let mut rec = Recorder::new("net", opts);
    let model = &opts.model;
    let (grid, m) = (model.grid(), model.m());
    let mut rng = opts.rng("net");
    rec.record("locality", net_locality(model, &mut rng, LOCALITY_PAIRS)?, grid, m);
    rec.record("timelike_control", net_timelike_control(model, &mut rng, TIMELIKE_PAIRS)?, grid, m);
    rec.record("covariance", net_covariance(model, &mut rng, 3)?, grid, m);
    rec.record("two_path", net_two_path(model, &mut rng, 5)?, grid, m);

    let cfg = ClassifyConfig::default();
    let kms_model = variant(model, "1", Representation::Kms)?;
    let kms = net::classify_state(&kms_model, &cfg)?;
    if let Evidence::Kms { bw, kms } = &kms.evidence {
        rec.record("kms_state", bw.last().max(kms.last()), grid, *cfg.ms.last().unwrap_or(&0));
        rec.record(
            "kms_state_monotone",
            max_ratio(bw, 0.0).max(max_ratio(kms, 0.0)),
            grid,
            *cfg.ms.last().unwrap_or(&0),
        );
        rec.curve("kms_state_bisognano_wichmann", bw.to_csv());
        rec.curve("kms_state_kms", kms.to_csv());
    }
    let ground_model = variant(model, "1", Representation::Ground)?;
    if let Evidence::Ground { min_eigenvalue } = net::classify_state(&ground_model, &cfg)?.evidence {
        rec.record("ground_state", -min_eigenvalue, grid, m);
    }
    let (flux, inv) = stress_residuals();
    rec.record("stress_flux", flux, 0, 0);
    rec.record("reflection_involution", inv, 0, 0);
    Ok(rec.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> SuiteOptions {
        SuiteOptions::new(7, NetModel::with_phi("1").unwrap())
    }

    #[test]
    fn verdict_json_has_fixed_layout() {
        let v = Verdict {
            suite: "x".into(),
            case: "y".into(),
            residual: 0.1,
            threshold: 1e-3,
            relation: Relation::Below,
            pass: false,
            grid: 4,
            m: 2,
            seed: 9,
            model_hash: "ab".into(),
        };
        assert_eq!(
            v.to_json(),
            "{\"suite\":\"x\",\"case\":\"y\",\"residual\":1.0000000000000001e-1,\"threshold\":1.0000000000000000e-3,\"relation\":\"<\",\"pass\":false,\"grid\":4,\"m\":2,\"seed\":9,\"model_hash\":\"ab\"}"
        );
        let parsed: serde_json::Value = serde_json::from_str(&v.to_json()).unwrap();
        assert_eq!(parsed["residual"].as_f64(), Some(0.1));
        assert_eq!(fmt_float(f64::NAN), "null");
    }

    #[test]
    fn tolerance_names_are_checked() {
        assert!(opts().with_tolerance("net.locality", 1e-4).is_ok());
        assert_eq!(
            opts().with_tolerance("net.nothing", 1.0).unwrap_err(),
            SuiteError::UnknownTolerance("net.nothing".into())
        );
        assert!(matches!(run_suite("bogus", &opts()), Err(SuiteError::UnknownSuite(_))));
    }

    #[test]
    fn every_registered_case_is_unique() {
        let mut names: Vec<String> = CASES.iter().map(|(s, c, _, _)| format!("{s}.{c}")).collect();
        names.sort();
        let n = names.len();
        names.dedup();
        assert_eq!(names.len(), n);
    }

    #[test]
    fn geometry_suite_small_run_passes_and_repeats() {
        let a = geometry_suite(&opts(), 2000).unwrap();
        assert!(a.pass(), "{:?}", a.verdicts);
        let b = geometry_suite(&opts(), 2000).unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn corner_oracle_examples() {
        let r = rat(1, 1);
        let cone = |u: (i64, i64), v: (i64, i64)| {
            DoubleCone::new(
                Interval::finite(rat(u.0, 1), rat(u.1, 1)).unwrap(),
                Interval::finite(rat(v.0, 1), rat(v.1, 1)).unwrap(),
                r.clone(),
            )
            .unwrap()
        };
        assert!(corner_oracle(&cone((2, 3), (2, 3)), &cone((3, 4), (4, 5))));
        assert!(!corner_oracle(&cone((2, 3), (4, 5)), &cone((3, 4), (2, 3))));
        assert!(!corner_oracle(&cone((2, 4), (2, 3)), &cone((3, 5), (4, 5))));
    }

    #[test]
    fn tolerance_override_flips_a_verdict() {
        let o = opts().with_tolerance("net.stress_flux", -1.0).unwrap();
        let mut rec = Recorder::new("net", &o);
        rec.record("stress_flux", 0.0, 0, 0);
        assert!(!rec.finish().pass());
    }

    #[test]
    fn suite_rngs_are_independent_streams() {
        let o = opts();
        let a: u64 = o.rng("inner").gen();
        let b: u64 = o.rng("net").gen();
        assert_ne!(a, b);
        assert_eq!(a, o.rng("inner").gen::<u64>());
    }

    #[test]
    fn stress_checks_are_tight() {
        let (flux, inv) = stress_residuals();
        assert!(flux < 1e-10 && inv < 1e-12);
    }
}
