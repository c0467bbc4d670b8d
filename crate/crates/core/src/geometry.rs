//! Light-cone geometry of the hyperboloid interior `uv > R²`.
//!
//! Intervals, points and double cones are generic over the scalar type so the
//! same predicates run on `f64` and on exact rationals. Boosts act as
//! `(u, v) ↦ (λu, v/λ)` with `λ = eˢ`; the exact path takes `λ` directly.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, ToPrimitive};
use thiserror::Error;

/// Exact rational scalar used for predicate sweeps.
pub type Rational = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeometryError {
    #[error("interval endpoints must satisfy lo < hi")]
    EmptyInterval,
    #[error("interval must lie strictly inside the positive half-line")]
    NonPositiveInterval,
    #[error("double cone closure leaves the hyperboloid interior")]
    ConeInvariantViolated,
    #[error("radius must be positive")]
    NonPositiveRadius,
    #[error("point is outside the hyperboloid interior")]
    OutsideDomain,
    #[error("intervals are not in forward order")]
    NotOrdered,
    #[error("double cones are not spacelike separated")]
    NotSpacelike,
}

/// Scalars usable for exact or floating interval arithmetic.
pub trait Scalar: Clone + PartialOrd + Num + Debug {}
impl<T: Clone + PartialOrd + Num + Debug> Scalar for T {}

/// Extended real number. The derived order puts `NegInf < Finite(_) < PosInf`.
#[derive(Debug, Clone, PartialEq, PartialOrd)]
pub enum Ext<T> {
    NegInf,
    Finite(T),
    PosInf,
}

impl<T: Scalar> Ext<T> {
    pub fn finite(&self) -> Option<&T> {
        match self {
            Ext::Finite(x) => Some(x),
            _ => None,
        }
    }

    fn scale(&self, lambda: &T) -> Ext<T> {
        match self {
            Ext::Finite(x) => Ext::Finite(x.clone() * lambda.clone()),
            other => other.clone(),
        }
    }
}

/// Open interval `(lo, hi)` with possibly infinite endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct Interval<T> {
    lo: Ext<T>,
    hi: Ext<T>,
}

impl<T: Scalar> Interval<T> {
    pub fn new(lo: Ext<T>, hi: Ext<T>) -> Result<Self, GeometryError> {
        if lo < hi {
            Ok(Self { lo, hi })
        } else {
            Err(GeometryError::EmptyInterval)
        }
    }

    pub fn finite(lo: T, hi: T) -> Result<Self, GeometryError> {
        Self::new(Ext::Finite(lo), Ext::Finite(hi))
    }

    pub fn lo(&self) -> &Ext<T> {
        &self.lo
    }

    pub fn hi(&self) -> &Ext<T> {
        &self.hi
    }

    /// True when the interval is contained in `[0, ∞)`.
    pub fn is_positive(&self) -> bool {
        self.lo >= Ext::Finite(T::zero())
    }

    pub fn contains(&self, x: &T) -> bool {
        let x = Ext::Finite(x.clone());
        self.lo < x && x < self.hi
    }

    /// `λ·I` for `λ > 0`.
    pub fn scale(&self, lambda: &T) -> Self {
        Self {
            lo: self.lo.scale(lambda),
            hi: self.hi.scale(lambda),
        }
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.hi <= other.lo || other.hi <= self.lo
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }
}

impl Interval<Rational> {
    pub fn to_f64(&self) -> Interval<f64> {
        let conv = |e: &Ext<Rational>| match e {
            Ext::NegInf => Ext::NegInf,
            Ext::PosInf => Ext::PosInf,
            Ext::Finite(x) => Ext::Finite(x.to_f64().unwrap_or(f64::NAN)),
        };
        Interval {
            lo: conv(&self.lo),
            hi: conv(&self.hi),
        }
    }
}

impl Interval<f64> {
    /// Finite endpoints as a pair; panics on infinite endpoints.
    pub fn bounds(&self) -> (f64, f64) {
        match (&self.lo, &self.hi) {
            (Ext::Finite(a), Ext::Finite(b)) => (*a, *b),
            _ => panic!("interval has an infinite endpoint"),
        }
    }
}

/// Point in light-cone coordinates, `u = x + t`, `v = x − t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Point2D<T> {
    pub u: T,
    pub v: T,
}

impl<T: Scalar> Point2D<T> {
    pub fn new(u: T, v: T) -> Self {
        Self { u, v }
    }
}

impl Point2D<f64> {
    pub fn t(&self) -> f64 {
        (self.u - self.v) / 2.0
    }

    pub fn x(&self) -> f64 {
        (self.u + self.v) / 2.0
    }
}

/// Double cone `I_u × I_v` whose closure lies in the hyperboloid interior.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubleCone<T> {
    iu: Interval<T>,
    iv: Interval<T>,
    r: T,
}

impl<T: Scalar> DoubleCone<T> {
    pub fn new(iu: Interval<T>, iv: Interval<T>, r: T) -> Result<Self, GeometryError> {
        if r <= T::zero() {
            return Err(GeometryError::NonPositiveRadius);
        }
        let (ul, vl) = match (iu.lo.finite(), iv.lo.finite()) {
            (Some(a), Some(b)) => (a.clone(), b.clone()),
            _ => return Err(GeometryError::ConeInvariantViolated),
        };
        if ul <= T::zero() || ul * vl <= r.clone() * r.clone() {
            return Err(GeometryError::ConeInvariantViolated);
        }
        Ok(Self { iu, iv, r })
    }

    pub fn iu(&self) -> &Interval<T> {
        &self.iu
    }

    pub fn iv(&self) -> &Interval<T> {
        &self.iv
    }

    pub fn radius(&self) -> &T {
        &self.r
    }

    /// Image under the boost with factor `λ = eˢ > 0`.
    pub fn boost_by_factor(&self, lambda: &T) -> Self {
        Self {
            iu: self.iu.scale(lambda),
            iv: self.iv.scale(&(T::one() / lambda.clone())),
            r: self.r.clone(),
        }
    }
}

impl DoubleCone<Rational> {
    pub fn to_f64(&self) -> DoubleCone<f64> {
        DoubleCone {
            iu: self.iu.to_f64(),
            iv: self.iv.to_f64(),
            r: self.r.to_f64().unwrap_or(f64::NAN),
        }
    }
}

/// Boost `(u, v) ↦ (eˢu, e⁻ˢv)`.
pub fn boost(s: f64, p: &Point2D<f64>) -> Point2D<f64> {
    Point2D::new(s.exp() * p.u, (-s).exp() * p.v)
}

/// Exact boost with factor `λ = eˢ`.
pub fn boost_by_factor<T: Scalar>(lambda: &T, p: &Point2D<T>) -> Point2D<T> {
    Point2D::new(lambda.clone() * p.u.clone(), p.v.clone() / lambda.clone())
}

/// `(u′ − u)(v′ − v) > 0`.
pub fn spacelike<T: Scalar>(p: &Point2D<T>, q: &Point2D<T>) -> bool {
    (q.u.clone() - p.u.clone()) * (q.v.clone() - p.v.clone()) > T::zero()
}

pub fn in_hyperboloid<T: Scalar>(p: &Point2D<T>, r: &T) -> bool {
    p.u > T::zero() && p.u.clone() * p.v.clone() > r.clone() * r.clone()
}

/// `R²·I⁻¹ = (R²/hi, R²/lo)`; an infinite upper end maps to 0.
pub fn invert_interval<T: Scalar>(i: &Interval<T>, r: &T) -> Result<Interval<T>, GeometryError> {
    let lo = match i.lo.finite() {
        Some(lo) if *lo > T::zero() => lo.clone(),
        _ => return Err(GeometryError::NonPositiveInterval),
    };
    let r2 = r.clone() * r.clone();
    let new_lo = match &i.hi {
        Ext::Finite(hi) => r2.clone() / hi.clone(),
        _ => T::zero(),
    };
    Interval::finite(new_lo, r2 / lo)
}

/// Pair of chiral intervals `(I_u, R²/I_v)` carrying the two generator algebras.
pub fn net_index<T: Scalar>(o: &DoubleCone<T>) -> Result<(Interval<T>, Interval<T>), GeometryError> {
    Ok((o.iu.clone(), invert_interval(&o.iv, &o.r)?))
}

/// Half-space coordinates: `t + x = ln u`, `t − x = ln(R²/v)`.
pub fn log_map(p: &Point2D<f64>, r: f64) -> Result<(f64, f64), GeometryError> {
    if !in_hyperboloid(p, &r) {
        return Err(GeometryError::OutsideDomain);
    }
    let a = p.u.ln();
    let b = (r * r / p.v).ln();
    Ok(((a + b) / 2.0, (a - b) / 2.0))
}

/// Inverse of [`log_map`].
pub fn exp_map(t: f64, x: f64, r: f64) -> Result<Point2D<f64>, GeometryError> {
    if x <= 0.0 || r <= 0.0 {
        return Err(GeometryError::OutsideDomain);
    }
    Ok(Point2D::new((t + x).exp(), r * r / (t - x).exp()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Before,
    After,
    Overlapping,
}

/// `After` when `I2` lies in the future of `I1` (touching allowed).
pub fn forward_order<T: Scalar>(i1: &Interval<T>, i2: &Interval<T>) -> Order {
    if i2.lo >= i1.hi {
        Order::After
    } else if i1.lo >= i2.hi {
        Order::Before
    } else {
        Order::Overlapping
    }
}

/// Gap between two ordered intervals; may collapse to a single point.
#[derive(Debug, Clone, PartialEq)]
pub enum Gap<T> {
    Open(Interval<T>),
    Touching(Ext<T>),
}

impl<T: Scalar> Gap<T> {
    pub fn is_empty(&self) -> bool {
        matches!(self, Gap::Touching(_))
    }

    /// Whether the gap misses `other` entirely.
    pub fn is_disjoint(&self, other: &Interval<T>) -> bool {
        match self {
            Gap::Open(k) => k.is_disjoint(other),
            Gap::Touching(p) => !(other.lo < *p && *p < other.hi),
        }
    }
}

/// `K` between `J` and `I`, and the hull `L`, for `I` after `J`.
pub fn induced_intervals<T: Scalar>(
    i: &Interval<T>,
    j: &Interval<T>,
) -> Result<(Gap<T>, Interval<T>), GeometryError> {
    if forward_order(j, i) != Order::After {
        return Err(GeometryError::NotOrdered);
    }
    let k = if j.hi == i.lo {
        Gap::Touching(i.lo.clone())
    } else {
        Gap::Open(Interval::new(j.hi.clone(), i.lo.clone())?)
    };
    let l = Interval::new(j.lo.clone(), i.hi.clone())?;
    Ok((k, l))
}

/// Hyperboloid variant: `J` is replaced by `R²J⁻¹` first.
pub fn induced_intervals_hyperboloid<T: Scalar>(
    i: &Interval<T>,
    j: &Interval<T>,
    r: &T,
) -> Result<(Gap<T>, Interval<T>), GeometryError> {
    induced_intervals(i, &invert_interval(j, r)?)
}

/// Which generator algebra of a cone: `B` sits on `I_u`, `A` on `R²/I_v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Generator {
    B,
    A,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Justification<T> {
    /// Both generators come from the same chiral algebra on disjoint intervals.
    Disjoint(Interval<T>, Interval<T>),
    /// The `B` interval lies after the `A` interval.
    Forward { a: Interval<T>, b: Interval<T> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairWitness<T> {
    pub first: Generator,
    pub second: Generator,
    pub reason: Justification<T>,
}

/// Commutation certificate for the four generator pairs of two cones.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalityCertificate<T> {
    pub pairs: [PairWitness<T>; 4],
}

fn ordered_same_way<T: Scalar>(o1: &DoubleCone<T>, o2: &DoubleCone<T>) -> bool {
    let ou = forward_order(&o1.iu, &o2.iu);
    let ov = forward_order(&o1.iv, &o2.iv);
    ou != Order::Overlapping && ou == ov
}

/// Cones are spacelike iff both light-cone intervals are ordered the same way.
pub fn cones_spacelike<T: Scalar>(o1: &DoubleCone<T>, o2: &DoubleCone<T>) -> bool {
    ordered_same_way(o1, o2)
}

pub fn locality_witness<T: Scalar>(
    o1: &DoubleCone<T>,
    o2: &DoubleCone<T>,
) -> Result<LocalityCertificate<T>, GeometryError> {
    if !ordered_same_way(o1, o2) {
        return Err(GeometryError::NotSpacelike);
    }
    let (b1, a1) = net_index(o1)?;
    let (b2, a2) = net_index(o2)?;

    let disjoint = |x: &Interval<T>, y: &Interval<T>| {
        if x.is_disjoint(y) {
            Ok(Justification::Disjoint(x.clone(), y.clone()))
        } else {
            Err(GeometryError::NotSpacelike)
        }
    };
    let forward = |a: &Interval<T>, b: &Interval<T>| {
        if forward_order(a, b) == Order::After {
            Ok(Justification::Forward {
                a: a.clone(),
                b: b.clone(),
            })
        } else {
            Err(GeometryError::NotSpacelike)
        }
    };

    Ok(LocalityCertificate {
        pairs: [
            PairWitness {
                first: Generator::B,
                second: Generator::B,
                reason: disjoint(&b1, &b2)?,
            },
            PairWitness {
                first: Generator::B,
                second: Generator::A,
                reason: forward(&a2, &b1)?,
            },
            PairWitness {
                first: Generator::A,
                second: Generator::B,
                reason: forward(&a1, &b2)?,
            },
            PairWitness {
                first: Generator::A,
                second: Generator::A,
                reason: disjoint(&a1, &a2)?,
            },
        ],
    })
}

/// Shorthand for `p/q` as an exact rational.
pub fn rat(p: i64, q: i64) -> Rational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn iv(a: f64, b: f64) -> Interval<f64> {
        Interval::finite(a, b).unwrap()
    }

    fn riv(a: (i64, i64), b: (i64, i64)) -> Interval<Rational> {
        Interval::finite(rat(a.0, a.1), rat(b.0, b.1)).unwrap()
    }

    #[test]
    fn boost_examples() {
        let p = Point2D::new(2.0, 1.0);
        assert_eq!(boost(0.0, &p), p);
        let q = boost(2f64.ln(), &p);
        assert!((q.u - 4.0).abs() < 1e-15 && (q.v - 0.5).abs() < 1e-15);
        let r = boost_by_factor(&rat(2, 1), &Point2D::new(rat(2, 1), rat(1, 1)));
        assert_eq!(r, Point2D::new(rat(4, 1), rat(1, 2)));
    }

    #[test]
    fn spacelike_examples() {
        assert!(spacelike(&Point2D::new(2.0, 1.0), &Point2D::new(3.0, 2.0)));
        assert!(!spacelike(&Point2D::new(2.0, 1.0), &Point2D::new(3.0, 0.5)));
        let p = Point2D::new(2.0, 1.0);
        assert!(!spacelike(&p, &p));
    }

    #[test]
    fn hyperboloid_membership() {
        assert!(in_hyperboloid(&Point2D::new(2.0, 1.0), &1.0));
        assert!(!in_hyperboloid(&Point2D::new(2.0, 0.5), &1.0));
        assert!(!in_hyperboloid(&Point2D::new(-1.0, -2.0), &1.0));
    }

    #[test]
    fn inversion() {
        assert_eq!(invert_interval(&iv(2.0, 4.0), &1.0).unwrap(), iv(0.25, 0.5));
        assert_eq!(invert_interval(&iv(2.0, 4.0), &2.0).unwrap(), iv(1.0, 2.0));
        assert_eq!(
            invert_interval(&iv(0.0, 1.0), &1.0),
            Err(GeometryError::NonPositiveInterval)
        );
        let half_line = Interval::new(Ext::Finite(rat(2, 1)), Ext::PosInf).unwrap();
        assert_eq!(
            invert_interval(&half_line, &rat(1, 1)).unwrap(),
            riv((0, 1), (1, 2))
        );
    }

    #[test]
    fn net_index_examples() {
        let o = DoubleCone::new(riv((2, 1), (4, 1)), riv((1, 1), (3, 1)), rat(1, 1)).unwrap();
        let (a, b) = net_index(&o).unwrap();
        assert_eq!(a, riv((2, 1), (4, 1)));
        assert_eq!(b, riv((1, 3), (1, 1)));
        let (a, b) = net_index(&o.boost_by_factor(&rat(2, 1))).unwrap();
        assert_eq!(a, riv((4, 1), (8, 1)));
        assert_eq!(b, riv((2, 3), (2, 1)));
        assert_eq!(
            DoubleCone::new(riv((1, 1), (2, 1)), riv((2, 5), (3, 5)), rat(1, 1)),
            Err(GeometryError::ConeInvariantViolated)
        );
    }

    #[test]
    fn log_map_examples() {
        let e = 1f64.exp();
        let (t, x) = log_map(&Point2D::new(e, e), 1.0).unwrap();
        assert!(t.abs() < 1e-15 && (x - 1.0).abs() < 1e-15);
        let (t, x) = log_map(&Point2D::new(e * e, 1.0), 1.0).unwrap();
        assert!((t - 1.0).abs() < 1e-15 && (x - 1.0).abs() < 1e-15);
        assert_eq!(
            log_map(&Point2D::new(2.0, 0.5), 1.0),
            Err(GeometryError::OutsideDomain)
        );
        let p = Point2D::new(3.0, 0.7);
        let (t, x) = log_map(&p, 1.3).unwrap();
        let q = exp_map(t, x, 1.3).unwrap();
        assert!((q.u - p.u).abs() < 1e-14 && (q.v - p.v).abs() < 1e-14);
    }

    #[test]
    fn ordering() {
        assert_eq!(forward_order(&iv(0.0, 1.0), &iv(2.0, 3.0)), Order::After);
        assert_eq!(forward_order(&iv(2.0, 3.0), &iv(0.0, 1.0)), Order::Before);
        assert_eq!(forward_order(&iv(0.0, 2.0), &iv(1.0, 3.0)), Order::Overlapping);
    }

    #[test]
    fn induced_examples() {
        let (k, l) = induced_intervals(&iv(4.0, 5.0), &iv(1.0, 2.0)).unwrap();
        assert_eq!(k, Gap::Open(iv(2.0, 4.0)));
        assert_eq!(l, iv(1.0, 5.0));
        let (k, l) = induced_intervals(&iv(2.0, 3.0), &iv(1.0, 2.0)).unwrap();
        assert!(k.is_empty());
        assert_eq!(l, iv(1.0, 3.0));
        let (k, l) = induced_intervals_hyperboloid(&iv(4.0, 5.0), &iv(1.0, 2.0), &1.0).unwrap();
        assert_eq!(k, Gap::Open(iv(1.0, 4.0)));
        assert_eq!(l, iv(0.5, 5.0));
        assert_eq!(
            induced_intervals(&iv(1.0, 2.0), &iv(4.0, 5.0)),
            Err(GeometryError::NotOrdered)
        );
    }

    #[test]
    fn witness_examples() {
        let r = rat(1, 1);
        let o1 = DoubleCone::new(riv((2, 1), (3, 1)), riv((1, 1), (2, 1)), r.clone()).unwrap();
        let o2 = DoubleCone::new(riv((4, 1), (5, 1)), riv((3, 1), (4, 1)), r.clone()).unwrap();
        let cert = locality_witness(&o1, &o2).unwrap();
        for w in &cert.pairs {
            if w.first != w.second {
                assert!(matches!(w.reason, Justification::Forward { .. }));
            } else {
                assert!(matches!(w.reason, Justification::Disjoint(..)));
            }
        }
        // timelike: u ordered forward, v ordered backward
        let o3 = DoubleCone::new(riv((4, 1), (5, 1)), riv((1, 2), (3, 4)), r.clone()).unwrap();
        assert_eq!(locality_witness(&o1, &o3), Err(GeometryError::NotSpacelike));
        assert_eq!(locality_witness(&o1, &o1), Err(GeometryError::NotSpacelike));
    }


    fn arb_cone() -> impl Strategy<Value = DoubleCone<Rational>> {
        (1i64..5).prop_flat_map(cone_with_radius)
    }

    fn cone_with_radius(r: i64) -> impl Strategy<Value = DoubleCone<Rational>> {
        (1i64..50, 1i64..8, 1i64..30, 1i64..30, 1i64..30).prop_map(move |(u, q, du, dv, lv)| {
            let r = rat(r, 1);
            let ul = rat(u, q);
            let vl = &r * &r / &ul + rat(dv, q);
            DoubleCone::new(
                Interval::finite(ul.clone(), ul + rat(du, q)).unwrap(),
                Interval::finite(vl.clone(), vl + rat(lv, q)).unwrap(),
                r,
            )
            .unwrap()
        })
    }

    proptest! {
        #[test]
        fn net_index_is_boost_covariant(o in arb_cone(), p in 1i64..20, q in 1i64..20) {
            let l = rat(p, q);
            let (b, a) = net_index(&o).unwrap();
            let (bl, al) = net_index(&o.boost_by_factor(&l)).unwrap();
            prop_assert_eq!(bl, b.scale(&l));
            prop_assert_eq!(al, a.scale(&l));
        }

        #[test]
        fn boosts_compose(o in arb_cone(), p in 1i64..20, q in 1i64..20) {
            let (l, m) = (rat(p, q), rat(q, p + q));
            prop_assert_eq!(o.boost_by_factor(&l).boost_by_factor(&m), o.boost_by_factor(&(&l * &m)));
        }

        #[test]
        fn locality_is_symmetric_and_boost_invariant(
            (o1, o2) in (1i64..5).prop_flat_map(|r| (cone_with_radius(r), cone_with_radius(r))),
            p in 1i64..20,
        ) {
            let l = rat(p, 3);
            let w = locality_witness(&o1, &o2).is_ok();
            prop_assert_eq!(w, locality_witness(&o2, &o1).is_ok());
            prop_assert_eq!(w, cones_spacelike(&o1, &o2));
            prop_assert_eq!(w, locality_witness(&o1.boost_by_factor(&l), &o2.boost_by_factor(&l)).is_ok());
        }

        #[test]
        fn inversion_is_an_involution(a in 1i64..100, len in 1i64..100, q in 1i64..10, r in 1i64..6) {
            let i = riv((a, q), (a + len, q));
            let r = rat(r, 1);
            prop_assert_eq!(invert_interval(&invert_interval(&i, &r).unwrap(), &r).unwrap(), i);
        }
    }
}
