//! Contour-integral analyticity tests.
//!
//! A function analytic on a neighbourhood of a closed rectangle integrates to
//! zero around its boundary; the normalized residual
//! `|∮F dz| / (perimeter · max|F|)` measures how far a sampled function is from
//! that.

use num_complex::Complex64;
use serde::Serialize;

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            // p1 = P_n(z), p0 = P_{n-1}(z)
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]` in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Self { x0, x1, y0, y1 }
    }

    pub fn perimeter(&self) -> f64 {
        2.0 * ((self.x1 - self.x0) + (self.y1 - self.y0))
    }

    /// Quadrature nodes `(z, w·dz)` running counter-clockwise around the boundary.
    pub fn contour(&self, nodes: usize) -> Vec<(Complex64, Complex64)> {
        let (gx, gw) = gauss_legendre(nodes);
        let corners = [
            Complex64::new(self.x0, self.y0),
            Complex64::new(self.x1, self.y0),
            Complex64::new(self.x1, self.y1),
            Complex64::new(self.x0, self.y1),
        ];
        let mut out = Vec::with_capacity(4 * nodes);
        for side in 0..4 {
            let a = corners[side];
            let b = corners[(side + 1) % 4];
            let half = (b - a) / 2.0;
            let mid = (a + b) / 2.0;
            for (x, w) in gx.iter().zip(&gw) {
                out.push((mid + half * *x, half * *w));
            }
        }
        out
    }
}

/// Normalized Cauchy residual of `values` sampled on `rect.contour(nodes)`.
pub fn cauchy_residual_from_samples(rect: &Rect, contour: &[(Complex64, Complex64)], values: &[Complex64]) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut peak: f64 = 0.0;
    for ((_, dz), f) in contour.iter().zip(values) {
        acc += f * dz;
        peak = peak.max(f.norm());
    }
    if peak == 0.0 {
        0.0
    } else {
        acc.norm() / (rect.perimeter() * peak)
    }
}

/// Normalized Cauchy residual of `f` around `rect`.
pub fn cauchy_residual(f: impl Fn(Complex64) -> Complex64, rect: &Rect, nodes: usize) -> f64 {
    let contour = rect.contour(nodes);
    let values: Vec<Complex64> = contour.iter().map(|(z, _)| f(*z)).collect();
    cauchy_residual_from_samples(rect, &contour, &values)
}

/// JSON record `{test, rectangle, residual, pass}`.
#[derive(Debug, Clone, Serialize)]
pub struct AnalyticityReport {
    pub test: String,
    pub rectangle: Rect,
    pub residual: f64,
    pub pass: bool,
}

impl AnalyticityReport {
    pub fn new(test: &str, rectangle: Rect, residual: f64, threshold: f64) -> Self {
        Self {
            test: test.to_string(),
            rectangle,
            residual,
            pass: residual < threshold,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        // exact for degree ≤ 15
        let i14: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((i14 - 2.0 / 15.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn entire_function_has_small_residual() {
        let r = Rect::new(-1.0, 1.0, 0.5, 1.5);
        assert!(cauchy_residual(|z| (z * z).exp(), &r, 32) < 1e-13);
    }

    #[test]
    fn pole_inside_is_detected() {
        let r = Rect::new(-1.0, 1.0, 0.5, 1.5);
        let res = cauchy_residual(|z| 1.0 / (z - Complex64::new(0.0, 1.0)), &r, 64);
        assert!(res > 0.1);
    }
}
