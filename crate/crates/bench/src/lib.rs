//! Fixed inputs shared by the kernel benchmarks.

use hypernet::axb::{Grid, GridState};
use hypernet::inner::InnerFunction;
use hypernet::modular::StandardSubspace;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `b_i · b_{1+i} · e^{iλ}`: zeros `i`, `±1+i` and a singular factor.
pub fn sample_inner() -> InnerFunction {
    let b = |re, im| InnerFunction::blaschke(Complex64::new(re, im)).expect("upper half-plane");
    b(0.0, 1.0)
        .multiply(&b(1.0, 1.0))
        .multiply(&InnerFunction::exponential(1.0).expect("a ≥ 0"))
}

/// Points on the real line and just above it.
pub fn eval_points(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|j| Complex64::new(-20.0 + 40.0 * j as f64 / n as f64, if j % 2 == 0 { 0.0 } else { 0.5 }))
        .collect()
}

pub fn gaussian_state() -> GridState {
    GridState::gaussian(Grid::default(), -1.0, 1.0, 0.3)
}

pub fn subspace(n: usize) -> StandardSubspace {
    StandardSubspace::random(n, &mut ChaCha8Rng::seed_from_u64(n as u64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_valid() {
        assert_eq!(sample_inner().zeros().len(), 3);
        assert_eq!(eval_points(8).len(), 8);
        assert!((gaussian_state().norm() - 1.0).abs() < 0.5);
        assert_eq!(subspace(4).dim(), 4);
    }
}
