//! Paired fractional bootstrap weights.
//!
//! A single uniform draw `u` per run is pushed through the inverse CDF of the
//! unit exponential twice, once as `u` and once as `1 - u`, giving a training
//! weight and an anti-correlated auto-validation weight for the same run.

use ndarray::Array1;
use rand::Rng;

use crate::scalar::Real;

/// Uniform draws are clamped into `[EPSILON, 1 - EPSILON]` so both logs stay finite.
pub const UNIFORM_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightPair<T> {
    pub train: Array1<T>,
    pub valid: Array1<T>,
    /// The underlying uniform draws, kept for audit.
    pub u: Array1<f64>,
}

/// Inverse CDF of the unit-mean exponential.
#[inline]
pub fn exp_quantile(p: f64) -> f64 {
    -(-p).ln_1p()
}

impl<T: Real> WeightPair<T> {
    /// Builds the pair from given uniforms (after clamping).
    pub fn from_uniforms(u: impl IntoIterator<Item = f64>) -> Self {
        let u: Array1<f64> = u.into_iter().map(|v| v.clamp(UNIFORM_EPSILON, 1.0 - UNIFORM_EPSILON)).collect();
        let train = u.mapv(|p| T::of(exp_quantile(p)));
        let valid = u.mapv(|p| T::of(exp_quantile(1.0 - p)));
        Self { train, valid, u }
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }
}

/// Draws one weight pair for `n` runs.
pub fn draw_weights<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> WeightPair<T> {
    WeightPair::from_uniforms((0..n).map(|_| rng.random::<f64>()))
}
