//! Prediction-error metrics.

use ndarray::{Array1, ArrayView1};

use crate::designs::{expand_full_quadratic, Design, ModelMatrix};
use crate::engine::predict_matrix;
use crate::error::{Result, SvemError};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalReport<T> {
    pub rmspe: T,
    /// Natural log of `rmspe`; `-inf` when the prediction is exact.
    pub log_rmspe: T,
    pub r2: Option<T>,
    pub n_points: usize,
}

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(SvemError::DimensionMismatch(format!("{a} observations vs {b} predictions")));
    }
    if a == 0 {
        return Err(SvemError::DimensionMismatch("empty vectors".into()));
    }
    Ok(())
}

/// Root mean squared prediction error.
pub fn rmspe<T: Real>(truth: ArrayView1<'_, T>, pred: ArrayView1<'_, T>) -> Result<T> {
    check_lengths(truth.len(), pred.len())?;
    let ss: T = truth.iter().zip(pred.iter()).map(|(&t, &p)| (t - p) * (t - p)).sum();
    Ok((ss / T::of_usize(truth.len())).sqrt())
}

/// Coefficient of determination, `1 - SSE / SST`. Not clamped below.
pub fn r_squared<T: Real>(observed: ArrayView1<'_, T>, pred: ArrayView1<'_, T>) -> Result<T> {
    check_lengths(observed.len(), pred.len())?;
    if observed.len() < 2 {
        return Err(SvemError::DimensionMismatch("r squared needs at least two observations".into()));
    }
    let mean = observed.sum() / T::of_usize(observed.len());
    let sst: T = observed.iter().map(|&o| (o - mean) * (o - mean)).sum();
    if sst == T::zero() {
        return Err(SvemError::DegenerateVariance);
    }
    let sse: T = observed.iter().zip(pred.iter()).map(|(&o, &p)| (o - p) * (o - p)).sum();
    Ok(T::one() - sse / sst)
}

/// Noise-free scoring against a fixed true surface on an expanded design.
#[derive(Debug, Clone)]
pub struct SurfaceScorer<T> {
    pub matrix: ModelMatrix<T>,
    pub truth: Array1<T>,
}

impl<T: Real> SurfaceScorer<T> {
    pub fn new(true_beta: ArrayView1<'_, T>, design: &Design<T>) -> Result<Self> {
        let matrix = expand_full_quadratic(design);
        let truth = predict_matrix(&matrix, true_beta)?;
        Ok(Self { matrix, truth })
    }

    pub fn score(&self, fit_beta: ArrayView1<'_, T>) -> Result<EvalReport<T>> {
        let pred = predict_matrix(&self.matrix, fit_beta)?;
        let e = rmspe(self.truth.view(), pred.view())?;
        Ok(EvalReport { rmspe: e, log_rmspe: e.ln(), r2: None, n_points: self.truth.len() })
    }

    /// Order-sensitive hash of the true responses, for checking that scores
    /// share one surface.
    pub fn truth_checksum(&self) -> u64 {
        self.truth.iter().fold(0xCBF2_9CE4_8422_2325u64, |h, v| {
            (h ^ v.as_f64().to_bits()).wrapping_mul(0x0000_0100_0000_01B3)
        })
    }
}

/// RMSPE of `fit_beta` against the noise-free `true_beta` surface over `sfd`.
pub fn evaluate_on_sfd<T: Real>(
    true_beta: ArrayView1<'_, T>,
    fit_beta: ArrayView1<'_, T>,
    sfd: &Design<T>,
) -> Result<EvalReport<T>> {
    SurfaceScorer::new(true_beta, sfd)?.score(fit_beta)
}
