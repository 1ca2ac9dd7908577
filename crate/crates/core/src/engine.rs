//! The self-validated ensemble: repeated fractional-weight fits, each picked
//! on its auto-validation twin, stacked into an ensemble matrix and bagged.

use ndarray::{Array1, Array2, ArrayView1, Axis};
use rayon::prelude::*;

use crate::designs::{expand_full_quadratic, Design, ModelMatrix, Term};
use crate::error::{Result, SvemError};
use crate::rng::SeedStream;
use crate::scalar::Real;
use crate::selectors::{run_path, select_from_path, Criterion, SelectedModel, SelectorSpec};
use crate::weights::{draw_weights, WeightPair};

/// Default iteration count.
pub const DEFAULT_NBOOT: usize = 200;

/// One dense coefficient row per bootstrap iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleMatrix<T> {
    pub rows: Array2<T>,
    pub terms: Vec<Term>,
}

impl<T: Real> EnsembleMatrix<T> {
    pub fn n_boot(&self) -> usize {
        self.rows.nrows()
    }

    /// Column means.
    pub fn bag(&self) -> Array1<T> {
        let n = T::of_usize(self.rows.nrows());
        self.rows.sum_axis(Axis(0)).mapv(|s| s / n)
    }

    /// Share of rows in which each term has a nonzero coefficient.
    pub fn selection_fraction(&self) -> Array1<T> {
        let n = T::of_usize(self.rows.nrows());
        self.rows
            .columns()
            .into_iter()
            .map(|c| T::of_usize(c.iter().filter(|&&v| v != T::zero()).count()) / n)
            .collect()
    }
}

/// The bagged model.
#[derive(Debug, Clone, PartialEq)]
pub struct SvemModel<T> {
    pub beta: Array1<T>,
    pub selection_fraction: Array1<T>,
    pub n_boot: usize,
    pub selector: SelectorSpec,
    pub seed: u64,
    pub terms: Vec<Term>,
}

impl<T: Real> SvemModel<T> {
    /// Factor count implied by the term list.
    pub fn n_factors(&self) -> usize {
        self.terms.iter().filter(|t| matches!(t, Term::Main(_))).count()
    }

    /// Nonzero non-intercept bagged coefficients.
    pub fn support_size(&self) -> usize {
        self.beta.iter().skip(1).filter(|&&b| b != T::zero()).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvemFit<T> {
    pub model: SvemModel<T>,
    pub ensemble: EnsembleMatrix<T>,
}

/// Weights for iteration `i` of a fit seeded with `seed`.
pub fn iteration_weights<T: Real>(seed: u64, iteration: usize, n: usize) -> WeightPair<T> {
    draw_weights(n, &mut SeedStream::new(seed).substream(iteration as u64))
}

/// One bootstrap iteration.
pub fn svem_iteration<T: Real>(
    m: &ModelMatrix<T>,
    y: ArrayView1<'_, T>,
    spec: &SelectorSpec,
    weights: &WeightPair<T>,
) -> Result<SelectedModel<T>> {
    let x = m.values.view();
    let path = run_path(spec, x, y, weights.train.view(), weights.valid.view())?;
    select_from_path(&path, x, y, weights.valid.view())
}

/// Fits the ensemble. Iteration `i` draws its weights from substream `i` of
/// `seed`, so the result does not depend on how iterations are scheduled.
pub fn svem_fit<T: Real>(
    m: &ModelMatrix<T>,
    y: ArrayView1<'_, T>,
    spec: &SelectorSpec,
    n_boot: usize,
    seed: u64,
) -> Result<SvemFit<T>> {
    if n_boot < 1 {
        return Err(SvemError::InvalidSpec("nboot must be at least 1".into()));
    }
    if spec.criterion != Criterion::AutoValidation {
        return Err(SvemError::InvalidSpec("the ensemble selects on auto-validation SSE".into()));
    }
    spec.validate()?;
    if y.len() != m.n_rows() {
        return Err(SvemError::DimensionMismatch(format!(
            "model matrix has {} rows, response {}",
            m.n_rows(),
            y.len()
        )));
    }

    let n = m.n_rows();
    let results: Vec<Result<SelectedModel<T>>> = (0..n_boot)
        .into_par_iter()
        .map(|i| {
            let w = iteration_weights(seed, i, n);
            svem_iteration(m, y, spec, &w)
                .map_err(|e| SvemError::Iteration { iteration: i, source: Box::new(e) })
        })
        .collect();

    let mut rows = Array2::<T>::zeros((n_boot, m.n_cols()));
    for (i, r) in results.into_iter().enumerate() {
        rows.row_mut(i).assign(&r?.beta);
    }
    let ensemble = EnsembleMatrix { rows, terms: m.terms.clone() };
    let model = SvemModel {
        beta: ensemble.bag(),
        selection_fraction: ensemble.selection_fraction(),
        n_boot,
        selector: *spec,
        seed,
        terms: m.terms.clone(),
    };
    Ok(SvemFit { model, ensemble })
}

/// `X beta` for a model matrix.
pub fn predict_matrix<T: Real>(m: &ModelMatrix<T>, beta: ArrayView1<'_, T>) -> Result<Array1<T>> {
    if beta.len() != m.n_cols() {
        return Err(SvemError::DimensionMismatch(format!(
            "{} coefficients for {} model columns",
            beta.len(),
            m.n_cols()
        )));
    }
    Ok(m.values.dot(&beta))
}

/// Predictions of the bagged model at the runs of `d`.
pub fn svem_predict<T: Real>(model: &SvemModel<T>, d: &Design<T>) -> Result<Array1<T>> {
    let expected = model.n_factors();
    if d.n_factors() != expected {
        return Err(SvemError::FactorMismatch { expected, found: d.n_factors() });
    }
    let m = expand_full_quadratic(d);
    if m.terms != model.terms {
        return Err(SvemError::DimensionMismatch("model terms do not match the design expansion".into()));
    }
    predict_matrix(&m, model.beta.view())
}
