//! Candidate-model paths and the rules that pick one model from a path.

mod forward;
mod lasso;

use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, ArrayView1, ArrayView2};

use crate::error::{Result, SvemError};
use crate::scalar::Real;
use crate::wls::{sparse_sse, WlsFit};

pub use forward::{forward_path, pruned_forward_path};
pub use lasso::{lasso_path, lasso_path_with_lambdas, LassoConfig, LassoPath, WeightedStandardization, MAX_SWEEPS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SelectorKind {
    Forward,
    PrunedForward,
    Lasso,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Criterion {
    AutoValidation,
    Bic,
    Aicc,
}

impl fmt::Display for SelectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SelectorKind::Forward => "fwd",
            SelectorKind::PrunedForward => "pfwd",
            SelectorKind::Lasso => "lasso",
        })
    }
}

impl FromStr for SelectorKind {
    type Err = SvemError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fwd" => Ok(SelectorKind::Forward),
            "pfwd" => Ok(SelectorKind::PrunedForward),
            "lasso" => Ok(SelectorKind::Lasso),
            _ => Err(SvemError::InvalidSpec(format!("unknown selector '{s}' (expected fwd, pfwd or lasso)"))),
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Criterion::AutoValidation => "autovalid",
            Criterion::Bic => "bic",
            Criterion::Aicc => "aicc",
        })
    }
}

impl FromStr for Criterion {
    type Err = SvemError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "autovalid" => Ok(Criterion::AutoValidation),
            "bic" => Ok(Criterion::Bic),
            "aicc" => Ok(Criterion::Aicc),
            _ => Err(SvemError::InvalidSpec(format!("unknown criterion '{s}' (expected autovalid, bic or aicc)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectorSpec {
    pub kind: SelectorKind,
    /// Cap on forward additions. Ignored by the lasso.
    pub max_steps: usize,
    pub lambda_grid_size: usize,
    pub lambda_min_ratio: f64,
    pub criterion: Criterion,
}

impl SelectorSpec {
    pub fn new(kind: SelectorKind) -> Self {
        Self {
            kind,
            max_steps: usize::MAX,
            lambda_grid_size: 100,
            lambda_min_ratio: 1e-4,
            criterion: Criterion::AutoValidation,
        }
    }

    pub fn with_criterion(mut self, criterion: Criterion) -> Self {
        self.criterion = criterion;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_steps < 1 {
            return Err(SvemError::InvalidSpec("max steps must be at least 1".into()));
        }
        if self.kind == SelectorKind::Lasso && self.lambda_grid_size < 2 {
            return Err(SvemError::InvalidSpec("lasso grid needs at least two lambdas".into()));
        }
        Ok(())
    }

    pub fn lasso_config(&self) -> LassoConfig {
        LassoConfig { grid_size: self.lambda_grid_size, min_ratio: self.lambda_min_ratio, ..LassoConfig::default() }
    }
}

/// Runs the selector's path on the training weights. Pruned forward
/// selection also consults the validation weights.
pub fn run_path<T: Real>(
    spec: &SelectorSpec,
    x: ArrayView2<'_, T>,
    y: ArrayView1<'_, T>,
    w_train: ArrayView1<'_, T>,
    w_valid: ArrayView1<'_, T>,
) -> Result<Vec<WlsFit<T>>> {
    spec.validate()?;
    match spec.kind {
        SelectorKind::Forward => forward_path(x, y, w_train, spec.max_steps),
        SelectorKind::PrunedForward => pruned_forward_path(x, y, w_train, w_valid, spec.max_steps),
        SelectorKind::Lasso => lasso_path(x, y, w_train, &spec.lasso_config()),
    }
}

/// The model chosen from a path.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectedModel<T> {
    /// Dense coefficients, zeros for unselected terms.
    pub beta: Array1<T>,
    pub support_size: usize,
    /// Selection score: auto-validation SSE, or the unit-weight SSE for
    /// information-criterion fits.
    pub valid_sse: T,
    pub path_index: usize,
}

fn pick<T: Real>(
    path: &[WlsFit<T>],
    n_cols: usize,
    score: impl Fn(&WlsFit<T>) -> Option<T>,
    sse: impl Fn(&WlsFit<T>) -> T,
) -> Option<SelectedModel<T>> {
    let mut best: Option<(usize, T, usize)> = None;
    for (i, fit) in path.iter().enumerate() {
        let Some(s) = score(fit) else { continue };
        let size = fit.support_size();
        let better = match best {
            None => true,
            Some((_, bs, bsize)) => s < bs || (s == bs && size < bsize),
        };
        if better {
            best = Some((i, s, size));
        }
    }
    best.map(|(i, _, size)| SelectedModel {
        beta: path[i].dense(n_cols),
        support_size: size,
        valid_sse: sse(&path[i]),
        path_index: i,
    })
}

/// Picks the path point with the smallest auto-validation SSE; ties go to the
/// smaller model, then the earlier path point.
pub fn select_from_path<T: Real>(
    path: &[WlsFit<T>],
    x: ArrayView2<'_, T>,
    y: ArrayView1<'_, T>,
    w_valid: ArrayView1<'_, T>,
) -> Result<SelectedModel<T>> {
    if x.nrows() != y.len() || x.nrows() != w_valid.len() {
        return Err(SvemError::DimensionMismatch("validation weights do not match the model matrix".into()));
    }
    let sse = |f: &WlsFit<T>| sparse_sse(x, &f.support, &f.beta, y, w_valid);
    pick(path, x.ncols(), |f| Some(sse(f)), sse)
        .ok_or_else(|| SvemError::InvalidSpec("cannot select from an empty path".into()))
}

/// Information criterion of a fit with residual sum of squares `sse` and `k`
/// parameters (intercept included) on `n` observations. `None` where AICc is
/// undefined.
pub fn information_criterion<T: Real>(criterion: Criterion, sse: T, n: usize, k: usize) -> Option<T> {
    let nf = T::of_usize(n);
    let kf = T::of_usize(k);
    let fit = nf * (sse / nf).ln();
    match criterion {
        Criterion::Bic => Some(fit + kf * nf.ln()),
        Criterion::Aicc => {
            if n <= k + 1 {
                None
            } else {
                let two = T::of(2.0);
                Some(fit + two * kf + two * kf * (kf + T::one()) / (nf - kf - T::one()))
            }
        }
        Criterion::AutoValidation => None,
    }
}

/// A conventional one-pass fit: unit weights for the path, selection by BIC
/// or AICc.
pub fn single_shot_fit<T: Real>(
    x: ArrayView2<'_, T>,
    y: ArrayView1<'_, T>,
    spec: &SelectorSpec,
) -> Result<SelectedModel<T>> {
    if spec.criterion == Criterion::AutoValidation {
        return Err(SvemError::InvalidSpec("single-shot fits need the bic or aicc criterion".into()));
    }
    let n = x.nrows();
    let ones = Array1::<T>::ones(n);
    let path = run_path(spec, x, y, ones.view(), ones.view())?;
    let sse = |f: &WlsFit<T>| sparse_sse(x, &f.support, &f.beta, y, ones.view());
    let score = |f: &WlsFit<T>| information_criterion(spec.criterion, sse(f), n, f.support_size() + 1);
    pick(&path, x.ncols(), score, sse).ok_or(SvemError::CriterionInfeasible { n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::designs::{expand_full_quadratic, make_dsd};
    use ndarray::array;

    fn fit(support: Vec<usize>, beta: Vec<f64>) -> WlsFit<f64> {
        WlsFit { support, beta, train_sse: 0.0, rank: 0 }
    }

    #[test]
    fn single_element_path() {
        let x = array![[1.0, 0.0], [1.0, 1.0]];
        let y = array![1.0, 2.0];
        let sel = select_from_path(&[fit(vec![0], vec![1.5])], x.view(), y.view(), array![1.0, 1.0].view()).unwrap();
        assert_eq!(sel.path_index, 0);
        assert_eq!(sel.beta.to_vec(), vec![1.5, 0.0]);
    }

    #[test]
    fn perfect_model_wins() {
        let x = array![[1.0, -1.0], [1.0, 0.0], [1.0, 1.0]];
        let y = array![-1.0, 1.0, 3.0];
        let path = vec![fit(vec![0], vec![1.0]), fit(vec![0, 1], vec![1.0, 2.0]), fit(vec![0, 1], vec![1.1, 2.0])];
        let sel = select_from_path(&path, x.view(), y.view(), array![1.0, 1.0, 1.0].view()).unwrap();
        assert_eq!(sel.path_index, 1);
        assert_eq!(sel.valid_sse, 0.0);
        assert_eq!(sel.support_size, 1);
    }

    #[test]
    fn ties_prefer_smaller_support() {
        let x = array![[1.0, 0.0], [1.0, 0.0]];
        let y = array![2.0, 2.0];
        let path = vec![fit(vec![0, 1], vec![2.0, 5.0]), fit(vec![0], vec![2.0])];
        let sel = select_from_path(&path, x.view(), y.view(), array![1.0, 1.0].view()).unwrap();
        assert_eq!(sel.path_index, 1);
    }

    #[test]
    fn empty_path_rejected() {
        let x = array![[1.0]];
        assert!(select_from_path::<f64>(&[], x.view(), array![1.0].view(), array![1.0].view()).is_err());
    }

    #[test]
    fn criterion_formulas() {
        let bic: f64 = information_criterion(Criterion::Bic, 20.0, 10, 3).unwrap();
        assert!((bic - (10.0 * 2.0f64.ln() + 3.0 * 10.0f64.ln())).abs() < 1e-12);
        let aicc: f64 = information_criterion(Criterion::Aicc, 20.0, 10, 3).unwrap();
        assert!((aicc - (10.0 * 2.0f64.ln() + 6.0 + 24.0 / 6.0)).abs() < 1e-12);
        assert!(information_criterion::<f64>(Criterion::Aicc, 20.0, 10, 9).is_none());
    }

    #[test]
    fn single_shot_requires_information_criterion() {
        let m = expand_full_quadratic(&make_dsd::<f64>(4, 2, 1).unwrap());
        let y = Array1::zeros(13);
        let spec = SelectorSpec::new(SelectorKind::Forward);
        assert!(matches!(single_shot_fit(m.values.view(), y.view(), &spec), Err(SvemError::InvalidSpec(_))));
    }

    #[test]
    fn single_shot_on_length_one_path() {
        let m = expand_full_quadratic(&make_dsd::<f64>(4, 2, 1).unwrap());
        let y = Array1::from_elem(13, 4.0);
        for c in [Criterion::Bic, Criterion::Aicc] {
            let spec = SelectorSpec::new(SelectorKind::Forward).with_criterion(c);
            let sel = single_shot_fit(m.values.view(), y.view(), &spec).unwrap();
            assert_eq!(sel.path_index, 0);
            assert_eq!(sel.support_size, 0);
        }
    }

    #[test]
    fn aicc_infeasible_on_tiny_data() {
        // n = 2: even the intercept-only model has n - k - 1 = 0
        let x = array![[1.0, -1.0], [1.0, 1.0]];
        let y = array![1.0, 3.0];
        let spec = SelectorSpec::new(SelectorKind::Forward).with_criterion(Criterion::Aicc);
        assert_eq!(single_shot_fit(x.view(), y.view(), &spec).unwrap_err(), SvemError::CriterionInfeasible { n: 2 });
    }

    #[test]
    fn parse_names() {
        assert_eq!("pfwd".parse::<SelectorKind>().unwrap(), SelectorKind::PrunedForward);
        assert_eq!("aicc".parse::<Criterion>().unwrap(), Criterion::Aicc);
        assert!("ridge".parse::<SelectorKind>().is_err());
    }
}
