use ndarray::{Array2, ArrayView1, ArrayView2};

use crate::error::{Result, SvemError};
use crate::scalar::Real;
use crate::wls::{check_weights, sparse_sse, WlsFit};

pub const MAX_SWEEPS: usize = 100_000;

/// Lasso settings. Defaults: 100 log-spaced lambdas down to `1e-4 * lambda_max`,
/// stop when no standardized coefficient moves by more than `1e-7` in a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LassoConfig {
    pub grid_size: usize,
    pub min_ratio: f64,
    pub tolerance: f64,
    pub max_sweeps: usize,
}

impl Default for LassoConfig {
    fn default() -> Self {
        Self { grid_size: 100, min_ratio: 1e-4, tolerance: 1e-7, max_sweeps: MAX_SWEEPS }
    }
}

/// A lasso path: one fit per lambda, lambdas in decreasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct LassoPath<T> {
    pub lambdas: Vec<T>,
    pub fits: Vec<WlsFit<T>>,
}

/// Weighted column standardization used internally by the lasso.
#[derive(Debug, Clone)]
pub struct WeightedStandardization<T> {
    pub means: Vec<T>,
    /// Weighted standard deviations; zero marks a column with no spread.
    pub scales: Vec<T>,
}

impl<T: Real> WeightedStandardization<T> {
    /// Weighted mean and (population) weighted variance of each non-intercept
    /// column. Index 0 is left at mean 0, scale 0.
    pub fn new(x: ArrayView2<'_, T>, w: ArrayView1<'_, T>) -> Self {
        let total: T = w.sum();
        let p1 = x.ncols();
        let mut means = vec![T::zero(); p1];
        let mut scales = vec![T::zero(); p1];
        for j in 1..p1 {
            let col = x.column(j);
            let m = col.iter().zip(w.iter()).map(|(&v, &wi)| wi * v).sum::<T>() / total;
            let var = col.iter().zip(w.iter()).map(|(&v, &wi)| wi * (v - m) * (v - m)).sum::<T>() / total;
            let mag = col.iter().fold(T::zero(), |a, &v| a.max(v.abs()));
            means[j] = m;
            // columns constant on the weighted support carry no information
            scales[j] = if var.sqrt() > T::pivot_tolerance() * mag { var.sqrt() } else { T::zero() };
        }
        Self { means, scales }
    }

    /// The standardized matrix; columns with zero scale (and the intercept) are zero.
    pub fn apply(&self, x: ArrayView2<'_, T>) -> Array2<T> {
        let mut out = Array2::zeros(x.dim());
        for j in 1..x.ncols() {
            if self.scales[j] == T::zero() {
                continue;
            }
            for i in 0..x.nrows() {
                out[[i, j]] = (x[[i, j]] - self.means[j]) / self.scales[j];
            }
        }
        out
    }
}

fn soft_threshold<T: Real>(z: T, lambda: T) -> T {
    if z > lambda {
        z - lambda
    } else if z < -lambda {
        z + lambda
    } else {
        T::zero()
    }
}

/// Weighted lasso path by cyclic coordinate descent with warm starts.
///
/// Minimizes `1/2 sum_i w[i] (y[i] - b0 - xs[i] . b)^2 + lambda sum_j |b_j|`
/// on weighted-standardized columns `xs`, intercept unpenalized. Returned
/// coefficients are on the original column scale.
pub fn lasso_path_with_lambdas<T: Real>(
    x: ArrayView2<'_, T>,
    y: ArrayView1<'_, T>,
    w: ArrayView1<'_, T>,
    cfg: &LassoConfig,
) -> Result<LassoPath<T>> {
    if cfg.grid_size < 2 {
        return Err(SvemError::InvalidSpec("lasso grid needs at least two lambdas".into()));
    }
    if !(cfg.min_ratio > 0.0 && cfg.min_ratio < 1.0) {
        return Err(SvemError::InvalidSpec(format!("lambda min ratio {} not in (0, 1)", cfg.min_ratio)));
    }
    let n = x.nrows();
    if y.len() != n || w.len() != n {
        return Err(SvemError::DimensionMismatch(format!(
            "model matrix has {n} rows, response {} and weights {}",
            y.len(),
            w.len()
        )));
    }
    check_weights(w)?;

    let p1 = x.ncols();
    let total: T = w.sum();
    let stdz = WeightedStandardization::new(x, w);
    let xs = stdz.apply(x);
    let active: Vec<usize> = (1..p1).filter(|&j| stdz.scales[j] > T::zero()).collect();
    // sum_i w x~_ij^2 over each usable column
    let curvature: Vec<T> = (0..p1)
        .map(|j| (0..n).map(|i| w[i] * xs[[i, j]] * xs[[i, j]]).sum())
        .collect();

    let y_mean = y.iter().zip(w.iter()).map(|(&v, &wi)| wi * v).sum::<T>() / total;
    let mut resid: Vec<T> = y.iter().map(|&v| v - y_mean).collect();

    let grad = |j: usize, r: &[T]| -> T { (0..n).map(|i| w[i] * xs[[i, j]] * r[i]).sum() };
    let lambda_max = active.iter().fold(T::zero(), |a, &j| a.max(grad(j, &resid).abs()));
    let ratio = T::of(cfg.min_ratio);
    let last = T::of_usize(cfg.grid_size - 1);
    let lambdas: Vec<T> = (0..cfg.grid_size)
        .map(|k| lambda_max * ratio.powf(T::of_usize(k) / last))
        .collect();

    let tol = T::of(cfg.tolerance);
    let mut b = vec![T::zero(); p1];
    let mut fits = Vec::with_capacity(lambdas.len());
    for (li, &lambda) in lambdas.iter().enumerate() {
        let mut converged = false;
        let mut final_polish = false;
        for sweep in 0..cfg.max_sweeps {
            if sweep > 0 && sweep % POLISH_EVERY == 0 {
                polish(&xs, w, &active, lambda, &mut b, &mut resid);
            }
            let mut max_change = T::zero();
            for &j in &active {
                let old = b[j];
                let z = grad(j, &resid) + curvature[j] * old;
                let new = soft_threshold(z, lambda) / curvature[j];
                if new != old {
                    let d = new - old;
                    for i in 0..n {
                        resid[i] -= xs[[i, j]] * d;
                    }
                    b[j] = new;
                    max_change = max_change.max(d.abs());
                }
            }
            // below a few ulps of the coefficients a change is rounding noise
            let floor = T::epsilon() * T::of(16.0) * (T::one() + b.iter().fold(T::zero(), |a, v| a.max(v.abs())));
            if max_change < tol.max(floor) {
                // one exact jump from the converged support, confirmed by a sweep
                if !final_polish && polish(&xs, w, &active, lambda, &mut b, &mut resid) {
                    final_polish = true;
                    continue;
                }
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(SvemError::NoConvergence { lambda_index: li });
        }
        fits.push(unstandardize(x, y, w, &stdz, y_mean, &b));
    }
    Ok(LassoPath { lambdas, fits })
}

/// Sweeps between attempts to jump straight to the solution on the current
/// signed support. Plain cyclic descent crawls when columns are nearly
/// collinear under the weights.
const POLISH_EVERY: usize = 50;

/// Tries to jump straight to an exact solution from the current signed
/// support. Columns are taken in order of decreasing magnitude and a column
/// numerically dependent on those before it is dropped to zero. The
/// stationarity equations are solved with signs held fixed; an inactive
/// column whose gradient then exceeds `lambda` is moved to the front with the
/// sign of its gradient and the solve repeated. The jump is taken only when
/// every sign holds and every inactive gradient is within `lambda`, so an
/// accepted point is a lasso solution. Otherwise nothing changes. Returns
/// whether it jumped.
fn polish<T: Real>(xs: &Array2<T>, w: ArrayView1<'_, T>, active: &[usize], lambda: T, b: &mut [T], resid: &mut [T]) -> bool {
    let mut order: Vec<usize> = active.iter().copied().filter(|&j| b[j] != T::zero()).collect();
    if order.is_empty() {
        return false;
    }
    order.sort_by(|&a, &c| b[c].abs().partial_cmp(&b[a].abs()).unwrap_or(std::cmp::Ordering::Equal));
    let current: Vec<usize> = order.clone();
    let mut sign: Vec<T> = b.iter().map(|v| if *v == T::zero() { T::zero() } else { v.signum() }).collect();
    let n = xs.nrows();
    let gram = |a: usize, c: usize| -> T { (0..n).map(|i| w[i] * xs[[i, a]] * xs[[i, c]]).sum() };
    let scale = active.iter().fold(T::zero(), |a, &j| a.max(gram(j, j)));
    // xs' W (y - ybar), recovered from the residual of the current iterate
    let target: Vec<T> = (0..b.len())
        .map(|a| {
            if !active.contains(&a) {
                return T::zero();
            }
            let gr: T = (0..n).map(|i| w[i] * xs[[i, a]] * resid[i]).sum();
            gr + current.iter().map(|&c| gram(a, c) * b[c]).sum::<T>()
        })
        .collect();

    let mut forced = 0;
    for _ in 0..active.len() {
        let mut kept: Vec<usize> = Vec::new();
        let mut l: Vec<Vec<T>> = Vec::new();
        for &j in &order {
            let mut row = Vec::with_capacity(kept.len() + 1);
            for (p, &c) in kept.iter().enumerate() {
                let v = gram(j, c) - (0..p).map(|q| row[q] * l[p][q]).sum::<T>();
                row.push(v / l[p][p]);
            }
            let d = gram(j, j) - row.iter().map(|&v| v * v).sum::<T>();
            if !(d > T::epsilon() * T::of(1e3) * scale) {
                continue;
            }
            row.push(d.sqrt());
            l.push(row);
            kept.push(j);
        }
        let k = kept.len();
        let mut sol: Vec<T> = kept.iter().map(|&a| target[a] - lambda * sign[a]).collect();
        for i in 0..k {
            let v = sol[i] - (0..i).map(|p| l[i][p] * sol[p]).sum::<T>();
            sol[i] = v / l[i][i];
        }
        for i in (0..k).rev() {
            let v = sol[i] - (i + 1..k).map(|p| l[p][i] * sol[p]).sum::<T>();
            sol[i] = v / l[i][i];
        }
        if kept.iter().zip(&sol).any(|(&j, &v)| v == T::zero() || v.signum() != sign[j]) {
            return false;
        }

        let mut next = vec![T::zero(); b.len()];
        for (&j, &v) in kept.iter().zip(&sol) {
            next[j] = v;
        }
        let mut trial = resid.to_vec();
        for &j in active {
            let d = next[j] - b[j];
            if d != T::zero() {
                for i in 0..n {
                    trial[i] -= xs[[i, j]] * d;
                }
            }
        }
        let slack = lambda * T::of(1e-9).max(T::epsilon() * T::of(100.0));
        let mut worst: Option<(usize, T, T)> = None;
        for &j in active.iter().filter(|&&j| next[j] == T::zero()) {
            let gr: T = (0..n).map(|i| w[i] * xs[[i, j]] * trial[i]).sum();
            let excess = gr.abs() - lambda - slack;
            if excess > T::zero() && worst.is_none_or(|(_, e, _)| excess > e) {
                worst = Some((j, excess, gr));
            }
        }
        match worst {
            None => {
                for &j in active {
                    b[j] = next[j];
                }
                resid.copy_from_slice(&trial);
                return true;
            }
            Some((j, _, gr)) => {
                if order[..forced].contains(&j) {
                    return false;
                }
                order.retain(|&c| c != j);
                order.insert(forced, j);
                forced += 1;
                sign[j] = gr.signum();
            }
        }
    }
    false
}

fn unstandardize<T: Real>(
    x: ArrayView2<'_, T>,
    y: ArrayView1<'_, T>,
    w: ArrayView1<'_, T>,
    stdz: &WeightedStandardization<T>,
    y_mean: T,
    b: &[T],
) -> WlsFit<T> {
    let mut support = vec![0];
    let mut beta = vec![T::zero()];
    let mut intercept = y_mean;
    for j in 1..b.len() {
        if b[j] == T::zero() {
            continue;
        }
        let coef = b[j] / stdz.scales[j];
        if coef.abs() < T::zero_snap() {
            continue;
        }
        intercept -= coef * stdz.means[j];
        support.push(j);
        beta.push(coef);
    }
    beta[0] = intercept;
    let train_sse = sparse_sse(x, &support, &beta, y, w);
    let rank = support.len();
    WlsFit { support, beta, train_sse, rank }
}

/// The fits of [`lasso_path_with_lambdas`].
pub fn lasso_path<T: Real>(
    x: ArrayView2<'_, T>,
    y: ArrayView1<'_, T>,
    w: ArrayView1<'_, T>,
    cfg: &LassoConfig,
) -> Result<Vec<WlsFit<T>>> {
    lasso_path_with_lambdas(x, y, w, cfg).map(|p| p.fits)
}
