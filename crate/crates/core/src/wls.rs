//! Weighted least squares on a column subset, via Householder QR with column
//! pivoting of `diag(sqrt(w)) X`.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Result, SvemError};
use crate::scalar::Real;

/// A weighted least-squares fit restricted to `support`.
#[derive(Debug, Clone, PartialEq)]
pub struct WlsFit<T> {
    /// Column indices of the fitted terms, in the order they were supplied.
    pub support: Vec<usize>,
    /// Coefficient for each support entry.
    pub beta: Vec<T>,
    /// Weighted residual sum of squares on the fitting weights.
    pub train_sse: T,
    /// Numerical rank of the weighted subproblem.
    pub rank: usize,
}

impl<T: Real> WlsFit<T> {
    /// Coefficients scattered into a dense vector of length `n_cols`.
    pub fn dense(&self, n_cols: usize) -> Array1<T> {
        let mut out = Array1::zeros(n_cols);
        for (&j, &b) in self.support.iter().zip(&self.beta) {
            out[j] = b;
        }
        out
    }

    /// Number of nonzero non-intercept coefficients.
    pub fn support_size(&self) -> usize {
        self.support
            .iter()
            .zip(&self.beta)
            .filter(|(&j, &b)| j != 0 && b != T::zero())
            .count()
    }
}

pub(crate) fn check_weights<T: Real>(w: ArrayView1<'_, T>) -> Result<()> {
    let mut any_positive = false;
    for (i, &v) in w.iter().enumerate() {
        if !(v >= T::zero()) || !v.is_finite() {
            return Err(SvemError::InvalidWeight { index: i });
        }
        any_positive |= v > T::zero();
    }
    if any_positive {
        Ok(())
    } else {
        Err(SvemError::DegenerateWeights)
    }
}

/// Minimizes `sum_i w[i] (y[i] - x[i, support] . beta)^2`.
///
/// Directions beyond the numerical rank (pivot below `T::pivot_tolerance()`
/// times the leading pivot) get zero coefficients.
pub fn wls_fit<T: Real>(
    x: ArrayView2<'_, T>,
    support: &[usize],
    y: ArrayView1<'_, T>,
    w: ArrayView1<'_, T>,
) -> Result<WlsFit<T>> {
    let n = x.nrows();
    if y.len() != n || w.len() != n {
        return Err(SvemError::DimensionMismatch(format!(
            "model matrix has {n} rows, response {} and weights {}",
            y.len(),
            w.len()
        )));
    }
    if let Some(&bad) = support.iter().find(|&&j| j >= x.ncols()) {
        return Err(SvemError::DimensionMismatch(format!("support index {bad} out of range")));
    }
    check_weights(w)?;

    let p = support.len();
    let sw: Vec<T> = w.iter().map(|v| v.sqrt()).collect();
    let mut a = Array2::<T>::zeros((n, p));
    for (c, &j) in support.iter().enumerate() {
        for i in 0..n {
            a[[i, c]] = sw[i] * x[[i, j]];
        }
    }
    let mut b: Vec<T> = (0..n).map(|i| sw[i] * y[i]).collect();

    let (perm, rank) = householder_cp(&mut a, &mut b);

    let mut coef = vec![T::zero(); p];
    for k in (0..rank).rev() {
        let mut s = b[k];
        for c in (k + 1)..rank {
            s -= a[[k, c]] * coef[c];
        }
        coef[k] = s / a[[k, k]];
    }
    let mut beta = vec![T::zero(); p];
    for k in 0..rank {
        beta[perm[k]] = coef[k];
    }

    let train_sse = sparse_sse(x, support, &beta, y, w);
    Ok(WlsFit { support: support.to_vec(), beta, train_sse, rank })
}

/// In-place Householder QR with column pivoting. On return the upper triangle
/// of `a` holds R (in pivoted column order), `b` holds Q^T b, and the result
/// is `(perm, rank)` with `perm[k]` the original column at position `k`.
fn householder_cp<T: Real>(a: &mut Array2<T>, b: &mut [T]) -> (Vec<usize>, usize) {
    let (n, p) = a.dim();
    let mut perm: Vec<usize> = (0..p).collect();
    let steps = n.min(p);
    let tol = T::pivot_tolerance();
    let mut lead = T::zero();

    for k in 0..steps {
        let mut best = k;
        let mut best_norm = -T::one();
        for c in k..p {
            let s: T = (k..n).map(|i| a[[i, c]] * a[[i, c]]).sum();
            if s > best_norm {
                best_norm = s;
                best = c;
            }
        }
        if best != k {
            for i in 0..n {
                a.swap([i, k], [i, best]);
            }
            perm.swap(k, best);
        }
        let norm = best_norm.sqrt();
        if k == 0 {
            lead = norm;
        }
        if norm <= tol * lead || norm == T::zero() {
            return (perm, k);
        }

        let alpha = if a[[k, k]] > T::zero() { -norm } else { norm };
        let mut v: Vec<T> = (k..n).map(|i| a[[i, k]]).collect();
        v[0] -= alpha;
        let vtv: T = v.iter().map(|&t| t * t).sum();
        let two = T::of(2.0);
        for c in (k + 1)..p {
            let dot: T = v.iter().enumerate().map(|(r, &vi)| vi * a[[k + r, c]]).sum();
            let f = two * dot / vtv;
            for (r, &vi) in v.iter().enumerate() {
                a[[k + r, c]] -= f * vi;
            }
        }
        let dot: T = v.iter().enumerate().map(|(r, &vi)| vi * b[k + r]).sum();
        let f = two * dot / vtv;
        for (r, &vi) in v.iter().enumerate() {
            b[k + r] -= f * vi;
        }
        a[[k, k]] = alpha;
        for i in (k + 1)..n {
            a[[i, k]] = T::zero();
        }
    }
    (perm, steps)
}

pub(crate) fn sparse_sse<T: Real>(
    x: ArrayView2<'_, T>,
    support: &[usize],
    beta: &[T],
    y: ArrayView1<'_, T>,
    w: ArrayView1<'_, T>,
) -> T {
    let mut sse = T::zero();
    for i in 0..x.nrows() {
        if w[i] == T::zero() {
            continue;
        }
        let mut fit = T::zero();
        for (&j, &b) in support.iter().zip(beta) {
            fit += x[[i, j]] * b;
        }
        let r = y[i] - fit;
        sse += w[i] * r * r;
    }
    sse
}

/// `sum_i w[i] (y[i] - x[i] . beta)^2` for a dense coefficient vector.
pub fn weighted_sse<T: Real>(
    x: ArrayView2<'_, T>,
    y: ArrayView1<'_, T>,
    w: ArrayView1<'_, T>,
    beta: ArrayView1<'_, T>,
) -> Result<T> {
    if y.len() != x.nrows() || w.len() != x.nrows() || beta.len() != x.ncols() {
        return Err(SvemError::DimensionMismatch(format!(
            "X is {}x{}, y {}, w {}, beta {}",
            x.nrows(),
            x.ncols(),
            y.len(),
            w.len(),
            beta.len()
        )));
    }
    let mut sse = T::zero();
    for (i, row) in x.outer_iter().enumerate() {
        if w[i] == T::zero() {
            continue;
        }
        let r = y[i] - row.dot(&beta);
        sse += w[i] * r * r;
    }
    Ok(sse)
}
