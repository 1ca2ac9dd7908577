use std::collections::BTreeSet;

use ndarray::{ArrayView1, ArrayView2};

use crate::error::Result;
use crate::scalar::Real;
use crate::wls::{check_weights, sparse_sse, wls_fit, WlsFit};

/// Additions whose training-SSE reduction is at most this fraction of
/// `sum w y^2` are treated as no improvement.
const MIN_RELATIVE_REDUCTION: f64 = 1e-12;

/// Weighted Gram-Schmidt state for the columns in the current support.
struct Basis<T> {
    /// sqrt(w), applied to every column before projection.
    sw: Vec<T>,
    q: Vec<Vec<T>>,
}

impl<T: Real> Basis<T> {
    fn new(w: ArrayView1<'_, T>) -> Self {
        Self { sw: w.iter().map(|v| v.sqrt()).collect(), q: Vec::new() }
    }

    fn weighted_column(&self, x: ArrayView2<'_, T>, j: usize) -> Vec<T> {
        self.sw.iter().enumerate().map(|(i, &s)| s * x[[i, j]]).collect()
    }

    /// Removes the span of the basis from `v` (two passes of classical GS).
    fn project_out(&self, v: &mut [T]) {
        for _ in 0..2 {
            for q in &self.q {
                let d: T = q.iter().zip(v.iter()).map(|(&a, &b)| a * b).sum();
                for (vi, &qi) in v.iter_mut().zip(q) {
                    *vi -= d * qi;
                }
            }
        }
    }

    /// Orthogonal remainder of weighted column `j` if it is numerically
    /// independent of the basis.
    fn remainder(&self, x: ArrayView2<'_, T>, j: usize) -> Option<Vec<T>> {
        let mut v = self.weighted_column(x, j);
        let norm0 = norm(&v);
        if norm0 == T::zero() {
            return None;
        }
        self.project_out(&mut v);
        let n = norm(&v);
        (n > T::pivot_tolerance() * norm0).then_some(v)
    }

    fn push(&mut self, mut v: Vec<T>) {
        let n = norm(&v);
        v.iter_mut().for_each(|t| *t /= n);
        self.q.push(v);
    }

    fn rebuild(x: ArrayView2<'_, T>, w: ArrayView1<'_, T>, support: &[usize]) -> Self {
        let mut b = Self::new(w);
        for &j in support {
            if let Some(v) = b.remainder(x, j) {
                b.push(v);
            }
        }
        b
    }
}

fn norm<T: Real>(v: &[T]) -> T {
    v.iter().map(|&t| t * t).sum::<T>().sqrt()
}

/// Best single-term addition to `support` by training-SSE reduction, or
/// `None` if no eligible term improves the fit. Reductions within rounding
/// of each other are ties.
fn best_addition<T: Real>(
    x: ArrayView2<'_, T>,
    y: ArrayView1<'_, T>,
    w: ArrayView1<'_, T>,
    support: &[usize],
    blocked: &BTreeSet<usize>,
    threshold: T,
) -> Option<usize> {
    let basis = Basis::rebuild(x, w, support);
    let mut r: Vec<T> = basis.sw.iter().zip(y.iter()).map(|(&s, &v)| s * v).collect();
    basis.project_out(&mut r);
    let tie = T::pivot_tolerance() * r.iter().map(|&t| t * t).sum::<T>();

    let mut best: Option<(usize, T)> = None;
    for j in 1..x.ncols() {
        if support.contains(&j) || blocked.contains(&j) {
            continue;
        }
        let Some(c) = basis.remainder(x, j) else { continue };
        let cc: T = c.iter().map(|&t| t * t).sum();
        let cr: T = c.iter().zip(&r).map(|(&a, &b)| a * b).sum();
        let reduction = cr * cr / cc;
        if best.is_none_or(|(_, b)| reduction > b + tie) {
            best = Some((j, reduction));
        }
    }
    best.filter(|&(_, red)| red > threshold).map(|(j, _)| j)
}

fn reduction_threshold<T: Real>(y: ArrayView1<'_, T>, w: ArrayView1<'_, T>) -> T {
    let total: T = y.iter().zip(w.iter()).map(|(&v, &wi)| wi * v * v).sum();
    T::of(MIN_RELATIVE_REDUCTION) * total
}

/// Greedy forward selection on training weights. Column 0 is the intercept
/// and is always in the model. Each step adds the term that most reduces the
/// weighted training SSE (lowest index on ties). Terms that would make the
/// weighted subproblem rank deficient are never added.
pub fn forward_path<T: Real>(
    x: ArrayView2<'_, T>,
    y: ArrayView1<'_, T>,
    w_train: ArrayView1<'_, T>,
    max_steps: usize,
) -> Result<Vec<WlsFit<T>>> {
    check_weights(w_train)?;
    let threshold = reduction_threshold(y, w_train);
    let mut support = vec![0usize];
    let mut path = vec![wls_fit(x, &support, y, w_train)?];
    let none = BTreeSet::new();
    while support.len() - 1 < max_steps {
        let Some(j) = best_addition(x, y, w_train, &support, &none, threshold) else { break };
        support.push(j);
        path.push(wls_fit(x, &support, y, w_train)?);
    }
    Ok(path)
}

/// Forward selection with validation-driven pruning.
///
/// After each addition, any previously included non-intercept term whose
/// removal strictly lowers the auto-validation SSE is dropped (largest
/// decrease first, lowest index on ties), repeating until no removal helps.
/// Every state is appended to the path. A pruned term may not re-enter.
pub fn pruned_forward_path<T: Real>(
    x: ArrayView2<'_, T>,
    y: ArrayView1<'_, T>,
    w_train: ArrayView1<'_, T>,
    w_valid: ArrayView1<'_, T>,
    max_steps: usize,
) -> Result<Vec<WlsFit<T>>> {
    check_weights(w_train)?;
    let threshold = reduction_threshold(y, w_train);
    let valid_sse = |f: &WlsFit<T>| sparse_sse(x, &f.support, &f.beta, y, w_valid);

    let mut support = vec![0usize];
    let mut path = vec![wls_fit(x, &support, y, w_train)?];
    let mut pruned = BTreeSet::new();
    let mut additions = 0;
    while additions < max_steps {
        let Some(added) = best_addition(x, y, w_train, &support, &pruned, threshold) else { break };
        additions += 1;
        support.push(added);
        let fit = wls_fit(x, &support, y, w_train)?;
        let mut current = valid_sse(&fit);
        path.push(fit);

        loop {
            let mut best: Option<(usize, T, WlsFit<T>)> = None;
            for (pos, &t) in support.iter().enumerate() {
                if t == 0 || t == added {
                    continue;
                }
                let mut reduced = support.clone();
                reduced.remove(pos);
                let f = wls_fit(x, &reduced, y, w_train)?;
                let v = valid_sse(&f);
                let better = match &best {
                    None => true,
                    Some((bt, bv, _)) => v < *bv || (v == *bv && t < *bt),
                };
                if better {
                    best = Some((t, v, f));
                }
            }
            match best {
                Some((t, v, f)) if v < current => {
                    support.retain(|&s| s != t);
                    pruned.insert(t);
                    current = v;
                    path.push(f);
                }
                _ => break,
            }
        }
    }
    Ok(path)
}
