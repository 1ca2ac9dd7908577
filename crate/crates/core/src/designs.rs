//! Coded experimental designs and their full-quadratic model matrices.

use std::fmt;

use ndarray::{Array2, ArrayView1};
use rand::Rng;

use crate::error::{Result, SvemError};
use crate::rng::SeedStream;
use crate::scalar::{canonical_zero, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DesignKind {
    Dsd,
    Bbd,
    Ccd,
    Sfd,
    Custom,
}

impl fmt::Display for DesignKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DesignKind::Dsd => "DSD",
            DesignKind::Bbd => "BBD",
            DesignKind::Ccd => "CCD",
            DesignKind::Sfd => "SFD",
            DesignKind::Custom => "Custom",
        };
        f.write_str(s)
    }
}

/// An N×K matrix of coded factor settings.
#[derive(Debug, Clone, PartialEq)]
pub struct Design<T> {
    pub kind: DesignKind,
    pub factors: Vec<String>,
    pub runs: Array2<T>,
}

/// Default factor names `X1..XK`.
pub fn default_factor_names(k: usize) -> Vec<String> {
    (1..=k).map(|i| format!("X{i}")).collect()
}

impl<T: Real> Design<T> {
    pub fn new(kind: DesignKind, factors: Vec<String>, runs: Array2<T>) -> Result<Self> {
        if factors.len() != runs.ncols() {
            return Err(SvemError::DimensionMismatch(format!(
                "{} factor names for {} columns",
                factors.len(),
                runs.ncols()
            )));
        }
        Ok(Self { kind, factors, runs })
    }

    pub fn n_runs(&self) -> usize {
        self.runs.nrows()
    }

    pub fn n_factors(&self) -> usize {
        self.runs.ncols()
    }
}

// Paley conference matrices, C^T C = (m-1) I. Orders 6 and 10 are symmetric,
// 8 and 12 antisymmetric off the first row.
const CONFERENCE_6: [[i8; 6]; 6] = [
    [0, 1, 1, 1, 1, 1],
    [1, 0, 1, -1, -1, 1],
    [1, 1, 0, 1, -1, -1],
    [1, -1, 1, 0, 1, -1],
    [1, -1, -1, 1, 0, 1],
    [1, 1, -1, -1, 1, 0],
];

const CONFERENCE_8: [[i8; 8]; 8] = [
    [0, 1, 1, 1, 1, 1, 1, 1],
    [-1, 0, -1, -1, 1, -1, 1, 1],
    [-1, 1, 0, -1, -1, 1, -1, 1],
    [-1, 1, 1, 0, -1, -1, 1, -1],
    [-1, -1, 1, 1, 0, -1, -1, 1],
    [-1, 1, -1, 1, 1, 0, -1, -1],
    [-1, -1, 1, -1, 1, 1, 0, -1],
    [-1, -1, -1, 1, -1, 1, 1, 0],
];

const CONFERENCE_10: [[i8; 10]; 10] = [
    [0, 1, 1, 1, 1, 1, 1, 1, 1, 1],
    [1, 0, 1, 1, 1, -1, -1, 1, -1, -1],
    [1, 1, 0, 1, -1, 1, -1, -1, 1, -1],
    [1, 1, 1, 0, -1, -1, 1, -1, -1, 1],
    [1, 1, -1, -1, 0, 1, 1, 1, -1, -1],
    [1, -1, 1, -1, 1, 0, 1, -1, 1, -1],
    [1, -1, -1, 1, 1, 1, 0, -1, -1, 1],
    [1, 1, -1, -1, 1, -1, -1, 0, 1, 1],
    [1, -1, 1, -1, -1, 1, -1, 1, 0, 1],
    [1, -1, -1, 1, -1, -1, 1, 1, 1, 0],
];

const CONFERENCE_12: [[i8; 12]; 12] = [
    [0, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1],
    [-1, 0, -1, 1, -1, -1, -1, 1, 1, 1, -1, 1],
    [-1, 1, 0, -1, 1, -1, -1, -1, 1, 1, 1, -1],
    [-1, -1, 1, 0, -1, 1, -1, -1, -1, 1, 1, 1],
    [-1, 1, -1, 1, 0, -1, 1, -1, -1, -1, 1, 1],
    [-1, 1, 1, -1, 1, 0, -1, 1, -1, -1, -1, 1],
    [-1, 1, 1, 1, -1, 1, 0, -1, 1, -1, -1, -1],
    [-1, -1, 1, 1, 1, -1, 1, 0, -1, 1, -1, -1],
    [-1, -1, -1, 1, 1, 1, -1, 1, 0, -1, 1, -1],
    [-1, -1, -1, -1, 1, 1, 1, -1, 1, 0, -1, 1],
    [-1, 1, -1, -1, -1, 1, 1, 1, -1, 1, 0, -1],
    [-1, -1, 1, -1, -1, -1, 1, 1, 1, -1, 1, 0],
];

/// The embedded conference matrix of the given order, as `i8` rows.
pub fn conference_matrix(order: usize) -> Result<Vec<Vec<i8>>> {
    fn rows<const M: usize>(c: &[[i8; M]; M]) -> Vec<Vec<i8>> {
        c.iter().map(|r| r.to_vec()).collect()
    }
    match order {
        6 => Ok(rows(&CONFERENCE_6)),
        8 => Ok(rows(&CONFERENCE_8)),
        10 => Ok(rows(&CONFERENCE_10)),
        12 => Ok(rows(&CONFERENCE_12)),
        _ => Err(SvemError::UnsupportedOrder { order }),
    }
}

pub const DEFAULT_FAKE_FACTORS: usize = 2;

/// Definitive screening design `[C; -C; 0...]` from the order `k + fake_factors`
/// conference matrix, truncated to the first `k` columns.
pub fn make_dsd<T: Real>(k: usize, fake_factors: usize, center_runs: usize) -> Result<Design<T>> {
    if k < 3 {
        return Err(SvemError::InvalidDimension(format!("DSD needs at least 3 factors, got {k}")));
    }
    if center_runs < 1 {
        return Err(SvemError::InvalidDimension("DSD needs at least one center run".into()));
    }
    let order = k + fake_factors;
    let c = conference_matrix(order)?;
    let n = 2 * order + center_runs;
    let mut runs = Array2::<T>::zeros((n, k));
    for (i, row) in c.iter().enumerate() {
        for j in 0..k {
            let v = T::of(row[j] as f64);
            runs[[i, j]] = v;
            runs[[i + order, j]] = canonical_zero(-v);
        }
    }
    Design::new(DesignKind::Dsd, default_factor_names(k), runs)
}

/// Classical Box-Behnken center-run count.
pub fn default_bbd_center_runs(k: usize) -> usize {
    if k == 5 {
        6
    } else {
        3
    }
}

/// All-pairs Box-Behnken design: a 2² factorial on every factor pair, other
/// factors at 0, followed by `center_runs` center points.
pub fn make_bbd<T: Real>(k: usize, center_runs: usize) -> Result<Design<T>> {
    if k < 3 {
        return Err(SvemError::InvalidDimension(format!("BBD needs at least 3 factors, got {k}")));
    }
    if center_runs < 1 {
        return Err(SvemError::InvalidDimension("BBD needs at least one center run".into()));
    }
    let pairs = k * (k - 1) / 2;
    let mut runs = Array2::<T>::zeros((4 * pairs + center_runs, k));
    let mut r = 0;
    for i in 0..k {
        for j in (i + 1)..k {
            for (a, b) in [(-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0), (1.0, 1.0)] {
                runs[[r, i]] = T::of(a);
                runs[[r, j]] = T::of(b);
                r += 1;
            }
        }
    }
    Design::new(DesignKind::Bbd, default_factor_names(k), runs)
}

/// Uniform space-filling design on `[-1, 1]^K`.
pub fn make_sfd<T: Real>(k: usize, n_runs: usize, seed: u64) -> Result<Design<T>> {
    if n_runs < 1 || k < 1 {
        return Err(SvemError::InvalidDimension(format!("SFD needs runs and factors, got {n_runs}x{k}")));
    }
    let mut rng = SeedStream::new(seed).substream(0);
    let runs = Array2::from_shape_simple_fn((n_runs, k), || T::of(rng.random_range(-1.0..=1.0)));
    Design::new(DesignKind::Sfd, default_factor_names(k), runs)
}

/// One column of the full-quadratic basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Term {
    Intercept,
    Main(usize),
    Quadratic(usize),
    /// Product of two distinct factors, `i < j`.
    Interaction(usize, usize),
}

impl Term {
    pub fn name(&self, factors: &[String]) -> String {
        match *self {
            Term::Intercept => "Intercept".to_string(),
            Term::Main(i) => factors[i].clone(),
            Term::Quadratic(i) => format!("{0}*{0}", factors[i]),
            Term::Interaction(i, j) => format!("{}*{}", factors[i], factors[j]),
        }
    }

    /// Parses a term name produced by [`Term::name`].
    pub fn parse(name: &str, factors: &[String]) -> Result<Term> {
        let index = |f: &str| {
            factors
                .iter()
                .position(|x| x == f)
                .ok_or_else(|| SvemError::InvalidTerm(format!("unknown factor '{f}' in term '{name}'")))
        };
        if name == "Intercept" {
            return Ok(Term::Intercept);
        }
        match name.split_once('*') {
            None => Ok(Term::Main(index(name)?)),
            Some((a, b)) => {
                let (i, j) = (index(a)?, index(b)?);
                if i == j {
                    Ok(Term::Quadratic(i))
                } else if i < j {
                    Ok(Term::Interaction(i, j))
                } else {
                    Err(SvemError::InvalidTerm(format!("interaction '{name}' out of order")))
                }
            }
        }
    }

    /// Value of the term at one run.
    pub fn eval<T: Real>(&self, x: ArrayView1<'_, T>) -> T {
        match *self {
            Term::Intercept => T::one(),
            Term::Main(i) => x[i],
            Term::Quadratic(i) => x[i] * x[i],
            Term::Interaction(i, j) => x[i] * x[j],
        }
    }
}

/// Full-quadratic terms for `k` factors: intercept, mains, quadratics, interactions.
pub fn full_quadratic_terms(k: usize) -> Vec<Term> {
    let mut terms = Vec::with_capacity(1 + 2 * k + k * k.saturating_sub(1) / 2);
    terms.push(Term::Intercept);
    terms.extend((0..k).map(Term::Main));
    terms.extend((0..k).map(Term::Quadratic));
    for i in 0..k {
        for j in (i + 1)..k {
            terms.push(Term::Interaction(i, j));
        }
    }
    terms
}

/// Number of non-intercept full-quadratic terms for `k` factors.
pub fn n_predictors(k: usize) -> usize {
    2 * k + k * k.saturating_sub(1) / 2
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelMatrix<T> {
    pub terms: Vec<Term>,
    pub values: Array2<T>,
    pub source_kind: DesignKind,
}

impl<T: Real> ModelMatrix<T> {
    pub fn n_rows(&self) -> usize {
        self.values.nrows()
    }

    /// Number of columns, P + 1.
    pub fn n_cols(&self) -> usize {
        self.values.ncols()
    }

    pub fn term_names(&self, factors: &[String]) -> Vec<String> {
        self.terms.iter().map(|t| t.name(factors)).collect()
    }
}

pub fn expand_full_quadratic<T: Real>(d: &Design<T>) -> ModelMatrix<T> {
    let terms = full_quadratic_terms(d.n_factors());
    let mut values = Array2::<T>::zeros((d.n_runs(), terms.len()));
    for (r, x) in d.runs.outer_iter().enumerate() {
        for (c, t) in terms.iter().enumerate() {
            values[[r, c]] = canonical_zero(t.eval(x));
        }
    }
    ModelMatrix { terms, values, source_kind: d.kind }
}
