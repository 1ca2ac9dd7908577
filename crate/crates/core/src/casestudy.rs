//! Plasmid fermentation data: a 15-run five-factor DSD for training and an
//! independent 31-run CCD for testing. Titers are in mg/L; factor settings
//! are coded.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2};

use crate::designs::{expand_full_quadratic, Design, DesignKind};
use crate::engine::{predict_matrix, svem_fit};
use crate::error::{Result, SvemError};
use crate::evaluation::{r_squared, rmspe};
use crate::scalar::Real;
use crate::selectors::{single_shot_fit, Criterion, SelectorKind, SelectorSpec};

pub const FACTOR_NAMES: [&str; 5] = ["pH", "%DO", "Induction Temperature", "Feed Rate", "Induction OD600"];

/// Iteration count used for the reported ensemble fits.
pub const CASE_STUDY_NBOOT: usize = 1000;

#[rustfmt::skip]
const DSD_ROWS: [[f64; 6]; 15] = [
    [ 0.0,  1.0,  1.0, -1.0, -1.0, 156.20],
    [ 0.0, -1.0, -1.0,  1.0,  1.0, 318.45],
    [ 1.0,  0.0, -1.0, -1.0,  1.0, 398.00],
    [-1.0,  0.0,  1.0,  1.0, -1.0, 285.60],
    [ 1.0, -1.0,  0.0,  1.0, -1.0, 229.00],
    [-1.0,  1.0,  0.0, -1.0,  1.0, 377.00],
    [ 1.0, -1.0,  1.0,  0.0,  1.0, 290.00],
    [-1.0,  1.0, -1.0,  0.0, -1.0, 123.00],
    [ 1.0,  1.0,  1.0,  1.0,  0.0, 299.00],
    [-1.0, -1.0, -1.0, -1.0,  0.0, 428.00],
    [ 0.0,  0.0,  0.0,  0.0,  0.0, 327.80],
    [ 0.0,  0.0,  0.0,  0.0,  0.0, 339.74],
    [ 0.0,  0.0,  0.0,  0.0,  0.0, 387.35],
    [ 0.0,  0.0,  0.0,  0.0,  0.0, 393.97],
    [ 0.0,  0.0,  0.0,  0.0,  0.0, 348.08],
];

#[rustfmt::skip]
const CCD_ROWS: [[f64; 6]; 31] = [
    [ 1.0,  1.0, -1.0,  1.0, -1.0, 581.36],
    [-1.0, -1.0, -1.0,  1.0, -1.0, 519.80],
    [-1.0,  1.0, -1.0, -1.0, -1.0, 115.40],
    [-1.0,  1.0, -1.0,  1.0,  1.0, 407.22],
    [ 1.0,  1.0, -1.0, -1.0,  1.0,  56.18],
    [ 1.0, -1.0,  1.0,  1.0, -1.0, 260.82],
    [-1.0, -1.0, -1.0, -1.0,  1.0,  94.95],
    [ 1.0, -1.0, -1.0, -1.0, -1.0, 215.03],
    [-1.0,  1.0,  1.0, -1.0,  1.0, 211.00],
    [ 0.0,  0.0,  0.0,  0.0,  0.0, 321.00],
    [ 0.0,  0.0,  0.0,  0.0,  0.0, 387.35],
    [-1.0,  1.0,  1.0,  1.0, -1.0, 231.00],
    [ 1.0,  1.0,  1.0,  1.0,  1.0, 351.00],
    [ 1.0, -1.0, -1.0,  1.0,  1.0, 284.00],
    [-1.0, -1.0,  1.0,  1.0,  1.0, 298.00],
    [-1.0, -1.0,  1.0, -1.0, -1.0, 191.00],
    [ 1.0, -1.0,  1.0, -1.0,  1.0, 183.02],
    [ 0.0,  0.0,  0.0,  0.0,  0.0, 368.74],
    [ 1.0,  1.0,  1.0, -1.0, -1.0, 111.46],
    [ 0.0,  0.0,  0.0,  0.0,  0.0, 391.74],
    [ 0.0,  0.0,  0.0,  0.0,  0.0, 366.01],
    [ 1.3,  0.0,  0.0,  0.0,  0.0, 257.88],
    [-1.3,  0.0,  0.0,  0.0,  0.0, 295.68],
    [ 0.0,  1.3,  0.0,  0.0,  0.0, 385.54],
    [ 0.0, -1.3,  0.0,  0.0,  0.0, 371.02],
    [ 0.0,  0.0,  1.3,  0.0,  0.0, 326.70],
    [ 0.0,  0.0, -1.3,  0.0,  0.0, 251.76],
    [ 0.0,  0.0,  0.0,  1.3,  0.0, 351.11],
    [ 0.0,  0.0,  0.0, -1.3,  0.0, 167.39],
    [ 0.0,  0.0,  0.0,  0.0,  1.3, 219.64],
    [ 0.0,  0.0,  0.0,  0.0, -1.3, 239.29],
];

#[derive(Debug, Clone, PartialEq)]
pub struct CaseStudyDataset<T> {
    pub dsd: Design<T>,
    pub dsd_titer: Array1<T>,
    pub ccd: Design<T>,
    pub ccd_titer: Array1<T>,
}

fn split<T: Real, const N: usize>(rows: &[[f64; 6]; N], kind: DesignKind) -> (Design<T>, Array1<T>) {
    let runs = Array2::from_shape_fn((N, 5), |(i, j)| T::of(rows[i][j]));
    let y = rows.iter().map(|r| T::of(r[5])).collect();
    let names = FACTOR_NAMES.iter().map(|s| s.to_string()).collect();
    (Design { kind, factors: names, runs }, y)
}

pub fn load_case_study<T: Real>() -> CaseStudyDataset<T> {
    let (dsd, dsd_titer) = split(&DSD_ROWS, DesignKind::Dsd);
    let (ccd, ccd_titer) = split(&CCD_ROWS, DesignKind::Ccd);
    CaseStudyDataset { dsd, dsd_titer, ccd, ccd_titer }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseStudyMethod {
    SvemForward,
    SvemLasso,
    LassoBic,
}

impl CaseStudyMethod {
    pub const ALL: [CaseStudyMethod; 3] = [CaseStudyMethod::SvemForward, CaseStudyMethod::SvemLasso, CaseStudyMethod::LassoBic];
}

impl fmt::Display for CaseStudyMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CaseStudyMethod::SvemForward => "svem-fwd",
            CaseStudyMethod::SvemLasso => "svem-lasso",
            CaseStudyMethod::LassoBic => "lasso-bic",
        })
    }
}

impl FromStr for CaseStudyMethod {
    type Err = SvemError;

    fn from_str(s: &str) -> Result<Self> {
        CaseStudyMethod::ALL
            .into_iter()
            .find(|m| m.to_string() == s)
            .ok_or_else(|| SvemError::InvalidSpec(format!("unknown case-study method '{s}' (expected svem-fwd, svem-lasso or lasso-bic)")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseStudyReport<T> {
    pub method: CaseStudyMethod,
    pub beta: Array1<T>,
    /// In-sample error against the observed DSD titers.
    pub rmspe_dsd: T,
    pub rmspe_ccd: T,
    pub r2_ccd: T,
    pub ccd_observed: Array1<T>,
    pub ccd_predicted: Array1<T>,
}

/// Fits the full quadratic model on the DSD and scores it on the CCD.
/// `n_boot` and `seed` only affect the ensemble methods.
pub fn run_case_study<T: Real>(method: CaseStudyMethod, n_boot: usize, seed: u64) -> Result<CaseStudyReport<T>> {
    let data = load_case_study::<T>();
    let train = expand_full_quadratic(&data.dsd);
    let y = data.dsd_titer.view();
    let beta = match method {
        CaseStudyMethod::SvemForward => svem_fit(&train, y, &SelectorSpec::new(SelectorKind::Forward), n_boot, seed)?.model.beta,
        CaseStudyMethod::SvemLasso => svem_fit(&train, y, &SelectorSpec::new(SelectorKind::Lasso), n_boot, seed)?.model.beta,
        CaseStudyMethod::LassoBic => {
            let spec = SelectorSpec::new(SelectorKind::Lasso).with_criterion(Criterion::Bic);
            single_shot_fit(train.values.view(), y, &spec)?.beta
        }
    };
    let fitted = predict_matrix(&train, beta.view())?;
    let test = expand_full_quadratic(&data.ccd);
    let predicted = predict_matrix(&test, beta.view())?;
    Ok(CaseStudyReport {
        method,
        rmspe_dsd: rmspe(y, fitted.view())?,
        rmspe_ccd: rmspe(data.ccd_titer.view(), predicted.view())?,
        r2_ccd: r_squared(data.ccd_titer.view(), predicted.view())?,
        beta,
        ccd_observed: data.ccd_titer,
        ccd_predicted: predicted,
    })
}
