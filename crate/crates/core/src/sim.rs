//! Monte-Carlo comparison of fitting methods on simulated designed experiments.
//!
//! A scenario fixes one random true model on the full-quadratic basis of a
//! DSD or BBD, then draws `n_reps` noisy response vectors around it. Every
//! method is fitted to every response vector and scored by RMSPE against the
//! noise-free true surface over a shared uniform space-filling design.

use std::fmt;
use std::str::FromStr;

use ndarray::Array1;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::designs::{
    default_bbd_center_runs, expand_full_quadratic, make_bbd, make_dsd, make_sfd, n_predictors, Design, DesignKind,
    DEFAULT_FAKE_FACTORS,
};
use crate::engine::{predict_matrix, svem_fit};
use crate::error::{Result, SvemError};
use crate::evaluation::SurfaceScorer;
use crate::rng::SeedStream;
use crate::scalar::Real;
use crate::selectors::{single_shot_fit, Criterion, SelectorKind, SelectorSpec};
use crate::wls::wls_fit;

pub const DEFAULT_SFD_SIZE: usize = 10_000;
pub const DEFAULT_REPS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sparsity {
    /// Every term active.
    All,
    /// Half of (N-1) active terms for a DSD, half of P for a BBD.
    Medium,
    /// A quarter of (N-1) for a DSD, a quarter of P for a BBD.
    High,
}

impl fmt::Display for Sparsity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sparsity::All => "all",
            Sparsity::Medium => "medium",
            Sparsity::High => "high",
        })
    }
}

impl FromStr for Sparsity {
    type Err = SvemError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "all" | "none" | "low" => Ok(Sparsity::All),
            "medium" => Ok(Sparsity::Medium),
            "high" => Ok(Sparsity::High),
            _ => Err(SvemError::InvalidSpec(format!("unknown sparsity '{s}' (expected all, medium or high)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FitMode {
    /// Unit-weight path, model picked by an information criterion.
    SingleShot(Criterion),
    Svem { n_boot: usize },
    /// Least squares on the true active set. A reference, not a competitor.
    TrueSupport,
}

/// A fitting method in a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Method {
    pub selector: SelectorSpec,
    pub mode: FitMode,
    pub label: String,
}

impl Method {
    pub fn single_shot(kind: SelectorKind, criterion: Criterion) -> Self {
        Self {
            selector: SelectorSpec::new(kind).with_criterion(criterion),
            mode: FitMode::SingleShot(criterion),
            label: format!("{kind}-{criterion}"),
        }
    }

    pub fn svem(kind: SelectorKind, n_boot: usize) -> Self {
        Self { selector: SelectorSpec::new(kind), mode: FitMode::Svem { n_boot }, label: format!("svem-{kind}") }
    }

    pub fn true_support() -> Self {
        Self { selector: SelectorSpec::new(SelectorKind::Forward), mode: FitMode::TrueSupport, label: "oracle".into() }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Parses `fwd-bic`, `lasso-aicc`, `svem-fwd`, `svem-lasso@1000`, `oracle`.
    /// SVEM methods without an explicit `@nboot` use `default_nboot`.
    pub fn parse(s: &str, default_nboot: usize) -> Result<Self> {
        let s = s.trim();
        if s == "oracle" {
            return Ok(Self::true_support());
        }
        if let Some(rest) = s.strip_prefix("svem-") {
            let (kind, n_boot) = match rest.split_once('@') {
                Some((k, n)) => {
                    let n = n.parse().map_err(|_| SvemError::InvalidSpec(format!("bad nboot in method '{s}'")))?;
                    (k, n)
                }
                None => (rest, default_nboot),
            };
            return Ok(Self::svem(kind.parse()?, n_boot).with_label(s));
        }
        match s.split_once('-') {
            Some((kind, crit)) => {
                let criterion: Criterion = crit.parse()?;
                if criterion == Criterion::AutoValidation {
                    return Err(SvemError::InvalidSpec(format!("'{s}': auto-validation needs an svem- method")));
                }
                Ok(Self::single_shot(kind.parse()?, criterion))
            }
            None => Err(SvemError::InvalidSpec(format!("unknown method '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimScenario {
    pub design_kind: DesignKind,
    pub k: usize,
    pub sparsity: Sparsity,
    pub n_reps: usize,
    pub noise_sigma: f64,
    pub methods: Vec<Method>,
    pub sfd_size: usize,
    pub seed: u64,
}

impl SimScenario {
    pub fn new(design_kind: DesignKind, k: usize, sparsity: Sparsity, methods: Vec<Method>, seed: u64) -> Self {
        Self {
            design_kind,
            k,
            sparsity,
            n_reps: DEFAULT_REPS,
            noise_sigma: 1.0,
            methods,
            sfd_size: DEFAULT_SFD_SIZE,
            seed,
        }
    }

    pub fn design<T: Real>(&self) -> Result<Design<T>> {
        match self.design_kind {
            DesignKind::Dsd => make_dsd(self.k, DEFAULT_FAKE_FACTORS, 1),
            DesignKind::Bbd => make_bbd(self.k, default_bbd_center_runs(self.k)),
            other => Err(SvemError::InvalidSpec(format!("simulation designs are DSD or BBD, not {other}"))),
        }
    }

    /// Number of truly active non-intercept terms for a design with `n` runs.
    pub fn active_count(&self, n: usize) -> usize {
        let p = n_predictors(self.k);
        let base = match self.design_kind {
            DesignKind::Dsd => n.saturating_sub(1),
            _ => p,
        };
        match self.sparsity {
            Sparsity::All => p,
            Sparsity::Medium => base / 2,
            Sparsity::High => base / 4,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_reps < 1 {
            return Err(SvemError::InvalidSpec("nreps must be at least 1".into()));
        }
        if !(self.noise_sigma > 0.0) {
            return Err(SvemError::InvalidSpec("noise sigma must be positive".into()));
        }
        if self.methods.is_empty() {
            return Err(SvemError::InvalidSpec("no methods to run".into()));
        }
        if self.sfd_size < 1 {
            return Err(SvemError::InvalidSpec("sfd size must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrueModel<T> {
    pub beta: Array1<T>,
    /// Active non-intercept term indices, ascending.
    pub active: Vec<usize>,
}

/// Standard Laplace (location 0, scale 1) by inverse CDF.
pub fn sample_laplace<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u: f64 = rng.random::<f64>() - 0.5;
    -u.signum() * (-2.0 * u.abs()).ln_1p()
}

/// Draws the true model: intercept plus a uniformly chosen active set, no
/// heredity, Laplace coefficients.
pub fn gen_true_model<T: Real, R: Rng + ?Sized>(scenario: &SimScenario, rng: &mut R) -> Result<TrueModel<T>> {
    let design = scenario.design::<T>()?;
    let p = n_predictors(scenario.k);
    let count = scenario.active_count(design.n_runs());
    if count < 1 {
        return Err(SvemError::DegenerateScenario(format!(
            "{} sparsity leaves no active terms for a {}-run {}",
            scenario.sparsity,
            design.n_runs(),
            scenario.design_kind
        )));
    }
    let mut active: Vec<usize> = rand::seq::index::sample(rng, p, count).into_iter().map(|i| i + 1).collect();
    active.sort_unstable();
    let mut beta = Array1::<T>::zeros(p + 1);
    beta[0] = T::of(sample_laplace(rng));
    for &j in &active {
        beta[j] = T::of(sample_laplace(rng));
    }
    Ok(TrueModel { beta, active })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimRecord<T> {
    pub replicate: usize,
    pub method: String,
    pub rmspe: T,
    pub log_rmspe: T,
    pub support_size: usize,
    /// The fitted dense coefficient vector.
    pub beta: Array1<T>,
}

/// Five-number summary of one metric for one method. Quartiles use linear
/// interpolation between order statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantiles {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl Quantiles {
    pub fn from_values(mut v: Vec<f64>) -> Self {
        assert!(!v.is_empty(), "quantiles of an empty sample");
        v.sort_by(f64::total_cmp);
        let at = |q: f64| {
            let h = q * (v.len() - 1) as f64;
            let lo = h.floor() as usize;
            let hi = h.ceil() as usize;
            if lo == hi {
                v[lo]
            } else {
                v[lo] + (h - lo as f64) * (v[hi] - v[lo])
            }
        };
        Self { min: v[0], q1: at(0.25), median: at(0.5), q3: at(0.75), max: v[v.len() - 1] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    Rmspe,
    LogRmspe,
    SupportSize,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Rmspe, Metric::LogRmspe, Metric::SupportSize];
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Rmspe => "rmspe",
            Metric::LogRmspe => "log_rmspe",
            Metric::SupportSize => "support_size",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodSummary {
    pub method: String,
    pub metric: Metric,
    pub quantiles: Quantiles,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult<T> {
    pub scenario: SimScenario,
    pub true_model: TrueModel<T>,
    /// Ordered by replicate, then by method in scenario order.
    pub records: Vec<SimRecord<T>>,
    pub summaries: Vec<MethodSummary>,
    /// Hash of the noise-free SFD responses every record was scored against.
    pub truth_checksum: u64,
}

impl<T: Real> SimResult<T> {
    pub fn summary(&self, method: &str, metric: Metric) -> Option<&MethodSummary> {
        self.summaries.iter().find(|s| s.method == method && s.metric == metric)
    }

    pub fn records_for<'a>(&'a self, method: &'a str) -> impl Iterator<Item = &'a SimRecord<T>> + 'a {
        self.records.iter().filter(move |r| r.method == method)
    }
}

fn summarize<T: Real>(methods: &[Method], records: &[SimRecord<T>]) -> Vec<MethodSummary> {
    let mut out = Vec::new();
    for m in methods {
        for metric in Metric::ALL {
            let values: Vec<f64> = records
                .iter()
                .filter(|r| r.method == m.label)
                .map(|r| match metric {
                    Metric::Rmspe => r.rmspe.as_f64(),
                    Metric::LogRmspe => r.log_rmspe.as_f64(),
                    Metric::SupportSize => r.support_size as f64,
                })
                .collect();
            out.push(MethodSummary { method: m.label.clone(), metric, quantiles: Quantiles::from_values(values) });
        }
    }
    out
}

fn fit_method<T: Real>(
    method: &Method,
    m: &crate::designs::ModelMatrix<T>,
    y: &Array1<T>,
    truth: &TrueModel<T>,
    svem_seed: u64,
) -> Result<(Array1<T>, usize)> {
    match method.mode {
        FitMode::SingleShot(_) => {
            let sel = single_shot_fit(m.values.view(), y.view(), &method.selector)?;
            Ok((sel.beta, sel.support_size))
        }
        FitMode::Svem { n_boot } => {
            let fit = svem_fit(m, y.view(), &method.selector, n_boot, svem_seed)?;
            let size = fit.model.support_size();
            Ok((fit.model.beta, size))
        }
        FitMode::TrueSupport => {
            let support: Vec<usize> = std::iter::once(0).chain(truth.active.iter().copied()).collect();
            let ones = Array1::ones(m.n_rows());
            let fit = wls_fit(m.values.view(), &support, y.view(), ones.view())?;
            let size = fit.support_size();
            Ok((fit.dense(m.n_cols()), size))
        }
    }
}

/// Runs every method on every replicate. Deterministic in `scenario.seed`:
/// replicate `r` draws its noise and its ensemble weights from substreams
/// keyed by `r`, so all methods see the same data within a replicate.
pub fn run_scenario<T: Real>(scenario: &SimScenario) -> Result<SimResult<T>> {
    scenario.validate()?;
    let seeds = SeedStream::new(scenario.seed);
    let design = scenario.design::<T>()?;
    let m = expand_full_quadratic(&design);
    let truth: TrueModel<T> = gen_true_model(scenario, &mut seeds.child(0).substream(0))?;
    let sfd = make_sfd::<T>(scenario.k, scenario.sfd_size, seeds.child(1).master())?;
    let scorer = SurfaceScorer::new(truth.beta.view(), &sfd)?;
    let mean = predict_matrix(&m, truth.beta.view())?;
    let sigma = T::of(scenario.noise_sigma);
    let noise_seeds = seeds.child(2);
    let svem_seeds = seeds.child(3);

    let per_rep: Vec<Result<Vec<SimRecord<T>>>> = (0..scenario.n_reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = noise_seeds.substream(rep as u64);
            let y = mean.mapv(|mu| mu + sigma * T::of(rng.sample::<f64, _>(StandardNormal)));
            let svem_seed = svem_seeds.child(rep as u64).master();
            scenario
                .methods
                .iter()
                .map(|method| {
                    let tag = |e| SvemError::Replicate { replicate: rep, method: method.label.clone(), source: Box::new(e) };
                    let (beta, support_size) = fit_method(method, &m, &y, &truth, svem_seed).map_err(tag)?;
                    let report = scorer.score(beta.view()).map_err(tag)?;
                    Ok(SimRecord {
                        replicate: rep,
                        method: method.label.clone(),
                        rmspe: report.rmspe,
                        log_rmspe: report.log_rmspe,
                        support_size,
                        beta,
                    })
                })
                .collect()
        })
        .collect();

    let mut records = Vec::with_capacity(scenario.n_reps * scenario.methods.len());
    for r in per_rep {
        records.extend(r?);
    }
    let summaries = summarize(&scenario.methods, &records);
    Ok(SimResult {
        scenario: scenario.clone(),
        true_model: truth,
        records,
        summaries,
        truth_checksum: scorer.truth_checksum(),
    })
}

/// Label of the sweep method for a given iteration count.
pub fn sweep_label(n_boot: usize) -> String {
    format!("svem-fwd@{n_boot}")
}

/// Ensemble forward selection on a DSD with every term active, once per
/// iteration count. The true model, noise and per-replicate weight streams
/// are shared, so differences come from the iteration count alone.
pub fn run_nboot_sweep<T: Real>(k: usize, n_boot_values: &[usize], n_reps: usize, seed: u64) -> Result<SimResult<T>> {
    if n_boot_values.is_empty() {
        return Err(SvemError::InvalidSpec("nboot sweep needs at least one value".into()));
    }
    let methods = n_boot_values
        .iter()
        .map(|&n| Method::svem(SelectorKind::Forward, n).with_label(sweep_label(n)))
        .collect();
    let mut scenario = SimScenario::new(DesignKind::Dsd, k, Sparsity::All, methods, seed);
    scenario.n_reps = n_reps;
    run_scenario(&scenario)
}
