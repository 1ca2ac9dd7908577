use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use svem_core::engine::DEFAULT_NBOOT;
use svem_core::rng::DEFAULT_SEED;
use svem_core::sim::{Metric, DEFAULT_REPS, DEFAULT_SFD_SIZE};
use svem_core::{run_nboot_sweep, run_scenario, DesignKind, Method, SimResult, SimScenario, Sparsity};

use crate::io::{ensure_dir, num, write_atomic, CsvOut};
use crate::{with_threads, SimulateArgs};

const KEYS: [&str; 10] = ["design", "k", "sparsity", "nreps", "methods", "nboot", "sfd_size", "seed", "noise", "sweep"];

/// Parsed `key=value` config; values keep their line numbers for errors.
struct Config<'a> {
    path: &'a Path,
    values: BTreeMap<String, (usize, String)>,
}

impl<'a> Config<'a> {
    fn parse(path: &'a Path, text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                bail!("{}: line {}: expected key=value", path.display(), i + 1);
            };
            let k = k.trim().to_ascii_lowercase();
            if !KEYS.contains(&k.as_str()) {
                bail!("{}: line {}: unknown key '{k}' (expected one of {})", path.display(), i + 1, KEYS.join(", "));
            }
            if values.insert(k.clone(), (i + 1, v.trim().to_string())).is_some() {
                bail!("{}: line {}: '{k}' given twice", path.display(), i + 1);
            }
        }
        Ok(Self { path, values })
    }

    fn raw(&self, key: &str) -> Option<&(usize, String)> {
        self.values.get(key)
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.raw(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse()
                .map(Some)
                .map_err(|e| anyhow::anyhow!("{}: line {line}: bad {key} '{v}': {e}", self.path.display())),
        }
    }

    fn require<T: std::str::FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)?.with_context(|| format!("{}: missing key '{key}'", self.path.display()))
    }

    fn list(&self, key: &str) -> Option<(usize, Vec<String>)> {
        self.raw(key)
            .map(|(line, v)| (*line, v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()))
    }
}

fn design_kind(cfg: &Config) -> Result<DesignKind> {
    let (line, v) = cfg.raw("design").with_context(|| format!("{}: missing key 'design'", cfg.path.display()))?;
    match v.to_ascii_lowercase().as_str() {
        "dsd" => Ok(DesignKind::Dsd),
        "bbd" => Ok(DesignKind::Bbd),
        _ => bail!("{}: line {line}: design must be dsd or bbd, not '{v}'", cfg.path.display()),
    }
}

fn scenario_result(cfg: &Config) -> Result<SimResult<f64>> {
    let kind = design_kind(cfg)?;
    let k: usize = cfg.require("k")?;
    let nreps = cfg.get("nreps")?.unwrap_or(DEFAULT_REPS);
    let seed = cfg.get("seed")?.unwrap_or(DEFAULT_SEED);

    if let Some((line, sweep)) = cfg.list("sweep") {
        // the sweep fixes its own methods and truth
        for key in ["methods", "nboot", "sparsity", "sfd_size", "noise"] {
            if cfg.raw(key).is_some() {
                bail!("{}: line {line}: sweep cannot be combined with {key}", cfg.path.display());
            }
        }
        if kind != DesignKind::Dsd {
            bail!("{}: line {line}: the nboot sweep runs on a dsd", cfg.path.display());
        }
        let n_boot = sweep
            .iter()
            .map(|s| s.parse::<usize>().map_err(|_| anyhow::anyhow!("{}: line {line}: bad sweep value '{s}'", cfg.path.display())))
            .collect::<Result<Vec<_>>>()?;
        return Ok(run_nboot_sweep(k, &n_boot, nreps, seed)?);
    }

    let sparsity: Sparsity = cfg.require("sparsity")?;
    let nboot = cfg.get("nboot")?.unwrap_or(DEFAULT_NBOOT);
    let (line, names) = cfg.list("methods").with_context(|| format!("{}: missing key 'methods'", cfg.path.display()))?;
    let methods = names
        .iter()
        .map(|m| Method::parse(m, nboot).with_context(|| format!("{}: line {line}", cfg.path.display())))
        .collect::<Result<Vec<_>>>()?;
    let mut sc = SimScenario::new(kind, k, sparsity, methods, seed);
    sc.n_reps = nreps;
    sc.sfd_size = cfg.get("sfd_size")?.unwrap_or(DEFAULT_SFD_SIZE);
    if let Some(s) = cfg.get("noise")? {
        sc.noise_sigma = s;
    }
    Ok(run_scenario(&sc)?)
}

pub fn run(a: &SimulateArgs) -> Result<()> {
    let text = fs::read_to_string(&a.config).with_context(|| format!("cannot read {}", a.config.display()))?;
    let cfg = Config::parse(&a.config, &text)?;
    let r = with_threads(a.threads, || scenario_result(&cfg))?;

    ensure_dir(&a.out_dir)?;
    let mut rec = CsvOut::new();
    rec.row(["replicate", "method", "rmspe", "log_rmspe", "support_size"]);
    for x in &r.records {
        rec.row([x.replicate.to_string(), x.method.clone(), num(x.rmspe), num(x.log_rmspe), x.support_size.to_string()]);
    }
    write_atomic(&a.out_dir.join("records.csv"), &rec.into_bytes())?;

    let mut sum = CsvOut::new();
    sum.row(["method", "metric", "min", "q1", "median", "q3", "max"]);
    for m in &r.scenario.methods {
        for metric in Metric::ALL {
            let q = r.summary(&m.label, metric).expect("every method is summarized").quantiles;
            sum.row([m.label.clone(), metric.to_string(), num(q.min), num(q.q1), num(q.median), num(q.q3), num(q.max)]);
        }
    }
    write_atomic(&a.out_dir.join("summary.csv"), &sum.into_bytes())
}
