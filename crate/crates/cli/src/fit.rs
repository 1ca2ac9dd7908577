use std::collections::HashSet;
use std::path::Path;

use anyhow::{bail, Context, Result};
use ndarray::{Array1, Array2};
use svem_core::designs::n_predictors;
use svem_core::engine::{iteration_weights, predict_matrix};
use svem_core::selectors::single_shot_fit;
use svem_core::{expand_full_quadratic, r_squared, rmspe, svem_fit, Criterion, Design, DesignKind, SelectorSpec, Term};

use crate::io::{emit, num, parse_cell, read_records, read_table, write_atomic, CsvOut, Table};
use crate::{with_threads, FitArgs, PredictArgs};

fn check_factor_names(names: &[String], path: &Path) -> Result<()> {
    let mut seen = HashSet::new();
    for n in names {
        if n.is_empty() {
            bail!("{}: empty column name", path.display());
        }
        if n.contains('*') || n == "Intercept" {
            bail!("{}: '{n}' cannot be a factor name", path.display());
        }
        if !seen.insert(n) {
            bail!("{}: duplicate column '{n}'", path.display());
        }
    }
    Ok(())
}

/// Splits a table into a design over every column except `drop`.
fn design_without(t: &Table, drop: Option<usize>, path: &Path) -> Result<Design<f64>> {
    let keep: Vec<usize> = (0..t.header.len()).filter(|&j| Some(j) != drop).collect();
    if keep.is_empty() {
        bail!("{}: no factor columns", path.display());
    }
    let factors: Vec<String> = keep.iter().map(|&j| t.header[j].clone()).collect();
    check_factor_names(&factors, path)?;
    let runs = Array2::from_shape_fn((t.rows.len(), keep.len()), |(i, j)| t.rows[i][keep[j]]);
    Ok(Design::new(DesignKind::Custom, factors, runs)?)
}

pub fn run(a: &FitArgs) -> Result<()> {
    let t = read_table(&a.input)?;
    let yj = t.column_index(&a.response, &a.input)?;
    let d = design_without(&t, Some(yj), &a.input)?;
    let y = Array1::from(t.column(yj));
    let m = expand_full_quadratic(&d);
    let names = m.term_names(&d.factors);

    let mut spec = SelectorSpec::new(a.selector.into()).with_criterion(a.criterion.into());
    spec.lambda_grid_size = a.lambda_grid;
    spec.lambda_min_ratio = a.lambda_min_ratio;
    if let Some(s) = a.max_steps {
        spec.max_steps = s;
    }
    if !(a.lambda_min_ratio > 0.0 && a.lambda_min_ratio < 1.0) {
        bail!("--lambda-min-ratio must lie in (0, 1)");
    }

    let (beta, fraction) = if spec.criterion == Criterion::AutoValidation {
        let fit = with_threads(a.threads, || Ok(svem_fit(&m, y.view(), &spec, a.nboot, a.seed)?))?;
        if let Some(p) = &a.dump_ensemble {
            let mut out = CsvOut::new();
            out.row(&names);
            for r in fit.ensemble.rows.outer_iter() {
                out.row(r.iter().map(|&v| num(v)));
            }
            write_atomic(p, &out.into_bytes())?;
        }
        (fit.model.beta, fit.model.selection_fraction)
    } else {
        if a.dump_ensemble.is_some() {
            bail!("--dump-ensemble needs --criterion autovalid");
        }
        let sel = single_shot_fit(m.values.view(), y.view(), &spec)?;
        let frac = sel.beta.mapv(|b| if b != 0.0 { 1.0 } else { 0.0 });
        (sel.beta, frac)
    };

    if let Some(p) = &a.dump_weights {
        if a.dump_iteration >= a.nboot {
            bail!("--dump-iteration {} is past the last iteration ({})", a.dump_iteration, a.nboot - 1);
        }
        let w = iteration_weights::<f64>(a.seed, a.dump_iteration, d.n_runs());
        let mut out = CsvOut::new();
        let mut head = vec!["partition".to_string()];
        head.extend(d.factors.iter().cloned());
        head.push(a.response.clone());
        head.push("weight".into());
        out.row(&head);
        for (label, weights) in [("Training", &w.train), ("Validation", &w.valid)] {
            for i in 0..d.n_runs() {
                let mut row = vec![label.to_string()];
                row.extend(d.runs.row(i).iter().map(|&v| num(v)));
                row.push(num(y[i]));
                row.push(num(weights[i]));
                out.row(&row);
            }
        }
        write_atomic(p, &out.into_bytes())?;
    }

    let mut out = CsvOut::new();
    out.row(["term", "estimate", "selection_fraction"]);
    for (j, name) in names.iter().enumerate() {
        out.row([name.clone(), num(beta[j]), num(fraction[j])]);
    }
    emit(a.output.as_deref(), &out.into_bytes())?;

    let fitted = predict_matrix(&m, beta.view())?;
    // r2 is undefined for a constant response
    let r2 = if y.iter().all(|&v| v == y[0]) { f64::NAN } else { r_squared(y.view(), fitted.view())? };
    let metrics = format!("rmspe={}\nr2={}\n", num(rmspe(y.view(), fitted.view())?), num(r2));
    // keep stdout pure CSV when the coefficients go there
    if a.output.is_some() {
        print!("{metrics}");
    } else {
        eprint!("{metrics}");
    }
    Ok(())
}

/// Reads `term,estimate[,...]` into parsed terms and coefficients.
fn read_model(path: &Path, factors: &[String]) -> Result<(Vec<Term>, Vec<f64>)> {
    let (header, records) = read_records(path)?;
    let tj = header.iter().position(|h| h == "term").with_context(|| format!("{}: no column named 'term'", path.display()))?;
    let ej = header
        .iter()
        .position(|h| h == "estimate")
        .with_context(|| format!("{}: no column named 'estimate'", path.display()))?;
    let mut terms = Vec::with_capacity(records.len());
    let mut beta = Vec::with_capacity(records.len());
    for rec in &records {
        let line = rec.position().map_or(0, |p| p.line());
        let term = Term::parse(&rec[tj], factors).with_context(|| format!("{}: line {line}", path.display()))?;
        terms.push(term);
        beta.push(parse_cell(path, rec, ej, "estimate")?);
    }
    if terms.is_empty() {
        bail!("{}: no terms", path.display());
    }
    Ok((terms, beta))
}

pub fn predict(a: &PredictArgs) -> Result<()> {
    let t = read_table(&a.design)?;
    let drop = t.header.iter().position(|h| *h == a.response);
    let d = design_without(&t, drop, &a.design)?;
    let (terms, beta) = read_model(&a.model, &d.factors)?;
    let expected = n_predictors(d.n_factors()) + 1;
    if terms.len() != expected {
        bail!(
            "{} has {} terms but a full-quadratic model in the design's {} factors has {expected}",
            a.model.display(),
            terms.len(),
            d.n_factors()
        );
    }
    let full = expand_full_quadratic(&d);
    let mut ordered = Array1::<f64>::zeros(expected);
    let mut seen = vec![false; expected];
    for (term, b) in terms.iter().zip(&beta) {
        let j = full.terms.iter().position(|x| x == term).expect("parsed terms are full-quadratic terms");
        if seen[j] {
            bail!("{}: term '{}' appears twice", a.model.display(), term.name(&d.factors));
        }
        seen[j] = true;
        ordered[j] = *b;
    }
    let pred = predict_matrix(&full, ordered.view())?;

    let mut out = CsvOut::new();
    let mut head = d.factors.clone();
    head.push("prediction".into());
    out.row(&head);
    for (i, p) in pred.iter().enumerate() {
        let mut row: Vec<String> = d.runs.row(i).iter().map(|&v| num(v)).collect();
        row.push(num(*p));
        out.row(&row);
    }
    emit(a.output.as_deref(), &out.into_bytes())
}
