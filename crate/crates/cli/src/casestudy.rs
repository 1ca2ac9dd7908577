use anyhow::Result;
use svem_core::{run_case_study, CaseStudyMethod, CaseStudyReport};

use crate::io::{ensure_dir, num, write_atomic, CsvOut};
use crate::{with_threads, CaseMethodChoice, CasestudyArgs};

pub fn run(a: &CasestudyArgs) -> Result<()> {
    let methods: Vec<CaseStudyMethod> = match a.method {
        CaseMethodChoice::SvemFwd => vec![CaseStudyMethod::SvemForward],
        CaseMethodChoice::SvemLasso => vec![CaseStudyMethod::SvemLasso],
        CaseMethodChoice::LassoBic => vec![CaseStudyMethod::LassoBic],
        CaseMethodChoice::All => CaseStudyMethod::ALL.to_vec(),
    };
    let reports: Vec<CaseStudyReport<f64>> = with_threads(a.threads, || {
        methods.iter().map(|&m| Ok(run_case_study(m, a.nboot, a.seed)?)).collect()
    })?;

    ensure_dir(&a.out_dir)?;
    let mut table = CsvOut::new();
    table.row(["method", "rmspe_dsd", "rmspe_ccd", "r2_ccd"]);
    for r in &reports {
        table.row([r.method.to_string(), num(r.rmspe_dsd), num(r.rmspe_ccd), num(r.r2_ccd)]);
    }
    write_atomic(&a.out_dir.join("table3.csv"), &table.into_bytes())?;

    let mut pred = CsvOut::new();
    let mut head = vec!["run".to_string(), "observed".to_string()];
    head.extend(reports.iter().map(|r| r.method.to_string()));
    pred.row(&head);
    for (i, obs) in reports[0].ccd_observed.iter().enumerate() {
        let mut row = vec![(i + 1).to_string(), num(*obs)];
        row.extend(reports.iter().map(|r| num(r.ccd_predicted[i])));
        pred.row(&row);
    }
    write_atomic(&a.out_dir.join("predictions.csv"), &pred.into_bytes())?;

    for r in &reports {
        println!("{}: rmspe_dsd={} rmspe_ccd={} r2_ccd={}", r.method, num(r.rmspe_dsd), num(r.rmspe_ccd), num(r.r2_ccd));
    }
    Ok(())
}
