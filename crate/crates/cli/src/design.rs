use anyhow::{bail, Result};
use svem_core::designs::{default_bbd_center_runs, expand_full_quadratic, make_bbd, make_dsd, make_sfd};

use crate::io::{emit, num, CsvOut};
use crate::{DesignArgs, DesignChoice};

pub fn run(a: &DesignArgs) -> Result<()> {
    if a.runs.is_some() && a.kind != DesignChoice::Sfd {
        bail!("--runs applies only to --kind sfd");
    }
    let d = match a.kind {
        DesignChoice::Dsd => make_dsd::<f64>(a.k, a.fake_factors, a.center_runs.unwrap_or(1))?,
        DesignChoice::Bbd => make_bbd::<f64>(a.k, a.center_runs.unwrap_or_else(|| default_bbd_center_runs(a.k)))?,
        DesignChoice::Sfd => {
            let Some(n) = a.runs else { bail!("--kind sfd needs --runs") };
            make_sfd::<f64>(a.k, n, a.seed)?
        }
    };
    let mut out = CsvOut::new();
    if a.expanded {
        let m = expand_full_quadratic(&d);
        out.row(m.term_names(&d.factors));
        for r in m.values.outer_iter() {
            out.row(r.iter().map(|&v| num(v)));
        }
    } else {
        out.row(&d.factors);
        for r in d.runs.outer_iter() {
            out.row(r.iter().map(|&v| num(v)));
        }
    }
    emit(a.output.as_deref(), &out.into_bytes())
}
