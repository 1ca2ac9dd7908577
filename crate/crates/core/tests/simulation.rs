use rayon::ThreadPoolBuilder;

use svem_core::casestudy::{load_case_study, run_case_study, CaseStudyMethod};
use svem_core::designs::{expand_full_quadratic, make_sfd, DesignKind};
use svem_core::evaluation::SurfaceScorer;
use svem_core::sim::{sweep_label, Metric};
use svem_core::{run_nboot_sweep, run_scenario, Method, SeedStream, SelectorKind, SimScenario, Sparsity};

fn small(kind: DesignKind, k: usize, sparsity: Sparsity, seed: u64) -> SimScenario {
    let methods = ["fwd-bic", "lasso-aicc", "svem-fwd@10", "svem-lasso@10", "svem-pfwd@10", "oracle"]
        .iter()
        .map(|m| Method::parse(m, 10).unwrap())
        .collect();
    let mut sc = SimScenario::new(kind, k, sparsity, methods, seed);
    sc.n_reps = 6;
    sc.sfd_size = 500;
    sc
}

#[test]
fn scenario_reproducible_across_runs_and_threads() {
    let sc = small(DesignKind::Dsd, 4, Sparsity::Medium, 31);
    let a = run_scenario::<f64>(&sc).unwrap();
    let b = ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| run_scenario::<f64>(&sc).unwrap());
    let c = ThreadPoolBuilder::new().num_threads(3).build().unwrap().install(|| run_scenario::<f64>(&sc).unwrap());
    assert_eq!(a, b);
    assert_eq!(a, c);
    assert_eq!(a.records.len(), 6 * 6);
    let d = run_scenario::<f64>(&small(DesignKind::Dsd, 4, Sparsity::Medium, 32)).unwrap();
    assert_ne!(a.true_model, d.true_model);
}

#[test]
fn every_method_scored_on_one_surface() {
    let sc = small(DesignKind::Bbd, 3, Sparsity::All, 5);
    let r = run_scenario::<f64>(&sc).unwrap();
    let sfd = make_sfd::<f64>(3, sc.sfd_size, SeedStream::new(sc.seed).child(1).master()).unwrap();
    let scorer = SurfaceScorer::new(r.true_model.beta.view(), &sfd).unwrap();
    assert_eq!(scorer.truth_checksum(), r.truth_checksum);
    for rec in &r.records {
        let again = scorer.score(rec.beta.view()).unwrap();
        assert_eq!(again.rmspe, rec.rmspe, "{} replicate {}", rec.method, rec.replicate);
    }
}

#[test]
fn support_size_counts_bagged_nonzeros() {
    let r = run_scenario::<f64>(&small(DesignKind::Dsd, 4, Sparsity::High, 8)).unwrap();
    for rec in &r.records {
        assert_eq!(rec.support_size, rec.beta.iter().skip(1).filter(|&&b| b != 0.0).count());
        assert!((rec.log_rmspe - rec.rmspe.ln()).abs() < 1e-12);
    }
}

#[test]
fn oracle_error_vanishes_with_noise() {
    let mut prev = f64::INFINITY;
    for sigma in [1.0, 1e-3, 1e-6] {
        let mut sc = SimScenario::new(DesignKind::Dsd, 6, Sparsity::High, vec![Method::true_support()], 12);
        sc.n_reps = 3;
        sc.sfd_size = 400;
        sc.noise_sigma = sigma;
        let r = run_scenario::<f64>(&sc).unwrap();
        let worst = r.records.iter().map(|x| x.rmspe).fold(0.0, f64::max);
        assert!(worst < prev);
        prev = worst;
    }
    assert!(prev < 1e-5, "{prev}");
}

#[test]
fn summaries_cover_each_method_and_metric() {
    let sc = small(DesignKind::Dsd, 4, Sparsity::High, 2);
    let r = run_scenario::<f64>(&sc).unwrap();
    for m in &sc.methods {
        for metric in Metric::ALL {
            let s = r.summary(&m.label, metric).unwrap();
            let q = s.quantiles;
            assert!(q.min <= q.q1 && q.q1 <= q.median && q.median <= q.q3 && q.q3 <= q.max);
        }
        let mut v: Vec<f64> = r.records_for(&m.label).map(|x| x.rmspe).collect();
        v.sort_by(f64::total_cmp);
        assert_eq!(r.summary(&m.label, Metric::Rmspe).unwrap().quantiles.median, (v[2] + v[3]) / 2.0);
    }
}

#[test]
fn sweep_shares_data_across_iteration_counts() {
    let r = run_nboot_sweep::<f64>(4, &[1, 5], 4, 17).unwrap();
    assert_eq!(r.scenario.sparsity, Sparsity::All);
    assert_eq!(r.true_model.active.len(), 14);
    let (l1, l5) = (sweep_label(1), sweep_label(5));
    let one: Vec<_> = r.records_for(&l1).collect();
    let five: Vec<_> = r.records_for(&l5).collect();
    assert_eq!(one.len(), 4);
    assert_eq!(five.len(), 4);
    let sc = SimScenario::new(DesignKind::Dsd, 4, Sparsity::All, vec![Method::svem(SelectorKind::Forward, 1)], 17);
    let m = expand_full_quadratic(&sc.design::<f64>().unwrap());
    assert_eq!(one[0].beta.len(), m.n_cols());
    // the single-iteration bag keeps exact zeros; the five-iteration bag
    // selects more terms in at least one replicate
    assert!(one.iter().zip(&five).any(|(a, b)| b.support_size > a.support_size));
    assert!(run_nboot_sweep::<f64>(4, &[], 4, 17).is_err());
}

#[test]
fn case_study_transfer_error_exceeds_in_sample_error() {
    let d = load_case_study::<f64>();
    assert_eq!(d.dsd.n_runs(), 15);
    assert_eq!(d.ccd.n_runs(), 31);
    for method in CaseStudyMethod::ALL {
        let r = run_case_study::<f64>(method, 50, 3).unwrap();
        assert!(r.rmspe_ccd > r.rmspe_dsd, "{method}");
        assert_eq!(r.ccd_predicted.len(), 31);
    }
}

fn table_hash() -> u64 {
    let d = load_case_study::<f64>();
    d.dsd
        .runs
        .iter()
        .chain(d.dsd_titer.iter())
        .chain(d.ccd.runs.iter())
        .chain(d.ccd_titer.iter())
        .fold(0xCBF2_9CE4_8422_2325u64, |h, v| (h ^ v.to_bits()).wrapping_mul(0x0000_0100_0000_01B3))
}

#[test]
fn case_study_tables_hash_stably() {
    let d = load_case_study::<f64>();
    assert!((d.dsd_titer.sum() - 4701.19).abs() < 1e-9);
    assert!((d.ccd_titer.sum() - 8812.09).abs() < 1e-9);
    assert_eq!(table_hash(), TABLE_HASH);
}

// FNV-1a over the bit patterns of both tables, row-major, titers after runs.
const TABLE_HASH: u64 = 0x80f1_0ee6_bd6a_ebaf;
