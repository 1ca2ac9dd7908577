use svem_core::weights::WeightPair;
use svem_core::{draw_weights, SeedStream};

/// E[ln(u) ln(1-u)] over U(0,1), by symmetry twice the integral over (0, 1/2).
/// With u = exp(-x) the integrand becomes x * -ln(1 - exp(-x)) * exp(-x) on
/// (ln 2, inf), which is smooth and decays fast; composite Simpson on a
/// truncated range.
fn log_product_moment() -> f64 {
    let f = |x: f64| x * -(-(-x).exp()).ln_1p() * (-x).exp();
    let (a, b, n) = (std::f64::consts::LN_2, 60.0, 200_000);
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    2.0 * s * h / 3.0
}

fn moments(a: &[f64], b: &[f64]) -> (f64, f64, f64, f64, f64) {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let va = a.iter().map(|v| (v - ma).powi(2)).sum::<f64>() / (n - 1.0);
    let vb = b.iter().map(|v| (v - mb).powi(2)).sum::<f64>() / (n - 1.0);
    let cov = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / (n - 1.0);
    (ma, mb, va, vb, cov / (va * vb).sqrt())
}

fn ranks(v: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
    let mut r = vec![0; v.len()];
    for (rank, i) in idx.into_iter().enumerate() {
        r[i] = rank;
    }
    r
}

#[test]
fn integration_oracle_gives_analytic_correlation() {
    // Var of Exp(1) is 1, so the correlation is E[ln u ln(1-u)] - 1.
    let rho = log_product_moment() - 1.0;
    let analytic = 1.0 - std::f64::consts::PI.powi(2) / 6.0;
    assert!((rho - analytic).abs() < 1e-9, "{rho} vs {analytic}");
}

#[test]
fn million_draws_match_exponential_law() {
    let w = draw_weights::<f64, _>(1_000_000, &mut SeedStream::new(9001).substream(0));
    let (mt, mv, vt, vv, rho) = moments(w.train.as_slice().unwrap(), w.valid.as_slice().unwrap());
    assert!(mt > 0.995 && mt < 1.005, "train mean {mt}");
    assert!(mv > 0.995 && mv < 1.005, "valid mean {mv}");
    assert!(vt > 0.99 && vt < 1.01, "train variance {vt}");
    assert!(vv > 0.99 && vv < 1.01, "valid variance {vv}");
    let oracle = log_product_moment() - 1.0;
    assert!(rho > -0.66 && rho < -0.63, "correlation {rho}");
    assert!((rho - oracle).abs() < 0.005, "correlation {rho} vs oracle {oracle}");
}

#[test]
fn spearman_is_exactly_minus_one_per_draw() {
    let seeds = SeedStream::new(77);
    for d in 0..200u64 {
        let n = 5 + (d as usize % 40);
        let w = draw_weights::<f64, _>(n, &mut seeds.substream(d));
        let rt = ranks(w.train.as_slice().unwrap());
        let rv = ranks(w.valid.as_slice().unwrap());
        let d2: usize = rt.iter().zip(&rv).map(|(&a, &b)| (a as isize - b as isize).pow(2) as usize).sum();
        // 1 - 6 sum d^2 / (n (n^2 - 1)) == -1  <=>  sum d^2 == n (n^2 - 1) / 3
        assert_eq!(3 * d2, n * (n * n - 1), "draw {d}");
    }
}

#[test]
fn pairs_follow_inverse_cdf() {
    let w = WeightPair::<f64>::from_uniforms([0.5, 0.9, 0.0, 1.0]);
    assert!((w.train[0] - std::f64::consts::LN_2).abs() < 1e-15);
    assert!((w.valid[0] - std::f64::consts::LN_2).abs() < 1e-15);
    assert!((w.train[1] - std::f64::consts::LN_10).abs() < 1e-12);
    assert!((w.valid[1] - 0.10536051565782628).abs() < 1e-12);
    assert!(w.train.iter().chain(w.valid.iter()).all(|v| v.is_finite() && *v > 0.0));
}

#[test]
fn same_seed_same_weights() {
    let a = draw_weights::<f64, _>(50, &mut SeedStream::new(5).substream(3));
    let b = draw_weights::<f64, _>(50, &mut SeedStream::new(5).substream(3));
    assert_eq!(a.u, b.u);
    assert_eq!(a.train, b.train);
    let c = draw_weights::<f64, _>(50, &mut SeedStream::new(5).substream(4));
    assert_ne!(a.u, c.u);
}
