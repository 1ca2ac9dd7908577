use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::Rng;
use rand_distr::StandardNormal;

use svem_core::designs::{expand_full_quadratic, make_bbd, make_dsd};
use svem_core::engine::iteration_weights;
use svem_core::selectors::{
    forward_path, information_criterion, lasso_path_with_lambdas, pruned_forward_path, run_path, select_from_path,
    single_shot_fit, Criterion, LassoConfig, SelectorKind, SelectorSpec,
};
use svem_core::{draw_weights, weighted_sse, wls_fit, SeedStream, WlsFit};

/// Gauss-Jordan inverse with partial pivoting.
fn invert(a: &Array2<f64>) -> Array2<f64> {
    let n = a.nrows();
    let mut m = a.clone();
    let mut inv = Array2::<f64>::eye(n);
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[[i, c]].abs().total_cmp(&m[[j, c]].abs())).unwrap();
        for k in 0..n {
            m.swap([c, k], [p, k]);
            inv.swap([c, k], [p, k]);
        }
        let d = m[[c, c]];
        for k in 0..n {
            m[[c, k]] /= d;
            inv[[c, k]] /= d;
        }
        for r in 0..n {
            if r != c {
                let f = m[[r, c]];
                for k in 0..n {
                    m[[r, k]] -= f * m[[c, k]];
                    inv[[r, k]] -= f * inv[[c, k]];
                }
            }
        }
    }
    inv
}

fn normal_equations(x: ArrayView2<f64>, y: ArrayView1<f64>, w: ArrayView1<f64>) -> Array1<f64> {
    let xtw = Array2::from_shape_fn((x.ncols(), x.nrows()), |(j, i)| x[[i, j]] * w[i]);
    invert(&xtw.dot(&x)).dot(&xtw.dot(&y))
}

fn gaussian_matrix<R: Rng>(rng: &mut R, n: usize, p: usize) -> Array2<f64> {
    Array2::from_shape_fn((n, p), |(_, j)| if j == 0 { 1.0 } else { rng.sample(StandardNormal) })
}

#[test]
fn wls_matches_normal_equations() {
    let seeds = SeedStream::new(101);
    for t in 0..50 {
        let mut rng = seeds.substream(t);
        let n = rng.random_range(7..=12);
        let p = rng.random_range(2..=6);
        let x = gaussian_matrix(&mut rng, n, p);
        let y = Array1::from_shape_fn(n, |_| rng.sample::<f64, _>(StandardNormal) * 3.0);
        let w = draw_weights::<f64, _>(n, &mut rng).train;
        let support: Vec<usize> = (0..p).collect();
        let fit = wls_fit(x.view(), &support, y.view(), w.view()).unwrap();
        assert_eq!(fit.rank, p);
        let oracle = normal_equations(x.view(), y.view(), w.view());
        let diff = fit.beta.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-8, "instance {t}: max abs diff {diff}");
        let sse = weighted_sse(x.view(), y.view(), w.view(), oracle.view()).unwrap();
        assert!((fit.train_sse - sse).abs() <= 1e-8 * sse.max(1.0));
    }
}

/// Weighted moments and gradients computed from scratch, independent of the
/// library's standardization.
fn kkt_violation(x: ArrayView2<f64>, y: ArrayView1<f64>, w: ArrayView1<f64>, fit: &WlsFit<f64>, lambda: f64) -> f64 {
    let beta = fit.dense(x.ncols());
    let r = &y - &x.dot(&beta);
    let total = w.sum();
    let mut worst = (0..x.nrows()).map(|i| w[i] * r[i]).sum::<f64>().abs();
    for j in 1..x.ncols() {
        let col = x.column(j);
        let mean = (0..x.nrows()).map(|i| w[i] * col[i]).sum::<f64>() / total;
        let var = (0..x.nrows()).map(|i| w[i] * (col[i] - mean).powi(2)).sum::<f64>() / total;
        let sd = var.sqrt();
        if sd <= 1e-10 * col.iter().fold(0.0f64, |a, v| a.max(v.abs())) {
            assert_eq!(beta[j], 0.0, "constant column {j} entered the model");
            continue;
        }
        let g: f64 = (0..x.nrows()).map(|i| w[i] * r[i] * (col[i] - mean) / sd).sum();
        let v = if beta[j] == 0.0 { (g.abs() - lambda).max(0.0) } else { (g - lambda * beta[j].signum()).abs() };
        worst = worst.max(v);
    }
    worst
}

#[test]
fn lasso_path_satisfies_kkt() {
    let seeds = SeedStream::new(202);
    let bbd = expand_full_quadratic(&make_bbd::<f64>(3, 3).unwrap()).values;
    let dsd = expand_full_quadratic(&make_dsd::<f64>(4, 2, 1).unwrap()).values;
    for t in 0..30u64 {
        let mut rng = seeds.substream(t);
        let x = match t % 3 {
            0 => bbd.clone(),
            1 => dsd.clone(),
            _ => gaussian_matrix(&mut rng, 20, 8),
        };
        let n = x.nrows();
        let y = Array1::from_shape_fn(n, |i| 2.0 * x[[i, 1]] - x[[i, 3]] + rng.sample::<f64, _>(StandardNormal));
        let w = draw_weights::<f64, _>(n, &mut rng).train;
        let path = lasso_path_with_lambdas(x.view(), y.view(), w.view(), &LassoConfig::default()).unwrap();
        for (k, (fit, &lambda)) in path.fits.iter().zip(&path.lambdas).enumerate() {
            let v = kkt_violation(x.view(), y.view(), w.view(), fit, lambda);
            assert!(v <= 1e-6, "instance {t}, lambda {k}: KKT violation {v}");
        }
    }
}

#[test]
fn lasso_tail_approaches_least_squares() {
    let seeds = SeedStream::new(303);
    for t in 0..10u64 {
        let mut rng = seeds.substream(t);
        let x = gaussian_matrix(&mut rng, 25, 5);
        let y = Array1::from_shape_fn(25, |i| 1.0 + x[[i, 1]] - 0.5 * x[[i, 4]] + rng.sample::<f64, _>(StandardNormal));
        let w = draw_weights::<f64, _>(25, &mut rng).train;
        let cfg = LassoConfig { min_ratio: 1e-9, grid_size: 60, ..LassoConfig::default() };
        let path = lasso_path_with_lambdas(x.view(), y.view(), w.view(), &cfg).unwrap();
        let tail = path.fits.last().unwrap().dense(5);
        let ls = wls_fit(x.view(), &[0, 1, 2, 3, 4], y.view(), w.view()).unwrap().dense(5);
        let diff = tail.iter().zip(&ls).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-4, "instance {t}: {diff}");
    }
}

#[test]
fn lasso_head_support_is_monotone() {
    let m = expand_full_quadratic(&make_dsd::<f64>(6, 2, 1).unwrap());
    let seeds = SeedStream::new(404);
    for t in 0..10u64 {
        let mut rng = seeds.substream(t);
        let y = Array1::from_shape_fn(m.n_rows(), |_| rng.sample::<f64, _>(StandardNormal));
        let w = draw_weights::<f64, _>(m.n_rows(), &mut rng).train;
        let path = lasso_path_with_lambdas(m.values.view(), y.view(), w.view(), &LassoConfig::default()).unwrap();
        assert_eq!(path.fits[0].support_size(), 0);
        assert!(path.fits[1].support_size() >= path.fits[0].support_size());
        assert!(path.lambdas.windows(2).all(|p| p[1] < p[0]));
    }
}

fn two_term_sse(x: ArrayView2<f64>, y: ArrayView1<f64>, w: ArrayView1<f64>, j: usize) -> f64 {
    let sub = Array2::from_shape_fn((x.nrows(), 2), |(i, c)| if c == 0 { x[[i, 0]] } else { x[[i, j]] });
    let b = normal_equations(sub.view(), y, w);
    weighted_sse(sub.view(), y, w, b.view()).unwrap()
}

#[test]
fn forward_first_step_matches_exhaustive_search() {
    let m = expand_full_quadratic(&make_dsd::<f64>(4, 2, 1).unwrap());
    assert_eq!(m.n_rows(), 13);
    let seeds = SeedStream::new(505);
    for t in 0..20u64 {
        let mut rng = seeds.substream(t);
        let y = Array1::from_shape_fn(13, |_| rng.sample::<f64, _>(StandardNormal));
        let w = draw_weights::<f64, _>(13, &mut rng).train;
        let path = forward_path(m.values.view(), y.view(), w.view(), usize::MAX).unwrap();
        let best = (1..m.n_cols())
            .map(|j| (j, two_term_sse(m.values.view(), y.view(), w.view(), j)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        assert_eq!(path[1].support, vec![0, best.0], "instance {t}");
        assert!((path[1].train_sse - best.1).abs() < 1e-9 * best.1.max(1.0));
    }
}

#[test]
fn pruned_forward_drops_masked_term() {
    // x2 = x1 + a small independent part and y follows x2. Forward selection
    // often takes x1 first; once x2 is in, x1 should go exactly when dropping
    // it lowers the validation SSE of the training-weight fit.
    let seeds = SeedStream::new(808);
    let n = 12;
    let (mut masked, mut pruned) = (0, 0);
    for t in 0..2000u64 {
        let mut rng = seeds.substream(t);
        let x1: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let x = Array2::from_shape_fn((n, 3), |(i, j)| match j {
            0 => 1.0,
            1 => x1[i],
            _ => x1[i] + 0.3 * rng.sample::<f64, _>(StandardNormal),
        });
        let y = Array1::from_shape_fn(n, |i| 2.0 * x[[i, 2]] + 0.3 * rng.sample::<f64, _>(StandardNormal));
        let wp = draw_weights::<f64, _>(n, &mut rng);
        let fwd = forward_path(x.view(), y.view(), wp.train.view(), usize::MAX).unwrap();
        if fwd.len() < 3 || fwd[1].support != vec![0, 1] {
            continue;
        }
        masked += 1;
        let vsse = |support: &[usize]| {
            let f = wls_fit(x.view(), support, y.view(), wp.train.view()).unwrap();
            weighted_sse(x.view(), y.view(), wp.valid.view(), f.dense(3).view()).unwrap()
        };
        let expect_prune = vsse(&[0, 2]) < vsse(&[0, 1, 2]);
        let pf = pruned_forward_path(x.view(), y.view(), wp.train.view(), wp.valid.view(), usize::MAX).unwrap();
        assert_eq!(pf[1].support, vec![0, 1]);
        assert_eq!(pf[2].support, vec![0, 1, 2]);
        let dropped = pf.get(3).is_some_and(|f| f.support == vec![0, 2]);
        assert_eq!(dropped, expect_prune, "instance {t}");
        if expect_prune {
            pruned += 1;
            assert_eq!(pf.len(), 4, "x1 may not re-enter");
        } else {
            assert_eq!(pf.len(), 3);
        }
        assert!(pf.iter().all(|f| f.support.contains(&0)));
    }
    assert!(masked >= 20 && pruned >= 5, "masked {masked}, pruned {pruned}");
}

#[test]
fn select_from_path_matches_rescan() {
    let m = expand_full_quadratic(&make_bbd::<f64>(4, 3).unwrap());
    let seeds = SeedStream::new(606);
    for t in 0..20u64 {
        let mut rng = seeds.substream(t);
        let y = Array1::from_shape_fn(m.n_rows(), |i| m.values[[i, 2]] + rng.sample::<f64, _>(StandardNormal));
        let wp = iteration_weights::<f64>(t, 0, m.n_rows());
        for kind in [SelectorKind::Forward, SelectorKind::PrunedForward, SelectorKind::Lasso] {
            let spec = SelectorSpec::new(kind);
            let path = run_path(&spec, m.values.view(), y.view(), wp.train.view(), wp.valid.view()).unwrap();
            let sel = select_from_path(&path, m.values.view(), y.view(), wp.valid.view()).unwrap();
            let scores: Vec<f64> = path
                .iter()
                .map(|f| weighted_sse(m.values.view(), y.view(), wp.valid.view(), f.dense(m.n_cols()).view()).unwrap())
                .collect();
            let min = scores.iter().copied().fold(f64::INFINITY, f64::min);
            assert!((sel.valid_sse - min).abs() <= 1e-9 * min.max(1.0));
            assert!(scores.iter().all(|&s| sel.valid_sse <= s + 1e-9 * s.max(1.0)));
            let first = scores.iter().position(|&s| s == min).unwrap();
            let ties: Vec<usize> = (0..path.len()).filter(|&i| scores[i] == min).collect();
            let smallest = ties.iter().map(|&i| path[i].support_size()).min().unwrap();
            assert_eq!(sel.support_size, smallest);
            assert!(sel.path_index >= first);
        }
    }
}

fn bic_sizes_match_exhaustive_scan(m: &svem_core::ModelMatrix64, seed: u64) -> Vec<usize> {
    let n = m.n_rows();
    let seeds = SeedStream::new(seed);
    let ones = Array1::ones(n);
    let spec = SelectorSpec::new(SelectorKind::Forward).with_criterion(Criterion::Bic);
    let mut sizes = Vec::new();
    for t in 0..30u64 {
        let mut rng = seeds.substream(t);
        let y = Array1::from_shape_fn(n, |_| rng.sample::<f64, _>(StandardNormal));
        let sel = single_shot_fit(m.values.view(), y.view(), &spec).unwrap();
        let path = run_path(&spec, m.values.view(), y.view(), ones.view(), ones.view()).unwrap();
        let best = path
            .iter()
            .enumerate()
            .map(|(i, f)| {
                let sse = weighted_sse(m.values.view(), y.view(), ones.view(), f.dense(m.n_cols()).view()).unwrap();
                let k = f.support_size() + 1;
                (i, n as f64 * (sse / n as f64).ln() + k as f64 * (n as f64).ln())
            })
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        assert_eq!(sel.path_index, best.0, "instance {t}");
        sizes.push(sel.support_size);
    }
    sizes.sort_unstable();
    sizes
}

#[test]
fn bic_on_noise_matches_exhaustive_criterion_scan() {
    let dsd = expand_full_quadratic(&make_dsd::<f64>(6, 2, 1).unwrap());
    let sizes = bic_sizes_match_exhaustive_scan(&dsd, 707);
    assert!(sizes.iter().all(|&s| s < dsd.n_rows() - 1), "{sizes:?}");

    // away from saturation BIC keeps pure noise out
    let bbd = expand_full_quadratic(&make_bbd::<f64>(4, 3).unwrap());
    let sizes = bic_sizes_match_exhaustive_scan(&bbd, 708);
    assert!(sizes[sizes.len() / 2] <= 1, "median BIC size on noise {sizes:?}");
}

#[test]
fn information_criteria_closed_forms() {
    let bic: f64 = information_criterion(Criterion::Bic, 10.0, 20, 3).unwrap();
    assert!((bic - (20.0 * 0.5f64.ln() + 3.0 * 20f64.ln())).abs() < 1e-12);
    let aicc: f64 = information_criterion(Criterion::Aicc, 10.0, 20, 3).unwrap();
    assert!((aicc - (20.0 * 0.5f64.ln() + 6.0 + 24.0 / 16.0)).abs() < 1e-12);
    assert!(information_criterion::<f64>(Criterion::Aicc, 1.0, 4, 3).is_none());
}
