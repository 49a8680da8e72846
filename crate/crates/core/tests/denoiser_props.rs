mod common;

use common::*;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::Rng;
use smoothprior::baselines::{band_filter, magic_filter, magic_filter_spectral, nuclear_norm_denoise, GridShape, Keep};
use smoothprior::bernoulli::{bernoulli_denoise, lasso_coordinate_descent, BernoulliConfig, DenseDesign, LassoOptions, SparseMode};
use smoothprior::graph::build_grid_graph;
use smoothprior::linsolve::harmonic_interpolate;
use smoothprior::spectral::{eigendecompose, normalized_eigendecompose};
use smoothprior::uniform::{ccp_denoise, projected_gradient_denoise, uniform_loss, CcpOptions, ProjectedGradientOptions, UniformFeasibleRegion};
use smoothprior::{Graph, VertexSet};

fn arb_graph(max_n: usize) -> impl Strategy<Value = (Graph, u64)> {
    (3..=max_n, any::<u64>(), 0.0..0.3f64)
        .prop_map(|(n, seed, p)| (random_connected_graph(&mut rng(seed), n, p, 0.3, 2.0), seed))
}

fn arb_observation<R: Rng>(r: &mut R, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| match r.random_range(0..10) {
            0 => 0.0,
            1 | 2 => -r.random_range(0.2..3.0),
            _ => r.random_range(0.2..3.0),
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn uniform_solvers_descend_and_stay_feasible((g, seed) in arb_graph(30), kappa in 0.05..3.0f64) {
        let mut r = rng(seed ^ 20);
        let obs = arb_observation(&mut r, g.n());
        let region = UniformFeasibleRegion::from_observation(&obs).unwrap();
        let ccp = ccp_denoise(&obs, &g, &CcpOptions { kappa, jitter: 0.1, seed, ..Default::default() }).unwrap();
        prop_assert!(region.contains(&ccp.result.signal));
        for w in ccp.trace.losses.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12);
        }
        let last = *ccp.trace.losses.last().unwrap();
        let direct = uniform_loss(&ccp.result.signal, &g, kappa).unwrap();
        prop_assert!((last - direct).abs() <= 1e-9 * (1.0 + direct.abs()));
        let pg = projected_gradient_denoise(&obs, &g, &ProjectedGradientOptions { kappa, ..Default::default() }).unwrap();
        prop_assert!(region.contains(&pg.result.signal));
        for w in pg.trace.losses.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn trusted_vertices_are_untouched((g, seed) in arb_graph(25), tau in prop_oneof![Just(-1.0), Just(0.0), 0.05..5.0f64], l0 in any::<bool>()) {
        let mut r = rng(seed ^ 21);
        let signal = random_signal(&mut r, g.n(), 4.0);
        let zeta: Vec<usize> = (0..g.n()).filter(|_| r.random::<f64>() < 0.4).collect();
        prop_assume!(zeta.len() < g.n());
        let zeta = VertexSet::new(g.n(), zeta).unwrap();
        let mode = if l0 { SparseMode::L0 } else { SparseMode::L1 };
        let cfg = BernoulliConfig::with_tau(zeta.clone(), tau, mode).unwrap();
        let f = bernoulli_denoise(&signal, &g, &cfg).unwrap().signal;
        for a in zeta.complement().iter() {
            prop_assert_eq!(f[a].to_bits(), signal[a].to_bits());
        }
        if tau <= 0.0 && !zeta.is_empty() {
            let known = zeta.complement();
            let h = harmonic_interpolate(&g, &known, &known.gather(&signal)).unwrap();
            prop_assert_eq!(f, h);
        }
    }

    #[test]
    fn orientation_does_not_change_the_fit((g, seed) in arb_graph(15), tau in 0.05..3.0f64) {
        let mut r = rng(seed ^ 22);
        let b = dense_incidence(&g);
        let signal = random_signal(&mut r, g.n(), 3.0);
        let cols: Vec<usize> = (0..g.n()).filter(|_| r.random::<f64>() < 0.6).collect();
        prop_assume!(!cols.is_empty());
        let flips: Vec<f64> = (0..g.m()).map(|_| if r.random::<bool>() { -1.0 } else { 1.0 }).collect();
        let flipped = DMatrix::from_fn(g.m(), g.n(), |i, j| flips[i] * b[(i, j)]);
        let solve = |bm: &DMatrix<f64>| {
            let design = DenseDesign::from_matrix(&bm.select_columns(&cols)).unwrap();
            let target: Vec<f64> = (bm * DVector::from_column_slice(&signal)).iter().map(|v| -v).collect();
            lasso_coordinate_descent(&design, &target, tau, &LassoOptions::default()).unwrap().x
        };
        let (x1, x2) = (solve(&b), solve(&flipped));
        prop_assert!(x1.iter().zip(&x2).all(|(a, b)| (a - b).abs() <= 1e-7 * (1.0 + a.abs())));
    }

    #[test]
    fn magic_paths_agree((g, seed) in arb_graph(60), t in 0u32..8) {
        let signal = random_signal(&mut rng(seed ^ 23), g.n(), 2.0);
        let basis = normalized_eigendecompose(&g).unwrap();
        let spectral = magic_filter_spectral(&signal, &basis, t).unwrap();
        let iterated = magic_filter(&signal, &g, t as usize).unwrap();
        let a = g.dense_laplacian();
        let deg = DVector::from_iterator(g.n(), g.degrees().iter().copied());
        let adj = DMatrix::from_diagonal(&deg) - a;
        let step = (DMatrix::identity(g.n(), g.n()) + DMatrix::from_diagonal(&deg.map(|d| 1.0 / d)) * adj) * 0.5;
        let mut dense = DVector::from_column_slice(&signal);
        for _ in 0..t {
            dense = &step * dense;
        }
        let dense: Vec<f64> = dense.iter().copied().collect();
        prop_assert!(rel_diff(&spectral, &dense) <= 1e-8);
        prop_assert!(rel_diff(&iterated, &dense) <= 1e-8);
    }

    #[test]
    fn band_filters_are_complementary_projections((g, seed) in arb_graph(40)) {
        let n = g.n();
        let basis = eigendecompose(&g).unwrap();
        let mut r = rng(seed ^ 24);
        let signal = random_signal(&mut r, n, 2.0);
        let other = random_signal(&mut r, n, 2.0);
        let k = r.random_range(0..=n);
        let low = band_filter(&signal, &basis, k, Keep::Low).unwrap();
        let high = band_filter(&signal, &basis, n - k, Keep::High).unwrap();
        prop_assert!(low.iter().zip(&high).zip(&signal).all(|((l, h), s)| (l + h - s).abs() <= 1e-10));
        let again = band_filter(&low, &basis, k, Keep::Low).unwrap();
        prop_assert!(again.iter().zip(&low).all(|(a, b)| (a - b).abs() <= 1e-10));
        let po = band_filter(&other, &basis, k, Keep::Low).unwrap();
        let lhs: f64 = low.iter().zip(&other).map(|(a, b)| a * b).sum();
        let rhs: f64 = signal.iter().zip(&po).map(|(a, b)| a * b).sum();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
    }

    #[test]
    fn nuclear_norm_moves_at_most_tau_per_singular_value(h in 1usize..10, w in 1usize..10, seed in any::<u64>(), tau in 0.0..5.0f64) {
        let mut r = rng(seed);
        let rank = r.random_range(1..=h.min(w));
        let u = DMatrix::from_fn(h, rank, |_, _| r.random_range(-1.0..1.0));
        let v = DMatrix::from_fn(rank, w, |_, _| r.random_range(-1.0..1.0));
        let m = u * v;
        let g: Vec<f64> = (0..h).flat_map(|i| (0..w).map(move |j| (i, j))).map(|(i, j)| m[(i, j)]).collect();
        let out = nuclear_norm_denoise(&g, GridShape::new(h, w).unwrap(), tau).unwrap();
        let dist: f64 = out.iter().zip(&g).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        prop_assert!(dist <= tau * (rank as f64).sqrt() + 1e-9);
    }
}

#[test]
fn uniform_solvers_match_brute_force_on_an_edge() {
    let g = Graph::from_edges(2, [(0, 1, 1.0)]).unwrap();
    let obs = [1.0, 0.2];
    let mut best = (f64::INFINITY, [0.0, 0.0]);
    for i in 0..=5000 {
        for j in 0..=5000 {
            let f = [1.0 + i as f64 * 1e-3, 0.2 + j as f64 * 1e-3];
            let l = uniform_loss(&f, &g, 1.0).unwrap();
            if l < best.0 {
                best = (l, f);
            }
        }
    }
    let ccp = ccp_denoise(&obs, &g, &CcpOptions { tol: 1e-12, ..Default::default() }).unwrap().result.signal;
    let pg = projected_gradient_denoise(&obs, &g, &ProjectedGradientOptions { tol: 1e-12, ..Default::default() }).unwrap().result.signal;
    for f in [ccp.clone(), pg] {
        assert!((f[0] - best.1[0]).abs() < 1e-2 && (f[1] - best.1[1]).abs() < 1e-2, "{f:?} vs {:?}", best.1);
    }
    // restarting from the optimum stays there
    let again = ccp_denoise(&ccp, &g, &CcpOptions { tol: 1e-12, init_scale: 0.0, ..Default::default() }).unwrap().result.signal;
    assert!((again[0] - ccp[0]).abs() < 1e-2 && (again[1] - ccp[1]).abs() < 1e-2);
}

#[test]
fn salt_and_pepper_on_a_flat_patch() {
    let g = build_grid_graph(4, 4).unwrap();
    let mut signal = vec![3.0; 16];
    signal[5] = 10.0;
    signal[10] = -4.0;
    let zeta = VertexSet::full(16);
    let cfg = BernoulliConfig::with_tau(zeta, 0.5, SparseMode::L0).unwrap();
    let f = bernoulli_denoise(&signal, &g, &cfg).unwrap().signal;
    assert!(f.iter().all(|v| (v - 3.0).abs() < 1e-8), "{f:?}");
}

#[test]
fn p3_dropout_examples() {
    let g = Graph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
    let zeta = VertexSet::new(3, [1]).unwrap();
    let cfg = BernoulliConfig::with_dropout(zeta.clone(), 0.7, 1.0, SparseMode::L1).unwrap();
    assert_eq!(bernoulli_denoise(&[0.0, 5.0, 2.0], &g, &cfg).unwrap().signal, vec![0.0, 1.0, 2.0]);
    let cfg = BernoulliConfig::with_tau(zeta, 1.0, SparseMode::L0).unwrap();
    let f = bernoulli_denoise(&[0.0, 5.0, 0.0], &g, &cfg).unwrap().signal;
    assert!(f.iter().all(|v| v.abs() < 1e-10), "{f:?}");
}

#[test]
fn single_column_lasso_is_soft_thresholding() {
    let col = [1.0, -2.0, 0.5];
    let design = DenseDesign::from_column_major(3, 1, col.to_vec()).unwrap();
    let target = [3.0, 1.0, -2.0];
    let norm2: f64 = col.iter().map(|v| v * v).sum();
    let rho: f64 = col.iter().zip(&target).map(|(a, b)| a * b).sum();
    assert!(lasso_coordinate_descent(&design, &target, 0.0, &LassoOptions::default()).is_err());
    for tau in [1e-9, 0.1, 1.0, 2.0 * rho.abs() + 1.0] {
        let x = lasso_coordinate_descent(&design, &target, tau, &LassoOptions::default()).unwrap().x[0];
        let expected = rho.signum() * (rho.abs() - tau / 2.0).max(0.0) / norm2;
        assert!((x - expected).abs() < 1e-10, "tau {tau}: {x} vs {expected}");
    }
}
