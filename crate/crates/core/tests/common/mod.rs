#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use smoothprior::Graph;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random spanning tree plus each remaining pair with probability `p`,
/// weights uniform in `[wmin, wmax]`.
pub fn random_connected_graph<R: Rng>(rng: &mut R, n: usize, p: f64, wmin: f64, wmax: f64) -> Graph {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges = std::collections::BTreeMap::new();
    for i in 1..n {
        let j = rng.random_range(0..i);
        let (a, b) = (order[i].min(order[j]), order[i].max(order[j]));
        edges.insert((a, b), rng.random_range(wmin..=wmax));
    }
    if p > 0.0 {
        for a in 0..n {
            for b in a + 1..n {
                if !edges.contains_key(&(a, b)) && rng.random::<f64>() < p {
                    edges.insert((a, b), rng.random_range(wmin..=wmax));
                }
            }
        }
    }
    Graph::from_edges(n, edges.into_iter().map(|((a, b), w)| (a, b, w))).unwrap()
}

pub fn random_signal<R: Rng>(rng: &mut R, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-scale..=scale)).collect()
}

pub fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

/// Dense incidence matrix with rows in edge order, `+√w` at the smaller endpoint.
pub fn dense_incidence(g: &Graph) -> nalgebra::DMatrix<f64> {
    let mut b = nalgebra::DMatrix::zeros(g.m(), g.n());
    for (i, e) in g.edges().iter().enumerate() {
        b[(i, e.a)] = e.w.sqrt();
        b[(i, e.b)] = -e.w.sqrt();
    }
    b
}

/// `min_x ‖D x − t‖²` over the given columns, by dense least squares.
pub fn dense_subset_residual(d: &nalgebra::DMatrix<f64>, cols: &[usize], t: &nalgebra::DVector<f64>) -> f64 {
    if cols.is_empty() {
        return t.norm_squared();
    }
    let sub = d.select_columns(cols);
    let svd = sub.clone().svd(true, true);
    let x = svd.solve(t, 1e-12).unwrap();
    (sub * x - t).norm_squared()
}
