//! Random points, tangent perturbations and graphs for tests, benchmarks and oracles.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::function::VertexFunction;
use crate::graph::WeightedGraph;
use crate::manifold::{wrap_angle, Manifold};

/// A random point: Gaussian coordinates, a uniform angle, a uniform sphere
/// point, or `exp_I` of a Gaussian symmetric matrix.
pub fn random_point<R: Rng + ?Sized>(m: Manifold, rng: &mut R) -> Vec<f64> {
    match m {
        Manifold::Euclidean(d) => (0..d).map(|_| rng.sample(StandardNormal)).collect(),
        Manifold::Circle => vec![wrap_angle(rng.random_range(-PI..PI))],
        Manifold::Sphere2 => {
            let mut v: Vec<f64> = (0..3).map(|_| rng.sample(StandardNormal)).collect();
            m.canonicalize(&mut v);
            v
        }
        Manifold::Spd(n) => {
            let mut id = vec![0.0; n * n];
            for i in 0..n {
                id[i * n + i] = 1.0;
            }
            let mut v = vec![0.0; n * n];
            m.random_tangent_into(&id, 0.5, rng, &mut v);
            let mut out = vec![0.0; n * n];
            m.exp_into(&id, &v, &mut out);
            out
        }
    }
}

/// A random point at distance `fraction * L` from `x`, with `L` the injectivity
/// radius when finite and `2` otherwise.
pub fn random_point_near<R: Rng + ?Sized>(m: Manifold, x: &[f64], fraction: f64, rng: &mut R) -> Vec<f64> {
    let reach = if m.injectivity_radius().is_finite() {
        m.injectivity_radius()
    } else {
        2.0
    };
    let mut v = vec![0.0; m.ambient_dim()];
    loop {
        m.random_tangent_into(x, 1.0, rng, &mut v);
        let n = m.norm(x, &v);
        if n > 1e-8 {
            v.iter_mut().for_each(|a| *a *= fraction * reach / n);
            break;
        }
    }
    let mut out = vec![0.0; m.ambient_dim()];
    m.exp_into(x, &v, &mut out);
    out
}

/// Erdős–Rényi style symmetric graph with weights uniform in `(0, 1]`.
pub fn random_symmetric_graph<R: Rng + ?Sized>(n: usize, edge_prob: f64, rng: &mut R) -> WeightedGraph {
    let mut adjacency = vec![Vec::new(); n];
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.random::<f64>() < edge_prob {
                let w = 1.0 - rng.random::<f64>();
                adjacency[u].push((v, w));
                adjacency[v].push((u, w));
            }
        }
    }
    WeightedGraph::from_adjacency(n, adjacency).expect("valid random graph")
}

/// `n` points scattered around a random centre, each at distance at most
/// `spread * L` (see [`random_point_near`]), so that for `spread < 0.5` every
/// pair is admissible.
pub fn random_clustered_function<R: Rng + ?Sized>(m: Manifold, n: usize, spread: f64, rng: &mut R) -> VertexFunction {
    let centre = random_point(m, rng);
    let mut values = Vec::with_capacity(n * m.ambient_dim());
    for _ in 0..n {
        let fraction = spread * (1.0 - rng.random::<f64>());
        values.extend(random_point_near(m, &centre, fraction, rng));
    }
    VertexFunction::new(m, vec![n], values, None).expect("sampled points are valid")
}
