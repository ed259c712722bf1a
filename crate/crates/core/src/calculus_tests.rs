use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::graph::WeightedGraph;
use crate::manifold::Manifold;
use crate::sampling::{random_clustered_function, random_symmetric_graph};

fn euclid(values: &[f64], m: usize) -> VertexFunction {
    VertexFunction::new(Manifold::Euclidean(m), vec![values.len() / m], values.to_vec(), None).unwrap()
}

fn path3() -> WeightedGraph {
    WeightedGraph::from_edges(3, [(0, 1, 1.0), (1, 0, 1.0), (1, 2, 1.0), (2, 1, 1.0)]).unwrap()
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

/// Random graph with independent (asymmetric) weights on a symmetric edge set.
fn random_asymmetric_graph(n: usize, prob: f64, rng: &mut ChaCha8Rng) -> WeightedGraph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.random::<f64>() < prob {
                edges.push((u, v, 1.0 - rng.random::<f64>()));
                edges.push((v, u, 1.0 - rng.random::<f64>()));
            }
        }
    }
    WeightedGraph::from_edges(n, edges).unwrap()
}

fn dense_weights(g: &WeightedGraph) -> Vec<Vec<f64>> {
    let n = g.n_vertices();
    let mut w = vec![vec![0.0; n]; n];
    for (u, v, x) in g.edges() {
        w[u][v] = x;
    }
    w
}

fn random_edge_function(g: &WeightedGraph, f: &VertexFunction, rng: &mut ChaCha8Rng) -> TangentEdgeFunction {
    let m = f.manifold();
    let mut h = TangentEdgeFunction::zeros(g, m);
    for u in 0..g.n_vertices() {
        for e in g.neighbors(u) {
            m.random_tangent_into(f.value(u), 1.0, rng, h.edge_mut(e.index));
        }
    }
    h
}

#[test]
fn directional_derivative_examples() {
    let g = WeightedGraph::from_edges(2, [(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
    let f = euclid(&[0.0, 3.0], 1);
    assert_eq!(directional_derivative(&g, &f, 0, 1).unwrap().coords(), &[3.0]);
    assert_eq!(directional_derivative(&g, &f, 0, 0).unwrap().coords(), &[0.0]);

    let g = WeightedGraph::from_edges(2, [(0, 1, 4.0), (1, 0, 4.0)]).unwrap();
    let f = VertexFunction::new(Manifold::Circle, vec![2], vec![0.0, FRAC_PI_4], None).unwrap();
    let d = directional_derivative(&g, &f, 0, 1).unwrap();
    assert!((d.coords()[0] - FRAC_PI_2).abs() < 1e-15);
    // not a neighbour
    let g = WeightedGraph::empty(2);
    assert_eq!(directional_derivative(&g, &f, 0, 1).unwrap().coords(), &[0.0]);
}

#[test]
fn gradient_examples() {
    let g = path3();
    let f = euclid(&[0.0, 1.0, 3.0], 1);
    let grad = gradient(&g, &f).unwrap();
    let e = g.find_edge(1, 2).unwrap();
    assert_eq!(grad.edge(e), &[2.0]);

    let c = VertexFunction::constant(Manifold::Sphere2, vec![3], &[0.0, 0.6, 0.8]).unwrap();
    assert!(gradient(&g, &c).unwrap().data().iter().all(|&x| x == 0.0));

    let mut masked = f.clone();
    masked.set_mask(Some(vec![true, true, false])).unwrap();
    let grad = gradient(&g, &masked).unwrap();
    assert_eq!(grad.edge(g.find_edge(1, 2).unwrap()), &[0.0]);
    assert_eq!(grad.edge(g.find_edge(2, 1).unwrap()), &[0.0]);
    assert_eq!(grad.edge(g.find_edge(0, 1).unwrap()), &[1.0]);
}

#[test]
fn divergence_examples() {
    let g = WeightedGraph::from_edges(2, [(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
    let f = euclid(&[0.0, 0.0], 1);
    let h = TangentEdgeFunction::from_data(&g, f.manifold(), vec![1.0, -1.0]).unwrap();
    let div = divergence(&g, &f, &h).unwrap();
    assert_eq!(div.at(0), &[-1.0]);
    assert_eq!(div.at(1), &[1.0]);
    let zero = TangentEdgeFunction::zeros(&g, f.manifold());
    assert!(divergence(&g, &f, &zero).unwrap().data().iter().all(|&x| x == 0.0));
}

#[test]
fn divergence_of_gradient_is_laplacian_on_sphere() {
    // ∇f is anti-symmetric under transport, so div ∇f reduces to -Σ √w ∇f(u,v) = Δf
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let g = random_symmetric_graph(15, 0.4, &mut rng);
    let f = random_clustered_function(Manifold::Sphere2, 15, 0.3, &mut rng);
    let grad = gradient(&g, &f).unwrap();
    let div = divergence(&g, &f, &grad).unwrap();
    let lap = aniso_p_laplacian(&g, &f, 2.0, 0.0).unwrap();
    for u in 0..15 {
        let mut concise = vec![0.0; 3];
        for e in g.neighbors(u) {
            for (c, x) in concise.iter_mut().zip(grad.edge(e.index)) {
                *c -= e.weight.sqrt() * x;
            }
        }
        assert!(close(div.at(u), &concise, 1e-12));
        assert!(close(div.at(u), lap.at(u), 1e-12));
    }
}

#[test]
fn directional_derivative_is_antisymmetric_under_transport() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for m in [Manifold::Circle, Manifold::Sphere2, Manifold::Spd(3)] {
        let g = random_symmetric_graph(12, 0.5, &mut rng);
        let f = random_clustered_function(m, 12, 0.3, &mut rng);
        for (u, v, _) in g.edges() {
            let duv = directional_derivative(&g, &f, u, v).unwrap();
            let dvu = directional_derivative(&g, &f, v, u).unwrap();
            let moved = dvu.transport_to(&f.point(u)).unwrap().scaled(-1.0);
            assert!(close(duv.coords(), moved.coords(), 1e-10), "{m}");
        }
    }
}

#[test]
fn norm_examples() {
    let g = WeightedGraph::from_edges(2, [(0, 1, 1.0)]).unwrap();
    let f = euclid(&[0.0, 0.0, 0.0, 0.0], 2);
    let h = TangentEdgeFunction::from_data(&g, f.manifold(), vec![3.0, 0.0]).unwrap();
    assert!((edge_norm_pq(&g, &f, &h, 2.0, 2.0).unwrap() - 3.0).abs() < 1e-15);
    assert_eq!(local_variation(&g, &f, &h, 0, 2.0).unwrap(), 3.0);
    assert_eq!(edge_inner(&g, &f, &h, &h).unwrap(), 9.0);
    let zero = TangentEdgeFunction::zeros(&g, f.manifold());
    for (p, q) in [(1.0, 1.0), (2.0, 2.0), (0.5, 3.0)] {
        assert_eq!(edge_norm_pq(&g, &f, &zero, p, q).unwrap(), 0.0);
    }
}

#[test]
fn edge_norm_matches_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let g = random_symmetric_graph(10, 0.5, &mut rng);
    let f = random_clustered_function(Manifold::Spd(2), 10, 0.3, &mut rng);
    let h = random_edge_function(&g, &f, &mut rng);
    let (p, q) = (1.5, 3.0);
    let mut total = 0.0;
    for u in 0..10 {
        let s: f64 = g
            .neighbors(u)
            .map(|e| f.manifold().norm(f.value(u), h.edge(e.index)).powf(q))
            .sum();
        total += s.powf(p / q);
    }
    let expect = (2.0 / p * total).powf(1.0 / p);
    assert!((edge_norm_pq(&g, &f, &h, p, q).unwrap() - expect).abs() < 1e-12 * expect);
}

#[test]
fn inner_is_sum_of_squared_norms() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let g = random_symmetric_graph(10, 0.5, &mut rng);
    let f = random_clustered_function(Manifold::Sphere2, 10, 0.3, &mut rng);
    let h = random_edge_function(&g, &f, &mut rng);
    let direct: f64 = (0..10)
        .flat_map(|u| g.neighbors(u).map(move |e| (u, e.index)))
        .map(|(u, e)| f.manifold().norm(f.value(u), h.edge(e)).powi(2))
        .sum();
    assert!((edge_inner(&g, &f, &h, &h).unwrap() - direct).abs() < 1e-12);
}

#[test]
fn euclidean_gradient_divergence_pairing() {
    // with this divergence, Σ_E ∇f·H = 2 Σ_V f·div H for arbitrary weights
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let n = rng.random_range(2..30);
        let g = random_asymmetric_graph(n, 0.3, &mut rng);
        let f = random_clustered_function(Manifold::Euclidean(3), n, 1.0, &mut rng);
        let h = random_edge_function(&g, &f, &mut rng);
        let lhs = edge_inner(&g, &f, &gradient(&g, &f).unwrap(), &h).unwrap();
        let div = divergence(&g, &f, &h).unwrap();
        let rhs: f64 = f.values().iter().zip(div.data()).map(|(a, b)| a * b).sum();
        assert!((lhs - 2.0 * rhs).abs() < 1e-10 * (1.0 + lhs.abs()), "{lhs} vs {rhs}");
    }
}

#[test]
fn grad_div_identity_zero_field() {
    let g = path3();
    let f = euclid(&[0.0, 1.0, 3.0], 1);
    let zero = TangentEdgeFunction::zeros(&g, f.manifold());
    assert_eq!(grad_div_identity(&g, &f, &zero).unwrap(), (0.0, 0.0));
    let directed = WeightedGraph::from_edges(2, [(0, 1, 1.0)]).unwrap();
    let f2 = euclid(&[0.0, 1.0], 1);
    let h = TangentEdgeFunction::zeros(&directed, f2.manifold());
    assert!(grad_div_identity(&directed, &f2, &h).is_err());
}

#[test]
fn symmetric_map_and_norms() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let g = random_symmetric_graph(12, 0.4, &mut rng);
    let f = random_clustered_function(Manifold::Sphere2, 12, 0.3, &mut rng);
    let h = random_clustered_function(Manifold::Sphere2, 12, 0.3, &mut rng);
    let a = symmetric_map(&g, &f, &h).unwrap();
    let b = symmetric_map(&g, &h, &f).unwrap();
    assert!((a - b).abs() < 1e-10, "{a} vs {b}");

    let p = 1.3;
    let mut total = 0.0;
    for u in 0..12 {
        let s: f64 = g.neighbors(u).map(|e| f.manifold().dist(f.value(u), f.value(e.target)).powi(2)).sum();
        total += s.powf(p / 2.0);
    }
    assert!((vertex_norm_p(&g, &f, p).unwrap().powf(p) - total).abs() < 1e-12 * total);
}

#[test]
fn vertex_distance_is_a_metric() {
    let f = euclid(&[0.0, 0.0], 1);
    let g = euclid(&[3.0, 4.0], 1);
    assert_eq!(vertex_distance(&f, &g).unwrap(), 5.0);
    assert_eq!(vertex_distance(&f, &f).unwrap(), 0.0);

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..20 {
        let a = random_clustered_function(Manifold::Spd(3), 8, 0.4, &mut rng);
        let b = random_clustered_function(Manifold::Spd(3), 8, 0.4, &mut rng);
        let c = random_clustered_function(Manifold::Spd(3), 8, 0.4, &mut rng);
        let ab = vertex_distance(&a, &b).unwrap();
        assert!((ab - vertex_distance(&b, &a).unwrap()).abs() < 1e-10);
        assert!(ab <= vertex_distance(&a, &c).unwrap() + vertex_distance(&c, &b).unwrap() + 1e-10);
    }
}

#[test]
fn laplacian_examples() {
    let g = path3();
    let f = euclid(&[0.0, 1.0, 3.0], 1);
    assert_eq!(aniso_p_laplacian(&g, &f, 2.0, 0.0).unwrap().at(1), &[-1.0]);
    assert_eq!(iso_p_laplacian(&g, &f, 2.0, 0.0).unwrap().at(1), &[-1.0]);

    // p=1: neighbours at distances 1 and 2 contribute unit vectors
    let star = WeightedGraph::from_edges(3, [(0, 1, 1.0), (0, 2, 1.0)]).unwrap();
    let f = euclid(&[0.0, 0.0, 1.0, 0.0, 0.0, 2.0], 2);
    assert!(close(aniso_p_laplacian(&star, &f, 1.0, 0.0).unwrap().at(0), &[-1.0, -1.0], 1e-15));

    for p in [0.1, 0.5, 1.0, 2.0, 3.0] {
        let c = VertexFunction::constant(Manifold::Spd(2), vec![3], &[2.0, 0.3, 0.3, 1.0]).unwrap();
        for model in [Model::Anisotropic, Model::Isotropic] {
            for eps in [0.0, 1e-7] {
                let lap = p_laplacian(&g, &c, model, p, eps).unwrap();
                assert!(lap.data().iter().all(|&x| x == 0.0), "p={p} {model:?}");
            }
        }
    }
}

#[test]
fn smoothing_applies_below_two() {
    let g = WeightedGraph::from_edges(2, [(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
    let f = euclid(&[0.0, 0.5], 1);
    let eps = 0.1;
    let lap = aniso_p_laplacian(&g, &f, 1.0, eps).unwrap();
    assert!((lap.at(0)[0] + 0.5 / 0.6).abs() < 1e-15);
    let lap = iso_p_laplacian(&g, &f, 1.0, eps).unwrap();
    assert!((lap.at(0)[0] + 0.5 / 0.6).abs() < 1e-15);
    let lap = aniso_p_laplacian(&g, &f, 3.0, eps).unwrap();
    assert!((lap.at(0)[0] + 0.25).abs() < 1e-15);
}

#[test]
fn p_two_models_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let g = random_asymmetric_graph(20, 0.3, &mut rng);
    let f = random_clustered_function(Manifold::Spd(3), 20, 0.3, &mut rng);
    let f0 = random_clustered_function(Manifold::Spd(3), 20, 0.3, &mut rng);
    let a = aniso_p_laplacian(&g, &f, 2.0, 1e-7).unwrap();
    let i = iso_p_laplacian(&g, &f, 2.0, 1e-7).unwrap();
    assert!(close(a.data(), i.data(), 1e-12));
    let ea = energy_aniso(&g, &f, &f0, 3.0, 2.0).unwrap();
    let ei = energy_iso(&g, &f, &f0, 3.0, 2.0).unwrap();
    assert!((ea - ei).abs() < 1e-12 * ea);
}

#[test]
fn energy_examples() {
    let g = WeightedGraph::from_edges(2, [(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
    let f0 = euclid(&[0.0, 0.0], 1);
    let f = euclid(&[0.0, 1.0], 1);
    assert_eq!(energy_aniso(&g, &f, &f0, 2.0, 2.0).unwrap(), 2.0);
    assert_eq!(energy_iso(&g, &f, &f0, 2.0, 2.0).unwrap(), 2.0);
    assert_eq!(energy_aniso(&g, &f0, &f0, 2.0, 1.0).unwrap(), 0.0);
    // at f = f0 only the regularizer remains
    assert_eq!(energy_aniso(&g, &f, &f, 5.0, 1.0).unwrap(), energy_aniso(&g, &f, &f, 0.0, 1.0).unwrap());
    assert_eq!(energy_aniso(&g, &f, &f, 0.0, 1.0).unwrap(), 2.0);
    assert!(energy_aniso(&g, &f, &f0, -1.0, 1.0).is_err());
}

#[test]
fn masked_vertices_drop_out_of_energy() {
    let g = path3();
    let mut f = euclid(&[0.0, 1.0, 30.0], 1);
    let f0 = euclid(&[0.0, 0.0, 0.0], 1);
    f.set_mask(Some(vec![true, true, false])).unwrap();
    // data 0 + 1, regularizer 1/2 (1 + 1)
    assert_eq!(energy_aniso(&g, &f, &f0, 2.0, 2.0).unwrap(), 2.0);
    let r = residual(&g, &f, &f0, Model::Anisotropic, 2.0, 2.0, 0.0).unwrap();
    assert_eq!(r.at(2), &[0.0]);
}

/// Central difference of `t ↦ E(exp_f(t ξ))` at `t = 0`.
fn energy_slope(g: &WeightedGraph, f: &VertexFunction, f0: &VertexFunction, model: Model, lambda: f64, p: f64, xi: &TangentVertexField, h: f64) -> f64 {
    let moved = |t: f64| {
        let mut out = f.clone();
        for u in 0..f.len() {
            let v: Vec<f64> = xi.at(u).iter().map(|a| a * t).collect();
            f.manifold().exp_into(f.value(u), &v, out.value_mut(u));
        }
        energy(g, &out, f0, model, lambda, p).unwrap()
    };
    (moved(h) - moved(-h)) / (2.0 * h)
}

fn random_field(f: &VertexFunction, rng: &mut ChaCha8Rng) -> TangentVertexField {
    let mut xi = TangentVertexField::zeros(f.len(), f.manifold());
    for u in 0..f.len() {
        f.manifold().random_tangent_into(f.value(u), 1.0, rng, xi.at_mut(u));
    }
    xi
}

#[test]
fn anisotropic_energy_gradient_is_twice_laplacian_minus_data_log() {
    // the regularizer sums over directed edges, so each symmetric pair enters
    // twice and the Riemannian gradient of E_a is 2 Δ^a_p f − λ log_f f0
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (m, p) in [(Manifold::Euclidean(2), 2.0), (Manifold::Sphere2, 2.0), (Manifold::Sphere2, 1.0), (Manifold::Spd(2), 1.5)] {
        let g = random_symmetric_graph(10, 0.5, &mut rng);
        let f = random_clustered_function(m, 10, 0.3, &mut rng);
        let f0 = random_clustered_function(m, 10, 0.3, &mut rng);
        let lambda = 1.7;
        let lap = aniso_p_laplacian(&g, &f, p, 0.0).unwrap();
        let mut grad = residual(&g, &f, &f0, Model::Anisotropic, lambda, p, 0.0).unwrap();
        for (a, l) in grad.data_mut().iter_mut().zip(lap.data()) {
            *a += l;
        }
        for _ in 0..5 {
            let xi = random_field(&f, &mut rng);
            let fd = energy_slope(&g, &f, &f0, Model::Anisotropic, lambda, p, &xi, 1e-5);
            let analytic = grad.inner(&xi, &f);
            assert!((fd - analytic).abs() < 1e-6 * (1.0 + fd.abs()), "{m} p={p}: {fd} vs {analytic}");
        }
    }
}

#[test]
fn residual_examples() {
    let g = path3();
    let c = euclid(&[2.0, 2.0, 2.0], 1);
    let r = residual(&g, &c, &c, Model::Isotropic, 0.0, 1.0, 1e-7).unwrap();
    assert!(r.data().iter().all(|&x| x == 0.0));
    let f = euclid(&[0.0, 1.0, 3.0], 1);
    let r = residual(&g, &f, &f, Model::Anisotropic, 5.0, 2.0, 0.0).unwrap();
    assert_eq!(r.data(), aniso_p_laplacian(&g, &f, 2.0, 0.0).unwrap().data());
}

#[test]
fn grad_dist_pow_examples() {
    let x = ManifoldPoint::new(Manifold::Euclidean(2), vec![1.0, 2.0]).unwrap();
    let y = ManifoldPoint::new(Manifold::Euclidean(2), vec![4.0, -2.0]).unwrap();
    assert_eq!(grad_dist_pow(&x, &x, 2.0).unwrap().coords(), &[0.0, 0.0]);
    assert!(close(grad_dist_pow(&x, &y, 2.0).unwrap().coords(), &[-6.0, 8.0], 1e-14));
    assert_eq!(grad_dist_pow(&x, &x, 1.5).unwrap().coords(), &[0.0, 0.0]);
    let a = ManifoldPoint::angle(0.0);
    let b = ManifoldPoint::angle(FRAC_PI_2);
    assert!(close(grad_dist_pow(&a, &b, 1.0).unwrap().coords(), &[-1.0], 1e-15));
    assert!(grad_dist_pow(&a, &b, 0.5).is_err());
}

#[test]
fn inadmissible_edges_are_reported() {
    let g = WeightedGraph::from_edges(2, [(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
    let f = VertexFunction::new(Manifold::Circle, vec![2], vec![0.0, PI], None).unwrap();
    match aniso_p_laplacian(&g, &f, 2.0, 0.0) {
        Err(Error::Inadmissible { u, v, .. }) => assert!((u, v) == (0, 1) || (u, v) == (1, 0)),
        other => panic!("expected inadmissible edge, got {other:?}"),
    }
}

fn euclidean_closed_forms(seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=50);
    let g = random_asymmetric_graph(n, rng.random_range(0.05..0.5), &mut rng);
    let w = dense_weights(&g);
    let f = random_clustered_function(Manifold::Euclidean(3), n, 1.0, &mut rng);
    let h = random_edge_function(&g, &f, &mut rng);
    let x = |u: usize| f.value(u);
    let diff = |u: usize, v: usize| -> [f64; 3] { std::array::from_fn(|i| x(v)[i] - x(u)[i]) };
    let norm = |a: &[f64; 3]| a.iter().map(|t| t * t).sum::<f64>().sqrt();

    let grad = gradient(&g, &f).unwrap();
    let div = divergence(&g, &f, &h).unwrap();
    let p = rng.random_range(0.5..3.0);
    let lap_a = aniso_p_laplacian(&g, &f, p, 0.0).unwrap();
    let lap_i = iso_p_laplacian(&g, &f, p, 0.0).unwrap();
    for u in 0..n {
        let mut d = [0.0; 3];
        let mut la = [0.0; 3];
        let mut li = [0.0; 3];
        let mut s = 0.0;
        for v in 0..n {
            if w[u][v] > 0.0 {
                let e = g.find_edge(u, v).unwrap();
                let dv = diff(u, v);
                let expect: Vec<f64> = dv.iter().map(|t| w[u][v].sqrt() * t).collect();
                assert!(close(grad.edge(e), &expect, 1e-12));
                let r = g.find_edge(v, u).unwrap();
                for i in 0..3 {
                    d[i] += 0.5 * (w[v][u].sqrt() * h.edge(r)[i] - w[u][v].sqrt() * h.edge(e)[i]);
                    la[i] -= w[u][v].powf(p / 2.0) * norm(&dv).powf(p - 2.0) * dv[i];
                    li[i] -= w[u][v] * dv[i];
                }
                s += w[u][v] * norm(&dv).powi(2);
            }
        }
        li.iter_mut().for_each(|t| *t *= if s > 0.0 { s.sqrt().powf(p - 2.0) } else { 0.0 });
        assert!(close(div.at(u), &d, 1e-12));
        let scale = 1.0 + la.iter().map(|t| t.abs()).fold(0.0, f64::max);
        assert!(close(lap_a.at(u), &la, 1e-12 * scale), "{:?} vs {la:?}", lap_a.at(u));
        let scale = 1.0 + li.iter().map(|t| t.abs()).fold(0.0, f64::max);
        assert!(close(lap_i.at(u), &li, 1e-12 * scale), "{:?} vs {li:?}", lap_i.at(u));
    }
}

fn grad_div_relationship(m: Manifold, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = random_asymmetric_graph(10, 0.45, &mut rng);
    let f = random_clustered_function(m, 10, 0.3, &mut rng);
    let h = random_edge_function(&g, &f, &mut rng);
    let (lhs, rhs) = grad_div_identity(&g, &f, &h).unwrap();
    assert!((lhs - rhs).abs() < 1e-10, "{m}: {lhs} vs {rhs}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn euclidean_operators_match_closed_forms(seed in any::<u64>()) {
        euclidean_closed_forms(seed);
    }

    #[test]
    fn grad_div_relationship_holds(seed in any::<u64>()) {
        grad_div_relationship(Manifold::Sphere2, seed);
        grad_div_relationship(Manifold::Spd(2), seed);
        grad_div_relationship(Manifold::Circle, seed);
    }

    #[test]
    fn constant_functions_have_zero_laplacian(seed in any::<u64>(), p in 0.1f64..4.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_symmetric_graph(8, 0.5, &mut rng);
        let x = crate::sampling::random_point(Manifold::Sphere2, &mut rng);
        let c = VertexFunction::constant(Manifold::Sphere2, vec![8], &x).unwrap();
        for model in [Model::Anisotropic, Model::Isotropic] {
            let lap = p_laplacian(&g, &c, model, p, 1e-7).unwrap();
            prop_assert!(lap.data().iter().all(|&t| t == 0.0));
        }
    }
}
