//! Discrete calculus for manifold-valued vertex functions: weighted
//! directional derivatives, gradient and divergence, edge and vertex norms,
//! the anisotropic and isotropic graph p-Laplacians, the denoising energies
//! and the residual of their optimality conditions.
//!
//! Edges incident to a masked vertex are treated as absent; masked vertices
//! get zero fields and contribute nothing to energies.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::function::{TangentEdgeFunction, TangentVertexField, VertexFunction};
use crate::graph::WeightedGraph;
use crate::manifold::{Frame, ManifoldPoint, TangentVector};

/// Default smoothing added to distances before negative powers.
pub const DEFAULT_EPS_SMOOTH: f64 = 1e-7;

/// Regularizer flavour: per-edge (anisotropic) or per-vertex (isotropic) norms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Model {
    Anisotropic,
    Isotropic,
}

impl std::str::FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "aniso" | "anisotropic" => Ok(Model::Anisotropic),
            "iso" | "isotropic" => Ok(Model::Isotropic),
            other => Err(Error::Config(format!("unknown model '{other}'"))),
        }
    }
}

pub(crate) fn edge_active(f: &VertexFunction, u: usize, v: usize) -> bool {
    f.is_active(u) && f.is_active(v)
}

/// `log_{f(u)} f(v)` with the edge attached to admissibility failures.
pub(crate) fn edge_log(frame: &Frame<'_>, f: &VertexFunction, u: usize, v: usize, out: &mut [f64]) -> Result<f64> {
    frame.log_into(f.value(v), out).map_err(|e| match e {
        Error::NotInjective { distance, limit } => Error::Inadmissible { u, v, distance, limit },
        other => other,
    })
}

/// `t^{p-2}`, with `(t + eps)^{p-2}` for `p < 2` and the convention that the
/// factor vanishes when `t + eps = 0`.
pub(crate) fn smoothed_pow(t: f64, p: f64, eps: f64) -> f64 {
    if p == 2.0 {
        1.0
    } else if p < 2.0 {
        let base = t + eps;
        if base > 0.0 {
            base.powf(p - 2.0)
        } else {
            0.0
        }
    } else {
        t.powf(p - 2.0)
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::Config(format!("p must be positive, got {p}")));
    }
    Ok(())
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps >= 0.0) {
        return Err(Error::Config(format!("eps_smooth must be non-negative, got {eps}")));
    }
    Ok(())
}

/// Logs towards the active neighbours of `u` together with the p-Laplacian
/// coefficients `b(u, v)`, so that `Δ_p f(u) = -Σ_v b(u,v) log_{f(u)} f(v)`.
///
/// Anisotropic: `b = √w^p d^{p-2}`. Isotropic: `b = (Σ_x w d²)^{(p-2)/2} w`.
pub(crate) struct Stencil {
    pub logs: Vec<f64>,
    pub coeffs: Vec<f64>,
}

pub(crate) fn stencil(
    graph: &WeightedGraph,
    f: &VertexFunction,
    frame: &Frame<'_>,
    u: usize,
    model: Model,
    p: f64,
    eps: f64,
) -> Result<Stencil> {
    let stride = f.stride();
    let deg = graph.degree(u);
    let mut logs = vec![0.0; deg * stride];
    let mut coeffs = vec![0.0; deg];
    let mut sum_wd2 = 0.0;
    for (slot, e) in graph.neighbors(u).enumerate() {
        if !edge_active(f, u, e.target) {
            continue;
        }
        let d = edge_log(frame, f, u, e.target, &mut logs[slot * stride..(slot + 1) * stride])?;
        match model {
            Model::Anisotropic => coeffs[slot] = e.weight.powf(0.5 * p) * smoothed_pow(d, p, eps),
            Model::Isotropic => {
                coeffs[slot] = e.weight;
                sum_wd2 += e.weight * d * d;
            }
        }
    }
    if model == Model::Isotropic {
        let prefactor = smoothed_pow(sum_wd2.sqrt(), p, eps);
        coeffs.iter_mut().for_each(|c| *c *= prefactor);
    }
    Ok(Stencil { logs, coeffs })
}

/// Fills `out` per active vertex, in parallel over vertices.
pub(crate) fn per_vertex<F>(f: &VertexFunction, out: &mut [f64], op: F) -> Result<()>
where
    F: Fn(usize, &mut [f64]) -> Result<()> + Sync,
{
    let stride = f.stride();
    out.par_chunks_mut(stride)
        .enumerate()
        .filter(|(u, _)| f.is_active(*u))
        .try_for_each(|(u, o)| op(u, o))
}

/// `∂_v f(u) = √w(u,v) · log_{f(u)} f(v)`, zero when `v` is not a neighbour of `u`.
pub fn directional_derivative(graph: &WeightedGraph, f: &VertexFunction, u: usize, v: usize) -> Result<TangentVector> {
    f.check_graph(graph)?;
    let x = f.point(u);
    let w = graph.weight_between(u, v);
    if u == v || w == 0.0 || !edge_active(f, u, v) {
        return Ok(x.zero_tangent());
    }
    let mut out = vec![0.0; f.stride()];
    edge_log(&f.manifold().frame(f.value(u)), f, u, v, &mut out)?;
    let s = w.sqrt();
    out.iter_mut().for_each(|a| *a *= s);
    x.tangent(out)
}

/// Weighted local gradient `∇f(u, v) = ∂_v f(u)` on every edge.
pub fn gradient(graph: &WeightedGraph, f: &VertexFunction) -> Result<TangentEdgeFunction> {
    f.check_graph(graph)?;
    let m = f.manifold();
    let stride = f.stride();
    let mut h = TangentEdgeFunction::zeros(graph, m);
    let data = h.data_mut();
    // split the flat edge buffer into per-vertex blocks
    let mut blocks: Vec<&mut [f64]> = Vec::with_capacity(graph.n_vertices());
    let mut rest = data;
    for u in 0..graph.n_vertices() {
        let (head, tail) = rest.split_at_mut(graph.degree(u) * stride);
        blocks.push(head);
        rest = tail;
    }
    blocks.into_par_iter().enumerate().try_for_each(|(u, block)| {
        if !f.is_active(u) {
            return Ok::<(), Error>(());
        }
        let frame = m.frame(f.value(u));
        for (slot, e) in graph.neighbors(u).enumerate() {
            if !edge_active(f, u, e.target) {
                continue;
            }
            let out = &mut block[slot * stride..(slot + 1) * stride];
            edge_log(&frame, f, u, e.target, out)?;
            let s = e.weight.sqrt();
            out.iter_mut().for_each(|a| *a *= s);
        }
        Ok(())
    })?;
    Ok(h)
}

/// Weighted local divergence
/// `div H(u) = ½ Σ_{v~u} [√w(v,u) PT_{f(v)→f(u)} H(v,u) − √w(u,v) H(u,v)]`.
pub fn divergence(graph: &WeightedGraph, f: &VertexFunction, h: &TangentEdgeFunction) -> Result<TangentVertexField> {
    f.check_graph(graph)?;
    check_edge_function(graph, h)?;
    let m = f.manifold();
    let stride = f.stride();
    let mut out = TangentVertexField::zeros(f.len(), m);
    per_vertex(f, out.data_mut(), |u, acc| {
        let mut moved = vec![0.0; stride];
        for e in graph.neighbors(u) {
            let v = e.target;
            if !edge_active(f, u, v) {
                continue;
            }
            let s_uv = e.weight.sqrt();
            for (a, b) in acc.iter_mut().zip(h.edge(e.index)) {
                *a -= 0.5 * s_uv * b;
            }
            if let Some(r) = graph.reverse(e.index) {
                let s_vu = graph.weight(r).sqrt();
                m.frame(f.value(v))
                    .transport_into(f.value(u), h.edge(r), &mut moved)
                    .map_err(|err| inadmissible(err, v, u))?;
                for (a, b) in acc.iter_mut().zip(&moved) {
                    *a += 0.5 * s_vu * b;
                }
            }
        }
        Ok(())
    })?;
    Ok(out)
}

fn inadmissible(err: Error, u: usize, v: usize) -> Error {
    match err {
        Error::NotInjective { distance, limit } => Error::Inadmissible { u, v, distance, limit },
        other => other,
    }
}

fn check_edge_function(graph: &WeightedGraph, h: &TangentEdgeFunction) -> Result<()> {
    if h.n_edges() != graph.n_edges() {
        return Err(Error::Dimension {
            expected: graph.n_edges(),
            found: h.n_edges(),
        });
    }
    Ok(())
}

/// `Σ_{(u,v)∈E} ⟨H(u,v), K(u,v)⟩_{f(u)}`.
pub fn edge_inner(graph: &WeightedGraph, f: &VertexFunction, h: &TangentEdgeFunction, k: &TangentEdgeFunction) -> Result<f64> {
    f.check_graph(graph)?;
    check_edge_function(graph, h)?;
    check_edge_function(graph, k)?;
    let m = f.manifold();
    Ok((0..graph.n_vertices())
        .filter(|&u| f.is_active(u))
        .map(|u| {
            let frame = m.frame(f.value(u));
            graph
                .neighbors(u)
                .filter(|e| f.is_active(e.target))
                .map(|e| frame.inner(h.edge(e.index), k.edge(e.index)))
                .sum::<f64>()
        })
        .sum())
}

/// Local variation `(Σ_{v~u} ‖H(u,v)‖^q)^{1/q}`.
pub fn local_variation(graph: &WeightedGraph, f: &VertexFunction, h: &TangentEdgeFunction, u: usize, q: f64) -> Result<f64> {
    f.check_graph(graph)?;
    check_edge_function(graph, h)?;
    Ok(local_variation_pow(graph, f, h, u, q).powf(1.0 / q))
}

fn local_variation_pow(graph: &WeightedGraph, f: &VertexFunction, h: &TangentEdgeFunction, u: usize, q: f64) -> f64 {
    if !f.is_active(u) {
        return 0.0;
    }
    let frame = f.manifold().frame(f.value(u));
    graph
        .neighbors(u)
        .filter(|e| f.is_active(e.target))
        .map(|e| frame.norm(h.edge(e.index)).powf(q))
        .sum()
}

/// `‖H‖_{p,q} = ((2/p) Σ_u (Σ_{v~u} ‖H(u,v)‖^q)^{p/q})^{1/p}`; `p, q < 1` give quasi-norms.
pub fn edge_norm_pq(graph: &WeightedGraph, f: &VertexFunction, h: &TangentEdgeFunction, p: f64, q: f64) -> Result<f64> {
    f.check_graph(graph)?;
    check_edge_function(graph, h)?;
    check_p(p)?;
    check_p(q)?;
    let total: f64 = (0..graph.n_vertices())
        .map(|u| local_variation_pow(graph, f, h, u, q).powf(p / q))
        .sum();
    Ok((2.0 / p * total).powf(1.0 / p))
}

/// Both sides of the gradient/divergence relationship
/// `⟨∇f, H⟩ = Σ_u Σ_{v~u} ⟨log_{f(u)} f(v), ½√w(u,v) H(u,v) − ½√w(v,u) PT_{f(v)→f(u)} H(v,u)⟩`.
/// Needs a symmetric edge set; weights may be asymmetric.
pub fn grad_div_identity(graph: &WeightedGraph, f: &VertexFunction, h: &TangentEdgeFunction) -> Result<(f64, f64)> {
    if !graph.has_symmetric_edge_set() {
        return Err(Error::InvalidGraph("edge set must be symmetric".into()));
    }
    let grad = gradient(graph, f)?;
    let lhs = edge_inner(graph, f, &grad, h)?;
    let m = f.manifold();
    let stride = f.stride();
    let mut rhs = 0.0;
    let mut log = vec![0.0; stride];
    let mut moved = vec![0.0; stride];
    let mut combo = vec![0.0; stride];
    for u in (0..graph.n_vertices()).filter(|&u| f.is_active(u)) {
        let frame = m.frame(f.value(u));
        for e in graph.neighbors(u) {
            let v = e.target;
            if !f.is_active(v) {
                continue;
            }
            let r = graph.reverse(e.index).expect("symmetric edge set");
            edge_log(&frame, f, u, v, &mut log)?;
            m.frame(f.value(v))
                .transport_into(f.value(u), h.edge(r), &mut moved)
                .map_err(|err| inadmissible(err, v, u))?;
            let (a, b) = (0.5 * e.weight.sqrt(), 0.5 * graph.weight(r).sqrt());
            for ((c, x), y) in combo.iter_mut().zip(h.edge(e.index)).zip(&moved) {
                *c = a * x - b * y;
            }
            rhs += frame.inner(&log, &combo);
        }
    }
    Ok((lhs, rhs))
}

/// `⟨f, g⟩ = Σ_u Σ_{v~u} ⟨log_{f(u)} f(v), PT_{g(u)→f(u)} log_{g(u)} g(v)⟩_{f(u)}`.
pub fn symmetric_map(graph: &WeightedGraph, f: &VertexFunction, g: &VertexFunction) -> Result<f64> {
    f.check_graph(graph)?;
    f.check_compatible(g)?;
    let m = f.manifold();
    let stride = f.stride();
    let mut lf = vec![0.0; stride];
    let mut lg = vec![0.0; stride];
    let mut moved = vec![0.0; stride];
    let mut total = 0.0;
    for u in (0..graph.n_vertices()).filter(|&u| f.is_active(u) && g.is_active(u)) {
        let ff = m.frame(f.value(u));
        let gf = m.frame(g.value(u));
        for e in graph.neighbors(u) {
            let v = e.target;
            if !(edge_active(f, u, v) && edge_active(g, u, v)) {
                continue;
            }
            edge_log(&ff, f, u, v, &mut lf)?;
            edge_log(&gf, g, u, v, &mut lg)?;
            gf.transport_into(f.value(u), &lg, &mut moved)?;
            total += ff.inner(&lf, &moved);
        }
    }
    Ok(total)
}

/// `‖f‖_p = (Σ_u (Σ_{v~u} ‖log_{f(u)} f(v)‖²)^{p/2})^{1/p}`.
pub fn vertex_norm_p(graph: &WeightedGraph, f: &VertexFunction, p: f64) -> Result<f64> {
    f.check_graph(graph)?;
    check_p(p)?;
    let m = f.manifold();
    let mut log = vec![0.0; f.stride()];
    let mut total = 0.0;
    for u in (0..graph.n_vertices()).filter(|&u| f.is_active(u)) {
        let frame = m.frame(f.value(u));
        let mut s = 0.0;
        for e in graph.neighbors(u) {
            if edge_active(f, u, e.target) {
                edge_log(&frame, f, u, e.target, &mut log)?;
                s += frame.inner(&log, &log);
            }
        }
        total += s.powf(0.5 * p);
    }
    Ok(total.powf(1.0 / p))
}

/// Product metric `(Σ_u d²(f(u), g(u)))^{1/2}` over the active vertices of `f`.
pub fn vertex_distance(f: &VertexFunction, g: &VertexFunction) -> Result<f64> {
    f.check_compatible(g)?;
    let m = f.manifold();
    Ok((0..f.len())
        .filter(|&u| f.is_active(u))
        .map(|u| m.dist(f.value(u), g.value(u)).powi(2))
        .sum::<f64>()
        .sqrt())
}

/// Graph p-Laplacian `Δ_p f(u) = -Σ_v b(u,v) log_{f(u)} f(v)` for either model.
pub fn p_laplacian(graph: &WeightedGraph, f: &VertexFunction, model: Model, p: f64, eps_smooth: f64) -> Result<TangentVertexField> {
    f.check_graph(graph)?;
    check_p(p)?;
    check_eps(eps_smooth)?;
    let m = f.manifold();
    let mut out = TangentVertexField::zeros(f.len(), m);
    per_vertex(f, out.data_mut(), |u, acc| {
        let frame = m.frame(f.value(u));
        let st = stencil(graph, f, &frame, u, model, p, eps_smooth)?;
        for (b, log) in st.coeffs.iter().zip(st.logs.chunks_exact(acc.len())) {
            for (a, l) in acc.iter_mut().zip(log) {
                *a -= b * l;
            }
        }
        Ok(())
    })?;
    Ok(out)
}

/// Anisotropic p-Laplacian `-Σ_v √w^p d^{p-2} log_{f(u)} f(v)`.
pub fn aniso_p_laplacian(graph: &WeightedGraph, f: &VertexFunction, p: f64, eps_smooth: f64) -> Result<TangentVertexField> {
    p_laplacian(graph, f, Model::Anisotropic, p, eps_smooth)
}

/// Isotropic p-Laplacian `-(Σ_v w d²)^{(p-2)/2} Σ_v w log_{f(u)} f(v)`.
pub fn iso_p_laplacian(graph: &WeightedGraph, f: &VertexFunction, p: f64, eps_smooth: f64) -> Result<TangentVertexField> {
    p_laplacian(graph, f, Model::Isotropic, p, eps_smooth)
}

fn data_term(f: &VertexFunction, f0: &VertexFunction) -> Result<f64> {
    Ok(vertex_distance(f, f0)?.powi(2))
}

/// Denoising energy
/// `E_a(f) = λ/2 Σ_u d²(f0(u), f(u)) + 1/p Σ_{(u,v)∈E} ‖∇f(u,v)‖^p` or
/// `E_i(f) = λ/2 Σ_u d²(f0(u), f(u)) + 1/p Σ_u (Σ_{v~u} ‖∇f(u,v)‖²)^{p/2}`.
pub fn energy(graph: &WeightedGraph, f: &VertexFunction, f0: &VertexFunction, model: Model, lambda: f64, p: f64) -> Result<f64> {
    f.check_graph(graph)?;
    check_p(p)?;
    if !(lambda >= 0.0) {
        return Err(Error::Config(format!("lambda must be non-negative, got {lambda}")));
    }
    let m = f.manifold();
    let mut reg = 0.0;
    for u in (0..graph.n_vertices()).filter(|&u| f.is_active(u)) {
        let frame = m.frame(f.value(u));
        let mut s = 0.0;
        for e in graph.neighbors(u) {
            if !edge_active(f, u, e.target) {
                continue;
            }
            let d = frame.dist(f.value(e.target));
            if d > m.log_limit() {
                return Err(Error::Inadmissible {
                    u,
                    v: e.target,
                    distance: d,
                    limit: m.log_limit(),
                });
            }
            match model {
                Model::Anisotropic => s += (e.weight.sqrt() * d).powf(p),
                Model::Isotropic => s += e.weight * d * d,
            }
        }
        reg += match model {
            Model::Anisotropic => s,
            Model::Isotropic => s.powf(0.5 * p),
        };
    }
    let data = if lambda > 0.0 { data_term(f, f0)? } else { 0.0 };
    Ok(0.5 * lambda * data + reg / p)
}

pub fn energy_aniso(graph: &WeightedGraph, f: &VertexFunction, f0: &VertexFunction, lambda: f64, p: f64) -> Result<f64> {
    energy(graph, f, f0, Model::Anisotropic, lambda, p)
}

pub fn energy_iso(graph: &WeightedGraph, f: &VertexFunction, f0: &VertexFunction, lambda: f64, p: f64) -> Result<f64> {
    energy(graph, f, f0, Model::Isotropic, lambda, p)
}

/// Optimality residual `Δ_p f(u) − λ log_{f(u)} f0(u)`; it vanishes at
/// stationary points of the p-Laplacian flow and at Jacobi fixed points.
pub fn residual(
    graph: &WeightedGraph,
    f: &VertexFunction,
    f0: &VertexFunction,
    model: Model,
    lambda: f64,
    p: f64,
    eps_smooth: f64,
) -> Result<TangentVertexField> {
    f.check_compatible(f0)?;
    let mut r = p_laplacian(graph, f, model, p, eps_smooth)?;
    if lambda != 0.0 {
        let m = f.manifold();
        per_vertex(f, r.data_mut(), |u, acc| {
            let mut log = vec![0.0; acc.len()];
            m.frame(f.value(u)).log_into(f0.value(u), &mut log)?;
            for (a, l) in acc.iter_mut().zip(&log) {
                *a -= lambda * l;
            }
            Ok(())
        })?;
    }
    Ok(r)
}

/// Riemannian (sub)gradient of `x ↦ d^p(x, y)`: `-p log_x y / d^{2-p}`, and the
/// zero element of the subdifferential at `x = y` when `p < 2`.
pub fn grad_dist_pow(x: &ManifoldPoint, y: &ManifoldPoint, p: f64) -> Result<TangentVector> {
    if !(p >= 1.0) {
        return Err(Error::Config(format!("p must be at least 1, got {p}")));
    }
    let log = x.log(y)?;
    let d = x.dist(y)?;
    if d == 0.0 {
        return Ok(x.zero_tangent());
    }
    Ok(log.scaled(-p * d.powf(p - 2.0)))
}

#[cfg(test)]
#[path = "calculus_tests.rs"]
mod tests;
