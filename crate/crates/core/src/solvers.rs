//! Iterative minimization of the denoising energies: an explicit
//! time-discretized p-Laplacian flow and a semi-implicit Jacobi scheme.

use crate::calculus::{edge_active, energy, per_vertex, residual, stencil, Model, DEFAULT_EPS_SMOOTH};
use crate::error::{Error, Result};
use crate::function::VertexFunction;
use crate::graph::WeightedGraph;

/// Smallest data weight accepted by the Jacobi scheme.
pub const JACOBI_MIN_LAMBDA: f64 = 1e-6;

/// Maximum number of step halvings per sweep when back-off is enabled.
const MAX_HALVINGS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Explicit,
    Jacobi,
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "explicit" => Ok(Scheme::Explicit),
            "jacobi" => Ok(Scheme::Jacobi),
            other => Err(Error::Config(format!("unknown scheme '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub model: Model,
    pub p: f64,
    pub lambda: f64,
    /// Time step of the explicit scheme.
    pub dt: f64,
    pub eps_smooth: f64,
    pub max_iters: usize,
    /// Stop once the mean per-vertex geodesic change of one iteration drops below this.
    pub stop_tol: f64,
    pub scheme: Scheme,
    pub record_energy: bool,
    /// Halve `dt` for a sweep whose update would leave the admissible set.
    pub backoff: bool,
    /// Reserved; the solvers are deterministic.
    pub rng_seed: u64,
}

impl SolverConfig {
    pub fn explicit(model: Model, p: f64, lambda: f64, dt: f64) -> Self {
        SolverConfig {
            model,
            p,
            lambda,
            dt,
            eps_smooth: DEFAULT_EPS_SMOOTH,
            max_iters: 1000,
            stop_tol: 1e-7,
            scheme: Scheme::Explicit,
            record_energy: false,
            backoff: false,
            rng_seed: 0,
        }
    }

    pub fn jacobi(model: Model, p: f64, lambda: f64) -> Self {
        SolverConfig {
            scheme: Scheme::Jacobi,
            max_iters: 100,
            ..SolverConfig::explicit(model, p, lambda, 1e-3)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p.is_finite()) {
            return Err(Error::Config(format!("p must be positive, got {}", self.p)));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::Config(format!("lambda must be non-negative, got {}", self.lambda)));
        }
        if !(self.eps_smooth >= 0.0) {
            return Err(Error::Config(format!("eps_smooth must be non-negative, got {}", self.eps_smooth)));
        }
        if !(self.stop_tol >= 0.0) {
            return Err(Error::Config(format!("stop_tol must be non-negative, got {}", self.stop_tol)));
        }
        match self.scheme {
            Scheme::Explicit if !(self.dt > 0.0 && self.dt.is_finite()) => {
                Err(Error::Config(format!("explicit scheme needs dt > 0, got {}", self.dt)))
            }
            Scheme::Jacobi if self.lambda < JACOBI_MIN_LAMBDA => Err(Error::Config(format!(
                "jacobi scheme needs lambda >= {JACOBI_MIN_LAMBDA}, got {}; use the explicit scheme for vanishing data terms",
                self.lambda
            ))),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIters,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    /// Mean geodesic change of the last iteration.
    pub avg_rel_change: f64,
    /// Mean geodesic change per iteration.
    pub change_trace: Vec<f64>,
    /// Energy of the initial iterate followed by one entry per iteration, when recorded.
    pub energy_trace: Vec<f64>,
    pub residual_max_norm: f64,
    pub termination: Termination,
    /// Number of step halvings applied by back-off.
    pub halvings: usize,
}

/// Rejects iterates whose adjacent values left the injectivity domain.
fn check_admissible(graph: &WeightedGraph, f: &VertexFunction) -> Result<()> {
    let m = f.manifold();
    if !m.log_limit().is_finite() {
        return Ok(());
    }
    for (u, v, _) in graph.edges() {
        if u < v && edge_active(f, u, v) {
            let d = m.dist(f.value(u), f.value(v));
            if d > m.log_limit() {
                return Err(Error::Inadmissible {
                    u,
                    v,
                    distance: d,
                    limit: m.log_limit(),
                });
            }
        }
    }
    Ok(())
}

fn check_inputs(graph: &WeightedGraph, f: &VertexFunction, f0: &VertexFunction) -> Result<()> {
    f.check_graph(graph)?;
    f.check_compatible(f0)
}

/// `f_{n+1}(u) = exp_{f_n(u)}(Δt · (Σ_v b(u,v) log_{f_n(u)} f_n(v) + λ log_{f_n(u)} f0(u)))`,
/// an explicit Euler step of the flow `∂_t f = −(Δ_p f − λ log_f f0)`.
pub fn explicit_step(graph: &WeightedGraph, f: &VertexFunction, f0: &VertexFunction, cfg: &SolverConfig) -> Result<VertexFunction> {
    check_inputs(graph, f, f0)?;
    if !(cfg.dt >= 0.0) {
        return Err(Error::Config(format!("dt must be non-negative, got {}", cfg.dt)));
    }
    let m = f.manifold();
    let stride = f.stride();
    let mut next = f.clone();
    per_vertex(f, next.values_mut(), |u, out| {
        let frame = m.frame(f.value(u));
        let st = stencil(graph, f, &frame, u, cfg.model, cfg.p, cfg.eps_smooth)?;
        let mut step = vec![0.0; stride];
        if cfg.lambda != 0.0 {
            frame.log_into(f0.value(u), &mut step)?;
            step.iter_mut().for_each(|a| *a *= cfg.lambda);
        }
        for (b, log) in st.coeffs.iter().zip(st.logs.chunks_exact(stride)) {
            for (a, l) in step.iter_mut().zip(log) {
                *a += b * l;
            }
        }
        step.iter_mut().for_each(|a| *a *= cfg.dt);
        if step.iter().any(|&a| a != 0.0) {
            frame.exp_into(&step, out);
        }
        Ok(())
    })?;
    check_admissible(graph, &next)?;
    Ok(next)
}

/// `f_{n+1}(u) = exp_{f_n(u)}((Σ_v b(u,v) log_{f_n(u)} f_n(v) + λ log_{f_n(u)} f0(u)) / (λ + Σ_v b(u,v)))`
/// evaluated simultaneously at all vertices.
pub fn jacobi_step(graph: &WeightedGraph, f: &VertexFunction, f0: &VertexFunction, cfg: &SolverConfig) -> Result<VertexFunction> {
    check_inputs(graph, f, f0)?;
    if cfg.lambda < JACOBI_MIN_LAMBDA {
        return Err(Error::Config(format!(
            "jacobi scheme needs lambda >= {JACOBI_MIN_LAMBDA}, got {}",
            cfg.lambda
        )));
    }
    let m = f.manifold();
    let stride = f.stride();
    let mut next = f.clone();
    per_vertex(f, next.values_mut(), |u, out| {
        let frame = m.frame(f.value(u));
        let st = stencil(graph, f, &frame, u, cfg.model, cfg.p, cfg.eps_smooth)?;
        let mut step = vec![0.0; stride];
        frame.log_into(f0.value(u), &mut step)?;
        step.iter_mut().for_each(|a| *a *= cfg.lambda);
        let mut denom = cfg.lambda;
        for (b, log) in st.coeffs.iter().zip(st.logs.chunks_exact(stride)) {
            denom += b;
            for (a, l) in step.iter_mut().zip(log) {
                *a += b * l;
            }
        }
        step.iter_mut().for_each(|a| *a /= denom);
        if step.iter().any(|&a| a != 0.0) {
            frame.exp_into(&step, out);
        }
        Ok(())
    })?;
    check_admissible(graph, &next)?;
    Ok(next)
}

/// Mean geodesic distance between consecutive iterates over the active vertices.
pub fn mean_change(f: &VertexFunction, g: &VertexFunction) -> f64 {
    let m = f.manifold();
    let active = f.active_count();
    if active == 0 {
        return 0.0;
    }
    let total: f64 = (0..f.len())
        .filter(|&u| f.is_active(u))
        .map(|u| m.dist(f.value(u), g.value(u)))
        .sum();
    total / active as f64
}

/// One sweep of the configured scheme; returns the new iterate and the number
/// of step halvings that were needed.
pub fn step(graph: &WeightedGraph, f: &VertexFunction, f0: &VertexFunction, cfg: &SolverConfig) -> Result<(VertexFunction, usize)> {
    match cfg.scheme {
        Scheme::Jacobi => Ok((jacobi_step(graph, f, f0, cfg)?, 0)),
        Scheme::Explicit => {
            let mut local = cfg.clone();
            let mut halvings = 0;
            loop {
                match explicit_step(graph, f, f0, &local) {
                    Err(Error::Inadmissible { .. }) if cfg.backoff && halvings < MAX_HALVINGS => {
                        local.dt *= 0.5;
                        halvings += 1;
                    }
                    other => return other.map(|g| (g, halvings)),
                }
            }
        }
    }
}

/// Runs the configured scheme from `init` (default `f0`) until the mean
/// per-vertex change falls below `stop_tol` or `max_iters` sweeps have run.
pub fn solve(
    graph: &WeightedGraph,
    f0: &VertexFunction,
    cfg: &SolverConfig,
    init: Option<&VertexFunction>,
) -> Result<(VertexFunction, SolveReport)> {
    solve_with(graph, f0, cfg, init, |_, _| {})
}

/// [`solve`] with a callback receiving the iteration number and the report so far.
pub fn solve_with<F>(
    graph: &WeightedGraph,
    f0: &VertexFunction,
    cfg: &SolverConfig,
    init: Option<&VertexFunction>,
    mut on_iteration: F,
) -> Result<(VertexFunction, SolveReport)>
where
    F: FnMut(usize, &SolveReport),
{
    cfg.validate()?;
    let mut f = init.cloned().unwrap_or_else(|| f0.clone());
    check_inputs(graph, &f, f0)?;
    let mut report = SolveReport {
        iterations: 0,
        avg_rel_change: f64::INFINITY,
        change_trace: Vec::new(),
        energy_trace: Vec::new(),
        residual_max_norm: 0.0,
        termination: Termination::MaxIters,
        halvings: 0,
    };
    let energy_of = |f: &VertexFunction| energy(graph, f, f0, cfg.model, cfg.lambda, cfg.p);
    if cfg.record_energy {
        report.energy_trace.push(energy_of(&f)?);
    }
    for n in 1..=cfg.max_iters {
        let (next, halvings) = step(graph, &f, f0, cfg)?;
        let change = mean_change(&f, &next);
        f = next;
        report.iterations = n;
        report.halvings += halvings;
        report.avg_rel_change = change;
        report.change_trace.push(change);
        if cfg.record_energy {
            report.energy_trace.push(energy_of(&f)?);
        }
        on_iteration(n, &report);
        if change < cfg.stop_tol {
            report.termination = Termination::Converged;
            break;
        }
    }
    let r = residual(graph, &f, f0, cfg.model, cfg.lambda, cfg.p, cfg.eps_smooth)?;
    report.residual_max_norm = r.max_norm(&f);
    Ok((f, report))
}

#[cfg(test)]
#[path = "solvers_tests.rs"]
mod tests;
