use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use mvgraph::calculus::{Model, DEFAULT_EPS_SMOOTH};
use mvgraph::graph::{epsilon_ball_graph, grid_graph, knn_patch_graph, KnnPatchOptions, PositionMetric, WeightRule};
use mvgraph::io;
use mvgraph::solvers::{solve_with, Scheme, SolverConfig};
use mvgraph::synthetics::{self, NoiseSpec};
use mvgraph::{Manifold, VertexFunction, WeightedGraph};

use crate::recipe;

#[derive(Debug, Parser)]
#[command(name = "mvgraph", version, about = "Denoising of manifold-valued data on weighted graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic data set.
    Generate(GenerateArgs),
    /// Perturb data with Gaussian noise in the tangent spaces.
    Noise(NoiseArgs),
    /// Build a weighted graph over the vertices of a data file.
    BuildGraph(BuildGraphArgs),
    /// Minimize a denoising energy with the explicit or Jacobi scheme.
    Denoise(DenoiseArgs),
    /// Print the mean squared geodesic error between two files.
    Eval(EvalArgs),
    /// Export a data file as CSV or PLY.
    Export(ExportArgs),
    /// Import a CSV written by `export`.
    Import(ImportArgs),
    /// Run an experiment recipe.
    Recipe(recipe::RecipeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DataKind {
    S2whirl,
    Phase,
    SpdSphere,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub kind: DataKind,
    /// `H W` for images, `N` for the sphere point set.
    #[arg(long, num_args = 1..=2, required = true)]
    pub shape: Vec<usize>,
    #[arg(long)]
    pub out: PathBuf,
    /// Positions file for spd-sphere (default: `<out>.positions.tsv`).
    #[arg(long)]
    pub positions: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct NoiseArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GraphKind {
    Grid4,
    KnnPatch,
    EpsBall,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Arc,
    Euclidean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightArg {
    InverseSquare,
    Unit,
}

#[derive(Debug, Args)]
pub struct BuildGraphArgs {
    #[arg(long, value_enum)]
    pub kind: GraphKind,
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Neighbours per vertex (knn-patch).
    #[arg(long)]
    pub k: Option<usize>,
    /// Patch radius s (knn-patch).
    #[arg(long)]
    pub patch: Option<usize>,
    /// Square search window radius (knn-patch); global search when omitted.
    #[arg(long)]
    pub window: Option<usize>,
    /// Ball radius (eps-ball).
    #[arg(long)]
    pub eps: Option<f64>,
    /// Vertex positions TSV (eps-ball).
    #[arg(long)]
    pub positions: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = MetricArg::Arc)]
    pub metric: MetricArg,
    #[arg(long, value_enum, default_value_t = WeightArg::InverseSquare)]
    pub weights: WeightArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Aniso,
    Iso,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Aniso => Model::Anisotropic,
            ModelArg::Iso => Model::Isotropic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Explicit,
    Jacobi,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Explicit => Scheme::Explicit,
            SchemeArg::Jacobi => Scheme::Jacobi,
        }
    }
}

#[derive(Debug, Args)]
pub struct DenoiseArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, value_enum)]
    pub model: ModelArg,
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub lambda: f64,
    #[arg(long, value_enum)]
    pub scheme: SchemeArg,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long = "eps-smooth", default_value_t = DEFAULT_EPS_SMOOTH)]
    pub eps_smooth: f64,
    #[arg(long = "max-iters", default_value_t = 1000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
    /// Halve the time step of sweeps that would leave the admissible set.
    #[arg(long)]
    pub backoff: bool,
    /// Per-iteration CSV `iter,energy,avg_rel_change`.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub a: PathBuf,
    #[arg(long)]
    pub b: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExportFormat {
    Csv,
    Ply,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub format: ExportFormat,
    /// Vertex positions for PLY (grid coordinates otherwise).
    #[arg(long)]
    pub positions: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ImportArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// euclidean, circle, sphere2 or spd.
    #[arg(long)]
    pub manifold: String,
    /// Dimension m (euclidean) or matrix size n (spd).
    #[arg(long)]
    pub param: Option<usize>,
    #[arg(long, num_args = 1.., required = true)]
    pub shape: Vec<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(a) => generate(a),
        Command::Noise(a) => noise(a),
        Command::BuildGraph(a) => build_graph(a),
        Command::Denoise(a) => denoise(a),
        Command::Eval(a) => eval(a),
        Command::Export(a) => export(a),
        Command::Import(a) => import(a),
        Command::Recipe(a) => recipe::run(a),
    }
}

pub fn load(path: &Path) -> Result<VertexFunction> {
    io::load_mvd(path).with_context(|| format!("reading {}", path.display()))
}

pub fn save(path: &Path, f: &VertexFunction) -> Result<()> {
    io::save_mvd(path, f).with_context(|| format!("writing {}", path.display()))
}

pub fn generate_data(kind: DataKind, shape: &[usize]) -> Result<(VertexFunction, Option<mvgraph::VertexPositions>)> {
    match (kind, shape) {
        (DataKind::S2whirl, &[h, w]) => Ok((synthetics::gen_s2_whirl(h, w)?, None)),
        (DataKind::Phase, &[h, w]) => Ok((synthetics::gen_phase_image(h, w)?, None)),
        (DataKind::SpdSphere, &[n]) => {
            let (pos, f) = synthetics::gen_spd_on_sphere(n)?;
            Ok((f, Some(pos)))
        }
        (DataKind::SpdSphere, _) => bail!("spd-sphere takes a single point count as --shape"),
        _ => bail!("image generators take --shape H W"),
    }
}

fn default_positions_path(out: &Path) -> PathBuf {
    out.with_extension("positions.tsv")
}

fn generate(a: GenerateArgs) -> Result<()> {
    let (f, pos) = generate_data(a.kind, &a.shape)?;
    save(&a.out, &f)?;
    if let Some(pos) = pos {
        let path = a.positions.unwrap_or_else(|| default_positions_path(&a.out));
        io::save_positions(&path, &pos).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn noise(a: NoiseArgs) -> Result<()> {
    let f = load(&a.input)?;
    let g = synthetics::add_noise(&f, &NoiseSpec::for_manifold(f.manifold(), a.sigma, a.seed))?;
    save(&a.out, &g)
}

pub struct GraphSpec {
    pub kind: GraphKind,
    pub k: Option<usize>,
    pub patch: Option<usize>,
    pub window: Option<usize>,
    pub eps: Option<f64>,
    pub metric: MetricArg,
    pub weights: WeightArg,
}

pub fn make_graph(spec: &GraphSpec, f: &VertexFunction, positions: Option<&mvgraph::VertexPositions>) -> Result<WeightedGraph> {
    let g = match spec.kind {
        GraphKind::Grid4 => {
            let (h, w) = f.grid_dims()?;
            grid_graph(h, w)?
        }
        GraphKind::KnnPatch => {
            let (Some(k), Some(patch_radius)) = (spec.k, spec.patch) else {
                bail!("knn-patch needs --k and --patch");
            };
            knn_patch_graph(
                f,
                KnnPatchOptions {
                    k,
                    patch_radius,
                    window: spec.window,
                },
            )?
        }
        GraphKind::EpsBall => {
            let (Some(eps), Some(pos)) = (spec.eps, positions) else {
                bail!("eps-ball needs --eps and --positions");
            };
            if pos.len() != f.len() {
                bail!("{} positions for {} vertices", pos.len(), f.len());
            }
            let metric = match spec.metric {
                MetricArg::Arc => PositionMetric::SphereArc,
                MetricArg::Euclidean => PositionMetric::Euclidean,
            };
            let rule = match spec.weights {
                WeightArg::InverseSquare => WeightRule::InverseSquare,
                WeightArg::Unit => WeightRule::Unit,
            };
            epsilon_ball_graph(pos, eps, metric, rule)?
        }
    };
    Ok(g)
}

fn build_graph(a: BuildGraphArgs) -> Result<()> {
    let f = load(&a.input)?;
    let positions = match &a.positions {
        Some(p) => Some(io::load_positions(p).with_context(|| format!("reading {}", p.display()))?),
        None => None,
    };
    let spec = GraphSpec {
        kind: a.kind,
        k: a.k,
        patch: a.patch,
        window: a.window,
        eps: a.eps,
        metric: a.metric,
        weights: a.weights,
    };
    let g = make_graph(&spec, &f, positions.as_ref())?;
    let isolated = g.isolated_vertices().iter().filter(|&&u| f.is_active(u)).count();
    if isolated > 0 {
        eprintln!("warning: {isolated} isolated active vertices");
    }
    io::save_edges(&a.out, &g).with_context(|| format!("writing {}", a.out.display()))
}

fn denoise(a: DenoiseArgs) -> Result<()> {
    let f0 = load(&a.input)?;
    let graph = io::load_edges(&a.graph).with_context(|| format!("reading {}", a.graph.display()))?;
    let cfg = SolverConfig {
        model: a.model.into(),
        p: a.p,
        lambda: a.lambda,
        dt: a.dt,
        eps_smooth: a.eps_smooth,
        max_iters: a.max_iters,
        stop_tol: a.tol,
        scheme: a.scheme.into(),
        record_energy: a.trace.is_some(),
        backoff: a.backoff,
        rng_seed: 0,
    };
    let mut trace = match &a.trace {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path).with_context(|| format!("writing {}", path.display()))?);
            writeln!(w, "iter,energy,avg_rel_change")?;
            Some(w)
        }
        None => None,
    };
    let mut trace_err = None;
    let (f, report) = solve_with(&graph, &f0, &cfg, None, |n, r| {
        if let Some(w) = trace.as_mut() {
            let energy = r.energy_trace.last().copied().unwrap_or(f64::NAN);
            if let Err(e) = writeln!(w, "{n},{energy},{}", r.avg_rel_change) {
                trace_err.get_or_insert(e);
            }
        }
    })?;
    if let Some(e) = trace_err {
        return Err(e.into());
    }
    if let Some(mut w) = trace {
        w.flush()?;
    }
    save(&a.out, &f)?;
    println!(
        "iterations={} termination={:?} avg_rel_change={} residual_max_norm={}",
        report.iterations, report.termination, report.avg_rel_change, report.residual_max_norm
    );
    Ok(())
}

fn eval(a: EvalArgs) -> Result<()> {
    let f = load(&a.a)?;
    let g = load(&a.b)?;
    println!("mse={}", synthetics::mse(&f, &g)?);
    Ok(())
}

fn export(a: ExportArgs) -> Result<()> {
    let f = load(&a.input)?;
    let file = File::create(&a.out).with_context(|| format!("writing {}", a.out.display()))?;
    let w = BufWriter::new(file);
    match a.format {
        ExportFormat::Csv => io::write_csv(w, &f)?,
        ExportFormat::Ply => {
            let pos = match &a.positions {
                Some(p) => Some(io::load_positions(p).with_context(|| format!("reading {}", p.display()))?),
                None => None,
            };
            io::write_ply(w, &f, pos.as_ref())?
        }
    }
    Ok(())
}

fn import(a: ImportArgs) -> Result<()> {
    let m = Manifold::new(&a.manifold, a.param)?;
    let file = File::open(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let f = io::read_csv(file, m, a.shape)?;
    save(&a.out, &f)
}
