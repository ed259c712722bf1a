//! Experiment recipes: TOML files describing data, noise, graph and a list of
//! solver runs. Each run prints its MSE against the clean data.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::Deserialize;

use mvgraph::calculus::DEFAULT_EPS_SMOOTH;
use mvgraph::solvers::{solve, SolverConfig};
use mvgraph::synthetics::{self, NoiseSpec};
use mvgraph::{VertexFunction, WeightedGraph};

use crate::commands::{self, DataKind, GraphKind, GraphSpec, MetricArg, ModelArg, SchemeArg, WeightArg};

#[derive(Debug, Args)]
pub struct RecipeArgs {
    /// Recipe name (looked up in the recipes directory) or path to a TOML file.
    pub name: String,
    #[arg(long)]
    pub recipes_dir: Option<PathBuf>,
    /// Input data for recipes that read a file.
    #[arg(long = "input")]
    pub input: Option<PathBuf>,
    /// Override the noise seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override the iteration limit of every run.
    #[arg(long = "max-iters")]
    pub max_iters: Option<usize>,
    /// Override the generated data shape.
    #[arg(long, num_args = 1..=2)]
    pub shape: Option<Vec<usize>>,
    /// Write each run's result as `<label>.mvd` into this directory.
    #[arg(long = "out-dir")]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Recipe {
    pub description: String,
    pub data: DataSection,
    pub graph: GraphSection,
    pub run: Vec<RunSection>,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    S2whirl,
    Phase,
    SpdSphere,
    Input,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub source: Source,
    pub shape: Option<Vec<usize>>,
    pub noise_sigma: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphKindName {
    Grid4,
    KnnPatch,
    EpsBall,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSection {
    pub kind: GraphKindName,
    pub k: Option<usize>,
    pub patch: Option<usize>,
    pub window: Option<usize>,
    pub eps: Option<f64>,
    #[serde(default)]
    pub unit_weights: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub label: String,
    pub model: String,
    pub p: f64,
    pub lambda: f64,
    pub scheme: String,
    pub dt: Option<f64>,
    pub eps_smooth: Option<f64>,
    pub max_iters: usize,
    #[serde(default)]
    pub tol: f64,
    /// Patch radius overriding the graph section for this run.
    pub patch: Option<usize>,
}

fn default_recipes_dir() -> PathBuf {
    let local = PathBuf::from("recipes");
    if local.is_dir() {
        local
    } else {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../../recipes")
    }
}

fn recipe_path(args: &RecipeArgs) -> PathBuf {
    let as_path = PathBuf::from(&args.name);
    if as_path.extension().is_some_and(|e| e == "toml") {
        return as_path;
    }
    let dir = args.recipes_dir.clone().unwrap_or_else(default_recipes_dir);
    dir.join(format!("{}.toml", args.name))
}

pub fn load_recipe(path: &Path) -> Result<Recipe> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading recipe {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing recipe {}", path.display()))
}

fn parse_model(s: &str) -> Result<ModelArg> {
    match s {
        "aniso" => Ok(ModelArg::Aniso),
        "iso" => Ok(ModelArg::Iso),
        other => bail!("unknown model '{other}'"),
    }
}

fn parse_scheme(s: &str) -> Result<SchemeArg> {
    match s {
        "explicit" => Ok(SchemeArg::Explicit),
        "jacobi" => Ok(SchemeArg::Jacobi),
        other => bail!("unknown scheme '{other}'"),
    }
}

pub fn run(args: RecipeArgs) -> Result<()> {
    let path = recipe_path(&args);
    let recipe = load_recipe(&path)?;
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();

    let shape = args.shape.clone().or_else(|| recipe.data.shape.clone());
    let (clean, positions) = match recipe.data.source {
        Source::Input => {
            let Some(input) = &args.input else {
                bail!("recipe '{name}' reads its data from --input");
            };
            (commands::load(input)?, None)
        }
        source => {
            let kind = match source {
                Source::S2whirl => DataKind::S2whirl,
                Source::Phase => DataKind::Phase,
                _ => DataKind::SpdSphere,
            };
            let Some(shape) = shape else {
                bail!("recipe '{name}' needs a data shape");
            };
            commands::generate_data(kind, &shape)?
        }
    };
    let seed = args.seed.unwrap_or(recipe.data.seed);
    let noisy = match recipe.data.noise_sigma {
        Some(sigma) => synthetics::add_noise(&clean, &NoiseSpec::for_manifold(clean.manifold(), sigma, seed))?,
        None => clean.clone(),
    };
    println!("# {}", recipe.description);
    println!("recipe={name} vertices={} manifold={}", clean.len(), clean.manifold());
    if recipe.data.noise_sigma.is_some() {
        println!("noisy mse={}", synthetics::mse(&clean, &noisy)?);
    }

    let mut graphs: HashMap<Option<usize>, WeightedGraph> = HashMap::new();
    for r in &recipe.run {
        let patch = r.patch.or(recipe.graph.patch);
        if !graphs.contains_key(&patch) {
            let spec = GraphSpec {
                kind: match recipe.graph.kind {
                    GraphKindName::Grid4 => GraphKind::Grid4,
                    GraphKindName::KnnPatch => GraphKind::KnnPatch,
                    GraphKindName::EpsBall => GraphKind::EpsBall,
                },
                k: recipe.graph.k,
                patch,
                window: recipe.graph.window,
                eps: recipe.graph.eps,
                metric: MetricArg::Arc,
                weights: if recipe.graph.unit_weights {
                    WeightArg::Unit
                } else {
                    WeightArg::InverseSquare
                },
            };
            let g = commands::make_graph(&spec, &noisy, positions.as_ref())?;
            println!("graph patch={} edges={}", patch.map_or("-".into(), |p| p.to_string()), g.n_edges());
            graphs.insert(patch, g);
        }
        let graph = &graphs[&patch];
        let cfg = SolverConfig {
            model: parse_model(&r.model)?.into(),
            p: r.p,
            lambda: r.lambda,
            dt: r.dt.unwrap_or(1e-3),
            eps_smooth: r.eps_smooth.unwrap_or(DEFAULT_EPS_SMOOTH),
            max_iters: args.max_iters.unwrap_or(r.max_iters),
            stop_tol: r.tol,
            scheme: parse_scheme(&r.scheme)?.into(),
            record_energy: false,
            backoff: false,
            rng_seed: seed,
        };
        let (out, report) = solve(graph, &noisy, &cfg, None).with_context(|| format!("run '{}'", r.label))?;
        println!(
            "run={} iterations={} termination={:?} mse={}",
            r.label,
            report.iterations,
            report.termination,
            synthetics::mse(&clean, &out)?
        );
        if let Some(dir) = &args.out_dir {
            save_result(dir, &r.label, &out)?;
        }
    }
    Ok(())
}

fn save_result(dir: &Path, label: &str, f: &VertexFunction) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    commands::save(&dir.join(format!("{label}.mvd")), f)
}
