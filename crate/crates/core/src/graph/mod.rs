//! Finite weighted directed graphs and the constructors used for denoising:
//! 4-neighbour image grids, ε-ball graphs over positions and patch-based
//! k-nearest-neighbour graphs.

mod patch;

pub use patch::{knn_patch_graph, patch_distance, KnnPatchOptions, KNN_WEIGHT_FLOOR};

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// A directed graph in compressed sparse row layout.
///
/// Every stored edge has a strictly positive weight and there are no self
/// loops. Edges of each vertex are sorted by target, so edge indices are
/// deterministic. `reverse(e)` gives the index of the opposite edge when it
/// exists.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    offsets: Vec<usize>,
    targets: Vec<usize>,
    weights: Vec<f64>,
    reverse: Vec<Option<usize>>,
    symmetric: bool,
}

/// A directed edge as seen from its start vertex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub index: usize,
    pub target: usize,
    pub weight: f64,
}

impl WeightedGraph {
    pub fn empty(n: usize) -> Self {
        Self::from_adjacency(n, vec![Vec::new(); n]).expect("empty graph")
    }

    /// Builds a graph from per-vertex `(neighbour, weight)` lists.
    pub fn from_adjacency(n: usize, mut adjacency: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        if adjacency.len() != n {
            return Err(Error::Dimension {
                expected: n,
                found: adjacency.len(),
            });
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::new();
        let mut weights = Vec::new();
        offsets.push(0);
        for (u, list) in adjacency.iter_mut().enumerate() {
            list.sort_by_key(|&(v, _)| v);
            for (i, &(v, w)) in list.iter().enumerate() {
                if v >= n {
                    return Err(Error::InvalidGraph(format!("edge ({u}, {v}) out of range")));
                }
                if v == u {
                    return Err(Error::InvalidGraph(format!("self loop at {u}")));
                }
                if !(w > 0.0 && w.is_finite()) {
                    return Err(Error::InvalidGraph(format!("edge ({u}, {v}) has weight {w}")));
                }
                if i > 0 && list[i - 1].0 == v {
                    return Err(Error::InvalidGraph(format!("duplicate edge ({u}, {v})")));
                }
                targets.push(v);
                weights.push(w);
            }
            offsets.push(targets.len());
        }
        let mut g = WeightedGraph {
            n,
            offsets,
            targets,
            weights,
            reverse: Vec::new(),
            symmetric: false,
        };
        g.reverse = (0..n)
            .flat_map(|u| g.edge_range(u).map(move |e| (u, e)))
            .map(|(u, e)| g.find_edge(g.targets[e], u))
            .collect();
        g.symmetric = (0..g.n_edges()).all(|e| g.reverse[e].is_some_and(|r| g.weights[r] == g.weights[e]));
        Ok(g)
    }

    /// Builds a graph from a list of directed `(u, v, w)` triples.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); n];
        for (u, v, w) in edges {
            if u >= n {
                return Err(Error::InvalidGraph(format!("edge ({u}, {v}) out of range")));
            }
            adjacency[u].push((v, w));
        }
        Self::from_adjacency(n, adjacency)
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn n_edges(&self) -> usize {
        self.targets.len()
    }

    /// Whether `(u, v) ∈ E ⇔ (v, u) ∈ E` with exactly equal weights.
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Whether the edge set is symmetric, ignoring weights.
    pub fn has_symmetric_edge_set(&self) -> bool {
        self.reverse.iter().all(Option::is_some)
    }

    pub fn edge_range(&self, u: usize) -> std::ops::Range<usize> {
        self.offsets[u]..self.offsets[u + 1]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.offsets[u + 1] - self.offsets[u]
    }

    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = Edge> + '_ {
        self.edge_range(u).map(move |e| Edge {
            index: e,
            target: self.targets[e],
            weight: self.weights[e],
        })
    }

    pub fn target(&self, e: usize) -> usize {
        self.targets[e]
    }

    pub fn weight(&self, e: usize) -> f64 {
        self.weights[e]
    }

    pub fn reverse(&self, e: usize) -> Option<usize> {
        self.reverse[e]
    }

    pub fn find_edge(&self, u: usize, v: usize) -> Option<usize> {
        let r = self.edge_range(u);
        self.targets[r.clone()].binary_search(&v).ok().map(|i| r.start + i)
    }

    /// `w(u, v)`, zero when the edge is absent.
    pub fn weight_between(&self, u: usize, v: usize) -> f64 {
        self.find_edge(u, v).map_or(0.0, |e| self.weights[e])
    }

    /// All directed edges as `(u, v, w)` in index order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |u| self.neighbors(u).map(move |e| (u, e.target, e.weight)))
    }

    pub fn mean_degree(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.n_edges() as f64 / self.n as f64
        }
    }

    pub fn isolated_vertices(&self) -> Vec<usize> {
        (0..self.n).filter(|&u| self.degree(u) == 0).collect()
    }

    /// Union of `E` and its reverse with `w(u,v) ← max(w(u,v), w(v,u))`.
    pub fn symmetrized_max(&self) -> WeightedGraph {
        let mut adjacency: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.n];
        for (u, v, w) in self.edges() {
            adjacency[u].push((v, w));
            adjacency[v].push((u, w));
        }
        for list in adjacency.iter_mut() {
            list.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.total_cmp(&a.1)));
            list.dedup_by_key(|e| e.0);
        }
        Self::from_adjacency(self.n, adjacency).expect("symmetrization preserves validity")
    }

    /// Subgraph induced by the vertices with `keep[u]`; returns the graph and
    /// the original index of every kept vertex.
    pub fn induced_subgraph(&self, keep: &[bool]) -> Result<(WeightedGraph, Vec<usize>)> {
        if keep.len() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                found: keep.len(),
            });
        }
        let kept: Vec<usize> = (0..self.n).filter(|&u| keep[u]).collect();
        let mut new_index = vec![usize::MAX; self.n];
        for (i, &u) in kept.iter().enumerate() {
            new_index[u] = i;
        }
        let adjacency = kept
            .iter()
            .map(|&u| {
                self.neighbors(u)
                    .filter(|e| keep[e.target])
                    .map(|e| (new_index[e.target], e.weight))
                    .collect()
            })
            .collect();
        Ok((Self::from_adjacency(kept.len(), adjacency)?, kept))
    }
}

/// 4-neighbour grid over a `height x width` image in row-major order with unit
/// weights. Boundary pixels simply have fewer neighbours (Neumann boundary).
pub fn grid_graph(height: usize, width: usize) -> Result<WeightedGraph> {
    if height == 0 || width == 0 {
        return Err(Error::Config("grid extents must be at least 1".into()));
    }
    let n = height * width;
    let mut adjacency = vec![Vec::with_capacity(4); n];
    for r in 0..height {
        for c in 0..width {
            let u = r * width + c;
            if r > 0 {
                adjacency[u].push((u - width, 1.0));
            }
            if c > 0 {
                adjacency[u].push((u - 1, 1.0));
            }
            if c + 1 < width {
                adjacency[u].push((u + 1, 1.0));
            }
            if r + 1 < height {
                adjacency[u].push((u + width, 1.0));
            }
        }
    }
    WeightedGraph::from_adjacency(n, adjacency)
}

/// Per-vertex coordinates in an embedding space (grid indices, voxel indices
/// or unit vectors on the sphere).
#[derive(Debug, Clone, PartialEq)]
pub struct VertexPositions {
    dim: usize,
    coords: Vec<f64>,
}

impl VertexPositions {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 || coords.len() % dim != 0 {
            return Err(Error::Dimension {
                expected: dim,
                found: coords.len(),
            });
        }
        Ok(VertexPositions { dim, coords })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn get(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }
}

/// How distances between positions are measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PositionMetric {
    Euclidean,
    /// Great-circle arc length between unit vectors.
    SphereArc,
}

impl PositionMetric {
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            PositionMetric::Euclidean => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt(),
            PositionMetric::SphereArc => {
                let c = [
                    a[1] * b[2] - a[2] * b[1],
                    a[2] * b[0] - a[0] * b[2],
                    a[0] * b[1] - a[1] * b[0],
                ];
                let s = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
                let d: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                s.atan2(d).clamp(0.0, PI)
            }
        }
    }
}

/// Edge weights of an ε-ball graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightRule {
    /// `w(i, j) = d(p_i, p_j)^{-2}`.
    InverseSquare,
    Unit,
}

/// Connects every pair of distinct positions with `d(p_i, p_j) ≤ eps`.
///
/// Vertices without neighbours are kept; see
/// [`WeightedGraph::isolated_vertices`] and [`WeightedGraph::induced_subgraph`].
pub fn epsilon_ball_graph(
    positions: &VertexPositions,
    eps: f64,
    metric: PositionMetric,
    rule: WeightRule,
) -> Result<WeightedGraph> {
    if !(eps > 0.0) {
        return Err(Error::Config(format!("eps must be positive, got {eps}")));
    }
    if metric == PositionMetric::SphereArc && positions.dim() != 3 {
        return Err(Error::Config("sphere arc distance needs 3-D positions".into()));
    }
    let n = positions.len();
    let mut adjacency = vec![Vec::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = metric.distance(positions.get(i), positions.get(j));
            if d <= eps {
                let w = match rule {
                    WeightRule::Unit => 1.0,
                    WeightRule::InverseSquare => {
                        if d == 0.0 {
                            return Err(Error::Domain(format!(
                                "positions {i} and {j} coincide; inverse-square weight undefined"
                            )));
                        }
                        1.0 / (d * d)
                    }
                };
                adjacency[i].push((j, w));
                adjacency[j].push((i, w));
            }
        }
    }
    WeightedGraph::from_adjacency(n, adjacency)
}
