//! Vertex functions and the tangent-valued edge and vertex fields built on them.

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::manifold::{Manifold, ManifoldPoint};

/// A manifold-valued function on the vertices of a graph.
///
/// Values are stored contiguously in ambient coordinates. `shape` records the
/// grid layout (row-major) when the vertices come from an image or volume and
/// is `[n]` otherwise. The optional mask marks active vertices with `true`;
/// inactive vertices carry no data, get no edges and are never updated.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexFunction {
    manifold: Manifold,
    shape: Vec<usize>,
    values: Vec<f64>,
    mask: Option<Vec<bool>>,
}

impl VertexFunction {
    /// Validates every value against the manifold invariants.
    pub fn new(manifold: Manifold, shape: Vec<usize>, values: Vec<f64>, mask: Option<Vec<bool>>) -> Result<Self> {
        let f = Self::new_unchecked(manifold, shape, values, mask)?;
        for u in 0..f.len() {
            manifold.check_point(f.value(u))?;
        }
        Ok(f)
    }

    /// Checks only the sizes; values are trusted.
    pub fn new_unchecked(
        manifold: Manifold,
        shape: Vec<usize>,
        values: Vec<f64>,
        mask: Option<Vec<bool>>,
    ) -> Result<Self> {
        let n: usize = shape.iter().product();
        let stride = manifold.ambient_dim();
        if shape.is_empty() || n == 0 {
            return Err(Error::Config("shape must be non-empty with positive extents".into()));
        }
        if values.len() != n * stride {
            return Err(Error::Dimension {
                expected: n * stride,
                found: values.len(),
            });
        }
        if let Some(m) = &mask {
            if m.len() != n {
                return Err(Error::Dimension {
                    expected: n,
                    found: m.len(),
                });
            }
        }
        Ok(VertexFunction {
            manifold,
            shape,
            values,
            mask,
        })
    }

    pub fn from_points(shape: Vec<usize>, points: &[ManifoldPoint]) -> Result<Self> {
        let manifold = points
            .first()
            .map(|p| p.manifold())
            .ok_or_else(|| Error::Config("no points given".into()))?;
        let mut values = Vec::with_capacity(points.len() * manifold.ambient_dim());
        for p in points {
            if p.manifold() != manifold {
                return Err(Error::ManifoldMismatch {
                    expected: manifold.to_string(),
                    found: p.manifold().to_string(),
                });
            }
            values.extend_from_slice(p.coords());
        }
        Self::new_unchecked(manifold, shape, values, None)
    }

    /// The constant function with value `x` everywhere.
    pub fn constant(manifold: Manifold, shape: Vec<usize>, x: &[f64]) -> Result<Self> {
        manifold.check_point(x)?;
        let n: usize = shape.iter().product();
        let values = x.iter().copied().cycle().take(n * x.len()).collect();
        Self::new_unchecked(manifold, shape, values, None)
    }

    pub fn manifold(&self) -> Manifold {
        self.manifold
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.manifold.ambient_dim()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn stride(&self) -> usize {
        self.manifold.ambient_dim()
    }

    pub fn value(&self, u: usize) -> &[f64] {
        let s = self.stride();
        &self.values[u * s..(u + 1) * s]
    }

    pub fn value_mut(&mut self, u: usize) -> &mut [f64] {
        let s = self.stride();
        &mut self.values[u * s..(u + 1) * s]
    }

    pub fn point(&self, u: usize) -> ManifoldPoint {
        ManifoldPoint::new(self.manifold, self.value(u).to_vec()).expect("stored values satisfy invariants")
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn mask(&self) -> Option<&[bool]> {
        self.mask.as_deref()
    }

    pub fn set_mask(&mut self, mask: Option<Vec<bool>>) -> Result<()> {
        if let Some(m) = &mask {
            if m.len() != self.len() {
                return Err(Error::Dimension {
                    expected: self.len(),
                    found: m.len(),
                });
            }
        }
        self.mask = mask;
        Ok(())
    }

    pub fn is_active(&self, u: usize) -> bool {
        self.mask.as_ref().is_none_or(|m| m[u])
    }

    pub fn active_count(&self) -> usize {
        self.mask
            .as_ref()
            .map_or(self.len(), |m| m.iter().filter(|&&a| a).count())
    }

    pub fn with_shape(mut self, shape: Vec<usize>) -> Result<Self> {
        if shape.iter().product::<usize>() != self.len() {
            return Err(Error::Config(format!(
                "shape {shape:?} does not hold {} vertices",
                self.len()
            )));
        }
        self.shape = shape;
        Ok(self)
    }

    /// Row/column extents when the function lives on a 2-D grid.
    pub fn grid_dims(&self) -> Result<(usize, usize)> {
        match self.shape.as_slice() {
            [h, w] => Ok((*h, *w)),
            other => Err(Error::Config(format!("expected a 2-D grid shape, found {other:?}"))),
        }
    }

    pub(crate) fn check_compatible(&self, other: &VertexFunction) -> Result<()> {
        if self.manifold != other.manifold {
            return Err(Error::ManifoldMismatch {
                expected: self.manifold.to_string(),
                found: other.manifold.to_string(),
            });
        }
        if self.len() != other.len() {
            return Err(Error::Dimension {
                expected: self.len(),
                found: other.len(),
            });
        }
        Ok(())
    }

    pub(crate) fn check_graph(&self, graph: &WeightedGraph) -> Result<()> {
        if graph.n_vertices() != self.len() {
            return Err(Error::Dimension {
                expected: graph.n_vertices(),
                found: self.len(),
            });
        }
        Ok(())
    }
}

/// One tangent vector per directed edge, in the graph's edge order; the
/// vector of edge `(u, v)` lives in the tangent space at `f(u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentEdgeFunction {
    stride: usize,
    data: Vec<f64>,
}

impl TangentEdgeFunction {
    pub fn zeros(graph: &WeightedGraph, manifold: Manifold) -> Self {
        let stride = manifold.ambient_dim();
        TangentEdgeFunction {
            stride,
            data: vec![0.0; graph.n_edges() * stride],
        }
    }

    pub fn from_data(graph: &WeightedGraph, manifold: Manifold, data: Vec<f64>) -> Result<Self> {
        let stride = manifold.ambient_dim();
        if data.len() != graph.n_edges() * stride {
            return Err(Error::Dimension {
                expected: graph.n_edges() * stride,
                found: data.len(),
            });
        }
        Ok(TangentEdgeFunction { stride, data })
    }

    pub fn n_edges(&self) -> usize {
        self.data.len() / self.stride
    }

    pub fn edge(&self, e: usize) -> &[f64] {
        &self.data[e * self.stride..(e + 1) * self.stride]
    }

    pub fn edge_mut(&mut self, e: usize) -> &mut [f64] {
        &mut self.data[e * self.stride..(e + 1) * self.stride]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
}

/// One tangent vector per vertex `u`, living in the tangent space at `f(u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVertexField {
    stride: usize,
    data: Vec<f64>,
}

impl TangentVertexField {
    pub fn zeros(n: usize, manifold: Manifold) -> Self {
        let stride = manifold.ambient_dim();
        TangentVertexField {
            stride,
            data: vec![0.0; n * stride],
        }
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.stride
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn at(&self, u: usize) -> &[f64] {
        &self.data[u * self.stride..(u + 1) * self.stride]
    }

    pub fn at_mut(&mut self, u: usize) -> &mut [f64] {
        &mut self.data[u * self.stride..(u + 1) * self.stride]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    /// Largest Riemannian norm over the vertices, measured at the base points of `f`.
    pub fn max_norm(&self, f: &VertexFunction) -> f64 {
        let m = f.manifold();
        (0..self.len())
            .filter(|&u| f.is_active(u))
            .map(|u| m.norm(f.value(u), self.at(u)))
            .fold(0.0, f64::max)
    }

    /// `Σ_u ⟨self(u), other(u)⟩_{f(u)}`.
    pub fn inner(&self, other: &TangentVertexField, f: &VertexFunction) -> f64 {
        let m = f.manifold();
        (0..self.len())
            .map(|u| m.inner(f.value(u), self.at(u), other.at(u)))
            .sum()
    }
}
