//! Discrete calculus, graph p-Laplacians and variational denoising for
//! functions on weighted graphs that take values in Riemannian manifolds
//! (Euclidean space, the circle, the 2-sphere and SPD matrices).

pub mod calculus;
pub mod error;
pub mod function;
pub mod graph;
pub mod io;
pub mod manifold;
pub mod sampling;
pub mod solvers;
pub mod synthetics;

pub use calculus::Model;
pub use error::{Error, Result};
pub use function::{TangentEdgeFunction, TangentVertexField, VertexFunction};
pub use graph::{WeightedGraph, VertexPositions};
pub use manifold::{Manifold, ManifoldPoint, TangentVector};
