use rand::Rng;

use super::{wrap_angle, Manifold};
use crate::error::{Error, Result};

/// A point on a [`Manifold`] in ambient coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldPoint {
    manifold: Manifold,
    coords: Vec<f64>,
}

/// A tangent vector together with its base point.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    base: ManifoldPoint,
    coords: Vec<f64>,
}

fn same_manifold(a: Manifold, b: Manifold) -> Result<()> {
    if a != b {
        return Err(Error::ManifoldMismatch {
            expected: a.to_string(),
            found: b.to_string(),
        });
    }
    Ok(())
}

impl ManifoldPoint {
    /// Validates `coords` against the invariants of `manifold`.
    pub fn new(manifold: Manifold, coords: Vec<f64>) -> Result<Self> {
        manifold.check_point(&coords)?;
        Ok(ManifoldPoint { manifold, coords })
    }

    /// Canonicalizes `coords` (wrap, renormalize, symmetrize) before validating.
    pub fn projected(manifold: Manifold, mut coords: Vec<f64>) -> Result<Self> {
        if coords.len() == manifold.ambient_dim() {
            manifold.canonicalize(&mut coords);
        }
        Self::new(manifold, coords)
    }

    pub fn angle(a: f64) -> Self {
        ManifoldPoint {
            manifold: Manifold::Circle,
            coords: vec![wrap_angle(a)],
        }
    }

    pub fn manifold(&self) -> Manifold {
        self.manifold
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn dist(&self, other: &ManifoldPoint) -> Result<f64> {
        same_manifold(self.manifold, other.manifold)?;
        Ok(self.manifold.dist(&self.coords, &other.coords))
    }

    pub fn log(&self, other: &ManifoldPoint) -> Result<TangentVector> {
        same_manifold(self.manifold, other.manifold)?;
        let mut out = vec![0.0; self.manifold.ambient_dim()];
        self.manifold.log_into(&self.coords, &other.coords, &mut out)?;
        Ok(TangentVector {
            base: self.clone(),
            coords: out,
        })
    }

    pub fn exp(&self, v: &TangentVector) -> Result<ManifoldPoint> {
        if v.base != *self {
            return Err(Error::BaseMismatch);
        }
        let mut out = vec![0.0; self.manifold.ambient_dim()];
        self.manifold.exp_into(&self.coords, &v.coords, &mut out);
        Ok(ManifoldPoint {
            manifold: self.manifold,
            coords: out,
        })
    }

    pub fn zero_tangent(&self) -> TangentVector {
        TangentVector {
            base: self.clone(),
            coords: vec![0.0; self.manifold.ambient_dim()],
        }
    }

    pub fn tangent(&self, coords: Vec<f64>) -> Result<TangentVector> {
        self.manifold.check_tangent(&self.coords, &coords)?;
        Ok(TangentVector {
            base: self.clone(),
            coords,
        })
    }

    pub fn random_tangent<R: Rng + ?Sized>(&self, sigma: f64, rng: &mut R) -> TangentVector {
        let mut out = vec![0.0; self.manifold.ambient_dim()];
        self.manifold.random_tangent_into(&self.coords, sigma, rng, &mut out);
        TangentVector {
            base: self.clone(),
            coords: out,
        }
    }
}

impl TangentVector {
    pub fn base(&self) -> &ManifoldPoint {
        &self.base
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn scaled(&self, s: f64) -> TangentVector {
        TangentVector {
            base: self.base.clone(),
            coords: self.coords.iter().map(|v| s * v).collect(),
        }
    }

    pub fn inner(&self, other: &TangentVector) -> Result<f64> {
        if self.base != other.base {
            return Err(Error::BaseMismatch);
        }
        let m = self.base.manifold;
        Ok(m.inner(&self.base.coords, &self.coords, &other.coords))
    }

    pub fn norm(&self) -> f64 {
        let m = self.base.manifold;
        m.norm(&self.base.coords, &self.coords)
    }

    /// Parallel transport to `T_y` along the geodesic from the base point to `y`.
    pub fn transport_to(&self, y: &ManifoldPoint) -> Result<TangentVector> {
        same_manifold(self.base.manifold, y.manifold)?;
        let m = self.base.manifold;
        let mut out = vec![0.0; m.ambient_dim()];
        m.transport_into(&self.base.coords, &y.coords, &self.coords, &mut out)?;
        Ok(TangentVector {
            base: y.clone(),
            coords: out,
        })
    }
}
