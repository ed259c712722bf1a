//! Closed-form Riemannian kernels for the four manifold families: Euclidean
//! space `R^m`, the circle `S^1`, the sphere `S^2` and `SPD(n)` with the
//! affine-invariant metric.
//!
//! The kernels work on flat `f64` slices in ambient coordinates so that
//! vertex functions can store all values contiguously:
//!
//! | manifold      | point                        | tangent vector          |
//! |---------------|------------------------------|-------------------------|
//! | `Euclidean(m)`| `m` coordinates              | `m` coordinates         |
//! | `Circle`      | angle in `(-π, π]`           | scalar angular velocity |
//! | `Sphere2`     | unit vector in `R^3`         | vector orthogonal to it |
//! | `Spd(n)`      | `n x n` row-major, symmetric | symmetric `n x n`       |
//!
//! For repeated work at one base point build a [`Frame`] once; for `SPD(n)`
//! it caches `x^{1/2}`, `x^{-1/2}` and `x^{-1}`.

mod point;
pub mod spd;

pub use point::{ManifoldPoint, TangentVector};

use std::f64::consts::{PI, TAU};
use std::fmt;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use spd::SpdFrame;

/// Margin below the injectivity radius inside which `log` is still accepted.
pub const INJECTIVITY_TOL: f64 = 1e-8;

const UNIT_TOL: f64 = 1e-10;
const SYMMETRY_TOL: f64 = 1e-12;

/// The manifold a point lives on, together with its dimension parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Manifold {
    Euclidean(usize),
    Circle,
    Sphere2,
    Spd(usize),
}

impl fmt::Display for Manifold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Manifold::Euclidean(m) => write!(f, "euclidean({m})"),
            Manifold::Circle => write!(f, "circle"),
            Manifold::Sphere2 => write!(f, "sphere2"),
            Manifold::Spd(n) => write!(f, "spd({n})"),
        }
    }
}

/// Canonical representative of an angle in `(-π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    if a > -PI && a <= PI {
        return a;
    }
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn cross(a: &[f64], b: &[f64]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Geodesic distance on the unit sphere, stable for nearby and nearly antipodal points.
fn sphere_dist(x: &[f64], y: &[f64]) -> f64 {
    let c = cross(x, y);
    dot(&c, &c).sqrt().atan2(dot(x, y))
}

impl Manifold {
    pub fn new(kind: &str, param: Option<usize>) -> Result<Self> {
        let need = |p: Option<usize>| {
            p.filter(|&v| v >= 1)
                .ok_or_else(|| Error::Config(format!("manifold '{kind}' needs a dimension >= 1")))
        };
        match kind {
            "euclidean" => Ok(Manifold::Euclidean(need(param)?)),
            "circle" => Ok(Manifold::Circle),
            "sphere2" => Ok(Manifold::Sphere2),
            "spd" => Ok(Manifold::Spd(need(param)?)),
            other => Err(Error::Config(format!("unknown manifold '{other}'"))),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Manifold::Euclidean(_) => "euclidean",
            Manifold::Circle => "circle",
            Manifold::Sphere2 => "sphere2",
            Manifold::Spd(_) => "spd",
        }
    }

    pub fn intrinsic_dim(&self) -> usize {
        match *self {
            Manifold::Euclidean(m) => m,
            Manifold::Circle => 1,
            Manifold::Sphere2 => 2,
            Manifold::Spd(n) => n * (n + 1) / 2,
        }
    }

    /// Number of `f64` used to store a point or a tangent vector.
    pub fn ambient_dim(&self) -> usize {
        match *self {
            Manifold::Euclidean(m) => m,
            Manifold::Circle => 1,
            Manifold::Sphere2 => 3,
            Manifold::Spd(n) => n * n,
        }
    }

    pub fn injectivity_radius(&self) -> f64 {
        match self {
            Manifold::Euclidean(_) | Manifold::Spd(_) => f64::INFINITY,
            Manifold::Circle | Manifold::Sphere2 => PI,
        }
    }

    /// Largest distance accepted by `log` and parallel transport.
    pub fn log_limit(&self) -> f64 {
        self.injectivity_radius() - INJECTIVITY_TOL
    }

    fn check_len(&self, a: &[f64]) -> Result<()> {
        if a.len() != self.ambient_dim() {
            return Err(Error::Dimension {
                expected: self.ambient_dim(),
                found: a.len(),
            });
        }
        Ok(())
    }

    /// Checks the point invariants without modifying the coordinates.
    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        self.check_len(x)?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidPoint("non-finite coordinate".into()));
        }
        match *self {
            Manifold::Euclidean(_) => Ok(()),
            Manifold::Circle => {
                if x[0] > -PI && x[0] <= PI {
                    Ok(())
                } else {
                    Err(Error::InvalidPoint(format!("angle {} outside (-pi, pi]", x[0])))
                }
            }
            Manifold::Sphere2 => {
                let n = dot(x, x).sqrt();
                if (n - 1.0).abs() <= UNIT_TOL {
                    Ok(())
                } else {
                    Err(Error::InvalidPoint(format!("sphere point has norm {n}")))
                }
            }
            Manifold::Spd(n) => {
                let (min_eig, asym) = spd::min_eigen_and_asymmetry(n, x);
                let scale = x.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
                if asym > SYMMETRY_TOL * scale {
                    Err(Error::InvalidPoint(format!("matrix asymmetric by {asym}")))
                } else if min_eig <= 0.0 {
                    Err(Error::InvalidPoint(format!("smallest eigenvalue {min_eig} not positive")))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Restores the representation invariants in place: wraps angles,
    /// renormalizes sphere points and symmetrizes matrices.
    pub fn canonicalize(&self, x: &mut [f64]) {
        match *self {
            Manifold::Euclidean(_) => {}
            Manifold::Circle => x[0] = wrap_angle(x[0]),
            Manifold::Sphere2 => {
                let n = dot(x, x).sqrt();
                if n > 0.0 {
                    x.iter_mut().for_each(|v| *v /= n);
                }
            }
            Manifold::Spd(n) => {
                for i in 0..n {
                    for j in (i + 1)..n {
                        let s = 0.5 * (x[i * n + j] + x[j * n + i]);
                        x[i * n + j] = s;
                        x[j * n + i] = s;
                    }
                }
            }
        }
    }

    /// Checks that `v` is a valid tangent vector at `x`.
    pub fn check_tangent(&self, x: &[f64], v: &[f64]) -> Result<()> {
        self.check_len(v)?;
        match *self {
            Manifold::Sphere2 => {
                let scale = dot(v, v).sqrt().max(1.0);
                if dot(x, v).abs() > UNIT_TOL * scale {
                    return Err(Error::InvalidPoint("sphere tangent not orthogonal to base".into()));
                }
            }
            Manifold::Spd(n) => {
                let scale = v.iter().fold(1.0_f64, |m, a| m.max(a.abs()));
                for i in 0..n {
                    for j in (i + 1)..n {
                        if (v[i * n + j] - v[j * n + i]).abs() > SYMMETRY_TOL * scale {
                            return Err(Error::InvalidPoint("spd tangent not symmetric".into()));
                        }
                    }
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn frame<'a>(&self, x: &'a [f64]) -> Frame<'a> {
        let spd = match *self {
            Manifold::Spd(n) => Some(SpdFrame::new(n, x)),
            _ => None,
        };
        Frame {
            manifold: *self,
            x,
            spd,
        }
    }

    pub fn dist(&self, x: &[f64], y: &[f64]) -> f64 {
        match *self {
            Manifold::Euclidean(_) => x
                .iter()
                .zip(y)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt(),
            Manifold::Circle => wrap_angle(y[0] - x[0]).abs(),
            Manifold::Sphere2 => sphere_dist(x, y),
            Manifold::Spd(_) => self.frame(x).dist(y),
        }
    }

    /// Writes `log_x y` into `out` and returns `d(x, y)`.
    pub fn log_into(&self, x: &[f64], y: &[f64], out: &mut [f64]) -> Result<f64> {
        self.frame(x).log_into(y, out)
    }

    pub fn exp_into(&self, x: &[f64], v: &[f64], out: &mut [f64]) {
        self.frame(x).exp_into(v, out)
    }

    /// Parallel transport of `v ∈ T_x` to `T_y` along the geodesic from `x` to `y`.
    pub fn transport_into(&self, x: &[f64], y: &[f64], v: &[f64], out: &mut [f64]) -> Result<()> {
        self.frame(x).transport_into(y, v, out)
    }

    pub fn inner(&self, x: &[f64], u: &[f64], v: &[f64]) -> f64 {
        self.frame(x).inner(u, v)
    }

    pub fn norm(&self, x: &[f64], u: &[f64]) -> f64 {
        self.inner(x, u, u).max(0.0).sqrt()
    }

    /// Orthonormal basis of `T_x` with respect to the Riemannian metric.
    pub fn tangent_basis(&self, x: &[f64]) -> Vec<Vec<f64>> {
        self.frame(x).basis()
    }

    /// Isotropic Gaussian tangent vector with standard deviation `sigma` per
    /// orthonormal basis direction, so that `E‖ξ‖² = sigma² · intrinsic_dim`.
    pub fn random_tangent_into<R: Rng + ?Sized>(&self, x: &[f64], sigma: f64, rng: &mut R, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        if sigma == 0.0 {
            return;
        }
        match *self {
            Manifold::Euclidean(_) | Manifold::Circle => {
                for v in out.iter_mut() {
                    let g: f64 = rng.sample(StandardNormal);
                    *v = sigma * g;
                }
            }
            _ => {
                for b in self.tangent_basis(x) {
                    let g: f64 = rng.sample(StandardNormal);
                    for (o, e) in out.iter_mut().zip(&b) {
                        *o += sigma * g * e;
                    }
                }
            }
        }
    }
}

/// A base point with any per-point precomputation needed by the kernels.
pub struct Frame<'a> {
    manifold: Manifold,
    x: &'a [f64],
    spd: Option<SpdFrame>,
}

impl<'a> Frame<'a> {
    pub fn manifold(&self) -> Manifold {
        self.manifold
    }

    pub fn point(&self) -> &'a [f64] {
        self.x
    }

    fn spd(&self) -> &SpdFrame {
        self.spd.as_ref().expect("spd frame")
    }

    pub fn dist(&self, y: &[f64]) -> f64 {
        match self.manifold {
            Manifold::Spd(_) if self.x == y => 0.0,
            Manifold::Spd(_) => self.spd().dist(y),
            m => m.dist(self.x, y),
        }
    }

    /// Writes `log_x y` into `out` and returns `d(x, y)`.
    ///
    /// Fails with [`Error::NotInjective`] when `y` is within [`INJECTIVITY_TOL`]
    /// of the cut locus of `x`.
    pub fn log_into(&self, y: &[f64], out: &mut [f64]) -> Result<f64> {
        let x = self.x;
        match self.manifold {
            Manifold::Euclidean(_) => {
                let mut s = 0.0;
                for ((o, a), b) in out.iter_mut().zip(x).zip(y) {
                    *o = b - a;
                    s += *o * *o;
                }
                Ok(s.sqrt())
            }
            Manifold::Circle => {
                let d = wrap_angle(y[0] - x[0]);
                let limit = self.manifold.log_limit();
                if d.abs() > limit {
                    return Err(Error::NotInjective { distance: d.abs(), limit });
                }
                out[0] = d;
                Ok(d.abs())
            }
            Manifold::Sphere2 => {
                let d = sphere_dist(x, y);
                let limit = self.manifold.log_limit();
                if d > limit {
                    return Err(Error::NotInjective { distance: d, limit });
                }
                let c = dot(x, y);
                let mut n2 = 0.0;
                for i in 0..3 {
                    out[i] = y[i] - c * x[i];
                    n2 += out[i] * out[i];
                }
                let n = n2.sqrt();
                if n > 0.0 {
                    let s = d / n;
                    out.iter_mut().for_each(|v| *v *= s);
                } else {
                    out.iter_mut().for_each(|v| *v = 0.0);
                }
                Ok(d)
            }
            Manifold::Spd(_) if x == y => {
                out.iter_mut().for_each(|v| *v = 0.0);
                Ok(0.0)
            }
            Manifold::Spd(_) => Ok(self.spd().log_into(y, out)),
        }
    }

    /// Writes `exp_x v` into `out`, restoring the point invariants.
    pub fn exp_into(&self, v: &[f64], out: &mut [f64]) {
        let x = self.x;
        match self.manifold {
            Manifold::Euclidean(_) => {
                for ((o, a), b) in out.iter_mut().zip(x).zip(v) {
                    *o = a + b;
                }
            }
            Manifold::Circle => out[0] = wrap_angle(x[0] + v[0]),
            Manifold::Sphere2 => {
                let t = dot(v, v).sqrt();
                if t == 0.0 {
                    out.copy_from_slice(x);
                } else {
                    let (s, c) = t.sin_cos();
                    for i in 0..3 {
                        out[i] = c * x[i] + s * v[i] / t;
                    }
                }
                self.manifold.canonicalize(out);
            }
            Manifold::Spd(_) => self.spd().exp_into(v, out),
        }
    }

    /// Parallel transport of `v ∈ T_x` to `T_y`.
    pub fn transport_into(&self, y: &[f64], v: &[f64], out: &mut [f64]) -> Result<()> {
        let x = self.x;
        match self.manifold {
            Manifold::Euclidean(_) | Manifold::Circle => {
                if self.manifold == Manifold::Circle {
                    let d = wrap_angle(y[0] - x[0]).abs();
                    let limit = self.manifold.log_limit();
                    if d > limit {
                        return Err(Error::NotInjective { distance: d, limit });
                    }
                }
                out.copy_from_slice(v);
                Ok(())
            }
            Manifold::Sphere2 => {
                let mut dir = [0.0; 3];
                let d = self.log_into(y, &mut dir)?;
                out.copy_from_slice(v);
                if d == 0.0 {
                    return Ok(());
                }
                dir.iter_mut().for_each(|a| *a /= d);
                let (s, c) = d.sin_cos();
                let uv = dot(&dir, v);
                for i in 0..3 {
                    out[i] -= uv * ((1.0 - c) * dir[i] + s * x[i]);
                }
                Ok(())
            }
            Manifold::Spd(_) => {
                self.spd().transport_into(y, v, out);
                Ok(())
            }
        }
    }

    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        match self.manifold {
            Manifold::Spd(_) => self.spd().inner(u, v),
            _ => dot(u, v),
        }
    }

    pub fn norm(&self, u: &[f64]) -> f64 {
        self.inner(u, u).max(0.0).sqrt()
    }

    pub fn basis(&self) -> Vec<Vec<f64>> {
        match self.manifold {
            Manifold::Euclidean(m) => (0..m)
                .map(|i| {
                    let mut e = vec![0.0; m];
                    e[i] = 1.0;
                    e
                })
                .collect(),
            Manifold::Circle => vec![vec![1.0]],
            Manifold::Sphere2 => {
                let x = self.x;
                // start from the axis least aligned with x
                let k = (0..3)
                    .min_by(|&a, &b| x[a].abs().total_cmp(&x[b].abs()))
                    .unwrap_or(0);
                let mut a = [0.0; 3];
                a[k] = 1.0;
                let c = dot(&a, x);
                let mut e1 = [a[0] - c * x[0], a[1] - c * x[1], a[2] - c * x[2]];
                let n = dot(&e1, &e1).sqrt();
                e1.iter_mut().for_each(|v| *v /= n);
                let e2 = cross(x, &e1);
                vec![e1.to_vec(), e2.to_vec()]
            }
            Manifold::Spd(_) => self.spd().basis(),
        }
    }
}
