//! Synthetic test data: noise models, the mean squared error, and generators
//! for sphere-valued whirl images, phase images and SPD fields on the sphere.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::calculus::{per_vertex, vertex_distance};
use crate::error::{Error, Result};
use crate::function::VertexFunction;
use crate::graph::VertexPositions;
use crate::manifold::{wrap_angle, Manifold};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NoiseKind {
    /// Gaussian angle perturbation wrapped onto the circle.
    WrappedGaussian,
    /// `exp_x` of an isotropic Gaussian in an orthonormal basis of `T_x`.
    RiemannianGaussian,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub sigma: f64,
    pub seed: u64,
}

impl NoiseSpec {
    /// Wrapped Gaussian on the circle, Riemannian Gaussian elsewhere.
    pub fn for_manifold(m: Manifold, sigma: f64, seed: u64) -> Self {
        let kind = match m {
            Manifold::Circle => NoiseKind::WrappedGaussian,
            _ => NoiseKind::RiemannianGaussian,
        };
        NoiseSpec { kind, sigma, seed }
    }
}

/// Per-vertex generator: the seed selects the key and the vertex the stream,
/// so draws do not depend on evaluation order.
pub fn vertex_rng(seed: u64, u: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u as u64);
    rng
}

/// `f0(u) = exp_{f(u)}(ξ(u))` with independent Gaussian tangent vectors `ξ(u)`
/// of per-coordinate standard deviation `σ`; masked vertices are untouched.
pub fn add_noise(f: &VertexFunction, spec: &NoiseSpec) -> Result<VertexFunction> {
    if !(spec.sigma >= 0.0 && spec.sigma.is_finite()) {
        return Err(Error::Config(format!("sigma must be non-negative, got {}", spec.sigma)));
    }
    let m = f.manifold();
    if spec.kind == NoiseKind::WrappedGaussian && m != Manifold::Circle {
        return Err(Error::Config(format!("wrapped gaussian noise needs circle data, got {m}")));
    }
    let mut out = f.clone();
    if spec.sigma == 0.0 {
        return Ok(out);
    }
    per_vertex(f, out.values_mut(), |u, o| {
        let mut rng = vertex_rng(spec.seed, u);
        let mut v = vec![0.0; o.len()];
        m.random_tangent_into(f.value(u), spec.sigma, &mut rng, &mut v);
        m.exp_into(f.value(u), &v, o);
        Ok(())
    })?;
    Ok(out)
}

/// Mean squared geodesic error `(1/|V|) Σ_u d²(f(u), g(u))` over the active vertices of `f`.
pub fn mse(f: &VertexFunction, g: &VertexFunction) -> Result<f64> {
    let n = f.active_count();
    if n == 0 {
        return Ok(0.0);
    }
    Ok(vertex_distance(f, g)?.powi(2) / n as f64)
}

fn sphere_point(theta: f64, phi: f64) -> [f64; 3] {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

/// A whirl square of the S² image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Whirl {
    pub row: usize,
    pub col: usize,
    pub half: usize,
    pub clockwise: bool,
}

/// Whirl squares placed by [`gen_s2_whirl`]: four squares on the quarter
/// points of the grid, clockwise on the main diagonal.
pub fn s2_whirl_layout(height: usize, width: usize) -> Vec<Whirl> {
    let half = (height.min(width) / 8).max(1);
    let rows = [height / 4, (3 * height) / 4];
    let cols = [width / 4, (3 * width) / 4];
    let mut out = Vec::new();
    for (i, &row) in rows.iter().enumerate() {
        for (j, &col) in cols.iter().enumerate() {
            out.push(Whirl {
                row,
                col,
                half,
                clockwise: i == j,
            });
        }
    }
    out
}

/// Smooth background of [`gen_s2_whirl`] at pixel `(r, c)`: polar angle from
/// `π/3` to `2π/3` down the rows, azimuth from `0` to `π/2` across the columns.
pub fn s2_background(height: usize, width: usize, r: usize, c: usize) -> [f64; 3] {
    let t = r as f64 / (height - 1) as f64;
    let s = c as f64 / (width - 1) as f64;
    sphere_point(FRAC_PI_3 + t * FRAC_PI_3, s * FRAC_PI_2)
}

/// Sphere-valued image: a smooth background with four square whirls. Clockwise
/// whirls wind around the south pole `(0, 0, -1)`, which is their centre
/// value, and anticlockwise whirls around the north pole; the polar angle
/// moves linearly towards `π/4` from the respective pole at the square border.
pub fn gen_s2_whirl(height: usize, width: usize) -> Result<VertexFunction> {
    if height < 8 || width < 8 {
        return Err(Error::Config(format!("whirl image needs at least 8x8 pixels, got {height}x{width}")));
    }
    let whirls = s2_whirl_layout(height, width);
    let mut values = Vec::with_capacity(height * width * 3);
    for r in 0..height {
        for c in 0..width {
            let (dy, dx) = (r as f64, c as f64);
            let inside = whirls.iter().find(|q| {
                r.abs_diff(q.row) <= q.half && c.abs_diff(q.col) <= q.half
            });
            let x = match inside {
                None => s2_background(height, width, r, c),
                Some(q) => {
                    let (ry, rx) = (dy - q.row as f64, dx - q.col as f64);
                    let rad = ry.abs().max(rx.abs()) / q.half as f64;
                    let alpha = ry.atan2(rx);
                    let swirl = FRAC_PI_2 * (1.0 - rad);
                    if q.clockwise {
                        if rad == 0.0 {
                            [0.0, 0.0, -1.0]
                        } else {
                            sphere_point(PI - rad * 0.75 * PI, -(alpha + swirl))
                        }
                    } else if rad == 0.0 {
                        [0.0, 0.0, 1.0]
                    } else {
                        sphere_point(rad * 0.75 * PI, alpha + swirl)
                    }
                }
            };
            let mut x = x.to_vec();
            Manifold::Sphere2.canonicalize(&mut x);
            values.extend(x);
        }
    }
    VertexFunction::new(Manifold::Sphere2, vec![height, width], values, None)
}

/// Region of the phase image a pixel belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseRegion {
    Ramp,
    Ellipse,
    Square,
}

/// Value of the ellipse and square regions of [`gen_phase_image`].
pub const PHASE_ELLIPSE_VALUE: f64 = 1.0;
pub const PHASE_SQUARE_VALUE: f64 = -2.0;

pub fn phase_region(height: usize, width: usize, r: usize, c: usize) -> PhaseRegion {
    let (h, w) = (height as f64, width as f64);
    let (y, x) = (r as f64 + 0.5, c as f64 + 0.5);
    let ey = (y - 0.55 * h) / (0.22 * h);
    let ex = (x - 0.6 * w) / (0.28 * w);
    if ey * ey + ex * ex <= 1.0 {
        PhaseRegion::Ellipse
    } else if (0.12 * h..0.35 * h).contains(&y) && (0.1 * w..0.3 * w).contains(&x) {
        PhaseRegion::Square
    } else {
        PhaseRegion::Ramp
    }
}

/// Ramp slope per pixel along columns and rows.
pub fn phase_ramp_slopes(height: usize, width: usize) -> (f64, f64) {
    (4.0 * PI / width as f64, 2.0 * PI / height as f64)
}

/// Circle-valued image: a linear phase ramp wrapped to `(−π, π]`, overlaid
/// with a constant ellipse and a constant square.
pub fn gen_phase_image(height: usize, width: usize) -> Result<VertexFunction> {
    if height < 4 || width < 4 {
        return Err(Error::Config(format!("phase image needs at least 4x4 pixels, got {height}x{width}")));
    }
    let (sx, sy) = phase_ramp_slopes(height, width);
    let values = (0..height * width)
        .map(|i| {
            let (r, c) = (i / width, i % width);
            match phase_region(height, width, r, c) {
                PhaseRegion::Ramp => wrap_angle(sx * c as f64 + sy * r as f64 - PI),
                PhaseRegion::Ellipse => PHASE_ELLIPSE_VALUE,
                PhaseRegion::Square => PHASE_SQUARE_VALUE,
            }
        })
        .collect();
    VertexFunction::new(Manifold::Circle, vec![height, width], values, None)
}

/// Spherical Fibonacci point set: `z_i = 1 − (2i+1)/n`, azimuth advancing by
/// the golden angle.
pub fn fibonacci_sphere(n: usize) -> VertexPositions {
    let golden = PI * (3.0 - 5f64.sqrt());
    let mut coords = Vec::with_capacity(3 * n);
    for i in 0..n {
        let z = 1.0 - (2 * i + 1) as f64 / n as f64;
        let rho = (1.0 - z * z).sqrt();
        let phi = golden * i as f64;
        coords.extend([rho * phi.cos(), rho * phi.sin(), z]);
    }
    VertexPositions::new(3, coords).expect("three coordinates per point")
}

/// Latitude bands of the SPD field: the boundaries `z = 0.6` and `z = −0.4`
/// are jumps of the field.
pub fn spd_band(z: f64) -> usize {
    if z > 0.6 {
        0
    } else if z > -0.4 {
        1
    } else {
        2
    }
}

/// SPD tensor attached to the unit vector `p`.
///
/// North cap: oblate, `I − ppᵀ + 0.3 ppᵀ`. Middle band: prolate along the
/// azimuthal direction `e_φ` with eigenvalues 2, 0.5 (along `e_θ`), 0.3 (along
/// `p`). South cap: `0.4 (I − ppᵀ) + 1.5 ppᵀ`. Everything is scaled by the
/// smooth factor `exp(0.2 p_x)`.
pub fn spd_field_at(p: &[f64]) -> [f64; 9] {
    let (x, y, z) = (p[0], p[1], p[2]);
    let rho = (x * x + y * y).sqrt();
    let (e_phi, e_theta) = if rho > 1e-12 {
        ([-y / rho, x / rho, 0.0], [z * x / rho, z * y / rho, -rho])
    } else {
        ([0.0, 1.0, 0.0], [1.0, 0.0, 0.0])
    };
    let outer = |a: &[f64; 3], s: f64, m: &mut [f64; 9]| {
        for i in 0..3 {
            for j in 0..3 {
                m[3 * i + j] += s * a[i] * a[j];
            }
        }
    };
    let p3 = [x, y, z];
    let mut m = [0.0; 9];
    match spd_band(z) {
        0 => {
            outer(&e_phi, 1.0, &mut m);
            outer(&e_theta, 1.0, &mut m);
            outer(&p3, 0.3, &mut m);
        }
        1 => {
            outer(&e_phi, 2.0, &mut m);
            outer(&e_theta, 0.5, &mut m);
            outer(&p3, 0.3, &mut m);
        }
        _ => {
            outer(&e_phi, 0.4, &mut m);
            outer(&e_theta, 0.4, &mut m);
            outer(&p3, 1.5, &mut m);
        }
    }
    let scale = (0.2 * x).exp();
    for i in 0..3 {
        for j in 0..i {
            let s = 0.5 * (m[3 * i + j] + m[3 * j + i]);
            m[3 * i + j] = s;
            m[3 * j + i] = s;
        }
    }
    m.iter_mut().for_each(|a| *a *= scale);
    m
}

/// `n` Fibonacci points on S² carrying a piecewise smooth SPD(3) field.
pub fn gen_spd_on_sphere(n: usize) -> Result<(VertexPositions, VertexFunction)> {
    if n < 12 {
        return Err(Error::Config(format!("spd-on-sphere needs at least 12 points, got {n}")));
    }
    let pos = fibonacci_sphere(n);
    let values = (0..n).flat_map(|i| spd_field_at(pos.get(i))).collect();
    let f = VertexFunction::new(Manifold::Spd(3), vec![n], values, None)?;
    Ok((pos, f))
}

#[cfg(test)]
#[path = "synthetics_tests.rs"]
mod tests;
