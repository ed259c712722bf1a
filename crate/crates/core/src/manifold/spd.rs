//! Affine-invariant geometry on symmetric positive definite matrices.
//!
//! Points and tangent vectors are stored as full `n x n` row-major slices. All
//! closed forms go through a symmetric eigendecomposition; eigenvalues are
//! clamped at [`EIGEN_FLOOR`] before any logarithm or inverse power.

use nalgebra::DMatrix;

/// Lower bound applied to eigenvalues before `ln` or negative powers.
pub const EIGEN_FLOOR: f64 = 1e-14;

pub(crate) fn to_matrix(n: usize, a: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(n, n, a)
}

pub(crate) fn write_matrix(m: &DMatrix<f64>, out: &mut [f64]) {
    let n = m.nrows();
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = m[(i, j)];
        }
    }
}

pub(crate) fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let s = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = s;
            m[(j, i)] = s;
        }
    }
}

/// Eigendecomposition of a (numerically) symmetric matrix; the input is symmetrized first.
pub(crate) fn eigh(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let mut s = m.clone();
    symmetrize(&mut s);
    let eig = s.symmetric_eigen();
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

/// `V diag(g(λ)) Vᵀ`.
pub(crate) fn spectral(values: &[f64], vectors: &DMatrix<f64>, g: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let n = values.len();
    let mut scaled = vectors.clone();
    for (j, &l) in values.iter().enumerate() {
        let gl = g(l);
        for i in 0..n {
            scaled[(i, j)] *= gl;
        }
    }
    let mut out = scaled * vectors.transpose();
    symmetrize(&mut out);
    out
}

pub(crate) fn apply_fn(m: &DMatrix<f64>, g: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let (values, vectors) = eigh(m);
    spectral(&values, &vectors, g)
}

fn clamp(l: f64) -> f64 {
    l.max(EIGEN_FLOOR)
}

/// Cached square roots of a base point `x`.
#[derive(Debug, Clone)]
pub struct SpdFrame {
    n: usize,
    sqrt: DMatrix<f64>,
    inv_sqrt: DMatrix<f64>,
    inv: DMatrix<f64>,
}

impl SpdFrame {
    pub fn new(n: usize, x: &[f64]) -> Self {
        let (values, vectors) = eigh(&to_matrix(n, x));
        SpdFrame {
            n,
            sqrt: spectral(&values, &vectors, |l| clamp(l).sqrt()),
            inv_sqrt: spectral(&values, &vectors, |l| 1.0 / clamp(l).sqrt()),
            inv: spectral(&values, &vectors, |l| 1.0 / clamp(l)),
        }
    }

    /// `x^{-1/2} y x^{-1/2}`, symmetrized.
    fn whiten(&self, y: &[f64]) -> DMatrix<f64> {
        let mut z = &self.inv_sqrt * to_matrix(self.n, y) * &self.inv_sqrt;
        symmetrize(&mut z);
        z
    }

    fn color(&self, z: &DMatrix<f64>) -> DMatrix<f64> {
        let mut m = &self.sqrt * z * &self.sqrt;
        symmetrize(&mut m);
        m
    }

    pub fn dist(&self, y: &[f64]) -> f64 {
        let (values, _) = eigh(&self.whiten(y));
        values.iter().map(|&l| clamp(l).ln().powi(2)).sum::<f64>().sqrt()
    }

    /// Writes `log_x y` and returns `d(x, y)`.
    pub fn log_into(&self, y: &[f64], out: &mut [f64]) -> f64 {
        let (values, vectors) = eigh(&self.whiten(y));
        let d = values.iter().map(|&l| clamp(l).ln().powi(2)).sum::<f64>().sqrt();
        let log = spectral(&values, &vectors, |l| clamp(l).ln());
        write_matrix(&self.color(&log), out);
        d
    }

    pub fn exp_into(&self, v: &[f64], out: &mut [f64]) {
        let z = self.whiten(v);
        let e = apply_fn(&z, f64::exp);
        write_matrix(&self.color(&e), out);
    }

    /// Parallel transport of `v` from this base point to `y` along the connecting geodesic.
    pub fn transport_into(&self, y: &[f64], v: &[f64], out: &mut [f64]) {
        let z_half = apply_fn(&self.whiten(y), |l| clamp(l).sqrt());
        let e = &self.sqrt * z_half * &self.inv_sqrt;
        let mut m = &e * to_matrix(self.n, v) * e.transpose();
        symmetrize(&mut m);
        write_matrix(&m, out);
    }

    /// `trace(x⁻¹ u x⁻¹ v)`.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        let a = &self.inv * to_matrix(self.n, u);
        let b = &self.inv * to_matrix(self.n, v);
        let n = self.n;
        let mut t = 0.0;
        for i in 0..n {
            for j in 0..n {
                t += a[(i, j)] * b[(j, i)];
            }
        }
        t
    }

    /// Orthonormal basis of the tangent space at the base point, `x^{1/2} E x^{1/2}`.
    pub fn basis(&self) -> Vec<Vec<f64>> {
        let n = self.n;
        let mut basis = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                let mut e = DMatrix::zeros(n, n);
                if i == j {
                    e[(i, i)] = 1.0;
                } else {
                    let c = std::f64::consts::FRAC_1_SQRT_2;
                    e[(i, j)] = c;
                    e[(j, i)] = c;
                }
                let mut out = vec![0.0; n * n];
                write_matrix(&self.color(&e), &mut out);
                basis.push(out);
            }
        }
        basis
    }
}

/// Smallest eigenvalue and maximal asymmetry of a row-major square matrix.
pub(crate) fn min_eigen_and_asymmetry(n: usize, a: &[f64]) -> (f64, f64) {
    let m = to_matrix(n, a);
    let mut asym: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            asym = asym.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    let (values, _) = eigh(&m);
    (values.iter().copied().fold(f64::INFINITY, f64::min), asym)
}
