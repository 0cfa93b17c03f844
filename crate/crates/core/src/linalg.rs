//! Dense complex linear algebra kernels: operator norms, singular spectra,
//! Schatten norms, Gram matrices, and the deterministic matrix-free power
//! iteration shared by the certifiers.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::par;
use crate::rng::rng_from_seed;

/// Largest dimension accepted by the dense full-spectrum solver.
pub const DENSE_CAP: usize = 512;

/// Hard cap on power-iteration steps.
const POWER_ITER_CAP: usize = 10_000;

/// Dense T x N complex matrix, row-major. Immutable after construction;
/// all entries are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyMatrix);
        }
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: entries.len(),
            });
        }
        for (k, z) in entries.iter().enumerate() {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFiniteEntry {
                    row: k / cols,
                    col: k % cols,
                });
            }
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    /// Build from a function of 0-based (row, col).
    pub fn from_fn(
        rows: usize,
        cols: usize,
        f: impl Fn(usize, usize) -> Complex64,
    ) -> Result<Self> {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Self::new(rows, cols, entries)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.cols + col]
    }

    #[inline]
    pub fn row(&self, row: usize) -> &[Complex64] {
        &self.entries[row * self.cols..(row + 1) * self.cols]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Sum of squared moduli of all entries.
    pub fn frobenius_sq(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    /// y = M v, rows computed independently (deterministic under any thread count).
    pub fn mat_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.cols, "mat_vec length mismatch");
        par::map_indexed(self.rows, |i| {
            let row = self.row(i);
            let mut acc = Complex64::new(0.0, 0.0);
            for (m, x) in row.iter().zip(v) {
                acc += m * x;
            }
            acc
        })
    }

    /// y = M* v (conjugate transpose applied to v).
    pub fn adjoint_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.rows, "adjoint_vec length mismatch");
        par::map_indexed(self.cols, |j| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, vi) in v.iter().enumerate() {
                acc += self.entries[i * self.cols + j].conj() * vi;
            }
            acc
        })
    }

    /// Submatrix keeping the given 0-based rows, in their given order.
    pub fn minor_rows(&self, rows0: &[usize]) -> ComplexMatrix {
        let mut entries = Vec::with_capacity(rows0.len() * self.cols);
        for &i in rows0 {
            entries.extend_from_slice(self.row(i));
        }
        ComplexMatrix {
            rows: rows0.len(),
            cols: self.cols,
            entries,
        }
    }
}

/// Non-increasing singular values of a matrix; length = min(T, N).
#[derive(Debug, Clone, PartialEq)]
pub struct SingularSpectrum {
    values: Vec<f64>,
}

impl SingularSpectrum {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn top(&self) -> f64 {
        self.values[0]
    }

    pub fn sum_sq(&self) -> f64 {
        self.values.iter().map(|s| s * s).sum()
    }
}

/// Hermitian Gram matrix A = M M*, dense dim x dim.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl GramMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.dim + j]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.entries[i * self.dim..(i + 1) * self.dim]
    }

    /// Largest diagonal entry (diagonal is real and non-negative).
    pub fn diag_max(&self) -> f64 {
        (0..self.dim)
            .map(|i| self.at(i, i).re)
            .fold(0.0_f64, f64::max)
    }

    /// Largest off-diagonal modulus; 0 for a 1 x 1 Gram.
    pub fn offdiag_max(&self) -> f64 {
        let mut best = 0.0_f64;
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                best = best.max(self.at(i, j).norm());
            }
        }
        best
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.at(i, i).re).sum()
    }
}

/// A = M M*. Upper triangle is computed and mirrored by conjugation, so the
/// result is Hermitian exactly; diagonal entries are stored with zero
/// imaginary part.
pub fn gram(m: &ComplexMatrix) -> GramMatrix {
    let t = m.rows();
    let rows: Vec<Vec<Complex64>> = par::map_indexed(t, |i| {
        let ri = m.row(i);
        let mut out = vec![Complex64::new(0.0, 0.0); t];
        for (j, o) in out.iter_mut().enumerate().skip(i) {
            let rj = m.row(j);
            let mut acc = Complex64::new(0.0, 0.0);
            for (a, b) in ri.iter().zip(rj) {
                acc += a * b.conj();
            }
            *o = if i == j {
                Complex64::new(acc.re, 0.0)
            } else {
                acc
            };
        }
        out
    });
    let mut entries = vec![Complex64::new(0.0, 0.0); t * t];
    for i in 0..t {
        for j in i..t {
            entries[i * t + j] = rows[i][j];
            entries[j * t + i] = rows[i][j].conj();
        }
    }
    GramMatrix { dim: t, entries }
}

/// Gram of the columns, G = M* M, dense N x N Hermitian.
pub fn col_gram(m: &ComplexMatrix) -> GramMatrix {
    let n = m.cols();
    let t = m.rows();
    let cols: Vec<Vec<Complex64>> = par::map_indexed(n, |j| {
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for (k, o) in out.iter_mut().enumerate().skip(j) {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..t {
                acc += m.at(i, j).conj() * m.at(i, k);
            }
            *o = if j == k {
                Complex64::new(acc.re, 0.0)
            } else {
                acc
            };
        }
        out
    });
    let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
    for j in 0..n {
        for k in j..n {
            entries[j * n + k] = cols[j][k];
            entries[k * n + j] = cols[j][k].conj();
        }
    }
    GramMatrix { dim: n, entries }
}

/// Deterministic power iteration for the top eigenvalue of a PSD operator.
///
/// Two fixed starts are run: the normalized all-ones vector, and the same
/// vector perturbed by a fixed-seed pseudorandom tilt (guards against the
/// all-ones start stagnating in an invariant subspace). The larger Rayleigh
/// quotient wins. Stops when successive quotients differ by less than
/// `tol` relative, capped at 10_000 iterations.
pub(crate) fn psd_top_eigenvalue<F>(dim: usize, tol: f64, apply: F) -> f64
where
    F: Fn(&[Complex64]) -> Vec<Complex64>,
{
    assert!(tol > 0.0 && tol < 1.0, "tol must lie in (0, 1)");
    let ones = vec![Complex64::new(1.0, 0.0); dim];
    let mut tilted = ones.clone();
    let mut rng = rng_from_seed(0x7017_3d5e);
    for z in tilted.iter_mut() {
        *z += Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5) * 0.25;
    }
    let a = power_run(&ones, tol, &apply);
    let b = power_run(&tilted, tol, &apply);
    a.max(b)
}

fn power_run<F>(start: &[Complex64], tol: f64, apply: &F) -> f64
where
    F: Fn(&[Complex64]) -> Vec<Complex64>,
{
    let mut v = start.to_vec();
    let mut norm = vec_norm(&v);
    if norm == 0.0 {
        return 0.0;
    }
    scale(&mut v, 1.0 / norm);
    let mut rho_prev = -1.0_f64;
    for _ in 0..POWER_ITER_CAP {
        let w = apply(&v);
        // Rayleigh quotient <v, Av>; real for PSD operators.
        let rho: f64 = v.iter().zip(&w).map(|(a, b)| (a.conj() * b).re).sum();
        norm = vec_norm(&w);
        if norm <= f64::MIN_POSITIVE {
            return rho.max(0.0);
        }
        if rho_prev >= 0.0 && (rho - rho_prev).abs() <= tol * rho.abs().max(f64::MIN_POSITIVE) {
            return rho.max(0.0);
        }
        rho_prev = rho;
        v = w;
        scale(&mut v, 1.0 / norm);
    }
    rho_prev.max(0.0)
}

pub(crate) fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn scale(v: &mut [Complex64], s: f64) {
    for z in v.iter_mut() {
        *z *= s;
    }
}

/// Operator norm (top singular value) via power iteration on the smaller of
/// M*M and MM*, within relative error `tol`.
pub fn operator_norm(m: &ComplexMatrix, tol: f64) -> f64 {
    assert!(tol > 0.0 && tol < 1.0, "tol must lie in (0, 1)");
    let lambda = if m.cols() <= m.rows() {
        psd_top_eigenvalue(m.cols(), tol, |v| m.adjoint_vec(&m.mat_vec(v)))
    } else {
        psd_top_eigenvalue(m.rows(), tol, |v| m.mat_vec(&m.adjoint_vec(v)))
    };
    lambda.max(0.0).sqrt()
}

/// Top eigenvalue of a dense Hermitian PSD matrix given as a row-major slice.
pub(crate) fn hermitian_top_eigenvalue(a: &[Complex64], dim: usize, tol: f64) -> f64 {
    psd_top_eigenvalue(dim, tol, |v| {
        par::map_indexed(dim, |i| {
            let row = &a[i * dim..(i + 1) * dim];
            let mut acc = Complex64::new(0.0, 0.0);
            for (m, x) in row.iter().zip(v) {
                acc += m * x;
            }
            acc
        })
    })
}

/// Full singular spectrum through the Hermitian eigendecomposition of the
/// smaller Gram matrix. Errors with `CapExceeded` above `DENSE_CAP`.
pub fn singular_values(m: &ComplexMatrix) -> Result<SingularSpectrum> {
    let small = m.rows().min(m.cols());
    if small > DENSE_CAP {
        return Err(Error::cap(format!(
            "min(T, N) = {small} exceeds dense solver cap {DENSE_CAP}"
        )));
    }
    let g = if m.rows() <= m.cols() {
        gram(m)
    } else {
        col_gram(m)
    };
    let dim = g.dim();
    let na = DMatrix::from_fn(dim, dim, |i, j| g.at(i, j));
    let eig = na.symmetric_eigen();
    let mut values: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).collect();
    values.sort_by(|a, b| b.partial_cmp(a).expect("finite singular values"));
    Ok(SingularSpectrum { values })
}

/// Schatten p-norm (sum of p-th powers of singular values, to the 1/p).
/// `p = f64::INFINITY` returns the top singular value.
pub fn schatten_norm(m: &ComplexMatrix, p: f64) -> Result<f64> {
    assert!(p >= 1.0, "Schatten exponent must be >= 1");
    let spectrum = singular_values(m)?;
    if p.is_infinite() {
        return Ok(spectrum.top());
    }
    Ok(spectrum
        .values()
        .iter()
        .map(|s| s.powf(p))
        .sum::<f64>()
        .powf(1.0 / p))
}

/// C = A * B for square row-major complex matrices of side `dim`.
pub(crate) fn matmul_square(a: &[Complex64], b: &[Complex64], dim: usize) -> Vec<Complex64> {
    let rows: Vec<Vec<Complex64>> = par::map_indexed(dim, |i| {
        let mut out = vec![Complex64::new(0.0, 0.0); dim];
        let arow = &a[i * dim..(i + 1) * dim];
        for (k, aik) in arow.iter().enumerate() {
            if aik.re == 0.0 && aik.im == 0.0 {
                continue;
            }
            let brow = &b[k * dim..(k + 1) * dim];
            for (o, bkj) in out.iter_mut().zip(brow) {
                *o += aik * bkj;
            }
        }
        out
    });
    rows.concat()
}
