//! The four certification methods: operator norm, tensor power (with the
//! duplicated-index correction for real matrices), the MM* Gram bound, and
//! the Schatten tensor with flattened-matricization norm. Each produces a
//! `Certificate` of constants from which a sound bound on |W| is evaluated
//! for any threshold and input budget.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    gram, hermitian_top_eigenvalue, matmul_square, operator_norm, psd_top_eigenvalue,
    ComplexMatrix, GramMatrix,
};
use crate::oracle::RowSubset;
use crate::par;

/// Tolerance used for the power iterations behind every certificate.
pub const CERT_TOL: f64 = 1e-10;

/// Method-specific constants of a certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", content = "constants", rename_all = "kebab-case")]
pub enum CertConstants {
    OperatorNorm {
        opnorm_sq: f64,
    },
    Power {
        k: u32,
        diag_corrected: bool,
        tensor_opnorm_sq: f64,
        /// l1 -> l2 norm of the entrywise-squared matrix (simple part), only
        /// for the corrected variant.
        simple_part_bound: Option<f64>,
        /// Operator norm of the off-duplicate residual, only for the
        /// corrected variant.
        residual_norm: Option<f64>,
    },
    MmStar {
        diag_max: f64,
        offdiag_max: f64,
    },
    Schatten {
        r: u32,
        diag_const: f64,
        flat_norm: f64,
    },
}

/// A method-tagged record of certified constants for one matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    #[serde(flatten)]
    pub constants: CertConstants,
    /// (T, N) of the certified matrix.
    pub dims: (usize, usize),
    pub tool_version: String,
}

fn tool_version() -> String {
    env!("CARGO_PKG_VERSION").to_string()
}

/// Evaluated bound on |W|: finite (already clamped to T) or no information.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MaxW {
    Finite(usize),
    Unbounded,
}

impl MaxW {
    /// Resolve to a cardinality, reading Unbounded as "bound is T".
    pub fn resolve(&self, t: usize) -> usize {
        match self {
            MaxW::Finite(w) => *w.min(&t),
            MaxW::Unbounded => t,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LVBound {
    pub max_w: MaxW,
    /// Real-valued bound before flooring and clamping; None when unbounded.
    pub raw_bound: Option<f64>,
    pub binding_constraint: String,
}

/// Certificate from the operator norm alone: |W| <= ||M||^2 B^2 / lambda^2.
pub fn cert_operator(m: &ComplexMatrix) -> Certificate {
    let op = operator_norm(m, CERT_TOL);
    Certificate {
        constants: CertConstants::OperatorNorm { opnorm_sq: op * op },
        dims: (m.rows(), m.cols()),
        tool_version: tool_version(),
    }
}

/// Certificate from the k-th tensor power. ||M^(x)k||^2 equals the top
/// eigenvalue of the entrywise k-th power of the T x T Gram MM*, which keeps
/// the computation matrix-free at any N. With `diag_corrected` (k = 2, real
/// matrices only), the duplicated-index columns are split off as a simple
/// part and the residual norm is certified separately.
pub fn cert_power(m: &ComplexMatrix, k: u32, diag_corrected: bool) -> Result<Certificate> {
    if k < 2 {
        return Err(Error::invalid("tensor power k must be at least 2"));
    }
    let a = gram(m);
    let t = a.dim();
    let hadamard_pow: Vec<Complex64> = a.entries().iter().map(|z| z.powu(k)).collect();
    let tensor_opnorm_sq = hermitian_top_eigenvalue(&hadamard_pow, t, CERT_TOL).max(0.0);

    let (simple, residual) = if diag_corrected {
        if k != 2 {
            return Err(Error::Unsupported {
                msg: "diagonal correction applies to k = 2 only".into(),
            });
        }
        if m.entries().iter().any(|z| z.im != 0.0) {
            return Err(Error::Unsupported {
                msg: "diagonal correction applies to real-valued matrices only".into(),
            });
        }
        let n = m.cols();
        // Simple part: columns (j, j) of M^(x)2 form the entrywise square
        // M^o2 acting on the nonnegative vector of squared inputs; its
        // l1 -> l2 norm is the largest column l2 norm.
        let mut s_col = 0.0_f64;
        for j in 0..n {
            let col_sq: f64 = (0..m.rows()).map(|i| m.at(i, j).re.powi(4)).sum();
            s_col = s_col.max(col_sq.sqrt());
        }
        // Residual Gram: R R* = (MM*)^o2 - (M^o2)(M^o2)^T; PSD because the
        // residual and simple columns are disjoint.
        let msq: Vec<f64> = m.entries().iter().map(|z| z.re * z.re).collect();
        let rows: Vec<Vec<Complex64>> = par::map_indexed(t, |i| {
            let mi = &msq[i * n..(i + 1) * n];
            (0..t)
                .map(|j| {
                    let mj = &msq[j * n..(j + 1) * n];
                    let dot: f64 = mi.iter().zip(mj).map(|(x, y)| x * y).sum();
                    let asq = a.at(i, j) * a.at(i, j);
                    asq - Complex64::new(dot, 0.0)
                })
                .collect()
        });
        let rr: Vec<Complex64> = rows.concat();
        let res_sq = hermitian_top_eigenvalue(&rr, t, CERT_TOL).max(0.0);
        (Some(s_col), Some(res_sq.sqrt()))
    } else {
        (None, None)
    };

    Ok(Certificate {
        constants: CertConstants::Power {
            k,
            diag_corrected,
            tensor_opnorm_sq,
            simple_part_bound: simple,
            residual_norm: residual,
        },
        dims: (m.rows(), m.cols()),
        tool_version: tool_version(),
    })
}

/// Certificate from the Gram entries: d = max diagonal, c = max off-diagonal
/// modulus; the Hermitian minor bound is ||M_W||^2 <= d + (|W| - 1) c.
pub fn cert_mmstar(m: &ComplexMatrix) -> Certificate {
    let a = gram(m);
    Certificate {
        constants: CertConstants::MmStar {
            diag_max: a.diag_max(),
            offdiag_max: a.offdiag_max(),
        },
        dims: (m.rows(), m.cols()),
        tool_version: tool_version(),
    }
}

/// Dimension caps for the flattened-matricization power iteration.
fn flat_cap(r: u32) -> usize {
    match r {
        2 => 4096,
        3 => 1024,
        _ => 256,
    }
}

/// Certificate from the Schatten r-tensor: stores the diagonal constant
/// D0 = max_i A_ii and an upper bound F on the tensor norm of the
/// off-diagonal remainder, computed as the operator norm of the flattened
/// matricization by matrix-free power iteration.
pub fn cert_schatten(m: &ComplexMatrix, r: u32, tol: f64) -> Result<Certificate> {
    if !(2..=4).contains(&r) {
        return Err(Error::Unsupported {
            msg: format!("Schatten tensor order r = {r} outside {{2, 3, 4}}"),
        });
    }
    let t = m.rows();
    if t > flat_cap(r) {
        return Err(Error::cap(format!(
            "T = {t} exceeds the flattening cap {} for r = {r}",
            flat_cap(r)
        )));
    }
    let a = gram(m);
    Ok(Certificate {
        constants: CertConstants::Schatten {
            r,
            diag_const: a.diag_max(),
            flat_norm: flat_delta_norm(&a, r, tol),
        },
        dims: (m.rows(), m.cols()),
        tool_version: tool_version(),
    })
}

/// Operator norm of the flattened off-diagonal Schatten remainder.
pub fn flat_delta_norm(a: &GramMatrix, r: u32, tol: f64) -> f64 {
    let t = a.dim();
    let diag_pow: Vec<f64> = (0..t).map(|i| a.at(i, i).re.powi(r as i32)).collect();
    match r {
        2 => {
            // T x T matrix |A_ij|^2 with zeroed diagonal, real symmetric.
            let b: Vec<f64> = (0..t * t)
                .map(|k| {
                    let (i, j) = (k / t, k % t);
                    if i == j {
                        0.0
                    } else {
                        a.entries()[k].norm_sqr()
                    }
                })
                .collect();
            let apply = |v: &[Complex64]| -> Vec<Complex64> {
                let mid = real_matvec(&b, v, t);
                real_matvec(&b, &mid, t)
            };
            psd_top_eigenvalue(t, tol, apply).max(0.0).sqrt()
        }
        3 => {
            // Operator on C^T: v -> S~ (S~* v); top eigenvalue is ||S~||^2.
            let apply = |v: &[Complex64]| -> Vec<Complex64> {
                let z = flat3_adjoint(a, &diag_pow, v);
                flat3_forward(a, &diag_pow, &z)
            };
            psd_top_eigenvalue(t, tol, apply).max(0.0).sqrt()
        }
        4 => {
            // Operator on C^{T^2}: X -> S~* (S~ X).
            let apply = |x: &[Complex64]| -> Vec<Complex64> {
                let y = flat4_forward(a, &diag_pow, x);
                flat4_adjoint(a, &diag_pow, &y)
            };
            psd_top_eigenvalue(t * t, tol, apply).max(0.0).sqrt()
        }
        _ => unreachable!("r validated in cert_schatten"),
    }
}

fn real_matvec(b: &[f64], v: &[Complex64], dim: usize) -> Vec<Complex64> {
    par::map_indexed(dim, |i| {
        let row = &b[i * dim..(i + 1) * dim];
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, x) in row.iter().zip(v) {
            acc += x * *m;
        }
        acc
    })
}

/// Z = conj(A) o (A Diag(v) A) minus the duplicated-index correction.
fn flat3_adjoint(a: &GramMatrix, diag_pow: &[f64], v: &[Complex64]) -> Vec<Complex64> {
    let t = a.dim();
    // AD = A with column j scaled by v_j, then ADA = AD * A.
    let mut ad = vec![Complex64::new(0.0, 0.0); t * t];
    for i in 0..t {
        for j in 0..t {
            ad[i * t + j] = a.at(i, j) * v[j];
        }
    }
    let ada = matmul_square(&ad, a.entries(), t);
    let mut z: Vec<Complex64> = (0..t * t).map(|k| a.entries()[k].conj() * ada[k]).collect();
    for (i, &dp) in diag_pow.iter().enumerate() {
        z[i * t + i] -= dp * v[i];
    }
    z
}

/// y_t = (A (A o Z) A)_{t,t} minus the duplicated-index correction.
fn flat3_forward(a: &GramMatrix, diag_pow: &[f64], z: &[Complex64]) -> Vec<Complex64> {
    let t = a.dim();
    let az: Vec<Complex64> = (0..t * t).map(|k| a.entries()[k] * z[k]).collect();
    let aaz = matmul_square(a.entries(), &az, t);
    par::map_indexed(t, |i| {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..t {
            acc += aaz[i * t + k] * a.at(k, i);
        }
        acc - diag_pow[i] * z[i * t + i]
    })
}

/// Y = A o (A (A o X) A)^T minus the duplicated-index correction.
fn flat4_forward(a: &GramMatrix, diag_pow: &[f64], x: &[Complex64]) -> Vec<Complex64> {
    let t = a.dim();
    let ax: Vec<Complex64> = (0..t * t).map(|k| a.entries()[k] * x[k]).collect();
    let axa = matmul_square(&matmul_square(a.entries(), &ax, t), a.entries(), t);
    let mut y: Vec<Complex64> = (0..t * t)
        .map(|k| {
            let (i, j) = (k / t, k % t);
            a.entries()[k] * axa[j * t + i]
        })
        .collect();
    for (i, &dp) in diag_pow.iter().enumerate() {
        y[i * t + i] -= dp * x[i * t + i];
    }
    y
}

/// Z = conj(A) o (A (A o Y^T) A) minus the duplicated-index correction.
fn flat4_adjoint(a: &GramMatrix, diag_pow: &[f64], y: &[Complex64]) -> Vec<Complex64> {
    let t = a.dim();
    let w: Vec<Complex64> = (0..t * t)
        .map(|k| {
            let (i, j) = (k / t, k % t);
            a.entries()[k] * y[j * t + i]
        })
        .collect();
    let awa = matmul_square(&matmul_square(a.entries(), &w, t), a.entries(), t);
    let mut z: Vec<Complex64> = (0..t * t).map(|k| a.entries()[k].conj() * awa[k]).collect();
    for (i, &dp) in diag_pow.iter().enumerate() {
        z[i * t + i] -= dp * y[i * t + i];
    }
    z
}

/// Dense flattened remainder S~Delta as an explicit (rows, cols) matrix;
/// test oracle for the matrix-free path, feasible only at tiny T.
#[cfg(test)]
pub(crate) fn flat_delta_dense(a: &GramMatrix, r: u32) -> (usize, usize, Vec<Complex64>) {
    let t = a.dim();
    match r {
        2 => {
            let m: Vec<Complex64> = (0..t * t)
                .map(|k| {
                    let (i, j) = (k / t, k % t);
                    if i == j {
                        Complex64::new(0.0, 0.0)
                    } else {
                        Complex64::new(a.entries()[k].norm_sqr(), 0.0)
                    }
                })
                .collect();
            (t, t, m)
        }
        3 => {
            let mut m = vec![Complex64::new(0.0, 0.0); t * t * t];
            for t1 in 0..t {
                for t2 in 0..t {
                    for t3 in 0..t {
                        let mut v = a.at(t1, t2) * a.at(t2, t3) * a.at(t3, t1);
                        if t1 == t2 && t2 == t3 {
                            v -= a.at(t1, t1).re.powi(3);
                        }
                        m[t1 * t * t + t2 * t + t3] = v;
                    }
                }
            }
            (t, t * t, m)
        }
        4 => {
            let mut m = vec![Complex64::new(0.0, 0.0); t * t * t * t];
            for t1 in 0..t {
                for t2 in 0..t {
                    for t3 in 0..t {
                        for t4 in 0..t {
                            let mut v = a.at(t1, t2) * a.at(t2, t3) * a.at(t3, t4) * a.at(t4, t1);
                            if t1 == t2 && t2 == t3 && t3 == t4 {
                                v -= a.at(t1, t1).re.powi(4);
                            }
                            m[(t1 * t + t2) * t * t + t3 * t + t4] = v;
                        }
                    }
                }
            }
            (t * t, t * t, m)
        }
        _ => unreachable!(),
    }
}

/// S_{M,r}(v_1, ..., v_r) = Trace[D_1 A D_2 A ... D_r A] with A = M M* and
/// D_i = Diag(v_i).
pub fn schatten_tensor_value(a: &GramMatrix, vs: &[Vec<Complex64>]) -> Complex64 {
    let t = a.dim();
    assert!(!vs.is_empty() && vs.iter().all(|v| v.len() == t));
    let diag_a = |v: &[Complex64]| -> Vec<Complex64> {
        let mut m = vec![Complex64::new(0.0, 0.0); t * t];
        for i in 0..t {
            for j in 0..t {
                m[i * t + j] = v[i] * a.at(i, j);
            }
        }
        m
    };
    let mut z = diag_a(&vs[vs.len() - 1]);
    for v in vs[..vs.len() - 1].iter().rev() {
        z = matmul_square(&diag_a(v), &z, t);
    }
    (0..t).map(|i| z[i * t + i]).sum()
}

/// The remainder form S^Delta_{M,r}(v_1, ..., v_r): the full tensor minus the
/// diagonal part with entries A_tt^r.
pub fn schatten_tensor_delta_value(a: &GramMatrix, vs: &[Vec<Complex64>]) -> Complex64 {
    let t = a.dim();
    let r = vs.len() as i32;
    let full = schatten_tensor_value(a, vs);
    let mut diag = Complex64::new(0.0, 0.0);
    for i in 0..t {
        let mut prod = Complex64::new(a.at(i, i).re.powi(r), 0.0);
        for v in vs {
            prod *= v[i];
        }
        diag += prod;
    }
    full - diag
}

/// Trace[(M_W* M_W)^r] through the dense column Gram of the row minor;
/// the independent route against the tensor form.
pub fn schatten_trace_direct(m: &ComplexMatrix, w: &RowSubset, r: u32) -> f64 {
    let minor = m.minor_rows(&w.zero_based());
    let g = crate::linalg::col_gram(&minor);
    let n = g.dim();
    let mut p = g.entries().to_vec();
    for _ in 1..r {
        p = matmul_square(&p, g.entries(), n);
    }
    (0..n).map(|i| p[i * n + i].re).sum()
}

/// The certified upper bound on ||M_W||^2 at cardinality `s` implied by a
/// certificate (the internal inequality, before solving for |W|).
pub fn minor_norm_sq_bound(cert: &Certificate, s: usize) -> f64 {
    let sf = s as f64;
    match &cert.constants {
        CertConstants::OperatorNorm { opnorm_sq } => *opnorm_sq,
        CertConstants::Power {
            k,
            diag_corrected,
            tensor_opnorm_sq,
            simple_part_bound,
            residual_norm,
        } => {
            if *diag_corrected {
                let c = simple_part_bound.unwrap() + residual_norm.unwrap();
                // Holder across the minor rows with exponent k = 2.
                c * sf.sqrt()
            } else {
                let kf = *k as f64;
                tensor_opnorm_sq.powf(1.0 / kf) * sf.powf((kf - 1.0) / kf)
            }
        }
        CertConstants::MmStar {
            diag_max,
            offdiag_max,
        } => diag_max + (sf - 1.0) * offdiag_max,
        CertConstants::Schatten {
            r,
            diag_const,
            flat_norm,
        } => {
            let rf = *r as f64;
            (diag_const.powf(rf) * sf + flat_norm * sf.powf(rf / 2.0)).powf(1.0 / rf)
        }
    }
}

/// Evaluate a certificate at a threshold lambda and input budget B^2,
/// producing a bound on |W| clamped to T. Callers working with the
/// l-infinity normalization pass B^2 = N.
pub fn evaluate(cert: &Certificate, lambda: f64, b_budget_sq: f64) -> LVBound {
    assert!(lambda > 0.0 && b_budget_sq > 0.0);
    let t = cert.dims.0;
    let lam_sq = lambda * lambda;
    let clamp = |raw: f64, binding: &str| -> LVBound {
        let floored = raw.max(0.0).floor();
        let (w, note) = if floored >= t as f64 {
            (t, format!("{binding}; clamped to T = {t}"))
        } else {
            (floored as usize, binding.to_string())
        };
        LVBound {
            max_w: MaxW::Finite(w),
            raw_bound: Some(raw),
            binding_constraint: note,
        }
    };
    match &cert.constants {
        CertConstants::OperatorNorm { opnorm_sq } => {
            let raw = opnorm_sq * b_budget_sq / lam_sq;
            clamp(raw, "|W| lambda^2 <= ||M||^2 B^2")
        }
        CertConstants::Power {
            k,
            diag_corrected,
            tensor_opnorm_sq,
            simple_part_bound,
            residual_norm,
        } => {
            if *diag_corrected {
                let c = simple_part_bound.unwrap() + residual_norm.unwrap();
                let raw = (c * b_budget_sq / lam_sq).powi(2);
                clamp(
                    raw,
                    "|W| lambda^4 <= ((simple + residual) B^2)^2 (corrected k = 2)",
                )
            } else {
                let k2 = 2 * *k as i32;
                let raw = tensor_opnorm_sq * b_budget_sq.powi(*k as i32) / lambda.powi(k2);
                clamp(raw, "|W| lambda^{2k} <= ||M^(x)k||^2 B^{2k}")
            }
        }
        CertConstants::MmStar {
            diag_max,
            offdiag_max,
        } => {
            if lam_sq <= offdiag_max * b_budget_sq {
                LVBound {
                    max_w: MaxW::Unbounded,
                    raw_bound: None,
                    binding_constraint: format!(
                        "lambda^2 <= offdiag * B^2 ({lam_sq:.6e} <= {:.6e}): no information",
                        offdiag_max * b_budget_sq
                    ),
                }
            } else {
                let raw =
                    (diag_max - offdiag_max) * b_budget_sq / (lam_sq - offdiag_max * b_budget_sq);
                clamp(raw, "|W| (lambda^2 - c B^2) <= (d - c) B^2")
            }
        }
        CertConstants::Schatten {
            r,
            diag_const,
            flat_norm,
        } => {
            let rf = *r as f64;
            let consistent = |w: usize| -> bool {
                let wf = w as f64;
                wf.powf(rf) * lambda.powf(2.0 * rf)
                    <= b_budget_sq.powf(rf)
                        * (diag_const.powf(rf) * wf + flat_norm * wf.powf(rf / 2.0))
            };
            if consistent(t) {
                return LVBound {
                    max_w: MaxW::Finite(t),
                    raw_bound: Some(t as f64),
                    binding_constraint: "Schatten inequality consistent at full T".into(),
                };
            }
            // Consistency is downward closed; find the boundary.
            let mut lo = 0usize; // w = 0 is trivially consistent
            let mut hi = t;
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if consistent(mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            LVBound {
                max_w: MaxW::Finite(lo),
                raw_bound: Some(lo as f64),
                binding_constraint: "w^r lambda^{2r} <= B^{2r} (D0^r w + F w^{r/2})".into(),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use crate::zoo::{gen_dirichlet, gen_freqset, gen_random, FrequencySet, RandomDist};
    use rand::Rng;

    fn identity(n: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, n, |i, j| {
            Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)
        })
        .unwrap()
    }

    fn ones(t: usize, n: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(t, n, |_, _| Complex64::new(1.0, 0.0)).unwrap()
    }

    fn random_unit_vec(n: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = rng_from_seed(seed);
        let mut v: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in v.iter_mut() {
            *z /= norm;
        }
        v
    }

    #[test]
    fn operator_cert_identity() {
        let cert = cert_operator(&identity(4));
        let b = evaluate(&cert, 1.0, 4.0);
        assert_eq!(b.max_w, MaxW::Finite(4));
    }

    #[test]
    fn operator_cert_rank_one_no_information() {
        let cert = cert_operator(&ones(5, 3));
        // B^2 = N, lambda = N: raw = T N N / N^2 = T.
        let b = evaluate(&cert, 3.0, 3.0);
        assert_eq!(b.max_w, MaxW::Finite(5));
    }

    #[test]
    fn operator_cert_dirichlet_formula() {
        let m = gen_dirichlet(8, 8);
        let cert = cert_operator(&m);
        let opnorm_sq = match cert.constants {
            CertConstants::OperatorNorm { opnorm_sq } => opnorm_sq,
            _ => unreachable!(),
        };
        let lambda = 8f64.powf(0.75);
        let b = evaluate(&cert, lambda, 8.0);
        let want = (opnorm_sq * 8.0 / lambda.powi(2)).floor().min(8.0) as usize;
        assert_eq!(b.max_w, MaxW::Finite(want));
    }

    #[test]
    fn power_moment_inequality_holds() {
        for seed in 0..100u64 {
            let m = gen_random(9, 5, RandomDist::UnitComplex, seed);
            let cert = cert_power(&m, 2, false).unwrap();
            let tensor_sq = match cert.constants {
                CertConstants::Power {
                    tensor_opnorm_sq, ..
                } => tensor_opnorm_sq,
                _ => unreachable!(),
            };
            let v = random_unit_vec(5, seed ^ 0xabc);
            let mv = m.mat_vec(&v);
            let lhs: f64 = mv.iter().map(|z| z.norm_sqr().powi(2)).sum();
            assert!(
                lhs <= tensor_sq * (1.0 + 1e-7),
                "seed {seed}: {lhs} > {tensor_sq}"
            );
        }
    }

    #[test]
    fn power_pm1_duplicated_index_lower_bound() {
        let m = gen_random(64, 16, RandomDist::Pm1, 17);
        let cert = cert_power(&m, 2, false).unwrap();
        let tensor_sq = match cert.constants {
            CertConstants::Power {
                tensor_opnorm_sq, ..
            } => tensor_opnorm_sq,
            _ => unreachable!(),
        };
        // Duplicated-index vector certifies ||M^(x)2|| >= sqrt(T N) = 32.
        assert!(tensor_sq >= 1024.0 * (1.0 - 1e-9), "{tensor_sq}");
    }

    #[test]
    fn power_matches_explicit_tensor_columns() {
        let m = gen_random(6, 3, RandomDist::UnitComplex, 5);
        let cert = cert_power(&m, 2, false).unwrap();
        let tensor_sq = match cert.constants {
            CertConstants::Power {
                tensor_opnorm_sq, ..
            } => tensor_opnorm_sq,
            _ => unreachable!(),
        };
        // Explicit M^(x)2 with columns indexed by (j1, j2).
        let explicit =
            ComplexMatrix::from_fn(6, 9, |i, c| m.at(i, c / 3) * m.at(i, c % 3)).unwrap();
        let direct = operator_norm(&explicit, 1e-11).powi(2);
        assert!(
            (tensor_sq - direct).abs() <= 1e-6 * direct,
            "{tensor_sq} vs {direct}"
        );
    }

    #[test]
    fn power_bound_within_factor_ten_on_orthogonal_columns() {
        let t = 8usize;
        let grid = FrequencySet::new(
            (0..t)
                .map(|k| std::f64::consts::TAU * k as f64 / t as f64)
                .collect(),
            "dft",
        )
        .unwrap();
        let m = gen_freqset(&grid, t).unwrap();
        let cert = cert_power(&m, 2, false).unwrap();
        let tensor_sq = match cert.constants {
            CertConstants::Power {
                tensor_opnorm_sq, ..
            } => tensor_opnorm_sq,
            _ => unreachable!(),
        };
        let v = random_unit_vec(t, 3);
        let lhs: f64 = m.mat_vec(&v).iter().map(|z| z.norm_sqr().powi(2)).sum();
        assert!(lhs <= tensor_sq * (1.0 + 1e-9));
        assert!(tensor_sq <= 10.0 * lhs, "bound {tensor_sq} vs direct {lhs}");
    }

    #[test]
    fn power_corrected_requires_real_k2() {
        let complex = gen_random(5, 4, RandomDist::UnitComplex, 1);
        assert!(matches!(
            cert_power(&complex, 2, true),
            Err(Error::Unsupported { .. })
        ));
        let real = gen_random(5, 4, RandomDist::Pm1, 1);
        assert!(matches!(
            cert_power(&real, 3, true),
            Err(Error::Unsupported { .. })
        ));
        assert!(cert_power(&real, 3, false).is_ok());
    }

    #[test]
    fn power_corrected_moment_inequality() {
        // The corrected split must still dominate the fourth moment.
        for seed in 0..30u64 {
            let m = gen_random(24, 8, RandomDist::Pm1, seed);
            let cert = cert_power(&m, 2, true).unwrap();
            let (s, r) = match cert.constants {
                CertConstants::Power {
                    simple_part_bound,
                    residual_norm,
                    ..
                } => (simple_part_bound.unwrap(), residual_norm.unwrap()),
                _ => unreachable!(),
            };
            let v = random_unit_vec(8, seed ^ 0x9);
            let lhs: f64 = m.mat_vec(&v).iter().map(|z| z.norm_sqr().powi(2)).sum();
            let rhs = (s + r).powi(2); // B^2 = ||v||^2 = 1
            assert!(lhs <= rhs * (1.0 + 1e-7), "seed {seed}: {lhs} > {rhs}");
        }
    }

    #[test]
    fn operator_rule_recovers_orthogonality_exponent() {
        // With ||M||^2 = T, B^2 = N, lambda = N^sigma the rule reads
        // |W| <= T N^{1 - 2 sigma}.
        let (t, n) = (32usize, 16usize);
        let cert = Certificate {
            constants: CertConstants::OperatorNorm {
                opnorm_sq: t as f64,
            },
            dims: (t, n),
            tool_version: "test".into(),
        };
        for sigma in [0.6, 0.75, 0.9] {
            let lambda = (n as f64).powf(sigma);
            let b = evaluate(&cert, lambda, n as f64);
            let want = t as f64 * (n as f64).powf(1.0 - 2.0 * sigma);
            let raw = b.raw_bound.unwrap();
            assert!(
                (raw - want).abs() <= 1e-12 * want,
                "sigma {sigma}: {raw} vs {want}"
            );
        }
    }

    #[test]
    fn mmstar_identity_and_all_ones() {
        let cert = cert_mmstar(&identity(4));
        let b = evaluate(&cert, 1.0, 4.0);
        assert_eq!(b.max_w, MaxW::Finite(4));

        let cert1 = cert_mmstar(&ones(6, 3));
        // lambda <= sqrt(N) B: no information.
        let b1 = evaluate(&cert1, 1.5, 1.0);
        assert_eq!(b1.max_w, MaxW::Unbounded);
    }

    #[test]
    fn mmstar_dirichlet_gram_constants() {
        let cert = cert_mmstar(&gen_dirichlet(16, 64));
        match cert.constants {
            CertConstants::MmStar {
                diag_max,
                offdiag_max,
            } => {
                assert!((diag_max - 16.0).abs() < 1e-12);
                assert!(offdiag_max < 16.0);
                assert!(offdiag_max > 0.0);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn schatten_orthogonal_rows_closed_form() {
        // DFT frequency grid: A = N Id, so F ~ 0 and
        // max_w = floor((B^2 N / lambda^2)^{r/(r-1)}).
        let t = 8usize;
        let grid = FrequencySet::new(
            (0..t)
                .map(|k| std::f64::consts::TAU * k as f64 / t as f64)
                .collect(),
            "dft",
        )
        .unwrap();
        let m = gen_freqset(&grid, t).unwrap();
        for r in [2u32, 3] {
            let cert = cert_schatten(&m, r, 1e-10).unwrap();
            let lambda = 6.0;
            let b = evaluate(&cert, lambda, 8.0);
            let base: f64 = 8.0 * 8.0 / (lambda * lambda);
            let want = base.powf(r as f64 / (r as f64 - 1.0)).floor() as usize;
            assert_eq!(b.max_w, MaxW::Finite(want.min(t)), "r = {r}");
        }
    }

    #[test]
    fn schatten_tensor_identity_random_subsets() {
        let m = gen_random(14, 6, RandomDist::UnitComplex, 9);
        let a = gram(&m);
        let mut rng = rng_from_seed(33);
        for _ in 0..100 {
            let mut rows: Vec<usize> = Vec::new();
            for i in 0..14 {
                if rng.gen::<bool>() {
                    rows.push(i);
                }
            }
            if rows.is_empty() {
                rows.push(rng.gen_range(0..14));
            }
            let w = RowSubset::from_zero_based(&rows).unwrap();
            let mut ind = vec![Complex64::new(0.0, 0.0); 14];
            for &i in &rows {
                ind[i] = Complex64::new(1.0, 0.0);
            }
            for r in [1u32, 2, 3, 4] {
                let direct = schatten_trace_direct(&m, &w, r);
                let tensor = schatten_tensor_value(&a, &vec![ind.clone(); r as usize]);
                assert!(
                    (tensor.re - direct).abs() <= 1e-9 * direct.abs().max(1.0),
                    "r = {r}: {} vs {}",
                    tensor.re,
                    direct
                );
                assert!(tensor.im.abs() <= 1e-9 * direct.abs().max(1.0));
                assert!(tensor.re >= -1e-9);
            }
        }
    }

    #[test]
    fn flat_norm_power_matches_dense_r3() {
        let m = gen_random(32, 8, RandomDist::UnitComplex, 77);
        let a = gram(&m);
        let f = flat_delta_norm(&a, 3, 1e-10);
        let (rows, cols, dense) = flat_delta_dense(&a, 3);
        // ||B|| via the top eigenvalue of B B* (rows x rows).
        let mut gram_bb = vec![Complex64::new(0.0, 0.0); rows * rows];
        for i in 0..rows {
            for j in 0..rows {
                let mut acc = Complex64::new(0.0, 0.0);
                for c in 0..cols {
                    acc += dense[i * cols + c] * dense[j * cols + c].conj();
                }
                gram_bb[i * rows + j] = acc;
            }
        }
        let dense_norm = hermitian_top_eigenvalue(&gram_bb, rows, 1e-12).sqrt();
        assert!(
            (f - dense_norm).abs() <= 1e-6 * dense_norm,
            "power {f} vs dense {dense_norm}"
        );
    }

    #[test]
    fn flat_norm_power_matches_dense_r2_r4() {
        let m = gen_random(6, 4, RandomDist::Gaussian, 5);
        let a = gram(&m);
        for r in [2u32, 4] {
            let f = flat_delta_norm(&a, r, 1e-11);
            let (rows, cols, dense) = flat_delta_dense(&a, r);
            let mut gram_bb = vec![Complex64::new(0.0, 0.0); rows * rows];
            for i in 0..rows {
                for j in 0..rows {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for c in 0..cols {
                        acc += dense[i * cols + c] * dense[j * cols + c].conj();
                    }
                    gram_bb[i * rows + j] = acc;
                }
            }
            let dense_norm = hermitian_top_eigenvalue(&gram_bb, rows, 1e-12).sqrt();
            assert!(
                (f - dense_norm).abs() <= 1e-6 * dense_norm.max(1e-9),
                "r = {r}: power {f} vs dense {dense_norm}"
            );
        }
    }

    #[test]
    fn flattening_dominates_tensor_on_rank_one_tuples() {
        let m = gen_random(8, 5, RandomDist::UnitComplex, 13);
        let a = gram(&m);
        let r = 3usize;
        let flat = flat_delta_norm(&a, r as u32, 1e-10);
        let mut rng = rng_from_seed(99);
        for trial in 0..1000 {
            let vs: Vec<Vec<Complex64>> = (0..r)
                .map(|_| {
                    (0..8)
                        .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                        .collect()
                })
                .collect();
            let prod_norms: f64 = vs
                .iter()
                .map(|v| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
                .product();
            let val = schatten_tensor_delta_value(&a, &vs).norm();
            assert!(
                val <= flat * prod_norms * (1.0 + 1e-7),
                "trial {trial}: {val} > {}",
                flat * prod_norms
            );
        }
    }

    #[test]
    fn evaluate_monotone_in_lambda_and_budget() {
        let m = gen_random(12, 6, RandomDist::UnitComplex, 21);
        let certs = vec![
            cert_operator(&m),
            cert_power(&m, 2, false).unwrap(),
            cert_mmstar(&m),
            cert_schatten(&m, 3, 1e-9).unwrap(),
        ];
        for cert in &certs {
            let lambdas = [1.0, 2.0, 3.5, 5.0, 8.0];
            let mut prev = usize::MAX;
            for &l in &lambdas {
                let w = evaluate(cert, l, 6.0).max_w.resolve(12);
                assert!(w <= prev, "non-monotone in lambda");
                prev = w;
            }
            let budgets = [1.0, 2.0, 4.0, 6.0, 12.0];
            let mut prev_b = 0usize;
            for &b in &budgets {
                let w = evaluate(cert, 4.0, b).max_w.resolve(12);
                assert!(w >= prev_b, "non-monotone in budget");
                prev_b = w;
            }
        }
    }

    #[test]
    fn certificate_json_round_trip() {
        let m = gen_random(6, 4, RandomDist::Gaussian, 2);
        let cert = cert_schatten(&m, 2, 1e-9).unwrap();
        let js = serde_json::to_string(&cert).unwrap();
        assert!(js.contains("\"method\":\"schatten\""));
        assert!(js.contains("tool_version"));
        let back: Certificate = serde_json::from_str(&js).unwrap();
        assert_eq!(cert, back);
    }
}
