//! Majorant machinery: the coefficient-modulus majorant of a trigonometric
//! polynomial, the even-moment circle inequality (exact via coefficient
//! convolutions), the difference-set inequality, the Dirichlet majorant
//! profile, and the arithmetic-progression energy bound.

use std::collections::HashMap;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::zoo::FrequencySet;

/// D(t) = sum_xi b_xi e^{i t xi}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigPolynomial {
    pub freqs: FrequencySet,
    pub coeffs: Vec<Complex64>,
}

impl TrigPolynomial {
    pub fn new(freqs: FrequencySet, coeffs: Vec<Complex64>) -> Result<Self> {
        if freqs.len() != coeffs.len() {
            return Err(Error::DimensionMismatch {
                expected: freqs.len(),
                got: coeffs.len(),
            });
        }
        Ok(Self { freqs, coeffs })
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (&xi, b) in self.freqs.freqs.iter().zip(&self.coeffs) {
            let phase = t * xi;
            acc += b * Complex64::new(phase.cos(), phase.sin());
        }
        acc
    }

    /// Full-coefficient Dirichlet majorant: all b_n = 1 on (N, 2N].
    pub fn dirichlet_major(n: u64) -> Self {
        let freqs = FrequencySet::dirichlet(n);
        let coeffs = vec![Complex64::new(1.0, 0.0); n as usize];
        Self { freqs, coeffs }
    }
}

/// Replace every coefficient by its modulus (the minimal majorant).
pub fn majorize(d: &TrigPolynomial) -> TrigPolynomial {
    TrigPolynomial {
        freqs: d.freqs.clone(),
        coeffs: d
            .coeffs
            .iter()
            .map(|b| Complex64::new(b.norm(), 0.0))
            .collect(),
    }
}

/// Verdict of a majorant comparison.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MajorantCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

fn verdict(lhs: f64, rhs: f64) -> MajorantCheck {
    MajorantCheck {
        lhs,
        rhs,
        holds: lhs <= rhs + 1e-9 * rhs.abs(),
    }
}

/// Integer frequency index k with xi = 2 pi k, or an error.
fn integer_freq_indices(freqs: &[f64]) -> Result<Vec<i64>> {
    let mut out = Vec::with_capacity(freqs.len());
    for (index, &xi) in freqs.iter().enumerate() {
        let k = xi / std::f64::consts::TAU;
        let rounded = k.round();
        if (k - rounded).abs() > 1e-9 {
            return Err(Error::NonIntegerFrequencies { index });
        }
        out.push(rounded as i64);
    }
    Ok(out)
}

/// s-fold convolution power of an integer-indexed coefficient map.
fn conv_power(base: &HashMap<i64, Complex64>, s: u32) -> HashMap<i64, Complex64> {
    let mut acc = base.clone();
    for _ in 1..s {
        let mut next: HashMap<i64, Complex64> = HashMap::new();
        for (&ka, &va) in &acc {
            for (&kb, &vb) in base {
                *next.entry(ka + kb).or_insert(Complex64::new(0.0, 0.0)) += va * vb;
            }
        }
        acc = next;
    }
    acc
}

/// Hardy-Littlewood even-moment inequality over the circle:
/// int_0^1 |D|^{2s} <= int_0^1 |D_major|^{2s}, both sides computed exactly
/// through the coefficients of the s-th convolution power (Parseval).
pub fn circle_majorant_check(d: &TrigPolynomial, s: u32) -> Result<MajorantCheck> {
    assert!(s >= 1, "s must be a natural number");
    let keys = integer_freq_indices(&d.freqs.freqs)?;
    let span = keys.iter().map(|k| k.unsigned_abs()).max().unwrap_or(0);
    if (span as u128 + 1) * s as u128 > 3_000_000 {
        return Err(Error::BudgetExceeded {
            msg: format!("convolution span {span} * s = {s} exceeds the DFT budget"),
        });
    }
    let mut base: HashMap<i64, Complex64> = HashMap::new();
    let mut base_major: HashMap<i64, Complex64> = HashMap::new();
    for (&k, &b) in keys.iter().zip(&d.coeffs) {
        *base.entry(k).or_insert(Complex64::new(0.0, 0.0)) += b;
    }
    // Majorize after collapsing duplicate frequencies, so multiset inputs
    // majorize their combined coefficient.
    for (&k, v) in &base {
        base_major.insert(k, Complex64::new(v.norm(), 0.0));
    }
    let lhs: f64 = conv_power(&base, s).values().map(|v| v.norm_sqr()).sum();
    let rhs: f64 = conv_power(&base_major, s)
        .values()
        .map(|v| v.norm_sqr())
        .sum();
    Ok(verdict(lhs, rhs))
}

/// Heath-Brown difference-set inequality:
/// sum_{t1,t2 in T} |D(t1-t2)|^{2s} <= same sum for D_major.
pub fn diffset_majorant_check(d: &TrigPolynomial, tees: &[f64], s: u32) -> Result<MajorantCheck> {
    assert!(s >= 1, "s must be a natural number");
    if tees.is_empty() {
        return Err(Error::invalid("point set T must be non-empty"));
    }
    let work = (tees.len() as u128).pow(2) * (d.freqs.len() as u128) * s as u128;
    if work > 100_000_000 {
        return Err(Error::BudgetExceeded {
            msg: format!("|T|^2 |Phi| s = {work} exceeds the 1e8 budget"),
        });
    }
    let major = majorize(d);
    let pairs: Vec<(f64, f64)> = {
        let rows: Vec<Vec<(f64, f64)>> = par::map_indexed(tees.len(), |i| {
            tees.iter()
                .map(|&t2| {
                    let dt = tees[i] - t2;
                    (
                        d.eval(dt).norm_sqr().powi(s as i32),
                        major.eval(dt).norm_sqr().powi(s as i32),
                    )
                })
                .collect()
        });
        rows.concat()
    };
    let lhs: f64 = pairs.iter().map(|p| p.0).sum();
    let rhs: f64 = pairs.iter().map(|p| p.1).sum();
    Ok(verdict(lhs, rhs))
}

/// Sampled profile of |D_major(t)| = |sum_{n in (N, 2N]} e^{i t ln n}|.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MajorantProfile {
    pub samples: Vec<(f64, f64)>,
    /// Max over samples with t >= 1.
    pub max_beyond_unit: f64,
    /// max_beyond_unit / sqrt(N): the conjectured square-root cancellation rate.
    pub ratio_to_sqrt_n: f64,
}

impl MajorantProfile {
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "t,majorant")?;
        for (t, v) in &self.samples {
            writeln!(out, "{t},{v}")?;
        }
        Ok(())
    }
}

pub fn dirichlet_majorant_profile(n: u64, t_span: f64, step: f64) -> Result<MajorantProfile> {
    assert!(step > 0.0 && t_span >= 1.0);
    let count = (t_span / step) as usize + 1;
    if count > 10_000_000 {
        return Err(Error::cap(format!("scan budget exceeded: {count} points")));
    }
    let major = TrigPolynomial::dirichlet_major(n);
    let samples: Vec<(f64, f64)> = par::map_indexed(count, |k| {
        let t = k as f64 * step;
        (t, major.eval(t).norm())
    });
    let max_beyond_unit = samples
        .iter()
        .filter(|(t, _)| *t >= 1.0)
        .map(|&(_, v)| v)
        .fold(0.0_f64, f64::max);
    Ok(MajorantProfile {
        samples,
        max_beyond_unit,
        ratio_to_sqrt_n: max_beyond_unit / (n as f64).sqrt(),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ApEnergyCheck {
    pub sum_on_w: f64,
    pub hb_bound: f64,
    pub holds: bool,
}

/// Validate that `w` is a symmetric arithmetic progression {j a : |j| <= J}
/// and return (a, J).
fn symmetric_ap_params(w: &[f64]) -> Result<(f64, usize)> {
    if w.is_empty() || w.len().is_multiple_of(2) {
        return Err(Error::NotAnAp {
            msg: "need an odd number of points {j a : |j| <= J}".into(),
        });
    }
    let mut sorted = w.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite points"));
    let j = (sorted.len() - 1) / 2;
    let mid = sorted[j];
    if mid.abs() > 1e-9 {
        return Err(Error::NotAnAp {
            msg: format!("progression not centered at 0 (midpoint {mid})"),
        });
    }
    if j == 0 {
        return Ok((0.0, 0));
    }
    let alpha = sorted[j + 1];
    let scale = alpha.abs().max(1.0);
    for (idx, &x) in sorted.iter().enumerate() {
        let want = (idx as f64 - j as f64) * alpha;
        if (x - want).abs() > 1e-9 * scale {
            return Err(Error::NotAnAp {
                msg: format!("point {x} deviates from step {alpha}"),
            });
        }
    }
    Ok((alpha, j))
}

/// Energy bound on a symmetric AP: each jα in W is covered by W - W with
/// multiplicity 2J+1-|j| >= J+1, so
/// sum_{t in W} |D(t)|^{2s} <= (J+1)^{-1} sum_{t1,t2 in W} |D_major(t1-t2)|^{2s}.
pub fn ap_energy_bound_check(d: &TrigPolynomial, w: &[f64], s: u32) -> Result<ApEnergyCheck> {
    let (alpha, j) = symmetric_ap_params(w)?;
    let jj = j as i64;
    let sum_on_w: f64 = (-jj..=jj)
        .map(|k| d.eval(k as f64 * alpha).norm_sqr().powi(s as i32))
        .sum();
    let major = majorize(d);
    let hb_double: f64 = (-jj..=jj)
        .flat_map(|k1| {
            let major = &major;
            (-jj..=jj).map(move |k2| {
                major
                    .eval((k1 - k2) as f64 * alpha)
                    .norm_sqr()
                    .powi(s as i32)
            })
        })
        .sum();
    let hb_bound = hb_double / (j as f64 + 1.0);
    Ok(ApEnergyCheck {
        sum_on_w,
        hb_bound,
        holds: sum_on_w <= hb_bound * (1.0 + 1e-9),
    })
}
