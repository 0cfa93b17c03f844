//! Generators for every matrix family and special construction used by the
//! laboratory, plus the CSV on-disk format. Column convention: degree-N
//! families use the N columns n = N+1, ..., 2N; rows are t = 1, ..., T.
//! Every generator is pure and bit-reproducible from its parameters and seed.

use std::io::{BufRead, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::oracle::RowSubset;
use crate::rng::rng_from_seed;

fn cis(theta: f64) -> Complex64 {
    Complex64::new(theta.cos(), theta.sin())
}

/// A finite multiset of real frequencies (radians per unit t).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencySet {
    pub freqs: Vec<f64>,
    pub label: String,
}

impl FrequencySet {
    pub fn new(freqs: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if freqs.iter().any(|f| !f.is_finite()) {
            return Err(Error::invalid("frequency set contains a non-finite value"));
        }
        Ok(Self {
            freqs,
            label: label.into(),
        })
    }

    /// { ln n : n = N+1, ..., 2N } — the Dirichlet polynomial frequencies.
    pub fn dirichlet(n: u64) -> Self {
        assert!(n >= 2, "degree must be at least 2");
        let freqs = (n + 1..=2 * n).map(|k| (k as f64).ln()).collect();
        Self {
            freqs,
            label: format!("dirichlet(N={n})"),
        }
    }

    /// { sqrt(n/N) : n = N+1, ..., 2N } — the almost-counterexample frequencies.
    pub fn almost_counterexample(n: u64) -> Self {
        assert!(n >= 2, "degree must be at least 2");
        let freqs = (n + 1..=2 * n)
            .map(|k| (k as f64 / n as f64).sqrt())
            .collect();
        Self {
            freqs,
            label: format!("ac(N={n})"),
        }
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }
}

/// Entry distributions for `gen_random`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RandomDist {
    UnitComplex,
    Pm1,
    Gaussian,
}

impl std::str::FromStr for RandomDist {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unit-complex" => Ok(Self::UnitComplex),
            "pm1" => Ok(Self::Pm1),
            "gaussian" => Ok(Self::Gaussian),
            other => Err(Error::Parse {
                msg: format!("unknown distribution `{other}`"),
            }),
        }
    }
}

/// (M_Dir)_{t,n} = e^{i t ln n}, t = 1..T, n = N+1..2N.
pub fn gen_dirichlet(n: u64, t: usize) -> ComplexMatrix {
    assert!(n >= 2 && t >= 1, "need N >= 2 and T >= 1");
    ComplexMatrix::from_fn(t, n as usize, |ti, nj| {
        let freq = ((n + 1 + nj as u64) as f64).ln();
        cis((ti + 1) as f64 * freq)
    })
    .expect("entries are finite by construction")
}

/// The almost-counterexample cousin: entries e^{i t sqrt(n/N)}.
pub fn gen_ac(n: u64, t: usize) -> ComplexMatrix {
    assert!(n >= 2 && t >= 1, "need N >= 2 and T >= 1");
    ComplexMatrix::from_fn(t, n as usize, |ti, nj| {
        let freq = ((n + 1 + nj as u64) as f64 / n as f64).sqrt();
        cis((ti + 1) as f64 * freq)
    })
    .expect("entries are finite by construction")
}

/// Exponential-sum matrix for an arbitrary frequency set: entry (t, xi) = e^{i t xi}.
pub fn gen_freqset(phi: &FrequencySet, t: usize) -> Result<ComplexMatrix> {
    if phi.is_empty() {
        return Err(Error::invalid("frequency set must be non-empty"));
    }
    assert!(t >= 1, "need T >= 1");
    ComplexMatrix::from_fn(t, phi.len(), |ti, j| cis((ti + 1) as f64 * phi.freqs[j]))
}

/// I.i.d. random matrix; entries are drawn row-major so the stream is
/// bit-reproducible for a fixed (T, N, dist, seed).
pub fn gen_random(t: usize, n: usize, dist: RandomDist, seed: u64) -> ComplexMatrix {
    assert!(t >= 1 && n >= 1);
    let mut rng = rng_from_seed(seed);
    let mut entries = Vec::with_capacity(t * n);
    for _ in 0..t * n {
        let z = match dist {
            RandomDist::UnitComplex => cis(rng.gen::<f64>() * std::f64::consts::TAU),
            RandomDist::Pm1 => Complex64::new(if rng.gen::<bool>() { 1.0 } else { -1.0 }, 0.0),
            RandomDist::Gaussian => Complex64::new(rng.sample(StandardNormal), 0.0),
        };
        entries.push(z);
    }
    ComplexMatrix::new(t, n, entries).expect("entries are finite by construction")
}

/// Reading of the planted coordinate law N(0, (T/S)^{1/2}): whether the
/// second parameter is the standard deviation (typical |w_j| = (T/S)^{1/2},
/// which is what the peak size N^sigma of the planted witness requires) or
/// the variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WConvention {
    #[default]
    StdDev,
    Variance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedParams {
    pub n: usize,
    pub alpha: f64,
    pub sigma: f64,
    pub epsilon: f64,
    pub seed: u64,
    pub w_convention: WConvention,
}

/// A planted instance M = A O with its hidden witness data.
#[derive(Debug, Clone)]
pub struct PlantedInstance {
    pub matrix: ComplexMatrix,
    pub support: RowSubset,
    /// Sparse T-vector w; zero outside `support`.
    pub sparse_vector: Vec<f64>,
    /// N-vector v = O^T (sqrt(N) e_1) with M v = sqrt(N) w.
    pub input_witness: Vec<f64>,
    pub params: PlantedParams,
    /// The pre-rotation factor A (T x N, row-major) kept for reconstruction checks.
    pub factor_a: Vec<f64>,
    /// The Haar orthogonal factor O (N x N, row-major).
    pub factor_o: Vec<f64>,
}

impl PlantedInstance {
    pub fn t_rows(&self) -> usize {
        self.matrix.rows()
    }

    /// Recompute A * O and report the Frobenius distance to the stored matrix.
    pub fn reconstruction_error(&self) -> f64 {
        let t = self.matrix.rows();
        let n = self.matrix.cols();
        let mut err = 0.0;
        for i in 0..t {
            for j in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += self.factor_a[i * n + k] * self.factor_o[k * n + j];
                }
                err += (acc - self.matrix.at(i, j).re).powi(2) + self.matrix.at(i, j).im.powi(2);
            }
        }
        err.sqrt()
    }
}

pub fn gen_planted(
    n: usize,
    alpha: f64,
    sigma: f64,
    epsilon: f64,
    seed: u64,
) -> Result<PlantedInstance> {
    gen_planted_with(n, alpha, sigma, epsilon, seed, WConvention::default())
}

/// Mao-Wein planted construction:
/// T = round(N^alpha) rows; support W of size S = round(N^{alpha+1-2sigma-eps});
/// w_j Gaussian on W; A = [w | Gaussian]; O Haar orthogonal from the QR of a
/// seeded Gaussian matrix with sign-fixed R diagonal; M = A O.
pub fn gen_planted_with(
    n: usize,
    alpha: f64,
    sigma: f64,
    epsilon: f64,
    seed: u64,
    w_convention: WConvention,
) -> Result<PlantedInstance> {
    if n < 2 {
        return Err(Error::invalid("planted N must be at least 2"));
    }
    let nf = n as f64;
    let t = nf.powf(alpha).round() as usize;
    if t < n {
        return Err(Error::invalid(format!(
            "T = round(N^alpha) = {t} must be at least N = {n}"
        )));
    }
    let s_real = nf.powf(alpha + 1.0 - 2.0 * sigma - epsilon).round();
    let s = s_real as i64;
    if s < 1 || s as usize > t {
        return Err(Error::DegenerateSize { s, t });
    }
    let s = s as usize;

    let mut rng = rng_from_seed(seed);

    // Support: shuffle-free distinct sampling, then sort.
    let mut support0: Vec<usize> = Vec::with_capacity(s);
    while support0.len() < s {
        let cand = rng.gen_range(0..t);
        if !support0.contains(&cand) {
            support0.push(cand);
        }
    }
    support0.sort_unstable();

    let w_scale = match w_convention {
        WConvention::StdDev => (t as f64 / s as f64).sqrt(),
        WConvention::Variance => (t as f64 / s as f64).powf(0.25),
    };
    let mut sparse_vector = vec![0.0_f64; t];
    for &j in &support0 {
        let g: f64 = rng.sample(StandardNormal);
        sparse_vector[j] = g * w_scale;
    }

    // A: first column w, remaining entries standard Gaussian, row-major.
    let mut factor_a = vec![0.0_f64; t * n];
    for i in 0..t {
        factor_a[i * n] = sparse_vector[i];
        for j in 1..n {
            factor_a[i * n + j] = rng.sample(StandardNormal);
        }
    }

    // Haar orthogonal O via QR of a Gaussian matrix, R diagonal made positive.
    let gauss = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = gauss.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            for i in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    let mut factor_o = vec![0.0_f64; n * n];
    for i in 0..n {
        for j in 0..n {
            factor_o[i * n + j] = q[(i, j)];
        }
    }

    // M = A O.
    let mut entries = Vec::with_capacity(t * n);
    for i in 0..t {
        for j in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                acc += factor_a[i * n + k] * factor_o[k * n + j];
            }
            entries.push(Complex64::new(acc, 0.0));
        }
    }
    let matrix = ComplexMatrix::new(t, n, entries)?;

    // v = O^T (sqrt(N) e_1) = sqrt(N) * first row of O.
    let input_witness: Vec<f64> = (0..n).map(|j| nf.sqrt() * factor_o[j]).collect();

    let support = RowSubset::from_zero_based(&support0)?;
    Ok(PlantedInstance {
        matrix,
        support,
        sparse_vector,
        input_witness,
        params: PlantedParams {
            n,
            alpha,
            sigma,
            epsilon,
            seed,
            w_convention,
        },
        factor_a,
        factor_o,
    })
}

/// Periodic Schrodinger grid matrix for d = 2: rows indexed by
/// (x, t) with x in {0, 1/N, ..., (N-1)/N} and t in {0, 1/N^2, ..., (N^2-1)/N^2}
/// (row order: x-major), columns n in {-N, ..., N}, entry e^{2 pi i (n x + n^2 t)}.
pub fn gen_periodic_schrodinger(nfreq: u64, d: u32) -> Result<ComplexMatrix> {
    if d != 2 {
        return Err(Error::Unsupported {
            msg: format!("periodic Schrodinger grid implemented for d = 2 only, got d = {d}"),
        });
    }
    if nfreq == 0 || nfreq > 32 {
        return Err(Error::cap(format!(
            "periodic Schrodinger frequency cutoff {nfreq} outside [1, 32]"
        )));
    }
    let n = nfreq as usize;
    let rows = n * n * n;
    let cols = 2 * n + 1;
    ComplexMatrix::from_fn(rows, cols, |ri, cj| {
        let xi = ri / (n * n);
        let tj = ri % (n * n);
        let x = xi as f64 / n as f64;
        let tt = tj as f64 / (n * n) as f64;
        let freq = cj as i64 - n as i64;
        let phase = std::f64::consts::TAU * (freq as f64 * x + (freq * freq) as f64 * tt);
        cis(phase)
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CounterexampleParams {
    pub n: u64,
    pub t_span: f64,
    pub sigma: f64,
}

/// The sharp example for the cousin problem: coefficients supported on the
/// squares in (N, 2N], concentrating at the times 2 pi sqrt(N) Z.
#[derive(Debug, Clone)]
pub struct CounterexampleInstance {
    pub matrix: ComplexMatrix,
    /// Coefficient vector over n = N+1..2N.
    pub coeffs: Vec<Complex64>,
    /// Real witness times 2 pi sqrt(N) k inside [0, T]; 1-separated.
    pub witness_times: Vec<f64>,
    /// Guaranteed |D~| value at every witness time: height * (support size).
    pub predicted_peak: f64,
    pub params: CounterexampleParams,
}

impl CounterexampleInstance {
    /// D~(t) = sum_n b_n e^{i t sqrt(n/N)} evaluated at a real time t.
    pub fn eval(&self, t: f64) -> Complex64 {
        let n = self.params.n;
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, b) in self.coeffs.iter().enumerate() {
            if b.re == 0.0 && b.im == 0.0 {
                continue;
            }
            let freq = ((n + 1 + j as u64) as f64 / n as f64).sqrt();
            acc += b * cis(t * freq);
        }
        acc
    }

    pub fn coeff_l2_sq(&self) -> f64 {
        self.coeffs.iter().map(|b| b.norm_sqr()).sum()
    }

    /// The integers closest to the real witness times (the rounded variant).
    pub fn integer_witness_times(&self) -> Vec<u64> {
        self.witness_times
            .iter()
            .map(|&t| t.round() as u64)
            .collect()
    }
}

/// Build the almost counterexample at a given sigma in [1/2, 3/4].
///
/// sigma = 3/4: all squares m^2 in (N, 2N] with height N^{1/4}.
/// sigma < 3/4: the first L' = round(N^{2(sigma - 1/2)}) squares, with height
/// sqrt(N / L') so the l2 budget is saturated.
pub fn gen_almost_counterexample(
    n: u64,
    t_span: f64,
    sigma: f64,
) -> Result<CounterexampleInstance> {
    assert!(
        (0.5..=0.75 + 1e-12).contains(&sigma),
        "sigma must lie in [1/2, 3/4]"
    );
    assert!(n >= 2 && t_span >= 1.0);
    let m_lo = ((n + 1) as f64).sqrt().ceil() as u64;
    let m_hi = ((2 * n) as f64).sqrt().floor() as u64;
    if m_lo > m_hi {
        return Err(Error::NoSquares { n, two_n: 2 * n });
    }
    let squares: Vec<u64> = (m_lo..=m_hi).map(|m| m * m).collect();
    let avail = squares.len();

    let (used, height) = if (sigma - 0.75).abs() < 1e-12 {
        (avail, (n as f64).powf(0.25))
    } else {
        let lprime = (n as f64).powf(2.0 * (sigma - 0.5)).round() as usize;
        let lprime = lprime.clamp(1, avail);
        (lprime, (n as f64 / lprime as f64).sqrt())
    };

    let mut coeffs = vec![Complex64::new(0.0, 0.0); n as usize];
    for &sq in squares.iter().take(used) {
        coeffs[(sq - n - 1) as usize] = Complex64::new(height, 0.0);
    }

    let period = std::f64::consts::TAU * (n as f64).sqrt();
    let mut witness_times = Vec::new();
    let mut k = 0u64;
    loop {
        let tk = period * k as f64;
        if tk > t_span {
            break;
        }
        witness_times.push(tk);
        k += 1;
    }

    let t_rows = t_span.floor().max(1.0) as usize;
    Ok(CounterexampleInstance {
        matrix: gen_ac(n, t_rows),
        coeffs,
        witness_times,
        predicted_peak: height * used as f64,
        params: CounterexampleParams { n, t_span, sigma },
    })
}

/// Short-interval Dirichlet polynomial at the critical length, with the
/// numerically located fat arithmetic progression of its large values.
#[derive(Debug, Clone)]
pub struct FatAPInstance {
    pub interval_start: u64,
    pub interval_len: usize,
    /// Indicator coefficients over n = N+1..2N.
    pub coeffs: Vec<f64>,
    /// Step of the predicted progression: 2 pi n_I.
    pub progression_step: f64,
    /// Predicted half-width of each fattened cell around the progression.
    pub fattening_radius: f64,
    /// Scan points t in [0, T] with |D_{I,0}(t)| >= L/2.
    pub empirical_istar: Vec<f64>,
    pub n: u64,
    pub t_span: f64,
}

impl FatAPInstance {
    pub fn eval(&self, t: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..self.interval_len {
            let freq = ((self.interval_start + 1 + j as u64) as f64).ln();
            acc += cis(t * freq);
        }
        acc
    }
}

/// Scan grid step for locating the empirical large-value set.
const FAT_AP_SCAN_STEP: f64 = 0.25;

/// sinc(u) = 1/2 at u ~ 1.8955; fixes the predicted half-width of the
/// main lobes.
const SINC_HALF_POINT: f64 = 1.895_494_267_034;

pub fn gen_fat_ap(n: u64, t_span: f64, interval_start: u64) -> Result<FatAPInstance> {
    assert!(n >= 2 && t_span >= 1.0);
    let l = (n as f64 / t_span.sqrt()).round() as usize;
    if l < 2 {
        return Err(Error::IntervalOutOfRange {
            msg: format!("critical length round(N/sqrt(T)) = {l} is below 2"),
        });
    }
    if interval_start < n || interval_start + l as u64 > 2 * n {
        return Err(Error::IntervalOutOfRange {
            msg: format!(
                "interval ({}, {}] not contained in ({n}, {}]",
                interval_start,
                interval_start + l as u64,
                2 * n
            ),
        });
    }
    let steps = (t_span / FAT_AP_SCAN_STEP) as usize;
    if steps > 10_000_000 {
        return Err(Error::cap(format!("scan budget exceeded: {steps} points")));
    }

    let mut coeffs = vec![0.0_f64; n as usize];
    for j in 0..l {
        coeffs[(interval_start - n + j as u64) as usize] = 1.0;
    }

    let inst = FatAPInstance {
        interval_start,
        interval_len: l,
        coeffs,
        progression_step: std::f64::consts::TAU * interval_start as f64,
        fattening_radius: 2.0 * SINC_HALF_POINT * interval_start as f64 / l as f64,
        empirical_istar: Vec::new(),
        n,
        t_span,
    };
    let threshold = l as f64 / 2.0;
    let empirical: Vec<f64> = crate::par::map_indexed(steps + 1, |k| {
        let t = k as f64 * FAT_AP_SCAN_STEP;
        (t, inst.eval(t).norm())
    })
    .into_iter()
    .filter(|&(_, v)| v >= threshold)
    .map(|(t, _)| t)
    .collect();

    Ok(FatAPInstance {
        empirical_istar: empirical,
        ..inst
    })
}

// ---------------------------------------------------------------------------
// CSV matrix format: header `T,N,kind`, then T lines of N comma-separated
// re+imi pairs. Floats use the shortest round-trip decimal form, so the
// round trip is bit-exact.
// ---------------------------------------------------------------------------

fn format_entry(z: Complex64) -> String {
    if z.im.is_sign_negative() {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

fn parse_entry(s: &str) -> Result<Complex64> {
    let body = s.strip_suffix('i').ok_or_else(|| Error::Parse {
        msg: format!("entry `{s}` does not end in i"),
    })?;
    let bytes = body.as_bytes();
    let mut split = None;
    for k in (1..bytes.len()).rev() {
        let c = bytes[k];
        if (c == b'+' || c == b'-') && bytes[k - 1] != b'e' && bytes[k - 1] != b'E' {
            split = Some(k);
            break;
        }
    }
    let k = split.ok_or_else(|| Error::Parse {
        msg: format!("entry `{s}` has no imaginary part"),
    })?;
    let re: f64 = body[..k].parse().map_err(|_| Error::Parse {
        msg: format!("bad real part in `{s}`"),
    })?;
    let im_str = if bytes[k] == b'+' {
        &body[k + 1..]
    } else {
        &body[k..]
    };
    let im: f64 = im_str.parse().map_err(|_| Error::Parse {
        msg: format!("bad imaginary part in `{s}`"),
    })?;
    Ok(Complex64::new(re, im))
}

pub fn write_matrix_csv<W: Write>(
    m: &ComplexMatrix,
    kind: &str,
    out: &mut W,
) -> std::io::Result<()> {
    writeln!(out, "{},{},{}", m.rows(), m.cols(), kind)?;
    for i in 0..m.rows() {
        let line: Vec<String> = m.row(i).iter().map(|&z| format_entry(z)).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn read_matrix_csv<R: BufRead>(input: R) -> Result<(ComplexMatrix, String)> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse {
            msg: "empty matrix file".into(),
        })?
        .map_err(|e| Error::Parse { msg: e.to_string() })?;
    let parts: Vec<&str> = header.splitn(3, ',').collect();
    if parts.len() != 3 {
        return Err(Error::Parse {
            msg: format!("bad header `{header}`"),
        });
    }
    let t: usize = parts[0].parse().map_err(|_| Error::Parse {
        msg: format!("bad row count `{}`", parts[0]),
    })?;
    let n: usize = parts[1].parse().map_err(|_| Error::Parse {
        msg: format!("bad col count `{}`", parts[1]),
    })?;
    let kind = parts[2].to_string();
    let mut entries = Vec::with_capacity(t * n);
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::Parse { msg: e.to_string() })?;
        if line.is_empty() && i >= t {
            continue;
        }
        for cell in line.split(',') {
            entries.push(parse_entry(cell)?);
        }
    }
    let m = ComplexMatrix::new(t, n, entries)?;
    Ok((m, kind))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{gram, operator_norm, singular_values};

    #[test]
    fn dirichlet_definition_and_modulus() {
        let m = gen_dirichlet(4, 3);
        // Entry at (t=1, n=5) = e^{i ln 5}.
        let want = cis(5.0_f64.ln());
        assert!((m.at(0, 0) - want).norm() < 1e-15);
        for i in 0..3 {
            for j in 0..4 {
                assert!((m.at(i, j).norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dirichlet_orthogonality_regime() {
        let m = gen_dirichlet(8, 8);
        let op2 = operator_norm(&m, 1e-9).powi(2);
        assert!(op2 <= 10.0 * 8.0, "opnorm^2 = {op2}");
    }

    #[test]
    fn ac_definition() {
        let m = gen_ac(4, 2);
        // Entry at (t=1, n=8) = e^{i sqrt 2}.
        let want = cis(2.0_f64.sqrt());
        assert!((m.at(0, 3) - want).norm() < 1e-15);
        for i in 0..2 {
            for j in 0..4 {
                assert!((m.at(i, j).norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ac_square_columns_form_progression() {
        let n = 16u64;
        // Columns n = m^2 have frequency exactly m / sqrt(N).
        for m in 5..=5u64 {
            let sq = m * m; // 25 in (16, 32]
            let freq = (sq as f64 / n as f64).sqrt();
            assert!((freq - m as f64 / (n as f64).sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn freqset_matches_dirichlet_and_dft_orthogonality() {
        let n = 6u64;
        let phi = FrequencySet::dirichlet(n);
        let a = gen_freqset(&phi, 9).unwrap();
        let b = gen_dirichlet(n, 9);
        for i in 0..9 {
            for j in 0..n as usize {
                assert!((a.at(i, j) - b.at(i, j)).norm() <= 1e-12);
            }
        }

        // Phi = {0} gives the all-ones column.
        let zero = FrequencySet::new(vec![0.0], "zero").unwrap();
        let z = gen_freqset(&zero, 5).unwrap();
        for i in 0..5 {
            assert!((z.at(i, 0) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }

        // Full DFT grid: all singular values sqrt(T).
        let t = 8usize;
        let grid = FrequencySet::new(
            (0..t)
                .map(|k| std::f64::consts::TAU * k as f64 / t as f64)
                .collect(),
            "dft",
        )
        .unwrap();
        let m = gen_freqset(&grid, t).unwrap();
        let spectrum = singular_values(&m).unwrap();
        for &s in spectrum.values() {
            assert!((s - (t as f64).sqrt()).abs() < 1e-9);
        }
    }

    #[test]
    fn random_families_have_expected_support() {
        let m = gen_random(6, 5, RandomDist::Pm1, 42);
        for e in m.entries() {
            assert!(e.im == 0.0 && (e.re == 1.0 || e.re == -1.0));
        }
        let u = gen_random(6, 5, RandomDist::UnitComplex, 42);
        for e in u.entries() {
            assert!((e.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn random_is_bit_reproducible() {
        let a = gen_random(7, 9, RandomDist::Gaussian, 123);
        let b = gen_random(7, 9, RandomDist::Gaussian, 123);
        assert_eq!(a, b);
        let c = gen_random(7, 9, RandomDist::Gaussian, 124);
        assert_ne!(a, c);
    }

    #[test]
    fn gaussian_opnorm_concentration() {
        // Monte Carlo over 50 seeds; sqrt(T)/2 <= opnorm <= 2.5 sqrt(T).
        let t = 200;
        let lo = (t as f64).sqrt() * 0.5;
        let hi = (t as f64).sqrt() * 2.5;
        let mut pass = 0;
        for seed in 0..50 {
            let m = gen_random(t, 100, RandomDist::Gaussian, seed);
            let op = operator_norm(&m, 1e-6);
            if op >= lo && op <= hi {
                pass += 1;
            }
        }
        assert!(pass >= 50, "only {pass}/50 in range");
    }

    #[test]
    fn planted_witness_identity_and_support_size() {
        let inst = gen_planted(16, 1.4, 0.8, 0.02, 7).unwrap();
        let t = inst.t_rows();
        assert_eq!(t, (16f64.powf(1.4)).round() as usize);
        let s_expect = (16f64.powf(1.4 + 1.0 - 1.6 - 0.02)).round() as usize;
        assert_eq!(inst.support.len(), s_expect);

        // M v = sqrt(N) w within 1e-9 relative.
        let v: Vec<Complex64> = inst
            .input_witness
            .iter()
            .map(|&x| Complex64::new(x, 0.0))
            .collect();
        let mv = inst.matrix.mat_vec(&v);
        let scale = (16f64).sqrt();
        let mut err = 0.0;
        let mut mag = 0.0;
        for (i, z) in mv.iter().enumerate() {
            err += (z.re - scale * inst.sparse_vector[i]).powi(2) + z.im.powi(2);
            mag += (scale * inst.sparse_vector[i]).powi(2);
        }
        assert!(err.sqrt() <= 1e-9 * mag.sqrt().max(1.0));

        // w vanishes off the support.
        let sup: Vec<usize> = inst.support.zero_based();
        for (j, &wj) in inst.sparse_vector.iter().enumerate() {
            if !sup.contains(&j) {
                assert_eq!(wj, 0.0);
            }
        }

        // Reconstruction A * O is exactly the stored matrix (same arithmetic path).
        assert_eq!(inst.reconstruction_error(), 0.0);
    }

    #[test]
    fn planted_degenerate_size_rejected() {
        // Exponent alpha + 1 - 2 sigma - eps = -0.23 rounds S to zero.
        let r = gen_planted(64, 1.05, 0.99, 0.3, 1);
        assert!(matches!(r, Err(Error::DegenerateSize { .. })));
    }

    #[test]
    fn periodic_schrodinger_grid() {
        let m = gen_periodic_schrodinger(4, 2).unwrap();
        assert_eq!(m.rows(), 64);
        assert_eq!(m.cols(), 9);
        // Column n = 0 is all ones.
        for i in 0..m.rows() {
            assert!((m.at(i, 4) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
        // Columns with distinct characters (n mod N, n^2 mod N^2) are orthogonal.
        let nn = 4i64;
        for a in 0..m.cols() {
            for b in (a + 1)..m.cols() {
                let na = a as i64 - nn;
                let nb = b as i64 - nn;
                let same_char =
                    (na - nb).rem_euclid(nn) == 0 && (na * na - nb * nb).rem_euclid(nn * nn) == 0;
                let mut ip = Complex64::new(0.0, 0.0);
                for i in 0..m.rows() {
                    ip += m.at(i, a) * m.at(i, b).conj();
                }
                if same_char {
                    assert!((ip.norm() - m.rows() as f64).abs() < 1e-9);
                } else {
                    assert!(ip.norm() < 1e-9, "cols {a},{b}: {}", ip.norm());
                }
            }
        }
        // Frobenius identity for unit-modulus entries.
        let m8 = gen_periodic_schrodinger(8, 2).unwrap();
        let spectrum = singular_values(&m8).unwrap();
        let want = (m8.rows() * m8.cols()) as f64;
        assert!((spectrum.sum_sq() - want).abs() < 1e-9 * want);
    }

    #[test]
    fn periodic_schrodinger_rejects_d3() {
        assert!(matches!(
            gen_periodic_schrodinger(4, 3),
            Err(Error::Unsupported { .. })
        ));
    }

    #[test]
    fn almost_counterexample_periodicity() {
        let inst = gen_almost_counterexample(100, 1000.0, 0.75).unwrap();
        // Squares in (100, 200]: 121, 144, 169, 196.
        let l = 4.0;
        let height = 100f64.powf(0.25);
        assert!((inst.predicted_peak - height * l).abs() < 1e-12);
        assert_eq!(inst.witness_times.len(), 16);
        assert!((inst.eval(0.0).norm() - height * l).abs() < 1e-9);
        for &tk in &inst.witness_times {
            let v = inst.eval(tk).norm();
            assert!(
                (v - inst.predicted_peak).abs() <= 1e-9 * inst.predicted_peak,
                "at t = {tk}: {v}"
            );
        }
        // l2 budget: sqrt(N) * L <= N when L <= sqrt(N).
        assert!((inst.coeff_l2_sq() - 100f64.sqrt() * l).abs() < 1e-9);
        assert!(inst.coeff_l2_sq() <= 100.0);
    }

    #[test]
    fn almost_counterexample_short_progression() {
        let inst = gen_almost_counterexample(100, 500.0, 0.6).unwrap();
        // L' = round(100^{0.2}) = 3 squares, height sqrt(100/3).
        let used: usize = inst.coeffs.iter().filter(|b| b.norm() > 0.0).count();
        assert_eq!(used, 3);
        assert!((inst.coeff_l2_sq() - 100.0).abs() < 1e-9);
        for &tk in &inst.witness_times {
            let v = inst.eval(tk).norm();
            assert!((v - inst.predicted_peak).abs() <= 1e-9 * inst.predicted_peak);
        }
    }

    #[test]
    fn almost_counterexample_no_squares() {
        // (4, 8] contains no perfect square.
        assert!(matches!(
            gen_almost_counterexample(4, 10.0, 0.75),
            Err(Error::NoSquares { .. })
        ));
    }

    #[test]
    fn fat_ap_critical_interval() {
        let inst = gen_fat_ap(256, 1024.0, 300).unwrap();
        assert_eq!(inst.interval_len, 8);
        assert!((inst.eval(0.0).norm() - 8.0).abs() < 1e-12);
        assert!(!inst.empirical_istar.is_empty());
        assert!(inst.empirical_istar.contains(&0.0));
        // Residue clustering: every empirical point sits within step/4 of the
        // progression 2 pi n_I Z.
        let step = inst.progression_step;
        for &t in &inst.empirical_istar {
            let mut res = t.rem_euclid(step);
            if res > step / 2.0 {
                res -= step;
            }
            assert!(
                res.abs() <= step / 4.0,
                "t = {t} has residue {res} vs step {step}"
            );
        }
    }

    #[test]
    fn fat_ap_out_of_range() {
        assert!(matches!(
            gen_fat_ap(256, 1024.0, 200),
            Err(Error::IntervalOutOfRange { .. })
        ));
        assert!(matches!(
            gen_fat_ap(256, 1024.0, 510),
            Err(Error::IntervalOutOfRange { .. })
        ));
    }

    #[test]
    fn matrix_csv_round_trip_is_bit_exact() {
        let m = gen_random(5, 4, RandomDist::Gaussian, 99);
        let mut buf = Vec::new();
        write_matrix_csv(&m, "random-gaussian", &mut buf).unwrap();
        let (back, kind) = read_matrix_csv(&buf[..]).unwrap();
        assert_eq!(kind, "random-gaussian");
        assert_eq!(m, back);

        let d = gen_dirichlet(6, 4);
        let mut buf2 = Vec::new();
        write_matrix_csv(&d, "dirichlet", &mut buf2).unwrap();
        let (back2, _) = read_matrix_csv(&buf2[..]).unwrap();
        assert_eq!(d, back2);
    }

    #[test]
    fn csv_entry_forms() {
        for z in [
            Complex64::new(1.5, -0.25),
            Complex64::new(-3.25e-7, 2.0e-9),
            Complex64::new(0.0, -0.0),
            Complex64::new(f64::MIN_POSITIVE, -f64::MIN_POSITIVE),
        ] {
            let s = format_entry(z);
            let back = parse_entry(&s).unwrap();
            assert_eq!(z.re.to_bits(), back.re.to_bits(), "{s}");
            assert_eq!(z.im.to_bits(), back.im.to_bits(), "{s}");
        }
    }

    #[test]
    fn gram_diag_for_unit_modulus_families() {
        let m = gen_dirichlet(8, 12);
        let a = gram(&m);
        for i in 0..12 {
            assert!((a.at(i, i).re - 8.0).abs() < 1e-12);
        }
    }
}
