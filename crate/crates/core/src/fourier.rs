//! Fourier-analytic structure: exponential sums of integer sets, additive
//! energy two ways, cyclic difference multisets, the Fourier form of the
//! Schatten trace, and the smoothed difference-density with its rational
//! spike decomposition.

use std::collections::HashMap;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::zoo::FrequencySet;

/// Strictly increasing non-negative integers W.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegerSet {
    elements: Vec<u64>,
}

impl IntegerSet {
    pub fn new(elements: Vec<u64>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::invalid("integer set must be non-empty"));
        }
        if elements.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("elements must be strictly increasing"));
        }
        Ok(Self { elements })
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn max(&self) -> u64 {
        *self.elements.last().expect("non-empty")
    }
}

/// W_hat(xi) = sum_{t in W} e^{i xi t}; W_hat(0) = |W|.
pub fn fourier_of_set(w: &IntegerSet, xi: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for &t in w.elements() {
        let phase = xi * t as f64;
        acc += Complex64::new(phase.cos(), phase.sin());
    }
    acc
}

/// Additive energy E(W) = #{(t1,t2,t3,t4) in W^4 : t1 + t2 = t3 + t4},
/// via the histogram of pairwise sums. Cap |W| <= 1e5.
pub fn additive_energy(w: &IntegerSet) -> Result<u64> {
    if w.len() > 100_000 {
        return Err(Error::cap(format!(
            "|W| = {} exceeds the sumset-histogram cap 1e5",
            w.len()
        )));
    }
    let mut hist: HashMap<u64, u64> = HashMap::new();
    for &a in w.elements() {
        for &b in w.elements() {
            *hist.entry(a + b).or_insert(0) += 1;
        }
    }
    Ok(hist.values().map(|&r| r * r).sum())
}

/// Additive energy via the discrete Fourier identity
/// E(W) = (1/L) sum_k |W_hat(2 pi k / L)|^4, exact when L > 2 max(W).
pub fn additive_energy_dft(w: &IntegerSet, grid_len: u64) -> Result<u64> {
    if grid_len <= 2 * w.max() {
        return Err(Error::GridTooSmall {
            grid_len,
            max: w.max(),
        });
    }
    let l = grid_len as usize;
    let terms: Vec<f64> = par::map_indexed(l, |k| {
        let xi = std::f64::consts::TAU * k as f64 / grid_len as f64;
        fourier_of_set(w, xi).norm_sqr().powi(2)
    });
    let total: f64 = terms.iter().sum();
    Ok((total / grid_len as f64).round() as u64)
}

/// Lazy iterator over the cyclic difference multiset
/// D^r Phi = {(xi_1 - xi_2, ..., xi_r - xi_1)}, r in {2, 3}.
pub struct CyclicDiffs<'a> {
    freqs: &'a [f64],
    r: usize,
    counter: u64,
    total: u64,
}

impl<'a> Iterator for CyclicDiffs<'a> {
    type Item = Vec<f64>;

    fn next(&mut self) -> Option<Vec<f64>> {
        if self.counter >= self.total {
            return None;
        }
        let n = self.freqs.len() as u64;
        let mut idx = self.counter;
        self.counter += 1;
        let mut tuple_idx = vec![0usize; self.r];
        for slot in (0..self.r).rev() {
            tuple_idx[slot] = (idx % n) as usize;
            idx /= n;
        }
        let mut out = Vec::with_capacity(self.r);
        for k in 0..self.r {
            let a = self.freqs[tuple_idx[k]];
            let b = self.freqs[tuple_idx[(k + 1) % self.r]];
            out.push(a - b);
        }
        Some(out)
    }
}

pub fn cyclic_diff_multiset(phi: &FrequencySet, r: usize) -> Result<CyclicDiffs<'_>> {
    if !(2..=3).contains(&r) {
        return Err(Error::Unsupported {
            msg: format!("cyclic difference order r = {r} outside {{2, 3}}"),
        });
    }
    let total = (phi.len() as u64).pow(r as u32);
    Ok(CyclicDiffs {
        freqs: &phi.freqs,
        r,
        counter: 0,
        total,
    })
}

/// Fourier-side Schatten trace
/// sum_{xi_1..xi_r in Phi} W_hat(xi_1 - xi_2) ... W_hat(xi_r - xi_1)
/// with the e^{-i t xi} convention for W_hat, which makes the sum equal
/// Trace[(M_{Phi,W}* M_{Phi,W})^r].
pub fn schatten_trace_fourier(phi: &FrequencySet, w: &IntegerSet, r: u32) -> Result<Complex64> {
    if r == 0 {
        return Err(Error::invalid("r must be at least 1"));
    }
    let d = phi.len();
    let tuples = (d as f64).powi(r as i32);
    if tuples > 1e8 {
        return Err(Error::BudgetExceeded {
            msg: format!("|Phi|^r = {tuples:.3e} exceeds the 1e8 tuple budget"),
        });
    }
    // Cache W_hat on all pairwise differences; rows are minus-convention.
    let hat: Vec<Vec<Complex64>> = par::map_indexed(d, |i| {
        (0..d)
            .map(|j| fourier_of_set(w, phi.freqs[i] - phi.freqs[j]).conj())
            .collect()
    });
    if r == 1 {
        let acc: Complex64 = hat.iter().enumerate().map(|(i, row)| row[i]).sum();
        return Ok(acc);
    }
    // Sum over all index tuples of the cyclic product, parallel over xi_1.
    let partials: Vec<Complex64> = par::map_indexed(d, |first| {
        let mut idx = vec![0usize; r as usize];
        idx[0] = first;
        let mut acc = Complex64::new(0.0, 0.0);
        sum_tuples(&hat, &mut idx, 1, &mut acc);
        acc
    });
    Ok(partials.into_iter().sum())
}

fn sum_tuples(hat: &[Vec<Complex64>], idx: &mut [usize], depth: usize, acc: &mut Complex64) {
    let d = hat.len();
    if depth == idx.len() {
        let mut prod = Complex64::new(1.0, 0.0);
        for k in 0..idx.len() {
            prod *= hat[idx[k]][idx[(k + 1) % idx.len()]];
        }
        *acc += prod;
        return;
    }
    for j in 0..d {
        idx[depth] = j;
        sum_tuples(hat, idx, depth + 1, acc);
    }
}

/// Gaussian-smoothed density of the pairwise difference multiset Phi - Phi
/// on a uniform grid. Kernel: unit-mass Gaussian with standard deviation
/// `delta`, truncated at 8 delta.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityProfile {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub delta: f64,
}

impl DensityProfile {
    /// Trapezoid mass of the sampled density.
    pub fn total_mass(&self) -> f64 {
        if self.grid.len() < 2 {
            return 0.0;
        }
        let h = self.grid[1] - self.grid[0];
        let mut acc = 0.0;
        for k in 0..self.values.len() - 1 {
            acc += 0.5 * (self.values[k] + self.values[k + 1]) * h;
        }
        acc
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "xi,density")?;
        for (x, v) in self.grid.iter().zip(&self.values) {
            writeln!(out, "{x},{v}")?;
        }
        Ok(())
    }
}

fn pairwise_diffs(phi: &FrequencySet) -> Result<Vec<f64>> {
    let n = phi.len() as u128;
    if n * n > 100_000_000 {
        return Err(Error::cap(format!(
            "|Phi|^2 = {} exceeds the pairwise cap 1e8",
            n * n
        )));
    }
    let mut diffs = Vec::with_capacity((n * n) as usize);
    for &a in &phi.freqs {
        for &b in &phi.freqs {
            diffs.push(a - b);
        }
    }
    Ok(diffs)
}

pub fn density_profile(phi: &FrequencySet, delta: f64, grid_len: usize) -> Result<DensityProfile> {
    assert!(delta > 0.0 && grid_len >= 2);
    let diffs = pairwise_diffs(phi)?;
    let lo = diffs.iter().cloned().fold(f64::INFINITY, f64::min) - 8.0 * delta;
    let hi = diffs.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 8.0 * delta;
    let h = (hi - lo) / (grid_len - 1) as f64;
    let grid: Vec<f64> = (0..grid_len).map(|k| lo + h * k as f64).collect();
    let norm = 1.0 / (delta * (std::f64::consts::TAU).sqrt());
    let mut sorted = diffs;
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite diffs"));
    let values: Vec<f64> = par::map_indexed(grid_len, |k| {
        let x = grid[k];
        // Kernel truncated at 8 delta: only nearby differences contribute.
        let start = sorted.partition_point(|&d| d < x - 8.0 * delta);
        let mut acc = 0.0;
        for &d in &sorted[start..] {
            if d > x + 8.0 * delta {
                break;
            }
            let u = (x - d) / delta;
            acc += (-0.5 * u * u).exp();
        }
        acc * norm
    });
    Ok(DensityProfile {
        grid,
        values,
        delta,
    })
}

/// One rational spike of the Dirichlet difference density.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Spike {
    pub p: u64,
    pub q: u64,
    pub location: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpikeReport {
    pub spikes: Vec<Spike>,
    pub residual_mass: f64,
    pub smooth_level: f64,
}

impl SpikeReport {
    pub fn spike_mass(&self) -> f64 {
        self.spikes.iter().map(|s| s.mass).sum()
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "p,q,location,mass")?;
        for s in &self.spikes {
            writeln!(out, "{},{},{},{}", s.p, s.q, s.location, s.mass)?;
        }
        Ok(())
    }
}

/// Abramowitz-Stegun 7.1.26 rational approximation, |error| < 1.5e-7.
fn erf_approx(x: f64) -> f64 {
    let sign = if x < 0.0 { -1.0 } else { 1.0 };
    let x = x.abs();
    let t = 1.0 / (1.0 + 0.3275911 * x);
    let poly = t
        * (0.254829592
            + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
    sign * (1.0 - poly * (-x * x).exp())
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * (1.0 + erf_approx(z / std::f64::consts::SQRT_2))
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Coprime spike grid for a degree-N, horizon-T Dirichlet family:
/// locations ln(p/q) with 1 <= p, q <= ceil(2T/N), sorted and deduplicated.
fn rational_spike_locations(n: u64, t: f64) -> Vec<(u64, u64, f64)> {
    let cap = (2.0 * t / n as f64).ceil().max(1.0) as u64;
    let mut spikes = Vec::new();
    for p in 1..=cap {
        for q in 1..=cap {
            if gcd(p, q) == 1 {
                spikes.push((p, q, (p as f64 / q as f64).ln()));
            }
        }
    }
    spikes.sort_by(|a, b| a.2.partial_cmp(&b.2).expect("finite locations"));
    spikes
}

/// Spike window half-width: kappa = 6 kernel standard deviations total.
const SPIKE_KAPPA: f64 = 6.0;

/// Integrate the smoothed difference density of `phi` over the rational
/// spike windows of the (N, T) Dirichlet geometry. Windows are clipped at
/// midpoints between adjacent spikes so masses never double-count.
pub fn spike_report_for(phi: &FrequencySet, n: u64, t: f64, delta: f64) -> Result<SpikeReport> {
    let mut diffs = pairwise_diffs(phi)?;
    diffs.sort_by(|a, b| a.partial_cmp(b).expect("finite diffs"));
    let locations = rational_spike_locations(n, t);
    let half = SPIKE_KAPPA * delta / 2.0;

    let mut windows = Vec::with_capacity(locations.len());
    for (k, &(_, _, loc)) in locations.iter().enumerate() {
        let mut lo = loc - half;
        let mut hi = loc + half;
        if k > 0 {
            lo = lo.max(0.5 * (locations[k - 1].2 + loc));
        }
        if k + 1 < locations.len() {
            hi = hi.min(0.5 * (loc + locations[k + 1].2));
        }
        windows.push((lo, hi));
    }

    let masses: Vec<f64> = par::map_indexed(locations.len(), |k| {
        let (lo, hi) = windows[k];
        // Integral of the smoothed density over [lo, hi]: one Gaussian CDF
        // difference per pair difference; only nearby pairs matter.
        let start = diffs.partition_point(|&d| d < lo - 10.0 * delta);
        let mut acc = 0.0;
        for &d in &diffs[start..] {
            if d > hi + 10.0 * delta {
                break;
            }
            acc += std_normal_cdf((hi - d) / delta) - std_normal_cdf((lo - d) / delta);
        }
        acc
    });

    let spikes: Vec<Spike> = locations
        .iter()
        .zip(&masses)
        .map(|(&(p, q, location), &mass)| Spike {
            p,
            q,
            location,
            mass,
        })
        .collect();
    let total = (phi.len() as f64).powi(2);
    let spike_total: f64 = masses.iter().sum();
    let residual_mass = total - spike_total;
    let range = if diffs.is_empty() {
        0.0
    } else {
        diffs[diffs.len() - 1] - diffs[0]
    };
    let covered: f64 = windows.iter().map(|&(lo, hi)| (hi - lo).max(0.0)).sum();
    let uncovered = (range - covered).max(f64::MIN_POSITIVE);
    Ok(SpikeReport {
        spikes,
        residual_mass,
        smooth_level: residual_mass / uncovered,
    })
}

/// Spike decomposition of the Dirichlet difference density at degree N,
/// horizon T, and smoothing scale delta.
pub fn spike_report(n: u64, t: f64, delta: f64) -> Result<SpikeReport> {
    spike_report_for(&FrequencySet::dirichlet(n), n, t, delta)
}
