//! Ground truth: exact sparse singular values by subset enumeration, a
//! swap-based heuristic lower bound, and explicit large-value witnesses.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{gram, ComplexMatrix, GramMatrix};
use crate::par;
use crate::rng::{derive_seed, rng_from_seed};

/// Strictly increasing, non-empty 1-based row indices W within {1..T}.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RowSubset {
    indices: Vec<usize>,
}

impl RowSubset {
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::invalid("row subset must be non-empty"));
        }
        if indices[0] == 0 {
            return Err(Error::invalid("row indices are 1-based"));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("row indices must be strictly increasing"));
        }
        Ok(Self { indices })
    }

    pub fn from_zero_based(rows0: &[usize]) -> Result<Self> {
        Self::new(rows0.iter().map(|&i| i + 1).collect())
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn zero_based(&self) -> Vec<usize> {
        self.indices.iter().map(|&i| i - 1).collect()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, idx1: usize) -> bool {
        self.indices.binary_search(&idx1).is_ok()
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i + 1) as u128;
    }
    acc
}

/// Top eigenvalue of the S x S Hermitian PSD minor A[W, W], by power
/// iteration tight enough that subset comparisons are stable.
fn minor_top_eig(a: &GramMatrix, rows0: &[usize], buf: &mut [Complex64]) -> f64 {
    let s = rows0.len();
    if s == 1 {
        return a.at(rows0[0], rows0[0]).re;
    }
    for (bi, &i) in rows0.iter().enumerate() {
        for (bj, &j) in rows0.iter().enumerate() {
            buf[bi * s + bj] = a.at(i, j);
        }
    }
    small_hermitian_top_eig(buf, s)
}

fn small_hermitian_top_eig(m: &[Complex64], s: usize) -> f64 {
    let inv = 1.0 / (s as f64).sqrt();
    let mut v = vec![Complex64::new(inv, 0.0); s];
    // Deterministic tilt so the start is in general position.
    for (k, z) in v.iter_mut().enumerate() {
        z.re += inv * 1e-3 * ((k % 7) as f64 - 3.0) / 7.0;
        z.im += inv * 1e-3 * ((k % 5) as f64 - 2.0) / 5.0;
    }
    let mut w = vec![Complex64::new(0.0, 0.0); s];
    let mut rho_prev = -1.0_f64;
    for _ in 0..600 {
        for i in 0..s {
            let mut acc = Complex64::new(0.0, 0.0);
            let row = &m[i * s..(i + 1) * s];
            for (a, x) in row.iter().zip(&v) {
                acc += a * x;
            }
            w[i] = acc;
        }
        let rho: f64 = v.iter().zip(&w).map(|(a, b)| (a.conj() * b).re).sum();
        let norm: f64 = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm <= f64::MIN_POSITIVE {
            return rho.max(0.0);
        }
        if rho_prev >= 0.0 && (rho - rho_prev).abs() <= 1e-13 * rho.abs().max(1e-300) {
            return rho.max(0.0);
        }
        rho_prev = rho;
        for (a, b) in v.iter_mut().zip(&w) {
            *a = b / norm;
        }
    }
    rho_prev.max(0.0)
}

/// Exact max of ||M_W|| over |W| = S by enumeration over the cached Gram.
///
/// A deterministic greedy climb seeds a lower bound, and every enumerated
/// subset is screened against it with the Gershgorin row-sum bound on its
/// minor (max row absolute sum >= top eigenvalue); only survivors pay for a
/// power iteration. Pruning never discards a subset that could attain the
/// maximum, so the result is exact. Enumeration parallelizes over the first
/// index with a fixed merge order and lexicographic tie-break, so the result
/// is independent of the thread count.
pub fn ssv_exact(m: &ComplexMatrix, s: usize) -> Result<(f64, RowSubset)> {
    let t = m.rows();
    if s == 0 || s > t {
        return Err(Error::invalid(format!("S = {s} outside [1, T = {t}]")));
    }
    let count = binomial(t, s);
    if count > 10_000_000 {
        return Err(Error::cap(format!(
            "C({t}, {s}) = {count} exceeds the enumeration cap 1e7"
        )));
    }
    let a = gram(m);
    let abs_a: Vec<f64> = a.entries().iter().map(|z| z.norm()).collect();

    let (floor_val, floor_sub) = greedy_floor(&a, &abs_a, s);
    // Deflate slightly so subsets tying the floor are still evaluated and the
    // lexicographic tie-break stays intact.
    let prune_below = floor_val * (1.0 - 1e-12);

    let block_best: Vec<(f64, Vec<usize>)> = par::map_indexed(t - s + 1, |first| {
        let mut walker = Walker {
            a: &a,
            abs_a: &abs_a,
            t,
            s,
            stack: Vec::with_capacity(s),
            rowsums: vec![0.0; s],
            buf: vec![Complex64::new(0.0, 0.0); s * s],
            prune_below,
            best_val: f64::NEG_INFINITY,
            best_sub: Vec::new(),
        };
        walker.push(first);
        walker.descend();
        (walker.best_val, walker.best_sub)
    });

    let mut best_val = floor_val;
    let mut best_sub = floor_sub;
    for (val, sub) in block_best {
        if val > best_val {
            best_val = val;
            best_sub = sub;
        }
    }
    Ok((
        best_val.max(0.0).sqrt(),
        RowSubset::from_zero_based(&best_sub)?,
    ))
}

struct Walker<'a> {
    a: &'a GramMatrix,
    abs_a: &'a [f64],
    t: usize,
    s: usize,
    stack: Vec<usize>,
    rowsums: Vec<f64>,
    buf: Vec<Complex64>,
    prune_below: f64,
    best_val: f64,
    best_sub: Vec<usize>,
}

impl Walker<'_> {
    fn push(&mut self, x: usize) {
        let k = self.stack.len();
        let mut own = self.abs_a[x * self.t + x];
        for (d, &i) in self.stack.iter().enumerate() {
            self.rowsums[d] += self.abs_a[i * self.t + x];
            own += self.abs_a[x * self.t + i];
        }
        self.rowsums[k] = own;
        self.stack.push(x);
    }

    fn pop(&mut self) {
        let x = self.stack.pop().expect("pop matches push");
        for (d, &i) in self.stack.iter().enumerate() {
            self.rowsums[d] -= self.abs_a[i * self.t + x];
        }
    }

    fn descend(&mut self) {
        if self.stack.len() == self.s {
            let ub = self.rowsums.iter().cloned().fold(0.0_f64, f64::max);
            if ub < self.prune_below.max(self.best_val) {
                return;
            }
            let val = minor_top_eig(self.a, &self.stack, &mut self.buf);
            if val > self.best_val {
                self.best_val = val;
                self.best_sub.clear();
                self.best_sub.extend_from_slice(&self.stack);
            }
            return;
        }
        let last = *self
            .stack
            .last()
            .expect("stack seeded with the block index");
        let remaining = self.s - self.stack.len();
        for next in (last + 1)..=(self.t - remaining) {
            self.push(next);
            self.descend();
            self.pop();
        }
    }
}

/// Deterministic first-improvement climb from the rows with the largest
/// absolute Gram row sums; the returned value is a certified lower bound
/// for the enumeration and usually equals the maximum.
fn greedy_floor(a: &GramMatrix, abs_a: &[f64], s: usize) -> (f64, Vec<usize>) {
    let t = a.dim();
    let mut order: Vec<usize> = (0..t).collect();
    let full_sums: Vec<f64> = (0..t)
        .map(|i| abs_a[i * t..(i + 1) * t].iter().sum())
        .collect();
    order.sort_by(|&x, &y| {
        full_sums[y]
            .partial_cmp(&full_sums[x])
            .expect("finite sums")
            .then(x.cmp(&y))
    });
    let mut inside: Vec<usize> = order[..s].to_vec();
    inside.sort_unstable();
    let mut buf = vec![Complex64::new(0.0, 0.0); s * s];
    let mut cur = minor_top_eig(a, &inside, &mut buf);
    loop {
        let mut moved = false;
        for oi in 0..s {
            for cand in 0..t {
                if inside.contains(&cand) {
                    continue;
                }
                let mut trial = inside.clone();
                trial[oi] = cand;
                trial.sort_unstable();
                let val = minor_top_eig(a, &trial, &mut buf);
                if val > cur * (1.0 + 1e-12) {
                    inside = trial;
                    cur = val;
                    moved = true;
                }
            }
        }
        if !moved {
            return (cur, inside);
        }
    }
}

/// Heuristic lower bound for the sparse singular value: best-improvement
/// single-element swaps from seeded random starts. Always <= the exact value;
/// deterministic for a fixed seed regardless of thread count.
pub fn ssv_search(
    m: &ComplexMatrix,
    s: usize,
    seed: u64,
    iters: usize,
) -> Result<(f64, RowSubset)> {
    let t = m.rows();
    if s == 0 || s > t {
        return Err(Error::invalid(format!("S = {s} outside [1, T = {t}]")));
    }
    let a = gram(m);
    let neighborhood = (s * (t - s)).max(1);
    let n_starts = (iters / (3 * neighborhood)).clamp(1, 64);
    let start_seeds: Vec<u64> = (0..n_starts)
        .map(|k| derive_seed(seed, &[0x55aa, k as u64]))
        .collect();

    // First-improvement hill climbing in a fixed scan order: each climb is
    // deterministic from its start, and a full sweep with no improvement
    // certifies a local optimum.
    let results: Vec<(f64, Vec<usize>)> = par::map_slice(&start_seeds, |&sseed| {
        let mut rng = rng_from_seed(sseed);
        let mut inside: Vec<usize> = sample_distinct(&mut rng, t, s);
        inside.sort_unstable();
        let mut buf = vec![Complex64::new(0.0, 0.0); s * s];
        let mut cur = minor_top_eig(&a, &inside, &mut buf);
        let mut budget = iters / n_starts;
        'climb: loop {
            let mut moved = false;
            for oi in 0..s {
                for cand in 0..t {
                    if inside.contains(&cand) {
                        continue;
                    }
                    if budget == 0 {
                        break 'climb;
                    }
                    budget -= 1;
                    let mut trial = inside.clone();
                    trial[oi] = cand;
                    trial.sort_unstable();
                    let val = minor_top_eig(&a, &trial, &mut buf);
                    if val > cur * (1.0 + 1e-12) {
                        inside = trial;
                        cur = val;
                        moved = true;
                    }
                }
            }
            if !moved {
                break;
            }
        }
        (cur, inside)
    });

    let mut best_val = f64::NEG_INFINITY;
    let mut best_sub: Vec<usize> = Vec::new();
    for (val, sub) in results {
        if val > best_val || (val == best_val && sub < best_sub) {
            best_val = val;
            best_sub = sub;
        }
    }
    Ok((
        best_val.max(0.0).sqrt(),
        RowSubset::from_zero_based(&best_sub)?,
    ))
}

fn sample_distinct<R: Rng>(rng: &mut R, t: usize, s: usize) -> Vec<usize> {
    let mut picked = Vec::with_capacity(s);
    while picked.len() < s {
        let cand = rng.gen_range(0..t);
        if !picked.contains(&cand) {
            picked.push(cand);
        }
    }
    picked
}

/// Input norms accepted by `witness_random`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputNorm {
    L2,
    Linf,
}

/// An explicit large-value witness: an input vector together with the rows
/// it pushes above the threshold.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Witness {
    pub b_re: Vec<f64>,
    pub b_im: Vec<f64>,
    pub lambda: f64,
    /// 1-based rows with |(Mb)_t| > lambda; may be empty.
    pub achieved: Vec<usize>,
    pub norm_l2: f64,
    pub norm_linf: f64,
    pub clipped: bool,
}

impl Witness {
    pub fn input(&self) -> Vec<Complex64> {
        self.b_re
            .iter()
            .zip(&self.b_im)
            .map(|(&re, &im)| Complex64::new(re, im))
            .collect()
    }
}

/// Rows (1-based) where |(Mb)_t| > lambda.
pub fn achieved_rows(m: &ComplexMatrix, b: &[Complex64], lambda: f64) -> Vec<usize> {
    m.mat_vec(b)
        .iter()
        .enumerate()
        .filter(|(_, z)| z.norm() > lambda)
        .map(|(i, _)| i + 1)
        .collect()
}

fn witness_from_input(m: &ComplexMatrix, b: Vec<Complex64>, lambda: f64, clipped: bool) -> Witness {
    let achieved = achieved_rows(m, &b, lambda);
    let norm_l2 = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let norm_linf = b.iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
    Witness {
        b_re: b.iter().map(|z| z.re).collect(),
        b_im: b.iter().map(|z| z.im).collect(),
        lambda,
        achieved,
        norm_l2,
        norm_linf,
        clipped,
    }
}

/// Focusing construction: b = scale * sum of conjugated rows over U, then
/// optionally clipped to the l-infinity unit ball (clipping recorded).
pub fn witness_focusing(
    m: &ComplexMatrix,
    u: &RowSubset,
    scale: f64,
    clip: bool,
    lambda: f64,
) -> Witness {
    let n = m.cols();
    let mut b = vec![Complex64::new(0.0, 0.0); n];
    for i in u.zero_based() {
        for (bj, mj) in b.iter_mut().zip(m.row(i)) {
            *bj += mj.conj() * scale;
        }
    }
    if clip {
        for z in b.iter_mut() {
            let r = z.norm();
            if r > 1.0 {
                *z /= r;
            }
        }
    }
    witness_from_input(m, b, lambda, clip)
}

/// Best-of-iters random witness: random signs for l-infinity, Gaussian
/// rescaled to the budget for l2. Keeps the draw with the largest achieved
/// set (ties keep the earliest draw).
pub fn witness_random(
    m: &ComplexMatrix,
    lambda: f64,
    norm: InputNorm,
    budget: f64,
    seed: u64,
    iters: usize,
) -> Witness {
    assert!(iters >= 1 && budget > 0.0);
    let n = m.cols();
    let draw_seeds: Vec<u64> = (0..iters)
        .map(|k| derive_seed(seed, &[0x77ff, k as u64]))
        .collect();
    let drawn: Vec<Vec<Complex64>> = par::map_slice(&draw_seeds, |&dseed| {
        let mut rng = rng_from_seed(dseed);
        match norm {
            InputNorm::Linf => (0..n)
                .map(|_| Complex64::new(if rng.gen::<bool>() { budget } else { -budget }, 0.0))
                .collect(),
            InputNorm::L2 => {
                let mut b: Vec<Complex64> = (0..n)
                    .map(|_| Complex64::new(rng.sample(StandardNormal), 0.0))
                    .collect();
                let norm2 = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                if norm2 > 0.0 {
                    for z in b.iter_mut() {
                        *z *= budget / norm2;
                    }
                }
                b
            }
        }
    });
    let mut best: Option<(usize, Vec<Complex64>)> = None;
    for b in drawn {
        let size = achieved_rows(m, &b, lambda).len();
        match &best {
            Some((cur, _)) if *cur >= size => {}
            _ => best = Some((size, b)),
        }
    }
    let (_, b) = best.expect("at least one draw");
    witness_from_input(m, b, lambda, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::operator_norm;
    use crate::zoo::{gen_random, RandomDist};

    fn identity(n: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, n, |i, j| {
            Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)
        })
        .unwrap()
    }

    #[test]
    fn row_subset_validation() {
        assert!(RowSubset::new(vec![]).is_err());
        assert!(RowSubset::new(vec![0, 1]).is_err());
        assert!(RowSubset::new(vec![2, 2]).is_err());
        assert!(RowSubset::new(vec![1, 3, 7]).is_ok());
    }

    #[test]
    fn ssv_exact_full_matrix_matches_operator_norm() {
        let m = gen_random(8, 5, RandomDist::UnitComplex, 4);
        let (v, w) = ssv_exact(&m, 8).unwrap();
        let op = operator_norm(&m, 1e-10);
        assert!((v - op).abs() <= 1e-8 * op);
        assert_eq!(w.len(), 8);
    }

    #[test]
    fn ssv_exact_single_row_is_max_row_norm() {
        let m = gen_random(9, 6, RandomDist::Gaussian, 10);
        let (v, _) = ssv_exact(&m, 1).unwrap();
        let best = (0..9)
            .map(|i| m.row(i).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
            .fold(0.0_f64, f64::max);
        assert!((v - best).abs() <= 1e-10 * best);
    }

    #[test]
    fn ssv_exact_identity_pairs() {
        let (v, w) = ssv_exact(&identity(4), 2).unwrap();
        assert!((v - 1.0).abs() < 1e-9);
        // Ties resolve to the lexicographically smallest subset.
        assert_eq!(w.indices(), &[1, 2]);
    }

    #[test]
    fn ssv_exact_cap() {
        let m = gen_random(40, 2, RandomDist::Pm1, 0);
        assert!(matches!(ssv_exact(&m, 20), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn ssv_search_never_beats_exact_and_is_deterministic() {
        let mut hits = 0;
        for seed in 0..20u64 {
            let m = gen_random(12, 6, RandomDist::Gaussian, seed);
            let (ve, _) = ssv_exact(&m, 4).unwrap();
            let (vs, _) = ssv_search(&m, 4, seed, 1500).unwrap();
            assert!(
                vs <= ve * (1.0 + 1e-9),
                "seed {seed}: search {vs} > exact {ve}"
            );
            if (ve - vs).abs() <= 1e-7 * ve {
                hits += 1;
            }
        }
        assert!(hits >= 14, "search matched exact only {hits}/20 times");
        let a = ssv_search(&gen_random(12, 6, RandomDist::Gaussian, 3), 4, 9, 1500).unwrap();
        let b = ssv_search(&gen_random(12, 6, RandomDist::Gaussian, 3), 4, 9, 1500).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
    }

    #[test]
    fn ssv_search_head_to_head_16x8() {
        // 50 random 16 x 8 trials at S = 8, 2000-eval budget: the search is
        // a lower bound always and matches enumeration in >= 80% of trials.
        let mut eq = 0;
        for seed in 0..50u64 {
            let m = gen_random(16, 8, RandomDist::UnitComplex, seed);
            let (ve, _) = ssv_exact(&m, 8).unwrap();
            let (vs, _) = ssv_search(&m, 8, seed, 2000).unwrap();
            assert!(vs <= ve * (1.0 + 1e-9), "seed {seed}");
            if (ve - vs).abs() <= 1e-7 * ve {
                eq += 1;
            }
        }
        assert!(eq >= 40, "search matched exact in {eq}/50 trials");
    }

    #[test]
    fn focusing_calibrated_monte_carlo() {
        // Unit-complex 256 x 64, |U| = round(64^{2-2*0.8}) = 5, clipped input:
        // at lambda = 0.5 N^0.8 at least half of U is achieved, in >= 90%
        // of 50 seeds.
        let lam = 0.5 * (64.0f64).powf(0.8);
        let mut ok = 0;
        for seed in 0..50u64 {
            let m = gen_random(256, 64, RandomDist::UnitComplex, seed);
            let u = RowSubset::new(vec![10, 40, 77, 130, 200]).unwrap();
            let w = witness_focusing(&m, &u, 1.0, true, lam);
            let hits = u
                .indices()
                .iter()
                .filter(|i| w.achieved.contains(i))
                .count();
            if 2 * hits >= u.len() {
                ok += 1;
            }
        }
        assert!(ok >= 45, "focusing hit quota in {ok}/50 seeds");
    }

    #[test]
    fn random_witness_anticoncentration() {
        // Unit-complex rows: |row sum| <= 0.1 sqrt(N) happens with
        // probability about 1%, so the best of 20 sign draws covers at
        // least 99% of rows.
        let mut ok = 0;
        for seed in 0..20u64 {
            let m = gen_random(128, 64, RandomDist::UnitComplex, seed);
            let w = witness_random(&m, 0.1 * 8.0, InputNorm::Linf, 1.0, seed ^ 0xf00, 20);
            if w.achieved.len() * 100 >= 99 * 128 {
                ok += 1;
            }
        }
        assert!(ok >= 18, "coverage quota in {ok}/20 seeds");
    }

    #[test]
    fn ssv_search_single_row_exact() {
        let m = gen_random(10, 5, RandomDist::Gaussian, 2);
        let (ve, we) = ssv_exact(&m, 1).unwrap();
        let (vs, ws) = ssv_search(&m, 1, 0, 200).unwrap();
        assert!((ve - vs).abs() <= 1e-9 * ve);
        assert_eq!(we, ws);
    }

    #[test]
    fn focusing_single_row_reaches_n() {
        let m = gen_random(6, 10, RandomDist::UnitComplex, 8);
        let u = RowSubset::new(vec![3]).unwrap();
        let w = witness_focusing(&m, &u, 1.0, false, 5.0);
        let b = w.input();
        let mv = m.mat_vec(&b);
        assert!((mv[2].norm() - 10.0).abs() < 1e-9);
        assert!(w.achieved.contains(&3));
    }

    #[test]
    fn witness_achieved_matches_recomputation() {
        let m = gen_random(20, 8, RandomDist::UnitComplex, 5);
        let u = RowSubset::new(vec![1, 4, 9]).unwrap();
        let w = witness_focusing(&m, &u, 0.5, true, 2.0);
        let again = achieved_rows(&m, &w.input(), w.lambda);
        assert_eq!(w.achieved, again);
        assert!(w.norm_linf <= 1.0 + 1e-12);
    }

    #[test]
    fn witness_random_triangle_inequality_empty() {
        let m = gen_random(10, 6, RandomDist::UnitComplex, 1);
        // lambda > N * budget_inf means no row can exceed it.
        let w = witness_random(&m, 6.5, InputNorm::Linf, 1.0, 3, 5);
        assert!(w.achieved.is_empty());
    }

    #[test]
    fn witness_random_deterministic() {
        let m = gen_random(10, 6, RandomDist::Gaussian, 7);
        let a = witness_random(&m, 1.0, InputNorm::L2, 6.0_f64.sqrt(), 11, 8);
        let b = witness_random(&m, 1.0, InputNorm::L2, 6.0_f64.sqrt(), 11, 8);
        assert_eq!(a.b_re, b.b_re);
        assert_eq!(a.achieved, b.achieved);
    }

    #[test]
    fn witness_json_round_trip() {
        let m = gen_random(5, 4, RandomDist::UnitComplex, 2);
        let u = RowSubset::new(vec![2]).unwrap();
        let w = witness_focusing(&m, &u, 1.0, false, 1.5);
        let js = serde_json::to_string(&w).unwrap();
        let back: Witness = serde_json::from_str(&js).unwrap();
        assert_eq!(w.achieved, back.achieved);
        assert_eq!(w.b_re, back.b_re);
    }
}
