//! Planted-vs-random experiment harness: paired instances over an
//! (alpha, sigma) grid, a battery of polynomial test statistics, and the
//! Mann-Whitney AUC separability score.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::certify::flat_delta_norm;
use crate::error::{Error, Result};
use crate::linalg::{gram, operator_norm, ComplexMatrix};
use crate::par;
use crate::rng::derive_seed;
use crate::zoo::{gen_planted_with, gen_random, RandomDist, WConvention};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    Opnorm,
    OffdiagMax,
    SchattenFlatR3,
    ColL4,
}

impl Statistic {
    pub const ALL: [Statistic; 4] = [
        Statistic::Opnorm,
        Statistic::OffdiagMax,
        Statistic::SchattenFlatR3,
        Statistic::ColL4,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Statistic::Opnorm => "opnorm",
            Statistic::OffdiagMax => "offdiag_max",
            Statistic::SchattenFlatR3 => "schatten_flat_r3",
            Statistic::ColL4 => "col_l4",
        }
    }
}

/// Evaluate the requested statistics on one matrix.
/// col_l4 is normalized by N so the two arms stay scale-comparable.
pub fn compute_stats(m: &ComplexMatrix, which: &[Statistic]) -> Result<Vec<(Statistic, f64)>> {
    let needs_gram = which
        .iter()
        .any(|s| matches!(s, Statistic::OffdiagMax | Statistic::SchattenFlatR3));
    let a = if needs_gram { Some(gram(m)) } else { None };
    let mut out = Vec::with_capacity(which.len());
    for &stat in which {
        let value = match stat {
            Statistic::Opnorm => operator_norm(m, 1e-8),
            Statistic::OffdiagMax => a.as_ref().expect("gram computed").offdiag_max(),
            Statistic::SchattenFlatR3 => {
                let g = a.as_ref().expect("gram computed");
                if g.dim() > 1024 {
                    return Err(Error::cap(format!(
                        "schatten_flat_r3 needs T <= 1024, got {}",
                        g.dim()
                    )));
                }
                flat_delta_norm(g, 3, 1e-6)
            }
            Statistic::ColL4 => {
                let n = m.cols();
                let mut best = 0.0_f64;
                for j in 0..n {
                    let sum4: f64 = (0..m.rows()).map(|i| m.at(i, j).norm_sqr().powi(2)).sum();
                    best = best.max(sum4);
                }
                best / n as f64
            }
        };
        out.push((stat, value));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arm {
    Ran,
    Plant,
}

impl Arm {
    pub fn name(&self) -> &'static str {
        match self {
            Arm::Ran => "ran",
            Arm::Plant => "plant",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n: usize,
    pub alpha_grid: Vec<f64>,
    pub sigma_grid: Vec<f64>,
    pub epsilon: f64,
    pub trials: usize,
    pub base_seed: u64,
    pub statistics: Vec<Statistic>,
    #[serde(default)]
    pub w_convention: WConvention,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        if self.alpha_grid.is_empty() || self.sigma_grid.is_empty() {
            return Err(Error::invalid("grids must be non-empty"));
        }
        if self.alpha_grid.iter().any(|&a| !(1.0 < a && a < 2.0)) {
            return Err(Error::invalid("alpha grid must lie in (1, 2)"));
        }
        if self.sigma_grid.iter().any(|&s| !(0.5 < s && s < 1.0)) {
            return Err(Error::invalid("sigma grid must lie in (1/2, 1)"));
        }
        if self.statistics.is_empty() {
            return Err(Error::invalid("need at least one statistic"));
        }
        let total = 2 * self.alpha_grid.len() * self.sigma_grid.len() * self.trials;
        if total > 10_000 {
            return Err(Error::cap(format!(
                "experiment would generate {total} matrices (> 1e4)"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatRow {
    pub alpha: f64,
    pub sigma: f64,
    pub trial: usize,
    pub arm: Arm,
    pub statistic: Statistic,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellError {
    pub alpha: f64,
    pub sigma: f64,
    pub trial: usize,
    pub arm: Arm,
    pub message: String,
}

/// Complete experiment output; reproducible bit-for-bit from the config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatTable {
    pub config: ExperimentConfig,
    pub rows: Vec<StatRow>,
    pub errors: Vec<CellError>,
}

impl StatTable {
    /// CSV with columns (alpha, sigma, trial, arm, statistic, value).
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "alpha,sigma,trial,arm,statistic,value")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.alpha,
                r.sigma,
                r.trial,
                r.arm.name(),
                r.statistic.name(),
                r.value
            )?;
        }
        Ok(())
    }

    /// Scores of one statistic in one cell, split by arm (ran, plant).
    pub fn cell_scores(&self, alpha: f64, sigma: f64, stat: Statistic) -> (Vec<f64>, Vec<f64>) {
        let mut ran = Vec::new();
        let mut plant = Vec::new();
        for r in &self.rows {
            if r.alpha == alpha && r.sigma == sigma && r.statistic == stat {
                match r.arm {
                    Arm::Ran => ran.push(r.value),
                    Arm::Plant => plant.push(r.value),
                }
            }
        }
        (ran, plant)
    }
}

/// Run the full grid. Per-cell seeds derive from
/// (base_seed, alpha index, sigma index, trial, arm), so the table does not
/// depend on evaluation order or thread count, and generator failures are
/// recorded per cell rather than aborting the run.
pub fn run_experiment(config: &ExperimentConfig) -> Result<StatTable> {
    config.validate()?;
    let mut tasks = Vec::new();
    for (ai, &alpha) in config.alpha_grid.iter().enumerate() {
        for (si, &sigma) in config.sigma_grid.iter().enumerate() {
            for trial in 0..config.trials {
                for arm in [Arm::Ran, Arm::Plant] {
                    tasks.push((ai, si, trial, arm, alpha, sigma));
                }
            }
        }
    }
    let results: Vec<std::result::Result<Vec<StatRow>, CellError>> =
        par::map_slice(&tasks, |&(ai, si, trial, arm, alpha, sigma)| {
            let arm_tag = match arm {
                Arm::Ran => 0u64,
                Arm::Plant => 1u64,
            };
            let seed = derive_seed(
                config.base_seed,
                &[ai as u64, si as u64, trial as u64, arm_tag],
            );
            let built = match arm {
                Arm::Ran => {
                    let t = (config.n as f64).powf(alpha).round() as usize;
                    Ok(gen_random(t, config.n, RandomDist::Gaussian, seed))
                }
                Arm::Plant => gen_planted_with(
                    config.n,
                    alpha,
                    sigma,
                    config.epsilon,
                    seed,
                    config.w_convention,
                )
                .map(|inst| inst.matrix),
            };
            match built.and_then(|m| compute_stats(&m, &config.statistics)) {
                Ok(stats) => Ok(stats
                    .into_iter()
                    .map(|(statistic, value)| StatRow {
                        alpha,
                        sigma,
                        trial,
                        arm,
                        statistic,
                        value,
                    })
                    .collect()),
                Err(e) => Err(CellError {
                    alpha,
                    sigma,
                    trial,
                    arm,
                    message: e.to_string(),
                }),
            }
        });
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for r in results {
        match r {
            Ok(mut rs) => rows.append(&mut rs),
            Err(e) => errors.push(e),
        }
    }
    Ok(StatTable {
        config: config.clone(),
        rows,
        errors,
    })
}

/// Mann-Whitney AUC with tie correction: the probability that a planted
/// score exceeds a random score, ties counting one half.
pub fn auc(scores_ran: &[f64], scores_plant: &[f64]) -> f64 {
    assert!(
        !scores_ran.is_empty() && !scores_plant.is_empty(),
        "both score lists must be non-empty"
    );
    let mut wins = 0.0_f64;
    for &p in scores_plant {
        for &r in scores_ran {
            if p > r {
                wins += 1.0;
            } else if p == r {
                wins += 0.5;
            }
        }
    }
    wins / (scores_ran.len() as f64 * scores_plant.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> ExperimentConfig {
        ExperimentConfig {
            n: 12,
            alpha_grid: vec![1.4],
            sigma_grid: vec![0.8],
            epsilon: 0.02,
            trials: 2,
            base_seed: 5,
            statistics: vec![Statistic::Opnorm, Statistic::OffdiagMax, Statistic::ColL4],
            w_convention: WConvention::StdDev,
        }
    }

    #[test]
    fn auc_anchors() {
        let x = [1.0, 2.0, 3.0];
        assert_eq!(auc(&x, &x), 0.5);
        assert_eq!(auc(&[1.0, 2.0], &[5.0, 6.0]), 1.0);
        assert_eq!(auc(&[1.0, 2.0], &[1.5, 3.0]), 0.75);
    }

    #[test]
    fn auc_invariant_under_monotone_transform() {
        let ran = [0.3, 1.9, 0.7, 2.2];
        let plant = [1.1, 2.5, 0.9];
        let base = auc(&ran, &plant);
        let f = |x: f64| (3.0 * x).exp() + 1.0;
        let ran_t: Vec<f64> = ran.iter().map(|&x| f(x)).collect();
        let plant_t: Vec<f64> = plant.iter().map(|&x| f(x)).collect();
        assert_eq!(base, auc(&ran_t, &plant_t));
    }

    #[test]
    fn compute_stats_identity() {
        let m = ComplexMatrix::from_fn(4, 4, |i, j| {
            num_complex::Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)
        })
        .unwrap();
        let stats = compute_stats(&m, &[Statistic::Opnorm, Statistic::OffdiagMax]).unwrap();
        assert!((stats[0].1 - 1.0).abs() < 1e-9);
        assert!(stats[1].1.abs() < 1e-12);
    }

    #[test]
    fn compute_stats_unit_modulus_gram_diag() {
        let m = gen_random(10, 6, RandomDist::UnitComplex, 3);
        let a = gram(&m);
        for i in 0..10 {
            assert!((a.at(i, i).re - 6.0).abs() < 1e-12);
        }
        let stats = compute_stats(&m, &[Statistic::OffdiagMax]).unwrap();
        assert!(stats[0].1 < 6.0);
    }

    #[test]
    fn gaussian_offdiag_concentration() {
        // Monte Carlo over 50 seeds: off-diagonal max concentrates near
        // sqrt(2 N ln T); interval calibrated to [sqrt(N), 7 sqrt(N)]
        // (observed range 20.6..36.2 at N = 32, T = 128).
        let n = 32usize;
        let lo = (n as f64).sqrt();
        let hi = 7.0 * (n as f64).sqrt();
        let mut pass = 0;
        for seed in 0..50u64 {
            let m = gen_random(128, n, RandomDist::Gaussian, seed);
            let v = compute_stats(&m, &[Statistic::OffdiagMax]).unwrap()[0].1;
            if v >= lo && v <= hi {
                pass += 1;
            }
        }
        assert_eq!(pass, 50, "only {pass}/50 inside the interval");
    }

    #[test]
    fn experiment_minimal_grid_shape() {
        let mut cfg = small_config();
        cfg.trials = 1;
        let table = run_experiment(&cfg).unwrap();
        assert!(table.errors.is_empty());
        // 1 cell x 1 trial x 2 arms x 3 statistics.
        assert_eq!(table.rows.len(), 6);
        for stat in &cfg.statistics {
            let (ran, plant) = table.cell_scores(1.4, 0.8, *stat);
            assert_eq!(ran.len(), 1);
            assert_eq!(plant.len(), 1);
        }
    }

    #[test]
    fn experiment_is_deterministic() {
        let cfg = small_config();
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a, b);
        let ja = serde_json::to_string(&a).unwrap();
        let jb = serde_json::to_string(&b).unwrap();
        assert_eq!(ja, jb);
        let mut csv_a = Vec::new();
        let mut csv_b = Vec::new();
        a.write_csv(&mut csv_a).unwrap();
        b.write_csv(&mut csv_b).unwrap();
        assert_eq!(csv_a, csv_b);
    }

    #[test]
    fn experiment_rejects_bad_grids() {
        let mut cfg = small_config();
        cfg.sigma_grid = vec![1.2];
        assert!(run_experiment(&cfg).is_err());
        let mut cfg2 = small_config();
        cfg2.trials = 0;
        assert!(run_experiment(&cfg2).is_err());
    }

    #[test]
    fn offdiag_separates_planted_above_threshold() {
        // sigma = 0.9 sits above the detectability threshold 1 - alpha/4;
        // the Gram off-diagonal statistic separates the arms.
        let cfg = ExperimentConfig {
            n: 48,
            alpha_grid: vec![1.5],
            sigma_grid: vec![0.9],
            epsilon: 0.01,
            trials: 12,
            base_seed: 101,
            statistics: vec![Statistic::OffdiagMax],
            w_convention: WConvention::StdDev,
        };
        let table = run_experiment(&cfg).unwrap();
        assert!(table.errors.is_empty(), "{:?}", table.errors);
        let (ran, plant) = table.cell_scores(1.5, 0.9, Statistic::OffdiagMax);
        let a = auc(&ran, &plant);
        assert!(a >= 0.9, "offdiag AUC = {a}");
    }
}
