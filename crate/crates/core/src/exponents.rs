//! Closed-form exponent calculator for the named bounds, conjectures, and
//! thresholds, as functions of (alpha, sigma) with T = N^alpha.

use serde::{Deserialize, Serialize};

/// Exponents e such that the corresponding bound reads |W| <~ N^e, plus the
/// two method thresholds in sigma.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentTable {
    pub alpha: f64,
    pub sigma: f64,
    /// Operator-norm (orthogonality) bound: alpha + 1 - 2 sigma.
    pub basic: f64,
    /// The T = N^{6/5} improvement 18/5 - 4 sigma; populated only at alpha = 6/5.
    pub gm: Option<f64>,
    /// Certified random-matrix bound 3 - 4 sigma + alpha/2.
    pub dhpt: f64,
    /// Large value conjecture: 2 - 2 sigma.
    pub montgomery: f64,
    /// Density form of the l^q conjecture: alpha (2 - 2 sigma).
    pub montgomery_lq: f64,
    /// Sigma above which the Gram (MM*) method is sharp.
    pub mmstar_threshold: f64,
    /// Sigma above which low-degree detection succeeds: 1 - alpha/4.
    pub lowdeg_threshold: f64,
}

pub fn exponent_table(alpha: f64, sigma: f64) -> ExponentTable {
    assert!(alpha.is_finite() && sigma.is_finite());
    let gm = if (alpha - 1.2).abs() <= 1e-12 {
        Some(18.0 / 5.0 - 4.0 * sigma)
    } else {
        None
    };
    ExponentTable {
        alpha,
        sigma,
        basic: alpha + 1.0 - 2.0 * sigma,
        gm,
        dhpt: 3.0 - 4.0 * sigma + alpha / 2.0,
        montgomery: 2.0 - 2.0 * sigma,
        montgomery_lq: alpha * (2.0 - 2.0 * sigma),
        mmstar_threshold: 0.75,
        lowdeg_threshold: 1.0 - alpha / 4.0,
    }
}

impl std::fmt::Display for ExponentTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "alpha = {:<8} sigma = {}", self.alpha, self.sigma)?;
        writeln!(f, "{:<22} N^{:.6}", "basic (operator norm)", self.basic)?;
        match self.gm {
            Some(g) => writeln!(f, "{:<22} N^{:.6}", "gm (T = N^1.2)", g)?,
            None => writeln!(f, "{:<22} (only at alpha = 6/5)", "gm (T = N^1.2)")?,
        }
        writeln!(f, "{:<22} N^{:.6}", "dhpt (certified)", self.dhpt)?;
        writeln!(f, "{:<22} N^{:.6}", "montgomery", self.montgomery)?;
        writeln!(
            f,
            "{:<22} N^{:.6}",
            "montgomery lq density", self.montgomery_lq
        )?;
        writeln!(
            f,
            "{:<22} sigma > {}",
            "mmstar threshold", self.mmstar_threshold
        )?;
        write!(
            f,
            "{:<22} sigma > {}",
            "lowdeg threshold", self.lowdeg_threshold
        )
    }
}
