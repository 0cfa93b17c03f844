//! A numerical laboratory for large value problems of matrices.
//!
//! Given a T x N complex matrix M, the large value problem asks how many
//! entries of M b can exceed a threshold when the input b is normalized.
//! This crate generates the relevant matrix families (Dirichlet polynomials,
//! exponential sums, random and planted models), computes certified upper
//! bounds on the large-value count by four methods (operator norm, tensor
//! power, Gram entries, Schatten tensor with flattening), validates every
//! certificate against brute-force oracles at desk scale, and explores the
//! Fourier-side structure (additive energy, difference densities, rational
//! spikes) together with majorant inequalities and planted-detection
//! experiments.
//!
//! All operations are pure: seeded randomness is explicit, and parallel
//! execution (rayon behind the `parallel` feature, on by default) never
//! changes a computed value.

pub mod certify;
pub mod error;
pub mod exponents;
pub mod fourier;
pub mod linalg;
pub mod majorant;
pub mod oracle;
pub mod planted;
pub mod rng;
pub mod zoo;

mod par;

pub use error::{Error, Result};

/// Crate version recorded in run manifests and certificates.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
