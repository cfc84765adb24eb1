use serde::{Deserialize, Serialize};

/// Numerical tolerances used for validation throughout the crate.
///
/// All defaults live here so that the CLI `--tolerance` flag and tests share a
/// single source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Max entrywise deviation of `U†U` from identity for a coin.
    pub unitarity: f64,
    /// Max entrywise deviation of `E` from `E†`.
    pub hermiticity: f64,
    /// Smallest admissible eigenvalue of a POVM element (as `-psd`).
    pub psd: f64,
    /// Max operator-norm distance of `Σ E` from identity.
    pub completeness: f64,
    /// Headroom on the peel-off amplitude `a ≤ 1 + feasibility`.
    pub feasibility: f64,
    /// Amplitudes with modulus below this are dropped from walk states.
    /// Zero keeps every entry.
    pub prune: f64,
    /// Deviation allowed for a normalized coin input.
    pub normalization: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            unitarity: 1e-12,
            hermiticity: 1e-12,
            psd: 1e-12,
            completeness: 1e-10,
            feasibility: 1e-12,
            prune: 0.0,
            normalization: 1e-9,
        }
    }
}

impl Tolerances {
    /// Uniform override of the validation tolerances (prune unchanged).
    pub fn uniform(tol: f64) -> Self {
        Tolerances {
            unitarity: tol,
            hermiticity: tol,
            psd: tol,
            completeness: tol,
            feasibility: tol,
            normalization: tol,
            ..Default::default()
        }
    }
}
