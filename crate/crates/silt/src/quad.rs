//! Numerical integration engines.
//!
//! Two engines cover everything this crate integrates:
//!
//! * [`adaptive_cubature`]: deterministic adaptive quadrature for 1 to 3
//!   dimensions.  One-dimensional regions use an embedded Gauss-Legendre
//!   15/7 pair; higher dimensions use the Genz-Malik degree 7/5 pair.
//!   Semi-infinite axes are mapped to `(0, 1)` by a decay-adapted change
//!   of variables, and all rules are open, so integrable endpoint
//!   singularities (the `ln x` of `K0` at zero) need no special casing.
//! * [`mc_expectation`]: Monte Carlo expectations under an iid
//!   exponential or Dirichlet-simplex law, with deterministic
//!   per-chunk substreams so results are bit-identical for a given
//!   seed regardless of thread count.
//!
//! Every result is an [`IntegralEstimate`] carrying the value, an error
//! figure (bound for cubature, standard error for Monte Carlo), the
//! number of integrand evaluations, and the method tag.

mod cubature;
mod gauss;
mod mc;

pub use cubature::{adaptive_cubature, adaptive_cubature_with, Axis, CubatureOptions};
pub use mc::{mc_expectation, mc_expectation_with, ErrorMode, McOptions, Sampler};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Which engine produced an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Cubature,
    MonteCarlo,
    /// Closed-form or exact combinatorial evaluation (error 0).
    Exact,
}

/// A numerical integration result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegralEstimate {
    pub value: f64,
    /// Absolute error bound (cubature) or standard error (Monte Carlo).
    pub error: f64,
    pub evaluations: u64,
    pub method: Method,
    /// Seed used, for Monte Carlo results.
    pub seed: Option<u64>,
}

impl IntegralEstimate {
    pub fn exact(value: f64) -> Self {
        IntegralEstimate {
            value,
            error: 0.0,
            evaluations: 0,
            method: Method::Exact,
            seed: None,
        }
    }

    /// True if `other` lies within `k` combined error figures of `self`.
    ///
    /// The combined figure is the root-sum-square of both errors, the
    /// right comparison for two independent estimates of one quantity.
    pub fn agrees_within(&self, other: &IntegralEstimate, k: f64) -> bool {
        let combined = self.error.hypot(other.error);
        (self.value - other.value).abs() <= k * combined
    }
}

#[derive(Debug, Error)]
pub enum QuadError {
    #[error("cubature failed to reach tolerance within the evaluation budget")]
    NoConvergence { best: IntegralEstimate },
    #[error("integrand produced a non-finite value")]
    NonFinite,
    #[error("{rejected} of {total} Monte Carlo samples were non-finite")]
    Tainted {
        rejected: u64,
        total: u64,
        partial: IntegralEstimate,
    },
    #[error("dimension {0} not supported (cubature covers 1..=3)")]
    Dimension(usize),
    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(u64),
}

impl QuadError {
    /// The best estimate available despite the failure, if any.
    pub fn best_estimate(&self) -> Option<&IntegralEstimate> {
        match self {
            QuadError::NoConvergence { best } => Some(best),
            QuadError::Tainted { partial, .. } => Some(partial),
            _ => None,
        }
    }
}
