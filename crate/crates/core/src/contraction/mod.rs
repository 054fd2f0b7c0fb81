//! Contraction engines for capped networks.
//!
//! Results are returned as a mantissa tensor plus a logarithmic scale so that
//! large lattices neither overflow nor underflow.

pub mod boundary;
pub mod exact;

use crate::peps::CappedNetwork;
use crate::scalar::Real;
use crate::tensor::Tensor;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use boundary::contract_boundary_mps;
pub use exact::{contract_exact, Env, Zipper};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContractionError {
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("numerical inconsistency: {0}")]
    Numerical(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Exact,
    BoundaryMps,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Exact => "exact",
            Engine::BoundaryMps => "boundary_mps",
        }
    }

    pub fn from_name(s: &str) -> Option<Engine> {
        match s {
            "exact" => Some(Engine::Exact),
            "boundary_mps" | "boundary" | "mps" => Some(Engine::BoundaryMps),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ContractionConfig {
    pub engine: Engine,
    /// Boundary-MPS bond dimension cap.
    pub chi: usize,
    pub svd_floor: f64,
    /// Largest intermediate tensor (in complex entries) the exact engine
    /// may allocate.
    pub max_entries: usize,
    /// Enables exact network reductions and skipping of Z-checks under
    /// Z-diagonal noise. Disabling them changes only the cost.
    pub fast_paths: bool,
}

impl Default for ContractionConfig {
    fn default() -> Self {
        Self {
            engine: Engine::Exact,
            chi: 8,
            svd_floor: crate::tensor::SVD_FLOOR,
            max_entries: 1 << 27,
            fast_paths: true,
        }
    }
}

impl ContractionConfig {
    pub fn exact() -> Self {
        Self::default()
    }

    pub fn boundary(chi: usize) -> Self {
        Self { engine: Engine::BoundaryMps, chi, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), ContractionError> {
        if self.chi < 1 {
            return Err(ContractionError::Resource("chi must be at least 1".into()));
        }
        Ok(())
    }
}

/// `tensor · e^log_scale`.
#[derive(Clone, Debug)]
pub struct Scaled<T: Real> {
    pub tensor: Tensor<T>,
    pub log_scale: T,
}

impl<T: Real> Scaled<T> {
    /// The (real part of the) scalar value as a mantissa/log pair.
    pub fn real_value(&self) -> ScaledReal<T> {
        ScaledReal { mantissa: self.tensor.value().re, log_scale: self.log_scale }
    }
}

/// Positive-or-signed real number `mantissa · e^log_scale`.
#[derive(Clone, Copy, Debug)]
pub struct ScaledReal<T: Real> {
    pub mantissa: T,
    pub log_scale: T,
}

impl<T: Real> ScaledReal<T> {
    /// `self / other` as a plain number.
    pub fn ratio(&self, other: &Self) -> T {
        self.mantissa / other.mantissa * (self.log_scale - other.log_scale).exp()
    }

    pub fn to_f64(&self) -> f64 {
        self.mantissa.to_f64_lossy() * self.log_scale.to_f64_lossy().exp()
    }
}

/// Truncation diagnostics of one approximate contraction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Largest relative discarded weight of a single truncation.
    pub max_discarded: f64,
    /// Sum of relative discarded weights.
    pub total_discarded: f64,
    pub max_bond: usize,
}

impl Diagnostics {
    pub fn merge(&mut self, other: &Diagnostics) {
        self.max_discarded = self.max_discarded.max(other.max_discarded);
        self.total_discarded += other.total_discarded;
        self.max_bond = self.max_bond.max(other.max_bond);
    }
}

/// Contracts `net` with the engine selected by `cfg`.
pub fn contract<T: Real>(net: &CappedNetwork<T>, cfg: &ContractionConfig) -> Result<(Scaled<T>, Diagnostics), ContractionError> {
    match cfg.engine {
        Engine::Exact => Ok((contract_exact(net, cfg)?, Diagnostics::default())),
        Engine::BoundaryMps => contract_boundary_mps(net, cfg),
    }
}
