//! Tensor-network simulation of surface-code error correction under arbitrary
//! single-qubit noise.
//!
//! The encoded Bell pair of a W×L surface code is held as a grid of doubled
//! site tensors. Noise, check projectors and logical insertions act locally;
//! probabilities and logical process matrices come from exact or
//! boundary-MPS contraction of the capped grid.

pub mod contraction;
pub mod ec;
pub mod experiment;
pub mod layout;
pub mod linalg;
pub mod metrics;
pub mod noise;
pub mod oracle;
pub mod pauli;
pub mod peps;
pub mod qp;
pub mod scalar;
pub mod tensor;

pub use contraction::{ContractionConfig, Engine};
pub use ec::{decode, run_round, ProcessMatrix, RoundResult};
pub use layout::{build_layout, CodeLayout, Syndrome};
pub use noise::{make_channel, Approximation, NoiseModel};
pub use pauli::{Pauli, PauliString};
pub use scalar::Real;

/// Double-precision instantiations used by the experiment driver.
pub type Complex = scalar::C<f64>;
pub type Tensor = tensor::Tensor<f64>;
pub type Channel = noise::Channel<f64>;
pub type DensityNetwork = peps::DensityNetwork<f64>;
pub type CappedNetwork = peps::CappedNetwork<f64>;
