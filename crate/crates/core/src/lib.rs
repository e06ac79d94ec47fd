//! Random Young diagrams in an n×k box under the skew Howe duality measure
//! `μ(λ) ∝ s_λ(x) s_λ'(y)`: exact sampling, rational oracles, correlation kernels,
//! limit shapes, edge statistics and tiling pictures.

pub mod error;
pub mod exact_oracle;
pub mod fluctuations;
pub mod harness;
pub mod kernels;
pub mod partitions;
pub mod quad;
pub mod saddle;
pub mod sampler;
pub mod specialization;
pub mod tilings;

pub use error::{Error, Result};
pub use partitions::Partition;
pub use specialization::{SpecFamily, SpecPair};
