//! Augmented quantization: fitting mixtures of Dirac, uniform, Gaussian and
//! hybrid product measures to samples by minimizing a Wasserstein
//! quantization error.

pub mod aq;
pub mod error;
pub mod experiments;
pub mod families;
pub mod lloyd;
pub mod marginal;
pub mod mixture;
pub mod sample;
pub mod sensitivity;
pub mod special;
pub mod testgen;
pub mod transport;

pub use error::{AqError, Result};
pub use families::{Family, Representative};
pub use marginal::Marginal;
pub use mixture::{Clustering, Mixture};
pub use sample::Sample;
pub use aq::{fit, AqConfig, FitReport};
