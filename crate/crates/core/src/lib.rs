//! Synthesis of self-similar and multifractal traffic streams, additive
//! signal/noise mixing at a controlled variance ratio, and estimation of the
//! generalized Hurst exponent h(q).

pub mod analysis;
pub mod error;
pub mod experiment;
pub mod io;
pub mod mixer;
pub mod series;
pub mod stats;
pub mod traffic;

pub use error::{Error, Result};
pub use series::{Dist, ModelDescriptor, ModelSpec, Provenance, Series};
