//! Weighted nearest-neighbour classification: weight generators, asymptotic
//! constants, exact neighbour search, Gaussian-mixture populations and a
//! Monte Carlo regret harness.

pub mod config;
pub mod classifier;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod format;
pub mod popmodel;
pub mod region;
pub mod search;
pub mod simharness;
pub mod weightgen;

pub use dataset::LabeledDataset;
pub use error::{Error, Result};
pub use popmodel::PopulationModel;
pub use region::BoxRegion;
pub use search::NormSpec;
pub use weightgen::{Scheme, SchemeParams, WeightVector};
