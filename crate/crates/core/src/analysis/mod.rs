//! Reliability and rate analysis.

pub mod bounds;
pub mod poisson_binomial;
pub mod regions;
pub mod selection;
pub mod special;

use thiserror::Error;

pub use bounds::{gv_dimension, hamming_ball_volume, required_min_distance};
pub use poisson_binomial::{
    binomial_tail, block_error_probability_dftcf, block_error_probability_dp,
};
pub use regions::{
    cs_point, cs_region_mgl, fcs_region, finite_length_point, CodeRates, RatePoint,
    RegionBoundary, RegionKind, DEFAULT_GRID,
};
pub use selection::{select_transform, SelectionMode, SelectionResult};
pub use special::{binary_entropy, q_function, q_inverse};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("probability {0} out of range")]
    ProbabilityOutOfRange(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("catalog is empty")]
    EmptyCatalog,
    #[error(transparent)]
    Extraction(#[from] crate::extraction::ExtractionError),
    #[error(transparent)]
    RoData(#[from] crate::ro_data::RoDataError),
}
