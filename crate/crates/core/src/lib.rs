//! Key generation from ring-oscillator PUF arrays.
//!
//! The crate covers the whole chain from raw RO measurements to a bound key
//! and its analysis:
//!
//! - [`transform`]: catalog of 16×16 orthogonal ±1 transforms built from
//!   exhaustively searched 4×4 seeds, and the separable 2D transform.
//! - [`extraction`]: equalization, equiprobable quantization and Gray mapping.
//! - [`ro_data`]: synthetic and CSV datasets, error profiles, uniqueness.
//! - [`gf`] / [`bch`]: binary BCH codes with a bounded-distance decoder.
//! - [`fcs`]: fuzzy commitment enrollment, reconstruction and simulation.
//! - [`analysis`]: Poisson-binomial tails, code-design bounds, rate regions
//!   and transform selection.

pub mod analysis;
pub mod bch;
pub mod bits;
pub mod extraction;
pub mod fcs;
pub mod gf;
pub mod ro_data;
pub mod transform;

pub use bch::{build_code, BchCode, CodeDescriptor, DecodeOutcome};
pub use bits::BitSequence;
pub use extraction::{
    extract_bits, fit_equalization, gray_encode, quantizer_boundaries, EqualizationProfile,
    QuantizerSpec,
};
pub use fcs::{enroll, reconstruct, simulate, ErrorSource, HelperData, Reconstruction, SecretKey};
pub use ro_data::{
    estimate_error_profile, generate_synthetic, randomness_smoke, uniqueness,
    CoefficientErrorProfile, RoArrayDataset, SyntheticModel,
};
pub use transform::{
    apply_2d, build_catalog, double, enumerate_base_matrices, SignMatrix, TransformCatalog,
};
