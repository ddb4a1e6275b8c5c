//! Bit extraction from RO arrays: transform, histogram equalization,
//! equiprobable K-bit quantization, Gray mapping and concatenation.
//!
//! The DC coefficient (row-major index 0) is never used, so a 16×16 array
//! yields `255·K` bits.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::special::q_inverse;
use crate::bits::BitSequence;
use crate::ro_data::RoArrayDataset;
use crate::transform::{SignMatrix, TransformError};

pub const MAX_BITS_PER_COEFFICIENT: u8 = 8;

#[derive(Debug, Error, PartialEq)]
pub enum ExtractionError {
    #[error("bits per coefficient must be in 1..=8, got {0}")]
    InvalidBitCount(u8),
    #[error("Gray index {index} out of range for {bits} bits")]
    IndexOutOfRange { index: usize, bits: u8 },
    #[error("need at least 2 devices to fit equalization, got {0}")]
    TooFewDevices(usize),
    #[error("coefficient {0} has zero variance across devices")]
    ZeroVariance(usize),
    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("invalid equalization profile: {0}")]
    InvalidProfile(String),
    #[error(transparent)]
    Transform(#[from] TransformError),
}

/// Equiprobable quantizer for standard Gaussian inputs.
///
/// `boundaries[j] = Q⁻¹(1 − j/2^K)` for `j = 0..=2^K`, so the outer
/// boundaries are `∓∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizerSpec {
    bits: u8,
    boundaries: Vec<f64>,
}

impl QuantizerSpec {
    pub fn bits(&self) -> u8 {
        self.bits
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    pub fn cell_count(&self) -> usize {
        1 << self.bits
    }

    /// 0-based cell index `j` such that `b_j < value ≤ b_{j+1}`.
    pub fn quantize(&self, value: f64) -> usize {
        let interior = &self.boundaries[1..self.boundaries.len() - 1];
        interior.partition_point(|&b| b < value)
    }
}

pub fn quantizer_boundaries(bits: u8) -> Result<QuantizerSpec, ExtractionError> {
    if !(1..=MAX_BITS_PER_COEFFICIENT).contains(&bits) {
        return Err(ExtractionError::InvalidBitCount(bits));
    }
    let cells = 1usize << bits;
    let mut boundaries = vec![0.0; cells + 1];
    boundaries[0] = f64::NEG_INFINITY;
    boundaries[cells] = f64::INFINITY;
    // Fill the lower half and mirror so the boundaries are exactly antisymmetric.
    for j in 1..cells / 2 {
        let b = q_inverse(1.0 - j as f64 / cells as f64)
            .expect("argument strictly inside (0, 1)");
        boundaries[j] = b;
        boundaries[cells - j] = -b;
    }
    boundaries[cells / 2] = 0.0;
    Ok(QuantizerSpec { bits, boundaries })
}

/// Reflected binary Gray code of `index`, most significant bit first.
pub fn gray_encode(index: usize, bits: u8) -> Result<Vec<u8>, ExtractionError> {
    if !(1..=MAX_BITS_PER_COEFFICIENT).contains(&bits) {
        return Err(ExtractionError::InvalidBitCount(bits));
    }
    if index >= 1 << bits {
        return Err(ExtractionError::IndexOutOfRange { index, bits });
    }
    let gray = index ^ (index >> 1);
    Ok((0..bits).rev().map(|i| ((gray >> i) & 1) as u8).collect())
}

/// Per-coefficient mean and standard deviation used to standardize
/// transform coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct EqualizationProfile {
    means: Vec<f64>,
    stds: Vec<f64>,
}

/// One JSON record of an [`EqualizationProfile`]; `index` is 1-based (1 = DC).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EqualizationRecord {
    pub index: usize,
    pub mean: f64,
    pub std: f64,
}

impl EqualizationProfile {
    /// Every coefficient except the DC must have a positive, finite std.
    pub fn new(means: Vec<f64>, stds: Vec<f64>) -> Result<Self, ExtractionError> {
        if means.len() != stds.len() {
            return Err(ExtractionError::SizeMismatch {
                expected: means.len(),
                found: stds.len(),
            });
        }
        let side = (means.len() as f64).sqrt().round() as usize;
        if side * side != means.len() || side < 2 {
            return Err(ExtractionError::InvalidProfile(format!(
                "{} coefficients is not a square array",
                means.len()
            )));
        }
        if means.iter().chain(&stds).any(|v| !v.is_finite()) {
            return Err(ExtractionError::InvalidProfile("non-finite statistic".into()));
        }
        if let Some(i) = stds.iter().skip(1).position(|&s| s <= 0.0) {
            return Err(ExtractionError::ZeroVariance(i + 2));
        }
        Ok(Self { means, stds })
    }

    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn stds(&self) -> &[f64] {
        &self.stds
    }

    pub fn to_records(&self) -> Vec<EqualizationRecord> {
        self.means
            .iter()
            .zip(&self.stds)
            .enumerate()
            .map(|(i, (&mean, &std))| EqualizationRecord {
                index: i + 1,
                mean,
                std,
            })
            .collect()
    }

    pub fn from_records(mut records: Vec<EqualizationRecord>) -> Result<Self, ExtractionError> {
        records.sort_by_key(|r| r.index);
        if records.iter().enumerate().any(|(i, r)| r.index != i + 1) {
            return Err(ExtractionError::InvalidProfile(
                "indices must be exactly 1..=k²".into(),
            ));
        }
        Self::new(
            records.iter().map(|r| r.mean).collect(),
            records.iter().map(|r| r.std).collect(),
        )
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(&self.to_records()).expect("serializable");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> Result<Self, ExtractionError> {
        let records: Vec<EqualizationRecord> = serde_json::from_str(text)
            .map_err(|e| ExtractionError::InvalidProfile(e.to_string()))?;
        Self::from_records(records)
    }
}

/// Fits per-coefficient sample mean and std over devices, using each
/// device's enrollment measurement.
pub fn fit_equalization(
    dataset: &RoArrayDataset,
    t: &SignMatrix,
) -> Result<EqualizationProfile, ExtractionError> {
    let devices = dataset.devices();
    if devices < 2 {
        return Err(ExtractionError::TooFewDevices(devices));
    }
    let coeffs = (0..devices)
        .map(|d| t.apply_2d(dataset.enrollment(d)).map(|c| c.into_values()))
        .collect::<Result<Vec<_>, _>>()?;
    let len = coeffs[0].len();
    let n = devices as f64;
    let mut means = vec![0.0; len];
    for c in &coeffs {
        means.iter_mut().zip(c).for_each(|(m, v)| *m += v);
    }
    means.iter_mut().for_each(|m| *m /= n);
    let mut stds = vec![0.0; len];
    for c in &coeffs {
        for ((s, v), m) in stds.iter_mut().zip(c).zip(&means) {
            *s += (v - m) * (v - m);
        }
    }
    stds.iter_mut().for_each(|s| *s = (*s / (n - 1.0)).sqrt());
    EqualizationProfile::new(means, stds)
}

/// Standardized coefficients `(c_i − μ_i)/σ_i`, DC included at index 0.
pub fn equalized_coefficients(
    x: &[f64],
    t: &SignMatrix,
    profile: &EqualizationProfile,
) -> Result<Vec<f64>, ExtractionError> {
    let k = t.size();
    if profile.len() != k * k {
        return Err(ExtractionError::SizeMismatch {
            expected: k * k,
            found: profile.len(),
        });
    }
    let coeffs = t.apply_2d(x)?;
    Ok(coeffs
        .values()
        .iter()
        .zip(profile.means.iter().zip(&profile.stds))
        .map(|(&c, (&m, &s))| if s > 0.0 { (c - m) / s } else { 0.0 })
        .collect())
}

/// Extracts `(k² − 1)·K` bits from one RO array, skipping the DC coefficient.
pub fn extract_bits(
    x: &[f64],
    t: &SignMatrix,
    profile: &EqualizationProfile,
    q: &QuantizerSpec,
) -> Result<BitSequence, ExtractionError> {
    let equalized = equalized_coefficients(x, t, profile)?;
    let mut bits = Vec::with_capacity((equalized.len() - 1) * usize::from(q.bits()));
    for &v in &equalized[1..] {
        bits.extend(gray_encode(q.quantize(v), q.bits())?);
    }
    Ok(BitSequence::new(bits).expect("Gray codes are binary"))
}

/// Bit sequences for every device at one measurement index (0 = enrollment).
pub fn extract_dataset(
    dataset: &RoArrayDataset,
    measurement: usize,
    t: &SignMatrix,
    profile: &EqualizationProfile,
    q: &QuantizerSpec,
) -> Result<Vec<BitSequence>, ExtractionError> {
    (0..dataset.devices())
        .map(|d| extract_bits(dataset.array(d, measurement), t, profile, q))
        .collect()
}
