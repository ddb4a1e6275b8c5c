//! Fuzzy commitment: helper data `W = Enc(S) ⊕ X`, reconstruction
//! `Ŝ = Dec(W ⊕ Y)`, and a Monte-Carlo harness for block-error rates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bch::{BchCode, BchError, CodeDescriptor, DecodeOutcome};
use crate::bits::{BitSequence, BitsError};
use crate::extraction::{extract_bits, EqualizationProfile, ExtractionError, QuantizerSpec};
use crate::ro_data::{CoefficientErrorProfile, RoArrayDataset};
use crate::transform::SignMatrix;

#[derive(Debug, Error)]
pub enum FcsError {
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("helper data was produced for a different code")]
    CodeMismatch,
    #[error("invalid simulation mode: {0}")]
    InvalidMode(String),
    #[error("invalid helper data: {0}")]
    InvalidHelper(String),
    #[error(transparent)]
    Bch(#[from] BchError),
    #[error(transparent)]
    Bits(#[from] BitsError),
    #[error(transparent)]
    Extraction(#[from] ExtractionError),
}

/// Secret key of `k` bits.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SecretKey(BitSequence);

impl SecretKey {
    pub fn new(bits: BitSequence) -> Self {
        Self(bits)
    }

    /// Uniformly random key of `len` bits.
    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        Self(BitSequence::from_bools((0..len).map(|_| rng.random::<bool>())))
    }

    pub fn bits(&self) -> &BitSequence {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_hex(&self) -> String {
        self.0.to_hex()
    }
}

/// Public helper data and the context needed to reproduce `Y`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HelperData {
    pub w: BitSequence,
    pub code: CodeDescriptor,
    pub transform_id: Option<usize>,
    pub profile_ref: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct HelperRecord {
    w_hex: String,
    code_descriptor: CodeDescriptor,
    transform_id: Option<usize>,
    profile_ref: Option<String>,
}

impl HelperData {
    pub fn with_transform(mut self, id: usize) -> Self {
        self.transform_id = Some(id);
        self
    }

    pub fn with_profile_ref(mut self, reference: impl Into<String>) -> Self {
        self.profile_ref = Some(reference.into());
        self
    }

    pub fn to_json(&self) -> String {
        let record = HelperRecord {
            w_hex: self.w.to_hex(),
            code_descriptor: self.code.clone(),
            transform_id: self.transform_id,
            profile_ref: self.profile_ref.clone(),
        };
        let mut out = serde_json::to_string_pretty(&record).expect("serializable");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> Result<Self, FcsError> {
        let r: HelperRecord =
            serde_json::from_str(text).map_err(|e| FcsError::InvalidHelper(e.to_string()))?;
        Ok(Self {
            w: BitSequence::from_hex(&r.w_hex, r.code_descriptor.n)?,
            code: r.code_descriptor,
            transform_id: r.transform_id,
            profile_ref: r.profile_ref,
        })
    }
}

pub fn enroll(code: &BchCode, key: &SecretKey, x: &BitSequence) -> Result<HelperData, FcsError> {
    if x.len() != code.n() {
        return Err(FcsError::LengthMismatch {
            expected: code.n(),
            found: x.len(),
        });
    }
    let codeword = code.encode(key.bits())?;
    Ok(HelperData {
        w: codeword.xor(x)?,
        code: code.descriptor(),
        transform_id: None,
        profile_ref: None,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Reconstruction {
    Key(SecretKey),
    Failure,
}

impl Reconstruction {
    pub fn key(&self) -> Option<&SecretKey> {
        match self {
            Self::Key(k) => Some(k),
            Self::Failure => None,
        }
    }
}

/// Decodes `W ⊕ Y`; a decoding failure is a value, not an error.
pub fn reconstruct(
    code: &BchCode,
    y: &BitSequence,
    helper: &HelperData,
) -> Result<Reconstruction, FcsError> {
    if helper.code != code.descriptor() {
        return Err(FcsError::CodeMismatch);
    }
    if y.len() != code.n() {
        return Err(FcsError::LengthMismatch {
            expected: code.n(),
            found: y.len(),
        });
    }
    Ok(match code.decode(&helper.w.xor(y)?)? {
        DecodeOutcome::Corrected { message, .. } => Reconstruction::Key(SecretKey::new(message)),
        DecodeOutcome::Failure => Reconstruction::Failure,
    })
}

/// Where simulated error vectors come from.
pub enum ErrorSource<'a> {
    /// Independent `Bernoulli(p_i)` per codeword position.
    Profile(&'a CoefficientErrorProfile),
    /// Enrollment vs. re-measurements of real or synthetic RO arrays.
    Dataset {
        dataset: &'a RoArrayDataset,
        transform: &'a SignMatrix,
        equalization: &'a EqualizationProfile,
        quantizer: &'a QuantizerSpec,
    },
}

/// Wilson score interval at 95% confidence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub count: u64,
    pub rate: f64,
    pub lower: f64,
    pub upper: f64,
}

impl RateEstimate {
    pub fn wilson(count: u64, trials: u64) -> Self {
        const Z: f64 = 1.959_963_984_540_054;
        let n = trials as f64;
        let phat = count as f64 / n;
        let denom = 1.0 + Z * Z / n;
        let center = (phat + Z * Z / (2.0 * n)) / denom;
        let half = Z * (phat * (1.0 - phat) / n + Z * Z / (4.0 * n * n)).sqrt() / denom;
        Self {
            count,
            rate: phat,
            lower: if count == 0 { 0.0 } else { (center - half).max(0.0) },
            upper: if count == trials { 1.0 } else { (center + half).min(1.0) },
        }
    }

    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub trials: u64,
    pub seed: u64,
    pub block_error: RateEstimate,
    pub decode_failure: RateEstimate,
    pub wrong_key: RateEstimate,
}

#[derive(Default, Clone, Copy)]
struct Tally {
    failures: u64,
    wrong: u64,
}

impl std::ops::Add for Tally {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            failures: self.failures + o.failures,
            wrong: self.wrong + o.wrong,
        }
    }
}

fn run_trial(code: &BchCode, key: &SecretKey, x: &BitSequence, y: &BitSequence) -> Result<Tally, FcsError> {
    let helper = enroll(code, key, x)?;
    Ok(match reconstruct(code, y, &helper)? {
        Reconstruction::Key(k) if &k == key => Tally::default(),
        Reconstruction::Key(_) => Tally { failures: 0, wrong: 1 },
        Reconstruction::Failure => Tally { failures: 1, wrong: 0 },
    })
}

/// Runs `trials` independent enroll/reconstruct rounds with uniform keys.
///
/// Trial `i` draws from stream `i` of a ChaCha20 RNG keyed by `seed`. In
/// dataset mode trial `i` uses device `i mod D` and re-measurement
/// `1 + (i div D) mod (M − 1)`.
pub fn simulate(
    code: &BchCode,
    source: &ErrorSource<'_>,
    trials: u64,
    seed: u64,
) -> Result<SimulationReport, FcsError> {
    if trials == 0 {
        return Err(FcsError::InvalidMode("need at least one trial".into()));
    }
    let n = code.n();
    match source {
        ErrorSource::Profile(p) if p.p.len() != n => {
            return Err(FcsError::InvalidMode(format!(
                "profile has {} entries, code length is {n}",
                p.p.len()
            )))
        }
        ErrorSource::Dataset {
            dataset, quantizer, ..
        } => {
            if dataset.measurements() < 2 {
                return Err(FcsError::InvalidMode("dataset needs re-measurements".into()));
            }
            let bits = (crate::ro_data::RO_COUNT - 1) * usize::from(quantizer.bits());
            if bits != n {
                return Err(FcsError::InvalidMode(format!(
                    "extraction yields {bits} bits, code length is {n}"
                )));
            }
        }
        _ => {}
    }

    let tally = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let key = SecretKey::random(code.k(), &mut rng);
            match source {
                ErrorSource::Profile(profile) => {
                    let x = BitSequence::from_bools((0..n).map(|_| rng.random::<bool>()));
                    let e = BitSequence::from_bools(
                        profile.p.iter().map(|&p| rng.random::<f64>() < p),
                    );
                    run_trial(code, &key, &x, &x.xor(&e)?)
                }
                ErrorSource::Dataset {
                    dataset,
                    transform,
                    equalization,
                    quantizer,
                } => {
                    let d = (i % dataset.devices() as u64) as usize;
                    let m = 1 + ((i / dataset.devices() as u64) % (dataset.measurements() as u64 - 1))
                        as usize;
                    let x = extract_bits(dataset.enrollment(d), transform, equalization, quantizer)?;
                    let y = extract_bits(dataset.array(d, m), transform, equalization, quantizer)?;
                    run_trial(code, &key, &x, &y)
                }
            }
        })
        .try_reduce(Tally::default, |a, b| Ok(a + b))?;

    Ok(SimulationReport {
        trials,
        seed,
        block_error: RateEstimate::wilson(tally.failures + tally.wrong, trials),
        decode_failure: RateEstimate::wilson(tally.failures, trials),
        wrong_key: RateEstimate::wilson(tally.wrong, trials),
    })
}
