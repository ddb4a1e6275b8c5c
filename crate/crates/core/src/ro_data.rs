//! RO-array datasets: seeded synthetic generation, CSV ingestion/export,
//! per-coefficient bit-error estimation, uniqueness and randomness checks.

use std::io::{Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::special::q_function;
use crate::bits::BitSequence;
use crate::extraction::{extract_bits, EqualizationProfile, ExtractionError, QuantizerSpec};
use crate::transform::SignMatrix;

/// Rows and columns of the RO grid.
pub const GRID_SIDE: usize = 16;
/// ROs per array.
pub const RO_COUNT: usize = GRID_SIDE * GRID_SIDE;

/// Reference values measured on the external RO dataset; for report
/// annotation only.
pub mod reference {
    pub const P_MAX_ST: f64 = 0.0149;
    pub const P_MEAN_ST: f64 = 0.0088;
    pub const UNIQUENESS_MEAN_ST: f64 = 0.5001;
    pub const UNIQUENESS_VARIANCE_ST: f64 = 2.69e-2;
}

#[derive(Debug, Error)]
pub enum RoDataError {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },
    #[error("no devices in input")]
    NoDevices,
    #[error("need at least 2 measurements per device, got {0}")]
    TooFewMeasurements(usize),
    #[error("error profile needs a 1-bit quantizer, got {0} bits")]
    UnsupportedQuantizer(u8),
    #[error("need at least {needed} sequences/bits, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("sequence length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("invalid error profile: {0}")]
    InvalidProfile(String),
    #[error(transparent)]
    Extraction(#[from] ExtractionError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// `devices × measurements × 16×16` RO outputs. Measurement 0 is enrollment.
#[derive(Debug, Clone, PartialEq)]
pub struct RoArrayDataset {
    devices: usize,
    measurements: usize,
    values: Vec<f64>,
}

impl RoArrayDataset {
    /// `values` is laid out device-major, then measurement, then row-major ROs.
    pub fn new(devices: usize, measurements: usize, values: Vec<f64>) -> Result<Self, RoDataError> {
        if devices == 0 {
            return Err(RoDataError::NoDevices);
        }
        if measurements == 0 {
            return Err(RoDataError::InvalidDataset("no measurements".into()));
        }
        if values.len() != devices * measurements * RO_COUNT {
            return Err(RoDataError::InvalidDataset(format!(
                "expected {} values, got {}",
                devices * measurements * RO_COUNT,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(RoDataError::InvalidDataset("non-finite RO value".into()));
        }
        Ok(Self {
            devices,
            measurements,
            values,
        })
    }

    pub fn devices(&self) -> usize {
        self.devices
    }

    pub fn measurements(&self) -> usize {
        self.measurements
    }

    pub fn array(&self, device: usize, measurement: usize) -> &[f64] {
        assert!(device < self.devices && measurement < self.measurements);
        let start = (device * self.measurements + measurement) * RO_COUNT;
        &self.values[start..start + RO_COUNT]
    }

    pub fn enrollment(&self, device: usize) -> &[f64] {
        self.array(device, 0)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Dataset restricted to the listed devices, in the given order.
    pub fn select_devices(&self, devices: &[usize]) -> Result<Self, RoDataError> {
        let mut values = Vec::with_capacity(devices.len() * self.measurements * RO_COUNT);
        for &d in devices {
            if d >= self.devices {
                return Err(RoDataError::InvalidDataset(format!("no device {d}")));
            }
            for m in 0..self.measurements {
                values.extend_from_slice(self.array(d, m));
            }
        }
        Self::new(devices.len(), self.measurements, values)
    }

    /// Writes `device,measurement,ro_0,...,ro_255` rows; measurements are 1-based.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), RoDataError> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["device".to_string(), "measurement".to_string()];
        header.extend((0..RO_COUNT).map(|i| format!("ro_{i}")));
        w.write_record(&header)?;
        for d in 0..self.devices {
            for m in 0..self.measurements {
                let mut row = vec![d.to_string(), (m + 1).to_string()];
                // `{}` on f64 prints the shortest string that parses back exactly.
                row.extend(self.array(d, m).iter().map(|v| format!("{v}")));
                w.write_record(&row)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the CSV schema written by [`write_csv`](Self::write_csv).
    ///
    /// Devices keep their order of first appearance; each device must list
    /// measurements `1..=M` with the same `M` for every device.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self, RoDataError> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(reader);
        let expected_cols = RO_COUNT + 2;
        let mut records = r.records();
        let header = match records.next() {
            None => return Err(RoDataError::NoDevices),
            Some(h) => h?,
        };
        let header_ok = header.len() == expected_cols
            && &header[0] == "device"
            && &header[1] == "measurement"
            && (0..RO_COUNT).all(|i| header[i + 2] == format!("ro_{i}"));
        if !header_ok {
            return Err(RoDataError::Malformed {
                line: 1,
                message: format!("header must be device,measurement,ro_0..ro_{}", RO_COUNT - 1),
            });
        }

        let mut order: Vec<String> = Vec::new();
        let mut rows: std::collections::HashMap<String, Vec<(usize, Vec<f64>)>> =
            std::collections::HashMap::new();
        for rec in records {
            let rec = rec?;
            let line = rec.position().map_or(0, |p| p.line());
            if rec.len() != expected_cols {
                return Err(RoDataError::Malformed {
                    line,
                    message: format!("expected {expected_cols} columns, found {}", rec.len()),
                });
            }
            let device = rec[0].trim().to_string();
            let measurement: usize = rec[1].trim().parse().map_err(|_| RoDataError::Malformed {
                line,
                message: format!("bad measurement index {:?}", &rec[1]),
            })?;
            let values = rec
                .iter()
                .skip(2)
                .map(|f| {
                    f.trim()
                        .parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| RoDataError::Malformed {
                            line,
                            message: format!("bad RO value {f:?}"),
                        })
                })
                .collect::<Result<Vec<f64>, _>>()?;
            if !rows.contains_key(&device) {
                order.push(device.clone());
            }
            rows.entry(device).or_default().push((measurement, values));
        }
        if order.is_empty() {
            return Err(RoDataError::NoDevices);
        }

        let measurements = rows[&order[0]].len();
        let mut values = Vec::with_capacity(order.len() * measurements * RO_COUNT);
        for device in &order {
            let mut list = rows.remove(device).expect("device recorded");
            list.sort_by_key(|(m, _)| *m);
            let indices: Vec<usize> = list.iter().map(|(m, _)| *m).collect();
            if indices != (1..=measurements).collect::<Vec<_>>() {
                return Err(RoDataError::InvalidDataset(format!(
                    "device {device} must have measurements 1..={measurements}, found {indices:?}"
                )));
            }
            list.into_iter().for_each(|(_, v)| values.extend(v));
        }
        Self::new(order.len(), measurements, values)
    }

    pub fn save_csv(&self, path: impl AsRef<std::path::Path>) -> Result<(), RoDataError> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    pub fn load_csv(path: impl AsRef<std::path::Path>) -> Result<Self, RoDataError> {
        let file = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(file))
    }
}

/// Gaussian RO field with separable exponential spatial correlation
/// `ρ^{|Δrow|+|Δcol|}` and i.i.d. Gaussian measurement noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticModel {
    /// Device-to-device std of each RO.
    pub sigma_x: f64,
    /// Correlation between horizontally or vertically adjacent ROs.
    pub rho: f64,
    /// Measurement noise std.
    pub sigma_e: f64,
    pub mu0: f64,
}

impl Default for SyntheticModel {
    fn default() -> Self {
        Self {
            sigma_x: 1.0,
            rho: 0.6,
            sigma_e: 0.05,
            mu0: 0.0,
        }
    }
}

impl SyntheticModel {
    pub fn validate(&self) -> Result<(), RoDataError> {
        if !(self.sigma_x > 0.0 && self.sigma_x.is_finite()) {
            return Err(RoDataError::InvalidModel("sigma_x must be positive".into()));
        }
        if !(self.sigma_e >= 0.0 && self.sigma_e.is_finite()) {
            return Err(RoDataError::InvalidModel("sigma_e must be non-negative".into()));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return Err(RoDataError::InvalidModel("rho must lie in [0, 1)".into()));
        }
        if !self.mu0.is_finite() {
            return Err(RoDataError::InvalidModel("mu0 must be finite".into()));
        }
        Ok(())
    }

    /// One device's measurements, drawn from its own ChaCha stream.
    fn device(&self, measurements: usize, seed: u64, device: usize) -> Vec<f64> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(device as u64);
        let mut field: Vec<f64> = (0..RO_COUNT).map(|_| StandardNormal.sample(&mut rng)).collect();
        let innovation = (1.0 - self.rho * self.rho).sqrt();
        // AR(1) along each row, then along each column: unit marginal variance
        // and separable covariance.
        for r in 0..GRID_SIDE {
            for c in 1..GRID_SIDE {
                let prev = field[r * GRID_SIDE + c - 1];
                let cur = &mut field[r * GRID_SIDE + c];
                *cur = self.rho * prev + innovation * *cur;
            }
        }
        for c in 0..GRID_SIDE {
            for r in 1..GRID_SIDE {
                let prev = field[(r - 1) * GRID_SIDE + c];
                let cur = &mut field[r * GRID_SIDE + c];
                *cur = self.rho * prev + innovation * *cur;
            }
        }
        field
            .iter_mut()
            .for_each(|v| *v = self.mu0 + self.sigma_x * *v);

        let mut out = Vec::with_capacity(measurements * RO_COUNT);
        out.extend_from_slice(&field);
        for _ in 1..measurements {
            out.extend(field.iter().map(|&v| {
                let noise: f64 = StandardNormal.sample(&mut rng);
                v + self.sigma_e * noise
            }));
        }
        out
    }
}

/// Seeded synthetic dataset; device `d` uses stream `d` of a ChaCha20 RNG
/// keyed by `seed`, so the output does not depend on scheduling.
pub fn generate_synthetic(
    model: &SyntheticModel,
    devices: usize,
    measurements: usize,
    seed: u64,
) -> Result<RoArrayDataset, RoDataError> {
    model.validate()?;
    if devices == 0 || measurements == 0 {
        return Err(RoDataError::InvalidModel(
            "need at least one device and one measurement".into(),
        ));
    }
    let values: Vec<f64> = (0..devices)
        .into_par_iter()
        .flat_map_iter(|d| model.device(measurements, seed, d))
        .collect();
    RoArrayDataset::new(devices, measurements, values)
}

/// Per-coefficient bit-error probabilities (DC excluded).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientErrorProfile {
    pub p: Vec<f64>,
    pub p_max: f64,
    pub p_mean: f64,
}

impl CoefficientErrorProfile {
    pub fn new(p: Vec<f64>) -> Result<Self, RoDataError> {
        if p.is_empty() {
            return Err(RoDataError::InvalidProfile("empty profile".into()));
        }
        if let Some(bad) = p.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(RoDataError::InvalidProfile(format!(
                "probability {bad} outside [0, 1]"
            )));
        }
        let p_max = p.iter().copied().fold(0.0, f64::max);
        let p_mean = p.iter().sum::<f64>() / p.len() as f64;
        Ok(Self { p, p_max, p_mean })
    }

    pub fn constant(p: f64, len: usize) -> Result<Self, RoDataError> {
        Self::new(vec![p; len])
    }

    /// Rebuilds from JSON and checks `p_max`/`p_mean` against the vector.
    pub fn from_json(text: &str) -> Result<Self, RoDataError> {
        let raw: Self =
            serde_json::from_str(text).map_err(|e| RoDataError::InvalidProfile(e.to_string()))?;
        let checked = Self::new(raw.p.clone())?;
        if (checked.p_max - raw.p_max).abs() > 1e-12 || (checked.p_mean - raw.p_mean).abs() > 1e-12
        {
            return Err(RoDataError::InvalidProfile(
                "p_max/p_mean inconsistent with p".into(),
            ));
        }
        Ok(checked)
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("serializable");
        out.push('\n');
        out
    }

    /// CSV `index,p` with 1-based coefficient indices starting at 2 (DC is 1).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,p\n");
        for (i, p) in self.p.iter().enumerate() {
            out.push_str(&format!("{},{}\n", i + 2, p));
        }
        out
    }
}

/// Disagreement counts between enrollment and each re-measurement.
fn disagreement_counts(
    dataset: &RoArrayDataset,
    device: usize,
    t: &SignMatrix,
    profile: &EqualizationProfile,
    q: &QuantizerSpec,
) -> Result<Vec<u64>, ExtractionError> {
    let enrolled = extract_bits(dataset.enrollment(device), t, profile, q)?;
    let mut counts = vec![0u64; enrolled.len()];
    for m in 1..dataset.measurements() {
        let noisy = extract_bits(dataset.array(device, m), t, profile, q)?;
        for ((c, a), b) in counts.iter_mut().zip(enrolled.as_slice()).zip(noisy.as_slice()) {
            *c += u64::from(a ^ b);
        }
    }
    Ok(counts)
}

/// Fraction of (device, re-measurement) pairs whose bit at each coefficient
/// disagrees with enrollment.
pub fn estimate_error_profile(
    dataset: &RoArrayDataset,
    t: &SignMatrix,
    profile: &EqualizationProfile,
    q: &QuantizerSpec,
) -> Result<CoefficientErrorProfile, RoDataError> {
    if dataset.measurements() < 2 {
        return Err(RoDataError::TooFewMeasurements(dataset.measurements()));
    }
    if q.bits() != 1 {
        return Err(RoDataError::UnsupportedQuantizer(q.bits()));
    }
    let counts = (0..dataset.devices())
        .into_par_iter()
        .map(|d| disagreement_counts(dataset, d, t, profile, q))
        .try_reduce(
            || vec![0u64; RO_COUNT - 1],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                Ok(a)
            },
        )?;
    let trials = (dataset.devices() * (dataset.measurements() - 1)) as f64;
    CoefficientErrorProfile::new(counts.iter().map(|&c| c as f64 / trials).collect())
}

/// Mean and (population) variance of pairwise fractional Hamming distances.
pub fn uniqueness(seqs: &[BitSequence]) -> Result<(f64, f64), RoDataError> {
    if seqs.len() < 2 {
        return Err(RoDataError::TooShort {
            needed: 2,
            got: seqs.len(),
        });
    }
    let len = seqs[0].len();
    if let Some(s) = seqs.iter().find(|s| s.len() != len) {
        return Err(RoDataError::LengthMismatch(len, s.len()));
    }
    if len == 0 {
        return Err(RoDataError::TooShort { needed: 1, got: 0 });
    }
    let distances: Vec<f64> = (0..seqs.len())
        .flat_map(|i| (i + 1..seqs.len()).map(move |j| (i, j)))
        .map(|(i, j)| seqs[i].hamming_distance(&seqs[j]).expect("equal lengths") as f64 / len as f64)
        .collect();
    let n = distances.len() as f64;
    let mean = distances.iter().sum::<f64>() / n;
    let var = distances.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / n;
    Ok((mean, var))
}

/// Significance level of the randomness smoke tests.
pub const SMOKE_LEVEL: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomnessReport {
    pub monobit_z: f64,
    pub monobit_p: f64,
    pub monobit_pass: bool,
    pub runs_z: f64,
    pub runs_p: f64,
    pub runs_pass: bool,
}

impl RandomnessReport {
    pub fn passed(&self) -> bool {
        self.monobit_pass && self.runs_pass
    }
}

/// Frequency (monobit) and runs tests with two-sided normal p-values.
pub fn randomness_smoke(bits: &BitSequence) -> Result<RandomnessReport, RoDataError> {
    let n = bits.len();
    if n < 100 {
        return Err(RoDataError::TooShort { needed: 100, got: n });
    }
    let nf = n as f64;
    let ones = bits.weight() as f64;
    let monobit_z = (2.0 * ones - nf) / nf.sqrt();
    let monobit_p = 2.0 * q_function(monobit_z.abs());

    let pi = ones / nf;
    let runs = 1 + bits.as_slice().windows(2).filter(|w| w[0] != w[1]).count();
    let spread = pi * (1.0 - pi);
    // The runs statistic is only meaningful when the frequency is near 1/2.
    let (runs_z, runs_p) = if (pi - 0.5).abs() >= 2.0 / nf.sqrt() || spread == 0.0 {
        (f64::INFINITY, 0.0)
    } else {
        let z = (runs as f64 - 2.0 * nf * spread) / (2.0 * (2.0 * nf).sqrt() * spread);
        (z, 2.0 * q_function(z.abs()))
    };
    Ok(RandomnessReport {
        monobit_z,
        monobit_p,
        monobit_pass: monobit_p >= SMOKE_LEVEL,
        runs_z,
        runs_p,
        runs_pass: runs_p >= SMOKE_LEVEL,
    })
}
