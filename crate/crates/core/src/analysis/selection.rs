//! Min-max transform selection over a catalog.

use std::cmp::Ordering;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::extraction::{fit_equalization, QuantizerSpec};
use crate::ro_data::{estimate_error_profile, CoefficientErrorProfile, RoArrayDataset};
use crate::transform::TransformCatalog;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SelectionMode {
    /// Every catalog member.
    Full,
    /// `count` members sampled without replacement by `seed`, plus the DWHT
    /// member when the catalog contains it.
    Subset { count: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub transform_id: usize,
    pub profile: CoefficientErrorProfile,
    pub mode: SelectionMode,
    pub evaluated: usize,
}

/// Per-member evaluation used for the reduction.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub id: usize,
    pub profile: CoefficientErrorProfile,
}

impl Candidate {
    /// Smaller `p_max`, then smaller `p_mean`, then smaller id.
    pub fn rank(&self, other: &Self) -> Ordering {
        self.profile
            .p_max
            .total_cmp(&other.profile.p_max)
            .then(self.profile.p_mean.total_cmp(&other.profile.p_mean))
            .then(self.id.cmp(&other.id))
    }
}

/// Error profile of every listed member, in the given order.
pub fn evaluate_members(
    catalog: &TransformCatalog,
    ids: &[usize],
    dataset: &RoArrayDataset,
    q: &QuantizerSpec,
) -> Result<Vec<Candidate>, AnalysisError> {
    ids.par_iter()
        .map(|&id| {
            let entry = catalog
                .get(id)
                .ok_or_else(|| AnalysisError::InvalidParameter(format!("unknown id {id}")))?;
            let eq = fit_equalization(dataset, &entry.matrix)?;
            let profile = estimate_error_profile(dataset, &entry.matrix, &eq, q)?;
            Ok(Candidate { id, profile })
        })
        .collect()
}

/// Ids visited by a selection run, sorted ascending.
pub fn selection_ids(catalog: &TransformCatalog, mode: SelectionMode) -> Vec<usize> {
    let mut ids: Vec<usize> = match mode {
        SelectionMode::Full => catalog.iter().map(|e| e.id).collect(),
        SelectionMode::Subset { count, seed } => {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let all: Vec<usize> = catalog.iter().map(|e| e.id).collect();
            let mut picked: Vec<usize> = index::sample(&mut rng, all.len(), count.min(all.len()))
                .into_iter()
                .map(|i| all[i])
                .collect();
            if let Some(dwht) = catalog.dwht_id() {
                if !picked.contains(&dwht) {
                    picked.push(dwht);
                }
            }
            picked
        }
    };
    ids.sort_unstable();
    ids
}

/// Member whose maximum per-coefficient bit-error probability is smallest.
pub fn select_transform(
    catalog: &TransformCatalog,
    dataset: &RoArrayDataset,
    q: &QuantizerSpec,
    mode: SelectionMode,
) -> Result<SelectionResult, AnalysisError> {
    if catalog.is_empty() {
        return Err(AnalysisError::EmptyCatalog);
    }
    let ids = selection_ids(catalog, mode);
    let candidates = evaluate_members(catalog, &ids, dataset, q)?;
    let evaluated = candidates.len();
    let best = candidates
        .into_iter()
        .min_by(|a, b| a.rank(b))
        .ok_or(AnalysisError::EmptyCatalog)?;
    Ok(SelectionResult {
        transform_id: best.id,
        profile: best.profile,
        mode,
        evaluated,
    })
}
