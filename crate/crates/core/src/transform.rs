//! Multiplication-free orthogonal ±1 transforms.
//!
//! A [`SignMatrix`] holds a square matrix whose entries are all `+1` or `-1`.
//! Orthogonal 4×4 seeds are found by exhaustive search over every sign
//! pattern; each seed is then doubled twice with one of the eight block
//! patterns
//!
//! ```text
//! 0: [ A  A;  A -A]   1: [ A  A; -A  A]   2: [ A -A;  A  A]   3: [-A  A;  A  A]
//! 4: [-A -A; -A  A]   5: [-A -A;  A -A]   6: [-A  A; -A -A]   7: [ A -A; -A -A]
//! ```
//!
//! which yields the 16×16 [`TransformCatalog`]. Catalog members are sorted
//! lexicographically on their flattened entries (`+1` before `-1`) so ids are
//! stable across runs and platforms.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Size of the seed matrices found by exhaustive search.
pub const BASE_SIZE: usize = 4;
/// Size of catalog members.
pub const CATALOG_SIZE: usize = 16;
/// Number of block patterns usable by [`double`].
pub const CONSTRUCTION_COUNT: u8 = 8;

/// Block signs `[top-left, top-right, bottom-left, bottom-right]` per construction.
const BLOCK_SIGNS: [[i8; 4]; 8] = [
    [1, 1, 1, -1],
    [1, 1, -1, 1],
    [1, -1, 1, 1],
    [-1, 1, 1, 1],
    [-1, -1, -1, 1],
    [-1, -1, 1, -1],
    [-1, 1, -1, -1],
    [1, -1, -1, -1],
];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TransformError {
    #[error("matrix is not orthogonal")]
    NotOrthogonal,
    #[error("construction index {0} out of range 0..8")]
    InvalidConstruction(u8),
    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("invalid sign matrix: {0}")]
    InvalidMatrix(String),
    #[error("invalid catalog: {0}")]
    InvalidCatalog(String),
}

/// Square matrix with entries in {+1, -1}, stored row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SignMatrix {
    size: usize,
    entries: Vec<i8>,
}

impl SignMatrix {
    pub fn new(size: usize, entries: Vec<i8>) -> Result<Self, TransformError> {
        if size == 0 {
            return Err(TransformError::InvalidMatrix("empty matrix".into()));
        }
        if entries.len() != size * size {
            return Err(TransformError::SizeMismatch {
                expected: size * size,
                found: entries.len(),
            });
        }
        if let Some(bad) = entries.iter().find(|&&e| e != 1 && e != -1) {
            return Err(TransformError::InvalidMatrix(format!("entry {bad} is not ±1")));
        }
        Ok(Self { size, entries })
    }

    pub fn from_rows(rows: &[Vec<i8>]) -> Result<Self, TransformError> {
        let size = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != size) {
            return Err(TransformError::SizeMismatch {
                expected: size,
                found: r.len(),
            });
        }
        Self::new(size, rows.concat())
    }

    /// Parses rows written as strings of `+`/`-` characters.
    pub fn from_sign_strings<S: AsRef<str>>(rows: &[S]) -> Result<Self, TransformError> {
        let parsed = rows
            .iter()
            .map(|row| {
                row.as_ref()
                    .chars()
                    .map(|c| match c {
                        '+' => Ok(1),
                        '-' => Ok(-1),
                        other => Err(TransformError::InvalidMatrix(format!(
                            "unexpected character {other:?}"
                        ))),
                    })
                    .collect::<Result<Vec<i8>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_rows(&parsed)
    }

    pub fn to_sign_strings(&self) -> Vec<String> {
        self.entries
            .chunks(self.size)
            .map(|row| row.iter().map(|&e| if e > 0 { '+' } else { '-' }).collect())
            .collect()
    }

    /// Sylvester-ordered Walsh-Hadamard matrix of the given power-of-two size.
    pub fn sylvester(size: usize) -> Result<Self, TransformError> {
        if size == 0 || !size.is_power_of_two() {
            return Err(TransformError::InvalidMatrix(format!(
                "Sylvester construction needs a power of two, got {size}"
            )));
        }
        let entries = (0..size * size)
            .map(|idx| {
                let (r, c) = (idx / size, idx % size);
                if (r & c).count_ones() % 2 == 0 {
                    1
                } else {
                    -1
                }
            })
            .collect();
        Ok(Self { size, entries })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn entries(&self) -> &[i8] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> i8 {
        self.entries[row * self.size + col]
    }

    pub fn row(&self, row: usize) -> &[i8] {
        &self.entries[row * self.size..(row + 1) * self.size]
    }

    pub fn negated(&self) -> Self {
        Self {
            size: self.size,
            entries: self.entries.iter().map(|&e| -e).collect(),
        }
    }

    /// Integer Gram matrix `A·Aᵀ`, row-major.
    pub fn gram(&self) -> Vec<i64> {
        let k = self.size;
        let mut out = vec![0i64; k * k];
        for i in 0..k {
            for j in i..k {
                let dot: i64 = self
                    .row(i)
                    .iter()
                    .zip(self.row(j))
                    .map(|(&a, &b)| i64::from(a * b))
                    .sum();
                out[i * k + j] = dot;
                out[j * k + i] = dot;
            }
        }
        out
    }

    /// True iff `A·Aᵀ = k·I` in exact integer arithmetic.
    pub fn is_orthogonal(&self) -> bool {
        let k = self.size;
        for i in 0..k {
            for j in i + 1..k {
                let dot: i32 = self
                    .row(i)
                    .iter()
                    .zip(self.row(j))
                    .map(|(&a, &b)| i32::from(a * b))
                    .sum();
                if dot != 0 {
                    return false;
                }
            }
        }
        // Diagonal entries are k for any ±1 matrix.
        true
    }

    /// Orthonormal separable 2D transform `(1/k)·T·X·Tᵀ` of a row-major k×k array.
    pub fn apply_2d(&self, x: &[f64]) -> Result<CoefficientArray, TransformError> {
        apply_2d(self, x)
    }
}

/// Lexicographic on flattened entries with `+1` ordered before `-1`.
impl Ord for SignMatrix {
    fn cmp(&self, other: &Self) -> Ordering {
        self.size.cmp(&other.size).then_with(|| {
            self.entries
                .iter()
                .map(|&e| e < 0)
                .cmp(other.entries.iter().map(|&e| e < 0))
        })
    }
}

impl PartialOrd for SignMatrix {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for SignMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.to_sign_strings()).finish()
    }
}

impl fmt::Display for SignMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.to_sign_strings() {
            writeln!(f, "{row}")?;
        }
        Ok(())
    }
}

/// Transform-domain coefficients, row-major; index 0 is the DC coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientArray {
    size: usize,
    values: Vec<f64>,
}

impl CoefficientArray {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Every 4×4 ±1 matrix with `A·Aᵀ = 4·I`, in lexicographic order.
///
/// Pattern bit 15 is the top-left entry and a set bit means `-1`, so counting
/// upwards walks the flattened entries lexicographically with `+1` first.
pub fn enumerate_base_matrices() -> Vec<SignMatrix> {
    let cells = BASE_SIZE * BASE_SIZE;
    (0u32..1 << cells)
        .filter_map(|pattern| {
            let entries = (0..cells)
                .map(|i| {
                    if pattern >> (cells - 1 - i) & 1 == 1 {
                        -1
                    } else {
                        1
                    }
                })
                .collect();
            let m = SignMatrix {
                size: BASE_SIZE,
                entries,
            };
            m.is_orthogonal().then_some(m)
        })
        .collect()
}

/// Doubles an orthogonal matrix with one of the eight block patterns.
pub fn double(a: &SignMatrix, construction: u8) -> Result<SignMatrix, TransformError> {
    if construction >= CONSTRUCTION_COUNT {
        return Err(TransformError::InvalidConstruction(construction));
    }
    if !a.is_orthogonal() {
        return Err(TransformError::NotOrthogonal);
    }
    Ok(double_unchecked(a, construction))
}

fn double_unchecked(a: &SignMatrix, construction: u8) -> SignMatrix {
    let signs = BLOCK_SIGNS[usize::from(construction)];
    let k = a.size;
    let n = 2 * k;
    let mut entries = vec![0i8; n * n];
    for r in 0..n {
        for c in 0..n {
            let block = 2 * (r / k) + c / k;
            entries[r * n + c] = signs[block] * a.get(r % k, c % k);
        }
    }
    SignMatrix { size: n, entries }
}

/// Seed and construction pair that reproduce a catalog member.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Provenance {
    pub seed_index: usize,
    pub first: u8,
    pub second: u8,
}

impl Provenance {
    /// Rebuilds the member from the seed list returned by [`enumerate_base_matrices`].
    pub fn rebuild(&self, seeds: &[SignMatrix]) -> Result<SignMatrix, TransformError> {
        let seed = seeds.get(self.seed_index).ok_or_else(|| {
            TransformError::InvalidCatalog(format!("seed index {} out of range", self.seed_index))
        })?;
        double(&double(seed, self.first)?, self.second)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatalogEntry {
    pub id: usize,
    pub provenance: Provenance,
    pub matrix: SignMatrix,
}

/// Deduplicated set of 16×16 orthogonal sign matrices with stable ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransformCatalog {
    entries: Vec<CatalogEntry>,
    index: HashMap<SignMatrix, usize>,
}

/// Raw (pre-deduplication) output of the double-doubling sweep.
pub fn raw_constructions(seeds: &[SignMatrix]) -> Vec<(SignMatrix, Provenance)> {
    seeds
        .par_iter()
        .enumerate()
        .flat_map_iter(|(seed_index, seed)| {
            (0..CONSTRUCTION_COUNT).flat_map(move |first| {
                let mid = double_unchecked(seed, first);
                (0..CONSTRUCTION_COUNT).map(move |second| {
                    (
                        double_unchecked(&mid, second),
                        Provenance {
                            seed_index,
                            first,
                            second,
                        },
                    )
                })
            })
        })
        .collect()
}

/// Builds the full 16×16 catalog from every orthogonal 4×4 seed.
///
/// Duplicates are exact entry-array matches; each member keeps the smallest
/// provenance triple that produces it.
pub fn build_catalog() -> TransformCatalog {
    let seeds = enumerate_base_matrices();
    let mut unique: HashMap<SignMatrix, Provenance> = HashMap::new();
    for (matrix, prov) in raw_constructions(&seeds) {
        unique
            .entry(matrix)
            .and_modify(|p| *p = (*p).min(prov))
            .or_insert(prov);
    }
    let mut members: Vec<(SignMatrix, Provenance)> = unique.into_iter().collect();
    members.sort_unstable_by(|a, b| a.0.cmp(&b.0));
    let entries = members
        .into_iter()
        .enumerate()
        .map(|(id, (matrix, provenance))| CatalogEntry {
            id,
            provenance,
            matrix,
        })
        .collect();
    TransformCatalog::from_entries(entries).expect("constructed catalog is valid")
}

impl TransformCatalog {
    /// Validates orthogonality, uniform size, distinct matrices and distinct ids.
    pub fn from_entries(entries: Vec<CatalogEntry>) -> Result<Self, TransformError> {
        let mut index = HashMap::with_capacity(entries.len());
        let mut ids = std::collections::HashSet::with_capacity(entries.len());
        for (pos, e) in entries.iter().enumerate() {
            if e.matrix.size() != CATALOG_SIZE {
                return Err(TransformError::SizeMismatch {
                    expected: CATALOG_SIZE,
                    found: e.matrix.size(),
                });
            }
            if !e.matrix.is_orthogonal() {
                return Err(TransformError::InvalidCatalog(format!(
                    "member {} is not orthogonal",
                    e.id
                )));
            }
            if !ids.insert(e.id) {
                return Err(TransformError::InvalidCatalog(format!("duplicate id {}", e.id)));
            }
            if index.insert(e.matrix.clone(), pos).is_some() {
                return Err(TransformError::InvalidCatalog(format!(
                    "member {} duplicates another member",
                    e.id
                )));
            }
        }
        Ok(Self { entries, index })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[CatalogEntry] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = &CatalogEntry> {
        self.entries.iter()
    }

    pub fn get(&self, id: usize) -> Option<&CatalogEntry> {
        // Built catalogs store member `id` at position `id`.
        match self.entries.get(id) {
            Some(e) if e.id == id => Some(e),
            _ => self.entries.iter().find(|e| e.id == id),
        }
    }

    pub fn find(&self, matrix: &SignMatrix) -> Option<&CatalogEntry> {
        self.index.get(matrix).map(|&pos| &self.entries[pos])
    }

    /// Id of the Sylvester-ordered Walsh-Hadamard member, if present.
    pub fn dwht_id(&self) -> Option<usize> {
        let h = SignMatrix::sylvester(CATALOG_SIZE).ok()?;
        self.find(&h).map(|e| e.id)
    }

    /// Catalog restricted to the given ids, keeping their original ids.
    pub fn subset(&self, ids: &[usize]) -> Result<Self, TransformError> {
        let entries = ids
            .iter()
            .map(|&id| {
                self.get(id)
                    .cloned()
                    .ok_or_else(|| TransformError::InvalidCatalog(format!("unknown id {id}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_entries(entries)
    }

    pub fn to_json(&self) -> String {
        let records: Vec<CatalogRecord> = self.entries.iter().map(CatalogRecord::from).collect();
        let mut out = serde_json::to_string(&records).expect("catalog serializes");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> Result<Self, TransformError> {
        let records: Vec<CatalogRecord> = serde_json::from_str(text)
            .map_err(|e| TransformError::InvalidCatalog(e.to_string()))?;
        let entries = records
            .into_iter()
            .map(CatalogEntry::try_from)
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_entries(entries)
    }
}

/// On-disk form of a catalog member.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CatalogRecord {
    pub id: usize,
    pub seed_index: usize,
    pub construction_pair: [u8; 2],
    pub rows: Vec<String>,
}

impl From<&CatalogEntry> for CatalogRecord {
    fn from(e: &CatalogEntry) -> Self {
        Self {
            id: e.id,
            seed_index: e.provenance.seed_index,
            construction_pair: [e.provenance.first, e.provenance.second],
            rows: e.matrix.to_sign_strings(),
        }
    }
}

impl TryFrom<CatalogRecord> for CatalogEntry {
    type Error = TransformError;

    fn try_from(r: CatalogRecord) -> Result<Self, TransformError> {
        let [first, second] = r.construction_pair;
        if first >= CONSTRUCTION_COUNT || second >= CONSTRUCTION_COUNT {
            return Err(TransformError::InvalidConstruction(first.max(second)));
        }
        Ok(Self {
            id: r.id,
            provenance: Provenance {
                seed_index: r.seed_index,
                first,
                second,
            },
            matrix: SignMatrix::from_sign_strings(&r.rows)?,
        })
    }
}

/// Orthonormal separable 2D transform `(1/k)·T·X·Tᵀ`.
///
/// Both passes only add or subtract input values; the single multiplication
/// per output is the final `1/k` scaling.
pub fn apply_2d(t: &SignMatrix, x: &[f64]) -> Result<CoefficientArray, TransformError> {
    let k = t.size();
    if x.len() != k * k {
        return Err(TransformError::SizeMismatch {
            expected: k * k,
            found: x.len(),
        });
    }
    // rows: T·X
    let mut left = vec![0.0f64; k * k];
    for i in 0..k {
        let signs = t.row(i);
        let out = &mut left[i * k..(i + 1) * k];
        for (m, &s) in signs.iter().enumerate() {
            let src = &x[m * k..(m + 1) * k];
            if s > 0 {
                out.iter_mut().zip(src).for_each(|(o, v)| *o += v);
            } else {
                out.iter_mut().zip(src).for_each(|(o, v)| *o -= v);
            }
        }
    }
    // columns: (T·X)·Tᵀ
    let scale = 1.0 / k as f64;
    let mut values = vec![0.0f64; k * k];
    for i in 0..k {
        let src = &left[i * k..(i + 1) * k];
        for j in 0..k {
            let acc = src
                .iter()
                .zip(t.row(j))
                .fold(0.0, |acc, (v, &s)| if s > 0 { acc + v } else { acc - v });
            values[i * k + j] = acc * scale;
        }
    }
    Ok(CoefficientArray { size: k, values })
}
