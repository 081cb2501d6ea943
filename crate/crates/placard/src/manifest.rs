//! Dataset manifests: line-delimited records, validation, linting, class
//! counts, and seeded train/test splitting.
//!
//! A manifest is UTF-8 text with one JSON record per line so that large
//! datasets stream and diff cleanly. Paths are stored as written and
//! resolved against the manifest's directory when relative.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imageops::{apply_transform, ImageTensor, TransformSpec};
use crate::label::{LabelVector, NUM_CLASSES};
use crate::rng;

/// Where a record's pixels come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    /// Pixels live at `path` as captured.
    Original,
    /// Pixels derive from an original record through one transform.
    /// When `materialized` is set the result was written to `path`;
    /// otherwise it is regenerated on demand from the source image.
    Augmented {
        source_id: String,
        transform: TransformSpec,
        materialized: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Unassigned,
    Train,
    Test,
}

/// One image with its labels, provenance, and split assignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageRecord {
    pub id: String,
    pub path: String,
    pub labels: LabelVector,
    pub provenance: Provenance,
    pub split: Split,
}

impl ImageRecord {
    pub fn original(id: impl Into<String>, path: impl Into<String>, labels: LabelVector) -> Self {
        Self {
            id: id.into(),
            path: path.into(),
            labels,
            provenance: Provenance::Original,
            split: Split::Unassigned,
        }
    }

    pub fn is_original(&self) -> bool {
        matches!(self.provenance, Provenance::Original)
    }
}

/// An ordered collection of records plus cached per-class counts.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    records: Vec<ImageRecord>,
    class_counts: [usize; NUM_CLASSES],
    by_id: HashMap<String, usize>,
    /// Directory relative record paths resolve against.
    base_dir: Option<PathBuf>,
}

impl DatasetManifest {
    /// Build a manifest, checking id uniqueness and augmentation sources.
    pub fn from_records(records: Vec<ImageRecord>) -> Result<Self> {
        let mut by_id = HashMap::with_capacity(records.len());
        for (i, r) in records.iter().enumerate() {
            if by_id.insert(r.id.clone(), i).is_some() {
                return Err(Error::DuplicateId(r.id.clone()));
            }
        }
        for r in &records {
            if let Provenance::Augmented { source_id, .. } = &r.provenance {
                match by_id.get(source_id).map(|&i| &records[i]) {
                    Some(src) if src.is_original() => {}
                    _ => {
                        return Err(Error::UnknownSource {
                            id: r.id.clone(),
                            source_id: source_id.clone(),
                        })
                    }
                }
            }
        }
        let class_counts = compute_class_counts(&records);
        Ok(Self {
            records,
            class_counts,
            by_id,
            base_dir: None,
        })
    }

    pub fn with_base_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.base_dir = Some(dir.into());
        self
    }

    pub fn records(&self) -> &[ImageRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn record_by_id(&self, id: &str) -> Option<&ImageRecord> {
        self.by_id.get(id).map(|&i| &self.records[i])
    }

    pub fn base_dir(&self) -> Option<&Path> {
        self.base_dir.as_deref()
    }

    /// Number of records carrying each class bit. Sums may exceed the
    /// record count because labels overlap.
    pub fn class_counts(&self) -> [usize; NUM_CLASSES] {
        self.class_counts
    }

    /// Recount from scratch; equals [`Self::class_counts`] by construction.
    pub fn recompute_class_counts(&self) -> [usize; NUM_CLASSES] {
        compute_class_counts(&self.records)
    }

    pub fn has_split_assignments(&self) -> bool {
        self.records.iter().any(|r| r.split != Split::Unassigned)
    }

    pub fn records_in_split(&self, split: Split) -> impl Iterator<Item = &ImageRecord> {
        self.records.iter().filter(move |r| r.split == split)
    }

    /// Parse a manifest file, recomputing class counts. Reports the line
    /// number of the first malformed record.
    pub fn load(path: &Path) -> Result<Self> {
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let reader = BufReader::new(file);
        let mut records = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let record: ImageRecord =
                serde_json::from_str(&line).map_err(|e| Error::ManifestParse {
                    path: path.to_path_buf(),
                    line: idx + 1,
                    msg: e.to_string(),
                })?;
            records.push(record);
        }
        let base = path.parent().map(|p| p.to_path_buf()).unwrap_or_default();
        Ok(Self::from_records(records)?.with_base_dir(base))
    }

    /// Write one JSON record per line.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        for record in &self.records {
            let line = serde_json::to_string(record).expect("record serializes");
            writeln!(file, "{line}").map_err(|e| Error::io(path, e))?;
        }
        Ok(())
    }

    /// Resolve a record's path against the manifest directory.
    pub fn resolve_path(&self, record: &ImageRecord) -> PathBuf {
        let p = Path::new(&record.path);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            match &self.base_dir {
                Some(base) => base.join(p),
                None => p.to_path_buf(),
            }
        }
    }

    /// Load a record's pixels at `side x side`, regenerating augmented
    /// records from their source when they were not materialized.
    pub fn load_pixels(&self, record: &ImageRecord, side: usize) -> Result<ImageTensor> {
        match &record.provenance {
            Provenance::Original | Provenance::Augmented { materialized: true, .. } => {
                let native = ImageTensor::load(&self.resolve_path(record))?;
                Ok(resize_if_needed(native, side))
            }
            Provenance::Augmented {
                source_id,
                transform,
                materialized: false,
            } => {
                let source = self.record_by_id(source_id).ok_or_else(|| Error::UnknownSource {
                    id: record.id.clone(),
                    source_id: source_id.clone(),
                })?;
                let native = ImageTensor::load(&self.resolve_path(source))?;
                let transformed = apply_transform(&native, transform)?;
                Ok(resize_if_needed(transformed, side))
            }
        }
    }

    /// Report records that violate other-exclusivity or whose resolved
    /// path is unreadable. Linting never fails.
    pub fn lint(&self) -> Vec<LintFinding> {
        let mut findings = Vec::new();
        for record in &self.records {
            if record.labels.violates_other_exclusivity() {
                findings.push(LintFinding {
                    record_id: record.id.clone(),
                    kind: LintKind::OtherExclusivity,
                    message: format!(
                        "labels {} set `other` together with another class",
                        record.labels
                    ),
                });
            }
            let path = self.resolve_path(record);
            if !path.is_file() {
                findings.push(LintFinding {
                    record_id: record.id.clone(),
                    kind: LintKind::UnreadablePath,
                    message: format!("path {} is not a readable file", path.display()),
                });
            }
        }
        findings
    }

    /// Assign train/test splits by seeded shuffle: the first
    /// `round(train_fraction * N)` of the permutation become train, the
    /// rest test. Record order in the returned manifest is unchanged.
    pub fn split(&self, train_fraction: f64, seed: u64) -> Result<DatasetManifest> {
        self.split_impl(train_fraction, seed, false)
    }

    /// As [`Self::split`] but stratified by exact label vector, with the
    /// total train size still exactly `round(train_fraction * N)`.
    pub fn split_stratified(&self, train_fraction: f64, seed: u64) -> Result<DatasetManifest> {
        self.split_impl(train_fraction, seed, true)
    }

    fn split_impl(&self, train_fraction: f64, seed: u64, stratify: bool) -> Result<DatasetManifest> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(Error::FractionOutOfRange(train_fraction));
        }
        if let Some(r) = self.records.iter().find(|r| r.split != Split::Unassigned) {
            return Err(Error::AlreadySplit(r.id.clone()));
        }
        let n = self.records.len();
        let train_size = (train_fraction * n as f64).round() as usize;
        let mut rng = rng::substream(seed, "split");

        let mut train_indices: HashSet<usize> = HashSet::with_capacity(train_size);
        if stratify {
            // Group by exact label vector, allocate floor shares, then hand
            // out the remaining slots by largest fractional remainder.
            let mut groups: Vec<(LabelVector, Vec<usize>)> = Vec::new();
            let mut group_of: HashMap<LabelVector, usize> = HashMap::new();
            for (i, r) in self.records.iter().enumerate() {
                let g = *group_of.entry(r.labels).or_insert_with(|| {
                    groups.push((r.labels, Vec::new()));
                    groups.len() - 1
                });
                groups[g].1.push(i);
            }
            let mut shares: Vec<(usize, usize, f64)> = groups
                .iter()
                .enumerate()
                .map(|(g, (_, members))| {
                    let exact = train_fraction * members.len() as f64;
                    (g, exact.floor() as usize, exact - exact.floor())
                })
                .collect();
            let mut allocated: usize = shares.iter().map(|&(_, k, _)| k).sum();
            shares.sort_by(|a, b| b.2.partial_cmp(&a.2).unwrap().then(a.0.cmp(&b.0)));
            let mut extra: Vec<usize> = Vec::new();
            for &(g, _, _) in &shares {
                if allocated >= train_size {
                    break;
                }
                extra.push(g);
                allocated += 1;
            }
            for (g, (_, members)) in groups.iter().enumerate() {
                let mut members = members.clone();
                members.shuffle(&mut rng);
                let mut k = (train_fraction * members.len() as f64).floor() as usize;
                if extra.contains(&g) {
                    k += 1;
                }
                train_indices.extend(members.into_iter().take(k));
            }
        } else {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            train_indices.extend(order.into_iter().take(train_size));
        }

        let records = self
            .records
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let mut r = r.clone();
                r.split = if train_indices.contains(&i) {
                    Split::Train
                } else {
                    Split::Test
                };
                r
            })
            .collect();
        let mut out = Self::from_records(records)?;
        out.base_dir = self.base_dir.clone();
        Ok(out)
    }
}

fn resize_if_needed(img: ImageTensor, side: usize) -> ImageTensor {
    if img.height() == side && img.width() == side {
        img
    } else {
        img.resize(side, side)
    }
}

fn compute_class_counts(records: &[ImageRecord]) -> [usize; NUM_CLASSES] {
    let mut counts = [0usize; NUM_CLASSES];
    for r in records {
        for (c, bit) in r.labels.iter().enumerate() {
            if bit {
                counts[c] += 1;
            }
        }
    }
    counts
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LintKind {
    OtherExclusivity,
    UnreadablePath,
}

#[derive(Debug, Clone)]
pub struct LintFinding {
    pub record_id: String,
    pub kind: LintKind,
    pub message: String,
}

impl fmt::Display for LintFinding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.record_id, self.message)
    }
}
