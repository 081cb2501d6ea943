//! Per-class augmentation planning and execution.
//!
//! A plan assigns each class an allowed transform set and an absolute
//! target count. Jobs are created by cycling the allowed transforms over
//! the class's original records in manifest order until the gap to the
//! target is filled, so realized counts are exact and runs reproduce.
//! When the manifest carries split assignments only training records are
//! grown; augmenting held-out data would leak.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imageops::{apply_transform, ImageTensor, TransformKind, TransformSpec};
use crate::label::{CLASS_NAMES, NUM_CLASSES};
use crate::manifest::{DatasetManifest, ImageRecord, Provenance, Split};
use crate::rng;

/// Growth instructions for one class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassPlan {
    /// Allowed transform kind names; empty means the class is not grown.
    pub transforms: Vec<String>,
    /// Absolute target count; `None` keeps the current count.
    pub target_count: Option<usize>,
}

impl ClassPlan {
    pub fn unchanged() -> Self {
        Self {
            transforms: Vec::new(),
            target_count: None,
        }
    }
}

/// Full augmentation plan: per-class growth plus the global seed every
/// per-job seed derives from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AugmentationPlan {
    pub seed: u64,
    pub classes: [ClassPlan; NUM_CLASSES],
}

/// Serialized form: classes keyed by name, mirroring the per-class table.
#[derive(Serialize, Deserialize)]
struct PlanFile {
    seed: u64,
    classes: BTreeMap<String, ClassPlan>,
}

impl AugmentationPlan {
    pub fn to_json(&self) -> String {
        let classes = CLASS_NAMES
            .iter()
            .zip(self.classes.iter())
            .map(|(name, plan)| (name.to_string(), plan.clone()))
            .collect();
        serde_json::to_string_pretty(&PlanFile {
            seed: self.seed,
            classes,
        })
        .expect("plan serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: PlanFile = serde_json::from_str(text).map_err(|e| Error::ManifestParse {
            path: "<plan>".into(),
            line: 0,
            msg: e.to_string(),
        })?;
        let mut classes: [ClassPlan; NUM_CLASSES] =
            std::array::from_fn(|_| ClassPlan::unchanged());
        for (name, plan) in file.classes {
            let idx = CLASS_NAMES
                .iter()
                .position(|n| *n == name)
                .ok_or_else(|| Error::ManifestParse {
                    path: "<plan>".into(),
                    line: 0,
                    msg: format!("unknown class `{name}`"),
                })?;
            for t in &plan.transforms {
                if TransformKind::default_for(t).is_none() {
                    return Err(Error::InvalidTransform(format!(
                        "unknown transform kind `{t}` for class `{name}`"
                    )));
                }
            }
            classes[idx] = plan;
        }
        Ok(Self {
            seed: file.seed,
            classes,
        })
    }
}

const ALL_13: [&str; 13] = [
    "hflip",
    "vflip",
    "affine",
    "perspective",
    "rescale",
    "crop",
    "noise",
    "contrast",
    "intensity",
    "gaussian_filter",
    "exposure_filter",
    "translation",
    "shear",
];

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

/// The stock balancing plan: explicit target counts for the five minority
/// classes, majority classes untouched.
pub fn default_plan(_m: &DatasetManifest) -> AugmentationPlan {
    let mut classes: [ClassPlan; NUM_CLASSES] = std::array::from_fn(|_| ClassPlan::unchanged());
    classes[0] = ClassPlan {
        transforms: names(&ALL_13),
        target_count: Some(4578),
    }; // fire
    classes[1] = ClassPlan {
        transforms: names(&["hflip", "vflip", "noise", "affine"]),
        target_count: Some(5829),
    }; // flag
    classes[3] = ClassPlan {
        transforms: names(&ALL_13),
        target_count: Some(3472),
    }; // other
    classes[4] = ClassPlan {
        transforms: names(&["affine", "noise"]),
        target_count: Some(6477),
    }; // police
    classes[6] = ClassPlan {
        transforms: names(&["hflip", "vflip", "noise", "affine", "crop"]),
        target_count: Some(6165),
    }; // student
    AugmentationPlan { seed: 0, classes }
}

/// One pending augmentation: a source record, the transform to apply, and
/// the cycle it was scheduled in.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentJob {
    pub class: usize,
    pub source_id: String,
    pub cycle: usize,
    pub spec: TransformSpec,
}

impl AugmentJob {
    pub fn record_id(&self) -> String {
        format!("{}+{}-{}", self.source_id, self.spec.kind.name(), self.cycle)
    }
}

/// True when the record may seed augmentation: it must be an original, and
/// once splits exist only training records qualify.
fn eligible(record: &ImageRecord, split_exists: bool) -> bool {
    record.is_original() && (!split_exists || record.split == Split::Train)
}

/// Records counted toward a class's current size under the same split rule.
fn counted(record: &ImageRecord, split_exists: bool) -> bool {
    !split_exists || record.split == Split::Train
}

/// Expand a plan into concrete jobs. Deterministic: classes ascending,
/// then cycle, then manifest order of the class's originals.
pub fn plan_jobs(m: &DatasetManifest, plan: &AugmentationPlan) -> Result<Vec<AugmentJob>> {
    let split_exists = m.has_split_assignments();
    let mut jobs = Vec::new();
    for class in 0..NUM_CLASSES {
        let class_plan = &plan.classes[class];
        let current = m
            .records()
            .iter()
            .filter(|r| r.labels.get(class) && counted(r, split_exists))
            .count();
        let target = class_plan.target_count.unwrap_or(current);
        if target < current {
            return Err(Error::UnsatisfiablePlan {
                class: CLASS_NAMES[class],
                needed: 0,
                what: "room (target below current count)",
            });
        }
        let need = target - current;
        if need == 0 {
            continue;
        }
        let sources: Vec<&ImageRecord> = m
            .records()
            .iter()
            .filter(|r| r.labels.get(class) && eligible(r, split_exists))
            .collect();
        if sources.is_empty() {
            return Err(Error::UnsatisfiablePlan {
                class: CLASS_NAMES[class],
                needed: need,
                what: "original records",
            });
        }
        if class_plan.transforms.is_empty() {
            return Err(Error::UnsatisfiablePlan {
                class: CLASS_NAMES[class],
                needed: need,
                what: "allowed transforms",
            });
        }
        let mut produced = 0;
        let mut cycle = 0;
        'outer: loop {
            let kind_name = &class_plan.transforms[cycle % class_plan.transforms.len()];
            let kind = TransformKind::default_for(kind_name).ok_or_else(|| {
                Error::InvalidTransform(format!("unknown transform kind `{kind_name}`"))
            })?;
            for source in &sources {
                if produced == need {
                    break 'outer;
                }
                let seed = rng::derive_seed(
                    plan.seed,
                    &[
                        source.id.as_bytes(),
                        kind_name.as_bytes(),
                        &(cycle as u64).to_le_bytes(),
                    ],
                );
                jobs.push(AugmentJob {
                    class,
                    source_id: source.id.clone(),
                    cycle,
                    spec: TransformSpec::new(kind.clone(), seed),
                });
                produced += 1;
            }
            cycle += 1;
        }
    }
    Ok(jobs)
}

/// Execute jobs: every job appends one augmented record carrying its
/// source's full label vector and split. With `materialize_dir` set the
/// transformed pixels are written as PNGs; otherwise records regenerate on
/// demand from `(source, transform)`.
pub fn run_augmentation(
    m: &DatasetManifest,
    jobs: &[AugmentJob],
    materialize_dir: Option<&Path>,
) -> Result<DatasetManifest> {
    if let Some(dir) = materialize_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut records: Vec<ImageRecord> = m.records().to_vec();
    for (job_index, job) in jobs.iter().enumerate() {
        let source = m
            .record_by_id(&job.source_id)
            .ok_or_else(|| Error::UnknownSource {
                id: job.record_id(),
                source_id: job.source_id.clone(),
            })?;
        let id = job.record_id();
        let (path, materialized) = match materialize_dir {
            Some(dir) => {
                let native =
                    ImageTensor::load(&m.resolve_path(source)).map_err(|e| Error::JobFailed {
                        job_index,
                        source_id: job.source_id.clone(),
                        msg: e.to_string(),
                    })?;
                let transformed =
                    apply_transform(&native, &job.spec).map_err(|e| Error::JobFailed {
                        job_index,
                        source_id: job.source_id.clone(),
                        msg: e.to_string(),
                    })?;
                let file = dir.join(format!("{id}.png"));
                transformed.save_png(&file).map_err(|e| Error::JobFailed {
                    job_index,
                    source_id: job.source_id.clone(),
                    msg: e.to_string(),
                })?;
                (file.to_string_lossy().into_owned(), true)
            }
            None => (source.path.clone(), false),
        };
        records.push(ImageRecord {
            id,
            path,
            labels: source.labels,
            provenance: Provenance::Augmented {
                source_id: job.source_id.clone(),
                transform: job.spec.clone(),
                materialized,
            },
            split: source.split,
        });
    }
    let mut out = DatasetManifest::from_records(records)?;
    if let Some(base) = m.base_dir() {
        out = out.with_base_dir(base);
    }
    Ok(out)
}

/// Before/after bookkeeping for reporting.
#[derive(Debug, Clone, Serialize)]
pub struct AugmentSummary {
    pub class_names: Vec<String>,
    pub before: [usize; NUM_CLASSES],
    pub jobs: [usize; NUM_CLASSES],
    pub after: [usize; NUM_CLASSES],
    /// Distinct image counts; per-class sums exceed these when labels
    /// overlap.
    pub distinct_before: usize,
    pub distinct_after: usize,
}

pub fn summarize(
    before: &DatasetManifest,
    jobs: &[AugmentJob],
    after: &DatasetManifest,
) -> AugmentSummary {
    let mut per_class_jobs = [0usize; NUM_CLASSES];
    for job in jobs {
        per_class_jobs[job.class] += 1;
    }
    AugmentSummary {
        class_names: CLASS_NAMES.iter().map(|s| s.to_string()).collect(),
        before: before.class_counts(),
        jobs: per_class_jobs,
        after: after.class_counts(),
        distinct_before: before.len(),
        distinct_after: after.len(),
    }
}
