//! Deterministic synthetic corpus generator.
//!
//! Each class owns a fixed visual motif: a distinct solid shape, color, and
//! anchor cell in a 3x3 layout. A record's image composites the motifs of
//! its set label bits over a noisy gray background, so every class bit is
//! learnable from pixels alone by construction. Generation is a pure
//! function of `(spec, seed)`, byte for byte.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imageops::ImageTensor;
use crate::label::{LabelVector, CLASS_NAMES, NUM_CLASSES};
use crate::manifest::{DatasetManifest, ImageRecord};
use crate::rng;

/// Parameters for corpus generation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SyntheticSpec {
    /// Records generated with each class as the primary label.
    pub per_class_count: [usize; NUM_CLASSES],
    /// Square image side in pixels, at least 8.
    pub image_side: usize,
    /// Probability that a record additionally carries each other requested
    /// class (classes with a zero count are never co-labeled).
    pub co_label_probability: f64,
}

impl SyntheticSpec {
    pub fn uniform(count: usize, image_side: usize, co_label_probability: f64) -> Self {
        Self {
            per_class_count: [count; NUM_CLASSES],
            image_side,
            co_label_probability,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.image_side < 8 {
            return Err(Error::InvalidTransform(format!(
                "synthetic image side {} below minimum 8",
                self.image_side
            )));
        }
        if !(0.0..=1.0).contains(&self.co_label_probability) {
            return Err(Error::InvalidTransform(format!(
                "co-label probability {} outside [0, 1]",
                self.co_label_probability
            )));
        }
        Ok(())
    }
}

/// One motif per class: shape, fill color, anchor cell in a 3x3 grid.
#[derive(Debug, Clone, Copy)]
struct Motif {
    shape: Shape,
    color: [f64; 3],
    cell: (usize, usize), // (row, col)
}

#[derive(Debug, Clone, Copy)]
enum Shape {
    Circle,
    Square,
    Triangle,
    Diamond,
    HorizontalBar,
    VerticalBar,
    Cross,
}

const MOTIFS: [Motif; NUM_CLASSES] = [
    // fire
    Motif {
        shape: Shape::Triangle,
        color: [0.95, 0.15, 0.10],
        cell: (0, 0),
    },
    // flag
    Motif {
        shape: Shape::Square,
        color: [0.10, 0.85, 0.20],
        cell: (0, 2),
    },
    // large_crowd
    Motif {
        shape: Shape::Circle,
        color: [0.15, 0.25, 0.95],
        cell: (1, 1),
    },
    // other
    Motif {
        shape: Shape::Diamond,
        color: [0.95, 0.90, 0.10],
        cell: (2, 0),
    },
    // police
    Motif {
        shape: Shape::VerticalBar,
        color: [0.90, 0.15, 0.90],
        cell: (2, 2),
    },
    // sign
    Motif {
        shape: Shape::HorizontalBar,
        color: [0.10, 0.90, 0.90],
        cell: (1, 0),
    },
    // student
    Motif {
        shape: Shape::Cross,
        color: [0.95, 0.95, 0.95],
        cell: (1, 2),
    },
];

impl Shape {
    fn contains(&self, dx: f64, dy: f64, r: f64) -> bool {
        match self {
            Shape::Circle => dx * dx + dy * dy <= r * r,
            Shape::Square => dx.abs() <= 0.85 * r && dy.abs() <= 0.85 * r,
            Shape::Triangle => dy >= -r && dy <= r && dx.abs() <= (dy + r) / 2.0,
            Shape::Diamond => dx.abs() + dy.abs() <= 1.2 * r,
            Shape::HorizontalBar => dy.abs() <= 0.4 * r && dx.abs() <= r,
            Shape::VerticalBar => dx.abs() <= 0.4 * r && dy.abs() <= r,
            Shape::Cross => {
                (dx.abs() <= 0.35 * r && dy.abs() <= r) || (dy.abs() <= 0.35 * r && dx.abs() <= r)
            }
        }
    }
}

/// Render one labeled image. Exposed for tests; the RNG must be the
/// record's own derived stream.
fn render(labels: &LabelVector, side: usize, rng: &mut impl Rng) -> ImageTensor {
    // Noisy gray background, one luminance sample per pixel.
    let mut img = ImageTensor::constant(side, side, 0.0);
    for y in 0..side {
        for x in 0..side {
            let v = 0.45 + rng.gen_range(-0.05..0.05);
            for c in 0..3 {
                img.set(c, y, x, v);
            }
        }
    }
    let radius = side as f64 / 7.0;
    for (class, bit) in labels.iter().enumerate() {
        if !bit {
            continue;
        }
        let motif = MOTIFS[class];
        let jitter = side as f64 / 24.0;
        let cx = (motif.cell.1 as f64 + 0.5) / 3.0 * side as f64 + rng.gen_range(-jitter..=jitter);
        let cy = (motif.cell.0 as f64 + 0.5) / 3.0 * side as f64 + rng.gen_range(-jitter..=jitter);
        for y in 0..side {
            for x in 0..side {
                let dx = x as f64 - cx;
                let dy = y as f64 - cy;
                if motif.shape.contains(dx, dy, radius) {
                    for c in 0..3 {
                        img.set(c, y, x, motif.color[c]);
                    }
                }
            }
        }
    }
    img
}

/// Draw the label vector for record `i` of primary class `class`.
fn draw_labels(spec: &SyntheticSpec, class: usize, rng: &mut impl Rng) -> LabelVector {
    let mut labels = LabelVector::single(class);
    for other in 0..NUM_CLASSES {
        if other == class || spec.per_class_count[other] == 0 {
            continue;
        }
        if spec.co_label_probability > 0.0 && rng.gen_bool(spec.co_label_probability) {
            labels.set(other, true);
        }
    }
    labels
}

/// Generate the corpus under `out_dir`: PNGs in `images/` plus
/// `manifest.jsonl`. Returns the manifest with its base directory set.
pub fn generate_synthetic(
    spec: &SyntheticSpec,
    seed: u64,
    out_dir: &Path,
) -> Result<DatasetManifest> {
    spec.validate()?;
    let images_dir = out_dir.join("images");
    std::fs::create_dir_all(&images_dir).map_err(|e| Error::io(&images_dir, e))?;

    let mut records = Vec::new();
    for class in 0..NUM_CLASSES {
        for i in 0..spec.per_class_count[class] {
            let id = format!("{}-{:04}", CLASS_NAMES[class], i);
            let mut rng = rng::derive(
                seed,
                &[b"synth", &(class as u64).to_le_bytes(), &(i as u64).to_le_bytes()],
            );
            let labels = draw_labels(spec, class, &mut rng);
            let img = render(&labels, spec.image_side, &mut rng);
            let rel_path = format!("images/{id}.png");
            img.save_png(&out_dir.join(&rel_path))?;
            records.push(ImageRecord::original(id, rel_path, labels));
        }
    }
    let manifest = DatasetManifest::from_records(records)?.with_base_dir(out_dir);
    manifest.save(&out_dir.join("manifest.jsonl"))?;
    Ok(manifest)
}
