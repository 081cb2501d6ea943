//! The thirteen deterministic augmentation transforms.
//!
//! A [`TransformSpec`] carries a kind, per-kind parameter ranges, and a
//! seed. Applying a spec samples concrete parameters from the seed, so the
//! same `(image, spec)` pair always reproduces the same output bit for bit.
//! Geometric transforms sample the source through one shared inverse-map
//! engine (bilinear, edge replication); flips are exact index mirrors so
//! that flipping twice restores the original image exactly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{ImageTensor, CHANNELS};
use crate::error::{Error, Result};

/// Closed interval a parameter is drawn from; `lo == hi` pins the value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamRange {
    pub lo: f64,
    pub hi: f64,
}

impl ParamRange {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn fixed(v: f64) -> Self {
        Self { lo: v, hi: v }
    }

    fn sample(&self, rng: &mut ChaCha20Rng) -> f64 {
        if self.lo == self.hi {
            self.lo
        } else {
            rng.gen_range(self.lo..=self.hi)
        }
    }

    fn validate(&self, what: &str) -> Result<()> {
        if !self.lo.is_finite() || !self.hi.is_finite() || self.lo > self.hi {
            return Err(Error::InvalidTransform(format!(
                "{what}: invalid range [{}, {}]",
                self.lo, self.hi
            )));
        }
        Ok(())
    }
}

/// Transform kind with its parameter ranges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TransformKind {
    /// Mirror columns; exact involution.
    Hflip,
    /// Mirror rows; exact involution.
    Vflip,
    /// Rotation plus uniform scaling about the image center.
    Affine {
        rotation_deg: ParamRange,
        scale: ParamRange,
    },
    /// Homography induced by jittering the four corners; jitter is a
    /// fraction of the image side per corner and axis.
    Perspective { corner_jitter: ParamRange },
    /// Uniform zoom about the center.
    Rescale { scale: ParamRange },
    /// Random sub-window of the given area fraction, resized back.
    Crop { area_fraction: ParamRange },
    /// Additive Gaussian noise in normalized units.
    Noise { stddev: f64 },
    /// Scale contrast about mid-gray: `0.5 + f * (v - 0.5)`.
    Contrast { factor: ParamRange },
    /// Add a brightness offset.
    Intensity { offset: ParamRange },
    /// Gaussian smoothing with the given standard deviation in pixels.
    GaussianFilter { sigma: ParamRange },
    /// Gamma correction: `v^gamma`.
    ExposureFilter { gamma: ParamRange },
    /// Shift by a fraction of width/height.
    Translation {
        dx_fraction: ParamRange,
        dy_fraction: ParamRange,
    },
    /// Horizontal shear about the vertical center.
    Shear { factor: ParamRange },
}

impl TransformKind {
    pub fn name(&self) -> &'static str {
        match self {
            TransformKind::Hflip => "hflip",
            TransformKind::Vflip => "vflip",
            TransformKind::Affine { .. } => "affine",
            TransformKind::Perspective { .. } => "perspective",
            TransformKind::Rescale { .. } => "rescale",
            TransformKind::Crop { .. } => "crop",
            TransformKind::Noise { .. } => "noise",
            TransformKind::Contrast { .. } => "contrast",
            TransformKind::Intensity { .. } => "intensity",
            TransformKind::GaussianFilter { .. } => "gaussian_filter",
            TransformKind::ExposureFilter { .. } => "exposure_filter",
            TransformKind::Translation { .. } => "translation",
            TransformKind::Shear { .. } => "shear",
        }
    }

    /// Default parameter ranges, mild enough to preserve labels.
    pub fn default_for(name: &str) -> Option<TransformKind> {
        Some(match name {
            "hflip" => TransformKind::Hflip,
            "vflip" => TransformKind::Vflip,
            "affine" => TransformKind::Affine {
                rotation_deg: ParamRange::new(-15.0, 15.0),
                scale: ParamRange::new(0.9, 1.1),
            },
            "perspective" => TransformKind::Perspective {
                corner_jitter: ParamRange::new(-0.10, 0.10),
            },
            "rescale" => TransformKind::Rescale {
                scale: ParamRange::new(0.9, 1.1),
            },
            "crop" => TransformKind::Crop {
                area_fraction: ParamRange::new(0.8, 1.0),
            },
            "noise" => TransformKind::Noise { stddev: 0.02 },
            "contrast" => TransformKind::Contrast {
                factor: ParamRange::new(0.8, 1.2),
            },
            "intensity" => TransformKind::Intensity {
                offset: ParamRange::new(-0.1, 0.1),
            },
            "gaussian_filter" => TransformKind::GaussianFilter {
                sigma: ParamRange::new(0.5, 1.5),
            },
            "exposure_filter" => TransformKind::ExposureFilter {
                gamma: ParamRange::new(0.7, 1.4),
            },
            "translation" => TransformKind::Translation {
                dx_fraction: ParamRange::new(-0.1, 0.1),
                dy_fraction: ParamRange::new(-0.1, 0.1),
            },
            "shear" => TransformKind::Shear {
                factor: ParamRange::new(-0.2, 0.2),
            },
            _ => return None,
        })
    }

    /// All thirteen kind names in catalog order.
    pub fn all_names() -> [&'static str; 13] {
        [
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
        ]
    }

    fn validate(&self) -> Result<()> {
        match self {
            TransformKind::Hflip | TransformKind::Vflip => Ok(()),
            TransformKind::Affine {
                rotation_deg,
                scale,
            } => {
                rotation_deg.validate("affine rotation")?;
                scale.validate("affine scale")?;
                if scale.lo <= 0.0 {
                    return Err(Error::InvalidTransform("affine scale must be positive".into()));
                }
                Ok(())
            }
            TransformKind::Perspective { corner_jitter } => {
                corner_jitter.validate("perspective corner jitter")
            }
            TransformKind::Rescale { scale } => {
                scale.validate("rescale scale")?;
                if scale.lo <= 0.0 {
                    return Err(Error::InvalidTransform("rescale scale must be positive".into()));
                }
                Ok(())
            }
            TransformKind::Crop { area_fraction } => {
                area_fraction.validate("crop area fraction")?;
                if area_fraction.lo <= 0.0 || area_fraction.hi > 1.0 {
                    return Err(Error::InvalidTransform(
                        "crop area fraction must lie in (0, 1]".into(),
                    ));
                }
                Ok(())
            }
            TransformKind::Noise { stddev } => {
                if !stddev.is_finite() || *stddev < 0.0 {
                    return Err(Error::InvalidTransform("noise stddev must be >= 0".into()));
                }
                Ok(())
            }
            TransformKind::Contrast { factor } => factor.validate("contrast factor"),
            TransformKind::Intensity { offset } => offset.validate("intensity offset"),
            TransformKind::GaussianFilter { sigma } => {
                sigma.validate("gaussian sigma")?;
                if sigma.lo <= 0.0 {
                    return Err(Error::InvalidTransform("gaussian sigma must be positive".into()));
                }
                Ok(())
            }
            TransformKind::ExposureFilter { gamma } => {
                gamma.validate("exposure gamma")?;
                if gamma.lo <= 0.0 {
                    return Err(Error::InvalidTransform("exposure gamma must be positive".into()));
                }
                Ok(())
            }
            TransformKind::Translation {
                dx_fraction,
                dy_fraction,
            } => {
                dx_fraction.validate("translation dx")?;
                dy_fraction.validate("translation dy")
            }
            TransformKind::Shear { factor } => factor.validate("shear factor"),
        }
    }
}

/// A transform kind plus the seed that pins its sampled parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformSpec {
    #[serde(flatten)]
    pub kind: TransformKind,
    pub seed: u64,
}

impl TransformSpec {
    pub fn new(kind: TransformKind, seed: u64) -> Self {
        Self { kind, seed }
    }

    pub fn named(name: &str, seed: u64) -> Option<Self> {
        TransformKind::default_for(name).map(|kind| Self::new(kind, seed))
    }
}

/// The full catalog: one spec per kind with default parameter ranges.
pub fn transform_catalog() -> Vec<TransformSpec> {
    TransformKind::all_names()
        .iter()
        .map(|name| TransformSpec::named(name, 0).expect("catalog name"))
        .collect()
}

/// Apply a transform. Output shape equals input shape, values stay in
/// `[0, 1]`, and the result is a pure function of `(img, spec)`.
pub fn apply_transform(img: &ImageTensor, spec: &TransformSpec) -> Result<ImageTensor> {
    spec.kind.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    let (h, w) = (img.height(), img.width());
    let cx = (w as f64 - 1.0) / 2.0;
    let cy = (h as f64 - 1.0) / 2.0;

    let mut out = match &spec.kind {
        TransformKind::Hflip => ImageTensor::from_fn(h, w, |c, y, x| img.get(c, y, w - 1 - x)),
        TransformKind::Vflip => ImageTensor::from_fn(h, w, |c, y, x| img.get(c, h - 1 - y, x)),
        TransformKind::Affine {
            rotation_deg,
            scale,
        } => {
            let theta = rotation_deg.sample(&mut rng).to_radians();
            let s = scale.sample(&mut rng);
            let (sin, cos) = theta.sin_cos();
            warp(img, |x, y| {
                let dx = x - cx;
                let dy = y - cy;
                (
                    cx + (dx * cos + dy * sin) / s,
                    cy + (-dx * sin + dy * cos) / s,
                )
            })
        }
        TransformKind::Perspective { corner_jitter } => {
            let mut jitter = [0.0f64; 8];
            for j in &mut jitter {
                *j = corner_jitter.sample(&mut rng);
            }
            let (wf, hf) = (w as f64 - 1.0, h as f64 - 1.0);
            let corners = [(0.0, 0.0), (wf, 0.0), (wf, hf), (0.0, hf)];
            // Moved corner i shows original corner i; solve the homography
            // that maps output coordinates back onto the source.
            let moved: Vec<(f64, f64)> = corners
                .iter()
                .enumerate()
                .map(|(i, &(x, y))| {
                    (
                        x + jitter[2 * i] * w as f64,
                        y + jitter[2 * i + 1] * h as f64,
                    )
                })
                .collect();
            let hmat = homography(&moved, &corners)?;
            warp(img, |x, y| {
                let denom = hmat[6] * x + hmat[7] * y + 1.0;
                (
                    (hmat[0] * x + hmat[1] * y + hmat[2]) / denom,
                    (hmat[3] * x + hmat[4] * y + hmat[5]) / denom,
                )
            })
        }
        TransformKind::Rescale { scale } => {
            let s = scale.sample(&mut rng);
            warp(img, |x, y| (cx + (x - cx) / s, cy + (y - cy) / s))
        }
        TransformKind::Crop { area_fraction } => {
            let area = area_fraction.sample(&mut rng);
            let side_fraction = area.sqrt();
            let win_w = w as f64 * side_fraction;
            let win_h = h as f64 * side_fraction;
            let x0 = rng.gen_range(0.0..=(w as f64 - win_w).max(0.0));
            let y0 = rng.gen_range(0.0..=(h as f64 - win_h).max(0.0));
            let sx = win_w / w as f64;
            let sy = win_h / h as f64;
            warp(img, |x, y| {
                (
                    x0 + (x + 0.5) * sx - 0.5,
                    y0 + (y + 0.5) * sy - 0.5,
                )
            })
        }
        TransformKind::Noise { stddev } => {
            let normal = Normal::new(0.0, *stddev)
                .map_err(|e| Error::InvalidTransform(format!("noise: {e}")))?;
            let data = img
                .data()
                .iter()
                .map(|&v| v + normal.sample(&mut rng))
                .collect();
            ImageTensor::new(h, w, data)
        }
        TransformKind::Contrast { factor } => {
            let f = factor.sample(&mut rng);
            let data = img.data().iter().map(|&v| 0.5 + f * (v - 0.5)).collect();
            ImageTensor::new(h, w, data)
        }
        TransformKind::Intensity { offset } => {
            let d = offset.sample(&mut rng);
            let data = img.data().iter().map(|&v| v + d).collect();
            ImageTensor::new(h, w, data)
        }
        TransformKind::GaussianFilter { sigma } => {
            let s = sigma.sample(&mut rng);
            gaussian_blur(img, s)
        }
        TransformKind::ExposureFilter { gamma } => {
            let g = gamma.sample(&mut rng);
            let data = img.data().iter().map(|&v| v.max(0.0).powf(g)).collect();
            ImageTensor::new(h, w, data)
        }
        TransformKind::Translation {
            dx_fraction,
            dy_fraction,
        } => {
            let dx = dx_fraction.sample(&mut rng) * w as f64;
            let dy = dy_fraction.sample(&mut rng) * h as f64;
            warp(img, |x, y| (x - dx, y - dy))
        }
        TransformKind::Shear { factor } => {
            let k = factor.sample(&mut rng);
            warp(img, |x, y| (x - k * (y - cy), y))
        }
    };
    out.clamp_unit();
    Ok(out)
}

/// Shared inverse-map sampler: for each output pixel, `map` yields the
/// source coordinates to sample bilinearly (edge replication outside).
fn warp(img: &ImageTensor, map: impl Fn(f64, f64) -> (f64, f64)) -> ImageTensor {
    let (h, w) = (img.height(), img.width());
    let mut out = ImageTensor::constant(h, w, 0.0);
    for y in 0..h {
        for x in 0..w {
            let (sx, sy) = map(x as f64, y as f64);
            for c in 0..CHANNELS {
                out.set(c, y, x, img.sample(c, sy, sx));
            }
        }
    }
    out
}

/// Separable Gaussian smoothing with edge replication.
fn gaussian_blur(img: &ImageTensor, sigma: f64) -> ImageTensor {
    let radius = (3.0 * sigma).ceil().max(1.0) as i64;
    let mut kernel = Vec::with_capacity(2 * radius as usize + 1);
    for i in -radius..=radius {
        kernel.push((-(i as f64).powi(2) / (2.0 * sigma * sigma)).exp());
    }
    let sum: f64 = kernel.iter().sum();
    for k in &mut kernel {
        *k /= sum;
    }

    let (h, w) = (img.height(), img.width());
    let clamp_x = |x: i64| x.clamp(0, w as i64 - 1) as usize;
    let clamp_y = |y: i64| y.clamp(0, h as i64 - 1) as usize;

    let mut horizontal = ImageTensor::constant(h, w, 0.0);
    for c in 0..CHANNELS {
        for y in 0..h {
            for x in 0..w {
                let mut acc = 0.0;
                for (ki, k) in kernel.iter().enumerate() {
                    let sx = clamp_x(x as i64 + ki as i64 - radius);
                    acc += k * img.get(c, y, sx);
                }
                horizontal.set(c, y, x, acc);
            }
        }
    }
    let mut out = ImageTensor::constant(h, w, 0.0);
    for c in 0..CHANNELS {
        for y in 0..h {
            for x in 0..w {
                let mut acc = 0.0;
                for (ki, k) in kernel.iter().enumerate() {
                    let sy = clamp_y(y as i64 + ki as i64 - radius);
                    acc += k * horizontal.get(c, sy, x);
                }
                out.set(c, y, x, acc);
            }
        }
    }
    out
}

/// Solve for the 3x3 homography (h33 = 1) mapping `from[i]` to `to[i]`,
/// returned as `[h11, h12, h13, h21, h22, h23, h31, h32]`.
fn homography(from: &[(f64, f64)], to: &[(f64, f64)]) -> Result<[f64; 8]> {
    assert_eq!(from.len(), 4);
    assert_eq!(to.len(), 4);
    let mut a = [[0.0f64; 9]; 8];
    for i in 0..4 {
        let (x, y) = from[i];
        let (u, v) = to[i];
        a[2 * i] = [x, y, 1.0, 0.0, 0.0, 0.0, -u * x, -u * y, u];
        a[2 * i + 1] = [0.0, 0.0, 0.0, x, y, 1.0, -v * x, -v * y, v];
    }
    // Gaussian elimination with partial pivoting on the augmented system.
    for col in 0..8 {
        let pivot = (col..8)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        if a[pivot][col].abs() < 1e-12 {
            return Err(Error::InvalidTransform(
                "perspective corners are degenerate".into(),
            ));
        }
        a.swap(col, pivot);
        for row in (col + 1)..8 {
            let f = a[row][col] / a[col][col];
            for k in col..9 {
                a[row][k] -= f * a[col][k];
            }
        }
    }
    let mut h = [0.0f64; 8];
    for col in (0..8).rev() {
        let mut acc = a[col][8];
        for k in (col + 1)..8 {
            acc -= a[col][k] * h[k];
        }
        h[col] = acc / a[col][col];
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn test_image(h: usize, w: usize) -> ImageTensor {
        ImageTensor::from_fn(h, w, |c, y, x| {
            (((c + 1) * 31 + y * 17 + x * 7) % 97) as f64 / 96.0
        })
    }

    #[test]
    fn hflip_mirrors_columns() {
        // 2x2 plane [[a, b], [c, d]] becomes [[b, a], [d, c]].
        let img = ImageTensor::from_fn(2, 2, |c, y, x| (c * 4 + y * 2 + x) as f64 / 12.0);
        let spec = TransformSpec::named("hflip", 0).unwrap();
        let flipped = apply_transform(&img, &spec).unwrap();
        for c in 0..CHANNELS {
            assert_eq!(flipped.get(c, 0, 0), img.get(c, 0, 1));
            assert_eq!(flipped.get(c, 0, 1), img.get(c, 0, 0));
            assert_eq!(flipped.get(c, 1, 0), img.get(c, 1, 1));
            assert_eq!(flipped.get(c, 1, 1), img.get(c, 1, 0));
        }
    }

    #[test]
    fn flips_are_exact_involutions() {
        let img = test_image(11, 13);
        for name in ["hflip", "vflip"] {
            let spec = TransformSpec::named(name, 9).unwrap();
            let once = apply_transform(&img, &spec).unwrap();
            let twice = apply_transform(&once, &spec).unwrap();
            assert_eq!(twice.data(), img.data(), "{name} twice must be identity");
        }
    }

    #[test]
    fn zero_translation_is_identity() {
        let img = test_image(9, 9);
        let spec = TransformSpec::new(
            TransformKind::Translation {
                dx_fraction: ParamRange::fixed(0.0),
                dy_fraction: ParamRange::fixed(0.0),
            },
            3,
        );
        let out = apply_transform(&img, &spec).unwrap();
        assert_eq!(out.data(), img.data());
    }

    #[test]
    fn noise_is_deterministic_per_seed() {
        let img = test_image(8, 8);
        let spec = TransformSpec::named("noise", 77).unwrap();
        let a = apply_transform(&img, &spec).unwrap();
        let b = apply_transform(&img, &spec).unwrap();
        assert_eq!(a.data(), b.data());
        let other_seed = TransformSpec::named("noise", 78).unwrap();
        let c = apply_transform(&img, &other_seed).unwrap();
        assert_ne!(a.data(), c.data());
    }

    #[test]
    fn catalog_has_thirteen_distinct_kinds() {
        let catalog = transform_catalog();
        assert_eq!(catalog.len(), 13);
        let names: Vec<&str> = catalog.iter().map(|s| s.kind.name()).collect();
        assert!(names.contains(&"hflip"));
        assert!(names.contains(&"vflip"));
        let mut unique = names.clone();
        unique.sort();
        unique.dedup();
        assert_eq!(unique.len(), 13);
    }

    #[test]
    fn catalog_round_trips_through_serde() {
        for spec in transform_catalog() {
            let json = serde_json::to_string(&spec).unwrap();
            let back: TransformSpec = serde_json::from_str(&json).unwrap();
            assert_eq!(back, spec);
        }
    }

    #[test]
    fn all_transforms_preserve_shape_and_range() {
        let img = test_image(16, 12);
        for mut spec in transform_catalog() {
            spec.seed = 41;
            let out = apply_transform(&img, &spec).unwrap();
            assert_eq!(out.height(), img.height(), "{}", spec.kind.name());
            assert_eq!(out.width(), img.width(), "{}", spec.kind.name());
            assert!(
                out.data().iter().all(|v| (0.0..=1.0).contains(v)),
                "{} left values outside [0,1]",
                spec.kind.name()
            );
        }
    }

    #[test]
    fn all_transforms_are_deterministic() {
        let img = test_image(10, 10);
        for mut spec in transform_catalog() {
            spec.seed = 1234;
            let a = apply_transform(&img, &spec).unwrap();
            let b = apply_transform(&img, &spec).unwrap();
            assert_eq!(a.data(), b.data(), "{}", spec.kind.name());
        }
    }

    #[test]
    fn contrast_and_intensity_keep_constant_images_constant() {
        let img = ImageTensor::constant(6, 6, 0.4);
        for name in ["contrast", "intensity"] {
            let spec = TransformSpec::named(name, 5).unwrap();
            let out = apply_transform(&img, &spec).unwrap();
            let first = out.data()[0];
            assert!(
                out.data().iter().all(|&v| (v - first).abs() < 1e-12),
                "{name} broke the constant field"
            );
        }
    }

    #[test]
    fn gaussian_filter_preserves_constant_images() {
        let img = ImageTensor::constant(7, 7, 0.625);
        let spec = TransformSpec::named("gaussian_filter", 2).unwrap();
        let out = apply_transform(&img, &spec).unwrap();
        for &v in out.data() {
            assert!((v - 0.625).abs() < 1e-9);
        }
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        let img = test_image(4, 4);
        let bad_crop = TransformSpec::new(
            TransformKind::Crop {
                area_fraction: ParamRange::new(0.0, 1.2),
            },
            0,
        );
        assert!(apply_transform(&img, &bad_crop).is_err());
        let bad_noise = TransformSpec::new(TransformKind::Noise { stddev: -0.5 }, 0);
        assert!(apply_transform(&img, &bad_noise).is_err());
        let bad_range = TransformSpec::new(
            TransformKind::Shear {
                factor: ParamRange::new(0.3, -0.3),
            },
            0,
        );
        assert!(apply_transform(&img, &bad_range).is_err());
    }

    #[test]
    fn unknown_kind_name_is_none() {
        assert!(TransformSpec::named("blur_sharpen", 0).is_none());
    }
}
