//! Image decode, resize, and normalization.
//!
//! Pixels live in an [`ImageTensor`]: three RGB channels of `f64` in
//! `[0, 1]`, row-major per channel. Decoding accepts PNG and JPEG;
//! materialized images are written back as PNG.

mod transform;

pub use transform::{
    apply_transform, transform_catalog, ParamRange, TransformKind, TransformSpec,
};

use std::path::Path;

use crate::error::{Error, Result};

/// RGB image as three channel planes of `f64` in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageTensor {
    height: usize,
    width: usize,
    /// Channel-major: `data[c*h*w + y*w + x]`.
    data: Vec<f64>,
}

pub const CHANNELS: usize = 3;

impl ImageTensor {
    pub fn new(height: usize, width: usize, data: Vec<f64>) -> Self {
        assert!(height > 0 && width > 0, "image dimensions must be positive");
        assert_eq!(data.len(), CHANNELS * height * width);
        Self {
            height,
            width,
            data,
        }
    }

    /// Constant-valued image.
    pub fn constant(height: usize, width: usize, value: f64) -> Self {
        Self::new(height, width, vec![value; CHANNELS * height * width])
    }

    pub fn from_fn(height: usize, width: usize, f: impl Fn(usize, usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(CHANNELS * height * width);
        for c in 0..CHANNELS {
            for y in 0..height {
                for x in 0..width {
                    data.push(f(c, y, x));
                }
            }
        }
        Self::new(height, width, data)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, c: usize, y: usize, x: usize) -> f64 {
        self.data[(c * self.height + y) * self.width + x]
    }

    pub fn set(&mut self, c: usize, y: usize, x: usize, v: f64) {
        self.data[(c * self.height + y) * self.width + x] = v;
    }

    /// Bilinear sample at continuous coordinates with edge replication.
    /// Integer coordinates return stored values exactly.
    pub fn sample(&self, c: usize, y: f64, x: f64) -> f64 {
        let clamp = |v: f64, hi: usize| -> usize {
            if v <= 0.0 {
                0
            } else if v >= (hi - 1) as f64 {
                hi - 1
            } else {
                v as usize
            }
        };
        let x0f = x.floor();
        let y0f = y.floor();
        let fx = x - x0f;
        let fy = y - y0f;
        let x0 = clamp(x0f, self.width);
        let x1 = clamp(x0f + 1.0, self.width);
        let y0 = clamp(y0f, self.height);
        let y1 = clamp(y0f + 1.0, self.height);
        let top = (1.0 - fx) * self.get(c, y0, x0) + fx * self.get(c, y0, x1);
        let bottom = (1.0 - fx) * self.get(c, y1, x0) + fx * self.get(c, y1, x1);
        (1.0 - fy) * top + fy * bottom
    }

    /// Bilinear resize with half-pixel centers. A same-size resize copies
    /// values exactly.
    pub fn resize(&self, out_height: usize, out_width: usize) -> ImageTensor {
        assert!(out_height > 0 && out_width > 0);
        let sy = self.height as f64 / out_height as f64;
        let sx = self.width as f64 / out_width as f64;
        let mut out = ImageTensor::constant(out_height, out_width, 0.0);
        for c in 0..CHANNELS {
            for y in 0..out_height {
                let src_y = (y as f64 + 0.5) * sy - 0.5;
                for x in 0..out_width {
                    let src_x = (x as f64 + 0.5) * sx - 0.5;
                    out.set(c, y, x, self.sample(c, src_y, src_x));
                }
            }
        }
        out
    }

    /// Decode a PNG/JPEG file to 8-bit RGB normalized into `[0, 1]`.
    pub fn load(path: &Path) -> Result<ImageTensor> {
        let decoded = image::open(path).map_err(|e| Error::ImageDecode {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })?;
        let rgb = decoded.to_rgb8();
        let (width, height) = (rgb.width() as usize, rgb.height() as usize);
        if width == 0 || height == 0 {
            return Err(Error::ImageDecode {
                path: path.to_path_buf(),
                msg: "zero-dimension image".into(),
            });
        }
        let mut data = vec![0.0; CHANNELS * height * width];
        for (x, y, pixel) in rgb.enumerate_pixels() {
            let (x, y) = (x as usize, y as usize);
            for c in 0..CHANNELS {
                data[(c * height + y) * width + x] = pixel.0[c] as f64 / 255.0;
            }
        }
        Ok(ImageTensor::new(height, width, data))
    }

    /// Encode to PNG, mapping `[0, 1]` back to 8-bit.
    pub fn save_png(&self, path: &Path) -> Result<()> {
        let mut img = image::RgbImage::new(self.width as u32, self.height as u32);
        for y in 0..self.height {
            for x in 0..self.width {
                let px = |c: usize| (self.get(c, y, x).clamp(0.0, 1.0) * 255.0).round() as u8;
                img.put_pixel(x as u32, y as u32, image::Rgb([px(0), px(1), px(2)]));
            }
        }
        img.save(path).map_err(|e| Error::ImageEncode {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })
    }

    /// Clamp every value into `[0, 1]` in place.
    pub fn clamp_unit(&mut self) {
        for v in &mut self.data {
            *v = v.clamp(0.0, 1.0);
        }
    }
}

/// Decode an image and bilinearly resize it to `side x side`.
pub fn load_and_resize(path: &Path, side: usize) -> Result<ImageTensor> {
    let img = ImageTensor::load(path)?;
    if img.height == side && img.width == side {
        return Ok(img);
    }
    Ok(img.resize(side, side))
}
