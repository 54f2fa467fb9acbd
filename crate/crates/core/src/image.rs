//! RGB image buffers in the real `[0, 1]` domain.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::math;
use crate::rng::Seed;

pub const CHANNELS: usize = 3;

/// Row-major `height × width × 3` image with values in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageBuffer {
    height: usize,
    width: usize,
    data: Vec<f32>,
}

impl ImageBuffer {
    /// Validates length, finiteness and range.
    pub fn new(height: usize, width: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != height * width * CHANNELS {
            return Err(Error::InvalidImage(alloc::format!(
                "expected {} values for {}x{}x3, got {}",
                height * width * CHANNELS,
                height,
                width,
                data.len()
            )));
        }
        if let Some(v) = data
            .iter()
            .find(|v| !v.is_finite() || **v < 0.0 || **v > 1.0)
        {
            return Err(Error::InvalidImage(alloc::format!(
                "value {v} outside [0, 1]"
            )));
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    /// Builds an image from arbitrary values, clamping into `[0, 1]`.
    /// Non-finite values map to 0.
    pub fn from_unclamped(height: usize, width: usize, mut data: Vec<f32>) -> Self {
        assert_eq!(data.len(), height * width * CHANNELS);
        for v in &mut data {
            *v = if v.is_finite() {
                v.clamp(0.0, 1.0)
            } else {
                0.0
            };
        }
        Self {
            height,
            width,
            data,
        }
    }

    pub fn filled(height: usize, width: usize, rgb: [f32; 3]) -> Self {
        let mut data = Vec::with_capacity(height * width * CHANNELS);
        for _ in 0..height * width {
            data.extend_from_slice(&rgb);
        }
        Self::from_unclamped(height, width, data)
    }

    pub fn zeros(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            data: vec![0.0; height * width * CHANNELS],
        }
    }

    pub fn from_rgb8(height: usize, width: usize, bytes: &[u8]) -> Result<Self> {
        if bytes.len() != height * width * CHANNELS {
            return Err(Error::InvalidImage(alloc::format!(
                "expected {} bytes, got {}",
                height * width * CHANNELS,
                bytes.len()
            )));
        }
        let data = bytes.iter().map(|&b| f32::from(b) / 255.0).collect();
        Ok(Self {
            height,
            width,
            data,
        })
    }

    /// Quantizes to 8 bits with round-half-up: `floor(v * 255 + 0.5)`.
    pub fn to_rgb8(&self) -> Vec<u8> {
        self.data.iter().map(|&v| quantize_u8(v)).collect()
    }

    pub fn height(&self) -> usize {
        self.height
    }
    pub fn width(&self) -> usize {
        self.width
    }
    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }
    pub fn pixel_count(&self) -> usize {
        self.height * self.width
    }
    pub fn data(&self) -> &[f32] {
        &self.data
    }
    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize, c: usize) -> f32 {
        self.data[(y * self.width + x) * CHANNELS + c]
    }

    #[inline]
    pub fn pixel(&self, y: usize, x: usize) -> [f32; 3] {
        let i = (y * self.width + x) * CHANNELS;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    /// Bilinear sample at continuous pixel coordinates with reflect
    /// boundary handling.
    pub fn sample_bilinear(&self, y: f64, x: f64) -> [f32; 3] {
        let y = reflect_coord(y, self.height);
        let x = reflect_coord(x, self.width);
        // Both coordinates are already in [0, n - 1].
        let y0 = y as usize;
        let x0 = x as usize;
        let y1 = (y0 + 1).min(self.height - 1);
        let x1 = (x0 + 1).min(self.width - 1);
        let fy = (y - y0 as f64) as f32;
        let fx = (x - x0 as f64) as f32;
        let mut out = [0.0f32; 3];
        for (c, o) in out.iter_mut().enumerate() {
            let a = self.get(y0, x0, c) * (1.0 - fx) + self.get(y0, x1, c) * fx;
            let b = self.get(y1, x0, c) * (1.0 - fx) + self.get(y1, x1, c) * fx;
            *o = a * (1.0 - fy) + b * fy;
        }
        out
    }

    /// Rec. 601 luma per pixel.
    pub fn luminance(&self) -> Vec<f64> {
        self.data
            .chunks_exact(CHANNELS)
            .map(|p| 0.299 * f64::from(p[0]) + 0.587 * f64::from(p[1]) + 0.114 * f64::from(p[2]))
            .collect()
    }

    /// Mean absolute per-value difference.
    pub fn mean_abs_diff(&self, other: &ImageBuffer) -> f64 {
        assert_eq!(self.dims(), other.dims());
        let s: f64 = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| f64::from((a - b).abs()))
            .sum();
        s / self.data.len().max(1) as f64
    }
}

#[inline]
pub fn quantize_u8(v: f32) -> u8 {
    let q = math::floor(f64::from(v) * 255.0 + 0.5);
    q.clamp(0.0, 255.0) as u8
}

/// Reflects a continuous coordinate into `[0, n - 1]` (mirror about the
/// first and last sample, no edge repeat).
pub fn reflect_coord(v: f64, n: usize) -> f64 {
    if n <= 1 || !v.is_finite() {
        return 0.0;
    }
    let max = (n - 1) as f64;
    if (0.0..=max).contains(&v) {
        return v;
    }
    let period = 2.0 * max;
    let mut r = v - period * math::floor(v / period);
    if r > max {
        r = period - r;
    }
    r.clamp(0.0, max)
}

/// Reflects an integer index into `[0, n)`.
pub fn reflect_index(i: isize, n: usize) -> usize {
    if n <= 1 {
        return 0;
    }
    let period = 2 * (n as isize - 1);
    let mut r = i.rem_euclid(period);
    if r >= n as isize {
        r = period - r;
    }
    r as usize
}

/// A fixed, ordered set of images used to featurize transforms.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ImageSubset {
    pub ids: Vec<String>,
    pub images: Vec<ImageBuffer>,
}

impl ImageSubset {
    pub fn new(ids: Vec<String>, images: Vec<ImageBuffer>) -> Result<Self> {
        if ids.len() != images.len() {
            return Err(Error::Domain(alloc::format!(
                "{} ids for {} images",
                ids.len(),
                images.len()
            )));
        }
        Ok(Self { ids, images })
    }
    pub fn len(&self) -> usize {
        self.images.len()
    }
    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }
    /// Stable identifier of the membership, independent of pixel data.
    pub fn id(&self) -> u64 {
        let mut h = crate::rng::fnv1a(b"subset");
        for id in &self.ids {
            h = crate::rng::splitmix64(h ^ crate::rng::fnv1a(id.as_bytes()));
        }
        h
    }
}

/// Chooses `n` of `ids` uniformly without replacement.
///
/// `ids` are first sorted lexicographically (the canonical order), then
/// shuffled with a Fisher-Yates pass from the `("subset", 0)` stream of
/// `seed`. The first `n` shuffled entries are returned in canonical order.
pub fn choose_subset(ids: &[String], n: usize, seed: Seed) -> Result<Vec<String>> {
    if n > ids.len() {
        return Err(Error::Size {
            requested: n,
            available: ids.len(),
        });
    }
    let mut canonical: Vec<String> = ids.to_vec();
    canonical.sort();
    let mut rng = seed.stream("subset", 0);
    canonical.shuffle(&mut rng);
    canonical.truncate(n);
    canonical.sort();
    Ok(canonical)
}

/// Procedural test image: smooth two-colour gradient, a handful of
/// flat-shaded rectangles and discs, and mild texture. Values stay in
/// `[0.03, 0.97]`.
pub fn synthetic_image(height: usize, width: usize, seed: Seed) -> ImageBuffer {
    let mut rng = seed.stream("synthetic-image", 0);
    let c0: [f64; 3] = [rng.random(), rng.random(), rng.random()];
    let c1: [f64; 3] = [rng.random(), rng.random(), rng.random()];
    let angle: f64 = rng.random_range(0.0..2.0 * math::PI);
    let (ca, sa) = (math::cos(angle), math::sin(angle));
    let mut data = vec![0.0f32; height * width * CHANNELS];
    let h = height.max(1) as f64;
    let w = width.max(1) as f64;
    for y in 0..height {
        for x in 0..width {
            let u = ((x as f64 / w - 0.5) * ca + (y as f64 / h - 0.5) * sa + 0.75) / 1.5;
            let i = (y * width + x) * CHANNELS;
            for c in 0..CHANNELS {
                data[i + c] = (c0[c] * (1.0 - u) + c1[c] * u) as f32;
            }
        }
    }
    let shapes = rng.random_range(3..7);
    for _ in 0..shapes {
        let color: [f32; 3] = [rng.random(), rng.random(), rng.random()];
        let cy = rng.random_range(0.0..h);
        let cx = rng.random_range(0.0..w);
        let ry = rng.random_range(0.1..0.35) * h;
        let rx = rng.random_range(0.1..0.35) * w;
        let disc = rng.random_bool(0.5);
        for y in 0..height {
            for x in 0..width {
                let dy = (y as f64 - cy) / ry;
                let dx = (x as f64 - cx) / rx;
                let inside = if disc {
                    dy * dy + dx * dx <= 1.0
                } else {
                    dy.abs() <= 1.0 && dx.abs() <= 1.0
                };
                if inside {
                    let i = (y * width + x) * CHANNELS;
                    data[i..i + CHANNELS].copy_from_slice(&color);
                }
            }
        }
    }
    let fx: f64 = rng.random_range(0.2..1.2);
    let fy: f64 = rng.random_range(0.2..1.2);
    let amp: f64 = rng.random_range(0.02..0.06);
    for y in 0..height {
        for x in 0..width {
            let t = amp * math::sin(fx * x as f64) * math::cos(fy * y as f64);
            let i = (y * width + x) * CHANNELS;
            for c in 0..CHANNELS {
                let v = f64::from(data[i + c]) * 0.94 + 0.03 + t;
                data[i + c] = v.clamp(0.03, 0.97) as f32;
            }
        }
    }
    ImageBuffer::from_unclamped(height, width, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_buffers() {
        assert!(ImageBuffer::new(2, 2, vec![0.0; 11]).is_err());
        assert!(ImageBuffer::new(1, 1, vec![0.0, 1.5, 0.0]).is_err());
        assert!(ImageBuffer::new(1, 1, vec![0.0, f32::NAN, 0.0]).is_err());
        assert!(ImageBuffer::new(1, 1, vec![0.0, 1.0, 0.5]).is_ok());
    }

    #[test]
    fn rgb8_round_trip_is_exact() {
        let bytes: Vec<u8> = (0..=255u8)
            .chain(0..=255u8)
            .chain(0..=255)
            .take(3 * 256)
            .collect();
        let img = ImageBuffer::from_rgb8(16, 16, &bytes).unwrap();
        assert_eq!(img.to_rgb8(), bytes);
        let red = ImageBuffer::from_rgb8(1, 1, &[255, 0, 0]).unwrap();
        assert_eq!(red.pixel(0, 0), [1.0, 0.0, 0.0]);
    }

    #[test]
    fn quantization_rounds_half_up() {
        assert_eq!(quantize_u8(0.5 / 255.0), 1);
        assert_eq!(quantize_u8(0.49 / 255.0), 0);
        assert_eq!(quantize_u8(1.0), 255);
    }

    #[test]
    fn reflection() {
        assert_eq!(reflect_index(-1, 5), 1);
        assert_eq!(reflect_index(5, 5), 3);
        assert_eq!(reflect_index(9, 5), 1);
        assert_eq!(reflect_coord(-0.5, 5), 0.5);
        assert_eq!(reflect_coord(4.5, 5), 3.5);
        assert_eq!(reflect_coord(3.0, 1), 0.0);
    }

    #[test]
    fn subset_choice() {
        let ids: Vec<String> = (0..10).map(|i| alloc::format!("img{i:02}.png")).collect();
        assert!(choose_subset(&ids, 0, Seed(1)).unwrap().is_empty());
        assert_eq!(
            choose_subset(&ids, 4, Seed(7)).unwrap(),
            choose_subset(&ids, 4, Seed(7)).unwrap()
        );
        let mut reversed = ids.clone();
        reversed.reverse();
        assert_eq!(
            choose_subset(&ids, 4, Seed(7)).unwrap(),
            choose_subset(&reversed, 4, Seed(7)).unwrap()
        );
        assert_eq!(choose_subset(&ids, 10, Seed(3)).unwrap(), ids);
        assert!(matches!(
            choose_subset(&ids, 11, Seed(3)),
            Err(Error::Size { .. })
        ));
    }

    #[test]
    fn synthetic_images_are_valid_and_seeded() {
        let a = synthetic_image(32, 32, Seed(5));
        let b = synthetic_image(32, 32, Seed(5));
        let c = synthetic_image(32, 32, Seed(6));
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(ImageBuffer::new(32, 32, a.into_data()).is_ok());
    }
}
