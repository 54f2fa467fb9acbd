//! Shared image operations: convolutions, warps, colour space helpers.

use alloc::vec;
use alloc::vec::Vec;

use crate::image::{reflect_index, ImageBuffer, CHANNELS};
use crate::math;

/// Normalized 1-D Gaussian taps covering ±3σ (at least radius 1).
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    if sigma <= 0.0 {
        return vec![1.0];
    }
    let radius = (math::ceil(3.0 * sigma) as usize).max(1);
    let mut k: Vec<f64> = (0..=2 * radius)
        .map(|i| {
            let d = i as f64 - radius as f64;
            math::exp(-d * d / (2.0 * sigma * sigma))
        })
        .collect();
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    k
}

/// Separable Gaussian blur of a single-plane `f64` grid, reflect padded.
pub fn blur_plane(plane: &[f64], height: usize, width: usize, sigma: f64) -> Vec<f64> {
    let k = gaussian_kernel(sigma);
    if k.len() == 1 {
        return plane.to_vec();
    }
    let r = (k.len() / 2) as isize;
    let mut tmp = vec![0.0; plane.len()];
    for y in 0..height {
        for x in 0..width {
            let mut acc = 0.0;
            for (i, w) in k.iter().enumerate() {
                let xx = reflect_index(x as isize + i as isize - r, width);
                acc += w * plane[y * width + xx];
            }
            tmp[y * width + x] = acc;
        }
    }
    let mut out = vec![0.0; plane.len()];
    for y in 0..height {
        for x in 0..width {
            let mut acc = 0.0;
            for (i, w) in k.iter().enumerate() {
                let yy = reflect_index(y as isize + i as isize - r, height);
                acc += w * tmp[yy * width + x];
            }
            out[y * width + x] = acc;
        }
    }
    out
}

/// Gaussian blur of every channel.
pub fn gaussian_blur(img: &ImageBuffer, sigma: f64) -> ImageBuffer {
    let (h, w) = img.dims();
    let mut out = vec![0.0f32; h * w * CHANNELS];
    for c in 0..CHANNELS {
        let plane = channel_plane(img, c);
        let blurred = blur_plane(&plane, h, w, sigma);
        for (i, v) in blurred.into_iter().enumerate() {
            out[i * CHANNELS + c] = v as f32;
        }
    }
    ImageBuffer::from_unclamped(h, w, out)
}

pub fn channel_plane(img: &ImageBuffer, c: usize) -> Vec<f64> {
    img.data()
        .chunks_exact(CHANNELS)
        .map(|p| f64::from(p[c]))
        .collect()
}

/// Dense 2-D convolution with an odd-sized kernel, reflect padded.
pub fn convolve(img: &ImageBuffer, kernel: &[f64], ksize: usize) -> ImageBuffer {
    assert_eq!(kernel.len(), ksize * ksize);
    assert!(ksize % 2 == 1);
    let (h, w) = img.dims();
    let r = (ksize / 2) as isize;
    let taps: Vec<(isize, isize, f64)> = kernel
        .iter()
        .enumerate()
        .filter(|(_, &v)| v != 0.0)
        .map(|(i, &v)| ((i / ksize) as isize - r, (i % ksize) as isize - r, v))
        .collect();
    let src = img.data();
    let mut out = vec![0.0f32; h * w * CHANNELS];
    for y in 0..h {
        for x in 0..w {
            let mut acc = [0.0f64; 3];
            for &(dy, dx, wgt) in &taps {
                let yy = reflect_index(y as isize + dy, h);
                let xx = reflect_index(x as isize + dx, w);
                let i = (yy * w + xx) * CHANNELS;
                for c in 0..CHANNELS {
                    acc[c] += wgt * f64::from(src[i + c]);
                }
            }
            let o = (y * w + x) * CHANNELS;
            for c in 0..CHANNELS {
                out[o + c] = acc[c] as f32;
            }
        }
    }
    ImageBuffer::from_unclamped(h, w, out)
}

/// Backward warp: output pixel `(y, x)` samples the source at `map(y, x)`.
pub fn warp<F>(img: &ImageBuffer, mut map: F) -> ImageBuffer
where
    F: FnMut(f64, f64) -> (f64, f64),
{
    let (h, w) = img.dims();
    let mut out = Vec::with_capacity(h * w * CHANNELS);
    for y in 0..h {
        for x in 0..w {
            let (sy, sx) = map(y as f64, x as f64);
            out.extend_from_slice(&img.sample_bilinear(sy, sx));
        }
    }
    ImageBuffer::from_unclamped(h, w, out)
}

/// Average of `taps` bilinear samples along offsets produced by `offset(i)`.
pub fn average_samples<F>(img: &ImageBuffer, taps: usize, mut offset: F) -> ImageBuffer
where
    F: FnMut(usize, f64, f64) -> (f64, f64),
{
    let (h, w) = img.dims();
    let mut out = Vec::with_capacity(h * w * CHANNELS);
    let inv = 1.0 / taps as f32;
    for y in 0..h {
        for x in 0..w {
            let mut acc = [0.0f32; 3];
            for i in 0..taps {
                let (sy, sx) = offset(i, y as f64, x as f64);
                let p = img.sample_bilinear(sy, sx);
                for c in 0..CHANNELS {
                    acc[c] += p[c];
                }
            }
            out.extend_from_slice(&[acc[0] * inv, acc[1] * inv, acc[2] * inv]);
        }
    }
    ImageBuffer::from_unclamped(h, w, out)
}

/// Applies `f` to every pixel.
pub fn map_pixels<F>(img: &ImageBuffer, mut f: F) -> ImageBuffer
where
    F: FnMut(usize, [f32; 3]) -> [f32; 3],
{
    let (h, w) = img.dims();
    let mut out = Vec::with_capacity(h * w * CHANNELS);
    for (i, p) in img.data().chunks_exact(CHANNELS).enumerate() {
        out.extend_from_slice(&f(i, [p[0], p[1], p[2]]));
    }
    ImageBuffer::from_unclamped(h, w, out)
}

/// Adds a single-plane field to every channel: `x + amount * field`.
pub fn add_field(img: &ImageBuffer, field: &[f64], amount: f64) -> ImageBuffer {
    map_pixels(img, |i, p| {
        let d = (amount * field[i]) as f32;
        [p[0] + d, p[1] + d, p[2] + d]
    })
}

pub fn rgb_to_hsv(p: [f32; 3]) -> [f32; 3] {
    let [r, g, b] = p;
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let d = max - min;
    let h = if d == 0.0 {
        0.0
    } else if max == r {
        {
            let v = (g - b) / d;
            if v < 0.0 {
                (v + 6.0) / 6.0
            } else {
                v / 6.0
            }
        }
    } else if max == g {
        ((b - r) / d + 2.0) / 6.0
    } else {
        ((r - g) / d + 4.0) / 6.0
    };
    let s = if max == 0.0 { 0.0 } else { d / max };
    [h, s, max]
}

pub fn hsv_to_rgb(p: [f32; 3]) -> [f32; 3] {
    let [h, s, v] = p;
    let h6 = (h - math::floor(f64::from(h)) as f32) * 6.0;
    let i = (math::floor(f64::from(h6)) as i32).rem_euclid(6);
    let f = h6 - i as f32;
    let p_ = v * (1.0 - s);
    let q = v * (1.0 - s * f);
    let t = v * (1.0 - s * (1.0 - f));
    match i {
        0 => [v, t, p_],
        1 => [q, v, p_],
        2 => [p_, v, t],
        3 => [p_, q, v],
        4 => [t, p_, v],
        _ => [v, p_, q],
    }
}

/// Rescales a field to zero mean and unit (population) standard deviation.
pub fn standardize(field: &mut [f64]) {
    let (mean, std) = math::mean_std(field);
    let s = if std > 0.0 { 1.0 / std } else { 0.0 };
    field.iter_mut().for_each(|v| *v = (*v - mean) * s);
}

/// Rescales a field linearly onto `[0, 1]`.
pub fn normalize_unit(field: &mut [f64]) {
    let lo = field.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = field.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    field
        .iter_mut()
        .for_each(|v| *v = if span > 0.0 { (*v - lo) / span } else { 0.0 });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::synthetic_image;
    use crate::rng::Seed;

    #[test]
    fn gaussian_kernel_sums_to_one() {
        for s in [0.3, 1.0, 2.5] {
            let k = gaussian_kernel(s);
            assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert_eq!(k.len() % 2, 1);
        }
    }

    #[test]
    fn blur_keeps_constant_images() {
        let img = ImageBuffer::filled(9, 7, [0.25, 0.5, 0.75]);
        let out = gaussian_blur(&img, 1.5);
        assert!(img.mean_abs_diff(&out) < 1e-6);
    }

    #[test]
    fn identity_warp_and_kernel() {
        let img = synthetic_image(12, 10, Seed(2));
        assert_eq!(warp(&img, |y, x| (y, x)), img);
        let mut k = vec![0.0; 9];
        k[4] = 1.0;
        assert_eq!(convolve(&img, &k, 3), img);
    }

    #[test]
    fn hsv_round_trip() {
        for p in [
            [0.1, 0.5, 0.9],
            [0.9, 0.2, 0.2],
            [0.3, 0.3, 0.3],
            [0.0, 1.0, 0.5],
        ] {
            let back = hsv_to_rgb(rgb_to_hsv(p));
            for c in 0..3 {
                assert!((back[c] - p[c]).abs() < 1e-6, "{p:?} -> {back:?}");
            }
        }
    }
}
