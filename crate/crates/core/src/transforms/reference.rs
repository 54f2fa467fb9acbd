//! The fifteen reference-benchmark corruptions (noise, blur, weather,
//! digital), re-implemented on the real `[0, 1]` domain.
//!
//! Spatial parameters are in pixels at a 32-pixel short side and are
//! scaled with the image. Frost is procedural (thresholded ridged fractal
//! noise) rather than a photographic overlay.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};

use super::filter::{
    average_samples, blur_plane, convolve, gaussian_blur, hsv_to_rgb, map_pixels, rgb_to_hsv,
    standardize, warp,
};
use super::noise::{perlin_field, plasma_field};
use super::{param, spatial_scale, Params, RegistryEntry, TransformKind};
use crate::image::{ImageBuffer, CHANNELS};
use crate::math;
use crate::rng::ChaCha8Rng;

macro_rules! corruption {
    ($name:literal, $params:expr, $desc:literal, $kernel:path) => {
        RegistryEntry {
            name: $name,
            kind: TransformKind::CorruptionReference,
            params: $params,
            description: $desc,
            kernel: $kernel,
        }
    };
}

pub(crate) static ENTRIES: &[RegistryEntry] = &[
    corruption!(
        "gaussian_noise",
        &[param("sigma", 0.0, 1.0)],
        "additive N(0, sigma) per value",
        gaussian_noise
    ),
    corruption!(
        "shot_noise",
        &[param("photons", 1.0, 10_000.0)],
        "Poisson(photons * x) / photons",
        shot_noise
    ),
    corruption!(
        "impulse_noise",
        &[param("amount", 0.0, 1.0)],
        "salt-and-pepper on a fraction of values",
        impulse_noise
    ),
    corruption!(
        "defocus_blur",
        &[param("radius", 0.0, 16.0)],
        "anti-aliased disk kernel",
        defocus_blur
    ),
    corruption!(
        "motion_blur",
        &[param("length", 0.0, 32.0)],
        "one-sided linear blur at a random angle in [-45, 45] degrees",
        motion_blur
    ),
    corruption!(
        "zoom_blur",
        &[param("zoom", 1.0, 2.0)],
        "mean of centre zooms 1, 1.01, ..., < zoom",
        zoom_blur
    ),
    corruption!(
        "glass_blur",
        &[
            param("sigma", 0.0, 8.0),
            param("delta", 0.0, 8.0),
            param("iterations", 0.0, 8.0)
        ],
        "blur, local pixel swaps, blur",
        glass_blur
    ),
    corruption!(
        "brightness",
        &[param("shift", 0.0, 1.0)],
        "add to HSV value",
        brightness
    ),
    corruption!(
        "fog",
        &[param("amount", 0.0, 5.0), param("roughness", 1.0, 8.0)],
        "add a plasma fractal, renormalize by the image maximum",
        fog
    ),
    corruption!(
        "frost",
        &[
            param("image_weight", 0.0, 1.0),
            param("frost_weight", 0.0, 1.0)
        ],
        "blend with a procedural ice texture",
        frost
    ),
    corruption!(
        "snow",
        &[
            param("density", 0.0, 1.0),
            param("length", 0.0, 16.0),
            param("whiten", 0.0, 1.0)
        ],
        "whiten, then add falling flake streaks",
        snow
    ),
    corruption!(
        "contrast",
        &[param("factor", 0.0, 1.0)],
        "scale deviations from the channel mean",
        contrast
    ),
    corruption!(
        "pixelate",
        &[param("scale", 0.05, 1.0)],
        "box downsample, nearest upsample",
        pixelate
    ),
    corruption!(
        "jpeg_compression",
        &[param("quality", 1.0, 100.0)],
        "baseline JPEG round trip",
        jpeg_compression
    ),
    corruption!(
        "elastic_transform",
        &[param("alpha", 0.0, 16.0), param("sigma", 0.25, 16.0)],
        "smoothed random displacement field",
        elastic_transform
    ),
];

fn gaussian_noise(img: &ImageBuffer, p: &Params, rng: &mut ChaCha8Rng) -> ImageBuffer {
    let sigma = p.get("sigma");
    if sigma == 0.0 {
        return img.clone();
    }
    let n = Normal::new(0.0, sigma).expect("finite sigma");
    map_pixels(img, |_, px| px.map(|v| v + n.sample(rng) as f32))
}

fn shot_noise(img: &ImageBuffer, p: &Params, rng: &mut ChaCha8Rng) -> ImageBuffer {
    let lambda = p.get("photons");
    map_pixels(img, |_, px| {
        px.map(|v| {
            let rate = f64::from(v) * lambda;
            if rate <= 0.0 {
                return 0.0;
            }
            let k: f64 = Poisson::new(rate).expect("positive rate").sample(rng);
            (k / lambda) as f32
        })
    })
}

fn impulse_noise(img: &ImageBuffer, p: &Params, rng: &mut ChaCha8Rng) -> ImageBuffer {
    let amount = p.get("amount");
    map_pixels(img, |_, px| {
        px.map(|v| {
            if rng.random::<f64>() < amount {
                if rng.random_bool(0.5) {
                    1.0
                } else {
                    0.0
                }
            } else {
                v
            }
        })
    })
}

/// Disk of `radius` pixels with per-pixel area coverage from 8×8
/// supersampling, normalized to unit sum.
pub(crate) fn disk_kernel(radius: f64) -> (Vec<f64>, usize) {
    let r = math::ceil(radius).max(1.0) as usize;
    let size = 2 * r + 1;
    let mut k = vec![0.0; size * size];
    const SS: usize = 8;
    for ky in 0..size {
        for kx in 0..size {
            let mut hits = 0usize;
            for sy in 0..SS {
                for sx in 0..SS {
                    let y = ky as f64 - r as f64 - 0.5 + (sy as f64 + 0.5) / SS as f64;
                    let x = kx as f64 - r as f64 - 0.5 + (sx as f64 + 0.5) / SS as f64;
                    if x * x + y * y <= radius * radius {
                        hits += 1;
                    }
                }
            }
            k[ky * size + kx] = hits as f64;
        }
    }
    k[r * size + r] = k[r * size + r].max(1.0);
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    (k, size)
}

fn defocus_blur(img: &ImageBuffer, p: &Params, _: &mut ChaCha8Rng) -> ImageBuffer {
    let radius = p.get("radius") * spatial_scale(img);
    let (k, size) = disk_kernel(radius);
    convolve(img, &k, size)
}

fn motion_blur(img: &ImageBuffer, p: &Params, rng: &mut ChaCha8Rng) -> ImageBuffer {
    let length = p.get("length") * spatial_scale(img);
    let angle = rng.random_range(-45.0..45.0) * math::PI / 180.0;
    let taps = (math::ceil(length * 2.0) as usize + 1).max(2);
    let (dy, dx) = (math::sin(angle), math::cos(angle));
    average_samples(img, taps, |i, y, x| {
        let t = length * i as f64 / (taps - 1) as f64;
        (y + t * dy, x - t * dx)
    })
}

fn zoom_blur(img: &ImageBuffer, p: &Params, _: &mut ChaCha8Rng) -> ImageBuffer {
    let zmax = p.get("zoom");
    let mut zooms = vec![1.0];
    let mut k = 1;
    loop {
        let z = 1.0 + 0.01 * k as f64;
        if z >= zmax - 1e-9 {
            break;
        }
        zooms.push(z);
        k += 1;
    }
    let cy = (img.height() as f64 - 1.0) / 2.0;
    let cx = (img.width() as f64 - 1.0) / 2.0;
    average_samples(img, zooms.len(), |i, y, x| {
        let z = zooms[i];
        (cy + (y - cy) / z, cx + (x - cx) / z)
    })
}

fn glass_blur(img: &ImageBuffer, p: &Params, rng: &mut ChaCha8Rng) -> ImageBuffer {
    let s = spatial_scale(img);
    let sigma = p.get("sigma") * s;
    let delta = math::round(p.get("delta") * s) as isize;
    let iterations = math::round(p.get("iterations")) as usize;
    let blurred = gaussian_blur(img, sigma);
    let (h, w) = img.dims();
    let mut data = blurred.into_data();
    if delta > 0 {
        for _ in 0..iterations {
            let mut y = h as isize - delta;
            while y > delta {
                let mut x = w as isize - delta;
                while x > delta {
                    let dy = rng.random_range(-(delta as i64)..delta as i64) as isize;
                    let dx = rng.random_range(-(delta as i64)..delta as i64) as isize;
                    let (yp, xp) = (y + dy, x + dx);
                    let a = (y as usize * w + x as usize) * CHANNELS;
                    let b = (yp as usize * w + xp as usize) * CHANNELS;
                    for c in 0..CHANNELS {
                        data.swap(a + c, b + c);
                    }
                    x -= 1;
                }
                y -= 1;
            }
        }
    }
    gaussian_blur(&ImageBuffer::from_unclamped(h, w, data), sigma)
}

fn brightness(img: &ImageBuffer, p: &Params, _: &mut ChaCha8Rng) -> ImageBuffer {
    let shift = p.get("shift") as f32;
    map_pixels(img, |_, px| {
        let mut hsv = rgb_to_hsv(px);
        hsv[2] = (hsv[2] + shift).clamp(0.0, 1.0);
        hsv_to_rgb(hsv)
    })
}

fn fog(img: &ImageBuffer, p: &Params, rng: &mut ChaCha8Rng) -> ImageBuffer {
    let amount = p.get("amount");
    let plasma = plasma_field(img.height(), img.width(), p.get("roughness"), rng);
    let max = img.data().iter().copied().fold(0.0f32, f32::max) as f64;
    let norm = if max + amount > 0.0 {
        max / (max + amount)
    } else {
        1.0
    };
    map_pixels(img, |i, px| {
        let add = amount * plasma[i];
        px.map(|v| ((f64::from(v) + add) * norm) as f32)
    })
}

/// Ridged fractal ice texture in `[0, 1]`.
pub(crate) fn frost_texture(
    height: usize,
    width: usize,
    scale: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    let n = perlin_field(height, width, scale, 4, 0.55, rng);
    let speck = perlin_field(height, width, scale / 4.0, 2, 0.5, rng);
    n.iter()
        .zip(&speck)
        .map(|(a, b)| {
            let ridge = 1.0 - (a.abs() * 3.0).min(1.0);
            let ridge = ridge * ridge * ridge;
            let crystals = if *b > 0.25 { 0.35 } else { 0.0 };
            (0.45 + 0.55 * ridge + crystals).min(1.0)
        })
        .collect()
}

fn frost(img: &ImageBuffer, p: &Params, rng: &mut ChaCha8Rng) -> ImageBuffer {
    let a = p.get("image_weight") as f32;
    let b = p.get("frost_weight") as f32;
    let tex = frost_texture(img.height(), img.width(), 10.0 * spatial_scale(img), rng);
    const TINT: [f32; 3] = [0.82, 0.9, 1.0];
    map_pixels(img, |i, px| {
        let t = tex[i] as f32;
        [
            a * px[0] + b * t * TINT[0],
            a * px[1] + b * t * TINT[1],
            a * px[2] + b * t * TINT[2],
        ]
    })
}

fn snow(img: &ImageBuffer, p: &Params, rng: &mut ChaCha8Rng) -> ImageBuffer {
    let s = spatial_scale(img);
    let density = p.get("density");
    let length = (p.get("length") * s).max(1.0);
    let whiten = p.get("whiten") as f32;
    let (h, w) = img.dims();
    let angle = rng.random_range(-30.0..30.0) * math::PI / 180.0;
    let (dy, dx) = (math::cos(angle), math::sin(angle));
    let mut layer = vec![0.0f32; h * w];
    let steps = math::ceil(length * 2.0) as usize + 1;
    for y in 0..h {
        for x in 0..w {
            if rng.random::<f64>() >= density {
                continue;
            }
            let bright: f32 = rng.random_range(0.6..1.0);
            for i in 0..steps {
                let t = length * i as f64 / (steps - 1) as f64;
                let yy = math::round(y as f64 + t * dy) as isize;
                let xx = math::round(x as f64 + t * dx) as isize;
                if yy < 0 || xx < 0 || yy >= h as isize || xx >= w as isize {
                    break;
                }
                let v = bright * (1.0 - 0.6 * (t / length) as f32);
                let cell = &mut layer[yy as usize * w + xx as usize];
                *cell = cell.max(v);
            }
        }
    }
    map_pixels(img, |i, px| {
        let gray = 0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2];
        let lifted = (gray * 1.5 + 0.5).min(1.0);
        let f = layer[i];
        px.map(|v| (1.0 - whiten) * v + whiten * v.max(lifted) + f)
    })
}

fn contrast(img: &ImageBuffer, p: &Params, _: &mut ChaCha8Rng) -> ImageBuffer {
    let factor = p.get("factor") as f32;
    let n = img.pixel_count() as f64;
    let mut mean = [0.0f64; 3];
    for px in img.data().chunks_exact(CHANNELS) {
        for c in 0..CHANNELS {
            mean[c] += f64::from(px[c]);
        }
    }
    let mean = mean.map(|m| (m / n) as f32);
    map_pixels(img, |_, px| {
        [
            (px[0] - mean[0]) * factor + mean[0],
            (px[1] - mean[1]) * factor + mean[1],
            (px[2] - mean[2]) * factor + mean[2],
        ]
    })
}

/// Area-weighted box resampling of one axis.
fn box_weights(src: usize, dst: usize) -> Vec<Vec<(usize, f64)>> {
    let ratio = src as f64 / dst as f64;
    (0..dst)
        .map(|i| {
            let lo = i as f64 * ratio;
            let hi = lo + ratio;
            let mut taps = Vec::new();
            let mut j = math::floor(lo) as usize;
            while (j as f64) < hi && j < src {
                let overlap = (hi.min(j as f64 + 1.0) - lo.max(j as f64)).max(0.0);
                if overlap > 0.0 {
                    taps.push((j, overlap / ratio));
                }
                j += 1;
            }
            taps
        })
        .collect()
}

fn pixelate(img: &ImageBuffer, p: &Params, _: &mut ChaCha8Rng) -> ImageBuffer {
    let scale = p.get("scale");
    let (h, w) = img.dims();
    let sh = (math::round(h as f64 * scale) as usize).clamp(1, h);
    let sw = (math::round(w as f64 * scale) as usize).clamp(1, w);
    if sh == h && sw == w {
        return img.clone();
    }
    let wy = box_weights(h, sh);
    let wx = box_weights(w, sw);
    let mut small = vec![0.0f64; sh * sw * CHANNELS];
    for (sy, ty) in wy.iter().enumerate() {
        for (sx, tx) in wx.iter().enumerate() {
            for &(y, a) in ty {
                for &(x, b) in tx {
                    for c in 0..CHANNELS {
                        small[(sy * sw + sx) * CHANNELS + c] += a * b * f64::from(img.get(y, x, c));
                    }
                }
            }
        }
    }
    let mut out = Vec::with_capacity(h * w * CHANNELS);
    for y in 0..h {
        let sy = ((y as f64 + 0.5) * sh as f64 / h as f64) as usize;
        for x in 0..w {
            let sx = ((x as f64 + 0.5) * sw as f64 / w as f64) as usize;
            let i = (sy.min(sh - 1) * sw + sx.min(sw - 1)) * CHANNELS;
            out.extend(small[i..i + CHANNELS].iter().map(|&v| v as f32));
        }
    }
    ImageBuffer::from_unclamped(h, w, out)
}

fn jpeg_compression(img: &ImageBuffer, p: &Params, _: &mut ChaCha8Rng) -> ImageBuffer {
    super::jpeg::jpeg_round_trip(img, math::round(p.get("quality")) as u8)
}

fn elastic_transform(img: &ImageBuffer, p: &Params, rng: &mut ChaCha8Rng) -> ImageBuffer {
    let s = spatial_scale(img);
    let alpha = p.get("alpha") * s;
    let sigma = p.get("sigma") * s;
    let (h, w) = img.dims();
    let field = |rng: &mut ChaCha8Rng| {
        let raw: Vec<f64> = (0..h * w).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut f = blur_plane(&raw, h, w, sigma);
        standardize(&mut f);
        f
    };
    let fy = field(rng);
    let fx = field(rng);
    warp(img, |y, x| {
        let i = y as usize * w + x as usize;
        (y + alpha * fy[i], x + alpha * fx[i])
    })
}
