//! The nine base augmentations (five geometric, four colour), following
//! the Pillow operations conventionally used for AugMix-style schemes.
//!
//! Magnitudes use a `level` in `[0, 10]`; geometric ops also take a
//! `sign` (negative values flip the direction).

use alloc::vec::Vec;

use super::filter::{map_pixels, warp};
use super::{param, ParamDef, Params, RegistryEntry, TransformKind};
use crate::image::{quantize_u8, ImageBuffer, CHANNELS};
use crate::math;
use crate::rng::ChaCha8Rng;

const LEVEL: ParamDef = param("level", 0.0, 10.0);
const SIGN: ParamDef = param("sign", -1.0, 1.0);

pub(crate) fn default_param(name: &str) -> f64 {
    match name {
        "level" => 3.0,
        _ => 1.0,
    }
}

macro_rules! aug {
    ($name:literal, $params:expr, $desc:literal, $kernel:path) => {
        RegistryEntry {
            name: $name,
            kind: TransformKind::Augmentation,
            params: $params,
            description: $desc,
            kernel: $kernel,
        }
    };
}

pub(crate) static ENTRIES: &[RegistryEntry] = &[
    aug!(
        "autocontrast",
        &[],
        "per-channel min/max stretch to [0, 1]",
        autocontrast
    ),
    aug!(
        "equalize",
        &[],
        "per-channel 8-bit histogram equalization",
        equalize
    ),
    aug!(
        "posterize",
        &[LEVEL],
        "keep the top 4 - floor(0.4 * level) bits",
        posterize
    ),
    aug!(
        "rotate",
        &[LEVEL, SIGN],
        "rotate about the centre by 3 * level degrees",
        rotate
    ),
    aug!(
        "solarize",
        &[LEVEL],
        "invert values above 1 - level / 10",
        solarize
    ),
    aug!(
        "shear_x",
        &[LEVEL, SIGN],
        "horizontal shear of 0.03 * level",
        shear_x
    ),
    aug!(
        "shear_y",
        &[LEVEL, SIGN],
        "vertical shear of 0.03 * level",
        shear_y
    ),
    aug!(
        "translate_x",
        &[LEVEL, SIGN],
        "horizontal shift of level / 30 of the width",
        translate_x
    ),
    aug!(
        "translate_y",
        &[LEVEL, SIGN],
        "vertical shift of level / 30 of the height",
        translate_y
    ),
];

fn signed(p: &Params) -> f64 {
    if p.get("sign") < 0.0 {
        -1.0
    } else {
        1.0
    }
}

fn autocontrast(img: &ImageBuffer, _: &Params, _: &mut ChaCha8Rng) -> ImageBuffer {
    let mut lo = [f32::INFINITY; 3];
    let mut hi = [f32::NEG_INFINITY; 3];
    for p in img.data().chunks_exact(CHANNELS) {
        for c in 0..CHANNELS {
            lo[c] = lo[c].min(p[c]);
            hi[c] = hi[c].max(p[c]);
        }
    }
    map_pixels(img, |_, p| {
        let mut o = p;
        for c in 0..CHANNELS {
            if hi[c] > lo[c] {
                o[c] = (p[c] - lo[c]) / (hi[c] - lo[c]);
            }
        }
        o
    })
}

/// Pillow's `ImageOps.equalize` lookup table for one channel histogram.
fn equalize_lut(hist: &[u32; 256]) -> Option<[u8; 256]> {
    let nonzero: Vec<u32> = hist.iter().copied().filter(|&h| h > 0).collect();
    if nonzero.len() <= 1 {
        return None;
    }
    let total: u32 = nonzero.iter().sum();
    let step = (total - nonzero[nonzero.len() - 1]) / 255;
    if step == 0 {
        return None;
    }
    let mut lut = [0u8; 256];
    let mut n = step / 2;
    for (i, l) in lut.iter_mut().enumerate() {
        *l = (n / step).min(255) as u8;
        n += hist[i];
    }
    Some(lut)
}

fn equalize(img: &ImageBuffer, _: &Params, _: &mut ChaCha8Rng) -> ImageBuffer {
    let bytes = img.to_rgb8();
    let mut luts = [None; 3];
    for (c, lut) in luts.iter_mut().enumerate() {
        let mut hist = [0u32; 256];
        for p in bytes.chunks_exact(CHANNELS) {
            hist[usize::from(p[c])] += 1;
        }
        *lut = equalize_lut(&hist);
    }
    let data = bytes
        .iter()
        .enumerate()
        .map(|(i, &b)| match &luts[i % CHANNELS] {
            Some(lut) => f32::from(lut[usize::from(b)]) / 255.0,
            None => f32::from(b) / 255.0,
        })
        .collect();
    ImageBuffer::from_unclamped(img.height(), img.width(), data)
}

fn posterize(img: &ImageBuffer, p: &Params, _: &mut ChaCha8Rng) -> ImageBuffer {
    let bits = (4 - (math::floor(p.get("level") * 4.0 / 10.0) as i32)).max(1) as u32;
    let mask: u8 = !((1u16 << (8 - bits)) - 1) as u8;
    map_pixels(img, |_, px| {
        px.map(|v| f32::from(quantize_u8(v) & mask) / 255.0)
    })
}

fn solarize(img: &ImageBuffer, p: &Params, _: &mut ChaCha8Rng) -> ImageBuffer {
    let threshold = (1.0 - p.get("level") / 10.0) as f32;
    map_pixels(img, |_, px| {
        px.map(|v| if v >= threshold { 1.0 - v } else { v })
    })
}

fn rotate(img: &ImageBuffer, p: &Params, _: &mut ChaCha8Rng) -> ImageBuffer {
    let deg = signed(p) * p.get("level") * 3.0;
    let a = deg * math::PI / 180.0;
    let (s, c) = (math::sin(a), math::cos(a));
    let cy = (img.height() as f64 - 1.0) / 2.0;
    let cx = (img.width() as f64 - 1.0) / 2.0;
    warp(img, |y, x| {
        let dy = y - cy;
        let dx = x - cx;
        (cy + s * dx + c * dy, cx + c * dx - s * dy)
    })
}

fn shear_x(img: &ImageBuffer, p: &Params, _: &mut ChaCha8Rng) -> ImageBuffer {
    let k = signed(p) * p.get("level") * 0.03;
    warp(img, |y, x| (y, x + k * y))
}

fn shear_y(img: &ImageBuffer, p: &Params, _: &mut ChaCha8Rng) -> ImageBuffer {
    let k = signed(p) * p.get("level") * 0.03;
    warp(img, |y, x| (y + k * x, x))
}

fn translate_x(img: &ImageBuffer, p: &Params, _: &mut ChaCha8Rng) -> ImageBuffer {
    let t = signed(p) * p.get("level") * img.width() as f64 / 30.0;
    warp(img, |y, x| (y, x + t))
}

fn translate_y(img: &ImageBuffer, p: &Params, _: &mut ChaCha8Rng) -> ImageBuffer {
    let t = signed(p) * p.get("level") * img.height() as f64 / 30.0;
    warp(img, |y, x| (y + t, x))
}
