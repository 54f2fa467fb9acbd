//! Corruptions of the dissimilar family, ten severities each: noise
//! additions, obscuring overlays, warps, blurs, and colour distortions
//! built from common image-filter recipes.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::filter::{average_samples, map_pixels, normalize_unit, standardize, warp};
use super::noise::{blue_field, perlin_field, plasma_field, spectral_field};
use super::{param, spatial_scale, Params, RegistryEntry, TransformKind};
use crate::image::{ImageBuffer, CHANNELS};
use crate::math;
use crate::rng::ChaCha8Rng;

macro_rules! corruption {
    ($name:literal, $params:expr, $desc:literal, $kernel:path) => {
        RegistryEntry {
            name: $name,
            kind: TransformKind::CorruptionCbar,
            params: $params,
            description: $desc,
            kernel: $kernel,
        }
    };
}

pub(crate) static ENTRIES: &[RegistryEntry] = &[
    corruption!(
        "blue_noise_sample",
        &[param("fraction", 0.0, 1.0)],
        "black out the highest-valued pixels of a high-pass noise field",
        blue_noise_sample
    ),
    corruption!(
        "plasma_noise",
        &[param("amount", 0.0, 1.0)],
        "multiplicative darkening by a plasma fractal",
        plasma_noise
    ),
    corruption!(
        "checkerboard",
        &[param("fraction", 0.0, 0.5)],
        "occlude an exact fraction of pixels with squares on a rotated checker grid",
        checkerboard
    ),
    corruption!(
        "cocentric_sine_waves",
        &[param("amplitude", 0.0, 1.0)],
        "add concentric sine rings about a random centre",
        cocentric_sine_waves
    ),
    corruption!(
        "single_frequency",
        &[param("amplitude", 0.0, 1.0)],
        "add one plane wave of random orientation",
        single_frequency
    ),
    corruption!(
        "brown_noise",
        &[param("amplitude", 0.0, 1.0)],
        "add 1/f-amplitude Gaussian noise",
        brown_noise
    ),
    corruption!(
        "perlin_noise",
        &[param("amplitude", 0.0, 1.0)],
        "add standardized Perlin fBm",
        perlin_noise
    ),
    corruption!(
        "sparkles",
        &[param("count", 0.0, 200.0), param("size", 0.5, 32.0)],
        "screen-blend star-shaped glints",
        sparkles
    ),
    corruption!(
        "inverse_sparkles",
        &[param("count", 0.0, 200.0), param("size", 0.5, 32.0)],
        "multiply by inverted star-shaped glints",
        inverse_sparkles
    ),
    corruption!(
        "caustic_refraction",
        &[param("displacement", 0.0, 16.0), param("light", 0.0, 1.0)],
        "refract through a noise height field and add caustic highlights",
        caustic_refraction
    ),
    corruption!(
        "circular_motion_blur",
        &[param("angle", 0.0, 90.0)],
        "rotational blur about the centre (degrees)",
        circular_motion_blur
    ),
    corruption!(
        "lines",
        &[param("count", 0.0, 100.0), param("thickness", 0.25, 8.0)],
        "overlay straight lines of random colour",
        lines
    ),
    corruption!(
        "pinch_and_twirl",
        &[param("twirl", 0.0, 360.0), param("pinch", 0.0, 1.0)],
        "pinch and swirl inside a disk",
        pinch_and_twirl
    ),
    corruption!(
        "ripple",
        &[
            param("amplitude", 0.0, 16.0),
            param("wavelength", 1.0, 64.0)
        ],
        "sinusoidal displacement along both axes",
        ripple
    ),
    corruption!(
        "transverse_chromatic_aberration",
        &[param("shift", 0.0, 0.5)],
        "radially magnify red and shrink blue about the centre",
        transverse_chromatic_aberration
    ),
];

/// Indices of the `k` largest scores, ties broken by lower index.
pub(crate) fn top_k(scores: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    idx.truncate(k);
    idx
}

fn blue_noise_sample(img: &ImageBuffer, p: &Params, rng: &mut ChaCha8Rng) -> ImageBuffer {
    let n = img.pixel_count();
    let k = math::round(p.get("fraction") * n as f64) as usize;
    let field = blue_field(img.height(), img.width(), spatial_scale(img), rng);
    let mut mask = vec![false; n];
    for i in top_k(&field, k) {
        mask[i] = true;
    }
    map_pixels(img, |i, px| if mask[i] { [0.0; 3] } else { px })
}

fn plasma_noise(img: &ImageBuffer, p: &Params, rng: &mut ChaCha8Rng) -> ImageBuffer {
    let amount = p.get("amount");
    let plasma = plasma_field(img.height(), img.width(), 1.8, rng);
    map_pixels(img, |i, px| {
        let f = (1.0 - amount * plasma[i]) as f32;
        px.map(|v| v * f)
    })
}

/// Occlusion mask of exactly `round(fraction * n)` pixels: squares grown
/// from the centres of alternate cells of a randomly rotated grid.
pub(crate) fn checkerboard_mask(
    height: usize,
    width: usize,
    fraction: f64,
    scale: f64,
    rng: &mut ChaCha8Rng,
) -> (Vec<bool>, Vec<bool>) {
    let cell = rng.random_range(6.0..10.0) * scale;
    let angle = rng.random_range(0.0..math::PI / 2.0);
    let (oy, ox): (f64, f64) = (rng.random_range(0.0..cell), rng.random_range(0.0..cell));
    let (s, c) = (math::sin(angle), math::cos(angle));
    let n = height * width;
    let mut score = Vec::with_capacity(n);
    let mut white = Vec::with_capacity(n);
    for y in 0..height {
        for x in 0..width {
            let u = (c * x as f64 + s * y as f64 + ox) / cell;
            let v = (-s * x as f64 + c * y as f64 + oy) / cell;
            let (iu, iv) = (math::floor(u), math::floor(v));
            let du = (u - iu - 0.5).abs();
            let dv = (v - iv - 0.5).abs();
            let closeness = 1.0 - 2.0 * du.max(dv);
            let occluder = (iu as i64 + iv as i64).rem_euclid(2) == 0;
            score.push(if occluder {
                closeness
            } else {
                -2.0 + closeness
            });
            white.push((iu as i64).rem_euclid(2) == 0);
        }
    }
    let k = math::round(fraction * n as f64) as usize;
    let mut mask = vec![false; n];
    for i in top_k(&score, k.min(n)) {
        mask[i] = true;
    }
    (mask, white)
}

fn checkerboard(img: &ImageBuffer, p: &Params, rng: &mut ChaCha8Rng) -> ImageBuffer {
    let (mask, white) = checkerboard_mask(
        img.height(),
        img.width(),
        p.get("fraction"),
        spatial_scale(img),
        rng,
    );
    map_pixels(img, |i, px| {
        if mask[i] {
            if white[i] {
                [1.0; 3]
            } else {
                [0.0; 3]
            }
        } else {
            px
        }
    })
}

fn cocentric_sine_waves(img: &ImageBuffer, p: &Params, rng: &mut ChaCha8Rng) -> ImageBuffer {
    let s = spatial_scale(img);
    let (h, w) = img.dims();
    let cy = rng.random_range(0.0..h as f64);
    let cx = rng.random_range(0.0..w as f64);
    let wavelength = rng.random_range(4.0..8.0) * s;
    let phase = rng.random_range(0.0..2.0 * math::PI);
    let field: Vec<f64> = (0..h * w)
        .map(|i| {
            let r = math::hypot((i / w) as f64 - cy, (i % w) as f64 - cx);
            math::sin(2.0 * math::PI * r / wavelength + phase)
        })
        .collect();
    super::filter::add_field(img, &field, p.get("amplitude"))
}

fn single_frequency(img: &ImageBuffer, p: &Params, rng: &mut ChaCha8Rng) -> ImageBuffer {
    let s = spatial_scale(img);
    let (h, w) = img.dims();
    let angle = rng.random_range(0.0..math::PI);
    let wavelength = rng.random_range(3.0..10.0) * s;
    let phase = rng.random_range(0.0..2.0 * math::PI);
    let (sa, ca) = (math::sin(angle), math::cos(angle));
    let field: Vec<f64> = (0..h * w)
        .map(|i| {
            let proj = ca * (i % w) as f64 + sa * (i / w) as f64;
            math::sin(2.0 * math::PI * proj / wavelength + phase)
        })
        .collect();
    super::filter::add_field(img, &field, p.get("amplitude"))
}

fn brown_noise(img: &ImageBuffer, p: &Params, rng: &mut ChaCha8Rng) -> ImageBuffer {
    let field = spectral_field(img.height(), img.width(), 1.0, rng);
    super::filter::add_field(img, &field, p.get("amplitude"))
}

fn perlin_noise(img: &ImageBuffer, p: &Params, rng: &mut ChaCha8Rng) -> ImageBuffer {
    let mut field = perlin_field(
        img.height(),
        img.width(),
        8.0 * spatial_scale(img),
        4,
        0.5,
        rng,
    );
    standardize(&mut field);
    super::filter::add_field(img, &field, p.get("amplitude"))
}

/// Glint intensity in `[0, 1]`: a soft core plus four thin rays.
fn sparkle_field(img: &ImageBuffer, p: &Params, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let s = spatial_scale(img);
    let (h, w) = img.dims();
    let count = math::round(p.get("count") * s * s) as usize;
    let mut field = vec![0.0f64; h * w];
    for _ in 0..count {
        let cy = rng.random_range(0.0..h as f64);
        let cx = rng.random_range(0.0..w as f64);
        let radius = p.get("size") * s * rng.random_range(0.7..1.3);
        let rot = rng.random_range(0.0..math::PI / 4.0);
        let (sr, cr) = (math::sin(rot), math::cos(rot));
        let reach = math::ceil(radius) as isize;
        let (y0, x0) = (math::floor(cy) as isize, math::floor(cx) as isize);
        for y in (y0 - reach).max(0)..(y0 + reach + 1).min(h as isize) {
            for x in (x0 - reach).max(0)..(x0 + reach + 1).min(w as isize) {
                let dy = y as f64 - cy;
                let dx = x as f64 - cx;
                let d = math::hypot(dy, dx);
                if d > radius {
                    continue;
                }
                let core = math::exp(-(d * d) / (0.08 * radius * radius + 0.25));
                let u = cr * dx + sr * dy;
                let v = -sr * dx + cr * dy;
                let along = 1.0 - d / radius;
                let m = u.abs().min(v.abs());
                let ray = along * math::exp(-(m * m) / 0.35);
                let g = core.max(ray);
                let cell = &mut field[y as usize * w + x as usize];
                *cell = cell.max(g);
            }
        }
    }
    field
}

fn sparkles(img: &ImageBuffer, p: &Params, rng: &mut ChaCha8Rng) -> ImageBuffer {
    let field = sparkle_field(img, p, rng);
    map_pixels(img, |i, px| {
        let g = field[i] as f32;
        px.map(|v| v + g * (1.0 - v))
    })
}

fn inverse_sparkles(img: &ImageBuffer, p: &Params, rng: &mut ChaCha8Rng) -> ImageBuffer {
    let field = sparkle_field(img, p, rng);
    map_pixels(img, |i, px| {
        let g = field[i] as f32;
        px.map(|v| v * (1.0 - g))
    })
}

fn caustic_refraction(img: &ImageBuffer, p: &Params, rng: &mut ChaCha8Rng) -> ImageBuffer {
    let s = spatial_scale(img);
    let (h, w) = img.dims();
    let height_field = perlin_field(h, w, 6.0 * s, 3, 0.5, rng);
    let at = |y: isize, x: isize| {
        height_field[crate::image::reflect_index(y, h) * w + crate::image::reflect_index(x, w)]
    };
    let mut gy = vec![0.0; h * w];
    let mut gx = vec![0.0; h * w];
    let mut lap = vec![0.0; h * w];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let i = y as usize * w + x as usize;
            gy[i] = (at(y + 1, x) - at(y - 1, x)) / 2.0;
            gx[i] = (at(y, x + 1) - at(y, x - 1)) / 2.0;
            lap[i] = at(y + 1, x) + at(y - 1, x) + at(y, x + 1) + at(y, x - 1) - 4.0 * at(y, x);
        }
    }
    let gnorm = {
        let all: Vec<f64> = gy.iter().chain(&gx).copied().collect();
        let (_, sd) = math::mean_std(&all);
        if sd > 0.0 {
            1.0 / sd
        } else {
            0.0
        }
    };
    let disp = p.get("displacement") * s * gnorm;
    let warped = warp(img, |y, x| {
        let i = y as usize * w + x as usize;
        (y + disp * gy[i], x + disp * gx[i])
    });
    let mut caustic: Vec<f64> = lap.iter().map(|l| (-l).max(0.0)).collect();
    normalize_unit(&mut caustic);
    let light = p.get("light") as f32;
    map_pixels(&warped, |i, px| {
        let c = (caustic[i] * caustic[i]) as f32;
        px.map(|v| v + light * c)
    })
}

fn circular_motion_blur(img: &ImageBuffer, p: &Params, _: &mut ChaCha8Rng) -> ImageBuffer {
    let theta = p.get("angle") * math::PI / 180.0;
    let (h, w) = img.dims();
    let cy = (h as f64 - 1.0) / 2.0;
    let cx = (w as f64 - 1.0) / 2.0;
    let rmax = math::hypot(cy, cx);
    let taps = ((math::ceil(theta * rmax * 2.0) as usize) + 1).clamp(2, 96);
    let offsets: Vec<(f64, f64)> = (0..taps)
        .map(|i| {
            let a = theta * (i as f64 / (taps - 1) as f64 - 0.5);
            (math::sin(a), math::cos(a))
        })
        .collect();
    average_samples(img, taps, |i, y, x| {
        let (sa, ca) = offsets[i];
        let dy = y - cy;
        let dx = x - cx;
        (cy + sa * dx + ca * dy, cx + ca * dx - sa * dy)
    })
}

fn lines(img: &ImageBuffer, p: &Params, rng: &mut ChaCha8Rng) -> ImageBuffer {
    let s = spatial_scale(img);
    let (h, w) = img.dims();
    let count = math::round(p.get("count")) as usize;
    let half = p.get("thickness") * s / 2.0;
    let mut out = img.clone().into_data();
    for _ in 0..count {
        let y0 = rng.random_range(0.0..h as f64);
        let x0 = rng.random_range(0.0..w as f64);
        let angle = rng.random_range(0.0..math::PI);
        let color: [f32; 3] = if rng.random_bool(0.5) {
            [rng.random_range(0.0..0.2); 3]
        } else {
            [rng.random(), rng.random(), rng.random()]
        };
        let (ny, nx) = (math::cos(angle), -math::sin(angle));
        for y in 0..h {
            for x in 0..w {
                let d = ((y as f64 - y0) * ny + (x as f64 - x0) * nx).abs();
                let cover = (half + 0.5 - d).clamp(0.0, 1.0) as f32;
                if cover > 0.0 {
                    let i = (y * w + x) * CHANNELS;
                    for c in 0..CHANNELS {
                        out[i + c] = out[i + c] * (1.0 - cover) + color[c] * cover;
                    }
                }
            }
        }
    }
    ImageBuffer::from_unclamped(h, w, out)
}

fn pinch_and_twirl(img: &ImageBuffer, p: &Params, rng: &mut ChaCha8Rng) -> ImageBuffer {
    let (h, w) = img.dims();
    let short = h.min(w) as f64;
    let cy = (h as f64 - 1.0) / 2.0 + rng.random_range(-0.1..0.1) * short;
    let cx = (w as f64 - 1.0) / 2.0 + rng.random_range(-0.1..0.1) * short;
    let radius = rng.random_range(0.45..0.6) * short;
    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let twirl = sign * p.get("twirl") * math::PI / 180.0;
    let pinch = p.get("pinch");
    warp(img, |y, x| {
        let dy = y - cy;
        let dx = x - cx;
        let dist2 = dy * dy + dx * dx;
        if dist2 >= radius * radius || dist2 == 0.0 {
            return (y, x);
        }
        let d = math::sqrt(dist2) / radius;
        let t = math::powf(math::sin(math::PI * 0.5 * d), -pinch);
        let (dy, dx) = (dy * t, dx * t);
        let e = 1.0 - d;
        let a = twirl * e * e;
        let (sa, ca) = (math::sin(a), math::cos(a));
        (cy + sa * dx + ca * dy, cx + ca * dx - sa * dy)
    })
}

fn ripple(img: &ImageBuffer, p: &Params, rng: &mut ChaCha8Rng) -> ImageBuffer {
    let s = spatial_scale(img);
    let amp = p.get("amplitude") * s;
    let wl = p.get("wavelength") * s;
    let py = rng.random_range(0.0..2.0 * math::PI);
    let px = rng.random_range(0.0..2.0 * math::PI);
    warp(img, |y, x| {
        (
            y + amp * math::sin(2.0 * math::PI * x / wl + py),
            x + amp * math::sin(2.0 * math::PI * y / wl + px),
        )
    })
}

fn transverse_chromatic_aberration(
    img: &ImageBuffer,
    p: &Params,
    _: &mut ChaCha8Rng,
) -> ImageBuffer {
    let shift = p.get("shift");
    let (h, w) = img.dims();
    let cy = (h as f64 - 1.0) / 2.0;
    let cx = (w as f64 - 1.0) / 2.0;
    let mut out = Vec::with_capacity(h * w * CHANNELS);
    for y in 0..h {
        for x in 0..w {
            let (dy, dx) = (y as f64 - cy, x as f64 - cx);
            let r = img.sample_bilinear(cy + dy / (1.0 + shift), cx + dx / (1.0 + shift))[0];
            let g = img.get(y, x, 1);
            let b = img.sample_bilinear(cy + dy / (1.0 - shift), cx + dx / (1.0 - shift))[2];
            out.extend_from_slice(&[r, g, b]);
        }
    }
    ImageBuffer::from_unclamped(h, w, out)
}
