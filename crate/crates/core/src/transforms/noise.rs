//! Procedural noise fields on `height × width` grids.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dft::{dft_2d, frequency, Complex};
use crate::math;
use crate::rng::ChaCha8Rng;

/// Classic gradient noise with a seeded permutation table.
pub struct Perlin {
    perm: [u8; 512],
}

impl Perlin {
    pub fn new(rng: &mut ChaCha8Rng) -> Self {
        let mut p: Vec<u8> = (0..=255u8).collect();
        p.shuffle(rng);
        let mut perm = [0u8; 512];
        for i in 0..512 {
            perm[i] = p[i & 255];
        }
        Self { perm }
    }

    fn grad(hash: u8, x: f64, y: f64) -> f64 {
        match hash & 7 {
            0 => x + y,
            1 => -x + y,
            2 => x - y,
            3 => -x - y,
            4 => x,
            5 => -x,
            6 => y,
            _ => -y,
        }
    }

    /// Noise value in roughly `[-1, 1]`.
    pub fn noise(&self, x: f64, y: f64) -> f64 {
        let xf = math::floor(x);
        let yf = math::floor(y);
        let xi = (xf as i64 & 255) as usize;
        let yi = (yf as i64 & 255) as usize;
        let x = x - xf;
        let y = y - yf;
        let fade = |t: f64| t * t * t * (t * (t * 6.0 - 15.0) + 10.0);
        let u = fade(x);
        let v = fade(y);
        let p = &self.perm;
        let aa = p[p[xi] as usize + yi];
        let ab = p[p[xi] as usize + yi + 1];
        let ba = p[p[xi + 1] as usize + yi];
        let bb = p[p[xi + 1] as usize + yi + 1];
        let lerp = |a: f64, b: f64, t: f64| a + t * (b - a);
        lerp(
            lerp(Self::grad(aa, x, y), Self::grad(ba, x - 1.0, y), u),
            lerp(
                Self::grad(ab, x, y - 1.0),
                Self::grad(bb, x - 1.0, y - 1.0),
                u,
            ),
            v,
        )
    }

    /// Fractal sum of `octaves` layers, base period `scale` pixels.
    pub fn fbm(&self, x: f64, y: f64, scale: f64, octaves: usize, persistence: f64) -> f64 {
        let mut amp = 1.0;
        let mut freq = 1.0 / scale;
        let mut sum = 0.0;
        let mut norm = 0.0;
        for _ in 0..octaves {
            sum += amp * self.noise(x * freq, y * freq);
            norm += amp;
            amp *= persistence;
            freq *= 2.0;
        }
        sum / norm
    }
}

/// Fractal Brownian field from Perlin noise, sampled on the pixel grid.
pub fn perlin_field(
    height: usize,
    width: usize,
    scale: f64,
    octaves: usize,
    persistence: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    let p = Perlin::new(rng);
    let ox: f64 = rng.random_range(0.0..256.0);
    let oy: f64 = rng.random_range(0.0..256.0);
    let mut out = Vec::with_capacity(height * width);
    for y in 0..height {
        for x in 0..width {
            out.push(p.fbm(x as f64 + ox, y as f64 + oy, scale, octaves, persistence));
        }
    }
    out
}

/// Diamond-square plasma fractal in `[0, 1]`, cropped from the next
/// power-of-two square. `roughness` is the per-level amplitude decay
/// divisor (larger is smoother).
pub fn plasma_field(height: usize, width: usize, roughness: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let size = height.max(width).max(2).next_power_of_two();
    let n = size + 1;
    let mut g = vec![0.0f64; n * n];
    let idx = |y: usize, x: usize| y * n + x;
    let mut amp = 1.0;
    let mut step = size;
    while step >= 2 {
        let half = step / 2;
        // square step
        for y in (0..size).step_by(step) {
            for x in (0..size).step_by(step) {
                let avg = (g[idx(y, x)]
                    + g[idx(y, x + step)]
                    + g[idx(y + step, x)]
                    + g[idx(y + step, x + step)])
                    / 4.0;
                g[idx(y + half, x + half)] = avg + amp * rng.random_range(-1.0..1.0);
            }
        }
        // diamond step
        for y in (0..=size).step_by(half) {
            let start = if (y / half).is_multiple_of(2) {
                half
            } else {
                0
            };
            for x in (start..=size).step_by(step) {
                let mut sum = 0.0;
                let mut cnt = 0.0;
                if y >= half {
                    sum += g[idx(y - half, x)];
                    cnt += 1.0;
                }
                if y + half <= size {
                    sum += g[idx(y + half, x)];
                    cnt += 1.0;
                }
                if x >= half {
                    sum += g[idx(y, x - half)];
                    cnt += 1.0;
                }
                if x + half <= size {
                    sum += g[idx(y, x + half)];
                    cnt += 1.0;
                }
                g[idx(y, x)] = sum / cnt + amp * rng.random_range(-1.0..1.0);
            }
        }
        amp /= roughness;
        step = half;
    }
    let mut out = Vec::with_capacity(height * width);
    for y in 0..height {
        for x in 0..width {
            out.push(g[idx(y, x)]);
        }
    }
    crate::transforms::filter::normalize_unit(&mut out);
    out
}

/// Gaussian noise shaped to a `1 / f^exponent` amplitude spectrum,
/// standardized to zero mean and unit variance. `exponent = 1` gives
/// brown (amplitude ∝ 1/f, power ∝ 1/f²) noise.
pub fn spectral_field(
    height: usize,
    width: usize,
    exponent: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    let mut spec = Vec::with_capacity(height * width);
    for ky in 0..height {
        for kx in 0..width {
            let fy = frequency(ky, height);
            let fx = frequency(kx, width);
            let f = math::sqrt(fx * fx + fy * fy);
            let a: f64 = StandardNormal.sample(rng);
            let b: f64 = StandardNormal.sample(rng);
            let scale = if f == 0.0 {
                0.0
            } else {
                math::powf(f, -exponent)
            };
            spec.push(Complex::new(a * scale, b * scale));
        }
    }
    let grid = dft_2d(&spec, height, width, true);
    let mut out: Vec<f64> = grid.iter().map(|c| c.re).collect();
    crate::transforms::filter::standardize(&mut out);
    out
}

/// White Gaussian noise minus its Gaussian-blurred copy: a high-pass
/// ("blue") field, standardized.
pub fn blue_field(height: usize, width: usize, sigma: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let white: Vec<f64> = (0..height * width)
        .map(|_| StandardNormal.sample(rng))
        .collect();
    let low = crate::transforms::filter::blur_plane(&white, height, width, sigma);
    let mut out: Vec<f64> = white.iter().zip(&low).map(|(w, l)| w - l).collect();
    crate::transforms::filter::standardize(&mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Seed;

    #[test]
    fn plasma_is_unit_range_and_seeded() {
        let a = plasma_field(20, 30, 2.0, &mut Seed(1).rng());
        let b = plasma_field(20, 30, 2.0, &mut Seed(1).rng());
        assert_eq!(a, b);
        assert_eq!(a.len(), 600);
        assert!(a.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn spectral_field_is_standardized() {
        let f = spectral_field(16, 24, 1.0, &mut Seed(3).rng());
        let (m, s) = math::mean_std(&f);
        assert!(m.abs() < 1e-9);
        assert!((s - 1.0).abs() < 1e-9);
    }

    #[test]
    fn brown_noise_is_smoother_than_blue() {
        let brown = spectral_field(32, 32, 1.0, &mut Seed(4).rng());
        let blue = blue_field(32, 32, 1.5, &mut Seed(4).rng());
        let roughness =
            |f: &[f64]| f.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>() / f.len() as f64;
        assert!(roughness(&brown) < roughness(&blue));
    }

    #[test]
    fn perlin_is_zero_on_lattice() {
        let p = Perlin::new(&mut Seed(9).rng());
        assert_eq!(p.noise(3.0, 7.0), 0.0);
        let v = p.noise(3.3, 7.6);
        assert!(v.abs() <= 1.0);
    }
}
