//! Separable 2-D discrete Fourier transform on small real grids.
//!
//! Radix-2 FFT for power-of-two lengths, direct O(n²) otherwise; images
//! here are at most a few hundred pixels on a side.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    pub const ZERO: Complex = Complex { re: 0.0, im: 0.0 };
    pub fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }
    pub fn norm_sqr(self) -> f64 {
        self.re * self.re + self.im * self.im
    }
    #[inline]
    fn mul(self, o: Complex) -> Complex {
        Complex::new(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )
    }
}

fn twiddles(n: usize, inverse: bool) -> Vec<Complex> {
    let sign = if inverse { 1.0 } else { -1.0 };
    (0..n)
        .map(|k| {
            let a = sign * 2.0 * math::PI * k as f64 / n as f64;
            Complex::new(math::cos(a), math::sin(a))
        })
        .collect()
}

fn dft_1d(input: &[Complex], out: &mut [Complex], tw: &[Complex]) {
    let n = input.len();
    if n.is_power_of_two() {
        return fft_1d(input, out, tw);
    }
    for (k, o) in out.iter_mut().enumerate() {
        let mut acc = Complex::ZERO;
        let mut idx = 0usize;
        for x in input {
            let t = x.mul(tw[idx]);
            acc.re += t.re;
            acc.im += t.im;
            idx += k;
            if idx >= n {
                idx -= n;
            }
        }
        *o = acc;
    }
}

fn fft_1d(input: &[Complex], out: &mut [Complex], tw: &[Complex]) {
    let n = input.len();
    let bits = n.trailing_zeros();
    for (i, &x) in input.iter().enumerate() {
        let j = if bits == 0 {
            0
        } else {
            i.reverse_bits() >> (usize::BITS - bits)
        };
        out[j] = x;
    }
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let step = n / len;
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let t = out[start + k + half].mul(tw[k * step]);
                let u = out[start + k];
                out[start + k] = Complex::new(u.re + t.re, u.im + t.im);
                out[start + k + half] = Complex::new(u.re - t.re, u.im - t.im);
            }
        }
        len *= 2;
    }
}

/// Unnormalized 2-D DFT of a row-major `height × width` grid. The inverse
/// transform divides by `height * width`.
pub fn dft_2d(grid: &[Complex], height: usize, width: usize, inverse: bool) -> Vec<Complex> {
    assert_eq!(grid.len(), height * width);
    let mut rows = vec![Complex::ZERO; height * width];
    let tw_w = twiddles(width, inverse);
    for y in 0..height {
        dft_1d(
            &grid[y * width..(y + 1) * width],
            &mut rows[y * width..(y + 1) * width],
            &tw_w,
        );
    }
    let tw_h = twiddles(height, inverse);
    let mut col = vec![Complex::ZERO; height];
    let mut col_out = vec![Complex::ZERO; height];
    let mut out = vec![Complex::ZERO; height * width];
    for x in 0..width {
        for y in 0..height {
            col[y] = rows[y * width + x];
        }
        dft_1d(&col, &mut col_out, &tw_h);
        for y in 0..height {
            out[y * width + x] = col_out[y];
        }
    }
    if inverse {
        let s = 1.0 / (height * width) as f64;
        for v in &mut out {
            v.re *= s;
            v.im *= s;
        }
    }
    out
}

/// Forward DFT of a real grid. Only columns `0..=width/2` are transformed;
/// the rest follow from conjugate symmetry.
pub fn real_dft_2d(values: &[f64], height: usize, width: usize) -> Vec<Complex> {
    assert_eq!(values.len(), height * width);
    let half = width / 2 + 1;
    let tw_w = twiddles(width, false);
    let mut row_in = vec![Complex::ZERO; width];
    let mut row_out = vec![Complex::ZERO; width];
    let mut rows = vec![Complex::ZERO; height * half];
    for y in 0..height {
        for (c, &v) in row_in.iter_mut().zip(&values[y * width..(y + 1) * width]) {
            *c = Complex::new(v, 0.0);
        }
        dft_1d(&row_in, &mut row_out, &tw_w);
        rows[y * half..(y + 1) * half].copy_from_slice(&row_out[..half]);
    }
    let tw_h = twiddles(height, false);
    let mut col = vec![Complex::ZERO; height];
    let mut col_out = vec![Complex::ZERO; height];
    let mut out = vec![Complex::ZERO; height * width];
    for x in 0..half {
        for y in 0..height {
            col[y] = rows[y * half + x];
        }
        dft_1d(&col, &mut col_out, &tw_h);
        for y in 0..height {
            out[y * width + x] = col_out[y];
        }
    }
    for x in half..width {
        for y in 0..height {
            let c = out[((height - y) % height) * width + (width - x)];
            out[y * width + x] = Complex::new(c.re, -c.im);
        }
    }
    out
}

/// Signed frequency (cycles per pixel) of DFT bin `k` for length `n`.
pub fn frequency(k: usize, n: usize) -> f64 {
    let k = k as f64;
    let n = n as f64;
    if k <= n / 2.0 {
        k / n
    } else {
        (k - n) / n
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_recovers_input() {
        let (h, w) = (5, 7);
        let vals: Vec<f64> = (0..h * w)
            .map(|i| math::sin(i as f64 * 0.37) + 0.1 * i as f64)
            .collect();
        let f = real_dft_2d(&vals, h, w);
        let back = dft_2d(&f, h, w, true);
        for (a, b) in vals.iter().zip(&back) {
            assert!((a - b.re).abs() < 1e-12);
            assert!(b.im.abs() < 1e-12);
        }
    }

    #[test]
    fn fast_paths_match_direct_sum() {
        for (h, w) in [(8, 16), (6, 5), (1, 4), (4, 1), (7, 8)] {
            let vals: Vec<f64> = (0..h * w)
                .map(|i| math::sin(i as f64 * 0.91) + 0.05 * (i % 3) as f64)
                .collect();
            let f = real_dft_2d(&vals, h, w);
            for ky in 0..h {
                for kx in 0..w {
                    let mut acc = Complex::ZERO;
                    for y in 0..h {
                        for x in 0..w {
                            let a = -2.0
                                * math::PI
                                * ((ky * y) as f64 / h as f64 + (kx * x) as f64 / w as f64);
                            acc.re += vals[y * w + x] * math::cos(a);
                            acc.im += vals[y * w + x] * math::sin(a);
                        }
                    }
                    let got = f[ky * w + kx];
                    assert!((got.re - acc.re).abs() < 1e-9 && (got.im - acc.im).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn single_tone_lands_in_one_bin() {
        let (h, w) = (8, 8);
        let vals: Vec<f64> = (0..h * w)
            .map(|i| math::cos(2.0 * math::PI * 2.0 * (i % w) as f64 / w as f64))
            .collect();
        let f = real_dft_2d(&vals, h, w);
        let total: f64 = f.iter().map(|c| c.norm_sqr()).sum();
        let peak = f[2].norm_sqr() + f[w - 2].norm_sqr();
        assert!((peak / total - 1.0).abs() < 1e-12);
        assert_eq!(frequency(2, 8), 0.25);
        assert_eq!(frequency(6, 8), -0.25);
    }
}
