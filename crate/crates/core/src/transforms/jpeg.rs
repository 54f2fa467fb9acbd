//! In-memory baseline JPEG round trip.
//!
//! Reproduces every lossy stage of a baseline-sequential JFIF encoder and
//! decoder: 8-bit quantization, YCbCr conversion, 4:2:0 chroma
//! subsampling, 8×8 DCT, quantization with the Annex K tables scaled by
//! the IJG quality formula, dequantization, inverse DCT and replicated
//! chroma upsampling. Huffman coding is lossless and is not executed, so
//! the result equals decode(encode(img, quality)) for this codec.

use alloc::vec;
use alloc::vec::Vec;

use crate::image::{quantize_u8, ImageBuffer, CHANNELS};
use crate::math;

const LUMA_Q: [u16; 64] = [
    16, 11, 10, 16, 24, 40, 51, 61, 12, 12, 14, 19, 26, 58, 60, 55, 14, 13, 16, 24, 40, 57, 69, 56,
    14, 17, 22, 29, 51, 87, 80, 62, 18, 22, 37, 56, 68, 109, 103, 77, 24, 35, 55, 64, 81, 104, 113,
    92, 49, 64, 78, 87, 103, 121, 120, 101, 72, 92, 95, 98, 112, 100, 103, 99,
];

const CHROMA_Q: [u16; 64] = [
    17, 18, 24, 47, 99, 99, 99, 99, 18, 21, 26, 66, 99, 99, 99, 99, 24, 26, 56, 99, 99, 99, 99, 99,
    47, 66, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99,
];

/// Quality-scaled quantization table (IJG convention, quality 1..=100).
pub fn scaled_table(base: &[u16; 64], quality: u8) -> [u16; 64] {
    let q = u32::from(quality.clamp(1, 100));
    let scale = if q < 50 { 5000 / q } else { 200 - 2 * q };
    let mut out = [0u16; 64];
    for (o, &b) in out.iter_mut().zip(base) {
        *o = ((u32::from(b) * scale + 50) / 100).clamp(1, 255) as u16;
    }
    out
}

struct Dct {
    // cos((2x+1)uπ/16) * c(u) / 2
    basis: [[f64; 8]; 8],
}

impl Dct {
    fn new() -> Self {
        let mut basis = [[0.0; 8]; 8];
        for (u, row) in basis.iter_mut().enumerate() {
            let cu = if u == 0 { 1.0 / math::sqrt(2.0) } else { 1.0 };
            for (x, b) in row.iter_mut().enumerate() {
                *b = 0.5 * cu * math::cos((2 * x + 1) as f64 * u as f64 * math::PI / 16.0);
            }
        }
        Self { basis }
    }

    fn forward(&self, block: &[f64; 64]) -> [f64; 64] {
        let mut tmp = [0.0; 64];
        for y in 0..8 {
            for u in 0..8 {
                tmp[y * 8 + u] = (0..8).map(|x| self.basis[u][x] * block[y * 8 + x]).sum();
            }
        }
        let mut out = [0.0; 64];
        for v in 0..8 {
            for u in 0..8 {
                out[v * 8 + u] = (0..8).map(|y| self.basis[v][y] * tmp[y * 8 + u]).sum();
            }
        }
        out
    }

    fn inverse(&self, coef: &[f64; 64]) -> [f64; 64] {
        let mut tmp = [0.0; 64];
        for v in 0..8 {
            for x in 0..8 {
                tmp[v * 8 + x] = (0..8).map(|u| self.basis[u][x] * coef[v * 8 + u]).sum();
            }
        }
        let mut out = [0.0; 64];
        for y in 0..8 {
            for x in 0..8 {
                out[y * 8 + x] = (0..8).map(|v| self.basis[v][y] * tmp[v * 8 + x]).sum();
            }
        }
        out
    }
}

/// Encodes and decodes one plane (values in 0..=255) through the DCT and
/// quantizer; returns decoded samples rounded and clamped to 0..=255.
fn code_plane(plane: &[f64], h: usize, w: usize, table: &[u16; 64], dct: &Dct) -> Vec<f64> {
    let bh = h.div_ceil(8);
    let bw = w.div_ceil(8);
    let mut out = vec![0.0; h * w];
    for by in 0..bh {
        for bx in 0..bw {
            let mut block = [0.0; 64];
            for y in 0..8 {
                for x in 0..8 {
                    let yy = (by * 8 + y).min(h - 1);
                    let xx = (bx * 8 + x).min(w - 1);
                    block[y * 8 + x] = plane[yy * w + xx] - 128.0;
                }
            }
            let mut coef = dct.forward(&block);
            for (c, &q) in coef.iter_mut().zip(table) {
                let q = f64::from(q);
                *c = math::round(*c / q) * q;
            }
            let rec = dct.inverse(&coef);
            for y in 0..8 {
                for x in 0..8 {
                    let yy = by * 8 + y;
                    let xx = bx * 8 + x;
                    if yy < h && xx < w {
                        out[yy * w + xx] = math::round(rec[y * 8 + x] + 128.0).clamp(0.0, 255.0);
                    }
                }
            }
        }
    }
    out
}

/// Round trip `img` through baseline JPEG at `quality`.
pub fn jpeg_round_trip(img: &ImageBuffer, quality: u8) -> ImageBuffer {
    let (h, w) = img.dims();
    if h == 0 || w == 0 {
        return img.clone();
    }
    let bytes = img.to_rgb8();
    let n = h * w;
    let mut yp = vec![0.0; n];
    let mut cb = vec![0.0; n];
    let mut cr = vec![0.0; n];
    for i in 0..n {
        let r = f64::from(bytes[i * 3]);
        let g = f64::from(bytes[i * 3 + 1]);
        let b = f64::from(bytes[i * 3 + 2]);
        yp[i] = 0.299 * r + 0.587 * g + 0.114 * b;
        cb[i] = -0.168_736 * r - 0.331_264 * g + 0.5 * b + 128.0;
        cr[i] = 0.5 * r - 0.418_688 * g - 0.081_312 * b + 128.0;
    }
    let ch = h.div_ceil(2);
    let cw = w.div_ceil(2);
    let down = |p: &[f64]| {
        let mut out = vec![0.0; ch * cw];
        for y in 0..ch {
            for x in 0..cw {
                let mut s = 0.0;
                for dy in 0..2 {
                    for dx in 0..2 {
                        let yy = (2 * y + dy).min(h - 1);
                        let xx = (2 * x + dx).min(w - 1);
                        s += p[yy * w + xx];
                    }
                }
                out[y * cw + x] = s / 4.0;
            }
        }
        out
    };
    let dct = Dct::new();
    let lq = scaled_table(&LUMA_Q, quality);
    let cq = scaled_table(&CHROMA_Q, quality);
    let y_dec = code_plane(&yp, h, w, &lq, &dct);
    let cb_dec = code_plane(&down(&cb), ch, cw, &cq, &dct);
    let cr_dec = code_plane(&down(&cr), ch, cw, &cq, &dct);
    let mut out = Vec::with_capacity(n * CHANNELS);
    for yy in 0..h {
        for xx in 0..w {
            let l = y_dec[yy * w + xx];
            let b = cb_dec[(yy / 2) * cw + xx / 2] - 128.0;
            let r = cr_dec[(yy / 2) * cw + xx / 2] - 128.0;
            let rgb = [
                l + 1.402 * r,
                l - 0.344_136 * b - 0.714_136 * r,
                l + 1.772 * b,
            ];
            for v in rgb {
                let q = math::round(v).clamp(0.0, 255.0);
                out.push((q / 255.0) as f32);
            }
        }
    }
    ImageBuffer::from_unclamped(h, w, out)
}

/// Sanity helper for tests: every output value is an 8-bit level.
pub fn is_8bit(img: &ImageBuffer) -> bool {
    img.data()
        .iter()
        .all(|&v| f32::from(quantize_u8(v)) / 255.0 == v)
}
