//! Per-severity parameter tables for every corruption.
//!
//! The built-in values are implementer-calibrated: the only requirement
//! they are tuned for is that mean per-value L1 distortion increases
//! strictly with severity for every corruption. The same table ships as
//! a text config file and may be overridden row by row.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

/// `corruption -> parameter -> values indexed by severity - 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeverityTable {
    rows: BTreeMap<String, BTreeMap<String, Vec<f64>>>,
}

impl Default for SeverityTable {
    fn default() -> Self {
        Self::builtin()
    }
}

const BUILTIN: &[(&str, &str, &[f64])] = &[
    // reference corruptions, severities 1..=5
    ("gaussian_noise", "sigma", &[0.04, 0.06, 0.08, 0.10, 0.12]),
    ("shot_noise", "photons", &[60.0, 25.0, 12.0, 6.0, 3.0]),
    ("impulse_noise", "amount", &[0.01, 0.02, 0.04, 0.06, 0.09]),
    ("defocus_blur", "radius", &[0.75, 1.25, 1.75, 2.25, 3.0]),
    ("motion_blur", "length", &[1.5, 2.5, 3.5, 5.0, 7.0]),
    ("zoom_blur", "zoom", &[1.06, 1.11, 1.16, 1.21, 1.26]),
    ("glass_blur", "sigma", &[0.5, 0.6, 0.7, 0.8, 1.0]),
    ("glass_blur", "delta", &[1.0, 1.0, 2.0, 2.0, 3.0]),
    ("glass_blur", "iterations", &[1.0, 2.0, 2.0, 3.0, 3.0]),
    ("brightness", "shift", &[0.1, 0.2, 0.3, 0.4, 0.5]),
    ("fog", "amount", &[0.3, 0.5, 0.75, 1.0, 1.5]),
    ("fog", "roughness", &[3.0, 2.75, 2.5, 2.25, 2.0]),
    ("frost", "image_weight", &[0.8, 0.7, 0.6, 0.5, 0.4]),
    ("frost", "frost_weight", &[0.2, 0.3, 0.4, 0.5, 0.6]),
    ("snow", "density", &[0.02, 0.04, 0.06, 0.08, 0.10]),
    ("snow", "length", &[2.0, 3.0, 4.0, 5.0, 6.0]),
    ("snow", "whiten", &[0.1, 0.2, 0.3, 0.4, 0.5]),
    ("contrast", "factor", &[0.75, 0.5, 0.4, 0.3, 0.15]),
    ("pixelate", "scale", &[0.9, 0.8, 0.7, 0.6, 0.5]),
    (
        "jpeg_compression",
        "quality",
        &[80.0, 65.0, 50.0, 35.0, 20.0],
    ),
    ("elastic_transform", "alpha", &[0.5, 0.9, 1.3, 1.7, 2.1]),
    ("elastic_transform", "sigma", &[3.0, 3.0, 3.0, 3.0, 3.0]),
    // dissimilar family, severities 1..=10
    (
        "blue_noise_sample",
        "fraction",
        &[0.005, 0.01, 0.015, 0.02, 0.03, 0.04, 0.05, 0.06, 0.08, 0.10],
    ),
    (
        "plasma_noise",
        "amount",
        &[0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.5, 0.6, 0.7],
    ),
    (
        "checkerboard",
        "fraction",
        &[0.03, 0.06, 0.09, 0.12, 0.15, 0.18, 0.21, 0.24, 0.27, 0.30],
    ),
    (
        "cocentric_sine_waves",
        "amplitude",
        &[0.03, 0.05, 0.07, 0.09, 0.11, 0.13, 0.16, 0.19, 0.22, 0.26],
    ),
    (
        "single_frequency",
        "amplitude",
        &[0.03, 0.05, 0.07, 0.09, 0.11, 0.13, 0.16, 0.19, 0.22, 0.26],
    ),
    (
        "brown_noise",
        "amplitude",
        &[0.02, 0.04, 0.06, 0.08, 0.10, 0.12, 0.14, 0.17, 0.20, 0.24],
    ),
    (
        "perlin_noise",
        "amplitude",
        &[0.02, 0.04, 0.06, 0.08, 0.10, 0.12, 0.14, 0.17, 0.20, 0.24],
    ),
    (
        "sparkles",
        "count",
        &[2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0, 12.0, 15.0, 18.0],
    ),
    (
        "sparkles",
        "size",
        &[3.0, 3.0, 3.5, 3.5, 4.0, 4.0, 4.5, 4.5, 5.0, 5.0],
    ),
    (
        "inverse_sparkles",
        "count",
        &[2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0, 12.0, 15.0, 18.0],
    ),
    (
        "inverse_sparkles",
        "size",
        &[3.0, 3.0, 3.5, 3.5, 4.0, 4.0, 4.5, 4.5, 5.0, 5.0],
    ),
    (
        "caustic_refraction",
        "displacement",
        &[0.3, 0.5, 0.7, 0.9, 1.1, 1.3, 1.6, 1.9, 2.2, 2.6],
    ),
    (
        "caustic_refraction",
        "light",
        &[0.02, 0.04, 0.06, 0.08, 0.10, 0.12, 0.15, 0.18, 0.21, 0.25],
    ),
    (
        "circular_motion_blur",
        "angle",
        &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0, 12.0, 15.0],
    ),
    (
        "lines",
        "count",
        &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 10.0, 12.0],
    ),
    (
        "lines",
        "thickness",
        &[1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0],
    ),
    (
        "pinch_and_twirl",
        "twirl",
        &[5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 36.0, 42.0, 50.0, 60.0],
    ),
    (
        "pinch_and_twirl",
        "pinch",
        &[0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5],
    ),
    (
        "ripple",
        "amplitude",
        &[0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.5, 1.8, 2.1, 2.5],
    ),
    (
        "ripple",
        "wavelength",
        &[8.0, 8.0, 8.0, 8.0, 8.0, 8.0, 8.0, 8.0, 8.0, 8.0],
    ),
    (
        "transverse_chromatic_aberration",
        "shift",
        &[
            0.005, 0.01, 0.015, 0.02, 0.025, 0.03, 0.035, 0.04, 0.045, 0.05,
        ],
    ),
];

impl SeverityTable {
    pub fn builtin() -> Self {
        let mut rows: BTreeMap<String, BTreeMap<String, Vec<f64>>> = BTreeMap::new();
        for (name, param, values) in BUILTIN {
            rows.entry(name.to_string())
                .or_default()
                .insert(param.to_string(), values.to_vec());
        }
        Self { rows }
    }

    pub fn empty() -> Self {
        Self {
            rows: BTreeMap::new(),
        }
    }

    pub fn row(&self, corruption: &str, param: &str) -> Option<&Vec<f64>> {
        self.rows.get(corruption)?.get(param)
    }

    pub fn value(&self, corruption: &str, param: &str, severity: u8) -> Option<f64> {
        let idx = usize::from(severity).checked_sub(1)?;
        self.row(corruption, param)?.get(idx).copied()
    }

    pub fn set_row(&mut self, corruption: &str, param: &str, values: Vec<f64>) {
        self.rows
            .entry(corruption.to_string())
            .or_default()
            .insert(param.to_string(), values);
    }

    /// `(corruption, parameter, values)` in sorted order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, &[f64])> {
        self.rows.iter().flat_map(|(c, ps)| {
            ps.iter()
                .map(move |(p, v)| (c.as_str(), p.as_str(), v.as_slice()))
        })
    }
}
