//! Augmentation schemes built by chaining base ops and convexly mixing the
//! chains (AugMix-style), plus the 2⁹ powerset of base-op subsets.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma};

use super::{Registry, Transform, TransformSpec};
use crate::error::{Error, Result};
use crate::image::ImageBuffer;
use crate::rng::Seed;

/// Base augmentations in canonical order; bit `i` of a powerset index
/// selects `BASE_OPS[i]`.
pub const BASE_OPS: [&str; 9] = [
    "autocontrast",
    "equalize",
    "posterize",
    "rotate",
    "solarize",
    "shear_x",
    "shear_y",
    "translate_x",
    "translate_y",
];

#[derive(Clone, Debug, PartialEq)]
pub struct AugmentationScheme {
    /// Subset of [`BASE_OPS`], kept in canonical order.
    pub base_ops: Vec<String>,
    /// Number of parallel branches.
    pub width: usize,
    /// Chain length is drawn uniformly from `1..=depth`.
    pub depth: usize,
    /// Symmetric Dirichlet concentration for branch weights.
    pub mix_concentration: f64,
    /// Beta parameters for the blend weight of the mixed branches.
    pub skip_blend: (f64, f64),
    /// Op levels are drawn uniformly from `[0.1, aug_severity]`.
    pub aug_severity: f64,
}

impl Default for AugmentationScheme {
    fn default() -> Self {
        Self {
            base_ops: Vec::new(),
            width: 3,
            depth: 3,
            mix_concentration: 1.0,
            skip_blend: (1.0, 1.0),
            aug_severity: 3.0,
        }
    }
}

impl AugmentationScheme {
    pub fn with_ops(ops: &[&str]) -> Result<Self> {
        let mut s = Self::default();
        for op in BASE_OPS {
            if ops.contains(&op) {
                s.base_ops.push(op.to_string());
            }
        }
        if let Some(bad) = ops.iter().find(|o| !BASE_OPS.contains(o)) {
            return Err(Error::UnknownTransform(bad.to_string()));
        }
        Ok(s)
    }

    /// Scheme for powerset index `index` (`0..512`).
    pub fn from_powerset_index(index: usize) -> Self {
        let mut s = Self::default();
        for (bit, op) in BASE_OPS.iter().enumerate() {
            if index & (1 << bit) != 0 {
                s.base_ops.push(op.to_string());
            }
        }
        s
    }

    pub fn powerset_index(&self) -> Option<usize> {
        let mut idx = 0;
        for op in &self.base_ops {
            idx |= 1 << BASE_OPS.iter().position(|b| b == op)?;
        }
        Some(idx)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(bad) = self
            .base_ops
            .iter()
            .find(|o| !BASE_OPS.contains(&o.as_str()))
        {
            return Err(Error::UnknownTransform(bad.clone()));
        }
        if self.width == 0 || self.depth == 0 {
            return Err(Error::Domain(
                "scheme width and depth must be at least 1".into(),
            ));
        }
        if !(self.mix_concentration > 0.0 && self.skip_blend.0 > 0.0 && self.skip_blend.1 > 0.0) {
            return Err(Error::Domain(
                "Dirichlet and Beta parameters must be positive".into(),
            ));
        }
        if !(self.aug_severity >= 0.1 && self.aug_severity <= 10.0) {
            return Err(Error::Domain("aug_severity must lie in [0.1, 10]".into()));
        }
        Ok(())
    }
}

/// All 512 schemes, index `i` holding the ops selected by the bits of `i`.
pub fn enumerate_powerset() -> Vec<AugmentationScheme> {
    (0..1usize << BASE_OPS.len())
        .map(AugmentationScheme::from_powerset_index)
        .collect()
}

/// One draw from a scheme: `skip * x + (1 - skip) * Σ wᵢ chainᵢ(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledAugmentation {
    pub branches: Vec<Vec<TransformSpec>>,
    pub weights: Vec<f64>,
    pub skip_weight: f64,
}

impl SampledAugmentation {
    pub fn identity() -> Self {
        Self {
            branches: Vec::new(),
            weights: Vec::new(),
            skip_weight: 1.0,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.branches.is_empty() || self.skip_weight == 1.0
    }
}

impl Transform for SampledAugmentation {
    fn apply(&self, registry: &Registry, img: &ImageBuffer) -> Result<ImageBuffer> {
        if self.branches.is_empty() {
            return Ok(img.clone());
        }
        let mut outputs = Vec::with_capacity(self.branches.len() + 1);
        let mut weights = Vec::with_capacity(self.branches.len() + 1);
        outputs.push(img.clone());
        weights.push(self.skip_weight);
        for (chain, w) in self.branches.iter().zip(&self.weights) {
            let mut cur = img.clone();
            for spec in chain {
                cur = registry.apply(spec, &cur)?;
            }
            outputs.push(cur);
            weights.push((1.0 - self.skip_weight) * w);
        }
        let refs: Vec<&ImageBuffer> = outputs.iter().collect();
        Ok(mix(&refs, &weights))
    }

    fn label(&self) -> String {
        let chains: Vec<String> = self
            .branches
            .iter()
            .map(|c| {
                c.iter()
                    .map(|s| s.name.as_str())
                    .collect::<Vec<_>>()
                    .join(">")
            })
            .collect();
        format!("mix[{}]", chains.join("|"))
    }
}

/// Unclamped weighted sum of same-sized images, accumulated in `f64` in
/// argument order.
pub fn mix_unclamped(images: &[&ImageBuffer], weights: &[f64]) -> Vec<f64> {
    assert_eq!(images.len(), weights.len());
    assert!(!images.is_empty());
    let n = images[0].data().len();
    let mut acc = vec![0.0f64; n];
    for (img, &w) in images.iter().zip(weights) {
        assert_eq!(img.data().len(), n);
        for (a, &v) in acc.iter_mut().zip(img.data()) {
            *a += w * f64::from(v);
        }
    }
    acc
}

/// [`mix_unclamped`] rounded to `f32` and clamped into `[0, 1]`.
pub fn mix(images: &[&ImageBuffer], weights: &[f64]) -> ImageBuffer {
    let acc = mix_unclamped(images, weights);
    let (h, w) = images[0].dims();
    ImageBuffer::from_unclamped(h, w, acc.into_iter().map(|v| v as f32).collect())
}

/// Draws one composite augmentation from `scheme`; pure in `(scheme, seed)`.
pub fn sample_augmentation(scheme: &AugmentationScheme, seed: Seed) -> Result<SampledAugmentation> {
    scheme.validate()?;
    if scheme.base_ops.is_empty() {
        return Ok(SampledAugmentation::identity());
    }
    let mut rng = seed.stream("augmentation", 0);
    let gamma =
        Gamma::new(scheme.mix_concentration, 1.0).map_err(|e| Error::Domain(format!("{e}")))?;
    let mut weights: Vec<f64> = (0..scheme.width).map(|_| gamma.sample(&mut rng)).collect();
    let total: f64 = weights.iter().sum();
    if total > 0.0 {
        weights.iter_mut().for_each(|w| *w /= total);
    } else {
        let n = weights.len() as f64;
        weights.iter_mut().for_each(|w| *w = 1.0 / n);
    }
    let beta = Beta::new(scheme.skip_blend.0, scheme.skip_blend.1)
        .map_err(|e| Error::Domain(format!("{e}")))?;
    let m: f64 = beta.sample(&mut rng);
    let mut branches = Vec::with_capacity(scheme.width);
    for b in 0..scheme.width {
        let d = rng.random_range(1..=scheme.depth);
        let mut chain = Vec::with_capacity(d);
        for k in 0..d {
            let op = &scheme.base_ops[rng.random_range(0..scheme.base_ops.len())];
            let level: f64 = rng.random_range(0.1..=scheme.aug_severity);
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let mut spec = TransformSpec::augmentation(op, seed.derive("op", (b * 16 + k) as u64));
            let entry = super::lookup(op).expect("base op registered");
            if entry.param_def("level").is_some() {
                spec = spec.with_param("level", level);
            }
            if entry.param_def("sign").is_some() {
                spec = spec.with_param("sign", sign);
            }
            chain.push(spec);
        }
        branches.push(chain);
    }
    Ok(SampledAugmentation {
        branches,
        weights,
        skip_weight: 1.0 - m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::synthetic_image;

    #[test]
    fn powerset_shape() {
        let all = enumerate_powerset();
        assert_eq!(all.len(), 512);
        assert!(all[0].base_ops.is_empty());
        for op in BASE_OPS {
            assert_eq!(
                all.iter()
                    .filter(|s| s.base_ops.iter().any(|o| o == op))
                    .count(),
                256
            );
        }
        for (i, s) in all.iter().enumerate() {
            assert_eq!(s.powerset_index(), Some(i));
        }
    }

    #[test]
    fn empty_scheme_is_identity() {
        let aug = sample_augmentation(&AugmentationScheme::default(), Seed(3)).unwrap();
        assert_eq!(aug.skip_weight, 1.0);
        assert!(aug.branches.is_empty());
        let img = synthetic_image(8, 8, Seed(1));
        assert_eq!(aug.apply(&Registry::default(), &img).unwrap(), img);
    }

    #[test]
    fn single_op_single_branch() {
        let mut scheme = AugmentationScheme::with_ops(&["rotate"]).unwrap();
        scheme.width = 1;
        scheme.depth = 1;
        let aug = sample_augmentation(&scheme, Seed(9)).unwrap();
        assert_eq!(aug.branches.len(), 1);
        assert_eq!(aug.branches[0].len(), 1);
        assert_eq!(aug.branches[0][0].name, "rotate");
        assert_eq!(aug.weights, vec![1.0]);
    }

    #[test]
    fn sampling_is_pure_and_uses_only_scheme_ops() {
        let scheme = AugmentationScheme::with_ops(&["solarize", "shear_y"]).unwrap();
        for s in 0..50 {
            let a = sample_augmentation(&scheme, Seed(s)).unwrap();
            assert_eq!(a, sample_augmentation(&scheme, Seed(s)).unwrap());
            let wsum: f64 = a.weights.iter().sum();
            assert!((wsum - 1.0).abs() < 1e-12);
            assert!(a.weights.iter().all(|&w| w >= 0.0));
            assert!((0.0..=1.0).contains(&a.skip_weight));
            for chain in &a.branches {
                assert!((1..=3).contains(&chain.len()));
                assert!(chain
                    .iter()
                    .all(|t| t.name == "solarize" || t.name == "shear_y"));
            }
        }
    }

    #[test]
    fn op_frequency_in_two_op_scheme() {
        // Each step picks one of two ops uniformly; chain length is uniform
        // in 1..=3, so P(op in chain) = (1/2 + 3/4 + 7/8) / 3 ≈ 0.708.
        let scheme = AugmentationScheme::with_ops(&["equalize", "translate_x"]).unwrap();
        let mut chains = 0usize;
        let mut hits = [0usize; 2];
        for s in 0..10_000u64 {
            let a = sample_augmentation(&scheme, Seed(s)).unwrap();
            for chain in &a.branches {
                chains += 1;
                for (i, op) in ["equalize", "translate_x"].iter().enumerate() {
                    if chain.iter().any(|t| t.name == *op) {
                        hits[i] += 1;
                    }
                }
            }
        }
        for h in hits {
            let f = h as f64 / chains as f64;
            assert!(f >= 0.45, "{f}");
            assert!((f - 0.7083).abs() < 0.02, "{f}");
        }
    }

    #[test]
    fn scheme_validation() {
        assert!(AugmentationScheme::with_ops(&["blur"]).is_err());
        let mut s = AugmentationScheme::with_ops(&["rotate"]).unwrap();
        s.width = 0;
        assert!(sample_augmentation(&s, Seed(0)).is_err());
    }
}
