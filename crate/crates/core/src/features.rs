//! Image embeddings and the transform feature
//! `f(t) = mean over x in the subset of [f̂(t(x)) − f̂(x)]`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::dft;
use crate::error::{Error, Result};
use crate::image::{ImageBuffer, ImageSubset};
use crate::math;
use crate::rng::{fnv1a, Seed};
use crate::transforms::{Registry, Transform, TransformSpec};

/// A dense embedding. Stored as `f32`; arithmetic on features runs in `f64`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FeatureVector(pub Vec<f32>);

impl FeatureVector {
    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// Euclidean distance, accumulated in `f64` in index order.
    pub fn distance(&self, other: &FeatureVector) -> f64 {
        math::sqrt(self.distance_sqr(other))
    }

    pub fn distance_sqr(&self, other: &FeatureVector) -> f64 {
        assert_eq!(self.dim(), other.dim(), "feature dimension mismatch");
        self.0
            .iter()
            .zip(&other.0)
            .map(|(&a, &b)| {
                let d = f64::from(a) - f64::from(b);
                d * d
            })
            .sum()
    }

    pub fn norm(&self) -> f64 {
        math::sqrt(self.0.iter().map(|&v| f64::from(v) * f64::from(v)).sum())
    }

    /// Component-wise `f64` mean of `vectors`; `None` when empty.
    pub fn mean(vectors: &[FeatureVector]) -> Option<FeatureVector> {
        let first = vectors.first()?;
        let mut acc = vec![0.0f64; first.dim()];
        for v in vectors {
            assert_eq!(v.dim(), acc.len(), "feature dimension mismatch");
            for (a, &x) in acc.iter_mut().zip(&v.0) {
                *a += f64::from(x);
            }
        }
        let n = vectors.len() as f64;
        Some(FeatureVector(
            acc.into_iter().map(|a| (a / n) as f32).collect(),
        ))
    }
}

impl From<Vec<f32>> for FeatureVector {
    fn from(v: Vec<f32>) -> Self {
        Self(v)
    }
}

/// Identity of an extractor configuration. Features with different
/// fingerprints are never compared.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Fingerprint(pub u64);

impl Fingerprint {
    pub fn check(self, other: Fingerprint) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::FingerprintMismatch {
                left: self.0,
                right: other.0,
            })
        }
    }
}

impl core::fmt::Display for Fingerprint {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

/// An image feature extractor f̂.
///
/// `key` names the image: the image id for clean images and
/// `<transform label>/<image id>` for transformed ones. Pixel-based
/// extractors ignore it; table-backed extractors ignore the pixels.
pub trait Extractor {
    fn dim(&self) -> usize;
    fn fingerprint(&self) -> Fingerprint;
    fn embed(&self, key: &str, img: &ImageBuffer) -> Result<FeatureVector>;
    /// Whether `embed` reads pixels. Table lookups do not, so transforms
    /// need not be evaluated for them.
    fn needs_pixels(&self) -> bool {
        true
    }
}

/// Deterministic pixel-statistics extractor.
///
/// Layout, in order:
/// 1. `grid × grid` mean luminance (Rec. 601) over equal-area cells,
///    row-major;
/// 2. per-channel mean then per-channel population std, R, G, B;
/// 3. `bands` radial band energies of the luminance spectrum: RMS of
///    `|F(k)| / (H·W)` over non-DC bins whose radial frequency
///    `hypot(fy, fx) / hypot(0.5, 0.5)` falls in `[b/bands, (b+1)/bands)`.
///    Empty bands are 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BuiltinExtractor {
    pub grid: usize,
    pub bands: usize,
}

impl Default for BuiltinExtractor {
    fn default() -> Self {
        Self { grid: 8, bands: 8 }
    }
}

impl BuiltinExtractor {
    pub fn new(grid: usize, bands: usize) -> Result<Self> {
        if grid == 0 || bands == 0 {
            return Err(Error::Domain("grid and bands must be positive".into()));
        }
        Ok(Self { grid, bands })
    }

    pub fn embed_image(&self, img: &ImageBuffer) -> FeatureVector {
        let mut out = Vec::with_capacity(self.dim());
        let (h, w) = img.dims();
        if h == 0 || w == 0 {
            return FeatureVector::zeros(self.dim());
        }
        let lum = img.luminance();
        let g = self.grid;
        let mut sums = vec![0.0f64; g * g];
        let mut counts = vec![0usize; g * g];
        for y in 0..h {
            let cy = y * g / h;
            for x in 0..w {
                let cx = x * g / w;
                sums[cy * g + cx] += lum[y * w + x];
                counts[cy * g + cx] += 1;
            }
        }
        for cy in 0..g {
            for cx in 0..g {
                let i = cy * g + cx;
                let v = if counts[i] > 0 {
                    sums[i] / counts[i] as f64
                } else {
                    // Images smaller than the grid: nearest source pixel.
                    lum[(cy * h / g) * w + cx * w / g]
                };
                out.push(v as f32);
            }
        }

        let n = (h * w) as f64;
        let mut means = [0.0f64; 3];
        for px in img.data().chunks_exact(3) {
            for c in 0..3 {
                means[c] += f64::from(px[c]);
            }
        }
        means.iter_mut().for_each(|m| *m /= n);
        let mut vars = [0.0f64; 3];
        for px in img.data().chunks_exact(3) {
            for c in 0..3 {
                let d = f64::from(px[c]) - means[c];
                vars[c] += d * d;
            }
        }
        out.extend(means.iter().map(|&m| m as f32));
        out.extend(vars.iter().map(|&v| math::sqrt(v / n) as f32));

        let spectrum = dft::real_dft_2d(&lum, h, w);
        let rmax = math::hypot(0.5, 0.5);
        let mut energy = vec![0.0f64; self.bands];
        let mut bins = vec![0usize; self.bands];
        for ky in 0..h {
            let fy = dft::frequency(ky, h);
            for kx in 0..w {
                if ky == 0 && kx == 0 {
                    continue;
                }
                let r = math::hypot(fy, dft::frequency(kx, w)) / rmax;
                let b = ((r * self.bands as f64) as usize).min(self.bands - 1);
                energy[b] += spectrum[ky * w + kx].norm_sqr() / (n * n);
                bins[b] += 1;
            }
        }
        for (e, c) in energy.iter().zip(&bins) {
            let v = if *c > 0 {
                math::sqrt(e / *c as f64)
            } else {
                0.0
            };
            out.push(v as f32);
        }
        FeatureVector(out)
    }
}

impl Extractor for BuiltinExtractor {
    fn dim(&self) -> usize {
        self.grid * self.grid + 6 + self.bands
    }

    fn fingerprint(&self) -> Fingerprint {
        let cfg = format!(
            "builtin-pixelstats/v1/grid={}/bands={}",
            self.grid, self.bands
        );
        Fingerprint(fnv1a(cfg.as_bytes()))
    }

    fn embed(&self, _key: &str, img: &ImageBuffer) -> Result<FeatureVector> {
        Ok(self.embed_image(img))
    }
}

/// Externally computed embeddings looked up by key.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FeatureTable {
    dim: usize,
    fingerprint: Fingerprint,
    rows: BTreeMap<String, FeatureVector>,
}

impl FeatureTable {
    pub fn new(dim: usize, fingerprint: Fingerprint) -> Self {
        Self {
            dim,
            fingerprint,
            rows: BTreeMap::new(),
        }
    }

    pub fn from_rows(
        dim: usize,
        fingerprint: Fingerprint,
        rows: impl IntoIterator<Item = (String, FeatureVector)>,
    ) -> Result<Self> {
        let mut t = Self::new(dim, fingerprint);
        for (id, v) in rows {
            t.insert(id, v)?;
        }
        Ok(t)
    }

    pub fn insert(&mut self, id: String, v: FeatureVector) -> Result<()> {
        if v.dim() != self.dim {
            return Err(Error::DimMismatch {
                expected: self.dim,
                found: v.dim(),
            });
        }
        if !v.is_finite() {
            return Err(Error::Domain(format!("non-finite feature for `{id}`")));
        }
        self.rows.insert(id, v);
        Ok(())
    }

    pub fn get(&self, id: &str) -> Result<&FeatureVector> {
        self.rows
            .get(id)
            .ok_or_else(|| Error::MissingFeature(id.to_string()))
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &FeatureVector)> {
        self.rows.iter()
    }
}

impl Extractor for FeatureTable {
    fn dim(&self) -> usize {
        self.dim
    }
    fn fingerprint(&self) -> Fingerprint {
        self.fingerprint
    }
    fn embed(&self, key: &str, _img: &ImageBuffer) -> Result<FeatureVector> {
        self.get(key).cloned()
    }
    fn needs_pixels(&self) -> bool {
        false
    }
}

/// `f(t)` together with the context it was computed in.
#[derive(Clone, Debug, PartialEq)]
pub struct TransformFeature {
    pub transform_id: String,
    pub subset_id: u64,
    pub fingerprint: Fingerprint,
    pub feature: FeatureVector,
}

/// Key of a transformed image for table-backed extractors.
pub fn transformed_key(transform_label: &str, image_id: &str) -> String {
    format!("{transform_label}/{image_id}")
}

pub fn embed_image<E: Extractor + ?Sized>(
    extractor: &E,
    key: &str,
    img: &ImageBuffer,
) -> Result<FeatureVector> {
    let v = extractor.embed(key, img)?;
    if v.dim() != extractor.dim() {
        return Err(Error::DimMismatch {
            expected: extractor.dim(),
            found: v.dim(),
        });
    }
    Ok(v)
}

/// Clean-image embeddings of a subset, computed once and reused for every
/// transform.
#[derive(Clone, Debug, PartialEq)]
pub struct PreparedSubset<'a> {
    pub subset: &'a ImageSubset,
    pub subset_id: u64,
    pub fingerprint: Fingerprint,
    pub clean: Vec<FeatureVector>,
}

impl<'a> PreparedSubset<'a> {
    pub fn new<E: Extractor + ?Sized>(extractor: &E, subset: &'a ImageSubset) -> Result<Self> {
        if subset.is_empty() {
            return Err(Error::Domain(
                "featurization needs a nonempty image subset".into(),
            ));
        }
        let clean = subset
            .ids
            .iter()
            .zip(&subset.images)
            .map(|(id, img)| embed_image(extractor, id, img))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            subset,
            subset_id: subset.id(),
            fingerprint: extractor.fingerprint(),
            clean,
        })
    }

    pub fn len(&self) -> usize {
        self.clean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clean.is_empty()
    }

    /// Per-image difference vectors `f̂(t(x)) − f̂(x)` in `f64`.
    pub fn differences<E: Extractor + ?Sized, T: Transform + ?Sized>(
        &self,
        extractor: &E,
        registry: &Registry,
        t: &T,
    ) -> Result<Vec<Vec<f64>>> {
        extractor.fingerprint().check(self.fingerprint)?;
        let label = t.label();
        let mut out = Vec::with_capacity(self.len());
        for ((id, img), clean) in self
            .subset
            .ids
            .iter()
            .zip(&self.subset.images)
            .zip(&self.clean)
        {
            let key = transformed_key(&label, id);
            let transformed = if extractor.needs_pixels() {
                t.apply(registry, img)?
            } else {
                img.clone()
            };
            let v = embed_image(extractor, &key, &transformed)?;
            out.push(
                v.0.iter()
                    .zip(&clean.0)
                    .map(|(&a, &b)| f64::from(a) - f64::from(b))
                    .collect(),
            );
        }
        Ok(out)
    }

    pub fn featurize<E: Extractor + ?Sized, T: Transform + ?Sized>(
        &self,
        extractor: &E,
        registry: &Registry,
        t: &T,
    ) -> Result<TransformFeature> {
        let diffs = self.differences(extractor, registry, t)?;
        Ok(TransformFeature {
            transform_id: t.label(),
            subset_id: self.subset_id,
            fingerprint: self.fingerprint,
            feature: mean_rows(&diffs, extractor.dim()),
        })
    }
}

fn mean_rows(rows: &[Vec<f64>], dim: usize) -> FeatureVector {
    let mut acc = vec![0.0f64; dim];
    for r in rows {
        for (a, &d) in acc.iter_mut().zip(r) {
            *a += d;
        }
    }
    let n = rows.len().max(1) as f64;
    FeatureVector(acc.into_iter().map(|a| (a / n) as f32).collect())
}

/// `f(t)` over `subset`.
pub fn featurize_transform<E: Extractor + ?Sized, T: Transform + ?Sized>(
    extractor: &E,
    registry: &Registry,
    t: &T,
    subset: &ImageSubset,
) -> Result<TransformFeature> {
    PreparedSubset::new(extractor, subset)?.featurize(extractor, registry, t)
}

/// Spec of the `index`-th sampled draw of a corruption.
pub fn corruption_draw(name: &str, severity: u8, seed: Seed, index: u64) -> TransformSpec {
    TransformSpec::corruption(name, severity, seed.derive("corruption-draw", index))
}

/// Mean of `f(c)` over `n_samples` seeded draws of one corruption at one
/// severity: the center `E_c[f(c)]`.
pub fn corruption_center<E: Extractor + ?Sized>(
    extractor: &E,
    registry: &Registry,
    prepared: &PreparedSubset<'_>,
    name: &str,
    severity: u8,
    n_samples: usize,
    seed: Seed,
) -> Result<FeatureVector> {
    if n_samples == 0 {
        return Err(Error::Domain(
            "corruption center needs at least one sample".into(),
        ));
    }
    let mut feats = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let spec = corruption_draw(name, severity, seed, i as u64);
        feats.push(prepared.featurize(extractor, registry, &spec)?.feature);
    }
    Ok(FeatureVector::mean(&feats).expect("n_samples >= 1"))
}

/// Paired variant for large pools: draw `i` is applied only to image `i`,
/// so `n` images give one center from `n` (image, corruption) pairs.
pub fn corruption_center_paired<E: Extractor + ?Sized>(
    extractor: &E,
    registry: &Registry,
    prepared: &PreparedSubset<'_>,
    name: &str,
    severity: u8,
    seed: Seed,
) -> Result<FeatureVector> {
    extractor.fingerprint().check(prepared.fingerprint)?;
    let mut rows = Vec::with_capacity(prepared.len());
    for (i, ((id, img), clean)) in prepared
        .subset
        .ids
        .iter()
        .zip(&prepared.subset.images)
        .zip(&prepared.clean)
        .enumerate()
    {
        let spec = corruption_draw(name, severity, seed, i as u64);
        let key = transformed_key(&spec.label(), id);
        let transformed = if extractor.needs_pixels() {
            registry.apply(&spec, img)?
        } else {
            img.clone()
        };
        let v = embed_image(extractor, &key, &transformed)?;
        rows.push(
            v.0.iter()
                .zip(&clean.0)
                .map(|(&a, &b)| f64::from(a) - f64::from(b))
                .collect::<Vec<f64>>(),
        );
    }
    Ok(mean_rows(&rows, extractor.dim()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::synthetic_image;
    use crate::transforms::FnTransform;

    fn subset(n: usize, size: usize) -> ImageSubset {
        let ids: Vec<String> = (0..n).map(|i| format!("img{i:03}.png")).collect();
        let images = (0..n)
            .map(|i| synthetic_image(size, size, Seed(i as u64)))
            .collect();
        ImageSubset::new(ids, images).unwrap()
    }

    #[test]
    fn builtin_dim_and_zero_image() {
        let e = BuiltinExtractor::default();
        assert_eq!(e.dim(), 64 + 6 + 8);
        let v = e.embed_image(&ImageBuffer::zeros(16, 16));
        assert_eq!(v, FeatureVector::zeros(78));
    }

    #[test]
    fn builtin_constant_image() {
        let e = BuiltinExtractor::default();
        let v = e.embed_image(&ImageBuffer::filled(12, 20, [0.2, 0.4, 0.6]));
        let y = (0.299 * 0.2f32 as f64 + 0.587 * 0.4f32 as f64 + 0.114 * 0.6f32 as f64) as f32;
        for g in &v.0[..64] {
            assert!((g - y).abs() < 1e-6);
        }
        assert!((v.0[64] - 0.2).abs() < 1e-6);
        assert!((v.0[66] - 0.6).abs() < 1e-6);
        assert!(v.0[67..70].iter().all(|&s| s.abs() < 1e-6));
        assert!(v.0[70..].iter().all(|&b| b.abs() < 1e-6));
    }

    #[test]
    fn builtin_tiny_image() {
        let e = BuiltinExtractor::default();
        let img = synthetic_image(3, 5, Seed(4));
        let v = e.embed_image(&img);
        assert_eq!(v.dim(), 78);
        assert!(v.is_finite());
    }

    #[test]
    fn band_energy_of_single_tone() {
        // cos(2π·4x/32) along x only: energy sits at radial frequency
        // 0.125 / 0.707 ≈ 0.177, band 1 of 8.
        let (h, w) = (32, 32);
        let mut data = Vec::new();
        for _y in 0..h {
            for x in 0..w {
                let v = 0.5 + 0.25 * math::cos(2.0 * math::PI * 4.0 * x as f64 / w as f64);
                data.extend([v as f32; 3]);
            }
        }
        let img = ImageBuffer::new(h, w, data).unwrap();
        let v = BuiltinExtractor::default().embed_image(&img);
        let bands = &v.0[70..];
        assert!(bands[1] > 0.0);
        for (i, b) in bands.iter().enumerate() {
            if i != 1 {
                assert!(b.abs() < 1e-6, "band {i} = {b}");
            }
        }
    }

    #[test]
    fn identity_feature_is_zero() {
        let s = subset(10, 16);
        let e = BuiltinExtractor::default();
        let id = FnTransform {
            label: "identity".into(),
            f: |x: &ImageBuffer| x.clone(),
        };
        let f = featurize_transform(&e, &Registry::default(), &id, &s).unwrap();
        assert!(f.feature.0.iter().all(|&v| v == 0.0));
        assert_eq!(f.subset_id, s.id());
        assert_eq!(f.fingerprint, e.fingerprint());
    }

    #[test]
    fn single_image_subset_is_the_difference() {
        let s = subset(1, 16);
        let e = BuiltinExtractor::default();
        let spec = TransformSpec::augmentation("rotate", Seed(0));
        let reg = Registry::default();
        let f = featurize_transform(&e, &reg, &spec, &s).unwrap();
        let a = e.embed_image(&reg.apply(&spec, &s.images[0]).unwrap());
        let b = e.embed_image(&s.images[0]);
        let expect: Vec<f32> =
            a.0.iter()
                .zip(&b.0)
                .map(|(&x, &y)| (f64::from(x) - f64::from(y)) as f32)
                .collect();
        assert_eq!(f.feature.0, expect);
    }

    #[test]
    fn constant_output_transform() {
        let s = subset(7, 16);
        let e = BuiltinExtractor::default();
        let x0 = synthetic_image(16, 16, Seed(99));
        let x0c = x0.clone();
        let t = FnTransform {
            label: "const".into(),
            f: move |_: &ImageBuffer| x0c.clone(),
        };
        let f = featurize_transform(&e, &Registry::default(), &t, &s).unwrap();
        let fx0 = e.embed_image(&x0);
        let mut mean = vec![0.0f64; 78];
        for img in &s.images {
            for (m, &v) in mean.iter_mut().zip(&e.embed_image(img).0) {
                *m += f64::from(v) / 7.0;
            }
        }
        for ((&got, &x0), m) in f.feature.0.iter().zip(&fx0.0).zip(&mean) {
            assert!((f64::from(got) - (f64::from(x0) - m)).abs() < 1e-6);
        }
    }

    #[test]
    fn table_extractor_lookup_and_missing() {
        let fp = Fingerprint(7);
        let mut t = FeatureTable::new(2, fp);
        t.insert("a.png".into(), FeatureVector(vec![1.0, 2.0]))
            .unwrap();
        t.insert("rotate/a.png".into(), FeatureVector(vec![1.5, 1.0]))
            .unwrap();
        assert!(t.insert("b".into(), FeatureVector(vec![1.0])).is_err());
        let s = ImageSubset::new(vec!["a.png".into()], vec![ImageBuffer::zeros(2, 2)]).unwrap();
        let spec = TransformSpec::augmentation("rotate", Seed(0));
        let f = featurize_transform(&t, &Registry::default(), &spec, &s).unwrap();
        assert_eq!(f.feature.0, vec![0.5, -1.0]);
        let spec = TransformSpec::augmentation("equalize", Seed(0));
        assert!(matches!(
            featurize_transform(&t, &Registry::default(), &spec, &s),
            Err(Error::MissingFeature(_))
        ));
    }

    #[test]
    fn prepared_subset_rejects_other_extractor() {
        let s = subset(2, 8);
        let e = BuiltinExtractor::default();
        let p = PreparedSubset::new(&e, &s).unwrap();
        let other = BuiltinExtractor::new(4, 4).unwrap();
        let spec = TransformSpec::augmentation("rotate", Seed(0));
        assert!(matches!(
            p.featurize(&other, &Registry::default(), &spec),
            Err(Error::FingerprintMismatch { .. })
        ));
    }

    #[test]
    fn deterministic_corruption_center_ignores_sample_count() {
        let s = subset(4, 16);
        let e = BuiltinExtractor::default();
        let reg = Registry::default();
        let p = PreparedSubset::new(&e, &s).unwrap();
        let one = corruption_center(&e, &reg, &p, "contrast", 3, 1, Seed(1)).unwrap();
        let five = corruption_center(&e, &reg, &p, "contrast", 3, 5, Seed(2)).unwrap();
        assert_eq!(one, five);
        let spec = corruption_draw("gaussian_noise", 2, Seed(5), 0);
        let single = p.featurize(&e, &reg, &spec).unwrap().feature;
        assert_eq!(
            corruption_center(&e, &reg, &p, "gaussian_noise", 2, 1, Seed(5)).unwrap(),
            single
        );
    }
}
