//! The transform zoo: base augmentations, reference corruptions, and the
//! dissimilar corruption family, behind one registry.

pub mod augment;
pub mod cbar;
pub mod compose;
pub mod filter;
pub mod jpeg;
pub mod noise;
pub mod reference;
pub mod severity;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::image::ImageBuffer;
use crate::rng::{ChaCha8Rng, Seed};

pub use compose::{
    enumerate_powerset, sample_augmentation, AugmentationScheme, SampledAugmentation, BASE_OPS,
};
pub use severity::SeverityTable;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TransformKind {
    Augmentation,
    CorruptionReference,
    CorruptionCbar,
}

impl TransformKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TransformKind::Augmentation => "augmentation",
            TransformKind::CorruptionReference => "corruption-reference",
            TransformKind::CorruptionCbar => "corruption-cbar",
        }
    }

    pub fn severity_range(self) -> Option<(u8, u8)> {
        match self {
            TransformKind::Augmentation => None,
            TransformKind::CorruptionReference => Some((1, 5)),
            TransformKind::CorruptionCbar => Some((1, 10)),
        }
    }
}

/// Documented range of one transform parameter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParamDef {
    pub name: &'static str,
    pub min: f64,
    pub max: f64,
}

pub(crate) const fn param(name: &'static str, min: f64, max: f64) -> ParamDef {
    ParamDef { name, min, max }
}

/// Resolved parameters handed to a transform kernel.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Params(BTreeMap<String, f64>);

impl Params {
    pub fn get(&self, name: &str) -> f64 {
        *self
            .0
            .get(name)
            .unwrap_or_else(|| panic!("parameter `{name}` was not resolved"))
    }
    pub fn get_or(&self, name: &str, default: f64) -> f64 {
        self.0.get(name).copied().unwrap_or(default)
    }
    pub fn insert(&mut self, name: &str, v: f64) {
        self.0.insert(name.to_string(), v);
    }
    pub fn as_map(&self) -> &BTreeMap<String, f64> {
        &self.0
    }
}

pub(crate) type Kernel = fn(&ImageBuffer, &Params, &mut ChaCha8Rng) -> ImageBuffer;

/// Static description of a registered transform.
#[derive(Clone, Copy)]
pub struct RegistryEntry {
    pub name: &'static str,
    pub kind: TransformKind,
    pub params: &'static [ParamDef],
    pub description: &'static str,
    pub(crate) kernel: Kernel,
}

impl core::fmt::Debug for RegistryEntry {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("RegistryEntry")
            .field("name", &self.name)
            .field("kind", &self.kind)
            .finish()
    }
}

impl RegistryEntry {
    pub fn param_def(&self, name: &str) -> Option<&ParamDef> {
        self.params.iter().find(|p| p.name == name)
    }
}

/// All registered transforms in registry order.
pub fn entries() -> Vec<&'static RegistryEntry> {
    augment::ENTRIES
        .iter()
        .chain(reference::ENTRIES)
        .chain(cbar::ENTRIES)
        .collect()
}

pub fn lookup(name: &str) -> Option<&'static RegistryEntry> {
    augment::ENTRIES
        .iter()
        .chain(reference::ENTRIES)
        .chain(cbar::ENTRIES)
        .find(|e| e.name == name)
}

/// `(name, kind, severity range)`.
pub type RegistryRow = (&'static str, TransformKind, Option<(u8, u8)>);

/// One row per registered transform.
pub fn registry_list() -> Vec<RegistryRow> {
    entries()
        .into_iter()
        .map(|e| (e.name, e.kind, e.kind.severity_range()))
        .collect()
}

/// A named, parameterized, seeded image transform.
#[derive(Clone, Debug, PartialEq)]
pub struct TransformSpec {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    pub severity: Option<u8>,
    pub seed: Seed,
}

impl TransformSpec {
    pub fn corruption(name: &str, severity: u8, seed: Seed) -> Self {
        Self {
            name: name.to_string(),
            params: BTreeMap::new(),
            severity: Some(severity),
            seed,
        }
    }

    pub fn augmentation(name: &str, seed: Seed) -> Self {
        Self {
            name: name.to_string(),
            params: BTreeMap::new(),
            severity: None,
            seed,
        }
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    /// `name` or `name/severity`.
    pub fn label(&self) -> String {
        match self.severity {
            Some(s) => format!("{}/{}", self.name, s),
            None => self.name.clone(),
        }
    }
}

/// Anything that maps an image to an image of the same size.
pub trait Transform {
    fn apply(&self, registry: &Registry, img: &ImageBuffer) -> Result<ImageBuffer>;
    fn label(&self) -> String;
}

impl Transform for TransformSpec {
    fn apply(&self, registry: &Registry, img: &ImageBuffer) -> Result<ImageBuffer> {
        registry.apply(self, img)
    }
    fn label(&self) -> String {
        TransformSpec::label(self)
    }
}

/// Wraps a closure as a [`Transform`].
pub struct FnTransform<F> {
    pub label: String,
    pub f: F,
}

impl<F> Transform for FnTransform<F>
where
    F: Fn(&ImageBuffer) -> ImageBuffer,
{
    fn apply(&self, _registry: &Registry, img: &ImageBuffer) -> Result<ImageBuffer> {
        Ok((self.f)(img))
    }
    fn label(&self) -> String {
        self.label.clone()
    }
}

/// Transform registry bound to a severity table.
#[derive(Clone, Debug, Default)]
pub struct Registry {
    severities: SeverityTable,
}

impl Registry {
    pub fn new(severities: SeverityTable) -> Self {
        Self { severities }
    }

    /// Like [`Registry::new`], but rejects tables with unknown corruptions
    /// or parameters, rows of the wrong length, out-of-range values, or
    /// missing rows.
    pub fn validated(severities: SeverityTable) -> Result<Self> {
        for (name, param, values) in severities.iter() {
            let entry = lookup(name).ok_or_else(|| Error::UnknownTransform(name.to_string()))?;
            let invalid = |reason: String| Error::InvalidParam {
                name: name.to_string(),
                param: param.to_string(),
                reason,
            };
            let (lo, hi) = entry
                .kind
                .severity_range()
                .ok_or_else(|| invalid("augmentations take no severity table".to_string()))?;
            let def = entry
                .param_def(param)
                .ok_or_else(|| invalid("unknown parameter".to_string()))?;
            let want = usize::from(hi - lo + 1);
            if values.len() != want {
                return Err(invalid(format!(
                    "{} values given, {want} expected",
                    values.len()
                )));
            }
            if let Some(v) = values
                .iter()
                .find(|v| !(v.is_finite() && **v >= def.min && **v <= def.max))
            {
                return Err(invalid(format!("{v} outside [{}, {}]", def.min, def.max)));
            }
        }
        for e in entries() {
            if e.kind.severity_range().is_none() {
                continue;
            }
            for p in e.params {
                if severities.row(e.name, p.name).is_none() {
                    return Err(Error::InvalidParam {
                        name: e.name.to_string(),
                        param: p.name.to_string(),
                        reason: "missing from the severity table".to_string(),
                    });
                }
            }
        }
        Ok(Self { severities })
    }

    pub fn severities(&self) -> &SeverityTable {
        &self.severities
    }

    /// Validates `spec` and returns the fully resolved parameter set.
    pub fn resolve(&self, spec: &TransformSpec) -> Result<(&'static RegistryEntry, Params)> {
        let entry = lookup(&spec.name).ok_or_else(|| Error::UnknownTransform(spec.name.clone()))?;
        let mut params = Params::default();
        match (entry.kind.severity_range(), spec.severity) {
            (None, Some(_)) => {
                return Err(Error::UnexpectedSeverity {
                    name: spec.name.clone(),
                })
            }
            (Some(_), None) => {
                return Err(Error::MissingSeverity {
                    name: spec.name.clone(),
                })
            }
            (Some((min, max)), Some(s)) => {
                if s < min || s > max {
                    return Err(Error::SeverityOutOfRange {
                        name: spec.name.clone(),
                        severity: s,
                        min,
                        max,
                    });
                }
                for def in entry.params {
                    let v = self
                        .severities
                        .value(entry.name, def.name, s)
                        .ok_or_else(|| Error::InvalidParam {
                            name: spec.name.clone(),
                            param: def.name.to_string(),
                            reason: format!("no severity {s} entry in the severity table"),
                        })?;
                    params.insert(def.name, v);
                }
            }
            (None, None) => {
                for def in entry.params {
                    params.insert(def.name, augment::default_param(def.name));
                }
            }
        }
        for (k, &v) in &spec.params {
            let def = entry.param_def(k).ok_or_else(|| Error::InvalidParam {
                name: spec.name.clone(),
                param: k.clone(),
                reason: "unknown parameter".to_string(),
            })?;
            if !v.is_finite() || v < def.min || v > def.max {
                return Err(Error::InvalidParam {
                    name: spec.name.clone(),
                    param: k.clone(),
                    reason: format!("{v} outside [{}, {}]", def.min, def.max),
                });
            }
            params.insert(def.name, v);
        }
        Ok((entry, params))
    }

    /// Applies `spec` to `img`. Output has the same size, values in `[0, 1]`.
    pub fn apply(&self, spec: &TransformSpec, img: &ImageBuffer) -> Result<ImageBuffer> {
        let (entry, params) = self.resolve(spec)?;
        if img.pixel_count() == 0 {
            return Ok(img.clone());
        }
        let mut rng = spec.seed.stream(entry.name, 0);
        let out = (entry.kernel)(img, &params, &mut rng);
        debug_assert_eq!(out.dims(), img.dims());
        Ok(out)
    }
}

/// Scale factor for spatial parameters: they are expressed in pixels at a
/// 32-pixel short side and grow with the image.
pub(crate) fn spatial_scale(img: &ImageBuffer) -> f64 {
    img.height().min(img.width()) as f64 / 32.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::synthetic_image;

    #[test]
    fn registry_counts() {
        let list = registry_list();
        let count = |k| list.iter().filter(|(_, kind, _)| *kind == k).count();
        assert_eq!(count(TransformKind::Augmentation), 9);
        assert_eq!(count(TransformKind::CorruptionReference), 15);
        assert!(count(TransformKind::CorruptionCbar) >= 15);
    }

    #[test]
    fn names_are_unique() {
        let mut names: Vec<_> = entries().iter().map(|e| e.name).collect();
        let n = names.len();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), n);
    }

    #[test]
    fn every_entry_has_complete_severity_rows() {
        let table = SeverityTable::builtin();
        for e in entries() {
            if let Some((lo, hi)) = e.kind.severity_range() {
                for p in e.params {
                    let row = table
                        .row(e.name, p.name)
                        .unwrap_or_else(|| panic!("{}.{}", e.name, p.name));
                    assert_eq!(row.len(), usize::from(hi - lo + 1), "{}.{}", e.name, p.name);
                    for v in row {
                        assert!(*v >= p.min && *v <= p.max, "{}.{} = {v}", e.name, p.name);
                    }
                }
            }
        }
    }

    #[test]
    fn registry_errors() {
        let reg = Registry::default();
        let img = synthetic_image(8, 8, Seed(1));
        assert!(matches!(
            reg.apply(&TransformSpec::corruption("no_such", 1, Seed(0)), &img),
            Err(Error::UnknownTransform(_))
        ));
        assert!(matches!(
            reg.apply(
                &TransformSpec::corruption("gaussian_noise", 6, Seed(0)),
                &img
            ),
            Err(Error::SeverityOutOfRange { .. })
        ));
        assert!(matches!(
            reg.apply(
                &TransformSpec::corruption("gaussian_noise", 0, Seed(0)),
                &img
            ),
            Err(Error::SeverityOutOfRange { .. })
        ));
        assert!(reg
            .apply(
                &TransformSpec::corruption("plasma_noise", 10, Seed(0)),
                &img
            )
            .is_ok());
        assert!(matches!(
            reg.apply(&TransformSpec::corruption("rotate", 1, Seed(0)), &img),
            Err(Error::UnexpectedSeverity { .. })
        ));
        assert!(matches!(
            reg.apply(
                &TransformSpec::augmentation("gaussian_noise", Seed(0)),
                &img
            ),
            Err(Error::MissingSeverity { .. })
        ));
        assert!(matches!(
            reg.apply(
                &TransformSpec::augmentation("rotate", Seed(0)).with_param("level", 11.0),
                &img
            ),
            Err(Error::InvalidParam { .. })
        ));
        assert!(matches!(
            reg.apply(
                &TransformSpec::augmentation("rotate", Seed(0)).with_param("bogus", 1.0),
                &img
            ),
            Err(Error::InvalidParam { .. })
        ));
    }

    #[test]
    fn builtin_table_validates() {
        assert!(Registry::validated(SeverityTable::builtin()).is_ok());
        let mut t = SeverityTable::builtin();
        t.set_row("gaussian_noise", "sigma", alloc::vec![0.1; 4]);
        assert!(Registry::validated(t).is_err());
        let mut t = SeverityTable::builtin();
        t.set_row("gaussian_noise", "bogus", alloc::vec![0.1; 5]);
        assert!(Registry::validated(t).is_err());
        let mut t = SeverityTable::builtin();
        t.set_row("nope", "sigma", alloc::vec![0.1; 5]);
        assert!(Registry::validated(t).is_err());
        assert!(Registry::validated(SeverityTable::empty()).is_err());
    }

    #[test]
    fn explicit_params_override_severity_table() {
        let reg = Registry::default();
        let spec = TransformSpec::corruption("gaussian_noise", 1, Seed(0)).with_param("sigma", 0.0);
        let img = synthetic_image(8, 8, Seed(1));
        assert_eq!(reg.apply(&spec, &img).unwrap(), img);
    }
}
