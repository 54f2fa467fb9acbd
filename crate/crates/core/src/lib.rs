//! Core of the corruption-benchmark toolkit: images, the transform zoo,
//! the transform feature space, distances, and benchmark construction.
//!
//! `no_std` with `alloc`; file formats and the CLI live in the `cbar` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod benchmark;
pub mod dft;
pub mod distances;
pub mod error;
pub mod features;
pub mod image;
pub(crate) mod math;
pub mod rng;
pub mod transforms;

pub use error::{Error, Result};
pub use features::{
    BuiltinExtractor, Extractor, FeatureTable, FeatureVector, Fingerprint, TransformFeature,
};
pub use image::{ImageBuffer, ImageSubset};
pub use rng::Seed;
pub use transforms::{Registry, Transform, TransformSpec};
