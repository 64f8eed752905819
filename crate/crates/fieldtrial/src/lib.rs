//! Desk-scale harness for operationalizing pixel-timeseries encoders for
//! cropland and crop type mapping.
//!
//! The crate covers the full loop: a canonical multi-sensor data model
//! ([`data`]), train/validation split construction with leakage auditing
//! ([`splits`]), a lightweight transformer encoder with an exact MAC counter
//! ([`encoder`]), adaptation strategies from self-supervised pretraining to
//! frozen-feature heads plus a boosted-tree baseline ([`train`]), per-class
//! and per-country F1 reporting ([`eval`]), dense raster inference and map
//! rendering ([`mapping`]), a seeded phenology-driven synthetic benchmark
//! ([`synth`]), and a reproducible experiment runner ([`experiment`]).
//!
//! Everything is deterministic given a seed: identical configs produce
//! byte-identical datasets, split files, model artifacts, and reports.

pub mod countries;
pub mod data;
pub mod encoder;
pub mod eval;
pub mod experiment;
pub mod hashutil;
pub mod mapping;
pub mod splits;
pub mod synth;
pub mod train;

mod error;

pub use error::{Error, Result};
