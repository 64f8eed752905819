//! Canonical data model for multi-sensor pixel timeseries.
//!
//! A [`PixelSample`] is one labeled, georeferenced pixel carrying an
//! 18-month timeseries for every dynamic band group plus static bands.
//! Masked observations (cloud, missing acquisition) are stored as a NaN
//! sentinel and must never feed downstream math; all consumers go through
//! the observation mask.

mod composite;
mod io;
mod normalize;

pub use composite::{composite_band, composite_series, CompositeMode, MonthWindow, Observation};
pub use io::{dataset_to_jsonl, load_dataset, write_dataset};
pub use normalize::{
    compute_normalization_stats, compute_normalization_stats_filtered, denormalize_value,
    normalize, BandStats, NormStats,
};

use crate::{Error, Result};
use chrono::{Datelike, NaiveDate};
use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Fixed number of monthly timesteps per sample.
pub const TIMESTEPS: usize = 18;

/// Cloud-score threshold for the cloud-free compositing mode.
pub const TAU_CLOUD: f64 = 0.05;

/// Floor applied to normalization scales to avoid division blowup on
/// constant bands.
pub const SCALE_FLOOR: f64 = 1e-6;

/// Sentinel stored at masked positions.
pub const MASKED_SENTINEL: f64 = f64::NAN;

// ── Band schema ──────────────────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Temporality {
    Dynamic,
    Static,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BandGroup {
    pub name: String,
    pub bands: Vec<String>,
    pub temporality: Temporality,
}

/// Ordered, immutable collection of band groups.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BandSchema {
    groups: Vec<BandGroup>,
}

impl BandSchema {
    pub fn new(groups: Vec<BandGroup>) -> Result<Self> {
        let mut names = std::collections::BTreeSet::new();
        for g in &groups {
            if !names.insert(g.name.clone()) {
                return Err(Error::Schema(format!("duplicate group name {}", g.name)));
            }
            let mut bands = std::collections::BTreeSet::new();
            for b in &g.bands {
                if !bands.insert(b) {
                    return Err(Error::Schema(format!(
                        "duplicate band {b} in group {}",
                        g.name
                    )));
                }
            }
            if g.bands.is_empty() {
                return Err(Error::Schema(format!("group {} has no bands", g.name)));
            }
        }
        if !groups.iter().any(|g| g.temporality == Temporality::Dynamic) {
            return Err(Error::Schema("schema needs at least one dynamic group".into()));
        }
        Ok(BandSchema { groups })
    }

    /// The canonical schema: Sentinel-1 backscatter, Sentinel-2 surface
    /// reflectance, static DEM terrain, and two meteorological bands.
    pub fn canonical() -> BandSchema {
        let g = |name: &str, bands: &[&str], temporality| BandGroup {
            name: name.to_string(),
            bands: bands.iter().map(|b| b.to_string()).collect(),
            temporality,
        };
        BandSchema::new(vec![
            g("S1", &["VV", "VH"], Temporality::Dynamic),
            g(
                "S2",
                &["B02", "B03", "B04", "B05", "B06", "B07", "B08", "B8A", "B11", "B12"],
                Temporality::Dynamic,
            ),
            g("DEM", &["elevation_m", "slope_deg"], Temporality::Static),
            g(
                "METEO",
                &["temperature_mean_C", "precipitation_mm"],
                Temporality::Dynamic,
            ),
        ])
        .expect("canonical schema is valid")
    }

    pub fn groups(&self) -> &[BandGroup] {
        &self.groups
    }

    pub fn group_index(&self, name: &str) -> Option<usize> {
        self.groups.iter().position(|g| g.name == name)
    }

    pub fn dynamic_group_indices(&self) -> Vec<usize> {
        self.groups
            .iter()
            .enumerate()
            .filter(|(_, g)| g.temporality == Temporality::Dynamic)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn static_group_indices(&self) -> Vec<usize> {
        self.groups
            .iter()
            .enumerate()
            .filter(|(_, g)| g.temporality == Temporality::Static)
            .map(|(i, _)| i)
            .collect()
    }

    /// Total dynamic band count across groups.
    pub fn dynamic_band_count(&self) -> usize {
        self.dynamic_group_indices()
            .iter()
            .map(|&i| self.groups[i].bands.len())
            .sum()
    }

    pub fn static_band_count(&self) -> usize {
        self.static_group_indices()
            .iter()
            .map(|&i| self.groups[i].bands.len())
            .sum()
    }
}

// ── Labels and tasks ─────────────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CroplandLabel {
    Crop,
    NonCrop,
    Unknown,
}

/// Crop type taxonomy. Order is the canonical class order used everywhere
/// (argmax tie-breaks, report columns).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CropTypeLabel {
    Maize,
    Wheat,
    Barley,
    Soybeans,
    MilletSorghum,
    Sunflower,
    Rapeseed,
    OtherCrop,
    Unknown,
}

/// Class names for the crop type task, in taxonomy order.
pub const CROPTYPE_CLASSES: [&str; 8] = [
    "maize",
    "wheat",
    "barley",
    "soybeans",
    "millet_sorghum",
    "sunflower",
    "rapeseed",
    "other_crop",
];

/// Class names for the binary cropland task; "crop" is the positive class.
pub const CROPLAND_CLASSES: [&str; 2] = ["non_crop", "crop"];

impl CropTypeLabel {
    pub fn class_index(self) -> Option<usize> {
        match self {
            CropTypeLabel::Maize => Some(0),
            CropTypeLabel::Wheat => Some(1),
            CropTypeLabel::Barley => Some(2),
            CropTypeLabel::Soybeans => Some(3),
            CropTypeLabel::MilletSorghum => Some(4),
            CropTypeLabel::Sunflower => Some(5),
            CropTypeLabel::Rapeseed => Some(6),
            CropTypeLabel::OtherCrop => Some(7),
            CropTypeLabel::Unknown => None,
        }
    }

    pub fn from_class_index(idx: usize) -> Option<CropTypeLabel> {
        use CropTypeLabel::*;
        [Maize, Wheat, Barley, Soybeans, MilletSorghum, Sunflower, Rapeseed, OtherCrop]
            .get(idx)
            .copied()
    }
}

impl CroplandLabel {
    pub fn class_index(self) -> Option<usize> {
        match self {
            CroplandLabel::NonCrop => Some(0),
            CroplandLabel::Crop => Some(1),
            CroplandLabel::Unknown => None,
        }
    }
}

/// The two classification tasks the harness supports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    CroplandBinary,
    CroptypeMulticlass,
}

impl Task {
    pub fn class_names(self) -> Vec<String> {
        match self {
            Task::CroplandBinary => CROPLAND_CLASSES.iter().map(|s| s.to_string()).collect(),
            Task::CroptypeMulticlass => CROPTYPE_CLASSES.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn n_classes(self) -> usize {
        match self {
            Task::CroplandBinary => 2,
            Task::CroptypeMulticlass => 8,
        }
    }

    /// Class index of a sample under this task, `None` when unlabeled.
    pub fn label_index(self, sample: &PixelSample) -> Option<usize> {
        match self {
            Task::CroplandBinary => sample.label_cropland.class_index(),
            Task::CroptypeMulticlass => sample.label_croptype.class_index(),
        }
    }
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Task::CroplandBinary => write!(f, "cropland_binary"),
            Task::CroptypeMulticlass => write!(f, "croptype_multiclass"),
        }
    }
}

// ── Samples ──────────────────────────────────────────────────────────────────

/// Per-group payload of one sample.
#[derive(Debug, Clone, PartialEq)]
pub enum GroupData {
    Dynamic {
        /// `[timestep][band]`, `MASKED_SENTINEL` where mask is false.
        values: Array2<f64>,
        /// true = valid observation.
        mask: Array2<bool>,
    },
    Static {
        values: Array1<f64>,
    },
}

/// One labeled georeferenced pixel with an 18-month multi-sensor timeseries.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelSample {
    pub sample_id: String,
    pub lat: f64,
    pub lon: f64,
    /// ISO 3166-1 alpha-2 code.
    pub country: String,
    /// Reference year of the season.
    pub year: i32,
    pub source: String,
    /// 18 month-start dates, consecutive.
    pub timestamps: Vec<NaiveDate>,
    /// Parallel to the schema's groups.
    pub groups: Vec<GroupData>,
    pub label_cropland: CroplandLabel,
    pub label_croptype: CropTypeLabel,
}

impl PixelSample {
    /// Validates this sample against a schema; `id` context is included in
    /// any error.
    pub fn validate(&self, schema: &BandSchema) -> Result<()> {
        let err = |reason: String| Err(Error::record(self.sample_id.clone(), reason));
        if !(-90.0..=90.0).contains(&self.lat) || !(-180.0..=180.0).contains(&self.lon) {
            return err(format!("lat/lon out of range: ({}, {})", self.lat, self.lon));
        }
        if self.timestamps.len() != TIMESTEPS {
            return err(format!(
                "expected {TIMESTEPS} timesteps, got {}",
                self.timestamps.len()
            ));
        }
        for w in self.timestamps.windows(2) {
            if next_month(w[0]) != w[1] {
                return err(format!("timestamps not consecutive months: {} -> {}", w[0], w[1]));
            }
        }
        if self.timestamps.iter().any(|d| d.day() != 1) {
            return err("timestamps must be month-start dates".into());
        }
        if self.groups.len() != schema.groups().len() {
            return err(format!(
                "expected {} band groups, got {}",
                schema.groups().len(),
                self.groups.len()
            ));
        }
        for (g, spec) in self.groups.iter().zip(schema.groups()) {
            match (g, spec.temporality) {
                (GroupData::Dynamic { values, mask }, Temporality::Dynamic) => {
                    let want = (TIMESTEPS, spec.bands.len());
                    if values.dim() != want || mask.dim() != want {
                        return err(format!(
                            "group {} shape {:?} != expected {:?}",
                            spec.name,
                            values.dim(),
                            want
                        ));
                    }
                }
                (GroupData::Static { values }, Temporality::Static) => {
                    if values.len() != spec.bands.len() {
                        return err(format!(
                            "static group {} has {} bands, expected {}",
                            spec.name,
                            values.len(),
                            spec.bands.len()
                        ));
                    }
                    if values.iter().any(|v| !v.is_finite()) {
                        return err(format!("static group {} has non-finite value", spec.name));
                    }
                }
                _ => {
                    return err(format!("group {} temporality mismatch", spec.name));
                }
            }
        }
        if self.label_croptype != CropTypeLabel::Unknown
            && self.label_cropland != CroplandLabel::Crop
        {
            return err("label_croptype set but label_cropland != crop".into());
        }
        Ok(())
    }

    /// Calendar month (0-based) of timestep `t`.
    pub fn month0(&self, t: usize) -> usize {
        self.timestamps[t].month0() as usize
    }
}

/// Advances a date by one calendar month (dates are month starts).
pub fn next_month(d: NaiveDate) -> NaiveDate {
    let (y, m) = (d.year(), d.month());
    if m == 12 {
        NaiveDate::from_ymd_opt(y + 1, 1, 1).expect("valid date")
    } else {
        NaiveDate::from_ymd_opt(y, m + 1, 1).expect("valid date")
    }
}

/// Builds `n` consecutive month-start dates from (year, month).
pub fn month_sequence(start_year: i32, start_month: u32, n: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(n);
    let mut d = NaiveDate::from_ymd_opt(start_year, start_month, 1).expect("valid start");
    for _ in 0..n {
        out.push(d);
        d = next_month(d);
    }
    out
}

// ── Dataset ──────────────────────────────────────────────────────────────────

/// Immutable, order-stable collection of samples under one schema.
#[derive(Debug, Clone)]
pub struct Dataset {
    schema: BandSchema,
    samples: Vec<PixelSample>,
    taxonomy_version: String,
    index: HashMap<String, usize>,
}

impl Dataset {
    pub fn new(schema: BandSchema, samples: Vec<PixelSample>) -> Result<Dataset> {
        let mut index = HashMap::with_capacity(samples.len());
        for (i, s) in samples.iter().enumerate() {
            s.validate(&schema)?;
            if index.insert(s.sample_id.clone(), i).is_some() {
                return Err(Error::record(s.sample_id.clone(), "duplicate sample_id"));
            }
        }
        Ok(Dataset {
            schema,
            samples,
            taxonomy_version: "croptype-v1".to_string(),
            index,
        })
    }

    pub fn schema(&self) -> &BandSchema {
        &self.schema
    }

    pub fn samples(&self) -> &[PixelSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn taxonomy_version(&self) -> &str {
        &self.taxonomy_version
    }

    pub fn get(&self, sample_id: &str) -> Option<&PixelSample> {
        self.index.get(sample_id).map(|&i| &self.samples[i])
    }

    pub fn contains(&self, sample_id: &str) -> bool {
        self.index.contains_key(sample_id)
    }

    /// Content hash over the canonical serialized form.
    pub fn canonical_hash(&self) -> String {
        io::canonical_hash(self)
    }

    /// Replaces sample payloads; used by normalization. Ids and order are
    /// preserved, so the index carries over.
    pub(crate) fn with_samples(&self, samples: Vec<PixelSample>) -> Dataset {
        debug_assert_eq!(samples.len(), self.samples.len());
        Dataset {
            schema: self.schema.clone(),
            samples,
            taxonomy_version: self.taxonomy_version.clone(),
            index: self.index.clone(),
        }
    }
}

/// Test instrumentation: overwrite every masked slot with `poison`. Any
/// downstream computation that illegally reads a masked value will visibly
/// change its output.
pub fn poison_masked_values(dataset: &Dataset, poison: f64) -> Dataset {
    let samples = dataset
        .samples()
        .iter()
        .map(|s| {
            let mut s = s.clone();
            for g in &mut s.groups {
                if let GroupData::Dynamic { values, mask } = g {
                    for (v, &m) in values.iter_mut().zip(mask.iter()) {
                        if !m {
                            *v = poison;
                        }
                    }
                }
            }
            s
        })
        .collect();
    dataset.with_samples(samples)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    fn dynamic_group(t: usize, bands: usize, fill: f64) -> GroupData {
        GroupData::Dynamic {
            values: Array2::from_elem((t, bands), fill),
            mask: Array2::from_elem((t, bands), true),
        }
    }

    pub(crate) fn sample_with_id(id: &str) -> PixelSample {
        let schema = BandSchema::canonical();
        let groups = schema
            .groups()
            .iter()
            .map(|g| match g.temporality {
                Temporality::Dynamic => dynamic_group(TIMESTEPS, g.bands.len(), 0.5),
                Temporality::Static => GroupData::Static {
                    values: Array1::from_elem(g.bands.len(), 100.0),
                },
            })
            .collect();
        PixelSample {
            sample_id: id.to_string(),
            lat: 50.0,
            lon: 4.0,
            country: "BE".to_string(),
            year: 2020,
            source: "test".to_string(),
            timestamps: month_sequence(2019, 10, TIMESTEPS),
            groups,
            label_cropland: CroplandLabel::Crop,
            label_croptype: CropTypeLabel::Maize,
        }
    }

    #[test]
    fn canonical_schema_counts() {
        let schema = BandSchema::canonical();
        assert_eq!(schema.groups().len(), 4);
        assert_eq!(schema.dynamic_band_count(), 14);
        assert_eq!(schema.static_band_count(), 2);
    }

    #[test]
    fn schema_rejects_duplicates() {
        let g = |name: &str| BandGroup {
            name: name.to_string(),
            bands: vec!["a".into()],
            temporality: Temporality::Dynamic,
        };
        assert!(BandSchema::new(vec![g("x"), g("x")]).is_err());
    }

    #[test]
    fn schema_requires_dynamic_group() {
        let g = BandGroup {
            name: "DEM".into(),
            bands: vec!["elev".into()],
            temporality: Temporality::Static,
        };
        assert!(BandSchema::new(vec![g]).is_err());
    }

    #[test]
    fn sample_validation_checks_timestep_count() {
        let mut s = sample_with_id("a");
        s.timestamps.truncate(12);
        let e = s.validate(&BandSchema::canonical()).unwrap_err();
        assert!(e.to_string().contains("expected 18"), "{e}");
    }

    #[test]
    fn sample_validation_checks_label_consistency() {
        let mut s = sample_with_id("a");
        s.label_cropland = CroplandLabel::NonCrop;
        assert!(s.validate(&BandSchema::canonical()).is_err());
    }

    #[test]
    fn dataset_rejects_duplicate_ids() {
        let schema = BandSchema::canonical();
        let e = Dataset::new(schema, vec![sample_with_id("a"), sample_with_id("a")]).unwrap_err();
        assert!(e.to_string().contains("duplicate"), "{e}");
    }

    #[test]
    fn month_sequence_wraps_year() {
        let seq = month_sequence(2020, 11, 4);
        assert_eq!(seq[0], NaiveDate::from_ymd_opt(2020, 11, 1).unwrap());
        assert_eq!(seq[3], NaiveDate::from_ymd_opt(2021, 2, 1).unwrap());
    }

    #[test]
    fn task_taxonomy_order() {
        assert_eq!(Task::CroptypeMulticlass.n_classes(), 8);
        assert_eq!(CROPTYPE_CLASSES[4], "millet_sorghum");
        assert_eq!(CropTypeLabel::MilletSorghum.class_index(), Some(4));
        assert_eq!(CropTypeLabel::from_class_index(7), Some(CropTypeLabel::OtherCrop));
        assert_eq!(CROPLAND_CLASSES[1], "crop");
    }
}
