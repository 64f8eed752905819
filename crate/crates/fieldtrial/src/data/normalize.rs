//! Per-band shift/scale normalization with mask awareness.
//!
//! Statistics are computed over unmasked values only. When used inside a
//! training pipeline the filtered variant restricts the statistics to the
//! train side so validation samples never leak into preprocessing.

use super::{Dataset, GroupData, PixelSample, SCALE_FLOOR};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Shift/scale pair for one band: `v' = (v - shift) / scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandStats {
    pub shift: f64,
    pub scale: f64,
}

/// Per-band normalization statistics, parallel to the schema's groups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub groups: Vec<Vec<BandStats>>,
}

impl NormStats {
    /// Identity statistics for a schema (shift 0, scale 1).
    pub fn identity(schema: &super::BandSchema) -> NormStats {
        NormStats {
            groups: schema
                .groups()
                .iter()
                .map(|g| vec![BandStats { shift: 0.0, scale: 1.0 }; g.bands.len()])
                .collect(),
        }
    }

    pub fn apply(&self, group: usize, band: usize, value: f64) -> f64 {
        let s = self.groups[group][band];
        (value - s.shift) / s.scale
    }

    fn validate(&self) -> Result<()> {
        for (gi, g) in self.groups.iter().enumerate() {
            for (bi, s) in g.iter().enumerate() {
                if !(s.scale > 0.0) {
                    return Err(Error::Config(format!(
                        "normalization scale must be > 0 (group {gi}, band {bi}: {})",
                        s.scale
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Inverse of [`NormStats::apply`].
pub fn denormalize_value(stats: &NormStats, group: usize, band: usize, value: f64) -> f64 {
    let s = stats.groups[group][band];
    value * s.scale + s.shift
}

/// Population mean/std per band over unmasked values of the whole dataset.
pub fn compute_normalization_stats(dataset: &Dataset) -> Result<NormStats> {
    compute_normalization_stats_filtered(dataset, |_| true)
}

/// Same as [`compute_normalization_stats`] but restricted to samples
/// accepted by `keep` (e.g. the train side of a split).
pub fn compute_normalization_stats_filtered(
    dataset: &Dataset,
    keep: impl Fn(&PixelSample) -> bool,
) -> Result<NormStats> {
    let schema = dataset.schema();
    // (count, sum) first pass; sum of squared deviations second pass.
    let mut acc: Vec<Vec<(usize, f64)>> = schema
        .groups()
        .iter()
        .map(|g| vec![(0usize, 0.0); g.bands.len()])
        .collect();

    let kept: Vec<&PixelSample> = dataset.samples().iter().filter(|s| keep(s)).collect();
    for s in &kept {
        for (gi, g) in s.groups.iter().enumerate() {
            match g {
                GroupData::Dynamic { values, mask } => {
                    for t in 0..values.nrows() {
                        for b in 0..values.ncols() {
                            if mask[(t, b)] {
                                acc[gi][b].0 += 1;
                                acc[gi][b].1 += values[(t, b)];
                            }
                        }
                    }
                }
                GroupData::Static { values } => {
                    for (b, v) in values.iter().enumerate() {
                        acc[gi][b].0 += 1;
                        acc[gi][b].1 += v;
                    }
                }
            }
        }
    }

    let means: Vec<Vec<f64>> = acc
        .iter()
        .enumerate()
        .map(|(gi, g)| {
            g.iter()
                .enumerate()
                .map(|(bi, &(n, sum))| {
                    if n == 0 {
                        Err(Error::Schema(format!(
                            "band {}/{} has zero unmasked observations",
                            schema.groups()[gi].name,
                            schema.groups()[gi].bands[bi]
                        )))
                    } else {
                        Ok(sum / n as f64)
                    }
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut sq: Vec<Vec<f64>> = means.iter().map(|g| vec![0.0; g.len()]).collect();
    for s in &kept {
        for (gi, g) in s.groups.iter().enumerate() {
            match g {
                GroupData::Dynamic { values, mask } => {
                    for t in 0..values.nrows() {
                        for b in 0..values.ncols() {
                            if mask[(t, b)] {
                                let d = values[(t, b)] - means[gi][b];
                                sq[gi][b] += d * d;
                            }
                        }
                    }
                }
                GroupData::Static { values } => {
                    for (b, v) in values.iter().enumerate() {
                        let d = v - means[gi][b];
                        sq[gi][b] += d * d;
                    }
                }
            }
        }
    }

    let groups = means
        .iter()
        .enumerate()
        .map(|(gi, g)| {
            g.iter()
                .enumerate()
                .map(|(bi, &mean)| {
                    let n = acc[gi][bi].0 as f64;
                    let std = (sq[gi][bi] / n).sqrt();
                    BandStats { shift: mean, scale: std.max(SCALE_FLOOR) }
                })
                .collect()
        })
        .collect();
    Ok(NormStats { groups })
}

/// Applies normalization to every unmasked value; masked slots are copied
/// verbatim (the sentinel stays untouched).
pub fn normalize(dataset: &Dataset, stats: &NormStats) -> Result<Dataset> {
    stats.validate()?;
    let samples = dataset
        .samples()
        .iter()
        .map(|s| {
            let mut s = s.clone();
            for (gi, g) in s.groups.iter_mut().enumerate() {
                match g {
                    GroupData::Dynamic { values, mask } => {
                        for t in 0..values.nrows() {
                            for b in 0..values.ncols() {
                                if mask[(t, b)] {
                                    values[(t, b)] = stats.apply(gi, b, values[(t, b)]);
                                }
                            }
                        }
                    }
                    GroupData::Static { values } => {
                        for (b, v) in values.iter_mut().enumerate() {
                            *v = stats.apply(gi, b, *v);
                        }
                    }
                }
            }
            s
        })
        .collect();
    Ok(dataset.with_samples(samples))
}
