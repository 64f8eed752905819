//! Compositing: collapse irregular per-band observations into one value per
//! calendar month.
//!
//! Two modes model the two data-processing regimes an operational pipeline
//! can sit on: keep only cloud-free observations and average them, or take
//! the single least-cloudy observation in the window.

use super::{MASKED_SENTINEL, TAU_CLOUD};
use chrono::{Datelike, NaiveDate};

/// One raw acquisition for a single band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub date: NaiveDate,
    /// Cloud fraction in [0, 1]; 0 = clear.
    pub cloud_score: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompositeMode {
    /// Mean of observations with cloud score <= `TAU_CLOUD`; masked if none.
    CloudFreeOnly,
    /// Value of the single observation with minimal cloud score, ties broken
    /// by earliest date; masked only when the window is empty.
    LeastCloudy,
}

/// A calendar month window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonthWindow {
    pub year: i32,
    pub month: u32,
}

impl MonthWindow {
    pub fn contains(&self, d: NaiveDate) -> bool {
        d.year() == self.year && d.month() == self.month
    }
}

/// Composites one band over one month window. Returns `(value, mask)`;
/// empty or fully cloudy windows produce `(MASKED_SENTINEL, false)`.
pub fn composite_band(
    observations: &[Observation],
    mode: CompositeMode,
    window: MonthWindow,
) -> (f64, bool) {
    let in_window = observations.iter().filter(|o| window.contains(o.date));
    match mode {
        CompositeMode::CloudFreeOnly => {
            let mut sum = 0.0;
            let mut n = 0usize;
            for o in in_window.filter(|o| o.cloud_score <= TAU_CLOUD) {
                sum += o.value;
                n += 1;
            }
            if n == 0 {
                (MASKED_SENTINEL, false)
            } else {
                (sum / n as f64, true)
            }
        }
        CompositeMode::LeastCloudy => {
            let best = in_window.min_by(|a, b| {
                (a.cloud_score, a.date)
                    .partial_cmp(&(b.cloud_score, b.date))
                    .expect("cloud scores are finite")
            });
            match best {
                Some(o) => (o.value, true),
                None => (MASKED_SENTINEL, false),
            }
        }
    }
}

/// Composites one band over a sequence of month windows.
pub fn composite_series(
    observations: &[Observation],
    mode: CompositeMode,
    windows: &[MonthWindow],
) -> (Vec<f64>, Vec<bool>) {
    let mut values = Vec::with_capacity(windows.len());
    let mut mask = Vec::with_capacity(windows.len());
    for &w in windows {
        let (v, m) = composite_band(observations, mode, w);
        values.push(v);
        mask.push(m);
    }
    (values, mask)
}
