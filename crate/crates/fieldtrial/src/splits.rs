//! Train/validation split construction and leakage auditing.
//!
//! Three strategies: seeded random, geographic (held-out countries), and
//! temporal (held-out years). Random assignment is keyed on a hash of the
//! sample id rather than file position, so re-exported datasets produce the
//! same split. Efficiency schedules model incremental injection of
//! out-of-distribution samples into the train side.

use crate::data::{Dataset, Task};
use crate::hashutil::stable_hash64;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;

/// Strategy plus its holdout payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "snake_case")]
pub enum SplitStrategy {
    Random { ratio: f64 },
    Geographic { held_out_countries: BTreeSet<String> },
    Temporal { held_out_years: BTreeSet<i32> },
}

impl SplitStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            SplitStrategy::Random { .. } => "random",
            SplitStrategy::Geographic { .. } => "geographic",
            SplitStrategy::Temporal { .. } => "temporal",
        }
    }
}

/// Immutable train/validation assignment with provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSplit {
    #[serde(flatten)]
    pub strategy: SplitStrategy,
    pub seed: u64,
    pub train_ids: Vec<String>,
    pub val_ids: Vec<String>,
}

impl DatasetSplit {
    pub fn train_id_set(&self) -> HashSet<&str> {
        self.train_ids.iter().map(|s| s.as_str()).collect()
    }

    pub fn val_id_set(&self) -> HashSet<&str> {
        self.val_ids.iter().map(|s| s.as_str()).collect()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<DatasetSplit> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Round-half-up count for the train side.
fn train_count(ratio: f64, n: usize) -> usize {
    (ratio * n as f64 + 0.5).floor() as usize
}

/// Seeded random split. `|train| = round(ratio * N)` with round half up.
/// Assignment is keyed on `stable_hash64(seed, sample_id)`, so it is
/// invariant to dataset permutation.
pub fn random_split(dataset: &Dataset, ratio: f64, seed: u64) -> Result<DatasetSplit> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::Split(format!("ratio must be in (0,1), got {ratio}")));
    }
    if dataset.len() < 2 {
        return Err(Error::Split("dataset needs at least 2 samples".into()));
    }
    let mut keyed: Vec<(u64, &str)> = dataset
        .samples()
        .iter()
        .map(|s| (stable_hash64(seed, s.sample_id.as_bytes()), s.sample_id.as_str()))
        .collect();
    keyed.sort_unstable();
    let n_train = train_count(ratio, keyed.len()).clamp(1, keyed.len() - 1);
    let (train, val) = keyed.split_at(n_train);
    Ok(DatasetSplit {
        strategy: SplitStrategy::Random { ratio },
        seed,
        train_ids: train.iter().map(|(_, id)| id.to_string()).collect(),
        val_ids: val.iter().map(|(_, id)| id.to_string()).collect(),
    })
}

/// Deterministic partition: validation = all samples from the held-out
/// countries, train = everything else.
pub fn geographic_split(
    dataset: &Dataset,
    held_out_countries: &BTreeSet<String>,
) -> Result<DatasetSplit> {
    if held_out_countries.is_empty() {
        return Err(Error::Split("held-out country set is empty".into()));
    }
    let mut train = Vec::new();
    let mut val = Vec::new();
    for s in dataset.samples() {
        if held_out_countries.contains(&s.country) {
            val.push(s.sample_id.clone());
        } else {
            train.push(s.sample_id.clone());
        }
    }
    if train.is_empty() || val.is_empty() {
        return Err(Error::Split(format!(
            "geographic split degenerate: {} train / {} val samples",
            train.len(),
            val.len()
        )));
    }
    Ok(DatasetSplit {
        strategy: SplitStrategy::Geographic { held_out_countries: held_out_countries.clone() },
        seed: 0,
        train_ids: train,
        val_ids: val,
    })
}

/// Deterministic partition keyed on the sample's reference year.
pub fn temporal_split(dataset: &Dataset, held_out_years: &BTreeSet<i32>) -> Result<DatasetSplit> {
    if held_out_years.is_empty() {
        return Err(Error::Split("held-out year set is empty".into()));
    }
    let mut train = Vec::new();
    let mut val = Vec::new();
    for s in dataset.samples() {
        if held_out_years.contains(&s.year) {
            val.push(s.sample_id.clone());
        } else {
            train.push(s.sample_id.clone());
        }
    }
    if train.is_empty() || val.is_empty() {
        return Err(Error::Split(format!(
            "temporal split degenerate: {} train / {} val samples",
            train.len(),
            val.len()
        )));
    }
    Ok(DatasetSplit {
        strategy: SplitStrategy::Temporal { held_out_years: held_out_years.clone() },
        seed: 0,
        train_ids: train,
        val_ids: val,
    })
}

// ── Label-efficiency schedules ───────────────────────────────────────────────

/// Incremental-injection schedule over a target region.
///
/// Region samples on the validation side are split once into an injection
/// pool and a reserved evaluation set (never injected), so regional
/// performance stays measurable at fraction 1.0. Step `i` injects the first
/// `floor(fraction_i * pool_size)` pool samples; steps are nested by
/// construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencySchedule {
    pub target_region: BTreeSet<String>,
    pub fractions: Vec<f64>,
    pub seed: u64,
    /// Nested ordered id lists; entry `i` is the injection set for step `i`.
    pub step_id_lists: Vec<Vec<String>>,
    /// Region samples reserved for evaluation, never injected.
    pub eval_ids: Vec<String>,
}

/// Fraction of region validation samples reserved for evaluation.
pub const SCHEDULE_EVAL_FRACTION: f64 = 0.5;

pub fn efficiency_schedule(
    dataset: &Dataset,
    base_split: &DatasetSplit,
    region: &BTreeSet<String>,
    fractions: &[f64],
    seed: u64,
) -> Result<EfficiencySchedule> {
    let SplitStrategy::Geographic { held_out_countries } = &base_split.strategy else {
        return Err(Error::Split("efficiency schedule requires a geographic base split".into()));
    };
    if !region.is_subset(held_out_countries) {
        return Err(Error::Split("region must be a subset of the held-out countries".into()));
    }
    for w in fractions.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::Split("fractions must be strictly increasing".into()));
        }
    }
    if fractions.iter().any(|f| !(0.0..=1.0).contains(f)) {
        return Err(Error::Split("fractions must lie in [0,1]".into()));
    }

    // Region samples currently on the validation side, in seeded hash order.
    let mut keyed: Vec<(u64, String)> = base_split
        .val_ids
        .iter()
        .filter(|id| {
            dataset
                .get(id)
                .map(|s| region.contains(&s.country))
                .unwrap_or(false)
        })
        .map(|id| (stable_hash64(seed, id.as_bytes()), id.clone()))
        .collect();
    if keyed.is_empty() {
        return Err(Error::Split("region has zero validation samples".into()));
    }
    keyed.sort_unstable();
    let ordered: Vec<String> = keyed.into_iter().map(|(_, id)| id).collect();

    // Reserve the tail for evaluation; the head is the injection pool.
    let n_eval = ((ordered.len() as f64) * SCHEDULE_EVAL_FRACTION).floor() as usize;
    let pool_len = ordered.len() - n_eval;
    let (pool, eval) = ordered.split_at(pool_len);

    let step_id_lists = fractions
        .iter()
        .map(|f| {
            let k = (f * pool.len() as f64).floor() as usize;
            pool[..k].to_vec()
        })
        .collect();

    Ok(EfficiencySchedule {
        target_region: region.clone(),
        fractions: fractions.to_vec(),
        seed,
        step_id_lists,
        eval_ids: eval.to_vec(),
    })
}

impl EfficiencySchedule {
    /// Applies step `i`: injected ids move from the validation side to the
    /// train side of the base split. Step with an empty injection list
    /// returns the base split unchanged.
    pub fn apply_step(&self, base_split: &DatasetSplit, step: usize) -> Result<DatasetSplit> {
        let inject: HashSet<&str> = self
            .step_id_lists
            .get(step)
            .ok_or_else(|| Error::Split(format!("schedule has no step {step}")))?
            .iter()
            .map(|s| s.as_str())
            .collect();
        let mut out = base_split.clone();
        out.val_ids.retain(|id| !inject.contains(id.as_str()));
        out.train_ids
            .extend(self.step_id_lists[step].iter().cloned());
        Ok(out)
    }
}

// ── Audit ────────────────────────────────────────────────────────────────────

/// Leakage and coverage report for a split. Violations are reported, never
/// thrown.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuditReport {
    pub strategy: String,
    pub disjoint: bool,
    pub overlap_ids: Vec<String>,
    /// Ids on the train side that violate the holdout (wrong country/year).
    pub purity_violations: Vec<String>,
    pub missing_ids: Vec<String>,
    /// Classes with validation support but zero train support, per task.
    pub coverage_warnings: Vec<String>,
    pub train_count: usize,
    pub val_count: usize,
    pub per_country: BTreeMap<String, (usize, usize)>,
    pub per_year: BTreeMap<i32, (usize, usize)>,
}

impl AuditReport {
    pub fn purity_pass(&self) -> bool {
        self.purity_violations.is_empty()
    }

    pub fn pass(&self) -> bool {
        self.disjoint && self.purity_pass() && self.missing_ids.is_empty()
    }

    /// Human-readable rendering.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("split audit ({})\n", self.strategy));
        out.push_str(&format!(
            "  sides: {} train / {} val, disjoint: {}\n",
            self.train_count, self.val_count, self.disjoint
        ));
        out.push_str(&format!(
            "  holdout purity: {}\n",
            if self.purity_pass() {
                "pass".to_string()
            } else {
                format!("FAIL ({} leaked: {:?})", self.purity_violations.len(), self.purity_violations)
            }
        ));
        if !self.missing_ids.is_empty() {
            out.push_str(&format!("  unknown ids: {:?}\n", self.missing_ids));
        }
        for w in &self.coverage_warnings {
            out.push_str(&format!("  coverage warning: {w}\n"));
        }
        out.push_str("  per-country (train/val):\n");
        for (c, (tr, va)) in &self.per_country {
            out.push_str(&format!("    {c}: {tr}/{va}\n"));
        }
        out.push_str("  per-year (train/val):\n");
        for (y, (tr, va)) in &self.per_year {
            out.push_str(&format!("    {y}: {tr}/{va}\n"));
        }
        out
    }
}

/// Audits disjointness, holdout purity, class coverage, and per-country /
/// per-year counts of a split against its dataset.
pub fn audit_split(dataset: &Dataset, split: &DatasetSplit) -> AuditReport {
    let train_set = split.train_id_set();
    let val_set = split.val_id_set();
    let overlap_ids: Vec<String> = split
        .train_ids
        .iter()
        .filter(|id| val_set.contains(id.as_str()))
        .cloned()
        .collect();
    let missing_ids: Vec<String> = split
        .train_ids
        .iter()
        .chain(split.val_ids.iter())
        .filter(|id| !dataset.contains(id))
        .cloned()
        .collect();

    let mut purity_violations = Vec::new();
    match &split.strategy {
        SplitStrategy::Geographic { held_out_countries } => {
            for id in &split.train_ids {
                if let Some(s) = dataset.get(id) {
                    if held_out_countries.contains(&s.country) {
                        purity_violations.push(id.clone());
                    }
                }
            }
        }
        SplitStrategy::Temporal { held_out_years } => {
            for id in &split.train_ids {
                if let Some(s) = dataset.get(id) {
                    if held_out_years.contains(&s.year) {
                        purity_violations.push(id.clone());
                    }
                }
            }
        }
        SplitStrategy::Random { .. } => {}
    }

    let mut per_country: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    let mut per_year: BTreeMap<i32, (usize, usize)> = BTreeMap::new();
    let mut class_counts: BTreeMap<(String, String), (usize, usize)> = BTreeMap::new();
    for s in dataset.samples() {
        let side = if train_set.contains(s.sample_id.as_str()) {
            0
        } else if val_set.contains(s.sample_id.as_str()) {
            1
        } else {
            continue;
        };
        let bump = |e: &mut (usize, usize)| if side == 0 { e.0 += 1 } else { e.1 += 1 };
        bump(per_country.entry(s.country.clone()).or_default());
        bump(per_year.entry(s.year).or_default());
        for task in [Task::CroplandBinary, Task::CroptypeMulticlass] {
            if let Some(ci) = task.label_index(s) {
                let name = task.class_names()[ci].clone();
                bump(class_counts.entry((task.to_string(), name)).or_default());
            }
        }
    }

    let coverage_warnings = class_counts
        .iter()
        .filter(|(_, (tr, va))| *tr == 0 && *va > 0)
        .map(|((task, class), (_, va))| {
            format!("{task}: class {class} absent from train ({va} val samples)")
        })
        .collect();

    AuditReport {
        strategy: split.strategy.name().to_string(),
        disjoint: overlap_ids.is_empty(),
        overlap_ids,
        purity_violations,
        missing_ids,
        coverage_warnings,
        train_count: split.train_ids.len(),
        val_count: split.val_ids.len(),
        per_country,
        per_year,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::tests::sample_with_id;
    use crate::data::{BandSchema, CropTypeLabel, CroplandLabel};

    fn dataset_with(countries_years: &[(&str, i32)]) -> Dataset {
        let samples = countries_years
            .iter()
            .enumerate()
            .map(|(i, (c, y))| {
                let mut s = sample_with_id(&format!("s{i:03}"));
                s.country = c.to_string();
                s.year = *y;
                s
            })
            .collect();
        Dataset::new(BandSchema::canonical(), samples).unwrap()
    }

    fn uniform_dataset(n: usize) -> Dataset {
        let spec: Vec<(&str, i32)> = (0..n).map(|i| ("BE", 2017 + (i % 5) as i32)).collect();
        dataset_with(&spec)
    }

    #[test]
    fn random_split_80_20() {
        let ds = uniform_dataset(10);
        let split = random_split(&ds, 0.8, 7).unwrap();
        assert_eq!(split.train_ids.len(), 8);
        assert_eq!(split.val_ids.len(), 2);
    }

    #[test]
    fn random_split_deterministic() {
        let ds = uniform_dataset(20);
        let a = random_split(&ds, 0.8, 3).unwrap();
        let b = random_split(&ds, 0.8, 3).unwrap();
        assert_eq!(a, b);
        let c = random_split(&ds, 0.8, 4).unwrap();
        assert_ne!(a.train_ids, c.train_ids);
    }

    #[test]
    fn random_split_rounds_half_up() {
        // ratio 0.5 over 3 samples: round(1.5) = 2 train / 1 val
        let ds = uniform_dataset(3);
        let split = random_split(&ds, 0.5, 0).unwrap();
        assert_eq!((split.train_ids.len(), split.val_ids.len()), (2, 1));
    }

    #[test]
    fn random_split_permutation_invariant() {
        let ds = uniform_dataset(12);
        let mut reversed: Vec<_> = ds.samples().to_vec();
        reversed.reverse();
        let ds_rev = Dataset::new(ds.schema().clone(), reversed).unwrap();
        let a = random_split(&ds, 0.75, 9).unwrap();
        let b = random_split(&ds_rev, 0.75, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn geographic_split_partitions_by_country() {
        let ds = dataset_with(&[("ES", 2020), ("ES", 2020), ("ES", 2021), ("LV", 2020), ("LV", 2021)]);
        let holdout: BTreeSet<String> = ["ES".to_string()].into();
        let split = geographic_split(&ds, &holdout).unwrap();
        assert_eq!(split.train_ids.len(), 2);
        assert_eq!(split.val_ids.len(), 3);
        for id in &split.train_ids {
            assert_eq!(ds.get(id).unwrap().country, "LV");
        }
    }

    #[test]
    fn geographic_split_rejects_empty_side() {
        let ds = dataset_with(&[("ES", 2020), ("ES", 2021)]);
        let holdout: BTreeSet<String> = ["ES".to_string()].into();
        assert!(geographic_split(&ds, &holdout).is_err());
    }

    #[test]
    fn temporal_split_holds_out_years() {
        let spec: Vec<(&str, i32)> = (0..10).map(|i| ("BE", 2017 + (i % 5) as i32)).collect();
        let ds = dataset_with(&spec);
        let holdout: BTreeSet<i32> = [2021].into();
        let split = temporal_split(&ds, &holdout).unwrap();
        for id in &split.val_ids {
            assert_eq!(ds.get(id).unwrap().year, 2021);
        }
        for id in &split.train_ids {
            assert_ne!(ds.get(id).unwrap().year, 2021);
        }
        // empty val side errors
        let bad: BTreeSet<i32> = [2030].into();
        assert!(temporal_split(&ds, &bad).is_err());
    }

    #[test]
    fn split_union_covers_dataset() {
        let ds = uniform_dataset(17);
        for split in [
            random_split(&ds, 0.7, 1).unwrap(),
            temporal_split(&ds, &[2021].into()).unwrap(),
        ] {
            let mut all: Vec<&str> =
                split.train_ids.iter().chain(&split.val_ids).map(|s| s.as_str()).collect();
            all.sort_unstable();
            let mut want: Vec<&str> = ds.samples().iter().map(|s| s.sample_id.as_str()).collect();
            want.sort_unstable();
            assert_eq!(all, want);
            assert!(split.train_id_set().is_disjoint(&split.val_id_set()));
        }
    }

    #[test]
    fn efficiency_schedule_nested_steps() {
        // 8 ES validation samples; eval reserve takes 4, pool is 4:
        // fractions [0, 0.5, 1] -> step sizes 0, 2, 4
        let mut spec = vec![("LV", 2020); 6];
        spec.extend(vec![("ES", 2020); 8]);
        let ds = dataset_with(&spec);
        let holdout: BTreeSet<String> = ["ES".to_string()].into();
        let split = geographic_split(&ds, &holdout).unwrap();
        let schedule =
            efficiency_schedule(&ds, &split, &holdout, &[0.0, 0.5, 1.0], 11).unwrap();
        assert_eq!(schedule.step_id_lists.len(), 3);
        assert_eq!(schedule.step_id_lists[0].len(), 0);
        assert_eq!(schedule.step_id_lists[1].len(), 2);
        assert_eq!(schedule.step_id_lists[2].len(), 4);
        assert_eq!(schedule.eval_ids.len(), 4);
        // nestedness: each step is a prefix of the next
        assert_eq!(schedule.step_id_lists[1][..], schedule.step_id_lists[2][..2]);

        // step 0 leaves the base split unchanged
        let s0 = schedule.apply_step(&split, 0).unwrap();
        assert_eq!(&s0, &split);
        // full injection moves the whole pool to train; eval reserve stays in val
        let s2 = schedule.apply_step(&split, 2).unwrap();
        assert_eq!(s2.train_ids.len(), split.train_ids.len() + 4);
        for id in &schedule.eval_ids {
            assert!(s2.val_ids.contains(id));
        }
    }

    #[test]
    fn efficiency_schedule_rejects_foreign_region() {
        let ds = dataset_with(&[("LV", 2020), ("ES", 2020), ("ES", 2021)]);
        let holdout: BTreeSet<String> = ["ES".to_string()].into();
        let split = geographic_split(&ds, &holdout).unwrap();
        let region: BTreeSet<String> = ["NG".to_string()].into();
        assert!(efficiency_schedule(&ds, &split, &region, &[0.5], 0).is_err());
    }

    #[test]
    fn audit_passes_clean_geographic_split() {
        let ds = dataset_with(&[("ES", 2020), ("ES", 2021), ("LV", 2020), ("LV", 2021)]);
        let split = geographic_split(&ds, &["ES".to_string()].into()).unwrap();
        let report = audit_split(&ds, &split);
        assert!(report.pass());
        assert!(report.purity_pass());
        assert_eq!(report.per_country["ES"], (0, 2));
        assert_eq!(report.per_country["LV"], (2, 0));
    }

    #[test]
    fn audit_names_planted_leak() {
        let ds = dataset_with(&[("ES", 2020), ("ES", 2021), ("LV", 2020), ("LV", 2021)]);
        let mut split = geographic_split(&ds, &["ES".to_string()].into()).unwrap();
        // corrupt: move one ES sample into train
        let leaked = split.val_ids.pop().unwrap();
        split.train_ids.push(leaked.clone());
        let report = audit_split(&ds, &split);
        assert!(!report.purity_pass());
        assert_eq!(report.purity_violations, vec![leaked]);
        assert!(report.to_text().contains("FAIL"));
    }

    #[test]
    fn audit_warns_on_missing_class() {
        // all maize samples end up in val: croptype coverage warning
        let mut samples = vec![];
        for (i, c) in ["ES", "ES", "LV", "LV"].iter().enumerate() {
            let mut s = sample_with_id(&format!("s{i}"));
            s.country = c.to_string();
            // LV samples carry wheat so only maize is absent from train
            if *c == "LV" {
                s.label_croptype = CropTypeLabel::Wheat;
                s.label_cropland = CroplandLabel::Crop;
            }
            samples.push(s);
        }
        let ds = Dataset::new(BandSchema::canonical(), samples).unwrap();
        let split = geographic_split(&ds, &["ES".to_string()].into()).unwrap();
        let report = audit_split(&ds, &split);
        assert!(report
            .coverage_warnings
            .iter()
            .any(|w| w.contains("maize")), "{:?}", report.coverage_warnings);
    }
}
