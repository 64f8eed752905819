//! JSON-lines dataset ingestion and canonical serialization.
//!
//! One object per line. Dynamic groups are `[timestep][band]` arrays with
//! `null` at masked positions; the `mask` object carries the corresponding
//! booleans. Canonical form: UTF-8, LF line endings, object keys in struct
//! declaration order with band groups sorted alphabetically.

use super::{
    BandSchema, CropTypeLabel, CroplandLabel, Dataset, GroupData, PixelSample, Temporality,
    MASKED_SENTINEL,
};
use crate::{Error, Result};
use chrono::NaiveDate;
use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

#[derive(Debug, Serialize, Deserialize)]
struct WireRecord {
    sample_id: String,
    lat: f64,
    lon: f64,
    country: String,
    year: i32,
    source: String,
    timestamps: Vec<String>,
    bands: Map<String, Value>,
    mask: Map<String, Value>,
    label_cropland: CroplandLabel,
    label_croptype: CropTypeLabel,
}

fn sample_to_wire(s: &PixelSample, schema: &BandSchema) -> Result<WireRecord> {
    let mut bands = Map::new();
    let mut mask = Map::new();
    for (g, spec) in s.groups.iter().zip(schema.groups()) {
        match g {
            GroupData::Dynamic { values, mask: m } => {
                let mut rows = Vec::with_capacity(values.nrows());
                let mut mask_rows = Vec::with_capacity(values.nrows());
                for t in 0..values.nrows() {
                    let mut row = Vec::with_capacity(values.ncols());
                    let mut mrow = Vec::with_capacity(values.ncols());
                    for b in 0..values.ncols() {
                        if m[(t, b)] {
                            let v = values[(t, b)];
                            if !v.is_finite() {
                                return Err(Error::record(
                                    s.sample_id.clone(),
                                    format!("non-finite unmasked value in group {}", spec.name),
                                ));
                            }
                            row.push(Value::from(v));
                        } else {
                            row.push(Value::Null);
                        }
                        mrow.push(Value::from(m[(t, b)]));
                    }
                    rows.push(Value::from(row));
                    mask_rows.push(Value::from(mrow));
                }
                bands.insert(spec.name.clone(), Value::from(rows));
                mask.insert(spec.name.clone(), Value::from(mask_rows));
            }
            GroupData::Static { values } => {
                bands.insert(
                    spec.name.clone(),
                    Value::from(values.iter().copied().collect::<Vec<f64>>()),
                );
            }
        }
    }
    Ok(WireRecord {
        sample_id: s.sample_id.clone(),
        lat: s.lat,
        lon: s.lon,
        country: s.country.clone(),
        year: s.year,
        source: s.source.clone(),
        timestamps: s.timestamps.iter().map(|d| d.to_string()).collect(),
        bands,
        mask,
        label_cropland: s.label_cropland,
        label_croptype: s.label_croptype,
    })
}

fn wire_to_sample(rec: WireRecord, schema: &BandSchema) -> Result<PixelSample> {
    let id = rec.sample_id.clone();
    let rerr = |reason: String| Error::record(id.clone(), reason);

    let timestamps: Vec<NaiveDate> = rec
        .timestamps
        .iter()
        .map(|t| {
            t.parse::<NaiveDate>()
                .map_err(|e| rerr(format!("bad timestamp {t}: {e}")))
        })
        .collect::<Result<_>>()?;
    if timestamps.len() != super::TIMESTEPS {
        return Err(rerr(format!(
            "expected {} timesteps, got {}",
            super::TIMESTEPS,
            timestamps.len()
        )));
    }

    for key in rec.bands.keys() {
        if schema.group_index(key).is_none() {
            return Err(rerr(format!("unknown band group {key}")));
        }
    }

    let mut groups = Vec::with_capacity(schema.groups().len());
    for spec in schema.groups() {
        let payload = rec
            .bands
            .get(&spec.name)
            .ok_or_else(|| rerr(format!("missing band group {}", spec.name)))?;
        match spec.temporality {
            Temporality::Dynamic => {
                let rows = payload
                    .as_array()
                    .ok_or_else(|| rerr(format!("group {} must be an array", spec.name)))?;
                if rows.len() != super::TIMESTEPS {
                    return Err(rerr(format!(
                        "group {}: expected {} timesteps, got {}",
                        spec.name,
                        super::TIMESTEPS,
                        rows.len()
                    )));
                }
                let mask_rows = rec
                    .mask
                    .get(&spec.name)
                    .and_then(|m| m.as_array())
                    .ok_or_else(|| rerr(format!("missing mask for group {}", spec.name)))?;
                if mask_rows.len() != rows.len() {
                    return Err(rerr(format!("mask shape mismatch for group {}", spec.name)));
                }
                let nb = spec.bands.len();
                let mut values = Array2::from_elem((rows.len(), nb), MASKED_SENTINEL);
                let mut mask = Array2::from_elem((rows.len(), nb), false);
                for (t, (row, mrow)) in rows.iter().zip(mask_rows).enumerate() {
                    let row = row
                        .as_array()
                        .filter(|r| r.len() == nb)
                        .ok_or_else(|| rerr(format!("group {} row {t}: expected {nb} bands", spec.name)))?;
                    let mrow = mrow
                        .as_array()
                        .filter(|r| r.len() == nb)
                        .ok_or_else(|| rerr(format!("mask {} row {t}: expected {nb} entries", spec.name)))?;
                    for b in 0..nb {
                        let m = mrow[b]
                            .as_bool()
                            .ok_or_else(|| rerr(format!("mask {} [{t}][{b}] not boolean", spec.name)))?;
                        mask[(t, b)] = m;
                        match (&row[b], m) {
                            (Value::Null, false) => {}
                            (Value::Null, true) => {
                                return Err(rerr(format!(
                                    "group {} [{t}][{b}]: null value marked as observed",
                                    spec.name
                                )))
                            }
                            (v, true) => {
                                values[(t, b)] = v.as_f64().ok_or_else(|| {
                                    rerr(format!("group {} [{t}][{b}] not a number", spec.name))
                                })?;
                            }
                            (_, false) => {
                                return Err(rerr(format!(
                                    "group {} [{t}][{b}]: masked position carries a value",
                                    spec.name
                                )))
                            }
                        }
                    }
                }
                groups.push(GroupData::Dynamic { values, mask });
            }
            Temporality::Static => {
                let row = payload
                    .as_array()
                    .filter(|r| r.len() == spec.bands.len())
                    .ok_or_else(|| {
                        rerr(format!("static group {}: expected {} values", spec.name, spec.bands.len()))
                    })?;
                let values: Vec<f64> = row
                    .iter()
                    .map(|v| {
                        v.as_f64()
                            .ok_or_else(|| rerr(format!("static group {} has non-number", spec.name)))
                    })
                    .collect::<Result<_>>()?;
                groups.push(GroupData::Static { values: Array1::from(values) });
            }
        }
    }

    let sample = PixelSample {
        sample_id: rec.sample_id,
        lat: rec.lat,
        lon: rec.lon,
        country: rec.country,
        year: rec.year,
        source: rec.source,
        timestamps,
        groups,
        label_cropland: rec.label_cropland,
        label_croptype: rec.label_croptype,
    };
    sample.validate(schema)?;
    Ok(sample)
}

/// Loads a JSON-lines dataset. The whole load fails on the first offending
/// record, naming it and the reason.
pub fn load_dataset(path: impl AsRef<Path>, schema: &BandSchema) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut samples = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: WireRecord = serde_json::from_str(&line).map_err(|e| {
            Error::record(format!("line {}", lineno + 1), format!("malformed record: {e}"))
        })?;
        samples.push(wire_to_sample(rec, schema)?);
    }
    Dataset::new(schema.clone(), samples)
}

/// Canonical JSON-lines serialization of a dataset.
pub fn dataset_to_jsonl(dataset: &Dataset) -> Result<String> {
    let mut out = String::new();
    for s in dataset.samples() {
        let wire = sample_to_wire(s, dataset.schema())?;
        out.push_str(&serde_json::to_string(&wire)?);
        out.push('\n');
    }
    Ok(out)
}

/// Writes the canonical JSON-lines form to `path`.
pub fn write_dataset(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    for s in dataset.samples() {
        let wire = sample_to_wire(s, dataset.schema())?;
        serde_json::to_writer(&mut file, &wire)?;
        file.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

/// SHA-256 over the canonical serialization, hashing record by record.
pub fn canonical_hash(dataset: &Dataset) -> String {
    use sha2::{Digest, Sha256};
    let mut hasher = Sha256::new();
    for s in dataset.samples() {
        let wire = sample_to_wire(s, dataset.schema()).expect("valid dataset serializes");
        hasher.update(serde_json::to_string(&wire).expect("json").as_bytes());
        hasher.update(b"\n");
    }
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::super::tests::sample_with_id;
    use super::*;
    use crate::data::GroupData;

    fn toy_dataset(n: usize) -> Dataset {
        let samples = (0..n).map(|i| sample_with_id(&format!("s{i:03}"))).collect();
        Dataset::new(BandSchema::canonical(), samples).unwrap()
    }

    #[test]
    fn load_preserves_order_and_count() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ds.jsonl");
        write_dataset(&toy_dataset(3), &path).unwrap();
        let ds = load_dataset(&path, &BandSchema::canonical()).unwrap();
        assert_eq!(ds.len(), 3);
        let ids: Vec<_> = ds.samples().iter().map(|s| s.sample_id.as_str()).collect();
        assert_eq!(ids, vec!["s000", "s001", "s002"]);
    }

    #[test]
    fn roundtrip_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ds.jsonl");
        let mut ds = toy_dataset(2);
        // give it some masked entries and non-trivial floats
        let mut samples = ds.samples().to_vec();
        if let GroupData::Dynamic { values, mask } = &mut samples[0].groups[1] {
            mask[(2, 3)] = false;
            values[(2, 3)] = f64::NAN;
            values[(0, 0)] = 0.123456;
        }
        ds = Dataset::new(ds.schema().clone(), samples).unwrap();
        write_dataset(&ds, &path).unwrap();
        let bytes1 = std::fs::read(&path).unwrap();
        let reloaded = load_dataset(&path, &BandSchema::canonical()).unwrap();
        let path2 = dir.path().join("ds2.jsonl");
        write_dataset(&reloaded, &path2).unwrap();
        let bytes2 = std::fs::read(&path2).unwrap();
        assert_eq!(bytes1, bytes2);
        assert_eq!(ds.canonical_hash(), reloaded.canonical_hash());
    }

    #[test]
    fn wrong_timestep_count_names_record() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ds.jsonl");
        write_dataset(&toy_dataset(1), &path).unwrap();
        // truncate the S1 rows to 12 by rewriting the json
        let line = std::fs::read_to_string(&path).unwrap();
        let mut v: serde_json::Value = serde_json::from_str(line.trim()).unwrap();
        let arr = v["bands"]["S1"].as_array().unwrap()[..12].to_vec();
        v["bands"]["S1"] = serde_json::Value::from(arr);
        std::fs::write(&path, format!("{v}\n")).unwrap();
        let e = load_dataset(&path, &BandSchema::canonical()).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("s000"), "{msg}");
        assert!(msg.contains("expected 18"), "{msg}");
    }

    #[test]
    fn label_inconsistency_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ds.jsonl");
        write_dataset(&toy_dataset(1), &path).unwrap();
        let line = std::fs::read_to_string(&path).unwrap();
        let patched = line.replace("\"label_cropland\":\"crop\"", "\"label_cropland\":\"non_crop\"");
        assert_ne!(line, patched);
        std::fs::write(&path, patched).unwrap();
        let e = load_dataset(&path, &BandSchema::canonical()).unwrap_err();
        assert!(e.to_string().contains("label_croptype"), "{e}");
    }

    #[test]
    fn duplicate_ids_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ds.jsonl");
        write_dataset(&toy_dataset(1), &path).unwrap();
        let line = std::fs::read_to_string(&path).unwrap();
        std::fs::write(&path, format!("{line}{line}")).unwrap();
        let e = load_dataset(&path, &BandSchema::canonical()).unwrap_err();
        assert!(e.to_string().contains("duplicate"), "{e}");
    }

    #[test]
    fn unknown_group_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ds.jsonl");
        write_dataset(&toy_dataset(1), &path).unwrap();
        let line = std::fs::read_to_string(&path).unwrap();
        let mut v: serde_json::Value = serde_json::from_str(line.trim()).unwrap();
        v["bands"]["S3"] = serde_json::Value::from(vec![1.0]);
        std::fs::write(&path, format!("{v}\n")).unwrap();
        let e = load_dataset(&path, &BandSchema::canonical()).unwrap_err();
        assert!(e.to_string().contains("unknown band group S3"), "{e}");
    }

    #[test]
    fn masked_positions_written_as_null() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ds.jsonl");
        let ds = toy_dataset(1);
        let mut samples = ds.samples().to_vec();
        if let GroupData::Dynamic { values, mask } = &mut samples[0].groups[0] {
            mask[(0, 0)] = false;
            values[(0, 0)] = 1e30; // in-memory poison must not leak to disk
        }
        let ds = Dataset::new(ds.schema().clone(), samples).unwrap();
        write_dataset(&ds, &path).unwrap();
        let line = std::fs::read_to_string(&path).unwrap();
        let v: serde_json::Value = serde_json::from_str(line.trim()).unwrap();
        assert!(v["bands"]["S1"][0][0].is_null());
        assert_eq!(v["mask"]["S1"][0][0], serde_json::Value::from(false));
    }
}
