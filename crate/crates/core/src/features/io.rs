//! CSV ingestion and export.
//!
//! Instrument files carry `date,close,high,low,volume,open_interest` with
//! ISO-8601 dates. A manifest `symbol,asset_class,class_slot,path` lists the
//! instruments; relative paths resolve against the manifest's directory.
//! Instruments are aligned on the intersection of their dates.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{AssetClass, AssetPanel, Bar, FeatureError, FeaturePanel, Instrument, FEATURE_NAMES, NUM_FEATURES};

#[derive(Debug, Deserialize, Serialize)]
struct BarRecord {
    date: String,
    close: f64,
    high: f64,
    low: f64,
    // absent for instruments without exchange volume or open interest
    #[serde(default)]
    volume: f64,
    #[serde(default)]
    open_interest: f64,
}

#[derive(Debug, Deserialize, Serialize)]
struct ManifestRecord {
    symbol: String,
    asset_class: String,
    class_slot: usize,
    path: String,
}

fn parse_err(path: &Path, reason: impl Into<String>) -> FeatureError {
    FeatureError::Parse {
        path: path.display().to_string(),
        reason: reason.into(),
    }
}

fn read_bars(path: &Path) -> Result<BTreeMap<NaiveDate, Bar>, FeatureError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| parse_err(path, e.to_string()))?;
    let mut out = BTreeMap::new();
    for rec in reader.deserialize::<BarRecord>() {
        let rec = rec.map_err(|e| parse_err(path, e.to_string()))?;
        let date = NaiveDate::parse_from_str(&rec.date, "%Y-%m-%d")
            .map_err(|e| parse_err(path, format!("date {:?}: {e}", rec.date)))?;
        let bar = Bar {
            close: rec.close,
            high: rec.high,
            low: rec.low,
            volume: rec.volume,
            open_interest: rec.open_interest,
        };
        if out.insert(date, bar).is_some() {
            return Err(parse_err(path, format!("duplicate date {date}")));
        }
    }
    Ok(out)
}

/// Instrument files referenced by a manifest, in manifest order.
pub fn manifest_files(manifest: &Path) -> Result<Vec<PathBuf>, FeatureError> {
    let base = manifest.parent().unwrap_or(Path::new("."));
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(manifest)
        .map_err(|e| parse_err(manifest, e.to_string()))?;
    reader
        .deserialize::<ManifestRecord>()
        .map(|rec| {
            let rec = rec.map_err(|e| parse_err(manifest, e.to_string()))?;
            Ok(base.join(rec.path))
        })
        .collect()
}

/// Loads every instrument in the manifest and aligns them on common dates.
pub fn read_panel(manifest: &Path) -> Result<AssetPanel, FeatureError> {
    let base = manifest.parent().unwrap_or(Path::new("."));
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(manifest)
        .map_err(|e| parse_err(manifest, e.to_string()))?;
    let mut loaded = Vec::new();
    for rec in reader.deserialize::<ManifestRecord>() {
        let rec = rec.map_err(|e| parse_err(manifest, e.to_string()))?;
        let asset_class: AssetClass = rec.asset_class.parse()?;
        let bars = read_bars(&base.join(&rec.path))?;
        loaded.push((rec.symbol, asset_class, rec.class_slot, bars));
    }
    if loaded.is_empty() {
        return Err(parse_err(manifest, "no instruments listed"));
    }
    let mut common: BTreeSet<NaiveDate> = loaded[0].3.keys().copied().collect();
    for (_, _, _, bars) in &loaded[1..] {
        common.retain(|d| bars.contains_key(d));
    }
    let dates: Vec<NaiveDate> = common.into_iter().collect();
    let instruments = loaded
        .into_iter()
        .map(|(symbol, asset_class, class_slot, bars)| Instrument {
            symbol,
            asset_class,
            class_slot,
            bars: dates.iter().map(|d| bars[d]).collect(),
        })
        .collect();
    AssetPanel::new(dates, instruments)
}

/// Writes one CSV per instrument plus `manifest.csv` into `dir`. Returns the
/// manifest path.
pub fn write_panel(panel: &AssetPanel, dir: &Path) -> Result<PathBuf, FeatureError> {
    std::fs::create_dir_all(dir)?;
    let manifest_path = dir.join("manifest.csv");
    let mut manifest = csv::Writer::from_path(&manifest_path)?;
    for inst in panel.instruments() {
        let file = format!("{}.csv", inst.symbol);
        let mut w = csv::Writer::from_path(dir.join(&file))?;
        for (date, bar) in panel.dates().iter().zip(&inst.bars) {
            w.serialize(BarRecord {
                date: date.format("%Y-%m-%d").to_string(),
                close: bar.close,
                high: bar.high,
                low: bar.low,
                volume: bar.volume,
                open_interest: bar.open_interest,
            })?;
        }
        w.flush()?;
        manifest.serialize(ManifestRecord {
            symbol: inst.symbol.clone(),
            asset_class: inst.asset_class.as_str().into(),
            class_slot: inst.class_slot,
            path: file,
        })?;
    }
    manifest.flush()?;
    Ok(manifest_path)
}

/// Audit dump: one row per date and instrument with the 20 raw features.
pub fn write_feature_dump<W: Write>(
    panel: &AssetPanel,
    features: &FeaturePanel,
    out: W,
) -> Result<(), FeatureError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["date", "symbol", "asset_class", "class_slot"];
    header.extend(FEATURE_NAMES);
    w.write_record(&header)?;
    for (t, date) in features.dates().iter().enumerate() {
        let z = features.z(t);
        for inst in panel.instruments() {
            let mut row = vec![
                date.format("%Y-%m-%d").to_string(),
                inst.symbol.clone(),
                inst.asset_class.to_string(),
                inst.class_slot.to_string(),
            ];
            for f in 0..NUM_FEATURES {
                row.push(z.get(&[f, inst.class_slot - 1, inst.asset_class.index()]).to_string());
            }
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_feature_dump_file(panel: &AssetPanel, features: &FeaturePanel, path: &Path) -> Result<(), FeatureError> {
    write_feature_dump(panel, features, File::create(path)?)
}
