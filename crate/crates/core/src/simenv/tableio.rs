//! File formats: response tables and feature files are delimited text
//! (comma-separated, optional header); latency profiles are JSON maps
//! from provider name to per-state distributions.

use std::collections::BTreeMap;
use std::path::Path;

use crate::domain::{ProviderLatency, RawTable, TableRecord};
use crate::Error;

/// Reads a response-table file: columns query_id, provider, quality.
/// A header row is detected by a non-numeric quality field.
pub fn read_table_file(path: &Path) -> Result<RawTable, Error> {
    let display = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::parse(&display, e.to_string()))?;
    let mut records = Vec::new();
    for (line, row) in reader.records().enumerate() {
        let row = row.map_err(|e| Error::parse(&display, e.to_string()))?;
        if row.len() != 3 {
            return Err(Error::parse(
                &display,
                format!("line {}: expected 3 columns, got {}", line + 1, row.len()),
            ));
        }
        match row[2].parse::<f64>() {
            Ok(quality) => records.push(TableRecord {
                query_id: row[0].to_string(),
                provider: row[1].to_string(),
                quality,
            }),
            Err(_) if line == 0 => continue, // header row
            Err(_) => {
                return Err(Error::parse(
                    &display,
                    format!("line {}: quality '{}' is not a number", line + 1, &row[2]),
                ))
            }
        }
    }
    Ok(RawTable { records })
}

pub fn write_table_file(path: &Path, raw: &RawTable) -> Result<(), Error> {
    let display = path.display().to_string();
    let mut writer = csv::Writer::from_path(path).map_err(|e| Error::parse(&display, e.to_string()))?;
    writer
        .write_record(["query_id", "provider", "quality"])
        .map_err(|e| Error::parse(&display, e.to_string()))?;
    for record in &raw.records {
        writer
            .write_record([
                record.query_id.as_str(),
                record.provider.as_str(),
                &format!("{}", record.quality),
            ])
            .map_err(|e| Error::parse(&display, e.to_string()))?;
    }
    writer.flush().map_err(|e| Error::io(&display, e))?;
    Ok(())
}

/// Reads a feature file: query_id followed by exactly `dim` reals.
pub fn read_feature_file(path: &Path, dim: usize) -> Result<BTreeMap<String, Vec<f64>>, Error> {
    let display = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::parse(&display, e.to_string()))?;
    let mut map = BTreeMap::new();
    for (line, row) in reader.records().enumerate() {
        let row = row.map_err(|e| Error::parse(&display, e.to_string()))?;
        let parsed: Result<Vec<f64>, _> = row.iter().skip(1).map(str::parse::<f64>).collect();
        let values = match parsed {
            Ok(v) => v,
            Err(_) if line == 0 => continue, // header row
            Err(_) => {
                return Err(Error::parse(
                    &display,
                    format!("line {}: non-numeric feature value", line + 1),
                ))
            }
        };
        if values.len() != dim {
            return Err(Error::parse(
                &display,
                format!(
                    "line {}: expected {dim} feature values, got {}",
                    line + 1,
                    values.len()
                ),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::parse(
                &display,
                format!("line {}: features must be finite", line + 1),
            ));
        }
        map.insert(row[0].to_string(), values);
    }
    Ok(map)
}

/// Reads a latency profile: JSON map provider -> {idle, moderate, stressed},
/// each state either {median_ms, p95_ms} or {pool: [...]}.
pub fn read_latency_profile(path: &Path) -> Result<BTreeMap<String, ProviderLatency>, Error> {
    let display = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(&display, e))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(&display, e.to_string()))
}

pub fn write_latency_profile(
    path: &Path,
    profile: &BTreeMap<String, ProviderLatency>,
) -> Result<(), Error> {
    let display = path.display().to_string();
    let mut text = serde_json::to_string_pretty(profile).expect("profile serializes");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(&display, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::LatencyStateSpec;

    #[test]
    fn table_round_trip_with_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("table.csv");
        let raw = RawTable {
            records: vec![
                TableRecord {
                    query_id: "q1".into(),
                    provider: "a".into(),
                    quality: 0.75,
                },
                TableRecord {
                    query_id: "q1".into(),
                    provider: "b".into(),
                    quality: 0.0,
                },
            ],
        };
        write_table_file(&path, &raw).unwrap();
        let back = read_table_file(&path).unwrap();
        assert_eq!(back, raw);
    }

    #[test]
    fn headerless_table_parses_too() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("plain.csv");
        std::fs::write(&path, "q1,a,0.5\nq1,b,1\n").unwrap();
        let raw = read_table_file(&path).unwrap();
        assert_eq!(raw.records.len(), 2);
        assert_eq!(raw.records[1].quality, 1.0);
    }

    #[test]
    fn malformed_quality_is_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "q1,a,0.5\nq2,b,oops\n").unwrap();
        let err = read_table_file(&path).unwrap_err();
        assert!(err.to_string().contains("line 2"));
    }

    #[test]
    fn feature_file_enforces_dimension() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("features.csv");
        std::fs::write(&path, "query_id,f0,f1\nq1,0.5,-1\nq2,0,2.5\n").unwrap();
        let map = read_feature_file(&path, 2).unwrap();
        assert_eq!(map["q1"], vec![0.5, -1.0]);
        assert_eq!(map["q2"], vec![0.0, 2.5]);
        assert!(read_feature_file(&path, 3).is_err());
    }

    #[test]
    fn latency_profile_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("profile.json");
        let profile: BTreeMap<String, ProviderLatency> = [(
            "svc".to_string(),
            ProviderLatency {
                idle: LatencyStateSpec::Parametric {
                    median_ms: 715.0,
                    p95_ms: 809.0,
                },
                moderate: LatencyStateSpec::Parametric {
                    median_ms: 316.0,
                    p95_ms: 405.0,
                },
                stressed: LatencyStateSpec::Empirical {
                    pool: vec![305.0, 482.0, 377.0],
                },
            },
        )]
        .into_iter()
        .collect();
        write_latency_profile(&path, &profile).unwrap();
        let back = read_latency_profile(&path).unwrap();
        assert_eq!(back, profile);
    }
}
