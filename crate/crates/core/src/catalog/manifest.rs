//! Catalog manifests: a UTF-8 CSV of recordings plus a companion JSON file of
//! dataset descriptors (`catalog.csv` pairs with `catalog.datasets.json`).
//! Empty CSV cells mean "absent".

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::{
    builtin_descriptors, Catalog, CatalogError, DatasetDescriptor, Quantity, RecordingMeta,
    SensorPosition, Severity, SEVERITY_CODE_UNIT,
};
use crate::HealthLabel;

pub const MANIFEST_HEADER: [&str; 14] = [
    "recording_id",
    "dataset_id",
    "equipment",
    "sampling_rate_hz",
    "duration_s",
    "shaft_speed_rpm",
    "load_value",
    "load_unit",
    "sensor_position",
    "label",
    "severity_value",
    "severity_unit",
    "source_file",
    "channel_pattern",
];

/// Companion descriptor file for a manifest path.
pub fn datasets_path(manifest: &Path) -> PathBuf {
    manifest.with_extension("datasets.json")
}

/// Loads and validates a catalog manifest.
///
/// Dataset descriptors come from the companion JSON file when it exists and
/// from the built-in adapters otherwise.
pub fn load_catalog(path: &Path) -> Result<Catalog, CatalogError> {
    let io = |source| CatalogError::Io {
        path: path.display().to_string(),
        source,
    };
    let text = std::fs::read(path).map_err(io)?;
    let companion = datasets_path(path);
    let datasets = if companion.exists() {
        let raw = std::fs::read(&companion).map_err(|source| CatalogError::Io {
            path: companion.display().to_string(),
            source,
        })?;
        serde_json::from_slice::<BTreeMap<String, DatasetDescriptor>>(&raw).map_err(|e| {
            CatalogError::Descriptors {
                path: companion.display().to_string(),
                reason: e.to_string(),
            }
        })?
    } else {
        builtin_descriptors()
    };
    read_catalog(&text[..], datasets)
}

/// Parses manifest CSV text against the given dataset descriptors.
pub fn read_catalog(
    reader: impl std::io::Read,
    datasets: BTreeMap<String, DatasetDescriptor>,
) -> Result<Catalog, CatalogError> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut records = csv.records();

    let header = match records.next() {
        Some(r) => r.map_err(|e| schema(0, "header", e.to_string()))?,
        None => return Err(schema(0, "header", "manifest is empty".into())),
    };
    for (i, expected) in MANIFEST_HEADER.iter().enumerate() {
        match header.get(i) {
            Some(found) if found.trim() == *expected => {}
            Some(found) => {
                return Err(schema(
                    0,
                    expected,
                    format!("header column {} is {found:?}", i + 1),
                ))
            }
            None => return Err(schema(0, expected, "missing column".into())),
        }
    }
    if header.len() > MANIFEST_HEADER.len() {
        return Err(schema(
            0,
            &header[MANIFEST_HEADER.len()],
            "unexpected extra column".into(),
        ));
    }

    let mut recordings = Vec::new();
    for (i, record) in records.enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| schema(row, "-", e.to_string()))?;
        if record.len() < MANIFEST_HEADER.len() {
            return Err(schema(
                row,
                MANIFEST_HEADER[record.len()],
                "missing field".into(),
            ));
        }
        if record.len() > MANIFEST_HEADER.len() {
            return Err(schema(
                row,
                &format!("#{}", MANIFEST_HEADER.len() + 1),
                "extra field".into(),
            ));
        }
        recordings.push(parse_row(row, &record)?);
    }
    Catalog::new(datasets, recordings)
}

fn schema(row: usize, field: &str, reason: String) -> CatalogError {
    CatalogError::Schema {
        row,
        field: field.to_string(),
        reason,
    }
}

fn parse_row(row: usize, rec: &csv::StringRecord) -> Result<RecordingMeta, CatalogError> {
    let field = |i: usize| rec[i].trim();
    let required = |i: usize| {
        let v = field(i);
        if v.is_empty() {
            Err(schema(
                row,
                MANIFEST_HEADER[i],
                "required field is empty".into(),
            ))
        } else {
            Ok(v.to_string())
        }
    };
    let number = |i: usize| -> Result<Option<f64>, CatalogError> {
        let v = field(i);
        if v.is_empty() {
            return Ok(None);
        }
        v.parse::<f64>()
            .map(Some)
            .map_err(|_| schema(row, MANIFEST_HEADER[i], format!("{v:?} is not a number")))
    };
    let required_number = |i: usize| {
        number(i)?.ok_or_else(|| schema(row, MANIFEST_HEADER[i], "required field is empty".into()))
    };

    let load = match (number(6)?, field(7)) {
        (Some(value), unit) => Some(Quantity::new(value, unit)),
        (None, "") => None,
        (None, _) => {
            return Err(schema(
                row,
                "load_value",
                "load_unit given without a value".into(),
            ))
        }
    };
    let fault_severity = match (field(10), field(11)) {
        ("", "") => None,
        ("", _) => {
            return Err(schema(
                row,
                "severity_value",
                "severity_unit given without a value".into(),
            ))
        }
        (code, SEVERITY_CODE_UNIT) => Some(Severity::Code(code.to_string())),
        (value, unit) => match value.parse::<f64>() {
            Ok(v) => Some(Severity::size(v, unit)),
            Err(_) => {
                return Err(schema(
                    row,
                    "severity_value",
                    format!(
                    "{value:?} is not numeric; use severity_unit {SEVERITY_CODE_UNIT:?} for codes"
                ),
                ))
            }
        },
    };
    let label = required(9)?
        .parse::<HealthLabel>()
        .map_err(|e| schema(row, "label", e.to_string()))?;

    Ok(RecordingMeta {
        recording_id: required(0)?,
        dataset_id: required(1)?,
        equipment: field(2).to_string(),
        sampling_rate: required_number(3)?,
        duration: required_number(4)?,
        shaft_speed: number(5)?,
        load,
        sensor_position: SensorPosition::parse(&required(8)?),
        label,
        fault_severity,
        source_file: required(12)?,
        channel_pattern: field(13).to_string(),
    })
}

/// Writes manifest CSV rows (header included) in the given order.
pub fn write_catalog_csv<'a>(
    writer: impl Write,
    recordings: impl Iterator<Item = &'a RecordingMeta>,
) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(MANIFEST_HEADER)?;
    for r in recordings {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let (load_value, load_unit) = match &r.load {
            Some(q) => (q.value.to_string(), q.unit.clone()),
            None => (String::new(), String::new()),
        };
        let (sev_value, sev_unit) = match &r.fault_severity {
            Some(Severity::Size(q)) => (q.value.to_string(), q.unit.clone()),
            Some(Severity::Code(c)) => (c.clone(), SEVERITY_CODE_UNIT.to_string()),
            None => (String::new(), String::new()),
        };
        w.write_record([
            r.recording_id.as_str(),
            &r.dataset_id,
            &r.equipment,
            &r.sampling_rate.to_string(),
            &r.duration.to_string(),
            &opt(r.shaft_speed),
            &load_value,
            &load_unit,
            r.sensor_position.as_str(),
            r.label.as_str(),
            &sev_value,
            &sev_unit,
            &r.source_file,
            &r.channel_pattern,
        ])?;
    }
    w.flush()
}

/// Writes the manifest (in catalog row order) and its companion descriptor file.
pub fn save_catalog(catalog: &Catalog, path: &Path) -> Result<(), CatalogError> {
    let io = |p: &Path| {
        let p = p.display().to_string();
        move |source| CatalogError::Io { path: p, source }
    };
    let mut buf = Vec::new();
    write_catalog_csv(&mut buf, catalog.recordings().iter()).map_err(io(path))?;
    std::fs::write(path, buf).map_err(io(path))?;
    let companion = datasets_path(path);
    let json = serde_json::to_vec_pretty(catalog.datasets()).expect("descriptors serialize");
    std::fs::write(&companion, json).map_err(io(&companion))
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "recording_id,dataset_id,equipment,sampling_rate_hz,duration_s,shaft_speed_rpm,load_value,load_unit,sensor_position,label,severity_value,severity_unit,source_file,channel_pattern\n";

    fn parse(body: &str) -> Result<Catalog, CatalogError> {
        read_catalog(format!("{HEADER}{body}").as_bytes(), builtin_descriptors())
    }

    #[test]
    fn three_valid_rows() {
        let c = parse(
            "a,cwru,SKF 6205-2RS,48000,10,1797,0,hp,DE,H,,,97.mat,*_DE_time\n\
             b,cwru,SKF 6205-2RS,48000,10,1797,0,hp,DE,I,0.007,in,109.mat,*_DE_time\n\
             c,paderborn,6204,64000,4,900,0.7,Nm,other,I,KI21,code,N09_M07_F10_KI21_9.mat,*\n",
        )
        .unwrap();
        assert_eq!(c.len(), 3);
        let b = c.get("b").unwrap();
        assert_eq!(b.fault_severity, Some(Severity::size(0.007, "in")));
        assert_eq!(b.load, Some(Quantity::new(0.0, "hp")));
        let p = c.get("c").unwrap();
        assert_eq!(p.fault_severity, Some(Severity::code("KI21")));
        assert_eq!(p.sensor_position, SensorPosition::Other("other".into()));
    }

    #[test]
    fn healthy_with_severity_names_row() {
        let err = parse(
            "a,cwru,x,48000,10,,0,hp,DE,I,0.007,in,1.mat,*\n\
             b,cwru,x,48000,10,,0,hp,DE,H,0.007,in,2.mat,*\n",
        )
        .unwrap_err();
        match err {
            CatalogError::InvariantViolation {
                row, recording_id, ..
            } => {
                assert_eq!(row, 2);
                assert_eq!(recording_id, "b");
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn unknown_dataset() {
        let err = parse("a,foo,x,48000,10,,,,DE,H,,,1.mat,*\n").unwrap_err();
        assert!(
            matches!(err, CatalogError::Schema { row: 1, ref field, .. } if field == "dataset_id")
        );
    }

    #[test]
    fn missing_and_extra_fields() {
        let err = parse("a,cwru,x,48000,10,,,,DE,H,,,1.mat\n").unwrap_err();
        assert!(
            matches!(err, CatalogError::Schema { row: 1, ref field, .. } if field == "channel_pattern"),
            "{err}"
        );
        let err = parse("a,cwru,x,48000,10,,,,DE,H,,,1.mat,*,extra\n").unwrap_err();
        assert!(matches!(err, CatalogError::Schema { row: 1, .. }), "{err}");
    }

    #[test]
    fn bad_header() {
        let err = read_catalog(&b"recording_id,dataset\n"[..], builtin_descriptors()).unwrap_err();
        assert!(matches!(err, CatalogError::Schema { row: 0, .. }));
    }

    #[test]
    fn non_numeric_rate() {
        let err = parse("a,cwru,x,fast,10,,,,DE,H,,,1.mat,*\n").unwrap_err();
        assert!(
            matches!(err, CatalogError::Schema { ref field, .. } if field == "sampling_rate_hz")
        );
    }
}
