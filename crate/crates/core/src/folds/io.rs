//! CSV files for segment tables, fold plans and split manifests. Each starts
//! with one `# key=value ...` comment line carrying the provenance fields.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read, Write};

use super::{
    sort_segment_ids, DivisionKind, DivisionRule, FoldError, FoldPlan, Role, SegmentRecord,
    SegmentTable, SplitManifest,
};
use crate::HealthLabel;

pub const SEGMENTS_HEADER: [&str; 6] = [
    "segment_id",
    "recording_id",
    "dataset_id",
    "label",
    "load",
    "severity",
];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_segment_table(table: &SegmentTable, mut w: impl Write) -> Result<(), FoldError> {
    writeln!(w, "# catalog={}", table.catalog_hash)?;
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(SEGMENTS_HEADER)?;
    for r in &table.rows {
        csv.write_record([
            r.segment_id.as_str(),
            &r.recording_id,
            &r.dataset_id,
            r.label.as_str(),
            &opt(r.load),
            &opt(r.severity),
        ])?;
    }
    csv.flush()?;
    Ok(())
}

pub fn read_segment_table(r: impl Read) -> Result<SegmentTable, FoldError> {
    let (meta, records) = read_with_comment(r, &SEGMENTS_HEADER)?;
    let mut rows = Vec::with_capacity(records.len());
    for (line, rec) in records {
        let bad = |reason: String| FoldError::Parse { line, reason };
        let num = |s: &str| -> Result<Option<f64>, FoldError> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|e| bad(format!("{s:?}: {e}")))
            }
        };
        rows.push(SegmentRecord {
            segment_id: rec[0].clone(),
            recording_id: rec[1].clone(),
            dataset_id: rec[2].clone(),
            label: rec[3]
                .parse::<HealthLabel>()
                .map_err(|e| bad(e.to_string()))?,
            load: num(&rec[4])?,
            severity: num(&rec[5])?,
        });
    }
    Ok(SegmentTable {
        rows,
        catalog_hash: meta.get("catalog").cloned().unwrap_or_default(),
    })
}

pub fn write_fold_plan(plan: &FoldPlan, mut w: impl Write) -> Result<(), FoldError> {
    let values: Vec<String> = plan.fold_values.iter().map(f64::to_string).collect();
    writeln!(
        w,
        "# rule={} round=0 seed=0 k={} values={} catalog={}",
        plan.rule.kind,
        plan.rule.k,
        values.join(";"),
        plan.catalog_hash
    )?;
    let mut ids: Vec<&String> = plan.assignment.keys().collect();
    sort_segment_ids(&mut ids);
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["segment_id", "fold"])?;
    for id in ids {
        csv.write_record([id.as_str(), &plan.assignment[id].to_string()])?;
    }
    csv.flush()?;
    Ok(())
}

pub fn read_fold_plan(r: impl Read) -> Result<FoldPlan, FoldError> {
    let (meta, records) = read_with_comment(r, &["segment_id", "fold"])?;
    let kind: DivisionKind = required(&meta, "rule")?.parse()?;
    let mut assignment = BTreeMap::new();
    for (line, rec) in records {
        let fold: usize = rec[1].parse().map_err(|e| FoldError::Parse {
            line,
            reason: format!("fold {:?}: {e}", rec[1]),
        })?;
        if assignment.insert(rec[0].clone(), fold).is_some() {
            return Err(FoldError::Parse {
                line,
                reason: format!("segment {} listed twice", rec[0]),
            });
        }
    }
    let max_fold = assignment.values().copied().max().unwrap_or(0);
    let k = match meta.get("k") {
        Some(k) => k.parse().map_err(|_| FoldError::Parse {
            line: 1,
            reason: format!("bad k {k:?}"),
        })?,
        None => max_fold,
    };
    if assignment.values().any(|&f| f == 0 || f > k) {
        return Err(FoldError::Parse {
            line: 1,
            reason: format!("fold indices must lie in 1..={k}"),
        });
    }
    let fold_values = match meta.get("values").filter(|v| !v.is_empty()) {
        Some(v) => v
            .split(';')
            .map(|x| {
                x.parse().map_err(|_| FoldError::Parse {
                    line: 1,
                    reason: format!("bad fold value {x:?}"),
                })
            })
            .collect::<Result<Vec<f64>, _>>()?,
        None => Vec::new(),
    };
    Ok(FoldPlan {
        rule: DivisionRule { kind, k },
        assignment,
        fold_values,
        catalog_hash: meta.get("catalog").cloned().unwrap_or_default(),
    })
}

pub fn write_split_manifest(split: &SplitManifest, mut w: impl Write) -> Result<(), FoldError> {
    writeln!(
        w,
        "# rule={} round={} seed={} val_fraction={}",
        split.kind, split.round, split.seed, split.val_fraction
    )?;
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["segment_id", "role"])?;
    for (id, role) in split.rows() {
        csv.write_record([id, role.as_str()])?;
    }
    csv.flush()?;
    Ok(())
}

pub fn read_split_manifest(r: impl Read) -> Result<SplitManifest, FoldError> {
    let (meta, records) = read_with_comment(r, &["segment_id", "role"])?;
    let kind: DivisionKind = required(&meta, "rule")?.parse()?;
    let parse_num = |key: &str| -> Result<String, FoldError> { Ok(required(&meta, key)?.clone()) };
    let bad_meta = |key: &str, v: &str| FoldError::Parse {
        line: 1,
        reason: format!("bad {key} {v:?}"),
    };
    let round_s = parse_num("round")?;
    let round: usize = round_s.parse().map_err(|_| bad_meta("round", &round_s))?;
    let seed_s = parse_num("seed")?;
    let seed: u64 = seed_s.parse().map_err(|_| bad_meta("seed", &seed_s))?;
    let val_fraction = match meta.get("val_fraction") {
        Some(v) => v.parse().map_err(|_| bad_meta("val_fraction", v))?,
        None => super::DEFAULT_VAL_FRACTION,
    };
    let mut split = SplitManifest {
        kind,
        round,
        seed,
        val_fraction,
        train: Vec::new(),
        val: Vec::new(),
        test: Vec::new(),
    };
    let mut seen = std::collections::HashSet::new();
    for (line, rec) in records {
        let role: Role = rec[1]
            .parse()
            .map_err(|reason| FoldError::Parse { line, reason })?;
        if !seen.insert(rec[0].clone()) {
            return Err(FoldError::Parse {
                line,
                reason: format!("segment {} listed twice", rec[0]),
            });
        }
        match role {
            Role::Train => split.train.push(rec[0].clone()),
            Role::Val => split.val.push(rec[0].clone()),
            Role::Test => split.test.push(rec[0].clone()),
        }
    }
    sort_segment_ids(&mut split.train);
    sort_segment_ids(&mut split.val);
    sort_segment_ids(&mut split.test);
    Ok(split)
}

fn required<'a>(meta: &'a BTreeMap<String, String>, key: &str) -> Result<&'a String, FoldError> {
    meta.get(key).ok_or_else(|| FoldError::Parse {
        line: 1,
        reason: format!("header comment lacks {key}="),
    })
}

type Rows = Vec<(usize, Vec<String>)>;

/// Splits off the optional leading `# k=v ...` line, then reads CSV rows
/// with the expected header. Line numbers are 1-based file lines.
fn read_with_comment(
    r: impl Read,
    header: &[&str],
) -> Result<(BTreeMap<String, String>, Rows), FoldError> {
    let mut reader = BufReader::new(r);
    let mut first = String::new();
    reader.read_line(&mut first)?;
    let mut meta = BTreeMap::new();
    let mut offset = 1;
    let mut rest = String::new();
    if let Some(comment) = first.trim_end().strip_prefix('#') {
        for token in comment.split_whitespace() {
            if let Some((k, v)) = token.split_once('=') {
                meta.insert(k.to_string(), v.to_string());
            }
        }
        offset = 2;
    } else {
        rest.push_str(&first);
    }
    reader.read_to_string(&mut rest)?;

    let mut csv = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(rest.as_bytes());
    let found: Vec<String> = csv.headers()?.iter().map(str::to_string).collect();
    if found != header {
        return Err(FoldError::Parse {
            line: offset,
            reason: format!(
                "expected header {}, found {}",
                header.join(","),
                found.join(",")
            ),
        });
    }
    let mut rows = Vec::new();
    for (i, rec) in csv.records().enumerate() {
        let rec = rec?;
        let line = offset + 1 + i;
        if rec.len() != header.len() {
            return Err(FoldError::Parse {
                line,
                reason: format!("expected {} fields, found {}", header.len(), rec.len()),
            });
        }
        rows.push((line, rec.iter().map(str::to_string).collect()));
    }
    Ok((meta, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::folds::make_splits;

    fn sample_plan() -> FoldPlan {
        let mut assignment = BTreeMap::new();
        for (i, f) in [1, 1, 2, 2, 3, 3].iter().enumerate() {
            assignment.insert(format!("r{}#{}", i / 2, i % 2 + 9), *f);
        }
        FoldPlan {
            rule: DivisionRule {
                kind: DivisionKind::BySeverity,
                k: 3,
            },
            assignment,
            fold_values: vec![0.007, 0.014, 0.021],
            catalog_hash: "abc".into(),
        }
    }

    #[test]
    fn plan_round_trip() {
        let p = sample_plan();
        let mut buf = Vec::new();
        write_fold_plan(&p, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# rule=BySeverity round=0 seed=0 k=3"));
        assert!(text.contains("\nr0#9,1\nr0#10,1\n"));
        assert_eq!(read_fold_plan(&buf[..]).unwrap(), p);
    }

    #[test]
    fn split_round_trip() {
        let s = make_splits(&sample_plan(), 2, 0.5, 4).unwrap();
        let mut buf = Vec::new();
        write_split_manifest(&s, &mut buf).unwrap();
        assert!(buf
            .starts_with(b"# rule=BySeverity round=2 seed=4 val_fraction=0.5\nsegment_id,role\n"));
        assert_eq!(read_split_manifest(&buf[..]).unwrap(), s);
    }

    #[test]
    fn segment_table_round_trip() {
        let t = SegmentTable {
            rows: vec![
                SegmentRecord {
                    segment_id: "a#0".into(),
                    recording_id: "a".into(),
                    dataset_id: "cwru".into(),
                    label: HealthLabel::H,
                    load: Some(2.0),
                    severity: None,
                },
                SegmentRecord {
                    segment_id: "b#0".into(),
                    recording_id: "b".into(),
                    dataset_id: "cwru".into(),
                    label: HealthLabel::B,
                    load: None,
                    severity: Some(0.014),
                },
            ],
            catalog_hash: "ff".into(),
        };
        let mut buf = Vec::new();
        write_segment_table(&t, &mut buf).unwrap();
        assert_eq!(read_segment_table(&buf[..]).unwrap(), t);
    }

    #[test]
    fn bad_role_reports_line() {
        let text = "# rule=ByLoad round=1 seed=0\nsegment_id,role\na#0,train\na#1,holdout\n";
        match read_split_manifest(text.as_bytes()) {
            Err(FoldError::Parse { line: 4, .. }) => {}
            other => panic!("{other:?}"),
        }
    }
}
