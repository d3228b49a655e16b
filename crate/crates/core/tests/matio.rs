mod common;

use common::fuzz::{fuzz_case, matches};
use common::mat_writer::{header, write_mat, Options, Storage, Var};
use proptest::prelude::*;
use vibforge::matio::{extract_channel, parse_mat, read_signal_file, Endianness, MatError};

fn sample_vars() -> Vec<Var> {
    vec![
        Var::column(
            "X097_DE_time",
            (0..300).map(|i| (i as f64 * 0.1).sin()).collect(),
        ),
        Var::column("X097_FE_time", (0..300).map(|i| i as f64 * 0.25).collect()),
        Var {
            name: "X097RPM".into(),
            rows: 1,
            cols: 1,
            data: vec![1796.0],
            storage: Storage::Double,
        },
    ]
}

#[test]
fn dual_encoding_fixtures_decode_identically() {
    let vars = sample_vars();
    let plain = write_mat(
        &vars,
        Options {
            big_endian: false,
            compressed: false,
        },
    );
    let packed = write_mat(
        &vars,
        Options {
            big_endian: false,
            compressed: true,
        },
    );
    let a = parse_mat(&plain).unwrap();
    let b = parse_mat(&packed).unwrap();
    assert_eq!(a.variables.len(), 3);
    for (i, v) in vars.iter().enumerate() {
        assert!(matches(&a, i, v));
        assert!(matches(&b, i, v));
        assert_eq!(a.variables[i].data, b.variables[i].data);
        assert!(!a.variables[i].was_compressed);
        assert!(b.variables[i].was_compressed);
    }
}

#[test]
fn big_endian_file_decodes() {
    let vars = sample_vars();
    let f = parse_mat(&write_mat(
        &vars,
        Options {
            big_endian: true,
            compressed: false,
        },
    ))
    .unwrap();
    assert_eq!(f.endianness, Endianness::Big);
    assert!(vars.iter().enumerate().all(|(i, v)| matches(&f, i, v)));
}

#[test]
fn channel_pattern_picks_drive_end() {
    let f = parse_mat(&write_mat(
        &sample_vars(),
        Options {
            big_endian: false,
            compressed: true,
        },
    ))
    .unwrap();
    let de = extract_channel(&f, "*_DE_time", 12_000.0).unwrap();
    assert_eq!(de.len(), 300);
    assert!((de.samples()[10] - 1f64.sin()).abs() < 1e-15);
}

#[test]
fn signal_file_reads_through_extension() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("097.mat");
    std::fs::write(
        &path,
        write_mat(
            &sample_vars(),
            Options {
                big_endian: false,
                compressed: true,
            },
        ),
    )
    .unwrap();
    let ts = read_signal_file(&path, "*_FE_time", 12_000.0).unwrap();
    assert_eq!(ts.len(), 300);
    assert_eq!(ts.samples()[4], 1.0);
}

#[test]
fn header_only_is_empty_and_short_is_truncated() {
    assert!(parse_mat(&header(false)).unwrap().variables.is_empty());
    assert!(matches!(
        parse_mat(&header(false)[..100]),
        Err(MatError::TruncatedFile { .. })
    ));
}

#[test]
fn fuzz_corpus_yields_only_typed_errors() {
    let failures: Vec<String> = (0..500).filter_map(|c| fuzz_case(c).err()).collect();
    assert!(failures.is_empty(), "{failures:#?}");
}

fn storage() -> impl Strategy<Value = Storage> {
    prop_oneof![
        Just(Storage::Double),
        Just(Storage::Single),
        Just(Storage::Int32),
        Just(Storage::Int16),
        Just(Storage::Uint8),
    ]
}

fn var(i: usize) -> impl Strategy<Value = Var> {
    (
        storage(),
        1usize..30,
        1usize..3,
        "[A-Za-z][A-Za-z0-9_]{0,20}",
    )
        .prop_flat_map(move |(s, rows, cols, name)| {
            prop::collection::vec(-1e6f64..1e6, rows * cols).prop_map(move |raw| Var {
                name: format!("{name}{i}"),
                rows,
                cols,
                data: raw.into_iter().map(|v| s.quantize(v)).collect(),
                storage: s,
            })
        })
}

proptest! {
    #[test]
    fn writer_round_trip(
        a in var(0),
        b in var(1),
        two in any::<bool>(),
        big in any::<bool>(),
        compressed in any::<bool>(),
    ) {
        let vars = if two { vec![a, b] } else { vec![a] };
        let bytes = write_mat(&vars, Options { big_endian: big, compressed });
        let f = parse_mat(&bytes).unwrap();
        prop_assert_eq!(f.variables.len(), vars.len());
        for (i, v) in vars.iter().enumerate() {
            prop_assert!(matches(&f, i, v), "variable {} differs", i);
        }
    }
}
