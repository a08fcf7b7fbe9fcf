//! Loaders, export and splitting.

use std::fs;

use dtnet::data::{
    load_csv, load_idx, load_libsvm, one_hot, split, write_csv, CsvOptions, Dataset, RawTable,
};
use dtnet::Error;
use nalgebra::DMatrix;
use proptest::prelude::*;

#[test]
fn libsvm_exports_to_the_same_dense_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("a.svm");
    fs::write(&src, "1 1:0.5 3:-2\n2 2:1e-3\n1 3:7 # comment\n").unwrap();
    let table = load_libsvm(&src).unwrap();
    assert_eq!(table.features, DMatrix::from_column_slice(3, 3, &[
        0.5, 0.0, -2.0, 0.0, 1e-3, 0.0, 0.0, 0.0, 7.0,
    ]));
    let csv = dir.path().join("a.csv");
    write_csv(&csv, &table).unwrap();
    let back = load_csv(&csv, &CsvOptions::default()).unwrap();
    assert_eq!(back, table);
}

#[test]
fn libsvm_errors_carry_the_row() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("bad.svm");
    fs::write(&src, "1 1:0.5\n2 3:1 2:4\n").unwrap();
    match load_libsvm(&src) {
        Err(Error::Parse { row, .. }) => assert_eq!(row, 2),
        other => panic!("{other:?}"),
    }
}

fn idx_bytes(images: &[[u8; 4]], labels: &[u8]) -> (Vec<u8>, Vec<u8>) {
    let mut img = vec![0, 0, 8, 3];
    img.extend((images.len() as u32).to_be_bytes());
    img.extend(2u32.to_be_bytes());
    img.extend(2u32.to_be_bytes());
    for i in images {
        img.extend_from_slice(i);
    }
    let mut lab = vec![0, 0, 8, 1];
    lab.extend((labels.len() as u32).to_be_bytes());
    lab.extend_from_slice(labels);
    (img, lab)
}

#[test]
fn idx_pixels_are_scaled() {
    let dir = tempfile::tempdir().unwrap();
    let (img, lab) = idx_bytes(&[[0, 255, 51, 0], [255, 255, 0, 0]], &[7, 2]);
    let (ip, lp) = (dir.path().join("i"), dir.path().join("l"));
    fs::write(&ip, &img).unwrap();
    fs::write(&lp, &lab).unwrap();
    let t = load_idx(&ip, &lp).unwrap();
    assert_eq!(t.features.column(0).as_slice(), &[0.0, 1.0, 0.2, 0.0]);
    assert_eq!(t.labels, vec!["7", "2"]);

    fs::write(&ip, &img[..img.len() - 1]).unwrap();
    assert!(matches!(load_idx(&ip, &lp), Err(Error::Format { .. })));
}

#[test]
fn labels_keep_first_appearance_order() {
    let train = RawTable {
        features: DMatrix::zeros(1, 4),
        labels: vec!["b".into(), "a".into(), "b".into(), "c".into()],
    };
    let test = RawTable {
        features: DMatrix::zeros(1, 1),
        labels: vec!["z".into()],
    };
    assert!(matches!(Dataset::from_tables(train.clone(), test), Err(Error::Label(_))));
    let data = Dataset::from_tables(train.clone(), train).unwrap();
    assert_eq!(data.class_names.names, vec!["b", "a", "c"]);
    assert_eq!(data.y_train, vec![0, 1, 0, 2]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn csv_roundtrip(values in prop::collection::vec(-1e6..1e6f64, 1..60), p in 1usize..5) {
        let j = values.len() / p;
        prop_assume!(j >= 1);
        let table = RawTable {
            features: DMatrix::from_column_slice(p, j, &values[..p * j]),
            labels: (0..j).map(|i| format!("c{}", i % 3)).collect(),
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_csv(&path, &table).unwrap();
        let back = load_csv(&path, &CsvOptions::default()).unwrap();
        prop_assert!((back.features - &table.features).amax() <= 1e-12);
        prop_assert_eq!(back.labels, table.labels);
    }

    #[test]
    fn split_is_a_partition(labels in prop::collection::vec(0usize..4, 2..80), f in 0.05..0.95f64, seed in any::<u64>()) {
        let s = split(&labels, f, seed).unwrap();
        let mut all: Vec<usize> = s.train.iter().chain(&s.test).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..labels.len()).collect::<Vec<_>>());
        prop_assert_eq!(s, split(&labels, f, seed).unwrap());
    }

    #[test]
    fn one_hot_columns_sum_to_one(labels in prop::collection::vec(0usize..6, 1..40)) {
        let t = one_hot(&labels, 6).unwrap();
        for c in t.column_iter() {
            prop_assert_eq!(c.sum(), 1.0);
        }
    }
}
