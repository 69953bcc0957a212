//! End-to-end library tests: the full preprocess -> select -> iterate ->
//! principal-features chain on synthetic data, plus cross-module
//! properties that no single module can check alone.

use std::collections::HashSet;
use std::io::Write;

use clif_core::tabular::{self, ColumnSchema, Value};
use clif_core::{
    ablation_rank, combine_select, generate_blobs, hdbscan, pfi_report, rank_anova, run_clif,
    BlobSpec, ClifConfig, Hdbscan, HdbscanParams, PfiThresholds, TerminalReason,
};

/// Writes a 32-column CSV (11 numerical, 21 categorical) whose categorical
/// cardinalities sum to 99, so encoding yields 11 + 99 = 110 features.
fn write_wide_csv(dir: &std::path::Path) -> (std::path::PathBuf, Vec<ColumnSchema>) {
    let cardinalities: Vec<usize> = std::iter::repeat_n(5, 15)
        .chain(std::iter::repeat_n(4, 6))
        .collect();
    assert_eq!(cardinalities.len(), 21);
    assert_eq!(cardinalities.iter().sum::<usize>(), 99);

    let mut schema = Vec::new();
    let mut header = Vec::new();
    for j in 0..11 {
        let name = format!("num{j}");
        header.push(name.clone());
        schema.push(ColumnSchema::numerical(name));
    }
    for (j, _) in cardinalities.iter().enumerate() {
        let name = format!("cat{j}");
        header.push(name.clone());
        schema.push(ColumnSchema::categorical(name));
    }

    let path = dir.join("wide.csv");
    let mut f = std::fs::File::create(&path).unwrap();
    writeln!(f, "{}", header.join(",")).unwrap();
    for row in 0..60 {
        let mut cells = Vec::new();
        for j in 0..11 {
            cells.push(format!("{}", (row * (j + 1)) % 17));
        }
        for (j, &card) in cardinalities.iter().enumerate() {
            cells.push(format!("v{}", (row + j) % card));
        }
        writeln!(f, "{}", cells.join(",")).unwrap();
    }
    (path, schema)
}

#[test]
fn wide_table_encodes_to_110_features() {
    let dir = tempfile::tempdir().unwrap();
    let (path, schema) = write_wide_csv(dir.path());
    let ds = tabular::load_csv(&path, &schema, None).unwrap();
    assert_eq!(ds.n_cols(), 32);
    let (processed, report) = tabular::preprocess(&ds).unwrap();
    assert_eq!(processed.n_cols(), 110);
    assert_eq!(report.encoding_map.len(), 21);
    assert_eq!(report.scaling_ranges.len(), 11);
    // every original categorical column is covered exactly once
    let derived_total: usize = report.encoding_map.values().map(Vec::len).sum();
    assert_eq!(derived_total, 99);
}

#[test]
fn one_hot_rows_sum_to_one_per_original_column() {
    let dir = tempfile::tempdir().unwrap();
    let (path, schema) = write_wide_csv(dir.path());
    let ds = tabular::load_csv(&path, &schema, None).unwrap();
    let (imputed, _) = tabular::impute(&ds).unwrap();
    let (encoded, report) = tabular::one_hot_encode(&imputed).unwrap();
    for (original, derived) in &report.encoding_map {
        let cols: Vec<usize> = derived
            .iter()
            .map(|name| encoded.column_index(name).unwrap())
            .collect();
        for i in 0..encoded.n_rows() {
            let sum: f64 = cols
                .iter()
                .map(|&j| encoded.cell(i, j).as_number().unwrap())
                .sum();
            assert_eq!(sum, 1.0, "row {i} of {original}");
        }
    }
}

/// Mixed-type table with missing cells and two planted groups, used for
/// the full pipeline run.
fn mixed_csv(dir: &std::path::Path) -> (std::path::PathBuf, std::path::PathBuf) {
    let path = dir.join("mixed.csv");
    let mut f = std::fs::File::create(&path).unwrap();
    writeln!(f, "ID,AGE,SCORE,GROUP,COLOR").unwrap();
    for i in 0..30 {
        // group a: young, reds; group b: old, blues; a few gaps
        let (age, group, color) = if i % 2 == 0 {
            ("25".to_string(), "a", if i % 6 == 0 { "" } else { "red" })
        } else {
            ("70".to_string(), "b", "blue")
        };
        let score = if i % 7 == 0 {
            String::new()
        } else {
            format!("{}", i % 5)
        };
        writeln!(f, "{i},{age},{score},{group},{color}").unwrap();
    }
    let schema_path = dir.join("mixed.schema");
    std::fs::write(
        &schema_path,
        "AGE,numerical\nSCORE,numerical\nGROUP,categorical\nCOLOR,categorical\n",
    )
    .unwrap();
    (path, schema_path)
}

#[test]
fn full_pipeline_on_mixed_table() {
    let dir = tempfile::tempdir().unwrap();
    let (csv_path, schema_path) = mixed_csv(dir.path());
    let schema = tabular::parse_schema_file(&schema_path).unwrap();
    let ds = tabular::load_csv(&csv_path, &schema, Some("ID")).unwrap();
    assert!(ds.missing_count() > 0);

    let (processed, report) = tabular::preprocess(&ds).unwrap();
    assert_eq!(processed.missing_count(), 0);
    // AGE, SCORE + GROUP{a,b} + COLOR{"",red->777...}: 777 formed a category
    let names = processed.column_names();
    assert!(names.contains(&"GROUP=a".to_string()));
    assert!(names.contains(&"COLOR=777".to_string()), "{names:?}");

    // feature selection against the planted GROUP indicator
    let anova = rank_anova(&processed, "GROUP=a").unwrap();
    let ablation = ablation_rank(&processed, "GROUP=a", 3, 41).unwrap();
    let selection = combine_select(&anova, &ablation, 3).unwrap();
    assert_eq!(selection.selected.len(), 3);
    // AGE separates the groups perfectly, so it must be selected
    assert!(selection.names().contains(&"AGE".to_string()));

    // the iteration loop runs on the selected features
    let scaled = processed.select_columns(&selection.names()).unwrap();
    let raw = tabular::unscale(&scaled, &report).unwrap();
    let params = HdbscanParams::new(5, 3).unwrap();
    let cfg = ClifConfig {
        clusterer: params,
        ..ClifConfig::default()
    };
    let result = run_clif(&scaled, &Hdbscan::new(params).unwrap(), &cfg).unwrap();
    assert!(!result.iterations.is_empty());

    // principal features for whatever was extracted
    for record in &result.iterations {
        let findings = pfi_report(
            record.iteration,
            &record.dense_extracted,
            &raw,
            &selection.names(),
            &PfiThresholds::default(),
        )
        .unwrap();
        if record.dense_extracted.len() >= 2 {
            let pairs = record.dense_extracted.len() * (record.dense_extracted.len() - 1) / 2;
            assert_eq!(findings.len(), pairs * selection.selected.len());
        } else {
            assert!(findings.is_empty());
        }
    }
}

#[test]
fn labels_invariant_under_row_permutation() {
    // distinct pairwise distances: clustering must not depend on row order
    let spec = BlobSpec {
        n_blobs: 2,
        points_per_blob: 25,
        spreads: vec![0.03],
        n_noise: 5,
        dims: 2,
        seed: 11,
    };
    let data = generate_blobs(&spec).unwrap();
    let matrix = data.dataset.to_matrix().unwrap();
    let params = HdbscanParams::new(8, 4).unwrap();
    let base = hdbscan(&matrix, &params).unwrap();

    // deterministic pseudo-shuffle
    let n = matrix.n_rows();
    let mut perm: Vec<usize> = (0..n).collect();
    for i in 0..n {
        let j = (i * 17 + 5) % n;
        perm.swap(i, j);
    }
    let rows: Vec<Vec<f64>> = perm.iter().map(|&i| matrix.row(i).to_vec()).collect();
    let shuffled = clif_core::FeatureMatrix::from_rows(rows);
    let permuted = hdbscan(&shuffled, &params).unwrap();

    assert_eq!(base.n_clusters(), permuted.n_clusters());
    // same partition up to relabeling
    let ari = clif_core::adjusted_rand_index(base.labels(), &{
        // undo the permutation
        let mut unshuffled = vec![0i64; n];
        for (new_pos, &orig) in perm.iter().enumerate() {
            unshuffled[orig] = permuted.labels()[new_pos];
        }
        unshuffled
    });
    assert!((ari - 1.0).abs() < 1e-12, "ARI {ari}");
}

#[test]
fn clif_planted_blob_in_noise_terminates_clean() {
    let spec = BlobSpec {
        n_blobs: 1,
        points_per_blob: 300,
        spreads: vec![0.005],
        n_noise: 300,
        dims: 4,
        seed: 3,
    };
    let data = generate_blobs(&spec).unwrap();
    let (scaled, _) = tabular::scale_minmax(&data.dataset).unwrap();
    let params = HdbscanParams::new(10, 5).unwrap();
    let cfg = ClifConfig {
        clusterer: params,
        ..ClifConfig::default()
    };
    let result = run_clif(&scaled, &Hdbscan::new(params).unwrap(), &cfg).unwrap();
    assert_eq!(result.terminal_reason, TerminalReason::NoDenseClusters);

    let extracted: HashSet<usize> = result.iterations[0]
        .dense_extracted
        .iter()
        .flat_map(|c| c.member_rows.iter().copied())
        .collect();
    let blob_recovered = (0..300).filter(|r| extracted.contains(r)).count();
    assert!(blob_recovered >= 285, "{blob_recovered}/300");
    // the final iteration records its empty dense set
    assert!(result.iterations.last().unwrap().dense_extracted.is_empty());
}

#[test]
fn encoded_csv_and_report_round_trip_through_disk() {
    let dir = tempfile::tempdir().unwrap();
    let (csv_path, schema_path) = mixed_csv(dir.path());
    let schema = tabular::parse_schema_file(&schema_path).unwrap();
    let ds = tabular::load_csv(&csv_path, &schema, Some("ID")).unwrap();
    let (processed, report) = tabular::preprocess(&ds).unwrap();

    let encoded_path = dir.path().join("encoded.csv");
    tabular::write_dataset_csv(&processed, &encoded_path).unwrap();
    let report_json = report.to_json();
    let report_back = tabular::PreprocessReport::from_json(&report_json).unwrap();
    assert_eq!(report_back, report);

    let back = tabular::read_encoded_csv(&encoded_path, &report_back).unwrap();
    assert_eq!(back.n_rows(), processed.n_rows());
    assert_eq!(back.column_names(), processed.column_names());
    assert_eq!(back.row_ids(), processed.row_ids());
    // kinds survive: scaled columns numerical, indicators categorical
    for (a, b) in back.columns().iter().zip(processed.columns()) {
        assert_eq!(a.kind, b.kind, "{}", a.name);
    }
    // cell values survive the float -> text -> float trip exactly
    for i in 0..back.n_rows() {
        for j in 0..back.n_cols() {
            assert_eq!(back.cell(i, j), processed.cell(i, j), "cell ({i},{j})");
        }
    }
    // raw units recoverable for principal-feature thresholds
    let raw = tabular::unscale(&back, &report_back).unwrap();
    let age = raw.column_index("AGE").unwrap();
    let ages: HashSet<i64> = (0..raw.n_rows())
        .map(|i| raw.cell(i, age).as_number().unwrap().round() as i64)
        .collect();
    assert_eq!(ages, HashSet::from([25, 70]));
}

#[test]
fn degenerate_duplicate_rows_cluster_as_one() {
    let columns = vec![ColumnSchema::numerical("x"), ColumnSchema::numerical("y")];
    let rows: Vec<Vec<Value>> = (0..12)
        .map(|_| vec![Value::Number(0.5), Value::Number(0.5)])
        .collect();
    let ids = (0..12).map(|i| i.to_string()).collect();
    let ds = tabular::Dataset::new(columns, rows, ids).unwrap();
    let matrix = ds.to_matrix().unwrap();
    let labels = hdbscan(&matrix, &HdbscanParams::new(6, 3).unwrap()).unwrap();
    assert_eq!(labels.n_clusters(), 1);
    assert_eq!(labels.noise_count(), 0);
    assert_eq!(labels.members_of(0).len(), 12);
}
