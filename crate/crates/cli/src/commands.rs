//! Subcommand implementations. Each stage reads its inputs, runs the
//! library operations, and persists artifacts plus a manifest into the
//! output directory.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clif_core::{
    clif::ClifConfig,
    cluster::{Hdbscan, HdbscanParams},
    error::{ClifError, Result},
    pfi::{pfi_report, PfiThresholds, PrincipalFeatureFinding},
    report, synth, tabular,
};
use serde_json::json;

use crate::manifest::RunManifest;
use crate::{GenerateArgs, IngestArgs, RunArgs, SelectArgs};

fn ensure_out_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| ClifError::Io {
        path: dir.display().to_string(),
        source: e,
    })
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ClifError + '_ {
    move |e| ClifError::Io {
        path: path.display().to_string(),
        source: e,
    }
}

/// `--report` default: preprocess_report.json next to the input dataset.
fn resolve_report_path(input: &Path, report: &Option<PathBuf>) -> PathBuf {
    report.clone().unwrap_or_else(|| {
        input
            .parent()
            .unwrap_or_else(|| Path::new("."))
            .join("preprocess_report.json")
    })
}

fn load_report(path: &Path) -> Result<tabular::PreprocessReport> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    tabular::PreprocessReport::from_json(&text)
}

pub fn ingest(args: IngestArgs) -> Result<()> {
    ensure_out_dir(&args.out_dir)?;
    let started = Instant::now();
    let schema = tabular::parse_schema_file(&args.schema)?;
    let ds = tabular::load_csv(&args.input, &schema, args.id_column.as_deref())?;
    let (processed, report) = tabular::preprocess(&ds)?;

    let encoded_path = args.out_dir.join("encoded.csv");
    let report_path = args.out_dir.join("preprocess_report.json");
    tabular::write_dataset_csv(&processed, &encoded_path)?;
    std::fs::write(&report_path, report.to_json()).map_err(io_err(&report_path))?;

    let mut manifest = RunManifest::new(json!({
        "command": "ingest",
        "input": args.input.display().to_string(),
        "schema": args.schema.display().to_string(),
        "id_column": args.id_column,
    }));
    manifest
        .record_input("input", &args.input)
        .map_err(io_err(&args.input))?;
    manifest
        .record_input("schema", &args.schema)
        .map_err(io_err(&args.schema))?;
    manifest.record_output(&encoded_path);
    manifest.record_output(&report_path);
    manifest.record_timing("ingest", started.elapsed());
    let manifest_path = args.out_dir.join("manifest.json");
    manifest
        .write(&manifest_path)
        .map_err(io_err(&manifest_path))?;

    println!(
        "ingested {} rows, {} -> {} columns",
        processed.n_rows(),
        ds.n_cols(),
        processed.n_cols()
    );
    Ok(())
}

pub fn select_features(args: SelectArgs) -> Result<()> {
    ensure_out_dir(&args.out_dir)?;
    let report_path = resolve_report_path(&args.input, &args.report);
    let preprocess = load_report(&report_path)?;
    let ds = tabular::read_encoded_csv(&args.input, &preprocess)?;

    let started = Instant::now();
    let anova = clif_core::rank_anova(&ds, &args.target)?;
    let anova_elapsed = started.elapsed();
    let ablation_started = Instant::now();
    let ablation = clif_core::ablation_rank(&ds, &args.target, args.folds, args.seed)?;
    let ablation_elapsed = ablation_started.elapsed();
    let selection = clif_core::combine_select(&anova, &ablation, args.top_k)?;

    let anova_path = args.out_dir.join("anova_ranking.csv");
    let ablation_path = args.out_dir.join("ablation_ranking.csv");
    let selection_path = args.out_dir.join("selection.csv");
    report::write_ranking_csv(&anova, &anova_path)?;
    report::write_ranking_csv(&ablation, &ablation_path)?;
    report::write_selection_csv(&selection, &selection_path)?;

    let mut manifest = RunManifest::new(json!({
        "command": "select-features",
        "input": args.input.display().to_string(),
        "report": report_path.display().to_string(),
        "target": args.target,
        "top_k": args.top_k,
        "folds": args.folds,
        "seed": args.seed,
    }));
    manifest
        .record_input("input", &args.input)
        .map_err(io_err(&args.input))?;
    manifest
        .record_input("report", &report_path)
        .map_err(io_err(&report_path))?;
    manifest.record_output(&anova_path);
    manifest.record_output(&ablation_path);
    manifest.record_output(&selection_path);
    manifest.record_timing("anova", anova_elapsed);
    manifest.record_timing("ablation", ablation_elapsed);
    let manifest_path = args.out_dir.join("manifest.json");
    manifest
        .write(&manifest_path)
        .map_err(io_err(&manifest_path))?;

    for (feature, source) in &selection.selected {
        println!("selected {feature} ({source})");
    }
    Ok(())
}

pub fn run(args: RunArgs) -> Result<()> {
    ensure_out_dir(&args.out_dir)?;
    let report_path = resolve_report_path(&args.input, &args.report);
    let preprocess = load_report(&report_path)?;
    let full = tabular::read_encoded_csv(&args.input, &preprocess)?;

    // restrict to the selected features; default is every feature
    let features: Vec<String> = match &args.selection {
        Some(path) => report::read_selection_csv(path)?
            .selected
            .into_iter()
            .map(|(name, _)| name)
            .collect(),
        None => full.column_names(),
    };
    let scaled = full.select_columns(&features)?;
    let raw = tabular::unscale(&scaled, &preprocess)?;

    let min_samples = args.min_samples.unwrap_or(args.min_cluster_size);
    let params = HdbscanParams::new(args.min_cluster_size, min_samples)?;
    let cfg = ClifConfig {
        dense_threshold: args.dense_threshold,
        sparse_low: args.sparse_low,
        sparse_min_size: args.sparse_min_size,
        k_neighbors: args.k_neighbors,
        max_iterations: args.max_iterations,
        clusterer: params,
        seed: args.seed,
    };
    let thresholds = PfiThresholds {
        categorical_cut: args.categorical_cut,
        numerical_fraction: args.numerical_fraction,
    };
    thresholds.validate()?;
    let clusterer = Hdbscan::new(params)?;

    let clif_started = Instant::now();
    let result = clif_core::run_clif(&scaled, &clusterer, &cfg)?;
    let clif_elapsed = clif_started.elapsed();

    // principal features per iteration, within the dense set and within
    // the flagged sparse set
    let pfi_started = Instant::now();
    let mut findings: Vec<PrincipalFeatureFinding> = Vec::new();
    for record in &result.iterations {
        findings.extend(pfi_report(
            record.iteration,
            &record.dense_extracted,
            &raw,
            &features,
            &thresholds,
        )?);
        findings.extend(pfi_report(
            record.iteration,
            &record.sparse_flagged,
            &raw,
            &features,
            &thresholds,
        )?);
    }
    let pfi_elapsed = pfi_started.elapsed();

    let iterations_path = args.out_dir.join("iterations.csv");
    let assignments_path = args.out_dir.join("assignments.csv");
    let density_path = args.out_dir.join("density_pattern.csv");
    let pfi_path = args.out_dir.join("principal_features.csv");
    report::write_iterations_csv(&result, &iterations_path)?;
    report::write_assignments_csv(&result, scaled.row_ids(), &assignments_path)?;
    report::write_density_pattern_csv(&result, &density_path)?;
    report::write_pfi_csv(&findings, &pfi_path)?;

    let mut manifest = RunManifest::new(json!({
        "command": "run",
        "input": args.input.display().to_string(),
        "report": report_path.display().to_string(),
        "selection": args.selection.as_ref().map(|p| p.display().to_string()),
        "features": features,
        "dense_threshold": cfg.dense_threshold,
        "sparse_low": cfg.sparse_low,
        "sparse_min_size": cfg.sparse_min_size,
        "k_neighbors": cfg.k_neighbors,
        "min_cluster_size": params.min_cluster_size,
        "min_samples": params.min_samples,
        "max_iterations": cfg.max_iterations,
        "categorical_cut": thresholds.categorical_cut,
        "numerical_fraction": thresholds.numerical_fraction,
        "seed": cfg.seed,
    }));
    manifest
        .record_input("input", &args.input)
        .map_err(io_err(&args.input))?;
    manifest
        .record_input("report", &report_path)
        .map_err(io_err(&report_path))?;
    if let Some(path) = &args.selection {
        manifest
            .record_input("selection", path)
            .map_err(io_err(path))?;
    }
    for path in [
        &iterations_path,
        &assignments_path,
        &density_path,
        &pfi_path,
    ] {
        manifest.record_output(path);
    }
    manifest.record_timing("clif", clif_elapsed);
    manifest.record_timing("pfi", pfi_elapsed);
    let manifest_path = args.out_dir.join("manifest.json");
    manifest
        .write(&manifest_path)
        .map_err(io_err(&manifest_path))?;

    for record in &result.iterations {
        println!(
            "iteration {}: {} clusters, {} dense, {} sparse, {} rows remaining",
            record.iteration,
            record.all_clusters.len(),
            record.dense_extracted.len(),
            record.sparse_flagged.len(),
            record.rows_remaining
        );
    }
    println!("terminated: {}", result.terminal_reason);
    Ok(())
}

pub fn generate(args: GenerateArgs) -> Result<()> {
    ensure_out_dir(&args.out_dir)?;
    let spec = synth::BlobSpec {
        n_blobs: args.blobs,
        points_per_blob: args.points_per_blob,
        spreads: args.spread.clone(),
        n_noise: args.noise,
        dims: args.dims,
        seed: args.seed,
    };
    let data = synth::generate_blobs(&spec)?;

    let data_path = args.out_dir.join("data.csv");
    tabular::write_dataset_csv(&data.dataset, &data_path)?;

    let truth_path = args.out_dir.join("truth.csv");
    let truth = clif_core::ClusterLabels::from_labels(data.truth.clone())?;
    report::write_labels_csv(&truth, data.dataset.row_ids(), &truth_path)?;

    let schema_path = args.out_dir.join("schema.txt");
    let schema_text: String = data
        .dataset
        .columns()
        .iter()
        .map(|c| format!("{},numerical\n", c.name))
        .collect();
    std::fs::write(&schema_path, schema_text).map_err(io_err(&schema_path))?;

    println!(
        "generated {} rows ({} blobs x {} + {} noise) in {} dims",
        data.dataset.n_rows(),
        args.blobs,
        args.points_per_blob,
        args.noise,
        args.dims
    );
    Ok(())
}
