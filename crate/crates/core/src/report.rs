//! Machine-readable artifact emission: every stage's result is persisted as
//! plain CSV so runs can be inspected, diffed, and replotted without the
//! library. All writers are deterministic given their inputs.

use std::path::Path;

use crate::clif::ClifResult;
use crate::cluster::ClusterLabels;
use crate::error::{ClifError, Result};
use crate::featsel::{FeatureRanking, SelectionResult, SelectionSource};
use crate::pfi::PrincipalFeatureFinding;

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).map_err(|e| ClifError::csv(path.display().to_string(), e))
}

fn write_record<W: std::io::Write>(
    w: &mut csv::Writer<W>,
    path: &Path,
    record: &[String],
) -> Result<()> {
    w.write_record(record)
        .map_err(|e| ClifError::csv(path.display().to_string(), e))
}

fn finish<W: std::io::Write>(mut w: csv::Writer<W>, path: &Path) -> Result<()> {
    w.flush()
        .map_err(|e| ClifError::io(path.display().to_string(), e))
}

/// `feature,score,rank` with rank starting at 1.
pub fn write_ranking_csv(ranking: &FeatureRanking, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = writer(path)?;
    write_record(
        &mut w,
        path,
        &["feature".into(), "score".into(), "rank".into()],
    )?;
    for (rank, (feature, score)) in ranking.entries().iter().enumerate() {
        write_record(
            &mut w,
            path,
            &[feature.clone(), format!("{score}"), format!("{}", rank + 1)],
        )?;
    }
    finish(w, path)
}

/// `feature,source` in selection order.
pub fn write_selection_csv(selection: &SelectionResult, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = writer(path)?;
    write_record(&mut w, path, &["feature".into(), "source".into()])?;
    for (feature, source) in &selection.selected {
        write_record(&mut w, path, &[feature.clone(), source.to_string()])?;
    }
    finish(w, path)
}

/// Reads a selection file back into feature names (selection order).
pub fn read_selection_csv(path: impl AsRef<Path>) -> Result<SelectionResult> {
    let path = path.as_ref();
    let mut reader =
        csv::Reader::from_path(path).map_err(|e| ClifError::csv(path.display().to_string(), e))?;
    let mut selected = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| ClifError::csv(path.display().to_string(), e))?;
        let feature = record
            .get(0)
            .ok_or_else(|| ClifError::Data(format!("{}: empty selection row", path.display())))?
            .to_string();
        let source = match record.get(1) {
            Some("both") => SelectionSource::Both,
            Some("anova_fill") | None => SelectionSource::AnovaFill,
            Some(other) => {
                return Err(ClifError::Data(format!(
                    "{}: unknown selection source `{other}`",
                    path.display()
                )))
            }
        };
        selected.push((feature, source));
    }
    Ok(SelectionResult { selected })
}

fn cluster_class(record: &crate::clif::IterationRecord, cluster_id: usize) -> &'static str {
    if record
        .dense_extracted
        .iter()
        .any(|c| c.cluster_id == cluster_id)
    {
        "dense"
    } else if record
        .sparse_flagged
        .iter()
        .any(|c| c.cluster_id == cluster_id)
    {
        "sparse"
    } else {
        "other"
    }
}

/// `iteration,cluster_id,size,density,class` over every iteration's
/// clusters in density order.
pub fn write_iterations_csv(result: &ClifResult, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = writer(path)?;
    write_record(
        &mut w,
        path,
        &[
            "iteration".into(),
            "cluster_id".into(),
            "size".into(),
            "density".into(),
            "class".into(),
        ],
    )?;
    for record in &result.iterations {
        for info in &record.all_clusters {
            write_record(
                &mut w,
                path,
                &[
                    record.iteration.to_string(),
                    info.cluster_id.to_string(),
                    info.size.to_string(),
                    format!("{}", info.density),
                    cluster_class(record, info.cluster_id).to_string(),
                ],
            )?;
        }
    }
    finish(w, path)
}

/// `iteration,rank,cluster_id,size,density`: the density pattern data
/// behind the sorted-density charts, rank starting at 1 per iteration.
pub fn write_density_pattern_csv(result: &ClifResult, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = writer(path)?;
    write_record(
        &mut w,
        path,
        &[
            "iteration".into(),
            "rank".into(),
            "cluster_id".into(),
            "size".into(),
            "density".into(),
        ],
    )?;
    for record in &result.iterations {
        for (rank, info) in record.all_clusters.iter().enumerate() {
            write_record(
                &mut w,
                path,
                &[
                    record.iteration.to_string(),
                    (rank + 1).to_string(),
                    info.cluster_id.to_string(),
                    info.size.to_string(),
                    format!("{}", info.density),
                ],
            )?;
        }
    }
    finish(w, path)
}

/// `row_id,iteration,cluster_id,disposition`: for every iteration, what
/// happened to each row still alive in it. Dispositions are `extracted`
/// (dense member, removed), `flagged_sparse`, `retained` (member of some
/// other cluster), and `noise` (cluster_id -1).
pub fn write_assignments_csv(
    result: &ClifResult,
    row_ids: &[String],
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let mut w = writer(path)?;
    write_record(
        &mut w,
        path,
        &[
            "row_id".into(),
            "iteration".into(),
            "cluster_id".into(),
            "disposition".into(),
        ],
    )?;
    let n = row_ids.len();
    let mut alive = vec![true; n];
    for record in &result.iterations {
        // cluster id and disposition per clustered row
        let mut assignment: Vec<Option<(usize, &'static str)>> = vec![None; n];
        for info in &record.all_clusters {
            let class = cluster_class(record, info.cluster_id);
            let disposition = match class {
                "dense" => "extracted",
                "sparse" => "flagged_sparse",
                _ => "retained",
            };
            for &row in &info.member_rows {
                assignment[row] = Some((info.cluster_id, disposition));
            }
        }
        for row in 0..n {
            if !alive[row] {
                continue;
            }
            let (cluster_field, disposition) = match assignment[row] {
                Some((id, disposition)) => (id.to_string(), disposition),
                None => ("-1".to_string(), "noise"),
            };
            write_record(
                &mut w,
                path,
                &[
                    row_ids[row].clone(),
                    record.iteration.to_string(),
                    cluster_field,
                    disposition.to_string(),
                ],
            )?;
            if disposition == "extracted" {
                alive[row] = false;
            }
        }
    }
    finish(w, path)
}

/// `iteration,cluster_a,cluster_b,feature,distance,threshold,principal`.
pub fn write_pfi_csv(findings: &[PrincipalFeatureFinding], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = writer(path)?;
    write_record(
        &mut w,
        path,
        &[
            "iteration".into(),
            "cluster_a".into(),
            "cluster_b".into(),
            "feature".into(),
            "distance".into(),
            "threshold".into(),
            "principal".into(),
        ],
    )?;
    for f in findings {
        write_record(
            &mut w,
            path,
            &[
                f.iteration.to_string(),
                f.cluster_a.to_string(),
                f.cluster_b.to_string(),
                f.feature.clone(),
                format!("{}", f.distance),
                format!("{}", f.threshold_used),
                f.principal.to_string(),
            ],
        )?;
    }
    finish(w, path)
}

/// `row_id,label` with -1 for noise.
pub fn write_labels_csv(
    labels: &ClusterLabels,
    row_ids: &[String],
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    if labels.len() != row_ids.len() {
        return Err(ClifError::Data(format!(
            "{} labels for {} row ids",
            labels.len(),
            row_ids.len()
        )));
    }
    let mut w = writer(path)?;
    write_record(&mut w, path, &["row_id".into(), "label".into()])?;
    for (id, label) in row_ids.iter().zip(labels.labels()) {
        write_record(&mut w, path, &[id.clone(), label.to_string()])?;
    }
    finish(w, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::featsel::FeatureRanking;

    #[test]
    fn ranking_csv_includes_rank_column() {
        let ranking =
            FeatureRanking::from_scores(vec![("b".into(), 1.0), ("a".into(), f64::INFINITY)]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ranking.csv");
        write_ranking_csv(&ranking, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "feature,score,rank\na,inf,1\nb,1,2\n");
    }

    #[test]
    fn selection_csv_round_trip() {
        let selection = SelectionResult {
            selected: vec![
                ("f1".into(), SelectionSource::Both),
                ("f2".into(), SelectionSource::AnovaFill),
            ],
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("selection.csv");
        write_selection_csv(&selection, &path).unwrap();
        let back = read_selection_csv(&path).unwrap();
        assert_eq!(back, selection);
    }

    #[test]
    fn labels_csv_format() {
        let labels = ClusterLabels::from_labels(vec![0, -1]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("labels.csv");
        write_labels_csv(&labels, &["r1".into(), "r2".into()], &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "row_id,label\nr1,0\nr2,-1\n");
    }
}
