//! Python bindings for the dense-cluster extraction pipeline: the distance
//! primitives, the clusterer, density scoring, and the iteration loop, all
//! operating on plain lists of floats.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use clif_core::tabular::{ColumnSchema, Dataset, Value};
use clif_core::{clif, cluster, density, featsel, matrix::FeatureMatrix, metrics, pfi, synth};

fn to_py_err(e: clif_core::ClifError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn matrix_from(points: Vec<Vec<f64>>) -> PyResult<FeatureMatrix> {
    if points.is_empty() {
        return Err(PyValueError::new_err("points must be nonempty"));
    }
    let cols = points[0].len();
    if points.iter().any(|row| row.len() != cols) {
        return Err(PyValueError::new_err("rows have inconsistent lengths"));
    }
    Ok(FeatureMatrix::from_rows(points))
}

/// Numeric dataset with positional row ids, for the iteration loop.
fn dataset_from(points: Vec<Vec<f64>>) -> PyResult<Dataset> {
    if points.is_empty() {
        return Err(PyValueError::new_err("points must be nonempty"));
    }
    let cols = points[0].len();
    let columns: Vec<ColumnSchema> = (0..cols)
        .map(|j| ColumnSchema::numerical(format!("f{j}")))
        .collect();
    let rows: Vec<Vec<Value>> = points
        .into_iter()
        .map(|row| row.into_iter().map(Value::Number).collect())
        .collect();
    let ids = (0..rows.len()).map(|i| i.to_string()).collect();
    Dataset::new(columns, rows, ids).map_err(to_py_err)
}

/// Exact 1-D Wasserstein distance between two samples.
#[pyfunction]
fn wasserstein_1d(a: Vec<f64>, b: Vec<f64>) -> PyResult<f64> {
    pfi::wasserstein_1d(&a, &b).map_err(to_py_err)
}

/// One-way ANOVA F statistic over the given groups.
#[pyfunction]
fn anova_f(groups: Vec<Vec<f64>>) -> PyResult<f64> {
    featsel::anova_f(&groups).map_err(to_py_err)
}

/// Index of the member minimizing total distance to the others.
#[pyfunction]
fn medoid(points: Vec<Vec<f64>>) -> PyResult<usize> {
    density::medoid(&matrix_from(points)?).map_err(to_py_err)
}

/// Density of a cluster around its medoid: 1 / (1 + mean distance to the
/// k nearest other members).
#[pyfunction]
#[pyo3(signature = (points, medoid_idx, k = 5))]
fn cluster_density(points: Vec<Vec<f64>>, medoid_idx: usize, k: usize) -> PyResult<f64> {
    density::cluster_density(&matrix_from(points)?, medoid_idx, k).map_err(to_py_err)
}

/// Cluster labels for the given points; -1 marks noise.
#[pyfunction]
#[pyo3(signature = (points, min_cluster_size = 5, min_samples = None))]
fn hdbscan(
    points: Vec<Vec<f64>>,
    min_cluster_size: usize,
    min_samples: Option<usize>,
) -> PyResult<Vec<i64>> {
    let params =
        cluster::HdbscanParams::new(min_cluster_size, min_samples.unwrap_or(min_cluster_size))
            .map_err(to_py_err)?;
    let labels = cluster::hdbscan(&matrix_from(points)?, &params).map_err(to_py_err)?;
    Ok(labels.labels().to_vec())
}

/// Chance-corrected agreement between two labelings (1 = identical).
#[pyfunction]
fn adjusted_rand_index(a: Vec<i64>, b: Vec<i64>) -> PyResult<f64> {
    if a.len() != b.len() {
        return Err(PyValueError::new_err("labelings must have equal length"));
    }
    Ok(metrics::adjusted_rand_index(&a, &b))
}

/// Seeded Gaussian blobs plus uniform noise; returns (points, truth).
#[pyfunction]
#[pyo3(signature = (n_blobs, points_per_blob, spreads, n_noise = 0, dims = 2, seed = 0))]
fn generate_blobs(
    n_blobs: usize,
    points_per_blob: usize,
    spreads: Vec<f64>,
    n_noise: usize,
    dims: usize,
    seed: u64,
) -> PyResult<(Vec<Vec<f64>>, Vec<i64>)> {
    let spec = synth::BlobSpec {
        n_blobs,
        points_per_blob,
        spreads,
        n_noise,
        dims,
        seed,
    };
    let data = synth::generate_blobs(&spec).map_err(to_py_err)?;
    let m = data.dataset.to_matrix().map_err(to_py_err)?;
    let points = (0..m.n_rows()).map(|i| m.row(i).to_vec()).collect();
    Ok((points, data.truth))
}

/// One cluster of one iteration.
#[pyclass(name = "ClusterInfo")]
#[derive(Clone)]
struct PyClusterInfo {
    #[pyo3(get)]
    cluster_id: usize,
    #[pyo3(get)]
    member_rows: Vec<usize>,
    #[pyo3(get)]
    medoid_row: usize,
    #[pyo3(get)]
    size: usize,
    #[pyo3(get)]
    density: f64,
}

#[pymethods]
impl PyClusterInfo {
    fn __repr__(&self) -> String {
        format!(
            "ClusterInfo(cluster_id={}, size={}, density={:.4})",
            self.cluster_id, self.size, self.density
        )
    }
}

impl From<&density::ClusterInfo> for PyClusterInfo {
    fn from(info: &density::ClusterInfo) -> Self {
        PyClusterInfo {
            cluster_id: info.cluster_id,
            member_rows: info.member_rows.clone(),
            medoid_row: info.medoid_row,
            size: info.size,
            density: info.density,
        }
    }
}

/// One pass of the extraction loop.
#[pyclass(name = "IterationRecord")]
#[derive(Clone)]
struct PyIterationRecord {
    #[pyo3(get)]
    iteration: usize,
    #[pyo3(get)]
    clusters: Vec<PyClusterInfo>,
    #[pyo3(get)]
    dense_extracted: Vec<PyClusterInfo>,
    #[pyo3(get)]
    sparse_flagged: Vec<PyClusterInfo>,
    #[pyo3(get)]
    rows_removed: Vec<String>,
    #[pyo3(get)]
    rows_remaining: usize,
}

#[pymethods]
impl PyIterationRecord {
    fn __repr__(&self) -> String {
        format!(
            "IterationRecord(iteration={}, clusters={}, dense={}, remaining={})",
            self.iteration,
            self.clusters.len(),
            self.dense_extracted.len(),
            self.rows_remaining
        )
    }
}

/// Full provenance of an extraction run.
#[pyclass(name = "ClifResult")]
struct PyClifResult {
    #[pyo3(get)]
    iterations: Vec<PyIterationRecord>,
    #[pyo3(get)]
    terminal_reason: String,
}

#[pymethods]
impl PyClifResult {
    fn __repr__(&self) -> String {
        format!(
            "ClifResult(iterations={}, terminal_reason='{}')",
            self.iterations.len(),
            self.terminal_reason
        )
    }
}

/// Runs the iterative dense-cluster extraction loop on a numeric matrix.
#[pyfunction]
#[pyo3(signature = (
    points,
    min_cluster_size = 5,
    min_samples = None,
    dense_threshold = 0.85,
    sparse_low = 0.65,
    sparse_min_size = None,
    k_neighbors = 5,
    max_iterations = 50,
    seed = 0,
))]
#[allow(clippy::too_many_arguments)]
fn run_clif(
    points: Vec<Vec<f64>>,
    min_cluster_size: usize,
    min_samples: Option<usize>,
    dense_threshold: f64,
    sparse_low: f64,
    sparse_min_size: Option<usize>,
    k_neighbors: usize,
    max_iterations: usize,
    seed: u64,
) -> PyResult<PyClifResult> {
    let ds = dataset_from(points)?;
    let params =
        cluster::HdbscanParams::new(min_cluster_size, min_samples.unwrap_or(min_cluster_size))
            .map_err(to_py_err)?;
    let cfg = clif::ClifConfig {
        dense_threshold,
        sparse_low,
        sparse_min_size,
        k_neighbors,
        max_iterations,
        clusterer: params,
        seed,
    };
    let clusterer = cluster::Hdbscan::new(params).map_err(to_py_err)?;
    let result = clif::run_clif(&ds, &clusterer, &cfg).map_err(to_py_err)?;
    Ok(PyClifResult {
        iterations: result
            .iterations
            .iter()
            .map(|r| PyIterationRecord {
                iteration: r.iteration,
                clusters: r.all_clusters.iter().map(PyClusterInfo::from).collect(),
                dense_extracted: r.dense_extracted.iter().map(PyClusterInfo::from).collect(),
                sparse_flagged: r.sparse_flagged.iter().map(PyClusterInfo::from).collect(),
                rows_removed: r.rows_removed.clone(),
                rows_remaining: r.rows_remaining,
            })
            .collect(),
        terminal_reason: result.terminal_reason.to_string(),
    })
}

#[pymodule]
fn clif_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(wasserstein_1d, m)?)?;
    m.add_function(wrap_pyfunction!(anova_f, m)?)?;
    m.add_function(wrap_pyfunction!(medoid, m)?)?;
    m.add_function(wrap_pyfunction!(cluster_density, m)?)?;
    m.add_function(wrap_pyfunction!(hdbscan, m)?)?;
    m.add_function(wrap_pyfunction!(adjusted_rand_index, m)?)?;
    m.add_function(wrap_pyfunction!(generate_blobs, m)?)?;
    m.add_function(wrap_pyfunction!(run_clif, m)?)?;
    m.add_class::<PyClusterInfo>()?;
    m.add_class::<PyIterationRecord>()?;
    m.add_class::<PyClifResult>()?;
    Ok(())
}
