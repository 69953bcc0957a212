//! Seeded synthetic data: Gaussian blobs at well-separated centers plus
//! uniform background noise, with ground-truth labels. Used by tests,
//! benchmarks, and the `generate` subcommand.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{ClifError, Result};
use crate::tabular::{ColumnSchema, Dataset, Value};

/// Shape of a synthetic dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct BlobSpec {
    pub n_blobs: usize,
    pub points_per_blob: usize,
    /// Standard deviation per blob; a single entry broadcasts to all blobs.
    pub spreads: Vec<f64>,
    pub n_noise: usize,
    pub dims: usize,
    pub seed: u64,
}

/// Generated points plus ground truth: blob index per row, -1 for noise.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedData {
    pub dataset: Dataset,
    pub truth: Vec<i64>,
}

/// Distance between consecutive blob centers.
const CENTER_SEPARATION: f64 = 1.0;

/// Margin the uniform noise extends beyond the span of the centers.
const NOISE_MARGIN: f64 = 1.0;

/// Generates `n_blobs` Gaussian blobs along the unit diagonal, centers
/// exactly one unit apart, plus uniform noise over the centers' bounding
/// box inflated by one unit per side. Everything is drawn from one seeded
/// generator, so equal specs give equal data.
pub fn generate_blobs(spec: &BlobSpec) -> Result<GeneratedData> {
    if spec.dims < 1 {
        return Err(ClifError::Config("dims must be >= 1".into()));
    }
    if spec.n_blobs == 0 && spec.n_noise == 0 {
        return Err(ClifError::Config("nothing to generate".into()));
    }
    if spec.n_blobs > 0 && spec.points_per_blob == 0 {
        return Err(ClifError::Config("points_per_blob must be >= 1".into()));
    }
    let spreads: Vec<f64> = match spec.spreads.len() {
        0 => return Err(ClifError::Config("at least one spread is required".into())),
        1 => vec![spec.spreads[0]; spec.n_blobs.max(1)],
        n if n == spec.n_blobs => spec.spreads.clone(),
        n => {
            return Err(ClifError::Config(format!(
                "{n} spreads for {} blobs",
                spec.n_blobs
            )))
        }
    };
    if spreads.iter().any(|&s| s <= 0.0 || !s.is_finite()) {
        return Err(ClifError::Config("spreads must be positive".into()));
    }

    let unit = 1.0 / (spec.dims as f64).sqrt();
    let center = |blob: usize| -> f64 { blob as f64 * CENTER_SEPARATION * unit };

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut points = Vec::with_capacity(spec.n_blobs * spec.points_per_blob + spec.n_noise);
    let mut truth = Vec::with_capacity(points.capacity());

    for (blob, &spread) in spreads.iter().enumerate().take(spec.n_blobs) {
        let normal =
            Normal::new(0.0, spread).map_err(|_| ClifError::Config("invalid spread".into()))?;
        let c = center(blob);
        for _ in 0..spec.points_per_blob {
            let row: Vec<f64> = (0..spec.dims)
                .map(|_| c + normal.sample(&mut rng))
                .collect();
            points.push(row);
            truth.push(blob as i64);
        }
    }
    let lo = -NOISE_MARGIN;
    let hi = center(spec.n_blobs.saturating_sub(1)) + NOISE_MARGIN;
    for _ in 0..spec.n_noise {
        let row: Vec<f64> = (0..spec.dims).map(|_| rng.random_range(lo..hi)).collect();
        points.push(row);
        truth.push(-1);
    }

    let columns: Vec<ColumnSchema> = (0..spec.dims)
        .map(|j| ColumnSchema::numerical(format!("f{j}")))
        .collect();
    let rows: Vec<Vec<Value>> = points
        .into_iter()
        .map(|p| p.into_iter().map(Value::Number).collect())
        .collect();
    let ids = (0..rows.len()).map(|i| i.to_string()).collect();
    let dataset = Dataset::new(columns, rows, ids)?;
    Ok(GeneratedData { dataset, truth })
}
