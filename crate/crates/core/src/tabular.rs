//! Tabular preprocessing: CSV ingestion against a declared schema, missing
//! value imputation, one-hot encoding of categorical columns, and min-max
//! scaling of numerical columns.
//!
//! The stages are pure: each takes a [`Dataset`] and returns a new one plus a
//! [`PreprocessReport`] describing what changed, so any transformation can be
//! audited or reversed.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{ClifError, Result};
use crate::matrix::FeatureMatrix;

/// Token used to fill missing categorical cells, consistent with survey
/// coding conventions where reserved numeric codes mark non-responses.
pub const MISSING_CATEGORY_TOKEN: &str = "777";

// ── Schema ──────────────────────────────────────────────────────────────

/// Whether a column holds continuous numbers or discrete categories.
///
/// After one-hot encoding, derived indicator columns keep the `Categorical`
/// kind: it marks them as 0/1 indicators so later stages (scaling, principal
/// feature thresholds) can tell them apart from true numerical features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Numerical,
    Categorical,
}

impl fmt::Display for ColumnKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColumnKind::Numerical => write!(f, "numerical"),
            ColumnKind::Categorical => write!(f, "categorical"),
        }
    }
}

/// Declares one column of the input table: its name, kind, and the set of
/// raw tokens that mean "missing". The empty cell always counts as missing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSchema {
    pub name: String,
    pub kind: ColumnKind,
    #[serde(default)]
    pub missing_codes: BTreeSet<String>,
}

impl ColumnSchema {
    pub fn numerical(name: impl Into<String>) -> Self {
        ColumnSchema {
            name: name.into(),
            kind: ColumnKind::Numerical,
            missing_codes: BTreeSet::new(),
        }
    }

    pub fn categorical(name: impl Into<String>) -> Self {
        ColumnSchema {
            name: name.into(),
            kind: ColumnKind::Categorical,
            missing_codes: BTreeSet::new(),
        }
    }

    pub fn with_missing_codes<I, S>(mut self, codes: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.missing_codes.extend(codes.into_iter().map(Into::into));
        self
    }

    fn is_missing_token(&self, token: &str) -> bool {
        token.is_empty() || self.missing_codes.contains(token)
    }
}

/// Parses a schema file: one column per line, `name,kind[,code;code...]`.
/// Blank lines are skipped.
pub fn parse_schema_file(path: impl AsRef<Path>) -> Result<Vec<ColumnSchema>> {
    let path = path.as_ref();
    let text =
        std::fs::read_to_string(path).map_err(|e| ClifError::io(path.display().to_string(), e))?;
    parse_schema_text(&text)
}

/// Parses schema lines from a string. See [`parse_schema_file`].
pub fn parse_schema_text(text: &str) -> Result<Vec<ColumnSchema>> {
    let mut schemas = Vec::new();
    let mut seen = BTreeSet::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.splitn(3, ',');
        let name = parts.next().unwrap_or("").trim();
        let kind = parts.next().unwrap_or("").trim();
        if name.is_empty() || kind.is_empty() {
            return Err(ClifError::Schema(format!(
                "line {}: expected `name,kind[,codes]`, got `{line}`",
                lineno + 1
            )));
        }
        let kind = match kind {
            "numerical" => ColumnKind::Numerical,
            "categorical" => ColumnKind::Categorical,
            other => {
                return Err(ClifError::Schema(format!(
                    "line {}: unknown column kind `{other}` for `{name}`",
                    lineno + 1
                )))
            }
        };
        if !seen.insert(name.to_string()) {
            return Err(ClifError::Schema(format!(
                "duplicate column name `{name}` in schema"
            )));
        }
        let missing_codes: BTreeSet<String> = parts
            .next()
            .map(|codes| {
                codes
                    .split(';')
                    .map(str::trim)
                    .filter(|c| !c.is_empty())
                    .map(String::from)
                    .collect()
            })
            .unwrap_or_default();
        schemas.push(ColumnSchema {
            name: name.to_string(),
            kind,
            missing_codes,
        });
    }
    if schemas.is_empty() {
        return Err(ClifError::Schema("schema file declares no columns".into()));
    }
    Ok(schemas)
}

// ── Dataset ─────────────────────────────────────────────────────────────

/// A single table cell: a number, a raw categorical token, or missing.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Missing,
    Number(f64),
    Text(String),
}

impl Value {
    pub fn is_missing(&self) -> bool {
        matches!(self, Value::Missing)
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            Value::Number(x) => Some(*x),
            _ => None,
        }
    }
}

/// A column-schema'd table with stable per-row identifiers.
///
/// Every stage of the pipeline consumes and produces this shape. Rows are
/// stored row-major; `columns[j]` describes cell `rows[i][j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    columns: Vec<ColumnSchema>,
    rows: Vec<Vec<Value>>,
    row_ids: Vec<String>,
}

impl Dataset {
    /// Assembles a dataset from parts, checking the shape invariants:
    /// unique column names, unique row ids, one cell per column per row.
    pub fn new(
        columns: Vec<ColumnSchema>,
        rows: Vec<Vec<Value>>,
        row_ids: Vec<String>,
    ) -> Result<Self> {
        let mut names = BTreeSet::new();
        for c in &columns {
            if !names.insert(c.name.as_str()) {
                return Err(ClifError::Schema(format!(
                    "duplicate column name `{}`",
                    c.name
                )));
            }
        }
        if rows.len() != row_ids.len() {
            return Err(ClifError::Data(format!(
                "{} rows but {} row ids",
                rows.len(),
                row_ids.len()
            )));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != columns.len() {
                return Err(ClifError::Data(format!(
                    "row {i} has {} cells, expected {}",
                    row.len(),
                    columns.len()
                )));
            }
        }
        let mut ids = BTreeSet::new();
        for id in &row_ids {
            if !ids.insert(id.as_str()) {
                return Err(ClifError::Data(format!("duplicate row id `{id}`")));
            }
        }
        Ok(Dataset {
            columns,
            rows,
            row_ids,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[ColumnSchema] {
        &self.columns
    }

    pub fn column_names(&self) -> Vec<String> {
        self.columns.iter().map(|c| c.name.clone()).collect()
    }

    pub fn row_ids(&self) -> &[String] {
        &self.row_ids
    }

    pub fn cell(&self, row: usize, col: usize) -> &Value {
        &self.rows[row][col]
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// All values of one column, by index.
    pub fn column_values(&self, col: usize) -> impl Iterator<Item = &Value> {
        self.rows.iter().map(move |r| &r[col])
    }

    /// Number of missing cells over the whole table.
    pub fn missing_count(&self) -> usize {
        self.rows
            .iter()
            .map(|r| r.iter().filter(|v| v.is_missing()).count())
            .sum()
    }

    /// Returns the numeric feature matrix. Errors if any cell is missing or
    /// still textual, i.e. if the dataset has not been imputed and encoded.
    pub fn to_matrix(&self) -> Result<FeatureMatrix> {
        let mut data = Vec::with_capacity(self.n_rows() * self.n_cols());
        for (i, row) in self.rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                match v {
                    Value::Number(x) if x.is_finite() => data.push(*x),
                    Value::Number(_) => {
                        return Err(ClifError::Data(format!(
                            "non-finite value at row {i}, column `{}`",
                            self.columns[j].name
                        )))
                    }
                    _ => {
                        return Err(ClifError::Data(format!(
                            "column `{}` is not numeric at row {i}; impute and encode first",
                            self.columns[j].name
                        )))
                    }
                }
            }
        }
        Ok(FeatureMatrix::from_flat(data, self.n_rows(), self.n_cols()))
    }

    /// New dataset restricted to the named columns, in the given order.
    pub fn select_columns(&self, names: &[String]) -> Result<Dataset> {
        let mut idx = Vec::with_capacity(names.len());
        for name in names {
            let j = self
                .column_index(name)
                .ok_or_else(|| ClifError::Schema(format!("unknown column `{name}`")))?;
            idx.push(j);
        }
        let columns = idx.iter().map(|&j| self.columns[j].clone()).collect();
        let rows = self
            .rows
            .iter()
            .map(|r| idx.iter().map(|&j| r[j].clone()).collect())
            .collect();
        Dataset::new(columns, rows, self.row_ids.clone())
    }

    /// New dataset keeping only the given row indices, preserving order.
    pub fn select_rows(&self, indices: &[usize]) -> Dataset {
        Dataset {
            columns: self.columns.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            row_ids: indices.iter().map(|&i| self.row_ids[i].clone()).collect(),
        }
    }
}

// ── Preprocess report ───────────────────────────────────────────────────

/// Records everything the preprocessing stages did, keyed by column name:
/// how many cells were imputed, which means were used, how categorical
/// columns expanded, and the min/max ranges used for scaling.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PreprocessReport {
    /// Imputed cell count per original column.
    pub imputed_counts: BTreeMap<String, usize>,
    /// Mean substituted into each numerical column's gaps.
    pub column_means: BTreeMap<String, f64>,
    /// Original categorical column -> derived indicator column names.
    pub encoding_map: BTreeMap<String, Vec<String>>,
    /// (min, max) recorded for each scaled numerical column.
    pub scaling_ranges: BTreeMap<String, (f64, f64)>,
}

impl PreprocessReport {
    /// Folds another stage's report into this one.
    pub fn merge(&mut self, other: PreprocessReport) {
        for (k, v) in other.imputed_counts {
            *self.imputed_counts.entry(k).or_insert(0) += v;
        }
        self.column_means.extend(other.column_means);
        self.encoding_map.extend(other.encoding_map);
        self.scaling_ranges.extend(other.scaling_ranges);
    }

    /// Maps a scaled value back to raw units using the recorded range.
    pub fn unscale(&self, column: &str, scaled: f64) -> Option<f64> {
        let &(min, max) = self.scaling_ranges.get(column)?;
        Some(if max > min {
            min + scaled * (max - min)
        } else {
            min
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| ClifError::Data(format!("bad preprocess report: {e}")))
    }
}

// ── Operations ──────────────────────────────────────────────────────────

/// Loads a CSV file containing at least the schema'd columns.
///
/// Columns are returned in schema order; header columns not named by the
/// schema are ignored. Tokens matching a column's missing codes (or the
/// empty cell) are marked [`Value::Missing`]. When `id_column` names a
/// header column its raw tokens become the row ids; otherwise row ids are
/// the 0-based row index.
pub fn load_csv(
    path: impl AsRef<Path>,
    schema: &[ColumnSchema],
    id_column: Option<&str>,
) -> Result<Dataset> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_path(path)
        .map_err(|e| ClifError::csv(path.display().to_string(), e))?;

    let headers = reader
        .headers()
        .map_err(|e| ClifError::csv(path.display().to_string(), e))?
        .clone();
    let header_index: BTreeMap<&str, usize> =
        headers.iter().enumerate().map(|(i, h)| (h, i)).collect();

    let mut col_pos = Vec::with_capacity(schema.len());
    for col in schema {
        let pos = header_index
            .get(col.name.as_str())
            .copied()
            .ok_or_else(|| {
                ClifError::Schema(format!(
                    "schema column `{}` not present in header of {}",
                    col.name,
                    path.display()
                ))
            })?;
        col_pos.push(pos);
    }
    let id_pos = match id_column {
        Some(name) => Some(*header_index.get(name).ok_or_else(|| {
            ClifError::Schema(format!(
                "id column `{name}` not present in header of {}",
                path.display()
            ))
        })?),
        None => None,
    };

    let mut rows = Vec::new();
    let mut row_ids = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| ClifError::csv(path.display().to_string(), e))?;
        let mut row = Vec::with_capacity(schema.len());
        for (col, &pos) in schema.iter().zip(&col_pos) {
            let token = record.get(pos).unwrap_or("");
            row.push(parse_token(token, col, i)?);
        }
        row_ids.push(match id_pos {
            Some(pos) => record.get(pos).unwrap_or("").to_string(),
            None => i.to_string(),
        });
        rows.push(row);
    }
    Dataset::new(schema.to_vec(), rows, row_ids)
}

fn parse_token(token: &str, col: &ColumnSchema, row: usize) -> Result<Value> {
    if col.is_missing_token(token) {
        return Ok(Value::Missing);
    }
    match col.kind {
        ColumnKind::Numerical => match token.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(Value::Number(x)),
            _ => Err(ClifError::Data(format!(
                "row {row}: non-numeric token `{token}` in numerical column `{}`",
                col.name
            ))),
        },
        ColumnKind::Categorical => Ok(Value::Text(token.to_string())),
    }
}

/// Fills every missing cell: categorical gaps get [`MISSING_CATEGORY_TOKEN`],
/// numerical gaps get the arithmetic mean of the column's observed values.
///
/// Errors if a numerical column has no observed values at all (no mean
/// exists to impute with).
pub fn impute(ds: &Dataset) -> Result<(Dataset, PreprocessReport)> {
    let mut report = PreprocessReport::default();
    let mut new_rows = ds.rows.clone();

    for (j, col) in ds.columns.iter().enumerate() {
        let missing = ds.column_values(j).filter(|v| v.is_missing()).count();
        report.imputed_counts.insert(col.name.clone(), missing);
        match col.kind {
            ColumnKind::Numerical => {
                let (sum, n) = ds
                    .column_values(j)
                    .filter_map(Value::as_number)
                    .fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
                if n == 0 {
                    return Err(ClifError::Data(format!(
                        "numerical column `{}` has no observed values; cannot impute a mean",
                        col.name
                    )));
                }
                let mean = sum / n as f64;
                report.column_means.insert(col.name.clone(), mean);
                if missing > 0 {
                    for row in new_rows.iter_mut() {
                        if row[j].is_missing() {
                            row[j] = Value::Number(mean);
                        }
                    }
                }
            }
            ColumnKind::Categorical => {
                if missing > 0 {
                    for row in new_rows.iter_mut() {
                        if row[j].is_missing() {
                            row[j] = Value::Text(MISSING_CATEGORY_TOKEN.to_string());
                        }
                    }
                }
            }
        }
    }

    let out = Dataset {
        columns: ds.columns.clone(),
        rows: new_rows,
        row_ids: ds.row_ids.clone(),
    };
    Ok((out, report))
}

/// Replaces each categorical column with one 0/1 indicator column per
/// distinct observed value, named `<column>=<value>` and ordered by value.
///
/// Numerical columns pass through unchanged; derived indicator columns keep
/// the `Categorical` kind to mark their origin.
pub fn one_hot_encode(ds: &Dataset) -> Result<(Dataset, PreprocessReport)> {
    let mut report = PreprocessReport::default();

    // Distinct values per categorical column, lexicographically ordered.
    let mut value_sets: Vec<Option<Vec<String>>> = Vec::with_capacity(ds.n_cols());
    for (j, col) in ds.columns.iter().enumerate() {
        match col.kind {
            ColumnKind::Numerical => value_sets.push(None),
            ColumnKind::Categorical => {
                let mut values = BTreeSet::new();
                for v in ds.column_values(j) {
                    match v {
                        Value::Text(t) => {
                            values.insert(t.clone());
                        }
                        Value::Missing => {
                            return Err(ClifError::Data(format!(
                                "column `{}` still has missing cells; impute before encoding",
                                col.name
                            )))
                        }
                        Value::Number(_) => {
                            return Err(ClifError::Data(format!(
                                "categorical column `{}` holds numbers; check the schema",
                                col.name
                            )))
                        }
                    }
                }
                value_sets.push(Some(values.into_iter().collect()));
            }
        }
    }

    let mut columns = Vec::new();
    for (col, values) in ds.columns.iter().zip(&value_sets) {
        match values {
            None => columns.push(col.clone()),
            Some(values) => {
                let derived: Vec<String> =
                    values.iter().map(|v| format!("{}={v}", col.name)).collect();
                report
                    .encoding_map
                    .insert(col.name.clone(), derived.clone());
                for name in derived {
                    columns.push(ColumnSchema::categorical(name));
                }
            }
        }
    }

    let mut rows = Vec::with_capacity(ds.n_rows());
    for row in &ds.rows {
        let mut out = Vec::with_capacity(columns.len());
        for (j, values) in value_sets.iter().enumerate() {
            match values {
                None => out.push(row[j].clone()),
                Some(values) => {
                    let token = match &row[j] {
                        Value::Text(t) => t.as_str(),
                        _ => unreachable!("validated above"),
                    };
                    for v in values {
                        out.push(Value::Number(if v == token { 1.0 } else { 0.0 }));
                    }
                }
            }
        }
        rows.push(out);
    }

    let out = Dataset::new(columns, rows, ds.row_ids.clone())?;
    Ok((out, report))
}

/// Min-max scales every numerical column to [0, 1], recording the ranges.
/// Indicator columns (categorical kind) are left untouched; constant
/// columns map to all zeros.
pub fn scale_minmax(ds: &Dataset) -> Result<(Dataset, PreprocessReport)> {
    let mut report = PreprocessReport::default();
    let mut new_rows = ds.rows.clone();

    for (j, col) in ds.columns.iter().enumerate() {
        if col.kind != ColumnKind::Numerical {
            continue;
        }
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for v in ds.column_values(j) {
            let x = v.as_number().ok_or_else(|| {
                ClifError::Data(format!(
                    "column `{}` is not fully numeric; impute and encode first",
                    col.name
                ))
            })?;
            min = min.min(x);
            max = max.max(x);
        }
        report.scaling_ranges.insert(col.name.clone(), (min, max));
        let span = max - min;
        for row in new_rows.iter_mut() {
            let x = row[j].as_number().expect("validated above");
            row[j] = Value::Number(if span > 0.0 { (x - min) / span } else { 0.0 });
        }
    }

    let out = Dataset {
        columns: ds.columns.clone(),
        rows: new_rows,
        row_ids: ds.row_ids.clone(),
    };
    Ok((out, report))
}

/// Runs impute, one-hot encode, and min-max scale in order, returning the
/// final dataset and the merged report.
pub fn preprocess(ds: &Dataset) -> Result<(Dataset, PreprocessReport)> {
    let (imputed, mut report) = impute(ds)?;
    let (encoded, enc_report) = one_hot_encode(&imputed)?;
    report.merge(enc_report);
    let (scaled, scale_report) = scale_minmax(&encoded)?;
    report.merge(scale_report);
    Ok((scaled, report))
}

/// Undoes min-max scaling on every column with a recorded range, restoring
/// raw units (used by principal-feature identification, whose thresholds
/// are expressed in raw units).
pub fn unscale(ds: &Dataset, report: &PreprocessReport) -> Result<Dataset> {
    let mut new_rows = ds.rows.clone();
    for (j, col) in ds.columns.iter().enumerate() {
        let Some(&(min, max)) = report.scaling_ranges.get(&col.name) else {
            continue;
        };
        let span = max - min;
        for row in new_rows.iter_mut() {
            let x = row[j]
                .as_number()
                .ok_or_else(|| ClifError::Data(format!("column `{}` is not numeric", col.name)))?;
            row[j] = Value::Number(if span > 0.0 { min + x * span } else { min });
        }
    }
    Ok(Dataset {
        columns: ds.columns.clone(),
        rows: new_rows,
        row_ids: ds.row_ids.clone(),
    })
}

// ── Dataset CSV persistence ─────────────────────────────────────────────

/// Writes the dataset as CSV with a `row_id` column first, then one column
/// per feature using the derived names.
pub fn write_dataset_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut writer =
        csv::Writer::from_path(path).map_err(|e| ClifError::csv(path.display().to_string(), e))?;
    let mut header = vec!["row_id".to_string()];
    header.extend(ds.column_names());
    writer
        .write_record(&header)
        .map_err(|e| ClifError::csv(path.display().to_string(), e))?;
    for (i, row) in ds.rows.iter().enumerate() {
        let mut record = Vec::with_capacity(row.len() + 1);
        record.push(ds.row_ids[i].clone());
        for v in row {
            record.push(match v {
                Value::Number(x) => format!("{x}"),
                Value::Text(t) => t.clone(),
                Value::Missing => String::new(),
            });
        }
        writer
            .write_record(&record)
            .map_err(|e| ClifError::csv(path.display().to_string(), e))?;
    }
    writer
        .flush()
        .map_err(|e| ClifError::io(path.display().to_string(), e))?;
    Ok(())
}

/// Reads back a dataset written by [`write_dataset_csv`], reconstructing
/// column kinds from the preprocess report: columns with a recorded scaling
/// range are numerical, every other column is a 0/1 indicator.
pub fn read_encoded_csv(path: impl AsRef<Path>, report: &PreprocessReport) -> Result<Dataset> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| ClifError::csv(path.display().to_string(), e))?;
    let headers = reader
        .headers()
        .map_err(|e| ClifError::csv(path.display().to_string(), e))?
        .clone();
    if headers.get(0) != Some("row_id") {
        return Err(ClifError::Data(format!(
            "{}: expected `row_id` as first column",
            path.display()
        )));
    }
    let columns: Vec<ColumnSchema> = headers
        .iter()
        .skip(1)
        .map(|name| {
            if report.scaling_ranges.contains_key(name) {
                ColumnSchema::numerical(name)
            } else {
                ColumnSchema::categorical(name)
            }
        })
        .collect();

    let mut rows = Vec::new();
    let mut row_ids = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| ClifError::csv(path.display().to_string(), e))?;
        row_ids.push(record.get(0).unwrap_or("").to_string());
        let mut row = Vec::with_capacity(columns.len());
        for (j, col) in columns.iter().enumerate() {
            let token = record.get(j + 1).unwrap_or("");
            let x: f64 = token.parse().map_err(|_| {
                ClifError::Data(format!(
                    "row {i}: non-numeric token `{token}` in encoded column `{}`",
                    col.name
                ))
            })?;
            row.push(Value::Number(x));
        }
        rows.push(row);
    }
    Dataset::new(columns, rows, row_ids)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    fn toy_schema() -> Vec<ColumnSchema> {
        vec![
            ColumnSchema::numerical("AGE"),
            ColumnSchema::categorical("SEX"),
        ]
    }

    #[test]
    fn load_csv_marks_empty_as_missing() {
        let f = write_temp("SEQN,AGE,SEX\n1,30,M\n2,,F\n");
        let ds = load_csv(f.path(), &toy_schema(), Some("SEQN")).unwrap();
        assert_eq!(ds.n_rows(), 2);
        assert_eq!(ds.row_ids(), &["1".to_string(), "2".to_string()]);
        assert!(ds.cell(1, 0).is_missing());
        assert_eq!(ds.cell(0, 0), &Value::Number(30.0));
    }

    #[test]
    fn load_csv_ignores_unknown_columns_and_orders_by_schema() {
        let f = write_temp("EXTRA,SEX,AGE\nx,M,30\ny,F,40\n");
        let ds = load_csv(f.path(), &toy_schema(), None).unwrap();
        assert_eq!(ds.column_names(), vec!["AGE", "SEX"]);
        assert_eq!(ds.cell(1, 0), &Value::Number(40.0));
    }

    #[test]
    fn load_csv_missing_schema_column_errors() {
        let f = write_temp("AGE\n30\n");
        let err = load_csv(f.path(), &toy_schema(), None).unwrap_err();
        assert!(err.to_string().contains("SEX"), "{err}");
    }

    #[test]
    fn load_csv_missing_file_errors() {
        assert!(load_csv("/nonexistent/file.csv", &toy_schema(), None).is_err());
    }

    #[test]
    fn load_csv_rejects_non_numeric_token() {
        let f = write_temp("AGE,SEX\nthirty,M\n");
        let err = load_csv(f.path(), &toy_schema(), None).unwrap_err();
        assert!(err.to_string().contains("thirty"), "{err}");
        // non-finite numbers are as unusable as text
        let f = write_temp("AGE,SEX\ninf,M\n");
        assert!(load_csv(f.path(), &toy_schema(), None).is_err());
        let f = write_temp("AGE,SEX\nNaN,M\n");
        assert!(load_csv(f.path(), &toy_schema(), None).is_err());
    }

    #[test]
    fn load_csv_respects_missing_codes() {
        let schema = vec![ColumnSchema::numerical("AGE").with_missing_codes(["999"])];
        let f = write_temp("AGE\n30\n999\n");
        let ds = load_csv(f.path(), &schema, None).unwrap();
        assert!(ds.cell(1, 0).is_missing());
    }

    #[test]
    fn impute_numerical_uses_mean() {
        let ds = Dataset::new(
            vec![ColumnSchema::numerical("x")],
            vec![
                vec![Value::Number(1.0)],
                vec![Value::Missing],
                vec![Value::Number(3.0)],
            ],
            vec!["a".into(), "b".into(), "c".into()],
        )
        .unwrap();
        let (out, report) = impute(&ds).unwrap();
        assert_eq!(out.cell(1, 0), &Value::Number(2.0));
        assert_eq!(report.column_means["x"], 2.0);
        assert_eq!(report.imputed_counts["x"], 1);
        assert_eq!(out.missing_count(), 0);
    }

    #[test]
    fn impute_categorical_uses_missing_token() {
        let ds = Dataset::new(
            vec![ColumnSchema::categorical("c")],
            vec![vec![Value::Text("A".into())], vec![Value::Missing]],
            vec!["0".into(), "1".into()],
        )
        .unwrap();
        let (out, _) = impute(&ds).unwrap();
        assert_eq!(out.cell(1, 0), &Value::Text("777".into()));
    }

    #[test]
    fn impute_full_column_is_identity() {
        let ds = Dataset::new(
            vec![ColumnSchema::numerical("x")],
            vec![vec![Value::Number(5.0)], vec![Value::Number(7.0)]],
            vec!["0".into(), "1".into()],
        )
        .unwrap();
        let (out, report) = impute(&ds).unwrap();
        assert_eq!(out, ds);
        assert_eq!(report.imputed_counts["x"], 0);
    }

    #[test]
    fn impute_all_missing_numerical_errors() {
        let ds = Dataset::new(
            vec![ColumnSchema::numerical("x")],
            vec![vec![Value::Missing], vec![Value::Missing]],
            vec!["0".into(), "1".into()],
        )
        .unwrap();
        assert!(impute(&ds).is_err());
    }

    #[test]
    fn one_hot_expands_categorical() {
        let ds = Dataset::new(
            vec![ColumnSchema::categorical("c")],
            vec![
                vec![Value::Text("A".into())],
                vec![Value::Text("B".into())],
                vec![Value::Text("A".into())],
            ],
            vec!["0".into(), "1".into(), "2".into()],
        )
        .unwrap();
        let (out, report) = one_hot_encode(&ds).unwrap();
        assert_eq!(out.column_names(), vec!["c=A", "c=B"]);
        assert_eq!(report.encoding_map["c"], vec!["c=A", "c=B"]);
        assert_eq!(out.cell(0, 0), &Value::Number(1.0));
        assert_eq!(out.cell(1, 0), &Value::Number(0.0));
        assert_eq!(out.cell(1, 1), &Value::Number(1.0));
        assert_eq!(out.cell(2, 0), &Value::Number(1.0));
    }

    #[test]
    fn one_hot_single_value_gives_all_ones_column() {
        let ds = Dataset::new(
            vec![ColumnSchema::categorical("c")],
            vec![vec![Value::Text("A".into())], vec![Value::Text("A".into())]],
            vec!["0".into(), "1".into()],
        )
        .unwrap();
        let (out, _) = one_hot_encode(&ds).unwrap();
        assert_eq!(out.n_cols(), 1);
        assert!(out.column_values(0).all(|v| v == &Value::Number(1.0)));
    }

    #[test]
    fn scale_maps_endpoints_and_midpoint() {
        let ds = Dataset::new(
            vec![ColumnSchema::numerical("age")],
            vec![
                vec![Value::Number(0.0)],
                vec![Value::Number(45.0)],
                vec![Value::Number(90.0)],
            ],
            vec!["0".into(), "1".into(), "2".into()],
        )
        .unwrap();
        let (out, report) = scale_minmax(&ds).unwrap();
        assert_eq!(out.cell(0, 0), &Value::Number(0.0));
        assert_eq!(out.cell(1, 0), &Value::Number(0.5));
        assert_eq!(out.cell(2, 0), &Value::Number(1.0));
        assert_eq!(report.scaling_ranges["age"], (0.0, 90.0));
    }

    #[test]
    fn scale_constant_column_to_zero() {
        let ds = Dataset::new(
            vec![ColumnSchema::numerical("x")],
            vec![vec![Value::Number(5.0)], vec![Value::Number(5.0)]],
            vec!["0".into(), "1".into()],
        )
        .unwrap();
        let (out, report) = scale_minmax(&ds).unwrap();
        assert_eq!(out.cell(0, 0), &Value::Number(0.0));
        assert_eq!(report.scaling_ranges["x"], (5.0, 5.0));
    }

    #[test]
    fn scale_leaves_indicator_columns_alone() {
        let ds = Dataset::new(
            vec![ColumnSchema::categorical("c=A")],
            vec![vec![Value::Number(1.0)], vec![Value::Number(0.0)]],
            vec!["0".into(), "1".into()],
        )
        .unwrap();
        let (out, report) = scale_minmax(&ds).unwrap();
        assert_eq!(out, ds);
        assert!(report.scaling_ranges.is_empty());
    }

    #[test]
    fn schema_file_round_trip() {
        let text = "AGE,numerical\nSEX,categorical,7;9\n\nRACE,categorical\n";
        let schemas = parse_schema_text(text).unwrap();
        assert_eq!(schemas.len(), 3);
        assert_eq!(schemas[0].kind, ColumnKind::Numerical);
        assert!(schemas[1].missing_codes.contains("7"));
        assert!(schemas[1].missing_codes.contains("9"));
        assert!(schemas[2].missing_codes.is_empty());
    }

    #[test]
    fn schema_file_rejects_bad_kind() {
        assert!(parse_schema_text("AGE,number\n").is_err());
        assert!(parse_schema_text("AGE\n").is_err());
        assert!(parse_schema_text("AGE,numerical\nAGE,categorical\n").is_err());
    }

    #[test]
    fn column_count_identity_after_encoding() {
        // 2 numerical + categorical with 3 distinct + categorical with 2 distinct = 7.
        let ds = Dataset::new(
            vec![
                ColumnSchema::numerical("a"),
                ColumnSchema::numerical("b"),
                ColumnSchema::categorical("c"),
                ColumnSchema::categorical("d"),
            ],
            vec![
                vec![
                    Value::Number(1.0),
                    Value::Number(2.0),
                    Value::Text("x".into()),
                    Value::Text("u".into()),
                ],
                vec![
                    Value::Number(3.0),
                    Value::Number(4.0),
                    Value::Text("y".into()),
                    Value::Text("v".into()),
                ],
                vec![
                    Value::Number(5.0),
                    Value::Number(6.0),
                    Value::Text("z".into()),
                    Value::Text("u".into()),
                ],
            ],
            vec!["0".into(), "1".into(), "2".into()],
        )
        .unwrap();
        let (out, _) = one_hot_encode(&ds).unwrap();
        assert_eq!(out.n_cols(), 2 + 3 + 2);
    }

    #[test]
    fn unscale_recovers_raw_values() {
        let ds = Dataset::new(
            vec![ColumnSchema::numerical("x")],
            vec![
                vec![Value::Number(10.0)],
                vec![Value::Number(55.0)],
                vec![Value::Number(100.0)],
            ],
            vec!["0".into(), "1".into(), "2".into()],
        )
        .unwrap();
        let (scaled, report) = scale_minmax(&ds).unwrap();
        let raw = unscale(&scaled, &report).unwrap();
        for i in 0..3 {
            let orig = ds.cell(i, 0).as_number().unwrap();
            let back = raw.cell(i, 0).as_number().unwrap();
            assert!((orig - back).abs() <= 1e-12 * orig.abs().max(1.0));
        }
    }

    #[test]
    fn dataset_csv_round_trip() {
        let ds = Dataset::new(
            vec![
                ColumnSchema::numerical("x"),
                ColumnSchema::categorical("c=A"),
            ],
            vec![
                vec![Value::Number(0.25), Value::Number(1.0)],
                vec![Value::Number(0.75), Value::Number(0.0)],
            ],
            vec!["7".into(), "8".into()],
        )
        .unwrap();
        let mut report = PreprocessReport::default();
        report.scaling_ranges.insert("x".into(), (0.0, 4.0));

        let f = tempfile::NamedTempFile::new().unwrap();
        write_dataset_csv(&ds, f.path()).unwrap();
        let back = read_encoded_csv(f.path(), &report).unwrap();
        assert_eq!(back, ds);
    }
}
