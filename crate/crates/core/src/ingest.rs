//! Loading delimited numeric data, per-column summaries and standardization.

use std::fs::File;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

pub const MIN_ROWS: usize = 3;

/// Raw observations: rows are points, columns are variables.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: Matrix,
    column_names: Vec<String>,
    labels: Option<Vec<String>>,
}

impl DataMatrix {
    /// Validates shape and rejects constant columns.
    pub fn new(values: Matrix, column_names: Vec<String>, labels: Option<Vec<String>>) -> Result<Self> {
        if values.cols() != column_names.len() {
            return Err(Error::Dimension {
                context: "ingest",
                expected: values.cols(),
                got: column_names.len(),
            });
        }
        if values.rows() < MIN_ROWS {
            return Err(Error::TooFewRows {
                min: MIN_ROWS,
                got: values.rows(),
            });
        }
        if values.cols() < 2 {
            return Err(Error::TooFewColumns(values.cols()));
        }
        if let Some(labels) = &labels {
            if labels.len() != values.rows() {
                return Err(Error::Dimension {
                    context: "ingest",
                    expected: values.rows(),
                    got: labels.len(),
                });
            }
        }
        for (j, name) in column_names.iter().enumerate() {
            let first = values[(0, j)];
            if (1..values.rows()).all(|i| values[(i, j)] == first) {
                return Err(Error::ConstantColumn(name.clone()));
            }
        }
        Ok(Self {
            values,
            column_names,
            labels,
        })
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn n_rows(&self) -> usize {
        self.values.rows()
    }

    pub fn n_cols(&self) -> usize {
        self.values.cols()
    }
}

/// Denominator used for variances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Divisor {
    /// 1/n
    #[default]
    Population,
    /// 1/(n-1)
    Sample,
}

impl Divisor {
    pub fn denominator(self, n: usize) -> f64 {
        match self {
            Divisor::Population => n as f64,
            Divisor::Sample => (n - 1) as f64,
        }
    }
}

impl FromStr for Divisor {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "population" => Ok(Divisor::Population),
            "sample" => Ok(Divisor::Sample),
            other => Err(format!("unknown divisor '{other}' (expected population|sample)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnSummary {
    pub mean: f64,
    pub std_dev: f64,
    pub variance: f64,
}

impl ColumnSummary {
    pub fn of(values: &[f64], divisor: Divisor) -> Self {
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let ss: f64 = values.iter().map(|x| (x - mean) * (x - mean)).sum();
        let variance = ss / divisor.denominator(n);
        Self {
            mean,
            std_dev: variance.sqrt(),
            variance,
        }
    }
}

/// Per-column mean, standard deviation and variance.
pub fn summarize(data: &DataMatrix, divisor: Divisor) -> Vec<ColumnSummary> {
    summarize_matrix(data.values(), divisor)
}

pub(crate) fn summarize_matrix(m: &Matrix, divisor: Divisor) -> Vec<ColumnSummary> {
    (0..m.cols())
        .map(|j| ColumnSummary::of(&m.column(j), divisor))
        .collect()
}

/// Z-scores of every admitted column.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizedMatrix {
    values: Matrix,
    column_names: Vec<String>,
    source_summaries: Vec<ColumnSummary>,
    divisor: Divisor,
}

impl StandardizedMatrix {
    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn source_summaries(&self) -> &[ColumnSummary] {
        &self.source_summaries
    }

    pub fn divisor(&self) -> Divisor {
        self.divisor
    }

    pub fn n_rows(&self) -> usize {
        self.values.rows()
    }

    pub fn n_cols(&self) -> usize {
        self.values.cols()
    }

    /// Reinterprets the z-scores as raw data, e.g. to standardize again.
    pub fn to_data_matrix(&self) -> Result<DataMatrix> {
        DataMatrix::new(self.values.clone(), self.column_names.clone(), None)
    }
}

/// z = (x - mean) / std per cell, under the given divisor.
pub fn standardize(data: &DataMatrix, divisor: Divisor) -> Result<StandardizedMatrix> {
    let summaries = summarize(data, divisor);
    for (s, name) in summaries.iter().zip(data.column_names()) {
        if !(s.std_dev > 0.0) {
            return Err(Error::ConstantColumn(name.clone()));
        }
    }
    let x = data.values();
    let values = Matrix::from_fn(x.rows(), x.cols(), |i, j| {
        (x[(i, j)] - summaries[j].mean) / summaries[j].std_dev
    });
    Ok(StandardizedMatrix {
        values,
        column_names: data.column_names().to_vec(),
        source_summaries: summaries,
        divisor,
    })
}

/// One element of a column selection: a 1-based index, an inclusive 1-based
/// range, or a header name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnRef {
    Index(usize),
    Range(usize, usize),
    Name(String),
}

/// Comma-separated list of column references, e.g. `1-4` or `Sepal Length,3`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnSelector(pub Vec<ColumnRef>);

impl ColumnSelector {
    pub fn all() -> Self {
        Self(Vec::new())
    }

    pub fn is_all(&self) -> bool {
        self.0.is_empty()
    }

    fn resolve(&self, header: &[String]) -> Result<Vec<usize>> {
        let width = header.len();
        let check = |i: usize, raw: String| -> Result<usize> {
            if i == 0 || i > width {
                Err(Error::UnknownColumn(raw))
            } else {
                Ok(i - 1)
            }
        };
        let mut out = Vec::new();
        for r in &self.0 {
            match r {
                ColumnRef::Index(i) => out.push(check(*i, i.to_string())?),
                ColumnRef::Range(a, b) => {
                    if a > b {
                        return Err(Error::UnknownColumn(format!("{a}-{b}")));
                    }
                    for i in *a..=*b {
                        out.push(check(i, format!("{a}-{b}"))?);
                    }
                }
                ColumnRef::Name(name) => {
                    let idx = header
                        .iter()
                        .position(|h| h == name)
                        .ok_or_else(|| Error::UnknownColumn(name.clone()))?;
                    out.push(idx);
                }
            }
        }
        Ok(out)
    }
}

impl FromStr for ColumnSelector {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let mut refs = Vec::new();
        for token in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            refs.push(parse_column_ref(token));
        }
        if refs.is_empty() {
            return Err("empty column selector".into());
        }
        Ok(Self(refs))
    }
}

impl FromStr for ColumnRef {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "" => Err("empty column reference".into()),
            t => Ok(parse_column_ref(t)),
        }
    }
}

fn parse_column_ref(token: &str) -> ColumnRef {
    if let Ok(i) = token.parse::<usize>() {
        return ColumnRef::Index(i);
    }
    if let Some((a, b)) = token.split_once('-') {
        if let (Ok(a), Ok(b)) = (a.trim().parse(), b.trim().parse()) {
            return ColumnRef::Range(a, b);
        }
    }
    ColumnRef::Name(token.to_string())
}

#[derive(Debug, Clone, Default)]
pub struct CsvOptions {
    pub has_header: bool,
    /// Numeric analysis columns; empty selects every column.
    pub columns: Option<ColumnSelector>,
    pub label_column: Option<ColumnRef>,
}

/// Reads a comma-delimited file into a [`DataMatrix`].
pub fn load_csv(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<DataMatrix> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(file, opts)
}

pub fn read_csv<R: Read>(reader: R, opts: &CsvOptions) -> Result<DataMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = rdr.records();

    let mut header: Option<Vec<String>> = None;
    if opts.has_header {
        match records.next() {
            Some(rec) => header = Some(rec?.iter().map(str::to_string).collect()),
            None => return Err(Error::TooFewRows { min: MIN_ROWS, got: 0 }),
        }
    }
    let body: Vec<csv::StringRecord> = records.collect::<std::result::Result<_, _>>()?;
    let width = header
        .as_ref()
        .map(Vec::len)
        .or_else(|| body.first().map(csv::StringRecord::len))
        .unwrap_or(0);
    let header = header.unwrap_or_else(|| (1..=width).map(|i| format!("col{i}")).collect());

    let label_idx = match &opts.label_column {
        Some(r) => Some(ColumnSelector(vec![r.clone()]).resolve(&header)?[0]),
        None => None,
    };
    let selected = match &opts.columns {
        Some(sel) if !sel.is_all() => sel.resolve(&header)?,
        _ => (0..width).filter(|&j| Some(j) != label_idx).collect(),
    };

    // data rows are reported 1-based, counting the header line if present
    let row_offset = if opts.has_header { 2 } else { 1 };
    let mut values = Matrix::zeros(body.len(), selected.len());
    let mut labels = label_idx.map(|_| Vec::with_capacity(body.len()));
    for (i, rec) in body.iter().enumerate() {
        for (out_j, &j) in selected.iter().enumerate() {
            let cell = rec.get(j).unwrap_or("");
            if cell.is_empty() {
                return Err(Error::MissingValue {
                    row: i + row_offset,
                    column: header[j].clone(),
                });
            }
            let v: f64 = cell.parse().ok().filter(|v: &f64| v.is_finite()).ok_or_else(|| {
                Error::NonNumeric {
                    row: i + row_offset,
                    column: header[j].clone(),
                    value: cell.to_string(),
                }
            })?;
            values[(i, out_j)] = v;
        }
        if let (Some(labels), Some(l)) = (labels.as_mut(), label_idx) {
            labels.push(rec.get(l).unwrap_or("").to_string());
        }
    }
    let names = selected.iter().map(|&j| header[j].clone()).collect();
    DataMatrix::new(values, names, labels)
}
