//! Loading and validating return panels.
//!
//! The statistics only look at threshold exceedances, so the loader does not
//! care whether the file holds simple or log returns.

use std::collections::HashSet;
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use ndarray::{Array2, ArrayView1};

use crate::error::{GerberError, Result};

/// A T×K panel of per-period returns, one column per asset.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnMatrix {
    values: Array2<f64>,
    asset_labels: Vec<String>,
    period_labels: Option<Vec<String>>,
}

impl ReturnMatrix {
    pub fn new(
        values: Array2<f64>,
        asset_labels: Vec<String>,
        period_labels: Option<Vec<String>>,
    ) -> Result<Self> {
        let (periods, assets) = values.dim();
        if assets == 0 {
            return Err(GerberError::NoAssets);
        }
        if periods < 2 {
            return Err(GerberError::TooFewPeriods { periods });
        }
        if asset_labels.len() != assets {
            return Err(GerberError::LabelCount {
                expected: assets,
                found: asset_labels.len(),
            });
        }
        if let Some(p) = &period_labels {
            if p.len() != periods {
                return Err(GerberError::LabelCount {
                    expected: periods,
                    found: p.len(),
                });
            }
        }
        if let Some(((row, column), _)) = values.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(GerberError::NonFiniteValue { row, column });
        }
        let mut seen = HashSet::new();
        for label in &asset_labels {
            if !seen.insert(label.as_str()) {
                return Err(GerberError::DuplicateLabel {
                    label: label.clone(),
                });
            }
        }
        Ok(Self {
            values,
            asset_labels,
            period_labels,
        })
    }

    /// Builds a matrix with synthesized labels `A1..AK`.
    pub fn from_values(values: Array2<f64>) -> Result<Self> {
        let labels = synthesized_labels(values.ncols());
        Self::new(values, labels, None)
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn asset_labels(&self) -> &[String] {
        &self.asset_labels
    }

    pub fn period_labels(&self) -> Option<&[String]> {
        self.period_labels.as_deref()
    }

    pub fn periods(&self) -> usize {
        self.values.nrows()
    }

    pub fn assets(&self) -> usize {
        self.values.ncols()
    }

    pub fn column(&self, k: usize) -> ArrayView1<'_, f64> {
        self.values.column(k)
    }

    pub fn into_values(self) -> Array2<f64> {
        self.values
    }
}

pub fn synthesized_labels(k: usize) -> Vec<String> {
    (1..=k).map(|i| format!("A{i}")).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IngestOptions {
    pub delimiter: u8,
    pub has_header: bool,
    /// First column holds period labels rather than returns.
    pub period_column: bool,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            delimiter: b',',
            has_header: true,
            period_column: false,
        }
    }
}

pub fn load_returns(path: impl AsRef<Path>, options: &IngestOptions) -> Result<ReturnMatrix> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| GerberError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_returns(file, path, options)
}

/// Parses a returns CSV from any reader; `source` only labels error messages.
pub fn read_returns<R: Read>(
    reader: R,
    source: impl AsRef<Path>,
    options: &IngestOptions,
) -> Result<ReturnMatrix> {
    let path = source.as_ref().to_path_buf();
    let csv_error = |e: csv::Error| match e.kind() {
        csv::ErrorKind::Io(_) => GerberError::Io {
            path: path.clone(),
            source: std::io::Error::other(e.to_string()),
        },
        _ => GerberError::Csv {
            path: path.clone(),
            message: e.to_string(),
        },
    };

    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut records = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(&csv_error)?;
        // skip blank lines
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        let line = rec
            .position()
            .map_or(records.len() + 1, |p| p.line() as usize);
        records.push((line, rec));
    }
    if records.is_empty() {
        return Err(GerberError::EmptyFile { path });
    }

    let width = records[0].1.len();
    for (line, rec) in &records {
        if rec.len() != width {
            return Err(GerberError::RaggedRow {
                path: path.clone(),
                row: *line,
                expected: width,
                found: rec.len(),
            });
        }
    }
    let skip = usize::from(options.period_column);
    if width <= skip {
        return Err(GerberError::NoAssets);
    }
    let assets = width - skip;

    let mut rows = records.iter();
    let asset_labels = if options.has_header {
        let (_, header) = rows.next().expect("non-empty");
        header.iter().skip(skip).map(str::to_owned).collect()
    } else {
        synthesized_labels(assets)
    };

    let mut data = Vec::new();
    let mut period_labels = Vec::new();
    for (line, rec) in rows {
        if options.period_column {
            period_labels.push(rec[0].to_owned());
        }
        for (j, cell) in rec.iter().enumerate().skip(skip) {
            let value: f64 = cell.parse().map_err(|_| GerberError::NonNumeric {
                path: path.clone(),
                row: *line,
                column: j + 1,
                value: cell.to_owned(),
            })?;
            if !value.is_finite() {
                return Err(GerberError::NonFinite {
                    path: path.clone(),
                    row: *line,
                    column: j + 1,
                    value: cell.to_owned(),
                });
            }
            data.push(value);
        }
    }
    let periods = data.len() / assets;
    if periods < 2 {
        return Err(GerberError::TooFewPeriods { periods });
    }
    let values = Array2::from_shape_vec((periods, assets), data)
        .expect("row-major buffer sized from validated rows");
    ReturnMatrix::new(
        values,
        asset_labels,
        options.period_column.then_some(period_labels),
    )
}

/// Writes the panel back out as CSV with a header row. Values use the
/// shortest representation that parses back to the same `f64`.
pub fn write_returns<W: Write>(returns: &ReturnMatrix, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let to_err = |e: csv::Error| GerberError::Csv {
        path: PathBuf::from("<output>"),
        message: e.to_string(),
    };
    let mut header: Vec<&str> = Vec::new();
    if returns.period_labels.is_some() {
        header.push("period");
    }
    header.extend(returns.asset_labels.iter().map(String::as_str));
    w.write_record(&header).map_err(to_err)?;
    for (t, row) in returns.values.rows().into_iter().enumerate() {
        let mut fields: Vec<String> = Vec::with_capacity(row.len() + 1);
        if let Some(p) = &returns.period_labels {
            fields.push(p[t].clone());
        }
        fields.extend(row.iter().map(|v| v.to_string()));
        w.write_record(&fields).map_err(to_err)?;
    }
    w.flush().map_err(|source| GerberError::Io {
        path: PathBuf::from("<output>"),
        source,
    })?;
    Ok(())
}

pub fn save_returns(returns: &ReturnMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|source| GerberError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_returns(returns, file)
}

/// Sample standard deviation (denominator T−1) of each column.
///
/// Refuses constant columns: their threshold would be zero and a single
/// observation could then sit above and below it at once.
pub fn validate_for_thresholding(returns: &ReturnMatrix) -> Result<Vec<f64>> {
    let mut zero = Vec::new();
    let sigmas: Vec<f64> = (0..returns.assets())
        .map(|k| {
            let col = returns.column(k);
            let first = col[0];
            let sigma = if col.iter().all(|&v| v == first) {
                0.0
            } else {
                sample_std(col)
            };
            if sigma <= 0.0 {
                zero.push(returns.asset_labels[k].clone());
            }
            sigma
        })
        .collect();
    if !zero.is_empty() {
        return Err(GerberError::ZeroVariance { labels: zero });
    }
    Ok(sigmas)
}

fn sample_std(col: ArrayView1<'_, f64>) -> f64 {
    let n = col.len() as f64;
    let mean = col.sum() / n;
    let ss: f64 = col.iter().map(|v| (v - mean) * (v - mean)).sum();
    (ss / (n - 1.0)).sqrt()
}
