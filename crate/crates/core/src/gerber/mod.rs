//! The three Gerber co-movement statistics.
//!
//! Every statistic is computed twice in this crate: once from integer count
//! matrices formed as indicator products ([`count_matrices`]), and once by the
//! definitional per-pair loop in [`oracle`]. Counts stay integral until the
//! final division.

mod counts;
pub mod oracle;
mod statistics;

use std::io::Write;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

pub use counts::{
    count_matrices, cross, gram, joint_observation, neutral_counts, pair_counts, CountMatrices,
    PairCounts,
};
pub use oracle::gerber_oracle;
pub use statistics::{
    covariance_from_gerber, gerber_gs1, gerber_gs2, gerber_original, gs1_scaled_form,
    max_abs_difference, GS1_FORM_TOLERANCE,
};

use crate::error::{GerberError, Result};
use crate::indicators::{IndicatorSet, Provenance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Concordant minus discordant over their sum.
    Original,
    /// Numerator scaled by the geometric mean of piercing counts.
    Gs1,
    /// Numerator over the periods in which at least one asset pierces.
    Gs2,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Original, Variant::Gs1, Variant::Gs2];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Original => "original",
            Variant::Gs1 => "gs1",
            Variant::Gs2 => "gs2",
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GerberMatrix {
    pub variant: Variant,
    pub values: Array2<f64>,
    pub meta: Provenance,
    /// Upper-triangle cells `(i, j)`, `i <= j`, whose value came from the
    /// zero-denominator convention rather than the formula.
    pub convention_cells: Vec<(usize, usize)>,
}

impl GerberMatrix {
    pub fn assets(&self) -> usize {
        self.values.nrows()
    }

    pub fn labels(&self) -> &[String] {
        &self.meta.asset_labels
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        write_matrix_csv(&self.values, self.labels(), writer)
    }

    pub fn report(&self) -> GerberReport {
        GerberReport {
            variant: self.variant,
            c: self.meta.c,
            t: self.meta.periods,
            k: self.assets(),
            labels: self.meta.asset_labels.clone(),
            matrix: rows(&self.values),
            convention_cells: self.convention_cells.clone(),
        }
    }
}

/// JSON form of a [`GerberMatrix`] with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GerberReport {
    pub variant: Variant,
    pub c: f64,
    #[serde(rename = "T")]
    pub t: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub labels: Vec<String>,
    pub matrix: Vec<Vec<f64>>,
    pub convention_cells: Vec<(usize, usize)>,
}

pub(crate) fn rows(m: &Array2<f64>) -> Vec<Vec<f64>> {
    m.rows().into_iter().map(|r| r.to_vec()).collect()
}

/// 17 significant digits in scientific notation; parses back to the same `f64`.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

/// Square matrix as CSV with a header row of labels and a leading label column.
pub fn write_matrix_csv<W: Write>(m: &Array2<f64>, labels: &[String], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let to_err = |e: csv::Error| GerberError::Csv {
        path: "<output>".into(),
        message: e.to_string(),
    };
    let mut header = vec!["asset".to_owned()];
    header.extend(labels.iter().cloned());
    w.write_record(&header).map_err(to_err)?;
    for (label, row) in labels.iter().zip(m.rows()) {
        let mut fields = vec![label.clone()];
        fields.extend(row.iter().map(|&v| format_value(v)));
        w.write_record(&fields).map_err(to_err)?;
    }
    w.flush().map_err(|source| GerberError::Io {
        path: "<output>".into(),
        source,
    })
}

/// Computes one variant by the matrix route from an indicator set.
pub fn gerber_matrix(ind: &IndicatorSet, variant: Variant) -> Result<GerberMatrix> {
    let cm = count_matrices(ind);
    match variant {
        Variant::Original => Ok(gerber_original(&cm)),
        Variant::Gs1 => gerber_gs1(&cm),
        Variant::Gs2 => gerber_gs2(&cm, &neutral_counts(ind)),
    }
}
