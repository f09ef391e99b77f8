//! Gerber co-movement statistics.
//!
//! A return panel is reduced to threshold exceedances (`|r_tk| ≥ c·σ_k`), from
//! which three correlation-like matrices are built:
//!
//! * the original statistic, concordant minus discordant joint piercings over
//!   their sum;
//! * GS1, the same numerator scaled by the geometric mean of each asset's
//!   piercing count;
//! * GS2, the numerator over the number of periods in which at least one of
//!   the pair pierces.
//!
//! The [`psd`] module checks the semidefiniteness properties of these
//! matrices: GS1 and GS2 are always PSD, the original statistic often is not.

pub mod cli;
pub mod error;
pub mod gerber;
pub mod indicators;
pub mod ingest;
pub mod psd;

pub use error::{GerberError, Result};
pub use gerber::{GerberMatrix, Variant};
pub use indicators::{build_indicators, build_thresholds, IndicatorSet, ThresholdVector};
pub use ingest::{load_returns, validate_for_thresholding, IngestOptions, ReturnMatrix};
pub use psd::{check_psd, PsdReport, Verdict};

/// Default threshold fraction `c`.
pub const DEFAULT_FRACTION: f64 = 0.5;

/// Everything derived from one return panel at one threshold fraction.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub sigmas: Vec<f64>,
    pub thresholds: ThresholdVector,
    pub indicators: IndicatorSet,
}

impl Analysis {
    pub fn new(returns: &ReturnMatrix, c: f64) -> Result<Self> {
        let sigmas = validate_for_thresholding(returns)?;
        let thresholds = build_thresholds(&sigmas, c)?;
        let indicators = build_indicators(returns, &thresholds)?;
        Ok(Self {
            sigmas,
            thresholds,
            indicators,
        })
    }

    pub fn gerber(&self, variant: Variant) -> Result<GerberMatrix> {
        gerber::gerber_matrix(&self.indicators, variant)
    }
}
