//! Randomized search for return panels whose original Gerber matrix has a
//! negative eigenvalue.
//!
//! Trial `i` of a search with seed `s` draws from a ChaCha8 stream keyed by
//! `(s, i)`, so any trial can be regenerated on its own. Each trial picks one
//! of two generators with equal probability:
//!
//! * independent Gaussian columns with per-asset scales in [0.5, 2);
//! * a regime flip: one common Gaussian factor with random loadings, where a
//!   random subset of assets reverses the sign of its loading after a random
//!   break period, plus idiosyncratic Gaussian noise of scale 0.6.

use std::fs::File;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{check_psd, PsdReport, DEFAULT_TOLERANCE};
use crate::error::{GerberError, Result};
use crate::gerber::{gerber_matrix, GerberMatrix, Variant};
use crate::indicators::{build_indicators, build_thresholds};
use crate::ingest::{
    load_returns, save_returns, validate_for_thresholding, IngestOptions, ReturnMatrix,
};

/// A witness must have `λ_min` below this.
pub const WITNESS_THRESHOLD: f64 = -1e-8;

pub const GENERATOR_DESCRIPTION: &str =
    "gaussian|regime-flip mixture (chacha8, stream = trial index)";

pub fn generate_trial(
    seed: u64,
    trial_index: u64,
    periods: usize,
    assets: usize,
) -> Result<ReturnMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial_index);
    let values = if rng.random_bool(0.5) {
        let scales: Vec<f64> = (0..assets).map(|_| rng.random_range(0.5..2.0)).collect();
        Array2::from_shape_fn((periods, assets), |(_, k)| {
            scales[k] * rng.sample::<f64, _>(StandardNormal)
        })
    } else {
        let factor: Vec<f64> = (0..periods).map(|_| rng.sample(StandardNormal)).collect();
        let split = rng.random_range(1..periods.max(2));
        let loadings: Vec<(f64, bool)> = (0..assets)
            .map(|_| {
                let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                (sign * rng.random_range(0.5..1.5), rng.random_bool(0.5))
            })
            .collect();
        Array2::from_shape_fn((periods, assets), |(t, k)| {
            let (beta, flips) = loadings[k];
            let beta = if flips && t >= split { -beta } else { beta };
            beta * factor[t] + 0.6 * rng.sample::<f64, _>(StandardNormal)
        })
    };
    ReturnMatrix::from_values(values)
}

/// Original statistic and its PSD report for a panel, thresholds from the
/// panel's own sample standard deviations.
pub fn evaluate_original(returns: &ReturnMatrix, c: f64) -> Result<(GerberMatrix, PsdReport)> {
    let sigmas = validate_for_thresholding(returns)?;
    let th = build_thresholds(&sigmas, c)?;
    let ind = build_indicators(returns, &th)?;
    let g = gerber_matrix(&ind, Variant::Original)?;
    let report = check_psd(&g.values, DEFAULT_TOLERANCE)?;
    Ok((g, report))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessMeta {
    pub seed: u64,
    pub trial_index: u64,
    pub lambda_min: f64,
    pub c: f64,
    #[serde(rename = "T")]
    pub periods: usize,
    #[serde(rename = "K")]
    pub assets: usize,
    pub generator: String,
}

#[derive(Debug, Clone)]
pub struct Witness {
    pub returns: ReturnMatrix,
    pub report: PsdReport,
    pub meta: WitnessMeta,
}

#[derive(Debug, Clone)]
pub struct WitnessOutcome {
    pub trials_run: u64,
    pub witness: Option<Witness>,
}

pub fn find_non_psd_original(
    trials: u64,
    periods: usize,
    assets: usize,
    c: f64,
    seed: u64,
) -> Result<WitnessOutcome> {
    build_thresholds(&[1.0], c)?;
    for trial_index in 0..trials {
        let returns = generate_trial(seed, trial_index, periods, assets)?;
        // a draw with a constant column cannot be thresholded; skip it
        let Ok((_, report)) = evaluate_original(&returns, c) else {
            continue;
        };
        if report.lambda_min < WITNESS_THRESHOLD {
            let meta = WitnessMeta {
                seed,
                trial_index,
                lambda_min: report.lambda_min,
                c,
                periods,
                assets,
                generator: GENERATOR_DESCRIPTION.to_owned(),
            };
            return Ok(WitnessOutcome {
                trials_run: trial_index + 1,
                witness: Some(Witness {
                    returns,
                    report,
                    meta,
                }),
            });
        }
    }
    Ok(WitnessOutcome {
        trials_run: trials,
        witness: None,
    })
}

/// Fraction of `trials` draws whose original matrix is not PSD.
pub fn non_psd_frequency(
    trials: u64,
    periods: usize,
    assets: usize,
    c: f64,
    seed: u64,
) -> Result<f64> {
    let mut hits = 0u64;
    for trial_index in 0..trials {
        let returns = generate_trial(seed, trial_index, periods, assets)?;
        if let Ok((_, report)) = evaluate_original(&returns, c) {
            hits += u64::from(report.lambda_min < WITNESS_THRESHOLD);
        }
    }
    Ok(hits as f64 / trials.max(1) as f64)
}

pub fn metadata_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

/// Writes the returns CSV at `csv_path` and the metadata next to it with a
/// `.json` extension.
pub fn save_witness(witness: &Witness, csv_path: impl AsRef<Path>) -> Result<PathBuf> {
    let csv_path = csv_path.as_ref();
    save_returns(&witness.returns, csv_path)?;
    let meta_path = metadata_path(csv_path);
    let file = File::create(&meta_path).map_err(|source| GerberError::Io {
        path: meta_path.clone(),
        source,
    })?;
    serde_json::to_writer_pretty(file, &witness.meta)?;
    Ok(meta_path)
}

pub fn load_witness(csv_path: impl AsRef<Path>) -> Result<(ReturnMatrix, WitnessMeta)> {
    let csv_path = csv_path.as_ref();
    let returns = load_returns(csv_path, &IngestOptions::default())?;
    let meta_path = metadata_path(csv_path);
    let file = File::open(&meta_path).map_err(|source| GerberError::Io {
        path: meta_path.clone(),
        source,
    })?;
    let meta = serde_json::from_reader(file)?;
    Ok((returns, meta))
}
