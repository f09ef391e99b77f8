use ndarray::{Array2, ArrayView2, Zip};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_psd, DEFAULT_TOLERANCE};
use crate::error::{GerberError, Result};
use crate::gerber::{gram, CountMatrices, GerberMatrix};
use crate::indicators::IndicatorSet;

const QUADRATIC_FORM_PROBES: usize = 64;
const QUADRATIC_FORM_SEED: u64 = 0x5eed;

/// `(U − D)ᵀ(U − D)` computed from the raw indicator matrices.
pub fn squared_form(u: ArrayView2<'_, i8>, d: ArrayView2<'_, i8>) -> Array2<i64> {
    assert_eq!(u.dim(), d.dim());
    let diff = Zip::from(&u).and(&d).map_collect(|&a, &b| a - b);
    gram(diff.view())
}

/// Checks `H = (U − D)ᵀ(U − D)` exactly and probes `xᵀHx ≥ 0` with random
/// integer vectors, evaluated in exact integer arithmetic.
pub fn verify_squared_form(ind: &IndicatorSet, cm: &CountMatrices) -> bool {
    if ind.assets() != cm.assets() {
        return false;
    }
    if squared_form(ind.u.view(), ind.d.view()) != cm.h {
        return false;
    }
    let k = cm.assets();
    let mut rng = ChaCha8Rng::seed_from_u64(QUADRATIC_FORM_SEED);
    (0..QUADRATIC_FORM_PROBES).all(|_| {
        let x: Vec<i128> = (0..k).map(|_| rng.random_range(-5..=5)).collect();
        let mut q: i128 = 0;
        for i in 0..k {
            for j in 0..k {
                q += x[i] * i128::from(cm.h[[i, j]]) * x[j];
            }
        }
        q >= 0
    })
}

/// Outcome of rebuilding GS2 as `(FᵀF/T) ⊙ (1 + X + X⊙X + …)` with
/// `X = PᵀP/T`, one partial sum at a time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesCheck {
    pub terms_used: usize,
    pub max_abs_error: f64,
    pub x_max: f64,
    /// `ceil(log(tol·(1 − x_max)) / log(x_max)) + 1`, or 1 when `x_max = 0`.
    pub term_bound: usize,
    /// Max absolute error against GS2 after each partial sum.
    pub error_trace: Vec<f64>,
    /// Smallest eigenvalue seen over all partial sums.
    pub min_partial_lambda: f64,
    pub partial_sums_psd: bool,
}

fn term_bound(x_max: f64, tol: f64) -> usize {
    if x_max == 0.0 {
        1
    } else {
        ((tol * (1.0 - x_max)).ln() / x_max.ln()).ceil() as usize + 1
    }
}

pub fn verify_series_construction(
    ind: &IndicatorSet,
    g2: &GerberMatrix,
    tol: f64,
) -> Result<SeriesCheck> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(GerberError::InvalidTolerance { tolerance: tol });
    }
    let k = ind.assets();
    if g2.values.dim() != (k, k) {
        return Err(GerberError::DimensionMismatch {
            expected: format!("{k}x{k} GS2 matrix"),
            found: format!("{}x{}", g2.values.nrows(), g2.values.ncols()),
        });
    }
    let periods = ind.periods() as f64;
    let numerator = gram(ind.f.view()).mapv(|v| v as f64 / periods);
    let x = gram(ind.p.view()).mapv(|v| v as f64 / periods);

    let mut x_max = 0.0f64;
    for ((row, column), &value) in x.indexed_iter() {
        if value >= 1.0 {
            return Err(GerberError::NeutralFractionTooLarge { row, column, value });
        }
        x_max = x_max.max(value);
    }
    let bound = term_bound(x_max, tol);
    // the bound is loose; the slack only guards against rounding at the tail
    let limit = bound + 16;

    let mut power = Array2::<f64>::ones((k, k));
    let mut geometric = Array2::<f64>::zeros((k, k));
    let mut trace = Vec::new();
    let mut min_lambda = f64::INFINITY;
    let mut all_psd = true;
    for terms in 1..=limit {
        geometric += &power;
        let partial = &numerator * &geometric;
        let report = check_psd(&partial, DEFAULT_TOLERANCE)?;
        min_lambda = min_lambda.min(report.lambda_min);
        all_psd &= report.is_psd();
        let error = crate::gerber::max_abs_difference(&partial, &g2.values);
        trace.push(error);
        if error <= tol {
            return Ok(SeriesCheck {
                terms_used: terms,
                max_abs_error: error,
                x_max,
                term_bound: bound,
                error_trace: trace,
                min_partial_lambda: min_lambda,
                partial_sums_psd: all_psd,
            });
        }
        power *= &x;
    }
    Err(GerberError::SeriesDidNotConverge {
        tolerance: tol,
        terms: limit,
    })
}
