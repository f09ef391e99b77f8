//! Threshold exceedance indicators.
//!
//! Each cell of the return panel lands in exactly one of three states: at or
//! above `+h_k` (up), at or below `-h_k` (down), or strictly between (neutral).
//! The four matrices built here encode that state in the forms the statistics
//! and the semidefiniteness checks need.

use ndarray::{Array2, ShapeBuilder};

use crate::error::{GerberError, Result};
use crate::ingest::ReturnMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdVector {
    c: f64,
    h: Vec<f64>,
}

impl ThresholdVector {
    pub fn fraction(&self) -> f64 {
        self.c
    }

    pub fn levels(&self) -> &[f64] {
        &self.h
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }
}

/// `h_k = c·σ_k` for every asset.
pub fn build_thresholds(sigmas: &[f64], c: f64) -> Result<ThresholdVector> {
    if !(c.is_finite() && c > 0.0) {
        return Err(GerberError::InvalidFraction { c });
    }
    if let Some((index, &value)) = sigmas
        .iter()
        .enumerate()
        .find(|(_, s)| !(s.is_finite() && **s > 0.0))
    {
        return Err(GerberError::InvalidSigma { index, value });
    }
    let h: Vec<f64> = sigmas.iter().map(|s| c * s).collect();
    // c·σ can only underflow to zero for subnormal inputs
    if let Some(index) = h.iter().position(|&v| v <= 0.0) {
        return Err(GerberError::InvalidSigma {
            index,
            value: sigmas[index],
        });
    }
    Ok(ThresholdVector { c, h })
}

/// Where one observation sits relative to its asset's thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    Up,
    Neutral,
    Down,
}

impl Region {
    pub fn classify(r: f64, h: f64) -> Self {
        debug_assert!(h > 0.0);
        if r >= h {
            Region::Up
        } else if r <= -h {
            Region::Down
        } else {
            Region::Neutral
        }
    }

    pub fn sign(self) -> i8 {
        match self {
            Region::Up => 1,
            Region::Neutral => 0,
            Region::Down => -1,
        }
    }
}

/// What a derived matrix was computed from: threshold fraction, panel length
/// and asset labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub c: f64,
    pub periods: usize,
    pub asset_labels: Vec<String>,
}

/// U, D, F = U − D and P = 1 − |F|, each T×K in column-major layout.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorSet {
    pub u: Array2<i8>,
    pub d: Array2<i8>,
    pub f: Array2<i8>,
    pub p: Array2<i8>,
    pub meta: Provenance,
}

impl IndicatorSet {
    /// Rebuilds the set from a sign matrix over {−1, 0, +1}, with synthesized
    /// labels. Used where indicators come from somewhere other than returns.
    pub fn from_signs(signs: &Array2<i8>, c: f64) -> Result<Self> {
        if let Some(((row, column), _)) = signs.indexed_iter().find(|(_, v)| !(-1..=1).contains(*v))
        {
            return Err(GerberError::DimensionMismatch {
                expected: "entries in {-1, 0, 1}".into(),
                found: format!("entry ({row}, {column}) = {}", signs[[row, column]]),
            });
        }
        let (periods, assets) = signs.dim();
        let shape = (periods, assets).f();
        let u = Array2::from_shape_fn(shape, |ix| i8::from(signs[ix] == 1));
        let d = Array2::from_shape_fn(shape, |ix| i8::from(signs[ix] == -1));
        let f = Array2::from_shape_fn(shape, |ix| signs[ix]);
        let p = Array2::from_shape_fn(shape, |ix| 1 - signs[ix].abs());
        Ok(Self {
            u,
            d,
            f,
            p,
            meta: Provenance {
                c,
                periods,
                asset_labels: crate::ingest::synthesized_labels(assets),
            },
        })
    }

    pub fn periods(&self) -> usize {
        self.u.nrows()
    }

    pub fn assets(&self) -> usize {
        self.u.ncols()
    }

    /// Number of periods in which each asset is up or down.
    pub fn piercings(&self) -> Vec<i64> {
        self.f
            .columns()
            .into_iter()
            .map(|c| c.iter().map(|&v| i64::from(v != 0)).sum())
            .collect()
    }
}

pub fn build_indicators(
    returns: &ReturnMatrix,
    thresholds: &ThresholdVector,
) -> Result<IndicatorSet> {
    let (periods, assets) = returns.values().dim();
    if thresholds.len() != assets {
        return Err(GerberError::DimensionMismatch {
            expected: format!("{assets} thresholds"),
            found: format!("{}", thresholds.len()),
        });
    }
    let shape = (periods, assets).f();
    let mut u = Array2::<i8>::zeros(shape);
    let mut d = Array2::<i8>::zeros(shape);
    let mut f = Array2::<i8>::zeros(shape);
    let mut p = Array2::<i8>::zeros(shape);
    for (k, &h) in thresholds.levels().iter().enumerate() {
        assert!(h > 0.0, "threshold for asset {k} must be positive");
        for (t, &r) in returns.column(k).iter().enumerate() {
            let up = r >= h;
            let down = r <= -h;
            debug_assert!(!(up && down));
            let sign = i8::from(up) - i8::from(down);
            u[[t, k]] = i8::from(up);
            d[[t, k]] = i8::from(down);
            f[[t, k]] = sign;
            p[[t, k]] = 1 - sign.abs();
        }
    }
    Ok(IndicatorSet {
        u,
        d,
        f,
        p,
        meta: Provenance {
            c: thresholds.fraction(),
            periods,
            asset_labels: returns.asset_labels().to_vec(),
        },
    })
}
