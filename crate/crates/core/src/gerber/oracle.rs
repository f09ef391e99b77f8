//! Definitional per-pair evaluation of all three statistics.
//!
//! Works straight from the returns and thresholds with scalar loops over
//! periods, without indicator matrices or matrix products. Tests use it as
//! the reference for the matrix-form path.

use ndarray::Array2;

use super::{GerberMatrix, PairCounts, Variant};
use crate::error::{GerberError, Result};
use crate::gerber::joint_observation;
use crate::indicators::{Provenance, Region, ThresholdVector};
use crate::ingest::ReturnMatrix;

struct PairTally {
    sum: i64,
    sum_abs: i64,
    grid: PairCounts,
}

fn tally(returns: &ReturnMatrix, h: &[f64], i: usize, j: usize) -> PairTally {
    let values = returns.values();
    let mut out = PairTally {
        sum: 0,
        sum_abs: 0,
        grid: PairCounts::default(),
    };
    for t in 0..returns.periods() {
        let (ri, rj) = (values[[t, i]], values[[t, j]]);
        let m = i64::from(joint_observation(ri, rj, h[i], h[j]));
        out.sum += m;
        out.sum_abs += m.abs();
        out.grid
            .record(Region::classify(ri, h[i]), Region::classify(rj, h[j]));
    }
    out
}

pub fn gerber_oracle(
    returns: &ReturnMatrix,
    thresholds: &ThresholdVector,
    variant: Variant,
) -> Result<GerberMatrix> {
    let k = returns.assets();
    if thresholds.len() != k {
        return Err(GerberError::DimensionMismatch {
            expected: format!("{k} thresholds"),
            found: thresholds.len().to_string(),
        });
    }
    let h = thresholds.levels();
    let labels = returns.asset_labels();
    let periods = returns.periods() as u64;

    let mut values = Array2::zeros((k, k));
    let mut convention_cells = Vec::new();
    let mut never = Vec::new();
    let mut excluded = Vec::new();

    for i in 0..k {
        for j in i..k {
            let pt = tally(returns, h, i, j);
            let g = &pt.grid;
            let numerator = g.n_uu as i64 + g.n_dd as i64 - g.n_ud as i64 - g.n_du as i64;
            debug_assert_eq!(numerator, pt.sum);
            let value = match variant {
                Variant::Original => {
                    if pt.sum_abs == 0 {
                        convention_cells.push((i, j));
                        if i == j {
                            1.0
                        } else {
                            0.0
                        }
                    } else {
                        pt.sum as f64 / pt.sum_abs as f64
                    }
                }
                Variant::Gs1 => {
                    let (a, b) = (g.first_piercings(), g.second_piercings());
                    if i == j && a == 0 {
                        never.push(labels[i].clone());
                    }
                    if a == 0 || b == 0 {
                        continue;
                    }
                    numerator as f64 / (a as f64 * b as f64).sqrt()
                }
                Variant::Gs2 => {
                    if g.n_nn == periods {
                        excluded.push((labels[i].clone(), labels[j].clone()));
                        continue;
                    }
                    pt.sum as f64 / (periods - g.n_nn) as f64
                }
            };
            values[[i, j]] = value;
            values[[j, i]] = value;
        }
    }
    if !never.is_empty() {
        return Err(GerberError::NeverPierces { labels: never });
    }
    if !excluded.is_empty() {
        return Err(GerberError::AllNeutralPairs { pairs: excluded });
    }
    Ok(GerberMatrix {
        variant,
        values,
        meta: Provenance {
            c: thresholds.fraction(),
            periods: returns.periods(),
            asset_labels: labels.to_vec(),
        },
        convention_cells,
    })
}

/// Nine-region counts for `(i, j)` classified directly from returns.
pub fn pair_counts_from_returns(
    returns: &ReturnMatrix,
    thresholds: &ThresholdVector,
    i: usize,
    j: usize,
) -> Result<PairCounts> {
    let len = returns.assets();
    for index in [i, j] {
        if index >= len {
            return Err(GerberError::IndexOutOfRange { index, len });
        }
    }
    Ok(tally(returns, thresholds.levels(), i, j).grid)
}
