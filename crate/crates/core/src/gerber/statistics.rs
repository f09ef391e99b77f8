use ndarray::Array2;

use super::{CountMatrices, GerberMatrix, Variant};
use crate::error::{GerberError, Result};

/// Limit on the disagreement between the two matrix forms of GS1.
pub const GS1_FORM_TOLERANCE: f64 = 1e-12;

/// The original statistic, `(N_conc − N_disc) ⊘ (N_conc + N_disc)`.
///
/// Pairs with no joint piercing have a zero denominator. Those cells are set
/// to 0 off the diagonal and 1 on it, and are listed in
/// [`GerberMatrix::convention_cells`].
pub fn gerber_original(cm: &CountMatrices) -> GerberMatrix {
    let k = cm.assets();
    let mut values = Array2::zeros((k, k));
    let mut convention_cells = Vec::new();
    for i in 0..k {
        for j in i..k {
            let num = cm.n_conc[[i, j]] - cm.n_disc[[i, j]];
            let den = cm.n_conc[[i, j]] + cm.n_disc[[i, j]];
            let g = if den == 0 {
                convention_cells.push((i, j));
                if i == j {
                    1.0
                } else {
                    0.0
                }
            } else {
                num as f64 / den as f64
            };
            values[[i, j]] = g;
            values[[j, i]] = g;
        }
    }
    GerberMatrix {
        variant: Variant::Original,
        values,
        meta: cm.meta.clone(),
        convention_cells,
    }
}

fn require_piercings(cm: &CountMatrices) -> Result<()> {
    let never: Vec<String> = (0..cm.assets())
        .filter(|&i| cm.h[[i, i]] == 0)
        .map(|i| cm.meta.asset_labels[i].clone())
        .collect();
    if never.is_empty() {
        Ok(())
    } else {
        Err(GerberError::NeverPierces { labels: never })
    }
}

/// GS1 via Hadamard division, `H ⊘ (h hᵀ)` with `h = sqrt(diag H)`.
///
/// The denominator `h_i h_j` is evaluated as `sqrt(H_ii H_jj)`: the product is
/// an exact integer, so a single rounding keeps the diagonal at exactly 1
/// and every entry inside [−1, 1]. The result is checked against the
/// congruence form [`gs1_scaled_form`].
pub fn gerber_gs1(cm: &CountMatrices) -> Result<GerberMatrix> {
    require_piercings(cm)?;
    let k = cm.assets();
    let mut values = Array2::zeros((k, k));
    for i in 0..k {
        for j in i..k {
            let scale = (cm.h[[i, i]] as f64 * cm.h[[j, j]] as f64).sqrt();
            let g = cm.h[[i, j]] as f64 / scale;
            values[[i, j]] = g;
            values[[j, i]] = g;
        }
    }
    let scaled = gs1_scaled_form(cm)?;
    let difference = max_abs_difference(&values, &scaled);
    if difference > GS1_FORM_TOLERANCE {
        return Err(GerberError::FormMismatch {
            difference,
            limit: GS1_FORM_TOLERANCE,
        });
    }
    Ok(GerberMatrix {
        variant: Variant::Gs1,
        values,
        meta: cm.meta.clone(),
        convention_cells: Vec::new(),
    })
}

/// GS1 as the congruence `JᵀHJ` with `J = diag(1 / sqrt(H_ii))`, formed by
/// dense matrix products.
pub fn gs1_scaled_form(cm: &CountMatrices) -> Result<Array2<f64>> {
    require_piercings(cm)?;
    let k = cm.assets();
    let mut j = Array2::<f64>::zeros((k, k));
    for i in 0..k {
        j[[i, i]] = 1.0 / (cm.h[[i, i]] as f64).sqrt();
    }
    let h = cm.h.mapv(|v| v as f64);
    Ok(j.t().dot(&h).dot(&j))
}

/// GS2, `(FᵀF)_ij / (T − n^NN_ij)` with `n^NN = PᵀP`.
pub fn gerber_gs2(cm: &CountMatrices, neutral: &Array2<i64>) -> Result<GerberMatrix> {
    let k = cm.assets();
    if neutral.dim() != (k, k) {
        return Err(GerberError::DimensionMismatch {
            expected: format!("{k}x{k} neutral counts"),
            found: format!("{}x{}", neutral.nrows(), neutral.ncols()),
        });
    }
    let periods = cm.periods() as i64;
    let labels = &cm.meta.asset_labels;
    let mut excluded = Vec::new();
    let mut values = Array2::zeros((k, k));
    for i in 0..k {
        for j in i..k {
            let den = periods - neutral[[i, j]];
            if den <= 0 {
                excluded.push((labels[i].clone(), labels[j].clone()));
                continue;
            }
            let g = cm.h[[i, j]] as f64 / den as f64;
            values[[i, j]] = g;
            values[[j, i]] = g;
        }
    }
    if !excluded.is_empty() {
        return Err(GerberError::AllNeutralPairs { pairs: excluded });
    }
    Ok(GerberMatrix {
        variant: Variant::Gs2,
        values,
        meta: cm.meta.clone(),
        convention_cells: Vec::new(),
    })
}

/// `Σ = diag(σ) G diag(σ)`.
pub fn covariance_from_gerber(g: &GerberMatrix, sigmas: &[f64]) -> Result<Array2<f64>> {
    let k = g.assets();
    if sigmas.len() != k {
        return Err(GerberError::DimensionMismatch {
            expected: format!("{k} standard deviations"),
            found: sigmas.len().to_string(),
        });
    }
    if let Some((index, &value)) = sigmas
        .iter()
        .enumerate()
        .find(|(_, s)| !(s.is_finite() && **s > 0.0))
    {
        return Err(GerberError::InvalidSigma { index, value });
    }
    let mut cov = Array2::zeros((k, k));
    for i in 0..k {
        for j in i..k {
            let v = sigmas[i] * g.values[[i, j]] * sigmas[j];
            cov[[i, j]] = v;
            cov[[j, i]] = v;
        }
    }
    Ok(cov)
}

pub fn max_abs_difference(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    assert_eq!(a.dim(), b.dim());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
