use ndarray::Array2;

use crate::error::{GerberError, Result};

/// Inputs whose mirrored entries differ by more than this (relative to
/// `max(1, max |m_ij|)`) are rejected as asymmetric.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

const MAX_SWEEPS: usize = 100;

pub fn check_symmetric(m: &Array2<f64>) -> Result<()> {
    let (rows, cols) = m.dim();
    if rows != cols {
        return Err(GerberError::DimensionMismatch {
            expected: "square matrix".into(),
            found: format!("{rows}x{cols}"),
        });
    }
    if rows == 0 {
        return Err(GerberError::DimensionMismatch {
            expected: "at least one row".into(),
            found: "0x0".into(),
        });
    }
    if let Some(((row, column), _)) = m.indexed_iter().find(|(_, v)| !v.is_finite()) {
        return Err(GerberError::NonFiniteValue { row, column });
    }
    let scale = m.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    for i in 0..rows {
        for j in (i + 1)..rows {
            let difference = (m[[i, j]] - m[[j, i]]).abs();
            if difference > SYMMETRY_TOLERANCE * scale {
                return Err(GerberError::Asymmetric {
                    row: i,
                    column: j,
                    difference,
                });
            }
        }
    }
    Ok(())
}

/// All eigenvalues of a symmetric matrix by cyclic Jacobi rotations, in
/// ascending order. The input is symmetrized as `(M + Mᵀ)/2` first.
pub fn symmetric_eigenvalues(m: &Array2<f64>) -> Result<Vec<f64>> {
    check_symmetric(m)?;
    let n = m.nrows();
    let mut a = Array2::from_shape_fn((n, n), |(i, j)| 0.5 * (m[[i, j]] + m[[j, i]]));

    let norm2: f64 = a.iter().map(|v| v * v).sum();
    let target = (1e-17 * 1e-17) * norm2;

    for sweep in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[[p, q]] * a[[p, q]];
            }
        }
        if off <= target || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[[p, q]];
                if apq == 0.0 {
                    continue;
                }
                // negligible next to both diagonal entries: drop it
                let g = 100.0 * apq.abs();
                if sweep > 3
                    && a[[p, p]].abs() + g == a[[p, p]].abs()
                    && a[[q, q]].abs() + g == a[[q, q]].abs()
                {
                    a[[p, q]] = 0.0;
                    a[[q, p]] = 0.0;
                    continue;
                }
                let theta = (a[[q, q]] - a[[p, p]]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[[k, p]], a[[k, q]]);
                    a[[k, p]] = c * akp - s * akq;
                    a[[k, q]] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[[p, k]], a[[q, k]]);
                    a[[p, k]] = c * apk - s * aqk;
                    a[[q, k]] = s * apk + c * aqk;
                }
                a[[p, q]] = 0.0;
                a[[q, p]] = 0.0;
            }
        }
    }
    let mut eig: Vec<f64> = a.diag().to_vec();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

/// Smallest and largest eigenvalue.
pub fn symmetric_eigen_extremes(m: &Array2<f64>) -> Result<(f64, f64)> {
    let eig = symmetric_eigenvalues(m)?;
    Ok((eig[0], eig[eig.len() - 1]))
}

/// Attempts `M + shift·I = L Lᵀ`; succeeds when every pivot is strictly positive.
pub fn cholesky_succeeds(m: &Array2<f64>, shift: f64) -> bool {
    let n = m.nrows();
    let mut l = Array2::<f64>::zeros((n, n));
    for j in 0..n {
        let mut pivot = m[[j, j]] + shift;
        for k in 0..j {
            pivot -= l[[j, k]] * l[[j, k]];
        }
        if pivot.is_nan() || pivot <= 0.0 {
            return false;
        }
        let ljj = pivot.sqrt();
        l[[j, j]] = ljj;
        for i in (j + 1)..n {
            let mut v = m[[i, j]];
            for k in 0..j {
                v -= l[[i, k]] * l[[j, k]];
            }
            l[[i, j]] = v / ljj;
        }
    }
    true
}
