//! Positive semidefiniteness checks for Gerber and covariance matrices.

mod eigen;
mod series;
pub mod witness;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

pub use eigen::{
    check_symmetric, cholesky_succeeds, symmetric_eigen_extremes, symmetric_eigenvalues,
    SYMMETRY_TOLERANCE,
};
pub use series::{squared_form, verify_series_construction, verify_squared_form, SeriesCheck};
pub use witness::{find_non_psd_original, generate_trial, Witness, WitnessMeta, WitnessOutcome};

use crate::error::{GerberError, Result};

pub const DEFAULT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Psd,
    /// Fails the eigenvalue bound, yet a Cholesky factorization succeeds
    /// with a diagonal shift of at most the tolerance.
    Borderline,
    NotPsd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsdReport {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub cholesky_ok: bool,
    /// Smallest shift in {0, tolerance} for which Cholesky succeeded.
    pub cholesky_shift: Option<f64>,
    pub tolerance: f64,
    pub verdict: Verdict,
}

impl PsdReport {
    pub fn is_psd(&self) -> bool {
        self.verdict == Verdict::Psd
    }
}

/// PSD iff `λ_min ≥ −tolerance·max(1, |λ_max|)`.
pub fn check_psd(m: &Array2<f64>, tolerance: f64) -> Result<PsdReport> {
    if !(tolerance.is_finite() && tolerance > 0.0) {
        return Err(GerberError::InvalidTolerance { tolerance });
    }
    let (lambda_min, lambda_max) = symmetric_eigen_extremes(m)?;
    let cholesky_shift = [0.0, tolerance]
        .into_iter()
        .find(|&shift| cholesky_succeeds(m, shift));
    let bound = tolerance * lambda_max.abs().max(1.0);
    let verdict = if lambda_min >= -bound {
        Verdict::Psd
    } else if cholesky_shift.is_some() {
        Verdict::Borderline
    } else {
        Verdict::NotPsd
    };
    Ok(PsdReport {
        lambda_min,
        lambda_max,
        cholesky_ok: cholesky_shift.is_some(),
        cholesky_shift,
        tolerance,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn verdicts() {
        let r = check_psd(&array![[1.0, 1.2], [1.2, 1.0]], DEFAULT_TOLERANCE).unwrap();
        assert_eq!(r.verdict, Verdict::NotPsd);
        assert!(!r.cholesky_ok);

        let r = check_psd(&Array2::zeros((3, 3)), DEFAULT_TOLERANCE).unwrap();
        assert_eq!(r.verdict, Verdict::Psd);
        assert_eq!(r.cholesky_shift, Some(DEFAULT_TOLERANCE));

        let r = check_psd(&Array2::eye(2), DEFAULT_TOLERANCE).unwrap();
        assert_eq!(r.cholesky_shift, Some(0.0));
    }

    #[test]
    fn relative_bound_scales_with_lambda_max() {
        // λ = {-1e-7, 2e4}: within 1e-10·2e4 = 2e-6
        let m = array![[-1e-7, 0.0], [0.0, 2e4]];
        assert!(check_psd(&m, DEFAULT_TOLERANCE).unwrap().is_psd());
        let m = array![[-1e-7, 0.0], [0.0, 1.0]];
        assert!(!check_psd(&m, DEFAULT_TOLERANCE).unwrap().is_psd());
    }

    #[test]
    fn shift_does_not_mask_negative_eigenvalues() {
        let r = check_psd(&array![[-2e-10, 0.0], [0.0, 1.0]], 1e-10).unwrap();
        assert_eq!(r.verdict, Verdict::NotPsd);
        assert_eq!(r.cholesky_shift, None);
        let r = check_psd(&array![[-0.5e-10, 0.0], [0.0, 0.0]], 1e-10).unwrap();
        assert_eq!(r.verdict, Verdict::Psd);
        assert_eq!(r.cholesky_shift, Some(1e-10));
    }

    #[test]
    fn bad_tolerance() {
        assert!(matches!(
            check_psd(&Array2::eye(2), 0.0),
            Err(GerberError::InvalidTolerance { .. })
        ));
    }
}
