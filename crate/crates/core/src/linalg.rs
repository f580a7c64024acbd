//! Small dense linear-algebra helpers shared by the smoothers and
//! discriminant builders: symmetrization, PSD projection/checks, guarded
//! SPD inversion with log-determinant, Gaussian log-densities, and
//! log-sum-exp.
//!
//! State dimensions here are tiny (d <= 3 in the experiments), so
//! eigendecomposition-based routines are used throughout for robustness
//! rather than speed.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Condition-number guard applied to every covariance inversion.
pub const COND_MAX: f64 = 1e12;

pub const LN_2PI: f64 = 1.8378770664093453;

/// Returns the symmetric part `(m + m^T) / 2`.
pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Maximum absolute deviation from symmetry.
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// Smallest eigenvalue of the symmetric part of `m`.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let eig = SymmetricEigen::new(symmetrize(m));
    eig.eigenvalues.iter().fold(f64::INFINITY, |a, &b| a.min(b))
}

/// Verifies that `m` is square of size `dim`, symmetric within `sym_tol`,
/// and PSD within `eig_tol`. `name` is used in the error message.
pub fn check_psd(m: &DMatrix<f64>, dim: usize, name: &str, sym_tol: f64, eig_tol: f64) -> Result<()> {
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::Dimension(format!(
            "{name} must be {dim}x{dim}, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if asymmetry(m) > sym_tol {
        return Err(Error::NotPsd {
            name: name.to_string(),
            min_eig: f64::NAN,
        });
    }
    let min_eig = min_eigenvalue(m);
    if min_eig < -eig_tol {
        return Err(Error::NotPsd {
            name: name.to_string(),
            min_eig,
        });
    }
    Ok(())
}

/// Projects a (near-)symmetric matrix onto the PSD cone by clamping
/// eigenvalues at `floor`. Idempotent; output is exactly symmetric.
pub fn psd_project(m: &DMatrix<f64>, floor: f64) -> DMatrix<f64> {
    let sym = symmetrize(m);
    let eig = SymmetricEigen::new(sym);
    let mut vals = eig.eigenvalues.clone();
    let mut changed = false;
    for v in vals.iter_mut() {
        if *v < floor {
            *v = floor;
            changed = true;
        }
    }
    if !changed {
        // Return the symmetrized input untouched so already-PSD matrices
        // round-trip exactly.
        return symmetrize(m);
    }
    let rebuilt = &eig.eigenvectors * DMatrix::from_diagonal(&vals) * eig.eigenvectors.transpose();
    symmetrize(&rebuilt)
}

/// Inverse and log-determinant of a symmetric positive-definite matrix,
/// with a condition-number guard at [`COND_MAX`].
///
/// Returns the condition number alongside so callers can report it.
pub fn spd_inverse(m: &DMatrix<f64>) -> Result<SpdInverse> {
    let sym = symmetrize(m);
    let eig = SymmetricEigen::new(sym);
    let max_eig = eig.eigenvalues.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let min_eig = eig.eigenvalues.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    if !(max_eig.is_finite() && min_eig.is_finite()) || min_eig <= 0.0 {
        return Err(Error::Singular {
            context: format!("SPD inverse (min eigenvalue {min_eig:.3e})"),
        });
    }
    let cond = max_eig / min_eig;
    if cond > COND_MAX {
        return Err(Error::Singular {
            context: format!("SPD inverse (condition number {cond:.3e})"),
        });
    }
    let inv_vals = eig.eigenvalues.map(|v| 1.0 / v);
    let inverse =
        &eig.eigenvectors * DMatrix::from_diagonal(&inv_vals) * eig.eigenvectors.transpose();
    let log_det = eig.eigenvalues.iter().map(|v| v.ln()).sum();
    Ok(SpdInverse {
        inverse: symmetrize(&inverse),
        log_det,
        cond,
    })
}

/// Result of [`spd_inverse`].
pub struct SpdInverse {
    pub inverse: DMatrix<f64>,
    pub log_det: f64,
    pub cond: f64,
}

/// Moore-Penrose pseudo-inverse of a symmetric PSD matrix. Eigenvalues
/// below `rel_cutoff * max_eigenvalue` (or below `abs_cutoff`) are treated
/// as exact zeros, so deterministic (rank-deficient) directions get a zero
/// inverse rather than an explosion.
pub fn psd_pseudo_inverse(m: &DMatrix<f64>, rel_cutoff: f64, abs_cutoff: f64) -> Result<DMatrix<f64>> {
    let sym = symmetrize(m);
    let eig = SymmetricEigen::new(sym);
    let max_eig = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b));
    if !max_eig.is_finite() {
        return Err(Error::Singular {
            context: "pseudo-inverse of non-finite matrix".to_string(),
        });
    }
    let cutoff = abs_cutoff.max(rel_cutoff * max_eig);
    let inv_vals = eig
        .eigenvalues
        .map(|v| if v > cutoff { 1.0 / v } else { 0.0 });
    let inverse =
        &eig.eigenvectors * DMatrix::from_diagonal(&inv_vals) * eig.eigenvectors.transpose();
    Ok(symmetrize(&inverse))
}

/// Log-density of `N(mean, cov)` at `x`, using a precomputed [`SpdInverse`].
pub fn gaussian_log_density(x: &DVector<f64>, mean: &DVector<f64>, inv: &SpdInverse) -> f64 {
    let d = x.len() as f64;
    let diff = x - mean;
    let quad = (diff.transpose() * &inv.inverse * &diff)[(0, 0)];
    -0.5 * (d * LN_2PI + inv.log_det + quad)
}

/// `log(sum(exp(v)))` with max subtraction; `-inf` for an empty or
/// all-`-inf` input.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

/// Condition number (ratio of extreme eigenvalues of the symmetric part);
/// `inf` when the matrix is singular or indefinite.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let eig = SymmetricEigen::new(symmetrize(m));
    let max_eig = eig.eigenvalues.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let min_eig = eig.eigenvalues.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    if min_eig <= 0.0 {
        f64::INFINITY
    } else {
        max_eig / min_eig
    }
}

/// Square-root factor `F` of a PSD matrix with `F F^T = m` (eigenvalue
/// form, so exactly singular covariances are handled). Negative
/// eigenvalues from roundoff are clamped at zero.
pub fn psd_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(symmetrize(m));
    let vals = eig.eigenvalues.map(|v| if v > 0.0 { v.sqrt() } else { 0.0 });
    &eig.eigenvectors * DMatrix::from_diagonal(&vals)
}
