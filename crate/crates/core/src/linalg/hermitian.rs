//! Hermitian eigenvalues via cyclic Jacobi on the real symmetric embedding
//! `[[Re H, -Im H], [Im H, Re H]]`, whose spectrum is that of `H` doubled.

use serde::{Deserialize, Serialize};

use super::ComplexMatrix;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Real eigenvalues of a Hermitian matrix, sorted descending.
///
/// Only the Hermitian part `(H + H^dag)/2` is used; callers that care about
/// the anti-Hermitian remainder should check it first.
pub fn hermitian_eigenvalues(h: &ComplexMatrix) -> Result<Vec<f64>> {
    h.check_square()?;
    h.check_finite()?;
    let n = h.rows();
    let m = 2 * n;
    let mut a = vec![0.0_f64; m * m];
    for i in 0..n {
        for j in 0..n {
            let z = 0.5 * (h[(i, j)] + h[(j, i)].conj());
            a[i * m + j] = z.re;
            a[(i + n) * m + j + n] = z.re;
            a[i * m + j + n] = -z.im;
            a[(i + n) * m + j] = z.im;
        }
    }
    let mut diag = jacobi_symmetric(&mut a, m)?;
    diag.sort_by(|x, y| y.total_cmp(x));
    Ok(diag.into_iter().step_by(2).collect())
}

fn jacobi_symmetric(a: &mut [f64], m: usize) -> Result<Vec<f64>> {
    let fro = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let floor = 1e-17 * fro;
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..m {
            for q in p + 1..m {
                let apq = a[p * m + q];
                if apq.abs() <= floor {
                    continue;
                }
                rotated = true;
                let theta = (a[q * m + q] - a[p * m + p]) / (2.0 * apq);
                let t = if theta >= 0.0 { 1.0 } else { -1.0 }
                    / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..m {
                    let (x, y) = (a[k * m + p], a[k * m + q]);
                    a[k * m + p] = c * x - s * y;
                    a[k * m + q] = s * x + c * y;
                }
                for k in 0..m {
                    let (x, y) = (a[p * m + k], a[q * m + k]);
                    a[p * m + k] = c * x - s * y;
                    a[q * m + k] = s * x + c * y;
                }
                a[p * m + q] = 0.0;
                a[q * m + p] = 0.0;
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NumericalFailure(
            "Hermitian Jacobi did not converge".into(),
        ));
    }
    Ok((0..m).map(|i| a[i * m + i]).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsdReport {
    pub is_psd: bool,
    /// Descending.
    pub eigenvalues: Vec<f64>,
}

/// Positive-semidefiniteness test: every eigenvalue must be at least
/// `-tol * max(1, max |lambda|)`.
pub fn is_positive_semidefinite(h: &ComplexMatrix, tol: f64) -> Result<PsdReport> {
    h.check_square()?;
    h.check_finite()?;
    if !(tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let asymmetry = (h - &h.adjoint()).frobenius_norm();
    let limit = tol * h.frobenius_norm();
    if asymmetry > limit {
        return Err(Error::NotHermitian { asymmetry, limit });
    }
    let eigenvalues = hermitian_eigenvalues(h)?;
    let scale = eigenvalues.iter().fold(1.0_f64, |acc, x| acc.max(x.abs()));
    let is_psd = eigenvalues.iter().all(|&x| x >= -tol * scale);
    Ok(PsdReport {
        is_psd,
        eigenvalues,
    })
}
