//! Singular value decomposition by one-sided (Hestenes) Jacobi rotations.

use num_complex::Complex64;

use super::{ComplexMatrix, ComplexVector, DEFAULT_RANK_TOL, ZERO};
use crate::error::{Error, Result};

const OFF_DIAGONAL_TOL: f64 = 1e-14;
const MAX_SWEEPS: usize = 100;

/// Thin SVD `A = U diag(s) V^dag` with `k = min(rows, cols)` singular triples.
///
/// `v` is always a full set of orthonormal columns. Columns of `u` that belong
/// to a zero singular value are left as zero vectors.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub v: ComplexMatrix,
}

pub fn svd(a: &ComplexMatrix) -> Result<Svd> {
    a.check_finite()?;
    if a.rows() >= a.cols() {
        jacobi_tall(a)
    } else {
        let t = jacobi_tall(&a.adjoint())?;
        Ok(Svd {
            u: t.v,
            singular_values: t.singular_values,
            v: t.u,
        })
    }
}

fn jacobi_tall(a: &ComplexMatrix) -> Result<Svd> {
    let (m, n) = (a.rows(), a.cols());
    let mut cols: Vec<Vec<Complex64>> = (0..n)
        .map(|j| (0..m).map(|i| a[(i, j)]).collect())
        .collect();
    let mut vcols: Vec<Vec<Complex64>> = (0..n)
        .map(|j| ComplexVector::basis(n, j).into_vec())
        .collect();

    let fro2: f64 = cols.iter().flatten().map(|z| z.norm_sqr()).sum();
    let noise_floor = m.max(2) as f64 * f64::EPSILON * fro2;
    let mut converged = false;
    for _sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = cols[q].iter().map(|z| z.norm_sqr()).sum();
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let gamma: Complex64 = cols[p]
                    .iter()
                    .zip(&cols[q])
                    .map(|(x, y)| x.conj() * y)
                    .sum();
                let g = gamma.norm();
                if g <= OFF_DIAGONAL_TOL * (alpha * beta).sqrt() || g <= noise_floor {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut cols, p, q, c, s, phase);
                rotate(&mut vcols, p, q, c, s, phase);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NumericalFailure(format!(
            "Jacobi SVD did not converge in {MAX_SWEEPS} sweeps"
        )));
    }

    let norms: Vec<f64> = cols.iter().map(|c| super::frobenius(c)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));

    let mut u = ComplexMatrix::zeros(m, n);
    let mut v = ComplexMatrix::zeros(n, n);
    let mut singular_values = Vec::with_capacity(n);
    for (k, &j) in order.iter().enumerate() {
        let sigma = norms[j];
        singular_values.push(sigma);
        if sigma > 0.0 {
            for i in 0..m {
                u[(i, k)] = cols[j][i] / sigma;
            }
        }
        for i in 0..n {
            v[(i, k)] = vcols[j][i];
        }
    }
    Ok(Svd {
        u,
        singular_values,
        v,
    })
}

// columns p, q <- (c a_p - s e^{-i phi} a_q, s a_p + c e^{-i phi} a_q)
fn rotate(cols: &mut [Vec<Complex64>], p: usize, q: usize, c: f64, s: f64, phase: Complex64) {
    let (left, right) = cols.split_at_mut(q);
    let (cp, cq) = (&mut left[p], &mut right[0]);
    let ph = phase.conj();
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let yp = ph * *y;
        let nx = *x * c - yp * s;
        let ny = *x * s + yp * c;
        *x = nx;
        *y = ny;
    }
}

/// Singular values in nonincreasing order; `min(rows, cols)` of them.
pub fn singular_values(a: &ComplexMatrix) -> Result<Vec<f64>> {
    Ok(svd(a)?.singular_values)
}

/// Largest singular value.
pub fn spectral_norm(a: &ComplexMatrix) -> Result<f64> {
    Ok(singular_values(a)?[0])
}

/// Number of singular values above `tol * sigma_1`. The zero matrix has rank 0.
pub fn numerical_rank(a: &ComplexMatrix, tol: f64) -> Result<usize> {
    if !(tol > 0.0) {
        return Err(Error::invalid("rank tolerance must be positive"));
    }
    let s = singular_values(a)?;
    Ok(rank_of(&s, tol))
}

pub(crate) fn rank_of(s: &[f64], tol: f64) -> usize {
    let top = s.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > tol * top).count()
}

/// Minimum-norm least-squares solution together with its residual norm.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub solution: ComplexVector,
    pub residual: f64,
    pub rank: usize,
}

/// Applies the rank-truncated pseudoinverse of `a` to `b`.
pub fn min_norm_solve(a: &ComplexMatrix, b: &ComplexVector) -> Result<LeastSquares> {
    if a.rows() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "matrix has {} rows, right-hand side has {} entries",
            a.rows(),
            b.dim()
        )));
    }
    if !b.is_finite() {
        return Err(Error::NonFinite("vector"));
    }
    let dec = svd(a)?;
    let rank = rank_of(&dec.singular_values, DEFAULT_RANK_TOL);
    let mut x = vec![ZERO; a.cols()];
    for k in 0..rank {
        let coeff: Complex64 = (0..a.rows())
            .map(|i| dec.u[(i, k)].conj() * b[i])
            .sum::<Complex64>()
            / dec.singular_values[k];
        for (i, xi) in x.iter_mut().enumerate() {
            *xi += dec.v[(i, k)] * coeff;
        }
    }
    let solution = ComplexVector::from_vec_unchecked(x);
    let residual = (&a.apply(&solution) - b).norm();
    Ok(LeastSquares {
        solution,
        residual,
        rank,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ONE;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn reconstruct(d: &Svd) -> ComplexMatrix {
        let k = d.singular_values.len();
        let mut s = ComplexMatrix::zeros(k, k);
        for i in 0..k {
            s[(i, i)] = c(d.singular_values[i], 0.0);
        }
        let vk = ComplexMatrix::from_row_major(
            d.v.rows(),
            k,
            (0..d.v.rows())
                .flat_map(|i| (0..k).map(move |j| (i, j)))
                .map(|(i, j)| d.v[(i, j)])
                .collect(),
        )
        .unwrap();
        d.u.matmul(&s).matmul(&vk.adjoint())
    }

    #[test]
    fn parallel_columns_converge() {
        let g = 429.05444320024014;
        let a =
            ComplexMatrix::from_row_major(2, 2, vec![c(0.0, -g), c(g, 0.0), c(g, 0.0), c(0.0, g)])
                .unwrap();
        let s = singular_values(&a).unwrap();
        assert!((s[0] - 2.0 * g).abs() < 1e-12 * g);
        assert!(s[1] < 1e-13 * g);
    }

    #[test]
    fn diagonal_case() {
        let a = ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, 2.0]).unwrap();
        assert_eq!(singular_values(&a).unwrap(), vec![2.0, 1.0]);
    }

    #[test]
    fn rank_one_nilpotent() {
        let a = ComplexMatrix::from_rows(&[vec![ZERO, c(3.0, 4.0)], vec![ZERO, ZERO]]).unwrap();
        let s = singular_values(&a).unwrap();
        assert!((s[0] - 5.0).abs() < 1e-14);
        assert_eq!(s[1], 0.0);
        assert_eq!(numerical_rank(&a, 1e-10).unwrap(), 1);
        assert!((spectral_norm(&a).unwrap() - a.frobenius_norm()).abs() < 1e-14);
    }

    #[test]
    fn zero_matrix_has_rank_zero() {
        assert_eq!(
            numerical_rank(&ComplexMatrix::zeros(3, 3), 1e-10).unwrap(),
            0
        );
        assert!(numerical_rank(&ComplexMatrix::zeros(3, 3), 0.0).is_err());
    }

    #[test]
    fn wide_and_tall_shapes_reconstruct() {
        let a = ComplexMatrix::from_rows(&[
            vec![c(1.0, 2.0), c(0.5, -1.0), c(0.0, 3.0)],
            vec![c(-2.0, 0.0), c(1.0, 1.0), c(0.25, 0.0)],
        ])
        .unwrap();
        for m in [a.clone(), a.adjoint()] {
            let d = svd(&m).unwrap();
            assert_eq!(d.singular_values.len(), 2);
            let r = reconstruct(&d);
            assert!((&r - &m).frobenius_norm() < 1e-13);
            let ss: f64 = d.singular_values.iter().map(|x| x * x).sum();
            assert!((ss.sqrt() - m.frobenius_norm()).abs() < 1e-13);
        }
    }

    #[test]
    fn min_norm_identity_and_nilpotent() {
        let b = ComplexVector::new(vec![c(1.0, -2.0), c(0.5, 0.25)]).unwrap();
        let x = min_norm_solve(&ComplexMatrix::identity(2), &b).unwrap();
        assert!((&x.solution - &b).norm() < 1e-15);

        let a = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        let r = min_norm_solve(&a, &ComplexVector::basis(2, 0)).unwrap();
        assert!((r.solution[0]).norm() < 1e-15);
        assert!((r.solution[1] - ONE).norm() < 1e-15);
        assert!(r.residual < 1e-15);
        assert_eq!(r.rank, 1);
    }

    #[test]
    fn min_norm_reports_inconsistent_residual() {
        let a = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        let r = min_norm_solve(&a, &ComplexVector::basis(2, 1)).unwrap();
        assert!(r.solution.norm() < 1e-15);
        assert!((r.residual - 1.0).abs() < 1e-15);
        assert!(min_norm_solve(&a, &ComplexVector::basis(3, 1)).is_err());
    }
}
