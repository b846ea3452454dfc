//! LU factorization with partial pivoting for square solves and inverses.

use num_complex::Complex64;

use super::{ComplexMatrix, ComplexVector};
use crate::error::{Error, Result};

struct Lu {
    n: usize,
    lu: ComplexMatrix,
    perm: Vec<usize>,
}

fn factor(a: &ComplexMatrix) -> Result<Lu> {
    a.check_square()?;
    a.check_finite()?;
    let n = a.rows();
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| lu[(i, k)].norm().total_cmp(&lu[(j, k)].norm()))
            .unwrap();
        if lu[(p, k)].norm() == 0.0 {
            return Err(Error::Singular);
        }
        if p != k {
            for j in 0..n {
                let tmp = lu[(k, j)];
                lu[(k, j)] = lu[(p, j)];
                lu[(p, j)] = tmp;
            }
            perm.swap(k, p);
        }
        let pivot = lu[(k, k)];
        for i in k + 1..n {
            let f = lu[(i, k)] / pivot;
            lu[(i, k)] = f;
            if f != Complex64::new(0.0, 0.0) {
                for j in k + 1..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= f * u;
                }
            }
        }
    }
    Ok(Lu { n, lu, perm })
}

impl Lu {
    fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let l = self.lu[(i, j)];
                x[i] = x[i] - l * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let u = self.lu[(i, j)];
                x[i] = x[i] - u * x[j];
            }
            x[i] /= self.lu[(i, i)];
        }
        x
    }
}

/// Solves `A x = b` for square nonsingular `A`.
pub fn solve(a: &ComplexMatrix, b: &ComplexVector) -> Result<ComplexVector> {
    if a.rows() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} system with rhs of {}",
            a.rows(),
            a.cols(),
            b.dim()
        )));
    }
    let f = factor(a)?;
    let x = ComplexVector::from_vec_unchecked(f.solve(b.as_slice()));
    if !x.is_finite() {
        return Err(Error::Singular);
    }
    Ok(x)
}

pub fn inverse(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let f = factor(a)?;
    let n = f.n;
    let mut inv = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        let col = f.solve(ComplexVector::basis(n, j).as_slice());
        for (i, z) in col.into_iter().enumerate() {
            inv[(i, j)] = z;
        }
    }
    if !inv.is_finite() {
        return Err(Error::Singular);
    }
    Ok(inv)
}
