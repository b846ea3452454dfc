//! General complex eigenproblem.
//!
//! Primary route: Householder reduction to Hessenberg form, then shifted QR
//! with Givens rotations down to a complex Schur form `A = Z T Z^dag`.
//! Eigenvectors are back-substituted from `T`. When QR stalls we fall back to
//! the characteristic polynomial (Faddeev-LeVerrier) and Aberth iteration,
//! with eigenvectors taken from the smallest right singular vector of
//! `A - lambda I`.

use num_complex::Complex64;

use super::{svd, ComplexMatrix, ComplexVector, ONE, ZERO};
use crate::error::{Error, Result};

pub const MAX_DIM: usize = 16;
const MAX_QR_ITERATIONS: usize = 100;
const MAX_ABERTH_ITERATIONS: usize = 500;

#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: Complex64,
    /// Unit 2-norm.
    pub vector: ComplexVector,
    /// `||A v - lambda v||_2`.
    pub residual: f64,
}

/// All eigenpairs of a square matrix, counted with multiplicity.
pub fn eigenpairs(a: &ComplexMatrix) -> Result<Vec<EigenPair>> {
    check_input(a)?;
    match schur(a) {
        Some((t, z)) => Ok(schur_eigenpairs(a, &t, &z)),
        None => eigenpairs_charpoly(a),
    }
}

/// Fallback route, exposed so it can be exercised directly.
pub fn eigenpairs_charpoly(a: &ComplexMatrix) -> Result<Vec<EigenPair>> {
    check_input(a)?;
    let n = a.rows();
    let coeffs = characteristic_polynomial(a)?;
    let roots = polynomial_roots(&coeffs)?;
    roots
        .into_iter()
        .map(|lambda| {
            let d = svd(&a.shifted(lambda))?;
            let vector = d.v.column(n - 1);
            let residual = residual(a, lambda, &vector);
            Ok(EigenPair {
                value: lambda,
                vector,
                residual,
            })
        })
        .collect()
}

fn check_input(a: &ComplexMatrix) -> Result<()> {
    a.check_square()?;
    a.check_finite()?;
    if a.rows() > MAX_DIM {
        return Err(Error::invalid(format!(
            "dense eigensolver supports n <= {MAX_DIM}, got {}",
            a.rows()
        )));
    }
    Ok(())
}

fn residual(a: &ComplexMatrix, lambda: Complex64, v: &ComplexVector) -> f64 {
    a.apply(v).axpy(-lambda, v).norm()
}

/// Coefficients `c_0..c_n` (ascending powers, `c_n = 1`) of `det(lambda I - A)`
/// via the Faddeev-LeVerrier recursion.
pub fn characteristic_polynomial(a: &ComplexMatrix) -> Result<Vec<Complex64>> {
    a.check_square()?;
    a.check_finite()?;
    let n = a.rows();
    let mut c = vec![ZERO; n + 1];
    c[n] = ONE;
    let mut m = ComplexMatrix::zeros(n, n);
    for k in 1..=n {
        let mut next = a.matmul(&m);
        for i in 0..n {
            next[(i, i)] += c[n - k + 1];
        }
        m = next;
        c[n - k] = -a.matmul(&m).trace() / k as f64;
    }
    Ok(c)
}

/// Roots of a polynomial given by ascending coefficients, by Aberth iteration.
pub fn polynomial_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let deg = coeffs.iter().rposition(|z| *z != ZERO).unwrap_or(0);
    if deg == 0 {
        return Ok(Vec::new());
    }
    let coeffs = &coeffs[..=deg];
    let lead = coeffs[deg];
    let radius = 1.0
        + coeffs[..deg]
            .iter()
            .map(|c| (c / lead).norm())
            .fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..deg)
        .map(|k| {
            Complex64::from_polar(
                0.5 * radius,
                0.4 + 2.0 * std::f64::consts::PI * k as f64 / deg as f64,
            )
        })
        .collect();

    let eval = |x: Complex64| {
        let mut p = ZERO;
        let mut dp = ZERO;
        for &c in coeffs.iter().rev() {
            dp = dp * x + p;
            p = p * x + c;
        }
        (p, dp)
    };

    for _ in 0..MAX_ABERTH_ITERATIONS {
        let mut max_step = 0.0_f64;
        for i in 0..deg {
            let (p, dp) = eval(z[i]);
            if p == ZERO {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..deg)
                .filter(|&j| j != i)
                .map(|j| ONE / (z[i] - z[j]))
                .sum();
            let w = ratio / (ONE - ratio * repulsion);
            if !(w.re.is_finite() && w.im.is_finite()) {
                continue;
            }
            z[i] -= w;
            max_step = max_step.max(w.norm() / (1.0 + z[i].norm()));
        }
        if max_step <= 4.0 * f64::EPSILON {
            return Ok(z);
        }
    }
    // Multiple roots converge only linearly; accept what we have if it is
    // a genuine root cluster.
    if z.iter().all(|&x| x.re.is_finite() && x.im.is_finite()) {
        Ok(z)
    } else {
        Err(Error::NumericalFailure("Aberth iteration diverged".into()))
    }
}

/// Complex Schur decomposition `(T, Z)` with `A = Z T Z^dag`, or `None` if
/// the QR iteration stalls.
fn schur(a: &ComplexMatrix) -> Option<(ComplexMatrix, ComplexMatrix)> {
    let n = a.rows();
    let mut h = a.clone();
    let mut z = ComplexMatrix::identity(n);
    hessenberg(&mut h, &mut z);
    if n == 1 {
        return Some((h, z));
    }

    let mut hi = n - 1;
    let mut its = 0;
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let mut s = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            if s == 0.0 {
                s = window_norm(&h, 0, hi);
            }
            if h[(l, l - 1)].norm() <= f64::EPSILON * s {
                h[(l, l - 1)] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            its = 0;
            continue;
        }
        its += 1;
        if its > MAX_QR_ITERATIONS {
            return None;
        }
        let mu = if its % 10 == 0 {
            h[(hi, hi)] + 0.75 * h[(hi, hi - 1)].norm()
        } else {
            wilkinson_shift(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };
        qr_step(&mut h, &mut z, l, hi, mu);
    }
    for i in 1..n {
        for j in 0..i {
            h[(i, j)] = ZERO;
        }
    }
    Some((h, z))
}

fn window_norm(h: &ComplexMatrix, lo: usize, hi: usize) -> f64 {
    let mut s = 0.0_f64;
    for i in lo..=hi {
        for j in lo..=hi {
            s += h[(i, j)].norm_sqr();
        }
    }
    s.sqrt()
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = 0.5 * (a - d);
    let disc = (half * half + b * c).sqrt();
    let mid = 0.5 * (a + d);
    let (r1, r2) = (mid + disc, mid - disc);
    if (r1 - d).norm() <= (r2 - d).norm() {
        r1
    } else {
        r2
    }
}

/// Returns `(c, s)` with real `c` such that `[[c, s], [-conj(s), c]] (x, y)^T = (r, 0)^T`.
fn givens(x: Complex64, y: Complex64) -> (f64, Complex64) {
    let ax = x.norm();
    let ay = y.norm();
    if ay == 0.0 {
        return (1.0, ZERO);
    }
    if ax == 0.0 {
        return (0.0, ONE);
    }
    let r = ax.hypot(ay);
    (ax / r, (x / ax) * y.conj() / r)
}

fn qr_step(h: &mut ComplexMatrix, z: &mut ComplexMatrix, lo: usize, hi: usize, mu: Complex64) {
    let n = h.rows();
    for i in lo..=hi {
        h[(i, i)] -= mu;
    }
    let mut rots = Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
        for j in k..n {
            let (x, y) = (h[(k, j)], h[(k + 1, j)]);
            h[(k, j)] = x * c + s * y;
            h[(k + 1, j)] = -s.conj() * x + y * c;
        }
        h[(k + 1, k)] = ZERO;
        rots.push((c, s));
    }
    for (offset, &(c, s)) in rots.iter().enumerate() {
        let k = lo + offset;
        for i in 0..=(k + 1).min(hi) {
            let (x, y) = (h[(i, k)], h[(i, k + 1)]);
            h[(i, k)] = x * c + y * s.conj();
            h[(i, k + 1)] = -x * s + y * c;
        }
        for i in 0..n {
            let (x, y) = (z[(i, k)], z[(i, k + 1)]);
            z[(i, k)] = x * c + y * s.conj();
            z[(i, k + 1)] = -x * s + y * c;
        }
    }
    for i in lo..=hi {
        h[(i, i)] += mu;
    }
}

fn hessenberg(h: &mut ComplexMatrix, z: &mut ComplexMatrix) {
    let n = h.rows();
    for k in 0..n.saturating_sub(2) {
        let x: Vec<Complex64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let tail: f64 = x[1..].iter().map(|v| v.norm_sqr()).sum();
        if tail == 0.0 {
            continue;
        }
        let xnorm = (x[0].norm_sqr() + tail).sqrt();
        let phase = if x[0] == ZERO {
            ONE
        } else {
            x[0] / x[0].norm()
        };
        let alpha = -phase * xnorm;
        let mut v = x;
        v[0] -= alpha;
        let vnorm = super::frobenius(&v);
        for vi in v.iter_mut() {
            *vi /= vnorm;
        }
        // H <- P H, rows k+1..n
        for j in 0..n {
            let s: Complex64 = v
                .iter()
                .enumerate()
                .map(|(i, vi)| vi.conj() * h[(k + 1 + i, j)])
                .sum();
            for (i, vi) in v.iter().enumerate() {
                h[(k + 1 + i, j)] -= 2.0 * vi * s;
            }
        }
        // H <- H P, Z <- Z P, columns k+1..n
        for m in [&mut *h, &mut *z] {
            for i in 0..n {
                let s: Complex64 = v
                    .iter()
                    .enumerate()
                    .map(|(j, vj)| m[(i, k + 1 + j)] * vj)
                    .sum();
                for (j, vj) in v.iter().enumerate() {
                    m[(i, k + 1 + j)] -= 2.0 * s * vj.conj();
                }
            }
        }
        h[(k + 1, k)] = alpha;
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
}

fn schur_eigenpairs(a: &ComplexMatrix, t: &ComplexMatrix, z: &ComplexMatrix) -> Vec<EigenPair> {
    let n = t.rows();
    let smin = (f64::EPSILON * t.frobenius_norm()).max(f64::MIN_POSITIVE);
    (0..n)
        .map(|k| {
            let lambda = t[(k, k)];
            let mut x = vec![ZERO; n];
            x[k] = ONE;
            for j in (0..k).rev() {
                let s: Complex64 = (j + 1..=k).map(|l| t[(j, l)] * x[l]).sum();
                let mut d = t[(j, j)] - lambda;
                if d.norm() < smin {
                    d = Complex64::new(smin, 0.0);
                }
                x[j] = -s / d;
                let big = x.iter().map(|v| v.norm()).fold(0.0, f64::max);
                if big > 1e100 {
                    for v in x.iter_mut() {
                        *v /= big;
                    }
                }
            }
            let v = z.apply(&ComplexVector::from_vec_unchecked(x));
            let vector = v.scale_real(1.0 / v.norm());
            let residual = residual(a, lambda, &vector);
            EigenPair {
                value: lambda,
                vector,
                residual,
            }
        })
        .collect()
}
