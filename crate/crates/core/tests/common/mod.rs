#![allow(dead_code)]

use ep_response::linalg::{ComplexMatrix, ComplexVector};
use num_complex::Complex64;

/// Dense `exp(A)` by scaling and squaring with a truncated Taylor series.
pub fn expm(a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.rows();
    let norm = a.frobenius_norm();
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a.scale_real(0.5f64.powi(squarings as i32));
    let mut sum = ComplexMatrix::identity(n);
    let mut term = ComplexMatrix::identity(n);
    for k in 1..=24 {
        term = term.matmul(&scaled).scale_real(1.0 / k as f64);
        sum = &sum + &term;
    }
    for _ in 0..squarings {
        sum = sum.matmul(&sum);
    }
    sum
}

/// `psi(t) = exp(-i H0 t / hbar) psi0`, with the scalar part `tr(H0)/n`
/// split off so the matrix exponential acts on the traceless remainder.
pub fn propagate(h0: &ComplexMatrix, psi0: &ComplexVector, t: f64, hbar: f64) -> ComplexVector {
    let n = h0.rows();
    let center = h0.trace() / n as f64;
    let step = Complex64::new(0.0, -t / hbar);
    let u = expm(&h0.shifted(center).scale(step));
    u.apply(psi0).scale((step * center).exp())
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs()
}
