//! Exceptional-point verification and the quantities intrinsic to an EP:
//! nilpotent part, Green's coefficients, normalized Jordan chain, the two
//! response strengths, the decay operator and the passivity bounds.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    self, inverse, is_positive_semidefinite, min_norm_solve, numerical_rank, spectral_norm, svd,
    ComplexMatrix, ComplexScalar, ComplexVector, DEFAULT_RANK_TOL,
};

/// Relative nilpotency tolerance used by [`verify_ep`] unless overridden.
pub const DEFAULT_NIL_TOL: f64 = 1e-8;

/// Default tolerance for the positive-semidefiniteness test of the decay operator.
pub const DEFAULT_PSD_TOL: f64 = 1e-10;

/// Machine-checkable witness that `H0 - E_EP` is nilpotent of index `order`
/// with a one-dimensional kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpCertificate {
    pub ok: bool,
    pub order: usize,
    /// `||N^order||_F / ||N||_F^order`.
    pub nilpotency_residual: f64,
    /// `||N^(order-1)||_F / ||N||_F^(order-1)`; must stay above the tolerance.
    pub index_witness: f64,
    pub rank_of_n: usize,
    pub geometric_multiplicity: usize,
    pub tolerance: f64,
    pub diagnostics: String,
}

/// `trace(H0) / n`, exact at an EP because the nilpotent part is traceless.
pub fn estimate_eigenvalue(h0: &ComplexMatrix) -> Result<ComplexScalar> {
    h0.check_square()?;
    h0.check_finite()?;
    Ok(h0.trace() / h0.rows() as f64)
}

pub fn verify_ep(
    h0: &ComplexMatrix,
    eigenvalue_ep: ComplexScalar,
    order: usize,
    tol: f64,
) -> Result<EpCertificate> {
    h0.check_square()?;
    h0.check_finite()?;
    if order < 2 {
        return Err(Error::invalid(format!(
            "EP order must be at least 2, got {order}"
        )));
    }
    if h0.rows() != order {
        return Err(Error::DimensionMismatch(format!(
            "Hamiltonian dimension {} differs from EP order {order}; projection onto the \
             generalized eigenspace is not supported",
            h0.rows()
        )));
    }
    if !(tol > 0.0) || !eigenvalue_ep.re.is_finite() || !eigenvalue_ep.im.is_finite() {
        return Err(Error::invalid("tolerance must be positive and E_EP finite"));
    }

    let n_mat = h0.shifted(eigenvalue_ep);
    let n_norm = n_mat.frobenius_norm();
    let (nilpotency_residual, index_witness) = if n_norm == 0.0 {
        (0.0, 0.0)
    } else {
        let scaled = n_mat.scale_real(1.0 / n_norm);
        let below = scaled.pow(order - 1);
        let top = below.matmul(&scaled);
        (top.frobenius_norm(), below.frobenius_norm())
    };
    let rank_of_n = numerical_rank(&n_mat, DEFAULT_RANK_TOL)?;
    let geometric_multiplicity = order - rank_of_n;

    let mut problems = Vec::new();
    if nilpotency_residual > tol {
        problems.push(format!(
            "N^{order} is not zero (relative norm {nilpotency_residual:.3e} > {tol:.1e})"
        ));
    }
    if index_witness <= tol {
        problems.push(format!(
            "N^{} vanishes (relative norm {index_witness:.3e}), so the nilpotency index is below {order}",
            order - 1
        ));
    }
    if rank_of_n != order - 1 {
        problems.push(format!(
            "geometric multiplicity is {geometric_multiplicity} (rank of N = {rank_of_n}, expected {})",
            order - 1
        ));
    }
    let ok = problems.is_empty();
    let diagnostics = if ok {
        format!("EP of order {order}: N nilpotent of index {order}, geometric multiplicity 1")
    } else {
        problems.join("; ")
    };
    Ok(EpCertificate {
        ok,
        order,
        nilpotency_residual,
        index_witness,
        rank_of_n,
        geometric_multiplicity,
        tolerance: tol,
        diagnostics,
    })
}

/// A verified exceptional point together with everything derived from it.
/// Immutable after construction.
#[derive(Debug, Clone)]
pub struct EpSystem {
    h0: ComplexMatrix,
    eigenvalue_ep: ComplexScalar,
    order: usize,
    nilpotent: ComplexMatrix,
    green_coeffs: Vec<ComplexMatrix>,
    jordan_chain: Vec<ComplexVector>,
    certificate: EpCertificate,
    xi: f64,
    zeta: f64,
}

pub fn build_ep_system(
    h0: &ComplexMatrix,
    eigenvalue_ep: ComplexScalar,
    order: usize,
    tol: f64,
) -> Result<EpSystem> {
    let certificate = verify_ep(h0, eigenvalue_ep, order, tol)?;
    if !certificate.ok {
        return Err(Error::NotAnEp(Box::new(certificate)));
    }
    let nilpotent = h0.shifted(eigenvalue_ep);
    let green_coeffs = green_coefficients(&nilpotent, order);
    let jordan_chain = chain_from_nilpotent(&nilpotent)?;
    let xi = spectral_norm(&green_coeffs[order - 1])?;
    let zeta = zeta_from_chain(&jordan_chain, xi);
    Ok(EpSystem {
        h0: h0.clone(),
        eigenvalue_ep,
        order,
        nilpotent,
        green_coeffs,
        jordan_chain,
        certificate,
        xi,
        zeta,
    })
}

impl EpSystem {
    pub fn h0(&self) -> &ComplexMatrix {
        &self.h0
    }

    pub fn eigenvalue_ep(&self) -> ComplexScalar {
        self.eigenvalue_ep
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn nilpotent(&self) -> &ComplexMatrix {
        &self.nilpotent
    }

    /// `[G_1, .., G_n]` with `G_k = N^(k-1)`.
    pub fn green_coeffs(&self) -> &[ComplexMatrix] {
        &self.green_coeffs
    }

    /// `G_n = N^(n-1)`, the rank-1 leading coefficient.
    pub fn leading_green(&self) -> &ComplexMatrix {
        &self.green_coeffs[self.order - 1]
    }

    pub fn jordan_chain(&self) -> &[ComplexVector] {
        &self.jordan_chain
    }

    /// The EP eigenvector `j_1`, unit norm.
    pub fn eigenvector(&self) -> &ComplexVector {
        &self.jordan_chain[0]
    }

    pub fn certificate(&self) -> &EpCertificate {
        &self.certificate
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    /// Leading-order resolvent `sum_k G_k / (E - E_EP)^k`.
    pub fn green_expansion(&self, energy: ComplexScalar) -> ComplexMatrix {
        let delta = energy - self.eigenvalue_ep;
        let n = self.order;
        let mut out = ComplexMatrix::zeros(n, n);
        let mut factor = Complex64::new(1.0, 0.0);
        for g in &self.green_coeffs {
            factor /= delta;
            out = &out + &g.scale(factor);
        }
        out
    }
}

pub fn green_coefficients(nilpotent: &ComplexMatrix, order: usize) -> Vec<ComplexMatrix> {
    let mut out = Vec::with_capacity(order);
    let mut g = ComplexMatrix::identity(nilpotent.rows());
    for _ in 0..order {
        let next = g.matmul(nilpotent);
        out.push(g);
        g = next;
    }
    out
}

/// Direct resolvent `(E I - H0)^-1`.
pub fn resolvent(h0: &ComplexMatrix, energy: ComplexScalar) -> Result<ComplexMatrix> {
    inverse(&h0.shifted(energy).scale_real(-1.0))
}

/// Normalized Jordan chain `j_1..j_n` of `H0` at `E_EP`: `<j_1|j_1> = 1` and
/// `<j_n|j_l> = 0` for `l < n`.
pub fn jordan_chain(
    h0: &ComplexMatrix,
    eigenvalue_ep: ComplexScalar,
    order: usize,
) -> Result<Vec<ComplexVector>> {
    let cert = verify_ep(h0, eigenvalue_ep, order, DEFAULT_NIL_TOL)?;
    if !cert.ok {
        return Err(Error::NotAnEp(Box::new(cert)));
    }
    chain_from_nilpotent(&h0.shifted(eigenvalue_ep))
}

fn chain_from_nilpotent(n_mat: &ComplexMatrix) -> Result<Vec<ComplexVector>> {
    let n = n_mat.rows();
    let n_norm = n_mat.frobenius_norm();

    // kernel vector: smallest right singular vector, phase fixed so the
    // largest component is real and positive
    let dec = svd(n_mat)?;
    let mut j1 = dec.v.column(n - 1);
    let pivot = j1
        .iter()
        .copied()
        .enumerate()
        .fold((0, 0.0), |best, (i, z)| {
            if z.norm() > best.1 {
                (i, z.norm())
            } else {
                best
            }
        })
        .0;
    let phase = j1[pivot].conj() / j1[pivot].norm();
    j1 = j1.scale(phase);

    let mut raw = vec![j1];
    for l in 1..n {
        let prev = &raw[l - 1];
        let ls = min_norm_solve(n_mat, prev)?;
        let limit = 1e-9 * (prev.norm() + n_norm * ls.solution.norm());
        if ls.residual > limit {
            return Err(Error::ChainSolveFailure {
                index: l + 1,
                residual: ls.residual,
            });
        }
        raw.push(ls.solution);
    }

    normalize_chain(&raw)
}

/// Re-imposes `<j_1|j_1> = 1` and `<j_n|j_l> = 0` (`l < n`) on any Jordan
/// chain through `j'_l = sum_{k=1..l} c_k j_{l-k+1}`, with `c_1 = 1/||j_1||`
/// real positive and `c_2..c_n` from the Gram system of `j_1..j_{n-1}`.
pub fn normalize_chain(raw: &[ComplexVector]) -> Result<Vec<ComplexVector>> {
    let n = raw.len();
    if n < 2 {
        return Err(Error::invalid("a Jordan chain needs at least two vectors"));
    }
    let dim = raw[0].dim();
    if raw.iter().any(|v| v.dim() != dim) {
        return Err(Error::DimensionMismatch(
            "chain vectors differ in dimension".into(),
        ));
    }
    let head = raw[0].norm();
    if head == 0.0 {
        return Err(Error::invalid("first chain vector is zero"));
    }
    let c1 = Complex64::new(1.0 / head, 0.0);
    let m = n - 1;
    let mut gram = ComplexMatrix::zeros(m, m);
    let mut rhs = ComplexVector::zeros(m);
    for a in 0..m {
        for b in 0..m {
            gram[(a, b)] = raw[a].inner(&raw[b]);
        }
        rhs[a] = raw[a].inner(&raw[n - 1]);
    }
    let w = min_norm_solve(&gram, &rhs)?.solution;
    let mut coeffs = vec![c1];
    for k in 2..=n {
        coeffs.push(-c1 * w[n - k]);
    }

    Ok((1..=n)
        .map(|l| {
            (1..=l).fold(ComplexVector::zeros(dim), |acc, k| {
                acc.axpy(coeffs[k - 1], &raw[l - k])
            })
        })
        .collect())
}

/// `(||j_2||^2 - |<j_1|j_2>|^2)^(n/2) * xi` for a normalized chain `j_1..j_n`.
pub fn eigenstate_strength_from_chain(chain: &[ComplexVector], xi: f64) -> f64 {
    zeta_from_chain(chain, xi)
}

fn zeta_from_chain(chain: &[ComplexVector], xi: f64) -> f64 {
    let n = chain.len();
    let (j1, j2) = (&chain[0], &chain[1]);
    let perp = (j2.norm().powi(2) - j1.inner(j2).norm_sqr()).max(0.0);
    perp.powf(n as f64 / 2.0) * xi
}

/// `xi = ||G_n||_2`.
pub fn spectral_response_strength(sys: &EpSystem) -> f64 {
    sys.xi
}

/// `zeta = (||j_2||^2 - |<j_1|j_2>|^2)^(n/2) * xi`.
pub fn eigenstate_response_strength(sys: &EpSystem) -> f64 {
    sys.zeta
}

/// `Gamma = i (H0 - H0^dag)`, symmetrized to be exactly Hermitian.
pub fn decay_operator(h0: &ComplexMatrix) -> Result<ComplexMatrix> {
    h0.check_square()?;
    h0.check_finite()?;
    let i = Complex64::new(0.0, 1.0);
    let gamma = (h0 - &h0.adjoint()).scale(i);
    Ok((&gamma + &gamma.adjoint()).scale_real(0.5))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassivityReport {
    pub is_passive: bool,
    /// Descending.
    pub gamma_eigenvalues: Vec<f64>,
    /// Ratio of the two largest eigenvalues of Gamma; `None` when the second
    /// one is not above tolerance (Gamma is effectively rank 1 or zero).
    pub ratio: Option<f64>,
    /// Passive upper bound on xi; only known for orders 2 and 3.
    pub xi_upper_bound: Option<f64>,
    /// `trace(Gamma)`, equal to `n * beta` at an EP.
    pub trace_check: f64,
    /// `beta = -2 Im E_EP`.
    pub beta: f64,
    /// Passive, bound known, and `xi` above it. Cannot happen for a genuine
    /// passive EP; a real `E_EP` with passive Gamma always lands here.
    pub bound_violated: bool,
}

/// Upper bound on xi for passive systems: `2|Im E|` (n = 2), `4 sqrt(3) |Im E|^2` (n = 3).
pub fn passive_xi_bound(eigenvalue_ep: ComplexScalar, order: usize) -> Option<f64> {
    let g = eigenvalue_ep.im.abs();
    match order {
        2 => Some(2.0 * g),
        3 => Some(4.0 * 3f64.sqrt() * g * g),
        _ => None,
    }
}

pub fn passivity_report(sys: &EpSystem, tol: f64) -> Result<PassivityReport> {
    let gamma = decay_operator(&sys.h0)?;
    assess_passivity(&gamma, sys.eigenvalue_ep, sys.order, sys.xi, tol)
}

/// Passivity assessment from an explicit decay operator.
pub fn assess_passivity(
    gamma: &ComplexMatrix,
    eigenvalue_ep: ComplexScalar,
    order: usize,
    xi: f64,
    tol: f64,
) -> Result<PassivityReport> {
    let psd = is_positive_semidefinite(gamma, tol)?;
    let ev = psd.eigenvalues;
    let scale = ev.iter().fold(1.0_f64, |acc, x| acc.max(x.abs()));
    let ratio = match ev.as_slice() {
        [l1, l2, ..] if *l2 > tol * scale => Some(l1 / l2),
        _ => None,
    };
    let xi_upper_bound = passive_xi_bound(eigenvalue_ep, order);
    let bound_violated =
        psd.is_psd && xi_upper_bound.is_some_and(|ub| xi > ub * (1.0 + 1e-9) + f64::MIN_POSITIVE);
    Ok(PassivityReport {
        is_passive: psd.is_psd,
        gamma_eigenvalues: ev,
        ratio,
        xi_upper_bound,
        trace_check: gamma.trace().re,
        beta: -2.0 * eigenvalue_ep.im,
        bound_violated,
    })
}

/// Radius `(eps_tilde * xi)^(1/n)` of the pseudospectral disk around an EP of order `n`.
pub fn pseudospectral_radius(xi: f64, eps_tilde: f64, order: usize) -> Result<f64> {
    if !(xi > 0.0) || !(eps_tilde > 0.0) || !xi.is_finite() || !eps_tilde.is_finite() {
        return Err(Error::Domain(format!(
            "xi = {xi} and eps_tilde = {eps_tilde} must both be positive"
        )));
    }
    if order == 0 {
        return Err(Error::Domain("order must be positive".into()));
    }
    Ok((eps_tilde * xi).powf(1.0 / order as f64))
}

/// Frobenius norm of `N^(n-1)` without any EP verification. On a diabolic
/// point this is exactly zero.
pub fn raw_leading_norm(h0: &ComplexMatrix, eigenvalue_ep: ComplexScalar, order: usize) -> f64 {
    linalg::frobenius_norm(&h0.shifted(eigenvalue_ep).pow(order.saturating_sub(1)))
}
