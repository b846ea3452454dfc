//! Response experiments on a verified EP: static perturbation, harmonic
//! excitation and free time evolution, each with its dimensionless bound ratio.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ep::EpSystem;
use crate::error::{Error, Result};
use crate::linalg::{
    eigenpairs, solve, spectral_norm, ComplexMatrix, ComplexScalar, ComplexVector,
};

/// Eigenpairs of the perturbed matrix are rejected above
/// `EIGEN_RESIDUAL_TOL * (1 + ||H0 + eps H1||_F)`.
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-10;
/// Minimum overlap `|<psi_EP|v>|` for the eigenvector-change ansatz.
pub const MIN_OVERLAP: f64 = 1e-10;
/// Relative threshold for the genericity conditions `G_n H1 psi_EP != 0` and `G_n p != 0`.
pub const GENERICITY_TOL: f64 = 1e-8;
pub const UNIT_NORM_TOL: f64 = 1e-10;
pub const RESONANCE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationReport {
    pub epsilon: f64,
    pub h1_spectral_norm: f64,
    pub eigenvalues: Vec<ComplexScalar>,
    pub eigenvectors: Vec<ComplexVector>,
    pub deltas: Vec<ComplexVector>,
    /// `max_j |E_j - E_EP| / (eps ||H1||_2 xi)^(1/n)`; at most 1 to leading order.
    pub x: f64,
    /// `max_j ||dpsi_j|| / (eps ||H1||_2 zeta)^(1/n)`.
    pub y: f64,
    /// `||G_n H1 psi_EP|| / (xi ||H1||_2)`; zero for perturbations that do not
    /// split the EP at leading order.
    pub genericity: f64,
    pub generic: bool,
}

fn check_positive(x: f64, what: &str) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "{what} must be positive and finite, got {x}"
        )))
    }
}

fn check_unit(v: &ComplexVector, dim: usize, what: &str) -> Result<()> {
    if v.dim() != dim {
        return Err(Error::DimensionMismatch(format!(
            "{what} has {} entries, system has dimension {dim}",
            v.dim()
        )));
    }
    if !v.is_finite() {
        return Err(Error::NonFinite("vector"));
    }
    let norm = v.norm();
    if (norm - 1.0).abs() > UNIT_NORM_TOL {
        return Err(Error::invalid(format!(
            "{what} must have unit norm, got {norm}"
        )));
    }
    Ok(())
}

pub fn perturb(sys: &EpSystem, h1: &ComplexMatrix, epsilon: f64) -> Result<PerturbationReport> {
    let n = sys.order();
    h1.check_square()?;
    h1.check_finite()?;
    if h1.rows() != n {
        return Err(Error::DimensionMismatch(format!(
            "H1 is {}x{}, H0 is {n}x{n}",
            h1.rows(),
            h1.cols()
        )));
    }
    check_positive(epsilon, "epsilon")?;
    let h1_norm = spectral_norm(h1)?;
    if h1_norm == 0.0 {
        return Err(Error::ZeroPerturbation);
    }

    let full = sys.h0() + &h1.scale_real(epsilon);
    let limit = EIGEN_RESIDUAL_TOL * (1.0 + full.frobenius_norm());
    let pairs = eigenpairs(&full)?;
    if let Some(bad) = pairs.iter().find(|p| p.residual > limit) {
        return Err(Error::DegenerateEigensolve {
            residual: bad.residual,
            limit,
        });
    }

    let deltas = pairs
        .iter()
        .map(|p| eigenstate_delta(sys, &p.vector))
        .collect::<Result<Vec<_>>>()?;
    let root = 1.0 / n as f64;
    let shift = pairs
        .iter()
        .map(|p| (p.value - sys.eigenvalue_ep()).norm())
        .fold(0.0, f64::max);
    let change = deltas.iter().map(ComplexVector::norm).fold(0.0, f64::max);
    let x = shift / (epsilon * h1_norm * sys.xi()).powf(root);
    let y = change / (epsilon * h1_norm * sys.zeta()).powf(root);

    let genericity = sys
        .leading_green()
        .apply(&h1.apply(sys.eigenvector()))
        .norm()
        / (sys.xi() * h1_norm);
    Ok(PerturbationReport {
        epsilon,
        h1_spectral_norm: h1_norm,
        eigenvalues: pairs.iter().map(|p| p.value).collect(),
        eigenvectors: pairs.into_iter().map(|p| p.vector).collect(),
        deltas,
        x,
        y,
        genericity,
        generic: genericity > GENERICITY_TOL,
    })
}

/// `v / <psi_EP|v> - psi_EP`: the change of an eigenvector rescaled to unit
/// component along `psi_EP`, orthogonal to `psi_EP`.
pub fn eigenstate_delta(sys: &EpSystem, eigenvector: &ComplexVector) -> Result<ComplexVector> {
    let psi = sys.eigenvector();
    if eigenvector.dim() != psi.dim() {
        return Err(Error::DimensionMismatch(format!(
            "eigenvector has {} entries, system has dimension {}",
            eigenvector.dim(),
            psi.dim()
        )));
    }
    let overlap = psi.inner(eigenvector);
    if overlap.norm() < MIN_OVERLAP * eigenvector.norm() || overlap.norm() == 0.0 {
        return Err(Error::OrthogonalEigenvector {
            overlap: overlap.norm(),
        });
    }
    let delta = &eigenvector.scale(overlap.inv()) - psi;
    // remove the rounding residue along psi
    let along = psi.inner(&delta);
    Ok(delta.axpy(-along, psi))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcitationReport {
    pub omega: f64,
    pub power: f64,
    pub hbar: f64,
    pub steady_state: ComplexVector,
    pub steady_norm: f64,
    /// `||psi|| |hbar omega - E_EP|^n / (P xi)`; at most 1 when the top Green's
    /// coefficient dominates.
    pub z: f64,
    /// `P ||G_n p|| / |hbar omega - E_EP|^n`.
    pub leading_order_norm: f64,
    /// `G_n p != 0`.
    pub genericity_ok: bool,
}

/// Drive frequency on resonance with the EP: `Re E_EP / hbar`.
pub fn resonant_omega(sys: &EpSystem, hbar: f64) -> f64 {
    sys.eigenvalue_ep().re / hbar
}

/// Long-time response to the drive `P p e^{-i omega t}`.
pub fn excite(
    sys: &EpSystem,
    p: &ComplexVector,
    omega: f64,
    power: f64,
    hbar: f64,
) -> Result<ExcitationReport> {
    let n = sys.order();
    check_unit(p, n, "excitation vector")?;
    check_positive(hbar, "hbar")?;
    if !omega.is_finite() {
        return Err(Error::NonFinite("omega"));
    }
    if !(power >= 0.0) || !power.is_finite() {
        return Err(Error::invalid(format!(
            "power must be nonnegative and finite, got {power}"
        )));
    }
    let e_ep = sys.eigenvalue_ep();
    if e_ep.im > RESONANCE_TOL * (1.0 + e_ep.norm()) {
        return Err(Error::NoSteadyState { imag: e_ep.im });
    }
    let energy = Complex64::new(hbar * omega, 0.0);
    let distance = (energy - e_ep).norm();
    if distance < RESONANCE_TOL {
        return Err(Error::ResonanceSingular { distance });
    }

    let system = sys.h0().shifted(energy).scale_real(-1.0);
    let steady_state = solve(&system, &p.scale_real(power))?;
    let steady_norm = steady_state.norm();
    let denom = distance.powi(n as i32);
    let z = if power == 0.0 {
        0.0
    } else {
        steady_norm * denom / (power * sys.xi())
    };
    let gp = sys.leading_green().apply(p).norm();
    Ok(ExcitationReport {
        omega,
        power,
        hbar,
        steady_state,
        steady_norm,
        z,
        leading_order_norm: power * gp / denom,
        genericity_ok: gp > GENERICITY_TOL * sys.xi(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicsReport {
    pub time: f64,
    pub hbar: f64,
    pub state: ComplexVector,
    /// `||psi(t)|| / |e^{-i omega_EP t}|`.
    pub ratio: f64,
    /// `|t|^(n-1) xi / ((n-1)! hbar^(n-1))`.
    pub bound: f64,
    /// `G_n psi0 != 0`; false for `psi0` along the EP eigenvector, where the
    /// ratio stays 1 and the bound is not approached.
    pub generic: bool,
}

/// Free evolution `psi(t) = e^{-i E_EP t / hbar} sum_j (-i t / hbar)^j / j! N^j psi0`.
pub fn evolve(sys: &EpSystem, psi0: &ComplexVector, t: f64, hbar: f64) -> Result<DynamicsReport> {
    let n = sys.order();
    check_unit(psi0, n, "initial state")?;
    check_positive(hbar, "hbar")?;
    if !t.is_finite() {
        return Err(Error::NonFinite("time"));
    }
    let step = Complex64::new(0.0, -t / hbar);
    let mut term = psi0.clone();
    let mut series = psi0.clone();
    for j in 1..n {
        term = sys.nilpotent().apply(&term).scale(step / j as f64);
        series = &series + &term;
    }
    let ratio = series.norm();
    let phase = (-Complex64::new(0.0, 1.0) * sys.eigenvalue_ep() * t / hbar).exp();
    let factorial: f64 = (1..n).map(|k| k as f64).product();
    let bound = t.abs().powi(n as i32 - 1) * sys.xi() / (factorial * hbar.powi(n as i32 - 1));
    let generic = sys.leading_green().apply(psi0).norm() > GENERICITY_TOL * sys.xi();
    Ok(DynamicsReport {
        time: t,
        hbar,
        state: series.scale(phase),
        ratio,
        bound,
        generic,
    })
}

/// Default time beyond which the leading term of the series dominates:
/// `100 hbar n / ||N||_F`.
pub fn dynamics_crossover_time(sys: &EpSystem, hbar: f64) -> f64 {
    100.0 * hbar * sys.order() as f64 / sys.nilpotent().frobenius_norm()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    /// Fitted exponent of `max_j |E_j - E_EP|` against epsilon.
    pub slope: f64,
    pub intercept: f64,
    pub epsilons: Vec<f64>,
    pub splittings: Vec<f64>,
}

/// Least-squares slope of `log max_j |E_j - E_EP|` against `log eps`.
pub fn splitting_scaling_probe(
    sys: &EpSystem,
    h1: &ComplexMatrix,
    eps_grid: &[f64],
) -> Result<ScalingFit> {
    if eps_grid.len() < 4 {
        return Err(Error::invalid("epsilon grid needs at least 4 points"));
    }
    if eps_grid.iter().any(|&e| !(e > 0.0) || !e.is_finite()) {
        return Err(Error::invalid("epsilon grid must be positive and finite"));
    }
    if eps_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::invalid("epsilon grid must be strictly decreasing"));
    }
    if (eps_grid[0] / eps_grid[eps_grid.len() - 1]).log10() < 3.0 - 1e-12 {
        return Err(Error::invalid("epsilon grid must span at least 3 decades"));
    }
    let mut splittings = Vec::with_capacity(eps_grid.len());
    for &eps in eps_grid {
        let rep = perturb(sys, h1, eps)?;
        let s = rep
            .eigenvalues
            .iter()
            .map(|e| (e - sys.eigenvalue_ep()).norm())
            .fold(0.0, f64::max);
        splittings.push(s);
    }
    let xs: Vec<f64> = eps_grid.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = splittings.iter().map(|s| s.ln()).collect();
    if ys.iter().any(|y| !y.is_finite()) {
        return Err(Error::NumericalFailure(
            "zero splitting in scaling probe".into(),
        ));
    }
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    Ok(ScalingFit {
        slope,
        intercept: my - slope * mx,
        epsilons: eps_grid.to_vec(),
        splittings,
    })
}

/// `n` logarithmically spaced epsilons from `hi` down to `lo`.
pub fn log_grid(hi: f64, lo: f64, n: usize) -> Vec<f64> {
    let (a, b) = (hi.log10(), lo.log10());
    (0..n)
        .map(|k| 10f64.powf(a + (b - a) * k as f64 / (n - 1).max(1) as f64))
        .collect()
}
