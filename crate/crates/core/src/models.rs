//! Analytic EP Hamiltonians with closed-form strengths, plus the random EP
//! ensemble built by similarity transformation of a Jordan block.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{inverse, singular_values, ComplexMatrix, ComplexScalar, ComplexVector};

/// Largest accepted condition number of the random similarity transform.
pub const MAX_TRANSFORM_CONDITION: f64 = 1e8;
pub const MAX_TRANSFORM_ATTEMPTS: usize = 100;

/// Names accepted by [`build_model`].
pub const MODEL_NAMES: [&str; 5] = [
    "asymmetric_backscattering",
    "pt_dimer",
    "pt_trimer",
    "hatano_nelson",
    "random_ep",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Parameter {
    Real(f64),
    Complex([f64; 2]),
}

impl From<f64> for Parameter {
    fn from(x: f64) -> Self {
        Parameter::Real(x)
    }
}

impl From<Complex64> for Parameter {
    fn from(z: Complex64) -> Self {
        Parameter::Complex([z.re, z.im])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelInstance {
    pub name: String,
    pub h0: ComplexMatrix,
    pub eigenvalue_ep: ComplexScalar,
    pub order: usize,
    /// False for off-EP parameter choices (only the PT dimer admits these).
    pub at_ep: bool,
    pub expected_xi: Option<f64>,
    pub expected_zeta: Option<f64>,
    pub parameters: BTreeMap<String, Parameter>,
}

fn params<const N: usize>(items: [(&str, Parameter); N]) -> BTreeMap<String, Parameter> {
    items.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn check_finite(values: &[f64], what: &'static str) -> Result<()> {
    if values.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// Upper-triangular `[[E0, A0], [0, E0]]`: a ring resonator with fully
/// asymmetric backscattering.
pub fn asymmetric_backscattering(e0: ComplexScalar, a0: ComplexScalar) -> Result<ModelInstance> {
    check_finite(&[e0.re, e0.im, a0.re, a0.im], "model parameter")?;
    if a0.norm() == 0.0 {
        return Err(Error::DiabolicPoint);
    }
    let h0 = ComplexMatrix::from_rows(&[vec![e0, a0], vec![c(0.0, 0.0), e0]])?;
    Ok(ModelInstance {
        name: "asymmetric_backscattering".into(),
        h0,
        eigenvalue_ep: e0,
        order: 2,
        at_ep: true,
        expected_xi: Some(a0.norm()),
        expected_zeta: Some(1.0 / a0.norm()),
        parameters: params([("e0", e0.into()), ("a0", a0.into())]),
    })
}

/// Backscattering coefficient of a waveguide-coupled ring with an end mirror:
/// `-2 i gamma r e^{i phi}`.
pub fn waveguide_mirror_coefficient(coupling: f64, reflection: f64, phase: f64) -> ComplexScalar {
    c(0.0, -2.0 * coupling * reflection) * Complex64::from_polar(1.0, phase)
}

/// Perturbation `[[C1, A1], [B1, C1]]` acting on [`asymmetric_backscattering`].
pub fn backscattering_perturbation(
    c1: ComplexScalar,
    a1: ComplexScalar,
    b1: ComplexScalar,
) -> Result<ComplexMatrix> {
    ComplexMatrix::from_rows(&[vec![c1, a1], vec![b1, c1]])
}

/// `[[w0 + i alpha, g], [g, w0 - i alpha]]`, at an EP when `g = alpha > 0`.
pub fn pt_dimer(omega0: f64, alpha: f64, g: f64) -> Result<ModelInstance> {
    check_finite(&[omega0, alpha, g], "model parameter")?;
    if alpha < 0.0 || g < 0.0 {
        return Err(Error::invalid("pt_dimer requires alpha >= 0 and g >= 0"));
    }
    let h0 = ComplexMatrix::from_rows(&[
        vec![c(omega0, alpha), c(g, 0.0)],
        vec![c(g, 0.0), c(omega0, -alpha)],
    ])?;
    let at_ep = g == alpha && g > 0.0;
    Ok(ModelInstance {
        name: "pt_dimer".into(),
        h0,
        eigenvalue_ep: c(omega0, 0.0),
        order: 2,
        at_ep,
        expected_xi: at_ep.then_some(2.0 * g),
        expected_zeta: at_ep.then(|| 1.0 / (2.0 * g)),
        parameters: params([
            ("omega0", omega0.into()),
            ("alpha", alpha.into()),
            ("g", g.into()),
        ]),
    })
}

/// Closed-form spectrum `w0 +- sqrt(g^2 - alpha^2)` of [`pt_dimer`].
pub fn pt_dimer_eigenvalues(omega0: f64, alpha: f64, g: f64) -> [ComplexScalar; 2] {
    let root = c(g * g - alpha * alpha, 0.0).sqrt();
    [c(omega0, 0.0) + root, c(omega0, 0.0) - root]
}

/// Tridiagonal `[[w0 + i alpha, g, 0], [g, w0, g], [0, g, w0 - i alpha]]` with
/// `alpha = sqrt(2) g`, an EP of order 3.
pub fn pt_trimer(omega0: f64, g: f64) -> Result<ModelInstance> {
    check_finite(&[omega0, g], "model parameter")?;
    if !(g > 0.0) {
        return Err(Error::invalid("pt_trimer requires g > 0"));
    }
    let alpha = 2f64.sqrt() * g;
    let z = c(0.0, 0.0);
    let gc = c(g, 0.0);
    let h0 = ComplexMatrix::from_rows(&[
        vec![c(omega0, alpha), gc, z],
        vec![gc, c(omega0, 0.0), gc],
        vec![z, gc, c(omega0, -alpha)],
    ])?;
    Ok(ModelInstance {
        name: "pt_trimer".into(),
        h0,
        eigenvalue_ep: c(omega0, 0.0),
        order: 3,
        at_ep: true,
        expected_xi: Some(4.0 * g * g),
        expected_zeta: Some(1.0 / (2.0 * g)),
        parameters: params([
            ("omega0", omega0.into()),
            ("g", g.into()),
            ("alpha", alpha.into()),
        ]),
    })
}

/// Unidirectional chain: `E0` on the diagonal, `A0` on the superdiagonal.
pub fn hatano_nelson(e0: ComplexScalar, a0: ComplexScalar, n: usize) -> Result<ModelInstance> {
    check_finite(&[e0.re, e0.im, a0.re, a0.im], "model parameter")?;
    if n < 2 {
        return Err(Error::invalid("hatano_nelson requires n >= 2"));
    }
    if a0.norm() == 0.0 {
        return Err(Error::DiabolicPoint);
    }
    Ok(ModelInstance {
        name: "hatano_nelson".into(),
        h0: jordan_like(e0, a0, n),
        eigenvalue_ep: e0,
        order: n,
        at_ep: true,
        expected_xi: Some(a0.norm().powi(n as i32 - 1)),
        expected_zeta: Some(1.0 / a0.norm()),
        parameters: params([
            ("e0", e0.into()),
            ("a0", a0.into()),
            ("n", (n as f64).into()),
        ]),
    })
}

fn jordan_like(e0: ComplexScalar, a0: ComplexScalar, n: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::identity(n).scale(e0);
    for i in 0..n - 1 {
        m[(i, i + 1)] = a0;
    }
    m
}

/// Generator for realization `index` of a seeded run. Streams are independent,
/// so realizations can be drawn in any order.
pub fn realization_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn uniform_entry<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
}

/// Matrix with i.i.d. entries whose real and imaginary parts are uniform on `[-1/2, 1/2)`.
pub fn random_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let entries = (0..rows * cols).map(|_| uniform_entry(rng)).collect();
    ComplexMatrix::from_row_major(rows, cols, entries).expect("finite by construction")
}

/// Unit vector with uniformly distributed entries before normalization.
pub fn random_unit_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexVector {
    loop {
        let v = ComplexVector::new((0..dim).map(|_| uniform_entry(rng)).collect()).expect("finite");
        if v.norm() > 0.0 {
            return v.normalized().expect("nonzero");
        }
    }
}

pub fn random_perturbation(n: usize, seed: u64) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::invalid("perturbation dimension must be at least 1"));
    }
    Ok(random_matrix(n, n, &mut ChaCha8Rng::seed_from_u64(seed)))
}

/// `Q J Q^-1` where `J` is the unit Jordan block at `eigenvalue_ep`.
pub fn ep_from_transform(q: &ComplexMatrix, eigenvalue_ep: ComplexScalar) -> Result<ModelInstance> {
    q.check_square()?;
    let n = q.rows();
    if n < 2 {
        return Err(Error::invalid("EP order must be at least 2"));
    }
    let q_inv = inverse(q)?;
    let h0 = q
        .matmul(&jordan_like(eigenvalue_ep, c(1.0, 0.0), n))
        .matmul(&q_inv);
    Ok(ModelInstance {
        name: "random_ep".into(),
        h0,
        eigenvalue_ep,
        order: n,
        at_ep: true,
        expected_xi: None,
        expected_zeta: None,
        parameters: params([
            ("n", (n as f64).into()),
            ("eigenvalue_ep", eigenvalue_ep.into()),
        ]),
    })
}

/// Random EP of order `n`; also returns the similarity transform used.
pub fn random_ep_with_transform<R: Rng + ?Sized>(
    n: usize,
    eigenvalue_ep: ComplexScalar,
    rng: &mut R,
) -> Result<(ModelInstance, ComplexMatrix)> {
    if n < 2 {
        return Err(Error::invalid("EP order must be at least 2"));
    }
    check_finite(&[eigenvalue_ep.re, eigenvalue_ep.im], "eigenvalue_ep")?;
    for _ in 0..MAX_TRANSFORM_ATTEMPTS {
        let q = random_matrix(n, n, rng);
        let s = singular_values(&q)?;
        let smallest = s[n - 1];
        if smallest == 0.0 || s[0] / smallest > MAX_TRANSFORM_CONDITION {
            continue;
        }
        if let Ok(model) = ep_from_transform(&q, eigenvalue_ep) {
            return Ok((model, q));
        }
    }
    Err(Error::SingularTransform {
        attempts: MAX_TRANSFORM_ATTEMPTS,
    })
}

pub fn random_ep_from_rng<R: Rng + ?Sized>(
    n: usize,
    eigenvalue_ep: ComplexScalar,
    rng: &mut R,
) -> Result<ModelInstance> {
    random_ep_with_transform(n, eigenvalue_ep, rng).map(|(m, _)| m)
}

pub fn random_ep(n: usize, eigenvalue_ep: ComplexScalar, seed: u64) -> Result<ModelInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut model = random_ep_from_rng(n, eigenvalue_ep, &mut rng)?;
    model
        .parameters
        .insert("seed".into(), Parameter::Real(seed as f64));
    Ok(model)
}

/// Model arguments as accepted from the command line. Missing values fall back
/// to per-model defaults.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ModelArgs {
    pub e0: Option<ComplexScalar>,
    pub a0: Option<ComplexScalar>,
    pub omega0: Option<f64>,
    pub alpha: Option<f64>,
    pub g: Option<f64>,
    pub n: Option<usize>,
    pub eigenvalue_ep: Option<ComplexScalar>,
    pub seed: Option<u64>,
}

/// Builds a model by name.
pub fn build_model(name: &str, args: &ModelArgs) -> Result<ModelInstance> {
    let zero = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    match name {
        "asymmetric_backscattering" => {
            asymmetric_backscattering(args.e0.unwrap_or(zero), args.a0.unwrap_or(one))
        }
        "pt_dimer" => {
            let g = args.g.unwrap_or(1.0);
            pt_dimer(args.omega0.unwrap_or(0.0), args.alpha.unwrap_or(g), g)
        }
        "pt_trimer" => pt_trimer(args.omega0.unwrap_or(0.0), args.g.unwrap_or(1.0)),
        "hatano_nelson" => hatano_nelson(
            args.e0.unwrap_or(zero),
            args.a0.unwrap_or(one),
            args.n.unwrap_or(3),
        ),
        "random_ep" => random_ep(
            args.n.unwrap_or(3),
            args.eigenvalue_ep.unwrap_or(c(0.0, -0.5)),
            args.seed.unwrap_or(0),
        ),
        other => Err(Error::invalid(format!(
            "unknown model '{other}'; valid models: {}",
            MODEL_NAMES.join(", ")
        ))),
    }
}
