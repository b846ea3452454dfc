#![allow(clippy::excessive_precision)]

//! Fixed inputs with reference values from a 50-digit reference computation.

use ep_response::ep::decay_operator;
use ep_response::linalg::{
    eigenpairs, frobenius_norm, hermitian_eigenvalues, is_positive_semidefinite, min_norm_solve,
    numerical_rank, singular_values, spectral_norm, ComplexMatrix, ComplexVector,
};
use ep_response::models::hatano_nelson;
use num_complex::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn m(rows: Vec<Vec<Complex64>>) -> ComplexMatrix {
    ComplexMatrix::from_rows(&rows).unwrap()
}

fn a4() -> ComplexMatrix {
    m(vec![
        vec![
            c(-0.3097, 0.9791),
            c(0.1134, -0.2082),
            c(0.2516, -0.1599),
            c(-0.0049, -0.0259),
        ],
        vec![
            c(0.4453, -0.4929),
            c(-0.4865, 0.4358),
            c(-0.6013, 0.611),
            c(0.0999, -0.8508),
        ],
        vec![
            c(0.3751, 0.3862),
            c(0.6517, 0.0539),
            c(-0.7703, 0.0446),
            c(0.4826, 0.132),
        ],
        vec![
            c(-0.9709, -0.6701),
            c(-0.7005, 0.3588),
            c(-0.0027, 0.47),
            c(0.8796, 0.7226),
        ],
    ])
}

#[test]
fn random_four_by_four_norms() {
    assert!((frobenius_norm(&a4()) - 2.9373307781045021098).abs() < 1e-14);
    assert!((spectral_norm(&a4()).unwrap() - 2.1437493394767252256).abs() < 1e-13);
}

#[test]
fn random_three_by_three_singular_values() {
    let b = m(vec![
        vec![c(-0.2146, -0.8506), c(-0.8498, 0.9198), c(0.683, -0.118)],
        vec![c(0.0606, 0.7918), c(-0.2029, -0.7795), c(-0.0416, -0.8133)],
        vec![c(0.5874, -0.5799), c(0.7227, 0.7604), c(-0.9669, 0.4968)],
    ]);
    let want = [
        2.11177786390597879,
        1.7877600291323515083,
        0.26194410043632380047,
    ];
    for (s, w) in singular_values(&b).unwrap().iter().zip(want) {
        assert!((s - w).abs() < 1e-13, "{s} vs {w}");
    }
}

#[test]
fn random_five_by_five_eigenvalues() {
    let a = m(vec![
        vec![
            c(-0.3225, -0.3448),
            c(-0.9689, 0.1891),
            c(-0.2761, -0.101),
            c(-0.9325, -0.248),
            c(-0.9769, -0.3352),
        ],
        vec![
            c(-0.7104, -0.0712),
            c(0.0716, 0.5823),
            c(-0.7468, 0.0323),
            c(0.5295, -0.3663),
            c(0.8767, 0.2889),
        ],
        vec![
            c(0.7134, 0.8988),
            c(-0.2692, 0.6094),
            c(-0.3217, -0.7573),
            c(-0.1113, -0.1653),
            c(0.5376, -0.4284),
        ],
        vec![
            c(0.5798, 0.9642),
            c(0.0722, 0.0424),
            c(0.1814, 0.2587),
            c(-0.4148, -0.0362),
            c(0.2751, -0.1819),
        ],
        vec![
            c(-0.7501, -0.0209),
            c(-0.9528, -0.8152),
            c(-0.2427, 0.5391),
            c(-0.6298, 0.3203),
            c(-0.9016, -0.9996),
        ],
    ]);
    let want = [
        c(1.3280837444476628684, -0.88629945129930691782),
        c(-1.5291831953441733629, 0.78000430050687697211),
        c(-0.43100693845631405343, 0.73383890395737933314),
        c(-0.16401088196103590338, -0.49918912041332694155),
        c(-1.0928827286861395056, -1.6839546327516224217),
    ];
    let pairs = eigenpairs(&a).unwrap();
    let mut unmatched: Vec<Complex64> = pairs.iter().map(|p| p.value).collect();
    for w in want {
        let k = unmatched
            .iter()
            .position(|v| (v - w).norm() < 1e-9)
            .unwrap_or_else(|| panic!("{w} missing"));
        unmatched.swap_remove(k);
    }
    let limit = 1e-10 * (1.0 + a.frobenius_norm());
    assert!(pairs.iter().all(|p| p.residual <= limit));
}

#[test]
fn singular_three_by_three_pseudoinverse() {
    let s = m(vec![
        vec![c(0.2944, -0.7941), c(-0.8733, 0.7028), c(-0.6658, 0.3491)],
        vec![c(-0.6028, 0.4772), c(-0.7278, -0.2976), c(-0.7423, 0.3826)],
        vec![
            c(-0.9112, 0.1603),
            c(-2.3289, 0.10760000000000003),
            c(-2.1504, 1.1143),
        ],
    ]);
    let b = ComplexVector::new(vec![
        c(0.2485, 0.3419),
        c(0.6216, -0.2876),
        c(-0.6635, 0.3355),
    ])
    .unwrap();
    assert_eq!(numerical_rank(&s, 1e-10).unwrap(), 2);
    let want = [
        c(-0.2047474509562716613, 0.091634337374663686461),
        c(0.18594960615212227501, -0.078207215321890632388),
        c(0.048312216093871818997, -0.046986123895816166706),
    ];
    let x = min_norm_solve(&s, &b).unwrap();
    for (got, w) in x.solution.iter().zip(want) {
        assert!((got - w).norm() < 1e-12, "{got} vs {w}");
    }
    assert_eq!(x.rank, 2);
}

#[test]
fn hatano_nelson_decay_operator_is_indefinite() {
    // E0 = -0.5i, |A0| = 1: eigenvalues 1 + sqrt2, 1, 1 - sqrt2
    let model = hatano_nelson(c(0.0, -0.5), c(0.0, 1.0), 3).unwrap();
    let gamma = decay_operator(&model.h0).unwrap();
    let report = is_positive_semidefinite(&gamma, 1e-10).unwrap();
    assert!(!report.is_psd);
    let r2 = 2f64.sqrt();
    for (got, w) in report.eigenvalues.iter().zip([1.0 + r2, 1.0, 1.0 - r2]) {
        assert!((got - w).abs() < 1e-14);
    }
    assert_eq!(hermitian_eigenvalues(&gamma).unwrap(), report.eigenvalues);
}

#[test]
fn rank_of_squared_chain() {
    let n = hatano_nelson(c(0.0, 0.0), c(1.0, 0.0), 3).unwrap().h0;
    assert_eq!(numerical_rank(&n.matmul(&n), 1e-10).unwrap(), 1);
}
