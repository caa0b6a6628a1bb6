use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use simtrans::canonical::{CanonicalTransform, QuadraticHamiltonian};
use simtrans::linalg::CMatrix;
use simtrans::spectra::{
    build_fock_matrix, closed_form_eigenvalue, critical_frequencies, eigenvector_coefficients,
    eta_check, fock_coefficients, general_quadratic_spectrum, quadratic_fock_matrix,
    verify_against, verify_isospectral, Branch, FockMatrix, ThreeParamOscillator,
};
use simtrans::{c64, Complex64, Error};

/// Oscillators with D > 0 and both critical frequencies away from zero.
fn oscillator() -> impl Strategy<Value = ThreeParamOscillator> {
    (0.1..2.0f64, -1.5..1.5f64, 0.1..2.0f64)
        .prop_map(|(h11, h12, h22)| ThreeParamOscillator::new(h11, h12, h22).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn coefficients_match_operator_route(h in oscillator(), omega in 0.2..3.0f64) {
        let ladder = h.to_quadratic().to_weyl().to_ladder(omega).unwrap();
        for n in 0..=40usize {
            let (a, b, c) = fock_coefficients(&h, omega, n).unwrap();
            let scale = a.abs().max(b.abs()).max(c.abs()).max(1.0);
            prop_assert!((ladder.element(n, n) - c64(b, 0.0)).norm() <= 1e-12 * scale);
            if n >= 2 {
                prop_assert!((ladder.element(n - 2, n) - c64(a, 0.0)).norm() <= 1e-12 * scale);
            }
            prop_assert!((ladder.element(n + 2, n) - c64(c, 0.0)).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn triangular_at_plus_branch(h in oscillator()) {
        let w = critical_frequencies(&h).branch(Branch::Plus).unwrap();
        let m = build_fock_matrix(&h, w, 40).unwrap();
        let mat = m.matrix();
        let norm = mat.max_abs();
        for j in 0..38 {
            prop_assert!(mat[(j + 2, j)].norm() < 1e-12 * norm);
        }
        let root_d = h.discriminant().sqrt();
        let eig = m.numeric_spectrum().unwrap();
        for (n, e) in eig.iter().enumerate() {
            let want = root_d * (2 * n + 1) as f64;
            prop_assert!((e - c64(want, 0.0)).norm() < 1e-12 * want.max(1.0));
        }
    }

    #[test]
    fn branches_mirror(h in oscillator(), n in 0usize..30) {
        let plus = closed_form_eigenvalue(&h, n, Branch::Plus).unwrap();
        let minus = closed_form_eigenvalue(&h, n, Branch::Minus).unwrap();
        prop_assert_eq!(plus, -minus);
    }

    #[test]
    fn eigenpairs_solve_the_recurrence(h in oscillator(), k in 0usize..8, s in 0usize..2, minus in any::<bool>()) {
        let branch = if minus { Branch::Minus } else { Branch::Plus };
        let e = eigenvector_coefficients(&h, branch, k, s).unwrap();
        prop_assert!(e.residual <= 1e-12, "residual {}", e.residual);
        let m = build_fock_matrix(&h, e.omega, e.top() + 8).unwrap();
        prop_assert!(e.residual_on(&m).unwrap() <= 1e-12);
        let norm: f64 = e.coefficients.iter().map(|z| z.norm_sqr()).sum();
        prop_assert!((norm - 1.0).abs() < 1e-14);
        if h.h12() != 0.0 && k >= 1 {
            let support = e.coefficients.iter().filter(|z| z.norm() > 0.0).count();
            prop_assert!(support >= 2);
        }
    }
}

#[test]
fn truncation_converges() {
    let h = ThreeParamOscillator::rath_mallick(0.3, 0.2).unwrap();
    for omega in [1.0, 4.0] {
        let mut previous = vec![f64::INFINITY; 11];
        let mut first = Vec::new();
        for n in [50, 100, 200, 400] {
            // Eigensolver rounding grows with the matrix norm, which grows like N.
            let floor = 1e-12 * n as f64 / 50.0;
            let eig = build_fock_matrix(&h, omega, n)
                .unwrap()
                .numeric_spectrum()
                .unwrap();
            for level in 0..=10 {
                let want = closed_form_eigenvalue(&h, level, Branch::Plus).unwrap();
                let dev = (eig[level] - c64(want, 0.0)).norm();
                assert!(
                    dev <= previous[level] + floor,
                    "w = {omega}, level {level}, N = {n}: {dev} after {}",
                    previous[level]
                );
                previous[level] = dev;
            }
            if first.is_empty() {
                first = previous.clone();
            }
        }
        assert!(previous.iter().all(|&d| d < 1e-10));
        if omega == 4.0 {
            assert!(first[10] > 1e-4);
        }
    }
}

fn cplx(rng: &mut ChaCha8Rng, r: f64) -> Complex64 {
    c64(rng.gen_range(-r..r), rng.gen_range(-r..r))
}

#[test]
fn random_quadratics_match_truncation() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..20 {
        let q = QuadraticHamiltonian::new(
            c64(0.5, 0.0) + cplx(&mut rng, 0.15),
            cplx(&mut rng, 0.15),
            c64(0.5, 0.0) + cplx(&mut rng, 0.15),
        );
        let omega = (q.c_xx / q.c_pp).sqrt().norm();
        let eig = quadratic_fock_matrix(&q, c64(omega, 0.0), 160)
            .unwrap()
            .numeric_spectrum()
            .unwrap();
        for n in 0..6 {
            let want = general_quadratic_spectrum(&q, n);
            let got = eig
                .iter()
                .map(|e| (e - want).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(got < 1e-8, "{q:?} level {n}: {got}");
        }
    }
}

#[test]
fn shifted_momentum_family() {
    for gamma in [0.0, 0.4, 0.9] {
        let q = QuadraticHamiltonian::shifted_momentum(gamma, 1.0 - gamma * gamma);
        assert!(general_quadratic_spectrum(&q, 3).im.abs() < 1e-15);
    }
    let q = QuadraticHamiltonian::shifted_momentum(1.3, 1.0 - 1.69);
    let omega = general_quadratic_spectrum(&q, 0);
    assert!(omega.re.abs() < 1e-15 && omega.im > 0.0);
    for gamma in [0.5, 2.0, 10.0] {
        let q = QuadraticHamiltonian::shifted_momentum(gamma, 0.3);
        assert!(general_quadratic_spectrum(&q, 2).im.abs() < 1e-15);
    }
}

#[test]
fn identity_transform_is_exact() {
    let r = verify_isospectral(&CanonicalTransform::identity(), 40, 10, 1e-14).unwrap();
    assert!(r.passed);
    assert_eq!(r.max_deviation(), 0.0);
}

#[test]
fn rath_mallick_isospectral() {
    let u = CanonicalTransform::rath_mallick(c64(0.3, 0.0), c64(0.2, 0.0)).unwrap();
    let r = verify_isospectral(&u, 200, 10, 1e-8).unwrap();
    assert!(r.passed, "{}", r.max_deviation());
    assert_eq!(r.normalizable(), Some(true));
    let bad = CanonicalTransform::rath_mallick(c64(0.3, 0.0), c64(2.0, 0.0)).unwrap();
    assert_eq!(
        verify_isospectral(&bad, 80, 4, 1e-6)
            .unwrap()
            .normalizable(),
        Some(false)
    );
    assert!(verify_isospectral(&u, 20, 6, 1e-6).is_err());
}

#[test]
fn ahmed_gauge_spectrum() {
    let (alpha, beta) = (0.8, 0.35);
    let k = alpha * alpha + beta * beta;
    let base = QuadraticHamiltonian::with_force_constant(k);
    let u = CanonicalTransform::gauge_complex(c64(beta, 0.0));
    let reference: Vec<Complex64> = (0..8)
        .map(|n| c64(k.sqrt() * (n as f64 + 0.5), 0.0))
        .collect();
    let r = verify_against(&base, &u, k.sqrt(), 160, &reference, 1e-8).unwrap();
    assert!(r.passed, "{}", r.max_deviation());
}

#[test]
fn eta_on_hermitian_matrix_is_projector() {
    let h = ThreeParamOscillator::new(0.7, 0.0, 0.4).unwrap();
    let m = build_fock_matrix(&h, 1.3, 60).unwrap();
    let r = eta_check(&m, 6, 1e-10).unwrap();
    assert!(r.passed);
    assert!(r.biorthonormality_defect < 1e-12 && r.pseudo_hermiticity_defect < 1e-12);
}

#[test]
fn eta_on_rath_mallick() {
    let h = ThreeParamOscillator::rath_mallick(0.3, 0.2).unwrap();
    let m = build_fock_matrix(&h, 1.0, 200).unwrap();
    let r = eta_check(&m, 8, 1e-6).unwrap();
    assert!(r.passed);
    assert!(r.biorthonormality_defect < 1e-8);
}

#[test]
fn eta_rejects_degenerate_levels() {
    let diag: Vec<Complex64> = [1.0, 1.0, 2.0, 3.0, 4.0, 5.0]
        .iter()
        .map(|&v| c64(v, 0.0))
        .collect();
    let m = FockMatrix::new(c64(1.0, 0.0), CMatrix::from_diagonal(&diag));
    assert!(matches!(
        eta_check(&m, 3, 1e-6),
        Err(Error::DegenerateEigenvalues { .. })
    ));
    assert!(eta_check(&m, 1, 1e-6).unwrap().passed);
}
