use fermigauss::clifford::DenseOperator;
use fermigauss::criteria::{
    bounds, detect_inner, detect_outer, expansion_rank, gaussian_overcomplete_basis,
    hierarchy_run, mix_with_identity, one_minus_delta_exact, prop1_epsilon_exact, Conclusion,
    DetectOptions, VerdictStatus,
};
use fermigauss::gaussian::{
    ghz_state, is_pure_gaussian, random_convex_gaussian, random_convex_gaussian_parts,
    random_even_state,
};
use fermigauss::lambda::build_lambda;
use fermigauss::linalg;
use fermigauss::CMat;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[test]
fn bounds_single_mode() {
    let b = bounds(1, 1000).unwrap();
    assert_eq!(b.lambda_norm, 4.0);
    assert_eq!(b.epsilon, 2.0);
    assert!((b.chi - 2.0).abs() < 1e-15);
    assert!((b.delta - 2.0 / 3.0).abs() < 1e-15);
    assert_eq!(b.one_minus_delta_exact.as_deref(), Some("1/3"));
    // past saturation the closed form takes over: 640 / n^{1/3}
    let n = 1u64 << 40;
    let b = bounds(1, n).unwrap();
    assert!((b.epsilon - 640.0 / (n as f64).cbrt()).abs() < 1e-12);
    assert!(b.one_minus_delta_exact.is_none());
}

#[test]
fn bounds_match_dense_lambda() {
    let b = bounds(2, 8).unwrap();
    let dense = linalg::trace_norm(build_lambda(2).unwrap().to_dense().matrix());
    assert!((b.lambda_norm - dense).abs() < 1e-9);
    assert!((b.gamma - 2.0).abs() < 1e-15);
    assert!((b.delta_definetti - 24.0 * 24.0 * 2.0).abs() < 1e-9);
    assert!((b.nu - 0.25).abs() < 1e-15);
}

#[test]
fn exact_complement_equals_mixing_threshold() {
    for m in 1..=4 {
        for n in [1u64, 2, 10, 1_000_000] {
            assert_eq!(one_minus_delta_exact(m, n), Some(prop1_epsilon_exact(m)));
        }
    }
}

#[test]
fn bounds_reject_bad_input() {
    assert!(bounds(0, 1).is_err());
    assert!(bounds(9, 1).is_err());
    assert!(bounds(2, 0).is_err());
}

#[test]
fn overcomplete_basis_two_modes() {
    let states = gaussian_overcomplete_basis(2).unwrap();
    assert_eq!(states.len(), 12);
    for s in &states {
        assert!(is_pure_gaussian(s, 1e-9).unwrap().pure);
        s.validate_even_density(1e-12).unwrap();
    }
    assert_eq!(expansion_rank(&states).unwrap(), 8);
}

#[test]
fn overcomplete_basis_single_mode_is_occupation_basis() {
    let states = gaussian_overcomplete_basis(1).unwrap();
    assert_eq!(states.len(), 2);
    let diag: Vec<(f64, f64)> = states
        .iter()
        .map(|s| (s.matrix()[(0, 0)].re, s.matrix()[(1, 1)].re))
        .collect();
    assert!(diag.contains(&(0.0, 1.0)));
    assert!(diag.contains(&(1.0, 0.0)));
}

#[test]
fn mixing_endpoints() {
    let rho = random_even_state(2, 4, &mut rng(1)).unwrap();
    let zero = mix_with_identity(&rho, 0.0).unwrap();
    assert!(linalg::max_abs(&(zero.matrix() - DenseOperator::maximally_mixed(2).matrix())) < 1e-15);
    let one = mix_with_identity(&rho, 1.0).unwrap();
    assert!(linalg::max_abs(&(one.matrix() - rho.matrix())) < 1e-15);
}

#[test]
fn outer_passes_convex_gaussian() {
    let opts = DetectOptions::default();
    for (seed, n) in (0..6).flat_map(|s| [(s, 2), (s, 3)]) {
        let parts = random_convex_gaussian_parts(2, 3, &mut rng(seed)).unwrap();
        let v = detect_outer(&parts.state, n, &opts).unwrap();
        assert_eq!(v.status, VerdictStatus::Pass, "seed {seed} n {n}: {:?}", v.message);
        let cert = v.outer_certificate.unwrap();
        assert!(cert.verified);
        assert!(v.residual < 1e-7);
    }
}

#[test]
fn outer_maximally_mixed_three_parties() {
    let rho = DenseOperator::maximally_mixed(1);
    let v = detect_outer(&rho, 3, &DetectOptions::default()).unwrap();
    assert_eq!(v.status, VerdictStatus::Pass);
    // the explicit extension (|000><000| + |111><111|)/2 is admissible
    let mut y = CMat::zeros(8, 8);
    y[(0, 0)] = fermigauss::C64::new(0.5, 0.0);
    y[(7, 7)] = fermigauss::C64::new(0.5, 0.0);
    let (pi, _) = fermigauss::lambda::null_projector(1, 3).unwrap();
    assert!(linalg::max_abs(&(pi.matrix() * &y - &y)) < 1e-10);
}

#[test]
fn outer_rejects_ghz() {
    let rho = ghz_state(4).unwrap();
    let v = detect_outer(&rho, 2, &DetectOptions::default()).unwrap();
    assert_eq!(v.status, VerdictStatus::Fail);
    assert_eq!(v.support_rank, 0);
    assert!(v.residual >= 1e-6);
}

#[test]
fn inner_passes_maximally_mixed() {
    for m in 1..=2 {
        for n in 1..=2 {
            let v = detect_inner(&DenseOperator::maximally_mixed(m), n, &DetectOptions::default())
                .unwrap();
            assert_eq!(v.status, VerdictStatus::Pass);
            let c = v.inner_certificate.unwrap();
            assert!((c.delta - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn inner_mixing_threshold_single_mode() {
    let mut vac = CMat::zeros(2, 2);
    vac[(0, 0)] = fermigauss::C64::new(1.0, 0.0);
    let vac = DenseOperator::new(1, vac).unwrap();
    let rho = mix_with_identity(&vac, 1.0 / 3.0).unwrap();
    let v = detect_inner(&rho, 1, &DetectOptions::default()).unwrap();
    assert_eq!(v.status, VerdictStatus::Pass, "{:?}", v.message);
    let c = v.inner_certificate.unwrap();
    assert!(c.reconstruction_error <= 1e-7);
}

#[test]
fn inner_perturbed_convex_gaussian() {
    let opts = DetectOptions::default();
    for seed in 0..2 {
        let rho_c = random_convex_gaussian(2, 3, &mut rng(100 + seed)).unwrap();
        for n in 1..=2 {
            let delta = bounds(2, n as u64).unwrap().delta;
            let omega = mix_with_identity(&rho_c, 1.0 - delta).unwrap();
            let dist = linalg::trace_norm(&(rho_c.matrix() - omega.matrix()));
            assert!(dist <= 2.0 * delta + 1e-9);
            let v = detect_inner(&omega, n, &opts).unwrap();
            assert_eq!(v.status, VerdictStatus::Pass, "n={n}: {:?}", v.message);
            assert!(v.inner_certificate.unwrap().reconstruction_error <= 1e-7);
        }
    }
}

#[test]
fn hierarchy_examples() {
    let opts = DetectOptions::default();
    let r = hierarchy_run(&DenseOperator::maximally_mixed(2), 2, &opts).unwrap();
    assert_eq!(r.conclusion, Conclusion::ConvexGaussian);
    assert_eq!(r.decided_at, Some(1));

    let r = hierarchy_run(&ghz_state(4).unwrap(), 2, &opts).unwrap();
    assert_eq!(r.conclusion, Conclusion::NotConvexGaussian);
    assert_eq!(r.decided_at, Some(2));
}

#[test]
fn odd_input_rejected() {
    let c = fermigauss::clifford::build_majorana(1).unwrap();
    let rho = DenseOperator::new(
        1,
        (CMat::identity(2, 2) + c[0].matrix()).scale(0.5),
    )
    .unwrap();
    assert!(detect_outer(&rho, 2, &DetectOptions::default()).is_err());
}
