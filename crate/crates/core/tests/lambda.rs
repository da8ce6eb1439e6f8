use fermigauss::clifford::{build_majorana, DenseOperator};
use fermigauss::exec::Execution;
use fermigauss::gaussian::{
    correlation_matrix, gaussian_from_spec, ghz_state, is_pure_gaussian, random_convex_gaussian,
    random_even_pure_state, random_even_state, random_flo_unitary, random_mixed_gaussian,
    random_pure_gaussian, random_spec, GaussianSpec,
};
use fermigauss::lambda::{
    build_lambda, build_lambda_kl, dephase, flo_twirl_mc, flo_twirl_mc_in,
    gaussianity_residual, invariant_span_distance, nearest_gaussian, null_projector, null_space,
    projector_identity_check, quadratic_identity, swap_operator,
};
use fermigauss::linalg;
use fermigauss::{CMat, RMat, C64};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `i c~_{2k-1} c~_{2k}` with `c~_a = sum_i R_ia c_i`.
fn rotated_blocks(rot: &RMat, m: usize) -> Vec<CMat> {
    let cs = build_majorana(m).unwrap();
    let d = 1usize << m;
    let ct: Vec<CMat> = (0..2 * m)
        .map(|a| {
            let mut out = CMat::zeros(d, d);
            for (i, c) in cs.iter().enumerate() {
                out += c.matrix().scale(rot[(i, a)]);
            }
            out
        })
        .collect();
    (0..m)
        .map(|k| (&ct[2 * k] * &ct[2 * k + 1]) * C64::new(0.0, 1.0))
        .collect()
}

fn top_eigenvector(rho: &DenseOperator) -> DVector<C64> {
    let (_, v) = linalg::hermitian_eigen(rho.matrix());
    v.column(v.ncols() - 1).into_owned()
}

#[test]
fn single_mode_lambda_spectrum() {
    let lam = build_lambda(1).unwrap().to_dense();
    let x = CMat::from_row_slice(
        2,
        2,
        &[C64::new(0., 0.), C64::new(1., 0.), C64::new(1., 0.), C64::new(0., 0.)],
    );
    let y = CMat::from_row_slice(
        2,
        2,
        &[C64::new(0., 0.), C64::new(0., -1.), C64::new(0., 1.), C64::new(0., 0.)],
    );
    let xxyy = linalg::kron(&x, &x) + linalg::kron(&y, &y);
    assert!(linalg::max_abs(&(lam.matrix() - xxyy)) < 1e-15);
    let w = linalg::hermitian_eigenvalues(lam.matrix());
    let got: Vec<f64> = w.iter().copied().collect();
    for (a, b) in got.iter().zip([-2.0, 0.0, 0.0, 2.0]) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn lambda_spectrum_is_even_integers() {
    for m in 1..=4 {
        let lam = build_lambda(m).unwrap().to_dense();
        assert!(lam.hermiticity_deviation() < 1e-15);
        for w in linalg::hermitian_eigenvalues(lam.matrix()).iter() {
            let k = w.round();
            assert!((w - k).abs() < 1e-8);
            assert_eq!(k as i64 % 2, 0);
            assert!(k.abs() <= 2.0 * m as f64);
        }
    }
}

#[test]
fn lambda_trace_norms() {
    for (m, want) in [(1, 4.0), (2, 24.0), (3, 120.0), (4, 560.0)] {
        let lam = build_lambda(m).unwrap().to_dense();
        assert!((linalg::trace_norm(lam.matrix()) - want).abs() < 1e-8, "m={m}");
    }
}

#[test]
fn lambda_pair_guards() {
    assert!(build_lambda_kl(1, 3, 2, 2).is_err());
    assert!(build_lambda_kl(1, 3, 3, 1).is_err());
    assert!(build_lambda_kl(1, 3, 1, 4).is_err());
    assert!(build_lambda_kl(4, 4, 1, 2).is_err());
    let l13 = build_lambda_kl(1, 3, 1, 3).unwrap().to_dense();
    let l12 = build_lambda_kl(1, 3, 1, 2).unwrap().to_dense();
    assert!(linalg::max_abs(&(l13.matrix() - l12.matrix())) > 0.5);
}

#[test]
fn residual_examples() {
    let mut r = rng(1);
    for _ in 0..5 {
        let rho = random_pure_gaussian(2, &mut r).unwrap();
        assert!(gaussianity_residual(&rho).unwrap() < 1e-9);
    }
    let half = DenseOperator::maximally_mixed(1);
    assert!((gaussianity_residual(&half).unwrap() - 2.0).abs() < 1e-12);
    assert!(gaussianity_residual(&ghz_state(4).unwrap()).unwrap() > 0.1);
}

#[test]
fn residual_equals_quadratic_identity() {
    let mut r = rng(2);
    for trial in 0..30 {
        let m = 1 + trial % 3;
        let rho = match trial % 3 {
            0 => random_even_state(m, 2, &mut r).unwrap(),
            1 => random_mixed_gaussian(m, &mut r).unwrap(),
            _ => random_convex_gaussian(m, 3, &mut r).unwrap(),
        };
        let res = gaussianity_residual(&rho).unwrap();
        let quad = quadratic_identity(&rho).unwrap();
        assert!(res >= quad - 1e-9);
        assert!((res - quad).abs() < 1e-9, "res={res} quad={quad}");
    }
}

#[test]
fn residual_detects_exactly_the_pure_gaussians() {
    let mut r = rng(3);
    for trial in 0..200 {
        let m = 1 + trial % 3;
        let rho = match trial % 5 {
            0 | 1 => random_pure_gaussian(m, &mut r).unwrap(),
            2 => random_mixed_gaussian(m, &mut r).unwrap(),
            3 => random_convex_gaussian(m, 2, &mut r).unwrap(),
            _ => random_even_pure_state(m.max(2), &mut r).unwrap(),
        };
        let res = gaussianity_residual(&rho).unwrap();
        let pure = is_pure_gaussian(&rho, 1e-9).unwrap().pure;
        assert_eq!(res <= 1e-9, pure, "trial {trial}: residual {res}");
    }
}

#[test]
fn dephasing_fixes_gaussian_diagonal_states() {
    let mut r = rng(4);
    let spec = random_spec(2, false, &mut r).unwrap();
    let rho = gaussian_from_spec(&spec).unwrap();
    let out = dephase(&rho, &spec.rotation).unwrap();
    assert!(linalg::max_abs(&(out.matrix() - rho.matrix())) < 1e-12);
}

#[test]
fn dephasing_keeps_correlations_and_diagonalizes() {
    let mut r = rng(5);
    for m in [2usize, 3] {
        for _ in 0..5 {
            let tau = random_even_state(m, 3, &mut r).unwrap();
            let cm = correlation_matrix(&tau).unwrap();
            let (rot, _) = fermigauss::gaussian::block_diagonalize(&cm);
            let out = dephase(&tau, &rot).unwrap();
            let after = correlation_matrix(&out).unwrap();
            assert!(linalg::max_abs_real(&(cm.matrix() - after.matrix())) < 1e-9);
            for q in rotated_blocks(&rot, m) {
                let comm = &q * out.matrix() - out.matrix() * &q;
                assert!(linalg::max_abs(&comm) < 1e-10);
            }
            let res = gaussianity_residual(&out).unwrap();
            assert!((res - quadratic_identity(&out).unwrap()).abs() < 1e-9);
        }
    }
}

#[test]
fn nearest_gaussian_of_pure_state() {
    let rho = random_pure_gaussian(3, &mut rng(6)).unwrap();
    let ng = nearest_gaussian(&rho).unwrap();
    assert!(ng.distance < 1e-9);
    assert!(!ng.degenerate);
}

#[test]
fn nearest_gaussian_of_noisy_state() {
    let psi = random_pure_gaussian(2, &mut rng(7)).unwrap();
    let tau = DenseOperator::new(
        2,
        psi.matrix().scale(0.95) + DenseOperator::maximally_mixed(2).matrix().scale(0.05),
    )
    .unwrap();
    let ng = nearest_gaussian(&tau).unwrap();
    assert!(ng.distance <= (2.0 * ng.nu).sqrt() + 1e-12);
    assert!(linalg::max_abs(&(ng.state.matrix() - psi.matrix())) < 1e-9);
}

#[test]
fn nearest_gaussian_bound_sweep() {
    let mut r = rng(8);
    for trial in 0..50 {
        let m = 2 + trial % 2;
        let psi = random_pure_gaussian(m, &mut r).unwrap();
        let noise = random_even_state(m, 1 + trial % 4, &mut r).unwrap();
        let t: f64 = r.random_range(0.0..0.3);
        let tau = DenseOperator::new(m, psi.matrix().scale(1.0 - t) + noise.matrix().scale(t)).unwrap();
        let ng = nearest_gaussian(&tau).unwrap();
        assert!(ng.distance <= ng.bound + 1e-8, "trial {trial}: {} > {}", ng.distance, ng.bound);
        assert!(is_pure_gaussian(&ng.state, 1e-9).unwrap().pure);
    }
}

#[test]
fn nearest_gaussian_flags_degenerate_blocks() {
    let ng = nearest_gaussian(&DenseOperator::maximally_mixed(2)).unwrap();
    assert!(ng.degenerate);
    assert_eq!(ng.spec, GaussianSpec::new(ng.spec.rotation.clone(), vec![1.0, 1.0]).unwrap());
}

#[test]
fn twirl_fixes_identity() {
    for m in 1..=2 {
        let id = DenseOperator::maximally_mixed(2 * m);
        let out = flo_twirl_mc(&id, 50, 1, Execution::Sequential).unwrap();
        assert!(linalg::max_abs(&(out.matrix() - id.matrix())) < 1e-13);
    }
}

#[test]
fn twirl_keeps_lambda() {
    let samples = 400;
    for m in 1..=2 {
        let lam = build_lambda(m).unwrap().to_dense();
        let out = flo_twirl_mc(&lam, samples, 2, Execution::Auto).unwrap();
        assert!(linalg::max_abs(&(out.matrix() - lam.matrix())) < 5.0 / (samples as f64).sqrt());
    }
}

#[test]
fn twirl_lands_in_invariant_span() {
    let mut r = rng(9);
    let samples = 2000;
    for m in 1..=2 {
        let x = random_even_state(2 * m, 4, &mut r).unwrap();
        let before = invariant_span_distance(&x).unwrap();
        let out = flo_twirl_mc(&x, samples, 3, Execution::Auto).unwrap();
        let after = invariant_span_distance(&out).unwrap();
        assert!(after < 5.0 / (samples as f64).sqrt(), "m={m}: {after}");
        assert!(after < before);
    }
}

#[test]
fn twirl_is_deterministic_across_executions() {
    let x = random_even_state(4, 2, &mut rng(10)).unwrap();
    let a = flo_twirl_mc(&x, 300, 4, Execution::Sequential).unwrap();
    let b = flo_twirl_mc(&x, 300, 4, Execution::Parallel).unwrap();
    assert!(linalg::max_abs(&(a.matrix() - b.matrix())) < 1e-12);
}

#[test]
fn twirl_distance_shrinks_with_samples() {
    let x = random_even_state(2, 4, &mut rng(11)).unwrap();
    let d = |s: usize| {
        let out = flo_twirl_mc_in(
            &x,
            s,
            5,
            fermigauss::gaussian::FloGroup::Full,
            Execution::Auto,
        )
        .unwrap();
        invariant_span_distance(&out).unwrap()
    };
    let (small, large) = (d(100), d(6400));
    assert!(large < small);
    assert!(large < 5.0 / 80.0);
}

#[test]
fn span_distance_examples() {
    for m in 1..=2 {
        let lam = build_lambda(m).unwrap().to_dense();
        let x = (lam.matrix() * lam.matrix()).scale(3.0) - lam.matrix();
        let x = DenseOperator::new(2 * m, x).unwrap();
        assert!(invariant_span_distance(&x).unwrap() < 1e-10);
    }
    let cs = build_majorana(1).unwrap();
    let x = DenseOperator::new(2, linalg::kron(cs[0].matrix(), cs[1].matrix())).unwrap();
    assert!(invariant_span_distance(&x).unwrap() > 0.5);
}

#[test]
fn null_space_ranks() {
    for (m, want) in [(1, 2), (2, 6), (3, 20), (4, 70)] {
        assert_eq!(null_space(m, 2).unwrap().rank(), want, "m={m}");
    }
}

#[test]
fn single_mode_null_space_is_parity_aligned() {
    let (pi, basis) = null_projector(1, 2).unwrap();
    assert_eq!(basis.ncols(), 2);
    let mut want = CMat::zeros(4, 4);
    want[(0, 0)] = C64::new(1.0, 0.0);
    want[(3, 3)] = C64::new(1.0, 0.0);
    assert!(linalg::max_abs(&(pi.matrix() - want)) < 1e-12);
}

#[test]
fn three_party_null_space_is_annihilated() {
    for m in 1..=2 {
        let ns = null_space(m, 3).unwrap();
        assert!(ns.rank() > 0);
        for (k, l) in [(1, 2), (1, 3), (2, 3)] {
            let lam = build_lambda_kl(m, 3, k, l).unwrap();
            assert!(linalg::max_abs(&lam.apply_left(&ns.basis)) < 1e-10);
        }
    }
}

#[test]
fn null_projector_fixes_gaussian_pairs() {
    let mut r = rng(12);
    for trial in 0..50 {
        let m = 1 + trial % 3;
        let (pi, _) = null_projector(m, 2).unwrap();
        let psi = top_eigenvector(&random_pure_gaussian(m, &mut r).unwrap());
        let pair = psi.kronecker(&psi);
        let moved = pi.matrix() * &pair - &pair;
        assert!(moved.norm() < 1e-9);
    }
}

#[test]
fn null_space_is_swap_symmetric() {
    for m in 1..=3 {
        let (pi, basis) = null_projector(m, 2).unwrap();
        let s = swap_operator(1 << m);
        assert!(linalg::max_abs(&(&s * pi.matrix() - pi.matrix() * &s)) < 1e-12);
        assert!(linalg::max_abs(&(&s * &basis - &basis)) < 1e-10);
    }
}

#[test]
fn null_projector_is_flo_invariant() {
    let mut r = rng(13);
    for m in 1..=3 {
        let (pi, _) = null_projector(m, 2).unwrap();
        for _ in 0..20 {
            let (u, _) = random_flo_unitary(m, &mut r).unwrap();
            let w = linalg::kron(u.matrix(), u.matrix());
            let conj = &w * pi.matrix() * w.adjoint();
            assert!(linalg::max_abs(&(conj - pi.matrix())) < 1e-8);
        }
    }
}

#[test]
fn projector_identity_monte_carlo() {
    let d1 = projector_identity_check(1, 5000, 1, Execution::Auto).unwrap();
    assert!(d1 < 0.1, "m=1: {d1}");
    let d2 = projector_identity_check(2, 5000, 1, Execution::Auto).unwrap();
    assert!(d2 < 0.15, "m=2: {d2}");
}
