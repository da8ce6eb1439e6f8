use fermigauss::clifford::{even_projection, parity_operator, DenseOperator};
use fermigauss::gaussian::random_even_state;
use fermigauss::iso::{
    build_gamma_kl, evenize_extension, hermitian_phase, iso_forward, iso_forward_dense,
    iso_generator, iso_inverse, iso_inverse_dense, marginal_via_iso, null_condition_norms,
    tensor_partial_trace, total_parity, BigMonomial,
};
use fermigauss::lambda::{build_lambda_kl, null_projector};
use fermigauss::linalg;
use fermigauss::{CMat, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_matrix(d: usize, r: &mut ChaCha8Rng) -> CMat {
    CMat::from_fn(d, d, |_, _| C64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)))
}

fn random_monomial(m: usize, n: usize, r: &mut ChaCha8Rng) -> BigMonomial {
    let indices: Vec<usize> = (1..=2 * m * n).filter(|_| r.random::<bool>()).collect();
    let phase = [C64::new(1., 0.), C64::new(0., 1.), C64::new(-1., 0.), C64::new(0., -1.)];
    BigMonomial::new(m, n, &indices, phase[r.random_range(0..4)]).unwrap()
}

/// Projector onto the kernel of `Lambda^{k,l}` on `n` parties.
fn kernel_projector(m: usize, n: usize, k: usize, l: usize) -> CMat {
    let lam = build_lambda_kl(m, n, k, l).unwrap().to_dense();
    let (w, v) = linalg::hermitian_eigen(lam.matrix());
    let keep: Vec<usize> = (0..w.len()).filter(|&i| w[i].abs() < 1e-9).collect();
    let b = CMat::from_fn(v.nrows(), keep.len(), |r, c| v[(r, keep[c])]);
    linalg::projector_from_basis(&b)
}

#[test]
fn first_generator_example() {
    let j1 = iso_generator(1, 1, 2).to_dense();
    let c1 = fermigauss::clifford::build_majorana(1).unwrap()[0].matrix().clone();
    let want = linalg::kron(&c1, parity_operator(1).matrix());
    assert!(linalg::max_abs(&(j1 - want)) < 1e-15);
    let j3 = iso_generator(3, 1, 2).to_dense();
    let ac = iso_generator(1, 1, 2).to_dense() * &j3 + &j3 * iso_generator(1, 1, 2).to_dense();
    assert!(linalg::max_abs(&ac) < 1e-15);
}

#[test]
fn generators_keep_anticommutators() {
    for (m, n) in [(1, 2), (1, 3), (2, 2), (1, 4), (2, 3), (2, 4), (4, 2), (1, 8)] {
        let gens: Vec<CMat> = (1..=2 * m * n).map(|g| iso_generator(g, m, n).to_dense()).collect();
        let d = gens[0].nrows();
        for (a, ga) in gens.iter().enumerate() {
            assert!(linalg::hermiticity_deviation(ga) == 0.0);
            for (b, gb) in gens.iter().enumerate().skip(a) {
                let ac = ga * gb + gb * ga;
                let want = if a == b { CMat::identity(d, d).scale(2.0) } else { CMat::zeros(d, d) };
                assert!(linalg::max_abs(&(ac - want)) == 0.0, "m={m} n={n} {a} {b}");
            }
        }
    }
}

#[test]
fn forward_is_a_homomorphism() {
    let mut r = rng(1);
    for trial in 0..100 {
        let (m, n) = [(1, 2), (2, 2), (1, 3), (2, 3)][trial % 4];
        let a = random_monomial(m, n, &mut r);
        let b = random_monomial(m, n, &mut r);
        assert_eq!(iso_forward(&a.mul(&b)), iso_forward(&a).mul(&iso_forward(&b)));
        if trial < 10 {
            let lhs = iso_forward(&a.mul(&b)).to_dense();
            let rhs = iso_forward(&a).to_dense() * iso_forward(&b).to_dense();
            assert!(linalg::max_abs(&(lhs - rhs)) < 1e-14);
        }
    }
}

#[test]
fn monomial_roundtrip() {
    let mut r = rng(2);
    for _ in 0..100 {
        let a = random_monomial(2, 2, &mut r);
        assert_eq!(iso_inverse(&iso_forward(&a)), a);
    }
}

#[test]
fn dense_roundtrip() {
    let mut r = rng(3);
    for (m, n) in [(1, 2), (2, 2), (1, 3)] {
        let d = 1usize << (m * n);
        let mu = DenseOperator::new(m * n, random_matrix(d, &mut r)).unwrap();
        let there = iso_forward_dense(&mu, m, n).unwrap();
        let back = iso_inverse_dense(&there, m, n).unwrap();
        assert!(linalg::max_abs(&(back.matrix() - mu.matrix())) < 1e-12);
        // J maps an orthogonal monomial basis to one with unit phases
        let ratio = linalg::frobenius(there.matrix()) / linalg::frobenius(mu.matrix());
        assert!((ratio - 1.0).abs() < 1e-12);
    }
}

#[test]
fn gamma_maps_to_lambda() {
    for (m, n, k, l) in [(1, 2, 1, 2), (2, 2, 1, 2), (1, 3, 1, 2), (1, 3, 2, 3)] {
        let gamma = build_gamma_kl(m, n, k, l).unwrap();
        let image = iso_forward_dense(&gamma, m, n).unwrap();
        let lam = build_lambda_kl(m, n, k, l).unwrap().to_dense();
        let phase = [C64::new(1., 0.), C64::new(0., 1.), C64::new(-1., 0.), C64::new(0., -1.)][m % 4];
        assert!(linalg::max_abs(&(image.matrix() - lam.matrix() * phase)) < 1e-12);
    }
    // parties strictly between k and l contribute their parity
    let gamma = build_gamma_kl(1, 3, 1, 3).unwrap();
    let image = iso_forward_dense(&gamma, 1, 3).unwrap();
    let lam = build_lambda_kl(1, 3, 1, 3).unwrap().to_dense();
    let id = CMat::identity(2, 2);
    let between = linalg::kron(&linalg::kron(&id, parity_operator(1).matrix()), &id);
    let want = (lam.matrix() * between) * C64::new(0., 1.);
    assert!(linalg::max_abs(&(image.matrix() - want)) < 1e-12);
}

#[test]
fn gamma_phase_and_kernel() {
    for (m, n) in [(1, 2), (2, 2), (3, 2), (1, 4), (2, 3)] {
        for l in 2..=n {
            let gamma = build_gamma_kl(m, n, 1, l).unwrap();
            assert_eq!(hermitian_phase(&gamma, 1e-12), Some(m % 2), "m={m} n={n} l={l}");
        }
    }
    let gamma = build_gamma_kl(1, 2, 1, 2).unwrap();
    let g = gamma.matrix() * C64::new(0., -1.);
    let w = linalg::hermitian_eigenvalues(&g);
    assert_eq!(w.iter().filter(|x| x.abs() < 1e-9).count(), 2);
    let lam = linalg::hermitian_eigenvalues(build_lambda_kl(1, 2, 1, 2).unwrap().to_dense().matrix());
    for (a, b) in w.iter().zip(lam.iter()) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn disjoint_gammas_commute() {
    let a = build_gamma_kl(1, 4, 1, 2).unwrap();
    let b = build_gamma_kl(1, 4, 3, 4).unwrap();
    let comm = a.matrix() * b.matrix() - b.matrix() * a.matrix();
    assert!(linalg::max_abs(&comm) < 1e-14);
}

#[test]
fn null_conditions_agree_on_corpus() {
    let mut r = rng(4);
    let shapes = [(1, 2, 1, 2), (1, 3, 1, 3), (2, 2, 1, 2), (1, 4, 2, 4), (3, 2, 1, 2), (2, 3, 2, 3)];
    let mut nulls = 0;
    for trial in 0..100 {
        let (m, n, k, l) = shapes[trial % shapes.len()];
        let d = 1usize << (m * n);
        let x = random_matrix(d, &mut r);
        let y = if trial % 2 == 0 { kernel_projector(m, n, k, l) * x } else { x };
        let mu = iso_inverse_dense(&DenseOperator::new(m * n, y).unwrap(), m, n).unwrap();
        let (g, lj) = null_condition_norms(&mu, m, n, k, l).unwrap();
        assert_eq!(g < 1e-9, lj < 1e-9, "trial {trial}: {g} vs {lj}");
        assert!((g - lj).abs() < 1e-9 * g.max(1.0));
        nulls += (g < 1e-9) as usize;
    }
    assert_eq!(nulls, 50);
}

#[test]
fn null_conditions_at_largest_size() {
    let mut r = rng(5);
    for (m, n) in [(4, 2), (2, 4)] {
        let d = 1usize << (m * n);
        let p = kernel_projector(m, n, 1, 2);
        for null in [true, false] {
            let x = random_matrix(d, &mut r);
            let y = if null { &p * x } else { x };
            let mu = iso_inverse_dense(&DenseOperator::new(m * n, y).unwrap(), m, n).unwrap();
            let (g, lj) = null_condition_norms(&mu, m, n, 1, 2).unwrap();
            assert_eq!(g < 1e-9, null);
            assert_eq!(lj < 1e-9, null);
        }
    }
}

#[test]
fn evenize_properties() {
    let mut r = rng(6);
    let even = random_even_state(3, 2, &mut r).unwrap();
    assert!(linalg::max_abs(&(evenize_extension(&even).matrix() - even.matrix())) < 1e-15);

    let c = total_parity(3);
    for _ in 0..10 {
        let x = random_matrix(8, &mut r);
        let h = DenseOperator::new(3, linalg::hermitian_part(&x)).unwrap();
        let e = evenize_extension(&h);
        let comm = c.matrix() * e.matrix() - e.matrix() * c.matrix();
        assert!(linalg::max_abs(&comm) < 1e-14);
        assert!((e.trace() - h.trace()).norm() < 1e-14);
        let twice = evenize_extension(&e);
        assert!(linalg::max_abs(&(twice.matrix() - e.matrix())) < 1e-15);
        assert!(linalg::max_abs(&(e.matrix() - even_projection(&h).matrix())) < 1e-15);
    }
    let g = CMat::from_fn(8, 3, |_, _| C64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)));
    let psd = DenseOperator::new(3, &g * g.adjoint()).unwrap();
    assert!(evenize_extension(&psd).min_eigenvalue() >= -1e-12);
}

#[test]
fn evenize_keeps_gamma_null_conditions() {
    let mut r = rng(7);
    for (m, n) in [(1, 3), (2, 2), (1, 4)] {
        let d = 1usize << (m * n);
        let (pi, _) = null_projector(m, n).unwrap();
        let g = random_matrix(d, &mut r);
        let y = pi.matrix() * (&g * g.adjoint()) * pi.matrix();
        let rho = iso_inverse_dense(&DenseOperator::new(m * n, y).unwrap(), m, n).unwrap();
        let even = evenize_extension(&rho);
        for k in 1..n {
            for l in k + 1..=n {
                let gamma = build_gamma_kl(m, n, k, l).unwrap();
                assert!(linalg::frobenius(&(gamma.matrix() * rho.matrix())) < 1e-9);
                assert!(linalg::frobenius(&(gamma.matrix() * even.matrix())) < 1e-9);
            }
        }
    }
}

#[test]
fn marginal_examples() {
    let mut r = rng(8);
    for (m, n) in [(1, 2), (2, 2), (1, 3)] {
        let rho = random_even_state(m, 2, &mut r).unwrap();
        let mut ext = rho.matrix().clone();
        for _ in 1..n {
            ext = linalg::kron(&ext, DenseOperator::maximally_mixed(m).matrix());
        }
        let mu = iso_inverse_dense(&DenseOperator::new(m * n, ext).unwrap(), m, n).unwrap();
        let got = marginal_via_iso(&mu, m, n).unwrap();
        assert!(linalg::max_abs(&(got.matrix() - rho.matrix())) < 1e-12);

        let id = DenseOperator::maximally_mixed(m * n);
        let got = marginal_via_iso(&id, m, n).unwrap();
        assert!(linalg::max_abs(&(got.matrix() - DenseOperator::maximally_mixed(m).matrix())) < 1e-14);
    }
}

#[test]
fn marginal_matches_tensor_partial_trace() {
    let mut r = rng(9);
    for trial in 0..30 {
        let (m, n) = if trial < 20 { (1, 2) } else { [(2, 2), (1, 3)][trial % 2] };
        let mu = random_even_state(m * n, 3, &mut r).unwrap();
        let got = marginal_via_iso(&mu, m, n).unwrap();
        let image = iso_forward_dense(&mu, m, n).unwrap();
        let want = tensor_partial_trace(&image, m, n).unwrap();
        assert!(linalg::max_abs(&(got.matrix() - want.matrix())) < 1e-9);
    }
}

#[test]
fn operator_maps_are_size_guarded() {
    let mu = DenseOperator::maximally_mixed(9);
    assert!(iso_forward_dense(&mu, 3, 3).is_err());
    assert!(iso_forward_dense(&DenseOperator::maximally_mixed(2), 1, 3).is_err());
}
