//! The two-copy operator `Lambda = sum_j c_j (x) c_j`, the purity residual,
//! the dephasing / nearest-Gaussian pipeline, the FLO twirl and the
//! Gaussian-symmetric subspace.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::clifford::{check_modes, majorana, DenseOperator};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::gaussian::{
    self, block_diagonalize, correlation_matrix, gaussian_from_spec, FloGroup, GaussianSpec,
};
use crate::linalg;
use crate::pauli::{PauliString, PauliSum};
use crate::{CMat, RMat, C64};

/// Largest total mode count `m * n` for multi-party operators (dimension 4096).
pub const MAX_TOTAL_MODES: usize = 12;

pub(crate) fn check_parties(m: usize, n: usize) -> Result<()> {
    check_modes(m)?;
    if n == 0 {
        return Err(Error::Domain("party count must be at least 1".into()));
    }
    if m * n > MAX_TOTAL_MODES {
        return Err(Error::DimensionGuard(format!(
            "m * n = {} exceeds {MAX_TOTAL_MODES}",
            m * n
        )));
    }
    Ok(())
}

/// `c_j` acting on party `party` (1-based) of an `n`-party register.
pub fn tensor_majorana(j: usize, party: usize, m: usize, n: usize) -> PauliString {
    assert!(party >= 1 && party <= n, "party {party} out of range");
    majorana(j, m).shifted(m * (n - party))
}

/// `Lambda^{k,l} = sum_j c_j^{(k)} c_j^{(l)}` on `n` parties.
#[derive(Clone, Debug)]
pub struct LambdaOperator {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub l: usize,
    terms: PauliSum,
}

impl LambdaOperator {
    pub fn terms(&self) -> &PauliSum {
        &self.terms
    }

    pub fn dim(&self) -> usize {
        1usize << (self.m * self.n)
    }

    pub fn to_dense(&self) -> DenseOperator {
        DenseOperator::from_parts(self.m * self.n, self.terms.to_dense(self.dim()))
    }

    pub fn apply_left(&self, a: &CMat) -> CMat {
        self.terms.apply_left(a)
    }

    pub fn apply_right(&self, a: &CMat) -> CMat {
        self.terms.apply_right(a)
    }
}

pub fn build_lambda(m: usize) -> Result<LambdaOperator> {
    build_lambda_kl(m, 2, 1, 2)
}

pub fn build_lambda_kl(m: usize, n: usize, k: usize, l: usize) -> Result<LambdaOperator> {
    check_parties(m, n)?;
    if !(1 <= k && k < l && l <= n) {
        return Err(Error::Domain(format!(
            "need 1 <= k < l <= n, got k={k}, l={l}, n={n}"
        )));
    }
    let mut terms = PauliSum::new();
    for j in 1..=2 * m {
        terms.push(
            C64::new(1.0, 0.0),
            tensor_majorana(j, k, m, n) * tensor_majorana(j, l, m, n),
        );
    }
    Ok(LambdaOperator { m, n, k, l, terms })
}

fn two_copy(rho: &DenseOperator) -> CMat {
    linalg::kron(rho.matrix(), rho.matrix())
}

/// `||Lambda (rho (x) rho) Lambda||_1`; zero exactly for pure Gaussian states.
pub fn gaussianity_residual(rho: &DenseOperator) -> Result<f64> {
    let m = rho.modes();
    if m > 5 {
        return Err(Error::DimensionGuard(format!(
            "two-copy residual limited to m <= 5, got {m}"
        )));
    }
    let dev = rho.parity_deviation();
    if dev >= crate::clifford::EVEN_TOL {
        return Err(Error::NotEven { deviation: dev });
    }
    let lam = build_lambda(m)?;
    let y = lam.apply_right(&lam.apply_left(&two_copy(rho)));
    Ok(linalg::trace_norm(&y))
}

/// `2m - Tr(M^T M)`, the quadratic part of the residual.
pub fn quadratic_identity(rho: &DenseOperator) -> Result<f64> {
    let cm = correlation_matrix(rho)?;
    let mm = cm.matrix();
    Ok(2.0 * rho.modes() as f64 - (mm.transpose() * mm).trace())
}

/// Average over the sign flips `c~_{2k-1}, c~_{2k} -> -c~_{2k-1}, -c~_{2k}` for
/// every block of the rotated basis `c~ = R^T c`.
pub fn dephase(tau: &DenseOperator, rotation: &RMat) -> Result<DenseOperator> {
    let m = tau.modes();
    if rotation.nrows() != 2 * m || rotation.ncols() != 2 * m {
        return Err(Error::Shape(format!("rotation must be {0}x{0}", 2 * m)));
    }
    gaussian::check_orthogonal(rotation)?;
    let mut out = tau.matrix().clone();
    for q in gaussian::block_operators(rotation, m) {
        out = (&out + &q * &out * &q).scale(0.5);
    }
    Ok(DenseOperator::from_parts(m, out))
}

#[derive(Clone, Debug, Serialize)]
pub struct NearestGaussian {
    pub spec: GaussianSpec,
    #[serde(skip)]
    pub state: DenseOperator,
    /// `||tau - psi||_1`.
    pub distance: f64,
    /// `sqrt(m * nu)`.
    pub bound: f64,
    pub nu: f64,
    /// Block coefficients of `tau` in its canonical basis.
    pub lambda: Vec<f64>,
    /// Some block had `lambda_j = 0` and its sign was set to `+1`.
    pub degenerate: bool,
}

/// Pure Gaussian state sharing `tau`'s canonical basis, with signs `sign(lambda_j)`.
pub fn nearest_gaussian(tau: &DenseOperator) -> Result<NearestGaussian> {
    let m = tau.modes();
    let cm = correlation_matrix(tau)?;
    let (rotation, lambda) = block_diagonalize(&cm);
    let degenerate = lambda.iter().any(|l| l.abs() < 1e-12);
    let gamma: Vec<f64> = lambda
        .iter()
        .map(|&l| if l < 0.0 && l.abs() >= 1e-12 { -1.0 } else { 1.0 })
        .collect();
    let spec = GaussianSpec::new(rotation, gamma)?;
    let state = gaussian_from_spec(&spec)?;
    let distance = linalg::trace_norm(&(tau.matrix() - state.matrix()));
    let nu = gaussianity_residual(tau)?;
    Ok(NearestGaussian {
        spec,
        state,
        distance,
        bound: (m as f64 * nu).sqrt(),
        nu,
        lambda,
        degenerate,
    })
}

/// Per-sample RNG: the seed selects the key, the sample index the stream.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Monte Carlo estimate of `int dU (U (x) U) X (U (x) U)^dag` over Haar FLO
/// unitaries from O(2m).
pub fn flo_twirl_mc(
    x: &DenseOperator,
    samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<DenseOperator> {
    flo_twirl_mc_in(x, samples, seed, FloGroup::Full, exec)
}

pub fn flo_twirl_mc_in(
    x: &DenseOperator,
    samples: usize,
    seed: u64,
    group: FloGroup,
    exec: Execution,
) -> Result<DenseOperator> {
    if samples == 0 {
        return Err(Error::Domain("need at least one sample".into()));
    }
    if !x.modes().is_multiple_of(2) {
        return Err(Error::Shape("twirl input must be a two-party operator".into()));
    }
    let m = x.modes() / 2;
    if m > 4 {
        return Err(Error::DimensionGuard(format!("twirl limited to m <= 4, got {m}")));
    }
    check_modes(m)?;
    let dim = x.dim();
    let sum = exec::chunked_sum(exec, samples, dim, dim, |i| {
        let mut rng = sample_rng(seed, i as u64);
        let (u, _) = gaussian::random_flo_unitary_in(m, group, &mut rng)
            .expect("mode count validated");
        let w = linalg::kron(u.matrix(), u.matrix());
        &w * x.matrix() * w.adjoint()
    });
    let avg = sum.scale(1.0 / samples as f64);
    Ok(DenseOperator::from_parts(x.modes(), linalg::hermitian_part(&avg)))
}

/// Spectral projectors of `Lambda` for `m` modes, one per eigenvalue in
/// `{-2m, -2m+2, ..., 2m}` that occurs.
pub fn lambda_spectral_projectors(m: usize) -> Result<Vec<(i64, CMat)>> {
    let lam = build_lambda(m)?.to_dense();
    let (w, v) = linalg::hermitian_eigen(lam.matrix());
    let mut groups: Vec<(i64, Vec<usize>)> = Vec::new();
    for (idx, &val) in w.iter().enumerate() {
        let key = val.round() as i64;
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, cols)) => cols.push(idx),
            None => groups.push((key, vec![idx])),
        }
    }
    Ok(groups
        .into_iter()
        .map(|(key, cols)| {
            let basis = CMat::from_fn(v.nrows(), cols.len(), |r, c| v[(r, cols[c])]);
            (key, linalg::projector_from_basis(&basis))
        })
        .collect())
}

/// Frobenius distance from `X` to `span{I, Lambda, ..., Lambda^{2m}}`.
pub fn invariant_span_distance(x: &DenseOperator) -> Result<f64> {
    if !x.modes().is_multiple_of(2) {
        return Err(Error::Shape("expected a two-party operator".into()));
    }
    let projectors = lambda_spectral_projectors(x.modes() / 2)?;
    let mut rest = x.matrix().clone();
    for (_, p) in &projectors {
        let rank = p.trace().re;
        let overlap = (p * x.matrix()).trace();
        rest -= p * (overlap / rank);
    }
    Ok(linalg::frobenius(&rest))
}

/// Orthonormal basis of the joint kernel of all `Lambda^{k,l}` on `n` parties.
#[derive(Clone, Debug)]
pub struct NullSpace {
    pub m: usize,
    pub n: usize,
    /// `d^n x r` with orthonormal columns.
    pub basis: CMat,
}

impl NullSpace {
    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    pub fn projector(&self) -> DenseOperator {
        DenseOperator::from_parts(self.m * self.n, linalg::projector_from_basis(&self.basis))
    }
}

const NULL_CUTOFF: f64 = 1e-8;

/// Kernel of `sum_{k<l} (Lambda^{k,l})^2`, grown one party at a time.
pub fn null_space(m: usize, n: usize) -> Result<NullSpace> {
    check_parties(m, n)?;
    let d = 1usize << m;
    let mut basis = CMat::identity(d, d);
    for k in 2..=n {
        let w = linalg::kron(&basis, &CMat::identity(d, d));
        let mut h = CMat::zeros(w.ncols(), w.ncols());
        for j in 1..k {
            let lw = build_lambda_kl(m, k, j, k)?.apply_left(&w);
            h += lw.adjoint() * &lw;
        }
        let (vals, vecs) = linalg::hermitian_eigen(&h);
        let top = vals.iter().fold(0.0f64, |a, &b| a.max(b.abs())).max(1.0);
        let keep: Vec<usize> = (0..vals.len())
            .filter(|&i| vals[i] <= NULL_CUTOFF * top)
            .collect();
        let sel = CMat::from_fn(vecs.nrows(), keep.len(), |r, c| vecs[(r, keep[c])]);
        basis = linalg::orthonormalize_columns(&(&w * sel), 1e-8);
    }
    Ok(NullSpace { m, n, basis })
}

/// Projector onto the Gaussian-symmetric subspace together with its basis.
pub fn null_projector(m: usize, n: usize) -> Result<(DenseOperator, CMat)> {
    let ns = null_space(m, n)?;
    Ok((ns.projector(), ns.basis))
}

/// `||C(2m,m) S(|0,0><0,0|) - Pi||_max` with `S` estimated from `samples` draws.
pub fn projector_identity_check(
    m: usize,
    samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<f64> {
    if m > 3 {
        return Err(Error::DimensionGuard(format!(
            "projector identity check limited to m <= 3, got {m}"
        )));
    }
    check_modes(m)?;
    let dd = 1usize << (2 * m);
    let mut vac = CMat::zeros(dd, dd);
    vac[(0, 0)] = C64::new(1.0, 0.0);
    let twirled = flo_twirl_mc(&DenseOperator::from_parts(2 * m, vac), samples, seed, exec)?;
    let (pi, _) = null_projector(m, 2)?;
    let c = linalg::binomial(2 * m as u64, m as u64) as f64;
    Ok(linalg::max_abs(&(twirled.matrix().scale(c) - pi.matrix())))
}

/// The two-party swap on `d (x) d`.
pub fn swap_operator(d: usize) -> CMat {
    let mut s = CMat::zeros(d * d, d * d);
    for a in 0..d {
        for b in 0..d {
            s[(b * d + a, a * d + b)] = C64::new(1.0, 0.0);
        }
    }
    s
}
