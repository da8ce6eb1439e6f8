//! Fermionic Gaussian states: correlation matrices, the standard form,
//! FLO unitaries, Pfaffians and random state generators.

use nalgebra::{DVector, QR};
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::clifford::{self, check_modes, majorana, DenseOperator};
use crate::error::{Error, Result};
use crate::linalg;
use crate::pauli::PauliString;
use crate::{CMat, RMat, C64};

/// Tolerance for accepting a matrix as orthogonal.
pub const ORTHO_TOL: f64 = 1e-8;

/// Real antisymmetric matrix `M_jk = (i/2) Tr(rho [c_j, c_k])`.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationMatrix {
    m: usize,
    matrix: RMat,
}

impl CorrelationMatrix {
    pub fn new(matrix: RMat) -> Result<Self> {
        let n = matrix.nrows();
        if n == 0 || !n.is_multiple_of(2) || matrix.ncols() != n {
            return Err(Error::Shape(format!(
                "correlation matrix must be 2m x 2m, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let dev = linalg::max_abs_real(&(&matrix + matrix.transpose()));
        if dev > 1e-10 {
            return Err(Error::Domain(format!(
                "correlation matrix not antisymmetric: ||M + M^T||_max = {dev:e}"
            )));
        }
        Ok(Self { m: n / 2, matrix })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn matrix(&self) -> &RMat {
        &self.matrix
    }

    /// `||M^T M - I||_max`.
    pub fn purity_deviation(&self) -> f64 {
        let n = 2 * self.m;
        linalg::max_abs_real(&(self.matrix.transpose() * &self.matrix - RMat::identity(n, n)))
    }

    pub fn singular_values(&self) -> Vec<f64> {
        linalg::singular_values_real(&self.matrix)
    }
}

/// A Gaussian state in standard form: rotation `R` and block coefficients `lambda`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecFile", into = "SpecFile")]
pub struct GaussianSpec {
    pub m: usize,
    pub rotation: RMat,
    pub lambda: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct SpecFile {
    m: usize,
    #[serde(rename = "R")]
    r: Vec<Vec<f64>>,
    lambda: Vec<f64>,
}

impl TryFrom<SpecFile> for GaussianSpec {
    type Error = Error;
    fn try_from(f: SpecFile) -> Result<Self> {
        let n = 2 * f.m;
        if f.r.len() != n || f.r.iter().any(|row| row.len() != n) {
            return Err(Error::Format(format!("R must be {n}x{n}")));
        }
        let rotation = RMat::from_fn(n, n, |i, j| f.r[i][j]);
        let spec = GaussianSpec {
            m: f.m,
            rotation,
            lambda: f.lambda,
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl From<GaussianSpec> for SpecFile {
    fn from(s: GaussianSpec) -> Self {
        let n = 2 * s.m;
        SpecFile {
            m: s.m,
            r: (0..n)
                .map(|i| (0..n).map(|j| s.rotation[(i, j)]).collect())
                .collect(),
            lambda: s.lambda,
        }
    }
}

impl GaussianSpec {
    pub fn new(rotation: RMat, lambda: Vec<f64>) -> Result<Self> {
        let spec = Self {
            m: lambda.len(),
            rotation,
            lambda,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        check_modes(self.m)?;
        let n = 2 * self.m;
        if self.rotation.nrows() != n || self.rotation.ncols() != n {
            return Err(Error::Shape(format!("R must be {n}x{n}")));
        }
        if self.lambda.len() != self.m {
            return Err(Error::Shape(format!(
                "expected {} lambda values, got {}",
                self.m,
                self.lambda.len()
            )));
        }
        check_orthogonal(&self.rotation)?;
        let det = self.rotation.determinant();
        if (det - 1.0).abs() > ORTHO_TOL {
            return Err(Error::Domain(format!("det R = {det}, expected +1")));
        }
        if let Some(l) = self.lambda.iter().find(|l| !(l.abs() <= 1.0 + 1e-12)) {
            return Err(Error::Domain(format!("|lambda| = {} exceeds 1", l.abs())));
        }
        Ok(())
    }

    pub fn is_pure(&self, tol: f64) -> bool {
        self.lambda.iter().all(|l| (l.abs() - 1.0).abs() <= tol)
    }
}

pub(crate) fn check_orthogonal(r: &RMat) -> Result<()> {
    let n = r.nrows();
    let dev = linalg::max_abs_real(&(r.transpose() * r - RMat::identity(n, n)));
    if dev > ORTHO_TOL {
        return Err(Error::Domain(format!(
            "matrix is not orthogonal: ||R^T R - I||_max = {dev:e}"
        )));
    }
    Ok(())
}

/// `M_jk = i Tr(rho c_j c_k)` for `j != k`.
pub fn correlation_matrix(rho: &DenseOperator) -> Result<CorrelationMatrix> {
    let m = rho.modes();
    check_modes(m)?;
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > 1e-8 || tr.im.abs() > 1e-8 {
        return Err(Error::Normalization { trace: tr.re });
    }
    let n = 2 * m;
    let mut out = RMat::zeros(n, n);
    for j in 1..=n {
        for k in j + 1..=n {
            let p = (majorana(j, m) * majorana(k, m)).times_i_pow(1);
            let v = p.trace_with(rho.matrix()).re;
            out[(j - 1, k - 1)] = v;
            out[(k - 1, j - 1)] = -v;
        }
    }
    Ok(CorrelationMatrix { m, matrix: out })
}

/// Canonical form `M = R (+)_j [[0, l_j], [-l_j, 0]] R^T` with `R` in SO(2m),
/// `lambda` sorted by descending magnitude.
pub fn block_diagonalize(cm: &CorrelationMatrix) -> (RMat, Vec<f64>) {
    let m = cm.m;
    let n = 2 * m;
    let mm = cm.matrix();
    let scale = linalg::max_abs_real(mm).max(1.0);
    let h = linalg::complexify(mm) * C64::new(0.0, 1.0);
    let (w, v) = linalg::hermitian_eigen(&h);
    let tol = 1e-10 * scale;

    // eigenvectors of iM with positive eigenvalue, largest first
    let mut cols: Vec<DVector<f64>> = Vec::with_capacity(n);
    for idx in (0..n).rev() {
        if w[idx] <= tol || cols.len() >= n {
            break;
        }
        let mut vec: DVector<C64> = v.column(idx).into_owned();
        let top = vec.iter().fold(0.0f64, |a, z| a.max(z.norm()));
        let p = (0..n).find(|&i| vec[i].norm() >= top - 1e-12).unwrap_or(0);
        // rotate the phase so the dominant entry is positive imaginary
        let ph = vec[p] / C64::new(vec[p].norm(), 0.0);
        vec *= C64::new(0.0, 1.0) / ph;
        let sq2 = std::f64::consts::SQRT_2;
        cols.push(vec.map(|z| z.im * sq2));
        cols.push(vec.map(|z| z.re * sq2));
    }
    let mut basis = RMat::zeros(n, cols.len() + n);
    for (k, c) in cols.iter().enumerate() {
        basis.set_column(k, c);
    }
    for k in 0..n {
        basis[(k, cols.len() + k)] = 1.0;
    }
    let q = linalg::real_part(&linalg::orthonormalize_columns(
        &linalg::complexify(&basis),
        1e-8,
    ));
    let mut r = q.columns(0, n).into_owned();
    if r.determinant() < 0.0 {
        r.swap_columns(n - 2, n - 1);
    }
    let b = r.transpose() * mm * &r;
    let lambda: Vec<f64> = (0..m).map(|j| b[(2 * j, 2 * j + 1)]).collect();
    (r, lambda)
}

/// `c~_a = sum_i R_ia c_i` as dense matrices.
pub(crate) fn rotated_generators(rotation: &RMat, m: usize) -> Vec<CMat> {
    let n = 2 * m;
    let d = 1usize << m;
    let gens: Vec<PauliString> = (1..=n).map(|j| majorana(j, m)).collect();
    (0..n)
        .map(|a| {
            let mut out = CMat::zeros(d, d);
            for (i, g) in gens.iter().enumerate() {
                let w = rotation[(i, a)];
                if w != 0.0 {
                    for col in 0..d {
                        out[(g.target(col), col)] += g.coeff(col) * w;
                    }
                }
            }
            out
        })
        .collect()
}

/// `i c~_{2k-1} c~_{2k}` for each block `k`.
pub(crate) fn block_operators(rotation: &RMat, m: usize) -> Vec<CMat> {
    let ct = rotated_generators(rotation, m);
    (0..m)
        .map(|k| (&ct[2 * k] * &ct[2 * k + 1]) * C64::new(0.0, 1.0))
        .collect()
}

/// `rho = 2^{-m} prod_k (I + i lambda_k c~_{2k-1} c~_{2k})`.
pub fn gaussian_from_spec(spec: &GaussianSpec) -> Result<DenseOperator> {
    spec.validate()?;
    let m = spec.m;
    let d = 1usize << m;
    let blocks = block_operators(&spec.rotation, m);
    let id = CMat::identity(d, d);
    let mut rho = CMat::identity(d, d).scale(1.0 / d as f64);
    for (k, q) in blocks.iter().enumerate() {
        rho *= &id + q.scale(spec.lambda[k]);
    }
    let rho = linalg::hermitian_part(&rho);
    DenseOperator::new(m, rho)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PurityReport {
    pub pure: bool,
    /// `||M^T M - I||_max`.
    pub deviation: f64,
}

pub fn is_pure_gaussian(rho: &DenseOperator, tol: f64) -> Result<PurityReport> {
    let cm = correlation_matrix(rho)?;
    let deviation = cm.purity_deviation();
    Ok(PurityReport {
        pure: deviation < tol,
        deviation,
    })
}

/// Subgroup of rotations used for Haar sampling.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FloGroup {
    /// SO(2m).
    #[default]
    Special,
    /// O(2m): reflections included.
    Full,
}

/// Haar-random `n x n` orthogonal matrix.
pub fn haar_orthogonal<R: Rng + ?Sized>(n: usize, group: FloGroup, rng: &mut R) -> RMat {
    let g = RMat::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = QR::new(g);
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..n {
        if r[(k, k)] < 0.0 {
            q.column_mut(k).neg_mut();
        }
    }
    if group == FloGroup::Special && q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    q
}

/// A plane rotation on generators `p < q` (0-based) by angle `theta`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Givens {
    pub p: usize,
    pub q: usize,
    pub theta: f64,
}

impl Givens {
    /// The rotation matrix with `G_pp = G_qq = cos`, `G_pq = -sin`, `G_qp = sin`.
    pub fn matrix(&self, n: usize) -> RMat {
        let (s, c) = self.theta.sin_cos();
        let mut g = RMat::identity(n, n);
        g[(self.p, self.p)] = c;
        g[(self.q, self.q)] = c;
        g[(self.p, self.q)] = -s;
        g[(self.q, self.p)] = s;
        g
    }
}

/// Factor `R` in SO(n) as `G_1 G_2 ... G_K`.
pub fn givens_factor(rotation: &RMat) -> Result<Vec<Givens>> {
    check_orthogonal(rotation)?;
    let n = rotation.nrows();
    if rotation.determinant() < 0.0 {
        return Err(Error::Domain("Givens factorization needs det R = +1".into()));
    }
    let mut a = rotation.clone();
    let mut out = Vec::new();
    for c in 0..n.saturating_sub(1) {
        for r in c + 1..n {
            if a[(r, c)] == 0.0 {
                continue;
            }
            let theta = a[(r, c)].atan2(a[(c, c)]);
            let (s, co) = theta.sin_cos();
            for k in 0..n {
                let x = a[(c, k)];
                let y = a[(r, k)];
                a[(c, k)] = co * x + s * y;
                a[(r, k)] = -s * x + co * y;
            }
            out.push(Givens { p: c, q: r, theta });
        }
    }
    Ok(out)
}

/// Unitary `U` with `U c_j U^dag = sum_i R_ji c_i`, for `R` in O(2m).
pub fn flo_unitary(rotation: &RMat) -> Result<DenseOperator> {
    let n = rotation.nrows();
    if n == 0 || !n.is_multiple_of(2) || rotation.ncols() != n {
        return Err(Error::Shape(format!("rotation must be 2m x 2m, got {n}")));
    }
    let m = n / 2;
    check_modes(m)?;
    check_orthogonal(rotation)?;
    let reflect = rotation.determinant() < 0.0;
    let proper = if reflect {
        // R = D R' with D = diag(1, -1, ..., -1), implemented by a trailing c_1
        let mut r = rotation.clone();
        for i in 1..n {
            r.row_mut(i).neg_mut();
        }
        r
    } else {
        rotation.clone()
    };
    let d = 1usize << m;
    let mut u = CMat::identity(d, d);
    for g in givens_factor(&proper)? {
        let (s, c) = (g.theta / 2.0).sin_cos();
        let pq = majorana(g.p + 1, m) * majorana(g.q + 1, m);
        let mut next = u.scale(c);
        pq.add_apply_left(C64::new(s, 0.0), &u, &mut next);
        u = next;
    }
    if reflect {
        u = majorana(1, m).apply_right(&u);
    }
    Ok(DenseOperator::from_parts(m, u))
}

/// Haar FLO unitary over SO(2m) with its rotation.
pub fn random_flo_unitary<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Result<(DenseOperator, RMat)> {
    random_flo_unitary_in(m, FloGroup::Special, rng)
}

pub fn random_flo_unitary_in<R: Rng + ?Sized>(
    m: usize,
    group: FloGroup,
    rng: &mut R,
) -> Result<(DenseOperator, RMat)> {
    check_modes(m)?;
    let r = haar_orthogonal(2 * m, group, rng);
    Ok((flo_unitary(&r)?, r))
}

/// `max_j ||U c_j U^dag - sum_i R_ji c_i||_max`.
pub fn flo_action_deviation(u: &DenseOperator, rotation: &RMat) -> f64 {
    let m = u.modes();
    let gens = clifford::build_majorana(m).expect("mode count already validated");
    let ud = u.matrix().adjoint();
    let mut worst: f64 = 0.0;
    for j in 0..2 * m {
        let lhs = u.matrix() * gens[j].matrix() * &ud;
        let mut rhs = CMat::zeros(u.dim(), u.dim());
        for (i, g) in gens.iter().enumerate() {
            rhs += g.matrix().scale(rotation[(j, i)]);
        }
        worst = worst.max(linalg::max_abs(&(lhs - rhs)));
    }
    worst
}

pub fn random_spec<R: Rng + ?Sized>(m: usize, pure: bool, rng: &mut R) -> Result<GaussianSpec> {
    check_modes(m)?;
    let rotation = haar_orthogonal(2 * m, FloGroup::Special, rng);
    let lambda = (0..m)
        .map(|_| {
            if pure {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            } else {
                rng.random_range(-1.0..=1.0)
            }
        })
        .collect();
    GaussianSpec::new(rotation, lambda)
}

pub fn random_pure_gaussian<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Result<DenseOperator> {
    gaussian_from_spec(&random_spec(m, true, rng)?)
}

/// Mixed Gaussian state with uniformly random `lambda_j` in `[-1, 1]`.
pub fn random_mixed_gaussian<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Result<DenseOperator> {
    gaussian_from_spec(&random_spec(m, false, rng)?)
}

/// Uniform weights on the `k`-simplex.
pub fn dirichlet_weights<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

/// A convex mixture of `k` pure Gaussian states with its components.
#[derive(Clone, Debug)]
pub struct ConvexGaussian {
    pub state: DenseOperator,
    pub weights: Vec<f64>,
    pub components: Vec<DenseOperator>,
}

pub fn random_convex_gaussian_parts<R: Rng + ?Sized>(
    m: usize,
    k: usize,
    rng: &mut R,
) -> Result<ConvexGaussian> {
    if k == 0 {
        return Err(Error::Domain("need at least one component".into()));
    }
    let components = (0..k)
        .map(|_| random_pure_gaussian(m, rng))
        .collect::<Result<Vec<_>>>()?;
    let weights = dirichlet_weights(k, rng);
    let d = 1usize << m;
    let mut acc = CMat::zeros(d, d);
    for (p, c) in weights.iter().zip(&components) {
        acc += c.matrix().scale(*p);
    }
    Ok(ConvexGaussian {
        state: DenseOperator::from_parts(m, acc),
        weights,
        components,
    })
}

pub fn random_convex_gaussian<R: Rng + ?Sized>(
    m: usize,
    k: usize,
    rng: &mut R,
) -> Result<DenseOperator> {
    Ok(random_convex_gaussian_parts(m, k, rng)?.state)
}

/// `(|0...0> + |1...1>)/sqrt 2`; even only for an even number of modes.
pub fn ghz_state(m: usize) -> Result<DenseOperator> {
    check_modes(m)?;
    if !m.is_multiple_of(2) {
        return Err(Error::Domain(format!(
            "GHZ state on {m} modes mixes parity sectors; m must be even"
        )));
    }
    let d = 1usize << m;
    let mut psi = DVector::<C64>::zeros(d);
    psi[0] = C64::new(1.0, 0.0);
    psi[d - 1] = C64::new(1.0, 0.0);
    DenseOperator::pure(m, &psi)
}

fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Random even density operator: a rank-`rank` Ginibre state projected onto
/// the even operators.
pub fn random_even_state<R: Rng + ?Sized>(
    m: usize,
    rank: usize,
    rng: &mut R,
) -> Result<DenseOperator> {
    check_modes(m)?;
    let d = 1usize << m;
    let rank = rank.clamp(1, d);
    let g = CMat::from_fn(d, rank, |_, _| gaussian_complex(rng));
    let rho = &g * g.adjoint();
    let tr = rho.trace().re;
    let rho = DenseOperator::from_parts(m, linalg::hermitian_part(&rho.scale(1.0 / tr)));
    Ok(clifford::even_projection(&rho))
}

/// Random pure state inside one parity sector (chosen at random).
pub fn random_even_pure_state<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Result<DenseOperator> {
    check_modes(m)?;
    let d = 1usize << m;
    let sector = rng.random::<bool>() as u32;
    let psi = DVector::from_fn(d, |i, _| {
        if (i as u64).count_ones() % 2 == sector {
            gaussian_complex(rng)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    DenseOperator::pure(m, &psi)
}

fn check_antisymmetric(a: &RMat) -> Result<()> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Shape(format!("{}x{} is not square", n, a.ncols())));
    }
    if !n.is_multiple_of(2) {
        return Err(Error::Domain(format!(
            "Pfaffian needs an even dimension, got {n}"
        )));
    }
    let scale = linalg::max_abs_real(a).max(1.0);
    let dev = linalg::max_abs_real(&(a + a.transpose()));
    if dev > 1e-10 * scale {
        return Err(Error::Domain(format!(
            "matrix not antisymmetric: ||A + A^T||_max = {dev:e}"
        )));
    }
    Ok(())
}

/// Pfaffian of a real antisymmetric matrix.
pub fn pfaffian(a: &RMat) -> Result<f64> {
    check_antisymmetric(a)?;
    if a.nrows() <= 8 {
        Ok(pfaffian_expansion(a))
    } else {
        Ok(pfaffian_ltl(a))
    }
}

/// Expansion along the first row.
pub(crate) fn pfaffian_expansion(a: &RMat) -> f64 {
    fn rec(a: &RMat, idx: &[usize]) -> f64 {
        if idx.is_empty() {
            return 1.0;
        }
        let first = idx[0];
        let mut total = 0.0;
        for k in 1..idx.len() {
            let w = a[(first, idx[k])];
            if w == 0.0 {
                continue;
            }
            let rest: Vec<usize> = idx[1..]
                .iter()
                .enumerate()
                .filter(|&(t, _)| t + 1 != k)
                .map(|(_, &i)| i)
                .collect();
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            total += sign * w * rec(a, &rest);
        }
        total
    }
    let idx: Vec<usize> = (0..a.nrows()).collect();
    rec(a, &idx)
}

/// Parlett-Reid tridiagonalization with partial pivoting.
pub(crate) fn pfaffian_ltl(a: &RMat) -> f64 {
    let n = a.nrows();
    let mut a = a.clone();
    let mut pf = 1.0;
    let mut k = 0;
    while k + 1 < n {
        let kp = (k + 1..n)
            .max_by(|&x, &y| a[(x, k)].abs().total_cmp(&a[(y, k)].abs()))
            .expect("nonempty range");
        if kp != k + 1 {
            a.swap_rows(k + 1, kp);
            a.swap_columns(k + 1, kp);
            pf = -pf;
        }
        if a[(k + 1, k)] == 0.0 {
            return 0.0;
        }
        pf *= a[(k, k + 1)];
        if k + 2 < n {
            let piv = a[(k, k + 1)];
            let tau: Vec<f64> = (k + 2..n).map(|j| a[(k, j)] / piv).collect();
            let col: Vec<f64> = (k + 2..n).map(|i| a[(i, k + 1)]).collect();
            for (ii, i) in (k + 2..n).enumerate() {
                for (jj, j) in (k + 2..n).enumerate() {
                    a[(i, j)] += tau[ii] * col[jj] - col[ii] * tau[jj];
                }
            }
        }
        k += 2;
    }
    pf
}

/// `Tr(rho C_S)` for a Gaussian `rho` with correlation matrix `M`, by Wick's theorem.
pub fn wick_correlator(cm: &CorrelationMatrix, indices: &[usize]) -> Result<f64> {
    let mask = clifford::indices_to_mask(indices, 2 * cm.m)?;
    if !indices.len().is_multiple_of(2) {
        return Err(Error::Domain(format!(
            "Wick correlator needs an even index set, got {indices:?}"
        )));
    }
    debug_assert_eq!(mask.count_ones() as usize, indices.len());
    let k = indices.len();
    let sub = RMat::from_fn(k, k, |r, c| cm.matrix[(indices[r] - 1, indices[c] - 1)]);
    pfaffian(&sub)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn canonical_single_block() {
        let cm = CorrelationMatrix::new(RMat::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0])).unwrap();
        let (r, l) = block_diagonalize(&cm);
        assert!(linalg::max_abs_real(&(r - RMat::identity(2, 2))) < 1e-14);
        assert!((l[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn givens_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = haar_orthogonal(6, FloGroup::Special, &mut rng);
        let gs = givens_factor(&r).unwrap();
        let mut acc = RMat::identity(6, 6);
        for g in &gs {
            acc *= g.matrix(6);
        }
        assert!(linalg::max_abs_real(&(acc - r)) < 1e-12);
    }

    #[test]
    fn reflections_are_realized() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let r = haar_orthogonal(4, FloGroup::Full, &mut rng);
            let u = flo_unitary(&r).unwrap();
            assert!(flo_action_deviation(&u, &r) < 1e-10);
        }
    }

    #[test]
    fn ltl_matches_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [2usize, 4, 6, 8, 10] {
            let g = RMat::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
            let a = &g - g.transpose();
            let e = pfaffian_expansion(&a);
            let l = pfaffian_ltl(&a);
            assert!((e - l).abs() < 1e-9 * e.abs().max(1.0), "n={n}: {e} vs {l}");
        }
    }

    #[test]
    fn odd_ghz_rejected() {
        assert!(matches!(ghz_state(3), Err(Error::Domain(_))));
    }
}
