//! The Clifford algebra `C_{2m}` in the dense Jordan-Wigner representation.
//!
//! Majorana generators follow `c_{2k-1} = a_k + a_k^dag` and
//! `c_{2k} = i(a_k^dag - a_k)` with `a = |0><1|` on each mode and a `Z` string
//! over the preceding modes. With this choice `i c_1 c_2 = diag(-1, 1)` for a
//! single mode, so the vacuum has `<i c_1 c_2> = -1`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::pauli::{qubit_bit, PauliString};
use crate::{CMat, C64};

/// Largest mode count accepted for single-copy operators (dimension 256).
pub const MAX_MODES: usize = 8;

/// Tolerance for accepting an operator as even: `||X - PXP||_max`.
pub const EVEN_TOL: f64 = 1e-9;

pub(crate) fn check_modes(m: usize) -> Result<()> {
    if m == 0 || m > MAX_MODES {
        Err(Error::ModeRange { m, max: MAX_MODES })
    } else {
        Ok(())
    }
}

/// Generator `c_j` (1-based) on a register of `nmodes` modes, as a Pauli string.
pub fn majorana(j: usize, nmodes: usize) -> PauliString {
    assert!(j >= 1 && j <= 2 * nmodes, "generator {j} out of range");
    let k = (j - 1) / 2;
    let string: u64 = (0..k).map(|q| qubit_bit(q, nmodes)).fold(0, |a, b| a | b);
    let bit = qubit_bit(k, nmodes);
    if j % 2 == 1 {
        PauliString::new(bit, string, 0)
    } else {
        // Y = i X Z
        PauliString::new(bit, string | bit, 1)
    }
}

/// Ordered product `c_{a_1} ... c_{a_r}` over the set bits of `mask`
/// (bit `j-1` stands for generator `j`).
pub fn monomial_pauli(mask: u64, nmodes: usize) -> PauliString {
    let mut acc = PauliString::IDENTITY;
    for j in 1..=2 * nmodes {
        if mask & (1u64 << (j - 1)) != 0 {
            acc = acc * majorana(j, nmodes);
        }
    }
    acc
}

/// Hermitian correlator `C_S = i^k c_{a_1} ... c_{a_{2k}}` for an even mask.
pub fn correlator_pauli(mask: u64, nmodes: usize) -> PauliString {
    let k = mask.count_ones() / 2;
    monomial_pauli(mask, nmodes).times_i_pow((k % 4) as u8)
}

/// Parity `P = i^m c_1 ... c_{2m}` as a Pauli string.
pub fn parity_pauli(nmodes: usize) -> PauliString {
    let full = if 2 * nmodes == 64 {
        u64::MAX
    } else {
        (1u64 << (2 * nmodes)) - 1
    };
    monomial_pauli(full, nmodes).times_i_pow((nmodes % 4) as u8)
}

pub fn indices_to_mask(indices: &[usize], max: usize) -> Result<u64> {
    let mut mask = 0u64;
    let mut prev = 0usize;
    for &i in indices {
        if i == 0 || i > max {
            return Err(Error::IndexRange { index: i, max });
        }
        if i <= prev {
            return Err(Error::Unordered(indices.to_vec()));
        }
        prev = i;
        mask |= 1u64 << (i - 1);
    }
    Ok(mask)
}

/// One-based indices of the set bits.
pub fn mask_to_indices(mask: u64) -> Vec<usize> {
    (0..64).filter(|b| mask & (1u64 << b) != 0).map(|b| b + 1).collect()
}

/// Even-cardinality masks of size >= 2 over `2m` generators, ordered by size
/// then lexicographically by index list.
pub fn even_subsets(m: usize) -> Vec<u64> {
    let n = 2 * m;
    let mut out: Vec<u64> = (1u64..(1u64 << n))
        .filter(|s| s.count_ones() % 2 == 0)
        .collect();
    out.sort_by_key(|&s| (s.count_ones(), mask_to_indices(s)));
    out
}

/// An operator on the `2^modes`-dimensional Fock space.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    modes: usize,
    matrix: CMat,
}

impl DenseOperator {
    pub fn new(modes: usize, matrix: CMat) -> Result<Self> {
        let dim = 1usize << modes;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::Shape(format!(
                "expected {dim}x{dim} for {modes} modes, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { modes, matrix })
    }

    pub(crate) fn from_parts(modes: usize, matrix: CMat) -> Self {
        debug_assert_eq!(matrix.nrows(), 1usize << modes);
        Self { modes, matrix }
    }

    pub fn identity(modes: usize) -> Self {
        Self::from_parts(modes, CMat::identity(1 << modes, 1 << modes))
    }

    /// `I / 2^modes`.
    pub fn maximally_mixed(modes: usize) -> Self {
        let d = 1usize << modes;
        Self::from_parts(modes, CMat::identity(d, d).scale(1.0 / d as f64))
    }

    /// Projector onto a normalized copy of `psi`.
    pub fn pure(modes: usize, psi: &nalgebra::DVector<C64>) -> Result<Self> {
        let n = psi.norm();
        if n == 0.0 {
            return Err(Error::Domain("zero state vector".into()));
        }
        let v = psi / C64::new(n, 0.0);
        Self::new(modes, &v * v.adjoint())
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_parts(self.modes, self.matrix.scale(s))
    }

    pub fn kron(&self, other: &DenseOperator) -> DenseOperator {
        Self::from_parts(
            self.modes + other.modes,
            linalg::kron(&self.matrix, &other.matrix),
        )
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        linalg::hermiticity_deviation(&self.matrix)
    }

    /// `||X - P X P||_max`.
    pub fn parity_deviation(&self) -> f64 {
        let p = parity_pauli(self.modes);
        let conj = p.apply_right(&p.apply_left(&self.matrix));
        linalg::max_abs(&(&self.matrix - conj))
    }

    pub fn is_even(&self) -> bool {
        self.parity_deviation() < EVEN_TOL
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::min_eigenvalue(&self.matrix)
    }

    /// Check Hermiticity, unit trace and positivity within `tol`.
    pub fn validate_density(&self, tol: f64) -> Result<()> {
        let h = self.hermiticity_deviation();
        if h > tol {
            return Err(Error::NotHermitian { deviation: h });
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(Error::Normalization { trace: tr.re });
        }
        let w = self.min_eigenvalue();
        if w < -tol {
            return Err(Error::NotPsd { min_eigenvalue: w });
        }
        Ok(())
    }

    /// Density validation plus evenness.
    pub fn validate_even_density(&self, tol: f64) -> Result<()> {
        self.validate_density(tol)?;
        let dev = self.parity_deviation();
        if dev >= EVEN_TOL.max(tol) {
            return Err(Error::NotEven { deviation: dev });
        }
        Ok(())
    }
}

impl std::ops::Sub for &DenseOperator {
    type Output = DenseOperator;
    fn sub(self, rhs: &DenseOperator) -> DenseOperator {
        assert_eq!(self.modes, rhs.modes);
        DenseOperator::from_parts(self.modes, &self.matrix - &rhs.matrix)
    }
}

impl std::ops::Add for &DenseOperator {
    type Output = DenseOperator;
    fn add(self, rhs: &DenseOperator) -> DenseOperator {
        assert_eq!(self.modes, rhs.modes);
        DenseOperator::from_parts(self.modes, &self.matrix + &rhs.matrix)
    }
}

/// `scale * c_{a_1} ... c_{a_r}` with strictly increasing indices.
#[derive(Clone, Debug, PartialEq)]
pub struct MajoranaMonomial {
    m: usize,
    indices: Vec<usize>,
    scale: C64,
}

impl MajoranaMonomial {
    pub fn new(m: usize, indices: Vec<usize>, scale: C64) -> Result<Self> {
        check_modes(m)?;
        indices_to_mask(&indices, 2 * m)?;
        Ok(Self { m, indices, scale })
    }

    /// `C_S` with the Hermitian phase `i^k` for `|S| = 2k`.
    pub fn correlator(m: usize, indices: Vec<usize>) -> Result<Self> {
        if !indices.len().is_multiple_of(2) {
            return Err(Error::Domain(format!(
                "correlator needs an even index set, got {indices:?}"
            )));
        }
        let k = indices.len() / 2;
        let phase = [c64(1.0, 0.0), c64(0.0, 1.0), c64(-1.0, 0.0), c64(0.0, -1.0)][k % 4];
        Self::new(m, indices, phase)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn scale(&self) -> C64 {
        self.scale
    }

    pub fn mask(&self) -> u64 {
        self.indices.iter().fold(0, |a, &i| a | (1u64 << (i - 1)))
    }
}

fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// The generators `c_1, ..., c_{2m}` as dense matrices.
pub fn build_majorana(m: usize) -> Result<Vec<DenseOperator>> {
    check_modes(m)?;
    let d = 1usize << m;
    Ok((1..=2 * m)
        .map(|j| DenseOperator::from_parts(m, majorana(j, m).to_dense(d)))
        .collect())
}

pub fn monomial_to_dense(mono: &MajoranaMonomial) -> DenseOperator {
    let d = 1usize << mono.m;
    let p = monomial_pauli(mono.mask(), mono.m);
    DenseOperator::from_parts(mono.m, p.to_dense(d).scale(1.0) * mono.scale)
}

/// Real coefficients of an even operator:
/// `X = alpha0 I / 2^m + sum_S alpha_S C_S`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorExpansion {
    pub m: usize,
    pub alpha0: f64,
    /// Keyed by the strictly increasing 1-based index list of `S`.
    pub coefficients: BTreeMap<Vec<usize>, f64>,
}

impl OperatorExpansion {
    pub fn new(m: usize, alpha0: f64) -> Self {
        Self {
            m,
            alpha0,
            coefficients: BTreeMap::new(),
        }
    }

    /// Insert `alpha_S`; rejects odd, empty or malformed index sets.
    pub fn set(&mut self, indices: Vec<usize>, value: f64) -> Result<()> {
        if indices.is_empty() || !indices.len().is_multiple_of(2) {
            return Err(Error::Domain(format!(
                "correlator index sets must have even size >= 2, got {indices:?}"
            )));
        }
        indices_to_mask(&indices, 2 * self.m)?;
        self.coefficients.insert(indices, value);
        Ok(())
    }

    pub fn coefficient(&self, indices: &[usize]) -> f64 {
        self.coefficients.get(indices).copied().unwrap_or(0.0)
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.coefficients.values().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Expand an even operator over the correlator basis.
pub fn expand_even(x: &DenseOperator) -> Result<OperatorExpansion> {
    let m = x.modes();
    check_modes(m)?;
    let dev = x.parity_deviation();
    if dev >= EVEN_TOL {
        return Err(Error::NotEven { deviation: dev });
    }
    let d = x.dim() as f64;
    let scale = linalg::max_abs(x.matrix()).max(1.0);
    let tr = x.trace();
    if tr.im.abs() > 1e-9 * scale {
        return Err(Error::Domain(format!(
            "operator has complex trace {tr}; expansion coefficients would not be real"
        )));
    }
    let mut out = OperatorExpansion::new(m, tr.re);
    for mask in even_subsets(m) {
        let value = correlator_pauli(mask, m).trace_with(x.matrix()) / d;
        if value.im.abs() > 1e-9 * scale {
            return Err(Error::Domain(format!(
                "coefficient of {:?} has imaginary part {:e}",
                mask_to_indices(mask),
                value.im
            )));
        }
        if value.re != 0.0 {
            out.coefficients.insert(mask_to_indices(mask), value.re);
        }
    }
    Ok(out)
}

/// Inverse of [`expand_even`].
pub fn assemble(e: &OperatorExpansion) -> Result<DenseOperator> {
    check_modes(e.m)?;
    let d = 1usize << e.m;
    let mut out = CMat::identity(d, d).scale(e.alpha0 / d as f64);
    for (indices, &alpha) in &e.coefficients {
        let mask = indices_to_mask(indices, 2 * e.m)?;
        if mask.count_ones() % 2 != 0 || mask == 0 {
            return Err(Error::Domain(format!("odd or empty index set {indices:?}")));
        }
        let p = correlator_pauli(mask, e.m);
        for col in 0..d {
            out[(p.target(col), col)] += p.coeff(col) * alpha;
        }
    }
    Ok(DenseOperator::from_parts(e.m, out))
}

/// Sum of singular values (eigenvalue moduli for Hermitian input).
pub fn trace_norm(x: &DenseOperator) -> f64 {
    linalg::trace_norm(x.matrix())
}

pub fn parity_operator(m: usize) -> DenseOperator {
    DenseOperator::from_parts(m, parity_pauli(m).to_dense(1 << m))
}

/// `(rho + P rho P) / 2`.
pub fn even_projection(rho: &DenseOperator) -> DenseOperator {
    let p = parity_pauli(rho.modes());
    let conj = p.apply_right(&p.apply_left(rho.matrix()));
    DenseOperator::from_parts(rho.modes(), (rho.matrix() + conj).scale(0.5))
}
