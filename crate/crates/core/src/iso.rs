//! The isomorphism `J` between `C_{2mn}` and `C_{2m}^{(x)n}`.
//!
//! `J(c_g) = I (x) ... (x) c_j (x) P (x) ... (x) P` for the generator `g` that
//! is the `j`-th generator of party `p`, with `P = i^m c_1 ... c_{2m}`. Both
//! sides are stored as monomials with exact phases; dense operator maps go
//! through the full monomial expansion.

use crate::clifford::{monomial_pauli, parity_pauli, DenseOperator};
use crate::error::{Error, Result};
use crate::lambda::{build_lambda_kl, check_parties};
use crate::linalg;
use crate::pauli::PauliString;
use crate::{CMat, C64};

/// Largest `m * n` for operator-level maps (full monomial expansion).
pub const MAX_EXPANSION_MODES: usize = 8;

fn i_pow(k: usize) -> C64 {
    [
        C64::new(1.0, 0.0),
        C64::new(0.0, 1.0),
        C64::new(-1.0, 0.0),
        C64::new(0.0, -1.0),
    ][k % 4]
}

/// Sign of reordering `c_a c_b` (ordered monomials over masks) into `c_{a ^ b}`.
pub fn product_sign(a: u64, b: u64) -> f64 {
    let mut swaps = 0u32;
    let mut rest = b;
    while rest != 0 {
        let t = rest.trailing_zeros();
        let above = if t >= 63 { 0 } else { a >> (t + 1) };
        swaps += above.count_ones();
        rest &= rest - 1;
    }
    if swaps.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

fn full_mask(bits: usize) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

/// `scale * c_S` in `C_{2mn}`; bit `g - 1` of `mask` stands for generator `g`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BigMonomial {
    pub m: usize,
    pub n: usize,
    pub mask: u64,
    pub scale: C64,
}

impl BigMonomial {
    pub fn new(m: usize, n: usize, indices: &[usize], scale: C64) -> Result<Self> {
        check_parties(m, n)?;
        let mask = crate::clifford::indices_to_mask(indices, 2 * m * n)?;
        Ok(Self { m, n, mask, scale })
    }

    pub fn identity(m: usize, n: usize) -> Self {
        Self {
            m,
            n,
            mask: 0,
            scale: C64::new(1.0, 0.0),
        }
    }

    pub fn indices(&self) -> Vec<usize> {
        crate::clifford::mask_to_indices(self.mask)
    }

    /// Local mask of party `p` (1-based).
    pub fn party_mask(&self, p: usize) -> u64 {
        (self.mask >> (2 * self.m * (p - 1))) & full_mask(2 * self.m)
    }

    pub fn mul(&self, other: &BigMonomial) -> BigMonomial {
        BigMonomial {
            m: self.m,
            n: self.n,
            mask: self.mask ^ other.mask,
            scale: self.scale * other.scale * product_sign(self.mask, other.mask),
        }
    }

    /// Dense matrix in the Jordan-Wigner representation on `m n` modes.
    pub fn to_dense(&self) -> CMat {
        let p = monomial_pauli(self.mask, self.m * self.n);
        p.to_dense(1usize << (self.m * self.n)) * self.scale
    }
}

/// `scale * (c_{S_1} (x) ... (x) c_{S_n})` with local ordered monomials.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorMonomial {
    pub m: usize,
    pub masks: Vec<u64>,
    pub scale: C64,
}

impl TensorMonomial {
    pub fn identity(m: usize, n: usize) -> Self {
        Self {
            m,
            masks: vec![0; n],
            scale: C64::new(1.0, 0.0),
        }
    }

    pub fn n(&self) -> usize {
        self.masks.len()
    }

    pub fn mul(&self, other: &TensorMonomial) -> TensorMonomial {
        let mut scale = self.scale * other.scale;
        let masks = self
            .masks
            .iter()
            .zip(&other.masks)
            .map(|(&a, &b)| {
                scale *= product_sign(a, b);
                a ^ b
            })
            .collect();
        TensorMonomial {
            m: self.m,
            masks,
            scale,
        }
    }

    /// Single Pauli string with the scale split off.
    pub fn to_pauli(&self) -> (C64, PauliString) {
        let n = self.n();
        let mut acc = PauliString::IDENTITY;
        for (p, &mask) in self.masks.iter().enumerate() {
            acc = acc * monomial_pauli(mask, self.m).shifted(self.m * (n - 1 - p));
        }
        (self.scale, acc)
    }

    pub fn to_dense(&self) -> CMat {
        let (s, p) = self.to_pauli();
        p.to_dense(1usize << (self.m * self.n())) * s
    }
}

/// `J(c_g)` for a single generator `g` (1-based).
pub fn iso_generator(g: usize, m: usize, n: usize) -> TensorMonomial {
    let p = (g - 1) / (2 * m);
    let j = (g - 1) % (2 * m);
    let mut masks = vec![0u64; n];
    masks[p] = 1u64 << j;
    for q in masks.iter_mut().skip(p + 1) {
        *q = full_mask(2 * m);
    }
    TensorMonomial {
        m,
        masks,
        scale: i_pow(m * (n - 1 - p)),
    }
}

pub fn iso_forward(mono: &BigMonomial) -> TensorMonomial {
    let (m, n) = (mono.m, mono.n);
    let mut acc = TensorMonomial::identity(m, n);
    acc.scale = mono.scale;
    let mut rest = mono.mask;
    while rest != 0 {
        let g = rest.trailing_zeros() as usize + 1;
        acc = acc.mul(&iso_generator(g, m, n));
        rest &= rest - 1;
    }
    acc
}

pub fn iso_inverse(t: &TensorMonomial) -> BigMonomial {
    let m = t.m;
    let n = t.n();
    let mut acc = BigMonomial::identity(m, n);
    for (p, &mask) in t.masks.iter().enumerate() {
        let mut term = BigMonomial {
            m,
            n,
            mask: mask << (2 * m * p),
            scale: C64::new(1.0, 0.0),
        };
        if mask.count_ones() % 2 == 1 {
            // P at every later party is J(i^m c_full) of that party
            for q in p + 1..n {
                let parity = BigMonomial {
                    m,
                    n,
                    mask: full_mask(2 * m) << (2 * m * q),
                    scale: i_pow(m),
                };
                term = term.mul(&parity);
            }
        }
        acc = acc.mul(&term);
    }
    acc.scale *= t.scale;
    acc
}

fn check_expansion(m: usize, n: usize) -> Result<()> {
    check_parties(m, n)?;
    if m * n > MAX_EXPANSION_MODES {
        return Err(Error::DimensionGuard(format!(
            "operator-level isomorphism limited to m * n <= {MAX_EXPANSION_MODES}, got {}",
            m * n
        )));
    }
    Ok(())
}

fn check_dim(x: &DenseOperator, m: usize, n: usize) -> Result<()> {
    if x.modes() != m * n {
        return Err(Error::Shape(format!(
            "expected an operator on {} modes, got {}",
            m * n,
            x.modes()
        )));
    }
    Ok(())
}

/// Coefficients of `mu` over the ordered big monomials `c_S`:
/// `mu = sum_S coef_S c_S`.
pub fn expand_big(mu: &DenseOperator, m: usize, n: usize) -> Result<Vec<(u64, C64)>> {
    check_expansion(m, n)?;
    check_dim(mu, m, n)?;
    let modes = m * n;
    let d = mu.dim() as f64;
    let mut out = Vec::new();
    for mask in 0..(1u64 << (2 * modes)) {
        // c_S^dag c_S = I, so coef = Tr(c_S^dag mu) / d
        let p = monomial_pauli(mask, modes).dagger();
        let coef = p.trace_with(mu.matrix()) / d;
        if coef.norm() > 0.0 {
            out.push((mask, coef));
        }
    }
    Ok(out)
}

/// Coefficients of `x` over tensor monomials `c_{S_1} (x) ... (x) c_{S_n}`.
pub fn expand_tensor(x: &DenseOperator, m: usize, n: usize) -> Result<Vec<(TensorMonomial, C64)>> {
    check_expansion(m, n)?;
    check_dim(x, m, n)?;
    let d = x.dim() as f64;
    let local = 2 * m;
    let mut out = Vec::new();
    for code in 0..(1u64 << (local * n)) {
        let masks: Vec<u64> = (0..n)
            .map(|p| (code >> (local * p)) & full_mask(local))
            .collect();
        let t = TensorMonomial {
            m,
            masks,
            scale: C64::new(1.0, 0.0),
        };
        let (_, pauli) = t.to_pauli();
        let coef = pauli.dagger().trace_with(x.matrix()) / d;
        if coef.norm() > 0.0 {
            out.push((t, coef));
        }
    }
    Ok(out)
}

/// `J(mu)` for an operator in the `C_{2mn}` representation.
pub fn iso_forward_dense(mu: &DenseOperator, m: usize, n: usize) -> Result<DenseOperator> {
    let dim = mu.dim();
    let mut out = CMat::zeros(dim, dim);
    for (mask, coef) in expand_big(mu, m, n)? {
        let mono = BigMonomial {
            m,
            n,
            mask,
            scale: coef,
        };
        let (s, p) = iso_forward(&mono).to_pauli();
        for col in 0..dim {
            out[(p.target(col), col)] += s * p.coeff(col);
        }
    }
    Ok(DenseOperator::from_parts(m * n, out))
}

/// `J^{-1}(x)` for an operator in the tensor representation.
pub fn iso_inverse_dense(x: &DenseOperator, m: usize, n: usize) -> Result<DenseOperator> {
    let dim = x.dim();
    let mut out = CMat::zeros(dim, dim);
    for (mut t, coef) in expand_tensor(x, m, n)? {
        t.scale = coef;
        let big = iso_inverse(&t);
        let p = monomial_pauli(big.mask, m * n);
        for col in 0..dim {
            out[(p.target(col), col)] += big.scale * p.coeff(col);
        }
    }
    Ok(DenseOperator::from_parts(m * n, out))
}

/// `Gamma^{k,l} = sum_j (-1)^{m-j} c_{2m(k-1)+j} c_{2m(l-1)+1} ... ^j ... c_{2ml}`
/// in the `C_{2mn}` representation.
pub fn build_gamma_kl(m: usize, n: usize, k: usize, l: usize) -> Result<DenseOperator> {
    check_parties(m, n)?;
    if !(1 <= k && k < l && l <= n) {
        return Err(Error::Domain(format!(
            "need 1 <= k < l <= n, got k={k}, l={l}, n={n}"
        )));
    }
    let modes = m * n;
    let dim = 1usize << modes;
    let block_l = full_mask(2 * m) << (2 * m * (l - 1));
    let mut out = CMat::zeros(dim, dim);
    for j in 1..=2 * m {
        let first = 1u64 << (2 * m * (k - 1) + j - 1);
        let omitted = 1u64 << (2 * m * (l - 1) + j - 1);
        let mask = first | (block_l & !omitted);
        let sign = if (m + 2 * m - j).is_multiple_of(2) { 1.0 } else { -1.0 };
        let p = monomial_pauli(mask, modes);
        for col in 0..dim {
            out[(p.target(col), col)] += p.coeff(col) * sign;
        }
    }
    Ok(DenseOperator::from_parts(modes, out))
}

/// Phase `phi` (a multiple of `pi/2`) such that `e^{-i phi} X` is Hermitian,
/// if one exists within `tol`.
pub fn hermitian_phase(x: &DenseOperator, tol: f64) -> Option<usize> {
    (0..4).find(|&k| {
        let y = x.matrix() * i_pow((4 - k) % 4);
        linalg::hermiticity_deviation(&y) <= tol
    })
}

/// `(rho + C rho C) / 2` with `C = i^{mn} c_1 ... c_{2mn}`.
pub fn evenize_extension(rho_ext: &DenseOperator) -> DenseOperator {
    crate::clifford::even_projection(rho_ext)
}

/// `C_all` on `modes` modes.
pub fn total_parity(modes: usize) -> DenseOperator {
    DenseOperator::from_parts(modes, parity_pauli(modes).to_dense(1usize << modes))
}

/// `Tr_{2..n} J(mu)` from the monomial survival rules: `c_S` contributes only
/// when its first-party part is even and the rest is empty, or odd with every
/// other party block complete.
pub fn marginal_via_iso(mu: &DenseOperator, m: usize, n: usize) -> Result<DenseOperator> {
    let d = 1usize << m;
    let full = full_mask(2 * m);
    let weight = (1usize << (m * (n - 1))) as f64;
    let mut out = CMat::zeros(d, d);
    for (mask, coef) in expand_big(mu, m, n)? {
        let mono = BigMonomial {
            m,
            n,
            mask,
            scale: coef,
        };
        let first = mono.party_mask(1);
        let rest_target = if first.count_ones().is_multiple_of(2) { 0 } else { full };
        if (2..=n).any(|p| mono.party_mask(p) != rest_target) {
            continue;
        }
        let t = iso_forward(&mono);
        debug_assert!(t.masks[1..].iter().all(|&q| q == 0));
        let p = monomial_pauli(t.masks[0], m);
        for col in 0..d {
            out[(p.target(col), col)] += t.scale * p.coeff(col) * weight;
        }
    }
    Ok(DenseOperator::from_parts(m, out))
}

/// `Tr_{2..n} x` in the tensor representation.
pub fn tensor_partial_trace(x: &DenseOperator, m: usize, n: usize) -> Result<DenseOperator> {
    check_dim(x, m, n)?;
    let d = 1usize << m;
    let rest = 1usize << (m * (n - 1));
    Ok(DenseOperator::from_parts(
        m,
        linalg::partial_trace_keep_first(x.matrix(), d, rest),
    ))
}

/// `||Gamma^{k,l} mu||_F` and `||Lambda^{k,l} J(mu)||_F`.
pub fn null_condition_norms(
    mu: &DenseOperator,
    m: usize,
    n: usize,
    k: usize,
    l: usize,
) -> Result<(f64, f64)> {
    let gamma = build_gamma_kl(m, n, k, l)?;
    let g = linalg::frobenius(&(gamma.matrix() * mu.matrix()));
    let jm = iso_forward_dense(mu, m, n)?;
    let lam = build_lambda_kl(m, n, k, l)?;
    let lj = linalg::frobenius(&lam.apply_left(jm.matrix()));
    Ok((g, lj))
}
