//! Phased Pauli strings on qubit registers.
//!
//! Every Majorana monomial in the Jordan-Wigner representation is a Pauli
//! string `i^phase X^x Z^z`, i.e. a permutation matrix with phases. Keeping
//! that structure lets products, traces and left/right multiplication run in
//! `O(dim)` or `O(dim^2)` instead of dense matrix products.
//!
//! Bit convention: qubit `q` (0-based, 0 = first mode) of an `nq`-qubit
//! register lives at bit `nq - 1 - q` of the basis index.

use crate::{CMat, C64};

const PHASES: [C64; 4] = [
    C64::new(1.0, 0.0),
    C64::new(0.0, 1.0),
    C64::new(-1.0, 0.0),
    C64::new(0.0, -1.0),
];

/// `i^phase X^x Z^z`, with `x`/`z` bit masks over basis-index bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    pub x: u64,
    pub z: u64,
    pub phase: u8,
}

/// Basis-index bit of qubit `q` in an `nq`-qubit register.
#[inline]
pub fn qubit_bit(q: usize, nq: usize) -> u64 {
    debug_assert!(q < nq);
    1u64 << (nq - 1 - q)
}

impl PauliString {
    pub const IDENTITY: PauliString = PauliString {
        x: 0,
        z: 0,
        phase: 0,
    };

    pub fn new(x: u64, z: u64, phase: u8) -> Self {
        Self {
            x,
            z,
            phase: phase % 4,
        }
    }

    pub fn is_identity_up_to_phase(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn phase_factor(&self) -> C64 {
        PHASES[self.phase as usize]
    }

    /// Multiply by `i^k`.
    pub fn times_i_pow(self, k: u8) -> Self {
        Self::new(self.x, self.z, self.phase + k % 4)
    }

    pub fn negate(self) -> Self {
        self.times_i_pow(2)
    }

    /// Product `self * other`.
    pub fn mul(self, other: PauliString) -> PauliString {
        // Z^{z1} X^{x2} = (-1)^{|z1 & x2|} X^{x2} Z^{z1}
        let swap = ((self.z & other.x).count_ones() % 2) as u8;
        PauliString::new(
            self.x ^ other.x,
            self.z ^ other.z,
            self.phase + other.phase + 2 * swap,
        )
    }

    pub fn dagger(self) -> PauliString {
        let swap = ((self.z & self.x).count_ones() % 2) as u8;
        PauliString::new(self.x, self.z, (4 - self.phase) % 4 + 2 * swap)
    }

    /// Shift the masks left by `bits`; used to embed a single-party string
    /// into a larger register.
    pub fn shifted(self, bits: usize) -> PauliString {
        PauliString::new(self.x << bits, self.z << bits, self.phase)
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        ((self.z & other.x).count_ones() + (self.x & other.z).count_ones()).is_multiple_of(2)
    }

    /// Matrix element `<col ^ x| P |col>`.
    #[inline]
    pub fn coeff(&self, col: usize) -> C64 {
        let sign = ((self.z & col as u64).count_ones() % 2) as usize;
        PHASES[(self.phase as usize + 2 * sign) % 4]
    }

    /// Row index of the nonzero entry in column `col`.
    #[inline]
    pub fn target(&self, col: usize) -> usize {
        col ^ self.x as usize
    }

    pub fn to_dense(&self, dim: usize) -> CMat {
        let mut out = CMat::zeros(dim, dim);
        for col in 0..dim {
            out[(self.target(col), col)] = self.coeff(col);
        }
        out
    }

    /// `P * a`.
    pub fn apply_left(&self, a: &CMat) -> CMat {
        let mut out = CMat::zeros(a.nrows(), a.ncols());
        self.add_apply_left(C64::new(1.0, 0.0), a, &mut out);
        out
    }

    /// `out += w * P * a`.
    pub fn add_apply_left(&self, w: C64, a: &CMat, out: &mut CMat) {
        let rows = a.nrows();
        for k in 0..rows {
            let f = w * self.coeff(k);
            let r = self.target(k);
            for c in 0..a.ncols() {
                out[(r, c)] += f * a[(k, c)];
            }
        }
    }

    /// `a * P`.
    pub fn apply_right(&self, a: &CMat) -> CMat {
        let mut out = CMat::zeros(a.nrows(), a.ncols());
        self.add_apply_right(C64::new(1.0, 0.0), a, &mut out);
        out
    }

    /// `out += w * a * P`.
    pub fn add_apply_right(&self, w: C64, a: &CMat, out: &mut CMat) {
        for c in 0..a.ncols() {
            let f = w * self.coeff(c);
            let k = self.target(c);
            for r in 0..a.nrows() {
                out[(r, c)] += a[(r, k)] * f;
            }
        }
    }

    /// `Tr(P a)`.
    pub fn trace_with(&self, a: &CMat) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..a.nrows() {
            acc += self.coeff(k) * a[(k, self.target(k))];
        }
        acc
    }

    /// `Tr(P)` on a register of dimension `dim`.
    pub fn trace(&self, dim: usize) -> C64 {
        if self.x != 0 || self.z != 0 {
            C64::new(0.0, 0.0)
        } else {
            self.phase_factor() * dim as f64
        }
    }
}

impl std::ops::Mul for PauliString {
    type Output = PauliString;
    fn mul(self, rhs: PauliString) -> PauliString {
        PauliString::mul(self, rhs)
    }
}

/// A linear combination of Pauli strings.
#[derive(Clone, Debug, Default)]
pub struct PauliSum {
    pub terms: Vec<(C64, PauliString)>,
}

impl PauliSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, w: C64, p: PauliString) {
        self.terms.push((w, p));
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn to_dense(&self, dim: usize) -> CMat {
        let mut out = CMat::zeros(dim, dim);
        for (w, p) in &self.terms {
            for col in 0..dim {
                out[(p.target(col), col)] += *w * p.coeff(col);
            }
        }
        out
    }

    pub fn apply_left(&self, a: &CMat) -> CMat {
        let mut out = CMat::zeros(a.nrows(), a.ncols());
        for (w, p) in &self.terms {
            p.add_apply_left(*w, a, &mut out);
        }
        out
    }

    pub fn apply_right(&self, a: &CMat) -> CMat {
        let mut out = CMat::zeros(a.nrows(), a.ncols());
        for (w, p) in &self.terms {
            p.add_apply_right(*w, a, &mut out);
        }
        out
    }

    /// `S a S` for a sum `S`.
    pub fn sandwich(&self, a: &CMat) -> CMat {
        self.apply_right(&self.apply_left(a))
    }
}
