//! Detection of convex-Gaussian fermionic states.
//!
//! The crate works with even density operators on `m` fermionic modes (`2m`
//! Majorana generators), represented as dense `2^m x 2^m` complex matrices in
//! the Jordan-Wigner basis `|n_1 ... n_m>` with `n_1` the most significant bit.
//!
//! Module map:
//!
//! * [`clifford`]: Majorana generators, correlator expansions, parity, trace norm.
//! * [`gaussian`]: correlation matrices, standard form, FLO unitaries, Pfaffians.
//! * [`lambda`]: the two-copy operator `sum_j c_j (x) c_j`, purity residuals,
//!   dephasing, FLO twirl and the Gaussian-symmetric subspace.
//! * [`iso`]: the isomorphism between `C_{2mn}` and `C_{2m}^{(x)n}`.
//! * [`sdp`]: a small alternating-projection PSD feasibility engine.
//! * [`criteria`]: bounds, the outer and inner extension hierarchies.
//! * [`io`]: JSON state and Gaussian-spec files.

pub mod clifford;
pub mod criteria;
pub mod error;
pub mod exec;
pub mod gaussian;
pub mod io;
pub mod iso;
pub mod lambda;
pub mod linalg;
pub mod pauli;
pub mod sdp;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = nalgebra::Complex<f64>;
/// Dense complex matrix.
pub type CMat = nalgebra::DMatrix<C64>;
/// Dense real matrix.
pub type RMat = nalgebra::DMatrix<f64>;
