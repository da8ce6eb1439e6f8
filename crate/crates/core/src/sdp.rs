//! Small PSD feasibility engine based on alternating projections.
//!
//! Find `Y = V X V^dag` with `X >= 0`, `t_lo <= Tr X <= t_hi` and a set of
//! linear equality constraints, where `V` is an optional orthonormal support
//! basis. All work happens in the compressed coordinates `X` (`r x r`), which
//! are vectorized with an orthonormal real basis of the Hermitian matrices.

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::{CMat, RMat, C64};

/// Orthonormal real coordinates for `r x r` Hermitian matrices: the diagonal,
/// then `sqrt 2 Re X_ij` and `sqrt 2 Im X_ij` for `i < j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HermitianBasis {
    pub r: usize,
}

impl HermitianBasis {
    pub fn new(r: usize) -> Self {
        Self { r }
    }

    pub fn len(&self) -> usize {
        self.r * self.r
    }

    pub fn is_empty(&self) -> bool {
        self.r == 0
    }

    pub fn vec(&self, x: &CMat) -> DVector<f64> {
        let r = self.r;
        let s = std::f64::consts::SQRT_2;
        let mut out = DVector::zeros(r * r);
        for i in 0..r {
            out[i] = x[(i, i)].re;
        }
        let mut k = r;
        for i in 0..r {
            for j in i + 1..r {
                let z = (x[(i, j)] + x[(j, i)].conj()) * 0.5;
                out[k] = s * z.re;
                out[k + 1] = s * z.im;
                k += 2;
            }
        }
        out
    }

    pub fn unvec(&self, v: &DVector<f64>) -> CMat {
        let r = self.r;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut out = CMat::zeros(r, r);
        for i in 0..r {
            out[(i, i)] = C64::new(v[i], 0.0);
        }
        let mut k = r;
        for i in 0..r {
            for j in i + 1..r {
                let z = C64::new(v[k] * s, v[k + 1] * s);
                out[(i, j)] = z;
                out[(j, i)] = z.conj();
                k += 2;
            }
        }
        out
    }
}

/// A linear constraint on the full-space operator `Y`.
#[derive(Clone, Debug)]
pub enum Constraint {
    /// `Tr(A Y) = b` for Hermitian `A`.
    Linear { a: CMat, b: f64 },
    /// `Tr Y = target`.
    Trace { target: f64 },
    /// `Tr_rest(Y) - s Tr(Y) I / kept_dim = target`, where the kept factor is
    /// the leading tensor factor of dimension `kept_dim` and `s` is 1 when
    /// `trace_shift` is set, 0 otherwise.
    PartialTrace {
        kept_dim: usize,
        target: CMat,
        trace_shift: bool,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct SdpOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Iterations over which the residual must be stable before declaring a gap.
    pub window: usize,
    /// Relative residual change below which the sequence counts as stable.
    pub stable_change: f64,
    pub min_iter: usize,
    pub polish: bool,
    /// Emit a diagnostics line every this many iterations (0 disables).
    pub diagnostics_every: usize,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            max_iter: 20_000,
            window: 50,
            stable_change: 1e-3,
            min_iter: 200,
            polish: true,
            diagnostics_every: 100,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SdpProblem {
    pub dim: usize,
    /// `dim x r` orthonormal support basis; `None` means the whole space.
    pub support: Option<CMat>,
    pub constraints: Vec<Constraint>,
    pub trace_window: (f64, f64),
    pub options: SdpOptions,
}

impl SdpProblem {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            support: None,
            constraints: Vec::new(),
            trace_window: (0.0, f64::INFINITY),
            options: SdpOptions::default(),
        }
    }

    pub fn with_support(mut self, basis: CMat) -> Self {
        self.support = Some(basis);
        self
    }

    pub fn with_constraint(mut self, c: Constraint) -> Self {
        self.constraints.push(c);
        self
    }

    pub fn with_trace_window(mut self, lo: f64, hi: f64) -> Self {
        self.trace_window = (lo, hi);
        self
    }

    pub fn with_options(mut self, options: SdpOptions) -> Self {
        self.options = options;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Feasible,
    Infeasible,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct SdpResult {
    pub status: Status,
    /// Full-space witness `V X V^dag` when feasible.
    #[serde(skip)]
    pub witness: Option<CMat>,
    /// Compressed iterate `X` at termination.
    #[serde(skip)]
    pub compressed: CMat,
    /// Distance between the PSD iterate and the affine set.
    pub residual: f64,
    /// `||A x - b||` of the returned iterate.
    pub affine_error: f64,
    pub min_eigenvalue: f64,
    pub trace: f64,
    pub iterations: usize,
    pub polished: bool,
    pub message: Option<String>,
    #[serde(skip)]
    pub residual_history: Vec<f64>,
    #[serde(skip)]
    pub diagnostics: Vec<String>,
}

/// Compressed linear system `A x = b` over the Hermitian coordinates of `X`.
#[derive(Clone, Debug)]
pub struct AffineSystem {
    pub basis: HermitianBasis,
    pub a: RMat,
    pub b: DVector<f64>,
    /// Orthonormal basis of the row space of `a`.
    row_space: RMat,
    /// Minimum-norm solution `a^+ b`.
    x0: DVector<f64>,
    /// `||a x0 - b||`: zero for consistent systems.
    pub inconsistency: f64,
}

impl AffineSystem {
    pub fn new(a: RMat, b: DVector<f64>, basis: HermitianBasis) -> Self {
        let cols = a.ncols();
        if a.nrows() == 0 || cols == 0 {
            let inconsistency = b.norm();
            return Self {
                basis,
                a,
                b,
                row_space: RMat::zeros(cols, 0),
                x0: DVector::zeros(cols),
                inconsistency,
            };
        }
        // nalgebra's SVD is unreliable on rank-deficient inputs, so the row
        // space comes from the smaller Gram matrix instead.
        let wide = a.nrows() < cols;
        let gram = if wide { &a * a.transpose() } else { a.transpose() * &a };
        let (vals, vecs) = linalg::symmetric_eigen(&gram);
        let lmax = vals.iter().fold(0.0f64, |m, &l| m.max(l));
        let keep: Vec<usize> = (0..vals.len())
            .filter(|&i| vals[i] > 1e-14 * lmax.max(1e-300))
            .collect();
        let picked = RMat::from_fn(vecs.nrows(), keep.len(), |r, c| vecs[(r, keep[c])]);
        let row_space = if wide {
            let mut w = a.transpose() * picked;
            for (c, &i) in keep.iter().enumerate() {
                w.column_mut(c).scale_mut(1.0 / vals[i].sqrt());
            }
            w
        } else {
            picked
        };
        let image = &a * &row_space;
        let solve = |rhs: &DVector<f64>| -> DVector<f64> {
            let mut x = DVector::zeros(cols);
            for (c, &i) in keep.iter().enumerate() {
                x += row_space.column(c) * (image.column(c).dot(rhs) / vals[i]);
            }
            x
        };
        let mut x0 = solve(&b);
        let correction = solve(&(&b - &a * &x0));
        x0 += correction;
        let inconsistency = (&a * &x0 - &b).norm();
        Self {
            basis,
            a,
            b,
            row_space,
            x0,
            inconsistency,
        }
    }

    pub fn project(&self, z: &DVector<f64>) -> DVector<f64> {
        let coeffs = self.row_space.transpose() * z;
        z - &self.row_space * coeffs + &self.x0
    }

    pub fn error(&self, x: &DVector<f64>) -> f64 {
        if self.a.nrows() == 0 {
            0.0
        } else {
            (&self.a * x - &self.b).norm()
        }
    }
}

/// Euclidean projection of a Hermitian `X` onto `{X >= 0, lo <= Tr X <= hi}`.
pub fn project_psd(x: &CMat, window: (f64, f64)) -> CMat {
    let (w, v) = linalg::hermitian_eigen(x);
    let vals: Vec<f64> = w.iter().copied().collect();
    let shift = trace_shift(&vals, window);
    let mut out = CMat::zeros(x.nrows(), x.ncols());
    for (k, &lam) in vals.iter().enumerate() {
        let c = (lam - shift).max(0.0);
        if c > 0.0 {
            let col = v.column(k);
            out += (col * col.adjoint()).scale(c);
        }
    }
    out
}

/// Shift `mu` such that `sum max(w - mu, 0)` lands in `window`.
fn trace_shift(w: &[f64], (lo, hi): (f64, f64)) -> f64 {
    let clipped: f64 = w.iter().map(|&x| x.max(0.0)).sum();
    let target = if clipped > hi {
        hi
    } else if clipped < lo {
        lo
    } else {
        return 0.0;
    };
    let mut sorted = w.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    if target <= 0.0 {
        return sorted.first().copied().unwrap_or(0.0).max(0.0);
    }
    let mut acc = 0.0;
    for k in 0..sorted.len() {
        acc += sorted[k];
        let mu = (acc - target) / (k + 1) as f64;
        let next = sorted.get(k + 1).copied().unwrap_or(f64::NEG_INFINITY);
        if mu >= next && mu < sorted[k] {
            return mu;
        }
    }
    (acc - target) / sorted.len().max(1) as f64
}

/// Euclidean projection onto the affine set of a compressed system.
pub fn project_affine(x: &CMat, sys: &AffineSystem) -> CMat {
    sys.basis.unvec(&sys.project(&sys.basis.vec(x)))
}

fn check_support(p: &SdpProblem) -> Result<CMat> {
    match &p.support {
        None => Ok(CMat::identity(p.dim, p.dim)),
        Some(v) => {
            if v.nrows() != p.dim {
                return Err(Error::Shape(format!(
                    "support basis has {} rows, expected {}",
                    v.nrows(),
                    p.dim
                )));
            }
            let r = v.ncols();
            let dev = linalg::max_abs(&(v.adjoint() * v - CMat::identity(r, r)));
            if dev > 1e-10 {
                return Err(Error::Domain(format!(
                    "support basis not orthonormal: deviation {dev:e}"
                )));
            }
            Ok(v.clone())
        }
    }
}

/// Compress every constraint into rows over the Hermitian coordinates of `X`.
pub fn compress_constraints(p: &SdpProblem, v: &CMat) -> Result<AffineSystem> {
    let r = v.ncols();
    let basis = HermitianBasis::new(r);
    let mut rows: Vec<DVector<f64>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    let id_r = CMat::identity(r, r);
    let s2 = std::f64::consts::SQRT_2;
    for c in &p.constraints {
        match c {
            Constraint::Linear { a, b } => {
                if a.nrows() != p.dim || a.ncols() != p.dim {
                    return Err(Error::Shape("linear constraint operator has wrong size".into()));
                }
                let dev = linalg::hermiticity_deviation(a);
                if dev > 1e-10 * linalg::max_abs(a).max(1.0) {
                    return Err(Error::NotHermitian { deviation: dev });
                }
                rows.push(basis.vec(&(v.adjoint() * a * v)));
                rhs.push(*b);
            }
            Constraint::Trace { target } => {
                rows.push(basis.vec(&id_r));
                rhs.push(*target);
            }
            Constraint::PartialTrace {
                kept_dim,
                target,
                trace_shift,
            } => {
                let d = *kept_dim;
                if d == 0 || !p.dim.is_multiple_of(d) || target.nrows() != d || target.ncols() != d {
                    return Err(Error::Shape(format!(
                        "partial-trace constraint: kept dimension {d} incompatible with {}",
                        p.dim
                    )));
                }
                let rest = p.dim / d;
                let blocks: Vec<CMat> = (0..d).map(|s| v.rows(s * rest, rest).into_owned()).collect();
                let g = |s: usize, t: usize| blocks[s].adjoint() * &blocks[t];
                let shift = if *trace_shift { 1.0 / d as f64 } else { 0.0 };
                for s in 0..d {
                    let mut op = g(s, s);
                    if shift != 0.0 {
                        op -= id_r.scale(shift);
                    }
                    rows.push(basis.vec(&op));
                    rhs.push(target[(s, s)].re);
                }
                for s in 0..d {
                    for t in s + 1..d {
                        let gst = g(s, t);
                        let gts = g(t, s);
                        rows.push(basis.vec(&((&gst + &gts) / C64::new(s2, 0.0))));
                        rhs.push(s2 * target[(s, t)].re);
                        rows.push(basis.vec(&((&gst - &gts) * C64::new(0.0, 1.0 / s2))));
                        rhs.push(s2 * target[(s, t)].im);
                    }
                }
            }
        }
    }
    let a = RMat::from_fn(rows.len(), basis.len(), |i, j| rows[i][j]);
    Ok(AffineSystem::new(a, DVector::from_vec(rhs), basis))
}

struct Polisher<'a> {
    sys: &'a AffineSystem,
    ops: Vec<CMat>,
}

impl<'a> Polisher<'a> {
    fn new(sys: &'a AffineSystem) -> Self {
        let ops = (0..sys.a.nrows())
            .map(|i| sys.basis.unvec(&sys.a.row(i).transpose()))
            .collect();
        Self { sys, ops }
    }

    /// Solve the equalities inside the face spanned by the dominant
    /// eigenvectors of `y`; returns a compressed candidate.
    fn attempt(&self, y: &CMat, window: (f64, f64), tol: f64) -> Option<CMat> {
        let (w, v) = linalg::hermitian_eigen(y);
        let top = w.iter().fold(0.0f64, |a, &b| a.max(b));
        if top <= 0.0 {
            return None;
        }
        for thr in [1e-4, 1e-6, 1e-8] {
            let keep: Vec<usize> = (0..w.len()).filter(|&i| w[i] > thr * top).collect();
            let q = CMat::from_fn(v.nrows(), keep.len(), |r, c| v[(r, keep[c])]);
            let fb = HermitianBasis::new(keep.len());
            let rows: Vec<DVector<f64>> =
                self.ops.iter().map(|a| fb.vec(&(q.adjoint() * a * &q))).collect();
            let af = RMat::from_fn(rows.len(), fb.len(), |i, j| rows[i][j]);
            let sub = AffineSystem::new(af, self.sys.b.clone(), fb);
            if sub.inconsistency > 0.1 * tol {
                continue;
            }
            let s0 = fb.vec(&(q.adjoint() * y * &q));
            let s = fb.unvec(&sub.project(&s0));
            if linalg::min_eigenvalue(&s) < -0.1 * tol {
                continue;
            }
            let x = &q * s * q.adjoint();
            let tr = x.trace().re;
            if tr < window.0 - tol || tr > window.1 + tol {
                continue;
            }
            if self.sys.error(&self.sys.basis.vec(&x)) <= 0.5 * tol {
                return Some(x);
            }
        }
        None
    }
}

/// Alternating projections between the PSD slab and the affine set.
pub fn solve_feasibility(p: &SdpProblem) -> Result<SdpResult> {
    let opts = &p.options;
    if !(opts.tol > 0.0) {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    let (lo, hi) = p.trace_window;
    if lo > hi {
        return Err(Error::Domain(format!("empty trace window [{lo}, {hi}]")));
    }
    let v = check_support(p)?;
    let sys = compress_constraints(p, &v)?;
    let basis = sys.basis;
    let r = basis.r;
    let scale = sys.b.norm().max(1.0);

    let finish = |status: Status,
                  x: CMat,
                  residual: f64,
                  iterations: usize,
                  polished: bool,
                  message: Option<String>,
                  history: Vec<f64>,
                  diagnostics: Vec<String>| {
        let affine_error = sys.error(&basis.vec(&x));
        let min_eigenvalue = if r == 0 { 0.0 } else { linalg::min_eigenvalue(&x) };
        let witness = (status == Status::Feasible).then(|| &v * &x * v.adjoint());
        SdpResult {
            status,
            witness,
            trace: x.trace().re,
            compressed: x,
            residual,
            affine_error,
            min_eigenvalue,
            iterations,
            polished,
            message,
            residual_history: history,
            diagnostics,
        }
    };

    if r == 0 {
        let ok = sys.b.norm() <= opts.tol && lo <= 0.0;
        let status = if ok { Status::Feasible } else { Status::Infeasible };
        let msg = (!ok).then(|| "support subspace is empty".to_string());
        return Ok(finish(
            status,
            CMat::zeros(0, 0),
            sys.b.norm(),
            0,
            false,
            msg,
            Vec::new(),
            Vec::new(),
        ));
    }

    if sys.inconsistency > opts.tol * scale {
        let msg = format!(
            "affine constraints are inconsistent: least-squares residual {:e}",
            sys.inconsistency
        );
        return Ok(finish(
            Status::Infeasible,
            CMat::zeros(r, r),
            sys.inconsistency,
            0,
            false,
            Some(msg),
            Vec::new(),
            Vec::new(),
        ));
    }
    let polisher = opts.polish.then(|| Polisher::new(&sys));
    let mut x = sys.x0.clone();
    let mut history: Vec<f64> = Vec::new();
    let mut diagnostics = Vec::new();
    let mut next_polish = 25usize;
    let mut last_y = CMat::zeros(r, r);

    for it in 1..=opts.max_iter {
        let y = project_psd(&basis.unvec(&x), (lo, hi));
        let yv = basis.vec(&y);
        let xn = sys.project(&yv);
        let residual = (&yv - &xn).norm();
        history.push(residual);
        x = xn;

        if opts.diagnostics_every > 0 && it % opts.diagnostics_every == 0 {
            diagnostics.push(format!(
                "iter={it} residual={residual:.6e} min_eig={:.6e} trace={:.9}",
                linalg::min_eigenvalue(&basis.unvec(&x)),
                y.trace().re
            ));
        }

        let err = sys.error(&yv);
        if residual <= opts.tol && err <= opts.tol {
            return Ok(finish(
                Status::Feasible,
                y,
                residual,
                it,
                false,
                None,
                history,
                diagnostics,
            ));
        }

        if let Some(pol) = &polisher {
            if it == next_polish {
                next_polish *= 2;
                if let Some(w) = pol.attempt(&y, (lo, hi), opts.tol) {
                    let res = sys.error(&basis.vec(&w));
                    return Ok(finish(
                        Status::Feasible,
                        w,
                        res,
                        it,
                        true,
                        None,
                        history,
                        diagnostics,
                    ));
                }
            }
        }

        if it >= opts.min_iter.max(opts.window + 1) && residual >= 10.0 * opts.tol {
            let old = history[it - 1 - opts.window];
            let change = (old - residual).abs() / residual;
            if change < opts.stable_change {
                let msg = format!(
                    "residual stabilized at {residual:.3e} (relative change {change:.1e} over {} iterations)",
                    opts.window
                );
                return Ok(finish(
                    Status::Infeasible,
                    y,
                    residual,
                    it,
                    false,
                    Some(msg),
                    history,
                    diagnostics,
                ));
            }
        }
        last_y = y;
    }
    if let Some(pol) = &polisher {
        if let Some(w) = pol.attempt(&last_y, (lo, hi), opts.tol) {
            let res = sys.error(&basis.vec(&w));
            return Ok(finish(
                Status::Feasible,
                w,
                res,
                opts.max_iter,
                true,
                None,
                history,
                diagnostics,
            ));
        }
    }
    let residual = history.last().copied().unwrap_or(f64::NAN);
    Ok(finish(
        Status::Inconclusive,
        last_y,
        residual,
        opts.max_iter,
        false,
        Some("iteration budget exhausted before convergence or stabilization".into()),
        history,
        diagnostics,
    ))
}
