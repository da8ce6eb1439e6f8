//! Bounds, the outer hierarchy (Gaussian-symmetric extensions) and the inner
//! hierarchy (identity-shrunk extendible states).

use num_rational::Ratio;
use serde::Serialize;

use crate::clifford::{check_modes, majorana, DenseOperator};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::lambda::{build_lambda_kl, check_parties, null_space};
use crate::linalg;
use crate::pauli::PauliString;
use crate::sdp::{self, Constraint, SdpOptions, SdpProblem, SdpResult, Status};
use crate::{CMat, C64};

/// Largest mode count for which the exact factorial arithmetic is supported.
pub const MAX_BOUND_MODES: usize = 8;

fn factorial(k: u64) -> u128 {
    (1..=k as u128).product()
}

/// `(2m)! / m!`.
pub fn pairing_count(m: usize) -> u128 {
    factorial(2 * m as u64) / factorial(m as u64)
}

/// `||Lambda||_1 = 2 (m + 1) C(2m, m + 1)`.
pub fn lambda_trace_norm(m: usize) -> u64 {
    2 * (m as u64 + 1) * linalg::binomial(2 * m as u64, m as u64 + 1)
}

/// Whether `epsilon(n)` saturates at 2, i.e. `n <= (5 ||Lambda||_1^2 4^m)^3`.
pub fn epsilon_saturated(m: usize, n: u64) -> bool {
    let l = lambda_trace_norm(m) as u128;
    let base = l
        .checked_mul(l)
        .and_then(|x| x.checked_mul(5))
        .and_then(|x| x.checked_mul(1u128 << (2 * m)));
    match base
        .and_then(|b| b.checked_mul(b))
        .and_then(|b2| b2.checked_mul(base.unwrap_or(0)))
    {
        Some(cube) => (n as u128) <= cube,
        None => true,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundSet {
    pub m: usize,
    pub n: u64,
    pub lambda_norm: f64,
    pub gamma: f64,
    pub delta_definetti: f64,
    pub epsilon: f64,
    pub epsilon_saturated: bool,
    pub chi: f64,
    pub delta: f64,
    pub prop1_epsilon: f64,
    /// `1 - delta` as an exact fraction when `epsilon = 2`.
    pub one_minus_delta_exact: Option<String>,
    pub nu: f64,
}

pub fn bounds(m: usize, n: u64) -> Result<BoundSet> {
    if m == 0 || m > MAX_BOUND_MODES {
        return Err(Error::ModeRange {
            m,
            max: MAX_BOUND_MODES,
        });
    }
    if n == 0 {
        return Err(Error::Domain("hierarchy level n must be at least 1".into()));
    }
    let l = lambda_trace_norm(m) as f64;
    let nf = n as f64;
    let four_m = (1u64 << (2 * m)) as f64;
    let saturated = epsilon_saturated(m, n);
    let epsilon = if saturated {
        2.0
    } else {
        (10.0 * l * l * four_m / nf.cbrt()).min(2.0)
    };
    let pc = pairing_count(m);
    let chi = epsilon / 2.0 * pc as f64;
    let exact = saturated.then(|| Ratio::new(1u128, 1 + pc));
    Ok(BoundSet {
        m,
        n,
        lambda_norm: l,
        gamma: 4.0 * (1u64 << m) as f64 / nf,
        delta_definetti: l * l * 4.0 * (1u64 << m) as f64 / nf,
        epsilon,
        epsilon_saturated: saturated,
        chi,
        delta: chi / (1.0 + chi),
        prop1_epsilon: 1.0 / (1.0 + pc as f64),
        one_minus_delta_exact: exact.map(|r| r.to_string()),
        nu: nf.powf(-2.0 / 3.0),
    })
}

/// `1 - delta(n)` as an exact fraction when `epsilon(n) = 2`.
pub fn one_minus_delta_exact(m: usize, n: u64) -> Option<Ratio<u128>> {
    ((1..=MAX_BOUND_MODES).contains(&m) && epsilon_saturated(m, n))
        .then(|| Ratio::new(1u128, 1 + pairing_count(m)))
}

/// `1 / (1 + (2m)!/m!)` exactly.
pub fn prop1_epsilon_exact(m: usize) -> Ratio<u128> {
    Ratio::new(1u128, 1 + pairing_count(m))
}

/// All perfect pairings of `{1, ..., 2m}`, each as `m` ordered pairs.
pub fn perfect_pairings(m: usize) -> Vec<Vec<(usize, usize)>> {
    fn rec(rest: &[usize], acc: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        if rest.is_empty() {
            out.push(acc.clone());
            return;
        }
        let a = rest[0];
        for k in 1..rest.len() {
            let b = rest[k];
            let remaining: Vec<usize> = rest[1..]
                .iter()
                .copied()
                .filter(|&x| x != b)
                .collect();
            acc.push((a, b));
            rec(&remaining, acc, out);
            acc.pop();
        }
    }
    let items: Vec<usize> = (1..=2 * m).collect();
    let mut out = Vec::new();
    rec(&items, &mut Vec::new(), &mut out);
    out
}

/// The `(2m)!/m!` states `2^{-m} prod_j (I + i beta_j c_{pi(2j-1)} c_{pi(2j)})`.
pub fn gaussian_overcomplete_basis(m: usize) -> Result<Vec<DenseOperator>> {
    check_modes(m)?;
    if m > 4 {
        return Err(Error::DimensionGuard(format!(
            "over-complete basis limited to m <= 4, got {m}"
        )));
    }
    let d = 1usize << m;
    let mut out = Vec::new();
    for pairing in perfect_pairings(m) {
        let pair_ops: Vec<PauliString> = pairing
            .iter()
            .map(|&(a, b)| (majorana(a, m) * majorana(b, m)).times_i_pow(1))
            .collect();
        for signs in 0..(1u32 << m) {
            let mut rho = CMat::identity(d, d).scale(1.0 / d as f64);
            for (j, q) in pair_ops.iter().enumerate() {
                let beta = if signs & (1 << j) != 0 { -1.0 } else { 1.0 };
                let mut next = rho.clone();
                q.add_apply_right(C64::new(beta, 0.0), &rho, &mut next);
                rho = next;
            }
            out.push(DenseOperator::from_parts(m, rho));
        }
    }
    Ok(out)
}

/// Rank of the expansion-coefficient matrix of a list of even operators.
pub fn expansion_rank(states: &[DenseOperator]) -> Result<usize> {
    if states.is_empty() {
        return Ok(0);
    }
    let rows = states
        .iter()
        .map(|s| {
            let e = crate::clifford::expand_even(s)?;
            let mut row = vec![e.alpha0];
            for mask in crate::clifford::even_subsets(s.modes()) {
                row.push(e.coefficient(&crate::clifford::mask_to_indices(mask)));
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    let a = crate::RMat::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j]);
    let (gram, _) = linalg::symmetric_eigen(&(a.transpose() * &a));
    let top = gram.iter().fold(0.0f64, |x, &y| x.max(y));
    Ok(gram.iter().filter(|&&w| w > 1e-12 * top).count())
}

/// `eps rho + (1 - eps) I / 2^m`.
pub fn mix_with_identity(rho: &DenseOperator, eps: f64) -> Result<DenseOperator> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::Domain(format!("mixing weight {eps} outside [0, 1]")));
    }
    let mixed = DenseOperator::maximally_mixed(rho.modes());
    Ok(&rho.scale(eps) + &mixed.scale(1.0 - eps))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Program {
    Outer,
    Inner,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VerdictStatus {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct DetectOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Restrict outer extensions to `supp(rho)^{(x)n}` up front.
    pub facial_reduction: bool,
    /// Replace `delta(n)` in the inner program (experimental, no guarantee).
    pub delta_override: Option<f64>,
    #[serde(skip)]
    pub exec: Execution,
}

impl Default for DetectOptions {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            max_iter: 20_000,
            facial_reduction: true,
            delta_override: None,
            exec: Execution::Auto,
        }
    }
}

/// Independent re-verification of an outer witness.
#[derive(Clone, Debug, Serialize)]
pub struct OuterCertificate {
    pub min_eigenvalue: f64,
    pub trace_error: f64,
    /// Frobenius norm of `Tr_{2..n} Y - rho`.
    pub marginal_error: f64,
    /// `max_{k<l} ||Lambda^{k,l} Y||_F`.
    pub lambda_violation: f64,
    pub verified: bool,
}

/// Reconstruction of `rho` from an inner solution `Z`.
#[derive(Clone, Debug, Serialize)]
pub struct InnerCertificate {
    /// `1 - Tr Z`.
    pub delta: f64,
    pub delta_min: f64,
    pub min_eigenvalue: f64,
    /// `||(1 - delta) sigma + delta I / 2^m - rho||_1`.
    pub reconstruction_error: f64,
    pub lambda_violation: f64,
    pub verified: bool,
    /// Marginal `sigma` of the normalized extension (absent when `delta = 1`).
    #[serde(skip)]
    pub sigma: Option<DenseOperator>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub program: Program,
    pub n: usize,
    pub status: VerdictStatus,
    pub residual: f64,
    pub iterations: usize,
    pub support_rank: usize,
    pub interpretation: String,
    pub message: Option<String>,
    pub outer_certificate: Option<OuterCertificate>,
    pub inner_certificate: Option<InnerCertificate>,
    #[serde(skip)]
    pub witness: Option<CMat>,
    #[serde(skip)]
    pub sdp: Option<SdpResult>,
}

fn interpretation(program: Program, status: VerdictStatus, n: usize) -> String {
    match (program, status) {
        (Program::Outer, VerdictStatus::Pass) => {
            format!("rho has a {n}-Gaussian-symmetric extension")
        }
        (Program::Outer, VerdictStatus::Fail) => {
            format!("no {n}-Gaussian-symmetric extension: rho is not convex-Gaussian")
        }
        (Program::Inner, VerdictStatus::Pass) => {
            format!("rho is an identity-shrunk {n}-extendible state: rho is convex-Gaussian")
        }
        (Program::Inner, VerdictStatus::Fail) => {
            format!("inner level {n} not satisfied; this is not evidence of non-membership")
        }
        (_, VerdictStatus::Inconclusive) => "solver did not reach a decision".to_string(),
    }
}

fn validate_input(rho: &DenseOperator, n: usize) -> Result<()> {
    rho.validate_even_density(1e-8)?;
    check_parties(rho.modes(), n)
}

fn max_lambda_violation(y: &CMat, m: usize, n: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for k in 1..=n {
        for l in k + 1..=n {
            let lam = build_lambda_kl(m, n, k, l)?;
            worst = worst.max(linalg::frobenius(&lam.apply_left(y)));
        }
    }
    Ok(worst)
}

fn support_projector(rho: &DenseOperator) -> CMat {
    let (w, v) = linalg::hermitian_eigen(rho.matrix());
    let keep: Vec<usize> = (0..w.len()).filter(|&i| w[i] > 1e-10).collect();
    let basis = CMat::from_fn(v.nrows(), keep.len(), |r, c| v[(r, keep[c])]);
    linalg::projector_from_basis(&basis)
}

/// Basis of `V cap supp(rho)^{(x)n}`.
fn reduce_support(v: &CMat, rho: &DenseOperator, n: usize) -> CMat {
    let m = rho.modes();
    let d = 1usize << m;
    let q = support_projector(rho);
    let mut w = v.clone();
    for p in 0..n {
        w = linalg::apply_on_party(&w, &q, p, n, d);
    }
    let overlap = linalg::hermitian_part(&(v.adjoint() * w));
    let (vals, vecs) = linalg::hermitian_eigen(&overlap);
    let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] >= 1.0 - 1e-8).collect();
    let sel = CMat::from_fn(vecs.nrows(), keep.len(), |r, c| vecs[(r, keep[c])]);
    linalg::orthonormalize_columns(&(v * sel), 1e-8)
}

fn sdp_options(tol: f64, max_iter: usize) -> SdpOptions {
    SdpOptions {
        tol,
        max_iter,
        ..SdpOptions::default()
    }
}

fn map_status(s: Status) -> VerdictStatus {
    match s {
        Status::Feasible => VerdictStatus::Pass,
        Status::Infeasible => VerdictStatus::Fail,
        Status::Inconclusive => VerdictStatus::Inconclusive,
    }
}

/// Is there an `n`-Gaussian-symmetric extension of `rho`?
pub fn detect_outer(rho: &DenseOperator, n: usize, opts: &DetectOptions) -> Result<Verdict> {
    validate_input(rho, n)?;
    let m = rho.modes();
    let d = 1usize << m;
    let mut v = null_space(m, n)?.basis;
    if opts.facial_reduction && rho.min_eigenvalue() <= 1e-10 {
        v = reduce_support(&v, rho, n);
    }
    let support_rank = v.ncols();
    let problem = SdpProblem::new(d.pow(n as u32))
        .with_support(v)
        .with_constraint(Constraint::PartialTrace {
            kept_dim: d,
            target: rho.matrix().clone(),
            trace_shift: false,
        })
        .with_trace_window(1.0, 1.0)
        .with_options(sdp_options(opts.tol, opts.max_iter));
    let res = sdp::solve_feasibility(&problem)?;
    let mut status = map_status(res.status);
    let mut message = res.message.clone();
    let mut cert = None;
    if let Some(y) = &res.witness {
        let marginal = linalg::partial_trace_keep_first(y, d, d.pow(n as u32 - 1));
        let c = OuterCertificate {
            min_eigenvalue: linalg::min_eigenvalue(y),
            trace_error: (y.trace().re - 1.0).abs(),
            marginal_error: linalg::frobenius(&(marginal - rho.matrix())),
            lambda_violation: max_lambda_violation(y, m, n)?,
            verified: false,
        };
        let slack = opts.tol + 1e-12;
        let verified = c.min_eigenvalue >= -slack
            && c.trace_error <= slack
            && c.marginal_error <= slack
            && c.lambda_violation <= 1e-8;
        if !verified {
            status = VerdictStatus::Inconclusive;
            message = Some("witness failed independent re-verification".into());
        }
        cert = Some(OuterCertificate { verified, ..c });
    }
    Ok(Verdict {
        program: Program::Outer,
        n,
        status,
        residual: res.residual,
        iterations: res.iterations,
        support_rank,
        interpretation: interpretation(Program::Outer, status, n),
        message,
        outer_certificate: cert,
        inner_certificate: None,
        witness: res.witness.clone(),
        sdp: Some(res),
    })
}

/// Is `rho = (1 - delta) sigma + delta I/2^m` for an `n`-extendible `sigma`
/// and some `delta >= delta(n)`?
pub fn detect_inner(rho: &DenseOperator, n: usize, opts: &DetectOptions) -> Result<Verdict> {
    validate_input(rho, n)?;
    let m = rho.modes();
    let d = 1usize << m;
    let delta_min = match opts.delta_override {
        Some(x) if (0.0..=1.0).contains(&x) => x,
        Some(x) => return Err(Error::Domain(format!("delta override {x} outside [0, 1]"))),
        None => bounds(m, n as u64)?.delta,
    };
    let v = null_space(m, n)?.basis;
    let support_rank = v.ncols();
    let target = rho.matrix() - CMat::identity(d, d).scale(1.0 / d as f64);
    // Frobenius tolerance small enough that the trace-norm error stays below tol
    let sdp_tol = opts.tol / (d as f64).sqrt();
    let problem = SdpProblem::new(d.pow(n as u32))
        .with_support(v)
        .with_constraint(Constraint::PartialTrace {
            kept_dim: d,
            target,
            trace_shift: true,
        })
        .with_trace_window(0.0, 1.0 - delta_min)
        .with_options(sdp_options(sdp_tol, opts.max_iter));
    let res = sdp::solve_feasibility(&problem)?;
    let mut status = map_status(res.status);
    let mut message = res.message.clone();
    let mut cert = None;
    if let Some(z) = &res.witness {
        let tr = z.trace().re;
        let delta = 1.0 - tr;
        let marginal = linalg::partial_trace_keep_first(z, d, d.pow(n as u32 - 1));
        let rebuilt = &marginal + CMat::identity(d, d).scale(delta / d as f64);
        let reconstruction_error = linalg::trace_norm(&(rebuilt - rho.matrix()));
        let sigma = (tr > 1e-12).then(|| DenseOperator::from_parts(m, marginal.scale(1.0 / tr)));
        let min_eigenvalue = linalg::min_eigenvalue(z);
        let lambda_violation = max_lambda_violation(z, m, n)?;
        let verified = reconstruction_error <= opts.tol
            && min_eigenvalue >= -opts.tol
            && delta >= delta_min - opts.tol
            && lambda_violation <= 1e-8;
        if !verified {
            status = VerdictStatus::Inconclusive;
            message = Some("certificate failed independent re-verification".into());
        }
        cert = Some(InnerCertificate {
            delta,
            delta_min,
            min_eigenvalue,
            reconstruction_error,
            lambda_violation,
            verified,
            sigma,
        });
    }
    Ok(Verdict {
        program: Program::Inner,
        n,
        status,
        residual: res.residual,
        iterations: res.iterations,
        support_rank,
        interpretation: interpretation(Program::Inner, status, n),
        message,
        outer_certificate: None,
        inner_certificate: cert,
        witness: res.witness.clone(),
        sdp: Some(res),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Conclusion {
    ConvexGaussian,
    NotConvexGaussian,
    Undecided,
}

#[derive(Clone, Debug, Serialize)]
pub struct HierarchyReport {
    pub conclusion: Conclusion,
    /// Level at which the conclusion was reached.
    pub decided_at: Option<usize>,
    pub verdicts: Vec<Verdict>,
}

/// Run both programs for `n = 1, ..., n_max`, stopping on an outer fail or an
/// inner pass.
pub fn hierarchy_run(rho: &DenseOperator, n_max: usize, opts: &DetectOptions) -> Result<HierarchyReport> {
    if n_max == 0 {
        return Err(Error::Domain("n_max must be at least 1".into()));
    }
    validate_input(rho, n_max)?;
    let mut verdicts = Vec::new();
    for n in 1..=n_max {
        let (outer, inner) = exec::join(
            opts.exec,
            || detect_outer(rho, n, opts),
            || detect_inner(rho, n, opts),
        );
        let (outer, inner) = (outer?, inner?);
        let outer_fail = outer.status == VerdictStatus::Fail;
        let inner_pass = inner.status == VerdictStatus::Pass;
        verdicts.push(outer);
        verdicts.push(inner);
        if outer_fail {
            return Ok(HierarchyReport {
                conclusion: Conclusion::NotConvexGaussian,
                decided_at: Some(n),
                verdicts,
            });
        }
        if inner_pass {
            return Ok(HierarchyReport {
                conclusion: Conclusion::ConvexGaussian,
                decided_at: Some(n),
                verdicts,
            });
        }
    }
    Ok(HierarchyReport {
        conclusion: Conclusion::Undecided,
        decided_at: None,
        verdicts,
    })
}
