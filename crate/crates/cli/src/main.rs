use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use fermigauss::clifford::DenseOperator;
use fermigauss::criteria::{
    bounds, detect_inner, detect_outer, hierarchy_run, mix_with_identity, Conclusion,
    DetectOptions, VerdictStatus,
};
use fermigauss::exec::Execution;
use fermigauss::gaussian::{
    ghz_state, random_convex_gaussian, random_even_state, random_pure_gaussian,
};
use fermigauss::io::{read_state, state_to_json, write_spec, write_state, StateFormat};
use fermigauss::iso::{
    iso_forward_dense, iso_generator, iso_inverse_dense, marginal_via_iso, null_condition_norms,
    tensor_partial_trace,
};
use fermigauss::lambda::{
    build_lambda_kl, flo_twirl_mc, invariant_span_distance, nearest_gaussian,
    projector_identity_check,
};
use fermigauss::{linalg, CMat, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "fermigauss", version, about = "Convex-Gaussian state detection for fermionic systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a test state file.
    Gen(GenArgs),
    /// Search for an n-Gaussian-symmetric extension (outer hierarchy).
    DetectOuter(DetectArgs),
    /// Search for an identity-shrunk n-extendible decomposition (inner hierarchy).
    DetectInner(DetectArgs),
    /// Run both hierarchies for n = 1..n-max with early exit.
    Hierarchy(HierarchyArgs),
    /// Print the bound set for (m, n).
    Bounds {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: u64,
    },
    /// Monte Carlo checks of the FLO twirl identities.
    TwirlCheck {
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 5000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Checks of the isomorphism between the big and the tensor-product algebra.
    IsoCheck {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        /// Number of random operators in the null-condition corpus.
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Pure Gaussian state sharing the input's canonical basis.
    NearestGaussian {
        #[arg(long = "in")]
        input: PathBuf,
        /// Write the Gaussian spec of the result here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Kind {
    PureGaussian,
    ConvexGaussian,
    MixedIdentity,
    Ghz,
    RandomEven,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Alpha,
    Dense,
}

#[derive(Args)]
struct GenArgs {
    kind: Kind,
    #[arg(long)]
    m: usize,
    /// Number of components (convex-gaussian) or rank (random-even).
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Weight of the base state in mixed-identity.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Base state for mixed-identity; a random pure Gaussian when absent.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Dense)]
    format: Format,
    /// Output file; the state JSON goes to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct SolverArgs {
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
    #[arg(long, default_value_t = 20_000)]
    max_iter: usize,
    /// Disable restriction of outer extensions to the support of the input.
    #[arg(long)]
    no_facial_reduction: bool,
    /// Replace delta(n) in the inner program. Experimental, not part of the criterion.
    #[arg(long)]
    delta_override: Option<f64>,
    /// Recorded in the report; the solvers are deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SolverArgs {
    fn options(&self) -> DetectOptions {
        DetectOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            facial_reduction: !self.no_facial_reduction,
            delta_override: self.delta_override,
            exec: Execution::Auto,
        }
    }
}

#[derive(Args)]
struct DetectArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct HierarchyArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    n_max: usize,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Serialize)]
struct RunReport {
    command: Vec<String>,
    seed: Option<u64>,
    config: Value,
    values: Value,
    timings: BTreeMap<String, f64>,
    version: String,
}

struct Outcome {
    seed: Option<u64>,
    config: Value,
    values: Value,
    exit: u8,
}

fn status_code(s: VerdictStatus) -> u8 {
    match s {
        VerdictStatus::Pass => 0,
        VerdictStatus::Fail => 1,
        VerdictStatus::Inconclusive => 2,
    }
}

fn state_format(f: Format) -> StateFormat {
    match f {
        Format::Alpha => StateFormat::Alpha,
        Format::Dense => StateFormat::Dense,
    }
}

fn gen(args: &GenArgs) -> Result<Option<Outcome>> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let m = args.m;
    let rho = match args.kind {
        Kind::PureGaussian => random_pure_gaussian(m, &mut rng)?,
        Kind::ConvexGaussian => random_convex_gaussian(m, args.k, &mut rng)?,
        Kind::RandomEven => random_even_state(m, args.k, &mut rng)?,
        Kind::Ghz => ghz_state(m)?,
        Kind::MixedIdentity => {
            let eps = args.epsilon.context("mixed-identity needs --epsilon")?;
            let base = match &args.input {
                Some(path) => read_state(path)?,
                None => random_pure_gaussian(m, &mut rng)?,
            };
            if base.modes() != m {
                bail!("base state has {} modes, --m is {m}", base.modes());
            }
            mix_with_identity(&base, eps)?
        }
    };
    rho.validate_even_density(1e-8)?;
    let format = state_format(args.format);
    let Some(out) = &args.out else {
        emit(&state_to_json(&rho, format)?);
        return Ok(None);
    };
    write_state(out, &rho, format)?;
    Ok(Some(Outcome {
        seed: Some(args.seed),
        config: json!({ "kind": args.kind, "m": m, "k": args.k, "epsilon": args.epsilon,
            "format": args.format }),
        values: json!({ "path": out, "min_eigenvalue": rho.min_eigenvalue() }),
        exit: 0,
    }))
}

fn detect(args: &DetectArgs, inner: bool) -> Result<Outcome> {
    let rho = read_state(&args.input)?;
    let opts = args.solver.options();
    let verdict = if inner {
        detect_inner(&rho, args.n, &opts)?
    } else {
        detect_outer(&rho, args.n, &opts)?
    };
    Ok(Outcome {
        seed: Some(args.solver.seed),
        config: json!({ "m": rho.modes(), "n": args.n, "solver": args.solver,
            "delta_override_experimental": args.solver.delta_override.is_some() }),
        exit: status_code(verdict.status),
        values: serde_json::to_value(&verdict)?,
    })
}

fn hierarchy(args: &HierarchyArgs) -> Result<Outcome> {
    let rho = read_state(&args.input)?;
    let report = hierarchy_run(&rho, args.n_max, &args.solver.options())?;
    let exit = match report.conclusion {
        Conclusion::ConvexGaussian => 0,
        Conclusion::NotConvexGaussian => 1,
        Conclusion::Undecided => 2,
    };
    Ok(Outcome {
        seed: Some(args.solver.seed),
        config: json!({ "m": rho.modes(), "n_max": args.n_max, "solver": args.solver }),
        values: serde_json::to_value(&report)?,
        exit,
    })
}

fn twirl_check(m: usize, samples: usize, seed: u64) -> Result<Outcome> {
    let deviation = projector_identity_check(m, samples, seed, Execution::Auto)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = 1usize << (2 * m);
    let x = CMat::from_fn(d, d, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let h = linalg::hermitian_part(&x);
    let h = DenseOperator::new(2 * m, h.scale(1.0 / linalg::frobenius(&h)))?;
    let before = invariant_span_distance(&h)?;
    let twirled = flo_twirl_mc(&h, samples, seed.wrapping_add(1), Execution::Auto)?;
    let after = invariant_span_distance(&twirled)?;
    let span_limit = 5.0 / (samples as f64).sqrt();
    let passed = deviation < 0.15 && after < span_limit;
    Ok(Outcome {
        seed: Some(seed),
        config: json!({ "m": m, "samples": samples }),
        values: json!({
            "projector_identity_deviation": deviation,
            "span_distance_before": before,
            "span_distance_after": after,
            "span_limit": span_limit,
            "passed": passed,
        }),
        exit: if passed { 0 } else { 1 },
    })
}

fn kernel_projector(m: usize, n: usize, k: usize, l: usize) -> Result<CMat> {
    let lam = build_lambda_kl(m, n, k, l)?.to_dense();
    let (w, v) = linalg::hermitian_eigen(lam.matrix());
    let keep: Vec<usize> = (0..w.len()).filter(|&i| w[i].abs() < 1e-9).collect();
    let b = CMat::from_fn(v.nrows(), keep.len(), |r, c| v[(r, keep[c])]);
    Ok(linalg::projector_from_basis(&b))
}

fn iso_check(m: usize, n: usize, samples: usize, seed: u64) -> Result<Outcome> {
    if n < 2 || m * n > 8 {
        bail!("iso-check needs n >= 2 and m * n <= 8, got m={m} n={n}");
    }
    let gens: Vec<CMat> = (1..=2 * m * n).map(|g| iso_generator(g, m, n).to_dense()).collect();
    let d = gens[0].nrows();
    let mut anticommutators_exact = true;
    for (a, ga) in gens.iter().enumerate() {
        for (b, gb) in gens.iter().enumerate().skip(a) {
            let want = if a == b { CMat::identity(d, d).scale(2.0) } else { CMat::zeros(d, d) };
            anticommutators_exact &= ga * gb + gb * ga == want;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let projector = kernel_projector(m, n, 1, n)?;
    let (mut agree, mut nulls) = (0usize, 0usize);
    for i in 0..samples {
        let x = CMat::from_fn(d, d, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let y = if i % 2 == 0 { &projector * x } else { x };
        let mu = iso_inverse_dense(&DenseOperator::new(m * n, y)?, m, n)?;
        let (g, lj) = null_condition_norms(&mu, m, n, 1, n)?;
        agree += ((g < 1e-9) == (lj < 1e-9)) as usize;
        nulls += (g < 1e-9) as usize;
    }

    let mu = random_even_state(m * n, 3, &mut rng)?;
    let got = marginal_via_iso(&mu, m, n)?;
    let want = tensor_partial_trace(&iso_forward_dense(&mu, m, n)?, m, n)?;
    let marginal_error = linalg::max_abs(&(got.matrix() - want.matrix()));

    let passed = anticommutators_exact && agree == samples && marginal_error < 1e-9;
    Ok(Outcome {
        seed: Some(seed),
        config: json!({ "m": m, "n": n, "samples": samples, "pair": [1, n] }),
        values: json!({
            "anticommutators_exact": anticommutators_exact,
            "null_agreement": agree,
            "null_operators": nulls,
            "marginal_error": marginal_error,
            "passed": passed,
        }),
        exit: if passed { 0 } else { 1 },
    })
}

fn nearest(input: &PathBuf, out: Option<&PathBuf>) -> Result<Outcome> {
    let tau = read_state(input)?;
    let ng = nearest_gaussian(&tau)?;
    if let Some(path) = out {
        write_spec(path, &ng.spec)?;
    }
    Ok(Outcome {
        seed: None,
        config: json!({ "m": tau.modes() }),
        values: serde_json::to_value(&ng)?,
        exit: 0,
    })
}

fn run(cli: &Cli) -> Result<Option<Outcome>> {
    Ok(Some(match &cli.command {
        Command::Gen(args) => return gen(args),
        Command::DetectOuter(args) => detect(args, false)?,
        Command::DetectInner(args) => detect(args, true)?,
        Command::Hierarchy(args) => hierarchy(args)?,
        Command::Bounds { m, n } => Outcome {
            seed: None,
            config: json!({ "m": m, "n": n }),
            values: serde_json::to_value(bounds(*m, *n)?)?,
            exit: 0,
        },
        Command::TwirlCheck { m, samples, seed } => twirl_check(*m, *samples, *seed)?,
        Command::IsoCheck { m, n, samples, seed } => iso_check(*m, *n, *samples, *seed)?,
        Command::NearestGaussian { input, out } => nearest(input, out.as_ref())?,
    }))
}

/// Print to stdout, tolerating a closed pipe.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{text}");
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("FERMIGAUSS_THREADS") {
        let threads: usize = v.parse().with_context(|| format!("FERMIGAUSS_THREADS={v}"))?;
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let result = configure_threads().and_then(|_| run(&cli));
    match result {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(outcome)) => {
            let report = RunReport {
                command: std::env::args().collect(),
                seed: outcome.seed,
                config: outcome.config,
                values: outcome.values,
                timings: BTreeMap::from([("total_seconds".to_string(), start.elapsed().as_secs_f64())]),
                version: env!("CARGO_PKG_VERSION").to_string(),
            };
            match serde_json::to_string_pretty(&report) {
                Ok(text) => emit(&text),
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            }
            ExitCode::from(outcome.exit)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
