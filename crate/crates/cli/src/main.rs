//! `qeic`: command-line front end for the entropy-inequality prover and the
//! numerical experiments.
//!
//! Results go to standard output (or `--out`) as key-sorted JSON; a short
//! human-readable summary goes to standard error. Exit codes: 0 success,
//! 1 a mathematical "no" (not derivable, invalid certificate, theorem
//! violation), 2 usage or input errors.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use qeic_core::cones::{cone_from_selector, Cone};
use qeic_core::entropy::{compile_str, parse_relation, ExactVector, LinearFunctional};
use qeic_core::experiments::{
    ray_approach_probe, run_theorem1_trial_suite, search_conjecture_min, ConjectureParams, Family, ProbeConfig,
    ReplaySpec, SearchConfig, TrialConfig,
};
use qeic_core::polyhedra::{
    classify_orbits_under, enumerate_extreme_rays_with, rays_to_json, DdOptions, InsertionOrder, Symmetry,
};
use qeic_core::prover::{prove_implication, verify_certificate, Certificate, Verdict};
use qeic_core::quantum::{entropy_vector, state_from_json, DensityMatrix};

/// Largest total Hilbert-space dimension accepted unless `QEIC_MAX_DIM` says otherwise.
const DEFAULT_MAX_DIM: usize = 4096;

const RAY_I: [i64; 15] = [3, 3, 2, 2, 4, 3, 3, 3, 3, 4, 4, 4, 3, 3, 2];
const RAY_II: [i64; 15] = [3, 3, 3, 3, 4, 4, 4, 4, 4, 6, 5, 5, 5, 5, 2];

#[derive(Parser)]
#[command(name = "qeic", version, about = "Exact prover and numerical laboratory for quantum entropy inequalities")]
struct Cli {
    /// Write the JSON result here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the inequalities of a cone such as vn4 (Σ_4) or sh3 (Γ_3).
    Cone(ConeArgs),
    /// Enumerate the extreme rays of a cone.
    Rays(RaysArgs),
    /// Decide whether a target inequality follows from the cone and constraints.
    Prove(ProveArgs),
    /// Entropy vector of a state given as JSON, with optional evaluations.
    EntropyVector(EntropyArgs),
    /// Check I(C;D) ≥ I(C;AB) on constructed states meeting the three constraints.
    VerifyThm1(VerifyArgs),
    /// Minimize the penalized conjecture functional.
    Search(SearchArgs),
    /// Find states whose entropy vectors point close to a given ray.
    ProbeRay(ProbeArgs),
    /// Check a certificate produced by `prove`.
    VerifyCert(VerifyCertArgs),
}

#[derive(Args)]
struct ConeArgs {
    #[arg(long)]
    cone: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderArg {
    Given,
    MostSaturated,
}

#[derive(Clone, Copy, ValueEnum)]
enum SymmetryArg {
    /// Permutations of the n parties.
    Parties,
    /// Permutations of the parties together with a purifying party.
    Purifier,
}

#[derive(Args)]
struct RaysArgs {
    #[arg(long)]
    cone: String,
    /// Group rays into symmetry classes.
    #[arg(long)]
    classify: bool,
    #[arg(long, value_enum, default_value = "purifier")]
    symmetry: SymmetryArg,
    #[arg(long, value_enum, default_value = "most-saturated")]
    order: OrderArg,
    /// Abort once the intermediate ray count exceeds this.
    #[arg(long, default_value_t = 200_000)]
    max_rays: usize,
}

#[derive(Args)]
struct ProveArgs {
    #[arg(long)]
    cone: String,
    /// Equality constraint such as "I(A;C|B)=0"; repeatable.
    #[arg(long = "constraint")]
    constraints: Vec<String>,
    /// Inequality such as "S(A|C) >= 0"; a bare expression means "≥ 0".
    #[arg(long)]
    target: String,
}

#[derive(Args)]
struct EntropyArgs {
    /// State specification file; "-" reads standard input.
    #[arg(long)]
    state: PathBuf,
    /// Information expression to evaluate on the vector; repeatable.
    #[arg(long = "evaluate")]
    evaluate: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Remark1,
    Equality,
    Prop2,
    General,
    Control1,
    Control2,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Family {
        match f {
            FamilyArg::Remark1 => Family::Remark1,
            FamilyArg::Equality => Family::Equality,
            FamilyArg::Prop2 => Family::Prop2,
            FamilyArg::General => Family::General,
            FamilyArg::Control1 => Family::Control1,
            FamilyArg::Control2 => Family::Control2,
        }
    }
}

#[derive(Args)]
struct Parallel {
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value = "remark1")]
    family: FamilyArg,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Tolerance on the tested difference, in bits.
    #[arg(long, default_value_t = qeic_core::experiments::DEFAULT_TOL)]
    tol: f64,
    /// Tolerance on each constraint, in bits.
    #[arg(long, default_value_t = qeic_core::experiments::DEFAULT_CONSTRAINT_TOL)]
    constraint_tol: f64,
    /// Local dimensions are drawn from 2..=max-dim.
    #[arg(long, default_value_t = 3)]
    max_dim: usize,
    #[command(flatten)]
    parallel: Parallel,
}

#[derive(Args)]
struct SearchArgs {
    /// Comma-separated positive κ1,κ2,κ3.
    #[arg(long, default_value = "1,1,1")]
    kappa: String,
    /// Comma-separated local dimensions of A,B,C,D.
    #[arg(long, default_value = "2,2,2,2")]
    dims: String,
    #[arg(long, default_value_t = 200)]
    restarts: usize,
    /// Objective evaluations per restart.
    #[arg(long, default_value_t = 300)]
    evals: usize,
    #[arg(long, value_enum, default_value = "general")]
    family: FamilyArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    parallel: Parallel,
}

#[derive(Args)]
struct ProbeArgs {
    /// "I", "II", or a comma-separated card-lex vector on four parties.
    #[arg(long)]
    ray: String,
    #[arg(long, default_value = "2,2,2,2")]
    dims: String,
    /// Environment dimension of the optimized pure states.
    #[arg(long, default_value_t = 4)]
    ancilla: usize,
    #[arg(long, default_value_t = 20)]
    restarts: usize,
    #[arg(long, default_value_t = 400)]
    evals: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    parallel: Parallel,
}

#[derive(Args)]
struct VerifyCertArgs {
    #[arg(long)]
    cone: String,
    /// Certificate JSON, bare or as written by `prove`.
    #[arg(long)]
    certificate: PathBuf,
    #[arg(long = "constraint")]
    constraints: Vec<String>,
    #[arg(long)]
    target: String,
}

/// A failure to run; always exit code 2.
struct UsageError(String);

impl<E: std::fmt::Display> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.to_string())
    }
}

type Outcome = Result<(Value, bool), UsageError>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli.command).and_then(|(value, ok)| {
        emit(&value, cli.out.as_deref())?;
        Ok(ok)
    }) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn emit(value: &Value, out: Option<&Path>) -> Result<(), UsageError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| UsageError(format!("{}: {e}", path.display()))),
        None => match std::io::stdout().lock().write_all(text.as_bytes()) {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
            _ => Ok(()),
        },
    }
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Cone(a) => cone(a),
        Command::Rays(a) => rays(a),
        Command::Prove(a) => prove(a),
        Command::EntropyVector(a) => entropy(a),
        Command::VerifyThm1(a) => verify_thm1(a),
        Command::Search(a) => search(a),
        Command::ProbeRay(a) => probe(a),
        Command::VerifyCert(a) => verify_cert(a),
    }
}

fn max_dim() -> Result<usize, UsageError> {
    match std::env::var("QEIC_MAX_DIM") {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| UsageError(format!("QEIC_MAX_DIM must be a positive integer, got '{s}'"))),
        Err(_) => Ok(DEFAULT_MAX_DIM),
    }
}

fn check_dim(dims: &[usize]) -> Result<(), UsageError> {
    let cap = max_dim()?;
    let total = dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d));
    match total {
        Some(t) if t <= cap => Ok(()),
        _ => Err(UsageError(format!(
            "dimensions {dims:?} exceed QEIC_MAX_DIM = {cap}"
        ))),
    }
}

fn set_jobs(p: &Parallel) -> Result<(), UsageError> {
    if let Some(n) = p.jobs {
        if n == 0 {
            return Err(UsageError("--jobs must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>, UsageError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| UsageError(format!("bad {what} entry '{}'", s.trim())))
        })
        .collect()
}

fn parse_dims(text: &str) -> Result<[usize; 4], UsageError> {
    let v: Vec<usize> = parse_list(text, "dimension")?;
    let dims: [usize; 4] = v
        .try_into()
        .map_err(|_| UsageError("--dims needs four entries".into()))?;
    if dims.contains(&0) {
        return Err(UsageError("dimensions must be positive".into()));
    }
    check_dim(&dims)?;
    Ok(dims)
}

fn read_json(path: &Path) -> Result<Value, UsageError> {
    let text = if path.as_os_str() == "-" {
        std::io::read_to_string(std::io::stdin())?
    } else {
        std::fs::read_to_string(path).map_err(|e| UsageError(format!("{}: {e}", path.display())))?
    };
    Ok(serde_json::from_str(&text)?)
}

fn constraints_and_target(
    cone: &Cone,
    constraints: &[String],
    target: &str,
) -> Result<(Vec<LinearFunctional>, LinearFunctional), UsageError> {
    let n = cone.n();
    let cs = constraints
        .iter()
        .map(|c| {
            let r = parse_relation(c, n)?;
            if !r.is_equality() {
                return Err(UsageError(format!("constraint '{c}' must be an equality")));
            }
            Ok(r.functional().with_tag(c.clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let t = match parse_relation(target, n) {
        Ok(r) if r.is_equality() => {
            return Err(UsageError(format!("target '{target}' must be an inequality")))
        }
        Ok(r) => r.functional(),
        Err(relation_err) => compile_str(target, n).map_err(|_| relation_err)?,
    };
    Ok((cs, t.with_tag(target)))
}

fn cone(a: ConeArgs) -> Outcome {
    let cone = cone_from_selector(&a.cone)?;
    eprintln!("{}: {} inequalities on {} coordinates", cone.selector(), cone.len(), (1usize << cone.n()) - 1);
    let mut v = cone.to_json();
    v["selector"] = json!(cone.selector());
    v["count"] = json!(cone.len());
    Ok((v, true))
}

fn rays(a: RaysArgs) -> Outcome {
    let cone = cone_from_selector(&a.cone)?;
    let opts = DdOptions {
        max_rays: a.max_rays,
        order: match a.order {
            OrderArg::Given => InsertionOrder::Given,
            OrderArg::MostSaturated => InsertionOrder::MostSaturated,
        },
        ..DdOptions::default()
    };
    let rays = enumerate_extreme_rays_with(&cone, &opts)?;
    let symmetry = match a.symmetry {
        SymmetryArg::Parties => Symmetry::Parties,
        SymmetryArg::Purifier => Symmetry::WithPurifier,
    };
    let classes = a.classify.then(|| classify_orbits_under(&rays, cone.n(), symmetry));
    let mut v = rays_to_json(&rays, classes.as_deref());
    v["cone"] = json!(cone.selector());
    v["count"] = json!(rays.len());
    match &classes {
        Some(cs) => {
            v["symmetry"] = json!(match a.symmetry {
                SymmetryArg::Parties => "parties",
                SymmetryArg::Purifier => "parties+purifier",
            });
            eprintln!("{}: {} extreme rays in {} classes", cone.selector(), rays.len(), cs.len());
        }
        None => eprintln!("{}: {} extreme rays", cone.selector(), rays.len()),
    }
    Ok((v, true))
}

fn prove(a: ProveArgs) -> Outcome {
    let cone = cone_from_selector(&a.cone)?;
    let (constraints, target) = constraints_and_target(&cone, &a.constraints, &a.target)?;
    let verdict = prove_implication(&cone, &constraints, &target)?;
    let mut v = verdict.to_json();
    v["cone"] = json!(cone.selector());
    v["constraints"] = json!(a.constraints);
    v["target"] = json!(a.target);
    v["units"] = json!("bits");
    match &verdict {
        Verdict::Derivable(c) => eprintln!(
            "derivable: {} cone inequalities, {} constraint multipliers",
            c.lambda.len(),
            c.mu.len()
        ),
        Verdict::NotDerivable(r) => eprintln!(
            "not derivable: counter-ray {:?} gives {}",
            r.vector.card_lex().iter().map(|x| x.to_string()).collect::<Vec<_>>(),
            r.value
        ),
    }
    Ok((v, verdict.is_derivable()))
}

fn load_state(v: &Value) -> Result<DensityMatrix, UsageError> {
    let rho = if v.get("kind").and_then(Value::as_str) == Some("family") {
        let spec = ReplaySpec::from_json(v)?;
        check_dim(&spec.dims)?;
        spec.build()?
    } else {
        state_from_json(v)?
    };
    check_dim(rho.dims())?;
    Ok(rho)
}

fn entropy(a: EntropyArgs) -> Outcome {
    let rho = load_state(&read_json(&a.state)?)?;
    let n = rho.parties();
    if n > 12 {
        return Err(UsageError(format!("{n} parties is too many for an entropy vector")));
    }
    let v = entropy_vector(&rho)?;
    let mut evaluations = serde_json::Map::new();
    for text in &a.evaluate {
        let value = compile_str(text, n)?.evaluate(&v)?;
        eprintln!("{text} = {value:.12}");
        evaluations.insert(text.clone(), json!(value));
    }
    Ok((
        json!({
            "dims": rho.dims(),
            "entropy_vector": v.to_json(),
            "evaluations": evaluations,
            "units": "bits",
        }),
        true,
    ))
}

fn verify_thm1(a: VerifyArgs) -> Outcome {
    set_jobs(&a.parallel)?;
    if a.max_dim < 2 {
        return Err(UsageError("--max-dim must be at least 2".into()));
    }
    check_dim(&[a.max_dim; 4])?;
    let cfg = TrialConfig {
        family: a.family.into(),
        trials: a.trials,
        seed: a.seed,
        tol: a.tol,
        constraint_tol: a.constraint_tol,
        max_dim: a.max_dim,
    };
    let report = run_theorem1_trial_suite(&cfg)?;
    let fmt = |x: Option<f64>| x.map_or("n/a".to_string(), |x| format!("{x:.3e}"));
    eprintln!(
        "{}: {} of {} trials evaluated; I(C;D) - I(C;AB) in [{}, {}], mean {}; {} violations, {} excluded",
        cfg.family.name(),
        report.evaluated,
        report.trials,
        fmt(report.min),
        fmt(report.max),
        fmt(report.mean),
        report.violations.len(),
        report.excluded.len()
    );
    Ok((report.to_json(), report.theorem_holds()))
}

fn search(a: SearchArgs) -> Outcome {
    set_jobs(&a.parallel)?;
    let kappa: [f64; 3] = parse_list::<f64>(&a.kappa, "κ")?
        .try_into()
        .map_err(|_| UsageError("--kappa needs three entries".into()))?;
    let params = ConjectureParams::new(kappa)?;
    let mut cfg = SearchConfig::new(params, parse_dims(&a.dims)?, a.restarts, a.seed);
    cfg.family = a.family.into();
    cfg.evals_per_restart = a.evals;
    let report = search_conjecture_min(&cfg)?;
    eprintln!(
        "minimum {:.6e} over {} restarts ({} negative, {} below -{:.0e}, {} hit the evaluation budget)",
        report.min(),
        cfg.restarts,
        report.negatives.len(),
        report.candidates().count(),
        qeic_core::experiments::CANDIDATE_TOL,
        report.unconverged
    );
    Ok((report.to_json(), true))
}

fn probe(a: ProbeArgs) -> Outcome {
    set_jobs(&a.parallel)?;
    let target = match a.ray.trim() {
        "I" => ExactVector::from_integers(4, &RAY_I)?,
        "II" => ExactVector::from_integers(4, &RAY_II)?,
        other => ExactVector::from_integers(4, &parse_list::<i64>(other, "ray")?)?,
    };
    let dims = parse_dims(&a.dims)?;
    if a.ancilla == 0 {
        return Err(UsageError("--ancilla must be positive".into()));
    }
    check_dim(&[dims[0], dims[1], dims[2], dims[3], a.ancilla])?;
    let mut cfg = ProbeConfig::new(target.to_f64(), dims, a.restarts, a.seed);
    cfg.ancilla = a.ancilla;
    cfg.evals_per_restart = a.evals;
    let report = ray_approach_probe(&cfg)?;
    eprintln!(
        "best distance {:.6e} (angle {:.6e} rad); best library state {:.6e}",
        report.best_distance,
        report.best_angle(),
        report.library_best
    );
    let mut v = report.to_json();
    v["ray"] = json!(a.ray);
    Ok((v, true))
}

fn verify_cert(a: VerifyCertArgs) -> Outcome {
    let cone = cone_from_selector(&a.cone)?;
    let (constraints, target) = constraints_and_target(&cone, &a.constraints, &a.target)?;
    let raw = read_json(&a.certificate)?;
    let cert_json = raw.get("certificate").unwrap_or(&raw);
    let cert = Certificate::from_json(cert_json)?;
    let check = verify_certificate(&cert, &cone, &constraints, &target);
    eprintln!("certificate {}", if check.valid { "valid" } else { "INVALID" });
    let mut v = check.to_json();
    v["cone"] = json!(cone.selector());
    Ok((v, check.valid))
}
