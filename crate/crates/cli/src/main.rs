use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use frobtor_core::connection::{curvature, curvature_scale};
use frobtor_core::lauricella::{equal_weight_ratio, WeightedSystem};
use frobtor_core::rational::{format_q, format_qvec};
use frobtor_core::sampling::Sampler;
use frobtor_core::suite::{self, format_complex, parse_complex, VerificationReport};
use frobtor_core::{
    build_root_system, BasePoint, Complex64, Error, FiberAlgebra, Family, Multiplicity, PotentialContext,
    RootSystemSpec, RunConfig,
};

const EXIT_USAGE: u8 = 3;

#[derive(Parser)]
#[command(name = "frobtor", version, about = "Verify trigonometric Frobenius structures over root systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full check suite
    Verify(VerifyArgs),
    /// Dump a root datum as exact rational JSON
    Roots(RootsArgs),
    /// Evaluate the potential and its third-derivative tensor at a point
    Potential(PointArgs),
    /// WDVV residual at sampled points
    Wdvv(PointArgs),
    /// Curvature of the structure connection at sampled points
    Curvature(CurvatureArgs),
    /// Weighted hyperplane identities
    Lauricella(LauricellaArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Args)]
struct Output {
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Write to this file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SystemArgs {
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    rank: Option<usize>,
}

impl SystemArgs {
    fn spec(&self) -> Result<RootSystemSpec, Error> {
        let (Some(f), Some(r)) = (&self.family, self.rank) else {
            return Err(Error::Config("--family and --rank are required".into()));
        };
        RootSystemSpec::new(Family::from_str(f)?, r)
    }
}

#[derive(Args)]
struct KappaArgs {
    /// Multiplicity on the orbit of alpha_1, as `re` or `re+imi`
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    k: String,
    /// Multiplicity on the other orbit, as `re` or `re+imi`
    #[arg(long = "k-prime", default_value = "0", allow_hyphen_values = true)]
    k_prime: String,
}

impl KappaArgs {
    fn kappa(&self) -> Result<Multiplicity, Error> {
        Ok(Multiplicity::new(parse_complex(&self.k)?, parse_complex(&self.k_prime)?))
    }
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[command(flatten)]
    kappa: KappaArgs,
    /// Run every desk system with every desk multiplicity
    #[arg(long, conflicts_with_all = ["family", "rank"])]
    all: bool,
    #[arg(long, default_value_t = 8)]
    points: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long = "fd-step", default_value_t = frobtor_core::tolerances::CONNECTION_FD_STEP)]
    fd_step: f64,
    /// Vector triples per point for the algebra checks
    #[arg(long, default_value_t = suite::DEFAULT_TRIPLES)]
    triples: usize,
    /// Override a tolerance, `NAME=VALUE`; repeatable
    #[arg(long = "tol", value_name = "NAME=VALUE")]
    tol: Vec<String>,
    #[arg(long = "metric-scale", default_value_t = 1.0, hide = true)]
    metric_scale: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct RootsArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct PointArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[command(flatten)]
    kappa: KappaArgs,
    #[arg(long, default_value_t = 8)]
    points: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct CurvatureArgs {
    #[command(flatten)]
    point: PointArgs,
    /// Pencil parameter, as `re` or `re+imi`
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    mu: String,
    #[arg(long = "metric-scale", default_value_t = 1.0, hide = true)]
    metric_scale: f64,
}

#[derive(Args)]
struct LauricellaArgs {
    /// Comma-separated positive rationals, e.g. `1,2,3` or `1/2,1,3/4`
    #[arg(long)]
    weights: String,
    #[command(flatten)]
    output: Output,
}

fn parse_tol(items: &[String]) -> Result<BTreeMap<String, f64>, Error> {
    items
        .iter()
        .map(|s| {
            let (k, v) = s
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected NAME=VALUE, got {s:?}")))?;
            let v: f64 = v
                .parse()
                .map_err(|_| Error::Config(format!("bad tolerance value in {s:?}")))?;
            Ok((k.to_string(), v))
        })
        .collect()
}

fn emit(output: &Output, json: &impl Serialize, text: impl FnOnce() -> String) -> Result<(), Error> {
    let body = match output.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(json).expect("serializable");
            s.push('\n');
            s
        }
        Format::Text => text(),
    };
    match &output.out {
        Some(path) => std::fs::write(path, body).map_err(|e| Error::Config(format!("{}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes())
                .map_err(|e| Error::Config(format!("stdout: {e}")))
        }
    }
}

#[derive(Serialize)]
struct MatrixReport {
    schema: u32,
    tool: &'static str,
    version: &'static str,
    runs: Vec<VerificationReport>,
    overall: &'static str,
}

fn verify(args: &VerifyArgs) -> Result<u8, Error> {
    let tol_overrides = parse_tol(&args.tol)?;
    let configure = |spec: RootSystemSpec, kappa: Multiplicity| RunConfig {
        points: args.points,
        seed: args.seed,
        fd_step: args.fd_step,
        triples: args.triples,
        tol_overrides: tol_overrides.clone(),
        metric_scale: args.metric_scale,
        ..RunConfig::new(spec, kappa)
    };
    if !args.all {
        let cfg = configure(args.system.spec()?, args.kappa.kappa()?);
        let report = suite::run_suite(&cfg)?;
        emit(&args.output, &report, || report.to_text())?;
        return Ok(report.exit_code() as u8);
    }
    let runs = suite::desk_matrix()
        .into_iter()
        .map(|(spec, kappa)| suite::run_suite(&configure(spec, kappa)))
        .collect::<Result<Vec<_>, _>>()?;
    let code = runs.iter().map(|r| r.exit_code()).max().unwrap_or(0);
    let code = if runs.iter().any(|r| r.any_failed()) { 1 } else { code };
    let report = MatrixReport {
        schema: suite::SCHEMA,
        tool: suite::TOOL,
        version: frobtor_core::VERSION,
        overall: match code {
            0 => "pass",
            1 => "fail",
            _ => "degenerate",
        },
        runs,
    };
    emit(&args.output, &report, || {
        let mut s: String = report.runs.iter().map(|r| r.to_text()).collect();
        s.push_str(&format!("matrix overall: {}\n", report.overall));
        s
    })?;
    Ok(code as u8)
}

fn roots(args: &RootsArgs) -> Result<u8, Error> {
    let datum = build_root_system(args.system.spec()?);
    let dump = datum.dump();
    emit(&args.output, &dump, || {
        let mut s = format!(
            "{}: rank {}, ambient dim {}, {} positive roots, {} orbit(s)\n",
            dump.system,
            dump.rank,
            dump.ambient_dim,
            dump.positive_roots.len(),
            datum.orbit_count()
        );
        for (r, o) in dump.positive_roots.iter().zip(&dump.orbit_ids) {
            s.push_str(&format!("  ({})  orbit {o}\n", r.join(", ")));
        }
        s
    })?;
    Ok(0)
}

fn algebra(system: &SystemArgs, kappa: &KappaArgs, metric_scale: f64) -> Result<FiberAlgebra, Error> {
    let datum = Arc::new(build_root_system(system.spec()?));
    let kappa = kappa.kappa()?;
    let table = frobtor_core::fiber::metric_scalar(&datum, &kappa);
    FiberAlgebra::with_metric_scalar(datum, kappa, table * metric_scale)
}

fn sample_points(rank: usize, seed: u64, count: usize) -> Vec<BasePoint> {
    (0..count).map(|i| Sampler::new(seed, i as u64).point(rank)).collect()
}

fn point_json(p: &BasePoint) -> serde_json::Value {
    json!({
        "x": p.x.iter().map(|z| format_complex(*z)).collect::<Vec<_>>(),
        "s": format_complex(p.s),
    })
}

fn potential(args: &PointArgs) -> Result<u8, Error> {
    let ctx = PotentialContext::new(algebra(&args.system, &args.kappa, 1.0)?);
    let n = ctx.algebra().rank();
    let mut rows = Vec::new();
    for p in sample_points(n, args.seed, args.points) {
        let phi = ctx.phi_eval(&p)?;
        let t = ctx.third_derivative_tensor(&p)?;
        rows.push(json!({
            "point": point_json(&p),
            "phi": format_complex(phi),
            "third_derivatives": t.iter().map(|z| format_complex(*z)).collect::<Vec<_>>(),
        }));
    }
    let fit = ctx.fit_d_kappa();
    let doc = json!({
        "system": ctx.algebra().datum().spec().to_string(),
        "c_kappa": format_complex(ctx.c_kappa()),
        "cubic_fit": {
            "d_kappa": format_complex(fit.d_kappa),
            "relative_residual": fit.relative_residual,
        },
        "points": rows,
    });
    emit(&args.output, &doc, || {
        let mut s = String::new();
        for r in doc["points"].as_array().unwrap() {
            s.push_str(&format!("phi = {}\n", r["phi"].as_str().unwrap()));
        }
        s
    })?;
    Ok(0)
}

fn wdvv(args: &PointArgs) -> Result<u8, Error> {
    let ctx = PotentialContext::new(algebra(&args.system, &args.kappa, 1.0)?);
    let n = ctx.algebra().rank();
    let tol = frobtor_core::tolerances::WDVV;
    let mut rows = Vec::new();
    let mut code = 0;
    for p in sample_points(n, args.seed, args.points) {
        let r = ctx.wdvv_residual(&p)?;
        match r {
            None => code = code.max(2),
            Some(v) if !(v <= tol) => code = 1,
            _ => {}
        }
        rows.push(json!({ "point": point_json(&p), "residual": r }));
    }
    let doc = json!({
        "system": ctx.algebra().datum().spec().to_string(),
        "tolerance": tol,
        "points": rows,
    });
    emit(&args.output, &doc, || {
        rows.iter()
            .map(|r| format!("wdvv residual {}\n", r["residual"]))
            .collect()
    })?;
    Ok(code)
}

fn curvature_cmd(args: &CurvatureArgs) -> Result<u8, Error> {
    let pa = &args.point;
    let alg = algebra(&pa.system, &pa.kappa, args.metric_scale)?;
    let mu: Complex64 = parse_complex(&args.mu)?;
    let n = alg.rank();
    let tol = frobtor_core::tolerances::CURVATURE;
    let mut rows = Vec::new();
    let mut code = 0;
    for i in 0..pa.points {
        let mut smp = Sampler::new(pa.seed, i as u64);
        let p = smp.point(n);
        let (x, y) = (smp.tangent(n), smp.tangent(n));
        let r = curvature(&alg, &p, mu, &x, &y)?.norm();
        let s = curvature_scale(&alg, &p, mu, &x, &y)?;
        let rel = if r == 0.0 { 0.0 } else { r / s };
        if !(rel <= tol) {
            code = 1;
        }
        rows.push(json!({ "point": point_json(&p), "residual": rel }));
    }
    let doc = json!({
        "system": alg.datum().spec().to_string(),
        "mu": format_complex(mu),
        "metric_scalar": format_complex(alg.metric_scalar()),
        "tolerance": tol,
        "points": rows,
    });
    emit(&pa.output, &doc, || {
        rows.iter()
            .map(|r| format!("curvature residual {}\n", r["residual"]))
            .collect()
    })?;
    Ok(code)
}

fn lauricella(args: &LauricellaArgs) -> Result<u8, Error> {
    let sys = WeightedSystem::parse(&args.weights)?;
    let verdict = sys.symmetry_test();
    let basis = sys.hyperplane_basis();
    let mut commutator_max = frobtor_core::rational::q(0);
    for z in &basis {
        for w in &basis {
            let c = sys.commutator_check(z, w)?;
            if c > commutator_max {
                commutator_max = c;
            }
        }
    }
    let mut cubic_ok = true;
    for z in &basis {
        cubic_ok &= sys.cubic_identity_defect(z)? == frobtor_core::rational::q(0);
    }
    let equal = sys.weights().iter().all(|w| *w == sys.weights()[0]);
    let doc = json!({
        "weights": format_qvec(sys.weights()),
        "mu_total": format_q(sys.mu_total()),
        "symmetric": verdict.symmetric,
        "triples_checked": verdict.triples_checked,
        "witness": verdict.witness.as_ref().map(|w| json!({
            "indices": [w.indices.0, w.indices.1, w.indices.2],
            "lhs": format_q(&w.lhs),
            "rhs": format_q(&w.rhs),
        })),
        "commutator_max": format_q(&commutator_max),
        "cubic_identity": cubic_ok,
        "type_a_ratio": if equal { equal_weight_ratio(&sys).map(|r| format_q(&r)) } else { None },
    });
    emit(&args.output, &doc, || {
        format!(
            "weights {}\nsymmetric: {}\ncommutator max: {}\ncubic identity: {}\n",
            format_qvec(sys.weights()).join(","),
            verdict.symmetric,
            format_q(&commutator_max),
            cubic_ok
        )
    })?;
    let exact = commutator_max == frobtor_core::rational::q(0) && cubic_ok;
    Ok(if exact { 0 } else { 1 })
}

fn configure_threads() -> Result<(), Error> {
    let Ok(v) = std::env::var("FROBTOR_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Config(format!("FROBTOR_THREADS={v:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config(e.to_string()))
}

fn run(cli: &Cli) -> Result<u8, Error> {
    configure_threads()?;
    match &cli.command {
        Command::Verify(a) => verify(a),
        Command::Roots(a) => roots(a),
        Command::Potential(a) => potential(a),
        Command::Wdvv(a) => wdvv(a),
        Command::Curvature(a) => curvature_cmd(a),
        Command::Lauricella(a) => lauricella(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Config(_)
                | Error::InvalidRootSystem { .. }
                | Error::InvalidWeights(_)
                | Error::DimensionMismatch { .. } => EXIT_USAGE,
                _ => 1,
            })
        }
    }
}
