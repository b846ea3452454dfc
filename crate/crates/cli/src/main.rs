//! `epr`: command-line front end for exceptional-point response analysis.
//!
//! Every subcommand prints a JSON document on stdout. Floats are written in
//! shortest round-trip form, so parsing the output recovers the library values
//! bit for bit.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ep_response::document::{parse_complex, parse_inline_vector, MatrixDocument, VectorDocument};
use ep_response::ensemble::{emit, run_ensemble, EnsembleConfig, HistogramData, OutputFormat};
use ep_response::ep::{
    build_ep_system, estimate_eigenvalue, passivity_report, pseudospectral_radius, EpSystem,
    DEFAULT_NIL_TOL, DEFAULT_PSD_TOL,
};
use ep_response::linalg::{ComplexScalar, ComplexVector};
use ep_response::models::{build_model, ModelArgs};
use ep_response::response::{
    dynamics_crossover_time, evolve, excite, log_grid, perturb, resonant_omega,
    splitting_scaling_probe,
};
use ep_response::Error;
use serde_json::{json, Value};

const TOL_ENV: &str = "EPR_DEFAULT_TOL";

#[derive(Parser)]
#[command(
    name = "epr",
    version,
    about = "Response strengths of non-Hermitian Hamiltonians at exceptional points"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verify an EP and report its response strengths and passivity.
    Analyze(AnalyzeOpts),
    /// Perturb a system and compare eigenvalue splittings with the bound.
    Perturb(PerturbOpts),
    /// Drive a system harmonically and report the steady-state intensity.
    Excite(ExciteOpts),
    /// Propagate an initial state and compare its growth with the bound.
    Evolve(EvolveOpts),
    /// Write a model Hamiltonian as a matrix document.
    Model(ModelOpts),
    /// Run a random-matrix ensemble and write its histogram.
    Ensemble(EnsembleOpts),
}

#[derive(Args)]
struct SystemOpts {
    /// Matrix document holding H0.
    matrix: PathBuf,
    /// EP eigenvalue as `re,im`; defaults to the document value, then trace/n.
    #[arg(long, value_name = "RE,IM", allow_hyphen_values = true)]
    eep: Option<String>,
    /// EP order; defaults to the document value, then n.
    #[arg(long)]
    order: Option<usize>,
    /// Nilpotency tolerance; defaults to $EPR_DEFAULT_TOL, then 1e-8.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct AnalyzeOpts {
    #[command(flatten)]
    system: SystemOpts,
    /// Relative perturbation sizes for pseudospectral radii.
    #[arg(long = "eps-tilde", value_delimiter = ',')]
    eps_tilde: Vec<f64>,
}

#[derive(Args)]
struct PerturbOpts {
    #[command(flatten)]
    system: SystemOpts,
    /// Matrix document holding H1.
    h1: PathBuf,
    /// Perturbation strength.
    #[arg(long)]
    eps: f64,
    /// Also fit the splitting exponent on a log grid reaching down from `eps`.
    #[arg(long)]
    grid: bool,
    #[arg(long, default_value_t = 6.0)]
    grid_decades: f64,
    #[arg(long, default_value_t = 13)]
    grid_points: usize,
}

#[derive(Args)]
struct ExciteOpts {
    #[command(flatten)]
    system: SystemOpts,
    /// Drive profile as comma-separated `re,im` pairs.
    #[arg(
        long,
        allow_hyphen_values = true,
        conflicts_with = "p_file",
        required_unless_present = "p_file"
    )]
    p: Option<String>,
    /// Drive profile as a vector document.
    #[arg(long)]
    p_file: Option<PathBuf>,
    /// Drive frequency; defaults to resonance with Re E_EP.
    #[arg(long, allow_hyphen_values = true)]
    omega: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    power: f64,
    #[arg(long, default_value_t = 1.0)]
    hbar: f64,
}

#[derive(Args)]
struct EvolveOpts {
    #[command(flatten)]
    system: SystemOpts,
    /// Initial state as comma-separated `re,im` pairs.
    #[arg(
        long,
        allow_hyphen_values = true,
        conflicts_with = "psi0_file",
        required_unless_present = "psi0_file"
    )]
    psi0: Option<String>,
    /// Initial state as a vector document.
    #[arg(long)]
    psi0_file: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    time: f64,
    #[arg(long, default_value_t = 1.0)]
    hbar: f64,
}

#[derive(Args)]
struct ModelOpts {
    /// asymmetric_backscattering, pt_dimer, pt_trimer, hatano_nelson or random_ep.
    name: String,
    #[arg(long, value_name = "RE,IM", allow_hyphen_values = true)]
    e0: Option<String>,
    #[arg(long, value_name = "RE,IM", allow_hyphen_values = true)]
    a0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    omega0: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    g: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_name = "RE,IM", allow_hyphen_values = true)]
    eep: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EnsembleOpts {
    /// Ensemble configuration (JSON).
    config: PathBuf,
    /// Histogram file; `.json` selects JSON, anything else CSV.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    realizations: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
}

fn default_tol() -> Result<f64, Error> {
    match std::env::var(TOL_ENV) {
        Ok(text) => match text.trim().parse::<f64>() {
            Ok(t) if t > 0.0 && t.is_finite() => Ok(t),
            _ => Err(Error::InvalidInput(format!(
                "{TOL_ENV}={text} is not a positive number"
            ))),
        },
        Err(_) => Ok(DEFAULT_NIL_TOL),
    }
}

struct Loaded {
    system: EpSystem,
    estimated: bool,
}

fn load_system(opts: &SystemOpts) -> Result<Loaded, Error> {
    let doc = MatrixDocument::load(&opts.matrix)?;
    let h0 = doc.matrix()?;
    let tol = match opts.tol {
        Some(t) => t,
        None => default_tol()?,
    };
    let (eep, estimated) = match (&opts.eep, doc.eigenvalue()) {
        (Some(text), _) => (parse_complex(text)?, false),
        (None, Some(e)) => (e, false),
        (None, None) => (estimate_eigenvalue(&h0)?, true),
    };
    let order = opts.order.or(doc.order).unwrap_or(doc.n);
    let system = build_ep_system(&h0, eep, order, tol)?;
    Ok(Loaded { system, estimated })
}

fn load_vector(inline: Option<&str>, file: Option<&Path>) -> Result<ComplexVector, Error> {
    match (inline, file) {
        (Some(text), _) => parse_inline_vector(text),
        (None, Some(path)) => VectorDocument::load(path),
        (None, None) => Err(Error::InvalidInput("no vector given".into())),
    }
}

fn analyze(opts: &AnalyzeOpts) -> Result<Value, Error> {
    let Loaded { system, estimated } = load_system(&opts.system)?;
    let passivity = passivity_report(&system, DEFAULT_PSD_TOL)?;
    let radii = opts
        .eps_tilde
        .iter()
        .map(|&e| Ok(json!({ "eps_tilde": e, "radius": pseudospectral_radius(system.xi(), e, system.order())? })))
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(json!({
        "format_version": 1,
        "n": system.h0().rows(),
        "order": system.order(),
        "eigenvalue_ep": system.eigenvalue_ep(),
        "eigenvalue_estimated": estimated,
        "certificate": system.certificate(),
        "xi": system.xi(),
        "zeta": system.zeta(),
        "gamma_eigenvalues": passivity.gamma_eigenvalues,
        "passivity": passivity,
        "pseudospectral_radii": radii,
    }))
}

fn perturbation(opts: &PerturbOpts) -> Result<Value, Error> {
    let Loaded { system, .. } = load_system(&opts.system)?;
    let h1 = MatrixDocument::load(&opts.h1)?.matrix()?;
    let report = perturb(&system, &h1, opts.eps)?;
    let delta_norms: Vec<f64> = report.deltas.iter().map(ComplexVector::norm).collect();
    let mut out = json!({ "format_version": 1, "xi": system.xi(), "zeta": system.zeta() });
    out["report"] = serde_json::to_value(&report)?;
    out["delta_norms"] = json!(delta_norms);
    if opts.grid {
        let lo = opts.eps * 10f64.powf(-opts.grid_decades);
        let fit = splitting_scaling_probe(&system, &h1, &log_grid(opts.eps, lo, opts.grid_points))?;
        out["fit"] = serde_json::to_value(&fit)?;
    }
    Ok(out)
}

fn excitation(opts: &ExciteOpts) -> Result<Value, Error> {
    let Loaded { system, .. } = load_system(&opts.system)?;
    let p = load_vector(opts.p.as_deref(), opts.p_file.as_deref())?;
    let omega = opts
        .omega
        .unwrap_or_else(|| resonant_omega(&system, opts.hbar));
    let report = excite(&system, &p, omega, opts.power, opts.hbar)?;
    Ok(json!({ "format_version": 1, "xi": system.xi(), "report": report }))
}

fn dynamics(opts: &EvolveOpts) -> Result<Value, Error> {
    let Loaded { system, .. } = load_system(&opts.system)?;
    let psi0 = load_vector(opts.psi0.as_deref(), opts.psi0_file.as_deref())?;
    let report = evolve(&system, &psi0, opts.time, opts.hbar)?;
    Ok(json!({
        "format_version": 1,
        "xi": system.xi(),
        "crossover_time": dynamics_crossover_time(&system, opts.hbar),
        "report": report,
    }))
}

fn complex_flag(text: &Option<String>) -> Result<Option<ComplexScalar>, Error> {
    text.as_deref().map(parse_complex).transpose()
}

fn model(opts: &ModelOpts) -> Result<Option<Value>, Error> {
    let args = ModelArgs {
        e0: complex_flag(&opts.e0)?,
        a0: complex_flag(&opts.a0)?,
        omega0: opts.omega0,
        alpha: opts.alpha,
        g: opts.g,
        n: opts.n,
        eigenvalue_ep: complex_flag(&opts.eep)?,
        seed: opts.seed,
    };
    let doc = MatrixDocument::from_model(&build_model(&opts.name, &args)?)?;
    match &opts.out {
        Some(path) => {
            doc.save(path)?;
            Ok(None)
        }
        None => Ok(Some(serde_json::to_value(&doc)?)),
    }
}

fn ensemble_summary(hist: &HistogramData, out: &Path) -> Value {
    json!({
        "format_version": 1,
        "study": hist.config.study.as_str(),
        "output": out,
        "count_total": hist.count_total,
        "count_accepted": hist.count_accepted,
        "count_rejected": hist.count_rejected,
        "count_failed": hist.count_failed,
        "count_unbinned": hist.count_unbinned,
        "acceptance_rate": hist.acceptance_rate,
        "failure_fraction": hist.failure_fraction,
        "summary": hist.summary,
        "correlation": hist.correlation,
    })
}

fn ensemble(opts: &EnsembleOpts) -> Result<Value, Error> {
    let mut cfg = EnsembleConfig::load(&opts.config)?;
    if let Some(w) = opts.workers {
        cfg.workers = w;
    }
    if let Some(r) = opts.realizations {
        cfg.realizations = r;
    }
    if let Some(s) = opts.seed {
        cfg.seed = s;
    }
    if cfg.tol.is_none() && std::env::var_os(TOL_ENV).is_some() {
        cfg.tol = Some(default_tol()?);
    }
    cfg.validate()?;
    let hist = run_ensemble(&cfg)?;
    emit(&hist, &opts.out, OutputFormat::from_path(&opts.out))?;
    Ok(ensemble_summary(&hist, &opts.out))
}

fn run(cli: &Cli) -> Result<Option<Value>, Error> {
    match &cli.command {
        Command::Analyze(o) => analyze(o).map(Some),
        Command::Perturb(o) => perturbation(o).map(Some),
        Command::Excite(o) => excitation(o).map(Some),
        Command::Evolve(o) => dynamics(o).map(Some),
        Command::Model(o) => model(o),
        Command::Ensemble(o) => ensemble(o).map(Some),
    }
}

/// 2 for domain rejections, 1 for everything else.
fn exit_code(err: &Error) -> u8 {
    match err {
        Error::NotAnEp(_) | Error::DiabolicPoint | Error::NoSteadyState { .. } => 2,
        _ => 1,
    }
}

fn print_json(value: &Value) {
    let text = serde_json::to_string_pretty(value).expect("serializable report");
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(Some(value)) => {
            print_json(&value);
            ExitCode::SUCCESS
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("epr: {err}");
            if let Error::NotAnEp(cert) = &err {
                print_json(&json!({ "format_version": 1, "certificate": cert }));
            }
            ExitCode::from(exit_code(&err))
        }
    }
}
