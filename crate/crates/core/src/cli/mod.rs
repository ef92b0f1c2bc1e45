//! Command-line front end.
//!
//! Every command writes its full output into a string before printing, so
//! identical flags and seed give byte-identical stdout. Logs go to stderr.
//! Exit codes: 0 success, 1 a verification check failed, 2 invalid input,
//! 3 a harmonium value hit its numerical precision floor.

mod output;

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{QmargError, Result};
use crate::fock::{natural_occupations, one_rdm, read_state_file, NonVector};
use crate::gpc::{self, PinningOptions, DEFAULT_PIN_TOL};
use crate::harmonium::{self, QuadratureSpec, DEFAULT_BASIS};
use crate::random::{random_hermitian, rng_for, DEFAULT_SEED};
use crate::schubert::{self, BinarySequence};
use crate::selection;

pub use output::{scan_csv, to_json};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_PRECISION_FLOOR: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "qmarg", version, about = "Generalized Pauli constraints, pinning and quasipinning analysis")]
pub struct Cli {
    /// Machine-readable JSON on stdout.
    #[arg(long, global = true)]
    pub json: bool,
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Write stdout output to this file instead.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Natural occupation numbers of a state file.
    Non(NonArgs),
    /// Pinning report against the generalized Pauli constraints.
    Gpc(GpcArgs),
    /// Harmonium occupation numbers and quasipinning scan.
    Harmonium(HarmoniumArgs),
    /// Slater determinants allowed by saturated constraints.
    Selection(SelectionArgs),
    /// Hersch-Zwahlen check on a random Hermitian matrix.
    Hz(HzArgs),
    /// Monte-Carlo test of a bipartite spectral inequality.
    Ineq(IneqArgs),
}

#[derive(Debug, Args)]
pub struct NonArgs {
    pub state: PathBuf,
    /// Also print the natural orbitals.
    #[arg(long)]
    pub orbitals: bool,
}

#[derive(Debug, Args)]
pub struct GpcArgs {
    /// Comma-separated occupation numbers.
    #[arg(long, conflicts_with = "state", required_unless_present = "state", allow_hyphen_values = true)]
    pub non: Option<String>,
    #[arg(long)]
    pub state: Option<PathBuf>,
    /// Setting as N,d (inferred when omitted).
    #[arg(long)]
    pub setting: Option<String>,
    #[arg(long, default_value_t = DEFAULT_PIN_TOL)]
    pub pin_tol: f64,
}

#[derive(Debug, Args)]
pub struct HarmoniumArgs {
    #[arg(long, conflicts_with = "scan", required_unless_present = "scan")]
    pub kappa: Option<f64>,
    /// Grid a:b:count.
    #[arg(long)]
    pub scan: Option<String>,
    #[arg(long, default_value_t = DEFAULT_BASIS)]
    pub basis: usize,
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    /// Gauss-Hermite nodes per axis (default: exactness threshold).
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Write the JSON summary here as well as the CSV on stdout.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SelectionArgs {
    #[arg(long, default_value = "3,6")]
    pub setting: String,
    /// Comma-separated constraint labels, or "none".
    #[arg(long)]
    pub saturated: String,
    /// Optional state for lemma residuals and out-of-support weight.
    #[arg(long)]
    pub state: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_PIN_TOL)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct HzArgs {
    #[arg(long)]
    pub dim: usize,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    /// Single sequence to check (default: all 2^d).
    #[arg(long)]
    pub pi: Option<String>,
}

#[derive(Debug, Args)]
pub struct IneqArgs {
    #[arg(long, default_value_t = 2)]
    pub da: usize,
    #[arg(long, default_value_t = 2)]
    pub db: usize,
    #[arg(long)]
    pub pi: String,
    #[arg(long)]
    pub sigma: String,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
}

/// Rendered stdout plus the exit code.
pub struct Outcome {
    pub stdout: String,
    pub code: i32,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self { stdout, code: EXIT_OK }
    }
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Non(a) => cmd_non(a, cli.json),
        Command::Gpc(a) => cmd_gpc(a, cli.json),
        Command::Harmonium(a) => cmd_harmonium(a, cli.json),
        Command::Selection(a) => cmd_selection(a, cli.json),
        Command::Hz(a) => cmd_hz(a, cli.seed, cli.json),
        Command::Ineq(a) => cmd_ineq(a, cli.seed, cli.json),
    }
}

/// Parses arguments, runs, prints; returns the process exit code.
pub fn main_entry() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    configure_threads();
    match run(&cli).and_then(|out| emit(&cli, &out).map(|_| out.code)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("QMARG_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            log::warn!("could not size thread pool: {e}");
        }
    }
}

fn emit(cli: &Cli, out: &Outcome) -> Result<()> {
    match &cli.output {
        Some(path) => fs::write(path, &out.stdout)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(out.stdout.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

pub fn exit_code_for(e: &QmargError) -> i32 {
    match e {
        QmargError::NoConvergence { .. } => EXIT_CHECK_FAILED,
        _ => EXIT_INVALID,
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| QmargError::Parse(format!("'{t}' is not a number"))))
        .collect()
}

fn parse_setting(s: &str) -> Result<(usize, usize)> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [n, d] => {
            let n = n.parse().map_err(|_| QmargError::Parse(format!("bad N in setting '{s}'")))?;
            let d = d.parse().map_err(|_| QmargError::Parse(format!("bad d in setting '{s}'")))?;
            Ok((n, d))
        }
        _ => Err(QmargError::Parse(format!("setting '{s}' must be N,d"))),
    }
}

/// a:b:count
pub fn parse_scan(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts.as_slice() else {
        return Err(QmargError::Parse(format!("scan '{s}' must be a:b:count")));
    };
    let a: f64 = a.parse().map_err(|_| QmargError::Parse(format!("bad scan start '{a}'")))?;
    let b: f64 = b.parse().map_err(|_| QmargError::Parse(format!("bad scan end '{b}'")))?;
    let n: usize = n.parse().map_err(|_| QmargError::Parse(format!("bad scan count '{n}'")))?;
    if n == 0 || a > b {
        return Err(QmargError::invalid(format!("empty scan '{s}'")));
    }
    Ok(harmonium::linear_grid(a, b, n))
}

#[derive(Serialize)]
struct NonOutput {
    n: usize,
    d: usize,
    lambdas: NonVector,
    #[serde(skip_serializing_if = "Option::is_none")]
    orbitals: Option<Vec<Vec<[f64; 2]>>>,
}

fn cmd_non(a: &NonArgs, json: bool) -> Result<Outcome> {
    let state = read_state_file(&a.state)?;
    let rdm = one_rdm(&state)?;
    let (lambdas, vectors) = natural_occupations(&rdm)?;
    let orbitals = a.orbitals.then(|| {
        (0..vectors.ncols())
            .map(|k| vectors.column(k).iter().map(|c| [c.re, c.im]).collect())
            .collect()
    });
    let out = NonOutput { n: rdm.n(), d: rdm.d(), lambdas, orbitals };
    if json {
        return Ok(Outcome::ok(to_json(&out)?));
    }
    let mut s = format!("N = {}, d = {}\n", out.n, out.d);
    for (i, l) in out.lambdas.as_slice().iter().enumerate() {
        s += &format!("lambda_{} = {:.16e}\n", i + 1, l);
    }
    if let Some(orbs) = &out.orbitals {
        for (k, col) in orbs.iter().enumerate() {
            let entries: Vec<String> = col.iter().map(|[re, im]| format!("{re:+.6e}{im:+.6e}i")).collect();
            s += &format!("orbital_{} = [{}]\n", k + 1, entries.join(", "));
        }
    }
    Ok(Outcome::ok(s))
}

fn cmd_gpc(a: &GpcArgs, json: bool) -> Result<Outcome> {
    let lambdas = match (&a.non, &a.state) {
        (Some(list), _) => NonVector::from_unsorted(parse_list(list)?)?,
        (None, Some(path)) => crate::fock::occupations_of(&read_state_file(path)?)?,
        (None, None) => return Err(QmargError::invalid("give --non or --state")),
    };
    let (n, d) = match &a.setting {
        Some(s) => parse_setting(s)?,
        None => (lambdas.sum().round() as usize, lambdas.len()),
    };
    let cat = gpc::catalog(n, d)?;
    let opts = PinningOptions { pin_tol: a.pin_tol, ..PinningOptions::default() };
    let report = gpc::pinning_report_with(&lambdas, &cat, &opts)?;
    if json {
        return Ok(Outcome::ok(to_json(&report)?));
    }
    Ok(Outcome::ok(output::pinning_text(&report)))
}

fn cmd_harmonium(a: &HarmoniumArgs, json: bool) -> Result<Outcome> {
    let mut quad = QuadratureSpec::new(a.n, a.basis)?;
    if let Some(g) = a.nodes {
        quad = quad.with_nodes(g);
    }
    let summary = match (&a.scan, a.kappa) {
        (Some(s), _) => {
            if a.n != 3 {
                return Err(QmargError::invalid("the quasipinning scan is defined for N = 3"));
            }
            harmonium::quasipinning_scan(&parse_scan(s)?, &quad)?
        }
        (None, Some(kappa)) if a.n == 3 => {
            let p = harmonium::quasipinning_point(kappa, &quad)?;
            harmonium::ScanSummary {
                n: 3,
                basis_size: quad.basis_size,
                nodes: quad.nodes,
                floor_reached: p.precision_floor,
                points: vec![p],
                slope_d: None,
                slope_hf: None,
            }
        }
        (None, Some(kappa)) => {
            let curve = harmonium::non_curve(&[kappa], a.n, &quad)?;
            let text = if json { to_json(&curve)? } else { output::non_curve_csv(&curve) };
            return Ok(Outcome::ok(text));
        }
        (None, None) => return Err(QmargError::invalid("give --kappa or --scan")),
    };
    let summary_json = to_json(&output::ScanSummaryView::from(&summary))?;
    if let Some(path) = &a.summary {
        fs::write(path, &summary_json)?;
    }
    let stdout = if json { to_json(&summary)? } else { scan_csv(&summary) };
    if summary.floor_reached {
        log::warn!("D fell below {} x its rounding-error estimate at some kappa", harmonium::PRECISION_FLOOR_FACTOR);
    }
    let code = if summary.floor_reached { EXIT_PRECISION_FLOOR } else { EXIT_OK };
    Ok(Outcome { stdout, code })
}

fn cmd_selection(a: &SelectionArgs, json: bool) -> Result<Outcome> {
    let (n, d) = parse_setting(&a.setting)?;
    let cat = gpc::catalog(n, d)?;
    let saturated: Vec<String> = if a.saturated.trim() == "none" {
        Vec::new()
    } else {
        a.saturated.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
    };
    let state = a.state.as_deref().map(read_state_file).transpose()?;
    let report = selection::selection_report(&cat, &saturated, state.as_ref(), a.tol)?;
    if json {
        return Ok(Outcome::ok(to_json(&report)?));
    }
    Ok(Outcome::ok(output::selection_text(&report)))
}

#[derive(Serialize)]
struct HzOutput {
    dim: usize,
    trials: usize,
    seed: u64,
    eigenvalues: Vec<f64>,
    all_passed: bool,
    results: Vec<schubert::HerschZwahlenReport>,
}

fn cmd_hz(a: &HzArgs, seed: u64, json: bool) -> Result<Outcome> {
    if a.dim == 0 || a.dim > 16 {
        return Err(QmargError::invalid(format!("--dim must be in 1..=16 (got {})", a.dim)));
    }
    // the matrix takes the last stream; cell samples use streams 0..trials
    let rho = random_hermitian(a.dim, &mut rng_for(seed, u64::MAX));
    let eigenvalues = crate::linalg::hermitian_eigen(&rho, 1e-10)?.values;
    let seqs = match &a.pi {
        Some(p) => vec![p.parse::<BinarySequence>()?],
        None => BinarySequence::all(a.dim),
    };
    let results = seqs
        .iter()
        .map(|pi| schubert::hersch_zwahlen_check(&rho, pi, a.trials, seed))
        .collect::<Result<Vec<_>>>()?;
    let all_passed = results.iter().all(|r| r.passed);
    let out = HzOutput { dim: a.dim, trials: a.trials, seed, eigenvalues, all_passed, results };
    let stdout = if json { to_json(&out)? } else { output::hz_text(&out.results, all_passed) };
    Ok(Outcome { stdout, code: if all_passed { EXIT_OK } else { EXIT_CHECK_FAILED } })
}

fn cmd_ineq(a: &IneqArgs, seed: u64, json: bool) -> Result<Outcome> {
    let pi: BinarySequence = a.pi.parse()?;
    let sigma: BinarySequence = a.sigma.parse()?;
    let verdict = schubert::test_spectral_inequality(&pi, &sigma, a.da, a.db, a.samples, seed)?;
    if json {
        return Ok(Outcome::ok(to_json(&verdict)?));
    }
    Ok(Outcome::ok(output::ineq_text(&verdict)))
}
