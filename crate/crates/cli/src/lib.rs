//! `bmv-lab` command-line front end.
//!
//! Every command writes JSON (or CSV with `--csv`) to `--out` or standard
//! output. Exit codes: 0 success, 1 usage or input error, 2 numerical or
//! integrity failure.

pub mod io;

use std::io::Write;
use std::path::{Path, PathBuf};

use bmv_lab_core::hurwitz::{coefficients_from_table, hurwitz_enum};
use bmv_lab_core::{
    check_trace_lemmas, diagnostics, negative_word_search, optimize, random_psd_unit, rel_err_mat,
    sweep, HermitianMat, HurwitzTable, KRule, LabRng, Mode, OptimConfig, WordSpec,
};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

pub use io::{load_matrix, save_report, CliError};

/// Environment variable capping the worker threads used for multistart runs.
pub const THREADS_ENV: &str = "BMV_LAB_THREADS";

/// Agreement required between the recurrence table and word enumeration.
pub const ORACLE_TOL: f64 = 1e-10;

#[derive(Parser, Debug)]
#[command(
    name = "bmv-lab",
    version,
    about = "Trace coefficients of (A + tB)^m: evaluation, search and diagnostics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Random unit-norm PSD matrix from a seed.
    Gen(GenArgs),
    /// Coefficients Tr S_{m,k}(A,B), k = 0..m, of Tr[(A + tB)^m].
    Eval(EvalArgs),
    /// Recurrence table against brute-force word enumeration on a random complex pair.
    Oracle(OracleArgs),
    /// Word traces: evaluate on given matrices, or search for a negative trace.
    Words(WordsArgs),
    /// Multistart minimization of Tr S_{m,k} (min-psd or min-herm).
    Minimize(OptArgs),
    /// Multistart maximization of Tr S_{m,k} (max-herm or max-psd).
    Maximize(OptArgs),
    /// Minimize every (m, k) cell for m = 2..=M over PSD pairs.
    Sweep(SweepArgs),
    /// Diagnostics of S_{m,k} at a given pair.
    Diagnose(DiagArgs),
}

#[derive(Args, Debug)]
struct Output {
    /// Write the result here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    #[arg(long)]
    m: usize,
    /// Emit `k,coefficient` rows instead of JSON.
    #[arg(long)]
    csv: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct WordsArgs {
    /// Word as a 0/1 string (1 = B), e.g. 010110 for ABABBA.
    #[arg(long)]
    word: String,
    #[arg(long)]
    a: Option<PathBuf>,
    #[arg(long)]
    b: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct OptArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 20)]
    starts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// min-psd, max-psd, min-herm or max-herm.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    tol_grad: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Largest m; the sweep covers m = 2..=M.
    #[arg(long)]
    m: usize,
    /// Only this k (default: every 0 < k < m).
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 20)]
    starts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    tol_grad: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Emit the grid as CSV instead of JSON.
    #[arg(long)]
    csv: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct DiagArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    k: usize,
    #[command(flatten)]
    output: Output,
}

/// Entry point used by the binary: parses `argv` (including the program
/// name), runs the command and returns the process exit code.
pub fn run_cli<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_cli_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_cli_with<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    0
                }
                _ => {
                    let _ = write!(err, "{e}");
                    1
                }
            };
        }
    };
    if let Err(e) = configure_threads() {
        let _ = writeln!(err, "error: {e}");
        return e.exit_code();
    }
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().ok().filter(|&t| t > 0).ok_or_else(|| {
        CliError::Usage(format!(
            "{THREADS_ENV} must be a positive integer, got {raw:?}"
        ))
    })?;
    // A pool may already exist when called repeatedly in one process.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global();
    Ok(())
}

fn emit(text: &str, output: &Output, out: &mut dyn Write) -> Result<(), CliError> {
    match &output.out {
        Some(path) => io::write_text(text, path),
        None => out
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io {
                path: PathBuf::from("<stdout>"),
                source,
            }),
    }
}

fn emit_json<T: Serialize>(
    value: &T,
    output: &Output,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    emit(&io::to_json(value)?, output, out)
}

fn load_hermitian(path: &Path) -> Result<HermitianMat, CliError> {
    Ok(HermitianMat::new(load_matrix(path)?)?)
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Gen(args) => {
            if args.n == 0 {
                return Err(CliError::Usage("--n must be at least 1".into()));
            }
            let p = random_psd_unit(args.n, args.seed);
            emit_json(p.as_mat(), &args.output, out)
        }
        Command::Eval(args) => {
            let a = load_hermitian(&args.a)?;
            let b = load_hermitian(&args.b)?;
            let table = HurwitzTable::build(a.as_mat(), b.as_mat(), args.m)?;
            let coeffs = coefficients_from_table(&table, args.m)?;
            if args.csv {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(["k", "coefficient"]).map_err(csv_err)?;
                for (k, c) in coeffs.coeffs.iter().enumerate() {
                    w.write_record([k.to_string(), format!("{c:e}")])
                        .map_err(csv_err)?;
                }
                emit(&csv_text(w)?, &args.output, out)
            } else {
                emit_json(&coeffs, &args.output, out)
            }
        }
        Command::Oracle(args) => {
            let report = oracle(args.n, args.m, args.seed)?;
            emit_json(&report, &args.output, out)?;
            if !(report.max_rel_err <= ORACLE_TOL && report.trace_lemma_err <= ORACLE_TOL) {
                return Err(CliError::Integrity(format!(
                    "oracle disagreement: table vs enumeration {:e}, trace identities {:e}",
                    report.max_rel_err, report.trace_lemma_err
                )));
            }
            Ok(())
        }
        Command::Words(args) => {
            let word: WordSpec = args.word.parse()?;
            match (&args.a, &args.b) {
                (Some(a), Some(b)) => {
                    let a = load_matrix(a)?;
                    let b = load_matrix(b)?;
                    let tr = bmv_lab_core::word_trace(&a, &b, &word)?;
                    emit_json(
                        &WordTrace {
                            word,
                            trace_re: tr.re,
                            trace_im: tr.im,
                        },
                        &args.output,
                        out,
                    )
                }
                (None, None) => {
                    if args.n == 0 || args.trials == 0 {
                        return Err(CliError::Usage("--n and --trials must be positive".into()));
                    }
                    let found = negative_word_search(&word, args.n, args.trials, args.seed)?;
                    emit_json(&found, &args.output, out)
                }
                _ => Err(CliError::Usage("--a and --b must be given together".into())),
            }
        }
        Command::Minimize(args) => run_optimizer(args, Mode::MinPsd, out),
        Command::Maximize(args) => run_optimizer(args, Mode::MaxHerm, out),
        Command::Sweep(args) => {
            if args.m < 2 {
                return Err(CliError::Usage("--m must be at least 2".into()));
            }
            let mut template = OptimConfig::new(Mode::MinPsd, args.n, 2, 1, args.seed);
            template.starts = args.starts;
            if let Some(t) = args.tol_grad {
                template.tol_grad = t;
            }
            if let Some(it) = args.max_iters {
                template.max_iters = it;
            }
            let rule = args.k.map_or(KRule::All, KRule::Fixed);
            let report = sweep(2..=args.m, rule, &template)?;
            if args.csv {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record([
                    "m",
                    "k",
                    "best_objective",
                    "converged_starts",
                    "flagged",
                    "upward_k",
                    "upward_k1",
                ])
                .map_err(csv_err)?;
                for c in &report.cells {
                    let opt = |x: Option<f64>| x.map(|v| format!("{v:e}")).unwrap_or_default();
                    w.write_record([
                        c.m.to_string(),
                        c.k.to_string(),
                        opt(c.best_objective),
                        c.converged_starts.to_string(),
                        c.flagged.to_string(),
                        opt(c.upward.map(|u| u.0)),
                        opt(c.upward.map(|u| u.1)),
                    ])
                    .map_err(csv_err)?;
                }
                emit(&csv_text(w)?, &args.output, out)
            } else {
                emit_json(&report, &args.output, out)
            }
        }
        Command::Diagnose(args) => {
            let a = load_hermitian(&args.a)?;
            let b = load_hermitian(&args.b)?;
            let d = diagnostics(&a, &b, args.m, args.k)?;
            emit_json(&d, &args.output, out)
        }
    }
}

fn run_optimizer(args: OptArgs, default_mode: Mode, out: &mut dyn Write) -> Result<(), CliError> {
    let mode: Mode = match &args.mode {
        Some(s) => s.parse()?,
        None => default_mode,
    };
    if mode.is_min() != default_mode.is_min() {
        return Err(CliError::Usage(format!(
            "--mode {} does not match this command",
            mode.as_str()
        )));
    }
    let mut cfg = OptimConfig::new(mode, args.n, args.m, args.k, args.seed);
    cfg.starts = args.starts;
    if let Some(t) = args.tol_grad {
        cfg.tol_grad = t;
    }
    if let Some(it) = args.max_iters {
        cfg.max_iters = it;
    }
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let report = optimize(&cfg)?;
    emit_json(&report, &args.output, out)
}

#[derive(Serialize)]
struct WordTrace {
    word: WordSpec,
    trace_re: f64,
    trace_im: f64,
}

#[derive(Debug, Serialize)]
pub struct OracleReport {
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    /// Cells compared, `(j, l)` with `0 <= l <= j <= m`.
    pub cells: usize,
    pub max_rel_err: f64,
    pub trace_lemma_err: f64,
}

/// Compares every table cell up to depth `m` with explicit word enumeration
/// on a random complex (non-Hermitian) pair drawn from `seed`.
pub fn oracle(n: usize, m: usize, seed: u64) -> Result<OracleReport, CliError> {
    if n == 0 || m == 0 {
        return Err(CliError::Usage("--n and --m must be positive".into()));
    }
    let mut rng = LabRng::new(seed);
    let a = rng.ginibre(n);
    let b = rng.ginibre(n);
    let table = HurwitzTable::build(&a, &b, m)?;
    let mut max_rel_err: f64 = 0.0;
    let mut cells = 0;
    for j in 0..=m {
        for l in 0..=j {
            let enumerated = hurwitz_enum(&a, &b, j, l)?;
            max_rel_err = max_rel_err.max(rel_err_mat(
                table.cell(j, l).expect("in range"),
                &enumerated,
            ));
            cells += 1;
        }
    }
    Ok(OracleReport {
        n,
        m,
        seed,
        cells,
        max_rel_err,
        trace_lemma_err: check_trace_lemmas(&a, &b, m)?,
    })
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Serialize(e.to_string())
}

fn csv_text(w: csv::Writer<Vec<u8>>) -> Result<String, CliError> {
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Serialize(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Serialize(e.to_string()))
}
