//! `opineq`: run the inequality suite, classify functions, search for
//! counterexamples, replay report lines and generate test matrices.

mod output;

use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use opineq::catalog::{sample_class, ClaimStatus, SamplerConfig};
use opineq::generate::{gen_commuting, gen_olson_sandwich, gen_pd, gen_sandwich, OlsonMode};
use opineq::majorization::DEFAULT_OLSON_GRID;
use opineq::suite::{replay_line, resolve_function, run_check, run_suite, CheckId, Instance, SuiteConfig};
use opineq::{builtin_catalog, Error, Execution, FunctionClass, Interval};

use output::{Format, Sink};

const DEFAULT_CONFIG: &str = include_str!("../configs/default.json");
const SEED_ENV: &str = "OPINEQ_SEED";

#[derive(Parser)]
#[command(name = "opineq", version, about = "Randomized checks of operator and eigenvalue inequalities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Base seed; overrides the config seed and OPINEQ_SEED.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Run the suite from a JSON config (the bundled default when absent).
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Comma-separated check ids.
        #[arg(long, value_delimiter = ',')]
        checks: Option<Vec<String>>,
        #[arg(long, value_delimiter = ',')]
        dims: Option<Vec<usize>>,
        #[arg(long)]
        trials: Option<usize>,
        /// Disable data-parallel trial execution.
        #[arg(long)]
        sequential: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Sample every class predicate (or the selected ones) for one function.
    Classify {
        /// Catalog id or name, or an inline formula in `t`.
        function: String,
        /// Domain `lo,hi` for inline formulas; `inf` allowed as `hi`.
        #[arg(long)]
        domain: Option<String>,
        #[arg(long, value_delimiter = ',')]
        class: Option<Vec<String>>,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Look for a counterexample to one operator class; exits 1 if none is found.
    Search {
        function: String,
        #[arg(long)]
        class: String,
        #[arg(long)]
        domain: Option<String>,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Recompute report lines (file or stdin) and compare verdict and margin.
    Replay {
        input: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Pretty)]
        format: Format,
    },
    /// Print generated matrices as JSON.
    Gen {
        #[arg(value_enum)]
        kind: GenKind,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 0.5)]
        s: f64,
        #[arg(long, default_value_t = 2.0)]
        t: f64,
        #[arg(long, default_value_t = 0.1)]
        lo: f64,
        #[arg(long, default_value_t = 10.0)]
        hi: f64,
        #[arg(long, value_enum, default_value_t = ModeArg::Search)]
        mode: ModeArg,
        /// Olson pairs with A > I.
        #[arg(long)]
        above_identity: bool,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Pd,
    Commuting,
    Sandwich,
    Olson,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Scalar,
    Search,
}

/// Failure classes mapped to exit codes.
enum Fail {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_)
            | Error::Parse { .. }
            | Error::UnknownFunction(_)
            | Error::UnknownCheck(_)
            | Error::EmptyDomain { .. }
            | Error::BadInterval { .. } => Fail::Usage(e.to_string()),
            e => Fail::Runtime(e.to_string()),
        }
    }
}

impl From<io::Error> for Fail {
    fn from(e: io::Error) -> Self {
        Fail::Runtime(e.to_string())
    }
}

type CmdResult = Result<ExitCode, Fail>;

fn env_seed() -> Result<Option<u64>, Fail> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s.trim().parse().map(Some).map_err(|_| Fail::Usage(format!("{SEED_ENV} is not an integer: {s}"))),
        Err(_) => Ok(None),
    }
}

/// Flag, then config, then environment.
fn resolve_seed(flag: Option<u64>, config: Option<u64>) -> Result<u64, Fail> {
    Ok(match (flag, config) {
        (Some(s), _) | (None, Some(s)) => s,
        (None, None) => env_seed()?.unwrap_or(0),
    })
}

fn parse_domain(s: Option<&str>) -> Result<Option<Interval>, Fail> {
    let Some(s) = s else { return Ok(None) };
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |x: &str| -> Result<f64, Fail> {
        match x {
            "inf" | "+inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            _ => x.parse().map_err(|_| Fail::Usage(format!("bad domain bound `{x}`"))),
        }
    };
    if parts.len() != 2 {
        return Err(Fail::Usage(format!("domain must be `lo,hi`, got `{s}`")));
    }
    Ok(Some(Interval::new(num(parts[0])?, num(parts[1])?)?))
}

fn load_config(path: Option<&PathBuf>) -> Result<(SuiteConfig, Option<u64>), Fail> {
    let text = match path {
        Some(p) => fs::read_to_string(p).map_err(|e| Fail::Usage(format!("{}: {e}", p.display())))?,
        None => DEFAULT_CONFIG.to_string(),
    };
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Fail::Usage(format!("config: {e}")))?;
    let seed = value.get("seed").and_then(|s| s.as_u64());
    Ok((SuiteConfig::from_json(&text)?, seed))
}

fn cmd_run(
    config: Option<PathBuf>,
    checks: Option<Vec<String>>,
    dims: Option<Vec<usize>>,
    trials: Option<usize>,
    sequential: bool,
    common: Common,
) -> CmdResult {
    let (mut cfg, cfg_seed) = load_config(config.as_ref())?;
    cfg.seed = resolve_seed(common.seed, cfg_seed)?;
    if let Some(ids) = checks {
        cfg.checks = Some(ids.iter().map(|s| CheckId::parse(s.trim())).collect::<Result<_, _>>()?);
    }
    if let Some(d) = dims {
        cfg.dims = d;
    }
    if let Some(t) = trials {
        cfg.trials = t;
    }
    if sequential {
        cfg.execution = Execution::Sequential;
    }
    cfg.validate()?;
    let run = run_suite(&cfg)?;
    let mut sink = Sink::open(common.out.as_ref(), common.format)?;
    sink.reports(&run.reports)?;
    sink.summary(&run.summary)?;
    sink.finish()?;
    let s = &run.summary;
    eprintln!(
        "{} reports: {} unexpected, {} expected failures, {} skipped, {} findings",
        s.total, s.unexpected, s.expected_failures, s.skipped, s.findings
    );
    Ok(if s.unexpected == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

#[derive(Serialize)]
struct ClassifyLine<'a> {
    function: String,
    class: FunctionClass,
    claim: ClaimStatus,
    disagreement: bool,
    verdict: &'a opineq::SampleVerdict,
}

fn parse_classes(names: Option<Vec<String>>) -> Result<Vec<FunctionClass>, Fail> {
    match names {
        Some(v) => Ok(v.iter().map(|s| FunctionClass::parse(s.trim())).collect::<Result<_, _>>()?),
        None => Ok(FunctionClass::ALL.to_vec()),
    }
}

fn cmd_classify(
    function: String,
    domain: Option<String>,
    class: Option<Vec<String>>,
    n: usize,
    trials: usize,
    common: Common,
) -> CmdResult {
    let catalog = builtin_catalog();
    let f = resolve_function(&catalog, &function, parse_domain(domain.as_deref())?)?;
    let classes = parse_classes(class)?;
    let cfg = SamplerConfig { n, trials, seed: resolve_seed(common.seed, None)?, ..SamplerConfig::default() };
    let mut sink = Sink::open(common.out.as_ref(), common.format)?;
    let mut disagreements = 0;
    for class in classes {
        let verdict = match sample_class(&f, class, &cfg) {
            Ok(v) => v,
            Err(e) => {
                eprintln!("{class}: not applicable ({e})");
                continue;
            }
        };
        let claim = f.claim(class);
        let disagreement = claim == ClaimStatus::ClaimedTrue && !verdict.holds;
        disagreements += disagreement as usize;
        let line = ClassifyLine { function: f.id(), class, claim, disagreement, verdict: &verdict };
        match common.format {
            Format::Json => sink.json_line(&line)?,
            Format::Csv => sink.classify_csv(&f.id(), class, claim, disagreement, &verdict)?,
            Format::Pretty => sink.text(&output::pretty_classify(&f.id(), class, claim, disagreement, &verdict))?,
        }
    }
    sink.finish()?;
    Ok(if disagreements == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_search(function: String, class: String, domain: Option<String>, n: usize, trials: usize, common: Common) -> CmdResult {
    let catalog = builtin_catalog();
    let f = resolve_function(&catalog, &function, parse_domain(domain.as_deref())?)?;
    let class = FunctionClass::parse(&class)?;
    if !class.is_operator_class() {
        return Err(Fail::Usage(format!("{class} is a scalar class; use classify")));
    }
    let cfg = SamplerConfig { n, trials, seed: resolve_seed(common.seed, None)?, ..SamplerConfig::default() };
    let verdict = sample_class(&f, class, &cfg)?;
    let mut sink = Sink::open(common.out.as_ref(), common.format)?;
    let Some(w) = verdict.witness.clone() else {
        eprintln!("no counterexample in {} trials (worst margin {:e})", verdict.trials, verdict.worst_margin);
        sink.finish()?;
        return Ok(ExitCode::from(1));
    };
    let mut inst = Instance::new(w.seed, w.trial, w.a, w.b, cfg.tol, Default::default());
    inst.v = w.v;
    inst.function = Some(f);
    inst.expect_fail = true;
    let mut report = run_check(CheckId::Class(class), &inst);
    if let Some(i) = verdict.first_failure {
        report.details.insert("first_failure".into(), i as f64);
    }
    sink.reports(std::slice::from_ref(&report))?;
    sink.finish()?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_replay(input: Option<PathBuf>, format: Format) -> CmdResult {
    let mut text = String::new();
    match &input {
        Some(p) => text = fs::read_to_string(p).map_err(|e| Fail::Usage(format!("{}: {e}", p.display())))?,
        None => {
            io::stdin().lock().read_to_string(&mut text)?;
        }
    }
    let mut out = io::stdout().lock();
    let (mut replayed, mut mismatches) = (0usize, 0usize);
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || output::is_summary_line(line) {
            continue;
        }
        let outcome = replay_line(line).map_err(|e| Fail::Usage(format!("line {}: {e}", i + 1)))?;
        replayed += 1;
        mismatches += !outcome.matches as usize;
        match format {
            Format::Json => writeln!(out, "{}", serde_json::to_string(&outcome).expect("serializable"))?,
            _ => writeln!(
                out,
                "{} {:?}->{:?} margin {} -> {} {}",
                outcome.check_id,
                outcome.original_verdict,
                outcome.replayed_verdict,
                outcome.original_margin,
                outcome.replayed_margin,
                if outcome.matches { "match" } else { "MISMATCH" }
            )?,
        }
    }
    if replayed == 0 {
        return Err(Fail::Usage("no report lines to replay".into()));
    }
    Ok(if mismatches == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

#[allow(clippy::too_many_arguments)]
fn cmd_gen(kind: GenKind, n: usize, s: f64, t: f64, lo: f64, hi: f64, mode: ModeArg, above: bool, common: Common) -> CmdResult {
    let seed = resolve_seed(common.seed, None)?;
    let value = match kind {
        GenKind::Pd => serde_json::to_value(gen_pd(n, (lo, hi), seed)?),
        GenKind::Commuting => {
            let (a, b) = gen_commuting(n, (lo, hi), seed)?;
            serde_json::to_value(serde_json::json!({ "a": a, "b": b }))
        }
        GenKind::Sandwich => serde_json::to_value(gen_sandwich(n, s, t, seed)?),
        GenKind::Olson => {
            let mode = match mode {
                ModeArg::Scalar => OlsonMode::Scalar,
                ModeArg::Search => OlsonMode::Search,
            };
            serde_json::to_value(gen_olson_sandwich(n, s, t, seed, mode, above, &DEFAULT_OLSON_GRID)?)
        }
    }
    .expect("serializable");
    let mut sink = Sink::open(common.out.as_ref(), Format::Json)?;
    sink.json_line(&value)?;
    sink.finish()?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Run { config, checks, dims, trials, sequential, common } => {
            cmd_run(config, checks, dims, trials, sequential, common)
        }
        Command::Classify { function, domain, class, n, trials, common } => {
            cmd_classify(function, domain, class, n, trials, common)
        }
        Command::Search { function, class, domain, n, trials, common } => {
            cmd_search(function, class, domain, n, trials, common)
        }
        Command::Replay { input, format } => cmd_replay(input, format),
        Command::Gen { kind, n, s, t, lo, hi, mode, above_identity, common } => {
            cmd_gen(kind, n, s, t, lo, hi, mode, above_identity, common)
        }
    };
    match res {
        Ok(code) => code,
        Err(Fail::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Fail::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
