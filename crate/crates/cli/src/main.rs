//! Command-line front end: polytope bounds, LP membership, quantum
//! maximization, violation sweeps, the GHZ anonymity checks, and the
//! reproduction suite.
//!
//! Exit codes: 0 success, 1 user/parse error, 2 unsupported combination,
//! 3 verification failure.

use bellpoly::expressions::{builtin, parse, Expression, BUILTIN_NAMES};
use bellpoly::optimize::{
    default_t_grid, maximize, sweep, OptimizedParams, ParamMode, SearchConfig,
};
use bellpoly::polytopes::{bc1_family, bound, enumerate_vertices, membership_in, ModelClass};
use bellpoly::quantum::{broadcast_reproduction, ghz_correlation};
use bellpoly::scenario::{Behavior, NUMERIC_TOL};
use bellpoly::verify::run_reproduction_suite;
use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "bellpoly",
    about = "Bounds, membership tests and quantum violations for multipartite correlation polytopes",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact maximum of an inequality over a correlation class.
    Bounds {
        /// Built-in name (S3, Sprime, I, R3, RN, T, B, Mermin3) or
        /// expression text such as "P(a1^0+,a2^0+) - <a1^1 a2^1>".
        #[arg(long)]
        ineq: String,
        /// Local, BL, TOBL, NSBL, BC1 or OneWay(i,j) with 1-based parties.
        #[arg(long)]
        model: String,
        /// Number of parties (defaults to the model's natural scenario).
        #[arg(long)]
        n: Option<usize>,
        /// Write the maximizing vertex as behavior JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// LP membership of a behavior in a correlation class.
    Membership {
        /// Behavior JSON file.
        #[arg(long)]
        behavior: PathBuf,
        #[arg(long)]
        model: String,
        /// Restrict BC1 to a single first-broadcasting party (1-based).
        #[arg(long)]
        first_party: Option<usize>,
        /// Per-entry feasibility tolerance.
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        /// Write the full result (weights or certificate) as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Maximize an inequality over measurement parameters on a GHZ-like state.
    Qmax {
        #[arg(long)]
        ineq: String,
        #[arg(long)]
        n: usize,
        /// State angle in radians, in (0, π/4].
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 64)]
        restarts: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// "shared" (one angle set for all parties) or "general"
        /// (independent per-party Bloch angles).
        #[arg(long, default_value = "shared")]
        mode: String,
    },
    /// Violation curve over a grid of state angles; emits CSV.
    Sweep {
        #[arg(long)]
        ineq: String,
        #[arg(long)]
        n: usize,
        /// Number of uniform grid points in (0, π/4].
        #[arg(long, default_value_t = 50)]
        grid: usize,
        #[arg(long, default_value_t = 64)]
        restarts: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// CSV output file (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Checks the GHZ correlation's anonymous broadcast reproduction.
    GhzAnonymity {
        #[arg(long)]
        n: usize,
    },
    /// Runs the full reproduction suite and reports per-check results.
    Verify {
        #[arg(long, default_value = "paper")]
        suite: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Write the machine-readable report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

/// Failure modes mapped to exit codes.
enum CliError {
    /// Exit 1: bad input, parse failure, IO failure.
    Usage(String),
    /// Exit 2: a (model, scenario) combination outside the supported range.
    Unsupported(String),
    /// Exit 3: a verification or sub-check failure.
    Verification(String),
}

impl CliError {
    fn report(&self) -> ExitCode {
        match self {
            CliError::Usage(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(1)
            }
            CliError::Unsupported(msg) => {
                eprintln!("error: unsupported combination: {msg}");
                ExitCode::from(2)
            }
            CliError::Verification(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(3)
            }
        }
    }
}

impl From<bellpoly::Error> for CliError {
    fn from(err: bellpoly::Error) -> Self {
        match &err {
            bellpoly::Error::Unsupported(msg) => CliError::Unsupported(msg.clone()),
            bellpoly::Error::InvalidArity { .. } => CliError::Unsupported(err.to_string()),
            _ => CliError::Usage(err.to_string()),
        }
    }
}

fn parse_model(text: &str) -> Result<ModelClass, CliError> {
    match text {
        "Local" => Ok(ModelClass::Local),
        "BL" => Ok(ModelClass::BL),
        "TOBL" => Ok(ModelClass::TOBL),
        "NSBL" => Ok(ModelClass::NSBL),
        "BC1" => Ok(ModelClass::BC1),
        other => {
            if let Some(args) = other
                .strip_prefix("OneWay(")
                .and_then(|rest| rest.strip_suffix(')'))
            {
                let parts: Vec<&str> = args.split(',').map(str::trim).collect();
                if parts.len() == 2 {
                    let sender: usize = parts[0]
                        .parse()
                        .map_err(|_| CliError::Usage(format!("bad party index {:?}", parts[0])))?;
                    let receiver: usize = parts[1]
                        .parse()
                        .map_err(|_| CliError::Usage(format!("bad party index {:?}", parts[1])))?;
                    if sender == 0 || receiver == 0 {
                        return Err(CliError::Usage("party indices are 1-based".into()));
                    }
                    return Ok(ModelClass::OneWay {
                        sender: sender - 1,
                        receiver: receiver - 1,
                    });
                }
            }
            Err(CliError::Usage(format!(
                "unknown model {other:?}; expected Local, BL, TOBL, NSBL, BC1 or OneWay(i,j)"
            )))
        }
    }
}

fn default_n(model: ModelClass) -> usize {
    match model {
        ModelClass::OneWay { .. } => 2,
        _ => 3,
    }
}

/// Resolves --ineq: a built-in name, or expression text re-embedded into the
/// requested scenario.
fn resolve_expression(ineq: &str, n: usize) -> Result<Expression, CliError> {
    if BUILTIN_NAMES.contains(&ineq) {
        return Ok(builtin(ineq, n)?);
    }
    if ineq.contains("P(") || ineq.contains('<') {
        let expr = parse(ineq)?;
        if expr.scenario().num_parties() > n {
            return Err(CliError::Usage(format!(
                "expression mentions party a{}, but n = {n}",
                expr.scenario().num_parties()
            )));
        }
        return Ok(expr.with_scenario(n)?);
    }
    Err(CliError::Usage(format!(
        "unknown inequality {ineq:?}; expected one of {BUILTIN_NAMES:?} or expression text"
    )))
}

fn write_file(path: &PathBuf, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

fn cmd_bounds(
    ineq: &str,
    model: &str,
    n: Option<usize>,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let model = parse_model(model)?;
    let n = n.unwrap_or(default_n(model));
    let expr = resolve_expression(ineq, n)?;
    let result = bound(&expr, model)?;
    println!("{:.12}", result.value);
    if let Some(path) = out {
        write_file(&path, &result.witness.to_json())?;
        eprintln!("witness written to {}", path.display());
    }
    Ok(())
}

fn cmd_membership(
    behavior: &PathBuf,
    model: &str,
    first_party: Option<usize>,
    tol: f64,
    json: Option<PathBuf>,
) -> Result<(), CliError> {
    let text = std::fs::read_to_string(behavior)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", behavior.display())))?;
    let behavior = Behavior::from_json(&text, NUMERIC_TOL)?;
    let model = parse_model(model)?;
    let vertices = match (model, first_party) {
        (ModelClass::BC1, Some(first)) => {
            if first == 0 {
                return Err(CliError::Usage("party indices are 1-based".into()));
            }
            bc1_family(behavior.scenario(), first - 1)?
        }
        (_, Some(_)) => {
            return Err(CliError::Usage(
                "--first-party only applies to the BC1 model".into(),
            ));
        }
        (m, None) => enumerate_vertices(m, behavior.scenario())?,
    };
    let result = membership_in(&behavior, &vertices, tol)?;
    if result.member {
        println!(
            "member of {} ({} vertices), reconstruction error {:.3e}",
            vertices.label,
            vertices.len(),
            result.reconstruction_error.unwrap_or(f64::NAN)
        );
    } else {
        println!(
            "non-member of {} ({} vertices), separating gap {:.12}",
            vertices.label,
            vertices.len(),
            result.gap
        );
    }
    if let Some(path) = json {
        let envelope = serde_json::json!({
            "model": vertices.label,
            "tol": tol,
            "result": result,
        });
        write_file(
            &path,
            &serde_json::to_string_pretty(&envelope).expect("serializable"),
        )?;
    }
    Ok(())
}

fn cmd_qmax(
    ineq: &str,
    n: usize,
    t: f64,
    restarts: usize,
    seed: u64,
    mode: &str,
) -> Result<(), CliError> {
    let expr = resolve_expression(ineq, n)?;
    let mode = match mode {
        "shared" => ParamMode::SharedAngles,
        "general" => ParamMode::GeneralPerParty,
        other => return Err(CliError::Usage(format!("unknown mode {other:?}"))),
    };
    let config = SearchConfig {
        restarts,
        seed,
        mode,
        ..SearchConfig::default()
    };
    let outcome = maximize(&expr, n, t, &config)?;
    println!("# seed {seed} restarts {restarts} mode {}", match mode {
        ParamMode::SharedAngles => "shared",
        ParamMode::GeneralPerParty => "general",
    });
    println!("{:.12}", outcome.value);
    match outcome.params {
        OptimizedParams::Shared(p) => {
            println!("alpha {:.12}", p.alpha);
            println!("beta {:.12}", p.beta);
            println!("gamma {:.12}", p.gamma);
            for (i, phi) in p.phi.iter().enumerate() {
                println!("phi{} {:.12}", i + 1, phi);
            }
        }
        OptimizedParams::PerParty(obs) => {
            for party in 0..obs.num_parties() {
                for setting in 0..2u8 {
                    let v = obs.direction(party, setting);
                    println!(
                        "party{} setting{} {:.12} {:.12} {:.12}",
                        party + 1,
                        setting,
                        v[0],
                        v[1],
                        v[2]
                    );
                }
            }
        }
    }
    Ok(())
}

fn cmd_sweep(
    ineq: &str,
    n: usize,
    grid: usize,
    restarts: usize,
    seed: u64,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    if grid == 0 {
        return Err(CliError::Usage("grid must have at least one point".into()));
    }
    let expr = resolve_expression(ineq, n)?;
    let config = SearchConfig {
        restarts,
        seed,
        ..SearchConfig::default()
    };
    let curve = sweep(&expr, n, &default_t_grid(grid), &config)?;
    let csv = curve.to_csv();
    match out {
        Some(path) => {
            write_file(&path, &csv)?;
            println!("# ineq {ineq} n {n} grid {grid} restarts {restarts} seed {seed}");
            println!("# curve written to {}", path.display());
        }
        None => {
            println!("# ineq {ineq} n {n} grid {grid} restarts {restarts} seed {seed}");
            print!("{csv}");
        }
    }
    Ok(())
}

fn cmd_ghz_anonymity(n: usize) -> Result<(), CliError> {
    if !(3..=8).contains(&n) {
        return Err(CliError::Usage(format!(
            "ghz-anonymity needs 3 <= n <= 8, got {n}"
        )));
    }
    let mut all_pass = true;

    let bc = broadcast_reproduction(n)?;
    let ghz = ghz_correlation(n)?;
    let diff = bc
        .table()
        .iter()
        .zip(ghz.table())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    let pass = diff <= 1e-12;
    all_pass &= pass;
    println!(
        "[{}] broadcast reproduction equals GHZ correlation (max diff {:.3e})",
        if pass { "PASS" } else { "FAIL" },
        diff
    );

    if n == 3 {
        let mermin = builtin("Mermin3", 3)?;
        let value = mermin.evaluate(&ghz)?;
        let pass = (value - 4.0).abs() <= 1e-12 && value > 2.0;
        all_pass &= pass;
        println!(
            "[{}] Mermin functional = {:.12} (> 2: nonlocal)",
            if pass { "PASS" } else { "FAIL" },
            value
        );

        for first in 0..3usize {
            let family = bc1_family(ghz.scenario(), first)?;
            let result = membership_in(&ghz, &family, 1e-7)?;
            let pass = result.member
                && result.reconstruction_error.map(|e| e <= 1e-7).unwrap_or(false);
            all_pass &= pass;
            println!(
                "[{}] member of BC1 with first-broadcasting party {}",
                if pass { "PASS" } else { "FAIL" },
                first + 1
            );
        }
    } else {
        println!("[SKIP] Mermin and BC1 membership sub-checks run at n = 3 only");
    }

    if all_pass {
        Ok(())
    } else {
        Err(CliError::Verification("ghz-anonymity sub-check failed".into()))
    }
}

fn cmd_verify(suite: &str, seed: u64, json: Option<PathBuf>) -> Result<(), CliError> {
    if suite != "paper" {
        return Err(CliError::Usage(format!(
            "unknown suite {suite:?}; only \"paper\" is available"
        )));
    }
    let report = run_reproduction_suite(seed);
    println!("suite {} seed {}", report.suite, report.seed);
    println!(
        "{:<42} {:>16} {:>16} {:>9} {:>7}",
        "check", "expected", "actual", "tol", "status"
    );
    for c in &report.checks {
        println!(
            "{:<42} {:>16.9} {:>16.9} {:>9.1e} {:>7}",
            c.name,
            c.expected,
            c.actual,
            c.tolerance,
            if c.pass { "PASS" } else { "FAIL" }
        );
    }
    let passed = report.checks.iter().filter(|c| c.pass).count();
    println!(
        "overall: {} ({passed}/{} checks)",
        if report.overall_pass { "PASS" } else { "FAIL" },
        report.checks.len()
    );
    if let Some(path) = json {
        write_file(&path, &report.to_json())?;
    }
    if report.overall_pass {
        Ok(())
    } else {
        Err(CliError::Verification(
            "paper suite has failing checks".into(),
        ))
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Bounds {
            ineq,
            model,
            n,
            out,
        } => cmd_bounds(&ineq, &model, n, out),
        Command::Membership {
            behavior,
            model,
            first_party,
            tol,
            json,
        } => cmd_membership(&behavior, &model, first_party, tol, json),
        Command::Qmax {
            ineq,
            n,
            t,
            restarts,
            seed,
            mode,
        } => cmd_qmax(&ineq, n, t, restarts, seed, &mode),
        Command::Sweep {
            ineq,
            n,
            grid,
            restarts,
            seed,
            out,
        } => cmd_sweep(&ineq, n, grid, restarts, seed, out),
        Command::GhzAnonymity { n } => cmd_ghz_anonymity(n),
        Command::Verify { suite, seed, json } => cmd_verify(&suite, seed, json),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => e.report(),
    }
}
