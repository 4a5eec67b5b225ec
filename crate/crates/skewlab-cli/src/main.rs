use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use skewlab::verify::{self, Suite, SuiteConfig, REGISTRY};

/// Verifies Hermitian connections with skew torsion on twistor spaces of
/// quaternionic Kähler manifolds.
#[derive(Parser, Debug)]
#[command(name = "skewlab", version, about, allow_negative_numbers = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Run the full verification suite (default).
    Verify,
    /// Representation-theory checks only.
    Rep,
    /// Holonomy algebra checks only.
    Holonomy,
    /// Finite-difference chart cross-checks.
    Oracle,
    /// Print the check registry.
    ListChecks,
}

#[derive(Args, Debug, Default)]
struct Opts {
    /// key=value configuration file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base model: s4, cp2 or hpn.
    #[arg(long, global = true)]
    base: Option<String>,
    /// Quaternionic rank.
    #[arg(long, global = true)]
    n: Option<String>,
    /// Metric scale of the base.
    #[arg(long, global = true)]
    scale: Option<String>,
    /// A positive number, t0, t1, or a multiple such as 1.7t1.
    #[arg(long, global = true)]
    t: Option<String>,
    /// J1 or J2.
    #[arg(long, global = true)]
    structure: Option<String>,
    /// Structural tolerance.
    #[arg(long, global = true)]
    tol: Option<String>,
    /// Comparison tolerance.
    #[arg(long = "tol-cmp", global = true)]
    tol_cmp: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    /// Comma-separated id prefixes; prefix with '-' to exclude.
    #[arg(long, global = true, allow_hyphen_values = true)]
    checks: Option<String>,
    /// Where to write the JSON report (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print the check registry and exit.
    #[arg(long = "list-checks", global = true)]
    list_checks: bool,
}

fn config(opts: &Opts) -> anyhow::Result<SuiteConfig> {
    let mut cfg = SuiteConfig::default();
    if let Some(path) = &opts.config {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        cfg.apply_text(&text)?;
    }
    let flags = [
        ("base", &opts.base),
        ("n", &opts.n),
        ("scale", &opts.scale),
        ("t", &opts.t),
        ("structure", &opts.structure),
        ("tol", &opts.tol),
        ("tol-cmp", &opts.tol_cmp),
        ("seed", &opts.seed),
        ("checks", &opts.checks),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn list_checks(out: &mut impl Write) -> std::io::Result<()> {
    for c in REGISTRY {
        writeln!(out, "{}\t{}\t{}", c.id, c.paper_ref, c.name)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SKEWLAB_LOG", "error")).init();
    ExitCode::from(run(Cli::parse()))
}

fn run(cli: Cli) -> u8 {
    let command = cli.command.unwrap_or(Command::Verify);
    if cli.opts.list_checks || matches!(command, Command::ListChecks) {
        return match list_checks(&mut std::io::stdout().lock()) {
            Ok(()) => 0,
            Err(_) => 2,
        };
    }
    let suite = match command {
        Command::Rep => Suite::Rep,
        Command::Holonomy => Suite::Holonomy,
        Command::Oracle => Suite::Oracle,
        _ => Suite::Verify,
    };
    let cfg = match config(&cli.opts) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("skewlab: {e:#}");
            return 2;
        }
    };
    let report = match verify::run(&cfg, suite) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("skewlab: {e}");
            return 2;
        }
    };
    let written = match &cli.opts.out {
        Some(path) => verify::emit_report(&report, path).map_err(anyhow::Error::from),
        None => std::io::stdout().write_all(report.to_canonical_json().as_bytes()).map_err(anyhow::Error::from),
    };
    if let Err(e) = written {
        eprintln!("skewlab: cannot write report: {e:#}");
        return 2;
    }
    let s = &report.summary;
    eprintln!("{} passed, {} failed, {} skipped, {} errors", s.passed, s.failed, s.skipped, report.errors.len());
    for c in report.checks.iter().filter(|c| !c.pass && !c.skipped) {
        eprintln!("FAIL {} residual {:e} tolerance {:e}", c.id, c.residual, c.tolerance);
    }
    for e in &report.errors {
        eprintln!("ERROR {}: {}", e.stage, e.message);
    }
    report.exit_code() as u8
}
