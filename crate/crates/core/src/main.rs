use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hyperint::cli::{run_command, Command, Config, Outcome};

/// Intermediate integrals and exact solutions of `u_tt - a² u_xx = f`,
/// driven by INI configuration files.
#[derive(Parser)]
#[command(name = "hyperint", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Target {
    /// Configuration file.
    config: PathBuf,
    /// CSV destination; overrides `[output] path`. Defaults to stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compatibility, determinant and structural residuals.
    Check(Target),
    /// Integrate a reduction along characteristics; writes the strip.
    Reduce(Target),
    /// Sample a solution family on a grid.
    Family(Target),
    /// Sample the general solution of a linear equation.
    LinearGeneral(Target),
    /// Solve a linear Cauchy problem and sample it.
    LinearIvp(Target),
    /// Finite-difference residual and leapfrog comparison of a solution.
    Verify(Target),
}

fn emit(out: &Outcome, target: &Target, cfg: &Config) -> std::io::Result<()> {
    let path = target
        .output
        .clone()
        .or_else(|| cfg.get("output", "path").map(PathBuf::from));
    let report = out.lines.join("\n") + "\n";
    match (&out.csv, path) {
        (Some(csv), Some(p)) => {
            std::fs::write(p, csv)?;
            std::io::stdout().write_all(report.as_bytes())
        }
        (Some(csv), None) => {
            std::io::stdout().write_all(csv)?;
            std::io::stderr().write_all(report.as_bytes())
        }
        (None, _) => std::io::stdout().write_all(report.as_bytes()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, target) = match cli.command {
        Cmd::Check(t) => (Command::Check, t),
        Cmd::Reduce(t) => (Command::Reduce, t),
        Cmd::Family(t) => (Command::Family, t),
        Cmd::LinearGeneral(t) => (Command::LinearGeneral, t),
        Cmd::LinearIvp(t) => (Command::LinearIvp, t),
        Cmd::Verify(t) => (Command::Verify, t),
    };
    let result = Config::load(&target.config).and_then(|cfg| Ok((run_command(cmd, &cfg)?, cfg)));
    match result {
        Ok((out, cfg)) => {
            if let Err(e) = emit(&out, &target, &cfg) {
                eprintln!("error: {e}");
                return ExitCode::FAILURE;
            }
            if out.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {}: {e}", cmd.as_str());
            ExitCode::FAILURE
        }
    }
}
