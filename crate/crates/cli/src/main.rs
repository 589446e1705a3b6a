mod args;
mod commands;
mod expr;
mod initial;
mod output;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chrono::Utc;
use clap::Parser;
use thiserror::Error;

use args::{Action, Cli, SUBCOMMANDS};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Model(#[from] spinfreeze::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("replay mismatch: {0}")]
    Mismatch(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    /// 2 for anything the caller can fix by changing the request, 3 for
    /// failures during the computation itself.
    fn exit_code(&self) -> u8 {
        use spinfreeze::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Model(
                E::InvalidParams(_) | E::InvalidInput(_) | E::DimensionMismatch { .. } | E::NotSymmetryPoint(_) | E::ZeroWeight(_),
            ) => 2,
            _ => 3,
        }
    }
}

/// Splices `key=value` lines from `--config FILE` in front of the remaining
/// flags, so anything given on the command line takes precedence.
fn expand_config(argv: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let strs: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let mut path = None;
    for (i, a) in strs.iter().enumerate() {
        if a == "--config" {
            path = strs.get(i + 1).cloned();
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else { return Ok(argv) };
    let text = fs::read_to_string(&path).map_err(|e| CliError::io(Path::new(&path), e))?;
    let mut extra = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Usage(format!("{path}:{}: expected key=value", lineno + 1)));
        };
        let key = key.trim().trim_start_matches("--");
        if key.is_empty() || key == "config" {
            return Err(CliError::Usage(format!("{path}:{}: invalid key '{key}'", lineno + 1)));
        }
        let value = value.trim();
        extra.push(OsString::from(if value.is_empty() { format!("--{key}") } else { format!("--{key}={value}") }));
    }
    let at = strs.iter().position(|a| SUBCOMMANDS.contains(&a.as_str())).map_or(argv.len(), |i| i + 1);
    let mut out = argv;
    out.splice(at..at, extra);
    Ok(out)
}

fn run(cli: Cli) -> Result<(), CliError> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .map_err(|e| CliError::Internal(e.to_string()))?;
    }
    let started = Utc::now();
    match cli.action {
        Action::Run(command) => {
            let tables = commands::run(&command, cli.seed)?;
            let manifest = output::write_run(&cli.out, &command, cli.seed, cli.threads, started, &tables)?;
            for o in &manifest.outputs {
                println!("{}", cli.out.join(&o.file).display());
            }
            Ok(())
        }
        Action::Replay(r) => {
            let old = output::read_manifest(&r.manifest)?;
            if old.tool_version != env!("CARGO_PKG_VERSION") {
                eprintln!("warning: manifest written by version {}, replaying with {}", old.tool_version, env!("CARGO_PKG_VERSION"));
            }
            let tables = commands::run(&old.params, old.seed)?;
            let new = output::write_run(&cli.out, &old.params, old.seed, cli.threads, started, &tables)?;
            let mut bad = Vec::new();
            for o in &old.outputs {
                match new.outputs.iter().find(|n| n.file == o.file) {
                    Some(n) if n.sha256 == o.sha256 => println!("identical {}", o.file),
                    Some(_) => bad.push(format!("{} differs", o.file)),
                    None => bad.push(format!("{} missing", o.file)),
                }
            }
            if bad.is_empty() {
                Ok(())
            } else {
                Err(CliError::Mismatch(bad.join(", ")))
            }
        }
    }
}

fn main() -> ExitCode {
    let argv = match expand_config(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
