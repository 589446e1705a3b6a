//! CSV tables, the run manifest and the write-everything-or-nothing output
//! step.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::args::Command;
use crate::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Shortest round-trip decimal, switching to exponent form for very small or
/// large magnitudes; non-finite values are spelled out.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:?}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len(), "row width in {}", self.name);
        self.rows.push(row);
    }

    pub fn render(&self, preamble: &[String]) -> Result<Vec<u8>, CliError> {
        let mut buf = Vec::new();
        for line in preamble {
            buf.extend_from_slice(format!("# {line}\n").as_bytes());
        }
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.into_inner().map_err(|e| CliError::Internal(e.to_string()))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct OutputEntry {
    pub file: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub seed: u64,
    /// Fully resolved arguments of the command; replaying them regenerates
    /// the data files.
    pub params: Command,
    pub params_sha256: String,
    pub units: String,
    pub threads: usize,
    pub started: DateTime<Utc>,
    pub finished: DateTime<Utc>,
    pub outputs: Vec<OutputEntry>,
}

/// Digest of everything that determines the data: command, resolved
/// arguments, seed and tool version.
pub fn params_digest(command: &Command, seed: u64) -> String {
    let canonical = serde_json::to_string(&(env!("CARGO_PKG_VERSION"), seed, command)).expect("arguments serialize");
    sha256_hex(canonical.as_bytes())
}

pub fn preamble(command: &Command, seed: u64, gamma: f64) -> Vec<String> {
    vec![
        format!("spinfreeze {}", env!("CARGO_PKG_VERSION")),
        format!("command: {}", command.name()),
        format!("params_sha256: {}", params_digest(command, seed)),
        format!("seed: {seed}"),
        units(gamma),
    ]
}

pub fn units(gamma: f64) -> String {
    format!("units: rates in units of Gamma, times in units of 1/Gamma, Gamma = {}", num(gamma))
}

/// Renders every table, then writes them and the manifest. Nothing touches
/// the disk until all tables have rendered.
pub fn write_run(
    out: &Path,
    command: &Command,
    seed: u64,
    threads: usize,
    started: DateTime<Utc>,
    tables: &[Table],
) -> Result<RunManifest, CliError> {
    let pre = preamble(command, seed, command.gamma());
    let rendered = tables.iter().map(|t| Ok((format!("{}.csv", t.name), t.render(&pre)?))).collect::<Result<Vec<_>, CliError>>()?;
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let mut outputs = Vec::new();
    for (file, bytes) in &rendered {
        let path = out.join(file);
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        outputs.push(OutputEntry { file: file.clone(), sha256: sha256_hex(bytes), bytes: bytes.len() });
    }
    let manifest = RunManifest {
        command: command.name().into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        seed,
        params: command.clone(),
        params_sha256: params_digest(command, seed),
        units: units(command.gamma()),
        threads,
        started,
        finished: Utc::now(),
        outputs,
    };
    let path = out.join(MANIFEST_FILE);
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Internal(e.to_string()))?;
    fs::write(&path, json + "\n").map_err(|e| CliError::io(&path, e))?;
    Ok(manifest)
}

pub fn read_manifest(path: &Path) -> Result<RunManifest, CliError> {
    let path: PathBuf = if path.is_dir() { path.join(MANIFEST_FILE) } else { path.to_path_buf() };
    let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: not a run manifest: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, std::f64::consts::FRAC_PI_4, -2.5e-300] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(f64::INFINITY), "inf");
        assert_eq!(num(1e-8), "1e-8");
        assert_eq!(opt(None), "");
    }

    #[test]
    fn table_has_comment_block_then_csv() {
        let mut t = Table::new("x", &["a", "b"]);
        t.push(vec!["1".into(), "needs,quote".into()]);
        let bytes = t.render(&["hello".into()]).unwrap();
        assert_eq!(String::from_utf8(bytes).unwrap(), "# hello\na,b\n1,\"needs,quote\"\n");
    }

    #[test]
    fn digest_is_hex_sha256() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
