use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct RunReport<T: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    /// Arguments after the program name.
    pub command: Vec<String>,
    /// SHA-256 of the model file bytes.
    pub model_digest: Option<String>,
    pub results: T,
}

impl<T: Serialize> RunReport<T> {
    pub fn new(command: &[String], model_digest: Option<String>, results: T) -> Self {
        RunReport {
            tool: "nagaoka",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_vec(),
            model_digest,
            results,
        }
    }
}

pub fn digest_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Destination for the primary output.
pub struct Output {
    path: Option<PathBuf>,
}

impl Output {
    pub fn new(path: Option<PathBuf>) -> Self {
        Output { path }
    }

    pub fn text(&self, body: &str) -> Result<()> {
        match &self.path {
            Some(p) => std::fs::write(p, body).with_context(|| format!("writing {}", p.display())),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(body.as_bytes())?;
                out.flush()?;
                Ok(())
            }
        }
    }

    pub fn json<T: Serialize>(&self, value: &T) -> Result<()> {
        let mut body = serde_json::to_string_pretty(value)?;
        body.push('\n');
        self.text(&body)
    }
}

/// 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}
