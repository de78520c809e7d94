//! Artifact writers. Every file carries the tool version and the SHA-256 of
//! the scenario text; nothing time-dependent is written, so identical inputs
//! give identical bytes.

use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

pub const TOOL: &str = "tonebound";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Identification shared by all artifacts of one run.
#[derive(Clone, Debug, Serialize)]
pub struct Stamp {
    pub tool: &'static str,
    pub version: &'static str,
    pub scenario: String,
    pub scenario_sha256: String,
    pub seed: u64,
}

impl Stamp {
    pub fn new(scenario: &str, source: &str, seed: u64) -> Self {
        Self { tool: TOOL, version: VERSION, scenario: scenario.to_string(), scenario_sha256: sha256_hex(source.as_bytes()), seed }
    }
}

#[derive(Serialize)]
struct Envelope<'a, T> {
    #[serde(flatten)]
    stamp: &'a Stamp,
    result: &'a T,
}

pub fn write_json<T: Serialize>(path: &Path, stamp: &Stamp, value: &T) -> io::Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut text = serde_json::to_string_pretty(&Envelope { stamp, result: value }).map_err(io::Error::other)?;
    text.push('\n');
    fs::write(path, text)
}

/// A CSV cell.
pub enum Cell {
    Int(u64),
    Real(f64),
}

/// Twelve significant digits in scientific notation.
pub fn sig12(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.11e}")
    } else {
        v.to_string()
    }
}

pub fn write_csv(path: &Path, stamp: &Stamp, columns: &[&str], rows: &[Vec<Cell>]) -> io::Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut text = format!(
        "# {} {} scenario={} sha256={} seed={}\n",
        stamp.tool, stamp.version, stamp.scenario, stamp.scenario_sha256, stamp.seed
    );
    text.push_str(&columns.join(","));
    text.push('\n');
    for row in rows {
        let cells: Vec<String> = row
            .iter()
            .map(|c| match c {
                Cell::Int(i) => i.to_string(),
                Cell::Real(v) => sig12(*v),
            })
            .collect();
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    fs::write(path, text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(sig12(5.783185962946784), "5.78318596295e0");
        assert_eq!(sig12(-0.000123456789012345), "-1.23456789012e-4");
    }

    #[test]
    fn digest_is_hex() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
