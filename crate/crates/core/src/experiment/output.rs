//! CSV and manifest writers.
//!
//! Real numbers are written with 17 significant digits (`{:.16e}`), which
//! round-trips every `f64` exactly. Row order follows the report, which is
//! ordered by coordinate, so reruns produce byte-identical files.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::RunReport;
use crate::error::{Error, Result};

pub const CAPACITY_HEADER: &str = "scenario,mode,method,snr_db,trial,receiver,capacity_bps_hz";
pub const SER_HEADER: &str = "scenario,method,snr_db,symbols,errors,ser,ci_halfwidth";

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect()
}

// Scenario names are free text; quote when CSV needs it.
fn field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn write(path: &Path, body: &str) -> Result<()> {
    std::fs::write(path, body).map_err(|e| Error::io(path, e))
}

/// Write one capacity and (when present) one SER file per scenario.
pub fn emit_csv(report: &RunReport, out_dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = out_dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut stems = HashSet::new();
    let mut files = Vec::new();
    for sr in &report.scenarios {
        let name = &sr.scenario.name;
        let stem = file_stem(name);
        if !stems.insert(stem.clone()) {
            return Err(Error::Config(format!(
                "scenario names collide after file-name sanitising: '{stem}'"
            )));
        }
        if let Some(cap) = &sr.capacity {
            let mut body = String::with_capacity(64 * (cap.rows.len() + 1));
            body.push_str(CAPACITY_HEADER);
            body.push('\n');
            for row in &cap.rows {
                let _ = writeln!(
                    body,
                    "{},{},{},{},{},{},{}",
                    field(name),
                    cap.mode.as_str(),
                    row.method.as_str(),
                    num(row.snr_db),
                    row.trial,
                    row.receiver,
                    num(row.capacity)
                );
            }
            let path = dir.join(format!("{stem}_capacity.csv"));
            write(&path, &body)?;
            files.push(path);
        }
        if let Some(ser) = &sr.ser {
            let mut body = String::from(SER_HEADER);
            body.push('\n');
            for row in &ser.rows {
                let _ = writeln!(
                    body,
                    "{},{},{},{},{},{},{}",
                    field(name),
                    row.method,
                    num(row.snr_db),
                    row.symbols,
                    row.errors,
                    num(row.ser),
                    num(row.ci_halfwidth)
                );
            }
            let path = dir.join(format!("{stem}_ser.csv"));
            write(&path, &body)?;
            files.push(path);
        }
    }
    Ok(files)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Run summary: tool version, config hash, seed, timings and every
/// scenario's resolved configuration and summary statistics.
pub fn write_manifest(
    report: &RunReport,
    out_dir: impl AsRef<Path>,
    config_text: &str,
    master_seed: Option<u64>,
    wall_clock_s: f64,
    files: &[PathBuf],
) -> Result<PathBuf> {
    let dir = out_dir.as_ref();
    let scenarios: Vec<serde_json::Value> = report
        .scenarios
        .iter()
        .map(|sr| {
            serde_json::json!({
                "config": sr.scenario,
                "capacity_summaries": sr.capacity.as_ref().map(|c| &c.summaries),
                "ga_vs_exhaustive": sr.capacity.as_ref().map(|c| &c.gaps),
                "ga_evaluations": sr.capacity.as_ref().map(|c| c.ga_evaluations),
                "exhaustive_evaluations": sr.capacity.as_ref().map(|c| c.exhaustive_evaluations),
                "capacity_wall_clock_s": sr.capacity.as_ref().map(|c| c.wall_clock_s),
                "ser_wall_clock_s": sr.ser.as_ref().map(|c| c.wall_clock_s),
                "ser_analytic_branches": sr.ser.as_ref().map(|c| c.analytic_branches),
                "semantics": "asynchronous = independent per-receiver antenna subsets; \
                              synchronous = one transmit subset shared by all receivers",
            })
        })
        .collect();
    let manifest = serde_json::json!({
        "tool": env!("CARGO_PKG_NAME"),
        "tool_version": env!("CARGO_PKG_VERSION"),
        "schema_version": super::SCHEMA_VERSION,
        "config_sha256": sha256_hex(config_text.as_bytes()),
        "master_seed_override": master_seed,
        "wall_clock_s": wall_clock_s,
        "files": files.iter().map(|p| p.file_name().map(|f| f.to_string_lossy().into_owned())).collect::<Vec<_>>(),
        "scenarios": scenarios,
    });
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::Numerical(format!("manifest serialisation failed: {e}")))?;
    write(&path, &text)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format_round_trips() {
        for x in [0.0, 1.0, 2.321928094887362, 1e-300, -7.5, f64::MIN_POSITIVE] {
            let s = num(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(2.5), "2.5000000000000000e0");
    }

    #[test]
    fn names_are_sanitised_and_quoted() {
        assert_eq!(file_stem("8T8R to 3T3R/a"), "8T8R_to_3T3R_a");
        assert_eq!(field("a,b"), "\"a,b\"");
        assert_eq!(field("plain"), "plain");
    }

    #[test]
    fn sha256_known_vector() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
