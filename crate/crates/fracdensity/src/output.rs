//! Machine-readable run artifacts: bit-stable CSV tables, JSON summaries and
//! the run manifest.
//!
//! Floating-point cells are printed with 17 significant digits
//! (`{:.16e}`), which round-trips every finite f64 exactly, with `.` as the
//! decimal separator and `\n` line endings — so identical runs produce
//! byte-identical files on any platform running the same binary. Files are
//! written atomically (temporary file + rename) so partial artifacts never
//! appear under the final name.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::Config;
use crate::control_ode::ControlOdePath;
use crate::error::{Error, Result};
use crate::harness::{CellAggregate, OracleDensity, SampleRow};
use crate::sde::Trajectory;

/// 17-significant-digit representation; parses back to the same bits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// One CSV cell.
#[derive(Debug, Clone)]
pub enum CsvField {
    F(f64),
    I(u64),
    S(String),
    /// Absent optional value; rendered empty.
    Empty,
}

impl CsvField {
    fn render(&self) -> String {
        match self {
            CsvField::F(x) => fmt_f64(*x),
            CsvField::I(n) => n.to_string(),
            CsvField::S(s) => {
                debug_assert!(!s.contains([',', '\n', '"']), "CSV text cells must be plain");
                s.clone()
            }
            CsvField::Empty => String::new(),
        }
    }
}

/// Comma-separated table accumulator with a fixed column count.
#[derive(Debug, Clone)]
pub struct CsvBuilder {
    buf: String,
    cols: usize,
}

impl CsvBuilder {
    pub fn new(header: &[&str]) -> Self {
        let mut buf = header.join(",");
        buf.push('\n');
        CsvBuilder { buf, cols: header.len() }
    }

    pub fn row(&mut self, fields: &[CsvField]) {
        assert_eq!(fields.len(), self.cols, "CSV row arity mismatch");
        for (i, f) in fields.iter().enumerate() {
            if i > 0 {
                self.buf.push(',');
            }
            self.buf.push_str(&f.render());
        }
        self.buf.push('\n');
    }

    pub fn finish(self) -> String {
        self.buf
    }
}

/// Per-replicate estimator evaluations: `T,h,x1..xd,replicate,pi_hat`.
pub fn sample_rows_csv(rows: &[SampleRow], dim: usize) -> String {
    let mut header: Vec<String> = vec!["T".into(), "h".into()];
    for c in 1..=dim {
        header.push(format!("x{c}"));
    }
    header.push("replicate".into());
    header.push("pi_hat".into());
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut csv = CsvBuilder::new(&header_refs);
    for r in rows {
        let mut fields = vec![CsvField::F(r.t), CsvField::F(r.h)];
        fields.extend(r.x.iter().map(|&v| CsvField::F(v)));
        fields.push(CsvField::I(r.replicate as u64));
        fields.push(CsvField::F(r.pi_hat));
        csv.row(&fields);
    }
    csv.finish()
}

/// Per-cell aggregates, one row per (cell, query point). Optional columns
/// (oracle-relative) are empty when no oracle was involved or the cell
/// aborted.
pub fn cell_aggregates_csv(cells: &[CellAggregate], query_points: &[Vec<f64>]) -> String {
    let dim = query_points.first().map_or(1, Vec::len);
    let mut header: Vec<String> =
        vec!["T".into(), "h".into(), "dt".into(), "aborted".into(), "query".into()];
    for c in 1..=dim {
        header.push(format!("x{c}"));
    }
    for name in ["mean", "variance", "mse", "mse_stderr", "bias"] {
        header.push(name.into());
    }
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut csv = CsvBuilder::new(&header_refs);
    for cell in cells {
        for (q, x) in query_points.iter().enumerate() {
            let mut fields = vec![
                CsvField::F(cell.t),
                CsvField::F(cell.h),
                CsvField::F(cell.dt),
                CsvField::I(cell.aborted as u64),
                CsvField::I(q as u64),
            ];
            fields.extend(x.iter().map(|&v| CsvField::F(v)));
            if cell.aborted {
                fields.extend(std::iter::repeat(CsvField::Empty).take(5));
            } else {
                fields.push(CsvField::F(cell.mean[q]));
                fields.push(CsvField::F(cell.variance[q]));
                for opt in [&cell.mse, &cell.mse_stderr, &cell.bias] {
                    fields.push(match opt {
                        Some(v) => CsvField::F(v[q]),
                        None => CsvField::Empty,
                    });
                }
            }
            csv.row(&fields);
        }
    }
    csv.finish()
}

/// Sampled path: `t,x1..xd` rows.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let dim = traj.dim();
    let mut header: Vec<String> = vec!["t".into()];
    for c in 1..=dim {
        header.push(format!("x{c}"));
    }
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut csv = CsvBuilder::new(&header_refs);
    let grid = traj.grid();
    for k in 0..=grid.num_steps() {
        let mut fields = vec![CsvField::F(grid.time(k))];
        fields.extend(traj.state(k).iter().map(|&v| CsvField::F(v)));
        csv.row(&fields);
    }
    csv.finish()
}

/// Steering path: `t,rho_norm,phi_norm` rows.
pub fn control_path_csv(path: &ControlOdePath) -> String {
    let mut csv = CsvBuilder::new(&["t", "rho_norm", "phi_norm"]);
    for k in 0..path.times.len() {
        csv.row(&[
            CsvField::F(path.times[k]),
            CsvField::F(path.rho_norm[k]),
            CsvField::F(path.phi_norm[k]),
        ]);
    }
    csv.finish()
}

/// Tabulated oracle density: `x,pi` rows (empirical oracles only).
pub fn oracle_csv(oracle: &OracleDensity) -> Option<String> {
    let (lo, step, values) = oracle.grid()?;
    let mut csv = CsvBuilder::new(&["x", "pi"]);
    for (i, &v) in values.iter().enumerate() {
        csv.row(&[CsvField::F(lo + i as f64 * step), CsvField::F(v)]);
    }
    Some(csv.finish())
}

/// Writes `content` to `path` atomically (temporary sibling + rename).
pub fn write_text_atomic(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, content)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Serializes pretty JSON with a trailing newline and writes it atomically.
pub fn write_json_atomic<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text_atomic(path, &text)
}

pub fn sha256_hex(text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn unix_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

/// Outcome of one internal check within a run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// Self-describing record of a completed run: the resolved configuration
/// (replayable as-is), its hash, seed, version, timing, outputs and check
/// verdicts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    /// Fully-resolved configuration, as TOML text.
    pub resolved_config: String,
    /// SHA-256 of `resolved_config`.
    pub config_sha256: String,
    pub base_seed: u64,
    pub tool_version: String,
    pub started_unix_ms: u64,
    pub finished_unix_ms: u64,
    /// Files this run wrote, relative to the output directory.
    pub outputs: Vec<String>,
    pub checks: Vec<CheckOutcome>,
}

impl RunManifest {
    pub fn new(subcommand: &str, config: &Config, base_seed: u64) -> Result<Self> {
        let resolved_config = config.to_toml_string()?;
        let config_sha256 = sha256_hex(&resolved_config);
        Ok(RunManifest {
            subcommand: subcommand.to_string(),
            resolved_config,
            config_sha256,
            base_seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            started_unix_ms: unix_ms(),
            finished_unix_ms: 0,
            outputs: Vec::new(),
            checks: Vec::new(),
        })
    }

    pub fn record_output(&mut self, name: impl Into<String>) {
        self.outputs.push(name.into());
    }

    pub fn record_check(&mut self, name: impl Into<String>, pass: bool, detail: impl Into<String>) {
        self.checks.push(CheckOutcome { name: name.into(), pass, detail: detail.into() });
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Stamps the end time and writes the manifest atomically.
    pub fn finalize_and_write(mut self, path: &Path) -> Result<Self> {
        self.finished_unix_ms = unix_ms();
        write_json_atomic(path, &self)?;
        Ok(self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let manifest: RunManifest = serde_json::from_str(&text)?;
        if sha256_hex(&manifest.resolved_config) != manifest.config_sha256 {
            return Err(Error::Config(format!(
                "manifest {} embeds a config that does not match its recorded hash",
                path.display()
            )));
        }
        Ok(manifest)
    }

    /// The embedded configuration, reparsed.
    pub fn config(&self) -> Result<Config> {
        Config::from_toml_str(&self.resolved_config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips_bitwise() {
        for &x in &[0.1, 1.0 / 3.0, -2.5e-10, 1.0e300, 5.551115123125783e-17, 2048f64.powf(-1.0 / 6.0)] {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{x} -> {s} -> {back}");
        }
    }

    #[test]
    fn csv_uses_unix_line_endings_and_fixed_arity() {
        let mut csv = CsvBuilder::new(&["a", "b"]);
        csv.row(&[CsvField::F(0.5), CsvField::I(3)]);
        let text = csv.finish();
        assert_eq!(text, "a,b\n5.0000000000000000e-1,3\n");
        assert!(!text.contains('\r'));
    }

    #[test]
    #[should_panic(expected = "arity")]
    fn csv_arity_mismatch_panics() {
        let mut csv = CsvBuilder::new(&["a", "b"]);
        csv.row(&[CsvField::I(1)]);
    }

    #[test]
    fn sha256_matches_known_vector() {
        assert_eq!(
            sha256_hex(""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn atomic_write_replaces_and_cleans_up() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("table.csv");
        write_text_atomic(&path, "first\n").unwrap();
        write_text_atomic(&path, "second\n").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "second\n");
        let leftovers: Vec<_> = std::fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .filter(|n| n.ends_with(".tmp"))
            .collect();
        assert!(leftovers.is_empty(), "temporary files left behind: {leftovers:?}");
    }

    #[test]
    fn manifest_round_trip_and_hash_check() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.json");
        let config = Config::default();
        let mut manifest = RunManifest::new("mse-rates", &config, 42).unwrap();
        manifest.record_output("samples.csv");
        manifest.record_check("slope", true, "-0.61");
        manifest.record_check("monotone", false, "one inversion");
        assert!(!manifest.all_passed());
        let written = manifest.finalize_and_write(&path).unwrap();
        assert!(written.finished_unix_ms >= written.started_unix_ms);
        let loaded = RunManifest::load(&path).unwrap();
        assert_eq!(loaded.config_sha256, written.config_sha256);
        assert_eq!(loaded.config().unwrap(), config);
        assert_eq!(loaded.outputs, vec!["samples.csv".to_string()]);

        // Tampering with the embedded config is detected.
        let mut tampered: RunManifest = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        tampered.resolved_config.push_str("\n# edited\n");
        let bad = dir.path().join("tampered.json");
        write_json_atomic(&bad, &tampered).unwrap();
        assert!(RunManifest::load(&bad).is_err());
    }
}
