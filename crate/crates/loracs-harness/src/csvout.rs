//! CSV emission with a provenance header.
//!
//! Every result file opens with `#` comment lines recording the tool
//! version, experiment kind, config digest, and master seed, so a CSV is
//! reproducible from its own header. All floats are written with `{:.6}`
//! and rows are emitted in deterministic order: identical config + seed
//! ⇒ byte-identical file. Wall time deliberately goes to stderr, never
//! into the CSV.

use crate::config::ExperimentConfig;
use std::io::Write;
use std::path::Path;

/// One grid cell's outcome. `scheme`/`kind` are empty for experiments
/// where they do not apply; `prr` is `None` for symbol-level cells.
#[derive(Debug, Clone)]
pub struct MetricRow {
    pub sf: u32,
    pub snr_db: f64,
    pub alpha: f64,
    pub m_total: usize,
    pub g: usize,
    pub scheme: String,
    pub kind: String,
    pub sync: bool,
    pub trials: usize,
    pub errors: usize,
    pub ser: f64,
    pub prr: Option<f64>,
    /// Seconds spent on the cell; reported on stderr only (kept out of
    /// the CSV so reruns stay byte-identical).
    pub wall_time: f64,
}

impl MetricRow {
    pub const HEADER: &'static str =
        "sf,snr_db,alpha,m_total,g,scheme,kind,sync,trials,errors,ser,prr";

    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{:.6},{:.6},{},{},{},{},{},{},{},{:.6},{}",
            self.sf,
            self.snr_db,
            self.alpha,
            self.m_total,
            self.g,
            self.scheme,
            self.kind,
            self.sync,
            self.trials,
            self.errors,
            self.ser,
            match self.prr {
                Some(p) => format!("{p:.6}"),
                None => String::new(),
            }
        )
    }
}

/// Renders a full report: provenance comments, header, rows.
pub fn render(kind: &str, config: &ExperimentConfig, header: &str, lines: &[String]) -> String {
    let mut out = String::new();
    out.push_str(&format!("# loracs-harness v{}\n", env!("CARGO_PKG_VERSION")));
    out.push_str(&format!("# experiment: {kind}\n"));
    out.push_str(&format!("# config-sha256: {}\n", config.digest()));
    out.push_str(&format!("# seed: {}\n", config.seed));
    out.push_str(header);
    out.push('\n');
    for line in lines {
        out.push_str(line);
        out.push('\n');
    }
    out
}

/// Writes a rendered report to the configured destination (file or
/// stdout).
pub fn emit(rendered: &str, out: Option<&Path>) -> std::io::Result<()> {
    match out {
        Some(path) => {
            if let Some(parent) = path.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent)?;
                }
            }
            std::fs::write(path, rendered)
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(rendered.as_bytes())?;
            lock.flush()
        }
    }
}
