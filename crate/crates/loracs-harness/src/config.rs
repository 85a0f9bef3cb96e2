//! Experiment configuration: TOML file + CLI overrides + validation.
//!
//! Config errors are surfaced as [`ConfigError`] so the binary can map
//! them to exit code 2, distinct from runtime I/O failures.

use loracs::cs::{RatioPolicy, PHI_CHUNK};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

/// Which study an invocation runs; fixes which config fields are honored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    SerGrid,
    Prr,
    Joint,
    Sparsity,
    BaselineLossless,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::SerGrid => "ser-grid",
            Self::Prr => "prr",
            Self::Joint => "joint",
            Self::Sparsity => "sparsity",
            Self::BaselineLossless => "baseline-lossless",
        }
    }

    /// SER-style Monte-Carlo cells must not be undersampled.
    fn needs_min_trials(&self) -> bool {
        matches!(self, Self::SerGrid | Self::Prr | Self::Joint)
    }
}

/// Compression-ratio selection: a named policy or an explicit M/N list.
#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(untagged)]
pub enum RatioSpec {
    /// `"table"` (paper lookup) or `"formula"` (closed form).
    Named(String),
    /// Explicit M/N fractions, e.g. `[0.0625, 0.125, 0.25]`.
    List(Vec<f64>),
}

impl Default for RatioSpec {
    fn default() -> Self {
        Self::Named("table".to_string())
    }
}

impl RatioSpec {
    /// Policy for named specs (`None` for explicit lists).
    pub fn policy(&self, sync: bool) -> Option<RatioPolicy> {
        match self {
            Self::Named(n) if n == "table" => Some(RatioPolicy::table(sync)),
            Self::Named(n) if n == "formula" => Some(RatioPolicy::formula(sync)),
            _ => None,
        }
    }

    fn validate(&self) -> Result<(), ConfigError> {
        match self {
            Self::Named(n) if n == "table" || n == "formula" => Ok(()),
            Self::Named(n) => Err(ConfigError(format!(
                "ratio must be \"table\", \"formula\", or a list of M/N fractions; got \"{n}\""
            ))),
            Self::List(fracs) => {
                if fracs.is_empty() {
                    return Err(ConfigError("ratio list is empty".into()));
                }
                for &f in fracs {
                    if !(f > 0.0 && f <= 1.0) {
                        return Err(ConfigError(format!("ratio fraction {f} outside (0, 1]")));
                    }
                    let m = f * PHI_CHUNK as f64;
                    let rounded = m.round() as usize;
                    if (m - rounded as f64).abs() > 1e-9
                        || rounded == 0
                        || !rounded.is_power_of_two()
                    {
                        return Err(ConfigError(format!(
                            "ratio fraction {f} implies {m} measurements per {PHI_CHUNK}-chunk; \
                             must be a power of two ≥ 1"
                        )));
                    }
                }
                Ok(())
            }
        }
    }
}

/// Profile treatment during joint fusion; mirrors
/// [`loracs::fusion::FusionMode`] with serde support.
#[derive(Debug, Clone, Copy, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum FusionKind {
    Normalized,
    Raw,
}

impl From<FusionKind> for loracs::fusion::FusionMode {
    fn from(k: FusionKind) -> Self {
        match k {
            FusionKind::Normalized => Self::Normalized,
            FusionKind::Raw => Self::Raw,
        }
    }
}

/// Full experiment description. Every field has a default, so an empty
/// config file (or none at all) is runnable.
#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Spreading factors to sweep.
    pub sf: Vec<u32>,
    /// SNR grid in dB.
    pub snr_db: Vec<f64>,
    /// Compression-ratio selection (named policy or explicit M/N list).
    pub ratio: RatioSpec,
    /// Synchronized (τ=0) or unsynchronized (uniform random τ) reception.
    pub sync: bool,
    /// Monte-Carlo trials per cell (symbols for SER, packets for PRR).
    pub trials: usize,
    /// Symbols per packet for PRR-style experiments.
    pub packet_len: usize,
    /// Per-gateway SNR sets for joint experiments; each inner list is one
    /// operating point, its length is G.
    pub gateway_snr_db: Vec<Vec<f64>>,
    /// Weighting schemes to evaluate (keys in the weighting registry).
    pub schemes: Vec<String>,
    /// Use ground-truth SNR for weights instead of the residual estimator.
    pub oracle_snr: bool,
    /// Sparse solver backend (key in the solver registry).
    pub solver: String,
    /// Sparsity budget per recovery.
    pub k_max: usize,
    /// Joint-fusion profile treatment.
    pub fusion: FusionKind,
    /// Seed for the shared ±1 measurement matrix.
    pub phi_seed: u64,
    /// Master seed for all Monte-Carlo draws.
    pub seed: u64,
    /// CSV destination; stdout when absent.
    pub out: Option<PathBuf>,
    /// Optional per-trial joint-decode trace CSV.
    pub trace_out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            sf: vec![7, 8, 9, 10],
            snr_db: vec![-6.0, 0.0, 6.0],
            ratio: RatioSpec::default(),
            sync: true,
            trials: 2000,
            packet_len: 8,
            gateway_snr_db: vec![vec![-4.0, -5.0, -5.0, -6.0]],
            schemes: vec!["egc".into(), "sqrt".into(), "mrc".into(), "snr2".into()],
            oracle_snr: true,
            solver: "omp".into(),
            k_max: 4,
            fusion: FusionKind::Normalized,
            phi_seed: 42,
            seed: 7,
            out: None,
            trace_out: None,
        }
    }
}

/// CLI flag overrides applied on top of the loaded config.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub sf: Option<Vec<u32>>,
    pub snr_db: Option<Vec<f64>>,
    pub ratio: Option<RatioSpec>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Loads a TOML config file.
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
    }

    pub fn apply(mut self, o: &Overrides) -> Self {
        if let Some(sf) = &o.sf {
            self.sf = sf.clone();
        }
        if let Some(snr) = &o.snr_db {
            self.snr_db = snr.clone();
        }
        if let Some(ratio) = &o.ratio {
            self.ratio = ratio.clone();
        }
        if let Some(trials) = o.trials {
            self.trials = trials;
        }
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(out) = &o.out {
            self.out = Some(out.clone());
        }
        self
    }

    pub fn validate(&self, kind: ExperimentKind) -> Result<(), ConfigError> {
        if self.sf.is_empty() {
            return Err(ConfigError("sf list is empty".into()));
        }
        for &sf in &self.sf {
            if !(7..=10).contains(&sf) {
                return Err(ConfigError(format!("sf {sf} outside 7..=10")));
            }
        }
        if self.snr_db.is_empty() {
            return Err(ConfigError("snr_db list is empty".into()));
        }
        self.ratio.validate()?;
        if kind.needs_min_trials() && self.trials < 100 {
            return Err(ConfigError(format!(
                "{} needs trials ≥ 100 (got {}): SER cells would be undersampled",
                kind.name(),
                self.trials
            )));
        }
        if self.trials == 0 {
            return Err(ConfigError("trials must be ≥ 1".into()));
        }
        if self.packet_len == 0 {
            return Err(ConfigError("packet_len must be ≥ 1".into()));
        }
        if self.k_max == 0 {
            return Err(ConfigError("k_max must be ≥ 1".into()));
        }
        let solvers = loracs::recovery::SolverRegistry::default();
        if solvers.create(&self.solver).is_none() {
            return Err(ConfigError(format!(
                "unknown solver \"{}\"; available: {}",
                self.solver,
                solvers.names().join(", ")
            )));
        }
        let weightings = loracs::fusion::WeightingRegistry::default();
        for s in &self.schemes {
            if weightings.create(s).is_none() {
                return Err(ConfigError(format!(
                    "unknown weighting scheme \"{s}\"; available: {}",
                    weightings.names().join(", ")
                )));
            }
        }
        if kind == ExperimentKind::Joint {
            if self.gateway_snr_db.is_empty() {
                return Err(ConfigError("joint experiment needs gateway_snr_db".into()));
            }
            for set in &self.gateway_snr_db {
                if set.is_empty() {
                    return Err(ConfigError("gateway SNR set is empty".into()));
                }
            }
            if self.schemes.is_empty() {
                return Err(ConfigError("joint experiment needs at least one scheme".into()));
            }
        }
        Ok(())
    }

    /// Stable hash of the resolved config, recorded in CSV headers so a
    /// result file pins the exact inputs that produced it. Output paths
    /// are redacted: where a CSV lands must not change its bytes.
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        let redacted = Self { out: None, trace_out: None, ..self.clone() };
        let text = toml::to_string(&redacted).expect("config serializes");
        let hash = Sha256::digest(text.as_bytes());
        let mut hex = String::with_capacity(16);
        for b in &hash[..8] {
            hex.push_str(&format!("{b:02x}"));
        }
        hex
    }
}

/// Parses a `--ratio` flag value: named policy or comma-separated floats.
pub fn parse_ratio_flag(s: &str) -> Result<RatioSpec, String> {
    let spec = if s == "table" || s == "formula" {
        RatioSpec::Named(s.to_string())
    } else {
        let fracs: Result<Vec<f64>, _> = s.split(',').map(|p| p.trim().parse::<f64>()).collect();
        RatioSpec::List(fracs.map_err(|e| format!("bad ratio list \"{s}\": {e}"))?)
    };
    spec.validate().map_err(|e| e.0)?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_validates_for_all_kinds() {
        let cfg = ExperimentConfig::default();
        for kind in [
            ExperimentKind::SerGrid,
            ExperimentKind::Prr,
            ExperimentKind::Joint,
            ExperimentKind::Sparsity,
            ExperimentKind::BaselineLossless,
        ] {
            cfg.validate(kind).unwrap();
        }
    }

    #[test]
    fn toml_round_trip_preserves_config() {
        let cfg = ExperimentConfig::default();
        let text = toml::to_string(&cfg).unwrap();
        let back: ExperimentConfig = toml::from_str(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn rejects_non_power_of_two_ratio() {
        let cfg = ExperimentConfig {
            ratio: RatioSpec::List(vec![0.3]),
            ..Default::default()
        };
        assert!(cfg.validate(ExperimentKind::SerGrid).is_err());
    }

    #[test]
    fn accepts_power_of_two_ratios() {
        for f in [1.0 / 128.0, 1.0 / 16.0, 0.125, 0.25, 0.5, 1.0] {
            let cfg = ExperimentConfig {
                ratio: RatioSpec::List(vec![f]),
                ..Default::default()
            };
            cfg.validate(ExperimentKind::SerGrid).unwrap();
        }
    }

    #[test]
    fn rejects_undersampled_ser_cells() {
        let cfg = ExperimentConfig { trials: 99, ..Default::default() };
        assert!(cfg.validate(ExperimentKind::SerGrid).is_err());
        // Sparsity has no SER cells, so small trial counts are fine.
        cfg.validate(ExperimentKind::Sparsity).unwrap();
    }

    #[test]
    fn rejects_unknown_solver_and_scheme() {
        let cfg = ExperimentConfig { solver: "lasso".into(), ..Default::default() };
        assert!(cfg.validate(ExperimentKind::SerGrid).is_err());
        let cfg = ExperimentConfig {
            schemes: vec!["mmse".into()],
            ..Default::default()
        };
        assert!(cfg.validate(ExperimentKind::Joint).is_err());
    }

    #[test]
    fn rejects_out_of_range_sf() {
        let cfg = ExperimentConfig { sf: vec![11], ..Default::default() };
        assert!(cfg.validate(ExperimentKind::SerGrid).is_err());
    }

    #[test]
    fn ratio_flag_parses_names_and_lists() {
        assert_eq!(parse_ratio_flag("table").unwrap(), RatioSpec::Named("table".into()));
        assert_eq!(
            parse_ratio_flag("0.25, 0.5").unwrap(),
            RatioSpec::List(vec![0.25, 0.5])
        );
        assert!(parse_ratio_flag("0.3").is_err());
        assert!(parse_ratio_flag("huffman").is_err());
    }

    #[test]
    fn digest_is_stable_and_sensitive() {
        let a = ExperimentConfig::default();
        let b = ExperimentConfig::default();
        assert_eq!(a.digest(), b.digest());
        let c = ExperimentConfig { seed: 8, ..Default::default() };
        assert_ne!(a.digest(), c.digest());
        assert_eq!(a.digest().len(), 16);
    }

    #[test]
    fn overrides_apply_on_top_of_defaults() {
        let cfg = ExperimentConfig::default().apply(&Overrides {
            sf: Some(vec![9]),
            trials: Some(500),
            seed: Some(11),
            ..Default::default()
        });
        assert_eq!(cfg.sf, vec![9]);
        assert_eq!(cfg.trials, 500);
        assert_eq!(cfg.seed, 11);
        assert_eq!(cfg.snr_db, vec![-6.0, 0.0, 6.0]);
    }
}
