//! Run configuration: a TOML file with `[model]`, `[sweep]`, `[numeric]`,
//! `[output]` and `[verify]` sections, each field overridable from the
//! command line.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use xxz_core::entanglement::Bipartition;
use xxz_core::limits::{all_global_bipartitions, all_reduced_bipartitions, log_grid, ScanOptions, VANISH_FLOOR};
use xxz_core::spinchain::Topology;
use xxz_core::MAX_SITES;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub n: usize,
    pub topology: Topology,
    /// Sign of the hopping coupling; only the sign matters in reduced units.
    pub v_sign: f64,
    /// Reduced fields `b/|v|`; every sweep runs once per entry.
    pub b_bar: Vec<f64>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig { n: 4, topology: Topology::CyclicNn, v_sign: 1.0, b_bar: vec![0.0] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeltaRange {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl DeltaRange {
    pub fn values(&self) -> Vec<f64> {
        match self.steps {
            0 => Vec::new(),
            1 => vec![self.start],
            k => (0..k)
                .map(|i| self.start + (self.stop - self.start) * i as f64 / (k - 1) as f64)
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridScale {
    Log,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// Explicit anisotropies; takes precedence over `delta_range`.
    pub deltas: Option<Vec<f64>>,
    pub delta_range: Option<DeltaRange>,
    /// Temperature grid for profiles, in units of `|v|`.
    pub t_min: f64,
    pub t_max: f64,
    pub t_points: usize,
    pub t_scale: GridScale,
    /// Labels such as `a-bc`, or the keywords `all-global` / `all-reduced`.
    pub partitions: Vec<String>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            deltas: None,
            delta_range: Some(DeltaRange { start: -3.0, stop: 1.5, steps: 46 }),
            t_min: 1e-3,
            t_max: 5.0,
            t_points: 200,
            t_scale: GridScale::Log,
            partitions: vec!["all-global".into()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NumericConfig {
    pub tol: f64,
    pub eps_neg: f64,
    pub vanish_floor: f64,
    /// Limit-temperature scans run on a log grid from `scan_min` up to this
    /// ceiling.
    pub t_ceiling: f64,
    pub scan_min: f64,
    pub scan_points: usize,
    /// Report reentry windows (full scan) instead of only the last crossing.
    pub reentry: bool,
}

impl Default for NumericConfig {
    fn default() -> Self {
        let s = ScanOptions::default();
        NumericConfig {
            tol: s.tol,
            eps_neg: s.eps_neg,
            vanish_floor: VANISH_FLOOR,
            t_ceiling: s.t_max,
            scan_min: s.t_min,
            scan_points: s.points,
            reentry: s.reentry,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("out"), formats: vec![Format::Csv] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    /// Largest chain used by the size-dependent checks.
    pub max_n: usize,
    /// Random draws per randomized check.
    pub samples: usize,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { max_n: 5, samples: 50, seed: 2024 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub sweep: SweepConfig,
    pub numeric: NumericConfig,
    pub output: OutputConfig,
    pub verify: VerifyConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        let m = &self.model;
        if !(2..=MAX_SITES).contains(&m.n) {
            return bad(format!("n = {} outside 2..={MAX_SITES}", m.n));
        }
        if !(m.v_sign == 1.0 || m.v_sign == -1.0) {
            return bad(format!("v_sign must be 1 or -1, got {}", m.v_sign));
        }
        if m.b_bar.is_empty() {
            return bad("empty b_bar list".into());
        }
        if m.b_bar.iter().any(|b| !b.is_finite()) {
            return bad("non-finite b_bar".into());
        }
        let deltas = self.deltas()?;
        if deltas.iter().any(|d| !d.is_finite()) {
            return bad("non-finite anisotropy".into());
        }
        let s = &self.sweep;
        if !(s.t_min > 0.0 && s.t_max >= s.t_min && s.t_max.is_finite()) {
            return bad(format!("invalid temperature range [{}, {}]", s.t_min, s.t_max));
        }
        if s.t_points == 0 {
            return bad("t_points must be at least 1".into());
        }
        self.partitions()?;
        let nu = &self.numeric;
        if !(nu.tol > 0.0) {
            return bad(format!("tol must be positive, got {}", nu.tol));
        }
        self.scan_options().validate().map_err(|e| CliError::Config(e.to_string()))?;
        if self.output.formats.is_empty() {
            return bad("no output formats".into());
        }
        if !(2..=MAX_SITES).contains(&self.verify.max_n) {
            return bad(format!("verify.max_n = {} outside 2..={MAX_SITES}", self.verify.max_n));
        }
        Ok(())
    }

    pub fn deltas(&self) -> Result<Vec<f64>, CliError> {
        let values = match (&self.sweep.deltas, &self.sweep.delta_range) {
            (Some(list), _) => list.clone(),
            (None, Some(range)) => range.values(),
            (None, None) => Vec::new(),
        };
        if values.is_empty() {
            return Err(CliError::Config("empty anisotropy list".into()));
        }
        Ok(values)
    }

    pub fn t_grid(&self) -> Vec<f64> {
        let s = &self.sweep;
        match s.t_scale {
            GridScale::Log => log_grid(s.t_min, s.t_max, s.t_points),
            GridScale::Linear => DeltaRange { start: s.t_min, stop: s.t_max, steps: s.t_points }.values(),
        }
    }

    /// Resolves keywords and labels into bipartitions, without duplicates.
    pub fn partitions(&self) -> Result<Vec<Bipartition>, CliError> {
        let n = self.model.n;
        let mut out: Vec<Bipartition> = Vec::new();
        for entry in &self.sweep.partitions {
            let found = match entry.as_str() {
                "all-global" => all_global_bipartitions(n),
                "all-reduced" => all_reduced_bipartitions(n),
                label => Bipartition::parse(label, n).map(|b| vec![b]),
            }
            .map_err(|e| CliError::Config(e.to_string()))?;
            for b in found {
                if !out.contains(&b) {
                    out.push(b);
                }
            }
        }
        if out.is_empty() {
            return Err(CliError::Config("no partitions".into()));
        }
        Ok(out)
    }

    pub fn scan_options(&self) -> ScanOptions {
        let nu = &self.numeric;
        ScanOptions {
            t_min: nu.scan_min,
            t_max: nu.t_ceiling,
            points: nu.scan_points,
            tol: nu.tol,
            eps_neg: nu.eps_neg,
            vanish_floor: nu.vanish_floor,
            reentry: nu.reentry,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn toml_round_trip() {
        let mut cfg = RunConfig::default();
        cfg.model.b_bar = vec![0.0, 0.5];
        cfg.sweep.deltas = Some(vec![-1.0, 0.25]);
        cfg.output.formats = vec![Format::Csv, Format::Json];
        assert_eq!(RunConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn partial_file_keeps_defaults() {
        let cfg = RunConfig::from_toml("[model]\nn = 3\ntopology = \"fully-connected\"\n").unwrap();
        assert_eq!(cfg.model.n, 3);
        assert_eq!(cfg.model.topology, Topology::FullyConnected);
        assert_eq!(cfg.sweep, SweepConfig::default());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(matches!(RunConfig::from_toml("[model]\nsites = 3\n"), Err(CliError::Config(_))));
    }

    #[test]
    fn explicit_deltas_win_over_range() {
        let mut cfg = RunConfig::default();
        cfg.sweep.deltas = Some(vec![0.5]);
        assert_eq!(cfg.deltas().unwrap(), vec![0.5]);
        cfg.sweep.deltas = Some(vec![]);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn range_endpoints_are_exact() {
        let r = DeltaRange { start: -3.0, stop: 1.5, steps: 46 };
        let v = r.values();
        assert_eq!(v.len(), 46);
        assert_eq!(v[0], -3.0);
        assert_eq!(v[45], 1.5);
    }

    #[test]
    fn keywords_expand_without_duplicates() {
        let mut cfg = RunConfig::default();
        cfg.model.n = 4;
        cfg.sweep.partitions = vec!["ab-cd".into(), "all-global".into()];
        let labels: Vec<String> = cfg.partitions().unwrap().iter().map(|b| b.label()).collect();
        assert_eq!(labels, ["ab-cd", "a-bcd", "ac-bd"]);
        cfg.sweep.partitions = vec!["ac-bd".into()];
        cfg.model.n = 3;
        assert!(cfg.partitions().is_err());
    }
}
