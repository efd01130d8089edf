//! Gate configuration and the flat `key = value` text format used by config files.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Weights of the three proxy terms. All dimensionless and nonnegative.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostCoefficients {
    pub alpha_struct: f64,
    pub alpha_curv: f64,
    pub alpha_logic: f64,
    pub beta_logic: f64,
}

impl Default for CostCoefficients {
    fn default() -> Self {
        Self {
            alpha_struct: 1.0,
            alpha_curv: 0.25,
            alpha_logic: 0.5,
            beta_logic: 0.5,
        }
    }
}

impl CostCoefficients {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("alpha_struct", self.alpha_struct),
            ("alpha_curv", self.alpha_curv),
            ("alpha_logic", self.alpha_logic),
            ("beta_logic", self.beta_logic),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Config(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationConfig {
    /// Percentile of the observed cost landscape, in [50, 100).
    pub percentile_p: f64,
    pub delta_margin: f64,
    pub tau_min: f64,
    pub tau_max: f64,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            percentile_p: 95.0,
            delta_margin: 0.1,
            tau_min: 0.05,
            tau_max: 3.0,
        }
    }
}

impl CalibrationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(50.0..100.0).contains(&self.percentile_p) {
            return Err(Error::Config(format!(
                "percentile_p must lie in [50, 100), got {}",
                self.percentile_p
            )));
        }
        if !self.delta_margin.is_finite() || self.delta_margin < 0.0 {
            return Err(Error::Config(format!(
                "delta_margin must be finite and >= 0, got {}",
                self.delta_margin
            )));
        }
        if !(self.tau_min > 0.0 && self.tau_min < self.tau_max && self.tau_max.is_finite()) {
            return Err(Error::Config(format!(
                "need 0 < tau_min < tau_max < inf, got tau_min={} tau_max={}",
                self.tau_min, self.tau_max
            )));
        }
        Ok(())
    }
}

/// Which residual feeds the geometric cost.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResidualMode {
    /// Norm of the deviation outside the fitted subspace.
    Euclid,
    /// Precision-weighted norm of the full deviation from the window mean.
    #[default]
    Mahalanobis,
}

impl FromStr for ResidualMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "euclid" | "euclidean" => Ok(Self::Euclid),
            "mahalanobis" => Ok(Self::Mahalanobis),
            other => Err(Error::Config(format!("unknown residual mode {other:?}"))),
        }
    }
}

impl fmt::Display for ResidualMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Euclid => "euclid",
            Self::Mahalanobis => "mahalanobis",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometryConfig {
    /// Fraction of eigenvalue mass the retained subspace must reach.
    pub energy_fraction: f64,
    /// Precision regularizer relative to the mean eigenvalue.
    pub eig_epsilon_rel: f64,
    pub max_rank: usize,
    pub residual_mode: ResidualMode,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            energy_fraction: 0.95,
            eig_epsilon_rel: 1e-3,
            max_rank: 8,
            residual_mode: ResidualMode::Mahalanobis,
        }
    }
}

impl GeometryConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.energy_fraction > 0.0 && self.energy_fraction <= 1.0) {
            return Err(Error::Config(format!(
                "energy_fraction must lie in (0, 1], got {}",
                self.energy_fraction
            )));
        }
        if !(self.eig_epsilon_rel > 0.0 && self.eig_epsilon_rel.is_finite()) {
            return Err(Error::Config(format!(
                "eig_epsilon_rel must be positive, got {}",
                self.eig_epsilon_rel
            )));
        }
        if self.max_rank == 0 {
            return Err(Error::Config("max_rank must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateConfig {
    /// Number of most recent context statements used for geometry and logic.
    pub window_w: usize,
    pub coefficients: CostCoefficients,
    pub calibration: CalibrationConfig,
    pub geometry: GeometryConfig,
    /// Lower bound on each proxy's standard deviation before inversion.
    pub sigma_floor: f64,
}

impl Default for GateConfig {
    fn default() -> Self {
        Self {
            window_w: 10,
            coefficients: CostCoefficients::default(),
            calibration: CalibrationConfig::default(),
            geometry: GeometryConfig::default(),
            sigma_floor: 1.0,
        }
    }
}

/// Every key understood by [`GateConfig::set`], in display order.
pub const GATE_KEYS: &[&str] = &[
    "window_w",
    "sigma_floor",
    "alpha_struct",
    "alpha_curv",
    "alpha_logic",
    "beta_logic",
    "percentile_p",
    "delta_margin",
    "tau_min",
    "tau_max",
    "energy_fraction",
    "eig_epsilon_rel",
    "max_rank",
    "residual_mode",
];

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("bad value for {key}: {value:?}")))
}

impl GateConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window_w < 2 {
            return Err(Error::Config(format!(
                "window_w must be >= 2, got {}",
                self.window_w
            )));
        }
        if !(self.sigma_floor > 0.0 && self.sigma_floor.is_finite()) {
            return Err(Error::Config(format!(
                "sigma_floor must be positive, got {}",
                self.sigma_floor
            )));
        }
        self.coefficients.validate()?;
        self.calibration.validate()?;
        self.geometry.validate()
    }

    /// Set one field by its flat key. Unknown keys are an error.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key.trim() {
            "window_w" => self.window_w = parse_num(key, value)?,
            "sigma_floor" => self.sigma_floor = parse_num(key, value)?,
            "alpha_struct" => self.coefficients.alpha_struct = parse_num(key, value)?,
            "alpha_curv" => self.coefficients.alpha_curv = parse_num(key, value)?,
            "alpha_logic" => self.coefficients.alpha_logic = parse_num(key, value)?,
            "beta_logic" => self.coefficients.beta_logic = parse_num(key, value)?,
            "percentile_p" => self.calibration.percentile_p = parse_num(key, value)?,
            "delta_margin" => self.calibration.delta_margin = parse_num(key, value)?,
            "tau_min" => self.calibration.tau_min = parse_num(key, value)?,
            "tau_max" => self.calibration.tau_max = parse_num(key, value)?,
            "energy_fraction" => self.geometry.energy_fraction = parse_num(key, value)?,
            "eig_epsilon_rel" => self.geometry.eig_epsilon_rel = parse_num(key, value)?,
            "max_rank" => self.geometry.max_rank = parse_num(key, value)?,
            "residual_mode" => self.geometry.residual_mode = value.parse()?,
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let c = &self.coefficients;
        let k = &self.calibration;
        let g = &self.geometry;
        vec![
            ("window_w", self.window_w.to_string()),
            ("sigma_floor", self.sigma_floor.to_string()),
            ("alpha_struct", c.alpha_struct.to_string()),
            ("alpha_curv", c.alpha_curv.to_string()),
            ("alpha_logic", c.alpha_logic.to_string()),
            ("beta_logic", c.beta_logic.to_string()),
            ("percentile_p", k.percentile_p.to_string()),
            ("delta_margin", k.delta_margin.to_string()),
            ("tau_min", k.tau_min.to_string()),
            ("tau_max", k.tau_max.to_string()),
            ("energy_fraction", g.energy_fraction.to_string()),
            ("eig_epsilon_rel", g.eig_epsilon_rel.to_string()),
            ("max_rank", g.max_rank.to_string()),
            ("residual_mode", g.residual_mode.to_string()),
        ]
    }
}

/// Parse `key = value` lines. Blank lines and `#` comments are skipped.
/// Returns the pairs in file order together with their 1-based line numbers.
pub fn parse_kv(text: &str) -> Result<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
        out.push((i + 1, k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let cfg = GateConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.window_w, 10);
        assert_eq!(cfg.calibration.percentile_p, 95.0);
        assert_eq!(cfg.calibration.delta_margin, 0.1);
        assert_eq!(cfg.calibration.tau_min, 0.05);
        assert_eq!(cfg.calibration.tau_max, 3.0);
        assert_eq!(cfg.geometry.energy_fraction, 0.95);
        assert_eq!(cfg.geometry.eig_epsilon_rel, 1e-3);
        assert_eq!(cfg.geometry.max_rank, 8);
    }

    #[test]
    fn entries_round_trip_through_set() {
        let mut cfg = GateConfig {
            window_w: 7,
            ..Default::default()
        };
        cfg.coefficients.alpha_curv = 0.5;
        cfg.geometry.residual_mode = ResidualMode::Euclid;
        let mut rebuilt = GateConfig::default();
        for (k, v) in cfg.entries() {
            rebuilt.set(k, &v).unwrap();
        }
        assert_eq!(rebuilt, cfg);
        let keys: Vec<_> = cfg.entries().into_iter().map(|(k, _)| k).collect();
        assert_eq!(keys, GATE_KEYS);
    }

    #[test]
    fn rejects_bad_values() {
        let mut cfg = GateConfig::default();
        assert!(cfg.set("nope", "1").is_err());
        assert!(cfg.set("window_w", "ten").is_err());

        cfg.window_w = 1;
        assert!(cfg.validate().is_err());

        let mut cfg = GateConfig::default();
        cfg.calibration.tau_min = 4.0;
        assert!(cfg.validate().is_err());

        let mut cfg = GateConfig::default();
        cfg.coefficients.alpha_logic = -1.0;
        assert!(cfg.validate().is_err());

        let mut cfg = GateConfig::default();
        cfg.calibration.percentile_p = 100.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn kv_parsing() {
        let text = "# gate\nwindow_w = 12\n\n tau_max=2.5 # ceiling\n";
        let kv = parse_kv(text).unwrap();
        assert_eq!(
            kv,
            vec![
                (2, "window_w".to_string(), "12".to_string()),
                (4, "tau_max".to_string(), "2.5".to_string())
            ]
        );
        assert!(parse_kv("window_w 12").is_err());
    }
}
