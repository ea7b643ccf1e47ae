//! JSON run configuration. Every section is optional and falls back to the
//! unit soft trap in natural units; unknown keys are rejected by path.

use std::path::{Path, PathBuf};

use ffgas_core::{Confinement, Frame, Regime, Trajectory, Units};
use serde::Deserialize;

#[derive(Debug)]
pub enum ConfigError {
    Io(PathBuf, std::io::Error),
    Parse(String),
    Invalid(String),
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Io(path, e) => write!(f, "cannot read {}: {e}", path.display()),
            Self::Parse(msg) | Self::Invalid(msg) => f.write_str(msg),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Kind {
    Soft,
    Hard,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    kind: Kind,
    omega0: Option<f64>,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            kind: Kind::Soft,
            omega0: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitsSection {
    hbar: f64,
    mass: f64,
    #[serde(rename = "kB")]
    kb: f64,
}

impl Default for UnitsSection {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            mass: 1.0,
            kb: 1.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectorySection {
    #[serde(rename = "L0")]
    l0: f64,
    v_bar: f64,
    #[serde(rename = "T_FF")]
    t_ff: f64,
}

impl Default for TrajectorySection {
    fn default() -> Self {
        Self {
            l0: 1.0,
            v_bar: 1.0,
            t_ff: 1.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GasSection {
    #[serde(rename = "N")]
    pub particles: u32,
    #[serde(rename = "T0")]
    pub t0: f64,
    #[serde(default = "auto")]
    pub regime: Regime,
}

fn auto() -> Regime {
    Regime::Auto
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub points: usize,
    pub x_max_factor: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            points: 4097,
            x_max_factor: ffgas_core::spectra::DEFAULT_WIDTH_FACTOR,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TdseSection {
    pub dt: f64,
    pub points: usize,
    pub wall_height: f64,
    pub frame: Frame,
}

impl Default for TdseSection {
    fn default() -> Self {
        Self {
            dt: 1e-4,
            points: 2048,
            wall_height: ffgas_core::tdse::DEFAULT_WALL_HEIGHT,
            frame: Frame::Fixed,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

/// Time samples and level range for `levels` and `eos`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub samples: usize,
    pub n_max: u32,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self { samples: 21, n_max: 10 }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: ModelSection,
    pub units: UnitsSection,
    pub trajectory: TrajectorySection,
    pub gas: Option<GasSection>,
    pub grid: GridSection,
    pub tdse: TdseSection,
    pub output: OutputSection,
    pub sweep: SweepSection,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(path.to_path_buf(), e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            ConfigError::Parse(format!("config error at `{path}`: {}", e.into_inner()))
        })?;
        config.check_finite()?;
        Ok(config)
    }

    fn check_finite(&self) -> Result<(), ConfigError> {
        let mut fields = vec![
            ("units.hbar", self.units.hbar),
            ("units.mass", self.units.mass),
            ("units.kB", self.units.kb),
            ("trajectory.L0", self.trajectory.l0),
            ("trajectory.v_bar", self.trajectory.v_bar),
            ("trajectory.T_FF", self.trajectory.t_ff),
            ("grid.x_max_factor", self.grid.x_max_factor),
            ("tdse.dt", self.tdse.dt),
            ("tdse.wall_height", self.tdse.wall_height),
        ];
        if let Some(w) = self.model.omega0 {
            fields.push(("model.omega0", w));
        }
        if let Some(g) = &self.gas {
            fields.push(("gas.T0", g.t0));
        }
        match fields.iter().find(|(_, v)| !v.is_finite()) {
            Some((name, v)) => Err(ConfigError::Invalid(format!(
                "config error at `{name}`: {v} is not finite"
            ))),
            None => Ok(()),
        }
    }

    pub fn units(&self) -> Result<Units, ffgas_core::Error> {
        Units::new(self.units.hbar, self.units.mass, self.units.kb)
    }

    /// The trap or box; a soft trap takes `ω₀` from the config when given,
    /// which must then agree with `L0`.
    pub fn confinement(&self) -> Result<Confinement, ffgas_core::Error> {
        let units = self.units()?;
        match (self.model.kind, self.model.omega0) {
            (Kind::Soft, Some(w)) => Confinement::soft(w, self.trajectory.l0, units),
            (Kind::Soft, None) => Confinement::soft_from_length(self.trajectory.l0, units),
            (Kind::Hard, None) => Ok(Confinement::hard_wall(units)),
            (Kind::Hard, Some(_)) => Err(ffgas_core::Error::UnsupportedModel {
                operation: "model.omega0",
                model: "hard",
            }),
        }
    }

    pub fn trajectory(&self) -> Result<Trajectory, ffgas_core::Error> {
        Trajectory::new(self.trajectory.l0, self.trajectory.v_bar, self.trajectory.t_ff)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_uses_defaults() {
        let c = RunConfig::parse("{}").unwrap();
        assert_eq!(c.confinement().unwrap().kind(), ffgas_core::ModelKind::Soft);
        assert!(c.gas.is_none());
        assert_eq!(c.sweep.samples, 21);
    }

    #[test]
    fn unknown_key_names_its_path() {
        let err = RunConfig::parse(r#"{"gas": {"N": 10, "T0": 1.0, "mu": 3}}"#).unwrap_err();
        assert!(err.to_string().contains("gas"), "{err}");
        assert!(err.to_string().contains("mu"), "{err}");
    }

    #[test]
    fn wrong_type_names_its_path() {
        let err = RunConfig::parse(r#"{"trajectory": {"L0": "one", "v_bar": 1, "T_FF": 1}}"#).unwrap_err();
        assert!(err.to_string().contains("trajectory.L0"), "{err}");
    }

    #[test]
    fn overflowing_number_is_rejected() {
        assert!(RunConfig::parse(r#"{"tdse": {"dt": 1e999}}"#).is_err());
    }

    #[test]
    fn inconsistent_omega_is_a_domain_error() {
        let c = RunConfig::parse(r#"{"model": {"kind": "soft", "omega0": 2.0}}"#).unwrap();
        assert!(c.confinement().is_err());
    }
}
