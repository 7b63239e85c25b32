//! Run configuration in TOML (`[section]` headers with `key = value` lines).
//! Unknown keys are rejected by the parser and the message names the key.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::{BoundarySpec, Model, Subspace};
use crate::error::{BeamError, Result};
use crate::init::InitSpec;
use crate::material::MaterialParams;
use crate::state::Grid;
use crate::statics::{preset_model, StaticBVPSpec, TipTarget};

fn one() -> usize {
    1
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n_nodes: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    /// Fixed step; mutually exclusive with `cfl`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Step as a fraction of `ds / c_max`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cfl: Option<f64>,
    pub t_end: f64,
    #[serde(default = "one")]
    pub output_stride: usize,
}

impl TimeConfig {
    pub fn dt_for(&self, model: &Model) -> f64 {
        match (self.dt, self.cfl) {
            (Some(dt), _) => dt,
            (None, Some(c)) => c * model.cfl_dt(),
            (None, None) => model.max_stable_dt(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, reason: String| Err(BeamError::InvalidKey { key: format!("time.{key}"), reason });
        if self.dt.is_some() && self.cfl.is_some() {
            return bad("dt", "give either `dt` or `cfl`, not both".into());
        }
        if let Some(dt) = self.dt {
            if !(dt.is_finite() && dt > 0.0) {
                return bad("dt", format!("must be positive, got {dt}"));
            }
        }
        if let Some(c) = self.cfl {
            if !(c.is_finite() && c > 0.0) {
                return bad("cfl", format!("must be positive, got {c}"));
            }
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return bad("t_end", format!("must be positive, got {}", self.t_end));
        }
        if self.output_stride == 0 {
            return bad("output_stride", "must be at least 1".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// Named special case; supplies defaults for `subspace` and
    /// `rigidity_floor`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subspace: Option<Subspace>,
    /// Scale applied to the shear rigidities and all of `H`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rigidity_floor: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directory: Option<String>,
    #[serde(default = "default_formats")]
    pub formats: Vec<String>,
}

fn default_formats() -> Vec<String> {
    vec!["csv".into()]
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { directory: None, formats: default_formats() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StaticMode {
    Ivp,
    Shoot,
}

/// `[static]` block: root strains for `ivp`, or a tip target (with the root
/// strains as starting guess) for `shoot`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StaticConfig {
    pub mode: StaticMode,
    #[serde(default)]
    pub eps0: [f64; 3],
    #[serde(default)]
    pub kappa0: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<TipTarget>,
}

impl StaticConfig {
    pub fn bvp(&self) -> Result<StaticBVPSpec> {
        let target = self.target.ok_or_else(|| BeamError::InvalidKey {
            key: "static.target".into(),
            reason: "shooting needs a tip target".into(),
        })?;
        Ok(StaticBVPSpec { target, guess_eps0: self.eps0.into(), guess_kappa0: self.kappa0.into() })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(default)]
    pub material: MaterialParams,
    pub grid: GridConfig,
    #[serde(default)]
    pub bc: BoundarySpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<TimeConfig>,
    #[serde(default)]
    pub init: InitSpec,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, rename = "static", skip_serializing_if = "Option::is_none")]
    pub statics: Option<StaticConfig>,
}

impl SimConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: SimConfig = toml::from_str(text).map_err(|e| BeamError::Config(e.message().to_string()))?;
        cfg.validate_common()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        SimConfig::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configuration is always serializable")
    }

    /// Checks shared by every command.
    pub fn validate_common(&self) -> Result<()> {
        self.material.validate()?;
        Grid::new(self.grid.n_nodes, self.material.length)?;
        self.init.validate()?;
        if let Some(t) = &self.time {
            t.validate()?;
        }
        if let Some(f) = self.model.rigidity_floor {
            if !(f.is_finite() && f > 0.0 && f <= 1.0) {
                return Err(BeamError::InvalidKey {
                    key: "model.rigidity_floor".into(),
                    reason: format!("must lie in (0, 1], got {f}"),
                });
            }
        }
        if let Some(name) = &self.model.preset {
            preset_model(name).map_err(|_| BeamError::InvalidKey {
                key: "model.preset".into(),
                reason: format!("unknown preset `{name}`"),
            })?;
        }
        for f in &self.output.formats {
            if f != "csv" {
                return Err(BeamError::InvalidKey {
                    key: "output.formats".into(),
                    reason: format!("unsupported format `{f}`"),
                });
            }
        }
        Ok(())
    }

    /// Full validation for a dynamic run.
    pub fn validate(&self) -> Result<()> {
        self.validate_common()?;
        self.time()?;
        Ok(())
    }

    pub fn time(&self) -> Result<&TimeConfig> {
        self.time
            .as_ref()
            .ok_or_else(|| BeamError::InvalidKey { key: "time".into(), reason: "section is required".into() })
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid.n_nodes, self.material.length)
    }

    pub fn subspace(&self) -> Subspace {
        let preset = self.model.preset.as_deref().and_then(|p| preset_model(p).ok());
        self.model.subspace.or(preset.map(|p| p.subspace)).unwrap_or_default()
    }

    pub fn rigidity_floor(&self) -> Option<f64> {
        let preset = self.model.preset.as_deref().and_then(|p| preset_model(p).ok());
        self.model.rigidity_floor.or(preset.and_then(|p| p.rigidity_floor))
    }

    pub fn model(&self) -> Result<Model> {
        let mut tensors = self.material.tensors();
        if let Some(f) = self.rigidity_floor() {
            tensors = tensors.string_limit(f);
        }
        Ok(Model::new(self.grid()?, tensors, self.bc).with_subspace(self.subspace()))
    }
}
