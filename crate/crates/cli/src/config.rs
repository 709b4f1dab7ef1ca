//! The run configuration: one JSON document, with dotted-path overrides.

use std::path::{Path, PathBuf};

use hle_core::asymptotics::WindowSpec;
use hle_core::evolve::EvolutionConfig;
use hle_core::params::{BoundaryPath, DEFAULT_EQ_TOL};
use hle_core::shooter::ShootConfig;
use hle_core::SystemParams;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Classify,
    Sweep,
    Steady,
    Asymptotics,
    Evolve,
    Plotdata,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Classify => "classify",
            Command::Sweep => "sweep",
            Command::Steady => "steady",
            Command::Asymptotics => "asymptotics",
            Command::Evolve => "evolve",
            Command::Plotdata => "plotdata",
        }
    }
}

/// Replace `params` by the point where the Joseph-Lundgren inequality turns
/// into an equality, with `params` as template.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JlBoundarySpec {
    pub path: BoundaryPath,
    pub bracket: (f64, f64),
}

/// `start, start + step, ...` up to `stop`. Empty when `stop < start`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Range {
    pub fn values(&self) -> Vec<f64> {
        if self.stop < self.start {
            return Vec::new();
        }
        let count = ((self.stop - self.start) / self.step * (1.0 + 1e-12)).floor() as usize + 1;
        (0..count).map(|i| self.start + i as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub p: Range,
    /// Without a `q` range the sweep runs along the diagonal `q = p`.
    pub q: Option<Range>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            p: Range {
                start: 2.0,
                stop: 10.0,
                step: 0.01,
            },
            q: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Perturbation {
    /// The decaying linearized pair `(φ, ψ)` at `max(r, 1)`.
    Linearized,
    /// Seeded random bumps.
    Bump,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveSettings {
    pub discretization: EvolutionConfig,
    /// Family member used as the steady reference.
    pub xi: f64,
    pub perturbation: Perturbation,
    /// Initial weighted norm of the perturbation.
    pub amplitude: f64,
    /// Allowed growth of the norm history over its initial value.
    pub growth_bound: f64,
    pub squeeze: bool,
    pub snapshots: bool,
}

impl Default for EvolveSettings {
    fn default() -> Self {
        Self {
            discretization: EvolutionConfig::default(),
            xi: 1.0,
            perturbation: Perturbation::Linearized,
            amplitude: 1e-3,
            growth_bound: 10.0,
            squeeze: true,
            snapshots: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub params: SystemParams,
    pub jl_boundary: Option<JlBoundarySpec>,
    /// Relative band within which a condition counts as an equality.
    pub eq_tol: f64,
    pub shoot: ShootConfig,
    pub window: WindowSpec,
    pub xi_family: Vec<f64>,
    /// Largest accepted relative error of the fitted decay rate.
    pub fit_tol: f64,
    pub evolve: EvolveSettings,
    pub sweep: SweepConfig,
    pub seed: u64,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: None,
            params: SystemParams::new(11, 0.0, 0.0, 7.0, 7.0).expect("valid default"),
            jl_boundary: None,
            eq_tol: DEFAULT_EQ_TOL,
            shoot: ShootConfig::default(),
            window: WindowSpec::default(),
            xi_family: vec![0.5, 1.0, 2.0],
            fit_tol: 0.05,
            evolve: EvolveSettings::default(),
            sweep: SweepConfig::default(),
            seed: 0,
            out: PathBuf::from("out"),
        }
    }
}

fn positive(name: &str, x: f64) -> Result<(), CliError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name} must be positive and finite, got {x}")))
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        positive("eq_tol", self.eq_tol)?;
        positive("shoot.tol", self.shoot.tol)?;
        positive("shoot.agree_tol", self.shoot.agree_tol)?;
        positive("fit_tol", self.fit_tol)?;
        positive("evolve.amplitude", self.evolve.amplitude)?;
        positive("evolve.growth_bound", self.evolve.growth_bound)?;
        positive("evolve.xi", self.evolve.xi)?;
        for &xi in &self.xi_family {
            positive("xi_family entry", xi)?;
        }
        positive("sweep.p.step", self.sweep.p.step)?;
        if let Some(q) = &self.sweep.q {
            positive("sweep.q.step", q.step)?;
        }
        if !(self.window.deficit_min > 0.0 && self.window.deficit_min < self.window.deficit_max) {
            return Err(CliError::Config("window needs 0 < deficit_min < deficit_max".into()));
        }
        self.evolve
            .discretization
            .validate(self.evolve.xi)
            .map_err(|e| CliError::Config(e.to_string()))?;
        Ok(())
    }

    /// Reads `path` (or starts from the defaults), applies `overrides` and
    /// validates the result.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, CliError> {
        let mut doc = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
                serde_json::from_str::<Value>(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
            }
            None => serde_json::to_value(RunConfig::default()).expect("default serializes"),
        };
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        let cfg: RunConfig = serde_json::from_value(doc).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Sets `KEY=VALUE`, where `KEY` is a dotted path. `VALUE` is read as JSON,
/// or taken as a plain string if it does not parse.
pub fn apply_override(doc: &mut Value, spec: &str) -> Result<(), CliError> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override {spec:?} is not KEY=VALUE")))?;
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(CliError::Config(format!("bad override key {key:?}")));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = doc;
    for part in key.split('.') {
        if node.is_null() {
            *node = Value::Object(Default::default());
        }
        node = match node {
            Value::Object(map) => map.entry(part).or_insert(Value::Null),
            _ => return Err(CliError::Config(format!("override {key:?} descends into a non-object"))),
        };
    }
    *node = value;
    Ok(())
}
