//! Scenario files: TOML with `grid`, `evolution`, `initial`, `refine`,
//! `outputs` and `physical` sections. See `configs/README.md` for the full
//! key reference.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use strobo_core::grid::{DEFAULT_LENGTH, DEFAULT_POINTS};
use strobo_core::soliton::MATCHED_GAUSSIAN_WIDTH;
use strobo_core::units::{Dimension, ExperimentalParams, PhysicalParams, Quantity, ATOMIC_MASS_UNIT};
use strobo_core::{KickModel, PhaseConvention, Preconditioner, RefinerOptions, Sampling};

/// A config problem, reported with the offending key.
#[derive(Debug, thiserror::Error)]
#[error("{key}: {message}")]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            key: key.into(),
            message: message.into(),
        }
    }
}

type Result<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub evolution: EvolutionSection,
    #[serde(default)]
    pub initial: InitialSection,
    #[serde(default)]
    pub refine: RefineSection,
    #[serde(default)]
    pub outputs: OutputSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub physical: Option<PhysicalSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub n_points: usize,
    pub length: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            n_points: DEFAULT_POINTS,
            length: DEFAULT_LENGTH,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Kicked,
    /// Kick-free baseline sampled every `sample_interval`.
    FreeReference,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct EvolutionSection {
    pub mode: Mode,
    /// Kick strength and period. When absent, derived from `[physical]`.
    pub epsilon: Option<f64>,
    pub n_kicks: usize,
    pub record: Sampling,
    pub kick_model: KickModel,
    /// Also evolve every Gaussian initial state without kicks.
    pub free_reference: bool,
    /// Sampling interval in free-reference mode; defaults to `epsilon`.
    pub sample_interval: Option<f64>,
}

impl Default for EvolutionSection {
    fn default() -> Self {
        Self {
            mode: Mode::Kicked,
            epsilon: None,
            n_kicks: 100,
            record: Sampling::KickInstants,
            kick_model: KickModel::Instantaneous,
            free_reference: false,
            sample_interval: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum StateKind {
    Gaussian,
    Phi0,
    Soliton,
    Refined,
    File,
}

impl StateKind {
    pub fn label(self) -> &'static str {
        match self {
            StateKind::Gaussian => "gaussian",
            StateKind::Phi0 => "phi0",
            StateKind::Soliton => "soliton",
            StateKind::Refined => "refined",
            StateKind::File => "file",
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum SnapshotFormat {
    Csv,
    Binary,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct InitialSection {
    pub states: Vec<StateKind>,
    pub velocity: f64,
    pub center: f64,
    pub gaussian_width: f64,
    /// Coefficients of the homogeneous first-order solutions. Non-zero
    /// values switch `soliton` to the numerically normalized family member.
    pub a: f64,
    pub b: f64,
    /// Snapshot file for the `file` state, relative to the config file.
    pub file: Option<PathBuf>,
    pub file_format: SnapshotFormat,
}

impl Default for InitialSection {
    fn default() -> Self {
        Self {
            states: vec![StateKind::Soliton],
            velocity: 0.0,
            center: 0.0,
            gaussian_width: MATCHED_GAUSSIAN_WIDTH,
            a: 0.0,
            b: 0.0,
            file: None,
            file_format: SnapshotFormat::Csv,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct RefineSection {
    pub seed: StateKind,
    pub max_iters: usize,
    pub mixing: f64,
    pub tol: f64,
    pub phase_convention: PhaseConvention,
    /// Spectral preconditioner floor; 0 disables the preconditioner.
    pub preconditioner_floor: f64,
    pub anderson_depth: usize,
}

impl Default for RefineSection {
    fn default() -> Self {
        let d = RefinerOptions::default();
        let floor = match d.preconditioner {
            Preconditioner::Spectral { floor } => floor,
            Preconditioner::None => 0.0,
        };
        Self {
            seed: StateKind::Soliton,
            max_iters: d.max_iters,
            mixing: d.mixing,
            tol: d.tol,
            phase_convention: d.phase_convention,
            preconditioner_floor: floor,
            anderson_depth: d.anderson_depth,
        }
    }
}

impl RefineSection {
    pub fn options(&self) -> RefinerOptions {
        RefinerOptions {
            max_iters: self.max_iters,
            mixing: self.mixing,
            tol: self.tol,
            phase_convention: self.phase_convention,
            preconditioner: if self.preconditioner_floor > 0.0 {
                Preconditioner::Spectral {
                    floor: self.preconditioner_floor,
                }
            } else {
                Preconditioner::None
            },
            anderson_depth: self.anderson_depth,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    /// Output directory, relative to the working directory. `--out` wins.
    pub dir: PathBuf,
    /// Snapshot every n-th kick instant; 0 disables snapshots.
    pub snapshot_every: usize,
    pub snapshot_format: SnapshotFormat,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            snapshot_every: 0,
            snapshot_format: SnapshotFormat::Csv,
        }
    }
}

/// Lab quantities as unit-tagged strings, e.g. `mass = "7.016 u"`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicalSection {
    pub mass: Option<String>,
    pub period: Option<String>,
    /// Direct kick strength; otherwise estimated from the four below.
    pub lambda: Option<String>,
    pub atom_count: Option<String>,
    pub scattering_length: Option<String>,
    pub transverse_length: Option<String>,
    pub kick_duration: Option<String>,
}

/// SI values resolved from a [`PhysicalSection`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedPhysical {
    pub mass: f64,
    pub period: f64,
    pub lambda: Option<f64>,
    pub experiment: Option<ExperimentalParams>,
}

fn quantity(key: &str, raw: &Option<String>, dim: Dimension) -> Result<Option<f64>> {
    raw.as_deref()
        .map(|s| {
            let v = Quantity::parse_as(s, dim).map_err(|e| ConfigError::new(format!("physical.{key}"), e.to_string()))?;
            if !(v.is_finite() && v > 0.0) {
                return Err(ConfigError::new(format!("physical.{key}"), "must be positive"));
            }
            Ok(v)
        })
        .transpose()
}

fn required(key: &str, v: Option<f64>) -> Result<f64> {
    v.ok_or_else(|| ConfigError::new(format!("physical.{key}"), "missing required key"))
}

impl PhysicalSection {
    pub fn resolve(&self) -> Result<ResolvedPhysical> {
        let mass = required("mass", quantity("mass", &self.mass, Dimension::Mass)?)?;
        let period = required("period", quantity("period", &self.period, Dimension::Time)?)?;
        let lambda = quantity("lambda", &self.lambda, Dimension::Diffusivity)?;
        let parts = [
            quantity("atom_count", &self.atom_count, Dimension::Dimensionless)?,
            quantity("scattering_length", &self.scattering_length, Dimension::Length)?,
            quantity("transverse_length", &self.transverse_length, Dimension::Length)?,
            quantity("kick_duration", &self.kick_duration, Dimension::Time)?,
        ];
        let experiment = match parts {
            [Some(n), Some(a_s), Some(a_perp), Some(dt)] => Some(ExperimentalParams {
                atom_count: n,
                scattering_length: a_s,
                transverse_length: a_perp,
                kick_duration: dt,
            }),
            [None, None, None, None] => None,
            _ => {
                let names = ["atom_count", "scattering_length", "transverse_length", "kick_duration"];
                let missing = names
                    .iter()
                    .zip(&parts)
                    .find(|(_, v)| v.is_none())
                    .map(|(n, _)| *n)
                    .unwrap_or("atom_count");
                return Err(ConfigError::new(
                    format!("physical.{missing}"),
                    "the kick-strength estimate needs atom_count, scattering_length, transverse_length and kick_duration",
                ));
            }
        };
        if lambda.is_none() && experiment.is_none() {
            return Err(ConfigError::new(
                "physical.lambda",
                "give lambda directly or the four experimental inputs",
            ));
        }
        Ok(ResolvedPhysical {
            mass,
            period,
            lambda,
            experiment,
        })
    }
}

impl ResolvedPhysical {
    /// `(lambda, estimated)`; the estimate is used only when no direct
    /// value was given.
    pub fn lambda(&self) -> strobo_core::Result<(f64, bool)> {
        match (self.lambda, &self.experiment) {
            (Some(l), _) => Ok((l, false)),
            (None, Some(e)) => Ok((strobo_core::units::lambda_from_experiment(e, self.mass)?, true)),
            (None, None) => unreachable!("checked in resolve"),
        }
    }

    pub fn params(&self) -> strobo_core::Result<PhysicalParams> {
        PhysicalParams::new(self.mass, self.lambda()?.0, self.period)
    }

    pub fn mass_in_u(&self) -> f64 {
        self.mass / ATOMIC_MASS_UNIT
    }
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let key = e
                .span()
                .and_then(|s| text.get(s))
                .map(|s| s.trim().to_owned())
                .unwrap_or_else(|| "config".into());
            ConfigError::new(key, e.message().to_owned())
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("--config", format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// The kick strength, from `evolution.epsilon` or `[physical]`.
    pub fn epsilon(&self) -> Result<f64> {
        if let Some(eps) = self.evolution.epsilon {
            return Ok(eps);
        }
        match &self.physical {
            Some(p) => {
                let params = p.resolve()?.params().map_err(|e| ConfigError::new("physical", e.to_string()))?;
                strobo_core::units::epsilon_from_physical(&params)
                    .map_err(|e| ConfigError::new("physical", e.to_string()))
            }
            None => Err(ConfigError::new(
                "evolution.epsilon",
                "missing; set it or provide a [physical] section",
            )),
        }
    }

    /// Time between recorded kick-instant rows.
    pub fn period(&self) -> Result<f64> {
        match self.evolution.mode {
            Mode::Kicked => self.epsilon(),
            Mode::FreeReference => match self.evolution.sample_interval {
                Some(dt) => Ok(dt),
                None => self.epsilon().map_err(|_| {
                    ConfigError::new(
                        "evolution.sample_interval",
                        "free-reference mode needs sample_interval or epsilon",
                    )
                }),
            },
        }
    }

    /// Checks everything needed by `run`.
    pub fn validate_run(&self) -> Result<()> {
        self.validate_grid()?;
        let ev = &self.evolution;
        if ev.n_kicks == 0 {
            return Err(ConfigError::new("evolution.n_kicks", "must be at least 1"));
        }
        let period = self.period()?;
        if !(period.is_finite() && period > 0.0) {
            let key = match ev.mode {
                Mode::Kicked => "evolution.epsilon",
                Mode::FreeReference => "evolution.sample_interval",
            };
            return Err(ConfigError::new(key, format!("must be positive, got {period}")));
        }
        if ev.mode == Mode::Kicked {
            ev.kick_model
                .validate(period)
                .map_err(|e| ConfigError::new("evolution.kick_model", e.to_string()))?;
        }
        let init = &self.initial;
        if init.states.is_empty() {
            return Err(ConfigError::new("initial.states", "list at least one state"));
        }
        for (key, v) in [("initial.velocity", init.velocity), ("initial.center", init.center), ("initial.a", init.a), ("initial.b", init.b)] {
            if !v.is_finite() {
                return Err(ConfigError::new(key, "must be finite"));
            }
        }
        if !(init.gaussian_width.is_finite() && init.gaussian_width > 0.0) {
            return Err(ConfigError::new("initial.gaussian_width", "must be positive"));
        }
        if init.states.contains(&StateKind::File) && init.file.is_none() {
            return Err(ConfigError::new("initial.file", "required by the `file` state"));
        }
        let mut seen = Vec::new();
        for s in &init.states {
            if seen.contains(s) {
                return Err(ConfigError::new("initial.states", format!("duplicate state `{}`", s.label())));
            }
            seen.push(*s);
        }
        if init.states.contains(&StateKind::Refined) {
            self.validate_refine()?;
        }
        if let Some(p) = &self.physical {
            p.resolve()?;
        }
        Ok(())
    }

    /// Checks everything needed by `refine`.
    pub fn validate_refine(&self) -> Result<()> {
        self.validate_grid()?;
        let eps = self.epsilon()?;
        if !(eps.is_finite() && eps > 0.0) {
            return Err(ConfigError::new("evolution.epsilon", format!("must be positive, got {eps}")));
        }
        let r = &self.refine;
        if r.seed == StateKind::Refined {
            return Err(ConfigError::new("refine.seed", "cannot seed from the refined state itself"));
        }
        if r.seed == StateKind::File && self.initial.file.is_none() {
            return Err(ConfigError::new("initial.file", "required by refine.seed = \"file\""));
        }
        if !(r.preconditioner_floor.is_finite() && r.preconditioner_floor >= 0.0) {
            return Err(ConfigError::new("refine.preconditioner_floor", "must be non-negative"));
        }
        r.options().validate().map_err(|e| ConfigError::new("refine", e.to_string()))
    }

    fn validate_grid(&self) -> Result<()> {
        strobo_core::Grid::new(self.grid.n_points, self.grid.length)
            .map(|_| ())
            .map_err(|e| ConfigError::new("grid", e.to_string()))
    }

    /// Resolves relative paths against the directory holding the config.
    pub fn anchor_paths(&mut self, config_dir: &Path) {
        if let Some(f) = &self.initial.file {
            if f.is_relative() {
                self.initial.file = Some(config_dir.join(f));
            }
        }
    }
}
