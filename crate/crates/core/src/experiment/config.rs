//! TOML scenario files.
//!
//! ```toml
//! scenario = "fig3d"            # optional preset to start from
//! name = "ep2-closeup"          # defaults to the preset name, or "custom"
//! kind = "transmission"         # sweep | transmission | ep_find | splitting | crosscheck
//! branches = ["ground", "excited"]
//!
//! [params]                      # any subset of the system parameters
//! j1 = 0.995
//!
//! [sweep]                       # required for kind = "sweep"
//! parameter = "j1"
//! start = 0.0
//! stop = 2.0
//! count = 2001
//! tie_j2 = false                # move j2 together with j1
//!
//! [probe]                       # probe detunings for traces and cross-checks
//! start = -3.0
//! stop = 3.0
//! count = 4001
//!
//! [ladder]                      # perturbation sizes for splitting fits
//! low = 1e-7
//! high = 1e-3
//! count = 17
//!
//! [output]
//! dir = "out/ep2-closeup"
//! ```
//!
//! Unknown keys anywhere are rejected.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::presets::preset;
use super::ExperimentError;
use crate::hamiltonian::{QubitBranch, SystemParams};
use crate::spectrum::{geometric_ladder, linspace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    /// Eigenvalues (and their ground/excited differences) along one parameter.
    Sweep,
    /// `S21` traces per branch at a fixed operating point.
    Transmission,
    /// Exceptional point of the qubit-free chain along the coupling.
    EpFind,
    /// Power-law fit of the splitting under a perturbation of cavity `a`.
    Splitting,
    /// Time-domain versus frequency-domain `S21`.
    Crosscheck,
}

impl ScenarioKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioKind::Sweep => "sweep",
            ScenarioKind::Transmission => "transmission",
            ScenarioKind::EpFind => "ep_find",
            ScenarioKind::Splitting => "splitting",
            ScenarioKind::Crosscheck => "crosscheck",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Evenly spaced grid, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl GridSpec {
    pub const PROBE_DEFAULT: GridSpec = GridSpec {
        start: -3.0,
        stop: 3.0,
        count: 4001,
    };

    pub fn values(&self) -> Vec<f64> {
        linspace(self.start, self.stop, self.count)
    }

    fn check(&self, field: &str) -> Result<(), ExperimentError> {
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(ExperimentError::invalid(field, "bounds must be finite"));
        }
        if self.start >= self.stop {
            return Err(ExperimentError::invalid(field, "start must be below stop"));
        }
        if self.count < 2 {
            return Err(ExperimentError::invalid(field, "count must be at least 2"));
        }
        Ok(())
    }
}

/// Parses `START:STOP:COUNT`.
impl FromStr for GridSpec {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ExperimentError::invalid("grid", format!("{s:?} is not START:STOP:COUNT"));
        let parts: Vec<&str> = s.split(':').collect();
        let [start, stop, count] = parts.as_slice() else {
            return Err(bad());
        };
        let grid = GridSpec {
            start: start.trim().parse().map_err(|_| bad())?,
            stop: stop.trim().parse().map_err(|_| bad())?,
            count: count.trim().parse().map_err(|_| bad())?,
        };
        grid.check("grid")?;
        Ok(grid)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Name of a numeric system parameter, e.g. `"j1"`.
    pub parameter: String,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    /// Keep `j2` equal to `j1` along the sweep.
    #[serde(default)]
    pub tie_j2: bool,
}

impl SweepSpec {
    pub fn grid(&self) -> GridSpec {
        GridSpec {
            start: self.start,
            stop: self.stop,
            count: self.count,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        self.grid().values()
    }

    /// Parameters at one sweep value.
    pub fn apply(&self, p: &SystemParams, value: f64) -> SystemParams {
        let mut out = *p;
        out.set(&self.parameter, value);
        if self.tie_j2 {
            out.j2 = value;
        }
        out
    }

    /// Column name of the sweep variable.
    pub fn axis_name(&self) -> String {
        if self.tie_j2 {
            format!("{}_j2", self.parameter)
        } else {
            self.parameter.clone()
        }
    }

    fn check(&self) -> Result<(), ExperimentError> {
        if !SystemParams::FIELDS.contains(&self.parameter.as_str()) {
            return Err(ExperimentError::invalid(
                "sweep.parameter",
                format!("{:?} is not one of {}", self.parameter, SystemParams::FIELDS.join(", ")),
            ));
        }
        if self.tie_j2 && self.parameter != "j1" {
            return Err(ExperimentError::invalid("sweep.tie_j2", "requires parameter = \"j1\""));
        }
        self.grid().check("sweep")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LadderSpec {
    pub low: f64,
    pub high: f64,
    pub count: usize,
}

impl Default for LadderSpec {
    fn default() -> Self {
        LadderSpec {
            low: 1e-7,
            high: 1e-3,
            count: 17,
        }
    }
}

impl LadderSpec {
    pub fn values(&self) -> Vec<f64> {
        geometric_ladder(self.low, self.high, self.count)
    }

    fn check(&self) -> Result<(), ExperimentError> {
        if !(self.low > 0.0 && self.low < self.high && self.high.is_finite()) {
            return Err(ExperimentError::invalid("ladder", "needs 0 < low < high"));
        }
        if self.count < 4 {
            return Err(ExperimentError::invalid("ladder.count", "must be at least 4"));
        }
        Ok(())
    }
}

/// Per-field overrides on top of a preset or the default parameters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamOverrides {
    pub kappa_a: Option<f64>,
    pub kappa_b: Option<f64>,
    pub kappa_c: Option<f64>,
    pub gamma: Option<f64>,
    pub g: Option<f64>,
    pub delta_q_detuning: Option<f64>,
    pub delta_b: Option<f64>,
    pub delta_c: Option<f64>,
    pub j1: Option<f64>,
    pub j2: Option<f64>,
    pub kappa_i: Option<f64>,
    pub kappa_o: Option<f64>,
    pub n_cavities: Option<u8>,
    pub lossy_auxiliaries: Option<bool>,
}

impl ParamOverrides {
    pub fn apply(&self, p: &mut SystemParams) {
        let numeric = [
            ("kappa_a", self.kappa_a),
            ("kappa_b", self.kappa_b),
            ("kappa_c", self.kappa_c),
            ("gamma", self.gamma),
            ("g", self.g),
            ("delta_q_detuning", self.delta_q_detuning),
            ("delta_b", self.delta_b),
            ("delta_c", self.delta_c),
            ("j1", self.j1),
            ("j2", self.j2),
            ("kappa_i", self.kappa_i),
            ("kappa_o", self.kappa_o),
        ];
        for (name, value) in numeric {
            if let Some(v) = value {
                p.set(name, v);
            }
        }
        if let Some(n) = self.n_cavities {
            p.n_cavities = n;
        }
        if let Some(lossy) = self.lossy_auxiliaries {
            p.lossy_auxiliaries = lossy;
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputSpec {
    dir: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: Option<String>,
    name: Option<String>,
    kind: Option<ScenarioKind>,
    branches: Option<Vec<QubitBranch>>,
    params: Option<ParamOverrides>,
    sweep: Option<SweepSpec>,
    probe: Option<GridSpec>,
    ladder: Option<LadderSpec>,
    output: Option<OutputSpec>,
}

/// Fully resolved scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub kind: ScenarioKind,
    pub params: SystemParams,
    pub branches: Vec<QubitBranch>,
    pub sweep: Option<SweepSpec>,
    pub probe: GridSpec,
    pub ladder: LadderSpec,
    /// Whether the qubit-free chain is meant to be PT symmetric.
    pub expect_pt: bool,
    #[serde(skip)]
    pub out_dir: Option<PathBuf>,
}

impl ScenarioConfig {
    /// Bare configuration of `kind` on the default parameters.
    pub fn new(name: impl Into<String>, kind: ScenarioKind, params: SystemParams) -> Self {
        ScenarioConfig {
            name: name.into(),
            kind,
            params,
            branches: vec![QubitBranch::Ground, QubitBranch::Excited],
            sweep: None,
            probe: GridSpec::PROBE_DEFAULT,
            ladder: LadderSpec::default(),
            expect_pt: false,
            out_dir: None,
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        self.params.validate()?;
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(ExperimentError::invalid(
                "name",
                "must be a non-empty file-name-safe string",
            ));
        }
        if self.branches.is_empty() {
            return Err(ExperimentError::invalid("branches", "must not be empty"));
        }
        for (i, b) in self.branches.iter().enumerate() {
            if self.branches[..i].contains(b) {
                return Err(ExperimentError::invalid("branches", format!("lists {b} twice")));
            }
        }
        self.probe.check("probe")?;
        self.ladder.check()?;
        match (&self.sweep, self.kind) {
            (Some(s), _) => s.check()?,
            (None, ScenarioKind::Sweep) => {
                return Err(ExperimentError::invalid("sweep", "is required for kind = \"sweep\""));
            }
            (None, _) => {}
        }
        if matches!(self.kind, ScenarioKind::EpFind | ScenarioKind::Splitting) && self.params.n_cavities < 2 {
            return Err(ExperimentError::invalid("n_cavities", "must be 2 or 3 for this kind"));
        }
        Ok(())
    }
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

/// Parses and validates a scenario file.
pub fn load_config(text: &str) -> Result<ScenarioConfig, ExperimentError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((1, 1), |s| line_column(text, s.start));
        ExperimentError::Parse {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;

    let mut cfg = match &raw.scenario {
        Some(name) => preset(name)?.config,
        None => {
            let kind = raw
                .kind
                .ok_or_else(|| ExperimentError::invalid("kind", "is required without a scenario preset"))?;
            ScenarioConfig::new("custom", kind, SystemParams::default())
        }
    };
    if let Some(name) = raw.name {
        cfg.name = name;
    }
    if let Some(kind) = raw.kind {
        cfg.kind = kind;
    }
    if let Some(branches) = raw.branches {
        cfg.branches = branches;
    }
    if let Some(overrides) = raw.params {
        overrides.apply(&mut cfg.params);
    }
    if let Some(sweep) = raw.sweep {
        cfg.sweep = Some(sweep);
    }
    if let Some(probe) = raw.probe {
        cfg.probe = probe;
    }
    if let Some(ladder) = raw.ladder {
        cfg.ladder = ladder;
    }
    cfg.out_dir = raw.output.and_then(|o| o.dir);
    cfg.validate()?;
    Ok(cfg)
}
