//! JSON run specifications.
//!
//! A document with a top-level `shells` key is a scaling study; anything
//! else is a single-run configuration. Parsing is strict: unknown keys are
//! rejected, and every error names the offending key path.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dynamics::{DynamicsError, InitialCondition, ModeCoeff, Scheme, SolverConfig, DEFAULT_GUARD};
use crate::experiments::{desk, ScalingStudySpec};
use crate::model::{LesModel, ModelKind, Nonlinearity};
use crate::noise::{NoiseCoefficients, ShellDescriptor};
use crate::spectral::{Cutoff, GridSpec, Mode, Pad};

use super::ConfigError;

/// Initial vorticity as written in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    RandomBand { band: u32, l2_norm: f64, seed: u64 },
    Modes { modes: Vec<ModeCoeff> },
    /// A `W2DS` file; relative paths resolve against the config's directory.
    Snapshot { path: PathBuf },
}

impl From<InitialCondition> for InitialSpec {
    fn from(ic: InitialCondition) -> Self {
        match ic {
            InitialCondition::RandomBand { band, l2_norm, seed } => InitialSpec::RandomBand { band, l2_norm, seed },
            InitialCondition::Modes { modes } => InitialSpec::Modes { modes },
        }
    }
}

impl InitialSpec {
    /// The in-memory form, or the snapshot path (resolved against `base_dir`).
    pub fn split(&self, base_dir: &Path) -> Result<InitialCondition, PathBuf> {
        match self {
            InitialSpec::RandomBand { band, l2_norm, seed } => {
                Ok(InitialCondition::RandomBand { band: *band, l2_norm: *l2_norm, seed: *seed })
            }
            InitialSpec::Modes { modes } => Ok(InitialCondition::Modes { modes: modes.clone() }),
            InitialSpec::Snapshot { path } => Err(base_dir.join(path)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencySpec {
    pub dts: Vec<f64>,
    pub paths: usize,
}

/// A single-run configuration with its initial state and seed.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub solver: SolverConfig,
    pub initial: InitialSpec,
    pub master_seed: u64,
    pub consistency: Option<ConsistencySpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingConfig {
    pub study: ScalingStudySpec,
    pub initial: InitialSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParsedConfig {
    Run(RunSpec),
    Scaling(ScalingConfig),
}

impl ParsedConfig {
    pub fn master_seed(&self) -> u64 {
        match self {
            ParsedConfig::Run(r) => r.master_seed,
            ParsedConfig::Scaling(s) => s.study.master_seed,
        }
    }

    pub fn initial(&self) -> &InitialSpec {
        match self {
            ParsedConfig::Run(r) => &r.initial,
            ParsedConfig::Scaling(s) => &s.initial,
        }
    }

    /// Canonical JSON form; parsing it gives back `self`.
    pub fn to_value(&self) -> Value {
        match self {
            ParsedConfig::Run(r) => {
                let doc = SolverDoc::from_config(&r.solver).with_extras(r);
                serde_json::to_value(doc).expect("config documents serialize")
            }
            ParsedConfig::Scaling(s) => serde_json::to_value(ScalingDoc::from_config(s)).expect("config documents serialize"),
        }
    }
}

/// Canonical pretty-printed JSON.
pub fn render(config: &ParsedConfig) -> String {
    serde_json::to_string_pretty(&config.to_value()).expect("values serialize")
}

pub fn parse_config(text: &str) -> Result<ParsedConfig, ConfigError> {
    let value: Value = serde_json::from_str(text).map_err(|e| ConfigError::new("", format!("malformed JSON: {e}")))?;
    parse_value(value)
}

pub fn parse_value(value: Value) -> Result<ParsedConfig, ConfigError> {
    let Value::Object(map) = &value else {
        return Err(ConfigError::new("", "expected a JSON object"));
    };
    if map.contains_key("shells") {
        let doc: ScalingDoc = deserialize(value)?;
        doc.into_config().map(ParsedConfig::Scaling)
    } else {
        let doc: SolverDoc = deserialize(value)?;
        doc.into_run().map(ParsedConfig::Run)
    }
}

fn deserialize<T: for<'de> Deserialize<'de>>(value: Value) -> Result<T, ConfigError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        ConfigError::new(if path == "." { "" } else { &path }, e.into_inner().to_string())
    })
}

fn join(prefix: &str, key: &str) -> String {
    if prefix.is_empty() {
        key.to_string()
    } else {
        format!("{prefix}.{key}")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum GridDoc {
    Size(usize),
    Full(GridFull),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridFull {
    n: usize,
    #[serde(default)]
    max_mode: Option<usize>,
    #[serde(default)]
    dealias_pad: Option<f64>,
    #[serde(default)]
    cutoff: Option<Cutoff>,
}

impl GridDoc {
    fn build(&self, prefix: &str) -> Result<GridSpec, ConfigError> {
        let err = |e: crate::spectral::SpectralError| ConfigError::new(join(prefix, "grid"), e.to_string());
        match self {
            GridDoc::Size(n) => GridSpec::with_n(*n).map_err(err),
            GridDoc::Full(g) => {
                let pad = match g.dealias_pad {
                    Some(x) => Pad::from_f64(x).map_err(err)?,
                    None => Pad::THREE_HALVES,
                };
                let max_mode = g.max_mode.unwrap_or((g.n / 2).saturating_sub(1));
                GridSpec::new(g.n, max_mode, pad, g.cutoff.unwrap_or_default()).map_err(err)
            }
        }
    }

    fn from_grid(g: &GridSpec) -> Self {
        GridDoc::Full(GridFull {
            n: g.n(),
            max_mode: Some(g.max_mode()),
            dealias_pad: Some(g.dealias_pad().as_f64()),
            cutoff: Some(g.cutoff()),
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum ModelDoc {
    Smagorinsky {
        cs_delta: f64,
        #[serde(default, skip_serializing_if = "is_zero")]
        epsilon_reg: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        growth: Option<[f64; 2]>,
    },
    PowerLaw {
        coef: f64,
        alpha: f64,
        #[serde(default, skip_serializing_if = "is_zero")]
        epsilon_reg: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        growth: Option<[f64; 2]>,
    },
    Linear {
        slope: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        growth: Option<[f64; 2]>,
    },
    /// `f ≡ 0`; renders as a zero-slope linear model.
    Constant {},
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

impl ModelDoc {
    fn build(&self, prefix: &str) -> Result<LesModel, ConfigError> {
        let key = join(prefix, "model");
        let err = |e: crate::model::ModelError| ConfigError::new(key.clone(), e.to_string());
        let (kind, eps, growth) = match *self {
            ModelDoc::Smagorinsky { cs_delta, epsilon_reg, growth } => {
                (ModelKind::Smagorinsky { cs_delta }, epsilon_reg, growth)
            }
            ModelDoc::PowerLaw { coef, alpha, epsilon_reg, growth } => {
                (ModelKind::PowerLaw { coef, alpha }, epsilon_reg, growth)
            }
            ModelDoc::Linear { slope, growth } => (ModelKind::Linear { slope }, 0.0, growth),
            ModelDoc::Constant {} => (ModelKind::Linear { slope: 0.0 }, 0.0, None),
        };
        let model = LesModel::new(kind, eps).map_err(err)?;
        match growth {
            Some([a, b]) => model.with_growth(a, b).map_err(err),
            None => Ok(model),
        }
    }

    fn from_model(m: &LesModel) -> Self {
        let default = LesModel::new(m.kind(), m.epsilon_reg()).expect("model was valid").growth();
        let growth = (m.growth() != default).then(|| [m.growth().0, m.growth().1]);
        match m.kind() {
            ModelKind::Smagorinsky { cs_delta } => ModelDoc::Smagorinsky { cs_delta, epsilon_reg: m.epsilon_reg(), growth },
            ModelKind::PowerLaw { coef, alpha } => {
                ModelDoc::PowerLaw { coef, alpha, epsilon_reg: m.epsilon_reg(), growth }
            }
            ModelKind::Linear { slope } => ModelDoc::Linear { slope, growth },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum NoiseDoc {
    /// Uniform weights on `n ≤ |k| ≤ 2n`.
    Annulus { n: u32 },
    /// `[l1, l2, theta]` triples.
    Explicit { entries: Vec<(i32, i32, f64)> },
}

impl NoiseDoc {
    fn build(&self, prefix: &str) -> Result<NoiseCoefficients, ConfigError> {
        let key = join(prefix, "noise");
        let out = match self {
            NoiseDoc::Annulus { n } => NoiseCoefficients::annulus(*n),
            NoiseDoc::Explicit { entries } => {
                NoiseCoefficients::from_entries(entries.iter().map(|&(l1, l2, t)| (Mode::new(l1, l2), t)))
            }
        };
        out.map_err(|e| ConfigError::new(key, e.to_string()))
    }

    fn from_noise(theta: &NoiseCoefficients) -> Self {
        match theta.shell() {
            ShellDescriptor::Annulus { n } => NoiseDoc::Annulus { n },
            ShellDescriptor::Explicit => NoiseDoc::Explicit { entries: theta.entries().map(|(k, t)| (k.l1, k.l2, t)).collect() },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConsistencyDoc {
    dts: Vec<f64>,
    paths: usize,
}

fn default_stride() -> usize {
    1
}

fn default_guard() -> f64 {
    DEFAULT_GUARD
}

fn default_safety() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolverDoc {
    grid: GridDoc,
    nu: f64,
    dt: f64,
    #[serde(alias = "T")]
    horizon: f64,
    scheme: Scheme,
    model: ModelDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    noise: Option<NoiseDoc>,
    #[serde(default = "default_stride")]
    record_stride: usize,
    #[serde(default = "default_guard")]
    enstrophy_guard: f64,
    #[serde(default)]
    keep_snapshots: bool,
    #[serde(default = "default_safety")]
    stability_safety: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    initial: Option<InitialSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    master_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    consistency: Option<ConsistencyDoc>,
}

fn config_error(prefix: &str, e: DynamicsError) -> ConfigError {
    match e {
        DynamicsError::Config { key, reason } => ConfigError::new(join(prefix, key), reason),
        other => ConfigError::new(prefix, other.to_string()),
    }
}

impl SolverDoc {
    /// The solver part; a stochastic scheme without explicit noise takes `fallback_noise`.
    fn build(&self, prefix: &str, fallback_noise: Option<NoiseCoefficients>) -> Result<SolverConfig, ConfigError> {
        let grid = self.grid.build(prefix)?;
        let model = self.model.build(prefix)?;
        let noise = match &self.noise {
            Some(doc) => Some(doc.build(prefix)?),
            None if self.scheme.is_stochastic() => fallback_noise,
            None => None,
        };
        let cfg = SolverConfig {
            grid,
            nu: self.nu,
            dt: self.dt,
            horizon: self.horizon,
            scheme: self.scheme,
            model,
            noise,
            record_stride: self.record_stride,
            enstrophy_guard: self.enstrophy_guard,
            keep_snapshots: self.keep_snapshots,
            stability_safety: self.stability_safety,
        };
        cfg.validate().map_err(|e| config_error(prefix, e))?;
        Ok(cfg)
    }

    fn reject_extras(&self, prefix: &str) -> Result<(), ConfigError> {
        for (key, present) in [
            ("initial", self.initial.is_some()),
            ("master_seed", self.master_seed.is_some()),
            ("consistency", self.consistency.is_some()),
        ] {
            if present {
                return Err(ConfigError::new(join(prefix, key), "only allowed at the top level"));
            }
        }
        Ok(())
    }

    fn into_run(self) -> Result<RunSpec, ConfigError> {
        let solver = self.build("", None)?;
        let consistency = match &self.consistency {
            None => None,
            Some(c) => {
                if c.dts.is_empty() || c.dts.iter().any(|&d| !(d > 0.0 && d.is_finite())) {
                    return Err(ConfigError::new("consistency.dts", "must be a nonempty list of positive steps"));
                }
                if c.dts.windows(2).any(|w| w[1] >= w[0]) {
                    return Err(ConfigError::new("consistency.dts", "must be strictly decreasing"));
                }
                if c.paths == 0 {
                    return Err(ConfigError::new("consistency.paths", "must be at least 1"));
                }
                Some(ConsistencySpec { dts: c.dts.clone(), paths: c.paths })
            }
        };
        Ok(RunSpec {
            solver,
            initial: self.initial.unwrap_or_else(|| desk::initial().into()),
            master_seed: self.master_seed.unwrap_or(0),
            consistency,
        })
    }

    fn from_config(c: &SolverConfig) -> Self {
        SolverDoc {
            grid: GridDoc::from_grid(&c.grid),
            nu: c.nu,
            dt: c.dt,
            horizon: c.horizon,
            scheme: c.scheme,
            model: ModelDoc::from_model(&c.model),
            noise: c.noise.as_ref().map(NoiseDoc::from_noise),
            record_stride: c.record_stride,
            enstrophy_guard: c.enstrophy_guard,
            keep_snapshots: c.keep_snapshots,
            stability_safety: c.stability_safety,
            initial: None,
            master_seed: None,
            consistency: None,
        }
    }

    fn with_extras(mut self, r: &RunSpec) -> Self {
        self.initial = Some(r.initial.clone());
        self.master_seed = Some(r.master_seed);
        self.consistency = r.consistency.as_ref().map(|c| ConsistencyDoc { dts: c.dts.clone(), paths: c.paths });
        self
    }
}

fn default_delta() -> f64 {
    1.0
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScalingDoc {
    base: SolverDoc,
    shells: Vec<u32>,
    paths_per_shell: usize,
    #[serde(default = "default_delta")]
    delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reference: Option<SolverDoc>,
    #[serde(default)]
    master_seed: u64,
    #[serde(default = "default_true")]
    self_check: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    initial: Option<InitialSpec>,
}

impl ScalingDoc {
    fn into_config(self) -> Result<ScalingConfig, ConfigError> {
        self.base.reject_extras("base")?;
        // the base noise is replaced per shell; the first shell stands in when absent
        let fallback = match self.shells.first() {
            Some(&n) => Some(NoiseCoefficients::annulus(n).map_err(|e| ConfigError::new("shells", e.to_string()))?),
            None => None,
        };
        let base = self.base.build("base", fallback)?;
        let reference = match &self.reference {
            Some(doc) => {
                doc.reject_extras("reference")?;
                Some(doc.build("reference", None)?)
            }
            None => None,
        };
        let study = ScalingStudySpec {
            base,
            shells: self.shells,
            paths_per_shell: self.paths_per_shell,
            delta: self.delta,
            reference,
            master_seed: self.master_seed,
            self_check: self.self_check,
        };
        study.validate().map_err(|e| match e {
            crate::experiments::ExperimentError::Invalid { key, reason } => ConfigError::new(key, reason),
            other => ConfigError::new("", other.to_string()),
        })?;
        for &n in &study.shells {
            NoiseCoefficients::annulus(n)
                .and_then(|t| t.check_grid(&study.base.grid))
                .map_err(|e| ConfigError::new("shells", format!("shell {n}: {e}")))?;
        }
        Ok(ScalingConfig { study, initial: self.initial.unwrap_or_else(|| desk::initial().into()) })
    }

    fn from_config(s: &ScalingConfig) -> Self {
        let st = &s.study;
        ScalingDoc {
            base: SolverDoc::from_config(&st.base),
            shells: st.shells.clone(),
            paths_per_shell: st.paths_per_shell,
            delta: st.delta,
            reference: st.reference.as_ref().map(SolverDoc::from_config),
            master_seed: st.master_seed,
            self_check: st.self_check,
            initial: Some(s.initial.clone()),
        }
    }
}
