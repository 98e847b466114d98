//! Run configuration: an INI-like `key = value` document with `[params]`,
//! `[task]`, `[grid]` and `[output]` sections and `#` comments.
//!
//! Rates, couplings and detunings are given in units of the mechanical
//! frequency. `omega_m` records its value in rad/s for dimensional output.

use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use optosqueeze_core::{
    steady_state, thermal_occupancy, CavityParams, CouplingKind, SteadyState, TransferModel,
};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: unknown key `{key}` in section [{section}]")]
    UnknownKey { line: usize, section: String, key: String },

    #[error("line {line}: unknown section [{section}]")]
    UnknownSection { line: usize, section: String },

    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("line {line}: duplicate key `{key}`")]
    DuplicateKey { line: usize, key: String },

    #[error("missing required key `{key}` in section [{section}]")]
    MissingKey { section: &'static str, key: &'static str },

    #[error("line {line}: malformed number for `{key}`: `{value}`")]
    MalformedNumber { line: usize, key: String, value: String },

    #[error("non-positive rate: `{key}` must be > 0, got {value}")]
    NonPositiveRate { key: &'static str, value: f64 },

    #[error("invalid value for `{key}`: {reason}")]
    InvalidValue { key: &'static str, reason: String },

    #[error("conflicting keys: {0}")]
    Conflict(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

impl ConfigError {
    /// Stable identifier for each failure class.
    pub fn code(&self) -> &'static str {
        match self {
            ConfigError::UnknownKey { .. } => "E_UNKNOWN_KEY",
            ConfigError::UnknownSection { .. } => "E_UNKNOWN_SECTION",
            ConfigError::Syntax { .. } => "E_SYNTAX",
            ConfigError::DuplicateKey { .. } => "E_DUPLICATE_KEY",
            ConfigError::MissingKey { .. } => "E_MISSING_KEY",
            ConfigError::MalformedNumber { .. } => "E_MALFORMED_NUMBER",
            ConfigError::NonPositiveRate { .. } => "E_NONPOSITIVE_RATE",
            ConfigError::InvalidValue { .. } => "E_INVALID_VALUE",
            ConfigError::Conflict(_) => "E_CONFLICT",
            ConfigError::InvalidGrid(_) => "E_INVALID_GRID",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Spectrum,
    Stability,
    Threshold,
}

impl Task {
    pub fn as_str(self) -> &'static str {
        match self {
            Task::Spectrum => "spectrum",
            Task::Stability => "stability",
            Task::Threshold => "threshold",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "spectrum" => Ok(Task::Spectrum),
            "stability" => Ok(Task::Stability),
            "threshold" => Ok(Task::Threshold),
            other => Err(format!("expected spectrum, stability or threshold, got `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

impl Scale {
    pub fn as_str(self) -> &'static str {
        match self {
            Scale::Linear => "linear",
            Scale::Log => "log",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub scale: Scale,
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        let at = |i: usize| -> f64 {
            if i == n - 1 {
                return self.max;
            }
            let t = i as f64 / (n - 1) as f64;
            match self.scale {
                Scale::Linear => self.min + (self.max - self.min) * t,
                Scale::Log => self.min * (self.max / self.min).powf(t),
            }
        };
        (0..n).map(at).collect()
    }
}

/// How the effective couplings are specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Couplings {
    /// Bare couplings `g_omega`, `g_gamma` times the steady-state amplitude
    /// driven by `drive_amplitude`.
    Bare,
    /// Effective couplings given directly.
    Effective { g_omega: f64, g_gamma: f64 },
    /// Cooperativity of the active coupling at the mechanical frequency.
    Cooperativity(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    pub dir: PathBuf,
    pub prefix: String,
    pub svg: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Mechanical frequency in rad/s.
    pub omega_m: f64,
    /// Parameters in units of the mechanical frequency (`params.omega_m == 1`).
    pub params: CavityParams,
    pub couplings: Couplings,
    pub task: Task,
    pub coupling_kind: CouplingKind,
    pub model: TransferModel,
    /// `None` selects the task's default grid.
    pub grid: Option<GridSpec>,
    pub output: OutputSpec,
}

pub const DEFAULT_STABILITY_GRID: GridSpec =
    GridSpec { min: -0.1, max: 0.1, points: 2001, scale: Scale::Linear };

impl RunConfig {
    /// Steady state with the configured effective couplings.
    pub fn steady_state(&self) -> optosqueeze_core::Result<SteadyState> {
        let p = &self.params;
        match self.couplings {
            Couplings::Bare => steady_state(p),
            Couplings::Effective { g_omega, g_gamma } => {
                SteadyState::with_effective_couplings(p, g_omega, g_gamma)
            }
            Couplings::Cooperativity(n) => {
                let g = (n * p.gamma * p.gamma_m).sqrt();
                match self.coupling_kind {
                    CouplingKind::Dissipative => {
                        SteadyState::with_effective_couplings(p, 0.0, g * p.gamma / (2.0 * p.omega_m))
                    }
                    _ => SteadyState::with_effective_couplings(p, g, 0.0),
                }
            }
        }
    }

    /// Canonical text form. Parsing it gives back an equal configuration.
    pub fn serialize(&self) -> String {
        self.render(true)
    }

    /// Canonical form without the output directory, for file metadata.
    pub fn serialize_for_metadata(&self) -> String {
        self.render(false)
    }

    fn render(&self, with_dir: bool) -> String {
        let p = &self.params;
        let mut params: Vec<(&str, Num)> = vec![
            ("omega_m", Num(self.omega_m)),
            ("gamma", Num(p.gamma)),
            ("gamma_m", Num(p.gamma_m)),
            ("delta", Num(p.delta)),
            ("n_th", Num(p.n_th)),
        ];
        match self.couplings {
            Couplings::Bare => {
                params.push(("g_omega", Num(p.g_omega)));
                params.push(("g_gamma", Num(p.g_gamma)));
                params.push(("drive_amplitude", Num(p.drive_amplitude)));
            }
            Couplings::Effective { g_omega, g_gamma } => {
                params.push(("drive_amplitude", Num(p.drive_amplitude)));
                params.push(("G_omega", Num(g_omega)));
                params.push(("G_gamma", Num(g_gamma)));
            }
            Couplings::Cooperativity(n) => {
                params.push(("drive_amplitude", Num(p.drive_amplitude)));
                params.push(("n_ba", Num(n)));
            }
        }

        let mut out = String::from("[params]\n");
        for (k, v) in params {
            let _ = writeln!(out, "{k} = {v}");
        }
        let _ = write!(
            out,
            "\n[task]\nkind = {}\ncoupling = {}\nmodel = {}\n",
            self.task,
            self.coupling_kind,
            self.model.as_str()
        );
        if let Some(g) = &self.grid {
            let _ = write!(
                out,
                "\n[grid]\nmin = {}\nmax = {}\npoints = {}\nscale = {}\n",
                Num(g.min),
                Num(g.max),
                g.points,
                g.scale.as_str()
            );
        }
        out.push_str("\n[output]\n");
        if with_dir {
            let _ = writeln!(out, "dir = {}", self.output.dir.display());
        }
        let _ = writeln!(out, "prefix = {}\nsvg = {}", self.output.prefix, self.output.svg);
        out
    }
}

/// Shortest decimal text that reads back as the same `f64`.
struct Num(f64);

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

const SECTIONS: [&str; 4] = ["params", "task", "grid", "output"];

fn allowed_keys(section: &str) -> &'static [&'static str] {
    match section {
        "params" => &[
            "omega_m", "gamma", "gamma_m", "delta", "g_omega", "g_gamma", "drive_amplitude",
            "G_omega", "G_gamma", "n_ba", "n_th", "temperature",
        ],
        "task" => &["kind", "coupling", "model"],
        "grid" => &["min", "max", "points", "scale"],
        "output" => &["dir", "prefix", "svg"],
        _ => &[],
    }
}

struct Entry {
    line: usize,
    value: String,
}

struct Document {
    entries: Vec<(String, String, Entry)>,
}

impl Document {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries: Vec<(String, String, Entry)> = Vec::new();
        let mut section: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| ConfigError::Syntax {
                    line,
                    message: format!("unterminated section header `{content}`"),
                })?;
                let name = name.trim();
                if !SECTIONS.contains(&name) {
                    return Err(ConfigError::UnknownSection { line, section: name.to_string() });
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line,
                message: format!("expected `key = value`, got `{content}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            let Some(sec) = &section else {
                return Err(ConfigError::Syntax {
                    line,
                    message: format!("key `{key}` appears before any section header"),
                });
            };
            if key.is_empty() {
                return Err(ConfigError::Syntax { line, message: "empty key".into() });
            }
            if !allowed_keys(sec).contains(&key) {
                return Err(ConfigError::UnknownKey { line, section: sec.clone(), key: key.to_string() });
            }
            if entries.iter().any(|(s, k, _)| s == sec && k == key) {
                return Err(ConfigError::DuplicateKey { line, key: key.to_string() });
            }
            entries.push((sec.clone(), key.to_string(), Entry { line, value: value.to_string() }));
        }
        Ok(Self { entries })
    }

    fn get(&self, section: &str, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|(s, k, _)| s == section && k == key).map(|(_, _, e)| e)
    }

    fn has_section(&self, section: &str) -> bool {
        self.entries.iter().any(|(s, _, _)| s == section)
    }

    fn number(&self, section: &str, key: &str) -> Result<Option<f64>, ConfigError> {
        let Some(e) = self.get(section, key) else { return Ok(None) };
        match e.value.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Some(v)),
            _ => Err(ConfigError::MalformedNumber { line: e.line, key: key.to_string(), value: e.value.clone() }),
        }
    }

    fn required_number(&self, section: &'static str, key: &'static str) -> Result<f64, ConfigError> {
        self.number(section, key)?.ok_or(ConfigError::MissingKey { section, key })
    }

    fn integer(&self, section: &str, key: &str) -> Result<Option<usize>, ConfigError> {
        let Some(e) = self.get(section, key) else { return Ok(None) };
        e.value
            .parse::<usize>()
            .map(Some)
            .map_err(|_| ConfigError::MalformedNumber { line: e.line, key: key.to_string(), value: e.value.clone() })
    }

    fn text(&self, section: &str, key: &str) -> Option<&str> {
        self.get(section, key).map(|e| e.value.as_str())
    }
}

fn positive_rate(key: &'static str, value: f64) -> Result<f64, ConfigError> {
    if value > 0.0 {
        Ok(value)
    } else {
        Err(ConfigError::NonPositiveRate { key, value })
    }
}

fn choice<T: FromStr>(key: &'static str, value: Option<&str>, default: T) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    match value {
        None => Ok(default),
        Some(v) => v.parse().map_err(|e: T::Err| ConfigError::InvalidValue { key, reason: e.to_string() }),
    }
}

fn parse_model(value: Option<&str>) -> Result<TransferModel, ConfigError> {
    match value {
        None | Some("general") => Ok(TransferModel::General),
        Some("bad_cavity") => Ok(TransferModel::BadCavity),
        Some(other) => Err(ConfigError::InvalidValue {
            key: "model",
            reason: format!("expected general or bad_cavity, got `{other}`"),
        }),
    }
}

fn parse_bool(key: &'static str, value: Option<&str>) -> Result<bool, ConfigError> {
    match value {
        None | Some("false") => Ok(false),
        Some("true") => Ok(true),
        Some(other) => Err(ConfigError::InvalidValue { key, reason: format!("expected true or false, got `{other}`") }),
    }
}

/// Parses a configuration that names its task in `[task] kind`.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    parse_with(text, None)
}

/// Parses a configuration for `task`. A `[task] kind` entry, if present, must
/// agree with it.
pub fn parse_config_for(text: &str, task: Task) -> Result<RunConfig, ConfigError> {
    parse_with(text, Some(task))
}

fn parse_with(text: &str, requested: Option<Task>) -> Result<RunConfig, ConfigError> {
    let doc = Document::parse(text)?;

    let declared = doc.text("task", "kind").map(|v| choice::<Task>("kind", Some(v), Task::Spectrum)).transpose()?;
    let task = match (declared, requested) {
        (Some(d), Some(r)) if d != r => {
            return Err(ConfigError::Conflict(format!("config declares task `{d}` but `{r}` was requested")))
        }
        (Some(d), _) => d,
        (None, Some(r)) => r,
        (None, None) => return Err(ConfigError::MissingKey { section: "task", key: "kind" }),
    };
    let coupling_kind = choice("coupling", doc.text("task", "coupling"), CouplingKind::Dispersive)?;
    let model = parse_model(doc.text("task", "model"))?;

    let omega_m = positive_rate("omega_m", doc.number("params", "omega_m")?.unwrap_or(1.0))?;
    let gamma = positive_rate("gamma", doc.required_number("params", "gamma")?)?;
    let gamma_m = positive_rate("gamma_m", doc.required_number("params", "gamma_m")?)?;
    let delta = doc.number("params", "delta")?.unwrap_or(0.0);
    let drive = doc.number("params", "drive_amplitude")?;
    let bare_omega = doc.number("params", "g_omega")?;
    let bare_gamma = doc.number("params", "g_gamma")?;
    let eff_omega = doc.number("params", "G_omega")?;
    let eff_gamma = doc.number("params", "G_gamma")?;
    let n_ba = doc.number("params", "n_ba")?;

    let n_th = match (doc.number("params", "n_th")?, doc.number("params", "temperature")?) {
        (Some(n), _) => n,
        (None, Some(t)) if t < 0.0 => {
            return Err(ConfigError::InvalidValue { key: "temperature", reason: format!("must be >= 0, got {t}") })
        }
        // Temperature is in units of the mechanical quantum.
        (None, Some(t)) => thermal_occupancy(t, 1.0),
        (None, None) => 0.0,
    };

    let bare_given = bare_omega.is_some() || bare_gamma.is_some();
    let effective_given = eff_omega.is_some() || eff_gamma.is_some();
    let couplings = match (bare_given, effective_given, n_ba) {
        (false, false, None) => Couplings::Effective { g_omega: 0.0, g_gamma: 0.0 },
        (true, false, None) => Couplings::Bare,
        (false, true, None) => {
            Couplings::Effective { g_omega: eff_omega.unwrap_or(0.0), g_gamma: eff_gamma.unwrap_or(0.0) }
        }
        (false, false, Some(n)) => {
            if n < 0.0 {
                return Err(ConfigError::InvalidValue { key: "n_ba", reason: format!("must be >= 0, got {n}") });
            }
            if coupling_kind == CouplingKind::Mixed {
                return Err(ConfigError::Conflict("`n_ba` needs a single coupling kind, not mixed".into()));
            }
            Couplings::Cooperativity(n)
        }
        _ => {
            return Err(ConfigError::Conflict(
                "give couplings as bare (g_omega, g_gamma), effective (G_omega, G_gamma) or n_ba, not several".into(),
            ))
        }
    };
    if couplings == Couplings::Bare && drive.is_none() {
        return Err(ConfigError::MissingKey { section: "params", key: "drive_amplitude" });
    }

    let params = CavityParams::new(gamma, gamma_m, 1.0)
        .with_delta(delta)
        .with_couplings(bare_omega.unwrap_or(0.0), bare_gamma.unwrap_or(0.0))
        .with_drive(drive.unwrap_or(0.0))
        .with_n_th(n_th);
    params.validate().map_err(|e| match e {
        optosqueeze_core::Error::InvalidParameter { name, reason } => ConfigError::InvalidValue { key: name, reason },
        other => ConfigError::InvalidValue { key: "params", reason: other.to_string() },
    })?;

    if task == Task::Spectrum && delta != 0.0 {
        return Err(ConfigError::InvalidValue {
            key: "delta",
            reason: "squeezing spectra are defined on resonance only; set delta = 0".into(),
        });
    }
    if task == Task::Threshold && coupling_kind == CouplingKind::Mixed {
        return Err(ConfigError::InvalidValue {
            key: "coupling",
            reason: "the small-detuning threshold needs a single coupling kind".into(),
        });
    }

    let grid = if doc.has_section("grid") {
        let min = doc.required_number("grid", "min")?;
        let max = doc.required_number("grid", "max")?;
        let points = doc.integer("grid", "points")?.ok_or(ConfigError::MissingKey { section: "grid", key: "points" })?;
        let scale = match doc.text("grid", "scale") {
            None | Some("linear") => Scale::Linear,
            Some("log") => Scale::Log,
            Some(other) => {
                return Err(ConfigError::InvalidValue {
                    key: "scale",
                    reason: format!("expected linear or log, got `{other}`"),
                })
            }
        };
        if min >= max {
            return Err(ConfigError::InvalidGrid(format!("min must be < max, got {min} and {max}")));
        }
        if points < 2 {
            return Err(ConfigError::InvalidGrid(format!("points must be >= 2, got {points}")));
        }
        if scale == Scale::Log && min <= 0.0 {
            return Err(ConfigError::InvalidGrid(format!("a log grid needs min > 0, got {min}")));
        }
        if task == Task::Stability && scale == Scale::Log {
            return Err(ConfigError::InvalidGrid("detuning sweeps use a linear grid".into()));
        }
        if task == Task::Spectrum && min <= 0.0 {
            return Err(ConfigError::InvalidGrid(format!("spectrum frequencies must be > 0, got min = {min}")));
        }
        Some(GridSpec { min, max, points, scale })
    } else {
        None
    };

    let output = OutputSpec {
        dir: PathBuf::from(doc.text("output", "dir").unwrap_or(".")),
        prefix: doc.text("output", "prefix").unwrap_or("optosqueeze").to_string(),
        svg: parse_bool("svg", doc.text("output", "svg"))?,
    };
    if output.prefix.is_empty() || output.prefix.contains(['/', '\\']) {
        return Err(ConfigError::InvalidValue {
            key: "prefix",
            reason: format!("must be a non-empty file name stem, got `{}`", output.prefix),
        });
    }

    Ok(RunConfig { omega_m, params, couplings, task, coupling_kind, model, grid, output })
}
