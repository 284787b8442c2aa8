//! Experiment configuration: a single JSON document, validated in full so
//! that every problem is reported at once with its field path.

use std::fmt;
use std::path::{Path, PathBuf};

use cbwlc::env::InstanceSpec;
use cbwlc::lagrangian::EtaMode;
use cbwlc::orchestrator::RunMode;
use cbwlc::primal_squarecb::Normalization;
use serde::{Deserialize, Deserializer, Serialize};

/// Where the instance comes from. A `{"file": ...}` object is resolved
/// relative to the config file by [`load_config`].
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum InstanceSource {
    File { file: PathBuf },
    Inline(InstanceSpec),
}

impl<'de> Deserialize<'de> for InstanceSource {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let value = serde_json::Value::deserialize(d)?;
        if let Some(obj) = value.as_object() {
            if obj.contains_key("file") {
                if obj.len() != 1 {
                    return Err(serde::de::Error::custom("a file reference takes no other fields"));
                }
                let file = obj["file"]
                    .as_str()
                    .ok_or_else(|| serde::de::Error::custom("`file` must be a string"))?;
                return Ok(InstanceSource::File { file: file.into() });
            }
        }
        InstanceSpec::deserialize(value)
            .map(InstanceSource::Inline)
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrimalKind {
    Exp3p,
    Exp3s,
    Squarecb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DualKind {
    #[default]
    Hedge,
    FixedShare,
}

/// A truth table indexed `[context][arm]`.
pub type Table = Vec<Vec<f64>>;

/// Regression class for the SquareCB primal.
///
/// Finite-class candidates are given in the instance's raw units (before
/// budget normalisation), one list per declared non-time resource; the
/// runner rescales them and adds the exact time oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegressionConfig {
    FiniteClass {
        reward: Vec<Table>,
        consumption: Vec<Vec<Table>>,
        /// Fixed-Share rate over candidates; defaults to `S/(T−1)`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        share_alpha: Option<f64>,
    },
    Linear {
        /// Feature vectors indexed `[context][arm]`, shared by every coordinate.
        features: Vec<Vec<Vec<f64>>>,
        #[serde(default = "one")]
        ridge: f64,
        #[serde(default)]
        vaw: bool,
    },
    Ogd {
        features: Vec<Vec<Vec<f64>>>,
        step_size: f64,
        radius: f64,
    },
    Direct {
        #[serde(default = "one")]
        ridge: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SquareCbConfig {
    /// Overrides the default exploration parameter.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub normalization: Normalization,
    pub regression: RegressionConfig,
    /// Regression error bound `U` used for the default `γ`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regression_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmConfig {
    pub primal: PrimalKind,
    #[serde(default)]
    pub dual: DualKind,
    /// Switch hint for EXP3.S and Fixed-Share; defaults to the instance's count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_switches: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub squarecb: Option<SquareCbConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ModeKind {
    #[default]
    Standard,
    HardStop,
    ZeroViolation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EtaRule {
    Slater,
    General,
    HardStop,
    ZeroViolation,
    Fixed,
}

/// Flat form of [`EtaMode`]; the rule picks which fields are required.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct EtaSection {
    /// Defaults to the rule matching the run mode (`slater` for standard runs).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule: Option<EtaRule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regret_estimate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default)]
    pub mode: ModeKind,
    #[serde(default)]
    pub eta: EtaSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default = "default_delta")]
    pub delta: f64,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            mode: ModeKind::default(),
            eta: EtaSection::default(),
            epsilon: None,
            delta: default_delta(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Output directory, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default)]
    pub trace: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub instance: InstanceSource,
    pub algorithm: AlgorithmConfig,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default = "one_usize")]
    pub replications: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub output: OutputConfig,
}

fn one() -> f64 {
    1.0
}

fn one_usize() -> usize {
    1
}

fn default_delta() -> f64 {
    0.05
}

/// One validation failure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Issue {
    pub path: String,
    pub message: String,
}

impl Issue {
    fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}: {issue}")]
    Parse { file: PathBuf, issue: Issue },
    #[error("invalid config:\n{}", .0.iter().map(|i| format!("  {i}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<Issue>),
}

impl ConfigError {
    pub fn issues(&self) -> Vec<Issue> {
        match self {
            ConfigError::Io { path, source } => vec![Issue::new(path.display().to_string(), source.to_string())],
            ConfigError::Parse { issue, .. } => vec![issue.clone()],
            ConfigError::Invalid(v) => v.clone(),
        }
    }
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str, file: &Path) -> Result<T, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        ConfigError::Parse {
            file: file.to_path_buf(),
            issue: Issue::new(if path == "." { "$".into() } else { path }, e.inner().to_string()),
        }
    })
}

fn read(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Read, parse and validate a config. File references are resolved and
/// inlined, and a relative output directory is anchored at the config file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let mut config: ExperimentConfig = parse_json(&read(path)?, path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    if let InstanceSource::File { file } = &config.instance {
        let file = base.join(file);
        config.instance = InstanceSource::Inline(parse_json(&read(&file)?, &file)?);
    }
    if let Some(dir) = &config.output.dir {
        if dir.is_relative() {
            config.output.dir = Some(base.join(dir));
        }
    }
    let issues = config.validate();
    if issues.is_empty() {
        Ok(config)
    } else {
        Err(ConfigError::Invalid(issues))
    }
}

/// Parse a config from a string (file references are rejected).
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let config: ExperimentConfig = parse_json(text, Path::new("<string>"))?;
    let issues = config.validate();
    if issues.is_empty() {
        Ok(config)
    } else {
        Err(ConfigError::Invalid(issues))
    }
}

impl EtaSection {
    /// The rule in force for a run in `mode`.
    pub fn rule_for(&self, mode: ModeKind) -> EtaRule {
        self.rule.unwrap_or(match mode {
            ModeKind::Standard => EtaRule::Slater,
            ModeKind::HardStop => EtaRule::HardStop,
            ModeKind::ZeroViolation => EtaRule::ZeroViolation,
        })
    }

    pub fn to_mode(&self, mode: ModeKind) -> Result<EtaMode, Vec<Issue>> {
        let need = |v: Option<f64>, name: &str, rule: &str| {
            v.ok_or_else(|| {
                vec![Issue::new(
                    format!("run.eta.{name}"),
                    format!("required by the `{rule}` rule"),
                )]
            })
        };
        Ok(match self.rule_for(mode) {
            EtaRule::Slater => EtaMode::Slater {
                zeta: need(self.zeta, "zeta", "slater")?,
            },
            EtaRule::General => EtaMode::General {
                regret_estimate: need(self.regret_estimate, "regret_estimate", "general")?,
            },
            EtaRule::HardStop => EtaMode::HardStop,
            EtaRule::ZeroViolation => EtaMode::ZeroViolation {
                zeta: need(self.zeta, "zeta", "zero_violation")?,
            },
            EtaRule::Fixed => EtaMode::Fixed {
                eta: need(self.value, "value", "fixed")?,
            },
        })
    }
}

impl RunSection {
    pub fn run_mode(&self) -> RunMode {
        match self.mode {
            ModeKind::Standard => RunMode::Standard,
            ModeKind::HardStop => RunMode::HardStop,
            ModeKind::ZeroViolation => RunMode::ZeroViolation {
                epsilon: self.epsilon.unwrap_or(f64::NAN),
            },
        }
    }
}

impl ExperimentConfig {
    /// The inline instance, if the source has been resolved.
    pub fn instance(&self) -> Option<&InstanceSpec> {
        match &self.instance {
            InstanceSource::Inline(spec) => Some(spec),
            InstanceSource::File { .. } => None,
        }
    }

    /// Every problem with the config; empty when it is runnable.
    pub fn validate(&self) -> Vec<Issue> {
        let mut out = Vec::new();
        if self.replications < 1 {
            out.push(Issue::new("replications", "must be at least 1"));
        }
        self.validate_run(&mut out);
        match self.instance() {
            None => out.push(Issue::new(
                "instance.file",
                "file references must be resolved before validation",
            )),
            Some(spec) => {
                if let Err(e) = spec.normalize() {
                    out.push(Issue::new("instance", e.to_string()));
                } else {
                    self.validate_algorithm(spec, &mut out);
                }
            }
        }
        out
    }

    fn validate_run(&self, out: &mut Vec<Issue>) {
        let run = &self.run;
        if !(run.delta > 0.0 && run.delta < 1.0) {
            out.push(Issue::new("run.delta", "must lie in (0, 1)"));
        }
        let rule = run.eta.rule_for(run.mode);
        match run.eta.to_mode(run.mode) {
            Err(mut v) => out.append(&mut v),
            Ok(mode) => match mode {
                EtaMode::Slater { zeta } | EtaMode::ZeroViolation { zeta } if !(zeta > 0.0) => {
                    out.push(Issue::new("run.eta.zeta", "must be positive"));
                }
                EtaMode::General { regret_estimate } if !(regret_estimate > 0.0) => {
                    out.push(Issue::new("run.eta.regret_estimate", "must be positive"));
                }
                EtaMode::Fixed { eta } if !(eta >= 1.0 && eta.is_finite()) => {
                    out.push(Issue::new("run.eta.value", "must be at least 1"));
                }
                _ => {}
            },
        }
        match run.mode {
            ModeKind::HardStop if rule != EtaRule::HardStop => {
                out.push(Issue::new("run.eta.rule", "hard_stop mode requires the hard_stop rule"));
            }
            ModeKind::ZeroViolation => {
                if rule != EtaRule::ZeroViolation {
                    out.push(Issue::new(
                        "run.eta.rule",
                        "zero_violation mode requires the zero_violation rule",
                    ));
                }
                match run.epsilon {
                    None => out.push(Issue::new("run.epsilon", "required in zero_violation mode")),
                    Some(e) if !(e > 0.0 && e <= 0.5) => out.push(Issue::new("run.epsilon", "must lie in (0, 1/2]")),
                    Some(e) => {
                        if let Some(z) = run.eta.zeta {
                            if e > z / 2.0 {
                                out.push(Issue::new(
                                    "run.epsilon",
                                    format!("must not exceed zeta/2 = {}", z / 2.0),
                                ));
                            }
                        }
                    }
                }
            }
            _ => {
                if run.epsilon.is_some() {
                    out.push(Issue::new("run.epsilon", "only used in zero_violation mode"));
                }
            }
        }
    }

    fn validate_algorithm(&self, spec: &InstanceSpec, out: &mut Vec<Issue>) {
        let alg = &self.algorithm;
        match alg.primal {
            PrimalKind::Exp3p | PrimalKind::Exp3s => {
                if spec.num_contexts != 1 {
                    out.push(Issue::new(
                        "algorithm.primal",
                        format!(
                            "{:?} needs a single context, the instance has {}",
                            alg.primal, spec.num_contexts
                        )
                        .to_lowercase(),
                    ));
                }
                if alg.squarecb.is_some() {
                    out.push(Issue::new("algorithm.squarecb", "only used by the squarecb primal"));
                }
            }
            PrimalKind::Squarecb => match &alg.squarecb {
                None => out.push(Issue::new(
                    "algorithm.squarecb",
                    "squarecb needs a declared regression class",
                )),
                Some(sq) => validate_squarecb(sq, spec, out),
            },
        }
    }
}

fn validate_table(t: &Table, spec: &InstanceSpec, lo: f64, hi: f64, path: &str, out: &mut Vec<Issue>) {
    if t.len() != spec.num_contexts || t.iter().any(|row| row.len() != spec.num_arms) {
        out.push(Issue::new(
            path,
            format!("expected a {}×{} table", spec.num_contexts, spec.num_arms),
        ));
    } else if t.iter().flatten().any(|v| !(lo..=hi).contains(v)) {
        out.push(Issue::new(path, format!("values must lie in [{lo}, {hi}]")));
    }
}

fn validate_features(f: &[Vec<Vec<f64>>], spec: &InstanceSpec, path: &str, out: &mut Vec<Issue>) {
    let dim = f.first().and_then(|r| r.first()).map_or(0, Vec::len);
    if f.len() != spec.num_contexts || f.iter().any(|r| r.len() != spec.num_arms) {
        out.push(Issue::new(
            path,
            format!("expected {}×{} feature vectors", spec.num_contexts, spec.num_arms),
        ));
    } else if dim == 0 || f.iter().flatten().any(|v| v.len() != dim) {
        out.push(Issue::new(path, "feature vectors must share a positive dimension"));
    } else if f
        .iter()
        .flatten()
        .any(|v| v.iter().map(|x| x * x).sum::<f64>() > 1.0 + 1e-9)
    {
        out.push(Issue::new(path, "feature vectors must have norm at most 1"));
    }
}

fn validate_squarecb(sq: &SquareCbConfig, spec: &InstanceSpec, out: &mut Vec<Issue>) {
    if let Some(g) = sq.gamma {
        if !(g > 0.0 && g.is_finite()) {
            out.push(Issue::new("algorithm.squarecb.gamma", "must be positive"));
        }
    }
    if let Some(u) = sq.regression_bound {
        if !(u > 0.0 && u.is_finite()) {
            out.push(Issue::new("algorithm.squarecb.regression_bound", "must be positive"));
        }
    }
    let base = "algorithm.squarecb.regression";
    match &sq.regression {
        RegressionConfig::FiniteClass {
            reward,
            consumption,
            share_alpha,
        } => {
            if reward.is_empty() {
                out.push(Issue::new(format!("{base}.reward"), "needs at least one candidate"));
            }
            for (j, t) in reward.iter().enumerate() {
                validate_table(t, spec, 0.0, 1.0, &format!("{base}.reward[{j}]"), out);
            }
            let declared: Vec<usize> = (0..spec.num_resources())
                .filter(|&i| !spec.constraints.resources[i].is_time)
                .collect();
            if consumption.len() != declared.len() {
                out.push(Issue::new(
                    format!("{base}.consumption"),
                    format!("expected one class per non-time resource ({})", declared.len()),
                ));
            }
            for (k, class) in consumption.iter().enumerate() {
                if class.is_empty() {
                    out.push(Issue::new(
                        format!("{base}.consumption[{k}]"),
                        "needs at least one candidate",
                    ));
                }
                for (j, t) in class.iter().enumerate() {
                    validate_table(t, spec, -1.0, 1.0, &format!("{base}.consumption[{k}][{j}]"), out);
                }
            }
            if let Some(a) = share_alpha {
                if !(0.0..=1.0).contains(a) {
                    out.push(Issue::new(format!("{base}.share_alpha"), "must lie in [0, 1]"));
                }
            }
        }
        RegressionConfig::Linear { features, ridge, .. } => {
            validate_features(features, spec, &format!("{base}.features"), out);
            if !(*ridge > 0.0) {
                out.push(Issue::new(format!("{base}.ridge"), "must be positive"));
            }
        }
        RegressionConfig::Ogd {
            features,
            step_size,
            radius,
        } => {
            validate_features(features, spec, &format!("{base}.features"), out);
            if !(*step_size > 0.0) {
                out.push(Issue::new(format!("{base}.step_size"), "must be positive"));
            }
            if !(*radius > 0.0) {
                out.push(Issue::new(format!("{base}.radius"), "must be positive"));
            }
        }
        RegressionConfig::Direct { ridge } => {
            if !(*ridge > 0.0) {
                out.push(Issue::new(format!("{base}.ridge"), "must be positive"));
            }
        }
    }
}
