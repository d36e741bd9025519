//! Experiment configuration.
//!
//! The file is TOML. Every key is optional; omitted keys take the default
//! model values. Unknown keys are rejected.
//!
//! ```toml
//! omega_s = 0.7
//! omega_b1 = [1.0, 1.0]
//! omega_b2 = [1.0]
//! beta = 0.01
//! temperature = 0.02
//! lambda = [0, 1, 2, 10]
//! lambda0 = [0.1, 1]
//! regime = "any"                  # any | antiferromagnetic | ferromagnetic
//! system_hamiltonian = "sum"      # sum | literal-product
//! edges = [[1, 3], [1, 4], [2, 5]]
//! t_max = 50.0
//! dt = 0.05
//!
//! [state]
//! kind = "bell"                   # bell | partial | partial-perturbed | custom
//! epsilon = 0.1
//!
//! [zeno]
//! n = [1, 2, 4, 8, 16, 32]
//! scope = "system-reduced"        # system-reduced | full-state
//!
//! [output]
//! dir = "out"
//! format = "csv"                  # csv | json
//! ```

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{CouplingTopology, ModelParams, SystemHamiltonianForm};
use crate::states::SystemStateSpec;
use crate::zeno::{ProjectorScope, ZenoSchedule};

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("syntax error at line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unknown key at line {line}: {message}")]
    UnknownKey { line: usize, message: String },
    #[error("value out of range: {0}")]
    Range(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Json => "json",
        }
    }
}

/// Restriction on the sign of the intra-bath couplings.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    #[default]
    Any,
    /// All `lambda >= 0`.
    Antiferromagnetic,
    /// All `lambda <= 0`.
    Ferromagnetic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ZenoConfig {
    /// Measurement counts to simulate.
    pub n: Vec<usize>,
    /// Fixed interval between measurements. When absent, the total time is
    /// split evenly across the measurements.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interval: Option<f64>,
    /// Total protocol time; defaults to `2 pi / lambda0`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub total_time: Option<f64>,
    pub scope: ProjectorScope,
}

impl Default for ZenoConfig {
    fn default() -> Self {
        Self {
            n: vec![1, 2, 4, 8, 16, 32],
            interval: None,
            total_time: None,
            scope: ProjectorScope::SystemReduced,
        }
    }
}

impl ZenoConfig {
    /// Schedule for `n` measurements at coupling `lambda0`.
    pub fn schedule(&self, n: usize, lambda0: f64) -> crate::Result<ZenoSchedule> {
        match self.interval {
            Some(dt) => ZenoSchedule::new(n, dt, self.scope),
            None => {
                let total = match self.total_time {
                    Some(t) => t,
                    None => crate::zeno::coupling_period(lambda0)?,
                };
                ZenoSchedule::over_total_time(n, total, self.scope)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub format: OutputFormat,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            format: OutputFormat::Csv,
        }
    }
}

/// Fully defaulted and validated experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub omega_s: f64,
    pub omega_b1: Vec<f64>,
    pub omega_b2: Vec<f64>,
    pub beta: f64,
    pub temperature: f64,
    pub lambda: Vec<f64>,
    pub lambda0: Vec<f64>,
    pub regime: Regime,
    pub system_hamiltonian: SystemHamiltonianForm,
    pub edges: Vec<(usize, usize)>,
    pub t_max: f64,
    pub dt: f64,
    pub state: SystemStateSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zeno: Option<ZenoConfig>,
    pub output: OutputConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let p = ModelParams::default();
        Self {
            omega_s: p.omega_s,
            omega_b1: p.omega_b1,
            omega_b2: p.omega_b2,
            beta: p.beta_field,
            temperature: p.temperature,
            lambda: vec![0.0, 1.0, 2.0, 10.0],
            lambda0: vec![0.1, 1.0],
            regime: Regime::Any,
            system_hamiltonian: SystemHamiltonianForm::Sum,
            edges: CouplingTopology::default().edges,
            t_max: 50.0,
            dt: 0.05,
            state: SystemStateSpec::default(),
            zeno: None,
            output: OutputConfig::default(),
        }
    }
}

impl ExperimentConfig {
    /// Model parameters for one sweep point.
    pub fn params(&self, lambda: f64, lambda0: f64) -> ModelParams {
        ModelParams {
            omega_s: self.omega_s,
            omega_b1: self.omega_b1.clone(),
            omega_b2: self.omega_b2.clone(),
            beta_field: self.beta,
            lambda_intra: lambda,
            lambda_sb: lambda0,
            temperature: self.temperature,
            system_form: self.system_hamiltonian,
        }
    }

    pub fn topology(&self) -> CouplingTopology {
        CouplingTopology {
            edges: self.edges.clone(),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let range = |msg: String| Err(ConfigError::Range(msg));
        if self.lambda.is_empty() || self.lambda0.is_empty() {
            return range("lambda and lambda0 lists must be non-empty".into());
        }
        if self.temperature <= 0.0 || !self.temperature.is_finite() {
            return range(format!(
                "temperature must be positive and finite (got {})",
                self.temperature
            ));
        }
        if self.dt <= 0.0 || !self.dt.is_finite() {
            return range(format!("dt must be positive and finite (got {})", self.dt));
        }
        if self.t_max <= 0.0 || !self.t_max.is_finite() {
            return range(format!(
                "t_max must be positive and finite (got {})",
                self.t_max
            ));
        }
        let reals = [self.omega_s, self.beta]
            .into_iter()
            .chain(self.omega_b1.iter().copied())
            .chain(self.omega_b2.iter().copied())
            .chain(self.lambda.iter().copied())
            .chain(self.lambda0.iter().copied());
        for v in reals {
            if !v.is_finite() {
                return range(format!("non-finite parameter {v}"));
            }
        }
        let has_duplicates = |v: &[f64]| v.iter().enumerate().any(|(i, a)| v[..i].contains(a));
        if has_duplicates(&self.lambda) || has_duplicates(&self.lambda0) {
            return range("lambda and lambda0 entries must be distinct".into());
        }
        match self.regime {
            Regime::Antiferromagnetic if self.lambda.iter().any(|&l| l < 0.0) => {
                return range("antiferromagnetic regime requires lambda >= 0".into());
            }
            Regime::Ferromagnetic if self.lambda.iter().any(|&l| l > 0.0) => {
                return range("ferromagnetic regime requires lambda <= 0".into());
            }
            _ => {}
        }
        let params = self.params(self.lambda[0], self.lambda0[0]);
        let register = params
            .register()
            .map_err(|e| ConfigError::Range(e.to_string()))?;
        self.topology()
            .validate(&register)
            .map_err(|e| ConfigError::Range(e.to_string()))?;
        self.state
            .validate()
            .map_err(|e| ConfigError::Range(e.to_string()))?;
        crate::states::system_state_vector(&self.state)
            .map_err(|e| ConfigError::Range(e.to_string()))?;

        if let Some(z) = &self.zeno {
            if z.n.is_empty() || z.n.contains(&0) {
                return range("zeno.n must be a non-empty list of positive counts".into());
            }
            if z.n.iter().enumerate().any(|(i, a)| z.n[..i].contains(a)) {
                return range("zeno.n entries must be distinct".into());
            }
            if let Some(dt) = z.interval {
                if dt < 0.0 || !dt.is_finite() {
                    return range(format!(
                        "zeno.interval must be finite and non-negative (got {dt})"
                    ));
                }
            }
            if let Some(t) = z.total_time {
                if t < 0.0 || !t.is_finite() {
                    return range(format!(
                        "zeno.total_time must be finite and non-negative (got {t})"
                    ));
                }
            }
            if z.interval.is_none() && z.total_time.is_none() && self.lambda0.contains(&0.0) {
                return range(
                    "zeno needs an interval or total_time when lambda0 contains 0".into(),
                );
            }
            for &n in &z.n {
                for &l0 in &self.lambda0 {
                    z.schedule(n, l0)
                        .map_err(|e| ConfigError::Range(e.to_string()))?;
                }
            }
        }
        Ok(())
    }

    /// Serializes to the same TOML dialect [`parse_config`] reads.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always representable as TOML")
    }
}

fn line_of(text: &str, err: &toml::de::Error) -> usize {
    let start = err.span().map(|s| s.start.min(text.len())).unwrap_or(0);
    let line = text[..start].matches('\n').count() + 1;
    // Unknown-field errors point at the enclosing table; find the key itself.
    let key = err
        .message()
        .strip_prefix("unknown field `")
        .and_then(|m| m.split('`').next());
    key.and_then(|key| {
        text.lines().enumerate().skip(line - 1).find_map(|(i, l)| {
            let rest = l.trim_start().strip_prefix(key)?;
            rest.trim_start().starts_with('=').then_some(i + 1)
        })
    })
    .unwrap_or(line)
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
        let line = line_of(text, &e);
        let message = e.message().to_string();
        if message.contains("unknown field") {
            ConfigError::UnknownKey { line, message }
        } else if message.contains("unknown variant") {
            ConfigError::Range(format!("line {line}: {message}"))
        } else {
            ConfigError::Syntax { line, message }
        }
    })?;
    cfg.validate()?;
    Ok(cfg)
}
