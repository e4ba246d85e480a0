//! Experiment configuration read from JSON.
//!
//! Every exact quantity (targets, value, construction parameters, matrix
//! entries) may be written either as a JSON number or as a string such as
//! `"1/3"` or `"0.125"`. Both forms are parsed as exact rationals.

use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use guided_minimax::arena::{ColumnPolicy, LearnerSpec, DEFAULT_CONFIRMATION_ROUNDS, DEFAULT_HORIZON};
use guided_minimax::game::{MixedStrategy, PayoffMatrix, RationalMatrix, RationalStrategy};
use guided_minimax::learners::{LearnerKind, RateSchedule};
use guided_minimax::lrca::DEFAULT_EPSILON_LOCK;
use guided_minimax::numeric::{parse_rational, Rational};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer};

use crate::CliError;

/// How numbers are written into JSON artifacts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NumericMode {
    /// Exact `"p/q"` strings.
    #[default]
    Rational,
    /// Nearest doubles.
    Float,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exact(pub Rational);

impl<'de> Deserialize<'de> for Exact {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = match serde_json::Value::deserialize(deserializer)? {
            serde_json::Value::String(s) => s,
            serde_json::Value::Number(n) => n.to_string(),
            other => return Err(D::Error::custom(format!("expected a number or a string, found {other}"))),
        };
        parse_rational(&text).map(Exact).map_err(D::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleName {
    #[default]
    InverseSqrt,
    Constant,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerConfig {
    #[serde(default)]
    pub kind: Option<String>,
    #[serde(default)]
    pub schedule: ScheduleName,
    /// Base step size; the kind's default when absent.
    #[serde(default)]
    pub eta: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyName {
    #[default]
    Lrca,
    ConstantYstar,
}

impl PolicyName {
    pub fn as_str(self) -> &'static str {
        match self {
            PolicyName::Lrca => "lrca",
            PolicyName::ConstantYstar => "constant-ystar",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub x_star: Option<Vec<Exact>>,
    #[serde(default)]
    pub y_star: Option<Vec<Exact>>,
    #[serde(default)]
    pub v: Option<Exact>,
    #[serde(default)]
    pub z: Option<Exact>,
    #[serde(default)]
    pub v1: Option<Exact>,
    #[serde(default)]
    pub gap: Option<Exact>,
    /// Explicit payoff matrix for `verify`, or for `simulate` instead of a
    /// designed game.
    #[serde(default)]
    pub matrix: Option<Vec<Vec<Exact>>>,
    #[serde(default)]
    pub learner: LearnerConfig,
    #[serde(default)]
    pub policy: PolicyName,
    #[serde(default)]
    pub epsilon_lock: Option<f64>,
    #[serde(default)]
    pub horizon: Option<usize>,
    /// Rounds played after the lock before stopping.
    #[serde(default)]
    pub confirmation_rounds: Option<usize>,
    /// Ignore the lock and always play `horizon` rounds.
    #[serde(default)]
    pub full_horizon: bool,
    #[serde(default)]
    pub eps_nash: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_true")]
    pub run_oracle: bool,
    /// Largest game dimension drawn by `simulate --sweep`.
    #[serde(default)]
    pub sweep_max_dim: Option<usize>,
    #[serde(default)]
    pub mode: Option<NumericMode>,
    #[serde(default)]
    pub out: Option<PathBuf>,

    // Fields written by `design` and `verify`; accepted so their output can be fed back in.
    #[serde(default)]
    pub construction: Option<serde_json::Value>,
    #[serde(default)]
    pub value: Option<serde_json::Value>,
    #[serde(default)]
    pub row_perm: Option<serde_json::Value>,
    #[serde(default)]
    pub col_perm: Option<serde_json::Value>,
    #[serde(default)]
    pub sharpness: Option<serde_json::Value>,
    #[serde(default)]
    pub parameters: Option<serde_json::Value>,
    #[serde(default)]
    pub certificate: Option<serde_json::Value>,
}

fn default_true() -> bool {
    true
}

pub const DEFAULT_EPS_NASH: f64 = 0.05;
pub const DEFAULT_SWEEP_MAX_DIM: usize = 4;

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("malformed config: {e}")))
    }

    pub fn x_star(&self) -> Result<RationalStrategy, CliError> {
        strategy("x_star", self.x_star.as_deref())
    }

    pub fn y_star(&self) -> Result<RationalStrategy, CliError> {
        strategy("y_star", self.y_star.as_deref())
    }

    pub fn value(&self) -> Result<Rational, CliError> {
        self.v
            .as_ref()
            .map(|e| e.0.clone())
            .ok_or_else(|| CliError::Input("config is missing v".into()))
    }

    pub fn matrix(&self) -> Result<Option<RationalMatrix>, CliError> {
        let Some(rows) = &self.matrix else {
            return Ok(None);
        };
        let rows = rows
            .iter()
            .map(|r| r.iter().map(|e| e.0.clone()).collect())
            .collect();
        PayoffMatrix::from_rows(rows)
            .map(Some)
            .map_err(|e| CliError::Input(format!("matrix: {e}")))
    }

    pub fn horizon(&self) -> Result<usize, CliError> {
        match self.horizon.unwrap_or(DEFAULT_HORIZON) {
            0 => Err(CliError::Input("horizon must be at least one round".into())),
            t => Ok(t),
        }
    }

    pub fn confirmation_rounds(&self) -> Option<usize> {
        if self.full_horizon {
            None
        } else {
            Some(self.confirmation_rounds.unwrap_or(DEFAULT_CONFIRMATION_ROUNDS))
        }
    }

    pub fn eps_nash(&self) -> Result<f64, CliError> {
        positive("eps_nash", self.eps_nash.unwrap_or(DEFAULT_EPS_NASH))
    }

    /// Learner for a game with `n` rows. A constant schedule without `eta`
    /// uses the kind's default base rate.
    pub fn learner(&self, n: usize) -> Result<LearnerSpec, CliError> {
        let name = self.learner.kind.as_deref().unwrap_or("mwu");
        let kind = LearnerKind::from_name(name).ok_or_else(|| {
            CliError::Input(format!(
                "unknown learner {name:?}; expected one of mwu, ftrl-entropy, ftrl-euclidean"
            ))
        })?;
        let eta = match self.learner.eta {
            Some(e) => positive("learner.eta", e)?,
            None => RateSchedule::default_for(kind, n).eta(),
        };
        let rate = match self.learner.schedule {
            ScheduleName::InverseSqrt => RateSchedule::InverseSqrt { eta },
            ScheduleName::Constant => RateSchedule::Constant { eta },
        };
        Ok(LearnerSpec::with_rate(kind, rate))
    }

    pub fn policy(&self) -> Result<ColumnPolicy, CliError> {
        Ok(match self.policy {
            PolicyName::Lrca => ColumnPolicy::Lrca {
                epsilon_lock: positive("epsilon_lock", self.epsilon_lock.unwrap_or(DEFAULT_EPSILON_LOCK))?,
            },
            PolicyName::ConstantYstar => ColumnPolicy::ConstantYStar,
        })
    }

    pub fn sweep_max_dim(&self) -> Result<usize, CliError> {
        match self.sweep_max_dim.unwrap_or(DEFAULT_SWEEP_MAX_DIM) {
            d if d >= 2 => Ok(d),
            d => Err(CliError::Input(format!("sweep_max_dim must be at least 2, got {d}"))),
        }
    }
}

fn positive(name: &str, x: f64) -> Result<f64, CliError> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(CliError::Input(format!("{name} must be positive and finite, got {x}")))
    }
}

fn strategy(name: &str, weights: Option<&[Exact]>) -> Result<RationalStrategy, CliError> {
    let weights = weights.ok_or_else(|| CliError::Input(format!("config is missing {name}")))?;
    MixedStrategy::new(weights.iter().map(|e| e.0.clone()).collect())
        .map_err(|e| CliError::Input(format!("{name}: {e}")))
}
