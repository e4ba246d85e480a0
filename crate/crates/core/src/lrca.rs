//! Column-player guiding policy (Last Round Convergence with Asymmetry).
//!
//! Odd rounds play `y*`. Even rounds look at the row player's previous
//! payoff vector `A^T x_{t-1}`, pick its best-response column `e_t`, and mix
//! `y_t = (1 - α_t) y* + α_t e_t` with `α_t = (f(x_{t-1}) - v) / max(n/4, 2)`.
//! Once the row player is within `epsilon_lock` of the value the policy
//! switches to `y*` for good.

use std::fmt;

use thiserror::Error;

use crate::game::{argmax_lowest, MixedStrategy};

pub const DEFAULT_EPSILON_LOCK: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LrcaError {
    #[error("even round {round} needs the row player's previous payoff vector")]
    MissingFeedback { round: u64 },
    #[error("feedback has {found} entries, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("lock threshold must be positive and finite, got {0}")]
    BadThreshold(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LrcaMode {
    Guiding,
    Locked,
}

impl fmt::Display for LrcaMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LrcaMode::Guiding => "Guiding",
            LrcaMode::Locked => "Locked",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LrcaState {
    y_star: MixedStrategy<f64>,
    value: f64,
    n: usize,
    round: u64,
    mode: LrcaMode,
    epsilon_lock: f64,
    last_alpha: f64,
}

/// One emitted column strategy with the data needed to reproduce it.
#[derive(Debug, Clone, PartialEq)]
pub struct LrcaMove {
    pub y: MixedStrategy<f64>,
    pub alpha: f64,
    /// Best-response column mixed in on a guiding even round.
    pub column: Option<usize>,
    pub mode: LrcaMode,
}

impl LrcaState {
    /// `n` is the row player's number of actions.
    pub fn new(y_star: MixedStrategy<f64>, value: f64, n: usize, epsilon_lock: f64) -> Result<Self, LrcaError> {
        if !(epsilon_lock.is_finite() && epsilon_lock > 0.0) {
            return Err(LrcaError::BadThreshold(epsilon_lock));
        }
        Ok(LrcaState {
            y_star,
            value,
            n,
            round: 0,
            mode: LrcaMode::Guiding,
            epsilon_lock,
            last_alpha: 0.0,
        })
    }

    pub fn mode(&self) -> LrcaMode {
        self.mode
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn last_alpha(&self) -> f64 {
        self.last_alpha
    }

    pub fn epsilon_lock(&self) -> f64 {
        self.epsilon_lock
    }

    pub fn y_star(&self) -> &MixedStrategy<f64> {
        &self.y_star
    }

    fn denominator(&self) -> f64 {
        (self.n as f64 / 4.0).max(2.0)
    }

    /// Emits `y_t` for the next round. `feedback` is `A^T x_{t-1}` and is
    /// only read on even guiding rounds.
    pub fn step(&mut self, feedback: Option<&[f64]>) -> Result<LrcaMove, LrcaError> {
        let t = self.round + 1;
        let m = self.y_star.dimension();
        let mv = if self.mode == LrcaMode::Locked || t % 2 == 1 {
            LrcaMove {
                y: self.y_star.clone(),
                alpha: 0.0,
                column: None,
                mode: self.mode,
            }
        } else {
            let fb = feedback.ok_or(LrcaError::MissingFeedback { round: t })?;
            if fb.len() != m {
                return Err(LrcaError::DimensionMismatch {
                    expected: m,
                    found: fb.len(),
                });
            }
            let (f, e) = argmax_lowest(fb);
            let alpha = ((f - self.value) / self.denominator()).clamp(0.0, 1.0);
            let weights = self
                .y_star
                .weights()
                .iter()
                .enumerate()
                .map(|(j, &w)| (1.0 - alpha) * w + if j == e { alpha } else { 0.0 })
                .collect();
            LrcaMove {
                y: MixedStrategy::from_weights_unchecked(weights),
                alpha,
                column: Some(e),
                mode: LrcaMode::Guiding,
            }
        };
        self.round = t;
        self.last_alpha = mv.alpha;
        Ok(mv)
    }

    /// Locks onto `y*` once `f_current - v <= epsilon_lock`. Never unlocks.
    pub fn maybe_lock(&mut self, f_current: f64) -> bool {
        if self.mode == LrcaMode::Guiding && f_current - self.value <= self.epsilon_lock {
            self.mode = LrcaMode::Locked;
        }
        self.mode == LrcaMode::Locked
    }
}

/// Value-style step returning the successor state, `y_t` and `α_t`.
pub fn lrca_step(
    mut state: LrcaState,
    feedback: Option<&[f64]>,
) -> Result<(LrcaState, MixedStrategy<f64>, f64), LrcaError> {
    let mv = state.step(feedback)?;
    Ok((state, mv.y, mv.alpha))
}

pub fn maybe_lock(mut state: LrcaState, f_current: f64) -> LrcaState {
    state.maybe_lock(f_current);
    state
}
