//! Row-player no-regret learners with a common stepping interface.
//!
//! All three kinds are follow-the-regularized-leader over the cumulative
//! loss `L`: the entropic ones play `x ∝ exp(-η L)`, the Euclidean one plays
//! the simplex projection of `-η L`. Internally the learner keeps `L` shifted
//! so its minimum is zero. A loss that is constant across actions therefore
//! leaves the shifted vector, and with it the iterate, bit-for-bit unchanged.

use std::fmt;

use thiserror::Error;

use crate::game::{euclidean, MixedStrategy, PayoffMatrix};
use crate::numeric::Scalar;

/// Drift threshold below which a learner counts as frozen.
pub const STABILITY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LearnerError {
    #[error("learner dimension must be at least 1, got {0}")]
    BadDimension(usize),
    #[error("loss has {found} entries, learner has {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("loss entry {index} is not finite: {value}")]
    NonFiniteLoss { index: usize, value: f64 },
    #[error("projection input entry {index} is not finite: {value}")]
    NonFiniteInput { index: usize, value: f64 },
    #[error("step size must be positive and finite, got {0}")]
    BadRate(f64),
    #[error("stability probe needs at least 2 rounds, got {0}")]
    TooFewRounds(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LearnerKind {
    Mwu,
    FtrlEntropy,
    FtrlEuclidean,
}

impl LearnerKind {
    pub const ALL: [LearnerKind; 3] = [LearnerKind::Mwu, LearnerKind::FtrlEntropy, LearnerKind::FtrlEuclidean];

    pub fn name(self) -> &'static str {
        match self {
            LearnerKind::Mwu => "mwu",
            LearnerKind::FtrlEntropy => "ftrl-entropy",
            LearnerKind::FtrlEuclidean => "ftrl-euclidean",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

impl fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Step size as a function of the number `s >= 1` of losses observed so far.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateSchedule {
    Constant { eta: f64 },
    /// `eta / sqrt(s)`.
    InverseSqrt { eta: f64 },
}

impl RateSchedule {
    /// `sqrt(ln n / s)` for the entropic kinds, `1 / sqrt(s)` for the Euclidean one.
    pub fn default_for(kind: LearnerKind, n: usize) -> Self {
        let eta = match kind {
            LearnerKind::FtrlEuclidean => 1.0,
            _ if n <= 1 => 1.0,
            _ => (n as f64).ln().sqrt(),
        };
        RateSchedule::InverseSqrt { eta }
    }

    pub fn eta(&self) -> f64 {
        match *self {
            RateSchedule::Constant { eta } | RateSchedule::InverseSqrt { eta } => eta,
        }
    }

    pub fn at(&self, s: u64) -> f64 {
        match *self {
            RateSchedule::Constant { eta } => eta,
            RateSchedule::InverseSqrt { eta } => eta / (s.max(1) as f64).sqrt(),
        }
    }

    fn validate(&self) -> Result<(), LearnerError> {
        let eta = self.eta();
        if !(eta.is_finite() && eta > 0.0) {
            return Err(LearnerError::BadRate(eta));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnerState {
    kind: LearnerKind,
    rate: RateSchedule,
    round: u64,
    cumulative_loss: Vec<f64>,
    shifted_loss: Vec<f64>,
    current: MixedStrategy<f64>,
}

impl LearnerState {
    pub fn new(kind: LearnerKind, n: usize, rate: RateSchedule) -> Result<Self, LearnerError> {
        if n == 0 {
            return Err(LearnerError::BadDimension(n));
        }
        rate.validate()?;
        Ok(LearnerState {
            kind,
            rate,
            round: 0,
            cumulative_loss: vec![0.0; n],
            shifted_loss: vec![0.0; n],
            current: MixedStrategy::uniform(n),
        })
    }

    pub fn with_default_rate(kind: LearnerKind, n: usize) -> Result<Self, LearnerError> {
        Self::new(kind, n, RateSchedule::default_for(kind, n))
    }

    pub fn kind(&self) -> LearnerKind {
        self.kind
    }

    pub fn rate(&self) -> RateSchedule {
        self.rate
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn dimension(&self) -> usize {
        self.cumulative_loss.len()
    }

    /// Running sum of every loss vector fed so far.
    pub fn cumulative_loss(&self) -> &[f64] {
        &self.cumulative_loss
    }

    pub fn current(&self) -> &MixedStrategy<f64> {
        &self.current
    }

    /// Absorbs one loss vector and moves to the next iterate.
    pub fn observe(&mut self, loss: &[f64]) -> Result<&MixedStrategy<f64>, LearnerError> {
        let n = self.dimension();
        if loss.len() != n {
            return Err(LearnerError::DimensionMismatch {
                expected: n,
                found: loss.len(),
            });
        }
        if let Some((index, &value)) = loss.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(LearnerError::NonFiniteLoss { index, value });
        }
        let low = loss.iter().copied().fold(f64::INFINITY, f64::min);
        for ((cum, shifted), &l) in self.cumulative_loss.iter_mut().zip(&mut self.shifted_loss).zip(loss) {
            *cum += l;
            *shifted += l - low;
        }
        let floor = self.shifted_loss.iter().copied().fold(f64::INFINITY, f64::min);
        if floor != 0.0 {
            self.shifted_loss.iter_mut().for_each(|s| *s -= floor);
        }
        self.round += 1;
        let eta = self.rate.at(self.round);
        self.current = match self.kind {
            LearnerKind::Mwu | LearnerKind::FtrlEntropy => entropic_argmin(&self.shifted_loss, eta),
            LearnerKind::FtrlEuclidean => {
                let point: Vec<f64> = self.shifted_loss.iter().map(|s| -eta * s).collect();
                project_simplex(&point)?
            }
        };
        Ok(&self.current)
    }
}

/// Value-style step: consumes the state and returns the successor with its iterate.
pub fn learner_step(
    mut state: LearnerState,
    loss: &[f64],
) -> Result<(LearnerState, MixedStrategy<f64>), LearnerError> {
    let next = state.observe(loss)?.clone();
    Ok((state, next))
}

fn entropic_argmin(shifted: &[f64], eta: f64) -> MixedStrategy<f64> {
    let weights: Vec<f64> = shifted.iter().map(|s| (-eta * s).exp()).collect();
    let total: f64 = weights.iter().sum();
    MixedStrategy::from_weights_unchecked(weights.into_iter().map(|w| w / total).collect())
}

/// Euclidean projection onto the probability simplex (sort and threshold).
pub fn project_simplex(point: &[f64]) -> Result<MixedStrategy<f64>, LearnerError> {
    if point.is_empty() {
        return Err(LearnerError::BadDimension(0));
    }
    if let Some((index, &value)) = point.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(LearnerError::NonFiniteInput { index, value });
    }
    let mut sorted = point.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut prefix = 0.0;
    let mut theta = 0.0;
    for (i, &u) in sorted.iter().enumerate() {
        prefix += u;
        let candidate = (prefix - 1.0) / (i as f64 + 1.0);
        if u - candidate > 0.0 {
            theta = candidate;
        } else {
            break;
        }
    }
    let projected: Vec<f64> = point.iter().map(|&p| (p - theta).max(0.0)).collect();
    Ok(MixedStrategy::from_weights_unchecked(projected))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport {
    pub stable: bool,
    pub max_drift: f64,
}

/// Feeds `A y*` to a fresh learner for `rounds` rounds and measures how far
/// consecutive iterates move.
pub fn stability_probe<T: Scalar>(
    kind: LearnerKind,
    rate: RateSchedule,
    a: &PayoffMatrix<T>,
    y_star: &MixedStrategy<T>,
    rounds: usize,
) -> Result<StabilityReport, LearnerError> {
    if rounds < 2 {
        return Err(LearnerError::TooFewRounds(rounds));
    }
    if y_star.dimension() != a.n_cols() {
        return Err(LearnerError::DimensionMismatch {
            expected: a.n_cols(),
            found: y_star.dimension(),
        });
    }
    let loss: Vec<f64> = a
        .times_column_strategy(y_star.weights())
        .iter()
        .map(Scalar::to_f64)
        .collect();
    let mut learner = LearnerState::new(kind, a.n_rows(), rate)?;
    let mut max_drift: f64 = 0.0;
    for _ in 0..rounds {
        let before = learner.current().weights().to_vec();
        let after = learner.observe(&loss)?;
        max_drift = max_drift.max(euclidean(&before, after.weights()));
    }
    Ok(StabilityReport {
        stable: max_drift <= STABILITY_TOLERANCE,
        max_drift,
    })
}
