//! Repeated play between a row learner and a column policy.
//!
//! Each round both sides commit using only feedback from earlier rounds,
//! then observe: the learner gets `A y_t` rescaled into `[0, 1]`, the column
//! policy gets `A^T x_t`. Every recorded metric uses the raw matrix.

use std::fmt;

use thiserror::Error;

use crate::designer::DesignedGame;
use crate::game::{euclidean, GameError, MixedStrategy, PayoffMatrix};
use crate::learners::{LearnerError, LearnerKind, LearnerState, RateSchedule};
use crate::lrca::{LrcaError, LrcaMode, LrcaState, DEFAULT_EPSILON_LOCK};
use crate::numeric::Scalar;

pub const DEFAULT_HORIZON: usize = 1_000_000;
pub const DEFAULT_CONFIRMATION_ROUNDS: usize = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ArenaError {
    #[error("horizon must be at least one round")]
    EmptyHorizon,
    #[error("game has no positive uniqueness certificate")]
    NonCertifiedGame,
    #[error("trajectory has no rounds")]
    EmptyTrajectory,
    #[error("this experiment needs the constant y* policy")]
    MisroutedPolicy,
    #[error("bad instance: {0}")]
    BadInstance(String),
    #[error("eps must be positive, got {0}")]
    BadEpsilon(f64),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Learner(#[from] LearnerError),
    #[error(transparent)]
    Lrca(#[from] LrcaError),
}

/// Simulation view of a game: `f64` matrix plus `A y*` taken from exact values.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatGame {
    pub matrix: PayoffMatrix<f64>,
    pub x_star: MixedStrategy<f64>,
    pub y_star: MixedStrategy<f64>,
    pub value: f64,
    a_y_star: Vec<f64>,
    low: f64,
    high: f64,
}

impl FloatGame {
    /// Requires a positive certificate on the designed game.
    pub fn from_designed(game: &DesignedGame) -> Result<Self, ArenaError> {
        match &game.certificate {
            Some(c) if c.is_unique_minimax() => {}
            _ => return Err(ArenaError::NonCertifiedGame),
        }
        let a_y_star = game
            .matrix
            .times_column_strategy(game.y_star.weights())
            .iter()
            .map(Scalar::to_f64)
            .collect();
        Ok(Self::assemble(
            game.matrix.to_f64(),
            game.x_star.to_f64(),
            game.y_star.to_f64(),
            game.value.0.to_f64(),
            a_y_star,
        ))
    }

    /// Builds a game without any certification. Callers vouch for `(x*, y*, v)`.
    pub fn trusted(
        matrix: PayoffMatrix<f64>,
        x_star: MixedStrategy<f64>,
        y_star: MixedStrategy<f64>,
        value: f64,
    ) -> Result<Self, ArenaError> {
        if x_star.dimension() != matrix.n_rows() {
            return Err(GameError::DimensionMismatch {
                expected: matrix.n_rows(),
                found: x_star.dimension(),
            }
            .into());
        }
        if y_star.dimension() != matrix.n_cols() {
            return Err(GameError::DimensionMismatch {
                expected: matrix.n_cols(),
                found: y_star.dimension(),
            }
            .into());
        }
        let a_y_star = matrix.times_column_strategy(y_star.weights());
        Ok(Self::assemble(matrix, x_star, y_star, value, a_y_star))
    }

    fn assemble(
        matrix: PayoffMatrix<f64>,
        x_star: MixedStrategy<f64>,
        y_star: MixedStrategy<f64>,
        value: f64,
        a_y_star: Vec<f64>,
    ) -> Self {
        let low = matrix.min_entry();
        let high = matrix.max_entry();
        FloatGame {
            matrix,
            x_star,
            y_star,
            value,
            a_y_star,
            low,
            high,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.matrix.n_rows()
    }

    pub fn n_cols(&self) -> usize {
        self.matrix.n_cols()
    }

    pub fn a_y_star(&self) -> &[f64] {
        &self.a_y_star
    }

    /// Affine rescaling into `[0, 1]` by the matrix extremes; identity for
    /// constant matrices.
    pub fn normalize_loss(&self, raw: &[f64]) -> Vec<f64> {
        let range = self.high - self.low;
        if range > 0.0 {
            raw.iter().map(|l| (l - self.low) / range).collect()
        } else {
            raw.to_vec()
        }
    }

    /// `f(x) = max_j (x^T A)_j`.
    pub fn best_response_payoff(&self, x: &[f64]) -> f64 {
        self.matrix
            .times_row_strategy(x)
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearnerSpec {
    pub kind: LearnerKind,
    /// `None` picks [`RateSchedule::default_for`].
    pub rate: Option<RateSchedule>,
}

impl LearnerSpec {
    pub fn new(kind: LearnerKind) -> Self {
        LearnerSpec { kind, rate: None }
    }

    pub fn with_rate(kind: LearnerKind, rate: RateSchedule) -> Self {
        LearnerSpec { kind, rate: Some(rate) }
    }

    fn build(&self, n: usize) -> Result<LearnerState, LearnerError> {
        let rate = self.rate.unwrap_or_else(|| RateSchedule::default_for(self.kind, n));
        LearnerState::new(self.kind, n, rate)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ColumnPolicy {
    Lrca { epsilon_lock: f64 },
    ConstantYStar,
}

impl Default for ColumnPolicy {
    fn default() -> Self {
        ColumnPolicy::Lrca {
            epsilon_lock: DEFAULT_EPSILON_LOCK,
        }
    }
}

impl ColumnPolicy {
    /// Guiding policy whose lock fires only once `‖x - x*‖₂ <= delta` is
    /// guaranteed by the game's sharpness (capped at the default threshold).
    pub fn lrca_within(game: &DesignedGame, delta: f64) -> Self {
        ColumnPolicy::Lrca {
            epsilon_lock: lock_threshold_for(game, delta),
        }
    }
}

/// `min(DEFAULT_EPSILON_LOCK, c * delta)` with `c` from [`DesignedGame::sharpness`].
pub fn lock_threshold_for(game: &DesignedGame, delta: f64) -> f64 {
    (game.sharpness().to_f64() * delta).min(DEFAULT_EPSILON_LOCK)
}

/// How the column strategy of a round was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RoundMode {
    Guiding,
    Locked,
    Constant,
}

impl fmt::Display for RoundMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RoundMode::Guiding => "Guiding",
            RoundMode::Locked => "Locked",
            RoundMode::Constant => "Constant",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub t: u64,
    pub x: MixedStrategy<f64>,
    pub y: MixedStrategy<f64>,
    /// `x_t^T A y_t`: the row player's loss and the column player's gain.
    pub payoff: f64,
    /// `f(x_t) - v`.
    pub f_gap: f64,
    pub dist_to_target: f64,
    pub alpha: f64,
    pub mode: RoundMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchOptions {
    pub horizon: usize,
    pub seed: u64,
    /// Stop this many rounds after the lock; `None` always plays the full horizon.
    pub confirmation_rounds: Option<usize>,
}

impl MatchOptions {
    pub fn new(horizon: usize, seed: u64) -> Self {
        MatchOptions {
            horizon,
            seed,
            confirmation_rounds: Some(DEFAULT_CONFIRMATION_ROUNDS),
        }
    }

    pub fn full_horizon(mut self) -> Self {
        self.confirmation_rounds = None;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub rounds: Vec<RoundRecord>,
    pub game: FloatGame,
    /// Carried for output stability; match dynamics are deterministic.
    pub seed: u64,
    /// Odd round after which the guiding policy locked onto `y*`.
    pub lock_round: Option<u64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    pub fn last(&self) -> Option<&RoundRecord> {
        self.rounds.last()
    }

    /// Running average of the row iterates.
    pub fn average_x(&self) -> Option<Vec<f64>> {
        let first = self.rounds.first()?;
        let mut sum = vec![0.0; first.x.dimension()];
        for r in &self.rounds {
            sum.iter_mut().zip(r.x.weights()).for_each(|(s, w)| *s += w);
        }
        let t = self.rounds.len() as f64;
        Some(sum.into_iter().map(|s| s / t).collect())
    }
}

enum Column {
    Lrca(LrcaState),
    Constant,
}

/// Plays a certified designed game with early stop after the lock.
pub fn run_match(
    game: &DesignedGame,
    learner: &LearnerSpec,
    policy: &ColumnPolicy,
    horizon: usize,
    seed: u64,
) -> Result<Trajectory, ArenaError> {
    let float = FloatGame::from_designed(game)?;
    run_match_trusted(&float, learner, policy, &MatchOptions::new(horizon, seed))
}

pub fn run_match_trusted(
    game: &FloatGame,
    learner: &LearnerSpec,
    policy: &ColumnPolicy,
    options: &MatchOptions,
) -> Result<Trajectory, ArenaError> {
    if options.horizon == 0 {
        return Err(ArenaError::EmptyHorizon);
    }
    let n = game.n_rows();
    let mut row = learner.build(n)?;
    let mut column = match *policy {
        ColumnPolicy::Lrca { epsilon_lock } => {
            Column::Lrca(LrcaState::new(game.y_star.clone(), game.value, n, epsilon_lock)?)
        }
        ColumnPolicy::ConstantYStar => Column::Constant,
    };

    let mut rounds = Vec::with_capacity(options.horizon.min(1 << 16));
    let mut feedback: Option<Vec<f64>> = None;
    let mut lock_round = None;
    let mut column_loss = vec![0.0; n];

    for t in 1..=options.horizon as u64 {
        let x = row.current().clone();
        let (y, alpha, mode) = match &mut column {
            Column::Constant => {
                column_loss.copy_from_slice(game.a_y_star());
                (game.y_star.clone(), 0.0, RoundMode::Constant)
            }
            Column::Lrca(state) => {
                let mv = state.step(feedback.as_deref())?;
                match mv.column {
                    Some(e) if mv.alpha > 0.0 => {
                        for (i, l) in column_loss.iter_mut().enumerate() {
                            *l = (1.0 - mv.alpha) * game.a_y_star()[i] + mv.alpha * game.matrix.get(i, e);
                        }
                    }
                    _ => column_loss.copy_from_slice(game.a_y_star()),
                }
                let mode = match mv.mode {
                    LrcaMode::Guiding => RoundMode::Guiding,
                    LrcaMode::Locked => RoundMode::Locked,
                };
                (mv.y, mv.alpha, mode)
            }
        };

        let row_payoffs = game.matrix.times_row_strategy(x.weights());
        let f = row_payoffs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let payoff = x.weights().iter().zip(&column_loss).map(|(a, b)| a * b).sum();
        rounds.push(RoundRecord {
            t,
            dist_to_target: euclidean(x.weights(), game.x_star.weights()),
            x,
            y,
            payoff,
            f_gap: f - game.value,
            alpha,
            mode,
        });

        row.observe(&game.normalize_loss(&column_loss))?;
        feedback = Some(row_payoffs);

        if let Column::Lrca(state) = &mut column {
            if t % 2 == 1 && lock_round.is_none() && state.maybe_lock(f) {
                lock_round = Some(t);
            }
        }
        if let (Some(lock), Some(confirm)) = (lock_round, options.confirmation_rounds) {
            if t >= lock + confirm as u64 {
                break;
            }
        }
    }
    Ok(Trajectory {
        rounds,
        game: game.clone(),
        seed: options.seed,
        lock_round,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegretReport {
    /// `Σ x_t^T A y_t - min_i Σ (A y_t)_i`.
    pub row_regret: f64,
    /// `max_j Σ (A^T x_t)_j - Σ x_t^T A y_t`.
    pub col_regret: f64,
    pub horizon: usize,
}

impl RegretReport {
    pub fn average_row_regret(&self) -> f64 {
        self.row_regret / self.horizon as f64
    }

    pub fn average_col_regret(&self) -> f64 {
        self.col_regret / self.horizon as f64
    }
}

/// Regrets against the best fixed pure strategy in hindsight. Sums of
/// `A y_t` are taken as `A (Σ y_t)`.
pub fn regret_report(traj: &Trajectory) -> Result<RegretReport, ArenaError> {
    let first = traj.rounds.first().ok_or(ArenaError::EmptyTrajectory)?;
    let mut sum_x = vec![0.0; first.x.dimension()];
    let mut sum_y = vec![0.0; first.y.dimension()];
    let mut total = 0.0;
    for r in &traj.rounds {
        sum_x.iter_mut().zip(r.x.weights()).for_each(|(s, w)| *s += w);
        sum_y.iter_mut().zip(r.y.weights()).for_each(|(s, w)| *s += w);
        total += r.payoff;
    }
    let a = &traj.game.matrix;
    let best_row = a.times_column_strategy(&sum_y).into_iter().fold(f64::INFINITY, f64::min);
    let best_col = a.times_row_strategy(&sum_x).into_iter().fold(f64::NEG_INFINITY, f64::max);
    Ok(RegretReport {
        row_regret: total - best_row,
        col_regret: best_col - total,
        horizon: traj.rounds.len(),
    })
}

/// First round whose `f_gap` is at most `eps`.
pub fn detect_eps_nash(traj: &Trajectory, eps: f64) -> Result<Option<u64>, ArenaError> {
    if !(eps > 0.0) {
        return Err(ArenaError::BadEpsilon(eps));
    }
    Ok(traj.rounds.iter().find(|r| r.f_gap <= eps).map(|r| r.t))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Claim1Report {
    pub final_distance: f64,
    pub min_distance: f64,
    /// `max_t ‖x_t - x_1‖`.
    pub max_shift: f64,
    pub trajectory: Trajectory,
}

/// Plays `y*` every round against a learner and reports how close the row
/// iterate ever gets to `x*`.
pub fn claim1_experiment(
    game: &DesignedGame,
    learner: &LearnerSpec,
    policy: &ColumnPolicy,
    horizon: usize,
) -> Result<Claim1Report, ArenaError> {
    if *policy != ColumnPolicy::ConstantYStar {
        return Err(ArenaError::MisroutedPolicy);
    }
    let support = game.x_star.support();
    if support.len() < 2 {
        return Err(ArenaError::BadInstance("x* is pure".into()));
    }
    let first = &game.x_star.weights()[support[0]];
    if support.iter().all(|&i| &game.x_star.weights()[i] == first) {
        return Err(ArenaError::BadInstance("x* is uniform on its support".into()));
    }
    let float = FloatGame::from_designed(game)?;
    let trajectory = run_match_trusted(
        &float,
        learner,
        policy,
        &MatchOptions::new(horizon, 0).full_horizon(),
    )?;
    let x1 = trajectory.rounds[0].x.weights().to_vec();
    let mut min_distance = f64::INFINITY;
    let mut max_shift: f64 = 0.0;
    for r in &trajectory.rounds {
        min_distance = min_distance.min(r.dist_to_target);
        max_shift = max_shift.max(euclidean(r.x.weights(), &x1));
    }
    Ok(Claim1Report {
        final_distance: trajectory.rounds.last().expect("horizon >= 1").dist_to_target,
        min_distance,
        max_shift,
        trajectory,
    })
}
