//! JSON and CSV artifacts.

use std::fs;
use std::path::Path;

use guided_minimax::arena::{RegretReport, Trajectory};
use guided_minimax::designer::{DesignedGame, OffSupportRows};
use guided_minimax::game::{MixedStrategy, RationalMatrix};
use guided_minimax::numeric::{Rational, Scalar};
use guided_minimax::verifier::MinimaxCertificate;
use serde_json::{json, Map, Value};

use crate::config::NumericMode;
use crate::CliError;

pub const GAME_FILE: &str = "game.json";
pub const CERTIFICATE_FILE: &str = "certificate.json";
pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const SWEEP_FILE: &str = "sweep.json";

/// Writes rationals as `"p/q"` strings or as doubles.
#[derive(Debug, Clone, Copy)]
pub struct Numbers(pub NumericMode);

impl Numbers {
    pub fn scalar(&self, r: &Rational) -> Value {
        match self.0 {
            NumericMode::Rational => Value::String(format!("{}/{}", r.numer(), r.denom())),
            NumericMode::Float => float(r.to_f64()),
        }
    }

    pub fn vector<'a>(&self, v: impl IntoIterator<Item = &'a Rational>) -> Value {
        Value::Array(v.into_iter().map(|r| self.scalar(r)).collect())
    }

    pub fn matrix(&self, a: &RationalMatrix) -> Value {
        Value::Array((0..a.n_rows()).map(|i| self.vector(a.row(i))).collect())
    }

    fn optional(&self, r: Option<&Rational>) -> Value {
        r.map_or(Value::Null, |r| self.scalar(r))
    }

    pub fn certificate(&self, c: &MinimaxCertificate) -> Value {
        json!({
            "unique_minimax": c.is_unique_minimax(),
            "pair_ok": c.pair_ok,
            "value": self.scalar(&c.value.0),
            "lemma_ok": c.lemma_ok,
            "lemma_columns": c.lemma_columns,
            "kkt_unique": c.kkt_unique,
            "oracle_agrees": c.oracle_agrees,
            "witness": c.witness.as_ref().map_or(Value::Null, |w| self.vector(w)),
        })
    }

    fn off_rows(&self, off: &OffSupportRows) -> Value {
        match off {
            OffSupportRows::SpareColumn { column, height } => json!({
                "layout": "SpareColumn",
                "column": column,
                "height": self.scalar(height),
            }),
            OffSupportRows::Compensated { column, height, relief } => json!({
                "layout": "Compensated",
                "column": column,
                "height": self.scalar(height),
                "relief": self.scalar(relief),
            }),
            OffSupportRows::AlphaMargin => json!({ "layout": "AlphaMargin" }),
        }
    }

    pub fn designed_game(&self, g: &DesignedGame) -> Value {
        let p = &g.parameters;
        let parameters = json!({
            "z": self.optional(p.z.as_ref()),
            "v1": self.optional(p.v1.as_ref()),
            "y_bar": self.optional(p.y_bar.as_ref()),
            "gap": self.optional(p.gap.as_ref()),
            "alpha": self.vector(&p.alpha),
            "a": self.vector(&p.a),
            "beta": self.vector(&p.beta),
            "off_rows": p.off_rows.as_ref().map_or(Value::Null, |o| self.off_rows(o)),
        });
        json!({
            "construction": g.construction.to_string(),
            "matrix": self.matrix(&g.matrix),
            "x_star": self.vector(g.x_star.weights()),
            "y_star": self.vector(g.y_star.weights()),
            "value": self.scalar(&g.value.0),
            "row_perm": g.row_perm,
            "col_perm": g.col_perm,
            "sharpness": self.scalar(&g.sharpness()),
            "parameters": parameters,
            "certificate": g.certificate.as_ref().map_or(Value::Null, |c| self.certificate(c)),
        })
    }
}

/// Non-finite doubles become `null`.
pub fn float(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

pub struct Summary<'a> {
    pub learner: &'a str,
    pub schedule: Value,
    pub policy: &'a str,
    pub epsilon_lock: Option<f64>,
    pub horizon: usize,
    pub seed: u64,
    pub eps_nash: f64,
    pub eps_nash_round: Option<u64>,
    pub regret: RegretReport,
    pub trajectory: &'a Trajectory,
}

impl Summary<'_> {
    pub fn to_json(&self) -> Value {
        let traj = self.trajectory;
        let first = &traj.rounds[0];
        let last = traj.rounds.last().expect("non-empty trajectory");
        let average_x = traj.average_x().unwrap_or_default();
        let mut m = Map::new();
        m.insert("learner".into(), json!(self.learner));
        m.insert("schedule".into(), self.schedule.clone());
        m.insert("policy".into(), json!(self.policy));
        m.insert("epsilon_lock".into(), self.epsilon_lock.map_or(Value::Null, float));
        m.insert("horizon".into(), json!(self.horizon));
        m.insert("rounds_played".into(), json!(traj.len()));
        m.insert("seed".into(), json!(self.seed));
        m.insert(
            "regret".into(),
            json!({
                "row_regret": float(self.regret.row_regret),
                "col_regret": float(self.regret.col_regret),
                "average_row_regret": float(self.regret.average_row_regret()),
                "average_col_regret": float(self.regret.average_col_regret()),
            }),
        );
        m.insert("eps_nash".into(), float(self.eps_nash));
        m.insert("eps_nash_round".into(), json!(self.eps_nash_round));
        m.insert("lock_round".into(), json!(traj.lock_round));
        m.insert("initial_distance".into(), float(first.dist_to_target));
        m.insert("final_distance".into(), float(last.dist_to_target));
        m.insert("final_f_gap".into(), float(last.f_gap));
        m.insert(
            "final_x".into(),
            Value::Array(last.x.weights().iter().map(|&w| float(w)).collect()),
        );
        m.insert(
            "average_x".into(),
            Value::Array(average_x.into_iter().map(float).collect()),
        );
        Value::Object(m)
    }
}

pub fn write_json(dir: &Path, name: &str, value: &Value) -> Result<(), CliError> {
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value).expect("JSON values always serialize");
    text.push('\n');
    fs::write(&path, text).map_err(|source| CliError::Io { path, source })
}

fn weights_header(prefix: &str, s: &MixedStrategy<f64>) -> impl Iterator<Item = String> {
    let prefix = prefix.to_string();
    (0..s.dimension()).map(move |i| format!("{prefix}_{i}"))
}

/// Columns: `t, mode, alpha, f_gap, dist_to_target, payoff, x_0.., y_0..`.
pub fn write_trajectory(dir: &Path, traj: &Trajectory) -> Result<(), CliError> {
    let path = dir.join(TRAJECTORY_FILE);
    let io_err = |e: csv::Error| CliError::Csv {
        path: path.clone(),
        source: e,
    };
    let mut w = csv::Writer::from_path(&path).map_err(io_err)?;
    let first = &traj.rounds[0];
    let header: Vec<String> = ["t", "mode", "alpha", "f_gap", "dist_to_target", "payoff"]
        .into_iter()
        .map(String::from)
        .chain(weights_header("x", &first.x))
        .chain(weights_header("y", &first.y))
        .collect();
    w.write_record(&header).map_err(io_err)?;
    let mut record = Vec::with_capacity(header.len());
    for r in &traj.rounds {
        record.clear();
        record.push(r.t.to_string());
        record.push(r.mode.to_string());
        record.push(r.alpha.to_string());
        record.push(r.f_gap.to_string());
        record.push(r.dist_to_target.to_string());
        record.push(r.payoff.to_string());
        record.extend(r.x.weights().iter().map(f64::to_string));
        record.extend(r.y.weights().iter().map(f64::to_string));
        w.write_record(&record).map_err(io_err)?;
    }
    w.flush().map_err(|source| CliError::Io { path: path.clone(), source })
}
