use std::fs;
use std::path::{Path, PathBuf};

use guided_minimax::arena::{
    detect_eps_nash, regret_report, run_match_trusted, ColumnPolicy, FloatGame, MatchOptions,
};
use guided_minimax::designer::{design, DesignOptions, DesignedGame};
use guided_minimax::game::expected_payoff;
use guided_minimax::instances::random_target;
use guided_minimax::learners::RateSchedule;
use guided_minimax::numeric::{Rational, Scalar};
use guided_minimax::verifier::certify;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::ExperimentConfig;
use crate::output::{
    float, write_json, write_trajectory, Numbers, Summary, CERTIFICATE_FILE, GAME_FILE, SUMMARY_FILE, SWEEP_FILE,
};
use crate::CliError;

pub struct Context {
    pub config: ExperimentConfig,
    pub out: PathBuf,
    pub numbers: Numbers,
}

impl Context {
    fn out_dir(&self) -> Result<&Path, CliError> {
        ensure_dir(&self.out)?;
        Ok(&self.out)
    }
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })
}

fn design_options(cfg: &ExperimentConfig, run_oracle: bool) -> DesignOptions {
    DesignOptions {
        z: cfg.z.as_ref().map(|e| e.0.clone()),
        v1: cfg.v1.as_ref().map(|e| e.0.clone()),
        gap: cfg.gap.as_ref().map(|e| e.0.clone()),
        run_oracle,
    }
}

fn design_from_config(cfg: &ExperimentConfig, run_oracle: bool) -> Result<DesignedGame, CliError> {
    let x = cfg.x_star()?;
    let y = cfg.y_star()?;
    let v = cfg.value()?;
    Ok(design(&x, &y, &v, &design_options(cfg, run_oracle))?)
}

pub fn design_cmd(ctx: &Context) -> Result<(), CliError> {
    let game = design_from_config(&ctx.config, ctx.config.run_oracle)?;
    let dir = ctx.out_dir()?;
    write_json(dir, GAME_FILE, &ctx.numbers.designed_game(&game))?;
    println!(
        "{} game, {}x{}, value {}, written to {}",
        game.construction,
        game.matrix.n_rows(),
        game.matrix.n_cols(),
        game.value.0,
        dir.join(GAME_FILE).display()
    );
    Ok(())
}

pub fn verify_cmd(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.config;
    let a = cfg
        .matrix()?
        .ok_or_else(|| CliError::Input("config is missing matrix".into()))?;
    let x = cfg.x_star()?;
    let y = cfg.y_star()?;
    check_dimensions(a.n_rows(), a.n_cols(), x.dimension(), y.dimension())?;
    let cert = certify(&a, &x, &y, cfg.run_oracle)?;
    let dir = ctx.out_dir()?;
    write_json(dir, CERTIFICATE_FILE, &ctx.numbers.certificate(&cert))?;
    println!(
        "pair_ok={} lemma_ok={} kkt_unique={} oracle_agrees={}",
        cert.pair_ok,
        cert.lemma_ok,
        flag(cert.kkt_unique),
        flag(cert.oracle_agrees)
    );
    if cert.is_unique_minimax() {
        Ok(())
    } else {
        Err(CliError::NotCertified(dir.join(CERTIFICATE_FILE)))
    }
}

fn flag(b: Option<bool>) -> &'static str {
    match b {
        Some(true) => "true",
        Some(false) => "false",
        None => "n/a",
    }
}

fn check_dimensions(rows: usize, cols: usize, x: usize, y: usize) -> Result<(), CliError> {
    if x != rows {
        return Err(CliError::Input(format!("x_star has {x} entries but the matrix has {rows} rows")));
    }
    if y != cols {
        return Err(CliError::Input(format!("y_star has {y} entries but the matrix has {cols} columns")));
    }
    Ok(())
}

/// Builds the simulation game, writing `game.json` or `certificate.json`
/// alongside.
fn prepare_game(ctx: &Context, trust: bool, dir: &Path) -> Result<FloatGame, CliError> {
    let cfg = &ctx.config;
    let Some(a) = cfg.matrix()? else {
        let game = design_from_config(cfg, cfg.run_oracle && !trust)?;
        write_json(dir, GAME_FILE, &ctx.numbers.designed_game(&game))?;
        return Ok(FloatGame::from_designed(&game)?);
    };
    let x = cfg.x_star()?;
    let y = cfg.y_star()?;
    check_dimensions(a.n_rows(), a.n_cols(), x.dimension(), y.dimension())?;
    if !trust {
        let cert = certify(&a, &x, &y, cfg.run_oracle)?;
        write_json(dir, CERTIFICATE_FILE, &ctx.numbers.certificate(&cert))?;
        if !cert.is_unique_minimax() {
            return Err(CliError::NotCertified(dir.join(CERTIFICATE_FILE)));
        }
    }
    let value: Rational = expected_payoff(&x, &a, &y)?;
    Ok(FloatGame::trusted(a.to_f64(), x.to_f64(), y.to_f64(), value.to_f64())?)
}

fn schedule_json(rate: RateSchedule) -> Value {
    match rate {
        RateSchedule::Constant { eta } => json!({ "kind": "constant", "eta": float(eta) }),
        RateSchedule::InverseSqrt { eta } => json!({ "kind": "inverse-sqrt", "eta": float(eta) }),
    }
}

/// Plays one match and writes its trajectory and summary into `dir`.
fn play(cfg: &ExperimentConfig, game: &FloatGame, dir: &Path, seed: u64) -> Result<Value, CliError> {
    let learner = cfg.learner(game.n_rows())?;
    let policy = cfg.policy()?;
    let options = MatchOptions {
        horizon: cfg.horizon()?,
        seed,
        confirmation_rounds: cfg.confirmation_rounds(),
    };
    let eps = cfg.eps_nash()?;
    let traj = run_match_trusted(game, &learner, &policy, &options)?;
    write_trajectory(dir, &traj)?;
    let summary = Summary {
        learner: learner.kind.name(),
        schedule: schedule_json(learner.rate.expect("config always fixes the rate")),
        policy: cfg.policy.as_str(),
        epsilon_lock: match policy {
            ColumnPolicy::Lrca { epsilon_lock } => Some(epsilon_lock),
            ColumnPolicy::ConstantYStar => None,
        },
        horizon: options.horizon,
        seed,
        eps_nash: eps,
        eps_nash_round: detect_eps_nash(&traj, eps)?,
        regret: regret_report(&traj)?,
        trajectory: &traj,
    }
    .to_json();
    write_json(dir, SUMMARY_FILE, &summary)?;
    Ok(summary)
}

pub fn simulate_cmd(ctx: &Context, trust: bool) -> Result<(), CliError> {
    let cfg = &ctx.config;
    // Reject bad run settings before any design or certification work.
    cfg.horizon()?;
    cfg.policy()?;
    cfg.eps_nash()?;
    let dir = ctx.out_dir()?;
    let game = prepare_game(ctx, trust, dir)?;
    let summary = play(cfg, &game, dir, cfg.seed)?;
    println!(
        "{} rounds, lock round {}, eps-Nash round {}, final distance {}",
        summary["rounds_played"], summary["lock_round"], summary["eps_nash_round"], summary["final_distance"]
    );
    Ok(())
}

/// Plays `count` matches on random designed games, one directory per match.
/// Match `i` draws its target from seed `config.seed + i`.
pub fn sweep_cmd(ctx: &Context, count: usize) -> Result<(), CliError> {
    let cfg = &ctx.config;
    cfg.horizon()?;
    cfg.policy()?;
    cfg.eps_nash()?;
    let max_dim = cfg.sweep_max_dim()?;
    let dir = ctx.out_dir()?;

    let rows = (0..count)
        .into_par_iter()
        .map(|i| -> Result<Value, CliError> {
            let seed = cfg.seed.wrapping_add(i as u64);
            let target = random_target(&mut ChaCha8Rng::seed_from_u64(seed), max_dim);
            let game = design(
                &target.x_star,
                &target.y_star,
                &target.v,
                &DesignOptions {
                    run_oracle: cfg.run_oracle,
                    ..Default::default()
                },
            );
            let match_dir = dir.join(format!("match_{i:04}"));
            ensure_dir(&match_dir)?;
            let game = match game {
                Ok(g) => g,
                Err(e) => return Ok(json!({ "index": i, "seed": seed, "error": e.name() })),
            };
            write_json(&match_dir, GAME_FILE, &ctx.numbers.designed_game(&game))?;
            let summary = play(cfg, &FloatGame::from_designed(&game)?, &match_dir, seed)?;
            Ok(json!({
                "index": i,
                "seed": seed,
                "rows": game.matrix.n_rows(),
                "cols": game.matrix.n_cols(),
                "construction": game.construction.to_string(),
                "rounds_played": summary["rounds_played"],
                "lock_round": summary["lock_round"],
                "eps_nash_round": summary["eps_nash_round"],
                "final_distance": summary["final_distance"],
            }))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let locked = rows.iter().filter(|r| !r["lock_round"].is_null()).count();
    write_json(dir, SWEEP_FILE, &Value::Array(rows))?;
    println!("{count} matches, {locked} locked, results in {}", dir.display());
    Ok(())
}
