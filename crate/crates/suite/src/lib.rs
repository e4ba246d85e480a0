//! Acceptance criteria for the workspace. Each criterion has pinned
//! tolerances and a time budget, and reports one `PASS` or `FAIL` line with
//! its measured figures.

use std::time::{Duration, Instant};

use guided_minimax::arena::{
    claim1_experiment, detect_eps_nash, run_match, ColumnPolicy, LearnerSpec, DEFAULT_HORIZON,
};
use guided_minimax::designer::{design, DesignOptions, DesignedGame, OffSupportRows};
use guided_minimax::game::{MixedStrategy, PayoffMatrix, RationalMatrix, RationalStrategy};
use guided_minimax::instances::{constant_matrix, random_fully_mixed_target, random_matrix, random_target};
use guided_minimax::learners::{stability_probe, LearnerKind, LearnerState, RateSchedule, STABILITY_TOLERANCE};
use guided_minimax::lp::{column_program, enumerate_minimax_rows, row_program, solve_column_game, solve_lp, solve_row_game};
use guided_minimax::numeric::{int, rational, Rational};
use guided_minimax::verifier::check_row_uniqueness_kkt;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const TARGET_SEED: u64 = 0x5eed_0001;
const RANDOM_TARGETS: usize = 200;
const CONTROLS: usize = 50;

const C3_HORIZON: usize = 100_000;
const C3_MIN_FINAL_DISTANCE: f64 = 0.3;
const C3_SHIFT_TOLERANCE: f64 = 1e-12;

const C4_GAMES: usize = 20;
const C4_EPS: f64 = 0.05;
const C4_MAX_DISTANCE: f64 = 0.1;
const C4_CONFIRMATION: usize = 100;

const C5_ROUNDS: usize = 1000;

const C6_HORIZON: usize = 10_000;
const C6_SEQUENCES: u64 = 20;
const C6_SLACK: f64 = 0.01;

const C7_MATRICES: usize = 500;

pub struct Outcome {
    pub pass: bool,
    pub detail: String,
}

pub fn report(id: &str, title: &str, budget: Duration, run: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = run();
    let elapsed = start.elapsed();
    let in_time = elapsed <= budget;
    let pass = outcome.pass && in_time;
    println!(
        "{} {id} {title}: {} [{:.2?} of {:?}{}]",
        if pass { "PASS" } else { "FAIL" },
        outcome.detail,
        elapsed,
        budget,
        if in_time { "" } else { ", over budget" }
    );
    pass
}

fn designed_targets() -> Vec<(guided_minimax::instances::TargetSpec, DesignedGame)> {
    let mut rng = ChaCha8Rng::seed_from_u64(TARGET_SEED);
    let targets: Vec<_> = (0..RANDOM_TARGETS).map(|_| random_target(&mut rng, 6)).collect();
    targets
        .into_par_iter()
        .map(|t| {
            let g = design(&t.x_star, &t.y_star, &t.v, &DesignOptions::default())
                .unwrap_or_else(|e| panic!("design failed for {t:?}: {e}"));
            (t, g)
        })
        .collect()
}

fn row_times_matrix(a: &RationalMatrix, x: &RationalStrategy) -> Vec<Rational> {
    a.times_row_strategy(x.weights())
}

fn criterion_1() -> Outcome {
    let games = designed_targets();
    let mut row_ok = 0;
    let mut col_ok = 0;
    let mut positive = 0;
    let mut col_fail_square_support = 0;
    let mut col_fail_other = 0;
    for (t, g) in &games {
        let v = &t.v;
        if row_times_matrix(&g.matrix, &g.x_star).iter().all(|c| c == v) {
            row_ok += 1;
        }
        if g.matrix.times_column_strategy(g.y_star.weights()).iter().all(|r| r == v) {
            col_ok += 1;
        } else if g.parameters.off_rows == Some(OffSupportRows::AlphaMargin) {
            col_fail_square_support += 1;
        } else {
            col_fail_other += 1;
        }
        if g.matrix.entries().all(|e| e.is_positive()) {
            positive += 1;
        }
    }
    let total = games.len();
    Outcome {
        pass: row_ok == total && col_ok == total && positive == total,
        detail: format!(
            "x*^T A = v1: {row_ok}/{total}; A y* = v1: {col_ok}/{total} \
             (misses: {col_fail_square_support} with |supp x*| = |supp y*| = m < n, {col_fail_other} other); \
             entries > 0: {positive}/{total}"
        ),
    }
}

/// Designed game with its first support row duplicated; mass can be split
/// between the copies, so the row optimum is not unique.
fn duplicated_row_control(g: &DesignedGame) -> RationalMatrix {
    let mut rows = g.matrix.to_rows();
    let first = g.x_star.support()[0];
    rows.push(rows[first].clone());
    PayoffMatrix::from_rows(rows).unwrap()
}

fn criterion_2() -> Outcome {
    let games = designed_targets();
    let mut rng = ChaCha8Rng::seed_from_u64(TARGET_SEED ^ 0xc0);
    let mut controls: Vec<RationalMatrix> = Vec::new();
    for i in 0..CONTROLS {
        if i % 2 == 0 {
            let n = rng.gen_range(2..=6);
            let m = rng.gen_range(1..=6);
            controls.push(constant_matrix(n, m, rng.gen_range(1..=5)));
        } else {
            let g = &games[rng.gen_range(0..games.len())].1;
            controls.push(duplicated_row_control(g));
        }
    }

    let designed: Vec<(bool, bool)> = games
        .par_iter()
        .map(|(_, g)| {
            let (kkt, _) = check_row_uniqueness_kkt(&g.matrix, &g.x_star, &g.y_star).unwrap();
            let face = enumerate_minimax_rows(&g.matrix).unwrap();
            let vertex_is_target = face.unique_row && face.row_vertices[0] == g.x_star;
            (kkt == face.unique_row, vertex_is_target)
        })
        .collect();
    let control: Vec<(bool, bool)> = controls
        .par_iter()
        .map(|a| {
            let (_, x) = solve_row_game(a).unwrap();
            let (_, y) = solve_column_game(a).unwrap();
            let (kkt, _) = check_row_uniqueness_kkt(a, &x, &y).unwrap();
            let face = enumerate_minimax_rows(a).unwrap();
            (kkt == face.unique_row, !face.unique_row)
        })
        .collect();

    let agree = designed.iter().chain(&control).filter(|r| r.0).count();
    let total = designed.len() + control.len();
    let vertex = designed.iter().filter(|r| r.1).count();
    let nonunique_controls = control.iter().filter(|r| r.1).count();
    Outcome {
        pass: agree == total && vertex == designed.len() && nonunique_controls == control.len(),
        detail: format!(
            "KKT/oracle agreement {agree}/{total}; oracle vertex = x* on {vertex}/{} designed; \
             controls non-unique {nonunique_controls}/{}",
            designed.len(),
            control.len()
        ),
    }
}

fn strategy(w: &[(i64, i64)]) -> RationalStrategy {
    MixedStrategy::new(w.iter().map(|&(n, d)| rational(n, d)).collect()).unwrap()
}

fn criterion_3() -> Outcome {
    let x = strategy(&[(1, 4), (3, 4)]);
    let y = strategy(&[(1, 2), (1, 2)]);
    let g = design(&x, &y, &int(1), &DesignOptions::default()).unwrap();
    let r = claim1_experiment(&g, &LearnerSpec::new(LearnerKind::Mwu), &ColumnPolicy::ConstantYStar, C3_HORIZON).unwrap();
    Outcome {
        pass: r.final_distance >= C3_MIN_FINAL_DISTANCE && r.max_shift <= C3_SHIFT_TOLERANCE,
        detail: format!(
            "final ‖x_T - x*‖ = {:.6} (>= {C3_MIN_FINAL_DISTANCE}), max ‖x_t - x_1‖ = {:.3e}, T = {}",
            r.final_distance,
            r.max_shift,
            r.trajectory.len()
        ),
    }
}

fn constant_rate(kind: LearnerKind, n: usize) -> RateSchedule {
    RateSchedule::Constant {
        eta: RateSchedule::default_for(kind, n).eta(),
    }
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(TARGET_SEED ^ 0x4);
    // Half fully mixed, half with unsupported rows. Games whose unsupported
    // rows need the alpha margin are skipped: there A y* is not constant and
    // no learner is stable.
    let mut games: Vec<DesignedGame> = Vec::new();
    while games.len() < C4_GAMES {
        let t = if games.len() % 2 == 0 {
            random_fully_mixed_target(&mut rng, 6)
        } else {
            random_target(&mut rng, 6)
        };
        let g = design(&t.x_star, &t.y_star, &t.v, &DesignOptions::default()).unwrap();
        if g.parameters.off_rows != Some(OffSupportRows::AlphaMargin) {
            games.push(g);
        }
    }
    let partial = games.iter().filter(|g| g.parameters.off_rows.is_some()).count();
    let runs: Vec<(LearnerKind, usize)> = LearnerKind::ALL
        .into_iter()
        .flat_map(|k| (0..games.len()).map(move |i| (k, i)))
        .collect();
    let results: Vec<(bool, String)> = runs
        .par_iter()
        .map(|&(kind, i)| {
            let g = &games[i];
            let spec = LearnerSpec::with_rate(kind, constant_rate(kind, g.x_star.dimension()));
            let policy = ColumnPolicy::lrca_within(g, C4_MAX_DISTANCE);
            let traj = run_match(g, &spec, &policy, DEFAULT_HORIZON, i as u64).unwrap();
            let eps_round = detect_eps_nash(&traj, C4_EPS).unwrap();
            let Some(lock) = traj.lock_round else {
                return (false, format!("game {i} {kind}: no lock in {} rounds", traj.len()));
            };
            let after = &traj.rounds[lock as usize - 1..];
            let drift = after
                .windows(2)
                .map(|w| {
                    w[0].x.weights().iter().zip(w[1].x.weights()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
                })
                .fold(0.0, f64::max);
            let confirmed = after.len() > C4_CONFIRMATION;
            let dist = traj.last().unwrap().dist_to_target;
            let ok = eps_round.is_some() && confirmed && drift <= STABILITY_TOLERANCE && dist <= C4_MAX_DISTANCE;
            (
                ok,
                format!("game {i} {kind}: eps round {eps_round:?}, lock {lock}, drift {drift:.1e}, dist {dist:.4}"),
            )
        })
        .collect();
    let passed = results.iter().filter(|r| r.0).count();
    let worst = runs
        .iter()
        .zip(&results)
        .filter(|(_, r)| !r.0)
        .map(|(_, r)| r.1.clone())
        .next()
        .unwrap_or_default();
    Outcome {
        pass: passed == results.len(),
        detail: format!(
            "{passed}/{} matches converged and froze ({partial} of {} games have supp x* < n) {worst}",
            results.len(),
            games.len()
        ),
    }
}

fn criterion_5() -> Outcome {
    let mut games: Vec<DesignedGame> = designed_targets().into_iter().map(|(_, g)| g).collect();
    let half = strategy(&[(1, 2), (1, 2)]);
    games.push(design(&half, &half, &int(1), &DesignOptions { z: Some(rational(2, 5)), ..Default::default() }).unwrap());
    let x = strategy(&[(1, 2), (1, 2), (0, 1)]);
    let y = strategy(&[(2, 5), (2, 5), (1, 5)]);
    games.push(design(&x, &y, &int(1), &DesignOptions { v1: Some(rational(1, 10)), ..Default::default() }).unwrap());

    let verdicts: Vec<(bool, bool)> = games
        .par_iter()
        .map(|g| {
            let stable = LearnerKind::ALL.into_iter().all(|kind| {
                let rate = RateSchedule::default_for(kind, g.x_star.dimension());
                stability_probe(kind, rate, &g.matrix, &g.y_star, C5_ROUNDS).unwrap().stable
            });
            (stable, g.parameters.off_rows != Some(OffSupportRows::AlphaMargin))
        })
        .collect();
    let stable = verdicts.iter().filter(|v| v.0).count();
    let balanced = verdicts.iter().filter(|v| v.1).count();
    let stable_balanced = verdicts.iter().filter(|v| v.0 && v.1).count();

    let e0 = strategy(&[(1, 1), (0, 1)]);
    let single = design(&e0, &e0, &int(1), &DesignOptions::default()).unwrap();
    let singleton_unstable = LearnerKind::ALL.into_iter().all(|kind| {
        !stability_probe(kind, RateSchedule::default_for(kind, 2), &single.matrix, &single.y_star, C5_ROUNDS)
            .unwrap()
            .stable
    });
    Outcome {
        pass: stable == games.len() && singleton_unstable,
        detail: format!(
            "stable for all kinds on {stable}/{} designed games ({stable_balanced}/{balanced} with A y* = v1, {}/{} with |supp x*| = |supp y*| = m < n); \
             singleton game unstable for all kinds: {singleton_unstable}",
            games.len(),
            stable - stable_balanced,
            games.len() - balanced
        ),
    }
}

fn criterion_6() -> Outcome {
    let mut worst_margin = f64::INFINITY;
    let mut all_ok = true;
    let mut lines = Vec::new();
    for n in [2usize, 4, 8] {
        let bound = 2.0 * ((n as f64).ln() / C6_HORIZON as f64).sqrt() + C6_SLACK;
        let mut worst: f64 = f64::NEG_INFINITY;
        for seed in 0..C6_SEQUENCES {
            let mut rng = ChaCha8Rng::seed_from_u64(seed * 31 + n as u64);
            let mut learner = LearnerState::with_default_rate(LearnerKind::Mwu, n).unwrap();
            let mut paid = 0.0;
            let mut totals = vec![0.0; n];
            for _ in 0..C6_HORIZON {
                let loss: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
                paid += learner.current().weights().iter().zip(&loss).map(|(x, l)| x * l).sum::<f64>();
                totals.iter_mut().zip(&loss).for_each(|(t, l)| *t += l);
                learner.observe(&loss).unwrap();
            }
            let best = totals.iter().copied().fold(f64::INFINITY, f64::min);
            worst = worst.max((paid - best) / C6_HORIZON as f64);
        }
        all_ok &= worst <= bound;
        worst_margin = worst_margin.min(bound - worst);
        lines.push(format!("n={n}: worst avg regret {worst:.4} <= {bound:.4}"));
    }
    Outcome {
        pass: all_ok,
        detail: lines.join("; "),
    }
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(TARGET_SEED ^ 0x7);
    let matrices: Vec<RationalMatrix> = (0..C7_MATRICES)
        .map(|_| {
            let n = rng.gen_range(1..=5);
            let m = rng.gen_range(1..=5);
            random_matrix(&mut rng, n, m)
        })
        .collect();
    let results: Vec<(bool, bool)> = matrices
        .par_iter()
        .map(|a| {
            let row = solve_lp(&row_program(a)).unwrap();
            let col = solve_lp(&column_program(a)).unwrap();
            let v_row = row.objective_value.clone().unwrap();
            let w_col = -col.objective_value.clone().unwrap();
            let repeat_row = solve_lp(&row_program(a)).unwrap();
            let repeat_col = solve_lp(&column_program(a)).unwrap();
            ((v_row - w_col).is_zero(), row == repeat_row && col == repeat_col)
        })
        .collect();
    let dual = results.iter().filter(|r| r.0).count();
    let det = results.iter().filter(|r| r.1).count();
    Outcome {
        pass: dual == results.len() && det == results.len(),
        detail: format!("exact duality {dual}/{0}; identical reruns {det}/{0}", results.len()),
    }
}

/// `(id, title, budget, check)` for every criterion, in report order.
pub type Criterion = (&'static str, &'static str, Duration, fn() -> Outcome);

pub const CRITERIA: [Criterion; 7] = [
    ("C1", "construction correctness", Duration::from_secs(60), criterion_1),
    ("C2", "uniqueness certification", Duration::from_secs(300), criterion_2),
    ("C3", "constant y* leaves the learner stuck", Duration::from_secs(10), criterion_3),
    ("C4", "guided last-iterate convergence", Duration::from_secs(600), criterion_4),
    ("C5", "learner stability", Duration::from_secs(30), criterion_5),
    ("C6", "no-regret envelope", Duration::from_secs(60), criterion_6),
    ("C7", "LP duality and determinism", Duration::from_secs(120), criterion_7),
];

/// Runs and reports every criterion; returns how many failed.
pub fn run_all() -> usize {
    let mut failed = 0;
    for (id, title, budget, run) in CRITERIA {
        if !report(id, title, budget, run) {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", CRITERIA.len() - failed);
    failed
}
