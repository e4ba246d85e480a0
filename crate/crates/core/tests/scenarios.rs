use guided_minimax::arena::{
    detect_eps_nash, regret_report, run_match, run_match_trusted, ColumnPolicy, FloatGame, LearnerSpec, MatchOptions,
    RoundMode, DEFAULT_CONFIRMATION_ROUNDS, DEFAULT_HORIZON,
};
use guided_minimax::designer::{design, design_singleton, DesignOptions, DesignedGame};
use guided_minimax::game::{dot, euclidean, MixedStrategy, PayoffMatrix, RationalStrategy};
use guided_minimax::instances::random_target;
use guided_minimax::learners::{stability_probe, LearnerKind, LearnerState, RateSchedule};
use guided_minimax::lrca::{LrcaState, DEFAULT_EPSILON_LOCK};
use guided_minimax::numeric::{int, rational};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn strat(w: &[(i64, i64)]) -> RationalStrategy {
    MixedStrategy::new(w.iter().map(|&(n, d)| rational(n, d)).collect()).unwrap()
}

/// `[[0.6, 1.4], [1.4, 0.6]]` with `x* = y* = [1/2, 1/2]`, `v = 1`.
fn square_game() -> DesignedGame {
    let h = strat(&[(1, 2), (1, 2)]);
    let opts = DesignOptions {
        z: Some(rational(2, 5)),
        run_oracle: true,
        ..Default::default()
    };
    design(&h, &h, &int(1), &opts).unwrap()
}

/// `x* = [1/2, 1/2, 0]`, `y* = [2/5, 2/5, 1/5]`, `v = 1`.
fn wide_game() -> DesignedGame {
    let opts = DesignOptions {
        run_oracle: true,
        ..Default::default()
    };
    design(&strat(&[(1, 2), (1, 2), (0, 1)]), &strat(&[(2, 5), (2, 5), (1, 5)]), &int(1), &opts).unwrap()
}

fn skewed_game() -> DesignedGame {
    design(&strat(&[(1, 4), (3, 4)]), &strat(&[(1, 2), (1, 2)]), &int(1), &DesignOptions::default()).unwrap()
}

fn close(a: &MixedStrategy<f64>, b: &MixedStrategy<f64>) -> bool {
    euclidean(a.weights(), b.weights()) <= 1e-12
}

fn frozen_spec(kind: LearnerKind) -> LearnerSpec {
    LearnerSpec::with_rate(kind, RateSchedule::Constant { eta: 1.0 })
}

#[test]
fn square_game_has_the_expected_entries() {
    let g = square_game();
    assert_eq!(
        g.matrix.to_rows(),
        vec![vec![rational(3, 5), rational(7, 5)], vec![rational(7, 5), rational(3, 5)]]
    );
    assert!(g.certificate.as_ref().unwrap().is_unique_minimax());
}

#[test]
fn first_two_rounds_follow_the_initialization() {
    let g = square_game();
    let traj = run_match(&g, &LearnerSpec::new(LearnerKind::Mwu), &ColumnPolicy::default(), 2, 0).unwrap();
    assert_eq!(traj.len(), 2);
    for r in &traj.rounds {
        assert_eq!(r.x.weights(), &[0.5, 0.5]);
        assert_eq!(r.y.weights(), &[0.5, 0.5]);
        assert_eq!(r.alpha, 0.0);
    }
    // Uniform play already sits at the value, so the policy locks after round 1.
    assert_eq!(traj.rounds[0].f_gap, 0.0);
    assert_eq!(traj.rounds[0].mode, RoundMode::Guiding);
    assert_eq!(traj.rounds[1].mode, RoundMode::Locked);
    assert_eq!(traj.lock_round, Some(1));
}

#[test]
fn constant_target_column_never_moves_the_learner() {
    for g in [square_game(), wide_game(), skewed_game()] {
        for kind in LearnerKind::ALL {
            for spec in [LearnerSpec::new(kind), frozen_spec(kind)] {
                let traj = run_match(&g, &spec, &ColumnPolicy::ConstantYStar, 2000, 0).unwrap();
                let x1 = traj.rounds[0].x.weights().to_vec();
                assert!(traj.rounds.iter().all(|r| euclidean(r.x.weights(), &x1) == 0.0));
            }
        }
    }
}

#[test]
fn recorded_payoff_is_the_bilinear_form() {
    let g = skewed_game();
    for kind in LearnerKind::ALL {
        let traj = run_match(&g, &frozen_spec(kind), &ColumnPolicy::default(), 5000, 0).unwrap();
        let a = &traj.game.matrix;
        for r in &traj.rounds {
            let direct = dot(r.x.weights(), &a.times_column_strategy(r.y.weights()));
            assert!((r.payoff - direct).abs() <= 1e-12, "round {}: {} vs {}", r.t, r.payoff, direct);
        }
        let regret = regret_report(&traj).unwrap();
        assert!(regret.row_regret.is_finite() && regret.col_regret.is_finite());
    }
}

#[test]
fn replaying_recorded_moves_reproduces_both_sides() {
    let g = skewed_game();
    let spec = frozen_spec(LearnerKind::FtrlEntropy);
    let traj = run_match(&g, &spec, &ColumnPolicy::default(), 3000, 0).unwrap();
    let float = &traj.game;

    // Row side: feed the recorded column strategies in order.
    let mut row = LearnerState::new(spec.kind, 2, spec.rate.unwrap()).unwrap();
    for r in &traj.rounds {
        assert!(close(row.current(), &r.x), "row diverged at round {}", r.t);
        let loss = float.matrix.times_column_strategy(r.y.weights());
        row.observe(&float.normalize_loss(&loss)).unwrap();
    }

    // Column side: feed the recorded row strategies in order.
    let mut col = LrcaState::new(float.y_star.clone(), float.value, 2, DEFAULT_EPSILON_LOCK).unwrap();
    let mut feedback: Option<Vec<f64>> = None;
    for r in &traj.rounds {
        let mv = col.step(feedback.as_deref()).unwrap();
        assert!((mv.alpha - r.alpha).abs() <= 1e-12, "alpha diverged at round {}", r.t);
        let fb = float.matrix.times_row_strategy(r.x.weights());
        if r.t % 2 == 1 {
            col.maybe_lock(fb.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        }
        feedback = Some(fb);
    }
}

#[test]
fn same_round_column_move_does_not_reach_the_learner() {
    let g = skewed_game();
    let float = FloatGame::from_designed(&g).unwrap();
    let spec = frozen_spec(LearnerKind::Mwu);
    let base = run_match_trusted(&float, &spec, &ColumnPolicy::default(), &MatchOptions::new(40, 0).full_horizon())
        .unwrap();
    // Replace the column move of round 10 and replay the row side: x_1..x_10 are unchanged.
    let mut row = LearnerState::new(spec.kind, 2, spec.rate.unwrap()).unwrap();
    for r in &base.rounds[..10] {
        assert!(close(row.current(), &r.x));
        let y = if r.t == 10 { vec![0.0, 1.0] } else { r.y.weights().to_vec() };
        row.observe(&float.normalize_loss(&float.matrix.times_column_strategy(&y))).unwrap();
    }
    assert!(!close(row.current(), &base.rounds[10].x));
}

#[test]
fn random_designed_games_lock_and_freeze() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut played = 0;
    while played < 4 {
        let t = random_target(&mut rng, 4);
        let g = design(&t.x_star, &t.y_star, &t.v, &DesignOptions::default()).unwrap();
        // Skip targets whose off-support rows gain against y*; the learner
        // cannot be frozen there.
        let a_y: Vec<_> = g.matrix.times_column_strategy(g.y_star.weights());
        if a_y.iter().any(|c| c != &t.v) {
            continue;
        }
        played += 1;
        for kind in LearnerKind::ALL {
            let traj = run_match(&g, &frozen_spec(kind), &ColumnPolicy::default(), DEFAULT_HORIZON, 0).unwrap();
            assert!(detect_eps_nash(&traj, 0.05).unwrap().is_some(), "{kind:?} never reached 0.05");
            let lock = traj.lock_round.expect("policy locks") as usize;
            assert_eq!(traj.len(), lock + DEFAULT_CONFIRMATION_ROUNDS);
            let after = &traj.rounds[lock..];
            let frozen = after[0].x.weights();
            for pair in after.windows(2) {
                assert!(pair[1].dist_to_target <= pair[0].dist_to_target + 1e-12);
                assert!(euclidean(pair[1].x.weights(), frozen) <= 1e-12);
                assert_eq!(pair[1].mode, RoundMode::Locked);
            }
        }
    }
}

#[test]
fn average_play_approaches_the_target() {
    let g = skewed_game();
    let float = FloatGame::from_designed(&g).unwrap();
    let traj = run_match_trusted(
        &float,
        &frozen_spec(LearnerKind::Mwu),
        &ColumnPolicy::lrca_within(&g, 0.01),
        &MatchOptions::new(DEFAULT_HORIZON, 0).full_horizon(),
    )
    .unwrap();
    assert_eq!(traj.len(), DEFAULT_HORIZON);
    let avg = traj.average_x().unwrap();
    let gap = euclidean(&avg, float.x_star.weights());
    assert!(gap <= 0.05, "average is {gap} away");
}

#[test]
fn stability_probe_examples() {
    let sq = square_game();
    let r = stability_probe(
        LearnerKind::FtrlEntropy,
        RateSchedule::default_for(LearnerKind::FtrlEntropy, 2),
        &sq.matrix,
        &sq.y_star,
        1000,
    )
    .unwrap();
    assert!(r.stable);
    assert_eq!(r.max_drift, 0.0);

    let flat_third_row = PayoffMatrix::from_rows(vec![
        vec![0.875, 1.125, 1.0],
        vec![1.125, 0.875, 1.0],
        vec![1.0, 1.0, 1.0],
    ])
    .unwrap();
    let y = MixedStrategy::new(vec![0.4, 0.4, 0.2]).unwrap();
    let r = stability_probe(
        LearnerKind::FtrlEuclidean,
        RateSchedule::default_for(LearnerKind::FtrlEuclidean, 3),
        &flat_third_row,
        &y,
        1000,
    )
    .unwrap();
    assert!(r.stable);
    assert_eq!(r.max_drift, 0.0);

    let wide = wide_game();
    for kind in LearnerKind::ALL {
        let r = stability_probe(kind, RateSchedule::default_for(kind, 3), &wide.matrix, &wide.y_star, 1000).unwrap();
        assert!(r.stable, "{kind:?} drifted {}", r.max_drift);
    }

    let single = design_singleton(&MixedStrategy::pure(2, 0), 2, &int(1), &rational(1, 2)).unwrap();
    assert_eq!(
        single.matrix.to_rows(),
        vec![vec![int(1), int(1)], vec![rational(3, 2), int(1)]]
    );
    let r = stability_probe(
        LearnerKind::FtrlEntropy,
        RateSchedule::default_for(LearnerKind::FtrlEntropy, 2),
        &single.matrix,
        &single.y_star,
        1000,
    )
    .unwrap();
    assert!(!r.stable);
    assert!(r.max_drift > 0.0);
}
