//! Exact certification that `(x*, y*)` is a minimax pair of `A` and that
//! `x*` is the row player's only minimax strategy.
//!
//! Uniqueness is decided through the homogeneous system
//!
//! ```text
//! x_i >= 0            for x*_i = 0
//! sum_i A_ij x_i <= 0 for every column j binding at x*
//! sum_i x_i = 0,  x != 0
//! ```
//!
//! which is feasible exactly when the row program has a second optimum.
//! The `x != 0` condition is handled by normalization: a nonzero solution
//! must have a negative coordinate inside the support of `x*`, and scaling
//! makes it `-1`. One exact feasibility program per support index decides it.

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::game::{dot, GameError, GameValue, RationalMatrix, RationalStrategy};
use crate::lp::{self, LpError, DEFAULT_ORACLE_CAP};
use crate::numeric::Rational;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("(x*, y*) is not a minimax pair of the matrix")]
    NotAMinimaxPair,
    #[error(transparent)]
    Lp(#[from] LpError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinimaxCertificate {
    /// Both best-response systems hold at `(x*, y*)`.
    pub pair_ok: bool,
    /// `x*^T A y*`.
    pub value: GameValue<Rational>,
    pub lemma_ok: bool,
    /// Covering column found for each support row of `x*`, in support order.
    pub lemma_columns: Vec<Option<usize>>,
    /// `None` when `pair_ok` is false and the uniqueness system does not apply.
    pub kkt_unique: Option<bool>,
    pub oracle_agrees: Option<bool>,
    /// A nonzero solution of the uniqueness system when `x*` is not unique.
    pub witness: Option<Vec<Rational>>,
}

impl MinimaxCertificate {
    /// `x*` is a minimax strategy and the only one.
    pub fn is_unique_minimax(&self) -> bool {
        self.pair_ok && self.kkt_unique == Some(true)
    }
}

fn check_dims(a: &RationalMatrix, x: &RationalStrategy, y: &RationalStrategy) -> Result<(), GameError> {
    if x.dimension() != a.n_rows() {
        return Err(GameError::DimensionMismatch {
            expected: a.n_rows(),
            found: x.dimension(),
        });
    }
    if y.dimension() != a.n_cols() {
        return Err(GameError::DimensionMismatch {
            expected: a.n_cols(),
            found: y.dimension(),
        });
    }
    Ok(())
}

/// Checks `(x*^T A)_j <= v` with equality on `supp(y*)` and `(A y*)_i >= v`
/// with equality on `supp(x*)`, where `v = x*^T A y*`.
pub fn check_minimax_pair(
    a: &RationalMatrix,
    x_star: &RationalStrategy,
    y_star: &RationalStrategy,
) -> Result<(bool, GameValue<Rational>), VerifyError> {
    check_dims(a, x_star, y_star)?;
    let col_payoffs = a.times_row_strategy(x_star.weights());
    let row_payoffs = a.times_column_strategy(y_star.weights());
    let v = dot(x_star.weights(), &row_payoffs);

    let columns_ok = col_payoffs.iter().zip(y_star.weights()).all(|(c, yj)| {
        if yj.is_zero() {
            *c <= v
        } else {
            *c == v
        }
    });
    let rows_ok = row_payoffs.iter().zip(x_star.weights()).all(|(r, xi)| {
        if xi.is_zero() {
            *r >= v
        } else {
            *r == v
        }
    });
    Ok((columns_ok && rows_ok, GameValue(v)))
}

/// For support row `k` of `x*`, finds a column `j` in `supp(y*)` whose entry
/// `gamma = A_kj > 0` sits below a common value `beta` shared by the other
/// support rows, with every row outside the support at least `beta` (strictly
/// above `gamma` when `k` is the only support row).
fn lemma_column_for(
    a: &RationalMatrix,
    support_mask: &[bool],
    y_support: &[usize],
    k: usize,
) -> Option<usize> {
    y_support.iter().copied().find(|&j| {
        let gamma = a.get(k, j);
        if !gamma.is_positive() {
            return false;
        }
        let mut beta: Option<&Rational> = None;
        for i in 0..a.n_rows() {
            if i == k || !support_mask[i] {
                continue;
            }
            let e = a.get(i, j);
            match beta {
                None => beta = Some(e),
                Some(b) if b != e => return false,
                _ => {}
            }
        }
        let floor = match beta {
            Some(b) if b <= gamma => return false,
            Some(b) => b,
            None => gamma,
        };
        (0..a.n_rows())
            .filter(|&i| !support_mask[i])
            .all(|i| {
                let e = a.get(i, j);
                if beta.is_some() {
                    e >= floor
                } else {
                    e > floor
                }
            })
    })
}

fn lemma_columns(a: &RationalMatrix, x_star: &RationalStrategy, y_star: &RationalStrategy) -> Vec<Option<usize>> {
    let support_mask: Vec<bool> = x_star.weights().iter().map(|w| !w.is_zero()).collect();
    let y_support = y_star.support();
    x_star
        .support()
        .into_iter()
        .map(|k| lemma_column_for(a, &support_mask, &y_support, k))
        .collect()
}

/// Sufficient structural test for uniqueness: every support row of `x*`
/// owns a column where it is the strict, positive minimum against a constant
/// level on the other support rows.
pub fn check_lemma_columns(
    a: &RationalMatrix,
    x_star: &RationalStrategy,
    y_star: &RationalStrategy,
) -> Result<bool, VerifyError> {
    check_dims(a, x_star, y_star)?;
    Ok(lemma_columns(a, x_star, y_star).iter().all(Option::is_some))
}

/// Decides whether `x*` is the unique row minimax strategy. Returns a
/// witness direction when it is not.
pub fn check_row_uniqueness_kkt(
    a: &RationalMatrix,
    x_star: &RationalStrategy,
    y_star: &RationalStrategy,
) -> Result<(bool, Option<Vec<Rational>>), VerifyError> {
    let (pair_ok, value) = check_minimax_pair(a, x_star, y_star)?;
    if !pair_ok {
        return Err(VerifyError::NotAMinimaxPair);
    }
    let n = a.n_rows();
    let col_payoffs = a.times_row_strategy(x_star.weights());

    let mut inequalities: Vec<(Vec<Rational>, Rational)> = Vec::new();
    for (i, w) in x_star.weights().iter().enumerate() {
        if w.is_zero() {
            let mut row = vec![Rational::zero(); n];
            row[i] = Rational::one();
            inequalities.push((row, Rational::zero()));
        }
    }
    for (j, c) in col_payoffs.iter().enumerate() {
        if *c == value.0 {
            let row: Vec<Rational> = a.column(j).map(|e| -e.clone()).collect();
            inequalities.push((row, Rational::zero()));
        }
    }
    let sum_zero = (vec![Rational::one(); n], Rational::zero());

    for k in x_star.support() {
        let mut pin = vec![Rational::zero(); n];
        pin[k] = Rational::one();
        let equalities = [sum_zero.clone(), (pin, -Rational::one())];
        if let Some(point) = lp::find_feasible_point(n, &equalities, &inequalities)? {
            return Ok((false, Some(point)));
        }
    }
    Ok((true, None))
}

/// Runs the pair check, the structural column test, the uniqueness system
/// and optionally the enumeration oracle.
pub fn certify(
    a: &RationalMatrix,
    x_star: &RationalStrategy,
    y_star: &RationalStrategy,
    run_oracle: bool,
) -> Result<MinimaxCertificate, VerifyError> {
    let (pair_ok, value) = check_minimax_pair(a, x_star, y_star)?;
    let lemma_columns = lemma_columns(a, x_star, y_star);
    let lemma_ok = lemma_columns.iter().all(Option::is_some);

    let (kkt_unique, witness) = if pair_ok {
        let (unique, witness) = check_row_uniqueness_kkt(a, x_star, y_star)?;
        (Some(unique), witness)
    } else {
        (None, None)
    };
    debug_assert!(
        !(pair_ok && lemma_ok) || kkt_unique == Some(true),
        "structural column test passed but the uniqueness system is feasible"
    );

    let within_cap = a.n_rows() <= DEFAULT_ORACLE_CAP && a.n_cols() <= DEFAULT_ORACLE_CAP;
    let oracle_agrees = match kkt_unique {
        Some(unique) if run_oracle && within_cap => {
            let face = lp::enumerate_minimax_rows(a)?;
            let same_vertex = !face.unique_row || face.row_vertices[0] == *x_star;
            Some(face.unique_row == unique && same_vertex && face.value == value)
        }
        _ => None,
    };

    Ok(MinimaxCertificate {
        pair_ok,
        value,
        lemma_ok,
        lemma_columns,
        kkt_unique,
        oracle_agrees,
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::MixedStrategy;
    use crate::numeric::{int, rational};

    fn q(n: i64, d: i64) -> Rational {
        rational(n, d)
    }

    fn mat(rows: &[&[Rational]]) -> RationalMatrix {
        RationalMatrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    fn strat(w: &[Rational]) -> RationalStrategy {
        MixedStrategy::new(w.to_vec()).unwrap()
    }

    fn example_equal() -> (RationalMatrix, RationalStrategy, RationalStrategy) {
        let a = mat(&[&[q(3, 5), q(7, 5)], &[q(7, 5), q(3, 5)]]);
        let h = strat(&[q(1, 2), q(1, 2)]);
        (a, h.clone(), h)
    }

    fn all_ones() -> (RationalMatrix, RationalStrategy, RationalStrategy) {
        let a = RationalMatrix::filled(2, 2, int(1));
        let h = strat(&[q(1, 2), q(1, 2)]);
        (a, h.clone(), h)
    }

    /// Checks every constraint of the uniqueness system on supp(y*) columns.
    fn assert_witness_valid(a: &RationalMatrix, x: &RationalStrategy, y: &RationalStrategy, w: &[Rational]) {
        assert!(w.iter().any(|e| !e.is_zero()));
        assert_eq!(w.iter().cloned().sum::<Rational>(), int(0));
        for (i, xi) in x.weights().iter().enumerate() {
            if xi.is_zero() {
                assert!(w[i] >= int(0));
            }
        }
        for j in y.support() {
            let s: Rational = (0..a.n_rows()).map(|i| a.get(i, j) * &w[i]).sum();
            assert!(s <= int(0));
        }
    }

    #[test]
    fn pair_check_examples() {
        let (a, x, y) = example_equal();
        assert_eq!(check_minimax_pair(&a, &x, &y).unwrap(), (true, GameValue(int(1))));

        let mp = mat(&[&[int(0), int(1)], &[int(1), int(0)]]);
        let (ok, v) = check_minimax_pair(&mp, &strat(&[int(1), int(0)]), &strat(&[q(1, 2), q(1, 2)])).unwrap();
        assert!(!ok);
        assert_eq!(v.0, q(1, 2));

        let (a, x, y) = all_ones();
        assert_eq!(check_minimax_pair(&a, &x, &y).unwrap(), (true, GameValue(int(1))));
        let (ok, _) = check_minimax_pair(&a, &strat(&[int(1), int(0)]), &strat(&[q(1, 3), q(2, 3)])).unwrap();
        assert!(ok);
    }

    #[test]
    fn lemma_examples() {
        let (a, x, y) = example_equal();
        assert!(check_lemma_columns(&a, &x, &y).unwrap());
        let (a, x, y) = all_ones();
        assert!(!check_lemma_columns(&a, &x, &y).unwrap());
        let single = mat(&[&[int(1), int(1)], &[q(3, 2), int(1)]]);
        assert!(check_lemma_columns(&single, &strat(&[int(1), int(0)]), &strat(&[int(1), int(0)])).unwrap());
    }

    #[test]
    fn lemma_rejects_lower_off_support_level() {
        // Support block as in the 2x2 example, with the unsupported row sitting
        // between gamma and beta. x* is not unique here: row 2 also attains v.
        let a = mat(&[
            &[q(3, 5), q(7, 5), int(1)],
            &[q(7, 5), q(3, 5), int(1)],
            &[int(1), int(1), int(1)],
        ]);
        let x = strat(&[q(1, 2), q(1, 2), int(0)]);
        let y = strat(&[q(1, 2), q(1, 2), int(0)]);
        assert!(!check_lemma_columns(&a, &x, &y).unwrap());
        let (unique, witness) = check_row_uniqueness_kkt(&a, &x, &y).unwrap();
        assert!(!unique);
        assert_witness_valid(&a, &x, &y, &witness.unwrap());
        assert!(!lp::enumerate_minimax_rows(&a).unwrap().unique_row);
    }

    #[test]
    fn kkt_examples() {
        let (a, x, y) = example_equal();
        assert_eq!(check_row_uniqueness_kkt(&a, &x, &y).unwrap(), (true, None));

        let (a, x, y) = all_ones();
        let (unique, witness) = check_row_uniqueness_kkt(&a, &x, &y).unwrap();
        assert!(!unique);
        let w = witness.unwrap();
        assert_eq!(w, vec![int(-1), int(1)]);
        assert_witness_valid(&a, &x, &y, &w);

        let mp = mat(&[&[int(0), int(1)], &[int(1), int(0)]]);
        assert_eq!(
            check_row_uniqueness_kkt(&mp, &strat(&[int(1), int(0)]), &strat(&[q(1, 2), q(1, 2)])),
            Err(VerifyError::NotAMinimaxPair)
        );
    }

    #[test]
    fn larger_support_layout_with_equal_off_support_row_is_not_unique() {
        // Off-support row at exactly v against y* leaves a second optimum.
        let a = mat(&[
            &[q(7, 8), q(9, 8), int(1)],
            &[q(9, 8), q(7, 8), int(1)],
            &[int(1), int(1), int(1)],
        ]);
        let x = strat(&[q(1, 2), q(1, 2), int(0)]);
        let y = strat(&[q(2, 5), q(2, 5), q(1, 5)]);
        assert!(check_minimax_pair(&a, &x, &y).unwrap().0);
        let (unique, witness) = check_row_uniqueness_kkt(&a, &x, &y).unwrap();
        assert!(!unique);
        assert_witness_valid(&a, &x, &y, &witness.unwrap());
        let face = lp::enumerate_minimax_rows(&a).unwrap();
        assert!(!face.unique_row);
        assert!(face.row_vertices.contains(&MixedStrategy::pure(3, 2)));

        // Raising the unsupported row above v against y* restores uniqueness.
        let fixed = mat(&[
            &[q(7, 8), q(9, 8), int(1)],
            &[q(9, 8), q(7, 8), int(1)],
            &[q(9, 8), q(9, 8), int(1)],
        ]);
        let cert = certify(&fixed, &x, &y, true).unwrap();
        assert!(cert.is_unique_minimax());
        assert!(cert.lemma_ok);
        assert_eq!(cert.oracle_agrees, Some(true));
    }

    #[test]
    fn certify_examples() {
        let (a, x, y) = example_equal();
        let cert = certify(&a, &x, &y, true).unwrap();
        assert!(cert.pair_ok && cert.lemma_ok);
        assert_eq!(cert.kkt_unique, Some(true));
        assert_eq!(cert.oracle_agrees, Some(true));
        assert_eq!(cert.lemma_columns, vec![Some(0), Some(1)]);

        let (a, x, y) = all_ones();
        let cert = certify(&a, &x, &y, true).unwrap();
        assert!(cert.pair_ok);
        assert!(!cert.lemma_ok);
        assert_eq!(cert.kkt_unique, Some(false));
        assert_eq!(cert.oracle_agrees, Some(true));
        assert!(cert.witness.is_some());

        let short = strat(&[int(1)]);
        assert!(matches!(
            certify(&a, &short, &y, false),
            Err(VerifyError::Game(GameError::DimensionMismatch { .. }))
        ));
    }

    #[test]
    fn tight_columns_outside_y_support_count() {
        // x* = e_0 is unique, but only because column 1 (outside supp y*)
        // binds: the y*-support column alone leaves a feasible direction.
        let a = mat(&[&[int(1), int(1)], &[int(1), int(2)]]);
        let x = strat(&[int(1), int(0)]);
        let y = strat(&[int(1), int(0)]);
        assert!(check_minimax_pair(&a, &x, &y).unwrap().0);
        assert_eq!(check_row_uniqueness_kkt(&a, &x, &y).unwrap(), (true, None));
        assert!(lp::enumerate_minimax_rows(&a).unwrap().unique_row);
    }
}
