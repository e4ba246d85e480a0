//! Mixed strategies, payoff matrices and the elementary quantities of a
//! two-player zero-sum matrix game.
//!
//! Entry `A[i][j]` is the column player's gain and the row player's loss
//! when row `i` meets column `j`. The row player minimizes `x^T A y`.

use std::fmt;

use thiserror::Error;

use crate::numeric::{is_positive, Rational, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GameError {
    #[error("strategy has no entries")]
    EmptyStrategy,
    #[error("weight {value} at index {index} is negative")]
    NegativeWeight { index: usize, value: f64 },
    #[error("weight at index {index} is not finite")]
    NonFiniteWeight { index: usize },
    #[error("weights sum to 1 {deviation:+e}")]
    SumNotOne { deviation: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("payoff matrix must have at least one row and one column")]
    EmptyMatrix,
    #[error("row {row} has {found} entries, expected {expected}")]
    RaggedMatrix {
        row: usize,
        expected: usize,
        found: usize,
    },
}

/// A probability vector over a finite action set.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MixedStrategy<T> {
    weights: Vec<T>,
}

/// Validates a weight vector as a point of the simplex.
///
/// In exact mode the sum must equal one; in float mode it may deviate by
/// at most `1e-12`.
pub fn make_mixed_strategy<T: Scalar>(weights: Vec<T>) -> Result<MixedStrategy<T>, GameError> {
    if weights.is_empty() {
        return Err(GameError::EmptyStrategy);
    }
    let mut sum = T::zero();
    for (index, w) in weights.iter().enumerate() {
        if !w.is_finite() {
            return Err(GameError::NonFiniteWeight { index });
        }
        if *w < T::zero() {
            return Err(GameError::NegativeWeight {
                index,
                value: w.to_f64(),
            });
        }
        sum = sum + w.clone();
    }
    let deviation = sum - T::one();
    if deviation.abs_value() > T::tolerance() {
        return Err(GameError::SumNotOne {
            deviation: deviation.to_f64(),
        });
    }
    Ok(MixedStrategy { weights })
}

impl<T: Scalar> MixedStrategy<T> {
    pub fn new(weights: Vec<T>) -> Result<Self, GameError> {
        make_mixed_strategy(weights)
    }

    /// The pure strategy placing all mass on `index`.
    pub fn pure(dimension: usize, index: usize) -> Self {
        assert!(index < dimension, "pure strategy index out of range");
        let mut weights = vec![T::zero(); dimension];
        weights[index] = T::one();
        MixedStrategy { weights }
    }

    pub fn uniform(dimension: usize) -> Self {
        assert!(dimension > 0);
        let mut n = T::zero();
        for _ in 0..dimension {
            n = n + T::one();
        }
        let w = T::one() / n;
        MixedStrategy {
            weights: vec![w; dimension],
        }
    }

    /// Indices with positive probability (above `1e-12` in float mode).
    pub fn support(&self) -> Vec<usize> {
        support(self)
    }

    pub fn to_f64(&self) -> MixedStrategy<f64> {
        MixedStrategy {
            weights: self.weights.iter().map(Scalar::to_f64).collect(),
        }
    }
}

impl<T> MixedStrategy<T> {
    /// Wraps weights already known to lie on the simplex.
    pub(crate) fn from_weights_unchecked(weights: Vec<T>) -> Self {
        MixedStrategy { weights }
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn into_weights(self) -> Vec<T> {
        self.weights
    }

    pub fn dimension(&self) -> usize {
        self.weights.len()
    }
}

impl<T: fmt::Display> fmt::Display for MixedStrategy<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, w) in self.weights.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{w}")?;
        }
        write!(f, "]")
    }
}

pub fn support<T: Scalar>(s: &MixedStrategy<T>) -> Vec<usize> {
    s.weights
        .iter()
        .enumerate()
        .filter(|(_, w)| is_positive(*w))
        .map(|(i, _)| i)
        .collect()
}

/// Dense `n x m` payoff matrix, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PayoffMatrix<T> {
    rows: usize,
    cols: usize,
    entries: Vec<T>,
}

impl<T: Scalar> PayoffMatrix<T> {
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self, GameError> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if n == 0 || m == 0 {
            return Err(GameError::EmptyMatrix);
        }
        let mut entries = Vec::with_capacity(n * m);
        for (row, r) in rows.into_iter().enumerate() {
            if r.len() != m {
                return Err(GameError::RaggedMatrix {
                    row,
                    expected: m,
                    found: r.len(),
                });
            }
            entries.extend(r);
        }
        Ok(PayoffMatrix {
            rows: n,
            cols: m,
            entries,
        })
    }

    pub fn filled(rows: usize, cols: usize, value: T) -> Self {
        assert!(rows > 0 && cols > 0);
        PayoffMatrix {
            rows,
            cols,
            entries: vec![value; rows * cols],
        }
    }

    /// `(A y)_i` for every row.
    pub fn times_column_strategy(&self, y: &[T]) -> Vec<T> {
        debug_assert_eq!(y.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(y)
                    .fold(T::zero(), |acc, (a, w)| acc + a.clone() * w.clone())
            })
            .collect()
    }

    /// `(x^T A)_j` for every column.
    pub fn times_row_strategy(&self, x: &[T]) -> Vec<T> {
        debug_assert_eq!(x.len(), self.rows);
        let mut out = vec![T::zero(); self.cols];
        for (i, xi) in x.iter().enumerate() {
            for (j, a) in self.row(i).iter().enumerate() {
                out[j] = out[j].clone() + a.clone() * xi.clone();
            }
        }
        out
    }

    pub fn to_f64(&self) -> PayoffMatrix<f64> {
        PayoffMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(Scalar::to_f64).collect(),
        }
    }

    pub fn min_entry(&self) -> T {
        self.entries
            .iter()
            .skip(1)
            .fold(self.entries[0].clone(), |m, e| if *e < m { e.clone() } else { m })
    }

    pub fn max_entry(&self) -> T {
        self.entries
            .iter()
            .skip(1)
            .fold(self.entries[0].clone(), |m, e| if *e > m { e.clone() } else { m })
    }

    /// Applies `(A - c)/s` entrywise.
    pub fn affine(&self, shift: &T, scale: &T) -> Self {
        PayoffMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .map(|e| (e.clone() - shift.clone()) / scale.clone())
                .collect(),
        }
    }
}

impl<T> PayoffMatrix<T> {
    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: T) {
        self.entries[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = &T> + '_ {
        (0..self.rows).map(move |i| self.get(i, j))
    }

    pub fn entries(&self) -> impl Iterator<Item = &T> {
        self.entries.iter()
    }

    pub fn to_rows(&self) -> Vec<Vec<T>>
    where
        T: Clone,
    {
        self.entries.chunks(self.cols).map(<[T]>::to_vec).collect()
    }
}

impl<T: fmt::Display> fmt::Display for PayoffMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(ToString::to_string).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// The value `v` of a matrix game.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GameValue<T>(pub T);

impl<T: fmt::Display> fmt::Display for GameValue<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

pub type RationalMatrix = PayoffMatrix<Rational>;
pub type RationalStrategy = MixedStrategy<Rational>;

fn check_dims<T>(x_len: usize, a: &PayoffMatrix<T>, y_len: Option<usize>) -> Result<(), GameError> {
    if x_len != a.n_rows() {
        return Err(GameError::DimensionMismatch {
            expected: a.n_rows(),
            found: x_len,
        });
    }
    if let Some(y_len) = y_len {
        if y_len != a.n_cols() {
            return Err(GameError::DimensionMismatch {
                expected: a.n_cols(),
                found: y_len,
            });
        }
    }
    Ok(())
}

/// `x^T A y`, the column player's expected gain.
pub fn expected_payoff<T: Scalar>(
    x: &MixedStrategy<T>,
    a: &PayoffMatrix<T>,
    y: &MixedStrategy<T>,
) -> Result<T, GameError> {
    check_dims(x.dimension(), a, Some(y.dimension()))?;
    Ok(dot(x.weights(), &a.times_column_strategy(y.weights())))
}

/// `f(x) = max_j (x^T A)_j` and the lowest column index attaining it.
pub fn best_response_value<T: Scalar>(
    x: &MixedStrategy<T>,
    a: &PayoffMatrix<T>,
) -> Result<(T, usize), GameError> {
    check_dims(x.dimension(), a, None)?;
    Ok(argmax_lowest(&a.times_row_strategy(x.weights())))
}

/// Maximum of a non-empty slice with the smallest index among ties.
pub fn argmax_lowest<T: PartialOrd + Clone>(values: &[T]) -> (T, usize) {
    let mut best = 0;
    for (j, val) in values.iter().enumerate().skip(1) {
        if *val > values[best] {
            best = j;
        }
    }
    (values[best].clone(), best)
}

pub fn l2_distance<T: Scalar>(a: &MixedStrategy<T>, b: &MixedStrategy<T>) -> Result<f64, GameError> {
    if a.dimension() != b.dimension() {
        return Err(GameError::DimensionMismatch {
            expected: a.dimension(),
            found: b.dimension(),
        });
    }
    Ok(euclidean(
        &a.weights().iter().map(Scalar::to_f64).collect::<Vec<_>>(),
        &b.weights().iter().map(Scalar::to_f64).collect::<Vec<_>>(),
    ))
}

/// Euclidean distance between two equal-length slices.
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| (p - q) * (p - q))
        .sum::<f64>()
        .sqrt()
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (p, q)| acc + p.clone() * q.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{int, rational};

    fn q(n: i64, d: i64) -> Rational {
        rational(n, d)
    }

    fn fm(rows: &[&[f64]]) -> PayoffMatrix<f64> {
        PayoffMatrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    fn fs(w: &[f64]) -> MixedStrategy<f64> {
        MixedStrategy::new(w.to_vec()).unwrap()
    }

    #[test]
    fn strategy_validation() {
        assert!(make_mixed_strategy(vec![0.5, 0.5]).is_ok());
        assert!(make_mixed_strategy(vec![1.0]).is_ok());
        match make_mixed_strategy(vec![0.5, 0.6]) {
            Err(GameError::SumNotOne { deviation }) => assert!((deviation - 0.1).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        assert_eq!(
            make_mixed_strategy(vec![1.5, -0.5]),
            Err(GameError::NegativeWeight {
                index: 1,
                value: -0.5
            })
        );
        assert_eq!(
            make_mixed_strategy::<f64>(vec![]),
            Err(GameError::EmptyStrategy)
        );
        assert!(make_mixed_strategy(vec![q(1, 3), q(2, 3)]).is_ok());
        assert!(make_mixed_strategy(vec![q(1, 3), q(1, 3), q(1, 3) + q(1, 1000)]).is_err());
    }

    #[test]
    fn float_sum_tolerance() {
        assert!(make_mixed_strategy(vec![0.5, 0.5 + 5e-13]).is_ok());
        assert!(make_mixed_strategy(vec![0.5, 0.5 + 5e-12]).is_err());
    }

    #[test]
    fn support_examples() {
        assert_eq!(fs(&[0.5, 0.5, 0.0]).support(), vec![0, 1]);
        assert_eq!(fs(&[1.0, 0.0]).support(), vec![0]);
        assert_eq!(fs(&[0.4, 0.4, 0.2]).support(), vec![0, 1, 2]);
        assert_eq!(fs(&[1.0 - 1e-13, 1e-13]).support(), vec![0]);
    }

    #[test]
    fn expected_payoff_examples() {
        let a = fm(&[&[2.0, 3.0], &[4.0, 5.0]]);
        assert_eq!(expected_payoff(&fs(&[1.0, 0.0]), &a, &fs(&[0.0, 1.0])).unwrap(), 3.0);

        // 0.25 * (0.6 + 1.4 + 1.4 + 0.6) by direct summation.
        let a = PayoffMatrix::from_rows(vec![vec![q(3, 5), q(7, 5)], vec![q(7, 5), q(3, 5)]]).unwrap();
        let half = MixedStrategy::new(vec![q(1, 2), q(1, 2)]).unwrap();
        assert_eq!(expected_payoff(&half, &a, &half).unwrap(), int(1));

        let mp = fm(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let h = fs(&[0.5, 0.5]);
        assert_eq!(expected_payoff(&h, &mp, &h).unwrap(), 0.5);

        assert!(matches!(
            expected_payoff(&fs(&[1.0]), &mp, &h),
            Err(GameError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn best_response_examples() {
        let a = PayoffMatrix::from_rows(vec![vec![q(3, 5), q(7, 5)], vec![q(7, 5), q(3, 5)]]).unwrap();
        let half = MixedStrategy::new(vec![q(1, 2), q(1, 2)]).unwrap();
        assert_eq!(best_response_value(&half, &a).unwrap(), (int(1), 0));
        let top = MixedStrategy::pure(2, 0);
        assert_eq!(best_response_value(&top, &a).unwrap(), (q(7, 5), 1));

        let b = fm(&[&[2.0, 3.0], &[4.0, 5.0]]);
        assert_eq!(best_response_value(&fs(&[0.0, 1.0]), &b).unwrap(), (5.0, 1));
        assert!(best_response_value(&fs(&[1.0]), &b).is_err());
    }

    #[test]
    fn distance_examples() {
        assert_eq!(l2_distance(&fs(&[1.0, 0.0]), &fs(&[1.0, 0.0])).unwrap(), 0.0);
        assert!((l2_distance(&fs(&[1.0, 0.0]), &fs(&[0.0, 1.0])).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let d = l2_distance(&fs(&[0.5, 0.5]), &fs(&[0.25, 0.75])).unwrap();
        assert!((d - (0.0625f64 + 0.0625).sqrt()).abs() < 1e-15);
        assert!(l2_distance(&fs(&[1.0]), &fs(&[1.0, 0.0])).is_err());
    }

    #[test]
    fn matrix_shape_errors() {
        assert_eq!(
            PayoffMatrix::<f64>::from_rows(vec![]),
            Err(GameError::EmptyMatrix)
        );
        assert!(matches!(
            PayoffMatrix::from_rows(vec![vec![1.0, 2.0], vec![3.0]]),
            Err(GameError::RaggedMatrix { row: 1, .. })
        ));
    }
}
