//! Random rational instances for sweeps and property tests.

use rand::seq::index::sample;
use rand::Rng;

use crate::game::{MixedStrategy, PayoffMatrix, RationalMatrix, RationalStrategy};
use crate::numeric::{int, rational, Rational};

/// Target triple accepted by [`crate::designer::design`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetSpec {
    pub x_star: RationalStrategy,
    pub y_star: RationalStrategy,
    pub v: Rational,
}

/// Strategy of dimension `dim` with exactly `support` positive entries.
/// Weights are small positive integers normalized to sum to one.
pub fn random_strategy<R: Rng + ?Sized>(rng: &mut R, dim: usize, support: usize) -> RationalStrategy {
    assert!(support >= 1 && support <= dim, "support {support} out of range for dimension {dim}");
    let picked = sample(rng, dim, support);
    let mut raw = vec![0i64; dim];
    for i in picked.iter() {
        raw[i] = rng.gen_range(1..=9);
    }
    let total: i64 = raw.iter().sum();
    MixedStrategy::new(raw.into_iter().map(|w| rational(w, total)).collect()).expect("normalized")
}

fn random_value<R: Rng + ?Sized>(rng: &mut R) -> Rational {
    rational(rng.gen_range(1..=20), 4)
}

/// Any target with `n, m` in `2..=max_dim` and
/// `2 <= |supp x*| <= |supp y*| <= min(n, m)`.
pub fn random_target<R: Rng + ?Sized>(rng: &mut R, max_dim: usize) -> TargetSpec {
    assert!(max_dim >= 2);
    let n = rng.gen_range(2..=max_dim);
    let m = rng.gen_range(2..=max_dim);
    let k = rng.gen_range(2..=n.min(m));
    let l = rng.gen_range(k..=n.min(m));
    TargetSpec {
        x_star: random_strategy(rng, n, k),
        y_star: random_strategy(rng, m, l),
        v: random_value(rng),
    }
}

/// Target whose `x*` has full support on `n` rows.
pub fn random_fully_mixed_target<R: Rng + ?Sized>(rng: &mut R, max_dim: usize) -> TargetSpec {
    assert!(max_dim >= 2);
    let n = rng.gen_range(2..=max_dim);
    let m = rng.gen_range(n..=max_dim);
    let l = rng.gen_range(n..=m);
    TargetSpec {
        x_star: random_strategy(rng, n, n),
        y_star: random_strategy(rng, m, l),
        v: random_value(rng),
    }
}

/// Entries `p / q` with `p` in `-10..=10` and `q` in `1..=4`.
pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize, m: usize) -> RationalMatrix {
    let rows = (0..n)
        .map(|_| {
            (0..m)
                .map(|_| rational(rng.gen_range(-10..=10), rng.gen_range(1..=4)))
                .collect()
        })
        .collect();
    PayoffMatrix::from_rows(rows).expect("non-empty")
}

/// Constant matrix `c` of the given shape.
pub fn constant_matrix(n: usize, m: usize, c: i64) -> RationalMatrix {
    PayoffMatrix::filled(n, m, int(c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn targets_respect_support_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let t = random_target(&mut rng, 5);
            let k = t.x_star.support().len();
            assert!(k >= 2 && k <= t.y_star.support().len());
            let f = random_fully_mixed_target(&mut rng, 5);
            assert_eq!(f.x_star.support().len(), f.x_star.dimension());
            assert!(f.y_star.support().len() >= f.x_star.dimension());
        }
    }
}
