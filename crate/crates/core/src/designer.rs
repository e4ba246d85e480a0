//! Payoff matrices whose unique row minimax strategy is a chosen target.
//!
//! Three constructions, all in exact arithmetic:
//!
//! * [`design_equal_support`] when `|supp x*| = |supp y*| = k >= 2`,
//! * [`design_larger_support`] when `2 <= |supp x*| < |supp y*|`,
//! * [`design_singleton`] when `x*` is pure.
//!
//! The support block follows the classic layout: in column `i` of the
//! support block, row `i` holds `a_i` and the other support rows hold
//! `alpha_i`. Rows outside `supp x*` need extra care: if they simply pay `v`
//! everywhere, mass can drift onto them and `x*` stops being unique. They
//! are filled according to [`OffSupportRows`], keeping `A y* = v 1` whenever
//! the shape allows it.
//!
//! Inputs need not have their supports first. Rows and columns are permuted
//! internally so the supports lead, and the permutation is undone on output.

use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::game::{GameError, GameValue, MixedStrategy, PayoffMatrix, RationalMatrix, RationalStrategy};
use crate::numeric::{int, Rational};
use crate::verifier::{certify, MinimaxCertificate, VerifyError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DesignError {
    #[error("support sizes differ: |supp x*| = {x}, |supp y*| = {y}")]
    SupportMismatch { x: usize, y: usize },
    #[error("{name} = {value} outside the open interval ({lower}, {upper})")]
    ParameterOutOfRange {
        name: &'static str,
        value: Rational,
        lower: Rational,
        upper: Rational,
    },
    #[error("support of size one needs the singleton construction")]
    DegenerateSupport,
    #[error("|supp x*| = {x} is not smaller than |supp y*| = {y}")]
    SupportNotSmaller { x: usize, y: usize },
    #[error("target has support {0}, expected a pure strategy")]
    NotSingleton(usize),
    #[error("|supp y*| = {y} is smaller than |supp x*| = {x}")]
    SupportTooSmall { x: usize, y: usize },
    #[error("game value must be positive, got {0}")]
    NonPositiveValue(Rational),
    #[error("gap must be positive, got {0}")]
    NonPositiveGap(Rational),
    #[error("built matrix failed certification")]
    CertificationFailed(Box<MinimaxCertificate>),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
}

impl DesignError {
    /// Stable identifier used in CLI output.
    pub fn name(&self) -> &'static str {
        match self {
            DesignError::SupportMismatch { .. } => "SupportMismatch",
            DesignError::ParameterOutOfRange { .. } => "ParameterOutOfRange",
            DesignError::DegenerateSupport => "DegenerateSupport",
            DesignError::SupportNotSmaller { .. } => "SupportNotSmaller",
            DesignError::NotSingleton(_) => "NotSingleton",
            DesignError::SupportTooSmall { .. } => "SupportTooSmall",
            DesignError::NonPositiveValue(_) => "NonPositiveValue",
            DesignError::NonPositiveGap(_) => "NonPositiveGap",
            DesignError::CertificationFailed(_) => "CertificationFailed",
            DesignError::Game(_) => "InvalidInput",
            DesignError::Verify(_) => "VerificationError",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Construction {
    EqualSupport,
    LargerSupport,
    SingletonSupport,
}

impl fmt::Display for Construction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Construction::EqualSupport => "EqualSupport",
            Construction::LargerSupport => "LargerSupport",
            Construction::SingletonSupport => "SingletonSupport",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DesignSpec {
    pub x_star: RationalStrategy,
    pub y_star: RationalStrategy,
    pub v: Rational,
    pub z: Option<Rational>,
    pub v1: Option<Rational>,
}

impl DesignSpec {
    pub fn new(x_star: RationalStrategy, y_star: RationalStrategy, v: Rational) -> Self {
        DesignSpec {
            x_star,
            y_star,
            v,
            z: None,
            v1: None,
        }
    }
}

/// Fill pattern for rows outside `supp x*`. Column indices are canonical.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OffSupportRows {
    /// `v` everywhere except `v + height` in `column`, which lies outside
    /// `supp y*`. Used when `m > |supp y*|`.
    SpareColumn { column: usize, height: Rational },
    /// `v - relief` on the support block, `v + height` in `column` (the first
    /// `y*` support column past the block), `v` elsewhere. `height` is chosen
    /// so `(A y*)_r = v`. Used when `m = |supp y*| > |supp x*|`.
    Compensated {
        column: usize,
        height: Rational,
        relief: Rational,
    },
    /// `alpha_i` on the support block and `v` elsewhere, so `(A y*)_r > v`.
    /// Only used when `|supp x*| = |supp y*| = m < n`, where no layout with
    /// `A y* = v 1` leaves `x*` unique.
    AlphaMargin,
}

/// Construction parameters, listed in canonical (support-first) order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DesignParameters {
    pub z: Option<Rational>,
    pub v1: Option<Rational>,
    pub y_bar: Option<Rational>,
    pub gap: Option<Rational>,
    pub alpha: Vec<Rational>,
    pub a: Vec<Rational>,
    pub beta: Vec<Rational>,
    /// `None` when `x*` is fully mixed.
    pub off_rows: Option<OffSupportRows>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DesignedGame {
    pub matrix: RationalMatrix,
    pub x_star: RationalStrategy,
    pub y_star: RationalStrategy,
    pub value: GameValue<Rational>,
    /// `row_perm[r]` is the output row holding canonical row `r`.
    pub row_perm: Vec<usize>,
    pub col_perm: Vec<usize>,
    pub construction: Construction,
    pub parameters: DesignParameters,
    pub certificate: Option<MinimaxCertificate>,
}

impl DesignedGame {
    /// Matrix and targets in canonical order, supports leading.
    pub fn canonical(&self) -> (RationalMatrix, RationalStrategy, RationalStrategy) {
        let (n, m) = (self.matrix.n_rows(), self.matrix.n_cols());
        let rows = (0..n)
            .map(|r| (0..m).map(|c| self.matrix.get(self.row_perm[r], self.col_perm[c]).clone()).collect())
            .collect();
        (
            PayoffMatrix::from_rows(rows).expect("non-empty"),
            permute(&self.x_star, &self.row_perm),
            permute(&self.y_star, &self.col_perm),
        )
    }
}

impl DesignedGame {
    /// Constant `c > 0` with `f(x) - v >= c ‖x - x*‖₂` for every mixed `x`,
    /// where `f(x) = max_j (x^T A)_j`.
    ///
    /// Write `s = (alpha_j - a_j) y_j` (the same for every `j`), `D` for the
    /// mass moved onto unsupported rows and `‖d‖₁ >= ‖d‖₂` for the move. The
    /// support columns then give `f - v >= c1 (‖d‖₁ - 2D) - relief D` with
    /// `c1 = s / (2k max_j y_j)`, and the bumped column gives `height D`.
    /// Balancing the two leaves `c1 height / (height + 2 c1 + relief)`.
    /// With the alpha margin the support columns alone give `c1 ‖d‖₁`.
    /// For a pure target the guiding column pays `gap (1 - x_i0) >= gap ‖d‖₂ / 2`.
    pub fn sharpness(&self) -> Rational {
        if self.construction == Construction::SingletonSupport {
            return self.parameters.gap.clone().expect("singleton has a gap") / int(2);
        }
        let (_, _, y) = self.canonical();
        let k = self.parameters.a.len();
        let slope = (&self.parameters.alpha[0] - &self.parameters.a[0]) * &y.weights()[0];
        let y_max = y.weights()[..k].iter().max().expect("k >= 2").clone();
        let c1 = slope / (y_max * int(2 * k as i64));
        let (height, relief) = match &self.parameters.off_rows {
            None | Some(OffSupportRows::AlphaMargin) => return c1,
            Some(OffSupportRows::SpareColumn { height, .. }) => (height, Rational::zero()),
            Some(OffSupportRows::Compensated { height, relief, .. }) => (height, relief.clone()),
        };
        &c1 * height / (height + &c1 * int(2) + relief)
    }
}

/// Options for [`design`]; unset parameters default to interval midpoints.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DesignOptions {
    pub z: Option<Rational>,
    pub v1: Option<Rational>,
    pub gap: Option<Rational>,
    /// Also cross-check with the enumeration oracle (sizes up to its cap).
    pub run_oracle: bool,
}

/// Support indices first, then the rest, each ascending.
fn support_first(s: &RationalStrategy) -> Vec<usize> {
    let (mut head, tail): (Vec<usize>, Vec<usize>) =
        (0..s.dimension()).partition(|&i| !s.weights()[i].is_zero());
    head.extend(tail);
    head
}

fn permute(s: &RationalStrategy, perm: &[usize]) -> RationalStrategy {
    MixedStrategy::from_weights_unchecked(perm.iter().map(|&i| s.weights()[i].clone()).collect())
}

fn unpermute(canonical: Vec<Vec<Rational>>, row_perm: &[usize], col_perm: &[usize]) -> RationalMatrix {
    let (n, m) = (row_perm.len(), col_perm.len());
    let mut out = RationalMatrix::filled(n, m, Rational::zero());
    for (r, row) in canonical.into_iter().enumerate() {
        for (c, e) in row.into_iter().enumerate() {
            out.set(row_perm[r], col_perm[c], e);
        }
    }
    out
}

fn check_value(v: &Rational) -> Result<(), DesignError> {
    if !v.is_positive() {
        return Err(DesignError::NonPositiveValue(v.clone()));
    }
    Ok(())
}

fn check_open(name: &'static str, value: &Rational, lower: &Rational, upper: &Rational) -> Result<(), DesignError> {
    if value <= lower || value >= upper {
        return Err(DesignError::ParameterOutOfRange {
            name,
            value: value.clone(),
            lower: lower.clone(),
            upper: upper.clone(),
        });
    }
    Ok(())
}

/// `min_i v * y_i / (1 - x_i)` over the leading `k` canonical entries.
fn positivity_bound(v: &Rational, x: &[Rational], y: &[Rational], k: usize) -> Rational {
    (0..k)
        .map(|i| v * &y[i] / (Rational::one() - &x[i]))
        .min()
        .expect("k >= 1")
}

/// Picks the off-support fill. `margin` is the bump height when a spare
/// column is available.
fn off_support_rows(n: usize, m: usize, k: usize, l: usize, v: &Rational, margin: &Rational, y: &[Rational]) -> Option<OffSupportRows> {
    if k == n {
        None
    } else if m > l {
        Some(OffSupportRows::SpareColumn {
            column: l,
            height: margin.clone(),
        })
    } else if l > k {
        let relief = v / int(2);
        let block_mass: Rational = y[..k].iter().cloned().sum();
        Some(OffSupportRows::Compensated {
            column: k,
            height: &relief * block_mass / &y[k],
            relief,
        })
    } else {
        Some(OffSupportRows::AlphaMargin)
    }
}

/// Builds the canonical matrix: support block with `a_i` on the diagonal
/// and `alpha_i` elsewhere in column `i`, `v` in every other support-row
/// entry, and unsupported rows filled per `off`.
fn canonical_layout(
    n: usize,
    m: usize,
    v: &Rational,
    alpha: &[Rational],
    a: &[Rational],
    off: Option<&OffSupportRows>,
) -> Vec<Vec<Rational>> {
    let k = alpha.len();
    let support_entry = |r: usize, c: usize| match c {
        c if c >= k => v.clone(),
        c if c == r => a[c].clone(),
        c => alpha[c].clone(),
    };
    let off_entry = |c: usize| match off {
        Some(OffSupportRows::SpareColumn { column, height }) if c == *column => v + height,
        Some(OffSupportRows::Compensated { column, height, .. }) if c == *column => v + height,
        Some(OffSupportRows::Compensated { relief, .. }) if c < k => v - relief,
        Some(OffSupportRows::AlphaMargin) if c < k => alpha[c].clone(),
        _ => v.clone(),
    };
    (0..n)
        .map(|r| {
            (0..m)
                .map(|c| if r < k { support_entry(r, c) } else { off_entry(c) })
                .collect()
        })
        .collect()
}

/// Equal supports. `alpha_i = v + z x_i / y_i`, `a_i = v - z (1 - x_i) / y_i`
/// with `0 < z < min_i(v, v y_i / (1 - x_i))`.
pub fn design_equal_support(spec: &DesignSpec) -> Result<DesignedGame, DesignError> {
    check_value(&spec.v)?;
    let k = spec.x_star.support().len();
    let l = spec.y_star.support().len();
    if k != l {
        return Err(DesignError::SupportMismatch { x: k, y: l });
    }
    if k == 1 {
        return Err(DesignError::DegenerateSupport);
    }
    let v = &spec.v;
    let row_perm = support_first(&spec.x_star);
    let col_perm = support_first(&spec.y_star);
    let x = permute(&spec.x_star, &row_perm).into_weights();
    let y = permute(&spec.y_star, &col_perm).into_weights();

    let upper = v.clone().min(positivity_bound(v, &x, &y, k));
    let z = match &spec.z {
        Some(z) => {
            check_open("z", z, &Rational::zero(), &upper)?;
            z.clone()
        }
        None => &upper / int(2),
    };
    let alpha: Vec<Rational> = (0..k).map(|i| v + &z * &x[i] / &y[i]).collect();
    let a: Vec<Rational> = (0..k)
        .map(|i| v - &z * (Rational::one() - &x[i]) / &y[i])
        .collect();

    let (n, m) = (x.len(), y.len());
    let off_rows = off_support_rows(n, m, k, l, v, &z, &y);
    let matrix = unpermute(canonical_layout(n, m, v, &alpha, &a, off_rows.as_ref()), &row_perm, &col_perm);
    Ok(DesignedGame {
        matrix,
        x_star: spec.x_star.clone(),
        y_star: spec.y_star.clone(),
        value: GameValue(v.clone()),
        row_perm,
        col_perm,
        construction: Construction::EqualSupport,
        parameters: DesignParameters {
            z: Some(z),
            alpha,
            a,
            off_rows,
            ..Default::default()
        },
        certificate: None,
    })
}

/// Larger column support. With `ybar` the `y*` mass past the first `k`
/// support columns and `w = v ybar - v1`: `alpha_i = v + x_i w / y_i`,
/// `a_i = alpha_i - w / y_i`, `beta_i = v`, `z = w / sum_{i<k} y_i`.
pub fn design_larger_support(spec: &DesignSpec) -> Result<DesignedGame, DesignError> {
    check_value(&spec.v)?;
    let k = spec.x_star.support().len();
    let l = spec.y_star.support().len();
    if k >= l {
        return Err(DesignError::SupportNotSmaller { x: k, y: l });
    }
    if k == 1 {
        return Err(DesignError::DegenerateSupport);
    }
    let v = &spec.v;
    let row_perm = support_first(&spec.x_star);
    let col_perm = support_first(&spec.y_star);
    let x = permute(&spec.x_star, &row_perm).into_weights();
    let y = permute(&spec.y_star, &col_perm).into_weights();

    let y_bar: Rational = y[k..l].iter().cloned().sum();
    let upper = v * &y_bar;
    // a_i > 0 needs v ybar - v1 < v y_i / (1 - x_i) as well.
    let lower = (&upper - positivity_bound(v, &x, &y, k)).max(Rational::zero());
    let v1 = match &spec.v1 {
        Some(v1) => {
            check_open("v1", v1, &lower, &upper)?;
            v1.clone()
        }
        None => (&lower + &upper) / int(2),
    };
    let w = &upper - &v1;
    let head_mass: Rational = y[..k].iter().cloned().sum();
    let z = &w / head_mass;
    let alpha: Vec<Rational> = (0..k).map(|i| v + &x[i] * &w / &y[i]).collect();
    let a: Vec<Rational> = (0..k).map(|i| &alpha[i] - &w / &y[i]).collect();
    let beta = vec![v.clone(); k];

    let (n, m) = (x.len(), y.len());
    let off_rows = off_support_rows(n, m, k, l, v, &w, &y);
    let matrix = unpermute(canonical_layout(n, m, v, &alpha, &a, off_rows.as_ref()), &row_perm, &col_perm);
    Ok(DesignedGame {
        matrix,
        x_star: spec.x_star.clone(),
        y_star: spec.y_star.clone(),
        value: GameValue(v.clone()),
        row_perm,
        col_perm,
        construction: Construction::LargerSupport,
        parameters: DesignParameters {
            z: Some(z),
            v1: Some(v1),
            y_bar: Some(y_bar),
            alpha,
            a,
            beta,
            off_rows,
            ..Default::default()
        },
        certificate: None,
    })
}

/// Pure target `e_i0`: every entry is `v` except the guiding column, which
/// pays `v + gap` on every row but `i0`. The guiding column is `i0` when
/// `cols > i0`, column 0 otherwise, and `y*` is pure on it.
///
/// Here `A y*` is not constant; only `min_x x^T A y* = v` holds.
pub fn design_singleton(
    x_star: &RationalStrategy,
    cols: usize,
    v: &Rational,
    gap: &Rational,
) -> Result<DesignedGame, DesignError> {
    check_value(v)?;
    if !gap.is_positive() {
        return Err(DesignError::NonPositiveGap(gap.clone()));
    }
    let support = x_star.support();
    if support.len() != 1 {
        return Err(DesignError::NotSingleton(support.len()));
    }
    assert!(cols > 0, "column count must be positive");
    let i0 = support[0];
    let n = x_star.dimension();
    let j0 = if i0 < cols { i0 } else { 0 };
    let mut matrix = RationalMatrix::filled(n, cols, v.clone());
    for i in (0..n).filter(|&i| i != i0) {
        matrix.set(i, j0, v + gap);
    }
    Ok(DesignedGame {
        matrix,
        x_star: x_star.clone(),
        y_star: MixedStrategy::pure(cols, j0),
        value: GameValue(v.clone()),
        row_perm: (0..n).collect(),
        col_perm: (0..cols).collect(),
        construction: Construction::SingletonSupport,
        parameters: DesignParameters {
            gap: Some(gap.clone()),
            ..Default::default()
        },
        certificate: None,
    })
}

/// Routes to the right construction and certifies the result.
///
/// Pure targets ignore the mixing of `y_star` (only its dimension is used)
/// and default `gap` to `v / 2`.
pub fn design(
    x_star: &RationalStrategy,
    y_star: &RationalStrategy,
    v: &Rational,
    options: &DesignOptions,
) -> Result<DesignedGame, DesignError> {
    check_value(v)?;
    let k = x_star.support().len();
    let l = y_star.support().len();
    if l < k {
        return Err(DesignError::SupportTooSmall { x: k, y: l });
    }
    let mut game = if k == 1 {
        let gap = options.gap.clone().unwrap_or_else(|| v / int(2));
        design_singleton(x_star, y_star.dimension(), v, &gap)?
    } else {
        let spec = DesignSpec {
            x_star: x_star.clone(),
            y_star: y_star.clone(),
            v: v.clone(),
            z: options.z.clone(),
            v1: options.v1.clone(),
        };
        if k == l {
            design_equal_support(&spec)?
        } else {
            design_larger_support(&spec)?
        }
    };
    let cert = certify(&game.matrix, &game.x_star, &game.y_star, options.run_oracle)?;
    if !cert.is_unique_minimax() || cert.oracle_agrees == Some(false) || cert.value != game.value {
        return Err(DesignError::CertificationFailed(Box::new(cert)));
    }
    game.certificate = Some(cert);
    Ok(game)
}
