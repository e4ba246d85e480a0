//! Exact linear programming over rationals and an enumeration oracle for
//! the row player's optimal set.
//!
//! Programs have the form `min p^T x  s.t.  A_eq x = b,  C x >= d` with all
//! variables free. The solver is a dense two-phase simplex using Bland's
//! rule, so it cannot cycle and repeated runs pivot identically.

use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::game::{GameError, GameValue, MixedStrategy, RationalMatrix, RationalStrategy};
use crate::numeric::Rational;

/// Default bound on `n` and `m` for [`enumerate_minimax_rows`].
pub const DEFAULT_ORACLE_CAP: usize = 10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("malformed program: {0}")]
    MalformedProgram(String),
    #[error("oracle cap exceeded: {rows}x{cols} matrix, cap {cap}")]
    CapExceeded { rows: usize, cols: usize, cap: usize },
    #[error("row and column programs disagree: {row} vs {col}")]
    DualityGap { row: Rational, col: Rational },
    #[error("game program unexpectedly {0:?}")]
    UnexpectedStatus(LpStatus),
    #[error(transparent)]
    Game(#[from] GameError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearProgram {
    pub objective: Vec<Rational>,
    pub eq_matrix: Vec<Vec<Rational>>,
    pub eq_rhs: Vec<Rational>,
    pub ineq_matrix: Vec<Vec<Rational>>,
    pub ineq_rhs: Vec<Rational>,
}

impl LinearProgram {
    /// An empty program over `num_vars` free variables with zero objective.
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            objective: vec![Rational::zero(); num_vars],
            eq_matrix: Vec::new(),
            eq_rhs: Vec::new(),
            ineq_matrix: Vec::new(),
            ineq_rhs: Vec::new(),
        }
    }

    pub fn with_objective(mut self, objective: Vec<Rational>) -> Self {
        self.objective = objective;
        self
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    /// Adds `row . x = rhs`.
    pub fn equality(mut self, row: Vec<Rational>, rhs: Rational) -> Self {
        self.eq_matrix.push(row);
        self.eq_rhs.push(rhs);
        self
    }

    /// Adds `row . x >= rhs`.
    pub fn at_least(mut self, row: Vec<Rational>, rhs: Rational) -> Self {
        self.ineq_matrix.push(row);
        self.ineq_rhs.push(rhs);
        self
    }

    /// Adds `row . x <= rhs` as `-row . x >= -rhs`.
    pub fn at_most(self, row: Vec<Rational>, rhs: Rational) -> Self {
        let neg = row.into_iter().map(|c| -c).collect();
        self.at_least(neg, -rhs)
    }

    fn validate(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        if n == 0 {
            return Err(LpError::MalformedProgram("no variables".into()));
        }
        if self.eq_matrix.len() != self.eq_rhs.len() {
            return Err(LpError::MalformedProgram(format!(
                "{} equality rows but {} right-hand sides",
                self.eq_matrix.len(),
                self.eq_rhs.len()
            )));
        }
        if self.ineq_matrix.len() != self.ineq_rhs.len() {
            return Err(LpError::MalformedProgram(format!(
                "{} inequality rows but {} right-hand sides",
                self.ineq_matrix.len(),
                self.ineq_rhs.len()
            )));
        }
        for (kind, rows) in [("equality", &self.eq_matrix), ("inequality", &self.ineq_matrix)] {
            if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
                return Err(LpError::MalformedProgram(format!(
                    "{kind} row {i} has {} coefficients, expected {n}",
                    r.len()
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpOutcome {
    pub status: LpStatus,
    pub solution: Option<Vec<Rational>>,
    pub objective_value: Option<Rational>,
    /// Indices of inequality rows binding at the solution.
    pub tight_set: Option<Vec<usize>>,
}

impl LpOutcome {
    fn without_solution(status: LpStatus) -> Self {
        LpOutcome {
            status,
            solution: None,
            objective_value: None,
            tight_set: None,
        }
    }
}

/// Dense simplex tableau over a standard-form program `A z = b, z >= 0`.
struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
}

enum PhaseResult {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        if !p.is_one() {
            for e in self.rows[r].iter_mut() {
                if !e.is_zero() {
                    *e /= &p;
                }
            }
            self.rhs[r] /= &p;
        }
        let pivot_row = self.rows[r].clone();
        let pivot_rhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][c].is_zero() {
                continue;
            }
            let factor = self.rows[i][c].clone();
            for (e, pe) in self.rows[i].iter_mut().zip(&pivot_row) {
                if !pe.is_zero() {
                    *e -= &factor * pe;
                }
            }
            self.rhs[i] -= &factor * &pivot_rhs;
        }
        self.basis[r] = c;
    }

    fn reduced_costs(&self, costs: &[Rational], active_cols: usize) -> Vec<Rational> {
        let mut red: Vec<Rational> = costs[..active_cols].to_vec();
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = &costs[b];
            if cb.is_zero() {
                continue;
            }
            for (j, rj) in red.iter_mut().enumerate() {
                let t = &self.rows[i][j];
                if !t.is_zero() {
                    *rj -= cb * t;
                }
            }
        }
        red
    }

    /// Minimizes `costs . z` over columns `0..active_cols` with Bland's rule.
    fn optimize(&mut self, costs: &[Rational], active_cols: usize) -> PhaseResult {
        loop {
            let red = self.reduced_costs(costs, active_cols);
            let Some(enter) = red.iter().position(Signed::is_negative) else {
                return PhaseResult::Optimal;
            };
            let mut leave: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                let t = &self.rows[i][enter];
                if !t.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / t;
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, enter),
                None => return PhaseResult::Unbounded,
            }
        }
    }

    fn basic_solution(&self, width: usize) -> Vec<Rational> {
        let mut z = vec![Rational::zero(); width];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < width {
                z[b] = self.rhs[i].clone();
            }
        }
        z
    }
}

/// Solves `lp` exactly.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpOutcome, LpError> {
    lp.validate()?;
    let nv = lp.num_vars();
    let n_eq = lp.eq_matrix.len();
    let n_in = lp.ineq_matrix.len();
    // Standard form columns: u (nv), w (nv), slack (n_in); x = u - w.
    let width = 2 * nv + n_in;
    let n_rows = n_eq + n_in;

    let mut rows = Vec::with_capacity(n_rows);
    let mut rhs = Vec::with_capacity(n_rows);
    let constraint_rows = lp
        .eq_matrix
        .iter()
        .zip(&lp.eq_rhs)
        .map(|(r, b)| (r, b, None))
        .chain(
            lp.ineq_matrix
                .iter()
                .zip(&lp.ineq_rhs)
                .enumerate()
                .map(|(k, (r, b))| (r, b, Some(k))),
        );
    for (coeffs, b, slack) in constraint_rows {
        let mut row = vec![Rational::zero(); width + n_rows];
        for (j, c) in coeffs.iter().enumerate() {
            row[j] = c.clone();
            row[nv + j] = -c.clone();
        }
        if let Some(k) = slack {
            row[2 * nv + k] = -Rational::one();
        }
        let mut b = b.clone();
        if b.is_negative() {
            for e in row.iter_mut() {
                *e = -e.clone();
            }
            b = -b;
        }
        rows.push(row);
        rhs.push(b);
    }
    // Artificial columns width..width + n_rows form the starting basis.
    for (i, row) in rows.iter_mut().enumerate() {
        row[width + i] = Rational::one();
    }
    let mut tab = Tableau {
        rows,
        rhs,
        basis: (width..width + n_rows).collect(),
    };

    let mut phase1_costs = vec![Rational::zero(); width + n_rows];
    for c in phase1_costs.iter_mut().skip(width) {
        *c = Rational::one();
    }
    // Phase one is bounded below by zero.
    let _ = tab.optimize(&phase1_costs, width + n_rows);
    let infeasibility: Rational = tab
        .basis
        .iter()
        .zip(&tab.rhs)
        .filter(|(b, _)| **b >= width)
        .map(|(_, r)| r.clone())
        .sum();
    if infeasibility.is_positive() {
        return Ok(LpOutcome::without_solution(LpStatus::Infeasible));
    }

    // Drive zero-valued artificials out of the basis; drop redundant rows.
    let mut i = 0;
    while i < tab.rows.len() {
        if tab.basis[i] >= width {
            match (0..width).find(|&j| !tab.rows[i][j].is_zero()) {
                Some(j) => {
                    tab.pivot(i, j);
                    i += 1;
                }
                None => {
                    tab.rows.remove(i);
                    tab.rhs.remove(i);
                    tab.basis.remove(i);
                }
            }
        } else {
            i += 1;
        }
    }
    for row in tab.rows.iter_mut() {
        row.truncate(width);
    }

    let mut costs = vec![Rational::zero(); width];
    for (j, p) in lp.objective.iter().enumerate() {
        costs[j] = p.clone();
        costs[nv + j] = -p.clone();
    }
    if let PhaseResult::Unbounded = tab.optimize(&costs, width) {
        return Ok(LpOutcome::without_solution(LpStatus::Unbounded));
    }

    let z = tab.basic_solution(width);
    let x: Vec<Rational> = (0..nv).map(|j| &z[j] - &z[nv + j]).collect();
    let objective_value = lp
        .objective
        .iter()
        .zip(&x)
        .map(|(p, xi)| p * xi)
        .sum();
    let tight_set = lp
        .ineq_matrix
        .iter()
        .zip(&lp.ineq_rhs)
        .enumerate()
        .filter(|(_, (row, d))| row.iter().zip(&x).map(|(c, xi)| c * xi).sum::<Rational>() == **d)
        .map(|(k, _)| k)
        .collect();
    Ok(LpOutcome {
        status: LpStatus::Optimal,
        solution: Some(x),
        objective_value: Some(objective_value),
        tight_set: Some(tight_set),
    })
}

/// A point satisfying the given equalities and `>=` inequalities, if one exists.
pub fn find_feasible_point(
    num_vars: usize,
    equalities: &[(Vec<Rational>, Rational)],
    inequalities: &[(Vec<Rational>, Rational)],
) -> Result<Option<Vec<Rational>>, LpError> {
    let mut lp = LinearProgram::new(num_vars);
    for (row, b) in equalities {
        lp = lp.equality(row.clone(), b.clone());
    }
    for (row, d) in inequalities {
        lp = lp.at_least(row.clone(), d.clone());
    }
    let out = solve_lp(&lp)?;
    Ok(match out.status {
        LpStatus::Infeasible => None,
        _ => out.solution,
    })
}

/// Whether `{x : equalities hold, inequalities (>=) hold}` is non-empty.
pub fn feasible(
    num_vars: usize,
    equalities: &[(Vec<Rational>, Rational)],
    inequalities: &[(Vec<Rational>, Rational)],
) -> Result<bool, LpError> {
    Ok(find_feasible_point(num_vars, equalities, inequalities)?.is_some())
}

fn unit(len: usize, at: usize) -> Vec<Rational> {
    let mut v = vec![Rational::zero(); len];
    v[at] = Rational::one();
    v
}

/// `min v  s.t.  v - (x^T A)_j >= 0,  sum x = 1,  x >= 0` over `(v, x)`.
pub fn row_program(a: &RationalMatrix) -> LinearProgram {
    let (n, m) = (a.n_rows(), a.n_cols());
    let mut lp = LinearProgram::new(n + 1).with_objective(unit(n + 1, 0));
    for j in 0..m {
        let mut row = vec![Rational::one()];
        row.extend(a.column(j).map(|e| -e.clone()));
        lp = lp.at_least(row, Rational::zero());
    }
    for i in 0..n {
        lp = lp.at_least(unit(n + 1, i + 1), Rational::zero());
    }
    let mut total = vec![Rational::one(); n + 1];
    total[0] = Rational::zero();
    lp.equality(total, Rational::one())
}

/// `max w  s.t.  (A y)_i - w >= 0,  sum y = 1,  y >= 0`, posed as `min -w`.
pub fn column_program(a: &RationalMatrix) -> LinearProgram {
    let (n, m) = (a.n_rows(), a.n_cols());
    let mut objective = vec![Rational::zero(); m + 1];
    objective[0] = -Rational::one();
    let mut lp = LinearProgram::new(m + 1).with_objective(objective);
    for i in 0..n {
        let mut row = vec![-Rational::one()];
        row.extend(a.row(i).iter().cloned());
        lp = lp.at_least(row, Rational::zero());
    }
    for j in 0..m {
        lp = lp.at_least(unit(m + 1, j + 1), Rational::zero());
    }
    let mut total = vec![Rational::one(); m + 1];
    total[0] = Rational::zero();
    lp.equality(total, Rational::one())
}

fn optimal_pair(out: LpOutcome) -> Result<(Rational, RationalStrategy), LpError> {
    if out.status != LpStatus::Optimal {
        return Err(LpError::UnexpectedStatus(out.status));
    }
    let mut sol = out.solution.expect("optimal outcome carries a solution");
    let value = sol.remove(0);
    Ok((value, MixedStrategy::new(sol)?))
}

/// Row player's minimax value and an optimal vertex strategy.
pub fn solve_row_game(a: &RationalMatrix) -> Result<(GameValue<Rational>, RationalStrategy), LpError> {
    let (v, x) = optimal_pair(solve_lp(&row_program(a))?)?;
    Ok((GameValue(v), x))
}

/// Column player's maximin value and an optimal vertex strategy.
pub fn solve_column_game(
    a: &RationalMatrix,
) -> Result<(GameValue<Rational>, RationalStrategy), LpError> {
    let (w, y) = optimal_pair(solve_lp(&column_program(a))?)?;
    Ok((GameValue(w), y))
}

/// The exact game value, cross-checked against the dual program.
pub fn game_value(a: &RationalMatrix) -> Result<GameValue<Rational>, LpError> {
    let (row, _) = solve_row_game(a)?;
    let (col, _) = solve_column_game(a)?;
    if row != col {
        return Err(LpError::DualityGap { row: row.0, col: col.0 });
    }
    Ok(row)
}

/// Solves a square system by Gaussian elimination; `None` when singular.
pub fn solve_square(mut m: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, pivot);
        b.swap(col, pivot);
        let p = m[col][col].clone();
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let f = &m[r][col] / &p;
            for c in col..n {
                let delta = &f * &m[col][c];
                m[r][c] -= delta;
            }
            let delta = &f * &b[col];
            b[r] -= delta;
        }
    }
    Some((0..n).map(|i| &b[i] / &m[i][i]).collect())
}

/// The row player's optimal face, described by its vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinimaxFace {
    pub value: GameValue<Rational>,
    pub row_vertices: Vec<RationalStrategy>,
    pub unique_row: bool,
}

pub fn enumerate_minimax_rows(a: &RationalMatrix) -> Result<MinimaxFace, LpError> {
    enumerate_minimax_rows_with_cap(a, DEFAULT_ORACLE_CAP)
}

/// Enumerates every vertex of `{(x, w) : x in simplex, (x^T A)_j <= w}` by
/// choosing a row support `S` and an equally sized set `T` of binding
/// columns, then keeps the vertices with minimal `w`.
///
/// Independent of the simplex code. Cost grows like `C(n + m, n)`.
pub fn enumerate_minimax_rows_with_cap(
    a: &RationalMatrix,
    cap: usize,
) -> Result<MinimaxFace, LpError> {
    let (n, m) = (a.n_rows(), a.n_cols());
    if n > cap || m > cap {
        return Err(LpError::CapExceeded {
            rows: n,
            cols: m,
            cap,
        });
    }
    let mut col_sets: Vec<Vec<Vec<usize>>> = vec![Vec::new(); n.min(m) + 1];
    for mask in 1u32..(1 << m) {
        let size = mask.count_ones() as usize;
        if size <= n.min(m) {
            col_sets[size].push(bits(mask, m));
        }
    }

    let mut best: Option<Rational> = None;
    let mut vertices: BTreeSet<Vec<Rational>> = BTreeSet::new();
    for mask in 1u32..(1 << n) {
        let rows = bits(mask, n);
        let s = rows.len();
        if s > m {
            continue;
        }
        for cols in &col_sets[s] {
            // Unknowns (x_S, w): sum x_S = 1 and (x^T A)_j - w = 0 for j in T.
            let mut sys = Vec::with_capacity(s + 1);
            let mut rhs = Vec::with_capacity(s + 1);
            let mut ones = vec![Rational::one(); s + 1];
            ones[s] = Rational::zero();
            sys.push(ones);
            rhs.push(Rational::one());
            for &j in cols {
                let mut row: Vec<Rational> = rows.iter().map(|&i| a.get(i, j).clone()).collect();
                row.push(-Rational::one());
                sys.push(row);
                rhs.push(Rational::zero());
            }
            let Some(sol) = solve_square(sys, rhs) else {
                continue;
            };
            if sol[..s].iter().any(Signed::is_negative) {
                continue;
            }
            let w = &sol[s];
            let mut x = vec![Rational::zero(); n];
            for (k, &i) in rows.iter().enumerate() {
                x[i] = sol[k].clone();
            }
            let dominated = (0..m).all(|j| {
                let col: Rational = (0..n).map(|i| a.get(i, j) * &x[i]).sum();
                col <= *w
            });
            if !dominated {
                continue;
            }
            match &best {
                Some(b) if w > b => continue,
                Some(b) if w == b => {}
                _ => {
                    best = Some(w.clone());
                    vertices.clear();
                }
            }
            vertices.insert(x);
        }
    }
    let value = best.expect("the simplex always has an optimal vertex");
    let row_vertices: Vec<RationalStrategy> = vertices
        .into_iter()
        .map(MixedStrategy::from_weights_unchecked)
        .collect();
    Ok(MinimaxFace {
        value: GameValue(value),
        unique_row: row_vertices.len() == 1,
        row_vertices,
    })
}

fn bits(mask: u32, len: usize) -> Vec<usize> {
    (0..len).filter(|&i| mask & (1 << i) != 0).collect()
}
