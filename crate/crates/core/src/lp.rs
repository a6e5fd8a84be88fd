//! Dense two-phase simplex.
//!
//! Maximizes `c·x` over `x >= 0` subject to equality rows and `>=` rows.
//! Pivoting follows Bland's rule throughout, so the method terminates on
//! degenerate problems at the cost of speed. Problem sizes here are a few
//! hundred rows at most.

use serde::{Deserialize, Serialize};

use crate::error::{PoaError, Result};

/// Smallest magnitude accepted as a pivot element.
pub const PIVOT_TOL: f64 = 1e-10;
/// Constraint satisfaction tolerance for reported points.
pub const FEASIBILITY_TOL: f64 = 1e-8;
/// Hard cap on pivots across both phases.
pub const MAX_PIVOTS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub row: Vec<f64>,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub objective: Vec<f64>,
    pub eq_constraints: Vec<Constraint>,
    pub ge_constraints: Vec<Constraint>,
}

impl LinearProgram {
    /// Empty program over `num_vars` nonnegative variables with a zero objective.
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            objective: vec![0.0; num_vars],
            eq_constraints: Vec::new(),
            ge_constraints: Vec::new(),
        }
    }

    pub fn maximize(mut self, objective: Vec<f64>) -> Self {
        self.objective = objective;
        self
    }

    pub fn add_eq(&mut self, row: Vec<f64>, rhs: f64) {
        self.eq_constraints.push(Constraint { row, rhs });
    }

    pub fn add_ge(&mut self, row: Vec<f64>, rhs: f64) {
        self.ge_constraints.push(Constraint { row, rhs });
    }

    /// `row·x <= rhs`, stored as `-row·x >= -rhs`.
    pub fn add_le(&mut self, row: Vec<f64>, rhs: f64) {
        self.add_ge(row.into_iter().map(|v| -v).collect(), -rhs);
    }

    pub fn num_constraints(&self) -> usize {
        self.eq_constraints.len() + self.ge_constraints.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_vars == 0 {
            return Err(PoaError::InvalidArgument("LP needs at least one variable".into()));
        }
        if self.objective.len() != self.num_vars {
            return Err(PoaError::InvalidArgument(format!(
                "objective has {} entries for {} variables",
                self.objective.len(),
                self.num_vars
            )));
        }
        for c in self.eq_constraints.iter().chain(&self.ge_constraints) {
            if c.row.len() != self.num_vars {
                return Err(PoaError::InvalidArgument(format!(
                    "constraint row has {} entries for {} variables",
                    c.row.len(),
                    self.num_vars
                )));
            }
            if !c.rhs.is_finite() || c.row.iter().any(|v| !v.is_finite()) {
                return Err(PoaError::InvalidArgument("non-finite LP coefficient".into()));
            }
        }
        if self.objective.iter().any(|v| !v.is_finite()) {
            return Err(PoaError::InvalidArgument("non-finite objective coefficient".into()));
        }
        Ok(())
    }

    pub fn objective_value(&self, point: &[f64]) -> f64 {
        dot(&self.objective, point)
    }

    /// Largest violation of any constraint or sign bound at `point`.
    pub fn max_violation(&self, point: &[f64]) -> f64 {
        let eq = self.eq_constraints.iter().map(|c| (dot(&c.row, point) - c.rhs).abs());
        let ge = self
            .ge_constraints
            .iter()
            .map(|c| (c.rhs - dot(&c.row, point)).max(0.0));
        let sign = point.iter().map(|&x| (-x).max(0.0));
        eq.chain(ge).chain(sign).fold(0.0, f64::max)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Result of [`lp_solve`]. `value` and `point` are meaningful only when
/// `status` is `Optimal`; otherwise `value` is `-inf` (infeasible) or `+inf`
/// (unbounded) and `point` is empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub value: f64,
    pub point: Vec<f64>,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

struct Tableau {
    /// Constraint rows; the last entry of each row is the right-hand side.
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    /// Reduced costs `c_B B^-1 A_j - c_j`; last entry holds the objective value.
    reduced: Vec<f64>,
    ncols: usize,
    pivots: usize,
}

enum Phase {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn pivot(&mut self, pr: usize, pc: usize) {
        let inv = 1.0 / self.rows[pr][pc];
        for v in self.rows[pr].iter_mut() {
            *v *= inv;
        }
        self.rows[pr][pc] = 1.0;
        let pivot_row = std::mem::take(&mut self.rows[pr]);
        for (r, row) in self.rows.iter_mut().enumerate() {
            if r == pr {
                continue;
            }
            let f = row[pc];
            if f != 0.0 {
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * p;
                }
                row[pc] = 0.0;
                if row[self.ncols].abs() < 1e-13 {
                    row[self.ncols] = 0.0;
                }
            }
        }
        let f = self.reduced[pc];
        if f != 0.0 {
            for (v, p) in self.reduced.iter_mut().zip(&pivot_row) {
                *v -= f * p;
            }
            self.reduced[pc] = 0.0;
        }
        self.rows[pr] = pivot_row;
        self.basis[pr] = pc;
        self.pivots += 1;
    }

    fn price(&mut self, cost: &[f64]) {
        self.reduced = cost.iter().map(|c| -c).collect();
        self.reduced.push(0.0);
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let cb = cost[b];
            if cb != 0.0 {
                for (r, v) in self.reduced.iter_mut().zip(row) {
                    *r += cb * v;
                }
            }
        }
        for &b in &self.basis {
            self.reduced[b] = 0.0;
        }
    }

    /// Runs primal simplex with Bland's rule over the allowed columns.
    fn optimize(&mut self, cost: &[f64], allowed: &[bool]) -> Result<Phase> {
        self.price(cost);
        loop {
            if self.pivots >= MAX_PIVOTS {
                return Err(PoaError::NumericalFailure(format!(
                    "simplex exceeded {MAX_PIVOTS} pivots"
                )));
            }
            let Some(enter) = (0..self.ncols).find(|&j| allowed[j] && self.reduced[j] < -PIVOT_TOL) else {
                return Ok(Phase::Optimal);
            };
            let mut leave: Option<(usize, f64)> = None;
            for (r, row) in self.rows.iter().enumerate() {
                let a = row[enter];
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = row[self.ncols].max(0.0) / a;
                leave = match leave {
                    None => Some((r, ratio)),
                    Some((br, best)) => {
                        let tie = (ratio - best).abs() <= 1e-12 * (1.0 + best.abs());
                        if (!tie && ratio < best) || (tie && self.basis[r] < self.basis[br]) {
                            Some((r, ratio))
                        } else {
                            Some((br, best))
                        }
                    }
                };
            }
            match leave {
                None => return Ok(Phase::Unbounded),
                Some((r, _)) => self.pivot(r, enter),
            }
        }
    }
}

/// Solves `lp` to global optimality or reports infeasibility/unboundedness.
pub fn lp_solve(lp: &LinearProgram) -> Result<LpSolution> {
    lp.validate()?;
    let n = lp.num_vars;
    let n_ge = lp.ge_constraints.len();
    let m = lp.num_constraints();
    // Columns: structural | surplus (one per >= row) | artificial (rows
    // without a usable surplus column only).
    let art0 = n + n_ge;
    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut needs_art = Vec::new();
    for (k, c) in lp.eq_constraints.iter().chain(&lp.ge_constraints).enumerate() {
        let mut row = vec![0.0; art0];
        row[..n].copy_from_slice(&c.row);
        let surplus = k.checked_sub(lp.eq_constraints.len()).map(|g| n + g);
        if let Some(s) = surplus {
            row[s] = -1.0;
        }
        let mut rhs = c.rhs;
        // A >= row with rhs <= 0 flips to a <= row whose surplus is basic.
        let flip = rhs < 0.0 || (rhs == 0.0 && surplus.is_some());
        if flip {
            row.iter_mut().for_each(|v| *v = -*v);
            rhs = -rhs;
        }
        match surplus {
            Some(s) if flip => basis.push(s),
            _ => {
                basis.push(usize::MAX);
                needs_art.push(k);
            }
        }
        row.push(rhs);
        rows.push(row);
    }
    let ncols = art0 + needs_art.len();
    for row in rows.iter_mut() {
        let rhs = row.pop().unwrap_or(0.0);
        row.resize(ncols, 0.0);
        row.push(rhs);
    }
    for (a, &k) in needs_art.iter().enumerate() {
        rows[k][art0 + a] = 1.0;
        basis[k] = art0 + a;
    }
    let scale = lp
        .eq_constraints
        .iter()
        .chain(&lp.ge_constraints)
        .map(|c| c.rhs.abs())
        .fold(1.0, f64::max);

    let mut tab = Tableau {
        rows,
        basis,
        reduced: Vec::new(),
        ncols,
        pivots: 0,
    };

    // Phase one: drive the artificial sum to zero.
    let mut cost = vec![0.0; ncols];
    cost[art0..].iter_mut().for_each(|c| *c = -1.0);
    let all = vec![true; ncols];
    tab.optimize(&cost, &all)?;
    let infeasibility = -tab.reduced[ncols];
    if infeasibility > FEASIBILITY_TOL * scale {
        return Ok(LpSolution {
            status: LpStatus::Infeasible,
            value: f64::NEG_INFINITY,
            point: Vec::new(),
        });
    }

    // Pivot remaining zero-level artificials out of the basis; rows where
    // that is impossible are linearly dependent and are dropped.
    let mut r = 0;
    while r < tab.rows.len() {
        if tab.basis[r] >= art0 {
            let col = (0..art0).find(|&j| tab.rows[r][j].abs() > 1e-9);
            match col {
                Some(j) => tab.pivot(r, j),
                None => {
                    tab.rows.remove(r);
                    tab.basis.remove(r);
                    continue;
                }
            }
        }
        r += 1;
    }

    // Artificial columns are dead from here on.
    for row in tab.rows.iter_mut() {
        let rhs = row[ncols];
        row.truncate(art0);
        row.push(rhs);
    }
    tab.ncols = art0;
    let ncols = art0;
    let mut cost = vec![0.0; ncols];
    cost[..n].copy_from_slice(&lp.objective);
    let allowed = vec![true; ncols];
    if let Phase::Unbounded = tab.optimize(&cost, &allowed)? {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            value: f64::INFINITY,
            point: Vec::new(),
        });
    }

    let mut point = vec![0.0; n];
    for (row, &b) in tab.rows.iter().zip(&tab.basis) {
        if b < n {
            point[b] = row[ncols].max(0.0);
        }
    }
    let violation = lp.max_violation(&point);
    if violation > FEASIBILITY_TOL * scale {
        return Err(PoaError::NumericalFailure(format!(
            "optimal point violates constraints by {violation:e}"
        )));
    }
    Ok(LpSolution {
        status: LpStatus::Optimal,
        value: lp.objective_value(&point),
        point,
    })
}
