//! Price of anarchy of a game class as a linear program, and the companion
//! program that designs the utility curve maximizing it.
//!
//! The primal works over `theta(a, x, b)`: the total true value of resources
//! chosen by `a` players only at equilibrium, `x` players in both the
//! equilibrium and the optimum, and `b` players only at the optimum.

use serde::{Deserialize, Serialize};

use crate::error::{PoaError, Result};
use crate::game::{BasisPair, UncertaintyLevel};
use crate::lp::{lp_solve, LinearProgram, LpStatus};

/// Coordinates `(a, x, b)` of a resource partition cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TripleIndex {
    pub a: usize,
    pub x: usize,
    pub b: usize,
}

impl TripleIndex {
    pub fn new(a: usize, x: usize, b: usize) -> Self {
        Self { a, x, b }
    }
}

/// All triples with `1 <= a + x + b <= n`, in lexicographic order.
pub fn enumerate_triples(n: usize) -> Vec<TripleIndex> {
    let mut out = Vec::new();
    for a in 0..=n {
        for x in 0..=n - a {
            for b in 0..=n - a - x {
                if a + x + b > 0 {
                    out.push(TripleIndex { a, x, b });
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PoaMethod {
    PrimalLP,
    DualLP,
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaEntry {
    #[serde(flatten)]
    pub triple: TripleIndex,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// Nonzero entries of the primal maximizer.
    Primal {
        theta: Vec<ThetaEntry>,
    },
    Dual {
        lambda: f64,
        mu: f64,
    },
    ClosedForm {
        formula: String,
    },
    /// The primal is unbounded, so no positive guarantee exists.
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoaReport {
    pub poa: f64,
    pub method: PoaMethod,
    pub certificate: Certificate,
}

impl PoaReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    DesignLP,
    SetCoverRecursion,
    SetCoverLimit,
}

/// A utility curve `u[0..=n]` with `u[0] = 0` and `u[1] = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityDesign {
    pub u: Vec<f64>,
    pub provenance: Provenance,
}

impl UtilityDesign {
    pub fn n(&self) -> usize {
        self.u.len() - 1
    }

    /// Pairs this design with the welfare curve `w` (same length).
    pub fn basis(&self, w: &[f64]) -> Result<BasisPair> {
        BasisPair::new(w.to_vec(), self.u.clone())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// Primal program whose optimal value `V*` gives `PoA = 1 / V*`.
///
/// Variables follow [`enumerate_triples`]; the first constraint is the summed
/// equilibrium condition, the equality normalizes equilibrium welfare to 1.
pub fn build_primal_lp(basis: &BasisPair, delta: UncertaintyLevel) -> LinearProgram {
    let amp = delta.amplification_factor();
    let triples = enumerate_triples(basis.n());
    let objective = triples.iter().map(|t| basis.w(t.b + t.x)).collect();
    let mut lp = LinearProgram::new(triples.len()).maximize(objective);
    let nash = triples
        .iter()
        .map(|t| amp * t.a as f64 * basis.u(t.a + t.x) - t.b as f64 * basis.u(t.a + t.x + 1))
        .collect();
    lp.add_ge(nash, 0.0);
    lp.add_eq(triples.iter().map(|t| basis.w(t.a + t.x)).collect(), 1.0);
    lp
}

/// PoA of the class of games with basis `(w, u)` and uncertainty `delta`.
///
/// An unbounded primal yields a PoA of 0.
pub fn poa_class(basis: &BasisPair, delta: UncertaintyLevel) -> Result<PoaReport> {
    let lp = build_primal_lp(basis, delta);
    let sol = lp_solve(&lp)?;
    match sol.status {
        LpStatus::Optimal => {
            if sol.value <= 0.0 {
                return Err(PoaError::DegenerateClass(format!(
                    "primal optimum {} is not positive",
                    sol.value
                )));
            }
            let theta = enumerate_triples(basis.n())
                .into_iter()
                .zip(&sol.point)
                .filter(|(_, &v)| v > 0.0)
                .map(|(triple, &value)| ThetaEntry { triple, value })
                .collect();
            Ok(PoaReport {
                poa: 1.0 / sol.value,
                method: PoaMethod::PrimalLP,
                certificate: Certificate::Primal { theta },
            })
        }
        LpStatus::Unbounded => Ok(PoaReport {
            poa: 0.0,
            method: PoaMethod::PrimalLP,
            certificate: Certificate::Unbounded,
        }),
        LpStatus::Infeasible => Err(PoaError::DegenerateClass(
            "equilibrium welfare normalization cannot be met".into(),
        )),
    }
}

/// Lagrange dual of [`build_primal_lp`]:
/// `min mu` s.t. `mu w(a+x) - lambda [B a u(a+x) - b u(a+x+1)] >= w(b+x)`.
///
/// Variables are `[lambda, mu+, mu-]`; the objective maximizes `-mu`.
pub fn build_dual_lp(basis: &BasisPair, delta: UncertaintyLevel) -> LinearProgram {
    let amp = delta.amplification_factor();
    let mut lp = LinearProgram::new(3).maximize(vec![0.0, -1.0, 1.0]);
    for t in enumerate_triples(basis.n()) {
        let wa = basis.w(t.a + t.x);
        let g = amp * t.a as f64 * basis.u(t.a + t.x) - t.b as f64 * basis.u(t.a + t.x + 1);
        lp.add_ge(vec![-g, wa, -wa], basis.w(t.b + t.x));
    }
    lp
}

/// Same quantity as [`poa_class`], computed through the dual program.
pub fn poa_class_dual(basis: &BasisPair, delta: UncertaintyLevel) -> Result<PoaReport> {
    let sol = lp_solve(&build_dual_lp(basis, delta))?;
    match sol.status {
        LpStatus::Optimal => {
            let lambda = sol.point[0];
            let mu = sol.point[1] - sol.point[2];
            if mu <= 0.0 {
                return Err(PoaError::DegenerateClass(format!("dual optimum {mu} is not positive")));
            }
            Ok(PoaReport {
                poa: 1.0 / mu,
                method: PoaMethod::DualLP,
                certificate: Certificate::Dual { lambda, mu },
            })
        }
        LpStatus::Infeasible => Ok(PoaReport {
            poa: 0.0,
            method: PoaMethod::DualLP,
            certificate: Certificate::Unbounded,
        }),
        LpStatus::Unbounded => Err(PoaError::DegenerateClass("dual program is unbounded".into())),
    }
}

fn check_welfare(w: &[f64]) -> Result<usize> {
    BasisPair::new(w.to_vec(), {
        let mut u = vec![0.0; w.len()];
        if u.len() > 1 {
            u[1] = 1.0;
        }
        u
    })?;
    if (w[1] - 1.0).abs() > 1e-12 {
        return Err(PoaError::InvalidBasis(format!("w[1] must equal 1, got {}", w[1])));
    }
    Ok(w.len() - 1)
}

/// Design program over free `u(1..=n)` and free `mu`.
///
/// Variable layout: `u+(1..=n)`, `u-(1..=n)`, `mu+`, `mu-`. One `<=` row per
/// triple plus the normalization `u(1) = 1`; the objective maximizes `-mu`.
pub fn build_design_lp(w: &[f64], delta: UncertaintyLevel) -> Result<LinearProgram> {
    let n = check_welfare(w)?;
    let amp = delta.amplification_factor();
    let nv = 2 * n + 2;
    let (mu_p, mu_m) = (2 * n, 2 * n + 1);
    let wk = |k: usize| w.get(k).copied().unwrap_or(0.0);
    // u(k) for k in 1..=n lives at columns k-1 and n+k-1.
    let add_u = |row: &mut [f64], k: usize, coef: f64| {
        if (1..=n).contains(&k) {
            row[k - 1] += coef;
            row[n + k - 1] -= coef;
        }
    };

    let mut objective = vec![0.0; nv];
    objective[mu_p] = -1.0;
    objective[mu_m] = 1.0;
    let mut lp = LinearProgram::new(nv).maximize(objective);
    for t in enumerate_triples(n) {
        // w(b+x) - mu w(a+x) + B a u(a+x) - b u(a+x+1) <= 0
        let mut row = vec![0.0; nv];
        row[mu_p] = -wk(t.a + t.x);
        row[mu_m] = wk(t.a + t.x);
        add_u(&mut row, t.a + t.x, amp * t.a as f64);
        add_u(&mut row, t.a + t.x + 1, -(t.b as f64));
        lp.add_le(row, -wk(t.b + t.x));
    }
    let mut norm = vec![0.0; nv];
    add_u(&mut norm, 1, 1.0);
    lp.add_eq(norm, 1.0);
    Ok(lp)
}

/// [`build_design_lp`] with `u(1) = 1` substituted and `mu = shift - nu`.
///
/// Variable layout: `u+(2..=n)`, `u-(2..=n)`, `nu+`, `nu-`. With `shift` at
/// least every row's ratio the origin is feasible, so only rows whose
/// right-hand side is still negative need phase one.
fn build_shifted_design_lp(w: &[f64], amp: f64) -> (LinearProgram, f64) {
    let n = w.len() - 1;
    let m = n - 1;
    let nv = 2 * m + 2;
    let (nu_p, nu_m) = (2 * m, 2 * m + 1);
    let wk = |k: usize| w.get(k).copied().unwrap_or(0.0);
    let triples = enumerate_triples(n);
    // Constant part of each row once u(1) = 1 is moved to the right.
    let fixed = |t: &TripleIndex| {
        let mut c = 0.0;
        if t.a + t.x == 1 {
            c += amp * t.a as f64;
        }
        if t.a + t.x == 0 {
            c -= t.b as f64;
        }
        c
    };
    let shift = triples
        .iter()
        .filter(|t| t.a + t.x >= 1)
        .map(|t| (wk(t.b + t.x) + fixed(t)) / wk(t.a + t.x))
        .fold(0.0, f64::max);

    let mut objective = vec![0.0; nv];
    objective[nu_p] = 1.0;
    objective[nu_m] = -1.0;
    let mut lp = LinearProgram::new(nv).maximize(objective);
    let add_u = |row: &mut [f64], k: usize, coef: f64| {
        if (2..=n).contains(&k) {
            row[k - 2] += coef;
            row[m + k - 2] -= coef;
        }
    };
    for t in &triples {
        // nu w(a+x) + B a u(a+x) - b u(a+x+1) <= shift w(a+x) - w(b+x) - fixed
        let mut row = vec![0.0; nv];
        row[nu_p] = wk(t.a + t.x);
        row[nu_m] = -wk(t.a + t.x);
        add_u(&mut row, t.a + t.x, amp * t.a as f64);
        add_u(&mut row, t.a + t.x + 1, -(t.b as f64));
        lp.add_le(row, shift * wk(t.a + t.x) - wk(t.b + t.x) - fixed(t));
    }
    (lp, shift)
}

/// Rounds to 12 significant digits.
pub(crate) fn round_sig12(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    format!("{v:.11e}").parse().unwrap_or(v)
}

/// Utility curve maximizing the class PoA for welfare `w` under `delta`.
pub fn optimal_design(w: &[f64], delta: UncertaintyLevel) -> Result<(UtilityDesign, PoaReport)> {
    let n = check_welfare(w)?;
    let (lp, shift) = build_shifted_design_lp(w, delta.amplification_factor());
    let sol = lp_solve(&lp)?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => {
            return Err(PoaError::DegenerateClass(
                "design program is infeasible (requires w(k) <= k)".into(),
            ))
        }
        LpStatus::Unbounded => return Err(PoaError::NumericalFailure("design program reported unbounded".into())),
    }
    let m = n - 1;
    let mut u = vec![0.0; n + 1];
    u[1] = 1.0;
    for (k, uk) in u.iter_mut().enumerate().skip(2) {
        *uk = round_sig12(sol.point[k - 2] - sol.point[m + k - 2]);
    }
    let mu = shift - (sol.point[2 * m] - sol.point[2 * m + 1]);
    Ok((
        UtilityDesign {
            u,
            provenance: Provenance::DesignLP,
        },
        PoaReport {
            poa: 1.0 / mu,
            method: PoaMethod::DualLP,
            certificate: Certificate::Dual { lambda: 1.0, mu },
        },
    ))
}
