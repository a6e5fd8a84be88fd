//! Closed-form results for set covering games, where welfare is the total
//! true value of covered resources (`w(k) = 1` for `k >= 1`).

use serde::{Deserialize, Serialize};

use crate::error::{PoaError, Result};
use crate::game::{set_covering_welfare, Allocation, BasisPair, GameInstance, GameSkeleton, UncertaintyLevel};
use crate::oracle::extremal_valuations;
use crate::poa_lp::{Provenance, UtilityDesign};

/// Largest player count accepted by the finite-n formulas.
pub const MAX_FINITE_N: usize = 20;
/// Largest player count accepted by the worst-case generator.
pub const MAX_WORSTCASE_N: usize = 8;

const SERIES_REL_TOL: f64 = 1e-14;

/// `B = (1 + delta) / (1 - delta)`: the largest ratio between two admissible
/// estimates of one resource.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Amplification(f64);

impl Amplification {
    pub fn value(self) -> f64 {
        self.0
    }
}

pub fn amplification(delta: UncertaintyLevel) -> Amplification {
    Amplification(delta.amplification_factor())
}

/// Inverse PoA of set covering games under utility `u` (indices `0..=n`).
fn setcover_poa_inverse(u: &[f64], amp: f64, n: usize) -> f64 {
    (1..n)
        .map(|j| {
            let jf = j as f64;
            let t1 = amp * (jf + 1.0) * u[j + 1];
            let t2 = amp * jf * u[j + 1] + 1.0;
            let t3 = amp * jf * u[j] - u[j + 1] + 1.0;
            t1.max(t2).max(t3)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// PoA of the set covering class with `n` players, uncertainty `delta` and
/// utility `u`, where `u` holds at least `u[0..=n]`.
pub fn setcover_poa(u: &[f64], delta: UncertaintyLevel, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(PoaError::InvalidArgument(format!("n must be at least 2, got {n}")));
    }
    if u.len() <= n {
        return Err(PoaError::InvalidArgument(format!(
            "utility has {} entries, need {}",
            u.len(),
            n + 1
        )));
    }
    if (u[1] - 1.0).abs() > 1e-12 {
        return Err(PoaError::InvalidBasis(format!("u[1] must equal 1, got {}", u[1])));
    }
    Ok(1.0 / setcover_poa_inverse(u, delta.amplification_factor(), n))
}

fn check_finite_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(PoaError::InvalidArgument(format!("n must be at least 2, got {n}")));
    }
    if n > MAX_FINITE_N {
        return Err(PoaError::SizeExceeded { n, max: MAX_FINITE_N });
    }
    Ok(())
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// `1 / (B^n (n-1) (n-1)!)`, the tail term shared by the finite-n formulas.
fn finite_tail(amp: f64, n: usize) -> f64 {
    1.0 / (amp.powi(n as i32) * (n - 1) as f64 * factorial(n - 1))
}

/// `1 - 1 / (tail + sum_{k<n} B^-k / k!)`: the equilibrium-to-optimum welfare
/// ratio of [`build_worstcase_game`] for `n` players.
///
/// At `delta = 0`, and for `delta > 0` once `n` is large enough, this is the
/// best class PoA any utility can achieve. For small `n` with `delta > 0` it
/// overstates it (e.g. `n = 2`, `delta = 0.5`: 4/13 here, 7/24 from the
/// design program); use [`crate::poa_lp::optimal_design`] for exact values.
pub fn optimal_poa_finite(n: usize, delta: UncertaintyLevel) -> Result<f64> {
    check_finite_n(n)?;
    let amp = delta.amplification_factor();
    let series: f64 = (0..n).map(|k| amp.powi(-(k as i32)) / factorial(k)).sum();
    Ok(1.0 - 1.0 / (finite_tail(amp, n) + series))
}

/// Optimal `n`-player utility from its non-recursive expression.
pub fn optimal_design_closed_form(n: usize, delta: UncertaintyLevel) -> Result<Vec<f64>> {
    check_finite_n(n)?;
    let amp = delta.amplification_factor();
    let tail = finite_tail(amp, n);
    let partial = |from: usize| -> f64 { (from..n).map(|k| amp.powi(-(k as i32)) / factorial(k)).sum() };
    let denom = tail + partial(1);
    let mut u = vec![0.0; n + 1];
    for (j, uj) in u.iter_mut().enumerate().skip(1) {
        *uj = amp.powi(j as i32 - 1) * factorial(j - 1) * (tail + partial(j)) / denom;
    }
    Ok(u)
}

/// `n`-player design from the backward recursion `u(n) = 1`,
/// `u(j) = u(j+1) / (B j) + (n-1) u(n) / j`, normalized to `u(1) = 1`,
/// together with [`optimal_poa_finite`].
///
/// The recursion equalizes the binding terms of [`setcover_poa`] except
/// `B (j+1) u(j+1)`, which can dominate for small `n` when `delta > 0`.
pub fn optimal_design_finite(n: usize, delta: UncertaintyLevel) -> Result<(UtilityDesign, f64)> {
    check_finite_n(n)?;
    let amp = delta.amplification_factor();
    let mut u = vec![0.0; n + 1];
    u[n] = 1.0;
    for j in (1..n).rev() {
        let jf = j as f64;
        u[j] = u[j + 1] / (amp * jf) + (n - 1) as f64 * u[n] / jf;
    }
    let scale = u[1];
    for v in u.iter_mut() {
        *v /= scale;
    }
    let poa = optimal_poa_finite(n, delta)?;
    Ok((
        UtilityDesign {
            u,
            provenance: Provenance::SetCoverRecursion,
        },
        poa,
    ))
}

/// Large-population optimal design `u*(1..=j_max)`:
/// `u*(j) = sum_{k >= j} (j-1)! / (B^{k-j+1} (e^{1/B} - 1) k!)`.
pub fn optimal_design_limit(delta: UncertaintyLevel, j_max: usize) -> UtilityDesign {
    let amp = delta.amplification_factor();
    let norm = (1.0 / amp).exp_m1();
    let mut u = vec![0.0; j_max + 1];
    for (j, uj) in u.iter_mut().enumerate().skip(1) {
        // First term (k = j) is 1 / (B j); each next one gains 1 / (B (k + 1)).
        let mut term = 1.0 / (amp * j as f64);
        let mut sum = 0.0;
        let mut k = j;
        while term > SERIES_REL_TOL * sum || sum == 0.0 {
            sum += term;
            k += 1;
            term /= amp * k as f64;
        }
        *uj = sum / norm;
    }
    if j_max >= 1 {
        u[1] = 1.0;
    }
    UtilityDesign {
        u,
        provenance: Provenance::SetCoverLimit,
    }
}

/// `1 - e^{-1/B}`.
pub fn optimal_poa_limit(delta: UncertaintyLevel) -> f64 {
    -(-1.0 / delta.amplification_factor()).exp_m1()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MismatchRegime {
    /// Design uncertainty at or below the realized one.
    Underestimate,
    Overestimate,
}

impl MismatchRegime {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Underestimate => "underestimate",
            Self::Overestimate => "overestimate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MismatchReport {
    pub delta_design: UncertaintyLevel,
    pub delta_true: UncertaintyLevel,
    pub poa: f64,
    pub regime: MismatchRegime,
}

/// Guarantee of the large-population design built for `delta_design` when
/// the realized uncertainty is `delta_true`.
pub fn mismatch_poa(delta_design: UncertaintyLevel, delta_true: UncertaintyLevel) -> MismatchReport {
    let amp = delta_design.amplification_factor();
    let ratio = delta_true.amplification_factor() / amp;
    let excess = 1.0 / (1.0 / amp).exp_m1();
    let (v, regime) = if delta_design <= delta_true {
        let u2 = optimal_design_limit(delta_design, 2).u[2];
        ((ratio - 1.0) * u2 + ratio * excess + 1.0, MismatchRegime::Underestimate)
    } else {
        (ratio * excess + 1.0, MismatchRegime::Overestimate)
    };
    MismatchReport {
        delta_design,
        delta_true,
        poa: 1.0 / v,
        regime,
    }
}

/// The worst-case game together with its designated allocations.
///
/// Every player has two actions: index 0 is its equilibrium action, index 1
/// its action in the welfare optimum.
#[derive(Debug, Clone)]
pub struct WorstCaseGame {
    pub game: GameInstance,
    pub equilibrium: Allocation,
    pub optimum: Allocation,
}

/// Sequences of `k` distinct players from `0..n` whose first entry is not
/// player 0, in lexicographic order.
fn labels(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn extend(n: usize, k: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == k {
            out.push(prefix.clone());
            return;
        }
        for p in 0..n {
            if (prefix.is_empty() && p == 0) || prefix.contains(&p) {
                continue;
            }
            prefix.push(p);
            extend(n, k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    extend(n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Number of resources of value `B^k` in the worst-case game, `k >= 1`.
pub fn worstcase_group_size(n: usize, k: usize) -> usize {
    (n - 1) * ((n - k + 1)..n).product::<usize>()
}

/// Worst-case `n`-player set covering game for uncertainty `delta`, played
/// under the optimal finite design.
///
/// Group `k` holds resources of true value `B^k` labelled by `k` distinct
/// players not starting with player 0. The last player in a label takes the
/// resource at the optimum; players absent from the label take it at the
/// equilibrium. The single group-0 resource is taken by everyone at the
/// equilibrium and by player 0 at the optimum. Valuations sit at the
/// extremes of the admissible interval.
pub fn build_worstcase_game(n: usize, delta: UncertaintyLevel) -> Result<WorstCaseGame> {
    if n < 2 {
        return Err(PoaError::InvalidArgument(format!("n must be at least 2, got {n}")));
    }
    if n > MAX_WORSTCASE_N {
        return Err(PoaError::SizeExceeded {
            n,
            max: MAX_WORSTCASE_N,
        });
    }
    let amp = delta.amplification_factor();
    let mut true_values = vec![1.0];
    let mut ne: Vec<Vec<usize>> = vec![vec![0]; n];
    let mut opt: Vec<Vec<usize>> = vec![Vec::new(); n];
    opt[0].push(0);
    for k in 1..=n {
        let value = amp.powi(k as i32);
        for label in labels(n, k) {
            let r = true_values.len();
            true_values.push(value);
            opt[*label.last().expect("labels are nonempty")].push(r);
            for (p, action) in ne.iter_mut().enumerate() {
                if !label.contains(&p) {
                    action.push(r);
                }
            }
        }
    }
    let (design, _) = optimal_design_finite(n, delta)?;
    let skeleton = GameSkeleton {
        true_values,
        actions: ne.into_iter().zip(opt).map(|(a, b)| vec![a, b]).collect(),
        basis: BasisPair::new(set_covering_welfare(n), design.u)?,
    };
    let equilibrium = Allocation::uniform(n, 0);
    let optimum = Allocation::uniform(n, 1);
    let game = extremal_valuations(&skeleton, &equilibrium, &optimum, delta)?;
    Ok(WorstCaseGame {
        game,
        equilibrium,
        optimum,
    })
}
