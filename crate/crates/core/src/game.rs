//! Explicit resource allocation games.
//!
//! A game is a set of players, each picking one subset of resources from a
//! finite action set. Welfare is measured at the true resource values through
//! the welfare basis `w`, while each player evaluates its own utility through
//! the utility basis `u` and its private (possibly wrong) valuations.

use serde::{Deserialize, Serialize};

use crate::error::{PoaError, Result};

/// Absolute slack used when comparing utilities in the equilibrium test.
pub const EQUILIBRIUM_TOL: f64 = 1e-9;

/// Default cap on the number of joint allocations an enumeration may visit.
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 10_000_000;

/// Welfare and utility curves over coverage counts `0..=n`.
///
/// Both curves are normalized at construction so that `w[1] = u[1] = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisPair {
    w: Vec<f64>,
    u: Vec<f64>,
}

impl BasisPair {
    /// Builds a basis pair from full sequences indexed `0..=n`.
    ///
    /// `w` and `u` are rescaled by `w[1]` and `u[1]` respectively; both must be
    /// strictly positive.
    pub fn new(w: Vec<f64>, u: Vec<f64>) -> Result<Self> {
        if w.len() < 2 {
            return Err(PoaError::InvalidBasis(format!(
                "w must have at least 2 entries (n >= 1), got {}",
                w.len()
            )));
        }
        if w.len() != u.len() {
            return Err(PoaError::InvalidBasis(format!(
                "w and u lengths differ ({} vs {})",
                w.len(),
                u.len()
            )));
        }
        if let Some(bad) = w.iter().chain(u.iter()).find(|v| !v.is_finite()) {
            return Err(PoaError::InvalidBasis(format!("non-finite entry {bad}")));
        }
        if w[0] != 0.0 || u[0] != 0.0 {
            return Err(PoaError::InvalidBasis("w[0] and u[0] must be 0".into()));
        }
        if w[1] <= 0.0 {
            return Err(PoaError::InvalidBasis(format!("w[1] must be positive, got {}", w[1])));
        }
        if u[1] <= 0.0 {
            return Err(PoaError::InvalidBasis(format!("u[1] must be positive, got {}", u[1])));
        }
        let (ws, us) = (w[1], u[1]);
        let w: Vec<f64> = w.into_iter().map(|v| v / ws).collect();
        let u: Vec<f64> = u.into_iter().map(|v| v / us).collect();
        if let Some(k) = (1..w.len()).find(|&k| w[k] <= 0.0) {
            return Err(PoaError::InvalidBasis(format!("w[{k}] must be positive, got {}", w[k])));
        }
        Ok(Self { w, u })
    }

    /// Set covering welfare `w(k) = 1` for `k >= 1` paired with the given `u`.
    pub fn set_covering(u: Vec<f64>) -> Result<Self> {
        let n = u.len().saturating_sub(1);
        Self::new(set_covering_welfare(n), u)
    }

    /// Number of players the curves are defined for.
    pub fn n(&self) -> usize {
        self.w.len() - 1
    }

    /// `w(k)`, zero beyond `n`.
    pub fn w(&self, k: usize) -> f64 {
        self.w.get(k).copied().unwrap_or(0.0)
    }

    /// `u(k)`, zero beyond `n`.
    pub fn u(&self, k: usize) -> f64 {
        self.u.get(k).copied().unwrap_or(0.0)
    }

    pub fn welfare_curve(&self) -> &[f64] {
        &self.w
    }

    pub fn utility_curve(&self) -> &[f64] {
        &self.u
    }
}

/// `w_sc = (0, 1, 1, ..., 1)` of length `n + 1`.
pub fn set_covering_welfare(n: usize) -> Vec<f64> {
    let mut w = vec![1.0; n + 1];
    w[0] = 0.0;
    w
}

/// Bound `delta` on the relative error of any player's valuation.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct UncertaintyLevel(f64);

impl UncertaintyLevel {
    pub const ZERO: Self = Self(0.0);

    pub fn new(delta: f64) -> Result<Self> {
        if (0.0..1.0).contains(&delta) {
            Ok(Self(delta))
        } else {
            Err(PoaError::InvalidUncertainty(delta))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `(1 + delta) / (1 - delta)`.
    pub fn amplification_factor(self) -> f64 {
        (1.0 + self.0) / (1.0 - self.0)
    }
}

impl TryFrom<f64> for UncertaintyLevel {
    type Error = PoaError;

    fn try_from(delta: f64) -> Result<Self> {
        Self::new(delta)
    }
}

impl From<UncertaintyLevel> for f64 {
    fn from(d: UncertaintyLevel) -> f64 {
        d.0
    }
}

/// One action index per player.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Allocation(pub Vec<usize>);

impl Allocation {
    pub fn new(choices: Vec<usize>) -> Self {
        Self(choices)
    }

    pub fn uniform(n: usize, choice: usize) -> Self {
        Self(vec![choice; n])
    }

    pub fn choices(&self) -> &[usize] {
        &self.0
    }

    /// Same allocation with player `i` switched to `choice`.
    pub fn with_choice(&self, i: usize, choice: usize) -> Self {
        let mut next = self.0.clone();
        next[i] = choice;
        Self(next)
    }
}

/// A game without player valuations: players, resources, actions and basis.
#[derive(Debug, Clone, PartialEq)]
pub struct GameSkeleton {
    pub true_values: Vec<f64>,
    pub actions: Vec<Vec<Vec<usize>>>,
    pub basis: BasisPair,
}

impl GameSkeleton {
    pub fn num_players(&self) -> usize {
        self.actions.len()
    }

    pub fn num_resources(&self) -> usize {
        self.true_values.len()
    }

    pub fn with_valuations(self, valuations: Vec<Vec<f64>>) -> Result<GameInstance> {
        GameInstance::new(self.true_values, self.actions, valuations, self.basis)
    }
}

/// A fully specified finite game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GameDocument", into = "GameDocument")]
pub struct GameInstance {
    true_values: Vec<f64>,
    actions: Vec<Vec<Vec<usize>>>,
    valuations: Vec<Vec<f64>>,
    basis: BasisPair,
}

/// Outcome of [`GameInstance::price_of_anarchy`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InstancePoa {
    Ratio(f64),
    NoEquilibrium,
}

impl InstancePoa {
    pub fn ratio(self) -> Option<f64> {
        match self {
            Self::Ratio(r) => Some(r),
            Self::NoEquilibrium => None,
        }
    }
}

impl GameInstance {
    /// Validates and builds a game. Action subsets are sorted and deduplicated.
    pub fn new(
        true_values: Vec<f64>,
        mut actions: Vec<Vec<Vec<usize>>>,
        valuations: Vec<Vec<f64>>,
        basis: BasisPair,
    ) -> Result<Self> {
        let n = actions.len();
        let m = true_values.len();
        if n == 0 {
            return Err(PoaError::InvalidGame("game needs at least one player".into()));
        }
        if basis.n() != n {
            return Err(PoaError::InvalidGame(format!(
                "basis is defined for {} players but the game has {n}",
                basis.n()
            )));
        }
        if let Some(r) = true_values.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(PoaError::InvalidGame(format!(
                "true value of resource {r} must be positive and finite"
            )));
        }
        if valuations.len() != n {
            return Err(PoaError::InvalidGame(format!(
                "expected valuations for {n} players, got {}",
                valuations.len()
            )));
        }
        for (i, row) in valuations.iter().enumerate() {
            if row.len() != m {
                return Err(PoaError::InvalidGame(format!(
                    "player {i} has {} valuations for {m} resources",
                    row.len()
                )));
            }
            if let Some(r) = row.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
                return Err(PoaError::InvalidGame(format!(
                    "valuation of player {i} for resource {r} must be positive and finite"
                )));
            }
        }
        for (i, set) in actions.iter_mut().enumerate() {
            if set.is_empty() {
                return Err(PoaError::InvalidGame(format!("player {i} has no actions")));
            }
            for action in set.iter_mut() {
                action.sort_unstable();
                action.dedup();
                if let Some(&r) = action.last().filter(|&&r| r >= m) {
                    return Err(PoaError::InvalidGame(format!(
                        "player {i} references resource {r} but only {m} exist"
                    )));
                }
            }
        }
        Ok(Self {
            true_values,
            actions,
            valuations,
            basis,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn num_players(&self) -> usize {
        self.actions.len()
    }

    pub fn num_resources(&self) -> usize {
        self.true_values.len()
    }

    pub fn true_values(&self) -> &[f64] {
        &self.true_values
    }

    pub fn valuations(&self) -> &[Vec<f64>] {
        &self.valuations
    }

    pub fn action_sets(&self) -> &[Vec<Vec<usize>>] {
        &self.actions
    }

    pub fn basis(&self) -> &BasisPair {
        &self.basis
    }

    pub fn skeleton(&self) -> GameSkeleton {
        GameSkeleton {
            true_values: self.true_values.clone(),
            actions: self.actions.clone(),
            basis: self.basis.clone(),
        }
    }

    /// Same game played under a different basis pair.
    pub fn with_basis(&self, basis: BasisPair) -> Result<Self> {
        Self::new(
            self.true_values.clone(),
            self.actions.clone(),
            self.valuations.clone(),
            basis,
        )
    }

    /// Checks that `alloc` picks an existing action for every player.
    pub fn validate(&self, alloc: &Allocation) -> Result<()> {
        if alloc.0.len() != self.num_players() {
            return Err(PoaError::InvalidAllocation(format!(
                "allocation has {} choices for {} players",
                alloc.0.len(),
                self.num_players()
            )));
        }
        for (i, (&c, set)) in alloc.0.iter().zip(&self.actions).enumerate() {
            if c >= set.len() {
                return Err(PoaError::InvalidAllocation(format!(
                    "player {i} picks action {c} but has only {}",
                    set.len()
                )));
            }
        }
        Ok(())
    }

    fn action(&self, i: usize, alloc: &Allocation) -> &[usize] {
        &self.actions[i][alloc.0[i]]
    }

    /// `|a|_r` for every resource.
    pub fn coverage(&self, alloc: &Allocation) -> Vec<usize> {
        let mut counts = vec![0; self.num_resources()];
        for i in 0..self.num_players() {
            for &r in self.action(i, alloc) {
                counts[r] += 1;
            }
        }
        counts
    }

    pub fn coverage_count(&self, alloc: &Allocation, r: usize) -> usize {
        (0..self.num_players())
            .filter(|&i| self.action(i, alloc).binary_search(&r).is_ok())
            .count()
    }

    /// System welfare at true values.
    pub fn welfare(&self, alloc: &Allocation) -> f64 {
        self.welfare_from_coverage(&self.coverage(alloc))
    }

    fn welfare_from_coverage(&self, coverage: &[usize]) -> f64 {
        coverage
            .iter()
            .zip(&self.true_values)
            .map(|(&k, &y)| y * self.basis.w(k))
            .sum()
    }

    /// Utility of player `i` under its own valuations.
    pub fn utility(&self, i: usize, alloc: &Allocation) -> f64 {
        let coverage = self.coverage(alloc);
        self.utility_from_coverage(i, self.action(i, alloc), &coverage)
    }

    fn utility_from_coverage(&self, i: usize, action: &[usize], coverage: &[usize]) -> f64 {
        let vals = &self.valuations[i];
        action.iter().map(|&r| vals[r] * self.basis.u(coverage[r])).sum()
    }

    /// Utility player `i` would get by switching to `alt` while everyone else stays.
    fn deviation_utility(&self, i: usize, current: &[usize], alt: &[usize], coverage: &[usize]) -> f64 {
        let vals = &self.valuations[i];
        alt.iter()
            .map(|&r| {
                let others = coverage[r] - usize::from(current.binary_search(&r).is_ok());
                vals[r] * self.basis.u(others + 1)
            })
            .sum()
    }

    /// Largest relative deviation of any valuation from the true value.
    pub fn uncertainty(&self) -> f64 {
        self.valuations
            .iter()
            .flat_map(|row| row.iter().zip(&self.true_values).map(|(&y, &t)| (y - t).abs() / t))
            .fold(0.0, f64::max)
    }

    /// Best unilateral reply of player `i`. The current action is kept when it
    /// is within tolerance of the best; otherwise the lowest maximizing index wins.
    pub fn best_response(&self, i: usize, alloc: &Allocation) -> (usize, f64) {
        let coverage = self.coverage(alloc);
        let current = self.action(i, alloc);
        let values: Vec<f64> = self.actions[i]
            .iter()
            .map(|alt| self.deviation_utility(i, current, alt, &coverage))
            .collect();
        let top = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let now = alloc.0[i];
        if values[now] >= top - EQUILIBRIUM_TOL {
            return (now, values[now]);
        }
        let c = values.iter().position(|&v| v >= top - EQUILIBRIUM_TOL).unwrap_or(now);
        (c, values[c])
    }

    /// Pure Nash test with absolute tolerance [`EQUILIBRIUM_TOL`].
    pub fn is_equilibrium(&self, alloc: &Allocation) -> bool {
        let coverage = self.coverage(alloc);
        self.is_equilibrium_with(alloc, &coverage)
    }

    fn is_equilibrium_with(&self, alloc: &Allocation, coverage: &[usize]) -> bool {
        (0..self.num_players()).all(|i| {
            let current = self.action(i, alloc);
            let now = self.utility_from_coverage(i, current, coverage);
            self.actions[i]
                .iter()
                .enumerate()
                .filter(|&(c, _)| c != alloc.0[i])
                .all(|(_, alt)| now >= self.deviation_utility(i, current, alt, coverage) - EQUILIBRIUM_TOL)
        })
    }

    /// Number of joint allocations, or `None` on overflow.
    pub fn joint_action_count(&self) -> Option<u128> {
        self.actions
            .iter()
            .try_fold(1u128, |acc, set| acc.checked_mul(set.len() as u128))
    }

    fn check_budget(&self, budget: u64) -> Result<()> {
        match self.joint_action_count() {
            Some(c) if c <= u128::from(budget) => Ok(()),
            other => Err(PoaError::BudgetExceeded {
                required: other.unwrap_or(u128::MAX),
                budget,
            }),
        }
    }

    /// Visits every joint allocation in lexicographic order of choice indices.
    fn for_each_allocation(&self, mut visit: impl FnMut(&Allocation)) {
        let sizes: Vec<usize> = self.actions.iter().map(Vec::len).collect();
        let mut alloc = Allocation::uniform(sizes.len(), 0);
        loop {
            visit(&alloc);
            let mut i = sizes.len();
            loop {
                if i == 0 {
                    return;
                }
                i -= 1;
                alloc.0[i] += 1;
                if alloc.0[i] < sizes[i] {
                    break;
                }
                alloc.0[i] = 0;
            }
        }
    }

    pub fn enumerate_equilibria(&self) -> Result<Vec<Allocation>> {
        self.enumerate_equilibria_with_budget(DEFAULT_ENUMERATION_BUDGET)
    }

    pub fn enumerate_equilibria_with_budget(&self, budget: u64) -> Result<Vec<Allocation>> {
        self.check_budget(budget)?;
        let mut found = Vec::new();
        self.for_each_allocation(|a| {
            if self.is_equilibrium(a) {
                found.push(a.clone());
            }
        });
        Ok(found)
    }

    pub fn price_of_anarchy(&self) -> Result<InstancePoa> {
        self.price_of_anarchy_with_budget(DEFAULT_ENUMERATION_BUDGET)
    }

    /// Worst equilibrium welfare over optimal welfare, both at true values.
    ///
    /// An optimum of zero welfare gives a ratio of 1.
    pub fn price_of_anarchy_with_budget(&self, budget: u64) -> Result<InstancePoa> {
        self.check_budget(budget)?;
        let mut best = 0.0_f64;
        let mut worst_eq: Option<f64> = None;
        self.for_each_allocation(|a| {
            let coverage = self.coverage(a);
            let welfare = self.welfare_from_coverage(&coverage);
            best = best.max(welfare);
            if self.is_equilibrium_with(a, &coverage) {
                worst_eq = Some(worst_eq.map_or(welfare, |w| w.min(welfare)));
            }
        });
        Ok(match worst_eq {
            None => InstancePoa::NoEquilibrium,
            Some(_) if best <= 0.0 => InstancePoa::Ratio(1.0),
            Some(w) => InstancePoa::Ratio(w / best),
        })
    }
}

/// JSON interchange layout of a game.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GameDocument {
    pub n: usize,
    pub resources: Vec<ResourceEntry>,
    pub actions: Vec<Vec<Vec<usize>>>,
    pub valuations: Vec<Vec<f64>>,
    pub w: Vec<f64>,
    pub u: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResourceEntry {
    pub value: f64,
}

impl TryFrom<GameDocument> for GameInstance {
    type Error = PoaError;

    fn try_from(doc: GameDocument) -> Result<Self> {
        if doc.n != doc.actions.len() {
            return Err(PoaError::InvalidGame(format!(
                "n = {} but {} action sets given",
                doc.n,
                doc.actions.len()
            )));
        }
        let basis = BasisPair::new(doc.w, doc.u)?;
        GameInstance::new(
            doc.resources.into_iter().map(|r| r.value).collect(),
            doc.actions,
            doc.valuations,
            basis,
        )
    }
}

impl From<GameInstance> for GameDocument {
    fn from(game: GameInstance) -> Self {
        GameDocument {
            n: game.num_players(),
            resources: game.true_values.iter().map(|&value| ResourceEntry { value }).collect(),
            actions: game.actions,
            valuations: game.valuations,
            w: game.basis.w,
            u: game.basis.u,
        }
    }
}
