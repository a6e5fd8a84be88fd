//! Brute-force checks that do not go through the linear programs: exhaustive
//! sweeps over tiny games, extremal valuation assignment and a game without
//! pure equilibria.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{PoaError, Result};
use crate::game::{Allocation, BasisPair, GameInstance, GameSkeleton, InstancePoa, UncertaintyLevel};

/// Assigns each player the valuations that make deviating from `ne` to `opt`
/// least attractive: `(1+delta) y` on resources only in its equilibrium action,
/// `(1-delta) y` on resources only in its optimal action, `y` elsewhere.
pub fn extremal_valuations(
    skeleton: &GameSkeleton,
    ne: &Allocation,
    opt: &Allocation,
    delta: UncertaintyLevel,
) -> Result<GameInstance> {
    let n = skeleton.num_players();
    for alloc in [ne, opt] {
        if alloc.0.len() != n || alloc.0.iter().zip(&skeleton.actions).any(|(&c, s)| c >= s.len()) {
            return Err(PoaError::InvalidAllocation(format!(
                "{:?} does not fit the game",
                alloc.0
            )));
        }
    }
    let d = delta.value();
    let mut valuations = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = skeleton.true_values.clone();
        let a_ne = &skeleton.actions[i][ne.0[i]];
        let a_opt = &skeleton.actions[i][opt.0[i]];
        for &r in a_ne {
            if !a_opt.contains(&r) {
                row[r] *= 1.0 + d;
            }
        }
        for &r in a_opt {
            if !a_ne.contains(&r) {
                row[r] *= 1.0 - d;
            }
        }
        valuations.push(row);
    }
    skeleton.clone().with_valuations(valuations)
}

/// How player valuations are chosen for each swept game.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ValuationSearch {
    /// Extremal assignment relative to the designated pair of actions.
    Extremal,
    /// Every combination of `levels` evenly spaced multipliers in
    /// `[1 - delta, 1 + delta]` per player and resource.
    Grid { levels: usize },
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub m: usize,
    pub basis: BasisPair,
    pub delta: UncertaintyLevel,
    pub value_grid: Vec<f64>,
    pub search: ValuationSearch,
    /// Maximum number of games to build.
    pub budget: u64,
}

impl SweepConfig {
    pub fn new(m: usize, basis: BasisPair, delta: UncertaintyLevel, value_grid: Vec<f64>) -> Self {
        Self {
            m,
            basis,
            delta,
            value_grid,
            search: ValuationSearch::Extremal,
            budget: 50_000_000,
        }
    }

    pub fn n(&self) -> usize {
        self.basis.n()
    }
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub worst_poa: f64,
    pub witness: GameInstance,
    /// Games that possessed an equilibrium and entered the minimum.
    pub games_checked: u64,
}

pub const MAX_SWEEP_PLAYERS: usize = 3;
pub const MAX_SWEEP_RESOURCES: usize = 4;

fn subset(mask: usize, m: usize) -> Vec<usize> {
    (0..m).filter(|r| mask >> r & 1 == 1).collect()
}

/// Total number of games a sweep would visit, or `None` on overflow.
pub fn sweep_size(config: &SweepConfig) -> Option<u128> {
    let n = config.n() as u32;
    let m = config.m as u32;
    let pairs = 1u128.checked_shl(2 * m)?;
    let skeletons = pairs.checked_pow(n)?;
    let values = (config.value_grid.len() as u128).checked_pow(m)?;
    let valuations = match config.search {
        ValuationSearch::Extremal => 1,
        ValuationSearch::Grid { levels } => (levels as u128).checked_pow(n * m)?,
    };
    skeletons.checked_mul(values)?.checked_mul(valuations)
}

struct Candidate {
    poa: f64,
    key: String,
    game: GameInstance,
}

impl Candidate {
    fn new(poa: f64, game: GameInstance) -> Result<Self> {
        Ok(Self {
            poa,
            key: game.to_json()?,
            game,
        })
    }

    fn better(self, other: Self) -> Self {
        match self.poa.partial_cmp(&other.poa).unwrap_or(Ordering::Equal) {
            Ordering::Less => self,
            Ordering::Greater => other,
            Ordering::Equal if self.key <= other.key => self,
            Ordering::Equal => other,
        }
    }
}

fn merge(a: Option<Candidate>, b: Option<Candidate>) -> Option<Candidate> {
    match (a, b) {
        (Some(a), Some(b)) => Some(a.better(b)),
        (a, b) => a.or(b),
    }
}

/// Exhaustive search for the worst instance PoA over games with `n <= 3`
/// players, `m <= 4` resources, two actions per player drawn from all
/// resource subsets, and true values from `value_grid`.
///
/// Ties on the minimum are broken by the lexicographically smallest JSON
/// serialization of the witness, so the result does not depend on thread
/// scheduling.
pub fn brute_force_class_poa(config: &SweepConfig) -> Result<SweepResult> {
    let n = config.n();
    let m = config.m;
    if n > MAX_SWEEP_PLAYERS || m > MAX_SWEEP_RESOURCES || m == 0 {
        return Err(PoaError::SizeExceeded {
            n: n.max(m),
            max: MAX_SWEEP_PLAYERS.min(MAX_SWEEP_RESOURCES),
        });
    }
    if config.value_grid.is_empty() || config.value_grid.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(PoaError::InvalidArgument("value grid must hold positive reals".into()));
    }
    if let ValuationSearch::Grid { levels } = config.search {
        if levels < 2 {
            return Err(PoaError::InvalidArgument(
                "valuation grid needs at least 2 levels".into(),
            ));
        }
    }
    let required = sweep_size(config).unwrap_or(u128::MAX);
    if required > u128::from(config.budget) {
        return Err(PoaError::BudgetExceeded {
            required,
            budget: config.budget,
        });
    }

    let pair_count = 1usize << (2 * m);
    let skeleton_count = pair_count.pow(n as u32);
    let value_count = config.value_grid.len().pow(m as u32);

    let outcome = (0..skeleton_count)
        .into_par_iter()
        .map(|code| -> Result<(Option<Candidate>, u64)> {
            let mut actions = Vec::with_capacity(n);
            let mut rest = code;
            for _ in 0..n {
                let pair = rest % pair_count;
                rest /= pair_count;
                let ne_mask = pair % (1 << m);
                let opt_mask = pair >> m;
                actions.push(vec![subset(ne_mask, m), subset(opt_mask, m)]);
            }
            let mut best = None;
            let mut checked = 0;
            for vcode in 0..value_count {
                let mut rest = vcode;
                let true_values = (0..m)
                    .map(|_| {
                        let v = config.value_grid[rest % config.value_grid.len()];
                        rest /= config.value_grid.len();
                        v
                    })
                    .collect();
                let skeleton = GameSkeleton {
                    true_values,
                    actions: actions.clone(),
                    basis: config.basis.clone(),
                };
                let (cand, c) = sweep_skeleton(&skeleton, config)?;
                checked += c;
                best = merge(best, cand);
            }
            Ok((best, checked))
        })
        .try_reduce(|| (None, 0), |(a, ca), (b, cb)| Ok((merge(a, b), ca + cb)))?;

    match outcome {
        (Some(best), games_checked) => Ok(SweepResult {
            worst_poa: best.poa,
            witness: best.game,
            games_checked,
        }),
        (None, _) => Err(PoaError::EmptySweep),
    }
}

fn sweep_skeleton(skeleton: &GameSkeleton, config: &SweepConfig) -> Result<(Option<Candidate>, u64)> {
    let n = skeleton.num_players();
    let ne = Allocation::uniform(n, 0);
    let opt = Allocation::uniform(n, 1);
    match config.search {
        ValuationSearch::Extremal => {
            let game = extremal_valuations(skeleton, &ne, &opt, config.delta)?;
            if !game.is_equilibrium(&ne) {
                return Ok((None, 0));
            }
            match game.price_of_anarchy()? {
                InstancePoa::Ratio(poa) => Ok((Some(Candidate::new(poa, game)?), 1)),
                InstancePoa::NoEquilibrium => Ok((None, 0)),
            }
        }
        ValuationSearch::Grid { levels } => {
            let d = config.delta.value();
            let multipliers: Vec<f64> = (0..levels)
                .map(|k| 1.0 - d + 2.0 * d * k as f64 / (levels - 1) as f64)
                .collect();
            let m = skeleton.num_resources();
            let cells = n * m;
            let total = levels.pow(cells as u32);
            let mut best = None;
            let mut checked = 0;
            for code in 0..total {
                let mut rest = code;
                let valuations = (0..n)
                    .map(|_| {
                        (0..m)
                            .map(|r| {
                                let f = multipliers[rest % levels];
                                rest /= levels;
                                skeleton.true_values[r] * f
                            })
                            .collect()
                    })
                    .collect();
                let game = skeleton.clone().with_valuations(valuations)?;
                if let InstancePoa::Ratio(poa) = game.price_of_anarchy()? {
                    checked += 1;
                    if best.as_ref().is_none_or(|b: &Candidate| poa <= b.poa) {
                        best = merge(best, Some(Candidate::new(poa, game)?));
                    }
                }
            }
            Ok((best, checked))
        }
    }
}

/// One row of a sweep summary CSV (`config,worst_poa,class_poa,gap`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub config: String,
    pub worst_poa: f64,
    pub class_poa: f64,
    pub gap: f64,
}

impl SweepSummary {
    pub fn new(config: String, worst_poa: f64, class_poa: f64) -> Self {
        Self {
            config,
            worst_poa,
            class_poa,
            gap: worst_poa - class_poa,
        }
    }
}

/// Two players, four unit-value resources, `u = (0, 1, 0)` and mirrored
/// valuations; best responses cycle and no pure equilibrium exists.
pub fn no_pne_example(d: f64) -> Result<GameInstance> {
    if !(d > 0.0 && d < 1.0) {
        return Err(PoaError::InvalidArgument(format!("d must lie in (0, 1), got {d}")));
    }
    let hi = 1.0 + d;
    let lo = 1.0 - d;
    GameInstance::new(
        vec![1.0; 4],
        vec![vec![vec![0, 1], vec![2, 3]], vec![vec![0, 3], vec![1, 2]]],
        vec![vec![hi, lo, hi, lo], vec![lo, hi, lo, hi]],
        BasisPair::set_covering(vec![0.0, 1.0, 0.0])?,
    )
}

/// States visited by sequential best-response dynamics.
#[derive(Debug, Clone, PartialEq)]
pub struct BestResponseTrace {
    pub states: Vec<Allocation>,
    /// Index into `states` of the first repeated state, if a cycle closed.
    pub cycle_start: Option<usize>,
    pub reached_equilibrium: bool,
}

impl BestResponseTrace {
    /// Number of moves between the two visits of the repeated state.
    pub fn cycle_length(&self) -> Option<usize> {
        self.cycle_start.map(|s| self.states.len() - 1 - s)
    }
}

/// Lets the lowest-indexed player with a profitable deviation switch to its
/// best response, until an equilibrium, a repeated state or `max_steps`.
pub fn best_response_dynamics(game: &GameInstance, start: Allocation, max_steps: usize) -> Result<BestResponseTrace> {
    game.validate(&start)?;
    let mut states = vec![start];
    for _ in 0..max_steps {
        let current = states.last().expect("nonempty").clone();
        let mover = (0..game.num_players())
            .map(|i| (i, game.best_response(i, &current).0))
            .find(|&(i, c)| c != current.0[i]);
        let Some((i, c)) = mover else {
            return Ok(BestResponseTrace {
                states,
                cycle_start: None,
                reached_equilibrium: true,
            });
        };
        let next = current.with_choice(i, c);
        let seen = states.iter().position(|s| *s == next);
        states.push(next);
        if let Some(s) = seen {
            return Ok(BestResponseTrace {
                states,
                cycle_start: Some(s),
                reached_equilibrium: false,
            });
        }
    }
    Ok(BestResponseTrace {
        states,
        cycle_start: None,
        reached_equilibrium: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(v: f64) -> UncertaintyLevel {
        UncertaintyLevel::new(v).unwrap()
    }

    fn skeleton(true_values: Vec<f64>, actions: Vec<Vec<Vec<usize>>>) -> GameSkeleton {
        let n = actions.len();
        let mut u = vec![0.0, 1.0];
        u.resize(n + 1, 0.5);
        GameSkeleton {
            true_values,
            actions,
            basis: BasisPair::set_covering(u).unwrap(),
        }
    }

    #[test]
    fn extremal_assignment() {
        let sk = skeleton(vec![2.0, 1.0, 4.0], vec![vec![vec![0, 2], vec![1, 2]]]);
        let ne = Allocation::new(vec![0]);
        let opt = Allocation::new(vec![1]);
        let g = extremal_valuations(&sk, &ne, &opt, d(0.0)).unwrap();
        assert_eq!(g.valuations()[0], vec![2.0, 1.0, 4.0]);
        let g = extremal_valuations(&sk, &ne, &opt, d(0.5)).unwrap();
        assert_eq!(g.valuations()[0], vec![3.0, 0.5, 4.0]);
        assert!(extremal_valuations(&sk, &Allocation::new(vec![2]), &opt, d(0.5)).is_err());
    }

    #[test]
    fn single_resource_sweep() {
        let config = SweepConfig::new(
            1,
            BasisPair::set_covering(vec![0.0, 1.0, 0.5]).unwrap(),
            d(0.0),
            vec![1.0],
        );
        let res = brute_force_class_poa(&config).unwrap();
        assert_eq!(res.worst_poa, 1.0);
    }

    #[test]
    fn sweep_guards() {
        let basis = BasisPair::set_covering(vec![0.0, 1.0, 0.5]).unwrap();
        let mut config = SweepConfig::new(5, basis.clone(), d(0.0), vec![1.0]);
        assert!(matches!(
            brute_force_class_poa(&config),
            Err(PoaError::SizeExceeded { .. })
        ));
        config.m = 3;
        config.budget = 10;
        assert!(matches!(
            brute_force_class_poa(&config),
            Err(PoaError::BudgetExceeded { .. })
        ));
        let config = SweepConfig::new(2, basis, d(0.0), vec![0.0]);
        assert!(brute_force_class_poa(&config).is_err());
    }

    #[test]
    fn grid_search_small() {
        // Full-interval valuations find nothing worse than the class bound.
        let basis = BasisPair::set_covering(vec![0.0, 1.0, 0.5]).unwrap();
        let mut config = SweepConfig::new(2, basis, d(0.5), vec![1.0, 3.0]);
        config.search = ValuationSearch::Grid { levels: 3 };
        let res = brute_force_class_poa(&config).unwrap();
        assert!(res.worst_poa >= 1.0 / 3.0 - 1e-6);
        assert!(res.witness.uncertainty() <= 0.5 + 1e-12);
    }

    #[test]
    fn no_pne() {
        let g = no_pne_example(0.5).unwrap();
        assert!(g.enumerate_equilibria().unwrap().is_empty());
        assert_eq!(g.uncertainty(), 0.5);
        for a in 0..2 {
            for b in 0..2 {
                assert!(!g.is_equilibrium(&Allocation::new(vec![a, b])));
            }
        }
        assert!(no_pne_example(0.0).is_err());
        assert!(no_pne_example(1.0).is_err());
    }

    #[test]
    fn best_response_cycle() {
        let g = no_pne_example(0.5).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                let t = best_response_dynamics(&g, Allocation::new(vec![a, b]), 10).unwrap();
                assert!(!t.reached_equilibrium);
                let len = t.cycle_length().unwrap();
                assert!(len <= 4, "cycle of length {len}");
                assert!(t.states.iter().all(|s| !g.is_equilibrium(s)));
            }
        }
    }

    #[test]
    fn dynamics_stop_at_equilibrium() {
        let sk = skeleton(vec![1.0, 1.0], vec![vec![vec![0], vec![1]]; 2]);
        let n = 2;
        let g = sk.with_valuations(vec![vec![1.0, 1.0]; n]).unwrap();
        let t = best_response_dynamics(&g, Allocation::new(vec![0, 0]), 10).unwrap();
        assert!(t.reached_equilibrium);
        assert!(g.is_equilibrium(t.states.last().unwrap()));
    }
}
