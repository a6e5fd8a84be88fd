//! Parameter sweeps behind the command-line figures.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::game::UncertaintyLevel;
use crate::poa_lp::{optimal_design, poa_class};
use crate::setcover::mismatch_poa;

pub const DEFAULT_SEED: u64 = 0x5eed;

/// Uncertainty levels `0, step, 2 step, ...` strictly below 1.
pub fn delta_grid(step: f64) -> Vec<f64> {
    let count = (1.0 / step).round() as usize;
    (0..count)
        .map(|k| k as f64 * step)
        .filter(|&d| d < 1.0 - 1e-12)
        .map(|d| (d * 1e9).round() / 1e9)
        .collect()
}

/// Random concave nondecreasing welfare curve with `w(0) = 0`, `w(1) = 1`.
///
/// Draws `n` increments from `(0, 1]`, sorts them in decreasing order and
/// accumulates them, dividing by the first.
pub fn sample_concave_welfare<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut inc: Vec<f64> = (0..n).map(|_| 1.0 - rng.gen::<f64>()).collect();
    inc.sort_by(|a, b| b.total_cmp(a));
    let lead = inc[0];
    let mut w = Vec::with_capacity(n + 1);
    w.push(0.0);
    let mut acc = 0.0;
    for v in inc {
        acc += v / lead;
        w.push(acc);
    }
    w[1] = 1.0;
    w
}

#[derive(Debug, Clone)]
pub struct Fig1Config {
    pub seed: u64,
    pub count: usize,
    pub n: usize,
    pub delta_true: f64,
    pub step: f64,
}

impl Default for Fig1Config {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            count: 30,
            n: 10,
            delta_true: 0.3,
            step: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fig1Row {
    pub w_id: usize,
    pub delta: f64,
    pub poa: f64,
}

/// Welfare curves used by [`fig1`] for a given configuration.
pub fn fig1_welfare_curves(config: &Fig1Config) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    (0..config.count)
        .map(|_| sample_concave_welfare(&mut rng, config.n))
        .collect()
}

/// For each sampled `w` and each design level on the grid, the PoA that the
/// optimal design for that level achieves at `delta_true`.
pub fn fig1(config: &Fig1Config) -> Result<Vec<Fig1Row>> {
    let curves = fig1_welfare_curves(config);
    fig1_for_curves(&curves, config.delta_true, config.step)
}

pub fn fig1_for_curves(curves: &[Vec<f64>], delta_true: f64, step: f64) -> Result<Vec<Fig1Row>> {
    let realized = UncertaintyLevel::new(delta_true)?;
    let grid = delta_grid(step);
    let cells: Vec<(usize, f64)> = (0..curves.len())
        .flat_map(|w_id| grid.iter().map(move |&d| (w_id, d)))
        .collect();
    cells
        .into_par_iter()
        .map(|(w_id, delta)| {
            let w = &curves[w_id];
            let (design, _) = optimal_design(w, UncertaintyLevel::new(delta)?)?;
            let report = poa_class(&design.basis(w)?, realized)?;
            Ok(Fig1Row {
                w_id,
                delta,
                poa: report.poa,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fig2Row {
    pub delta_true: f64,
    pub delta_design: f64,
    pub poa: f64,
}

/// Mismatch curves for each realized uncertainty over the design grid.
pub fn fig2(delta_true_list: &[f64], step: f64) -> Result<Vec<Fig2Row>> {
    let grid = delta_grid(step);
    let mut rows = Vec::with_capacity(grid.len() * delta_true_list.len());
    for &dt in delta_true_list {
        let realized = UncertaintyLevel::new(dt)?;
        for &dd in &grid {
            let report = mismatch_poa(UncertaintyLevel::new(dd)?, realized);
            rows.push(Fig2Row {
                delta_true: dt,
                delta_design: dd,
                poa: report.poa,
            });
        }
    }
    Ok(rows)
}
