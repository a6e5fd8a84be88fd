//! Reference implementations shared by integration tests.

#![allow(dead_code)]

use poa_core::{LinearProgram, LpStatus};
use rand::Rng;

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
#[allow(clippy::needless_range_loop)]
pub fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[p][col].abs() < 1e-9 {
            return None;
        }
        a.swap(col, p);
        b.swap(col, p);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    for k in col..n {
                        a[r][k] -= f * a[col][k];
                    }
                    b[r] -= f * b[col];
                }
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn combinations(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    go(0, n, k, &mut Vec::new(), f);
}

/// Best vertex of `lp` intersected with the box `x <= bound`, if any.
fn boxed_vertex_optimum(lp: &LinearProgram, bound: f64) -> Option<f64> {
    let n = lp.num_vars;
    // Every constraint as `row x >= rhs`.
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    for c in &lp.eq_constraints {
        rows.push((c.row.clone(), c.rhs));
        rows.push((c.row.iter().map(|v| -v).collect(), -c.rhs));
    }
    for c in &lp.ge_constraints {
        rows.push((c.row.clone(), c.rhs));
    }
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        rows.push((e.clone(), 0.0));
        e[i] = -1.0;
        rows.push((e, -bound));
    }
    let mut best: Option<f64> = None;
    combinations(rows.len(), n, &mut |idx| {
        let a = idx.iter().map(|&i| rows[i].0.clone()).collect();
        let b = idx.iter().map(|&i| rows[i].1).collect();
        let Some(x) = solve_square(a, b) else { return };
        let feasible = rows.iter().all(|(r, rhs)| {
            let lhs: f64 = r.iter().zip(&x).map(|(p, q)| p * q).sum();
            lhs >= rhs - 1e-7 * (1.0 + rhs.abs())
        });
        if feasible {
            let v = lp.objective_value(&x);
            best = Some(best.map_or(v, |b: f64| b.max(v)));
        }
    });
    best
}

/// Status and optimum of `lp` by brute-force vertex enumeration. Growth of
/// the optimum between two box sizes signals unboundedness.
pub fn vertex_oracle(lp: &LinearProgram) -> (LpStatus, f64) {
    let small = boxed_vertex_optimum(lp, 1e7);
    let large = boxed_vertex_optimum(lp, 2e7);
    match (small, large) {
        (None, _) | (_, None) => (LpStatus::Infeasible, f64::NEG_INFINITY),
        (Some(a), Some(b)) if b > a + 1e-3 * (1.0 + a.abs()) => (LpStatus::Unbounded, f64::INFINITY),
        (Some(a), _) => (LpStatus::Optimal, a),
    }
}

/// Random LP with small integer data: 2 to 4 variables, 1 to 5 rows.
pub fn random_small_lp<R: Rng>(rng: &mut R) -> LinearProgram {
    let n = rng.gen_range(2..=4);
    let objective = (0..n).map(|_| rng.gen_range(-5..=5) as f64).collect();
    let mut lp = LinearProgram::new(n).maximize(objective);
    for _ in 0..rng.gen_range(1..=5) {
        let row: Vec<f64> = (0..n).map(|_| rng.gen_range(-5..=5) as f64).collect();
        let rhs = rng.gen_range(-10..=10) as f64;
        match rng.gen_range(0..6) {
            0 => lp.add_eq(row, rhs),
            1 | 2 => lp.add_ge(row, rhs),
            _ => lp.add_le(row, rhs),
        }
    }
    lp
}
