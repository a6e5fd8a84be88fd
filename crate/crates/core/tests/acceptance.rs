//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use poa_core::experiments::{delta_grid, fig1, Fig1Config};
use poa_core::oracle::{best_response_dynamics, brute_force_class_poa, no_pne_example, SweepConfig};
use poa_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn d(v: f64) -> UncertaintyLevel {
    UncertaintyLevel::new(v).expect("valid uncertainty")
}

struct Outcome {
    failures: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Self { failures: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }
}

fn near(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn criterion_1(out: &mut Outcome) -> poa_core::Result<()> {
    let limit = optimal_poa_limit(d(0.0));
    out.check(
        near(limit, 1.0 - (-1.0f64).exp(), 1e-6) && near(limit, 0.632121, 1e-6),
        || format!("limit PoA {limit}"),
    );
    let chain: Vec<f64> = (2..=12)
        .map(|n| optimal_design_finite(n, d(0.0)).map(|(_, p)| p))
        .collect::<poa_core::Result<_>>()?;
    for (k, pair) in chain.windows(2).enumerate() {
        out.check(pair[1] < pair[0], || {
            format!("not decreasing at n={}: {} -> {}", k + 2, pair[0], pair[1])
        });
    }
    let last = chain[chain.len() - 1];
    out.check(near(last, limit, 5e-3), || format!("n=12 PoA {last} vs {limit}"));
    Ok(())
}

fn criterion_2(out: &mut Outcome) -> poa_core::Result<()> {
    for n in 2..=6 {
        for delta in [0.0, 0.2, 0.5, 0.8] {
            let (design, report) = optimal_design(&set_covering_welfare(n), d(delta))?;
            let (_, recursion) = optimal_design_finite(n, d(delta))?;
            let closed = setcover_poa(&design.u, d(delta), n)?;
            let lp = report.poa;
            let ok = near(lp, recursion, 1e-6) && near(lp, closed, 1e-6) && near(recursion, closed, 1e-6);
            out.check(ok, || {
                format!("n={n} delta={delta}: design LP {lp:.9}, recursion {recursion:.9}, closed form {closed:.9}")
            });
            if delta == 0.0 && (n == 2 || n == 3) {
                let exact = if n == 2 { 2.0 / 3.0 } else { 7.0 / 11.0 };
                for v in [lp, recursion, closed] {
                    out.check(near(v, exact, 1e-9), || format!("n={n} delta=0: {v} vs {exact}"));
                }
            }
        }
    }
    Ok(())
}

fn random_design<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut u = vec![0.0, 1.0];
    u.extend((2..=n).map(|_| rng.gen_range(0.0..2.0)));
    u
}

fn criterion_3(out: &mut Outcome) -> poa_core::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in 2..=4 {
        for delta in [0.0, 0.3, 0.5] {
            let wc = build_worstcase_game(n, d(delta))?;
            let formula = optimal_poa_finite(n, d(delta))?;
            let instance = wc.game.price_of_anarchy()?.ratio();
            out.check(instance.is_some_and(|p| near(p, formula, 1e-9)), || {
                format!("n={n} delta={delta}: instance {instance:?} vs formula {formula}")
            });
            out.check(wc.game.is_equilibrium(&wc.equilibrium), || {
                format!("n={n} delta={delta}: designated equilibrium fails under recursion design")
            });
            let (lp_design, _) = optimal_design(&set_covering_welfare(n), d(delta))?;
            let mut designs = vec![lp_design.u];
            designs.extend((0..20).map(|_| random_design(&mut rng, n)));
            for u in designs {
                let game = wc.game.with_basis(BasisPair::set_covering(u.clone())?)?;
                out.check(game.is_equilibrium(&wc.equilibrium), || {
                    format!("n={n} delta={delta}: designated equilibrium fails under u={u:?}")
                });
            }
        }
    }
    Ok(())
}

fn criterion_4(out: &mut Outcome) -> poa_core::Result<()> {
    let mut configs = 0;
    for n in 2..=6 {
        for delta in [0.0, 0.2, 0.5, 0.8] {
            let w = set_covering_welfare(n);
            let (optimal, _) = optimal_design(&w, d(delta))?;
            let harmonic: Vec<f64> = (0..=n).map(|j| if j == 0 { 0.0 } else { 1.0 / j as f64 }).collect();
            let mut greedy = vec![0.0; n + 1];
            greedy[1] = 1.0;
            for u in [optimal.u, harmonic, greedy] {
                configs += 1;
                let lp = poa_class(&BasisPair::set_covering(u.clone())?, d(delta))?.poa;
                let closed = setcover_poa(&u, d(delta), n)?;
                out.check(near(lp, closed, 1e-6), || {
                    format!("n={n} delta={delta} u={u:?}: LP {lp} vs closed form {closed}")
                });
            }
        }
    }
    out.check(configs == 60, || format!("{configs} configurations"));
    Ok(())
}

fn criterion_5(out: &mut Outcome) -> poa_core::Result<()> {
    for k in 1..=9 {
        let dt = k as f64 / 10.0;
        let m = mismatch_poa(d(dt), d(dt)).poa;
        let opt = optimal_poa_limit(d(dt));
        out.check(near(m, opt, 1e-12), || format!("diagonal {dt}: {m} vs {opt}"));
    }
    let under = mismatch_poa(d(0.0), d(0.5)).poa;
    out.check(near(under, 0.279175, 1e-5), || format!("design 0, true 0.5: {under}"));
    let over = mismatch_poa(d(0.5), d(0.0)).poa;
    out.check(near(over, 0.542720, 1e-5), || format!("design 0.5, true 0: {over}"));
    let grid = delta_grid(0.01);
    for &dt in &grid {
        let opt = optimal_poa_limit(d(dt));
        for &dd in &grid {
            let m = mismatch_poa(d(dd), d(dt)).poa;
            out.check(m <= opt + 1e-12, || {
                format!("design {dd}, true {dt}: {m} exceeds {opt}")
            });
        }
    }
    Ok(())
}

fn criterion_6(out: &mut Outcome) -> poa_core::Result<()> {
    let config = Fig1Config::default();
    let rows = fig1(&config)?;
    for w_id in 0..config.count {
        let best = rows
            .iter()
            .filter(|r| r.w_id == w_id)
            .fold(None::<(f64, f64)>, |acc, r| match acc {
                Some((_, p)) if p >= r.poa => acc,
                _ => Some((r.delta, r.poa)),
            });
        let argmax = best.map(|b| b.0);
        out.check(
            argmax.is_some_and(|a| (a - config.delta_true).abs() <= config.step + 1e-9),
            || format!("w_id={w_id}: argmax at {argmax:?}"),
        );
    }
    Ok(())
}

fn criterion_7(out: &mut Outcome) -> poa_core::Result<()> {
    for delta in [0.0, 0.5] {
        let basis = BasisPair::set_covering(vec![0.0, 1.0, 0.5])?;
        let class = poa_class(&basis, d(delta))?.poa;
        let sweep = brute_force_class_poa(&SweepConfig::new(3, basis, d(delta), vec![1.0, 3.0, 9.0]))?;
        out.check(sweep.worst_poa >= class - 1e-6, || {
            format!("delta={delta}: worst {} below class {class}", sweep.worst_poa)
        });
        out.check(sweep.witness.uncertainty() <= delta + 1e-12, || {
            format!("delta={delta}: witness too uncertain")
        });
        if delta == 0.0 {
            out.check(near(sweep.worst_poa, 2.0 / 3.0, 1e-6), || {
                format!("delta=0: worst {}", sweep.worst_poa)
            });
        }
    }
    Ok(())
}

fn criterion_8(out: &mut Outcome) -> poa_core::Result<()> {
    let game = no_pne_example(0.5)?;
    let eq = game.enumerate_equilibria()?;
    out.check(eq.is_empty(), || format!("equilibria found: {eq:?}"));
    for a in 0..2 {
        for b in 0..2 {
            let trace = best_response_dynamics(&game, Allocation::new(vec![a, b]), 4)?;
            let len = trace.cycle_length();
            out.check(!trace.reached_equilibrium && len.is_some_and(|l| l <= 4), || {
                format!("start ({a},{b}): cycle {len:?}")
            });
            out.check(trace.states.iter().all(|s| !game.is_equilibrium(s)), || {
                format!("start ({a},{b}): visited an equilibrium")
            });
        }
    }
    Ok(())
}

fn criterion_9(out: &mut Outcome) -> poa_core::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for k in 0..200 {
        let lp = common::random_small_lp(&mut rng);
        let sol = lp_solve(&lp)?;
        let (status, value) = common::vertex_oracle(&lp);
        let ok = sol.status == status && (status != LpStatus::Optimal || near(sol.value, value, 1e-6));
        out.check(ok, || {
            format!(
                "LP {k}: simplex {:?} {} vs oracle {status:?} {value}",
                sol.status, sol.value
            )
        });
        let again = serde_json::to_string(&lp_solve(&lp)?)?;
        out.check(again == serde_json::to_string(&sol)?, || {
            format!("LP {k}: repeated solve differs")
        });
    }
    let design = build_design_lp(&set_covering_welfare(6), d(0.5))?;
    let first = serde_json::to_string(&lp_solve(&design)?)?;
    let second = serde_json::to_string(&lp_solve(&design)?)?;
    out.check(first == second, || "design LP repeated solve differs".into());
    Ok(())
}

type Criterion = fn(&mut Outcome) -> poa_core::Result<()>;

fn main() -> ExitCode {
    let criteria: [(u32, &str, Duration, Criterion); 9] = [
        (
            1,
            "set covering optimal PoA, complete information",
            Duration::from_secs(1),
            criterion_1,
        ),
        (
            2,
            "design LP, recursion and closed form agree",
            Duration::from_secs(5),
            criterion_2,
        ),
        (3, "worst-case game is tight", Duration::from_secs(10), criterion_3),
        (4, "class LP matches closed form", Duration::from_secs(30), criterion_4),
        (5, "mismatch curve", Duration::from_secs(1), criterion_5),
        (
            6,
            "fig1 argmax at the realized uncertainty",
            Duration::from_secs(300),
            criterion_6,
        ),
        (
            7,
            "brute-force sweep bounds class PoA",
            Duration::from_secs(120),
            criterion_7,
        ),
        (8, "no-equilibrium witness", Duration::from_secs(1), criterion_8),
        (
            9,
            "simplex matches vertex enumeration",
            Duration::from_secs(10),
            criterion_9,
        ),
    ];
    let mut failed = 0;
    for (id, name, limit, run) in criteria {
        let mut out = Outcome::new();
        let start = Instant::now();
        let result = run(&mut out);
        let elapsed = start.elapsed();
        if let Err(e) = result {
            out.failures.push(format!("error: {e}"));
        }
        if elapsed > limit {
            out.failures.push(format!("took {elapsed:.2?}, limit {limit:?}"));
        }
        let verdict = if out.failures.is_empty() { "PASS" } else { "FAIL" };
        println!("criterion {id}: {verdict} ({name}, {elapsed:.2?})");
        for f in &out.failures {
            println!("    {f}");
        }
        if !out.failures.is_empty() {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
