mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use poa_core::experiments::{fig1, fig2, Fig1Config, DEFAULT_SEED};
use poa_core::oracle::{brute_force_class_poa, no_pne_example, SweepConfig, SweepSummary, ValuationSearch};
use poa_core::setcover::optimal_design_limit;
use poa_core::*;
use serde::{Deserialize, Serialize};

use output::{write_text, Format, Sink};

#[derive(Parser)]
#[command(
    name = "poa",
    version,
    about = "Price of anarchy and utility design under valuation uncertainty"
)]
struct Cli {
    /// Seed for sampled experiments.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Write the main output here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Tolerance for the cross-checks some commands run.
    #[arg(long, global = true, default_value_t = 1e-6)]
    tol: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Class PoA of a basis pair from the linear program.
    Poa(PoaArgs),
    /// Optimal utility design for a welfare curve.
    Design(DesignArgs),
    /// Closed forms for set covering games.
    #[command(subcommand)]
    Setcover(SetcoverCommand),
    /// Write the worst-case set covering game and compare its PoA to the formula.
    Worstcase {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
    },
    /// Brute-force checks on tiny games.
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// PoA at a realized uncertainty of designs optimized for each grid level.
    Fig1 {
        #[arg(long, default_value_t = 30)]
        count: usize,
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 0.3)]
        delta_true: f64,
        #[arg(long, default_value_t = 0.05)]
        step: f64,
    },
    /// Large-population mismatch curves.
    Fig2 {
        #[arg(long, value_delimiter = ',', default_values_t = [0.2, 0.3, 0.4])]
        delta_true: Vec<f64>,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
    },
}

#[derive(Args)]
struct BasisArgs {
    /// Use the set covering welfare curve w(k) = 1.
    #[arg(long, conflicts_with_all = ["w", "basis"])]
    set_cover: bool,
    /// Welfare values w(1), ..., w(n).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    w: Option<Vec<f64>>,
    /// Utility values u(1), ..., u(n).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "basis")]
    u: Option<Vec<f64>>,
    /// JSON file with full curves `{"w": [0, 1, ...], "u": [0, 1, ...]}`.
    #[arg(long)]
    basis: Option<PathBuf>,
    /// Number of players; must match the curve lengths when given.
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Deserialize)]
struct BasisFile {
    w: Vec<f64>,
    u: Vec<f64>,
}

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    PoaError::InvalidArgument(msg.into()).into()
}

fn with_zero(values: &[f64]) -> Vec<f64> {
    std::iter::once(0.0).chain(values.iter().copied()).collect()
}

impl BasisArgs {
    fn resolve(&self) -> Result<BasisPair> {
        let (w, u) = if let Some(path) = &self.basis {
            let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
            let file: BasisFile = serde_json::from_str(&text).map_err(PoaError::from)?;
            (file.w, file.u)
        } else {
            let u = self.u.as_deref().ok_or_else(|| invalid("--u or --basis is required"))?;
            let w = match (&self.w, self.set_cover) {
                (Some(w), false) => with_zero(w),
                (None, true) => set_covering_welfare(u.len()),
                _ => return Err(invalid("give exactly one of --w and --set-cover")),
            };
            (w, with_zero(u))
        };
        let basis = BasisPair::new(w, u)?;
        if let Some(n) = self.n {
            if n != basis.n() {
                return Err(invalid(format!(
                    "--n {n} does not match curves of length {}",
                    basis.n()
                )));
            }
        }
        Ok(basis)
    }
}

#[derive(Args)]
struct PoaArgs {
    #[command(flatten)]
    basis: BasisArgs,
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    /// Solve the dual program instead of the primal.
    #[arg(long)]
    dual: bool,
    /// Solve both programs and fail if they differ by more than --tol.
    #[arg(long, conflicts_with = "dual")]
    verify: bool,
}

#[derive(Args)]
struct DesignArgs {
    /// Welfare values w(1), ..., w(n).
    #[arg(long, value_delimiter = ',', required_unless_present = "set_cover")]
    w: Option<Vec<f64>>,
    #[arg(long, requires = "n", conflicts_with = "w")]
    set_cover: bool,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
}

#[derive(Subcommand)]
enum SetcoverCommand {
    /// Closed-form class PoA of a set covering utility.
    Poa {
        /// Utility values u(1), ..., u(n).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        u: Vec<f64>,
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Finite-n recursion design, or the large-population design with --limit.
    Design {
        #[arg(long, required_unless_present = "limit")]
        n: Option<usize>,
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
        /// Tabulate the large-population design up to this many players.
        #[arg(long, conflicts_with = "n")]
        limit: Option<usize>,
    },
    /// Guarantee of the large-population design under a different realized uncertainty.
    Mismatch {
        #[arg(long, value_delimiter = ',', required = true)]
        delta_design: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        delta_true: Vec<f64>,
    },
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Exhaustive sweep over small games; one summary row per uncertainty level.
    Sweep {
        #[command(flatten)]
        basis: BasisArgs,
        /// Number of resources.
        #[arg(long)]
        m: usize,
        #[arg(long, value_delimiter = ',', default_value = "0")]
        delta: Vec<f64>,
        /// Candidate resource values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        /// Search valuations on a grid with this many levels instead of the extremes.
        #[arg(long)]
        grid_levels: Option<usize>,
        #[arg(long)]
        budget: Option<u64>,
        /// Write the witness of the last swept level here.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Two-player game without a pure equilibrium.
    NoPne {
        #[arg(long, default_value_t = 0.5)]
        d: f64,
    },
}

#[derive(Serialize)]
struct PoaRow {
    poa: f64,
    method: PoaMethod,
}

#[derive(Serialize)]
struct DesignOutput<'a> {
    design: &'a UtilityDesign,
    poa: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<&'a PoaReport>,
}

#[derive(Serialize)]
struct CurveRow {
    j: usize,
    u: f64,
}

#[derive(Serialize)]
struct MismatchRow {
    delta_design: f64,
    delta_true: f64,
    poa: f64,
    regime: &'static str,
}

#[derive(Serialize)]
struct TightnessRow {
    instance_poa: f64,
    formula: f64,
}

fn level(delta: f64) -> Result<UncertaintyLevel> {
    Ok(UncertaintyLevel::new(delta)?)
}

fn curve_rows(u: &[f64]) -> Vec<CurveRow> {
    u.iter().enumerate().skip(1).map(|(j, &u)| CurveRow { j, u }).collect()
}

struct Ctx {
    out: Option<PathBuf>,
    format: Option<Format>,
}

impl Ctx {
    fn sink(&self, default: Format) -> Sink {
        Sink::new(self.out.clone(), self.format.unwrap_or(default))
    }
}

fn run(cli: Cli) -> Result<()> {
    let ctx = Ctx {
        out: cli.out.clone(),
        format: cli.format,
    };
    match cli.command {
        Command::Poa(args) => {
            let basis = args.basis.resolve()?;
            let delta = level(args.delta)?;
            let report = if args.dual {
                poa_class_dual(&basis, delta)?
            } else {
                poa_class(&basis, delta)?
            };
            if args.verify {
                let dual = poa_class_dual(&basis, delta)?;
                if (dual.poa - report.poa).abs() > cli.tol {
                    return Err(PoaError::NumericalFailure(format!(
                        "primal {} and dual {} disagree",
                        report.poa, dual.poa
                    ))
                    .into());
                }
            }
            let row = PoaRow {
                poa: report.poa,
                method: report.method,
            };
            ctx.sink(Format::Json).emit(&report, &[row])
        }
        Command::Design(args) => {
            let w = match (&args.w, args.n) {
                (Some(w), n) => {
                    if n.is_some_and(|n| n != w.len()) {
                        return Err(invalid("--n does not match the length of --w"));
                    }
                    with_zero(w)
                }
                (None, Some(n)) => set_covering_welfare(n),
                (None, None) => return Err(invalid("--w or --set-cover --n is required")),
            };
            let (design, report) = optimal_design(&w, level(args.delta)?)?;
            let out = DesignOutput {
                design: &design,
                poa: report.poa,
                report: Some(&report),
            };
            ctx.sink(Format::Json).emit(&out, &curve_rows(&design.u))
        }
        Command::Setcover(cmd) => setcover(cmd, &ctx),
        Command::Worstcase { n, delta } => {
            let path = cli
                .out
                .as_ref()
                .ok_or_else(|| invalid("worstcase needs --out for the game file"))?;
            let delta = level(delta)?;
            let wc = build_worstcase_game(n, delta)?;
            let formula = optimal_poa_finite(n, delta)?;
            write_text(path, &wc.game.to_json()?)?;
            let instance = wc
                .game
                .price_of_anarchy()?
                .ratio()
                .ok_or_else(|| PoaError::NumericalFailure("worst-case game has no equilibrium".into()))?;
            if (instance - formula).abs() > cli.tol {
                eprintln!("warning: instance PoA {instance} differs from formula {formula}");
            }
            let row = TightnessRow {
                instance_poa: instance,
                formula,
            };
            Sink::new(None, cli.format.unwrap_or(Format::Csv)).emit(&row, &[&row])
        }
        Command::Oracle(cmd) => oracle(cmd, &ctx),
        Command::Fig1 {
            count,
            n,
            delta_true,
            step,
        } => {
            if !(step > 0.0 && step < 1.0) {
                return Err(invalid(format!("--step must lie in (0, 1), got {step}")));
            }
            let config = Fig1Config {
                seed: cli.seed,
                count,
                n,
                delta_true,
                step,
            };
            ctx.sink(Format::Csv).rows(&fig1(&config)?)
        }
        Command::Fig2 { delta_true, step } => {
            if !(step > 0.0 && step < 1.0) {
                return Err(invalid(format!("--step must lie in (0, 1), got {step}")));
            }
            ctx.sink(Format::Csv).rows(&fig2(&delta_true, step)?)
        }
    }
}

fn setcover(cmd: SetcoverCommand, ctx: &Ctx) -> Result<()> {
    match cmd {
        SetcoverCommand::Poa { u, delta, n } => {
            let n = n.unwrap_or(u.len());
            if n != u.len() {
                return Err(invalid(format!("--n {n} does not match {} utility values", u.len())));
            }
            let u = with_zero(&u);
            let basis = BasisPair::set_covering(u.clone())?;
            let poa = setcover_poa(basis.utility_curve(), level(delta)?, n)?;
            let report = PoaReport {
                poa,
                method: PoaMethod::ClosedForm,
                certificate: Certificate::ClosedForm {
                    formula: "max_j {B(j+1)u(j+1), Bju(j+1)+1, Bju(j)-u(j+1)+1}".into(),
                },
            };
            let row = PoaRow {
                poa,
                method: report.method,
            };
            ctx.sink(Format::Json).emit(&report, &[row])
        }
        SetcoverCommand::Design { n, delta, limit } => {
            let delta = level(delta)?;
            let (design, poa) = match (n, limit) {
                (Some(n), _) => optimal_design_finite(n, delta)?,
                (None, Some(j)) => {
                    if j < 1 {
                        return Err(invalid("--limit must be at least 1"));
                    }
                    (optimal_design_limit(delta, j), optimal_poa_limit(delta))
                }
                (None, None) => return Err(invalid("--n or --limit is required")),
            };
            let out = DesignOutput {
                design: &design,
                poa,
                report: None,
            };
            ctx.sink(Format::Json).emit(&out, &curve_rows(&design.u))
        }
        SetcoverCommand::Mismatch {
            delta_design,
            delta_true,
        } => {
            let mut rows = Vec::with_capacity(delta_design.len() * delta_true.len());
            for &dd in &delta_design {
                for &dt in &delta_true {
                    let r = mismatch_poa(level(dd)?, level(dt)?);
                    rows.push(MismatchRow {
                        delta_design: dd,
                        delta_true: dt,
                        poa: r.poa,
                        regime: r.regime.as_str(),
                    });
                }
            }
            ctx.sink(Format::Csv).rows(&rows)
        }
    }
}

fn oracle(cmd: OracleCommand, ctx: &Ctx) -> Result<()> {
    match cmd {
        OracleCommand::Sweep {
            basis,
            m,
            delta,
            values,
            grid_levels,
            budget,
            witness,
        } => {
            let basis = basis.resolve()?;
            let mut rows = Vec::with_capacity(delta.len());
            let mut last = None;
            for &dv in &delta {
                let d = level(dv)?;
                let mut config = SweepConfig::new(m, basis.clone(), d, values.clone());
                if let Some(levels) = grid_levels {
                    config.search = ValuationSearch::Grid { levels };
                }
                if let Some(b) = budget {
                    config.budget = b;
                }
                let result = brute_force_class_poa(&config)?;
                let class = poa_class(&basis, d)?.poa;
                let label = format!(
                    "n={} m={m} delta={dv} values={} u={}",
                    basis.n(),
                    join(&values),
                    join(&basis.utility_curve()[1..]),
                );
                rows.push(SweepSummary::new(label, result.worst_poa, class));
                last = Some(result.witness);
            }
            if let (Some(path), Some(game)) = (witness, last) {
                write_text(&path, &game.to_json()?)?;
            }
            ctx.sink(Format::Csv).rows(&rows)
        }
        OracleCommand::NoPne { d } => {
            let game = no_pne_example(d)?;
            match &ctx.out {
                Some(p) => write_text(p, &game.to_json()?),
                None => {
                    println!("{}", game.to_json()?);
                    Ok(())
                }
            }
        }
    }
}

fn join(values: &[f64]) -> String {
    values.iter().map(f64::to_string).collect::<Vec<_>>().join("|")
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<PoaError>() {
        Some(PoaError::NumericalFailure(_)) => 3,
        Some(_) => 2,
        None => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
