//! Price-of-anarchy analysis for resource allocation games whose players
//! hold bounded but mutually inconsistent estimates of resource values.
//!
//! * [`game`]: explicit finite games, welfare, utilities, equilibria.
//! * [`lp`]: a dense two-phase simplex solver.
//! * [`poa_lp`]: class PoA and optimal utility design as linear programs.
//! * [`setcover`]: closed forms and worst-case instances for set covering.
//! * [`oracle`]: brute-force cross-checks on tiny games.
//! * [`experiments`]: parameter sweeps used by the command-line tool.

pub mod error;
pub mod experiments;
pub mod game;
pub mod lp;
pub mod oracle;
pub mod poa_lp;
pub mod setcover;

pub use error::{PoaError, Result};
pub use game::{
    set_covering_welfare, Allocation, BasisPair, GameInstance, GameSkeleton, InstancePoa, UncertaintyLevel,
};
pub use lp::{lp_solve, LinearProgram, LpSolution, LpStatus};
pub use poa_lp::{
    build_design_lp, build_dual_lp, build_primal_lp, enumerate_triples, optimal_design, poa_class, poa_class_dual,
    Certificate, PoaMethod, PoaReport, Provenance, TripleIndex, UtilityDesign,
};
pub use setcover::{
    amplification, build_worstcase_game, mismatch_poa, optimal_design_finite, optimal_design_limit, optimal_poa_finite,
    optimal_poa_limit, setcover_poa, Amplification, MismatchRegime, MismatchReport, WorstCaseGame,
};
