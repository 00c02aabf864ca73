//! EFX allocations of indivisible goods via champion graphs.
//!
//! Every solver starts from the empty allocation and repeatedly moves to an
//! EFX allocation that lexicographically dominates the current one, recording
//! each move in a replayable [`Certificate`].

pub mod allocation;
pub mod certificate;
pub mod champion;
pub mod error;
pub mod fixtures;
pub mod generate;
pub mod instance;
pub mod items;
pub mod oracle;
pub mod solvers;
pub mod valuation;

pub use allocation::{
    charity_fix, dominates, most_envious, most_envious_among, pareto_dominates, Allocation, CharityFix, MostEnvious,
};
pub use certificate::{replay, Certificate, Construction, Step, StepKind};
pub use champion::{BasicGraph, ChampionEdge, EdgeKind, PiEdgeSet};
pub use error::{Error, Result};
pub use generate::{generate, ClassMix, GeneratorConfig};
pub use instance::{Instance, InstanceDocument};
pub use items::ItemSet;
pub use solvers::{solve, solve_from, Diagnostics, SolverKind, SolverOptions, SolverReport};
pub use valuation::{check_cancelable, check_cancelable_by, BundleKey, Valuation, ValuationDescriptor};
