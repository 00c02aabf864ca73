//! The champion multigraph of an allocation.

pub mod audit;
pub mod discovery;
pub mod dot;
pub mod edge;
pub mod graph;
pub mod pi;

pub use audit::{audit_graph, AuditCounts, Tally};
pub use discovery::{bottom_edges, candidate_edges, discover_bottom_edges, CycleContext, Discovery, Stage};
pub use dot::to_dot;
pub use edge::{generalized_edge, ChampionEdge, EdgeKind};
pub use graph::{champion_set, BasicGraph, ChampionSet, Decomposition};
pub use pi::{apply_pi, check_pi_conditions, find_pi_edge_set, PiEdgeSet, PiLimits, PiOutcome};
