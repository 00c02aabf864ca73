//! Runtime checks of the structural observations about champion graphs.

use std::ops::AddAssign;

use serde::{Deserialize, Serialize};

use crate::allocation::Allocation;
use crate::instance::Instance;

use super::discovery::{discover_bottom_edges, CycleContext, Discovery};
use super::edge::EdgeKind;
use super::graph::{BasicGraph, Decomposition};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub checks: u64,
    pub violations: u64,
}

impl Tally {
    fn record(&mut self, ok: bool) {
        self.checks += 1;
        if !ok {
            self.violations += 1;
        }
    }
}

impl AddAssign for Tally {
    fn add_assign(&mut self, rhs: Tally) {
        self.checks += rhs.checks;
        self.violations += rhs.violations;
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditCounts {
    pub graphs: u64,
    pub g_notin_bottom: Tally,
    pub exists_champion: Tally,
    pub non_champion_doesnt_envy_top_half: Tally,
    pub top_half_order: Tally,
    pub bottom_bundle_ineq: Tally,
    pub no_single_external_source: Tally,
    pub discovery_failures: u64,
}

impl AuditCounts {
    pub fn named(&self) -> [(&'static str, Tally); 6] {
        [
            ("g_notin_bottom", self.g_notin_bottom),
            ("exists-champion", self.exists_champion),
            (
                "non-champion-doesnt-envy-top-half",
                self.non_champion_doesnt_envy_top_half,
            ),
            ("T_k<T_j", self.top_half_order),
            ("bottom_bundle_ineq", self.bottom_bundle_ineq),
            ("no_single_external_source", self.no_single_external_source),
        ]
    }

    pub fn total_violations(&self) -> u64 {
        self.named().iter().map(|(_, t)| t.violations).sum::<u64>() + self.discovery_failures
    }
}

impl AddAssign for AuditCounts {
    fn add_assign(&mut self, rhs: AuditCounts) {
        self.graphs += rhs.graphs;
        self.g_notin_bottom += rhs.g_notin_bottom;
        self.exists_champion += rhs.exists_champion;
        self.non_champion_doesnt_envy_top_half += rhs.non_champion_doesnt_envy_top_half;
        self.top_half_order += rhs.top_half_order;
        self.bottom_bundle_ineq += rhs.bottom_bundle_ineq;
        self.no_single_external_source += rhs.no_single_external_source;
        self.discovery_failures += rhs.discovery_failures;
    }
}

/// Runs every observation check on one basic graph of an EFX allocation.
pub fn audit_graph(instance: &Instance, alloc: &Allocation, graph: &BasicGraph) -> AuditCounts {
    let mut counts = AuditCounts {
        graphs: 1,
        ..AuditCounts::default()
    };
    let n = graph.agents;
    for e in graph.basic_edges() {
        let EdgeKind::Basic { good } = e.kind else { continue };
        if !graph.envies(e.source, e.target) {
            counts.g_notin_bottom.record(!e.discard.contains(good));
        }
    }
    for &g in &graph.goods {
        for j in 0..n {
            counts.exists_champion.record(graph.champions(g, j) != 0);
        }
        let decompositions: Vec<Decomposition> = (0..n)
            .flat_map(|j| (0..n).filter_map(move |i| graph.decomposition(g, i, j)))
            .collect();
        for d in &decompositions {
            let champions = graph.champions(g, d.target);
            for i in 0..n {
                if champions >> i & 1 == 0 {
                    let offered = d.top.with(g);
                    counts
                        .non_champion_doesnt_envy_top_half
                        .record(instance.valuation(i).less(offered, alloc.bundles[i]));
                }
            }
        }
        for dj in &decompositions {
            let i = dj.decomposer;
            for dk in &decompositions {
                if dk.target == dj.target || graph.is_champion(g, i, dk.target) {
                    continue;
                }
                counts.top_half_order.record(instance.valuation(i).less(dk.top, dj.top));
            }
        }
        for cycle in graph.good_cycles(g) {
            let Some(ctx) = CycleContext::new(graph, g, &cycle) else {
                counts.discovery_failures += 1;
                continue;
            };
            let mut outcomes = Vec::new();
            for &owner in &cycle {
                let (found, met) = discover_bottom_edges(instance, alloc, &ctx, owner);
                for e in &met {
                    if !graph.envies(e.source, e.target) {
                        counts.bottom_bundle_ineq.record(
                            instance
                                .valuation(e.source)
                                .less(ctx.bottom[e.target], ctx.bottom[owner]),
                        );
                    }
                }
                if found == Discovery::Failed {
                    counts.discovery_failures += 1;
                }
                outcomes.push(found);
            }
            let sources: Vec<usize> = outcomes
                .iter()
                .filter_map(|d| match d {
                    Discovery::External(e) => Some(e.source),
                    _ => None,
                })
                .collect();
            let single_source = sources.len() == outcomes.len()
                && sources.windows(2).all(|w| w[0] == w[1])
                && cycle.iter().all(|&c| !graph.envies(sources[0], c));
            counts.no_single_external_source.record(!single_source);
        }
    }
    counts
}
