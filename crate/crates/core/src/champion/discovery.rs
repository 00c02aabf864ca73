//! Bottom-half-bundle edges along good cycles and the candidate edge families
//! fed to the PI search.

use std::collections::BTreeSet;

use crate::allocation::Allocation;
use crate::instance::Instance;
use crate::items::ItemSet;

use super::edge::{ChampionEdge, EdgeKind};
use super::graph::{champion_set, BasicGraph};

/// A good g-cycle together with the decomposition of each member by its
/// predecessor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleContext {
    pub good: usize,
    pub cycle: Vec<usize>,
    /// Indexed by agent; meaningful only for members.
    pub succ: Vec<usize>,
    pub top: Vec<ItemSet>,
    pub bottom: Vec<ItemSet>,
    pub members: u64,
}

impl CycleContext {
    pub fn new(graph: &BasicGraph, good: usize, cycle: &[usize]) -> Option<Self> {
        let n = graph.agents;
        let mut ctx = CycleContext {
            good,
            cycle: cycle.to_vec(),
            succ: vec![usize::MAX; n],
            top: vec![ItemSet::EMPTY; n],
            bottom: vec![ItemSet::EMPTY; n],
            members: 0,
        };
        for (pos, &a) in cycle.iter().enumerate() {
            let next = cycle[(pos + 1) % cycle.len()];
            ctx.succ[a] = next;
            ctx.members |= 1 << a;
            let d = graph.decomposition(good, a, next)?;
            ctx.top[next] = d.top;
            ctx.bottom[next] = d.bottom;
        }
        Some(ctx)
    }

    pub fn contains(&self, agent: usize) -> bool {
        self.members >> agent & 1 == 1
    }

    pub fn pred(&self, agent: usize) -> usize {
        let pos = self.cycle.iter().position(|&a| a == agent).expect("member");
        self.cycle[(pos + self.cycle.len() - 1) % self.cycle.len()]
    }

    /// `owner` lies on the path from `from` to `to` following successors,
    /// both ends included.
    pub fn on_path(&self, from: usize, to: usize, owner: usize) -> bool {
        let mut node = from;
        for _ in 0..=self.cycle.len() {
            if node == owner {
                return true;
            }
            if node == to {
                return false;
            }
            node = self.succ[node];
        }
        false
    }

    /// The `(B_owner | B_target)` edge family offered set.
    pub fn offered(&self, owner: usize, target: usize) -> ItemSet {
        self.top[target] | self.bottom[owner]
    }

    fn bottom_edge(&self, owner: usize, target: usize, champion: &crate::allocation::MostEnvious) -> ChampionEdge {
        ChampionEdge::from_champion(
            target,
            self.bottom[owner],
            self.bottom[target],
            EdgeKind::Generalized,
            champion,
        )
    }

    /// Good: source on the cycle with `owner` on the path target → source.
    pub fn is_good_edge(&self, owner: usize, edge: &ChampionEdge) -> bool {
        self.contains(edge.source) && self.on_path(edge.target, edge.source, owner)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Discovery {
    Good(ChampionEdge),
    External(ChampionEdge),
    /// Neither kind was found; contradicts the good-edge-or-external theorem.
    Failed,
}

impl Discovery {
    pub fn edge(&self) -> Option<&ChampionEdge> {
        match self {
            Discovery::Good(e) | Discovery::External(e) => Some(e),
            Discovery::Failed => None,
        }
    }
}

/// Follows the start/step chain for `B_owner` until it reaches a good or an
/// external edge. Returns the outcome and every edge met on the way.
pub fn discover_bottom_edges(
    instance: &Instance,
    alloc: &Allocation,
    ctx: &CycleContext,
    owner: usize,
) -> (Discovery, Vec<ChampionEdge>) {
    let mut seen_targets = 0u64;
    let mut met = Vec::new();
    let mut external: Option<ChampionEdge> = None;
    let mut target = ctx.succ[owner];
    loop {
        if seen_targets >> target & 1 == 1 {
            return (external.map_or(Discovery::Failed, Discovery::External), met);
        }
        seen_targets |= 1 << target;
        let set = champion_set(instance, alloc, ctx.offered(owner, target));
        let edges: Vec<ChampionEdge> = set
            .champions
            .iter()
            .map(|c| ctx.bottom_edge(owner, target, c))
            .collect();
        met.extend(edges.iter().copied());
        if let Some(good) = edges.iter().find(|e| ctx.is_good_edge(owner, e)) {
            return (Discovery::Good(*good), met);
        }
        if external.is_none() {
            external = edges.iter().find(|e| !ctx.contains(e.source)).copied();
        }
        match edges.iter().find(|e| ctx.contains(e.source)) {
            Some(internal) => target = ctx.succ[internal.source],
            None => return (external.map_or(Discovery::Failed, Discovery::External), met),
        }
    }
}

/// Which candidate families to include.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    /// Envy edges and basic g-edges.
    Basic = 1,
    /// g-edges into a target whose bundle lost another good's discard.
    NestedDiscard = 2,
    /// Bottom-half-bundle edges along good cycles.
    Bottom = 3,
    /// Edges adding one good released by a basic edge's discard.
    Released = 4,
}

/// Candidate edges up to and including `stage`, sorted and deduplicated.
pub fn candidate_edges(instance: &Instance, alloc: &Allocation, graph: &BasicGraph, stage: Stage) -> Vec<ChampionEdge> {
    let mut out: BTreeSet<ChampionEdge> = graph.edges().into_iter().collect();
    let basic = graph.basic_edges();
    let n = graph.agents;
    if stage >= Stage::NestedDiscard {
        for e in &basic {
            let EdgeKind::Basic { good: h } = e.kind else { continue };
            let reduced = alloc.bundles[e.target] - e.discard;
            if reduced == alloc.bundles[e.target] {
                continue;
            }
            for &g in &graph.goods {
                if g == h {
                    continue;
                }
                let full = alloc.bundles[e.target].with(g);
                let set = champion_set(instance, alloc, reduced.with(g));
                for c in &set.champions {
                    out.insert(ChampionEdge {
                        source: c.agent,
                        target: e.target,
                        kind: EdgeKind::Basic { good: g },
                        added: ItemSet::singleton(g),
                        removed: ItemSet::EMPTY,
                        discard: full - c.envied,
                    });
                }
            }
        }
    }
    if stage >= Stage::Bottom {
        for &g in &graph.goods {
            for cycle in graph.good_cycles(g) {
                let Some(ctx) = CycleContext::new(graph, g, &cycle) else {
                    continue;
                };
                out.extend(bottom_edges(instance, alloc, &ctx));
            }
        }
    }
    if stage >= Stage::Released {
        for e in &basic {
            for b in e.discard.intersection(!alloc.unallocated) {
                for k in 0..n {
                    if k == e.target || alloc.bundles[k].contains(b) {
                        continue;
                    }
                    let added = ItemSet::singleton(b);
                    let set = champion_set(instance, alloc, alloc.bundles[k] | added);
                    for c in &set.champions {
                        out.insert(ChampionEdge::from_champion(
                            k,
                            added,
                            ItemSet::EMPTY,
                            EdgeKind::Generalized,
                            c,
                        ));
                    }
                }
            }
        }
    }
    out.into_iter().collect()
}

/// Every `(B_j | B_t)` champion edge for ordered pairs of distinct members.
pub fn bottom_edges(instance: &Instance, alloc: &Allocation, ctx: &CycleContext) -> Vec<ChampionEdge> {
    let mut edges = Vec::new();
    for &owner in &ctx.cycle {
        if ctx.bottom[owner].is_empty() {
            continue;
        }
        for &target in &ctx.cycle {
            if target == owner {
                continue;
            }
            let set = champion_set(instance, alloc, ctx.offered(owner, target));
            edges.extend(set.champions.iter().map(|c| ctx.bottom_edge(owner, target, c)));
        }
    }
    edges
}
