//! Pareto-improvable edge sets: search and application.

use serde::{Deserialize, Serialize};

use crate::allocation::{pareto_dominates, Allocation};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::items::ItemSet;

use super::edge::ChampionEdge;

/// Vertex-disjoint cycles of champion edges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PiEdgeSet {
    pub edges: Vec<ChampionEdge>,
}

/// Checks the PI conditions of `edges` against `alloc` without applying them:
/// valid edges, every member is the source and the target of exactly one
/// edge, added sets pairwise disjoint, and each added set either unallocated
/// or released by another member edge.
pub fn check_pi_conditions(instance: &Instance, alloc: &Allocation, edges: &[ChampionEdge]) -> Result<()> {
    if edges.is_empty() {
        return Err(Error::Argument("empty edge set".into()));
    }
    let mut sources = 0u64;
    let mut targets = 0u64;
    let mut added = ItemSet::EMPTY;
    for e in edges {
        e.validate(instance, alloc)?;
        if sources >> e.source & 1 == 1 || targets >> e.target & 1 == 1 {
            return Err(Error::Invariant("edge set is not vertex-disjoint".into()));
        }
        sources |= 1 << e.source;
        targets |= 1 << e.target;
        if !added.is_disjoint(e.added) {
            return Err(Error::Invariant("added sets overlap".into()));
        }
        added = added | e.added;
    }
    if sources != targets {
        return Err(Error::Invariant("edges do not form cycles".into()));
    }
    for (i, e) in edges.iter().enumerate() {
        if !released(alloc, edges, i) {
            return Err(Error::Invariant(format!(
                "added set of edge {e} is neither unallocated nor released"
            )));
        }
    }
    Ok(())
}

fn released(alloc: &Allocation, edges: &[ChampionEdge], index: usize) -> bool {
    let h = edges[index].added;
    h.is_subset(alloc.unallocated)
        || edges
            .iter()
            .enumerate()
            .any(|(l, e)| l != index && h.is_subset(e.removed | e.discard))
}

/// Gives every source what its edge offers minus the discard; leftovers join
/// the pool. The result is verified: EFX, Pareto-dominating, and every cycle
/// agent strictly better off.
pub fn apply_pi(instance: &Instance, alloc: &Allocation, edges: &[ChampionEdge]) -> Result<Allocation> {
    check_pi_conditions(instance, alloc, edges)?;
    let mut bundles = alloc.bundles.clone();
    for e in edges {
        bundles[e.source] = e.received(alloc);
    }
    let mut seen = ItemSet::EMPTY;
    for &b in &bundles {
        if !seen.is_disjoint(b) {
            return Err(Error::Invariant("new bundles overlap".into()));
        }
        seen = seen | b;
    }
    let next = Allocation {
        unallocated: instance.all_items() - seen,
        bundles,
    };
    for e in edges {
        if !instance
            .valuation(e.source)
            .less(alloc.bundles[e.source], next.bundles[e.source])
        {
            return Err(Error::Invariant(format!("agent {} does not improve", e.source)));
        }
    }
    if !next.is_efx(instance) {
        return Err(Error::Invariant("result is not EFX".into()));
    }
    if !pareto_dominates(instance, &next, alloc) {
        return Err(Error::Invariant("result does not Pareto-dominate".into()));
    }
    Ok(next)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PiLimits {
    pub max_cycles: usize,
    pub node_budget: usize,
}

impl Default for PiLimits {
    fn default() -> Self {
        PiLimits {
            max_cycles: 3,
            node_budget: 200_000,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct PiOutcome {
    pub found: Option<(PiEdgeSet, Allocation)>,
    /// Edge sets that met the structural conditions but failed verification.
    pub apply_failures: usize,
    pub budget_exhausted: bool,
}

/// Searches `candidates` for a PI edge set whose result satisfies `accept`.
///
/// Sets are tried by increasing total length; within a length, cycles start
/// at their smallest agent, in increasing order of start, following edges in
/// sorted order.
pub fn find_pi_edge_set(
    instance: &Instance,
    alloc: &Allocation,
    candidates: &[ChampionEdge],
    limits: PiLimits,
    accept: &dyn Fn(&Allocation) -> bool,
) -> PiOutcome {
    let n = alloc.agents();
    let mut sorted = candidates.to_vec();
    sorted.sort();
    sorted.dedup();
    let mut by_source: Vec<Vec<ChampionEdge>> = vec![Vec::new(); n];
    for e in sorted {
        by_source[e.source].push(e);
    }
    // Shortest hop distance between agents over candidate edges.
    let mut dist = vec![vec![usize::MAX / 4; n]; n];
    for (s, list) in by_source.iter().enumerate() {
        for e in list {
            dist[s][e.target] = 1;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = dist[i][k] + dist[k][j];
                if via < dist[i][j] {
                    dist[i][j] = via;
                }
            }
        }
    }
    let mut search = Search {
        instance,
        alloc,
        by_source: &by_source,
        dist: &dist,
        limits,
        accept,
        nodes: 0,
        stack: Vec::new(),
        outcome: PiOutcome::default(),
        length: 0,
    };
    for length in 1..=n {
        search.length = length;
        if search.start_cycle(0, 0, ItemSet::EMPTY, 0) {
            break;
        }
        if search.outcome.budget_exhausted {
            break;
        }
    }
    search.outcome
}

struct Search<'a> {
    instance: &'a Instance,
    alloc: &'a Allocation,
    by_source: &'a [Vec<ChampionEdge>],
    dist: &'a [Vec<usize>],
    limits: PiLimits,
    accept: &'a dyn Fn(&Allocation) -> bool,
    nodes: usize,
    stack: Vec<ChampionEdge>,
    outcome: PiOutcome,
    length: usize,
}

impl<'a> Search<'a> {
    fn tick(&mut self) -> bool {
        self.nodes += 1;
        if self.nodes > self.limits.node_budget {
            self.outcome.budget_exhausted = true;
            return false;
        }
        true
    }

    /// Opens a new cycle at some agent `>= min_start`.
    fn start_cycle(&mut self, min_start: usize, used: u64, added: ItemSet, cycles: usize) -> bool {
        if cycles >= self.limits.max_cycles {
            return false;
        }
        let n = self.alloc.agents();
        for start in min_start..n {
            if used >> start & 1 == 1 {
                continue;
            }
            if self.extend(start, start, used | 1 << start, added, cycles) {
                return true;
            }
            if self.outcome.budget_exhausted {
                return false;
            }
        }
        false
    }

    fn extend(&mut self, start: usize, at: usize, used: u64, added: ItemSet, cycles: usize) -> bool {
        if !self.tick() {
            return false;
        }
        let remaining = self.length - self.stack.len();
        if remaining == 0 {
            return false;
        }
        for idx in 0..self.by_source[at].len() {
            let e = self.by_source[at][idx];
            if !added.is_disjoint(e.added) {
                continue;
            }
            let closes = e.target == start;
            if !closes {
                if e.target < start || used >> e.target & 1 == 1 {
                    continue;
                }
                if self.dist[e.target][start] > remaining - 1 {
                    continue;
                }
            }
            self.stack.push(e);
            let added = added | e.added;
            let done = if closes {
                if self.stack.len() == self.length {
                    self.finish()
                } else {
                    self.start_cycle(start + 1, used, added, cycles + 1)
                }
            } else {
                self.extend(start, e.target, used | 1 << e.target, added, cycles)
            };
            if done {
                return true;
            }
            self.stack.pop();
            if self.outcome.budget_exhausted {
                return false;
            }
        }
        false
    }

    fn finish(&mut self) -> bool {
        if !(0..self.stack.len()).all(|i| released(self.alloc, &self.stack, i)) {
            return false;
        }
        match apply_pi(self.instance, self.alloc, &self.stack) {
            Ok(next) => {
                if (self.accept)(&next) {
                    self.outcome.found = Some((
                        PiEdgeSet {
                            edges: self.stack.clone(),
                        },
                        next,
                    ));
                    true
                } else {
                    false
                }
            }
            Err(_) => {
                self.outcome.apply_failures += 1;
                false
            }
        }
    }
}
