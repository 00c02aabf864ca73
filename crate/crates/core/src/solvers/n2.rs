//! At most n-2 unallocated goods with an unenvied pool, for any n.

use crate::certificate::{Construction, StepKind};
use crate::champion::{
    apply_pi, discover_bottom_edges, BasicGraph, ChampionEdge, CycleContext, Discovery, EdgeKind, Stage,
};
use crate::error::Result;
use crate::items::ItemSet;

use super::{stuck, Engine};

pub(crate) fn run(engine: &mut Engine) -> Result<()> {
    let n = engine.instance.agents();
    let threshold = n.max(2) - 1;
    while engine.alloc.unallocated.len() >= threshold || engine.alloc.charity_envied(engine.instance) {
        engine.check_step_limit()?;
        if engine.try_charity()? {
            continue;
        }
        let graph = engine.graph();
        if graph.is_envy_free() {
            engine.diag.envy_free_steps += 1;
        }
        if engine.try_pi_stages(&graph, &[Stage::Basic])? {
            continue;
        }
        engine.diag.rings_checks += 1;
        match parallel_ring(&graph) {
            Some(ring) => {
                if let Some(edges) = ring_construction(engine, &graph, &ring) {
                    let next = apply_pi(engine.instance, &engine.alloc, &edges)?;
                    engine.diag.ring_constructions += 1;
                    engine.push(StepKind::PiEdgeSet, next, Construction::PiEdgeSet { edges })?;
                    continue;
                }
                engine.diag.discovery_failures += 1;
            }
            None => engine.diag.rings_violations += 1,
        }
        if engine.try_pi_stages(&graph, &[Stage::NestedDiscard, Stage::Bottom])? {
            continue;
        }
        if graph.is_envy_free() {
            engine.diag.ef_fallbacks += 1;
        }
        if !engine.fallback()? {
            return Err(stuck("n2", &engine.alloc));
        }
    }
    Ok(())
}

/// When no basic PI cycle exists: exactly n-1 unallocated goods, no envy,
/// unique champions, and every good's champion relation is the same
/// Hamiltonian ring. Returns the ring starting at agent 0.
fn parallel_ring(graph: &BasicGraph) -> Option<Vec<usize>> {
    let n = graph.agents;
    if graph.goods.len() != n.max(2) - 1 || !graph.is_envy_free() {
        return None;
    }
    // pred[j] = unique champion of j, identical for every good.
    let mut pred = vec![usize::MAX; n];
    for &g in &graph.goods {
        for (j, slot) in pred.iter_mut().enumerate() {
            let champions = graph.champions(g, j);
            if champions.count_ones() != 1 {
                return None;
            }
            let c = champions.trailing_zeros() as usize;
            if c == j || (*slot != usize::MAX && *slot != c) {
                return None;
            }
            *slot = c;
        }
    }
    let mut succ = vec![usize::MAX; n];
    for (j, &p) in pred.iter().enumerate() {
        if succ[p] != usize::MAX {
            return None;
        }
        succ[p] = j;
    }
    let mut ring = vec![0];
    let mut at = succ[0];
    while at != 0 {
        if ring.len() >= n {
            return None;
        }
        ring.push(at);
        at = succ[at];
    }
    (ring.len() == n).then_some(ring)
}

/// The PI cycle through a good bottom edge: walking from its target back to
/// its source, the edge into the owner of the bottom bundle uses `g` (and
/// releases that bottom bundle); every other edge uses a distinct remaining
/// unallocated good.
fn ring_construction(engine: &Engine, graph: &BasicGraph, ring: &[usize]) -> Option<Vec<ChampionEdge>> {
    let g = graph.goods[0];
    let ctx = CycleContext::new(graph, g, ring)?;
    for &owner in ring {
        let (found, _) = discover_bottom_edges(engine.instance, &engine.alloc, &ctx, owner);
        let Discovery::Good(closing) = found else { continue };
        if closing.target == owner || closing.source == closing.target {
            continue;
        }
        let mut spare = graph.goods[1..].iter().copied();
        let mut edges = Vec::new();
        let mut at = closing.target;
        let mut ok = true;
        while at != closing.source {
            let next = ctx.succ[at];
            let good = if next == owner {
                g
            } else {
                match spare.next() {
                    Some(r) => r,
                    None => {
                        ok = false;
                        break;
                    }
                }
            };
            let Some(champion) = graph.champion_set(good, next).get(at) else {
                ok = false;
                break;
            };
            edges.push(ChampionEdge::from_champion(
                next,
                ItemSet::singleton(good),
                ItemSet::EMPTY,
                EdgeKind::Basic { good },
                champion,
            ));
            at = next;
        }
        if ok {
            edges.push(closing);
            if apply_pi(engine.instance, &engine.alloc, &edges).is_ok() {
                return Some(edges);
            }
        }
    }
    None
}
