//! Full EFX when every agent has one of two valuations.

use crate::certificate::{Construction, StepKind};
use crate::champion::{apply_pi, champion_set, BasicGraph, ChampionEdge, ChampionSet, EdgeKind, Stage};
use crate::error::Result;

use super::{stuck, Engine};

pub(crate) fn run(engine: &mut Engine) -> Result<()> {
    let classes = classes(engine);
    while !engine.alloc.unallocated.is_empty() {
        engine.check_step_limit()?;
        if engine.try_charity()? {
            continue;
        }
        let graph = engine.graph();
        if graph.is_envy_free() {
            engine.diag.envy_free_steps += 1;
        }
        for &g in &graph.goods {
            for j in 0..graph.agents {
                check_backward(engine, &classes, graph.champion_set(g, j));
            }
        }
        if engine.try_pi_stages(&graph, &[Stage::Basic])? {
            continue;
        }
        if let Some(edges) = two_cycle(engine, &classes, &graph) {
            if let Ok(next) = apply_pi(engine.instance, &engine.alloc, &edges) {
                engine.push(StepKind::PiEdgeSet, next, Construction::PiEdgeSet { edges })?;
                continue;
            }
        }
        if engine.try_pi_stages(&graph, &[Stage::NestedDiscard, Stage::Bottom])? {
            continue;
        }
        if graph.is_envy_free() {
            engine.diag.ef_fallbacks += 1;
        }
        if !engine.fallback()? {
            return Err(stuck("twotype", &engine.alloc));
        }
    }
    Ok(())
}

/// Agents grouped by identical descriptor, in order of first appearance.
fn classes(engine: &Engine) -> Vec<Vec<usize>> {
    let descriptors = engine.instance.descriptors();
    let mut out: Vec<Vec<usize>> = Vec::new();
    for a in 0..descriptors.len() {
        match out.iter_mut().find(|c| descriptors[c[0]] == descriptors[a]) {
            Some(c) => c.push(a),
            None => out.push(vec![a]),
        }
    }
    out
}

/// Class members sorted by their own bundle, worst first (ties by index).
fn sorted_class(engine: &Engine, class: &[usize]) -> Vec<usize> {
    let v = engine.instance.valuation(class[0]);
    let mut sorted = class.to_vec();
    sorted.sort_by(|&x, &y| {
        v.compare(engine.alloc.bundles[x], engine.alloc.bundles[y])
            .then(x.cmp(&y))
    });
    sorted
}

/// Within each class, the champions of a set are a prefix of the class
/// sorted by bundle value.
fn check_backward(engine: &mut Engine, classes: &[Vec<usize>], set: &ChampionSet) {
    let mask = set.mask();
    for class in classes {
        let sorted = sorted_class(engine, class);
        let v = engine.instance.valuation(class[0]);
        engine.diag.backward_checks += 1;
        let mut ok = true;
        for (pos, &a) in sorted.iter().enumerate() {
            if mask >> a & 1 == 0 {
                continue;
            }
            for &b in &sorted[..pos] {
                let tied = v.compare(engine.alloc.bundles[a], engine.alloc.bundles[b]).is_eq();
                if mask >> b & 1 == 0 && !tied {
                    ok = false;
                }
            }
        }
        if !ok {
            engine.diag.backward_violations += 1;
        }
    }
}

/// `a0 champ[B_a0 | B_b0] b0` closed by `b0 champ_g a0`, where `a0`, `b0`
/// hold the worst bundles of their classes.
fn two_cycle(engine: &mut Engine, classes: &[Vec<usize>], graph: &BasicGraph) -> Option<Vec<ChampionEdge>> {
    if classes.len() != 2 {
        return None;
    }
    let a0 = sorted_class(engine, &classes[0])[0];
    let b0 = sorted_class(engine, &classes[1])[0];
    for &g in &graph.goods {
        let (Some(into_a), Some(into_b)) = (graph.decomposition(g, b0, a0), graph.decomposition(g, a0, b0)) else {
            continue;
        };
        let offered = into_b.top | into_a.bottom;
        let set = champion_set(engine.instance, &engine.alloc, offered);
        check_backward(engine, classes, &set);
        let Some(champion) = set.get(a0) else { continue };
        let closing = ChampionEdge::from_champion(b0, into_a.bottom, into_b.bottom, EdgeKind::Generalized, champion);
        let Some(first) = graph.champion_set(g, a0).get(b0) else {
            continue;
        };
        let g_edge = ChampionEdge::from_champion(
            a0,
            crate::ItemSet::singleton(g),
            crate::ItemSet::EMPTY,
            EdgeKind::Basic { good: g },
            first,
        );
        return Some(vec![closing, g_edge]);
    }
    None
}
