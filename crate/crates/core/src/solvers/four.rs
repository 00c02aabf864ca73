//! At most one unallocated good for four agents.

use crate::allocation::{most_envious_among, Allocation};
use crate::champion::{candidate_edges, champion_set, BasicGraph, ChampionEdge, EdgeKind, Stage};
use crate::error::Result;
use crate::items::ItemSet;

use super::{stuck, Engine};

pub(crate) fn run(engine: &mut Engine) -> Result<()> {
    while engine.alloc.unallocated.len() >= 2 || engine.alloc.charity_envied(engine.instance) {
        engine.check_step_limit()?;
        if engine.try_charity()? {
            continue;
        }
        let graph = engine.graph();
        if graph.is_envy_free() {
            engine.diag.envy_free_steps += 1;
            if engine.try_pi_stages(&graph, &[Stage::Basic, Stage::NestedDiscard, Stage::Bottom])? {
                continue;
            }
            engine.diag.ef_fallbacks += 1;
        } else {
            if engine.try_pi_stages(
                &graph,
                &[Stage::Basic, Stage::NestedDiscard, Stage::Bottom, Stage::Released],
            )? {
                continue;
            }
            if envy_branch(engine, &graph)? {
                continue;
            }
            if engine.try_candidates(engine.trim_swap_candidates())? {
                continue;
            }
        }
        if !engine.fallback()? {
            return Err(stuck("four", &engine.alloc));
        }
    }
    Ok(())
}

/// The envy structure after renaming: `agent[r]` plays role `r + 1`.
struct Structure {
    agent: [usize; 4],
    g: usize,
    h: usize,
    /// `top_g[r]`, `bottom_g[r]`: g-decomposition of role `r + 1` (r < 3).
    top_g: [ItemSet; 3],
    bottom_g: [ItemSet; 3],
    top_h: [ItemSet; 3],
    bottom_h: [ItemSet; 3],
}

fn permutations() -> Vec<[usize; 4]> {
    let mut out = Vec::with_capacity(24);
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let p = [a, b, c, d];
                    let mask = p.iter().fold(0u8, |acc, &x| acc | 1 << x);
                    if mask == 0b1111 {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}

/// Envy exactly `1 -> 4`; unique g- and h-champions `2 -> 1`, `3 -> 2`,
/// `4 -> 3`; champions of 4 only among `{1, 2}`.
fn detect(engine: &Engine, graph: &BasicGraph, p: [usize; 4], g: usize, h: usize) -> Option<Structure> {
    for (r, &a) in p.iter().enumerate() {
        let expected = if r == 0 { 1u64 << p[3] } else { 0 };
        if graph.envy[a] != expected {
            return None;
        }
    }
    for x in [g, h] {
        for r in 0..3 {
            if graph.champions(x, p[r]) != 1 << p[r + 1] {
                return None;
            }
        }
        if graph.champions(x, p[3]) & !(1u64 << p[0] | 1 << p[1]) != 0 {
            return None;
        }
    }
    let four = engine.instance.valuation(p[3]);
    let (g, h) = if four.less(ItemSet::singleton(g), ItemSet::singleton(h)) {
        (g, h)
    } else {
        (h, g)
    };
    let mut s = Structure {
        agent: p,
        g,
        h,
        top_g: [ItemSet::EMPTY; 3],
        bottom_g: [ItemSet::EMPTY; 3],
        top_h: [ItemSet::EMPTY; 3],
        bottom_h: [ItemSet::EMPTY; 3],
    };
    for r in 0..3 {
        let dg = graph.decomposition(g, p[r + 1], p[r])?;
        let dh = graph.decomposition(h, p[r + 1], p[r])?;
        s.top_g[r] = dg.top;
        s.bottom_g[r] = dg.bottom;
        s.top_h[r] = dh.top;
        s.bottom_h[r] = dh.bottom;
    }
    // Re-choose the h-bottom of role 3 so that it contains the g-bottom.
    let x3 = engine.alloc.bundles[p[2]];
    let nested = champion_set(engine.instance, &engine.alloc, (x3 - s.bottom_g[2]).with(h));
    if let Some(c) = nested.get(p[3]) {
        if c.envied.contains(h) {
            s.top_h[2] = c.envied.without(h);
            s.bottom_h[2] = x3 - s.top_h[2];
        }
    }
    Some(s)
}

fn envy_branch(engine: &mut Engine, graph: &BasicGraph) -> Result<bool> {
    let goods = graph.goods.clone();
    for (i, &g) in goods.iter().enumerate() {
        for &h in &goods[i + 1..] {
            for p in permutations() {
                let Some(s) = detect(engine, graph, p, g, h) else {
                    continue;
                };
                engine.diag.structure_matches += 1;
                if bespoke_pi(engine, graph, &s)? {
                    return Ok(true);
                }
                let candidates = candidates(engine, &s);
                if engine.try_candidates(candidates.clone())? {
                    return Ok(true);
                }
                for (name, alloc) in &candidates {
                    if engine.try_two_hop(name, alloc)? {
                        return Ok(true);
                    }
                }
            }
        }
    }
    Ok(false)
}

/// PI search with extra bottom-bundle edges between roles 1..3.
fn bespoke_pi(engine: &mut Engine, graph: &BasicGraph, s: &Structure) -> Result<bool> {
    let mut edges = candidate_edges(engine.instance, &engine.alloc, graph, Stage::Released);
    let halves = [(&s.top_g, &s.bottom_g), (&s.top_h, &s.bottom_h)];
    for (tops, _) in halves {
        for (_, bottoms) in halves {
            for (target, &top) in tops.iter().enumerate().take(3) {
                for (owner, &bottom) in bottoms.iter().enumerate().take(3) {
                    if owner == target || bottom.is_empty() {
                        continue;
                    }
                    let t = s.agent[target];
                    let removed = engine.alloc.bundles[t] - top;
                    let set = champion_set(engine.instance, &engine.alloc, top | bottom);
                    for c in &set.champions {
                        edges.push(ChampionEdge::from_champion(
                            t,
                            bottom,
                            removed,
                            EdgeKind::Generalized,
                            c,
                        ));
                    }
                }
            }
        }
    }
    engine.try_pi_edges(&edges)
}

fn candidates(engine: &Engine, s: &Structure) -> Vec<(String, Allocation)> {
    let inst = engine.instance;
    let x = &engine.alloc.bundles;
    let [p1, p2, p3, p4] = s.agent;
    let (x2, x3, x4) = (x[p2], x[p3], x[p4]);
    let (g, h) = (s.g, s.h);
    let best = |agent: usize, sets: &[ItemSet]| -> ItemSet {
        sets.iter()
            .copied()
            .reduce(|a, b| inst.valuation(agent).max_of(a, b))
            .expect("nonempty")
    };
    let build = |name: &str, roles: [ItemSet; 4]| -> Option<(String, Allocation)> {
        let mut bundles = x.clone();
        for (r, set) in roles.into_iter().enumerate() {
            bundles[s.agent[r]] = set;
        }
        Allocation::from_bundles(inst, bundles)
            .ok()
            .map(|a| (name.to_string(), a))
    };
    let mut out = Vec::new();
    let t1g = s.top_g[0];
    let t2g = s.top_g[1];
    let t2h = s.top_h[1];
    let t3h = s.top_h[2];
    let b1g = s.bottom_g[0];
    let b2g = s.bottom_g[1];

    if engine.ordering[0] != p2 {
        let second = t1g | b2g;
        let three = t2g.with(g);
        let four = t3h.with(h);
        out.extend(build("X'", [x4, second, three, four]));
        let m2 = best(p2, &[x4, three, four, x3]);
        if let Ok(z) = inst.valuation(p2).trim_until(second, m2) {
            out.extend(build("X'[2:Z]", [x4, z, three, four]));
            let to_three = if m2 == three { x3 } else { three };
            let to_four = if m2 == x4 { four } else { x4 };
            out.extend(build("X''", [z, m2, to_three, to_four]));
        }
    } else {
        let first_g = t1g.with(g);
        let two_h = t2h.with(h);
        let options = [x2, two_h, first_g, x3];
        let z = |agent: usize| inst.valuation(agent).trim_until(x4, best(agent, &options)).ok();
        let (z1, z4) = (z(p1), z(p4));
        let prefer_one = match (z1, z4) {
            (Some(a), Some(b)) => a.len() < b.len(),
            (Some(_), None) => true,
            _ => false,
        };
        let pairs = if prefer_one { [(0, 3), (3, 0)] } else { [(3, 0), (0, 3)] };
        for (w, l) in pairs {
            let (w_agent, l_agent) = (s.agent[w], s.agent[l]);
            let z_w = if w == 0 { z1 } else { z4 };
            let m_l = best(l_agent, &options);
            let second = if m_l == first_g { x2 } else { first_g };
            let third = if m_l == x3 { two_h } else { x3 };
            let mut roles = [ItemSet::EMPTY; 4];
            roles[w] = x4;
            roles[l] = m_l;
            roles[1] = second;
            roles[2] = third;
            let x_prime = build("X'(vip=2)", roles);
            let efx = x_prime.as_ref().is_some_and(|(_, a)| a.is_efx(inst));
            out.extend(x_prime);
            if second == first_g {
                if let Some(zw) = z_w {
                    roles[w] = zw;
                    out.extend(build("X'(vip=2)[w:Z_w]", roles));
                }
            } else {
                for b in b1g {
                    let pool = x2.with(b);
                    let mask = 1u64 << p2 | 1 << p3 | 1 << p4;
                    if let Some(found) = most_envious_among(inst, &engine.alloc, pool, mask) {
                        out.extend(build("Y(hindsight)", [x4, first_g, found.envied, t3h.with(h)]));
                    }
                }
            }
            if !efx {
                let seq = inst.valuation(w_agent).removal_sequence(x4);
                let holder = inst.valuation(l_agent);
                let strongly = |z: ItemSet| z.iter().any(|i| holder.less(first_g, z.without(i)));
                if let Some(&z2) = seq.iter().find(|&&z| !strongly(z)) {
                    let mut roles = [ItemSet::EMPTY; 4];
                    roles[w] = z2;
                    roles[l] = first_g;
                    roles[1] = x2;
                    roles[2] = x3;
                    out.extend(build("X''(vip=2)", roles));
                }
            }
        }
    }
    out
}
