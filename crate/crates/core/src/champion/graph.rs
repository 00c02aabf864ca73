use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::allocation::{most_envious, Allocation, MostEnvious};
use crate::instance::Instance;
use crate::items::ItemSet;

use super::edge::{ChampionEdge, EdgeKind};

/// Offered sets larger than this only get the deterministic champion.
pub const MAX_EXACT_CHAMPION_ITEMS: usize = 20;

/// Every most envious agent of an offered set, each with one envied subset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChampionSet {
    pub offered: ItemSet,
    /// Sorted by agent.
    pub champions: Vec<MostEnvious>,
}

impl ChampionSet {
    pub fn mask(&self) -> u64 {
        self.champions.iter().fold(0, |acc, c| acc | 1 << c.agent)
    }

    pub fn get(&self, agent: usize) -> Option<&MostEnvious> {
        self.champions.iter().find(|c| c.agent == agent)
    }

    pub fn is_empty(&self) -> bool {
        self.champions.is_empty()
    }
}

/// All agents that envy some subset of `offered` which nobody strongly envies.
///
/// Each champion's subset is the one the deterministic shrinking loop finds
/// when that agent envies it, otherwise the largest such subset (lowest mask
/// among equals).
pub fn champion_set(instance: &Instance, alloc: &Allocation, offered: ItemSet) -> ChampionSet {
    let Some(first) = most_envious(instance, alloc, offered) else {
        return ChampionSet {
            offered,
            champions: Vec::new(),
        };
    };
    if offered.len() > MAX_EXACT_CHAMPION_ITEMS {
        return ChampionSet {
            offered,
            champions: vec![first],
        };
    }
    let items: Vec<usize> = offered.to_vec();
    let k = items.len();
    let size = 1usize << k;
    let n = alloc.agents();
    let mut masks = vec![ItemSet::EMPTY; size];
    let mut enviers = vec![0u64; size];
    for idx in 0..size {
        if idx > 0 {
            let low = idx.trailing_zeros() as usize;
            masks[idx] = masks[idx & (idx - 1)].with(items[low]);
        }
        let set = masks[idx];
        let mut who = 0u64;
        for a in 0..n {
            if alloc.envies(instance, a, set) {
                who |= 1 << a;
            }
        }
        enviers[idx] = who;
    }
    // best[a] = (size, mask) of the largest non-strongly-envied subset a envies.
    let mut best: Vec<Option<(usize, usize)>> = vec![None; n];
    for idx in 0..size {
        if enviers[idx] == 0 {
            continue;
        }
        let mut rest = idx;
        let mut strongly = false;
        while rest != 0 {
            let bit = rest & rest.wrapping_neg();
            if enviers[idx ^ bit] != 0 {
                strongly = true;
                break;
            }
            rest ^= bit;
        }
        if strongly {
            continue;
        }
        let count = idx.count_ones() as usize;
        let mut who = enviers[idx];
        while who != 0 {
            let a = who.trailing_zeros() as usize;
            who &= who - 1;
            let replace = match best[a] {
                None => true,
                Some((c, _)) => count > c,
            };
            if replace {
                best[a] = Some((count, idx));
            }
        }
    }
    let champions = (0..n)
        .filter_map(|a| {
            let (_, idx) = best[a]?;
            let envied = if alloc.envies(instance, a, first.envied) {
                first.envied
            } else {
                masks[idx]
            };
            Some(MostEnvious {
                agent: a,
                envied,
                discard: offered - envied,
            })
        })
        .collect();
    ChampionSet { offered, champions }
}

/// Split of a target's bundle induced by one of its g-champions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decomposition {
    pub target: usize,
    pub decomposer: usize,
    pub good: usize,
    pub top: ItemSet,
    pub bottom: ItemSet,
}

/// Envy edges and exact g-champion sets for every unallocated good.
#[derive(Debug, Clone)]
pub struct BasicGraph {
    pub agents: usize,
    /// `envy[i]` has bit `j` when `i` envies `j`.
    pub envy: Vec<u64>,
    pub goods: Vec<usize>,
    sets: BTreeMap<(usize, usize), ChampionSet>,
}

impl BasicGraph {
    pub fn build(instance: &Instance, alloc: &Allocation) -> Self {
        let n = alloc.agents();
        let envy = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| alloc.envies_agent(instance, i, j))
                    .fold(0u64, |acc, j| acc | 1 << j)
            })
            .collect();
        let goods = alloc.unallocated.to_vec();
        let mut sets = BTreeMap::new();
        for &g in &goods {
            for j in 0..n {
                let offered = alloc.bundles[j].with(g);
                sets.insert((g, j), champion_set(instance, alloc, offered));
            }
        }
        BasicGraph {
            agents: n,
            envy,
            goods,
            sets,
        }
    }

    pub fn envies(&self, i: usize, j: usize) -> bool {
        self.envy[i] >> j & 1 == 1
    }

    pub fn is_envy_free(&self) -> bool {
        self.envy.iter().all(|&e| e == 0)
    }

    pub fn champion_set(&self, good: usize, target: usize) -> &ChampionSet {
        &self.sets[&(good, target)]
    }

    /// Bitmask of g-champions of `target`.
    pub fn champions(&self, good: usize, target: usize) -> u64 {
        self.champion_set(good, target).mask()
    }

    pub fn is_champion(&self, good: usize, source: usize, target: usize) -> bool {
        self.champions(good, target) >> source & 1 == 1
    }

    /// `relation[i]` has bit `j` when `i` champions `j` for `good`, ignoring self-loops.
    pub fn relation(&self, good: usize) -> Vec<u64> {
        let mut rel = vec![0u64; self.agents];
        for j in 0..self.agents {
            let mut who = self.champions(good, j) & !(1 << j);
            while who != 0 {
                let i = who.trailing_zeros() as usize;
                who &= who - 1;
                rel[i] |= 1 << j;
            }
        }
        rel
    }

    pub fn envy_edges(&self) -> Vec<ChampionEdge> {
        let mut edges = Vec::new();
        for i in 0..self.agents {
            for j in 0..self.agents {
                if self.envies(i, j) {
                    edges.push(ChampionEdge::envy(i, j));
                }
            }
        }
        edges
    }

    pub fn basic_edges(&self) -> Vec<ChampionEdge> {
        let mut edges = Vec::new();
        for (&(g, j), set) in &self.sets {
            for c in &set.champions {
                edges.push(ChampionEdge::from_champion(
                    j,
                    ItemSet::singleton(g),
                    ItemSet::EMPTY,
                    EdgeKind::Basic { good: g },
                    c,
                ));
            }
        }
        edges
    }

    /// Envy edges followed by every basic g-edge.
    pub fn edges(&self) -> Vec<ChampionEdge> {
        let mut edges = self.envy_edges();
        edges.extend(self.basic_edges());
        edges
    }

    /// How `decomposer` g-decomposes `target`, if it is a champion that keeps `good`.
    pub fn decomposition(&self, good: usize, decomposer: usize, target: usize) -> Option<Decomposition> {
        let champion = self.champion_set(good, target).get(decomposer)?;
        if !champion.envied.contains(good) {
            return None;
        }
        Some(Decomposition {
            target,
            decomposer,
            good,
            top: champion.envied.without(good),
            bottom: champion.discard,
        })
    }

    /// All good g-cycles, each starting at its smallest agent.
    ///
    /// A good cycle has length at least two, no envy edge parallel to a
    /// cycle edge, and no g-champion edge between cycle agents (self-loops
    /// included) other than the cycle edges themselves.
    pub fn good_cycles(&self, good: usize) -> Vec<Vec<usize>> {
        let rel = self.relation(good);
        let mut cycles = Vec::new();
        let mut path = Vec::new();
        for start in 0..self.agents {
            path.clear();
            path.push(start);
            self.extend_cycles(&rel, start, &mut path, 1u64 << start, &mut cycles);
        }
        cycles.retain(|c| self.is_good_cycle(good, &rel, c));
        cycles
    }

    fn extend_cycles(&self, rel: &[u64], start: usize, path: &mut Vec<usize>, used: u64, out: &mut Vec<Vec<usize>>) {
        let last = *path.last().expect("nonempty");
        let mut next = rel[last];
        while next != 0 {
            let v = next.trailing_zeros() as usize;
            next &= next - 1;
            if v == start && path.len() >= 2 {
                out.push(path.clone());
            } else if v > start && used >> v & 1 == 0 {
                path.push(v);
                self.extend_cycles(rel, start, path, used | 1 << v, out);
                path.pop();
            }
        }
    }

    fn is_good_cycle(&self, good: usize, rel: &[u64], cycle: &[usize]) -> bool {
        let members = cycle.iter().fold(0u64, |acc, &a| acc | 1 << a);
        // Self-championship counts as an internal edge too.
        cycle.iter().enumerate().all(|(pos, &i)| {
            let succ = cycle[(pos + 1) % cycle.len()];
            !self.envies(i, succ) && rel[i] & members == 1 << succ && !self.is_champion(good, i, i)
        })
    }
}
