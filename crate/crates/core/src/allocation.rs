//! Allocations, envy predicates, the most-envious-agent construction and
//! lexicographic domination.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::items::ItemSet;

/// One bundle per agent plus the unallocated pool.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Allocation {
    pub bundles: Vec<ItemSet>,
    pub unallocated: ItemSet,
}

impl Allocation {
    /// Everything unallocated.
    pub fn empty(instance: &Instance) -> Self {
        Allocation {
            bundles: vec![ItemSet::EMPTY; instance.agents()],
            unallocated: instance.all_items(),
        }
    }

    /// Builds an allocation whose pool is whatever the bundles leave over.
    pub fn from_bundles(instance: &Instance, bundles: Vec<ItemSet>) -> Result<Self> {
        let used = bundles.iter().fold(ItemSet::EMPTY, |acc, &b| acc | b);
        let alloc = Allocation {
            unallocated: instance.all_items() - used,
            bundles,
        };
        alloc.validate(instance)?;
        Ok(alloc)
    }

    /// Checks that bundles and pool partition the item universe.
    pub fn validate(&self, instance: &Instance) -> Result<()> {
        if self.bundles.len() != instance.agents() {
            return Err(Error::Argument(format!(
                "allocation has {} bundles for {} agents",
                self.bundles.len(),
                instance.agents()
            )));
        }
        let mut seen = self.unallocated;
        for (agent, &bundle) in self.bundles.iter().enumerate() {
            if !bundle.is_disjoint(seen) {
                return Err(Error::Argument(format!(
                    "bundle of agent {agent} overlaps another bundle or the pool"
                )));
            }
            seen = seen | bundle;
        }
        if seen != instance.all_items() {
            return Err(Error::Argument(
                "bundles and pool do not cover exactly the item universe".into(),
            ));
        }
        Ok(())
    }

    pub fn agents(&self) -> usize {
        self.bundles.len()
    }

    pub fn envies(&self, instance: &Instance, agent: usize, set: ItemSet) -> bool {
        instance.valuation(agent).less(self.bundles[agent], set)
    }

    pub fn strongly_envies(&self, instance: &Instance, agent: usize, set: ItemSet) -> bool {
        set.iter().any(|h| self.envies(instance, agent, set.without(h)))
    }

    pub fn envies_agent(&self, instance: &Instance, agent: usize, other: usize) -> bool {
        agent != other && self.envies(instance, agent, self.bundles[other])
    }

    /// Bitmask of agents envying `set`.
    pub fn enviers(&self, instance: &Instance, set: ItemSet) -> u64 {
        (0..self.agents())
            .filter(|&a| self.envies(instance, a, set))
            .fold(0, |acc, a| acc | 1 << a)
    }

    /// Some agent strongly envies `set`.
    pub fn strongly_envied(&self, instance: &Instance, set: ItemSet) -> bool {
        (0..self.agents()).any(|a| self.strongly_envies(instance, a, set))
    }

    pub fn is_efx(&self, instance: &Instance) -> bool {
        (0..self.agents())
            .all(|i| (0..self.agents()).all(|j| i == j || !self.strongly_envies(instance, i, self.bundles[j])))
    }

    pub fn is_ef(&self, instance: &Instance) -> bool {
        (0..self.agents()).all(|i| (0..self.agents()).all(|j| !self.envies_agent(instance, i, j)))
    }

    pub fn has_envy(&self, instance: &Instance) -> bool {
        !self.is_ef(instance)
    }

    /// Some agent envies the unallocated pool.
    pub fn charity_envied(&self, instance: &Instance) -> bool {
        (0..self.agents()).any(|a| self.envies(instance, a, self.unallocated))
    }

    /// Replaces the bundles of some agents and recomputes the pool.
    pub fn reassign(&self, instance: &Instance, changes: &[(usize, ItemSet)]) -> Result<Allocation> {
        let mut bundles = self.bundles.clone();
        for &(agent, bundle) in changes {
            bundles[agent] = bundle;
        }
        Allocation::from_bundles(instance, bundles)
    }
}

/// An agent envying `envied` ⊆ S that nobody strongly envies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MostEnvious {
    pub agent: usize,
    pub envied: ItemSet,
    pub discard: ItemSet,
}

/// Deterministic most envious agent of `set`, considering every agent.
pub fn most_envious(instance: &Instance, alloc: &Allocation, set: ItemSet) -> Option<MostEnvious> {
    most_envious_among(instance, alloc, set, u64::MAX)
}

/// [`most_envious`] where only the agents in `agents` (a bitmask) count as
/// enviers.
pub fn most_envious_among(instance: &Instance, alloc: &Allocation, set: ItemSet, agents: u64) -> Option<MostEnvious> {
    let members: Vec<usize> = (0..alloc.agents()).filter(|&a| agents >> a & 1 == 1).collect();
    if !members.iter().any(|&a| alloc.envies(instance, a, set)) {
        return None;
    }
    let mut current = set;
    'shrink: loop {
        for &a in &members {
            for h in current {
                if alloc.envies(instance, a, current.without(h)) {
                    current = current.without(h);
                    continue 'shrink;
                }
            }
        }
        break;
    }
    let agent = members
        .into_iter()
        .find(|&a| alloc.envies(instance, a, current))
        .expect("the last witness still envies the shrunken set");
    Some(MostEnvious {
        agent,
        envied: current,
        discard: set - current,
    })
}

/// Result of giving an agent a subset of the pool.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharityFix {
    pub allocation: Allocation,
    pub agent: usize,
    pub taken: ItemSet,
}

/// If someone envies the pool, hands its most envious agent the minimal
/// envied subset and returns their old bundle to the pool.
pub fn charity_fix(instance: &Instance, alloc: &Allocation) -> Option<CharityFix> {
    let found = most_envious(instance, alloc, alloc.unallocated)?;
    let mut next = alloc.clone();
    let old = next.bundles[found.agent];
    next.bundles[found.agent] = found.envied;
    next.unallocated = (alloc.unallocated - found.envied) | old;
    Some(CharityFix {
        allocation: next,
        agent: found.agent,
        taken: found.envied,
    })
}

/// Lexicographic comparison of `after` against `before` under `ordering`.
pub fn dominates(instance: &Instance, after: &Allocation, before: &Allocation, ordering: &[usize]) -> bool {
    for &a in ordering {
        match instance.valuation(a).compare(after.bundles[a], before.bundles[a]) {
            Ordering::Greater => return true,
            Ordering::Less => return false,
            Ordering::Equal => {}
        }
    }
    false
}

/// Nobody is worse off and somebody is strictly better off.
pub fn pareto_dominates(instance: &Instance, after: &Allocation, before: &Allocation) -> bool {
    let mut improved = false;
    for a in 0..after.agents() {
        match instance.valuation(a).compare(after.bundles[a], before.bundles[a]) {
            Ordering::Greater => improved = true,
            Ordering::Less => return false,
            Ordering::Equal => {}
        }
    }
    improved
}
