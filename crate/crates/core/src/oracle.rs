//! Brute-force ground truth for small instances.

use crate::allocation::{Allocation, MostEnvious};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::items::ItemSet;
use crate::valuation::Valuation;

pub const DEFAULT_BUDGET: u128 = 10_000_000;
pub const BUDGET_ENV: &str = "EFX_ORACLE_BUDGET";

/// State budget from the environment, else [`DEFAULT_BUDGET`].
pub fn budget_from_env() -> u128 {
    std::env::var(BUDGET_ENV)
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_BUDGET)
}

/// Checks EFX directly from base comparisons of keys, without going through
/// the allocation helpers.
pub fn is_efx_independent(instance: &Instance, bundles: &[ItemSet]) -> bool {
    for (i, &own) in bundles.iter().enumerate() {
        let key = instance.valuation(i).key(own);
        for (j, &other) in bundles.iter().enumerate() {
            if i == j {
                continue;
            }
            for h in other {
                if instance.valuation(i).key(other.without(h)) > key {
                    return false;
                }
            }
        }
    }
    true
}

/// Every EFX allocation with at most `max_unallocated` unallocated items, in
/// canonical order (items ascending, each to agent 0..n-1 and then the pool).
pub fn enumerate_efx(instance: &Instance, max_unallocated: usize, budget: u128) -> Result<Vec<Allocation>> {
    let n = instance.agents();
    let m = instance.items();
    let needed = (n as u128 + 1).checked_pow(m as u32).unwrap_or(u128::MAX);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let mut out = Vec::new();
    let mut bundles = vec![ItemSet::EMPTY; n];
    enumerate(instance, 0, ItemSet::EMPTY, max_unallocated, &mut bundles, &mut out);
    Ok(out)
}

fn enumerate(
    instance: &Instance,
    item: usize,
    pool: ItemSet,
    max_unallocated: usize,
    bundles: &mut Vec<ItemSet>,
    out: &mut Vec<Allocation>,
) {
    if item == instance.items() {
        if is_efx_independent(instance, bundles) {
            out.push(Allocation {
                bundles: bundles.clone(),
                unallocated: pool,
            });
        }
        return;
    }
    for a in 0..bundles.len() {
        bundles[a] = bundles[a].with(item);
        enumerate(instance, item + 1, pool, max_unallocated, bundles, out);
        bundles[a] = bundles[a].without(item);
    }
    if pool.len() < max_unallocated {
        enumerate(instance, item + 1, pool.with(item), max_unallocated, bundles, out);
    }
}

/// Every `(agent, T)` with `T ⊆ set` envied by the agent and strongly envied
/// by nobody.
pub fn enumerate_most_envious(instance: &Instance, alloc: &Allocation, set: ItemSet) -> Result<Vec<MostEnvious>> {
    if set.len() > 16 {
        return Err(Error::Capacity {
            what: "offered set size",
            got: set.len() as u128,
            limit: 16,
        });
    }
    let envies = |a: usize, t: ItemSet| instance.valuation(a).key(alloc.bundles[a]) < instance.valuation(a).key(t);
    let n = alloc.agents();
    let mut out = Vec::new();
    for t in set.subsets() {
        let strongly = t.iter().any(|h| (0..n).any(|a| envies(a, t.without(h))));
        if strongly {
            continue;
        }
        for a in 0..n {
            if envies(a, t) {
                out.push(MostEnvious {
                    agent: a,
                    envied: t,
                    discard: set - t,
                });
            }
        }
    }
    Ok(out)
}

/// Key-maximal `k`-subset of `set`.
pub fn max_subset_of_size(valuation: &Valuation, set: ItemSet, k: usize) -> Result<ItemSet> {
    if set.len() > 12 {
        return Err(Error::Capacity {
            what: "bundle size",
            got: set.len() as u128,
            limit: 12,
        });
    }
    set.subsets()
        .filter(|s| s.len() == k)
        .max_by_key(|&s| valuation.key(s))
        .ok_or_else(|| Error::Argument(format!("no subset of size {k}")))
}
