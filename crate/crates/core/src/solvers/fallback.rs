//! Exhaustive search for a dominating EFX allocation.

use crate::allocation::Allocation;
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::items::ItemSet;
use crate::valuation::MAX_DENSE_ITEMS;

pub const DEFAULT_FALLBACK_BUDGET: u128 = 50_000_000;

/// First allocation in canonical order (items ascending, each to agent
/// 0..n-1 and then the pool) that is EFX and dominates `current`.
pub fn dominating_efx(
    instance: &Instance,
    current: &Allocation,
    ordering: &[usize],
    budget: u128,
) -> Result<Option<Allocation>> {
    let n = instance.agents();
    let m = instance.items();
    if m > MAX_DENSE_ITEMS {
        return Err(Error::Capacity {
            what: "items for the exhaustive fallback",
            got: m as u128,
            limit: MAX_DENSE_ITEMS as u128,
        });
    }
    let needed = (n as u128 + 1).checked_pow(m as u32).unwrap_or(u128::MAX);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let ranks: Vec<&[u32]> = (0..n)
        .map(|a| instance.valuation(a).rank_table().expect("dense ranks"))
        .collect();
    // strong[a][S] = best rank of S minus one item, plus one (0 for the empty set).
    let strong: Vec<Vec<u32>> = ranks
        .iter()
        .map(|r| {
            (0..1usize << m)
                .map(|mask| {
                    ItemSet::from_bits(mask as u64)
                        .iter()
                        .map(|h| r[mask & !(1 << h)] + 1)
                        .max()
                        .unwrap_or(0)
                })
                .collect()
        })
        .collect();
    let current_ranks: Vec<u32> = (0..n).map(|a| ranks[a][current.bundles[a].bits() as usize]).collect();
    let mut search = Search {
        n,
        m,
        ranks: &ranks,
        strong: &strong,
        ordering,
        current: &current_ranks,
        bundles: vec![0; n],
    };
    Ok(search.run(0).map(|bundles| {
        let bundles: Vec<ItemSet> = bundles.into_iter().map(|b| ItemSet::from_bits(b as u64)).collect();
        let used = bundles.iter().fold(ItemSet::EMPTY, |acc, &b| acc | b);
        Allocation {
            unallocated: instance.all_items() - used,
            bundles,
        }
    }))
}

struct Search<'a> {
    n: usize,
    m: usize,
    ranks: &'a [&'a [u32]],
    strong: &'a [Vec<u32>],
    ordering: &'a [usize],
    current: &'a [u32],
    bundles: Vec<usize>,
}

impl Search<'_> {
    fn run(&mut self, item: usize) -> Option<Vec<usize>> {
        if item == self.m {
            return self.accept().then(|| self.bundles.clone());
        }
        for a in 0..self.n {
            self.bundles[a] |= 1 << item;
            let found = self.run(item + 1);
            self.bundles[a] &= !(1 << item);
            if found.is_some() {
                return found;
            }
        }
        self.run(item + 1)
    }

    fn accept(&self) -> bool {
        let mut dominates = false;
        for &a in self.ordering {
            let r = self.ranks[a][self.bundles[a]];
            if r != self.current[a] {
                dominates = r > self.current[a];
                break;
            }
        }
        if !dominates {
            return false;
        }
        for i in 0..self.n {
            let own = self.ranks[i][self.bundles[i]];
            for j in 0..self.n {
                // Strong envy: some strict subset missing one item beats own.
                if i != j && self.strong[i][self.bundles[j]] > own + 1 {
                    return false;
                }
            }
        }
        true
    }
}
