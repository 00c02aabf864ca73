//! Valuation classes and the exact bundle keys used for every comparison.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::items::{ItemSet, MAX_ITEMS};

/// Largest item count for which exhaustive table checks are run.
pub const MAX_TABLE_ITEMS: usize = 12;
/// Largest item count for which a dense rank table is kept per agent.
pub const MAX_DENSE_ITEMS: usize = 16;

/// How an agent values bundles.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ValuationDescriptor {
    Additive {
        values: Vec<u64>,
    },
    UnitDemand {
        values: Vec<u64>,
    },
    BudgetAdditive {
        values: Vec<u64>,
        budget: u64,
    },
    Multiplicative {
        values: Vec<u64>,
    },
    /// Full value table indexed by item bitmask.
    Table {
        table: Vec<u64>,
    },
}

impl ValuationDescriptor {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::Additive { .. } => "additive",
            Self::UnitDemand { .. } => "unit_demand",
            Self::BudgetAdditive { .. } => "budget_additive",
            Self::Multiplicative { .. } => "multiplicative",
            Self::Table { .. } => "table",
        }
    }

    /// Per-item values, for the non-table kinds.
    pub fn item_values(&self) -> Option<&[u64]> {
        match self {
            Self::Additive { values }
            | Self::UnitDemand { values }
            | Self::BudgetAdditive { values, .. }
            | Self::Multiplicative { values } => Some(values),
            Self::Table { .. } => None,
        }
    }

    /// Base value of `set`. Does not validate; see [`Valuation::new`].
    pub fn value(&self, set: ItemSet) -> u128 {
        match self {
            Self::Additive { values } => additive_sum(values, set),
            Self::UnitDemand { values } => set.iter().map(|i| values[i] as u128).max().unwrap_or(0),
            Self::BudgetAdditive { values, budget } => additive_sum(values, set).min(*budget as u128),
            Self::Multiplicative { values } => {
                if set.is_empty() {
                    0
                } else {
                    set.iter()
                        .try_fold(1u128, |acc, i| acc.checked_mul(values[i] as u128))
                        .unwrap_or(u128::MAX)
                }
            }
            Self::Table { table } => table[set.bits() as usize] as u128,
        }
    }
}

fn additive_sum(values: &[u64], set: ItemSet) -> u128 {
    set.iter().map(|i| values[i] as u128).sum()
}

/// Comparison key of a bundle. Ordered lexicographically by `(primary, tiebreak)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BundleKey {
    pub primary: u128,
    pub tiebreak: u64,
}

impl BundleKey {
    pub const ZERO: BundleKey = BundleKey {
        primary: 0,
        tiebreak: 0,
    };
}

/// A validated valuation over a fixed item universe, with cached keys.
#[derive(Debug, Clone)]
pub struct Valuation {
    descriptor: ValuationDescriptor,
    items: usize,
    /// `2^{π(i)}` per item.
    weights: Vec<u64>,
    /// Rank of every bundle in key order, when the universe is small.
    ranks: Option<Vec<u32>>,
}

impl Valuation {
    /// Validates `descriptor` for an `items`-item universe.
    ///
    /// `agent` is only used to label errors.
    pub fn new(descriptor: ValuationDescriptor, items: usize, agent: usize) -> Result<Self> {
        let field = |suffix: &str| format!("agents[{agent}].{suffix}");
        if items > MAX_ITEMS {
            return Err(Error::Capacity {
                what: "item count",
                got: items as u128,
                limit: MAX_ITEMS as u128,
            });
        }
        match &descriptor {
            ValuationDescriptor::Table { table } => {
                if items > MAX_TABLE_ITEMS {
                    return Err(Error::UnsupportedValuation {
                        agent,
                        reason: format!("table valuations are only checked for at most {MAX_TABLE_ITEMS} items"),
                    });
                }
                if table.len() != 1usize << items {
                    return Err(Error::MalformedInstance {
                        field: field("table"),
                        message: format!("expected {} entries, found {}", 1usize << items, table.len()),
                    });
                }
                validate_table(table, items, agent)?;
            }
            other => {
                let values = other.item_values().unwrap_or_default();
                if values.len() != items {
                    return Err(Error::MalformedInstance {
                        field: field("values"),
                        message: format!("expected {items} values, found {}", values.len()),
                    });
                }
                if let ValuationDescriptor::Multiplicative { values } = other {
                    if let Some(pos) = values.iter().position(|&v| v == 0) {
                        return Err(Error::MalformedInstance {
                            field: format!("agents[{agent}].values[{pos}]"),
                            message: "multiplicative values must be at least 1".into(),
                        });
                    }
                    let product = values.iter().try_fold(1u128, |acc, &v| acc.checked_mul(v as u128));
                    if product.is_none() {
                        return Err(Error::Capacity {
                            what: "multiplicative bundle value",
                            got: u128::MAX,
                            limit: u128::MAX,
                        });
                    }
                }
                if let ValuationDescriptor::BudgetAdditive { budget, .. } = other {
                    if *budget == 0 {
                        return Err(Error::MalformedInstance {
                            field: field("budget"),
                            message: "budget must be positive".into(),
                        });
                    }
                }
            }
        }

        let weights = match descriptor.item_values() {
            Some(values) => canonical_weights(values),
            None => vec![0; items],
        };
        let mut valuation = Valuation {
            descriptor,
            items,
            weights,
            ranks: None,
        };
        if items <= MAX_DENSE_ITEMS {
            valuation.ranks = Some(valuation.build_ranks());
        }
        Ok(valuation)
    }

    fn build_ranks(&self) -> Vec<u32> {
        let size = 1usize << self.items;
        let keys: Vec<BundleKey> = (0..size)
            .map(|mask| self.compute_key(ItemSet::from_bits(mask as u64)))
            .collect();
        let mut order: Vec<u32> = (0..size as u32).collect();
        order.sort_unstable_by_key(|&mask| keys[mask as usize]);
        let mut ranks = vec![0u32; size];
        for (rank, &mask) in order.iter().enumerate() {
            ranks[mask as usize] = rank as u32;
        }
        ranks
    }

    pub fn descriptor(&self) -> &ValuationDescriptor {
        &self.descriptor
    }

    pub fn items(&self) -> usize {
        self.items
    }

    pub fn value(&self, set: ItemSet) -> u128 {
        self.descriptor.value(set)
    }

    pub fn key(&self, set: ItemSet) -> BundleKey {
        self.compute_key(set)
    }

    fn compute_key(&self, set: ItemSet) -> BundleKey {
        let tiebreak = set.iter().map(|i| self.weights[i]).sum();
        match &self.descriptor {
            ValuationDescriptor::Additive { values } | ValuationDescriptor::BudgetAdditive { values, .. } => {
                BundleKey {
                    primary: additive_sum(values, set),
                    tiebreak,
                }
            }
            ValuationDescriptor::UnitDemand { .. } | ValuationDescriptor::Multiplicative { .. } => BundleKey {
                primary: self.descriptor.value(set),
                tiebreak,
            },
            ValuationDescriptor::Table { table } => BundleKey {
                primary: table[set.bits() as usize] as u128,
                tiebreak: 0,
            },
        }
    }

    /// Position of `set` in this agent's total order, when a rank table exists.
    pub fn rank(&self, set: ItemSet) -> Option<u32> {
        self.ranks.as_ref().map(|r| r[set.bits() as usize])
    }

    pub fn rank_table(&self) -> Option<&[u32]> {
        self.ranks.as_deref()
    }

    pub fn compare(&self, a: ItemSet, b: ItemSet) -> Ordering {
        match &self.ranks {
            Some(r) => r[a.bits() as usize].cmp(&r[b.bits() as usize]),
            None => self.compute_key(a).cmp(&self.compute_key(b)),
        }
    }

    /// `a` is strictly worse than `b` for this agent.
    pub fn less(&self, a: ItemSet, b: ItemSet) -> bool {
        self.compare(a, b) == Ordering::Less
    }

    /// The better of two bundles.
    pub fn max_of(&self, a: ItemSet, b: ItemSet) -> ItemSet {
        if self.less(a, b) {
            b
        } else {
            a
        }
    }

    /// `T` followed by the bundles obtained by repeatedly deleting the item
    /// whose removal leaves the best remainder.
    pub fn removal_sequence(&self, set: ItemSet) -> Vec<ItemSet> {
        let mut seq = Vec::with_capacity(set.len() + 1);
        let mut current = set;
        seq.push(current);
        while !current.is_empty() {
            let mut best: Option<ItemSet> = None;
            for h in current {
                let rest = current.without(h);
                best = Some(match best {
                    Some(b) if !self.less(b, rest) => b,
                    _ => rest,
                });
            }
            current = best.expect("nonempty");
            seq.push(current);
        }
        seq
    }

    /// Best `k`-subset of `set` reached by greedy removals.
    pub fn trim_to_size(&self, set: ItemSet, k: usize) -> Result<ItemSet> {
        if k > set.len() {
            return Err(Error::Argument(format!(
                "cannot trim a bundle of {} items to {k} items",
                set.len()
            )));
        }
        let mut current = set;
        for _ in k..set.len() {
            current = self.removal_sequence_step(current);
        }
        Ok(current)
    }

    fn removal_sequence_step(&self, current: ItemSet) -> ItemSet {
        current
            .iter()
            .map(|h| current.without(h))
            .reduce(|a, b| self.max_of(a, b))
            .unwrap_or(current)
    }

    /// Shortest prefix of the removal sequence whose key still exceeds `floor`.
    pub fn trim_until(&self, set: ItemSet, floor: ItemSet) -> Result<ItemSet> {
        if !self.less(floor, set) {
            return Err(Error::Precondition(format!(
                "bundle {set} does not exceed the floor bundle {floor}"
            )));
        }
        let mut current = set;
        loop {
            let next = self.removal_sequence_step(current);
            if current.is_empty() || !self.less(floor, next) {
                return Ok(current);
            }
            current = next;
        }
    }

    /// Like [`trim_until`](Self::trim_until) with an explicit key floor.
    pub fn trim_until_key(&self, set: ItemSet, floor: BundleKey) -> Result<ItemSet> {
        if self.key(set) <= floor {
            return Err(Error::Precondition(format!(
                "bundle {set} does not exceed the given floor key"
            )));
        }
        let mut current = set;
        loop {
            let next = self.removal_sequence_step(current);
            if current.is_empty() || self.key(next) <= floor {
                return Ok(current);
            }
            current = next;
        }
    }
}

/// `2^{π(i)}` where π ranks items by ascending singleton value, ties by index.
fn canonical_weights(values: &[u64]) -> Vec<u64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by_key(|&i| (values[i], i));
    let mut weights = vec![0u64; values.len()];
    for (rank, &item) in order.iter().enumerate() {
        weights[item] = 1u64 << rank;
    }
    weights
}

fn validate_table(table: &[u64], items: usize, agent: usize) -> Result<()> {
    let field = format!("agents[{agent}].table");
    if table[0] != 0 {
        return Err(Error::MalformedInstance {
            field,
            message: "value of the empty bundle must be 0".into(),
        });
    }
    for mask in 0..table.len() {
        for i in 0..items {
            let bigger = mask | 1 << i;
            if bigger != mask && table[bigger] < table[mask] {
                return Err(Error::MalformedInstance {
                    field: format!("{field}[{bigger}]"),
                    message: format!("not monotone: smaller than the value of bundle mask {mask}"),
                });
            }
        }
    }
    let mut sorted = table.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::UnsupportedValuation {
            agent,
            reason: "table valuation is degenerate and no respecting proxy is constructed".into(),
        });
    }
    if !check_cancelable_by(items, |s| table[s.bits() as usize])? {
        return Err(Error::UnsupportedValuation {
            agent,
            reason: "table valuation is not cancelable".into(),
        });
    }
    Ok(())
}

/// Exhaustively checks `f(S ∪ g) > f(T ∪ g) ⇒ f(S) > f(T)` for all disjoint
/// `S, T` and `g ∉ S ∪ T` over `items` items.
pub fn check_cancelable_by<K, F>(items: usize, mut f: F) -> Result<bool>
where
    K: Ord + Copy,
    F: FnMut(ItemSet) -> K,
{
    if items > MAX_TABLE_ITEMS {
        return Err(Error::Capacity {
            what: "items for an exhaustive cancelability check",
            got: items as u128,
            limit: MAX_TABLE_ITEMS as u128,
        });
    }
    let full = ItemSet::full(items);
    let mut pairs: Vec<(K, K)> = Vec::with_capacity(1 << items);
    for g in 0..items {
        pairs.clear();
        for s in full.without(g).subsets() {
            pairs.push((f(s.with(g)), f(s)));
        }
        pairs.sort_by_key(|x| x.0);
        // Largest b among entries with strictly smaller a.
        let mut best_below: Option<K> = None;
        let mut start = 0;
        while start < pairs.len() {
            let mut end = start;
            while end < pairs.len() && pairs[end].0 == pairs[start].0 {
                end += 1;
            }
            if let Some(limit) = best_below {
                if pairs[start..end].iter().any(|p| p.1 <= limit) {
                    return Ok(false);
                }
            }
            for p in &pairs[start..end] {
                best_below = Some(match best_below {
                    Some(b) if b >= p.1 => b,
                    _ => p.1,
                });
            }
            start = end;
        }
    }
    Ok(true)
}

/// Cancelability of the base valuation described by `descriptor`.
pub fn check_cancelable(descriptor: &ValuationDescriptor, items: usize) -> Result<bool> {
    if let ValuationDescriptor::Table { table } = descriptor {
        if table.len() != 1usize << items.min(63) {
            return Err(Error::Argument("table size does not match item count".into()));
        }
    }
    check_cancelable_by(items, |s| descriptor.value(s))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(items: &[usize]) -> ItemSet {
        items.iter().collect()
    }

    fn additive(values: &[u64]) -> Valuation {
        Valuation::new(
            ValuationDescriptor::Additive {
                values: values.to_vec(),
            },
            values.len(),
            0,
        )
        .unwrap()
    }

    #[test]
    fn class_values() {
        let table1 = ValuationDescriptor::Additive {
            values: vec![1, 2, 3, 7, 0, 0, 0],
        };
        assert_eq!(table1.value(set(&[0, 1, 2])), 6);
        let budget = ValuationDescriptor::BudgetAdditive {
            values: vec![4, 4],
            budget: 5,
        };
        assert_eq!(budget.value(set(&[0, 1])), 5);
        let unit = ValuationDescriptor::UnitDemand { values: vec![3, 9, 2] };
        assert_eq!(unit.value(set(&[0, 2])), 3);
        let mult = ValuationDescriptor::Multiplicative { values: vec![2, 3, 5] };
        assert_eq!(mult.value(set(&[0, 2])), 10);
        for d in [table1, budget, unit, mult] {
            assert_eq!(d.value(ItemSet::EMPTY), 0);
        }
    }

    #[test]
    fn compare_examples() {
        let v = additive(&[1, 2, 3, 7]);
        assert_eq!(v.compare(set(&[3]), set(&[0, 1, 2])), Ordering::Greater);
        let zero = additive(&[0, 1]);
        assert_eq!(zero.compare(set(&[0]), ItemSet::EMPTY), Ordering::Greater);
        let unit = Valuation::new(ValuationDescriptor::UnitDemand { values: vec![2, 2] }, 2, 0).unwrap();
        // Equal values: the higher index has the higher canonical rank.
        assert_eq!(unit.compare(set(&[1]), set(&[0])), Ordering::Greater);
    }

    #[test]
    fn cancelable_examples() {
        let additive = ValuationDescriptor::Additive {
            values: vec![3, 1, 4, 1, 5],
        };
        assert!(check_cancelable(&additive, 5).unwrap());

        let mut table = vec![0u64; 8];
        table[0b001] = 1;
        table[0b010] = 2;
        table[0b100] = 3;
        table[0b011] = 6;
        table[0b101] = 5;
        table[0b110] = 4;
        table[0b111] = 7;
        let table = ValuationDescriptor::Table { table };
        assert!(!check_cancelable(&table, 3).unwrap());
        assert!(matches!(
            Valuation::new(table, 3, 0),
            Err(Error::UnsupportedValuation { .. })
        ));
        assert!(matches!(
            check_cancelable_by(13, |s| s.bits()),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn trim_examples() {
        let v = additive(&[5, 1, 3]);
        let all = set(&[0, 1, 2]);
        assert_eq!(v.trim_to_size(all, 2).unwrap(), set(&[0, 2]));
        assert_eq!(v.trim_to_size(all, 3).unwrap(), all);
        assert!(v.trim_to_size(all, 4).is_err());
        let floor = BundleKey {
            primary: 6,
            tiebreak: u64::MAX,
        };
        assert_eq!(v.trim_until_key(all, floor).unwrap(), set(&[0, 2]));
        // A floor bundle worth 6 under this agent: {0,1}.
        assert_eq!(v.trim_until(all, set(&[0, 1])).unwrap(), set(&[0, 2]));
        assert!(v.trim_until(set(&[1]), set(&[0])).is_err());

        let single = additive(&[7]);
        let floor = BundleKey {
            primary: 6,
            tiebreak: 0,
        };
        assert_eq!(single.trim_until_key(set(&[0]), floor).unwrap(), set(&[0]));

        let unit = Valuation::new(ValuationDescriptor::UnitDemand { values: vec![4, 4, 1] }, 3, 0).unwrap();
        assert_eq!(unit.trim_to_size(all, 1).unwrap(), set(&[1]));
    }

    #[test]
    fn validation_errors() {
        let err = Valuation::new(ValuationDescriptor::Multiplicative { values: vec![1, 0] }, 2, 3).unwrap_err();
        assert!(matches!(err, Error::MalformedInstance { ref field, .. } if field == "agents[3].values[1]"));
        let err = Valuation::new(ValuationDescriptor::Additive { values: vec![1] }, 2, 0).unwrap_err();
        assert!(matches!(err, Error::MalformedInstance { .. }));
        let err = Valuation::new(
            ValuationDescriptor::Table {
                table: vec![0, 2, 1, 1],
            },
            2,
            0,
        )
        .unwrap_err();
        assert!(matches!(err, Error::MalformedInstance { .. }));
    }
}
