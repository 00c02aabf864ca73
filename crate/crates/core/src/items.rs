use std::fmt;
use std::ops::{BitAnd, BitOr, BitXor, Not, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Largest supported item universe.
pub const MAX_ITEMS: usize = 62;

/// A set of items over the universe `0..m`, stored as a bitmask.
///
/// Serializes as an ascending list of item indices.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ItemSet(u64);

impl ItemSet {
    pub const EMPTY: ItemSet = ItemSet(0);

    pub const fn from_bits(bits: u64) -> Self {
        ItemSet(bits)
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    pub fn full(m: usize) -> Self {
        assert!(m <= MAX_ITEMS, "item universe too large");
        if m == 0 {
            ItemSet(0)
        } else {
            ItemSet(u64::MAX >> (64 - m))
        }
    }

    pub fn singleton(item: usize) -> Self {
        debug_assert!(item < MAX_ITEMS);
        ItemSet(1u64 << item)
    }

    pub fn contains(self, item: usize) -> bool {
        item < 64 && self.0 >> item & 1 == 1
    }

    pub fn with(self, item: usize) -> Self {
        ItemSet(self.0 | 1u64 << item)
    }

    pub fn without(self, item: usize) -> Self {
        ItemSet(self.0 & !(1u64 << item))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(self, other: ItemSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: ItemSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn union(self, other: ItemSet) -> Self {
        ItemSet(self.0 | other.0)
    }

    pub fn intersection(self, other: ItemSet) -> Self {
        ItemSet(self.0 & other.0)
    }

    pub fn difference(self, other: ItemSet) -> Self {
        ItemSet(self.0 & !other.0)
    }

    /// Smallest item in the set.
    pub fn first(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    /// Highest item index plus one, or zero for the empty set.
    pub fn span(self) -> usize {
        64 - self.0.leading_zeros() as usize
    }

    pub fn iter(self) -> Items {
        Items(self.0)
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }

    /// All subsets of `self`, in ascending order of their bitmask.
    pub fn subsets(self) -> Subsets {
        Subsets {
            of: self.0,
            next: Some(0),
        }
    }
}

impl FromIterator<usize> for ItemSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        iter.into_iter().fold(ItemSet::EMPTY, ItemSet::with)
    }
}

impl<'a> FromIterator<&'a usize> for ItemSet {
    fn from_iter<I: IntoIterator<Item = &'a usize>>(iter: I) -> Self {
        iter.into_iter().copied().collect()
    }
}

impl IntoIterator for ItemSet {
    type Item = usize;
    type IntoIter = Items;
    fn into_iter(self) -> Items {
        self.iter()
    }
}

/// Ascending iterator over the members of an [`ItemSet`].
#[derive(Clone)]
pub struct Items(u64);

impl Iterator for Items {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Items {}

pub struct Subsets {
    of: u64,
    next: Option<u64>,
}

impl Iterator for Subsets {
    type Item = ItemSet;

    fn next(&mut self) -> Option<ItemSet> {
        let cur = self.next?;
        // Standard "next submask in increasing order" step.
        self.next = if cur == self.of {
            None
        } else {
            Some((cur.wrapping_sub(self.of)) & self.of)
        };
        Some(ItemSet(cur))
    }
}

impl BitOr for ItemSet {
    type Output = ItemSet;
    fn bitor(self, rhs: ItemSet) -> ItemSet {
        self.union(rhs)
    }
}

impl BitAnd for ItemSet {
    type Output = ItemSet;
    fn bitand(self, rhs: ItemSet) -> ItemSet {
        self.intersection(rhs)
    }
}

impl BitXor for ItemSet {
    type Output = ItemSet;
    fn bitxor(self, rhs: ItemSet) -> ItemSet {
        ItemSet(self.0 ^ rhs.0)
    }
}

impl Sub for ItemSet {
    type Output = ItemSet;
    fn sub(self, rhs: ItemSet) -> ItemSet {
        self.difference(rhs)
    }
}

impl Not for ItemSet {
    type Output = ItemSet;
    fn not(self) -> ItemSet {
        ItemSet(!self.0)
    }
}

impl fmt::Debug for ItemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::Display for ItemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

impl Serialize for ItemSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for ItemSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let items = Vec::<usize>::deserialize(deserializer)?;
        let mut set = ItemSet::EMPTY;
        for i in items {
            if i >= MAX_ITEMS {
                return Err(serde::de::Error::custom(format!(
                    "item index {i} exceeds the supported maximum of {}",
                    MAX_ITEMS - 1
                )));
            }
            if set.contains(i) {
                return Err(serde::de::Error::custom(format!("item {i} listed twice")));
            }
            set = set.with(i);
        }
        Ok(set)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_ops() {
        let a: ItemSet = [0, 2, 5].into_iter().collect();
        let b: ItemSet = [2, 3].into_iter().collect();
        assert_eq!((a | b).to_vec(), vec![0, 2, 3, 5]);
        assert_eq!((a & b).to_vec(), vec![2]);
        assert_eq!((a - b).to_vec(), vec![0, 5]);
        assert!(ItemSet::singleton(2).is_subset(a));
        assert_eq!(a.len(), 3);
        assert_eq!(a.span(), 6);
        assert_eq!(ItemSet::full(3).to_vec(), vec![0, 1, 2]);
        assert_eq!(ItemSet::full(0), ItemSet::EMPTY);
    }

    #[test]
    fn subsets_are_ascending_and_complete() {
        let s: ItemSet = [1, 3, 4].into_iter().collect();
        let subs: Vec<u64> = s.subsets().map(ItemSet::bits).collect();
        assert_eq!(subs.len(), 8);
        assert!(subs.windows(2).all(|w| w[0] < w[1]));
        assert!(subs.iter().all(|&x| x & !s.bits() == 0));
        assert_eq!(ItemSet::EMPTY.subsets().count(), 1);
    }

    #[test]
    fn serde_round_trip() {
        let s: ItemSet = [4, 0, 9].into_iter().collect();
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(text, "[0,4,9]");
        let back: ItemSet = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<ItemSet>("[1,1]").is_err());
        assert!(serde_json::from_str::<ItemSet>("[70]").is_err());
    }
}
