use serde::{Deserialize, Serialize};

use crate::allocation::{most_envious, Allocation, MostEnvious};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::items::ItemSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EdgeKind {
    Envy,
    /// Champion of the target's bundle plus one unallocated good.
    Basic {
        good: usize,
    },
    Generalized,
}

/// `source` champions `target` with respect to `(added | removed)`: the
/// source is a most envious agent of `(X_target \ removed) ∪ added`, keeping
/// everything except `discard`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ChampionEdge {
    pub source: usize,
    pub target: usize,
    pub kind: EdgeKind,
    pub added: ItemSet,
    pub removed: ItemSet,
    pub discard: ItemSet,
}

impl ChampionEdge {
    pub fn envy(source: usize, target: usize) -> Self {
        ChampionEdge {
            source,
            target,
            kind: EdgeKind::Envy,
            added: ItemSet::EMPTY,
            removed: ItemSet::EMPTY,
            discard: ItemSet::EMPTY,
        }
    }

    pub fn from_champion(
        target: usize,
        added: ItemSet,
        removed: ItemSet,
        kind: EdgeKind,
        champion: &MostEnvious,
    ) -> Self {
        ChampionEdge {
            source: champion.agent,
            target,
            kind,
            added,
            removed,
            discard: champion.discard,
        }
    }

    /// `(X_target \ removed) ∪ added`.
    pub fn offered(&self, alloc: &Allocation) -> ItemSet {
        (alloc.bundles[self.target] - self.removed) | self.added
    }

    /// What the source ends up with when the edge is used.
    pub fn received(&self, alloc: &Allocation) -> ItemSet {
        self.offered(alloc) - self.discard
    }

    /// Structural and championship checks against `alloc`: the source envies
    /// what it receives and nobody strongly envies it.
    pub fn validate(&self, instance: &Instance, alloc: &Allocation) -> Result<()> {
        let n = alloc.agents();
        if self.source >= n || self.target >= n {
            return Err(Error::Argument("edge endpoint out of range".into()));
        }
        let bundle = alloc.bundles[self.target];
        if !self.added.is_disjoint(bundle) {
            return Err(Error::Argument(format!(
                "edge {self}: added goods overlap the target's bundle"
            )));
        }
        if !self.removed.is_subset(bundle) {
            return Err(Error::Argument(format!(
                "edge {self}: removed goods are not in the target's bundle"
            )));
        }
        if !self.discard.is_subset(self.offered(alloc)) {
            return Err(Error::Argument(format!(
                "edge {self}: discard is not part of the offered set"
            )));
        }
        let received = self.received(alloc);
        if !alloc.envies(instance, self.source, received) {
            return Err(Error::Invariant(format!(
                "edge {self}: source does not envy the set it receives"
            )));
        }
        if alloc.strongly_envied(instance, received) {
            return Err(Error::Invariant(format!(
                "edge {self}: received set is strongly envied"
            )));
        }
        Ok(())
    }
}

impl std::fmt::Display for ChampionEdge {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.kind {
            EdgeKind::Envy => write!(f, "{} -> {}", self.source, self.target),
            EdgeKind::Basic { good } => write!(f, "{} champ[{}] {}", self.source, good, self.target),
            EdgeKind::Generalized => write!(
                f,
                "{} champ[{}|{}] {}",
                self.source, self.added, self.removed, self.target
            ),
        }
    }
}

/// The deterministic `(H | S)` champion edge into `target`, if the offered
/// set is envied at all.
pub fn generalized_edge(
    instance: &Instance,
    alloc: &Allocation,
    target: usize,
    added: ItemSet,
    removed: ItemSet,
) -> Result<Option<ChampionEdge>> {
    let bundle = alloc.bundles[target];
    if !added.is_disjoint(bundle) || !removed.is_subset(bundle) {
        return Err(Error::Argument(format!(
            "need added disjoint from and removed inside the bundle of agent {target}"
        )));
    }
    let offered = (bundle - removed) | added;
    let kind = if removed.is_empty() && added.len() == 1 {
        EdgeKind::Basic {
            good: added.first().expect("one item"),
        }
    } else if removed.is_empty() && added.is_empty() {
        EdgeKind::Envy
    } else {
        EdgeKind::Generalized
    };
    Ok(most_envious(instance, alloc, offered)
        .map(|found| ChampionEdge::from_champion(target, added, removed, kind, &found)))
}
