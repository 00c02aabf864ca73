//! Problem instances and their JSON form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::items::ItemSet;
use crate::valuation::{Valuation, ValuationDescriptor};

pub const INSTANCE_VERSION: u32 = 1;

/// On-disk instance format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDocument {
    pub version: u32,
    pub items: usize,
    pub agents: Vec<ValuationDescriptor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub item_names: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agent_names: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ordering: Option<Vec<usize>>,
}

/// A validated instance: `n` agents with valuations over `m` items.
#[derive(Debug, Clone)]
pub struct Instance {
    document: InstanceDocument,
    valuations: Vec<Valuation>,
}

impl Instance {
    pub fn new(items: usize, agents: Vec<ValuationDescriptor>) -> Result<Self> {
        Self::from_document(InstanceDocument {
            version: INSTANCE_VERSION,
            items,
            agents,
            item_names: None,
            agent_names: None,
            ordering: None,
        })
    }

    pub fn from_document(document: InstanceDocument) -> Result<Self> {
        if document.version != INSTANCE_VERSION {
            return Err(Error::MalformedInstance {
                field: "version".into(),
                message: format!("unsupported version {}", document.version),
            });
        }
        if document.agents.is_empty() {
            return Err(Error::MalformedInstance {
                field: "agents".into(),
                message: "at least one agent is required".into(),
            });
        }
        if document.agents.len() > 32 {
            return Err(Error::Capacity {
                what: "agent count",
                got: document.agents.len() as u128,
                limit: 32,
            });
        }
        let n = document.agents.len();
        if let Some(names) = &document.item_names {
            if names.len() != document.items {
                return Err(Error::MalformedInstance {
                    field: "item_names".into(),
                    message: format!("expected {} names, found {}", document.items, names.len()),
                });
            }
        }
        if let Some(names) = &document.agent_names {
            if names.len() != n {
                return Err(Error::MalformedInstance {
                    field: "agent_names".into(),
                    message: format!("expected {n} names, found {}", names.len()),
                });
            }
        }
        if let Some(ordering) = &document.ordering {
            validate_ordering(ordering, n).map_err(|message| Error::MalformedInstance {
                field: "ordering".into(),
                message,
            })?;
        }
        let valuations = document
            .agents
            .iter()
            .enumerate()
            .map(|(agent, d)| Valuation::new(d.clone(), document.items, agent))
            .collect::<Result<Vec<_>>>()?;
        Ok(Instance { document, valuations })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let document: InstanceDocument = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        Self::from_document(document)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.document).expect("instance serializes")
    }

    pub fn document(&self) -> &InstanceDocument {
        &self.document
    }

    pub fn with_names(mut self, items: Option<Vec<String>>, agents: Option<Vec<String>>) -> Result<Self> {
        self.document.item_names = items;
        self.document.agent_names = agents;
        Self::from_document(self.document)
    }

    pub fn agents(&self) -> usize {
        self.valuations.len()
    }

    pub fn items(&self) -> usize {
        self.document.items
    }

    pub fn all_items(&self) -> ItemSet {
        ItemSet::full(self.items())
    }

    pub fn valuation(&self, agent: usize) -> &Valuation {
        &self.valuations[agent]
    }

    pub fn valuations(&self) -> &[Valuation] {
        &self.valuations
    }

    pub fn descriptors(&self) -> &[ValuationDescriptor] {
        &self.document.agents
    }

    /// The fixed agent ordering: from the document, else ascending index.
    pub fn default_ordering(&self) -> Vec<usize> {
        self.document
            .ordering
            .clone()
            .unwrap_or_else(|| (0..self.agents()).collect())
    }

    pub fn item_name(&self, item: usize) -> String {
        match &self.document.item_names {
            Some(names) => names[item].clone(),
            None => item.to_string(),
        }
    }

    pub fn agent_name(&self, agent: usize) -> String {
        match &self.document.agent_names {
            Some(names) => names[agent].clone(),
            None => agent.to_string(),
        }
    }

    /// Number of distinct valuation descriptors.
    pub fn distinct_descriptors(&self) -> usize {
        let mut seen: Vec<&ValuationDescriptor> = Vec::new();
        for d in self.descriptors() {
            if !seen.contains(&d) {
                seen.push(d);
            }
        }
        seen.len()
    }
}

/// Checks that `ordering` is a permutation of `0..n`.
pub fn validate_ordering(ordering: &[usize], n: usize) -> std::result::Result<(), String> {
    if ordering.len() != n {
        return Err(format!("expected {n} agents, found {}", ordering.len()));
    }
    let mut seen = vec![false; n];
    for &a in ordering {
        if a >= n || seen[a] {
            return Err(format!("not a permutation of 0..{n}"));
        }
        seen[a] = true;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_errors_carry_positions_and_fields() {
        let err = Instance::parse("{\n  \"version\": 1,\n  \"items\": }").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
        let err = Instance::parse(r#"{"version":1,"items":2,"agents":[]}"#).unwrap_err();
        assert!(matches!(err, Error::MalformedInstance { ref field, .. } if field == "agents"));
        let err = Instance::parse(
            r#"{"version":1,"items":2,"agents":[{"kind":"additive","values":[1,2]},{"kind":"additive","values":[1]}]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::MalformedInstance { ref field, .. } if field == "agents[1].values"));
    }

    #[test]
    fn round_trip() {
        let text = r#"{"version":1,"items":2,"agents":[{"kind":"budget_additive","values":[4,4],"budget":5},{"kind":"unit_demand","values":[1,2]}],"ordering":[1,0]}"#;
        let inst = Instance::parse(text).unwrap();
        assert_eq!(inst.default_ordering(), vec![1, 0]);
        let again = Instance::parse(&inst.to_json()).unwrap();
        assert_eq!(again.document(), inst.document());
    }
}
