//! Step-by-step certificates of solver runs and their independent replay.

use serde::{Deserialize, Serialize};

use crate::allocation::{dominates, pareto_dominates, Allocation};
use crate::champion::{apply_pi, check_pi_conditions, ChampionEdge};
use crate::error::{Error, Result};
use crate::instance::{validate_ordering, Instance};
use crate::items::ItemSet;

pub const CERTIFICATE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    PiEdgeSet,
    CharityFix,
    CandidateReallocation,
    ExhaustiveFallback,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Construction {
    PiEdgeSet {
        edges: Vec<ChampionEdge>,
    },
    Charity {
        agent: usize,
        taken: ItemSet,
    },
    Named {
        name: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        intermediate: Option<Allocation>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        edges: Vec<ChampionEdge>,
    },
    Fallback,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub kind: StepKind,
    pub before: Allocation,
    pub after: Allocation,
    pub construction: Construction,
    pub efx_after: bool,
    pub dominates: bool,
    pub pareto_dominates: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub version: u32,
    pub solver: String,
    pub ordering: Vec<usize>,
    pub initial: Allocation,
    pub steps: Vec<Step>,
    #[serde(rename = "final")]
    pub final_allocation: Allocation,
}

impl Certificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }
}

/// Replays `cert` against `instance` and returns the reconstructed final
/// allocation. Every step is re-derived or re-checked from scratch.
pub fn replay(instance: &Instance, cert: &Certificate) -> Result<Allocation> {
    let fail = |step: usize, msg: String| Error::Certificate(format!("step {step}: {msg}"));
    if cert.version != CERTIFICATE_VERSION {
        return Err(Error::Certificate(format!("unsupported version {}", cert.version)));
    }
    validate_ordering(&cert.ordering, instance.agents()).map_err(Error::Certificate)?;
    cert.initial
        .validate(instance)
        .map_err(|e| Error::Certificate(format!("initial allocation: {e}")))?;
    if !cert.initial.is_efx(instance) {
        return Err(Error::Certificate("initial allocation is not EFX".into()));
    }
    let mut current = cert.initial.clone();
    for (idx, step) in cert.steps.iter().enumerate() {
        if step.before != current {
            return Err(fail(idx, "does not start where the previous step ended".into()));
        }
        step.after.validate(instance).map_err(|e| fail(idx, e.to_string()))?;
        let derived = match &step.construction {
            Construction::PiEdgeSet { edges } => {
                if step.kind != StepKind::PiEdgeSet {
                    return Err(fail(idx, "edge set attached to a non-PI step".into()));
                }
                check_pi_conditions(instance, &current, edges).map_err(|e| fail(idx, e.to_string()))?;
                apply_pi(instance, &current, edges).map_err(|e| fail(idx, e.to_string()))?
            }
            Construction::Charity { agent, taken } => {
                if *agent >= instance.agents() {
                    return Err(fail(idx, "charity agent out of range".into()));
                }
                if !taken.is_subset(current.unallocated) {
                    return Err(fail(idx, "charity set is not unallocated".into()));
                }
                if !current.envies(instance, *agent, *taken) || current.strongly_envied(instance, *taken) {
                    return Err(fail(idx, "charity set is not a most envied subset of the pool".into()));
                }
                let mut next = current.clone();
                next.bundles[*agent] = *taken;
                next.unallocated = (current.unallocated - *taken) | current.bundles[*agent];
                next
            }
            Construction::Named { .. } | Construction::Fallback => step.after.clone(),
        };
        if derived != step.after {
            return Err(fail(idx, "re-applied step gives a different allocation".into()));
        }
        let efx = derived.is_efx(instance);
        let dom = dominates(instance, &derived, &current, &cert.ordering);
        let pareto = pareto_dominates(instance, &derived, &current);
        if !efx {
            return Err(fail(idx, "allocation after the step is not EFX".into()));
        }
        if !dom {
            return Err(fail(idx, "allocation after the step does not dominate".into()));
        }
        if (efx, dom, pareto) != (step.efx_after, step.dominates, step.pareto_dominates) {
            return Err(fail(idx, "recorded verification flags do not match".into()));
        }
        current = derived;
    }
    if current != cert.final_allocation {
        return Err(Error::Certificate(
            "final allocation does not match the last step".into(),
        ));
    }
    Ok(current)
}
