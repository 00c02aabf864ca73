//! Solvers: repeated dominating EFX progress steps from the empty allocation.

pub mod fallback;
mod four;
mod n2;
mod three;
mod two_types;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::allocation::{charity_fix, dominates, pareto_dominates, Allocation};
use crate::certificate::{Certificate, Construction, Step, StepKind, CERTIFICATE_VERSION};
use crate::champion::{
    audit_graph, candidate_edges, find_pi_edge_set, AuditCounts, BasicGraph, ChampionEdge, PiLimits, Stage,
};
use crate::error::{Error, Result};
use crate::instance::{validate_ordering, Instance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Auto,
    N2,
    Three,
    Four,
    #[serde(rename = "twotype")]
    TwoTypes,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Auto => "auto",
            SolverKind::N2 => "n2",
            SolverKind::Three => "three",
            SolverKind::Four => "four",
            SolverKind::TwoTypes => "twotype",
        }
    }

    /// Picks a concrete solver for `instance`.
    pub fn resolve(self, instance: &Instance) -> SolverKind {
        if self != SolverKind::Auto {
            return self;
        }
        let n = instance.agents();
        match instance.distinct_descriptors() {
            2 => SolverKind::TwoTypes,
            1 if n >= 5 => SolverKind::TwoTypes,
            _ => match n {
                3 => SolverKind::Three,
                4 => SolverKind::Four,
                _ => SolverKind::N2,
            },
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        [
            SolverKind::Auto,
            SolverKind::N2,
            SolverKind::Three,
            SolverKind::Four,
            SolverKind::TwoTypes,
        ]
        .into_iter()
        .find(|k| k.name() == s)
        .ok_or_else(|| Error::Argument(format!("unknown solver '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverOptions {
    /// Run the observation checks on every basic graph.
    pub audit: bool,
    pub pi_limits: PiLimits,
    pub fallback_budget: u128,
    pub max_steps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            audit: false,
            pi_limits: PiLimits::default(),
            fallback_budget: fallback::DEFAULT_FALLBACK_BUDGET,
            max_steps: 10_000,
        }
    }
}

/// Counters describing how a run made progress.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub charity_fixes: u64,
    pub pi_applied: u64,
    pub pi_apply_failures: u64,
    pub pi_budget_exhausted: u64,
    pub candidate_steps: u64,
    pub fallback_steps: u64,
    /// Fallbacks taken from an envy-free allocation.
    pub ef_fallbacks: u64,
    pub envy_free_steps: u64,
    pub rings_checks: u64,
    pub rings_violations: u64,
    pub ring_constructions: u64,
    pub backward_checks: u64,
    pub backward_violations: u64,
    pub structure_matches: u64,
    pub discovery_failures: u64,
    pub audit: AuditCounts,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverReport {
    pub solver: SolverKind,
    pub allocation: Allocation,
    pub unallocated: usize,
    pub charity_envied: bool,
    pub fallback_used: bool,
    pub steps: usize,
    pub certificate: Certificate,
    pub diagnostics: Diagnostics,
}

/// Runs `kind` on `instance` under `ordering` (the instance's ordering when
/// `None`), starting from the empty allocation.
pub fn solve(
    instance: &Instance,
    kind: SolverKind,
    ordering: Option<Vec<usize>>,
    options: &SolverOptions,
) -> Result<SolverReport> {
    solve_from(instance, kind, ordering, options, Allocation::empty(instance))
}

/// Like [`solve`] but starting from a given EFX allocation.
pub fn solve_from(
    instance: &Instance,
    kind: SolverKind,
    ordering: Option<Vec<usize>>,
    options: &SolverOptions,
    start: Allocation,
) -> Result<SolverReport> {
    start.validate(instance)?;
    if !start.is_efx(instance) {
        return Err(Error::Precondition("starting allocation is not EFX".into()));
    }
    let ordering = ordering.unwrap_or_else(|| instance.default_ordering());
    validate_ordering(&ordering, instance.agents()).map_err(Error::Argument)?;
    let kind = kind.resolve(instance);
    let n = instance.agents();
    match kind {
        SolverKind::Three if n != 3 => {
            return Err(Error::Argument(format!(
                "the three-agent solver needs 3 agents, got {n}"
            )))
        }
        SolverKind::Four if n != 4 => {
            return Err(Error::Argument(format!(
                "the four-agent solver needs 4 agents, got {n}"
            )))
        }
        SolverKind::TwoTypes if instance.distinct_descriptors() > 2 => {
            return Err(Error::Argument(
                "the two-type solver needs at most two distinct valuations".into(),
            ))
        }
        _ => {}
    }
    let mut engine = Engine::new(instance, ordering, *options, start);
    match kind {
        SolverKind::N2 => n2::run(&mut engine)?,
        SolverKind::Three => three::run(&mut engine)?,
        SolverKind::Four => four::run(&mut engine)?,
        SolverKind::TwoTypes => two_types::run(&mut engine)?,
        SolverKind::Auto => unreachable!("resolved above"),
    }
    Ok(engine.finish(kind))
}

/// Shared state of one solver run.
pub(crate) struct Engine<'a> {
    pub instance: &'a Instance,
    pub ordering: Vec<usize>,
    pub options: SolverOptions,
    pub initial: Allocation,
    pub alloc: Allocation,
    pub steps: Vec<Step>,
    pub diag: Diagnostics,
}

impl<'a> Engine<'a> {
    fn new(instance: &'a Instance, ordering: Vec<usize>, options: SolverOptions, start: Allocation) -> Self {
        Engine {
            instance,
            ordering,
            options,
            initial: start.clone(),
            alloc: start,
            steps: Vec::new(),
            diag: Diagnostics::default(),
        }
    }

    pub fn check_step_limit(&self) -> Result<()> {
        if self.steps.len() >= self.options.max_steps {
            return Err(Error::Capacity {
                what: "progress steps",
                got: self.steps.len() as u128,
                limit: self.options.max_steps as u128,
            });
        }
        Ok(())
    }

    pub fn graph(&mut self) -> BasicGraph {
        let graph = BasicGraph::build(self.instance, &self.alloc);
        if self.options.audit {
            self.diag.audit += audit_graph(self.instance, &self.alloc, &graph);
        }
        graph
    }

    pub fn dominates(&self, after: &Allocation) -> bool {
        dominates(self.instance, after, &self.alloc, &self.ordering)
    }

    /// EFX and dominating the current allocation.
    pub fn is_progress(&self, after: &Allocation) -> bool {
        after.is_efx(self.instance) && self.dominates(after)
    }

    /// Records a verified step and moves to `after`.
    pub fn push(&mut self, kind: StepKind, after: Allocation, construction: Construction) -> Result<()> {
        after.validate(self.instance)?;
        let efx_after = after.is_efx(self.instance);
        let dom = self.dominates(&after);
        let pareto = pareto_dominates(self.instance, &after, &self.alloc);
        if !efx_after || !dom {
            return Err(Error::Invariant(format!(
                "{kind:?} step would break EFX or domination (efx={efx_after}, dominates={dom})"
            )));
        }
        match kind {
            StepKind::PiEdgeSet => self.diag.pi_applied += 1,
            StepKind::CharityFix => self.diag.charity_fixes += 1,
            StepKind::CandidateReallocation => self.diag.candidate_steps += 1,
            StepKind::ExhaustiveFallback => self.diag.fallback_steps += 1,
        }
        let before = std::mem::replace(&mut self.alloc, after.clone());
        self.steps.push(Step {
            kind,
            before,
            after,
            construction,
            efx_after,
            dominates: dom,
            pareto_dominates: pareto,
        });
        Ok(())
    }

    pub fn try_charity(&mut self) -> Result<bool> {
        match charity_fix(self.instance, &self.alloc) {
            Some(fix) => {
                self.push(
                    StepKind::CharityFix,
                    fix.allocation,
                    Construction::Charity {
                        agent: fix.agent,
                        taken: fix.taken,
                    },
                )?;
                Ok(true)
            }
            None => Ok(false),
        }
    }

    /// PI search over the given candidates; applies the first hit.
    pub fn try_pi_edges(&mut self, candidates: &[ChampionEdge]) -> Result<bool> {
        let outcome = find_pi_edge_set(self.instance, &self.alloc, candidates, self.options.pi_limits, &|_| {
            true
        });
        self.diag.pi_apply_failures += outcome.apply_failures as u64;
        if outcome.budget_exhausted {
            self.diag.pi_budget_exhausted += 1;
        }
        match outcome.found {
            Some((pi, next)) => {
                self.push(StepKind::PiEdgeSet, next, Construction::PiEdgeSet { edges: pi.edges })?;
                Ok(true)
            }
            None => Ok(false),
        }
    }

    /// PI search over candidate families up to `stage`, trying each stage in turn.
    pub fn try_pi_stages(&mut self, graph: &BasicGraph, stages: &[Stage]) -> Result<bool> {
        for &stage in stages {
            let candidates = candidate_edges(self.instance, &self.alloc, graph, stage);
            if self.try_pi_edges(&candidates)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Tries named candidate allocations in order; takes the first that is
    /// EFX and dominating.
    pub fn try_candidates(&mut self, candidates: Vec<(String, crate::allocation::Allocation)>) -> Result<bool> {
        for (name, alloc) in candidates {
            if alloc.validate(self.instance).is_err() {
                continue;
            }
            if self.is_progress(&alloc) {
                self.push(
                    StepKind::CandidateReallocation,
                    alloc,
                    Construction::Named {
                        name,
                        intermediate: None,
                        edges: Vec::new(),
                    },
                )?;
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// From an EFX intermediate allocation, looks for a PI edge set (up to
    /// two hops) whose result dominates the current allocation.
    pub fn try_two_hop(&mut self, name: &str, intermediate: &Allocation) -> Result<bool> {
        if !intermediate.is_efx(self.instance) || intermediate.validate(self.instance).is_err() {
            return Ok(false);
        }
        let base = self.alloc.clone();
        let ordering = self.ordering.clone();
        let instance = self.instance;
        let accept = |y: &Allocation| dominates(instance, y, &base, &ordering);
        let mut from = intermediate.clone();
        let mut edges_used = Vec::new();
        for _ in 0..2 {
            let graph = BasicGraph::build(instance, &from);
            let candidates = candidate_edges(instance, &from, &graph, Stage::Released);
            let outcome = find_pi_edge_set(instance, &from, &candidates, self.options.pi_limits, &accept);
            if let Some((pi, next)) = outcome.found {
                edges_used.extend(pi.edges);
                self.push(
                    StepKind::CandidateReallocation,
                    next,
                    Construction::Named {
                        name: format!("{name}+pi"),
                        intermediate: Some(intermediate.clone()),
                        edges: edges_used,
                    },
                )?;
                return Ok(true);
            }
            // Second hop: take any PI improvement of the intermediate.
            let outcome = find_pi_edge_set(instance, &from, &candidates, self.options.pi_limits, &|_| true);
            match outcome.found {
                Some((pi, next)) => {
                    edges_used.extend(pi.edges);
                    from = next;
                }
                None => break,
            }
        }
        Ok(false)
    }

    /// For each pair where `w` envies `X_s`: `w` takes the shortest greedy
    /// trim of `X_s` it still prefers, `s` takes `X_w`.
    pub fn trim_swap_candidates(&self) -> Vec<(String, Allocation)> {
        let n = self.instance.agents();
        let mut out = Vec::new();
        let mut order = self.ordering.clone();
        order.extend((0..n).filter(|a| !self.ordering.contains(a)));
        for &w in &order {
            for s in 0..n {
                if !self.alloc.envies_agent(self.instance, w, s) {
                    continue;
                }
                let own = self.alloc.bundles[w];
                let Ok(z) = self.instance.valuation(w).trim_until(self.alloc.bundles[s], own) else {
                    continue;
                };
                if let Ok(next) = self.alloc.reassign(self.instance, &[(w, z), (s, own)]) {
                    out.push((format!("trim_swap[{w}<-{s}]"), next));
                }
            }
        }
        out
    }

    pub fn fallback(&mut self) -> Result<bool> {
        let found = fallback::dominating_efx(self.instance, &self.alloc, &self.ordering, self.options.fallback_budget)?;
        match found {
            Some(next) => {
                self.push(StepKind::ExhaustiveFallback, next, Construction::Fallback)?;
                Ok(true)
            }
            None => Ok(false),
        }
    }

    fn finish(self, kind: SolverKind) -> SolverReport {
        let allocation = self.alloc.clone();
        let certificate = Certificate {
            version: CERTIFICATE_VERSION,
            solver: kind.name().to_string(),
            ordering: self.ordering.clone(),
            initial: self.initial,
            steps: self.steps,
            final_allocation: allocation.clone(),
        };
        SolverReport {
            solver: kind,
            unallocated: allocation.unallocated.len(),
            charity_envied: allocation.charity_envied(self.instance),
            fallback_used: self.diag.fallback_steps > 0,
            steps: certificate.steps.len(),
            certificate,
            allocation,
            diagnostics: self.diag,
        }
    }
}

/// Error used when no dominating EFX allocation exists although a theorem
/// says one should.
pub(crate) fn stuck(solver: &str, alloc: &Allocation) -> Error {
    Error::Invariant(format!(
        "{solver}: no dominating EFX allocation found from an allocation with {} unallocated items",
        alloc.unallocated.len()
    ))
}
