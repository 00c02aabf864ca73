//! Independent checks of solver output, built only from allocation
//! predicates. Each check either passes (and is named in the summary) or
//! yields the first violated guarantee.

use efx_core::{dominates, replay, Allocation, Certificate, Instance, SolverKind};

type Verdict = Result<Vec<String>, String>;

fn theorem(kind: SolverKind) -> &'static str {
    match kind {
        SolverKind::Three => "Theorem three-agent-EFX",
        SolverKind::Four => "Theorem 4_agent_main_result",
        SolverKind::TwoTypes => "Theorem two-valuations",
        _ => "Theorem n-2-charity",
    }
}

fn unallocated_bound(kind: SolverKind, agents: usize) -> usize {
    match kind {
        SolverKind::Three | SolverKind::TwoTypes => 0,
        SolverKind::Four => 1,
        _ => agents.saturating_sub(2),
    }
}

fn efx_violation(instance: &Instance, alloc: &Allocation) -> Option<String> {
    for i in 0..alloc.agents() {
        for j in 0..alloc.agents() {
            if i != j && alloc.strongly_envies(instance, i, alloc.bundles[j]) {
                return Some(format!(
                    "agent {} strongly envies agent {}",
                    instance.agent_name(i),
                    instance.agent_name(j)
                ));
            }
        }
    }
    None
}

/// Checks a final allocation against the guarantee of `kind` (already resolved).
pub fn allocation(instance: &Instance, alloc: &Allocation, kind: SolverKind) -> Verdict {
    let label = theorem(kind);
    alloc
        .validate(instance)
        .map_err(|e| format!("malformed allocation: {e}"))?;
    let mut passed = vec!["partition".to_string()];
    if let Some(why) = efx_violation(instance, alloc) {
        return Err(format!("not EFX: {why}: violates {label} postcondition"));
    }
    passed.push("EFX".into());
    let bound = unallocated_bound(kind, instance.agents());
    let left = alloc.unallocated.len();
    if left > bound {
        return Err(format!(
            "{left} unallocated items exceed {bound}: violates {label} postcondition"
        ));
    }
    passed.push(format!("unallocated {left} <= {bound}"));
    if alloc.charity_envied(instance) {
        return Err(format!("charity envied: violates {label} postcondition"));
    }
    passed.push("charity unenvied".into());
    Ok(passed)
}

/// Checks every step of a certificate, then its final allocation, then that
/// replay reproduces it.
pub fn certificate(instance: &Instance, cert: &Certificate) -> Verdict {
    let kind: SolverKind = cert
        .solver
        .parse()
        .map_err(|_| format!("certificate names unknown solver {:?}", cert.solver))?;
    if kind == SolverKind::Auto {
        return Err("certificate must name a concrete solver".into());
    }
    if efx_core::instance::validate_ordering(&cert.ordering, instance.agents()).is_err() {
        return Err(format!(
            "ordering {:?} is not a permutation of the agents",
            cert.ordering
        ));
    }
    cert.initial
        .validate(instance)
        .map_err(|e| format!("malformed initial allocation: {e}"))?;
    if let Some(why) = efx_violation(instance, &cert.initial) {
        return Err(format!("initial allocation not EFX: {why}"));
    }
    let mut current = &cert.initial;
    for (k, step) in cert.steps.iter().enumerate() {
        if &step.before != current {
            return Err(format!("step {k}: does not start where the previous step ended"));
        }
        step.after
            .validate(instance)
            .map_err(|e| format!("step {k}: malformed allocation: {e}"))?;
        if let Some(why) = efx_violation(instance, &step.after) {
            return Err(format!(
                "step {k}: not EFX: {why}: violates Lemma dominate-implies-progress"
            ));
        }
        if !dominates(instance, &step.after, &step.before, &cert.ordering) {
            return Err(format!(
                "step {k}: does not dominate its predecessor: violates Lemma dominate-implies-progress"
            ));
        }
        current = &step.after;
    }
    if &cert.final_allocation != current {
        return Err("final allocation differs from the last step".into());
    }
    let mut passed = vec![format!("{} steps EFX and dominating", cert.steps.len())];
    passed.extend(allocation(instance, &cert.final_allocation, kind)?);
    match replay(instance, cert) {
        Ok(final_alloc) if final_alloc == cert.final_allocation => passed.push("replay".into()),
        Ok(_) => return Err("replay reaches a different final allocation".into()),
        Err(e) => return Err(format!("replay failed: {e}")),
    }
    Ok(passed)
}
