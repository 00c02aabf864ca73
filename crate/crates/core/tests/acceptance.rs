//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::time::{Duration, Instant};

use efx_core::champion::{apply_pi, audit_graph, generalized_edge as generalized, to_dot, AuditCounts, BasicGraph};
use efx_core::oracle::{enumerate_efx, is_efx_independent, max_subset_of_size};
use efx_core::{
    check_cancelable, check_cancelable_by, fixtures, generate, pareto_dominates, replay, solve, solve_from, ClassMix,
    Construction, GeneratorConfig, Instance, ItemSet, SolverKind, SolverOptions, SolverReport, StepKind, Valuation,
    ValuationDescriptor,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FOUR_INSTANCES: u64 = 500;
const FOUR_TIME_LIMIT: Duration = Duration::from_secs(60);
const N2_INSTANCES: u64 = 500;
const N2_TIME_LIMIT: Duration = Duration::from_secs(60);
const RING_SWEEP_SEEDS: u64 = 300;
const THREE_INSTANCES: u64 = 500;
const THREE_TIME_LIMIT: Duration = Duration::from_secs(120);
const TWO_TYPE_INSTANCES: u64 = 300;
const MAX_VALUE: u64 = 20;
const PROXY_DESCRIPTORS_PER_CLASS: usize = 40;
const TRIM_CASES: usize = 200;
const MIN_PI_SETS: usize = 1000;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

struct Run {
    instance: Instance,
    kind: SolverKind,
    report: SolverReport,
}

struct Batch {
    runs: Vec<Run>,
    errors: Vec<String>,
    elapsed: Duration,
}

fn run_batch(count: u64, seed_base: u64, kind: SolverKind, shape: impl Fn(u64) -> (usize, usize, ClassMix)) -> Batch {
    let options = SolverOptions {
        audit: true,
        ..SolverOptions::default()
    };
    let start = Instant::now();
    let mut runs = Vec::new();
    let mut errors = Vec::new();
    for i in 0..count {
        let seed = seed_base + i;
        let (agents, items, class) = shape(seed);
        let instance = generate(&GeneratorConfig {
            seed,
            agents,
            items,
            class,
            max_value: MAX_VALUE,
        })
        .expect("generator output is valid");
        match solve(&instance, kind, None, &options) {
            Ok(report) => runs.push(Run { instance, kind, report }),
            Err(e) => errors.push(format!("seed {seed}: {e}")),
        }
    }
    Batch {
        runs,
        errors,
        elapsed: start.elapsed(),
    }
}

/// Every recorded step is EFX and dominating, both as flagged and as re-checked.
fn steps_sound(run: &Run) -> bool {
    run.report.certificate.steps.iter().all(|s| {
        s.efx_after
            && s.dominates
            && s.after.is_efx(&run.instance)
            && efx_core::dominates(&run.instance, &s.after, &s.before, &run.report.certificate.ordering)
    })
}

fn first_errors(errors: &[String]) -> String {
    if errors.is_empty() {
        return String::new();
    }
    format!(" [{}]", errors.iter().take(3).cloned().collect::<Vec<_>>().join("; "))
}

fn criterion_four(batch: &Batch) -> Outcome {
    let bad: Vec<_> = batch
        .runs
        .iter()
        .filter(|r| r.report.unallocated > 1 || r.report.charity_envied || !steps_sound(r))
        .collect();
    let ef_fallbacks: u64 = batch.runs.iter().map(|r| r.report.diagnostics.ef_fallbacks).sum();
    let ef_steps: u64 = batch.runs.iter().map(|r| r.report.diagnostics.envy_free_steps).sum();
    let fallback_steps: u64 = batch.runs.iter().map(|r| r.report.diagnostics.fallback_steps).sum();
    let total_steps: usize = batch.runs.iter().map(|r| r.report.steps).sum();
    let with_fallback = batch.runs.iter().filter(|r| r.report.fallback_used).count();
    let pass = batch.errors.is_empty() && bad.is_empty() && ef_fallbacks == 0 && batch.elapsed <= FOUR_TIME_LIMIT;
    outcome(
        pass,
        format!(
            "{} instances, {} bad, {} errors{}; envy-free steps {ef_steps} with {ef_fallbacks} fallbacks; \
             overall fallback rate {fallback_steps}/{total_steps} steps, {with_fallback} instances; {:.2?} (limit {:?})",
            batch.runs.len(),
            bad.len(),
            batch.errors.len(),
            first_errors(&batch.errors),
            batch.elapsed,
            FOUR_TIME_LIMIT
        ),
    )
}

/// With m <= 8 and n >= 5 the rings stage cannot arm: an unenvied pool of
/// n-1 goods needs every agent to hold a nonempty bundle. Two-agent EFX
/// starts with one unenvied pool good reach it.
fn ring_sweep() -> (u64, u64, u64, u64, Vec<String>) {
    let options = SolverOptions::default();
    let (mut starts, mut checks, mut violations, mut built) = (0, 0, 0, 0);
    let mut errors = Vec::new();
    for seed in 0..RING_SWEEP_SEEDS {
        let instance = generate(&GeneratorConfig {
            seed,
            agents: 2,
            items: 6,
            class: ClassMix::Mixed,
            max_value: MAX_VALUE,
        })
        .expect("generator output is valid");
        let states = enumerate_efx(&instance, 6, u128::MAX).expect("small instance");
        for state in states {
            if state.unallocated.len() != 1 || state.charity_envied(&instance) {
                continue;
            }
            starts += 1;
            match solve_from(&instance, SolverKind::N2, None, &options, state) {
                Ok(r) if r.unallocated == 0 && !r.charity_envied => {
                    checks += r.diagnostics.rings_checks;
                    violations += r.diagnostics.rings_violations;
                    built += r.diagnostics.ring_constructions;
                }
                Ok(_) => errors.push(format!("seed {seed}: postcondition fails")),
                Err(e) => errors.push(format!("seed {seed}: {e}")),
            }
        }
    }
    (starts, checks, violations, built, errors)
}

fn criterion_n2(batch: &Batch) -> Outcome {
    let bad = batch
        .runs
        .iter()
        .filter(|r| {
            let n = r.instance.agents();
            r.report.unallocated > n - 2 || r.report.charity_envied || !steps_sound(r)
        })
        .count();
    let rings_checks: u64 = batch.runs.iter().map(|r| r.report.diagnostics.rings_checks).sum();
    let rings_violations: u64 = batch.runs.iter().map(|r| r.report.diagnostics.rings_violations).sum();
    let (starts, sweep_checks, sweep_violations, sweep_built, sweep_errors) = ring_sweep();
    let pass = batch.errors.is_empty()
        && bad == 0
        && rings_violations == 0
        && batch.elapsed <= N2_TIME_LIMIT
        && sweep_errors.is_empty()
        && sweep_violations == 0
        && sweep_checks > 0;
    outcome(
        pass,
        format!(
            "{} instances, {bad} bad, {} errors{}; parallel-rings checks {rings_checks}, violations {rings_violations}; \
             {:.2?} (limit {:?}); two-agent sweep: {starts} starts, rings checks {sweep_checks}, violations \
             {sweep_violations}, ring constructions {sweep_built}, {} errors{}",
            batch.runs.len(),
            batch.errors.len(),
            first_errors(&batch.errors),
            batch.elapsed,
            N2_TIME_LIMIT,
            sweep_errors.len(),
            first_errors(&sweep_errors)
        ),
    )
}

fn criterion_three(batch: &Batch) -> Outcome {
    let start = Instant::now();
    let mut bad = 0;
    for r in &batch.runs {
        let alloc = &r.report.allocation;
        let confirmed = is_efx_independent(&r.instance, &alloc.bundles)
            && enumerate_efx(&r.instance, 0, u128::MAX)
                .map(|all| all.contains(alloc))
                .unwrap_or(false);
        if r.report.unallocated != 0 || !confirmed || !steps_sound(r) {
            bad += 1;
        }
    }
    let elapsed = batch.elapsed + start.elapsed();
    let fallback_steps: u64 = batch.runs.iter().map(|r| r.report.diagnostics.fallback_steps).sum();
    let pass = batch.errors.is_empty() && bad == 0 && elapsed <= THREE_TIME_LIMIT;
    outcome(
        pass,
        format!(
            "{} instances, {bad} bad, {} errors{}; fallback steps {fallback_steps}; {:.2?} incl. oracle (limit {:?})",
            batch.runs.len(),
            batch.errors.len(),
            first_errors(&batch.errors),
            elapsed,
            THREE_TIME_LIMIT
        ),
    )
}

fn criterion_two_types(batch: &Batch) -> Outcome {
    let bad = batch
        .runs
        .iter()
        .filter(|r| r.report.unallocated != 0 || !steps_sound(r) || r.instance.distinct_descriptors() != 2)
        .count();
    let checks: u64 = batch.runs.iter().map(|r| r.report.diagnostics.backward_checks).sum();
    let violations: u64 = batch
        .runs
        .iter()
        .map(|r| r.report.diagnostics.backward_violations)
        .sum();
    let pass = batch.errors.is_empty() && bad == 0 && violations == 0 && checks > 0;
    outcome(
        pass,
        format!(
            "{} instances, {bad} bad, {} errors{}; backward-propagation checks {checks}, violations {violations}; {:.2?}",
            batch.runs.len(),
            batch.errors.len(),
            first_errors(&batch.errors),
            batch.elapsed
        ),
    )
}

fn random_descriptor(rng: &mut ChaCha8Rng, kind: &str, m: usize) -> ValuationDescriptor {
    let low = if kind == "multiplicative" { 1 } else { 0 };
    let values: Vec<u64> = (0..m).map(|_| rng.gen_range(low..=MAX_VALUE)).collect();
    match kind {
        "additive" => ValuationDescriptor::Additive { values },
        "unit_demand" => ValuationDescriptor::UnitDemand { values },
        "budget_additive" => {
            let total: u64 = values.iter().sum();
            let budget = rng.gen_range(1..=total.max(1));
            ValuationDescriptor::BudgetAdditive { values, budget }
        }
        "multiplicative" => ValuationDescriptor::Multiplicative { values },
        _ => {
            // A table given by the rank order of a random additive proxy.
            let base = Valuation::new(ValuationDescriptor::Additive { values }, m, 0).expect("valid");
            let table = (0..1u64 << m)
                .map(|mask| base.rank(ItemSet::from_bits(mask)).expect("dense") as u64)
                .collect();
            ValuationDescriptor::Table { table }
        }
    }
}

fn criterion_proxy() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checked = 0;
    let mut violations = Vec::new();
    for kind in ["additive", "unit_demand", "budget_additive", "multiplicative", "table"] {
        for i in 0..PROXY_DESCRIPTORS_PER_CLASS {
            let m = 1 + i % 6;
            let descriptor = random_descriptor(&mut rng, kind, m);
            let valuation = match Valuation::new(descriptor.clone(), m, 0) {
                Ok(v) => v,
                Err(e) => {
                    violations.push(format!("{kind}: rejected: {e}"));
                    continue;
                }
            };
            checked += 1;
            let all: Vec<ItemSet> = ItemSet::full(m).subsets().collect();
            let mut keys: Vec<_> = all.iter().map(|&s| valuation.key(s)).collect();
            keys.sort();
            if keys.windows(2).any(|w| w[0] == w[1]) {
                violations.push(format!("{kind} m={m}: degenerate keys"));
            }
            for &s in &all {
                for &t in &all {
                    if descriptor.value(s) > descriptor.value(t) && valuation.key(s) <= valuation.key(t) {
                        violations.push(format!("{kind} m={m}: key does not respect base value on {s} vs {t}"));
                    }
                }
            }
            if !check_cancelable_by(m, |s| valuation.key(s)).expect("small") {
                violations.push(format!("{kind} m={m}: key order not cancelable"));
            }
        }
    }
    outcome(
        violations.is_empty(),
        format!(
            "{checked} descriptors across 5 classes, {} violations{}",
            violations.len(),
            first_errors(&violations)
        ),
    )
}

fn criterion_trim() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let kinds = ["additive", "unit_demand", "budget_additive", "multiplicative", "table"];
    let mut mismatches = Vec::new();
    for case in 0..TRIM_CASES {
        let kind = kinds[case % kinds.len()];
        let m = if kind == "table" {
            rng.gen_range(1..=10)
        } else {
            rng.gen_range(1..=12)
        };
        let descriptor = random_descriptor(&mut rng, kind, m);
        let valuation = Valuation::new(descriptor, m, 0).expect("valid");
        let bundle = ItemSet::from_bits(rng.gen_range(0..1u64 << m));
        let bundle = if bundle.len() > 10 {
            bundle.iter().take(10).collect()
        } else {
            bundle
        };
        let k = rng.gen_range(0..=bundle.len());
        let greedy = valuation.trim_to_size(bundle, k).expect("k fits");
        let best = max_subset_of_size(&valuation, bundle, k).expect("small");
        if valuation.key(greedy) != valuation.key(best) {
            mismatches.push(format!("{kind} T={bundle} k={k}"));
        }
    }
    outcome(
        mismatches.is_empty(),
        format!(
            "{TRIM_CASES} cases, {} mismatches{}",
            mismatches.len(),
            first_errors(&mismatches)
        ),
    )
}

/// Audits every nonempty-pool EFX state of small instances, so that the rare
/// good cycles (and the observations tied to them) are reached.
fn sweep_efx_states() -> AuditCounts {
    let mut total = AuditCounts::default();
    for (agents, items, seeds, stride) in [(2, 6, 300, 1), (2, 8, 100, 1), (3, 7, 100, 3)] {
        for seed in 0..seeds {
            let class = ClassMix::ALL[(seed % 5) as usize];
            let instance = generate(&GeneratorConfig {
                seed,
                agents,
                items,
                class,
                max_value: MAX_VALUE,
            })
            .expect("generator output is valid");
            let states = enumerate_efx(&instance, items, u128::MAX).expect("small instance");
            for state in states.iter().filter(|a| !a.unallocated.is_empty()).step_by(stride) {
                let graph = BasicGraph::build(&instance, state);
                total += audit_graph(&instance, state, &graph);
            }
        }
    }
    total
}

fn criterion_observations(batches: &[&Batch]) -> Outcome {
    let mut total = AuditCounts::default();
    for batch in batches {
        for r in &batch.runs {
            total += r.report.diagnostics.audit;
        }
    }
    let solver_graphs = total.graphs;
    total += sweep_efx_states();
    let parts: Vec<String> = total
        .named()
        .iter()
        .map(|(name, t)| format!("{name} {}/{}", t.violations, t.checks))
        .collect();
    let all_exercised = total.named().iter().all(|(_, t)| t.checks > 0);
    outcome(
        total.total_violations() == 0 && total.discovery_failures == 0 && all_exercised,
        format!(
            "{solver_graphs} solver graphs + {} swept graphs; violations/checks: {}; discovery failures {}",
            total.graphs - solver_graphs,
            parts.join(", "),
            total.discovery_failures
        ),
    )
}

fn criterion_fixtures() -> Outcome {
    let mut failures = Vec::new();
    let inst = fixtures::table1();
    let alloc = fixtures::table1_allocation(&inst);
    if !alloc.is_efx(&inst) {
        failures.push("Table 1 allocation is not EFX".to_string());
    }
    let graph = BasicGraph::build(&inst, &alloc);
    let mut edges = graph.edges();
    let b_a: ItemSet = [0, 1].into_iter().collect();
    let e: ItemSet = [4].into_iter().collect();
    match generalized(&inst, &alloc, 2, b_a, e) {
        Ok(Some(edge)) => {
            if edge.source != 1 || edge.received(&alloc) != [0, 1, 5].into_iter().collect() {
                failures.push(format!("generalized edge is {edge}"));
            }
            edges.push(edge);
        }
        other => failures.push(format!("generalized edge missing: {other:?}")),
    }
    let dot = to_dot(&inst, &edges);
    for line in [
        "\"1\" -> \"2\" [style=solid]",
        "\"1\" -> \"2\" [style=dashed, label=\"g\"",
        "\"2\" -> \"1\" [style=dashed, label=\"g\"",
        "\"2\" -> \"3\" [style=dashed, label=\"g\"",
        "\"3\" -> \"1\" [style=dashed, label=\"g\"",
        "\"2\" -> \"3\" [style=dotted, label=\"{a,b}|{e}\"",
    ] {
        if !dot.contains(line) {
            failures.push(format!("DOT lacks {line}"));
        }
    }
    let table = fixtures::sm_not_tb_table();
    let descriptor = ValuationDescriptor::Table { table: table.clone() };
    if check_cancelable(&descriptor, 6) != Ok(true) {
        failures.push("sm-not-tb fixture is not cancelable".into());
    }
    let pair = |x: usize, y: usize| table[1 << x | 1 << y];
    let (a, b, c, d, e, f) = (0, 1, 2, 3, 4, 5);
    for (lhs, rhs, name) in [
        (pair(a, f), pair(b, e), "af<be"),
        (pair(d, e), pair(c, f), "de<cf"),
        (pair(b, c), pair(a, d), "bc<ad"),
    ] {
        if lhs >= rhs {
            failures.push(format!("sm-not-tb inequality {name} fails"));
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "Table 1 edges and sm-not-tb checks, {} failures{}",
            failures.len(),
            first_errors(&failures)
        ),
    )
}

fn criterion_pi(batches: &[&Batch]) -> Outcome {
    let mut applied = 0;
    let mut violations = Vec::new();
    let mut recorded_failures = 0;
    for batch in batches {
        for r in &batch.runs {
            recorded_failures += r.report.diagnostics.pi_apply_failures;
            for step in &r.report.certificate.steps {
                let Construction::PiEdgeSet { edges } = &step.construction else {
                    continue;
                };
                applied += 1;
                let inst = &r.instance;
                let recomputed = apply_pi(inst, &step.before, edges);
                let ok = recomputed.as_ref().is_ok_and(|y| y == &step.after)
                    && step.after.is_efx(inst)
                    && pareto_dominates(inst, &step.after, &step.before)
                    && edges.iter().all(|e| {
                        inst.valuation(e.source)
                            .less(step.before.bundles[e.source], step.after.bundles[e.source])
                    });
                if !ok {
                    violations.push(format!("{} solver", r.kind));
                }
            }
        }
    }
    outcome(
        applied >= MIN_PI_SETS && violations.is_empty() && recorded_failures == 0,
        format!(
            "{applied} applied PI sets (need {MIN_PI_SETS}), {} violations, {recorded_failures} failed applications during search",
            violations.len()
        ),
    )
}

fn criterion_replay(batches: &[&Batch]) -> Outcome {
    let options = SolverOptions {
        audit: true,
        ..SolverOptions::default()
    };
    let mut certificates = 0;
    let mut failures = Vec::new();
    for batch in batches {
        for r in &batch.runs {
            certificates += 1;
            let cert = &r.report.certificate;
            let expected = serde_json::to_vec(&cert.final_allocation).expect("serializes");
            match replay(&r.instance, cert) {
                Ok(final_alloc) => {
                    if serde_json::to_vec(&final_alloc).expect("serializes") != expected {
                        failures.push("replayed final differs".to_string());
                    }
                }
                Err(e) => failures.push(e.to_string()),
            }
            let parsed = efx_core::Certificate::parse(&cert.to_json());
            if parsed.as_ref().ok() != Some(cert) {
                failures.push("certificate JSON round trip differs".into());
            }
            match solve(&r.instance, r.kind, Some(cert.ordering.clone()), &options) {
                Ok(again) if again.certificate.to_json() == cert.to_json() => {}
                _ => failures.push("re-running the solver gives a different certificate".into()),
            }
            if cert
                .steps
                .iter()
                .any(|s| s.kind == StepKind::PiEdgeSet && s.construction == Construction::Fallback)
            {
                failures.push("mislabelled step".into());
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "{certificates} certificates, {} failures{}",
            failures.len(),
            first_errors(&failures)
        ),
    )
}

fn main() {
    let four = run_batch(FOUR_INSTANCES, 10_000, SolverKind::Four, |seed| {
        (4, 5 + (seed % 4) as usize, ClassMix::Mixed)
    });
    let n2 = run_batch(N2_INSTANCES, 20_000, SolverKind::N2, |seed| {
        (5 + (seed % 2) as usize, 1 + (seed % 8) as usize, ClassMix::Mixed)
    });
    let three = run_batch(THREE_INSTANCES, 30_000, SolverKind::Three, |seed| {
        (3, 1 + (seed % 7) as usize, ClassMix::Mixed)
    });
    let two = run_batch(TWO_TYPE_INSTANCES, 40_000, SolverKind::TwoTypes, |seed| {
        (2 + (seed % 4) as usize, 1 + (seed % 8) as usize, ClassMix::TwoType)
    });
    let all = [&four, &n2, &three, &two];
    let results = [
        ("1 four agents, at most one unallocated", criterion_four(&four)),
        ("2 n-2 charity", criterion_n2(&n2)),
        ("3 three agents, full EFX", criterion_three(&three)),
        ("4 two valuation types, full EFX", criterion_two_types(&two)),
        ("5 proxy valuations", criterion_proxy()),
        ("6 trim lemma", criterion_trim()),
        ("7 observation suite", criterion_observations(&all)),
        ("8 fixtures", criterion_fixtures()),
        ("9 PI soundness", criterion_pi(&all)),
        ("10 certificate replay", criterion_replay(&all)),
    ];
    let mut failed = 0;
    for (name, o) in &results {
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {name}: {verdict} ({})", o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
