//! Runs a solver from EFX starting allocations (not just the empty one) of
//! small seeded instances and totals its diagnostics.
//!
//! Usage: `stress [agents] [items] [seeds] [class] [solver]`

use efx_core::champion::AuditCounts;
use efx_core::oracle::enumerate_efx;
use efx_core::{generate, replay, solve_from, ClassMix, Diagnostics, GeneratorConfig, SolverKind, SolverOptions};

fn arg<T: std::str::FromStr>(args: &[String], i: usize, default: T) -> T {
    args.get(i).and_then(|s| s.parse().ok()).unwrap_or(default)
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let agents = arg(&args, 1, 4usize);
    let items = arg(&args, 2, 6usize);
    let seeds = arg(&args, 3, 20u64);
    let class = arg(&args, 4, ClassMix::Mixed);
    let kind = arg(&args, 5, SolverKind::Auto);
    // Charity-envied starts are resolved by the first charity fix, so only a
    // sample of them is kept.
    let min_pool = (agents.max(2) - 1).min(2);

    let mut total = Diagnostics::default();
    let mut audit = AuditCounts::default();
    let (mut runs, mut envy_free_starts, mut errors) = (0, 0, 0);
    for seed in 0..seeds {
        let instance = generate(&GeneratorConfig {
            seed,
            agents,
            items,
            class,
            max_value: 20,
        })
        .expect("generator output is valid");
        let starts = enumerate_efx(&instance, items, u128::MAX).expect("small instance");
        for (k, start) in starts.into_iter().enumerate() {
            if start.unallocated.len() < min_pool || (start.charity_envied(&instance) && k % 13 != 0) {
                continue;
            }
            runs += 1;
            envy_free_starts += start.is_ef(&instance) as u64;
            let options = SolverOptions {
                audit: k % 49 == 0,
                ..SolverOptions::default()
            };
            match solve_from(&instance, kind, None, &options, start) {
                Ok(report) => {
                    let d = report.diagnostics;
                    total.pi_applied += d.pi_applied;
                    total.pi_apply_failures += d.pi_apply_failures;
                    total.fallback_steps += d.fallback_steps;
                    total.ef_fallbacks += d.ef_fallbacks;
                    total.candidate_steps += d.candidate_steps;
                    total.structure_matches += d.structure_matches;
                    total.rings_checks += d.rings_checks;
                    total.rings_violations += d.rings_violations;
                    total.ring_constructions += d.ring_constructions;
                    total.backward_violations += d.backward_violations;
                    audit += d.audit;
                    if replay(&instance, &report.certificate).is_err() {
                        errors += 1;
                    }
                }
                Err(e) => {
                    errors += 1;
                    eprintln!("seed {seed}: {e}");
                }
            }
        }
    }
    println!("n={agents} m={items} runs={runs} envy_free_starts={envy_free_starts} errors={errors}");
    println!("{total:#?}");
    for (name, t) in audit.named() {
        println!("  {name}: {}/{}", t.violations, t.checks);
    }
}
