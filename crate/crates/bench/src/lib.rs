//! Seeded instance corpora shared by the benchmarks.

use efx_core::{generate, ClassMix, GeneratorConfig, Instance};

/// `count` instances with seeds `0..count`, values at most 20.
pub fn corpus(agents: usize, items: usize, class: ClassMix, count: u64) -> Vec<Instance> {
    (0..count)
        .map(|seed| {
            generate(&GeneratorConfig {
                seed,
                agents,
                items,
                class,
                max_value: 20,
            })
            .expect("generator output is valid")
        })
        .collect()
}
