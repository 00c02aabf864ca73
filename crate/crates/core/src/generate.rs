//! Seeded random instance generation.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::valuation::ValuationDescriptor;

/// Which valuation classes a generated instance draws from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassMix {
    Additive,
    UnitDemand,
    BudgetAdditive,
    Multiplicative,
    /// Each agent independently picks one of the four classes.
    Mixed,
    /// Exactly two distinct descriptors shared among the agents.
    TwoType,
}

impl ClassMix {
    pub const ALL: [ClassMix; 6] = [
        ClassMix::Additive,
        ClassMix::UnitDemand,
        ClassMix::BudgetAdditive,
        ClassMix::Multiplicative,
        ClassMix::Mixed,
        ClassMix::TwoType,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClassMix::Additive => "additive",
            ClassMix::UnitDemand => "unit_demand",
            ClassMix::BudgetAdditive => "budget_additive",
            ClassMix::Multiplicative => "multiplicative",
            ClassMix::Mixed => "mixed",
            ClassMix::TwoType => "two_type",
        }
    }
}

impl fmt::Display for ClassMix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClassMix {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ClassMix::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Argument(format!("unknown class mix '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub agents: usize,
    pub items: usize,
    pub class: ClassMix,
    pub max_value: u64,
}

pub fn generate(config: &GeneratorConfig) -> Result<Instance> {
    if config.agents == 0 || config.max_value == 0 {
        return Err(Error::Argument("agent count and value bound must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let descriptors = match config.class {
        ClassMix::TwoType => two_types(&mut rng, config),
        ClassMix::Mixed => (0..config.agents)
            .map(|_| {
                let class = *[
                    ClassMix::Additive,
                    ClassMix::UnitDemand,
                    ClassMix::BudgetAdditive,
                    ClassMix::Multiplicative,
                ]
                .choose(&mut rng)
                .expect("nonempty");
                descriptor(&mut rng, class, config.items, config.max_value)
            })
            .collect(),
        class => (0..config.agents)
            .map(|_| descriptor(&mut rng, class, config.items, config.max_value))
            .collect(),
    };
    Instance::new(config.items, descriptors)
}

fn two_types(rng: &mut ChaCha8Rng, config: &GeneratorConfig) -> Vec<ValuationDescriptor> {
    let classes = [
        ClassMix::Additive,
        ClassMix::UnitDemand,
        ClassMix::BudgetAdditive,
        ClassMix::Multiplicative,
    ];
    let draw = |rng: &mut ChaCha8Rng| {
        let class = *classes.choose(rng).expect("nonempty");
        descriptor(rng, class, config.items, config.max_value)
    };
    let first = draw(rng);
    let mut second = draw(rng);
    let mut attempts = 0;
    while second == first && attempts < 100 {
        second = draw(rng);
        attempts += 1;
    }
    if second == first {
        // Tiny universes can make collisions likely; force a difference.
        second = ValuationDescriptor::Additive {
            values: vec![config.max_value; config.items],
        };
        if second == first {
            second = ValuationDescriptor::UnitDemand {
                values: vec![config.max_value; config.items],
            };
        }
    }
    let n = config.agents;
    let mut types: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
    if n >= 2 {
        types[0] = false;
        types[1] = true;
        types.shuffle(rng);
    }
    types
        .into_iter()
        .map(|t| if t { second.clone() } else { first.clone() })
        .collect()
}

fn descriptor(rng: &mut ChaCha8Rng, class: ClassMix, m: usize, bound: u64) -> ValuationDescriptor {
    let mut values = |low: u64| -> Vec<u64> { (0..m).map(|_| rng.gen_range(low..=bound)).collect() };
    match class {
        ClassMix::Additive => ValuationDescriptor::Additive { values: values(0) },
        ClassMix::UnitDemand => ValuationDescriptor::UnitDemand { values: values(0) },
        ClassMix::Multiplicative => ValuationDescriptor::Multiplicative { values: values(1) },
        ClassMix::BudgetAdditive => {
            let values = values(0);
            let total: u64 = values.iter().sum();
            let budget = rng.gen_range(1..=total.max(1));
            ValuationDescriptor::BudgetAdditive { values, budget }
        }
        ClassMix::Mixed | ClassMix::TwoType => unreachable!("resolved by the caller"),
    }
}
