//! Full EFX for three agents.

use crate::champion::Stage;
use crate::error::Result;

use super::{stuck, Engine};

pub(crate) fn run(engine: &mut Engine) -> Result<()> {
    while !engine.alloc.unallocated.is_empty() {
        engine.check_step_limit()?;
        if engine.try_charity()? {
            continue;
        }
        let graph = engine.graph();
        let envy_free = graph.is_envy_free();
        let stages: &[Stage] = if envy_free {
            engine.diag.envy_free_steps += 1;
            &[Stage::Basic, Stage::Bottom]
        } else {
            &[Stage::Basic, Stage::Bottom, Stage::Released]
        };
        if engine.try_pi_stages(&graph, stages)? {
            continue;
        }
        if !envy_free && engine.try_candidates(engine.trim_swap_candidates())? {
            continue;
        }
        if envy_free {
            engine.diag.ef_fallbacks += 1;
        }
        if !engine.fallback()? {
            return Err(stuck("three", &engine.alloc));
        }
    }
    Ok(())
}
