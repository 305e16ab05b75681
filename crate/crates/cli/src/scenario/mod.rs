//! One runner per scenario. Each writes its artifacts and returns summary lines.

mod fluid;
mod memory;

use pfl_core::rng::stream_rng;
use pfl_core::{Grid, MediumParams};
use rand::Rng;

use crate::config::{MediumSpec, Params, RunConfig};
use crate::output::Artifacts;
use crate::RunError;

pub fn run_scenario(cfg: &RunConfig, out: &mut Artifacts) -> Result<Vec<String>, RunError> {
    let mut summary = vec![format!("scenario = {}", cfg.scenario), format!("seed = {}", cfg.seed)];
    let lines = match &cfg.params {
        Params::Propagate(input) => fluid::propagate(cfg, input, out)?,
        Params::Dispersion(probe) => fluid::dispersion(cfg, probe, out)?,
        Params::SoundScaling(s) => fluid::sound_scaling(cfg, s, out)?,
        Params::Precondensation(s) => fluid::precondensation(cfg, s, out)?,
        Params::StructureFactor(n) => fluid::structure_factor(cfg, n, out)?,
        Params::Vortices(v) => fluid::vortices(cfg, v, out)?,
        Params::Gem(g, p) => memory::gem(g, p, out)?,
        Params::GemEfficiencySweep(g, s) => memory::sweep(g, s, out)?,
        Params::FifoFilo(g, p, o) => memory::fifo_filo(g, p, o, out)?,
    };
    summary.extend(lines);
    Ok(summary)
}

/// Seed for ensemble member `index` on `stream`: the first word of that
/// counter-based stream, so members never share a generator.
pub(crate) fn member_seed(seed: u64, stream: u64, index: u64) -> u64 {
    stream_rng(seed, stream + index).random()
}

/// Grid and medium (with any potential attached) for fluid scenarios.
pub(crate) fn fluid_setup(cfg: &RunConfig, length: f64) -> Result<(Grid, MediumParams, &MediumSpec), RunError> {
    let grid_spec = cfg.grid.as_ref().expect("fluid scenarios declare [grid]");
    let spec = cfg.medium.as_ref().expect("fluid scenarios declare [medium]");
    let grid = grid_spec.build()?;
    let mut medium = spec.build(length)?;
    if let Some(p) = &cfg.potential {
        medium = medium.with_potential(p.build(&grid, spec.units)?);
    }
    Ok((grid, medium, spec))
}
