use std::fmt::Write as _;

use pfl_core::field::speckle;
use pfl_core::hydro::{
    bogoliubov_group_velocity, bogoliubov_mu, coherence_g1, detect_vortices, dispersion_from_group_velocity,
    intensity_statistics, measure_group_velocity, sound_speed_scaling, structure_factor as sk, G1Method, GroupVelocity,
};
use pfl_core::rng::stream_rng;
use pfl_core::rng::streams;
use pfl_core::solver::{Propagator, StepPlan};
use pfl_core::{Complex64, Field2D};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::{fluid_setup, member_seed};
use crate::config::{
    fluid_speckle, uniform_fluid, InputSpec, NoiseSpec, ProbeSweep, RunConfig, ScalingSpec, SpeckleSpec, Units,
    VortexSpec,
};
use crate::output::Artifacts;
use crate::RunError;

fn ctx<T>(what: &str, r: pfl_core::Result<T>) -> Result<T, RunError> {
    r.map_err(|e| RunError::core(what, e))
}

pub fn propagate(cfg: &RunConfig, input: &InputSpec, out: &mut Artifacts) -> Result<Vec<String>, RunError> {
    let (grid, medium, spec) = fluid_setup(cfg, cfg.medium.as_ref().map_or(Ok(0.0), |m| m.required_length())?)?;
    let plan = cfg.plan()?.build(medium.length)?;
    let field = input.build(&grid, &medium, member_seed(cfg.seed, streams::SPECKLE, 0))?;
    let rec = ctx("propagation", Propagator::new(grid, &medium, plan).and_then(|mut p| p.run(&field)))?;

    out.snapshot("input.pfl", &field, 0.0)?;
    out.snapshot("output.pfl", &rec.field, plan.length())?;
    if out.emit().snapshots {
        for (i, s) in rec.snapshots.iter().enumerate() {
            out.snapshot(&format!("snapshot_{i:04}.pfl"), &s.field, s.z)?;
        }
    }
    out.density_pgm("input_density.pgm", &field)?;
    out.density_pgm("output_density.pgm", &rec.field)?;
    out.csv("power.csv", &rec.power_csv())?;
    out.text("metrics.txt", &rec.metrics_text())?;

    let p0 = rec.power.first().map_or(0.0, |p| p.1);
    let p1 = rec.power.last().map_or(0.0, |p| p.1);
    let mut lines = vec![
        format!("units = {}", spec.units.name()),
        format!("steps = {}", rec.metrics.n_steps),
        format!("power_in = {p0:e}"),
        format!("power_out = {p1:e}"),
        format!("max_phase_per_step = {:.4}", rec.metrics.max_phase_per_step),
    ];
    lines.extend(rec.metrics.warnings.iter().map(|w| format!("warning: {w}")));
    Ok(lines)
}

pub fn dispersion(cfg: &RunConfig, probe: &ProbeSweep, out: &mut Artifacts) -> Result<Vec<String>, RunError> {
    let length = cfg.medium.as_ref().map_or(Ok(0.0), |m| m.required_length())?;
    let (grid, medium, spec) = fluid_setup(cfg, length)?;
    let plan = cfg.plan()?.build(length)?;
    let unit = spec.units.tag();
    let background = ctx("background", uniform_fluid(&grid, probe.background, unit))?;
    let results: Vec<GroupVelocity> = probe
        .k
        .par_iter()
        .map(|&k| {
            ctx(
                &format!("group velocity at k = {k}"),
                measure_group_velocity(&background, &probe.config(k), &medium, &plan),
            )
        })
        .collect::<Result<_, _>>()?;

    let mass = medium.effective_mass();
    let mu = bogoliubov_mu(&medium, probe.background, unit);
    let mut csv = String::from("k,v_g,stderr,v_theory\n");
    for r in &results {
        let theory = bogoliubov_group_velocity(r.k_perp, mass, mu);
        let _ = writeln!(csv, "{:e},{:e},{:e},{:e}", r.k_perp, r.v_g, r.stderr, theory);
    }
    out.csv("group_velocity.csv", &csv)?;

    let mut lines = vec![format!("c_s_theory = {:e}", (mu / mass).sqrt())];
    let samples: Vec<(f64, f64)> = results.iter().map(|r| (r.k_perp, r.v_g)).collect();
    match dispersion_from_group_velocity(&samples, mass) {
        Ok(curve) => {
            out.csv("dispersion.csv", &curve.to_csv())?;
            lines.push(format!("c_s_fit = {:e} +/- {:e}", curve.c_s, curve.c_s_ci));
            lines.push(format!("xi_fit = {:e} +/- {:e}", curve.xi, curve.xi_ci));
        }
        Err(e) => lines.push(format!("fit skipped: {e}")),
    }
    Ok(lines)
}

pub fn sound_scaling(cfg: &RunConfig, s: &ScalingSpec, out: &mut Artifacts) -> Result<Vec<String>, RunError> {
    let (grid, medium, spec) = fluid_setup(cfg, 1.0)?;
    let r =
        ctx("sound-speed scaling", sound_speed_scaling(&grid, spec.units.tag(), &s.densities, &medium, &s.settings))?;
    out.csv("scaling.csv", &r.to_csv())?;
    Ok(vec![format!("exponent = {:.4} +/- {:.4}", r.exponent, r.exponent_ci)])
}

pub fn precondensation(cfg: &RunConfig, s: &SpeckleSpec, out: &mut Artifacts) -> Result<Vec<String>, RunError> {
    let (grid, medium, spec) = fluid_setup(cfg, 1.0)?;
    let inputs: Vec<Field2D> = (0..s.members as u64)
        .map(|m| {
            let seed = member_seed(cfg.seed, streams::ENSEMBLE_SIGNAL, m);
            match spec.units {
                Units::Dimensionless => fluid_speckle(&grid, s.correlation, s.mean, seed),
                Units::Physical => speckle(&grid, s.correlation, s.mean, medium.n0, seed),
            }
        })
        .collect::<pfl_core::Result<_>>()
        .map_err(|e| RunError::core("speckle", e))?;

    // every member is carried through the listed lengths in turn
    let stages: Vec<Vec<Field2D>> = inputs
        .par_iter()
        .map(|f0| {
            let mut z = 0.0;
            let mut f = f0.clone();
            let mut kept = Vec::with_capacity(s.lengths.len());
            for &l in &s.lengths {
                let n = s.steps(l - z);
                let m = ctx("medium", medium.clone().with_length(l - z))?;
                let plan = ctx("plan", StepPlan::new(l - z, n))?;
                f = ctx(&format!("propagation to {l}"), Propagator::new(grid, &m, plan).and_then(|mut p| p.run(&f)))?
                    .field;
                z = l;
                kept.push(f.clone());
            }
            Ok(kept)
        })
        .collect::<Result<_, RunError>>()?;

    let method = if s.members >= 2 { G1Method::Ensemble } else { G1Method::RotatePair };
    let mut table = String::from("length,g2,mode\n");
    let mut lines = Vec::new();
    let at = |i: usize| -> Vec<Field2D> {
        if i == 0 {
            inputs.clone()
        } else {
            stages.iter().map(|m| m[i - 1].clone()).collect()
        }
    };
    for i in 0..=s.lengths.len() {
        let fields = at(i);
        let length = if i == 0 { 0.0 } else { s.lengths[i - 1] };
        let stats = ctx("intensity statistics", intensity_statistics(&fields, medium.n0, s.bins, s.max_ratio))?;
        let g1 = ctx("coherence", coherence_g1(&fields, method, s.g1_bins))?;
        let _ = writeln!(table, "{length:e},{:e},{:e}", stats.g2, stats.mode);
        out.csv(&format!("pdf_{i:02}.csv"), &stats.to_csv())?;
        out.csv(&format!("g1_{i:02}.csv"), &g1.to_csv())?;
        out.density_pgm(&format!("density_{i:02}.pgm"), &fields[0])?;
        lines.push(format!("length = {length}: g2 = {:.4}, mode = {:.4}", stats.g2, stats.mode));
    }
    out.csv("statistics.csv", &table)?;
    Ok(lines)
}

/// Uniform fluid times `1 + σ(a + ib)` with independent standard normal `a`, `b` per cell.
fn noisy_member(
    grid: &pfl_core::Grid,
    unit: pfl_core::UnitTag,
    n: &NoiseSpec,
    seed: u64,
    index: u64,
) -> pfl_core::Result<Field2D> {
    let mut rng = stream_rng(seed, streams::ENSEMBLE_SIGNAL + index);
    let amp = n.background.sqrt();
    let values = (0..grid.len())
        .map(|_| {
            let a: f64 = StandardNormal.sample(&mut rng);
            let b: f64 = StandardNormal.sample(&mut rng);
            amp * Complex64::new(1.0 + n.sigma * a, n.sigma * b)
        })
        .collect();
    Field2D::new(*grid, values, unit)
}

pub fn structure_factor(cfg: &RunConfig, n: &NoiseSpec, out: &mut Artifacts) -> Result<Vec<String>, RunError> {
    let length = cfg.medium.as_ref().map_or(Ok(0.0), |m| m.required_length())?;
    let (grid, medium, spec) = fluid_setup(cfg, length)?;
    let plan = cfg.plan()?.build(length)?;
    let unit = spec.units.tag();
    let pairs: Vec<(Field2D, Field2D)> = (0..n.members as u64)
        .into_par_iter()
        .map(|m| {
            let input = ctx("noise", noisy_member(&grid, unit, n, cfg.seed, m))?;
            let output =
                ctx("propagation", Propagator::new(grid, &medium, plan).and_then(|mut p| p.run(&input)))?.field;
            Ok((output, input))
        })
        .collect::<Result<_, RunError>>()?;
    let (signal, reference): (Vec<Field2D>, Vec<Field2D>) = pairs.into_iter().unzip();
    let sf = ctx("structure factor", sk(&signal, &reference, n.bins))?;
    out.csv("structure_factor.csv", &sf.to_csv())?;
    let below = sf.s.iter().zip(&sf.stderr).filter(|(s, e)| **s + 3.0 * **e < 1.0).count();
    Ok(vec![
        format!("members = {}", n.members),
        format!("S(k_min) = {:.4} +/- {:.4} at k = {:e}", sf.s[0], sf.stderr[0], sf.k[0]),
        format!("bins below 1 (3 sigma) = {below} of {}", sf.s.len()),
    ])
}

pub fn vortices(cfg: &RunConfig, v: &VortexSpec, out: &mut Artifacts) -> Result<Vec<String>, RunError> {
    let length = cfg.medium.as_ref().map_or(Ok(0.0), |m| m.required_length())?;
    let (grid, medium, spec) = fluid_setup(cfg, length)?;
    let plan = cfg.plan()?.build(length)?;
    let field = v.build(&grid, spec.units)?;
    let rec = ctx("propagation", Propagator::new(grid, &medium, plan).and_then(|mut p| p.run(&field)))?;
    let set = detect_vortices(&rec.field, v.floor * v.background);
    let clusters = set.clusters();

    out.csv("vortices.csv", &set.to_csv())?;
    let mut csv = String::from("x,y,charge,plaquettes\n");
    for c in &clusters {
        let _ = writeln!(csv, "{:e},{:e},{},{}", c.x, c.y, c.charge, c.plaquettes);
    }
    out.csv("clusters.csv", &csv)?;
    out.density_pgm("density.pgm", &rec.field)?;
    if out.emit().snapshots {
        out.snapshot("output.pfl", &rec.field, plan.length())?;
    }
    let imprinted: i64 = v.charges.iter().map(|&q| q as i64).sum();
    Ok(vec![
        format!("plaquette_vortices = {}", set.len()),
        format!("clusters = {}", clusters.len()),
        format!("total_winding = {}", set.total_winding()),
        format!("imprinted_winding = {imprinted}"),
    ])
}
