use std::fmt::Write as _;

use pfl_core::gem::{fifo_filo_experiment, gem_efficiency_measured, gem_evolve, EfficiencyMeasurement, GemRun};
use rayon::prelude::*;

use crate::config::{GemSpec, OrderingSpec, PulseSpec, SweepSpec};
use crate::output::Artifacts;
use crate::RunError;

fn ctx<T>(what: &str, r: pfl_core::Result<T>) -> Result<T, RunError> {
    r.map_err(|e| RunError::core(what, e))
}

fn alpha_map(run: &GemRun, out: &mut Artifacts, name: &str) -> Result<(), RunError> {
    let st = &run.state;
    let data: Vec<f64> = st.alpha.iter().map(|a| a.norm()).collect();
    out.pgm(name, st.z.len(), st.times.len(), &data, "|alpha(z,t)|")
}

pub fn gem(g: &GemSpec, p: &PulseSpec, out: &mut Artifacts) -> Result<Vec<String>, RunError> {
    let cfg = g.build(None)?;
    let train = p.build(&cfg)?;
    let run = ctx("memory", gem_evolve(&cfg, &train))?;
    out.csv("input.csv", &run.input_csv())?;
    out.csv("output.csv", &run.output_csv())?;
    alpha_map(&run, out, "alpha.pgm")?;

    let e_in = run.input_energy();
    let mut lines = vec![format!("optical_depth = {:.4}", cfg.optical_depth()), format!("input_energy = {e_in:e}")];
    let mut edges = vec![0.0];
    edges.extend(cfg.gradient.flips.iter().copied());
    edges.push(cfg.t_extent);
    for w in edges.windows(2) {
        let e = run.output_energy(w[0], w[1]);
        lines.push(format!("output_energy[{}, {}] = {e:e} ({:.4} of input)", w[0], w[1], e / e_in));
    }
    Ok(lines)
}

pub fn sweep(g: &GemSpec, s: &SweepSpec, out: &mut Artifacts) -> Result<Vec<String>, RunError> {
    let points = s.configs(g)?;
    let results: Vec<(f64, EfficiencyMeasurement)> = points
        .par_iter()
        .map(|(ratio, cfg, pulse)| Ok((*ratio, ctx(&format!("ratio {ratio}"), gem_efficiency_measured(cfg, pulse))?)))
        .collect::<Result<_, RunError>>()?;
    let mut csv = String::from("ratio,sigma_theory,sigma_sim\n");
    let mut lines = Vec::new();
    for (ratio, m) in &results {
        let _ = writeln!(csv, "{ratio:e},{:e},{:e}", m.sigma_theory, m.sigma);
        lines.push(format!(
            "ratio = {ratio}: sigma_sim = {:.5}, sigma_theory = {:.5}, echo at {:.4} (predicted {:.4})",
            m.sigma, m.sigma_theory, m.echo_peak_time, m.predicted_echo_time
        ));
    }
    out.csv("efficiency.csv", &csv)?;
    Ok(lines)
}

pub fn fifo_filo(g: &GemSpec, p: &PulseSpec, o: &OrderingSpec, out: &mut Artifacts) -> Result<Vec<String>, RunError> {
    let cfg = g.build_unscheduled()?;
    let mut lines = Vec::new();
    for mode in o.modes()? {
        let scheduled = mode.apply(&cfg);
        let train = p.build(&scheduled)?;
        let r = ctx(mode.name(), fifo_filo_experiment(&cfg, &train, &mode))?;
        let tag = mode.name().to_lowercase();
        out.csv(&format!("peaks_{tag}.csv"), &r.peaks_csv())?;
        out.csv(&format!("output_{tag}.csv"), &r.run.output_csv())?;
        out.csv("input.csv", &r.run.input_csv())?;
        alpha_map(&r.run, out, &format!("alpha_{tag}.pgm"))?;
        let times: Vec<String> = r.peaks.iter().map(|p| format!("{} at {:.4}", p.label, p.time)).collect();
        lines.push(format!("{}: order = {}; {}", mode.name(), r.order().join(" "), times.join(", ")));
    }
    Ok(lines)
}
