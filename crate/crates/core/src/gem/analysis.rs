use std::f64::consts::PI;
use std::fmt::Write as _;

use super::evolve::energy;
use super::{gem_evolve, CouplingSchedule, GemConfig, GemRun, GradientSchedule, Pulse, PulseTrain};
use crate::{Error, Result};

/// Closed-form storage-and-recall efficiency `σ = (1 - e^{-2πg𝒩/|η|})²`.
pub fn gem_efficiency_theory(g: f64, density: f64, eta: f64) -> Result<f64> {
    if eta == 0.0 || !eta.is_finite() {
        return Err(Error::param("gem.eta", "gradient slope must be non-zero"));
    }
    let root = -(-2.0 * PI * g * density / eta.abs()).exp_m1();
    Ok(root * root)
}

/// First time after `t_c` at which the gradient phase accumulated since
/// `t_c` returns to zero while the coupling is on.
pub fn predicted_echo_time(cfg: &GemConfig, t_c: f64) -> Option<f64> {
    let mut edges = vec![t_c];
    edges.extend(cfg.gradient.flips.iter().cloned().filter(|&f| f > t_c && f < cfg.t_extent));
    edges.push(cfg.t_extent);
    let mut phi = 0.0;
    for w in edges.windows(2) {
        let eta = cfg.gradient.eta_at(0.5 * (w[0] + w[1]));
        if eta != 0.0 && phi != 0.0 {
            let t = w[0] - phi / eta;
            if t > w[0] && t <= w[1] && cfg.coupling.is_on(t) {
                return Some(t);
            }
        }
        phi += eta * (w[1] - w[0]);
    }
    None
}

#[derive(Debug, Clone, PartialEq)]
pub struct EfficiencyMeasurement {
    pub sigma: f64,
    pub sigma_theory: f64,
    pub input_energy: f64,
    pub echo_energy: f64,
    /// Transmitted during the write stage.
    pub leak_energy: f64,
    pub leak_window: (f64, f64),
    pub echo_window: (f64, f64),
    pub echo_peak_time: f64,
    pub predicted_echo_time: f64,
    pub run: GemRun,
}

/// Stores `pulse`, flips the gradient at the first scheduled flip, and
/// returns the echo-to-input energy ratio.
///
/// The leakage window runs from 0 to the flip and the echo window from
/// the flip to the end of the run. Both must contain their pulse to 4σ.
pub fn gem_efficiency_measured(cfg: &GemConfig, pulse: &Pulse) -> Result<EfficiencyMeasurement> {
    let flip =
        *cfg.gradient.flips.first().ok_or_else(|| Error::param("gem.flips", "efficiency needs a gradient flip"))?;
    if pulse.center + 4.0 * pulse.width > flip {
        return Err(Error::param("gem.flips", "write pulse overlaps the echo window"));
    }
    let predicted = predicted_echo_time(cfg, pulse.center)
        .ok_or_else(|| Error::param("gem.t_extent", "no rephasing within the run"))?;
    if predicted - 4.0 * pulse.width < flip || predicted + 4.0 * pulse.width > cfg.t_extent {
        return Err(Error::param("gem.t_extent", "echo does not fit between the flip and the end of the run"));
    }
    let run = gem_evolve(cfg, &PulseTrain::single(pulse.clone()))?;
    let input_energy = run.input_energy();
    if !(input_energy > 0.0) {
        return Err(Error::Degenerate("input pulse carries no energy".into()));
    }
    let leak_window = (0.0, flip);
    let echo_window = (flip, cfg.t_extent);
    let echo_energy = run.output_energy(echo_window.0, echo_window.1);
    let leak_energy = run.output_energy(leak_window.0, leak_window.1);
    let peak = (0..run.t.len())
        .filter(|&n| run.t[n] >= flip)
        .max_by(|&a, &b| run.output[a].norm_sqr().total_cmp(&run.output[b].norm_sqr()))
        .unwrap_or(0);
    Ok(EfficiencyMeasurement {
        sigma: echo_energy / input_energy,
        sigma_theory: gem_efficiency_theory(cfg.g, cfg.density, cfg.gradient.initial)?,
        input_energy,
        echo_energy,
        leak_energy,
        leak_window,
        echo_window,
        echo_peak_time: run.t[peak],
        predicted_echo_time: predicted,
        run,
    })
}

/// Gradient and coupling schedules of the two reordering protocols.
#[derive(Debug, Clone, PartialEq)]
pub enum OrderingMode {
    /// One flip, coupling always on: last in, first out.
    Filo { flip: f64 },
    /// Flip, coupling off across the first rephasing, second flip, coupling
    /// back on: first in, first out.
    Fifo { flip: f64, off: (f64, f64), second_flip: f64 },
}

impl OrderingMode {
    pub fn name(&self) -> &'static str {
        match self {
            OrderingMode::Filo { .. } => "FILO",
            OrderingMode::Fifo { .. } => "FIFO",
        }
    }

    pub fn apply(&self, cfg: &GemConfig) -> GemConfig {
        let mut c = cfg.clone();
        let eta = cfg.gradient.initial;
        match *self {
            OrderingMode::Filo { flip } => {
                c.gradient = GradientSchedule::with_flips(eta, vec![flip]);
                c.coupling = CouplingSchedule::always_on();
            }
            OrderingMode::Fifo { flip, off, second_flip } => {
                c.gradient = GradientSchedule::with_flips(eta, vec![flip, second_flip]);
                c.coupling = CouplingSchedule::windows(vec![(0.0, off.0), (off.1, cfg.t_extent)]);
            }
        }
        c
    }

    fn recall_start(&self) -> f64 {
        match *self {
            OrderingMode::Filo { flip } | OrderingMode::Fifo { flip, .. } => flip,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectedPeak {
    pub time: f64,
    pub height: f64,
    pub label: String,
    pub predicted: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderingResult {
    pub mode: &'static str,
    /// Sorted by time.
    pub peaks: Vec<DetectedPeak>,
    pub run: GemRun,
}

impl OrderingResult {
    pub fn order(&self) -> Vec<&str> {
        self.peaks.iter().map(|p| p.label.as_str()).collect()
    }

    pub fn peaks_csv(&self) -> String {
        let mut s = String::from("label,time,predicted,height\n");
        for p in &self.peaks {
            let _ = writeln!(s, "{},{:e},{:e},{:e}", p.label, p.time, p.predicted, p.height);
        }
        s
    }
}

/// Runs a two-pulse storage with the chosen protocol and labels the
/// recalled peaks by their rephasing times.
///
/// Labels come from timing alone: each detected peak is matched to the
/// closest predicted rephasing time, so identical pulses are handled.
pub fn fifo_filo_experiment(cfg: &GemConfig, train: &PulseTrain, mode: &OrderingMode) -> Result<OrderingResult> {
    if train.pulses.len() != 2 {
        return Err(Error::param("pulses", "the reordering experiment stores exactly two pulses"));
    }
    let (a, b) = (&train.pulses[0], &train.pulses[1]);
    let width = a.width.max(b.width);
    if (b.center - a.center).abs() < 4.0 * width {
        return Err(Error::param("pulses", "pulses must be separated by at least four widths"));
    }
    let cfg = mode.apply(cfg);
    let predicted: Vec<f64> = train
        .pulses
        .iter()
        .map(|p| {
            predicted_echo_time(&cfg, p.center)
                .ok_or_else(|| Error::param("gem.t_extent", format!("pulse {} is never recalled", p.label)))
        })
        .collect::<Result<_>>()?;
    let run = gem_evolve(&cfg, train)?;
    let start = mode.recall_start();
    let intensity: Vec<f64> = run.output.iter().map(|e| e.norm_sqr()).collect();
    let top = (0..run.t.len()).filter(|&n| run.t[n] >= start).map(|n| intensity[n]).fold(0.0, f64::max);
    let mut maxima: Vec<usize> = (1..run.t.len() - 1)
        .filter(|&n| run.t[n] >= start)
        .filter(|&n| intensity[n] >= 0.1 * top && intensity[n] >= intensity[n - 1] && intensity[n] > intensity[n + 1])
        .collect();
    // keep the tallest maximum within two pulse widths
    maxima.sort_by(|&x, &y| intensity[y].total_cmp(&intensity[x]));
    let mut kept: Vec<usize> = Vec::new();
    for m in maxima {
        if kept.iter().all(|&k| (run.t[k] - run.t[m]).abs() > 2.0 * width) {
            kept.push(m);
        }
    }
    if kept.len() < 2 {
        return Err(Error::Measurement(format!("{} recall: peaks not separable at the output", mode.name())));
    }
    kept.truncate(2);
    kept.sort_unstable();
    // assign labels by the cheaper of the two pairings
    let cost = |i: usize, j: usize| (run.t[kept[0]] - predicted[i]).abs() + (run.t[kept[1]] - predicted[j]).abs();
    let pairing = if cost(0, 1) <= cost(1, 0) { [0, 1] } else { [1, 0] };
    let peaks = kept
        .iter()
        .zip(pairing)
        .map(|(&n, p)| DetectedPeak {
            time: run.t[n],
            height: intensity[n],
            label: train.pulses[p].label.clone(),
            predicted: predicted[p],
        })
        .collect();
    Ok(OrderingResult { mode: mode.name(), peaks, run })
}

/// `energy` over a window of any trace.
pub fn trace_energy(t: &[f64], e: &[num_complex::Complex64], t0: f64, t1: f64) -> f64 {
    energy(t, e, t0, t1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_values() {
        assert_eq!(gem_efficiency_theory(0.0, 3.0, 1.0).unwrap(), 0.0);
        let s = gem_efficiency_theory(1.0 / (2.0 * PI), 1.0, 1.0).unwrap();
        assert!((s.sqrt() - 0.632120558).abs() < 1e-9);
        assert!((s - 0.399576).abs() < 1e-6);
        assert!((gem_efficiency_theory(100.0, 1.0, 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(gem_efficiency_theory(1.0, 1.0, 0.0).is_err());
        assert_eq!(gem_efficiency_theory(1.0, 1.0, -2.0).unwrap(), gem_efficiency_theory(1.0, 1.0, 2.0).unwrap());
    }

    #[test]
    fn rephasing_arithmetic() {
        let mut cfg = GemConfig::new(1.0, 1.0, 40.0, 2.0, 10.0);
        cfg.gradient = GradientSchedule::with_flips(40.0, vec![3.0]);
        assert!((predicted_echo_time(&cfg, 1.0).unwrap() - 5.0).abs() < 1e-12);
        assert!((predicted_echo_time(&cfg, 2.0).unwrap() - 4.0).abs() < 1e-12);
        let fifo = OrderingMode::Fifo { flip: 3.0, off: (3.2, 6.5), second_flip: 6.0 }.apply(&cfg);
        assert!((predicted_echo_time(&fifo, 1.0).unwrap() - 7.0).abs() < 1e-12);
        assert!((predicted_echo_time(&fifo, 2.0).unwrap() - 8.0).abs() < 1e-12);
    }
}
