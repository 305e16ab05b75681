//! One-dimensional gradient echo memory.
//!
//! In normalised units the atomic coherence `α(z,t)` and the co-moving
//! field envelope `E(z,t)` obey
//!
//! ```text
//! ∂α/∂t = -iη(t)·z·α + i·g·c(t)·E
//! ∂E/∂z = i·𝒩·c(t)·α
//! ```
//!
//! on `z ∈ [-Z/2, Z/2]`, with a gradient slope `η(t)` that changes sign at
//! listed flip times and a coupling gate `c(t) ∈ {0, 1}` standing in for
//! the Raman control beam.

mod analysis;
mod evolve;

pub use analysis::{
    fifo_filo_experiment, gem_efficiency_measured, gem_efficiency_theory, predicted_echo_time, trace_energy,
    DetectedPeak, EfficiencyMeasurement, OrderingMode, OrderingResult,
};
pub use evolve::{gem_evolve, GemRun, GemState};

use crate::{Error, Result};

/// Piecewise-constant gradient slope: `initial` until the first flip, then
/// the sign alternates at every flip time.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSchedule {
    pub initial: f64,
    pub flips: Vec<f64>,
}

impl GradientSchedule {
    pub fn constant(eta: f64) -> Self {
        GradientSchedule { initial: eta, flips: Vec::new() }
    }

    pub fn with_flips(eta: f64, flips: Vec<f64>) -> Self {
        GradientSchedule { initial: eta, flips }
    }

    pub fn eta_at(&self, t: f64) -> f64 {
        let n = self.flips.iter().filter(|&&f| f <= t).count();
        if n % 2 == 0 {
            self.initial
        } else {
            -self.initial
        }
    }

    /// `∫_{t0}^{t1} η dt`, exact for the piecewise-constant profile.
    pub fn integral(&self, t0: f64, t1: f64) -> f64 {
        let mut edges = vec![t0];
        edges.extend(self.flips.iter().cloned().filter(|&f| f > t0 && f < t1));
        edges.push(t1);
        edges.windows(2).map(|w| self.eta_at(0.5 * (w[0] + w[1])) * (w[1] - w[0])).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.initial.abs()
    }
}

/// Coupling windows `[on, off)`; `None` means always on.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CouplingSchedule {
    pub windows: Option<Vec<(f64, f64)>>,
}

impl CouplingSchedule {
    pub fn always_on() -> Self {
        CouplingSchedule { windows: None }
    }

    pub fn windows(windows: Vec<(f64, f64)>) -> Self {
        CouplingSchedule { windows: Some(windows) }
    }

    pub fn is_on(&self, t: f64) -> bool {
        match &self.windows {
            None => true,
            Some(w) => w.iter().any(|&(a, b)| t >= a && t < b),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GemConfig {
    pub g: f64,
    /// Effective linear density 𝒩.
    pub density: f64,
    pub gradient: GradientSchedule,
    pub coupling: CouplingSchedule,
    /// Total medium length Z; the medium spans `[-Z/2, Z/2]`.
    pub z_extent: f64,
    pub nz: usize,
    pub t_extent: f64,
    pub nt: usize,
    /// Uniform decay rate of α.
    pub decoherence: f64,
}

impl GemConfig {
    pub fn new(g: f64, density: f64, eta: f64, z_extent: f64, t_extent: f64) -> Self {
        GemConfig {
            g,
            density,
            gradient: GradientSchedule::constant(eta),
            coupling: CouplingSchedule::always_on(),
            z_extent,
            nz: 512,
            t_extent,
            nt: 2048,
            decoherence: 0.0,
        }
    }

    pub fn dz(&self) -> f64 {
        self.z_extent / (self.nz - 1) as f64
    }

    pub fn dt(&self) -> f64 {
        self.t_extent / self.nt as f64
    }

    pub fn z(&self, m: usize) -> f64 {
        -0.5 * self.z_extent + m as f64 * self.dz()
    }

    pub fn t(&self, n: usize) -> f64 {
        n as f64 * self.dt()
    }

    /// `2πg𝒩/|η|`.
    pub fn optical_depth(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.g * self.density / self.gradient.max_abs()
    }

    pub fn validate(&self) -> Result<()> {
        if self.nz < 32 || self.nt < 32 {
            return Err(Error::param("gem.nz", "nz and nt must be at least 32"));
        }
        for (name, v) in [("gem.z_extent", self.z_extent), ("gem.t_extent", self.t_extent)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, "must be positive"));
            }
        }
        for (name, v) in [("gem.g", self.g), ("gem.density", self.density), ("gem.decoherence", self.decoherence)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::param(name, "must be non-negative"));
            }
        }
        if !self.gradient.initial.is_finite() {
            return Err(Error::param("gem.eta", "must be finite"));
        }
        let in_range = |t: f64| t >= 0.0 && t <= self.t_extent;
        let flips = &self.gradient.flips;
        if !flips.iter().all(|&t| in_range(t)) || flips.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::param("gem.flips", "flip times must increase strictly within [0, t_extent]"));
        }
        if let Some(w) = &self.coupling.windows {
            let edges: Vec<f64> = w.iter().flat_map(|&(a, b)| [a, b]).collect();
            if !edges.iter().all(|&t| in_range(t)) || edges.windows(2).any(|p| !(p[1] > p[0])) {
                return Err(Error::param("gem.coupling", "coupling windows must be ordered and within [0, t_extent]"));
            }
        }
        let phase = self.gradient.max_abs() * 0.5 * self.z_extent * self.dt();
        if phase > 0.5 {
            return Err(Error::param(
                "gem.nt",
                format!("gradient phase per time step {phase:.3} rad exceeds 0.5; increase nt"),
            ));
        }
        Ok(())
    }
}

/// Gaussian temporal pulse `A·exp(-(t-t₀)²/(2w²))` entering at the near edge.
#[derive(Debug, Clone, PartialEq)]
pub struct Pulse {
    pub center: f64,
    pub width: f64,
    pub amplitude: num_complex::Complex64,
    pub label: String,
}

impl Pulse {
    pub fn new(label: &str, center: f64, width: f64, amplitude: f64) -> Self {
        Pulse { center, width, amplitude: amplitude.into(), label: label.to_string() }
    }

    pub fn at(&self, t: f64) -> num_complex::Complex64 {
        let u = (t - self.center) / self.width;
        self.amplitude * (-0.5 * u * u).exp()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PulseTrain {
    pub pulses: Vec<Pulse>,
}

impl PulseTrain {
    pub fn single(p: Pulse) -> Self {
        PulseTrain { pulses: vec![p] }
    }

    pub fn at(&self, t: f64) -> num_complex::Complex64 {
        self.pulses.iter().map(|p| p.at(t)).sum()
    }

    pub fn validate(&self, cfg: &GemConfig) -> Result<()> {
        for p in &self.pulses {
            if !(p.width > 0.0) {
                return Err(Error::param("pulse.width", "must be positive"));
            }
            if p.center - 4.0 * p.width < 0.0 || p.center + 4.0 * p.width > cfg.t_extent {
                return Err(Error::param("pulse.center", format!("pulse {} does not fit with 4σ margins", p.label)));
            }
            if p.width < 4.0 * cfg.dt() {
                return Err(Error::param("pulse.width", format!("pulse {} is under-resolved by nt", p.label)));
            }
        }
        Ok(())
    }
}
