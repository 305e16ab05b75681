use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use super::{GemConfig, PulseTrain};
use crate::field::io::save_pgm16;
use crate::{Error, Result};

/// Time slices kept for heatmaps.
const MAX_RECORDED: usize = 256;

/// `α(z,t)` and `E(z,t)` on recorded time slices (row per slice).
#[derive(Debug, Clone, PartialEq)]
pub struct GemState {
    pub times: Vec<f64>,
    pub z: Vec<f64>,
    pub alpha: Vec<Complex64>,
    pub field: Vec<Complex64>,
}

impl GemState {
    pub fn slice(&self, k: usize) -> &[Complex64] {
        let nz = self.z.len();
        &self.alpha[k * nz..(k + 1) * nz]
    }

    /// `|α|` heatmap, z along the row, time down the columns.
    pub fn save_alpha_pgm(&self, path: &Path) -> Result<[PathBuf; 2]> {
        let data: Vec<f64> = self.alpha.iter().map(|a| a.norm()).collect();
        save_pgm16(path, self.z.len(), self.times.len(), &data, "|alpha(z,t)|")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GemRun {
    /// Every time node `t_n = n·dt`, `n = 0..=nt`.
    pub t: Vec<f64>,
    pub input: Vec<Complex64>,
    /// Field leaving the far edge `z = Z/2`.
    pub output: Vec<Complex64>,
    pub state: GemState,
}

impl GemRun {
    pub fn dt(&self) -> f64 {
        self.t[1] - self.t[0]
    }

    /// `t,re,im,abs2` rows of a trace.
    pub fn trace_csv(t: &[f64], e: &[Complex64]) -> String {
        let mut s = String::from("t,re,im,abs2\n");
        for (t, e) in t.iter().zip(e) {
            let _ = writeln!(s, "{t:e},{:e},{:e},{:e}", e.re, e.im, e.norm_sqr());
        }
        s
    }

    pub fn input_csv(&self) -> String {
        Self::trace_csv(&self.t, &self.input)
    }

    pub fn output_csv(&self) -> String {
        Self::trace_csv(&self.t, &self.output)
    }

    /// Trapezoidal `∫|E_out|²dt` over `[t0, t1]`.
    pub fn output_energy(&self, t0: f64, t1: f64) -> f64 {
        energy(&self.t, &self.output, t0, t1)
    }

    pub fn input_energy(&self) -> f64 {
        energy(&self.t, &self.input, f64::NEG_INFINITY, f64::INFINITY)
    }
}

pub(crate) fn energy(t: &[f64], e: &[Complex64], t0: f64, t1: f64) -> f64 {
    let mut acc = 0.0;
    for n in 1..t.len() {
        if t[n - 1] >= t0 && t[n] <= t1 {
            acc += 0.5 * (e[n - 1].norm_sqr() + e[n].norm_sqr()) * (t[n] - t[n - 1]);
        }
    }
    acc
}

/// Cumulative trapezoid `(Cx)_m = ∫_{z_0}^{z_m} x dz`.
fn cumulative(x: &[Complex64], h: f64, out: &mut [Complex64]) {
    out[0] = Complex64::new(0.0, 0.0);
    for m in 1..x.len() {
        out[m] = out[m - 1] + 0.5 * h * (x[m - 1] + x[m]);
    }
}

/// Solves `(I + c·C)x = r` by forward substitution.
fn solve_cumulative(r: &[Complex64], c: f64, h: f64, x: &mut [Complex64]) {
    let diag = 1.0 + 0.5 * c * h;
    let mut acc = Complex64::new(0.0, 0.0);
    x[0] = r[0];
    for m in 1..r.len() {
        let partial = acc + 0.5 * h * x[m - 1];
        x[m] = (r[m] - c * partial) / diag;
        acc = partial + 0.5 * h * x[m];
    }
}

/// Integrates the memory over `[0, t_extent]` for the given input train.
///
/// Each time step applies half the gradient rotation exactly, the coupling
/// step by Crank–Nicolson with the gate and input taken at the step
/// midpoint (the field is slaved to α through a cumulative z integral, so
/// the implicit system is lower triangular), then the second half rotation.
pub fn gem_evolve(cfg: &GemConfig, input: &PulseTrain) -> Result<GemRun> {
    cfg.validate()?;
    input.validate(cfg)?;
    let (nz, nt) = (cfg.nz, cfg.nt);
    let (dz, dt) = (cfg.dz(), cfg.dt());
    let z: Vec<f64> = (0..nz).map(|m| cfg.z(m)).collect();
    let stride = nt.div_ceil(MAX_RECORDED).max(1);
    let gn = cfg.g * cfg.density;

    let mut alpha = vec![Complex64::new(0.0, 0.0); nz];
    let mut scratch = vec![Complex64::new(0.0, 0.0); nz];
    let mut rhs = vec![Complex64::new(0.0, 0.0); nz];
    let mut cum = vec![Complex64::new(0.0, 0.0); nz];
    let t: Vec<f64> = (0..=nt).map(|n| cfg.t(n)).collect();
    let e_in: Vec<Complex64> = t.iter().map(|&t| input.at(t)).collect();
    let mut output = Vec::with_capacity(nt + 1);
    output.push(e_in[0]);
    let mut state = GemState { times: Vec::new(), z: z.clone(), alpha: Vec::new(), field: Vec::new() };
    let record = |state: &mut GemState, time: f64, alpha: &[Complex64], cum: &[Complex64], e0: Complex64, gate: f64| {
        state.times.push(time);
        state.alpha.extend_from_slice(alpha);
        state.field.extend(cum.iter().map(|c| e0 + Complex64::new(0.0, cfg.density * gate) * c));
    };
    record(&mut state, 0.0, &alpha, &cum, e_in[0], 1.0);

    let decay = (-0.5 * cfg.decoherence * dt).exp();
    let rotate = |alpha: &mut [Complex64], phi: f64| {
        for (a, zm) in alpha.iter_mut().zip(&z) {
            *a *= Complex64::from_polar(decay, -zm * phi);
        }
    };
    for n in 0..nt {
        let (t0, t1) = (t[n], t[n + 1]);
        let tm = 0.5 * (t0 + t1);
        rotate(&mut alpha, cfg.gradient.integral(t0, tm));
        if cfg.coupling.is_on(tm) && gn > 0.0 {
            let c = 0.5 * dt * gn;
            cumulative(&alpha, dz, &mut cum);
            let src = Complex64::new(0.0, cfg.g * dt) * input.at(tm);
            for m in 0..nz {
                rhs[m] = alpha[m] - c * cum[m] + src;
            }
            solve_cumulative(&rhs, c, dz, &mut scratch);
            std::mem::swap(&mut alpha, &mut scratch);
        } else if cfg.coupling.is_on(tm) && cfg.g > 0.0 {
            let src = Complex64::new(0.0, cfg.g * dt) * input.at(tm);
            alpha.iter_mut().for_each(|a| *a += src);
        }
        rotate(&mut alpha, cfg.gradient.integral(tm, t1));
        if alpha.iter().any(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return Err(Error::NonFinite { z: t1, step: n + 1 });
        }
        let gate = if cfg.coupling.is_on(t1) { 1.0 } else { 0.0 };
        cumulative(&alpha, dz, &mut cum);
        output.push(e_in[n + 1] + Complex64::new(0.0, cfg.density * gate) * cum[nz - 1]);
        if (n + 1) % stride == 0 || n + 1 == nt {
            record(&mut state, t1, &alpha, &cum, e_in[n + 1], gate);
        }
    }
    Ok(GemRun { t, input: e_in, output, state })
}
