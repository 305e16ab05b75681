use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use super::fit::{fit_line, t95};
use crate::field::{Field2D, Grid, MediumParams, UnitTag};
use crate::solver::{Propagator, StepPlan};
use crate::{Error, Result};

/// How the weak probe is written onto the background.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeSeeding {
    /// Forward-propagating Bogoliubov quasiparticle: the packet's `k > 0`
    /// content `u·b(k)` plus the matching `-v·b*(k)` at `-k`. Its density
    /// imprint travels as one packet at the branch group velocity.
    Bogoliubov,
    /// Plain tilted probe `ε·g(x)·e^{ikx}`, as in an experiment. On a
    /// fluid it excites both branches.
    Angled,
}

/// Probe packet and tracking settings for one group-velocity measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupVelocityConfig {
    /// Carrier wavevector along x.
    pub k_perp: f64,
    /// Envelope `exp(-(x-x₀)²/w²)` width `w`.
    pub packet_width: f64,
    pub center_x: f64,
    /// Probe peak intensity over background intensity.
    pub intensity_ratio: f64,
    pub seeding: ProbeSeeding,
    /// Number of z samples of the centroid track.
    pub samples: usize,
    /// Largest tolerated RMS deviation of the track from a line, in cells.
    pub max_residual_cells: f64,
}

impl GroupVelocityConfig {
    pub fn new(k_perp: f64, packet_width: f64, center_x: f64) -> Self {
        GroupVelocityConfig {
            k_perp,
            packet_width,
            center_x,
            intensity_ratio: 1e-2,
            seeding: ProbeSeeding::Bogoliubov,
            samples: 20,
            max_residual_cells: 2.0,
        }
    }

    pub fn with_seeding(mut self, seeding: ProbeSeeding) -> Self {
        self.seeding = seeding;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupVelocity {
    pub k_perp: f64,
    /// Transverse displacement per unit axial distance.
    pub v_g: f64,
    pub stderr: f64,
    /// `(z, x)` envelope centroid, unwrapped.
    pub track: Vec<(f64, f64)>,
}

/// Effective `μ = ρ·∂(phase rate)/∂ρ` of a uniform fluid of density `rho`
/// (1/length). With saturation `μ = |γ|ρ/(1 + I/I_sat)²`.
pub fn bogoliubov_mu(medium: &MediumParams, rho: f64, unit: UnitTag) -> f64 {
    let base = medium.interaction().abs() * rho;
    match medium.i_sat {
        None => base,
        Some(i_sat) => {
            let s = 1.0 + unit.intensity_factor(medium.n0) * rho / i_sat;
            base / (s * s)
        }
    }
}

/// Bogoliubov frequency `Ω = √(ε(ε+2μ))`, `ε = k²/(2m)`.
pub fn bogoliubov_omega(k: f64, mass: f64, mu: f64) -> f64 {
    let e = k * k / (2.0 * mass);
    (e * (e + 2.0 * mu)).sqrt()
}

/// Group velocity `dΩ/dk = (ε+μ)k/(mΩ)`.
pub fn bogoliubov_group_velocity(k: f64, mass: f64, mu: f64) -> f64 {
    let e = k * k / (2.0 * mass);
    let om = (e * (e + 2.0 * mu)).sqrt();
    if om == 0.0 {
        return (mu / mass).sqrt();
    }
    (e + mu) * k / (mass * om)
}

/// Seeds a probe on `background`, propagates, and fits the x-centroid of
/// the density-difference envelope against z.
///
/// The two propagations carry the probe with opposite signs; their density
/// difference is odd in the probe amplitude, so the quadratic self-beat of
/// the probe, which does not travel with the packet, cancels.
pub fn measure_group_velocity(
    background: &Field2D,
    cfg: &GroupVelocityConfig,
    medium: &MediumParams,
    plan: &StepPlan,
) -> Result<GroupVelocity> {
    let grid = *background.grid();
    let unit = background.unit();
    let rho = background.mean_density();
    if !(rho > 0.0) || !background.is_finite() {
        return Err(Error::Degenerate("background must be finite and non-zero".into()));
    }
    if !(cfg.packet_width >= 2.0 * grid.dx()) {
        return Err(Error::param("probe.packet_width", "packet must span at least two cells"));
    }
    if cfg.k_perp.abs() >= grid.nyquist_x() {
        return Err(Error::param("probe.k_perp", "carrier aliases on this grid"));
    }
    if !(cfg.intensity_ratio > 0.0 && cfg.intensity_ratio.is_finite()) {
        return Err(Error::param("probe.intensity_ratio", "must be positive"));
    }
    if plan.n_steps < 2 {
        return Err(Error::param("plan.n_steps", "need at least two steps to fit a velocity"));
    }
    let mass = medium.effective_mass();
    let mu = match cfg.seeding {
        ProbeSeeding::Bogoliubov => {
            if medium.chi3 > 0.0 {
                return Err(Error::param("medium.chi3", "Bogoliubov seeding needs a defocusing or linear medium"));
            }
            if cfg.k_perp <= 0.0 {
                return Err(Error::param("probe.k_perp", "Bogoliubov seeding needs k > 0; use angled seeding"));
            }
            bogoliubov_mu(medium, rho, unit)
        }
        ProbeSeeding::Angled => 0.0,
    };

    let phase0 = background.values().iter().sum::<Complex64>().arg();
    let amp = (cfg.intensity_ratio * rho).sqrt();
    let line = seed_line(&grid, cfg, amp, mass, mu, Complex64::from_polar(1.0, phase0));
    let seeded = |sign: f64| {
        let v: Vec<Complex64> =
            background.values().iter().enumerate().map(|(n, v)| v + sign * line[n % grid.nx()]).collect();
        background.with_values(v)
    };
    let (plus, minus) = (seeded(1.0)?, seeded(-1.0)?);

    let every = (plan.n_steps / cfg.samples.max(2)).max(1);
    let plan = plan.with_snapshots(every);
    let mut prop = Propagator::new(grid, medium, plan)?;
    let rec_p = prop.run(&plus)?;
    let rec_m = prop.run(&minus)?;

    let mut frames = vec![(0.0, &minus, &plus)];
    for (a, b) in rec_m.snapshots.iter().zip(&rec_p.snapshots) {
        frames.push((a.z, &a.field, &b.field));
    }
    let extent = grid.extent_x();
    let mut track: Vec<(f64, f64)> = Vec::with_capacity(frames.len());
    for (z, lo, hi) in frames {
        let env = envelope(&grid, lo, hi);
        let prev = track.last().map_or(cfg.center_x, |t| t.1);
        let mut x = centroid(&grid, &env, cfg.packet_width, prev);
        x += extent * ((prev - x) / extent).round();
        track.push((z, x));
    }
    let (x_first, x_last) = (track[0].1, track.last().unwrap().1);
    let half = 0.5 * extent;
    if !(-half..half).contains(&x_last) || !(-half..half).contains(&x_first) {
        return Err(Error::Measurement(format!(
            "probe centroid wrapped around the periodic grid (x = {x_last:e}); enlarge the grid or shorten the run"
        )));
    }
    let zs: Vec<f64> = track.iter().map(|t| t.0).collect();
    let xs: Vec<f64> = track.iter().map(|t| t.1).collect();
    let fit = fit_line(&zs, &xs).ok_or_else(|| Error::Measurement("degenerate centroid track".into()))?;
    if fit.rms_residual > cfg.max_residual_cells * grid.dx() {
        return Err(Error::Measurement(format!(
            "centroid track is not straight: rms residual {:.2} cells",
            fit.rms_residual / grid.dx()
        )));
    }
    Ok(GroupVelocity { k_perp: cfg.k_perp, v_g: fit.slope, stderr: fit.slope_stderr, track })
}

/// One row (uniform in y) of the probe field.
fn seed_line(grid: &Grid, cfg: &GroupVelocityConfig, amp: f64, mass: f64, mu: f64, phase: Complex64) -> Vec<Complex64> {
    let nx = grid.nx();
    let extent = grid.extent_x();
    let mut b: Vec<Complex64> = (0..nx)
        .map(|i| {
            let x = grid.x(i);
            let d = x - cfg.center_x;
            let d = d - extent * (d / extent).round();
            Complex64::from_polar(amp * (-(d * d) / (cfg.packet_width * cfg.packet_width)).exp(), cfg.k_perp * x)
        })
        .collect();
    if cfg.seeding == ProbeSeeding::Bogoliubov {
        let mut planner = FftPlanner::new();
        planner.plan_fft_forward(nx).process(&mut b);
        let mut s = vec![Complex64::new(0.0, 0.0); nx];
        for m in 1..nx / 2 {
            let k = grid.kx(m);
            let e = k * k / (2.0 * mass);
            let om = bogoliubov_omega(k, mass, mu);
            let r = mu / (om + e + mu);
            s[m] += b[m];
            s[nx - m] -= r * b[m].conj();
        }
        planner.plan_fft_inverse(nx).process(&mut s);
        let inv = 1.0 / nx as f64;
        b = s.into_iter().map(|v| v * inv).collect();
    }
    b.into_iter().map(|v| v * phase).collect()
}

/// Analytic-signal magnitude of the y-averaged density difference.
fn envelope(grid: &Grid, lo: &Field2D, hi: &Field2D) -> Vec<f64> {
    let (nx, ny) = (grid.nx(), grid.ny());
    let mut line = vec![Complex64::new(0.0, 0.0); nx];
    for j in 0..ny {
        for (i, slot) in line.iter_mut().enumerate() {
            slot.re += hi.at(i, j).norm_sqr() - lo.at(i, j).norm_sqr();
        }
    }
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(nx).process(&mut line);
    for (m, v) in line.iter_mut().enumerate() {
        if m > nx / 2 {
            *v = Complex64::new(0.0, 0.0);
        } else if m > 0 && m < nx / 2 {
            *v *= 2.0;
        }
    }
    planner.plan_fft_inverse(nx).process(&mut line);
    line.iter().map(|v| v.norm()).collect()
}

/// Envelope-weighted centroid in a window that follows the track from
/// `guess`. Only samples above a fraction of the window peak contribute,
/// so low-level radiation elsewhere on the grid does not pull the estimate.
fn centroid(grid: &Grid, env: &[f64], width: f64, guess: f64) -> f64 {
    const FLOOR: f64 = 0.1;
    let nx = env.len() as i64;
    let half = ((3.0 * width / grid.dx()).ceil() as i64).clamp(1, nx / 2 - 1);
    let mut x = guess;
    for _ in 0..3 {
        let c = ((x - grid.x(0)) / grid.dx()).round() as i64;
        let idx = |d: i64| (c + d).rem_euclid(nx) as usize;
        let floor = FLOOR * (-half..=half).map(|d| env[idx(d)]).fold(0.0, f64::max);
        let (mut w, mut m) = (0.0, 0.0);
        for d in -half..=half {
            let e = (env[idx(d)] - floor).max(0.0);
            w += e;
            m += e * d as f64;
        }
        if w == 0.0 {
            break;
        }
        x = grid.x(0) + grid.dx() * (c as f64 + m / w);
    }
    x
}

/// Dispersion relation integrated from group-velocity samples, with a
/// one-parameter Bogoliubov fit (mass fixed at `n₀k₀`).
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionCurve {
    /// Strictly increasing, starting at 0.
    pub k: Vec<f64>,
    pub v_g: Vec<f64>,
    /// `Ω(k) = ∫₀ᵏ v_g dk`, trapezoidal.
    pub omega: Vec<f64>,
    pub mass: f64,
    pub mu: f64,
    pub c_s: f64,
    /// 95% half-width.
    pub c_s_ci: f64,
    pub xi: f64,
    pub xi_ci: f64,
}

impl DispersionCurve {
    /// `k,v_g,omega` rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,v_g,omega\n");
        for ((k, v), o) in self.k.iter().zip(&self.v_g).zip(&self.omega) {
            let _ = writeln!(s, "{k:e},{v:e},{o:e}");
        }
        s
    }
}

/// Integrates `(k, v_g)` samples into `Ω(k)` and fits `Ω_B`.
///
/// When the first sample is above zero, the origin is prepended with `v_g`
/// extrapolated linearly from the first two samples; this keeps constant
/// and linear `v_g` exact.
pub fn dispersion_from_group_velocity(samples: &[(f64, f64)], mass: f64) -> Result<DispersionCurve> {
    if samples.len() < 5 {
        return Err(Error::param("dispersion.samples", "need at least five samples"));
    }
    if !(mass > 0.0) {
        return Err(Error::param("dispersion.mass", "mass must be positive"));
    }
    if samples[0].0 < 0.0 || samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(Error::param("dispersion.samples", "k must be non-negative and strictly increasing"));
    }
    let mut k: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let mut v: Vec<f64> = samples.iter().map(|s| s.1).collect();
    if k[0] > 0.0 {
        let v0 = v[0] - k[0] * (v[1] - v[0]) / (k[1] - k[0]);
        k.insert(0, 0.0);
        v.insert(0, v0);
    }
    let mut omega = vec![0.0; k.len()];
    for i in 1..k.len() {
        omega[i] = omega[i - 1] + 0.5 * (v[i] + v[i - 1]) * (k[i] - k[i - 1]);
    }

    // Gauss–Newton on μ, residuals over k > 0
    let pts: Vec<(f64, f64)> = k.iter().zip(&omega).skip(1).map(|(a, b)| (*a, *b)).collect();
    let (k1, o1) = pts[0];
    let mut mu = mass * (o1 / k1).powi(2);
    if !(mu > 0.0) {
        mu = pts.iter().map(|(k, o)| mass * (o / k).powi(2)).fold(0.0, f64::max).max(1e-300);
    }
    let e_max = pts.iter().map(|(k, _)| k * k / (2.0 * mass)).fold(0.0, f64::max);
    let mut converged = false;
    for _ in 0..200 {
        let (mut jj, mut jr) = (0.0, 0.0);
        for &(kk, o) in &pts {
            let e = kk * kk / (2.0 * mass);
            let ob = bogoliubov_omega(kk, mass, mu);
            let j = e / ob;
            jj += j * j;
            jr += j * (o - ob);
        }
        let step = jr / jj;
        let next = (mu + step).max(0.1 * mu);
        let done = (next - mu).abs() <= 1e-13 * mu;
        mu = next;
        if mu < 1e-12 * e_max {
            // free-particle curve: no sonic branch
            mu = 0.0;
            converged = true;
            break;
        }
        if !mu.is_finite() {
            break;
        }
        if done {
            converged = true;
            break;
        }
    }
    if !converged || !(mu >= 0.0) {
        return Err(Error::Fit("Bogoliubov fit did not converge".into()));
    }
    let (mut ssr, mut jj) = (0.0, 0.0);
    for &(kk, o) in &pts {
        let ob = bogoliubov_omega(kk, mass, mu);
        let j = if ob > 0.0 { kk * kk / (2.0 * mass) / ob } else { 1.0 };
        ssr += (o - ob).powi(2);
        jj += j * j;
    }
    let dof = pts.len() - 1;
    let mu_ci = t95(dof) * (ssr / dof as f64 / jj).sqrt();
    let c_s = (mu / mass).sqrt();
    let xi = 1.0 / (mass * mu).sqrt();
    Ok(DispersionCurve {
        k,
        v_g: v,
        omega,
        mass,
        mu,
        c_s,
        c_s_ci: if mu > 0.0 { 0.5 * c_s * mu_ci / mu } else { (mu_ci / mass).sqrt() },
        xi,
        xi_ci: if mu > 0.0 { 0.5 * xi * mu_ci / mu } else { f64::INFINITY },
    })
}

/// Settings for [`sound_speed_scaling`], all lengths in local healing lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingConfig {
    pub k_xi: f64,
    pub width_xi: f64,
    pub travel_xi: f64,
    /// Axial steps per nonlinear length.
    pub steps_per_znl: f64,
    pub intensity_ratio: f64,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        ScalingConfig { k_xi: 0.2, width_xi: 10.0, travel_xi: 30.0, steps_per_znl: 20.0, intensity_ratio: 1e-2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingSample {
    pub rho: f64,
    pub v_g: f64,
    pub c_s_theory: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingResult {
    /// Slope of `log v_g` against `log ρ`.
    pub exponent: f64,
    pub exponent_ci: f64,
    pub samples: Vec<ScalingSample>,
}

impl ScalingResult {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("rho,v_g,c_s_theory\n");
        for p in &self.samples {
            let _ = writeln!(s, "{:e},{:e},{:e}", p.rho, p.v_g, p.c_s_theory);
        }
        s
    }
}

/// Measures the low-k group velocity on uniform fluids of each density
/// (`|𝓔|²` in the units of `unit`) and fits the log–log slope.
///
/// Every run uses the same grid; the probe carrier, width, start and run
/// length are set in units of the local healing length so that only the
/// density changes between runs.
pub fn sound_speed_scaling(
    grid: &Grid,
    unit: UnitTag,
    densities: &[f64],
    medium: &MediumParams,
    cfg: &ScalingConfig,
) -> Result<ScalingResult> {
    if densities.len() < 4 {
        return Err(Error::param("scaling.densities", "need at least four densities"));
    }
    if densities.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(Error::param("scaling.densities", "densities must be positive"));
    }
    let (lo, hi) = densities.iter().fold((f64::MAX, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    if hi / lo < 10.0 * (1.0 - 1e-12) {
        return Err(Error::param("scaling.densities", "densities must span at least one decade"));
    }
    if medium.chi3 == 0.0 {
        return Err(Error::Degenerate("no sonic branch without a nonlinearity".into()));
    }
    let mass = medium.effective_mass();
    let samples = densities
        .par_iter()
        .map(|&rho| {
            let mu = bogoliubov_mu(medium, rho, unit);
            let xi = 1.0 / (mass * mu).sqrt();
            let c = (mu / mass).sqrt();
            let bg = Field2D::new(*grid, vec![Complex64::new(rho.sqrt(), 0.0); grid.len()], unit)?;
            let mut gv = GroupVelocityConfig::new(cfg.k_xi / xi, cfg.width_xi * xi, -0.5 * cfg.travel_xi * xi);
            gv.intensity_ratio = cfg.intensity_ratio;
            let length = cfg.travel_xi * xi / c;
            let n = ((length * mu) * cfg.steps_per_znl).ceil().max(2.0) as usize;
            let plan = StepPlan::new(length, n)?;
            let m = medium.clone().with_length(length)?;
            let r = measure_group_velocity(&bg, &gv, &m, &plan)?;
            Ok(ScalingSample { rho, v_g: r.v_g, c_s_theory: c })
        })
        .collect::<Result<Vec<_>>>()?;
    let lx: Vec<f64> = samples.iter().map(|s| s.rho.ln()).collect();
    let ly: Vec<f64> = samples.iter().map(|s| s.v_g.ln()).collect();
    if ly.iter().any(|v| !v.is_finite()) {
        return Err(Error::Measurement("non-positive group velocity".into()));
    }
    let fit = fit_line(&lx, &ly).ok_or_else(|| Error::Fit("log-log fit failed".into()))?;
    Ok(ScalingResult { exponent: fit.slope, exponent_ci: t95(samples.len() - 2) * fit.slope_stderr, samples })
}
