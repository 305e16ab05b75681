use std::f64::consts::PI;

use log::warn;
use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};

use crate::fft::Fft2;
use crate::field::{Field2D, Grid, UnitTag};
use crate::rng::{stream_rng, streams};
use crate::{Error, Result};

/// Gaussian beam `𝓔 = E_peak·exp(-r²/w₀²)` carrying optical power `power`.
///
/// `E_peak` is set from the discrete power sum, so `field.power(n0)`
/// equals `power` to rounding.
pub fn gaussian_beam(grid: &Grid, waist: f64, power: f64, n0: f64) -> Result<Field2D> {
    let cell = grid.dx().max(grid.dy());
    if !(waist >= 4.0 * cell) {
        return Err(Error::param("beam.waist", format!("waist {waist:e} m is under 4 grid cells")));
    }
    let half_extent = grid.extent_x().min(grid.extent_y()) / 2.0;
    if waist > half_extent {
        return Err(Error::param("beam.waist", "waist exceeds half the grid extent (periodic wraparound)"));
    }
    if !(power.is_finite() && power >= 0.0) {
        return Err(Error::param("beam.power", "power must be non-negative"));
    }
    warn_near_boundary(grid, waist);
    let profile = Field2D::from_fn(*grid, UnitTag::Physical, |x, y| {
        Complex64::new((-(x * x + y * y) / (waist * waist)).exp(), 0.0)
    })?;
    if power == 0.0 {
        return Ok(Field2D::zeros(*grid, UnitTag::Physical));
    }
    let e_peak = (power / profile.power(n0)).sqrt();
    profile.scaled(Complex64::new(e_peak, 0.0))
}

pub(crate) fn warn_near_boundary(grid: &Grid, waist: f64) {
    let half_extent = grid.extent_x().min(grid.extent_y()) / 2.0;
    if half_extent < 4.0 * waist {
        warn!("structure of width {waist:e} m lies within 4 widths of the periodic boundary ({half_extent:e} m)");
    }
}

/// Uniform field of the given intensity with zero phase.
pub fn plane_wave(grid: &Grid, intensity: f64, n0: f64) -> Result<Field2D> {
    if !(intensity.is_finite() && intensity >= 0.0) {
        return Err(Error::param("beam.intensity", "intensity must be non-negative"));
    }
    let amp = (intensity / UnitTag::Physical.intensity_factor(n0)).sqrt();
    Field2D::new(*grid, vec![Complex64::new(amp, 0.0); grid.len()], UnitTag::Physical)
}

/// Fully developed speckle: circular complex Gaussian field whose angular
/// spectrum `|𝓔̂(k)|² ∝ exp(-k²ℓ²/2)` has 1/e² half-width `2/ℓ`.
///
/// The amplitude is normalised analytically so that the ensemble mean
/// intensity is `mean_intensity`; a single realisation fluctuates around it.
/// The field correlation is `|g₁(Δr)| = exp(-Δr²/(2ℓ²))`.
pub fn speckle(grid: &Grid, correlation_length: f64, mean_intensity: f64, n0: f64, seed: u64) -> Result<Field2D> {
    if !(correlation_length >= 2.0 * grid.dx().max(grid.dy())) {
        return Err(Error::param("beam.correlation_length", "correlation length must span at least two cells"));
    }
    if !(mean_intensity.is_finite() && mean_intensity >= 0.0) {
        return Err(Error::param("beam.intensity", "mean intensity must be non-negative"));
    }
    let mut rng = stream_rng(seed, streams::SPECKLE);
    let ell2 = correlation_length * correlation_length;
    let mut spec = Vec::with_capacity(grid.len());
    let mut filter_power = 0.0;
    for j in 0..grid.ny() {
        let ky = grid.ky(j);
        for i in 0..grid.nx() {
            let kx = grid.kx(i);
            let filt = (-(kx * kx + ky * ky) * ell2 / 4.0).exp();
            filter_power += filt * filt;
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            spec.push(Complex64::new(re, im) * (filt * std::f64::consts::FRAC_1_SQRT_2));
        }
    }
    let target = mean_intensity / UnitTag::Physical.intensity_factor(n0);
    let scale = (target * grid.len() as f64 / filter_power).sqrt();
    Fft2::new(grid).inverse(&mut spec);
    for v in spec.iter_mut() {
        *v *= scale;
    }
    Field2D::new(*grid, spec, UnitTag::Physical)
}

/// Weak Gaussian probe superposed on a fluid at angle `angle` along x.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSpec {
    pub waist_x: f64,
    /// `None` makes a stripe that is uniform along y.
    pub waist_y: Option<f64>,
    pub peak_intensity: f64,
    /// Incidence angle in the x–z plane, rad.
    pub angle: f64,
    pub center: (f64, f64),
}

impl ProbeSpec {
    /// Round probe of the given power (W).
    pub fn with_power(waist: f64, power: f64, angle: f64, center: (f64, f64)) -> Self {
        ProbeSpec {
            waist_x: waist,
            waist_y: Some(waist),
            peak_intensity: 2.0 * power / (PI * waist * waist),
            angle,
            center,
        }
    }

    /// Transverse wavevector `k⊥ = k₀ sin θ`.
    pub fn k_perp(&self, wavelength: f64) -> f64 {
        2.0 * PI / wavelength * self.angle.sin()
    }
}

/// Returns `field + probe`, the probe carrying the phase ramp `exp(i k⊥ x)`.
pub fn add_probe(field: &Field2D, probe: &ProbeSpec, wavelength: f64, n0: f64) -> Result<Field2D> {
    let grid = *field.grid();
    let k_perp = probe.k_perp(wavelength);
    if k_perp.abs() >= grid.nyquist_x() {
        return Err(Error::param(
            "probe.angle",
            format!("k⊥ = {k_perp:e} rad/m aliases (Nyquist {:e})", grid.nyquist_x()),
        ));
    }
    if !(probe.waist_x >= 2.0 * grid.dx()) {
        return Err(Error::param("probe.waist", "probe waist must span at least two cells"));
    }
    if !(probe.peak_intensity.is_finite() && probe.peak_intensity >= 0.0) {
        return Err(Error::param("probe.power", "probe power must be non-negative"));
    }
    if probe.peak_intensity == 0.0 {
        return Ok(field.clone());
    }
    let amp = (probe.peak_intensity / field.unit().intensity_factor(n0)).sqrt();
    let (cx, cy) = probe.center;
    let (wx, wy) = (probe.waist_x, probe.waist_y);
    let values = field
        .values()
        .iter()
        .enumerate()
        .map(|(n, v)| {
            let (x, y) = (grid.x(n % grid.nx()), grid.y(n / grid.nx()));
            let mut env = -((x - cx) / wx).powi(2);
            if let Some(wy) = wy {
                env -= ((y - cy) / wy).powi(2);
            }
            v + Complex64::from_polar(amp * env.exp(), k_perp * x)
        })
        .collect();
    field.with_values(values)
}
