use std::f64::consts::PI;

use num_complex::Complex64;

use crate::fft::Fft2;
use crate::field::{Field2D, Grid, MediumParams};
use crate::{Error, Result};

/// Default masking floor as a fraction of the peak density.
pub const DEFAULT_DENSITY_FLOOR: f64 = 1e-3;

/// Madelung decomposition `ψ = √ρ·e^{iφ}` with velocity `v = Im(ψ*∇ψ)/ρ`.
///
/// Velocities are phase gradients (rad per transverse length unit); divide
/// by `n₀k₀` for transverse displacement per axial length.
#[derive(Debug, Clone, PartialEq)]
pub struct FluidDiagnostics {
    pub grid: Grid,
    pub density: Vec<f64>,
    /// Wrapped to `(-π, π]`.
    pub phase: Vec<f64>,
    pub vx: Vec<f64>,
    pub vy: Vec<f64>,
    /// False where the density is below the floor; `vx`, `vy` are zero there.
    pub valid: Vec<bool>,
}

impl FluidDiagnostics {
    pub fn velocity_at(&self, i: usize, j: usize) -> Option<(f64, f64)> {
        let n = self.grid.index(i, j);
        self.valid[n].then(|| (self.vx[n], self.vy[n]))
    }
}

/// Healing length, nonlinear length and sound speed at a reference density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluidScalars {
    pub xi: f64,
    pub z_nl: f64,
    pub c_s: f64,
}

impl FluidScalars {
    pub fn new(medium: &MediumParams, rho: f64) -> Self {
        FluidScalars {
            xi: medium.healing_length(rho),
            z_nl: medium.nonlinear_length(rho),
            c_s: medium.sound_speed(rho),
        }
    }
}

pub fn madelung(field: &Field2D, density_floor: f64) -> Result<FluidDiagnostics> {
    let grid = *field.grid();
    let density = field.density();
    let peak = density.iter().cloned().fold(0.0, f64::max);
    if peak == 0.0 {
        return Err(Error::Degenerate("field is identically zero".into()));
    }
    if !field.is_finite() {
        return Err(Error::Degenerate("field has non-finite samples".into()));
    }
    let (dxp, dyp) = spectral_gradient(field);
    let floor = density_floor * peak;
    let n = grid.len();
    let (mut vx, mut vy, mut valid) = (vec![0.0; n], vec![0.0; n], vec![false; n]);
    for (k, psi) in field.values().iter().enumerate() {
        if density[k] > floor && density[k] > 0.0 {
            valid[k] = true;
            vx[k] = (psi.conj() * dxp[k]).im / density[k];
            vy[k] = (psi.conj() * dyp[k]).im / density[k];
        }
    }
    let phase = field.values().iter().map(|v| v.arg()).collect();
    Ok(FluidDiagnostics { grid, density, phase, vx, vy, valid })
}

/// `(∂ψ/∂x, ∂ψ/∂y)` by spectral differentiation; the Nyquist bins are
/// dropped so the derivative of a real field stays real.
fn spectral_gradient(field: &Field2D) -> (Vec<Complex64>, Vec<Complex64>) {
    let grid = *field.grid();
    let mut fft = Fft2::new(&grid);
    let mut spec = field.values().to_vec();
    fft.forward(&mut spec);
    let (nx, ny) = (grid.nx(), grid.ny());
    let mut gx = spec.clone();
    let mut gy = spec;
    for j in 0..ny {
        let ky = if j == ny / 2 { 0.0 } else { grid.ky(j) };
        for i in 0..nx {
            let kx = if i == nx / 2 { 0.0 } else { grid.kx(i) };
            let n = grid.index(i, j);
            gx[n] *= Complex64::new(0.0, kx);
            gy[n] *= Complex64::new(0.0, ky);
        }
    }
    fft.inverse(&mut gx);
    fft.inverse(&mut gy);
    (gx, gy)
}

/// Wrapped phase increment `arg(b·a*)` in `(-π, π]`.
#[inline]
pub(crate) fn phase_step(a: Complex64, b: Complex64) -> f64 {
    (b * a.conj()).arg()
}

/// Phase circulation around a closed lattice loop, rad.
///
/// `path` lists `(i, j)` grid indices; consecutive points (and the last and
/// first) must be nearest neighbours, with periodic wrapping allowed. The
/// sum of wrapped increments is an exact multiple of 2π (to rounding)
/// whenever each increment is below π in magnitude, i.e. away from cores.
pub fn circulation(field: &Field2D, path: &[(usize, usize)]) -> Result<f64> {
    let grid = field.grid();
    if path.len() < 4 {
        return Err(Error::param("loop", "a closed loop needs at least four points"));
    }
    let (nx, ny) = (grid.nx(), grid.ny());
    let mut total = 0.0;
    for (k, &(i, j)) in path.iter().enumerate() {
        let (i2, j2) = path[(k + 1) % path.len()];
        let di = (i2 as i64 - i as i64).rem_euclid(nx as i64);
        let dj = (j2 as i64 - j as i64).rem_euclid(ny as i64);
        let adjacent =
            matches!((di, dj), (1, 0) | (0, 1)) || (di == nx as i64 - 1 && dj == 0) || (dj == ny as i64 - 1 && di == 0);
        if i >= nx || j >= ny || !adjacent {
            return Err(Error::param("loop", format!("points {k} and {} are not neighbours", k + 1)));
        }
        total += phase_step(field.at(i, j), field.at(i2, j2));
    }
    Ok(total)
}

/// Nearest integer winding of a circulation.
pub fn winding_number(circulation: f64) -> i64 {
    (circulation / (2.0 * PI)).round() as i64
}
