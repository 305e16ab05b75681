use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::field::Grid;
use crate::{Error, Result};

/// Axial modulation `s(z)` multiplying a static transverse profile.
pub type ZProfile = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Complex index perturbation `δn(r⊥, z) = s(z)·δn₀(r⊥)`.
///
/// The real part shifts the linear index (positive values attract light),
/// the imaginary part is a loss (positive) or gain (negative) profile.
#[derive(Clone)]
pub struct Potential {
    grid: Grid,
    values: Vec<Complex64>,
    z_profile: Option<ZProfile>,
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Potential")
            .field("grid", &self.grid)
            .field("z_dependent", &self.z_profile.is_some())
            .finish_non_exhaustive()
    }
}

impl Potential {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn with_z_profile(mut self, profile: ZProfile) -> Self {
        self.z_profile = Some(profile);
        self
    }

    pub fn is_z_dependent(&self) -> bool {
        self.z_profile.is_some()
    }

    /// Axial scale factor at `z` (1 for static potentials).
    pub fn scale_at(&self, z: f64) -> f64 {
        self.z_profile.as_ref().map_or(1.0, |p| p(z))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == Complex64::new(0.0, 0.0))
    }

    pub fn has_imaginary_part(&self) -> bool {
        self.values.iter().any(|v| v.im != 0.0)
    }

    pub fn max_abs_real(&self) -> f64 {
        self.values.iter().map(|v| v.re.abs()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialKind {
    Uniform {
        value: Complex64,
    },
    /// `amplitude·exp(-|r - center|²/waist²)`; positive real part attracts.
    GaussianDefect {
        amplitude: Complex64,
        waist: f64,
        center: (f64, f64),
    },
    /// Three plane waves at 120° with wavevector magnitude `2π/spacing`:
    /// `amplitude·|Σ_j exp(i q_j·r)|²/9`, normalised to a peak of `amplitude`.
    /// A negative amplitude traps light on the honeycomb of intensity minima.
    Lattice {
        amplitude: f64,
        spacing: f64,
        orientation: f64,
    },
    /// Two Gaussian wells at `x = ±separation/2` with equal real depth and
    /// opposite gain/loss: real part even in x, imaginary part odd in x.
    PtDimer {
        real_amplitude: f64,
        imag_amplitude: f64,
        waist: f64,
        separation: f64,
    },
    Custom(Vec<Complex64>),
}

pub fn build_potential(grid: &Grid, kind: &PotentialKind) -> Result<Potential> {
    let min_d = grid.dx().max(grid.dy());
    let values = match kind {
        PotentialKind::Uniform { value } => vec![*value; grid.len()],
        PotentialKind::GaussianDefect { amplitude, waist, center } => {
            if !(*waist >= 2.0 * min_d) {
                return Err(Error::param("potential.waist", "defect waist must span at least two cells"));
            }
            sample(grid, |x, y| {
                let r2 = (x - center.0).powi(2) + (y - center.1).powi(2);
                amplitude * (-r2 / (waist * waist)).exp()
            })
        }
        PotentialKind::Lattice { amplitude, spacing, orientation } => {
            if !(*spacing >= 4.0 * min_d) {
                return Err(Error::param(
                    "potential.spacing",
                    format!("lattice spacing {spacing:e} unresolved; need at least 4 cells"),
                ));
            }
            let q = 2.0 * PI / spacing;
            let waves: Vec<(f64, f64)> = (0..3)
                .map(|j| {
                    let a = orientation + 2.0 * PI * j as f64 / 3.0;
                    (q * a.cos(), q * a.sin())
                })
                .collect();
            sample(grid, |x, y| {
                let s: Complex64 = waves.iter().map(|(qx, qy)| Complex64::from_polar(1.0, qx * x + qy * y)).sum();
                Complex64::new(amplitude * s.norm_sqr() / 9.0, 0.0)
            })
        }
        PotentialKind::PtDimer { real_amplitude, imag_amplitude, waist, separation } => {
            if !(*waist >= 2.0 * min_d) {
                return Err(Error::param("potential.waist", "well waist must span at least two cells"));
            }
            pt_dimer(grid, *real_amplitude, *imag_amplitude, *waist, *separation)
        }
        PotentialKind::Custom(samples) => {
            if samples.len() != grid.len() {
                return Err(Error::GridMismatch(format!(
                    "custom potential has {} samples, grid has {}",
                    samples.len(),
                    grid.len()
                )));
            }
            samples.clone()
        }
    };
    if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::param("potential", "non-finite samples"));
    }
    Ok(Potential { grid: *grid, values, z_profile: None })
}

fn sample(grid: &Grid, f: impl Fn(f64, f64) -> Complex64) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(grid.len());
    for j in 0..grid.ny() {
        let y = grid.y(j);
        for i in 0..grid.nx() {
            out.push(f(grid.x(i), y));
        }
    }
    out
}

fn pt_dimer(grid: &Grid, re: f64, im: f64, waist: f64, separation: f64) -> Vec<Complex64> {
    let half = separation / 2.0;
    let well = |x: f64, y: f64, c: f64| (-((x - c).powi(2) + y * y) / (waist * waist)).exp();
    let mut out = sample(grid, |x, y| {
        let (l, r) = (well(x, y, -half), well(x, y, half));
        Complex64::new(re * (l + r), im * (r - l))
    });
    // Column i = 0 sits at x = -L/2, whose mirror image is itself on the
    // periodic grid; PT symmetry there requires a vanishing imaginary part.
    for j in 0..grid.ny() {
        out[grid.index(0, j)].im = 0.0;
    }
    out
}
