//! Transverse grids, complex envelopes and the builders shared by the
//! solver and the diagnostics.

mod builders;
mod grid;
mod imprint;
pub mod io;
mod medium;
mod potential;

pub use builders::{add_probe, gaussian_beam, plane_wave, speckle, ProbeSpec};
pub use grid::Grid;
pub use imprint::{imprint_dark_stripe, imprint_vortex};
pub use medium::MediumParams;
pub use potential::{build_potential, Potential, PotentialKind, ZProfile};

use num_complex::Complex64;

use crate::consts::{C, EPSILON_0};
use crate::{Error, Result};

/// Whether samples are in V/m or in rescaled units `ψ = 𝓔/√ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnitTag {
    Physical,
    Dimensionless,
}

impl UnitTag {
    pub fn code(self) -> u64 {
        match self {
            UnitTag::Physical => 0,
            UnitTag::Dimensionless => 1,
        }
    }

    pub fn from_code(code: u64) -> Option<Self> {
        match code {
            0 => Some(UnitTag::Physical),
            1 => Some(UnitTag::Dimensionless),
            _ => None,
        }
    }

    /// Factor turning `|𝓔|²` into intensity: `½ n₀ c ε₀` for physical
    /// fields, 1 for dimensionless ones.
    pub fn intensity_factor(self, n0: f64) -> f64 {
        match self {
            UnitTag::Physical => 0.5 * n0 * C * EPSILON_0,
            UnitTag::Dimensionless => 1.0,
        }
    }
}

/// Complex transverse envelope sampled on a [`Grid`].
///
/// Values are row-major (`index = j·nx + i`). A `Field2D` is never mutated
/// in place by the public API; operations return new fields.
#[derive(Debug, Clone, PartialEq)]
pub struct Field2D {
    grid: Grid,
    values: Vec<Complex64>,
    unit: UnitTag,
}

impl Field2D {
    pub fn new(grid: Grid, values: Vec<Complex64>, unit: UnitTag) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} samples for a {}x{} grid",
                values.len(),
                grid.nx(),
                grid.ny()
            )));
        }
        if let Some(n) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Degenerate(format!("non-finite sample at index {n}")));
        }
        Ok(Field2D { grid, values, unit })
    }

    pub fn zeros(grid: Grid, unit: UnitTag) -> Self {
        Field2D { grid, values: vec![Complex64::new(0.0, 0.0); grid.len()], unit }
    }

    /// Build from a closure of the sample coordinates `(x, y)`.
    pub fn from_fn(grid: Grid, unit: UnitTag, f: impl Fn(f64, f64) -> Complex64) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.ny() {
            let y = grid.y(j);
            for i in 0..grid.nx() {
                values.push(f(grid.x(i), y));
            }
        }
        Field2D::new(grid, values, unit)
    }

    pub(crate) fn from_parts_unchecked(grid: Grid, values: Vec<Complex64>, unit: UnitTag) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Field2D { grid, values, unit }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
    pub fn unit(&self) -> UnitTag {
        self.unit
    }
    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn with_values(&self, values: Vec<Complex64>) -> Result<Self> {
        Field2D::new(self.grid, values, self.unit)
    }

    pub fn with_unit(mut self, unit: UnitTag) -> Self {
        self.unit = unit;
        self
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.values[self.grid.index(i, j)]
    }

    /// `|𝓔|²` per sample.
    pub fn density(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    pub fn max_density(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).fold(0.0, f64::max)
    }

    pub fn mean_density(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() / self.values.len() as f64
    }

    /// `Σ|𝓔|²·dx·dy`.
    pub fn norm2(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.cell_area()
    }

    /// Optical power `Σ I·dx·dy`, `I = ½ n₀ c ε₀ |𝓔|²` for physical fields.
    pub fn power(&self, n0: f64) -> f64 {
        self.unit.intensity_factor(n0) * self.norm2()
    }

    /// Per-sample intensity.
    pub fn intensity(&self, n0: f64) -> Vec<f64> {
        let f = self.unit.intensity_factor(n0);
        self.values.iter().map(|v| f * v.norm_sqr()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn scaled(&self, factor: Complex64) -> Result<Self> {
        self.with_values(self.values.iter().map(|v| v * factor).collect())
    }

    pub fn add(&self, other: &Field2D) -> Result<Self> {
        self.check_same_grid(other)?;
        self.with_values(self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect())
    }

    pub fn check_same_grid(&self, other: &Field2D) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!("{:?} vs {:?}", self.grid, other.grid)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite_samples() {
        let g = Grid::new(8, 8, 1.0, 1.0).unwrap();
        let mut v = vec![Complex64::new(1.0, 0.0); 64];
        v[10] = Complex64::new(f64::NAN, 0.0);
        assert!(Field2D::new(g, v, UnitTag::Physical).is_err());
    }

    #[test]
    fn power_uses_intensity_convention() {
        let g = Grid::new(8, 8, 0.5, 0.5).unwrap();
        let f = Field2D::new(g, vec![Complex64::new(2.0, 0.0); 64], UnitTag::Physical).unwrap();
        let expected = 0.5 * 1.5 * C * EPSILON_0 * 4.0 * 64.0 * 0.25;
        assert!((f.power(1.5) - expected).abs() < 1e-15 * expected.abs().max(1.0));
        let d = f.clone().with_unit(UnitTag::Dimensionless);
        assert_eq!(d.power(1.5), 4.0 * 64.0 * 0.25);
    }
}
