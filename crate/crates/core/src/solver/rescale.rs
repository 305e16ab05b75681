use crate::field::{Field2D, Grid, MediumParams, UnitTag};
use crate::{Error, Result};

/// A field expressed in healing lengths and nonlinear lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct Rescaled {
    /// `ψ = 𝓔/√ρ(L)` on a grid measured in units of `ξ`.
    pub psi: Field2D,
    /// `τ = L/z_NL`.
    pub tau: f64,
    /// Healing length, m.
    pub xi: f64,
    /// Nonlinear length, m.
    pub z_nl: f64,
}

/// Rescale an output field. `rho` is the reference density `ρ(L)`; when
/// `None` the peak density of `field` is used.
pub fn rescale_dimensionless(field: &Field2D, medium: &MediumParams, rho: Option<f64>) -> Result<Rescaled> {
    if medium.chi3 == 0.0 {
        return Err(Error::Degenerate("rescaling needs a non-zero nonlinearity".into()));
    }
    let rho = rho.unwrap_or_else(|| field.max_density());
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::Degenerate("reference density must be positive".into()));
    }
    let z_nl = medium.nonlinear_length(rho);
    let xi = medium.healing_length(rho);
    let g = field.grid();
    let grid = Grid::new(g.nx(), g.ny(), g.dx() / xi, g.dy() / xi)?;
    let s = 1.0 / rho.sqrt();
    let psi = Field2D::new(grid, field.values().iter().map(|v| v * s).collect(), UnitTag::Dimensionless)?;
    Ok(Rescaled { psi, tau: medium.length / z_nl, xi, z_nl })
}
