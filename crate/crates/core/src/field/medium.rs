use std::f64::consts::PI;

use crate::consts::{C, EPSILON_0};
use crate::field::Potential;
use crate::{Error, Result};

/// Optical parameters of the nonlinear medium.
///
/// The Kerr response is stored as `χ⁽³⁾` (m²/V²). Negative values are
/// defocusing, i.e. repulsive photon-photon interactions. The `n₂` form
/// (m²/W) is converted with `n₂ = χ⁽³⁾/(n₀² c ε₀)`, which follows from the
/// intensity convention `I = ½ n₀ c ε₀ |𝓔|²`.
#[derive(Debug, Clone)]
pub struct MediumParams {
    pub wavelength: f64,
    pub n0: f64,
    pub chi3: f64,
    /// Intensity absorption coefficient, 1/m.
    pub alpha: f64,
    /// Medium length, m.
    pub length: f64,
    /// Saturation intensity; `None` is a pure Kerr medium.
    pub i_sat: Option<f64>,
    pub potential: Option<Potential>,
}

impl MediumParams {
    pub fn new(wavelength: f64, n0: f64, chi3: f64, length: f64) -> Result<Self> {
        let m = MediumParams { wavelength, n0, chi3, alpha: 0.0, length, i_sat: None, potential: None };
        m.validate()?;
        Ok(m)
    }

    /// Same as [`MediumParams::new`] with the nonlinearity given as `n₂` in m²/W.
    pub fn from_n2(wavelength: f64, n0: f64, n2: f64, length: f64) -> Result<Self> {
        Self::new(wavelength, n0, n2 * n0 * n0 * C * EPSILON_0, length)
    }

    /// Medium in which Eq. `i∂ψ/∂τ = (-½∇² + |ψ|²)ψ` is solved directly:
    /// `k₀ = n₀ = 1` and `(k₀/2n₀)χ⁽³⁾ = -1`. Use with dimensionless fields.
    pub fn dimensionless(length: f64) -> Result<Self> {
        Self::new(2.0 * PI, 1.0, -2.0, length)
    }

    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        self.alpha = alpha;
        self.validate()?;
        Ok(self)
    }

    pub fn with_saturation(mut self, i_sat: f64) -> Result<Self> {
        self.i_sat = Some(i_sat);
        self.validate()?;
        Ok(self)
    }

    pub fn with_potential(mut self, potential: Potential) -> Self {
        self.potential = Some(potential);
        self
    }

    pub fn with_length(mut self, length: f64) -> Result<Self> {
        self.length = length;
        self.validate()?;
        Ok(self)
    }

    pub fn with_chi3(mut self, chi3: f64) -> Result<Self> {
        self.chi3 = chi3;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.wavelength.is_finite() && self.wavelength > 0.0) {
            return Err(Error::param("medium.lambda", "wavelength must be positive"));
        }
        if !(self.n0.is_finite() && self.n0 > 0.0) {
            return Err(Error::param("medium.n0", "linear index must be positive"));
        }
        if !self.chi3.is_finite() {
            return Err(Error::param("medium.chi3", "must be finite"));
        }
        if !self.alpha.is_finite() {
            return Err(Error::param("medium.alpha", "must be finite"));
        }
        if !(self.length.is_finite() && self.length >= 0.0) {
            return Err(Error::param("medium.length", "must be non-negative"));
        }
        if let Some(s) = self.i_sat {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::param("medium.i_sat", "saturation intensity must be positive"));
            }
        }
        Ok(())
    }

    /// Vacuum wavenumber `k₀ = 2π/λ`.
    pub fn k0(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    /// `n₀k₀`, the inverse of the kinetic coefficient (photon effective mass proxy).
    pub fn effective_mass(&self) -> f64 {
        self.n0 * self.k0()
    }

    /// Signed interaction coefficient `k₀χ⁽³⁾/(2n₀)`, 1/(m·(V/m)²).
    pub fn interaction(&self) -> f64 {
        self.k0() * self.chi3 / (2.0 * self.n0)
    }

    pub fn n2(&self) -> f64 {
        self.chi3 / (self.n0 * self.n0 * C * EPSILON_0)
    }

    pub fn is_defocusing(&self) -> bool {
        self.chi3 < 0.0
    }

    /// Nonlinear index shift `Δn = χ⁽³⁾|𝓔|²/(2n₀)` at field density `rho = |𝓔|²`.
    pub fn index_shift(&self, rho: f64) -> f64 {
        self.chi3 * rho / (2.0 * self.n0)
    }

    /// Healing length `ξ = 1/√(n₀k₀·|g|ρ)` at density `rho`.
    pub fn healing_length(&self, rho: f64) -> f64 {
        1.0 / (self.effective_mass() * self.interaction().abs() * rho).sqrt()
    }

    /// Bogoliubov sound speed `c_s = √(|Δn|/n₀)` (transverse m per axial m).
    pub fn sound_speed(&self, rho: f64) -> f64 {
        (self.index_shift(rho).abs() / self.n0).sqrt()
    }

    /// Nonlinear length `z_NL = 1/(|g|ρ)`.
    pub fn nonlinear_length(&self, rho: f64) -> f64 {
        1.0 / (self.interaction().abs() * rho)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n2_round_trip() {
        let m = MediumParams::from_n2(780e-9, 1.2, -3e-9, 0.01).unwrap();
        assert!((m.n2() + 3e-9).abs() < 1e-22);
    }

    #[test]
    fn negative_wavelength_names_key() {
        let e = MediumParams::new(-1.0, 1.0, 0.0, 0.01).unwrap_err();
        assert!(e.to_string().contains("medium.lambda"));
    }

    #[test]
    fn sound_speed_and_healing_length_are_consistent() {
        let m = MediumParams::new(780e-9, 1.0, -1e-10, 0.05).unwrap();
        let rho = 3.0e5;
        // c_s = 1/(m* ξ)
        let lhs = m.sound_speed(rho);
        let rhs = 1.0 / (m.effective_mass() * m.healing_length(rho));
        assert!((lhs - rhs).abs() < 1e-12 * lhs);
    }

    #[test]
    fn dimensionless_medium_has_unit_coefficients() {
        let m = MediumParams::dimensionless(1.0).unwrap();
        assert!((m.k0() - 1.0).abs() < 1e-15);
        assert!((m.interaction() + 1.0).abs() < 1e-15);
        assert!((m.effective_mass() - 1.0).abs() < 1e-15);
    }
}
