use std::f64::consts::PI;

use num_complex::Complex64;

use crate::field::Field2D;
use crate::{Error, Result};

/// Multiplies `field` by `tanh(|r - c|/ξ_core)·exp(i·charge·θ)`.
///
/// `core_width` defaults to four grid cells. A charge of zero returns the
/// field unchanged. The phase is built from plain (non-periodic) angles, so
/// a net charge leaves a branch cut across the periodic seam; imprint on a
/// beam that is dark at the boundary when that matters.
pub fn imprint_vortex(field: &Field2D, charge: i32, center: (f64, f64), core_width: Option<f64>) -> Result<Field2D> {
    let grid = *field.grid();
    if !grid.contains(center.0, center.1) {
        return Err(Error::param("vortex.center", "vortex center outside the grid"));
    }
    if charge == 0 {
        return Ok(field.clone());
    }
    let xi = core_width.unwrap_or(4.0 * grid.dx().max(grid.dy()));
    if !(xi.is_finite() && xi > 0.0) {
        return Err(Error::param("vortex.core_width", "core width must be positive"));
    }
    let q = charge as f64;
    let values = field
        .values()
        .iter()
        .enumerate()
        .map(|(n, v)| {
            let dx = grid.x(n % grid.nx()) - center.0;
            let dy = grid.y(n / grid.nx()) - center.1;
            let r = dx.hypot(dy);
            v * Complex64::from_polar((r / xi).tanh(), q * dy.atan2(dx))
        })
        .collect();
    field.with_values(values)
}

/// Dark stripe along the line `x·cosθ + y·sinθ = position`.
///
/// The amplitude is multiplied by `(1 - c) + c·|tanh(d/w)|` with `d` the
/// signed distance to the line, and the half-plane `d > 0` receives a phase
/// step of `π·c`. Contrast 1 is a black soliton `tanh(d/w)`.
pub fn imprint_dark_stripe(field: &Field2D, position: f64, angle: f64, contrast: f64, width: f64) -> Result<Field2D> {
    if !(0.0..=1.0).contains(&contrast) {
        return Err(Error::param("stripe.contrast", "contrast must lie in [0, 1]"));
    }
    if !(width.is_finite() && width > 0.0) {
        return Err(Error::param("stripe.width", "width must be positive"));
    }
    if field.max_density() == 0.0 {
        return Err(Error::Degenerate("cannot imprint a stripe on a zero field".into()));
    }
    if contrast == 0.0 {
        return Ok(field.clone());
    }
    let grid = *field.grid();
    let (c, s) = (angle.cos(), angle.sin());
    let step = Complex64::from_polar(1.0, PI * contrast);
    let values = field
        .values()
        .iter()
        .enumerate()
        .map(|(n, v)| {
            let d = grid.x(n % grid.nx()) * c + grid.y(n / grid.nx()) * s - position;
            let amp = (1.0 - contrast) + contrast * (d / width).tanh().abs();
            let v = v * amp;
            if d > 0.0 {
                v * step
            } else {
                v
            }
        })
        .collect();
    field.with_values(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Grid, UnitTag};

    fn flat(g: Grid) -> Field2D {
        Field2D::new(g, vec![Complex64::new(1.0, 0.0); g.len()], UnitTag::Dimensionless).unwrap()
    }

    #[test]
    fn zero_charge_is_identity() {
        let g = Grid::new(16, 16, 1.0, 1.0).unwrap();
        let f = flat(g);
        assert_eq!(imprint_vortex(&f, 0, (0.0, 0.0), None).unwrap(), f);
    }

    #[test]
    fn unit_charge_winds_two_pi() {
        let g = Grid::new(32, 32, 1.0, 1.0).unwrap();
        let f = imprint_vortex(&flat(g), 1, (0.3, 0.2), None).unwrap();
        // walk the boundary of a 10x10 square around the core, summing wrapped increments
        let mut path = Vec::new();
        for i in 11..21 {
            path.push((i, 11));
        }
        for j in 11..21 {
            path.push((21, j));
        }
        for i in (12..=21).rev() {
            path.push((i, 21));
        }
        for j in (12..=21).rev() {
            path.push((11, j));
        }
        let mut total = 0.0;
        for w in 0..path.len() {
            let (a, b) = (path[w], path[(w + 1) % path.len()]);
            total += (f.at(b.0, b.1) * f.at(a.0, a.1).conj()).arg();
        }
        assert!((total - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn center_outside_rejected() {
        let g = Grid::new(16, 16, 1.0, 1.0).unwrap();
        assert!(imprint_vortex(&flat(g), 1, (100.0, 0.0), None).is_err());
    }

    #[test]
    fn stripe_contrast_limits() {
        let g = Grid::new(32, 32, 1.0, 1.0).unwrap();
        let f = flat(g);
        assert_eq!(imprint_dark_stripe(&f, 0.0, 0.0, 0.0, 2.0).unwrap(), f);
        assert!(imprint_dark_stripe(&f, 0.0, 0.0, 1.2, 2.0).is_err());

        let black = imprint_dark_stripe(&f, 0.0, 0.0, 1.0, 2.0).unwrap();
        assert_eq!(black.at(16, 5).norm(), 0.0);
        let jump = (black.at(20, 5) * black.at(12, 5).conj()).arg().abs();
        assert!((jump - PI).abs() < 1e-12);

        // contrast 0.5: dip to (1 - 0.5) in amplitude on the line
        let grey = imprint_dark_stripe(&f, 0.0, 0.0, 0.5, 2.0).unwrap();
        let min = grey.density().into_iter().fold(f64::INFINITY, f64::min);
        assert!((min - 0.25).abs() < 1e-15);
    }
}
