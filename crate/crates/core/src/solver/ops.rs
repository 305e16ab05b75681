use num_complex::Complex64;

use crate::fft::Fft2;
use crate::field::{Field2D, Grid, MediumParams, Potential, UnitTag};
use crate::{Error, Result};

/// Spectral multiplier `exp(-i|k|²·dz/(2n₀k₀))` for every FFT-ordered mode.
pub(crate) fn kinetic_multiplier(grid: &Grid, dz: f64, effective_mass: f64) -> Vec<Complex64> {
    let c = -dz / (2.0 * effective_mass);
    grid.k_squared().into_iter().map(|k2| Complex64::from_polar(1.0, c * k2)).collect()
}

/// Half a step (`dz/2`) of free diffraction.
pub fn kinetic_half_step(field: &Field2D, dz: f64, k0: f64, n0: f64) -> Field2D {
    let grid = *field.grid();
    let mult = kinetic_multiplier(&grid, 0.5 * dz, n0 * k0);
    let mut buf = field.values().to_vec();
    let mut fft = Fft2::new(&grid);
    fft.forward(&mut buf);
    buf.iter_mut().zip(&mult).for_each(|(v, m)| *v *= m);
    fft.inverse(&mut buf);
    Field2D::from_parts_unchecked(grid, buf, field.unit())
}

/// Diagnostics of one pointwise step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    /// Largest `|phase|` applied to any sample, rad.
    pub max_phase: f64,
    /// Largest per-sample intensity gain factor (`< 1` under pure loss).
    pub max_gain: f64,
    pub finite: bool,
}

impl StepOutcome {
    /// Gain media are allowed but a tenfold growth in one step is suspicious.
    pub fn gain_flagged(&self) -> bool {
        self.max_gain > 10.0
    }
}

/// Pointwise part of a step: potential, absorption and Kerr phase.
///
/// Over a step of length `dz` the sample intensity decays at the local rate
/// `a = α + 2k₀·Im δn`; the nonlinear phase is the exact integral of the
/// Kerr (or saturable) phase rate along that decay, seeded with `|𝓔|²` at
/// step entry. With `a = 0` this is simply `(k₀/2n₀)χ⁽³⁾|𝓔|²·dz`.
#[derive(Debug, Clone, Copy)]
pub struct NonlinearOp<'a> {
    k0: f64,
    gamma: f64,
    alpha: f64,
    intensity_factor: f64,
    i_sat: Option<f64>,
    potential: Option<&'a Potential>,
}

impl<'a> NonlinearOp<'a> {
    pub fn new(medium: &'a MediumParams, unit: UnitTag) -> Self {
        NonlinearOp {
            k0: medium.k0(),
            gamma: medium.interaction(),
            alpha: medium.alpha,
            intensity_factor: unit.intensity_factor(medium.n0),
            i_sat: medium.i_sat,
            potential: medium.potential.as_ref().filter(|p| !p.is_zero()),
        }
    }

    /// True when the operator is a uniform multiplier that commutes with diffraction.
    pub fn commutes_with_kinetic(&self) -> bool {
        self.gamma == 0.0 && self.potential.is_none()
    }

    /// Peak nonlinear plus potential phase rate for densities up to `max_rho`.
    pub fn phase_rate(&self, max_rho: f64) -> f64 {
        let pot = self.potential.map_or(0.0, |p| self.k0 * p.max_abs_real());
        pot + self.gamma.abs() * max_rho
    }

    pub fn apply(&self, values: &mut [Complex64], dz: f64, z_mid: f64) -> StepOutcome {
        let mut out = StepOutcome { max_phase: 0.0, max_gain: 0.0, finite: true };
        let scale = self.potential.map_or(0.0, |p| p.scale_at(z_mid));
        let pot = self.potential.map(|p| p.values());
        let uniform_rate = self.alpha;
        let uniform_leff = effective_length(uniform_rate, dz);
        let uniform_amp = (-0.5 * uniform_rate * dz).exp();
        for (n, v) in values.iter_mut().enumerate() {
            let dn = pot.map_or(Complex64::new(0.0, 0.0), |p| p[n] * scale);
            let (rate, leff, amp) = if dn.im == 0.0 {
                (uniform_rate, uniform_leff, uniform_amp)
            } else {
                let a = self.alpha + 2.0 * self.k0 * dn.im;
                (a, effective_length(a, dz), (-0.5 * a * dz).exp())
            };
            let rho = v.norm_sqr();
            let nl = match self.i_sat {
                None => self.gamma * rho * leff,
                Some(i_sat) => {
                    self.gamma / self.intensity_factor
                        * saturated_integral(self.intensity_factor * rho, i_sat, rate, dz)
                }
            };
            let phase = self.k0 * dn.re * dz + nl;
            *v *= Complex64::from_polar(amp, phase);
            out.max_phase = out.max_phase.max(phase.abs());
            out.max_gain = out.max_gain.max(amp * amp);
            if !(v.re.is_finite() && v.im.is_finite()) {
                out.finite = false;
            }
        }
        out
    }
}

/// `∫₀^dz e^{-a z} dz`.
fn effective_length(a: f64, dz: f64) -> f64 {
    let s = a * dz;
    if s == 0.0 {
        dz
    } else {
        -(-s).exp_m1() / a
    }
}

/// `∫₀^dz I(z)/(1 + I(z)/I_sat) dz` with `I(z) = I₀e^{-a z}`.
fn saturated_integral(i0: f64, i_sat: f64, a: f64, dz: f64) -> f64 {
    let x = i0 / i_sat;
    let s = a * dz;
    if s == 0.0 {
        return i0 * dz / (1.0 + x);
    }
    let y = -x * (-s).exp_m1() / (1.0 + x * (-s).exp());
    i_sat * y.ln_1p() / a
}

/// One pointwise step of length `dz` with the potential evaluated at `z_mid`.
pub fn nonlinear_step(field: &Field2D, dz: f64, medium: &MediumParams, z_mid: f64) -> Result<(Field2D, StepOutcome)> {
    if let Some(p) = &medium.potential {
        if p.grid() != field.grid() {
            return Err(Error::GridMismatch("potential and field grids differ".into()));
        }
    }
    let op = NonlinearOp::new(medium, field.unit());
    let mut buf = field.values().to_vec();
    let outcome = op.apply(&mut buf, dz, z_mid);
    if !outcome.finite {
        return Err(Error::NonFinite { z: z_mid, step: 0 });
    }
    Ok((Field2D::from_parts_unchecked(*field.grid(), buf, field.unit()), outcome))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{build_potential, plane_wave, PotentialKind};

    fn grid() -> Grid {
        Grid::new(32, 32, 4e-6, 4e-6).unwrap()
    }

    #[test]
    fn kinetic_leaves_plane_wave_unchanged() {
        let f = plane_wave(&grid(), 1e6, 1.0).unwrap();
        let g = kinetic_half_step(&f, 1e-3, 8e6, 1.0);
        for (a, b) in f.values().iter().zip(g.values()) {
            assert!((a - b).norm() < 1e-12 * a.norm());
        }
    }

    #[test]
    fn kinetic_on_single_mode_is_pure_phase() {
        let g = grid();
        let f = Field2D::from_fn(g, UnitTag::Physical, |x, _| Complex64::from_polar(3.0, 5.0 * g.dkx() * x)).unwrap();
        let out = kinetic_half_step(&f, 1e-5, 8e6, 1.0);
        for v in out.values() {
            assert!((v.norm() - 3.0).abs() < 1e-14 * 3.0 * 10.0);
        }
        let k = 5.0 * g.dkx();
        let expected_phase = -k * k * 0.5e-5 / (2.0 * 8e6);
        let ratio = out.values()[7] / f.values()[7];
        assert!((ratio.arg() - expected_phase).abs() < 1e-12);
    }

    #[test]
    fn trivial_medium_is_identity() {
        let f = plane_wave(&grid(), 1e6, 1.0).unwrap();
        let m = MediumParams::new(780e-9, 1.0, 0.0, 0.01).unwrap();
        let (g, _) = nonlinear_step(&f, 1e-3, &m, 0.0).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn self_phase_modulation_keeps_density() {
        let f = plane_wave(&grid(), 1e7, 1.0).unwrap();
        let m = MediumParams::new(780e-9, 1.0, -1e-15, 0.01).unwrap();
        let (g, out) = nonlinear_step(&f, 1e-3, &m, 0.0).unwrap();
        let expected = m.interaction() * f.values()[0].norm_sqr() * 1e-3;
        for (a, b) in f.values().iter().zip(g.values()) {
            assert!((a.norm_sqr() - b.norm_sqr()).abs() <= 1e-14 * a.norm_sqr());
            assert!(((b / a).arg() - expected).abs() < 1e-12);
        }
        assert!((out.max_phase - expected.abs()).abs() < 1e-12);
    }

    #[test]
    fn absorption_per_step() {
        let f = plane_wave(&grid(), 1e6, 1.0).unwrap();
        let m = MediumParams::new(780e-9, 1.0, 0.0, 0.01).unwrap().with_alpha(10.0).unwrap();
        let (g, _) = nonlinear_step(&f, 0.01, &m, 0.0).unwrap();
        let ratio = g.power(1.0) / f.power(1.0);
        assert!((ratio - 0.904837418).abs() < 1e-9);
        assert!((ratio - (-0.1f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn strong_gain_is_flagged() {
        let g = grid();
        let f = plane_wave(&g, 1e6, 1.0).unwrap();
        let pot = build_potential(&g, &PotentialKind::Uniform { value: Complex64::new(0.0, -2e-4) }).unwrap();
        let m = MediumParams::new(780e-9, 1.0, 0.0, 0.01).unwrap().with_potential(pot);
        let (_, out) = nonlinear_step(&f, 1e-3, &m, 0.0).unwrap();
        // a = 2k₀·Im δn = -3222 1/m, gain e^{3.22} ≈ 25
        assert!(out.gain_flagged());
    }

    #[test]
    fn saturation_reduces_to_kerr_at_low_intensity() {
        let i = 1e3;
        let sat = saturated_integral(i, 1e12, 5.0, 1e-3);
        let kerr = i * effective_length(5.0, 1e-3);
        assert!(((sat - kerr) / kerr).abs() < 1e-8);
        // a = 0 limit
        let a0 = saturated_integral(i, 2e3, 0.0, 1e-3);
        assert!((a0 - i * 1e-3 / 1.5).abs() < 1e-15);
        let tiny = saturated_integral(i, 2e3, 1e-9, 1e-3);
        assert!(((tiny - a0) / a0).abs() < 1e-9);
    }

    #[test]
    fn saturated_integral_matches_quadrature() {
        let (i0, is, a, dz) = (3e3, 1e3, 40.0, 0.02);
        let n = 200_000;
        let h = dz / n as f64;
        let f = |z: f64| {
            let i = i0 * (-a * z).exp();
            i / (1.0 + i / is)
        };
        let mut q = 0.5 * (f(0.0) + f(dz));
        for k in 1..n {
            q += f(k as f64 * h);
        }
        q *= h;
        assert!(((saturated_integral(i0, is, a, dz) - q) / q).abs() < 1e-9);
    }
}
