use std::fmt::Write as _;
use std::path::Path;
use std::time::{Duration, Instant};

use num_complex::Complex64;

use super::ops::{kinetic_multiplier, NonlinearOp};
use super::{StepPlan, PHASE_ABORT, PHASE_WARN};
use crate::fft::Fft2;
use crate::field::{Field2D, Grid, MediumParams};
use crate::{Error, Result};

/// Field recorded at an intermediate plane.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub z: f64,
    pub field: Field2D,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub n_steps: usize,
    pub dz: f64,
    /// Largest phase any operator applied in one step, rad.
    pub max_phase_per_step: f64,
    pub wall_time: Duration,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationRecord {
    pub field: Field2D,
    pub snapshots: Vec<Snapshot>,
    /// `(z, power)` at entry and after every step.
    pub power: Vec<(f64, f64)>,
    pub metrics: RunMetrics,
}

impl PropagationRecord {
    pub fn metrics_text(&self) -> String {
        let m = &self.metrics;
        let mut s = String::new();
        let _ = writeln!(s, "n_steps = {}", m.n_steps);
        let _ = writeln!(s, "dz = {:e}", m.dz);
        let _ = writeln!(s, "max_phase_per_step = {:e}", m.max_phase_per_step);
        let _ = writeln!(s, "wall_time_s = {:.6}", m.wall_time.as_secs_f64());
        let _ = writeln!(s, "snapshots = {}", self.snapshots.len());
        for w in &m.warnings {
            let _ = writeln!(s, "warning = {w}");
        }
        s
    }

    pub fn power_csv(&self) -> String {
        let mut s = String::from("z,power\n");
        for (z, p) in &self.power {
            let _ = writeln!(s, "{z:e},{p:e}");
        }
        s
    }

    pub fn write_metrics(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.metrics_text())?;
        Ok(())
    }

    pub fn write_power_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.power_csv())?;
        Ok(())
    }
}

/// Spectral samples below this fraction of the peak are ignored when
/// estimating the kinetic phase per step.
const BAND_FLOOR: f64 = 1e-12;
/// Steps between re-estimates of the occupied spectral band.
const BAND_CHECK_EVERY: usize = 8;

/// Reusable stepping machinery for one grid, medium and plan.
///
/// Keeps the FFT plans and multipliers so ensembles of fields can be pushed
/// through the same medium without rebuilding them.
pub struct Propagator<'a> {
    medium: &'a MediumParams,
    plan: StepPlan,
    grid: Grid,
    fft: Fft2,
    k2: Vec<f64>,
    half: Vec<Complex64>,
    full: Vec<Complex64>,
}

impl<'a> Propagator<'a> {
    pub fn new(grid: Grid, medium: &'a MediumParams, plan: StepPlan) -> Result<Self> {
        medium.validate()?;
        if let Some(p) = &medium.potential {
            if p.grid() != &grid {
                return Err(Error::GridMismatch(format!("potential on {:?}, field on {:?}", p.grid(), grid)));
            }
        }
        if plan.n_steps > 0 && !(plan.dz.is_finite() && plan.dz > 0.0) {
            return Err(Error::param("plan.dz", "step size must be positive"));
        }
        let mass = medium.effective_mass();
        Ok(Propagator {
            medium,
            plan,
            grid,
            fft: Fft2::new(&grid),
            k2: grid.k_squared(),
            half: kinetic_multiplier(&grid, 0.5 * plan.dz, mass),
            full: kinetic_multiplier(&grid, plan.dz, mass),
        })
    }

    pub fn plan(&self) -> &StepPlan {
        &self.plan
    }

    /// Kinetic phase per step for the band actually occupied by `spec`.
    fn kinetic_phase(&self, spec: &[Complex64]) -> f64 {
        let peak = spec.iter().map(|v| v.norm_sqr()).fold(0.0, f64::max);
        let floor = peak * BAND_FLOOR;
        let k2max =
            spec.iter().zip(&self.k2).filter(|(v, _)| v.norm_sqr() > floor).map(|(_, k)| *k).fold(0.0, f64::max);
        k2max * self.plan.dz / (2.0 * self.medium.effective_mass())
    }

    pub fn run(&mut self, input: &Field2D) -> Result<PropagationRecord> {
        if input.grid() != &self.grid {
            return Err(Error::GridMismatch(format!("field on {:?}, propagator on {:?}", input.grid(), self.grid)));
        }
        let start = Instant::now();
        let (n, dz) = (self.plan.n_steps, self.plan.dz);
        let unit = input.unit();
        let pfac = unit.intensity_factor(self.medium.n0) * self.grid.cell_area();
        let power = |b: &[Complex64]| pfac * b.iter().map(|v| v.norm_sqr()).sum::<f64>();

        let mut metrics =
            RunMetrics { n_steps: n, dz, max_phase_per_step: 0.0, wall_time: Duration::ZERO, warnings: Vec::new() };
        let mut snapshots = Vec::new();
        let mut trace = vec![(0.0, power(input.values()))];
        if n == 0 {
            metrics.wall_time = start.elapsed();
            return Ok(PropagationRecord { field: input.clone(), snapshots, power: trace, metrics });
        }

        let op = NonlinearOp::new(self.medium, unit);
        // Splitting is exact when the pointwise operator commutes with diffraction.
        let guarded = !op.commutes_with_kinetic();
        let (mut warned_phase, mut warned_gain) = (false, false);

        let mut buf = input.values().to_vec();
        self.fft.forward(&mut buf);
        let mut kin_phase = if guarded { self.kinetic_phase(&buf) } else { 0.0 };
        apply(&mut buf, &self.half);
        self.fft.inverse(&mut buf);

        for s in 0..n {
            let outcome = op.apply(&mut buf, dz, (s as f64 + 0.5) * dz);
            let done = s + 1;
            let z = done as f64 * dz;
            if !outcome.finite {
                return Err(Error::NonFinite { z, step: done });
            }
            if outcome.gain_flagged() && !warned_gain {
                warned_gain = true;
                let msg = format!("intensity gain {:.2}x in one step at z = {z:e}", outcome.max_gain);
                log::warn!("{msg}");
                metrics.warnings.push(msg);
            }
            let phase = outcome.max_phase.max(kin_phase);
            metrics.max_phase_per_step = metrics.max_phase_per_step.max(phase);
            if guarded && phase > PHASE_ABORT {
                return Err(Error::StepResolution { phase, step: done });
            }
            if guarded && phase > PHASE_WARN && !warned_phase {
                warned_phase = true;
                let msg = format!("{phase:.3} rad per step at step {done} exceeds {PHASE_WARN} rad");
                log::warn!("{msg}");
                metrics.warnings.push(msg);
            }
            trace.push((z, power(&buf)));

            self.fft.forward(&mut buf);
            if guarded && done % BAND_CHECK_EVERY == 0 {
                kin_phase = self.kinetic_phase(&buf);
            }
            let last = done == n;
            let snap = self.plan.wants_snapshot(done);
            if last || snap {
                apply(&mut buf, &self.half);
                self.fft.inverse(&mut buf);
                if snap {
                    snapshots.push(Snapshot { z, field: Field2D::from_parts_unchecked(self.grid, buf.clone(), unit) });
                }
                if !last {
                    self.fft.forward(&mut buf);
                    apply(&mut buf, &self.half);
                    self.fft.inverse(&mut buf);
                }
            } else {
                apply(&mut buf, &self.full);
                self.fft.inverse(&mut buf);
            }
        }
        metrics.wall_time = start.elapsed();
        Ok(PropagationRecord {
            field: Field2D::from_parts_unchecked(self.grid, buf, unit),
            snapshots,
            power: trace,
            metrics,
        })
    }
}

fn apply(buf: &mut [Complex64], mult: &[Complex64]) {
    buf.iter_mut().zip(mult).for_each(|(v, m)| *v *= m);
}

/// Propagate `field` through `medium` over `plan`.
pub fn propagate(field: &Field2D, medium: &MediumParams, plan: &StepPlan) -> Result<PropagationRecord> {
    Propagator::new(*field.grid(), medium, *plan)?.run(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::UnitTag;

    #[test]
    fn zero_steps_is_identity() {
        let g = Grid::new(16, 16, 1.0, 1.0).unwrap();
        let f = Field2D::from_fn(g, UnitTag::Dimensionless, |x, y| Complex64::new(x.cos(), y.sin())).unwrap();
        let m = MediumParams::dimensionless(1.0).unwrap();
        let r = propagate(&f, &m, &StepPlan::new(1.0, 0).unwrap()).unwrap();
        assert_eq!(r.field, f);
        assert!(r.snapshots.is_empty());
    }

    #[test]
    fn snapshots_strictly_increase() {
        let g = Grid::new(16, 16, 1.0, 1.0).unwrap();
        let f = Field2D::from_fn(g, UnitTag::Dimensionless, |_, _| Complex64::new(1.0, 0.0)).unwrap();
        let m = MediumParams::dimensionless(1.0).unwrap();
        let r = propagate(&f, &m, &StepPlan::new(1.0, 20).unwrap().with_snapshots(5)).unwrap();
        let zs: Vec<f64> = r.snapshots.iter().map(|s| s.z).collect();
        assert_eq!(zs.len(), 4);
        assert!(zs.windows(2).all(|w| w[1] > w[0]));
        assert!((zs[3] - 1.0).abs() < 1e-12);
        assert_eq!(r.power.len(), 21);
        assert!(r.metrics_text().contains("n_steps = 20"));
    }

    #[test]
    fn coarse_step_aborts() {
        let g = Grid::new(16, 16, 1.0, 1.0).unwrap();
        let f = Field2D::from_fn(g, UnitTag::Dimensionless, |_, _| Complex64::new(1.0, 0.0)).unwrap();
        let m = MediumParams::dimensionless(1.0).unwrap();
        // γρ·dz = 4 rad per step
        let err = propagate(&f, &m, &StepPlan::new(8.0, 2).unwrap()).unwrap_err();
        assert!(matches!(err, Error::StepResolution { .. }));
    }
}
