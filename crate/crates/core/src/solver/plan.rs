use crate::{Error, Result};

/// Axial discretisation of a propagation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepPlan {
    pub n_steps: usize,
    pub dz: f64,
    /// Record a snapshot every this many steps; 0 disables snapshots.
    pub snapshot_every: usize,
}

impl StepPlan {
    /// `n_steps` equal steps covering `length`. Zero steps is a no-op plan.
    pub fn new(length: f64, n_steps: usize) -> Result<Self> {
        if !(length.is_finite() && length >= 0.0) {
            return Err(Error::param("plan.length", "length must be non-negative"));
        }
        if n_steps == 0 {
            return Ok(StepPlan { n_steps, dz: 0.0, snapshot_every: 0 });
        }
        let dz = length / n_steps as f64;
        if !(dz > 0.0) {
            return Err(Error::param("plan.n_steps", "step size must be positive"));
        }
        Ok(StepPlan { n_steps, dz, snapshot_every: 0 })
    }

    /// Explicit step size overriding `L/n`.
    pub fn with_dz(n_steps: usize, dz: f64) -> Result<Self> {
        if !(dz.is_finite() && dz > 0.0) {
            return Err(Error::param("plan.dz", "step size must be positive"));
        }
        Ok(StepPlan { n_steps, dz, snapshot_every: 0 })
    }

    pub fn with_snapshots(mut self, every: usize) -> Self {
        self.snapshot_every = every;
        self
    }

    pub fn length(&self) -> f64 {
        self.n_steps as f64 * self.dz
    }

    pub(crate) fn wants_snapshot(&self, completed_steps: usize) -> bool {
        self.snapshot_every > 0 && completed_steps.is_multiple_of(self.snapshot_every)
    }
}
