//! Symmetric split-step spectral integration of
//!
//! `i∂𝓔/∂z = [-∇⊥²/(2n₀k₀) - k₀δn - (k₀/2n₀)χ⁽³⁾|𝓔|² - iα/2]𝓔`.
//!
//! Each step applies a kinetic half step, a full pointwise nonlinear and
//! potential step, and another kinetic half step. Consecutive kinetic
//! halves are fused whenever no real-space output is needed in between.

mod ops;
mod plan;
mod propagate;
mod rescale;

pub use ops::{kinetic_half_step, nonlinear_step, NonlinearOp, StepOutcome};
pub use plan::StepPlan;
pub use propagate::{propagate, PropagationRecord, Propagator, RunMetrics, Snapshot};
pub use rescale::{rescale_dimensionless, Rescaled};

/// Per-step phase above which a warning is recorded.
pub const PHASE_WARN: f64 = 0.5;
/// Per-step phase above which propagation aborts.
pub const PHASE_ABORT: f64 = std::f64::consts::PI;
