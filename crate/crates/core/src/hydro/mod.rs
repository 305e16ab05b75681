//! Fluid diagnostics of a paraxial field: Madelung variables, vortices,
//! Bogoliubov dispersion, intensity statistics, coherence and the static
//! structure factor.

mod dispersion;
mod fit;
mod madelung;
mod stats;
mod vortex;

pub use dispersion::{
    bogoliubov_group_velocity, bogoliubov_mu, bogoliubov_omega, dispersion_from_group_velocity, measure_group_velocity,
    sound_speed_scaling, DispersionCurve, GroupVelocity, GroupVelocityConfig, ProbeSeeding, ScalingConfig,
    ScalingResult, ScalingSample,
};
pub use madelung::{circulation, madelung, winding_number, FluidDiagnostics, FluidScalars, DEFAULT_DENSITY_FLOOR};
pub use stats::{
    coherence_g1, intensity_statistics, structure_factor, G1Method, G1Profile, IntensityStats, StructureFactor,
    MIN_REALISATIONS,
};
pub use vortex::{detect_vortices, Vortex, VortexCluster, VortexSet};
