use std::f64::consts::PI;

use pfl_core::field::{
    build_potential, gaussian_beam, imprint_dark_stripe, imprint_vortex, plane_wave, speckle, Potential, PotentialKind,
};
use pfl_core::gem::{CouplingSchedule, GemConfig, GradientSchedule, OrderingMode, Pulse, PulseTrain};
use pfl_core::hydro::{GroupVelocityConfig, ProbeSeeding, ScalingConfig, MIN_REALISATIONS};
use pfl_core::solver::StepPlan;
use pfl_core::{Complex64, Field2D, Grid, MediumParams, UnitTag};

use super::{increasing, non_negative, positive, ConfigError, ConfigResult, Reader, Section, Writer};

fn core<T>(key: &str, r: pfl_core::Result<T>) -> ConfigResult<T> {
    r.map_err(|e| ConfigError::from_core(key, e))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
}

impl GridSpec {
    pub fn read(mut r: Reader) -> ConfigResult<Self> {
        let nx = r.req_usize("nx")?;
        let ny = r.req_usize("ny")?;
        let dx = r.req_f64("dx")?;
        let dy = r.f64("dy")?.unwrap_or(dx);
        for (k, n) in [("nx", nx), ("ny", ny)] {
            if n < 2 {
                return Err(ConfigError::semantic(r.key(k), "need at least 2 samples"));
            }
        }
        positive(&r, "dx", dx)?;
        positive(&r, "dy", dy)?;
        r.finish()?;
        Ok(GridSpec { nx, ny, dx, dy })
    }

    pub fn write(&self) -> Section {
        let mut w = Writer::new("grid");
        w.usize("nx", self.nx);
        w.usize("ny", self.ny);
        w.f64("dx", self.dx);
        w.f64("dy", self.dy);
        w.finish()
    }

    pub fn build(&self) -> ConfigResult<Grid> {
        core("grid", Grid::new(self.nx, self.ny, self.dx, self.dy))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Units {
    /// Healing-length and nonlinear-length units, `ρ = |ψ|²`.
    Dimensionless,
    /// SI units, fields in V/m.
    Physical,
}

impl Units {
    const NAMES: [(&'static str, Units); 2] = [("dimensionless", Units::Dimensionless), ("physical", Units::Physical)];

    pub fn name(self) -> &'static str {
        match self {
            Units::Dimensionless => "dimensionless",
            Units::Physical => "physical",
        }
    }

    pub fn tag(self) -> UnitTag {
        match self {
            Units::Dimensionless => UnitTag::Dimensionless,
            Units::Physical => UnitTag::Physical,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MediumSpec {
    pub units: Units,
    pub lambda: Option<f64>,
    pub n0: Option<f64>,
    pub chi3: Option<f64>,
    pub n2: Option<f64>,
    pub alpha: f64,
    pub i_sat: Option<f64>,
    pub length: Option<f64>,
}

impl MediumSpec {
    pub const DEFAULT_WAVELENGTH: f64 = 780e-9;

    pub fn read(mut r: Reader) -> ConfigResult<Self> {
        let units = r.choice("units", &Units::NAMES)?.unwrap_or(Units::Dimensionless);
        let m = MediumSpec {
            units,
            lambda: r.f64("lambda")?,
            n0: r.f64("n0")?,
            chi3: r.f64("chi3")?,
            n2: r.f64("n2")?,
            alpha: r.f64("alpha")?.unwrap_or(0.0),
            i_sat: r.f64("i_sat")?,
            length: r.f64("length")?,
        };
        if units == Units::Dimensionless {
            for (k, v) in [("lambda", m.lambda), ("n0", m.n0), ("n2", m.n2)] {
                if v.is_some() {
                    return Err(ConfigError::semantic(r.key(k), "only valid with units = physical"));
                }
            }
        }
        if m.chi3.is_some() && m.n2.is_some() {
            return Err(ConfigError::semantic(r.key("n2"), "give either chi3 or n2, not both"));
        }
        if let Some(l) = m.lambda {
            positive(&r, "lambda", l)?;
        }
        if let Some(n) = m.n0 {
            positive(&r, "n0", n)?;
        }
        if let Some(l) = m.length {
            non_negative(&r, "length", l)?;
        }
        non_negative(&r, "alpha", m.alpha)?;
        r.finish()?;
        Ok(m)
    }

    pub fn write(&self) -> Section {
        let mut w = Writer::new("medium");
        w.text("units", self.units.name());
        w.opt_f64("lambda", self.lambda);
        w.opt_f64("n0", self.n0);
        w.opt_f64("chi3", self.chi3);
        w.opt_f64("n2", self.n2);
        w.f64("alpha", self.alpha);
        w.opt_f64("i_sat", self.i_sat);
        w.opt_f64("length", self.length);
        w.finish()
    }

    pub fn required_length(&self) -> ConfigResult<f64> {
        self.length.ok_or_else(|| ConfigError::semantic("medium.length", "required"))
    }

    /// Medium of the given length; the potential is attached separately.
    pub fn build(&self, length: f64) -> ConfigResult<MediumParams> {
        let base = match self.units {
            Units::Dimensionless => {
                MediumParams::dimensionless(length).and_then(|m| m.with_chi3(self.chi3.unwrap_or(-2.0)))
            }
            Units::Physical => {
                let lambda = self.lambda.unwrap_or(Self::DEFAULT_WAVELENGTH);
                let n0 = self.n0.unwrap_or(1.0);
                match self.n2 {
                    Some(n2) => MediumParams::from_n2(lambda, n0, n2, length),
                    None => MediumParams::new(lambda, n0, self.chi3.unwrap_or(0.0), length),
                }
            }
        };
        let mut m = core("medium", base.and_then(|m| m.with_alpha(self.alpha)))?;
        if let Some(s) = self.i_sat {
            m = core("medium.i_sat", m.with_saturation(s))?;
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanSpec {
    pub n_steps: usize,
    pub snapshot_every: usize,
}

impl PlanSpec {
    pub fn read(mut r: Reader) -> ConfigResult<Self> {
        let p = PlanSpec { n_steps: r.req_usize("n_steps")?, snapshot_every: r.usize("snapshot_every")?.unwrap_or(0) };
        r.finish()?;
        Ok(p)
    }

    pub fn write(&self) -> Section {
        let mut w = Writer::new("plan");
        w.usize("n_steps", self.n_steps);
        w.usize("snapshot_every", self.snapshot_every);
        w.finish()
    }

    pub fn build(&self, length: f64) -> ConfigResult<StepPlan> {
        Ok(core("plan", StepPlan::new(length, self.n_steps))?.with_snapshots(self.snapshot_every))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotentialShape {
    Uniform,
    Defect,
    Lattice,
    PtDimer,
}

impl PotentialShape {
    const NAMES: [(&'static str, PotentialShape); 4] = [
        ("uniform", PotentialShape::Uniform),
        ("defect", PotentialShape::Defect),
        ("lattice", PotentialShape::Lattice),
        ("pt-dimer", PotentialShape::PtDimer),
    ];

    fn name(self) -> &'static str {
        Self::NAMES.iter().find(|(_, s)| *s == self).map(|(n, _)| *n).unwrap_or("uniform")
    }
}

/// Index perturbation `δn`: `amplitude` is its real part, `amplitude_im` its
/// imaginary (loss) part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialSpec {
    pub shape: PotentialShape,
    pub amplitude: f64,
    pub amplitude_im: f64,
    pub waist: Option<f64>,
    pub center: (f64, f64),
    pub spacing: Option<f64>,
    pub orientation: f64,
    pub separation: Option<f64>,
}

impl PotentialSpec {
    pub fn read(mut r: Reader) -> ConfigResult<Self> {
        let shape = r.choice("kind", &PotentialShape::NAMES)?;
        let shape = r.require("kind", shape)?;
        let p = PotentialSpec {
            shape,
            amplitude: r.f64("amplitude")?.unwrap_or(0.0),
            amplitude_im: r.f64("amplitude_im")?.unwrap_or(0.0),
            waist: r.f64("waist")?,
            center: (r.f64("center_x")?.unwrap_or(0.0), r.f64("center_y")?.unwrap_or(0.0)),
            spacing: r.f64("spacing")?,
            orientation: r.f64("orientation")?.unwrap_or(0.0),
            separation: r.f64("separation")?,
        };
        let needs: &[(&str, Option<f64>)] = match shape {
            PotentialShape::Uniform => &[],
            PotentialShape::Defect => &[("waist", p.waist)],
            PotentialShape::Lattice => &[("spacing", p.spacing)],
            PotentialShape::PtDimer => &[("waist", p.waist), ("separation", p.separation)],
        };
        for (k, v) in needs {
            if v.is_none() {
                return Err(ConfigError::semantic(r.key(k), format!("required for kind = {}", shape.name())));
            }
        }
        r.finish()?;
        Ok(p)
    }

    pub fn write(&self) -> Section {
        let mut w = Writer::new("potential");
        w.text("kind", self.shape.name());
        w.f64("amplitude", self.amplitude);
        w.f64("amplitude_im", self.amplitude_im);
        w.opt_f64("waist", self.waist);
        w.f64("center_x", self.center.0);
        w.f64("center_y", self.center.1);
        w.opt_f64("spacing", self.spacing);
        w.f64("orientation", self.orientation);
        w.opt_f64("separation", self.separation);
        w.finish()
    }

    pub fn build(&self, grid: &Grid, _units: Units) -> ConfigResult<Potential> {
        let value = Complex64::new(self.amplitude, self.amplitude_im);
        let kind = match self.shape {
            PotentialShape::Uniform => PotentialKind::Uniform { value },
            PotentialShape::Defect => PotentialKind::GaussianDefect {
                amplitude: value,
                waist: self.waist.unwrap_or_default(),
                center: self.center,
            },
            PotentialShape::Lattice => PotentialKind::Lattice {
                amplitude: self.amplitude,
                spacing: self.spacing.unwrap_or_default(),
                orientation: self.orientation,
            },
            PotentialShape::PtDimer => PotentialKind::PtDimer {
                real_amplitude: self.amplitude,
                imag_amplitude: self.amplitude_im,
                waist: self.waist.unwrap_or_default(),
                separation: self.separation.unwrap_or_default(),
            },
        };
        core("potential", build_potential(grid, &kind))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputKind {
    Gaussian,
    Uniform,
    Speckle,
}

impl InputKind {
    const NAMES: [(&'static str, InputKind); 3] =
        [("gaussian", InputKind::Gaussian), ("uniform", InputKind::Uniform), ("speckle", InputKind::Speckle)];

    fn name(self) -> &'static str {
        Self::NAMES.iter().find(|(_, k)| *k == self).map(|(n, _)| *n).unwrap_or("uniform")
    }
}

/// Dimensionless speckle of mean density `density`.
pub fn fluid_speckle(grid: &Grid, correlation: f64, density: f64, seed: u64) -> pfl_core::Result<Field2D> {
    let i = density * UnitTag::Physical.intensity_factor(1.0);
    Ok(speckle(grid, correlation, i, 1.0, seed)?.with_unit(UnitTag::Dimensionless))
}

pub fn uniform_fluid(grid: &Grid, density: f64, unit: UnitTag) -> pfl_core::Result<Field2D> {
    Field2D::new(*grid, vec![Complex64::new(density.sqrt(), 0.0); grid.len()], unit)
}

/// Initial field of the `propagate` scenario.
///
/// The brightness key depends on the units: `density` (`|ψ|²`) for
/// dimensionless runs, `power` (W) for a physical Gaussian and `intensity`
/// (W/m²) for physical uniform or speckle inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputSpec {
    pub units: Units,
    pub kind: InputKind,
    pub waist: Option<f64>,
    pub correlation: Option<f64>,
    pub level: f64,
    pub kx: f64,
}

impl InputSpec {
    fn level_key(units: Units, kind: InputKind) -> &'static str {
        match (units, kind) {
            (Units::Dimensionless, _) => "density",
            (Units::Physical, InputKind::Gaussian) => "power",
            (Units::Physical, _) => "intensity",
        }
    }

    pub fn read(mut r: Reader, units: Units) -> ConfigResult<Self> {
        let kind = r.choice("kind", &InputKind::NAMES)?;
        let kind = r.require("kind", kind)?;
        let key = Self::level_key(units, kind);
        let s = InputSpec {
            units,
            kind,
            waist: r.f64("waist")?,
            correlation: r.f64("correlation")?,
            level: r.req_f64(key)?,
            kx: r.f64("kx")?.unwrap_or(0.0),
        };
        non_negative(&r, key, s.level)?;
        match kind {
            InputKind::Gaussian if s.waist.is_none() => return Err(ConfigError::semantic(r.key("waist"), "required")),
            InputKind::Speckle if s.correlation.is_none() => {
                return Err(ConfigError::semantic(r.key("correlation"), "required"))
            }
            _ => {}
        }
        r.finish()?;
        Ok(s)
    }

    pub fn write(&self) -> Section {
        let mut w = Writer::new("input");
        w.text("kind", self.kind.name());
        w.opt_f64("waist", self.waist);
        w.opt_f64("correlation", self.correlation);
        w.f64(Self::level_key(self.units, self.kind), self.level);
        w.f64("kx", self.kx);
        w.finish()
    }

    pub fn build(&self, grid: &Grid, medium: &MediumParams, seed: u64) -> ConfigResult<Field2D> {
        let n0 = medium.n0;
        let field = match (self.units, self.kind) {
            (Units::Physical, InputKind::Gaussian) => {
                gaussian_beam(grid, self.waist.unwrap_or_default(), self.level, n0)
            }
            (Units::Physical, InputKind::Uniform) => plane_wave(grid, self.level, n0),
            (Units::Physical, InputKind::Speckle) => {
                speckle(grid, self.correlation.unwrap_or_default(), self.level, n0, seed)
            }
            (Units::Dimensionless, InputKind::Gaussian) => {
                let w = self.waist.unwrap_or_default();
                if !(w >= 4.0 * grid.dx().max(grid.dy())) {
                    return Err(ConfigError::semantic("input.waist", "waist is under 4 grid cells"));
                }
                let a = self.level.sqrt();
                Field2D::from_fn(*grid, UnitTag::Dimensionless, |x, y| {
                    Complex64::new(a * (-(x * x + y * y) / (w * w)).exp(), 0.0)
                })
            }
            (Units::Dimensionless, InputKind::Uniform) => uniform_fluid(grid, self.level, UnitTag::Dimensionless),
            (Units::Dimensionless, InputKind::Speckle) => {
                fluid_speckle(grid, self.correlation.unwrap_or_default(), self.level, seed)
            }
        };
        let field = core("input", field)?;
        if self.kx == 0.0 {
            return Ok(field);
        }
        if self.kx.abs() >= grid.nyquist_x() {
            return Err(ConfigError::semantic("input.kx", "phase ramp aliases on this grid"));
        }
        let values = field
            .values()
            .iter()
            .enumerate()
            .map(|(n, v)| v * Complex64::from_polar(1.0, self.kx * grid.x(n % grid.nx())))
            .collect();
        core("input", field.with_values(values))
    }
}

const SEEDINGS: [(&str, ProbeSeeding); 2] =
    [("bogoliubov", ProbeSeeding::Bogoliubov), ("angled", ProbeSeeding::Angled)];

/// Group-velocity measurements over a list of carrier wavevectors on a
/// uniform background of density `background`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSweep {
    pub k: Vec<f64>,
    pub width: f64,
    pub center: f64,
    pub background: f64,
    pub ratio: f64,
    pub seeding: ProbeSeeding,
    pub samples: usize,
}

impl ProbeSweep {
    pub fn read(mut r: Reader) -> ConfigResult<Self> {
        let s = ProbeSweep {
            k: r.f64_list("k")?,
            width: r.req_f64("width")?,
            center: r.req_f64("center")?,
            background: r.f64("background")?.unwrap_or(1.0),
            ratio: r.f64("ratio")?.unwrap_or(1e-2),
            seeding: r.choice("seeding", &SEEDINGS)?.unwrap_or(ProbeSeeding::Bogoliubov),
            samples: r.usize("samples")?.unwrap_or(20),
        };
        if s.k.is_empty() {
            return Err(ConfigError::semantic(r.key("k"), "required"));
        }
        increasing(&r, "k", &s.k)?;
        if s.k[0] < 0.0 {
            return Err(ConfigError::semantic(r.key("k"), "wavevectors must be non-negative"));
        }
        positive(&r, "width", s.width)?;
        positive(&r, "background", s.background)?;
        if !(s.ratio > 0.0 && s.ratio <= 1.0) {
            return Err(ConfigError::semantic(r.key("ratio"), "must lie in (0, 1]"));
        }
        if s.samples < 3 {
            return Err(ConfigError::semantic(r.key("samples"), "need at least 3 track samples"));
        }
        r.finish()?;
        Ok(s)
    }

    pub fn write(&self) -> Section {
        let mut w = Writer::new("probe");
        w.f64_list("k", &self.k);
        w.f64("width", self.width);
        w.f64("center", self.center);
        w.f64("background", self.background);
        w.f64("ratio", self.ratio);
        let seeding = SEEDINGS.iter().find(|(_, s)| *s == self.seeding).map(|(n, _)| *n).unwrap_or("bogoliubov");
        w.text("seeding", seeding);
        w.usize("samples", self.samples);
        w.finish()
    }

    pub fn validate(&self, grid: &Grid) -> ConfigResult<()> {
        if self.k.last().is_some_and(|&k| k >= grid.nyquist_x()) {
            return Err(ConfigError::semantic("probe.k", "largest wavevector reaches the grid Nyquist limit"));
        }
        if self.width < 2.0 * grid.dx() {
            return Err(ConfigError::semantic("probe.width", "packet must span at least two cells"));
        }
        if !(self.center.abs() < 0.5 * grid.extent_x()) {
            return Err(ConfigError::semantic("probe.center", "start position outside the grid"));
        }
        Ok(())
    }

    pub fn config(&self, k: f64) -> GroupVelocityConfig {
        let mut c = GroupVelocityConfig::new(k, self.width, self.center).with_seeding(self.seeding);
        c.intensity_ratio = self.ratio;
        c.samples = self.samples;
        c
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingSpec {
    pub densities: Vec<f64>,
    pub settings: ScalingConfig,
}

impl ScalingSpec {
    pub fn read(mut r: Reader) -> ConfigResult<Self> {
        let d = ScalingConfig::default();
        let s = ScalingSpec {
            densities: r.f64_list("densities")?,
            settings: ScalingConfig {
                k_xi: r.f64("k_xi")?.unwrap_or(d.k_xi),
                width_xi: r.f64("width_xi")?.unwrap_or(d.width_xi),
                travel_xi: r.f64("travel_xi")?.unwrap_or(d.travel_xi),
                steps_per_znl: r.f64("steps_per_znl")?.unwrap_or(d.steps_per_znl),
                intensity_ratio: r.f64("ratio")?.unwrap_or(d.intensity_ratio),
            },
        };
        increasing(&r, "densities", &s.densities)?;
        if s.densities.len() < 4 || s.densities.first().is_some_and(|&x| x <= 0.0) {
            return Err(ConfigError::semantic(r.key("densities"), "need at least 4 positive densities"));
        }
        if s.densities[s.densities.len() - 1] < 10.0 * s.densities[0] {
            return Err(ConfigError::semantic(r.key("densities"), "densities must span at least one decade"));
        }
        for (k, v) in [
            ("k_xi", s.settings.k_xi),
            ("width_xi", s.settings.width_xi),
            ("travel_xi", s.settings.travel_xi),
            ("steps_per_znl", s.settings.steps_per_znl),
            ("ratio", s.settings.intensity_ratio),
        ] {
            positive(&r, k, v)?;
        }
        r.finish()?;
        Ok(s)
    }

    pub fn write(&self) -> Section {
        let mut w = Writer::new("scaling");
        w.f64_list("densities", &self.densities);
        w.f64("k_xi", self.settings.k_xi);
        w.f64("width_xi", self.settings.width_xi);
        w.f64("travel_xi", self.settings.travel_xi);
        w.f64("steps_per_znl", self.settings.steps_per_znl);
        w.f64("ratio", self.settings.intensity_ratio);
        w.finish()
    }

    pub fn validate(&self) -> ConfigResult<()> {
        Ok(())
    }
}

/// Speckle ensemble propagated to each of `lengths`, with intensity
/// statistics and coherence taken at every length.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeckleSpec {
    pub correlation: f64,
    pub mean: f64,
    pub members: usize,
    pub lengths: Vec<f64>,
    pub dz: f64,
    pub bins: usize,
    pub max_ratio: f64,
    pub g1_bins: usize,
}

impl SpeckleSpec {
    pub fn read(mut r: Reader) -> ConfigResult<Self> {
        let s = SpeckleSpec {
            correlation: r.req_f64("correlation")?,
            mean: r.f64("mean")?.unwrap_or(1.0),
            members: r.usize("members")?.unwrap_or(4),
            lengths: r.f64_list("lengths")?,
            dz: r.req_f64("dz")?,
            bins: r.usize("bins")?.unwrap_or(24),
            max_ratio: r.f64("max_ratio")?.unwrap_or(6.0),
            g1_bins: r.usize("g1_bins")?.unwrap_or(32),
        };
        if s.lengths.is_empty() || s.lengths[0] <= 0.0 {
            return Err(ConfigError::semantic(r.key("lengths"), "need at least one positive length"));
        }
        increasing(&r, "lengths", &s.lengths)?;
        positive(&r, "correlation", s.correlation)?;
        positive(&r, "mean", s.mean)?;
        positive(&r, "dz", s.dz)?;
        positive(&r, "max_ratio", s.max_ratio)?;
        if s.members == 0 {
            return Err(ConfigError::semantic(r.key("members"), "need at least one member"));
        }
        for (k, v) in [("bins", s.bins), ("g1_bins", s.g1_bins)] {
            if v < 2 {
                return Err(ConfigError::semantic(r.key(k), "need at least 2 bins"));
            }
        }
        r.finish()?;
        Ok(s)
    }

    pub fn write(&self) -> Section {
        let mut w = Writer::new("speckle");
        w.f64("correlation", self.correlation);
        w.f64("mean", self.mean);
        w.usize("members", self.members);
        w.f64_list("lengths", &self.lengths);
        w.f64("dz", self.dz);
        w.usize("bins", self.bins);
        w.f64("max_ratio", self.max_ratio);
        w.usize("g1_bins", self.g1_bins);
        w.finish()
    }

    pub fn validate(&self, grid: &Grid) -> ConfigResult<()> {
        if self.correlation < 2.0 * grid.dx().max(grid.dy()) {
            return Err(ConfigError::semantic("speckle.correlation", "must span at least two cells"));
        }
        Ok(())
    }

    pub fn steps(&self, length: f64) -> usize {
        ((length / self.dz).round() as usize).max(1)
    }
}

/// Ensemble of uniform fluids with white complex noise of relative
/// amplitude `sigma`, for the static structure factor.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    pub members: usize,
    pub sigma: f64,
    pub background: f64,
    pub bins: usize,
}

impl NoiseSpec {
    pub fn read(mut r: Reader) -> ConfigResult<Self> {
        let s = NoiseSpec {
            members: r.usize("members")?.unwrap_or(200),
            sigma: r.f64("sigma")?.unwrap_or(0.01),
            background: r.f64("background")?.unwrap_or(1.0),
            bins: r.usize("bins")?.unwrap_or(20),
        };
        if s.members < MIN_REALISATIONS {
            return Err(ConfigError::semantic(
                r.key("members"),
                format!("need at least {MIN_REALISATIONS} realisations"),
            ));
        }
        positive(&r, "sigma", s.sigma)?;
        positive(&r, "background", s.background)?;
        if s.bins == 0 {
            return Err(ConfigError::semantic(r.key("bins"), "need at least one bin"));
        }
        r.finish()?;
        Ok(s)
    }

    pub fn write(&self) -> Section {
        let mut w = Writer::new("noise");
        w.usize("members", self.members);
        w.f64("sigma", self.sigma);
        w.f64("background", self.background);
        w.usize("bins", self.bins);
        w.finish()
    }

    pub fn validate(&self) -> ConfigResult<()> {
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VortexMode {
    /// Vortices of the given charges imprinted in a row along x.
    Imprint,
    /// A dark stripe that may decay into vortex pairs.
    Stripe,
}

const VORTEX_MODES: [(&str, VortexMode); 2] = [("imprint", VortexMode::Imprint), ("stripe", VortexMode::Stripe)];

#[derive(Debug, Clone, PartialEq)]
pub struct VortexSpec {
    pub mode: VortexMode,
    pub background: f64,
    pub charges: Vec<i32>,
    pub spacing: f64,
    pub core: Option<f64>,
    pub position: f64,
    pub angle: f64,
    pub contrast: f64,
    pub width: f64,
    /// Density floor for detection, as a fraction of `background`.
    pub floor: f64,
}

impl VortexSpec {
    pub fn read(mut r: Reader) -> ConfigResult<Self> {
        let mode = r.choice("mode", &VORTEX_MODES)?;
        let mode = r.require("mode", mode)?;
        let s = VortexSpec {
            mode,
            background: r.f64("background")?.unwrap_or(1.0),
            charges: r.list("charges", "integers")?,
            spacing: r.f64("spacing")?.unwrap_or(0.0),
            core: r.f64("core")?,
            position: r.f64("position")?.unwrap_or(0.0),
            angle: r.f64("angle")?.unwrap_or(0.0),
            contrast: r.f64("contrast")?.unwrap_or(1.0),
            width: r.f64("width")?.unwrap_or(1.0),
            floor: r.f64("floor")?.unwrap_or(0.0),
        };
        positive(&r, "background", s.background)?;
        non_negative(&r, "floor", s.floor)?;
        if mode == VortexMode::Imprint {
            if s.charges.is_empty() {
                return Err(ConfigError::semantic(r.key("charges"), "required for mode = imprint"));
            }
            if s.charges.len() > 1 {
                positive(&r, "spacing", s.spacing)?;
            }
        }
        r.finish()?;
        Ok(s)
    }

    pub fn write(&self) -> Section {
        let mut w = Writer::new("vortices");
        w.text("mode", if self.mode == VortexMode::Imprint { "imprint" } else { "stripe" });
        w.f64("background", self.background);
        w.list("charges", &self.charges);
        w.f64("spacing", self.spacing);
        w.opt_f64("core", self.core);
        w.f64("position", self.position);
        w.f64("angle", self.angle);
        w.f64("contrast", self.contrast);
        w.f64("width", self.width);
        w.f64("floor", self.floor);
        w.finish()
    }

    /// Imprint centres, offset by half a cell so no core sits on a node.
    pub fn centers(&self, grid: &Grid) -> Vec<(f64, f64)> {
        let n = self.charges.len() as f64;
        (0..self.charges.len())
            .map(|i| ((i as f64 - 0.5 * (n - 1.0)) * self.spacing + 0.5 * grid.dx(), 0.5 * grid.dy()))
            .collect()
    }

    pub fn build(&self, grid: &Grid, units: Units) -> ConfigResult<Field2D> {
        let mut f = core("vortices.background", uniform_fluid(grid, self.background, units.tag()))?;
        match self.mode {
            VortexMode::Imprint => {
                for (q, c) in self.charges.iter().zip(self.centers(grid)) {
                    f = core("vortices.spacing", imprint_vortex(&f, *q, c, self.core))?;
                }
            }
            VortexMode::Stripe => {
                f = core("vortices", imprint_dark_stripe(&f, self.position, self.angle, self.contrast, self.width))?;
            }
        }
        Ok(f)
    }
}

/// Memory parameters. `flips` and `coupling` (flattened on/off pairs) set
/// the schedules of the plain `gem` scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct GemSpec {
    pub g: f64,
    pub density: Option<f64>,
    pub eta: f64,
    pub z_extent: f64,
    pub t_extent: f64,
    pub nz: usize,
    pub nt: usize,
    pub decoherence: f64,
    pub flips: Vec<f64>,
    pub coupling: Vec<f64>,
}

impl GemSpec {
    pub fn read(mut r: Reader) -> ConfigResult<Self> {
        let s = GemSpec {
            g: r.req_f64("g")?,
            density: r.f64("density")?,
            eta: r.req_f64("eta")?,
            z_extent: r.f64("z_extent")?.unwrap_or(2.0),
            t_extent: r.req_f64("t_extent")?,
            nz: r.usize("nz")?.unwrap_or(512),
            nt: r.usize("nt")?.unwrap_or(2048),
            decoherence: r.f64("decoherence")?.unwrap_or(0.0),
            flips: r.f64_list("flips")?,
            coupling: r.f64_list("coupling")?,
        };
        if s.eta == 0.0 {
            return Err(ConfigError::semantic(r.key("eta"), "gradient slope must be non-zero"));
        }
        if !s.coupling.len().is_multiple_of(2) {
            return Err(ConfigError::semantic(r.key("coupling"), "expected on/off time pairs"));
        }
        r.finish()?;
        Ok(s)
    }

    pub fn write(&self) -> Section {
        let mut w = Writer::new("gem");
        w.f64("g", self.g);
        w.opt_f64("density", self.density);
        w.f64("eta", self.eta);
        w.f64("z_extent", self.z_extent);
        w.f64("t_extent", self.t_extent);
        w.usize("nz", self.nz);
        w.usize("nt", self.nt);
        w.f64("decoherence", self.decoherence);
        w.f64_list("flips", &self.flips);
        w.f64_list("coupling", &self.coupling);
        w.finish()
    }

    fn base(&self, density: f64) -> GemConfig {
        let mut c = GemConfig::new(self.g, density, self.eta, self.z_extent, self.t_extent);
        c.nz = self.nz;
        c.nt = self.nt;
        c.decoherence = self.decoherence;
        c
    }

    /// Config with the declared schedules; `density` overrides `gem.density`.
    pub fn build(&self, density: Option<f64>) -> ConfigResult<GemConfig> {
        let density = density.or(self.density).ok_or_else(|| ConfigError::semantic("gem.density", "required"))?;
        let mut c = self.base(density);
        c.gradient = GradientSchedule::with_flips(self.eta, self.flips.clone());
        if !self.coupling.is_empty() {
            c.coupling = CouplingSchedule::windows(self.coupling.chunks(2).map(|p| (p[0], p[1])).collect());
        }
        core("gem", c.validate())?;
        Ok(c)
    }

    /// Config for scenarios that impose their own schedules.
    pub fn build_unscheduled(&self) -> ConfigResult<GemConfig> {
        if !self.flips.is_empty() || !self.coupling.is_empty() {
            let key = if self.flips.is_empty() { "gem.coupling" } else { "gem.flips" };
            return Err(ConfigError::semantic(key, "schedules are set by the scenario"));
        }
        self.build(None)
    }
}

/// Input pulses; one width may serve all pulses.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSpec {
    pub centers: Vec<f64>,
    pub widths: Vec<f64>,
    pub amplitudes: Vec<f64>,
    pub labels: Vec<String>,
}

impl PulseSpec {
    pub fn read(mut r: Reader) -> ConfigResult<Self> {
        let centers = r.f64_list("centers")?;
        let n = centers.len();
        if n == 0 {
            return Err(ConfigError::semantic(r.key("centers"), "required"));
        }
        let widths = r.f64_list("widths")?;
        let mut amplitudes = r.f64_list("amplitudes")?;
        let mut labels: Vec<String> = r.list("labels", "names")?;
        if amplitudes.is_empty() {
            amplitudes = vec![1.0; n];
        }
        if labels.is_empty() {
            labels = (0..n).map(|i| char::from(b'A' + (i % 26) as u8).to_string()).collect();
        }
        if !(widths.len() == 1 || widths.len() == n) {
            return Err(ConfigError::semantic(r.key("widths"), "give one width or one per pulse"));
        }
        for (k, len) in [("amplitudes", amplitudes.len()), ("labels", labels.len())] {
            if len != n {
                return Err(ConfigError::semantic(r.key(k), format!("expected {n} entries")));
            }
        }
        for w in &widths {
            positive(&r, "widths", *w)?;
        }
        r.finish()?;
        Ok(PulseSpec { centers, widths, amplitudes, labels })
    }

    pub fn write(&self) -> Section {
        let mut w = Writer::new("pulses");
        w.f64_list("centers", &self.centers);
        w.f64_list("widths", &self.widths);
        w.f64_list("amplitudes", &self.amplitudes);
        w.list("labels", &self.labels);
        w.finish()
    }

    pub fn build(&self, cfg: &GemConfig) -> ConfigResult<PulseTrain> {
        let train = PulseTrain {
            pulses: (0..self.centers.len())
                .map(|i| {
                    let w = if self.widths.len() == 1 { self.widths[0] } else { self.widths[i] };
                    Pulse::new(&self.labels[i], self.centers[i], w, self.amplitudes[i])
                })
                .collect(),
        };
        core("pulses", train.validate(cfg))?;
        Ok(train)
    }
}

/// Efficiency at each `2πg𝒩/|η|` in `ratios`, storing one pulse and
/// flipping the gradient at `flip`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub ratios: Vec<f64>,
    pub center: f64,
    pub width: f64,
    pub flip: f64,
}

impl SweepSpec {
    pub fn read(mut r: Reader) -> ConfigResult<Self> {
        let s = SweepSpec {
            ratios: r.f64_list("ratios")?,
            center: r.req_f64("center")?,
            width: r.req_f64("width")?,
            flip: r.req_f64("flip")?,
        };
        if s.ratios.is_empty() {
            return Err(ConfigError::semantic(r.key("ratios"), "required"));
        }
        for x in &s.ratios {
            positive(&r, "ratios", *x)?;
        }
        positive(&r, "width", s.width)?;
        r.finish()?;
        Ok(s)
    }

    pub fn write(&self) -> Section {
        let mut w = Writer::new("sweep");
        w.f64_list("ratios", &self.ratios);
        w.f64("center", self.center);
        w.f64("width", self.width);
        w.f64("flip", self.flip);
        w.finish()
    }

    /// One (ratio, config, pulse) per sweep point.
    pub fn configs(&self, gem: &GemSpec) -> ConfigResult<Vec<(f64, GemConfig, Pulse)>> {
        if gem.density.is_some() {
            return Err(ConfigError::semantic("gem.density", "set by sweep.ratios"));
        }
        if !(gem.g > 0.0) {
            return Err(ConfigError::semantic("gem.g", "must be positive for a sweep"));
        }
        let with_density = GemSpec { density: Some(1.0), ..gem.clone() };
        with_density.build_unscheduled()?;
        let pulse = Pulse::new("A", self.center, self.width, 1.0);
        if self.center + 4.0 * self.width > self.flip {
            return Err(ConfigError::semantic("sweep.flip", "flip precedes the end of the write pulse"));
        }
        if 2.0 * self.flip - self.center + 4.0 * self.width > gem.t_extent {
            return Err(ConfigError::semantic("sweep.flip", "echo does not fit before gem.t_extent"));
        }
        self.ratios
            .iter()
            .map(|&ratio| {
                let mut cfg = with_density.build(Some(ratio * gem.eta.abs() / (2.0 * PI * gem.g)))?;
                cfg.gradient = GradientSchedule::with_flips(gem.eta, vec![self.flip]);
                core("sweep.flip", cfg.validate())?;
                core("sweep", PulseTrain::single(pulse.clone()).validate(&cfg))?;
                Ok((ratio, cfg, pulse.clone()))
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderChoice {
    Both,
    Filo,
    Fifo,
}

const ORDER_CHOICES: [(&str, OrderChoice); 3] =
    [("both", OrderChoice::Both), ("filo", OrderChoice::Filo), ("fifo", OrderChoice::Fifo)];

#[derive(Debug, Clone, PartialEq)]
pub struct OrderingSpec {
    pub mode: OrderChoice,
    pub flip: f64,
    pub off_start: Option<f64>,
    pub off_end: Option<f64>,
    pub second_flip: Option<f64>,
}

impl OrderingSpec {
    pub fn read(mut r: Reader) -> ConfigResult<Self> {
        let s = OrderingSpec {
            mode: r.choice("mode", &ORDER_CHOICES)?.unwrap_or(OrderChoice::Both),
            flip: r.req_f64("flip")?,
            off_start: r.f64("off_start")?,
            off_end: r.f64("off_end")?,
            second_flip: r.f64("second_flip")?,
        };
        if s.mode != OrderChoice::Filo {
            for (k, v) in [("off_start", s.off_start), ("off_end", s.off_end), ("second_flip", s.second_flip)] {
                r.require(k, v)?;
            }
            let (a, b, f2) = (s.off_start.unwrap_or(0.0), s.off_end.unwrap_or(0.0), s.second_flip.unwrap_or(0.0));
            if !(s.flip < a && a < f2 && f2 < b) {
                return Err(ConfigError::semantic(
                    r.key("second_flip"),
                    "need flip < off_start < second_flip < off_end",
                ));
            }
        }
        r.finish()?;
        Ok(s)
    }

    pub fn write(&self) -> Section {
        let mut w = Writer::new("ordering");
        let mode = ORDER_CHOICES.iter().find(|(_, m)| *m == self.mode).map(|(n, _)| *n).unwrap_or("both");
        w.text("mode", mode);
        w.f64("flip", self.flip);
        w.opt_f64("off_start", self.off_start);
        w.opt_f64("off_end", self.off_end);
        w.opt_f64("second_flip", self.second_flip);
        w.finish()
    }

    pub fn modes(&self) -> ConfigResult<Vec<OrderingMode>> {
        let filo = OrderingMode::Filo { flip: self.flip };
        let fifo = || OrderingMode::Fifo {
            flip: self.flip,
            off: (self.off_start.unwrap_or(0.0), self.off_end.unwrap_or(0.0)),
            second_flip: self.second_flip.unwrap_or(0.0),
        };
        Ok(match self.mode {
            OrderChoice::Filo => vec![filo],
            OrderChoice::Fifo => vec![fifo()],
            OrderChoice::Both => vec![filo, fifo()],
        })
    }
}
