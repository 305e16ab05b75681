//! Run configuration: the text format, its typed form, and validation.

mod ini;
mod specs;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use ini::{Document, Entry, Section};
pub use specs::*;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("`{key}`: {msg}")]
    Semantic { key: String, msg: String },
}

impl ConfigError {
    pub fn semantic(key: impl Into<String>, msg: impl Into<String>) -> Self {
        ConfigError::Semantic { key: key.into(), msg: msg.into() }
    }

    /// Re-labels a core parameter error; other core errors are attached to `key`.
    pub fn from_core(key: &str, err: pfl_core::Error) -> Self {
        match err {
            pfl_core::Error::InvalidParameter { name, reason } => ConfigError::semantic(name, reason),
            other => ConfigError::semantic(key, other.to_string()),
        }
    }
}

pub type ConfigResult<T> = Result<T, ConfigError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    Propagate,
    Dispersion,
    SoundScaling,
    Precondensation,
    StructureFactor,
    Vortices,
    Gem,
    GemEfficiencySweep,
    FifoFilo,
}

impl Scenario {
    pub const ALL: [Scenario; 9] = [
        Scenario::Propagate,
        Scenario::Dispersion,
        Scenario::SoundScaling,
        Scenario::Precondensation,
        Scenario::StructureFactor,
        Scenario::Vortices,
        Scenario::Gem,
        Scenario::GemEfficiencySweep,
        Scenario::FifoFilo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Propagate => "propagate",
            Scenario::Dispersion => "dispersion",
            Scenario::SoundScaling => "sound-scaling",
            Scenario::Precondensation => "precondensation",
            Scenario::StructureFactor => "structure-factor",
            Scenario::Vortices => "vortices",
            Scenario::Gem => "gem",
            Scenario::GemEfficiencySweep => "gem-efficiency-sweep",
            Scenario::FifoFilo => "fifo-filo",
        }
    }

    pub fn valid_names() -> String {
        Scenario::ALL.iter().map(|s| s.name()).collect::<Vec<_>>().join(", ")
    }

    /// Sections besides `[run]`: (required, optional).
    fn sections(self) -> (&'static [&'static str], &'static [&'static str]) {
        use Scenario::*;
        match self {
            Propagate => (&["grid", "medium", "plan", "input"], &["potential"]),
            Dispersion => (&["grid", "medium", "plan", "probe"], &["potential"]),
            SoundScaling => (&["grid", "medium", "scaling"], &[]),
            Precondensation => (&["grid", "medium", "speckle"], &["potential"]),
            StructureFactor => (&["grid", "medium", "plan", "noise"], &["potential"]),
            Vortices => (&["grid", "medium", "plan", "vortices"], &["potential"]),
            Gem => (&["gem", "pulses"], &[]),
            GemEfficiencySweep => (&["gem", "sweep"], &[]),
            FifoFilo => (&["gem", "pulses", "ordering"], &[]),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = ConfigError;

    fn from_str(s: &str) -> ConfigResult<Self> {
        Scenario::ALL.iter().copied().find(|sc| sc.name() == s).ok_or_else(|| {
            ConfigError::semantic(
                "run.scenario",
                format!("unknown scenario `{s}`; valid scenarios: {}", Scenario::valid_names()),
            )
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Emit {
    pub csv: bool,
    pub pgm: bool,
    pub snapshots: bool,
}

impl Default for Emit {
    fn default() -> Self {
        Emit { csv: true, pgm: false, snapshots: false }
    }
}

/// Scenario-specific parameter blocks.
#[derive(Debug, Clone, PartialEq)]
pub enum Params {
    Propagate(InputSpec),
    Dispersion(ProbeSweep),
    SoundScaling(ScalingSpec),
    Precondensation(SpeckleSpec),
    StructureFactor(NoiseSpec),
    Vortices(VortexSpec),
    Gem(GemSpec, PulseSpec),
    GemEfficiencySweep(GemSpec, SweepSpec),
    FifoFilo(GemSpec, PulseSpec, OrderingSpec),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub seed: u64,
    pub output: Option<String>,
    pub emit: Emit,
    pub grid: Option<GridSpec>,
    pub medium: Option<MediumSpec>,
    pub plan: Option<PlanSpec>,
    pub potential: Option<PotentialSpec>,
    pub params: Params,
}

/// Parses and validates a configuration whose `[run]` section names the scenario.
pub fn parse_config(text: &str) -> ConfigResult<RunConfig> {
    parse_config_for(text, None)
}

/// As [`parse_config`]; `scenario` fills in a missing `run.scenario` and
/// must agree with it when both are present.
pub fn parse_config_for(text: &str, scenario: Option<Scenario>) -> ConfigResult<RunConfig> {
    let mut doc = Document::parse(text)?;
    let mut run = Reader::new(doc.take("run").unwrap_or_else(|| Section::new("run")));
    let declared = run.text("scenario")?.filter(|s| !s.is_empty());
    let scenario = match (declared, scenario) {
        (None, None) => return Err(ConfigError::semantic("run.scenario", "scenario required")),
        (Some(s), None) => s.parse()?,
        (None, Some(s)) => s,
        (Some(s), Some(cli)) => {
            let s: Scenario = s.parse()?;
            if s != cli {
                return Err(ConfigError::semantic(
                    "run.scenario",
                    format!("config declares `{s}` but `{cli}` was requested"),
                ));
            }
            s
        }
    };
    let seed = run.parse::<u64>("seed", "a non-negative integer")?.unwrap_or(0);
    let output = run.text("output")?.filter(|s| !s.is_empty());
    let defaults = Emit::default();
    let emit = Emit {
        csv: run.bool("emit_csv")?.unwrap_or(defaults.csv),
        pgm: run.bool("emit_pgm")?.unwrap_or(defaults.pgm),
        snapshots: run.bool("emit_snapshots")?.unwrap_or(defaults.snapshots),
    };
    run.finish()?;

    let (required, optional) = scenario.sections();
    for s in &doc.sections {
        if !required.contains(&s.name.as_str()) && !optional.contains(&s.name.as_str()) {
            return Err(ConfigError::semantic(
                s.name.clone(),
                format!("section [{}] is not used by scenario `{scenario}`", s.name),
            ));
        }
    }
    for name in required {
        if doc.section(name).is_none() {
            return Err(ConfigError::semantic(*name, format!("section [{name}] required by `{scenario}`")));
        }
    }
    let mut section = |name: &str| doc.take(name).map(Reader::new);

    let grid = section("grid").map(GridSpec::read).transpose()?;
    let medium = section("medium").map(MediumSpec::read).transpose()?;
    let plan = section("plan").map(PlanSpec::read).transpose()?;
    let potential = section("potential").map(PotentialSpec::read).transpose()?;
    let units = medium.as_ref().map(|m| m.units).unwrap_or(Units::Dimensionless);
    let mut req = |name: &str| section(name).expect("required sections checked above");
    let params = match scenario {
        Scenario::Propagate => Params::Propagate(InputSpec::read(req("input"), units)?),
        Scenario::Dispersion => Params::Dispersion(ProbeSweep::read(req("probe"))?),
        Scenario::SoundScaling => Params::SoundScaling(ScalingSpec::read(req("scaling"))?),
        Scenario::Precondensation => Params::Precondensation(SpeckleSpec::read(req("speckle"))?),
        Scenario::StructureFactor => Params::StructureFactor(NoiseSpec::read(req("noise"))?),
        Scenario::Vortices => Params::Vortices(VortexSpec::read(req("vortices"))?),
        Scenario::Gem => Params::Gem(GemSpec::read(req("gem"))?, PulseSpec::read(req("pulses"))?),
        Scenario::GemEfficiencySweep => {
            Params::GemEfficiencySweep(GemSpec::read(req("gem"))?, SweepSpec::read(req("sweep"))?)
        }
        Scenario::FifoFilo => Params::FifoFilo(
            GemSpec::read(req("gem"))?,
            PulseSpec::read(req("pulses"))?,
            OrderingSpec::read(req("ordering"))?,
        ),
    };
    let cfg = RunConfig { scenario, seed, output, emit, grid, medium, plan, potential, params };
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    /// Builds every physical object the scenario needs, surfacing the first
    /// violated precondition. No computation happens here.
    pub fn validate(&self) -> ConfigResult<()> {
        let fluid = match (&self.grid, &self.medium) {
            (Some(g), Some(m)) => Some((g.build()?, m)),
            _ => None,
        };
        if let (Some((grid, medium)), Some(p)) = (&fluid, &self.potential) {
            p.build(grid, medium.units)?;
        }
        match &self.params {
            Params::Propagate(input) => {
                let (grid, medium) = fluid.as_ref().expect("fluid sections");
                let m = medium.build(medium.required_length()?)?;
                self.plan()?.build(m.length)?;
                input.build(grid, &m, 0)?;
            }
            Params::Dispersion(probe) => {
                let (grid, medium) = fluid.as_ref().expect("fluid sections");
                let m = medium.build(medium.required_length()?)?;
                self.plan()?.build(m.length)?;
                probe.validate(grid)?;
            }
            Params::SoundScaling(s) => {
                let (_, medium) = fluid.as_ref().expect("fluid sections");
                medium.build(1.0)?;
                s.validate()?;
            }
            Params::Precondensation(s) => {
                let (grid, medium) = fluid.as_ref().expect("fluid sections");
                medium.build(1.0)?;
                s.validate(grid)?;
            }
            Params::StructureFactor(n) => {
                let (_, medium) = fluid.as_ref().expect("fluid sections");
                let m = medium.build(medium.required_length()?)?;
                self.plan()?.build(m.length)?;
                n.validate()?;
            }
            Params::Vortices(v) => {
                let (grid, medium) = fluid.as_ref().expect("fluid sections");
                let m = medium.build(medium.required_length()?)?;
                self.plan()?.build(m.length)?;
                v.build(grid, medium.units)?;
            }
            Params::Gem(g, p) => {
                let cfg = g.build(None)?;
                p.build(&cfg)?;
            }
            Params::GemEfficiencySweep(g, s) => {
                s.configs(g)?;
            }
            Params::FifoFilo(g, p, o) => {
                let cfg = g.build_unscheduled()?;
                for mode in o.modes()? {
                    let scheduled = mode.apply(&cfg);
                    scheduled.validate().map_err(|e| ConfigError::from_core("ordering", e))?;
                    p.build(&scheduled)?;
                }
            }
        }
        Ok(())
    }

    pub fn plan(&self) -> ConfigResult<&PlanSpec> {
        self.plan.as_ref().ok_or_else(|| ConfigError::semantic("plan", "section [plan] required"))
    }

    pub fn to_document(&self) -> Document {
        let mut doc = Document::default();
        let mut run = Writer::new("run");
        run.text("scenario", self.scenario.name());
        run.raw("seed", self.seed.to_string());
        if let Some(o) = &self.output {
            run.text("output", o);
        }
        run.bool("emit_csv", self.emit.csv);
        run.bool("emit_pgm", self.emit.pgm);
        run.bool("emit_snapshots", self.emit.snapshots);
        doc.sections.push(run.finish());
        if let Some(g) = &self.grid {
            doc.sections.push(g.write());
        }
        if let Some(m) = &self.medium {
            doc.sections.push(m.write());
        }
        if let Some(p) = &self.plan {
            doc.sections.push(p.write());
        }
        if let Some(p) = &self.potential {
            doc.sections.push(p.write());
        }
        match &self.params {
            Params::Propagate(s) => doc.sections.push(s.write()),
            Params::Dispersion(s) => doc.sections.push(s.write()),
            Params::SoundScaling(s) => doc.sections.push(s.write()),
            Params::Precondensation(s) => doc.sections.push(s.write()),
            Params::StructureFactor(s) => doc.sections.push(s.write()),
            Params::Vortices(s) => doc.sections.push(s.write()),
            Params::Gem(g, p) => doc.sections.extend([g.write(), p.write()]),
            Params::GemEfficiencySweep(g, s) => doc.sections.extend([g.write(), s.write()]),
            Params::FifoFilo(g, p, o) => doc.sections.extend([g.write(), p.write(), o.write()]),
        }
        doc
    }

    pub fn to_text(&self) -> String {
        self.to_document().to_string()
    }
}

/// Consumes the entries of one section, converting values and reporting
/// errors under `section.key`.
pub struct Reader {
    name: String,
    entries: Vec<Entry>,
}

impl Reader {
    pub fn new(section: Section) -> Self {
        Reader { name: section.name, entries: section.entries }
    }

    pub fn key(&self, key: &str) -> String {
        format!("{}.{}", self.name, key)
    }

    fn take(&mut self, key: &str) -> Option<Entry> {
        let idx = self.entries.iter().position(|e| e.key == key)?;
        Some(self.entries.remove(idx))
    }

    pub fn parse<T: FromStr>(&mut self, key: &str, what: &str) -> ConfigResult<Option<T>> {
        match self.take(key) {
            None => Ok(None),
            Some(e) => e.value.parse::<T>().map(Some).map_err(|_| {
                ConfigError::semantic(self.key(key), format!("expected {what}, got `{}` (line {})", e.value, e.line))
            }),
        }
    }

    pub fn f64(&mut self, key: &str) -> ConfigResult<Option<f64>> {
        let v = self.parse::<f64>(key, "a number")?;
        match v {
            Some(x) if !x.is_finite() => Err(ConfigError::semantic(self.key(key), "must be finite")),
            _ => Ok(v),
        }
    }

    pub fn require<T>(&self, key: &str, v: Option<T>) -> ConfigResult<T> {
        v.ok_or_else(|| ConfigError::semantic(self.key(key), "required"))
    }

    pub fn req_f64(&mut self, key: &str) -> ConfigResult<f64> {
        let v = self.f64(key)?;
        self.require(key, v)
    }

    pub fn usize(&mut self, key: &str) -> ConfigResult<Option<usize>> {
        self.parse(key, "a non-negative integer")
    }

    pub fn req_usize(&mut self, key: &str) -> ConfigResult<usize> {
        let v = self.usize(key)?;
        self.require(key, v)
    }

    pub fn bool(&mut self, key: &str) -> ConfigResult<Option<bool>> {
        self.parse(key, "`true` or `false`")
    }

    pub fn text(&mut self, key: &str) -> ConfigResult<Option<String>> {
        Ok(self.take(key).map(|e| e.value))
    }

    pub fn choice<T: Copy>(&mut self, key: &str, options: &[(&str, T)]) -> ConfigResult<Option<T>> {
        let Some(e) = self.take(key) else { return Ok(None) };
        options.iter().find(|(n, _)| *n == e.value).map(|(_, v)| Some(*v)).ok_or_else(|| {
            let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
            ConfigError::semantic(self.key(key), format!("expected one of {}, got `{}`", names.join(", "), e.value))
        })
    }

    /// Comma-separated list; absent means empty.
    pub fn list<T: FromStr>(&mut self, key: &str, what: &str) -> ConfigResult<Vec<T>> {
        let Some(e) = self.take(key) else { return Ok(Vec::new()) };
        e.value
            .split(',')
            .map(|s| {
                s.trim().parse::<T>().map_err(|_| {
                    ConfigError::semantic(self.key(key), format!("expected a list of {what}, got `{}`", e.value))
                })
            })
            .collect()
    }

    pub fn f64_list(&mut self, key: &str) -> ConfigResult<Vec<f64>> {
        let v: Vec<f64> = self.list(key, "numbers")?;
        if v.iter().any(|x| !x.is_finite()) {
            return Err(ConfigError::semantic(self.key(key), "entries must be finite"));
        }
        Ok(v)
    }

    pub fn finish(self) -> ConfigResult<()> {
        match self.entries.first() {
            None => Ok(()),
            Some(e) => {
                Err(ConfigError::semantic(format!("{}.{}", self.name, e.key), format!("unknown key (line {})", e.line)))
            }
        }
    }
}

/// Shortest text that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

pub struct Writer(Section);

impl Writer {
    pub fn new(name: &str) -> Self {
        Writer(Section::new(name))
    }

    pub fn raw(&mut self, key: &str, value: String) {
        self.0.push(key, value);
    }

    pub fn text(&mut self, key: &str, value: &str) {
        self.0.push(key, value);
    }

    pub fn f64(&mut self, key: &str, v: f64) {
        self.0.push(key, fmt_f64(v));
    }

    pub fn opt_f64(&mut self, key: &str, v: Option<f64>) {
        if let Some(v) = v {
            self.f64(key, v);
        }
    }

    pub fn usize(&mut self, key: &str, v: usize) {
        self.0.push(key, v.to_string());
    }

    pub fn bool(&mut self, key: &str, v: bool) {
        self.0.push(key, v.to_string());
    }

    pub fn f64_list(&mut self, key: &str, v: &[f64]) {
        if !v.is_empty() {
            self.0.push(key, v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(", "));
        }
    }

    pub fn list<T: ToString>(&mut self, key: &str, v: &[T]) {
        if !v.is_empty() {
            self.0.push(key, v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", "));
        }
    }

    pub fn finish(self) -> Section {
        self.0
    }
}

pub(crate) fn positive(r: &Reader, key: &str, v: f64) -> ConfigResult<()> {
    if v > 0.0 {
        Ok(())
    } else {
        Err(ConfigError::semantic(r.key(key), format!("must be positive, got {v}")))
    }
}

pub(crate) fn non_negative(r: &Reader, key: &str, v: f64) -> ConfigResult<()> {
    if v >= 0.0 {
        Ok(())
    } else {
        Err(ConfigError::semantic(r.key(key), format!("must be non-negative, got {v}")))
    }
}

pub(crate) fn increasing(r: &Reader, key: &str, v: &[f64]) -> ConfigResult<()> {
    if v.windows(2).all(|w| w[1] > w[0]) {
        Ok(())
    } else {
        Err(ConfigError::semantic(r.key(key), "entries must increase strictly"))
    }
}
