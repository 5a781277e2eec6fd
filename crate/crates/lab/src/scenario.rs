//! Scenario files: a strict TOML schema, validation with key paths, and
//! conversion into core objects.

use std::path::Path;

use morawetz_core::assumptions::ShellSampler;
use morawetz_core::damping::DampingProfile;
use morawetz_core::geodesics::Region;
use morawetz_core::grid::{Grid, InitialData};
use morawetz_core::metric::{metric_determinant_fit, MetricField, RadialMetricParams, WarpedProfile};
use morawetz_core::multiplier::{MultiplierField, MultiplierFunction};
use morawetz_core::solver::SolverConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{LabError, LabResult};

pub const SCHEMA_VERSION: u32 = 1;

/// Largest log-residual accepted when a radial grid is built from a fitted
/// `det G = c0 r^d`.
const GRID_FIT_TOLERANCE: f64 = 1e-9;

fn three() -> usize {
    3
}
fn one() -> f64 {
    1.0
}
fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: u64,
    pub metric: MetricSection,
    #[serde(default)]
    pub equation: EquationSection,
    #[serde(default)]
    pub damping: DampingSection,
    pub grid: GridSection,
    pub time: TimeSection,
    #[serde(default)]
    pub initial: InitialSection,
    #[serde(default)]
    pub outputs: OutputsSection,
    #[serde(default)]
    pub checks: ChecksSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geodesics: Option<GeodesicsSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MetricSection {
    Flat {
        #[serde(default = "three")]
        n: usize,
    },
    Example21 {
        #[serde(default = "three")]
        n: usize,
        m: f64,
        #[serde(default = "one")]
        d1: f64,
    },
    RadialPower {
        #[serde(default = "three")]
        n: usize,
        k: f64,
    },
    TrappedSphere {
        #[serde(default = "three")]
        n: usize,
        r2: f64,
    },
    WarpedEuclidean {},
    WarpedPower {
        #[serde(default = "one")]
        c0: f64,
        d: f64,
    },
    WarpedBump {
        eps: f64,
        mode: u32,
    },
}

impl MetricSection {
    pub fn field(&self) -> MetricField {
        match *self {
            MetricSection::Flat { n } => MetricField::Flat { n },
            MetricSection::Example21 { n, m, d1 } => MetricField::Example21 { n, m, d1 },
            MetricSection::RadialPower { n, k } => MetricField::RadialPower { n, k },
            MetricSection::TrappedSphere { n, r2 } => MetricField::TrappedSphere { n, r2 },
            _ => MetricField::Warped { profile: self.warped().expect("warped family") },
        }
    }

    pub fn warped(&self) -> Option<WarpedProfile> {
        match *self {
            MetricSection::WarpedEuclidean {} => Some(WarpedProfile::Euclidean),
            MetricSection::WarpedPower { c0, d } => Some(WarpedProfile::Power { c0, d }),
            MetricSection::WarpedBump { eps, mode } => Some(WarpedProfile::AngularBump { eps, mode }),
            _ => None,
        }
    }

    pub fn dimension(&self) -> usize {
        match *self {
            MetricSection::Flat { n }
            | MetricSection::Example21 { n, .. }
            | MetricSection::RadialPower { n, .. }
            | MetricSection::TrappedSphere { n, .. } => n,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquationSection {
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default = "yes")]
    pub nonlinear: bool,
    /// Tangent weight in the angular Morawetz density and assumption A.
    #[serde(default = "one")]
    pub alpha: f64,
}

fn default_p() -> f64 {
    3.0
}

impl Default for EquationSection {
    fn default() -> Self {
        Self { p: 3.0, nonlinear: true, alpha: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DampingKindName {
    #[default]
    None,
    Constant,
    Smoothstep,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DampingSection {
    #[serde(default)]
    pub kind: DampingKindName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps0: Option<f64>,
    /// Width of the damping collar around the inner boundary.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub r_in: f64,
    pub r_out: f64,
    /// Radial intervals.
    pub j: usize,
    /// Angular nodes (warped metrics only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub dt: f64,
    pub t_final: f64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_stride")]
    pub stride: usize,
    /// Stop once `E(t) <= stop_below E(0)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_below: Option<f64>,
}

fn default_tolerance() -> f64 {
    1e-12
}
fn default_iterations() -> usize {
    50
}
fn default_stride() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialKind {
    Zero,
    #[default]
    Gaussian,
    Ring,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    #[serde(default)]
    pub kind: InitialKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    /// Radial wave number.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    /// Angular mode (ring data).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<i32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsSection {
    #[serde(default = "default_prefix")]
    pub prefix: String,
    #[serde(default = "yes")]
    pub csv: bool,
    #[serde(default = "yes")]
    pub json: bool,
    #[serde(default = "yes")]
    pub plt: bool,
    /// Times at which field snapshots are written.
    #[serde(default)]
    pub snapshots: Vec<f64>,
}

fn default_prefix() -> String {
    "run".into()
}

impl Default for OutputsSection {
    fn default() -> Self {
        Self { prefix: default_prefix(), csv: true, json: true, plt: true, snapshots: Vec::new() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AssumptionName {
    /// A without damping, B with a collar, C otherwise.
    #[default]
    Auto,
    A,
    B,
    C,
    Appendix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MultiplierName {
    #[default]
    RadialUnit,
    Cutoff,
    Position,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChecksSection {
    #[serde(default)]
    pub assumption: AssumptionName,
    #[serde(default = "one")]
    pub delta: f64,
    #[serde(default = "default_radii")]
    pub radii: usize,
    #[serde(default = "default_directions")]
    pub directions: usize,
    /// Sample annulus; defaults to the grid's.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
    #[serde(default)]
    pub horizons: Vec<f64>,
    #[serde(default)]
    pub amplitudes: Vec<f64>,
    /// Fraction of the run excluded from rate fits.
    #[serde(default = "default_transient")]
    pub transient: f64,
    #[serde(default)]
    pub multiplier: MultiplierName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff_r0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff_eps0: Option<f64>,
    /// `P = c r^(-k)`; `c` defaults to `(n-1)/2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_coefficient: Option<f64>,
    #[serde(default = "one")]
    pub p_power: f64,
    /// Refinement levels of the identity check.
    #[serde(default = "default_levels")]
    pub levels: usize,
}

fn default_radii() -> usize {
    32
}
fn default_directions() -> usize {
    64
}
fn default_transient() -> f64 {
    0.1
}
fn default_levels() -> usize {
    3
}

impl Default for ChecksSection {
    fn default() -> Self {
        Self {
            assumption: AssumptionName::Auto,
            delta: 1.0,
            radii: default_radii(),
            directions: default_directions(),
            r_min: None,
            r_max: None,
            horizons: Vec::new(),
            amplitudes: Vec::new(),
            transient: default_transient(),
            multiplier: MultiplierName::RadialUnit,
            cutoff_r0: None,
            cutoff_eps0: None,
            p_coefficient: None,
            p_power: 1.0,
            levels: default_levels(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionKind {
    Ball,
    Shell,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeodesicsSection {
    pub region: RegionKind,
    pub center: Vec<f64>,
    /// Ball radius or shell outer radius.
    pub radius: f64,
    /// Shell inner radius.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner: Option<f64>,
    pub x0: Vec<f64>,
    #[serde(default = "default_count")]
    pub count: usize,
    pub t_budget: f64,
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default = "one")]
    pub delta: f64,
}

fn default_count() -> usize {
    500
}
fn default_step() -> f64 {
    morawetz_core::geodesics::DEFAULT_STEP
}

impl GeodesicsSection {
    pub fn region(&self) -> Region {
        match self.region {
            RegionKind::Ball => Region::Ball { center: self.center.clone(), radius: self.radius },
            RegionKind::Shell => {
                Region::Shell { center: self.center.clone(), inner: self.inner.unwrap_or(0.0), outer: self.radius }
            }
        }
    }
}

/// Reads and validates a scenario file.
pub fn load_scenario(path: &Path) -> LabResult<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    parse_scenario(&text, &path.display().to_string())
}

/// Parses scenario text; `origin` names the source in error messages.
pub fn parse_scenario(text: &str, origin: &str) -> LabResult<Scenario> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| LabError::Parse { path: origin.into(), message: e.message().into() })?;
    from_table(table)
}

/// Deserializes an already-parsed table and validates it.
pub fn from_table(table: toml::Table) -> LabResult<Scenario> {
    let value = toml::Value::Table(table);
    let scenario: Scenario = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let message = e.inner().to_string();
        let key = match unknown_field(&message) {
            Some(field) if path == "." => field,
            _ => path,
        };
        LabError::validation(key, message)
    })?;
    scenario.validate()?;
    Ok(scenario)
}

fn unknown_field(message: &str) -> Option<String> {
    let rest = message.strip_prefix("unknown field `")?;
    Some(rest[..rest.find('`')?].to_string())
}

fn need(value: Option<f64>, key: &str, kind: &str) -> LabResult<f64> {
    value.ok_or_else(|| LabError::validation(key, format!("required when kind = \"{kind}\"")))
}

fn positive(value: f64, key: &str) -> LabResult<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(LabError::validation(key, format!("must be > 0, got {value}")))
    }
}

impl Scenario {
    /// Hex SHA-256 of the canonical TOML serialization.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn to_table(&self) -> toml::Table {
        toml::Table::try_from(self).expect("scenario serializes to a table")
    }

    pub fn dimension(&self) -> usize {
        self.metric.dimension()
    }

    pub fn validate(&self) -> LabResult<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(LabError::validation(
                "schema_version",
                format!("unsupported version {} (expected {SCHEMA_VERSION})", self.schema_version),
            ));
        }
        if self.seed > i64::MAX as u64 {
            return Err(LabError::validation(
                "seed",
                format!("must be <= {} (TOML integers are signed 64-bit)", i64::MAX),
            ));
        }
        let n = self.dimension();
        if n < 2 {
            return Err(LabError::validation("metric.n", format!("must be >= 2, got {n}")));
        }
        self.metric.field().validate().map_err(|e| LabError::validation("metric", e.to_string()))?;

        let p = self.equation.p;
        if !(p > 1.0) {
            return Err(LabError::validation("equation.p", format!("p must be > 1, got {p}")));
        }
        if n >= 3 {
            let crit = (n as f64 + 2.0) / (n as f64 - 2.0);
            if !(p < crit) {
                return Err(LabError::validation("equation.p", format!("p must be < (n+2)/(n-2) = {crit}, got {p}")));
            }
        }
        if !(self.equation.alpha >= 0.0) {
            return Err(LabError::validation("equation.alpha", "must be >= 0"));
        }

        let g = &self.grid;
        positive(g.r_in, "grid.r_in")?;
        if !(g.r_out > g.r_in) {
            return Err(LabError::validation(
                "grid.r_out",
                format!("must exceed grid.r_in = {}, got {}", g.r_in, g.r_out),
            ));
        }
        if g.j < 3 {
            return Err(LabError::validation("grid.j", format!("must be >= 3, got {}", g.j)));
        }
        match (self.metric.warped().is_some(), g.k) {
            (true, None) => return Err(LabError::validation("grid.k", "required for warped metrics")),
            (true, Some(k)) if k < 3 => return Err(LabError::validation("grid.k", format!("must be >= 3, got {k}"))),
            (false, Some(k)) if k != 1 => {
                return Err(LabError::validation("grid.k", "only warped metrics have an angular grid"))
            }
            _ => {}
        }

        let t = &self.time;
        positive(t.dt, "time.dt")?;
        if !(t.t_final >= 0.0 && t.t_final.is_finite()) {
            return Err(LabError::validation("time.t_final", format!("must be >= 0, got {}", t.t_final)));
        }
        positive(t.tolerance, "time.tolerance")?;
        if t.max_iterations == 0 {
            return Err(LabError::validation("time.max_iterations", "must be >= 1"));
        }
        if t.stride == 0 {
            return Err(LabError::validation("time.stride", "must be >= 1"));
        }
        if let Some(s) = t.stop_below {
            if !(s > 0.0 && s < 1.0) {
                return Err(LabError::validation("time.stop_below", format!("must lie in (0, 1), got {s}")));
            }
        }

        self.validate_damping()?;
        self.validate_initial()?;

        let c = &self.checks;
        if !(c.delta > 0.0 && c.delta <= 1.0) {
            return Err(LabError::validation("checks.delta", format!("must lie in (0, 1], got {}", c.delta)));
        }
        if c.radii == 0 || c.directions == 0 {
            return Err(LabError::validation("checks.radii", "sample counts must be >= 1"));
        }
        if !(c.transient >= 0.0 && c.transient < 1.0) {
            return Err(LabError::validation("checks.transient", format!("must lie in [0, 1), got {}", c.transient)));
        }
        if c.levels == 0 {
            return Err(LabError::validation("checks.levels", "must be >= 1"));
        }
        for (i, h) in c.horizons.iter().enumerate() {
            if !(*h > 0.0) {
                return Err(LabError::validation(format!("checks.horizons[{i}]"), format!("must be > 0, got {h}")));
            }
        }
        for (i, a) in c.amplitudes.iter().enumerate() {
            if !(*a >= 0.0) {
                return Err(LabError::validation(format!("checks.amplitudes[{i}]"), format!("must be >= 0, got {a}")));
            }
        }
        self.multiplier_field()?;
        for (i, s) in self.outputs.snapshots.iter().enumerate() {
            if !(*s >= 0.0 && *s <= t.t_final + 1e-12) {
                return Err(LabError::validation(
                    format!("outputs.snapshots[{i}]"),
                    format!("must lie in [0, time.t_final], got {s}"),
                ));
            }
        }
        if self.outputs.prefix.is_empty() || self.outputs.prefix.contains(['/', '\\']) {
            return Err(LabError::validation("outputs.prefix", "must be a non-empty file stem"));
        }
        if let Some(geo) = &self.geodesics {
            self.validate_geodesics(geo)?;
        }
        Ok(())
    }

    fn validate_damping(&self) -> LabResult<()> {
        let d = &self.damping;
        let r_in = self.grid.r_in;
        match d.kind {
            DampingKindName::None => {
                if d.eps1.is_some() {
                    return Err(LabError::validation("damping.eps1", "a collar needs kind = \"smoothstep\""));
                }
            }
            DampingKindName::Constant => positive(need(d.a0, "damping.a0", "constant")?, "damping.a0")?,
            DampingKindName::Smoothstep => {
                positive(need(d.a0, "damping.a0", "smoothstep")?, "damping.a0")?;
                let r0 = need(d.r0, "damping.r0", "smoothstep")?;
                let eps0 = need(d.eps0, "damping.eps0", "smoothstep")?;
                if !(r0 > r_in && r0 < self.grid.r_out) {
                    return Err(LabError::validation(
                        "damping.r0",
                        format!("must satisfy grid.r_in < r0 < grid.r_out = ({r_in}, {}), got {r0}", self.grid.r_out),
                    ));
                }
                if !(eps0 > 0.0 && r0 - eps0 > r_in) {
                    return Err(LabError::validation(
                        "damping.eps0",
                        format!("must lie in (0, r0 - r_in) = (0, {}), got {eps0}", r0 - r_in),
                    ));
                }
            }
        }
        self.damping_profile().validate().map_err(|e| LabError::validation("damping", e.to_string()))
    }

    fn validate_initial(&self) -> LabResult<()> {
        let i = &self.initial;
        let kind = match i.kind {
            InitialKind::Zero => return Ok(()),
            InitialKind::Gaussian => "gaussian",
            InitialKind::Ring => "ring",
        };
        let center = need(i.center, "initial.center", kind)?;
        positive(need(i.width, "initial.width", kind)?, "initial.width")?;
        if !(center > self.grid.r_in && center < self.grid.r_out) {
            return Err(LabError::validation(
                "initial.center",
                format!("must lie inside (grid.r_in, grid.r_out), got {center}"),
            ));
        }
        if i.kind == InitialKind::Ring && self.metric.warped().is_none() && i.mode.unwrap_or(0) != 0 {
            return Err(LabError::validation("initial.mode", "a nonzero mode needs a warped metric"));
        }
        if i.kind == InitialKind::Gaussian && i.mode.is_some() {
            return Err(LabError::validation("initial.mode", "only ring data take a mode"));
        }
        Ok(())
    }

    fn validate_geodesics(&self, g: &GeodesicsSection) -> LabResult<()> {
        let n = self.dimension();
        if g.center.len() != n {
            return Err(LabError::validation("geodesics.center", format!("needs {n} coordinates")));
        }
        if g.x0.len() != n {
            return Err(LabError::validation("geodesics.x0", format!("needs {n} coordinates")));
        }
        if g.count == 0 {
            return Err(LabError::validation("geodesics.count", "must be >= 1"));
        }
        positive(g.t_budget, "geodesics.t_budget")?;
        positive(g.step, "geodesics.step")?;
        if !(g.delta > 0.0 && g.delta <= 1.0) {
            return Err(LabError::validation("geodesics.delta", format!("must lie in (0, 1], got {}", g.delta)));
        }
        match (g.region, g.inner) {
            (RegionKind::Ball, Some(_)) => {
                return Err(LabError::validation("geodesics.inner", "only shells have an inner radius"))
            }
            (RegionKind::Shell, None) => return Err(LabError::validation("geodesics.inner", "required for a shell")),
            _ => {}
        }
        g.region().validate().map_err(|e| LabError::validation("geodesics.radius", e.to_string()))
    }

    pub fn metric_field(&self) -> MetricField {
        self.metric.field()
    }

    /// `(c0, d)` of a radial metric: exact for the flat family, otherwise
    /// fitted on the grid annulus.
    pub fn radial_params(&self) -> LabResult<RadialMetricParams> {
        let n = self.dimension();
        if let MetricSection::Flat { .. } = self.metric {
            return Ok(RadialMetricParams::flat(n));
        }
        let samples = ShellSampler::new(n, self.grid.r_in, self.grid.r_out).with_density(16, 8).points()?;
        let fit = metric_determinant_fit(&self.metric_field(), &samples)?;
        if !(fit.max_residual < GRID_FIT_TOLERANCE) {
            return Err(LabError::validation(
                "metric.family",
                format!(
                    "the radial solver needs det G = c0 r^d on [grid.r_in, grid.r_out]; fit residual {:e}",
                    fit.max_residual
                ),
            ));
        }
        Ok(RadialMetricParams::from_fit(n, &fit)?)
    }

    /// Grid at refinement `level` (intervals times `2^level`).
    pub fn grid_at(&self, level: u32) -> LabResult<Grid> {
        let j = self.grid.j << level;
        let g = &self.grid;
        Ok(match self.metric.warped() {
            Some(profile) => Grid::warped(profile, g.r_in, g.r_out, j, g.k.unwrap_or(1))?,
            None => Grid::radial(self.radial_params()?, g.r_in, g.r_out, j)?,
        })
    }

    pub fn build_grid(&self) -> LabResult<Grid> {
        self.grid_at(0)
    }

    pub fn damping_profile(&self) -> DampingProfile {
        let d = &self.damping;
        let profile = match d.kind {
            DampingKindName::None => DampingProfile::none(),
            DampingKindName::Constant => DampingProfile::constant(d.a0.unwrap_or(0.0)),
            DampingKindName::Smoothstep => {
                DampingProfile::smoothstep(d.a0.unwrap_or(0.0), d.r0.unwrap_or(0.0), d.eps0.unwrap_or(0.0))
            }
        };
        match d.eps1 {
            Some(e1) => profile.with_collar(self.grid.r_in, e1),
            None => profile,
        }
    }

    pub fn solver_config(&self) -> SolverConfig {
        let t = &self.time;
        let mut cfg = SolverConfig::new(t.dt, t.t_final);
        cfg.p = self.equation.p;
        cfg.nonlinear = self.equation.nonlinear;
        cfg.tolerance = t.tolerance;
        cfg.max_iterations = t.max_iterations;
        cfg.stride = t.stride;
        cfg.stop_below = t.stop_below;
        cfg.damping = self.damping_profile();
        cfg.alpha = self.equation.alpha;
        cfg
    }

    pub fn initial_data(&self) -> InitialData {
        let i = &self.initial;
        let (center, width) = (i.center.unwrap_or(0.0), i.width.unwrap_or(1.0));
        let (amplitude, k) = (i.amplitude.unwrap_or(1.0), i.k.unwrap_or(0.0));
        match i.kind {
            InitialKind::Zero => InitialData::Zero,
            InitialKind::Gaussian => InitialData::Gaussian { center, width, amplitude, k },
            InitialKind::Ring => InitialData::Ring { center, width, amplitude, k, mode: i.mode.unwrap_or(0) },
        }
    }

    pub fn sampler(&self) -> ShellSampler {
        let c = &self.checks;
        ShellSampler::new(self.dimension(), c.r_min.unwrap_or(self.grid.r_in), c.r_max.unwrap_or(self.grid.r_out))
            .with_density(c.radii, c.directions)
            .with_seed(self.seed)
    }

    pub fn multiplier_field(&self) -> LabResult<MultiplierField> {
        let c = &self.checks;
        Ok(match c.multiplier {
            MultiplierName::RadialUnit => MultiplierField::RadialUnit,
            MultiplierName::Position => MultiplierField::Position,
            MultiplierName::Cutoff => {
                let r0 = c
                    .cutoff_r0
                    .ok_or_else(|| LabError::validation("checks.cutoff_r0", "required for the cutoff multiplier"))?;
                let eps0 = c
                    .cutoff_eps0
                    .ok_or_else(|| LabError::validation("checks.cutoff_eps0", "required for the cutoff multiplier"))?;
                if !(eps0 > 0.0 && r0 > eps0) {
                    return Err(LabError::validation(
                        "checks.cutoff_eps0",
                        format!("must lie in (0, cutoff_r0), got {eps0}"),
                    ));
                }
                MultiplierField::Cutoff { r0, eps0 }
            }
        })
    }

    pub fn multiplier_function(&self) -> MultiplierFunction {
        let standard = MultiplierFunction::standard(self.dimension());
        MultiplierFunction { c: self.checks.p_coefficient.unwrap_or(standard.c), k: self.checks.p_power }
    }
}

/// Sets a dotted key (`section.key` or a top-level key) in a scenario table.
pub fn set_key(table: &mut toml::Table, key: &str, value: toml::Value) -> LabResult<()> {
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().filter(|s| !s.is_empty()).ok_or_else(|| LabError::validation(key, "empty key"))?;
    let mut current = table;
    for part in parts {
        current = current
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| LabError::validation(key, format!("`{part}` is not a table")))?;
    }
    current.insert(last.to_string(), value);
    Ok(())
}

/// Interprets a command-line value as TOML (number, boolean, array), falling
/// back to a string.
pub fn parse_value(text: &str) -> toml::Value {
    let wrapped = format!("v = {text}");
    match wrapped.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(text.to_string()),
    }
}
