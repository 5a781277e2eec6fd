//! Exponential-rate fits of energy series, amplitude sweeps, and the
//! boundedness table for time-integrated Morawetz densities.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::assumptions::{check_assumption_a, check_boundary_condition, sphere_boundary_samples, ShellSampler};
use crate::error::{Error, Result};
use crate::functionals::{morawetz_integrals, relative_spread, DiagnosticsSeries};
use crate::grid::{FieldState, Grid, GridKind};
use crate::metric::Metric;
use crate::solver::{run_simulation, SolverConfig};

/// Minimum coefficient of determination for a rate to be reported.
pub const MIN_R_SQUARED: f64 = 0.9;
/// Default fraction of the run excluded as an initial transient.
pub const DEFAULT_TRANSIENT: f64 = 0.1;
/// Relative growth between the two largest horizons that counts as unbounded.
pub const GROWTH_THRESHOLD: f64 = 0.05;

/// Fit window. `None` bounds default to the post-transient part of the run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitWindow {
    pub start: Option<f64>,
    pub end: Option<f64>,
    /// Transient fraction used when `start` is `None`.
    pub transient: f64,
}

impl Default for FitWindow {
    fn default() -> Self {
        Self { start: None, end: None, transient: DEFAULT_TRANSIENT }
    }
}

impl FitWindow {
    pub fn between(start: f64, end: f64) -> Self {
        Self { start: Some(start), end: Some(end), transient: 0.0 }
    }

    fn resolve(&self, t: &[f64]) -> (f64, f64) {
        let (t0, tn) = (t[0], t[t.len() - 1]);
        let start = self.start.unwrap_or(t0 + self.transient * (tn - t0));
        (start, self.end.unwrap_or(tn))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    pub t1: f64,
    pub t2: f64,
    /// Decay rate; `None` when `r_squared < MIN_R_SQUARED`.
    pub c2: Option<f64>,
    /// Raw slope of `log E` (always reported).
    pub slope: f64,
    /// Prefactor in `E(t) ~ c1 exp(-c2 t) E(0)`.
    pub c1: f64,
    pub r_squared: f64,
    /// `E` is non-increasing over the window.
    pub monotone: bool,
    pub points: usize,
}

impl DecayFit {
    pub fn verdict(&self) -> &'static str {
        if self.c2.is_some() {
            "exponential"
        } else {
            "no exponential regime detected"
        }
    }
}

/// Least-squares fit of `log E(t) = log(c1 E(0)) - c2 t` over the window.
pub fn fit_exponential_rate(t: &[f64], e: &[f64], window: FitWindow) -> Result<DecayFit> {
    if t.len() != e.len() {
        return Err(Error::Fit(format!("{} times but {} energies", t.len(), e.len())));
    }
    if t.len() < 2 {
        return Err(Error::Fit("need at least two samples".into()));
    }
    let e0 = e[0];
    if !(e0 > 0.0) {
        return Err(Error::Fit(format!("E(0) must be positive, got {e0}")));
    }
    let (t1, t2) = window.resolve(t);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut es = Vec::new();
    for (&ti, &ei) in t.iter().zip(e) {
        if ti + 1e-12 < t1 || ti > t2 + 1e-12 {
            continue;
        }
        if !(ei > 0.0) {
            return Err(Error::Fit(format!("E({ti}) = {ei} is not positive")));
        }
        xs.push(ti);
        ys.push(libm::log(ei));
        es.push(ei);
    }
    let n = xs.len();
    if n < 2 {
        return Err(Error::Fit(format!("window [{t1}, {t2}] holds {n} samples")));
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Fit("window has no time extent".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let monotone = es.windows(2).all(|w| w[1] <= w[0]);
    Ok(DecayFit {
        t1,
        t2,
        c2: (r_squared >= MIN_R_SQUARED).then_some(-slope),
        slope,
        c1: libm::exp(intercept - libm::log(e0)),
        r_squared,
        monotone,
        points: n,
    })
}

/// Fit of one diagnostics series.
pub fn fit_series(series: &DiagnosticsSeries, window: FitWindow) -> Result<DecayFit> {
    fit_exponential_rate(&series.times(), &series.energies(), window)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub amplitude: f64,
    pub fit: Option<DecayFit>,
    /// Why the row has no fit.
    pub error: Option<String>,
    pub tainted: bool,
    /// `E(t)/E(0)` at the recorded times.
    pub normalized: Vec<f64>,
    /// Final mass over initial mass.
    pub mass_ratio: f64,
}

/// Runs one amplitude of a sweep. Simulation errors propagate; fit errors
/// (including the degenerate zero amplitude) become a row annotation.
pub fn sweep_row(
    grid: &Grid,
    cfg: &SolverConfig,
    initial: &FieldState,
    amplitude: f64,
    window: FitWindow,
) -> Result<SweepRow> {
    if !(amplitude >= 0.0 && amplitude.is_finite()) {
        return Err(Error::Config(format!("amplitudes must be >= 0, got {amplitude}")));
    }
    let out = run_simulation(grid, cfg, initial.scaled(amplitude)).map_err(|e| annotate(e, amplitude))?;
    let e = out.series.energies();
    let m = out.series.masses();
    let normalized = e.iter().map(|x| if e[0] > 0.0 { x / e[0] } else { 0.0 }).collect();
    let mass_ratio = if m[0] > 0.0 { m[m.len() - 1] / m[0] } else { 0.0 };
    let (fit, error) = match fit_series(&out.series, window) {
        Ok(f) => (Some(f), None),
        Err(err) => (None, Some(err.to_string())),
    };
    Ok(SweepRow { amplitude, fit, error, tainted: out.tainted, normalized, mass_ratio })
}

fn annotate(e: Error, amplitude: f64) -> Error {
    match e {
        Error::Step { step, time, residual, message } => {
            Error::Step { step, time, residual, message: format!("amplitude {amplitude}: {message}") }
        }
        Error::Config(m) => Error::Config(format!("amplitude {amplitude}: {m}")),
        other => other,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniformityTable {
    pub rows: Vec<SweepRow>,
    /// Relative spread of `c2` over untainted rows with a rate.
    pub spread: Option<f64>,
    /// `sup |E_i(t)/E_i(0) - E_j(t)/E_j(0)|` over rows with positive energy.
    pub max_normalized_difference: f64,
}

impl UniformityTable {
    pub fn from_rows(rows: Vec<SweepRow>) -> Self {
        let rates: Vec<f64> = rows.iter().filter(|r| !r.tainted).filter_map(|r| r.fit.as_ref()?.c2).collect();
        let spread = if rates.len() >= 2 { relative_spread(&rates).ok() } else { None };
        let live: Vec<&SweepRow> = rows.iter().filter(|r| r.amplitude > 0.0 && !r.normalized.is_empty()).collect();
        let mut diff = 0.0_f64;
        for w in live.windows(2) {
            for (a, b) in w[0].normalized.iter().zip(&w[1].normalized) {
                diff = diff.max(libm::fabs(a - b));
            }
        }
        Self { rows, spread, max_normalized_difference: diff }
    }
}

/// Sequential sweep of `initial` scaled by each amplitude.
pub fn uniformity_sweep(
    grid: &Grid,
    cfg: &SolverConfig,
    initial: &FieldState,
    amplitudes: &[f64],
    window: FitWindow,
) -> Result<UniformityTable> {
    let rows = amplitudes.iter().map(|&a| sweep_row(grid, cfg, initial, a, window)).collect::<Result<Vec<_>>>()?;
    Ok(UniformityTable::from_rows(rows))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HorizonRow {
    pub horizon: f64,
    /// `I_k(T) / E(0)` for `k = 1, 2, 3`.
    pub ratios: [f64; 3],
    pub max_outer_boundary_mass: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MorawetzTable {
    pub d: f64,
    /// Which of `I_1, I_2, I_3` the theorem bounds for this `d`.
    pub covered: [bool; 3],
    pub rows: Vec<HorizonRow>,
    /// Relative change between the two largest horizons.
    pub growth: [f64; 3],
    /// Some covered integral grew by more than [`GROWTH_THRESHOLD`].
    pub flagged: bool,
}

impl MorawetzTable {
    pub fn max_outer_boundary_mass(&self) -> f64 {
        self.rows.iter().map(|r| r.max_outer_boundary_mass).fold(0.0, f64::max)
    }
}

/// Covered integrals for exponent `d` in dimension `n`; `d` below `2(3-n)`
/// is outside the theorem.
pub fn covered_integrals(n: usize, d: f64) -> Result<[bool; 3]> {
    let threshold = 2.0 * (3.0 - n as f64);
    let tol = 1e-9 * (1.0 + libm::fabs(threshold));
    if d < threshold - tol {
        return Err(Error::Config(format!("d = {d} is below 2(3-n) = {threshold}; no Morawetz bound applies")));
    }
    Ok([true, d > threshold + tol, true])
}

/// Builds the table from one series that covers the largest horizon.
pub fn morawetz_table(series: &DiagnosticsSeries, n: usize, d: f64, horizons: &[f64]) -> Result<MorawetzTable> {
    let covered = covered_integrals(n, d)?;
    if horizons.is_empty() {
        return Err(Error::Config("horizons must be non-empty".into()));
    }
    if series.is_empty() {
        return Err(Error::Config("empty diagnostics series".into()));
    }
    let mut hs = horizons.to_vec();
    hs.sort_by(f64::total_cmp);
    let e0 = series.records[0].obs.energy;
    let last = series.records[series.len() - 1].t;
    let mut rows = Vec::with_capacity(hs.len());
    for &h in &hs {
        if h > last + 1e-9 {
            return Err(Error::Config(format!("horizon {h} exceeds the run length {last}")));
        }
        let window = series.until(h);
        let i = morawetz_integrals(&window)?;
        let ratio = |x: f64| if e0 > 0.0 { x / e0 } else { 0.0 };
        rows.push(HorizonRow {
            horizon: h,
            ratios: [ratio(i.i1), ratio(i.i2), ratio(i.i3)],
            max_outer_boundary_mass: window.max_outer_boundary_mass(),
        });
    }
    let mut growth = [0.0; 3];
    if rows.len() >= 2 {
        let (a, b) = (&rows[rows.len() - 2], &rows[rows.len() - 1]);
        for k in 0..3 {
            let base = libm::fabs(a.ratios[k]);
            growth[k] = if base > 0.0 { libm::fabs(b.ratios[k] - a.ratios[k]) / base } else { 0.0 };
        }
    }
    let flagged = (0..3).any(|k| covered[k] && growth[k] > GROWTH_THRESHOLD);
    Ok(MorawetzTable { d, covered, rows, growth, flagged })
}

/// Checks the undamped geometric hypotheses on the grid's annulus, runs to
/// the largest horizon and tabulates the covered ratios.
pub fn morawetz_boundedness_check<M: Metric + ?Sized>(
    field: &M,
    grid: &Grid,
    cfg: &SolverConfig,
    initial: FieldState,
    horizons: &[f64],
) -> Result<MorawetzTable> {
    let params = match grid.kind {
        GridKind::Radial(p) => p,
        GridKind::Warped(_) => return Err(Error::Config("Morawetz table needs a radial grid".into())),
    };
    if !cfg.damping.is_zero() {
        return Err(Error::Config("Morawetz boundedness requires damping.kind = none".into()));
    }
    if field.dim() != params.n {
        return Err(Error::Config(format!("metric dimension {} != grid dimension {}", field.dim(), params.n)));
    }
    let samples = ShellSampler::new(params.n, grid.r_in, grid.r_out).with_density(16, 32).points()?;
    let alpha = cfg.alpha;
    let report = check_assumption_a(field, &samples, |_| alpha, &cfg.damping)?;
    let violated = report.violations();
    if !violated.is_empty() {
        return Err(Error::Config(format!("assumption A precheck failed: {}", violated.join(", "))));
    }
    let boundary = check_boundary_condition(field, &sphere_boundary_samples(field, grid.r_in, 64, 0)?)?;
    if !boundary.verdict.passed() {
        return Err(Error::Config(format!(
            "boundary condition dr/dnu <= 0 fails: max {} at {:?}",
            boundary.max_value, boundary.witness
        )));
    }
    let t_max = horizons.iter().copied().fold(0.0, f64::max);
    let mut run_cfg = cfg.clone();
    run_cfg.t_final = t_max;
    let out = run_simulation(grid, &run_cfg, initial)?;
    morawetz_table(&out.series, params.n, params.d, horizons)
}
