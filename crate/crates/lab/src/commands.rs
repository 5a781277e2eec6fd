//! Subcommand implementations. Each writes its artifacts under the output
//! directory and returns a JSON summary with an overall pass flag.

use std::path::{Path, PathBuf};

use morawetz_core::assumptions::{
    check_appendix_condition, check_assumption_a, check_assumption_b, check_assumption_c, check_boundary_condition,
    sphere_boundary_samples, DampedCheck,
};
use morawetz_core::decay::{fit_series, morawetz_boundedness_check, sweep_row, FitWindow, UniformityTable};
use morawetz_core::functionals::{morawetz_integrals, observability_ratio};
use morawetz_core::geodesics::{gcc_bound, sample_initial_conditions, trace_until_exit, GccReport};
use morawetz_core::grid::make_initial_data;
use morawetz_core::multiplier::multiplier_identity_residual;
use morawetz_core::solver::{run_simulation_with, RunOutput};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{LabError, LabResult};
use crate::io;
use crate::report;
use crate::scenario::{from_table, parse_value, set_key, AssumptionName, DampingKindName, Scenario};

/// Per-step mass-identity residual accepted by `simulate`.
pub const MASS_IDENTITY_LIMIT: f64 = 1e-10;
/// Minimum residual reduction per refinement level in `identity-check`.
pub const IDENTITY_RATIO: f64 = 1.5;
/// Slack on the escape bound when judging geodesic exit times.
pub const EXIT_SLACK: f64 = 1e-4;
/// Rate spread accepted by `decay` sweeps on nonlinear and linear runs.
pub const NONLINEAR_SPREAD: f64 = 0.2;
pub const LINEAR_SPREAD: f64 = 0.01;
/// Outer-band mass accepted by `morawetz`.
pub const MORAWETZ_BOUNDARY_MASS: f64 = 1e-6;
/// Rate fits require this coefficient of determination in `decay`.
pub const DECAY_R_SQUARED: f64 = 0.99;

#[derive(Debug, Clone)]
pub struct Context {
    pub scenario: Scenario,
    pub out_dir: PathBuf,
    pub quiet: bool,
}

impl Context {
    pub fn new(scenario: Scenario, out_dir: impl Into<PathBuf>) -> Self {
        Self { scenario, out_dir: out_dir.into(), quiet: true }
    }

    fn say(&self, msg: &str) {
        if !self.quiet {
            eprintln!("{msg}");
        }
    }

    fn target(&self, out: Option<&Path>, default: &str) -> PathBuf {
        match out {
            Some(p) if p.is_absolute() => p.to_path_buf(),
            Some(p) => self.out_dir.join(p),
            None => self.out_dir.join(default),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub passed: bool,
    pub summary: Value,
    pub files: Vec<PathBuf>,
}

fn finish(
    ctx: &Context,
    command: &str,
    passed: bool,
    mut body: Value,
    path: PathBuf,
    mut files: Vec<PathBuf>,
) -> LabResult<Outcome> {
    body["command"] = json!(command);
    body["scenario_hash"] = json!(ctx.scenario.hash());
    body["seed"] = json!(ctx.scenario.seed);
    body["passed"] = json!(passed);
    if ctx.scenario.outputs.json || command != "simulate" {
        io::write_json(&path, &body)?;
        files.push(path);
    }
    ctx.say(&format!("{command}: {}", if passed { "pass" } else { "FAIL" }));
    Ok(Outcome { passed, summary: body, files })
}

pub fn check_assumptions(ctx: &Context, out: Option<&Path>) -> LabResult<Outcome> {
    let s = &ctx.scenario;
    let field = s.metric_field();
    let samples = s.sampler().points()?;
    let damping = s.damping_profile();
    let alpha = s.equation.alpha;
    let id = match s.checks.assumption {
        AssumptionName::Auto => match (s.damping.kind, s.damping.eps1) {
            (DampingKindName::None, _) => AssumptionName::A,
            (_, Some(_)) => AssumptionName::B,
            _ => AssumptionName::C,
        },
        other => other,
    };
    let damped = || -> LabResult<DampedCheck> {
        let (r0, eps0) = match (s.damping.r0, s.damping.eps0) {
            (Some(r0), Some(eps0)) => (r0, eps0),
            _ => {
                return Err(LabError::validation("damping.r0", "assumptions B and C need a smoothstep damping profile"))
            }
        };
        Ok(DampedCheck { delta: s.checks.delta, r0, eps0, eps1: s.damping.eps1, r_in: s.grid.r_in })
    };
    let rep = match id {
        AssumptionName::A | AssumptionName::Auto => check_assumption_a(&field, &samples, |_| alpha, &damping)?,
        AssumptionName::B => check_assumption_b(&field, &damping, &samples, &damped()?)?,
        AssumptionName::C => check_assumption_c(&field, &damping, &samples, &damped()?)?,
        AssumptionName::Appendix => check_appendix_condition(&field, &samples, s.checks.delta)?,
    };
    let dirs = s.checks.directions.max(2 * s.dimension());
    let bnd = check_boundary_condition(&field, &sphere_boundary_samples(&field, s.grid.r_in, dirs, s.seed)?)?;
    let passed = rep.verdict.passed() && bnd.verdict.passed();
    let body = json!({
        "assumption": report::assumption(&rep),
        "boundary": report::boundary(&bnd),
        "samples": samples.len(),
    });
    finish(ctx, "check-assumptions", passed, body, ctx.target(out, "assumptions.json"), Vec::new())
}

pub fn geodesics(ctx: &Context, out: Option<&Path>) -> LabResult<Outcome> {
    let s = &ctx.scenario;
    let geo =
        s.geodesics.as_ref().ok_or_else(|| LabError::validation("geodesics", "section required for this command"))?;
    let field = s.metric_field();
    let region = geo.region();
    let ics = sample_initial_conditions(&field, &region, &geo.x0, geo.count, s.seed)?;
    let bound = gcc_bound(&field, &region, geo.delta, &geo.x0, &ics, geo.t_budget, s.seed)?;
    let traces = ics
        .par_iter()
        .map(|ic| trace_until_exit(&field, &region, ic, geo.t_budget, geo.step, false))
        .collect::<Result<Vec<_>, _>>()?;
    let rep = GccReport::from_traces(bound, &traces);
    let passed = rep.all_exit() && rep.max_exit_time <= rep.bound + EXIT_SLACK;
    let body = json!({ "gcc": report::gcc(&rep), "delta": geo.delta, "x0": geo.x0 });
    finish(ctx, "geodesics", passed, body, ctx.target(out, "geodesics.json"), Vec::new())
}

/// Runs the scenario's simulation and writes the snapshot files it requests.
pub fn run_with_snapshots(ctx: &Context) -> LabResult<(RunOutput, Vec<PathBuf>)> {
    let s = &ctx.scenario;
    let grid = s.build_grid()?;
    let cfg = s.solver_config();
    let initial = make_initial_data(&s.initial_data(), &grid)?;
    let hash = s.hash();
    let prefix = &s.outputs.prefix;
    let wanted: Vec<usize> = s.outputs.snapshots.iter().map(|t| (t / cfg.dt).round() as usize).collect();
    let mut files = Vec::new();
    if wanted.contains(&0) {
        files.extend(io::write_snapshot(&ctx.out_dir, &format!("{prefix}_snap_0"), &grid, &initial, &hash)?);
    }
    let mut failure = None;
    let out = run_with_observer(&grid, &cfg, initial, &mut |view| {
        if wanted.contains(&view.index) {
            match io::write_snapshot(&ctx.out_dir, &format!("{prefix}_snap_{}", view.index), &grid, view.after, &hash) {
                Ok(f) => files.extend(f),
                Err(e) => {
                    failure = Some(e);
                    return Err(morawetz_core::Error::Config("snapshot write failed".into()));
                }
            }
        }
        Ok(())
    });
    if let Some(e) = failure {
        return Err(e);
    }
    Ok((out?, files))
}

fn run_with_observer(
    grid: &morawetz_core::grid::Grid,
    cfg: &morawetz_core::solver::SolverConfig,
    initial: morawetz_core::grid::FieldState,
    observer: &mut dyn FnMut(&morawetz_core::solver::StepView) -> morawetz_core::Result<()>,
) -> LabResult<RunOutput> {
    Ok(run_simulation_with(grid, cfg, initial, observer)?)
}

pub fn simulate(ctx: &Context, out: Option<&Path>) -> LabResult<Outcome> {
    let s = &ctx.scenario;
    io::ensure_dir(&ctx.out_dir)?;
    let (run, mut files) = run_with_snapshots(ctx)?;
    files.extend(io::write_series(&ctx.out_dir, &s.outputs.prefix, &run.series, s.outputs.csv, s.outputs.plt)?);
    let series = &run.series;
    let first = series.records.first().expect("initial record");
    let last = series.records.last().expect("final record");
    let damped = !s.damping_profile().is_zero();
    let observability =
        if damped { observability_ratio(series, last.t).ok().map(|o| report::observability(&o)) } else { None };
    let window = FitWindow { transient: s.checks.transient, ..FitWindow::default() };
    let fit = if damped { fit_series(series, window).ok().map(|f| report::fit(&f)) } else { None };
    let mass_res = series.max_mass_residual();
    let passed = mass_res < MASS_IDENTITY_LIMIT;
    let body = json!({
        "steps": run.steps,
        "final_time": last.t,
        "tainted": run.tainted,
        "mass": { "initial": first.obs.mass, "final": last.obs.mass },
        "energy": { "initial": first.obs.energy, "final": last.obs.energy },
        "max_mass_identity_residual": mass_res,
        "max_energy_identity_residual": series.max_energy_residual(),
        "max_outer_boundary_mass": series.max_outer_boundary_mass(),
        "max_fixed_point_iterations": run.max_iterations_used,
        "morawetz": report::morawetz_integrals(&morawetz_integrals(series)?),
        "observability": observability,
        "decay_fit": fit,
    });
    let name = format!("{}.json", s.outputs.prefix);
    finish(ctx, "simulate", passed, body, ctx.target(out, &name), files)
}

pub fn identity_check(ctx: &Context, levels: Option<usize>, out: Option<&Path>) -> LabResult<Outcome> {
    let s = &ctx.scenario;
    let levels = levels.unwrap_or(s.checks.levels).max(1);
    let h = s.multiplier_field()?;
    let p = s.multiplier_function();
    let rows = (0..levels)
        .into_par_iter()
        .map(|lvl| -> LabResult<(usize, f64, Value, f64, f64)> {
            let grid = s.grid_at(lvl as u32)?;
            let mut cfg = s.solver_config();
            cfg.dt /= (1u64 << lvl) as f64;
            cfg.stride = 1usize << lvl;
            let initial = make_initial_data(&s.initial_data(), &grid)?;
            let (rep, run) = multiplier_identity_residual(&grid, &cfg, initial, h, p)?;
            Ok((
                grid.j_intervals,
                cfg.dt,
                report::multiplier(&rep),
                run.series.max_mass_residual(),
                run.series.max_energy_residual(),
            ))
        })
        .collect::<LabResult<Vec<_>>>()?;
    let residuals: Vec<f64> = rows.iter().map(|r| r.2["residual"].as_f64().unwrap_or(f64::NAN)).collect();
    let ratios: Vec<f64> = residuals.windows(2).map(|w| w[0] / w[1]).collect();
    let energy_ratios: Vec<f64> = rows.windows(2).map(|w| w[0].4 / w[1].4).collect();
    let passed = ratios.iter().all(|r| *r >= IDENTITY_RATIO);
    let body = json!({
        "levels": rows.iter().map(|(j, dt, rep, m, e)| json!({
            "radial_intervals": j,
            "dt": dt,
            "multiplier": rep,
            "max_mass_identity_residual": m,
            "max_energy_identity_residual": e,
        })).collect::<Vec<_>>(),
        "residual_ratios": ratios,
        "energy_residual_ratios": energy_ratios,
        "required_ratio": IDENTITY_RATIO,
    });
    finish(ctx, "identity-check", passed, body, ctx.target(out, "identity.json"), Vec::new())
}

pub fn decay(ctx: &Context, amplitudes: Option<&[f64]>, out: Option<&Path>) -> LabResult<Outcome> {
    let s = &ctx.scenario;
    let grid = s.build_grid()?;
    let cfg = s.solver_config();
    let initial = make_initial_data(&s.initial_data(), &grid)?;
    let window = FitWindow { transient: s.checks.transient, ..FitWindow::default() };
    let amps: Vec<f64> = match amplitudes {
        Some(a) => a.to_vec(),
        None if !s.checks.amplitudes.is_empty() => s.checks.amplitudes.clone(),
        None => vec![1.0],
    };
    let rows = amps.par_iter().map(|&a| sweep_row(&grid, &cfg, &initial, a, window)).collect::<Result<Vec<_>, _>>()?;
    let table = UniformityTable::from_rows(rows);
    let fits_ok = table.rows.iter().filter(|r| r.amplitude > 0.0).all(|r| {
        !r.tainted && r.fit.as_ref().is_some_and(|f| f.c2.is_some_and(|c| c > 0.0) && f.r_squared >= DECAY_R_SQUARED)
    });
    let limit = if cfg.nonlinear { NONLINEAR_SPREAD } else { LINEAR_SPREAD };
    let spread_ok = amps.len() < 2 || table.spread.is_some_and(|x| x < limit);
    let body = json!({
        "sweep": report::uniformity(&table),
        "spread_limit": limit,
        "required_r_squared": DECAY_R_SQUARED,
        "nonlinear": cfg.nonlinear,
    });
    finish(ctx, "decay", fits_ok && spread_ok, body, ctx.target(out, "decay.json"), Vec::new())
}

pub fn morawetz(ctx: &Context, horizons: Option<&[f64]>, out: Option<&Path>) -> LabResult<Outcome> {
    let s = &ctx.scenario;
    let grid = s.build_grid()?;
    let cfg = s.solver_config();
    let initial = make_initial_data(&s.initial_data(), &grid)?;
    let hs: Vec<f64> = match horizons {
        Some(h) => h.to_vec(),
        None if !s.checks.horizons.is_empty() => s.checks.horizons.clone(),
        None => vec![10.0, 20.0, 40.0],
    };
    let table = morawetz_boundedness_check(&s.metric_field(), &grid, &cfg, initial, &hs)?;
    let passed = !table.flagged && table.max_outer_boundary_mass() < MORAWETZ_BOUNDARY_MASS;
    let body = json!({ "table": report::morawetz_table(&table), "boundary_mass_limit": MORAWETZ_BOUNDARY_MASS });
    finish(ctx, "morawetz", passed, body, ctx.target(out, "morawetz.json"), Vec::new())
}

/// Runs `simulate` once per value of a scenario key, each in its own
/// subdirectory.
pub fn sweep(ctx: &Context, param: &str, values: &[String], out: Option<&Path>) -> LabResult<Outcome> {
    if values.is_empty() {
        return Err(LabError::Config("sweep needs at least one value".into()));
    }
    let base = ctx.scenario.to_table();
    let variants = values
        .iter()
        .map(|v| {
            let mut t = base.clone();
            set_key(&mut t, param, parse_value(v))?;
            let scenario = from_table(t)?;
            let dir = ctx.out_dir.join(format!("{}={}", param, sanitize(v)));
            Ok((v.clone(), Context { scenario, out_dir: dir, quiet: true }))
        })
        .collect::<LabResult<Vec<_>>>()?;
    let results =
        variants.par_iter().map(|(v, c)| simulate(c, None).map(|o| (v.clone(), o))).collect::<LabResult<Vec<_>>>()?;
    let passed = results.iter().all(|(_, o)| o.passed);
    let rows: Vec<Value> = results
        .iter()
        .map(|(v, o)| {
            json!({
                "value": v,
                "directory": format!("{}={}", param, sanitize(v)),
                "passed": o.passed,
                "scenario_hash": o.summary["scenario_hash"],
                "tainted": o.summary["tainted"],
                "energy": o.summary["energy"],
                "mass": o.summary["mass"],
                "decay_fit": o.summary["decay_fit"],
                "observability": o.summary["observability"],
            })
        })
        .collect();
    let files = results.into_iter().flat_map(|(_, o)| o.files).collect();
    let body = json!({ "parameter": param, "rows": rows });
    finish(ctx, "sweep", passed, body, ctx.target(out, "sweep.json"), files)
}

fn sanitize(v: &str) -> String {
    v.chars().map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' }).collect()
}
