//! Acceptance suite. Prints one line per criterion and exits non-zero if any
//! fails. Run with `cargo test -p morawetz-lab --test acceptance`.

use std::path::Path;
use std::time::{Duration, Instant};

use morawetz_core::assumptions::{
    check_assumption_a, check_assumption_c, DampedCheck, ShellSampler, DET_FIT_TOLERANCE,
};
use morawetz_core::damping::DampingProfile;
use morawetz_core::functionals::observability_ratio;
use morawetz_core::geodesics::{trace_until_exit, GeodesicState, Region};
use morawetz_core::grid::{make_initial_data, Grid, InitialData};
use morawetz_core::metric::{metric_determinant_fit, MetricField, RadialMetricParams};
use morawetz_core::solver::{run_simulation, SolverConfig};
use morawetz_lab::commands::{self, Context};
use morawetz_lab::scenario::{parse_scenario, Scenario};
use serde_json::Value;

const MASS_DRIFT: f64 = 1e-10;
const MASS_DRIFT_RUNTIME: Duration = Duration::from_secs(5);
const MASS_IDENTITY: f64 = 1e-10;
const ENERGY_RATIO: f64 = 3.5;
const MORAWETZ_GROWTH: f64 = 0.05;
const MORAWETZ_BOUNDARY_MASS: f64 = 1e-6;
const MORAWETZ_RUNTIME: Duration = Duration::from_secs(120);
const DECAY_R_SQUARED: f64 = 0.99;
const DECAY_ENERGY_RATIO: f64 = 1e-4;
const NONLINEAR_SPREAD: f64 = 0.2;
const LINEAR_SPREAD: f64 = 0.01;
const FLAT_EXIT_LOW: f64 = 1e-3;
const FLAT_EXIT_HIGH: f64 = 1e-6;
const EXIT_SLACK: f64 = 1e-4;
const TRAP_DEVIATION: f64 = 1e-6;
const IDENTITY_RATIO: f64 = 1.5;
const ALPHA_TOLERANCE: f64 = 1e-6;
const OBSERVABILITY_VARIATION: f64 = 0.1;

/// Flat exterior of the unit ball with damping beyond r = 6.
const DAMPED: &str = r#"
schema_version = 1
seed = 7
[metric]
family = "flat"
[damping]
kind = "smoothstep"
a0 = 1.0
r0 = 6.0
eps0 = 1.0
[grid]
r_in = 1.0
r_out = 40.0
j = 1600
[time]
dt = 0.01
t_final = 50.0
stride = 10
[initial]
center = 3.0
width = 0.5
amplitude = 1.0
k = 0.0
"#;

fn morawetz_scenario(metric: &str) -> String {
    format!(
        r#"
schema_version = 1
[metric]
{metric}
[grid]
r_in = 1.0
r_out = 320.0
j = 6400
[time]
dt = 0.01
t_final = 40.0
stride = 10
[initial]
center = 7.0
width = 1.0
amplitude = 0.3
k = 0.0
"#
    )
}

fn identity_scenario(multiplier: &str) -> String {
    format!(
        r#"
schema_version = 1
[metric]
family = "flat"
[grid]
r_in = 1.0
r_out = 14.0
j = 100
[time]
dt = 0.04
t_final = 0.8
[initial]
center = 5.0
width = 1.2
amplitude = 1.0
k = 0.5
[checks]
{multiplier}
levels = 3
"#
    )
}

type Criterion = (&'static str, fn() -> Verdict);

struct Verdict {
    passed: bool,
    detail: String,
}

impl Verdict {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self { passed, detail: detail.into() }
    }
}

fn scenario(text: &str) -> Scenario {
    parse_scenario(text, "acceptance").expect("acceptance scenario parses")
}

fn scratch() -> tempfile::TempDir {
    tempfile::tempdir().expect("temporary directory")
}

fn gaussian(center: f64, width: f64, k: f64) -> InitialData {
    InitialData::Gaussian { center, width, amplitude: 1.0, k }
}

fn mass_conservation() -> Verdict {
    let start = Instant::now();
    let g = Grid::radial(RadialMetricParams::flat(3), 1.0, 10.0, 800).unwrap();
    let cfg = SolverConfig::new(1e-3, 1.0);
    let out = run_simulation(&g, &cfg, make_initial_data(&gaussian(4.0, 0.6, 1.0), &g).unwrap()).unwrap();
    let elapsed = start.elapsed();
    let m = out.series.masses();
    let drift = m.iter().map(|x| (x - m[0]).abs()).fold(0.0, f64::max) / m[0];
    Verdict::new(
        out.steps == 1000 && drift < MASS_DRIFT && elapsed < MASS_DRIFT_RUNTIME,
        format!("{} steps, drift {drift:.2e} (< {MASS_DRIFT:e}), {:.2} s", out.steps, elapsed.as_secs_f64()),
    )
}

fn mass_dissipation() -> Verdict {
    let g = Grid::radial(RadialMetricParams::flat(3), 1.0, 12.0, 300).unwrap();
    let mut cfg = SolverConfig::new(2e-3, 2.0);
    cfg.damping = DampingProfile::smoothstep(1.0, 5.0, 1.0);
    let out = run_simulation(&g, &cfg, make_initial_data(&gaussian(4.0, 0.6, 1.0), &g).unwrap()).unwrap();
    let worst = out.series.max_mass_residual();
    let decayed = out.series.masses().last().unwrap() / out.series.masses()[0];
    Verdict::new(
        out.steps == 1000 && worst < MASS_IDENTITY,
        format!("{} steps, max residual {worst:.2e} (< {MASS_IDENTITY:e}), M(T)/M(0) = {decayed:.3}", out.steps),
    )
}

fn energy_dissipation() -> Verdict {
    let g = Grid::radial(RadialMetricParams::flat(3), 1.0, 10.0, 200).unwrap();
    let residual = |dt: f64| {
        let mut cfg = SolverConfig::new(dt, 0.4);
        cfg.damping = DampingProfile::smoothstep(0.5, 6.0, 2.0);
        let data = InitialData::Gaussian { center: 4.5, width: 0.8, amplitude: 1.5, k: 0.5 };
        run_simulation(&g, &cfg, make_initial_data(&data, &g).unwrap()).unwrap().series.max_energy_residual()
    };
    let r = [residual(0.02), residual(0.01), residual(0.005)];
    let ratios = [r[0] / r[1], r[1] / r[2]];
    Verdict::new(
        ratios.iter().all(|x| *x >= ENERGY_RATIO),
        format!(
            "residuals {:.2e} {:.2e} {:.2e}, ratios {:.2} {:.2} (>= {ENERGY_RATIO})",
            r[0], r[1], r[2], ratios[0], ratios[1]
        ),
    )
}

fn morawetz_case(label: &str, metric: &str, expect_covered: &[&str]) -> (bool, String) {
    let dir = scratch();
    let ctx = Context::new(scenario(&morawetz_scenario(metric)), dir.path());
    let start = Instant::now();
    let out = commands::morawetz(&ctx, Some(&[20.0, 40.0]), None).unwrap();
    let elapsed = start.elapsed();
    let t = &out.summary["table"];
    let covered: Vec<&str> = t["covered"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    let growth: Vec<f64> = covered.iter().map(|k| t["growth"][k].as_f64().unwrap()).collect();
    let outer = t["max_outer_boundary_mass"].as_f64().unwrap();
    let passed = covered == expect_covered
        && growth.iter().all(|g| *g < MORAWETZ_GROWTH)
        && outer < MORAWETZ_BOUNDARY_MASS
        && elapsed < MORAWETZ_RUNTIME;
    let parts: Vec<String> = covered.iter().zip(&growth).map(|(k, g)| format!("{k} {:.2}%", 100.0 * g)).collect();
    (passed, format!("{label}: {}, outer mass {outer:.1e}, {:.1} s", parts.join(" "), elapsed.as_secs_f64()))
}

fn morawetz_boundedness() -> Verdict {
    let flat = morawetz_case("flat", "family = \"flat\"", &["i1", "i3"]);
    let e21 = morawetz_case("example21", "family = \"example21\"\nm = 2.0\nd1 = 0.5", &["i1", "i2", "i3"]);
    Verdict::new(flat.0 && e21.0, format!("{}; {}", flat.1, e21.1))
}

fn exponential_decay() -> Verdict {
    let dir = scratch();
    let ctx = Context::new(scenario(DAMPED), dir.path());
    let out = commands::simulate(&ctx, None).unwrap();
    let fit = &out.summary["decay_fit"];
    let c2 = fit["c2"].as_f64().unwrap_or(f64::NAN);
    let r2 = fit["r_squared"].as_f64().unwrap();
    let e = &out.summary["energy"];
    let ratio = e["final"].as_f64().unwrap() / e["initial"].as_f64().unwrap();
    let tainted = out.summary["tainted"].as_bool().unwrap();
    Verdict::new(
        c2 > 0.0 && r2 >= DECAY_R_SQUARED && ratio < DECAY_ENERGY_RATIO && !tainted,
        format!("C2 = {c2:.4}, R^2 = {r2:.5} (>= {DECAY_R_SQUARED}), E(50)/E(0) = {ratio:.2e} (< {DECAY_ENERGY_RATIO:e}), tainted = {tainted}"),
    )
}

fn sweep_spread(text: &str) -> (bool, f64) {
    let dir = scratch();
    let ctx = Context::new(scenario(text), dir.path());
    let out = commands::decay(&ctx, Some(&[0.5, 1.0, 2.0]), None).unwrap();
    let sweep = &out.summary["sweep"];
    let clean = sweep["rows"].as_array().unwrap().iter().all(|r| r["tainted"] == Value::Bool(false));
    (clean, sweep["spread"].as_f64().unwrap_or(f64::NAN))
}

fn rate_uniformity() -> Verdict {
    let (clean_nl, nonlinear) = sweep_spread(DAMPED);
    let linear_text = DAMPED.replace("[damping]", "[equation]\nnonlinear = false\n[damping]");
    let (clean_l, linear) = sweep_spread(&linear_text);
    Verdict::new(
        clean_nl && clean_l && nonlinear < NONLINEAR_SPREAD && linear < LINEAR_SPREAD,
        format!(
            "nonlinear spread {:.3}% (< {}%), linear spread {:.1e}% (< {}%)",
            100.0 * nonlinear,
            100.0 * NONLINEAR_SPREAD,
            100.0 * linear,
            100.0 * LINEAR_SPREAD
        ),
    )
}

fn gcc(text: &str) -> Value {
    let dir = scratch();
    let ctx = Context::new(scenario(text), dir.path());
    commands::geodesics(&ctx, None).unwrap().summary["gcc"].clone()
}

fn geodesic_escape() -> Verdict {
    let base = r#"
schema_version = 1
seed = 5
[grid]
r_in = 1.0
r_out = 10.0
j = 100
[time]
dt = 0.01
t_final = 1.0
[initial]
kind = "zero"
"#;
    let flat = gcc(&format!(
        "{base}[metric]\nfamily = \"flat\"\n[geodesics]\nregion = \"ball\"\ncenter = [0.0, 0.0, 0.0]\nradius = 2.0\nx0 = [0.0, 0.0, 0.0]\ncount = 500\nt_budget = 20.0\ndelta = 1.0\n"
    ));
    let e21 = gcc(&format!(
        "{base}[metric]\nfamily = \"example21\"\nm = 2.0\nd1 = 0.5\n[geodesics]\nregion = \"shell\"\ncenter = [0.0, 0.0, 0.0]\ninner = 1.0\nradius = 3.0\nx0 = [2.0, 0.0, 0.0]\ncount = 500\nt_budget = 40.0\n"
    ));
    let f = |v: &Value, k: &str| v[k].as_f64().unwrap();
    let flat_max = f(&flat, "max_exit_time");
    let e21_max = f(&e21, "max_exit_time");
    let flat_ok = flat["all_exit"] == Value::Bool(true)
        && flat["ic_count"] == 500
        && (4.0 - FLAT_EXIT_LOW..=4.0 + FLAT_EXIT_HIGH).contains(&flat_max);
    let e21_ok = e21["all_exit"] == Value::Bool(true) && e21_max <= f(&e21, "bound") + EXIT_SLACK;
    Verdict::new(
        flat_ok && e21_ok,
        format!(
            "flat: max exit {flat_max:.9} in [4 - {FLAT_EXIT_LOW:e}, 4 + {FLAT_EXIT_HIGH:e}]; example21: max exit {e21_max:.4} <= bound {:.4}",
            f(&e21, "bound")
        ),
    )
}

fn trapping() -> Verdict {
    let r2 = 2.0;
    let field = MetricField::TrappedSphere { n: 3, r2 };
    let start = GeodesicState::new(vec![r2, 0.0, 0.0], vec![0.0, 1.0, 0.0]).normalized(&field).unwrap();
    let region = Region::Ball { center: vec![0.0; 3], radius: 100.0 };
    let trace = trace_until_exit(&field, &region, &start, 10.0, 1e-3, true).unwrap();
    let radius = |x: &[f64]| x.iter().map(|c| c * c).sum::<f64>().sqrt();
    let worst = trace.path.iter().map(|s| (radius(&s.x) - r2).abs()).fold(0.0, f64::max);
    let t_end = trace.path.last().unwrap().t;
    Verdict::new(
        trace.exit_time.is_none() && (t_end - 10.0).abs() < 1e-9 && worst < TRAP_DEVIATION,
        format!("max |r - r2| = {worst:.2e} (< {TRAP_DEVIATION:e}) over [0, {t_end}]"),
    )
}

fn multiplier_identities() -> Verdict {
    let mut passed = true;
    let mut parts = Vec::new();
    for (label, checks) in [
        ("radial-unit", "multiplier = \"radial-unit\""),
        ("cutoff", "multiplier = \"cutoff\"\ncutoff_r0 = 9.0\ncutoff_eps0 = 3.0"),
    ] {
        let dir = scratch();
        let ctx = Context::new(scenario(&identity_scenario(checks)), dir.path());
        let out = commands::identity_check(&ctx, None, None).unwrap();
        let ratios: Vec<f64> =
            out.summary["residual_ratios"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
        passed &= ratios.len() == 2 && ratios.iter().all(|r| *r >= IDENTITY_RATIO);
        parts.push(format!("{label} ratios {:.2} {:.2}", ratios[0], ratios[1]));
    }
    Verdict::new(passed, format!("{} (>= {IDENTITY_RATIO})", parts.join(", ")))
}

fn assumption_checkers() -> Verdict {
    let n = 3;
    let samples = ShellSampler::new(n, 1.0, 6.0).with_density(16, 16).points().unwrap();
    let mut passed = true;
    let mut parts = Vec::new();
    for m in [0.5, 1.0, 2.0, 3.0] {
        let f = MetricField::Example21 { n, m, d1: 0.5 };
        let fit = metric_determinant_fit(&f, &samples).unwrap();
        let rep = check_assumption_a(&f, &samples, |_| 0.0, &DampingProfile::none()).unwrap();
        let env = rep.alpha_max.unwrap();
        let alpha = 1.0 + m / 2.0;
        let alpha_err = (env.min - alpha).abs().max((env.max - alpha).abs());
        let d_err = (fit.d - m * (n as f64 - 1.0)).abs();
        passed &= (fit.c0 - 1.0).abs() < 1e-9
            && d_err < 1e-9
            && fit.max_residual < DET_FIT_TOLERANCE
            && alpha_err < ALPHA_TOLERANCE;
        parts.push(format!("m={m}: d err {d_err:.0e}, log-res {:.0e}, alpha err {alpha_err:.0e}", fit.max_residual));
    }

    // d = 2k for the radial power family: k = -3 breaks d >= 2(1-n) = -4;
    // k = -1.5 satisfies it but breaks d >= 2(n-1)(delta-1) = -2 at delta = 1/2.
    let flagged_a = |k: f64| {
        let f = MetricField::RadialPower { n, k };
        let rep = check_assumption_a(&f, &samples, |_| 0.0, &DampingProfile::none()).unwrap();
        rep.violations().contains(&"remark-d-lower-bound")
    };
    let damping = DampingProfile::smoothstep(1.0, 4.0, 1.0);
    let flagged_c = |k: f64| {
        let f = MetricField::RadialPower { n, k };
        let params = DampedCheck { delta: 0.5, r0: 4.0, eps0: 1.0, eps1: None, r_in: 1.0 };
        let rep = check_assumption_c(&f, &damping, &samples, &params).unwrap();
        let b = rep.remark_bound.unwrap();
        assert!((b.bound + 2.0).abs() < 1e-12);
        rep.violations().contains(&"remark-d-lower-bound")
    };
    let remarks = [flagged_a(-3.0), !flagged_a(-1.5), !flagged_a(0.0), flagged_c(-1.5), !flagged_c(0.0)];
    passed &= remarks.iter().all(|x| *x);
    parts.push(format!("remark bounds flag the violators: {}", remarks.iter().all(|x| *x)));
    Verdict::new(passed, parts.join("; "))
}

fn observability() -> Verdict {
    let s = scenario(DAMPED);
    let g = s.build_grid().unwrap();
    let mut cfg = s.solver_config();
    cfg.t_final = 40.0;
    let out = run_simulation(&g, &cfg, make_initial_data(&s.initial_data(), &g).unwrap()).unwrap();
    let r20 = observability_ratio(&out.series, 20.0).unwrap().ratio;
    let r40 = observability_ratio(&out.series, 40.0).unwrap().ratio;
    let variation = (r40 - r20).abs() / r20;
    Verdict::new(
        r20.is_finite() && r40.is_finite() && variation < OBSERVABILITY_VARIATION,
        format!(
            "ratio {r20:.4} at T=20, {r40:.4} at T=40, variation {:.2}% (< {}%)",
            100.0 * variation,
            100.0 * OBSERVABILITY_VARIATION
        ),
    )
}

fn files_of(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
        })
        .collect();
    out.sort();
    out
}

fn determinism() -> Verdict {
    let text =
        DAMPED.replace("t_final = 50.0", "t_final = 5.0").replace("[grid]", "[outputs]\nsnapshots = [2.5]\n[grid]");
    let run = || {
        let dir = scratch();
        let ctx = Context::new(scenario(&text), dir.path());
        commands::simulate(&ctx, None).unwrap();
        commands::decay(&ctx, Some(&[0.5, 1.0]), None).unwrap();
        files_of(dir.path())
    };
    let (a, b) = (run(), run());
    let same = a == b && a.len() >= 6;
    Verdict::new(same, format!("{} files compared, byte-identical = {}", a.len(), a == b))
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("mass conservation", mass_conservation),
        ("mass dissipation identity", mass_dissipation),
        ("energy dissipation identity", energy_dissipation),
        ("Morawetz boundedness", morawetz_boundedness),
        ("exponential decay", exponential_decay),
        ("rate uniformity", rate_uniformity),
        ("geodesic escape", geodesic_escape),
        ("trapping", trapping),
        ("multiplier identities", multiplier_identities),
        ("assumption checkers", assumption_checkers),
        ("observability ratio", observability),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let v = check();
        if !v.passed {
            failures += 1;
        }
        println!("{} criterion {:>2} {name}: {}", if v.passed { "PASS" } else { "FAIL" }, i + 1, v.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
