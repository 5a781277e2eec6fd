//! JSON views of core results. Keys are sorted (serde_json's default map),
//! and nothing time- or path-dependent is included, so identical runs give
//! identical bytes.

use morawetz_core::assumptions::{AssumptionReport, BoundaryReport, Condition, Witness};
use morawetz_core::decay::{DecayFit, MorawetzTable, SweepRow, UniformityTable};
use morawetz_core::functionals::{MorawetzIntegrals, ObservabilityRatio};
use morawetz_core::geodesics::GccReport;
use morawetz_core::metric::DetFit;
use morawetz_core::multiplier::{IdentityReport, MultiplierReport};
use serde_json::{json, Value};

fn witness(w: &Option<Witness>) -> Value {
    match w {
        Some(w) => json!({ "point": w.point, "margin": w.margin }),
        None => Value::Null,
    }
}

fn condition(c: &Condition) -> Value {
    json!({ "name": c.name, "verdict": c.verdict.as_str(), "worst": witness(&c.worst) })
}

pub fn det_fit(f: &DetFit) -> Value {
    json!({ "c0": f.c0, "d": f.d, "max_log_residual": f.max_residual })
}

pub fn assumption(r: &AssumptionReport) -> Value {
    json!({
        "assumption": r.id.as_str(),
        "verdict": r.verdict.as_str(),
        "violations": r.violations(),
        "witness": witness(&r.witness),
        "fit": r.fit.as_ref().map(det_fit),
        "alpha_max": r.alpha_max.as_ref().map(|e| json!({ "min": e.min, "max": e.max, "argmin": e.argmin })),
        "delta_max": r.delta_max,
        "remark_bound": r.remark_bound.map(|b| json!({ "d": b.d, "bound": b.bound, "holds": b.holds })),
        "coverage": r.coverage.as_ref().map(|c| json!({
            "verdict": c.verdict.as_str(),
            "effective_a0": c.effective_a0,
            "witness": c.witness,
            "samples": c.samples,
        })),
        "c_epsilon": r.c_epsilon.iter().map(|c| json!({
            "epsilon": c.epsilon,
            "c_epsilon": c.c_epsilon,
            "hard_violations": c.hard_violations.len(),
        })).collect::<Vec<_>>(),
        "conditions": r.conditions.iter().map(condition).collect::<Vec<_>>(),
    })
}

pub fn boundary(b: &BoundaryReport) -> Value {
    json!({ "verdict": b.verdict.as_str(), "max_dr_dnu": b.max_value, "witness": b.witness })
}

pub fn gcc(r: &GccReport) -> Value {
    json!({
        "ic_count": r.ic_count,
        "all_exit": r.all_exit(),
        "max_exit_time": r.max_exit_time,
        "bound": r.bound,
        "max_speed_drift": r.max_speed_drift,
        "non_exiting": r.non_exiting.iter().map(|n| json!({ "id": n.id, "final_position": n.final_position })).collect::<Vec<_>>(),
    })
}

pub fn fit(f: &DecayFit) -> Value {
    json!({
        "window": [f.t1, f.t2],
        "c2": f.c2,
        "c1": f.c1,
        "slope": f.slope,
        "r_squared": f.r_squared,
        "monotone": f.monotone,
        "points": f.points,
        "verdict": f.verdict(),
    })
}

pub fn sweep_row(r: &SweepRow) -> Value {
    json!({
        "amplitude": r.amplitude,
        "fit": r.fit.as_ref().map(fit),
        "error": r.error,
        "tainted": r.tainted,
        "final_energy_ratio": r.normalized.last(),
        "mass_ratio": r.mass_ratio,
    })
}

pub fn uniformity(t: &UniformityTable) -> Value {
    json!({
        "rows": t.rows.iter().map(sweep_row).collect::<Vec<_>>(),
        "spread": t.spread,
        "max_normalized_difference": t.max_normalized_difference,
    })
}

pub fn morawetz_integrals(i: &MorawetzIntegrals) -> Value {
    json!({ "i1": i.i1, "i2": i.i2, "i3": i.i3 })
}

pub fn morawetz_table(t: &MorawetzTable) -> Value {
    let names = ["i1", "i2", "i3"];
    json!({
        "d": t.d,
        "covered": names.iter().zip(t.covered).filter(|(_, c)| *c).map(|(n, _)| *n).collect::<Vec<_>>(),
        "not_covered": names.iter().zip(t.covered).filter(|(_, c)| !*c).map(|(n, _)| *n).collect::<Vec<_>>(),
        "rows": t.rows.iter().map(|r| json!({
            "horizon": r.horizon,
            "i1_over_e0": r.ratios[0],
            "i2_over_e0": r.ratios[1],
            "i3_over_e0": r.ratios[2],
            "max_outer_boundary_mass": r.max_outer_boundary_mass,
        })).collect::<Vec<_>>(),
        "growth": { "i1": t.growth[0], "i2": t.growth[1], "i3": t.growth[2] },
        "flagged": t.flagged,
        "max_outer_boundary_mass": t.max_outer_boundary_mass(),
    })
}

pub fn observability(o: &ObservabilityRatio) -> Value {
    json!({
        "numerator": o.numerator,
        "denominator": o.denominator,
        "ratio": o.ratio,
        "ratio_with_lower_order": o.ratio_with_lower_order,
    })
}

fn identity(r: &IdentityReport) -> Value {
    json!({
        "lhs": { "name": r.lhs.name, "value": r.lhs.value },
        "terms": r.terms.iter().map(|t| json!({ "name": t.name, "value": t.value })).collect::<Vec<_>>(),
        "absolute": r.absolute,
        "residual": r.residual,
    })
}

pub fn multiplier(r: &MultiplierReport) -> Value {
    json!({ "vector": identity(&r.vector), "scalar": identity(&r.scalar), "residual": r.residual() })
}
