//! Sampled verification of the geometric and damping hypotheses.
//!
//! Matrix inequalities are evaluated as generalized eigenvalue problems
//! against `G(x)`, so every margin is measured in `g`-normalized units: a
//! margin of `-0.5` means `<M X, X> = -0.5 |X|_g^2` for the worst `X`.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::damping::{damping_laplacian, DampingProfile};
use crate::error::{Error, Result};
use crate::linalg::{complement_basis, min_generalized_eigen};
use crate::metric::{eval_metric, inner, metric_determinant_fit, DetFit, Metric};
use crate::util::{linspace, norm, sphere_directions};

/// Residual tolerance for the determinant power-law fit.
pub const DET_FIT_TOLERANCE: f64 = 1e-9;
/// Tolerance for `G x/|x| = x/|x|`.
pub const RADIAL_EIGENVECTOR_TOLERANCE: f64 = 1e-12;
/// The `epsilon` grid used for the empirical `C_eps` table.
pub const EPSILON_GRID: [f64; 3] = [1e-1, 1e-2, 1e-3];

/// Round-off allowance for "`>= 0`" at a point with metric `g`.
pub fn psd_tolerance(g: &DMatrix<f64>) -> f64 {
    1e-10 * (1.0 + g.norm())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssumptionId {
    A,
    B,
    C,
    Appendix,
}

impl AssumptionId {
    pub fn as_str(&self) -> &'static str {
        match self {
            AssumptionId::A => "A",
            AssumptionId::B => "B",
            AssumptionId::C => "C",
            AssumptionId::Appendix => "appendix",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Verdict {
    Fails,
    Holds,
    HoldsWithMargin,
}

impl Verdict {
    pub fn passed(&self) -> bool {
        *self != Verdict::Fails
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Fails => "fails",
            Verdict::Holds => "holds",
            Verdict::HoldsWithMargin => "holds-with-margin",
        }
    }

    /// Classify a margin against its tolerance.
    pub fn from_margin(margin: f64, tol: f64) -> Self {
        if margin < -tol || margin.is_nan() {
            Verdict::Fails
        } else if margin > tol {
            Verdict::HoldsWithMargin
        } else {
            Verdict::Holds
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub point: Vec<f64>,
    pub margin: f64,
}

/// One checked sub-condition, e.g. the tangent inequality.
#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    /// Short machine-readable name, e.g. `"tangent-inequality"`.
    pub name: String,
    pub verdict: Verdict,
    /// Sample with the smallest margin.
    pub worst: Option<Witness>,
}

impl Condition {
    fn from_tracker(name: &str, t: WorstTracker) -> Self {
        let verdict = match &t.worst {
            None => Verdict::Holds,
            Some(_) if t.failed => Verdict::Fails,
            Some(_) if t.all_strict => Verdict::HoldsWithMargin,
            Some(_) => Verdict::Holds,
        };
        Condition { name: name.to_string(), verdict, worst: t.worst }
    }

    fn scalar(name: &str, margin: f64, tol: f64, point: Vec<f64>) -> Self {
        Condition {
            name: name.to_string(),
            verdict: Verdict::from_margin(margin, tol),
            worst: Some(Witness { point, margin }),
        }
    }
}

/// Running minimum of pointwise margins.
#[derive(Debug, Clone)]
struct WorstTracker {
    worst: Option<Witness>,
    failed: bool,
    all_strict: bool,
}

impl WorstTracker {
    fn new() -> Self {
        Self { worst: None, failed: false, all_strict: true }
    }

    fn push(&mut self, x: &[f64], margin: f64, tol: f64) {
        match Verdict::from_margin(margin, tol) {
            Verdict::Fails => self.failed = true,
            Verdict::Holds => self.all_strict = false,
            Verdict::HoldsWithMargin => {}
        }
        if self.worst.as_ref().is_none_or(|w| margin < w.margin || margin.is_nan()) {
            self.worst = Some(Witness { point: x.to_vec(), margin });
        }
    }
}

/// Pointwise envelope `[min, max]` of a sampled scalar with the argmin.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    pub min: f64,
    pub max: f64,
    pub argmin: Vec<f64>,
}

impl Envelope {
    fn push(env: &mut Option<Envelope>, x: &[f64], v: f64) {
        match env {
            None => *env = Some(Envelope { min: v, max: v, argmin: x.to_vec() }),
            Some(e) => {
                if v < e.min {
                    e.min = v;
                    e.argmin = x.to_vec();
                }
                e.max = e.max.max(v);
            }
        }
    }
}

/// A lower bound on the fitted exponent `d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RemarkBound {
    pub d: f64,
    pub bound: f64,
    pub holds: bool,
}

impl RemarkBound {
    fn new(d: f64, bound: f64) -> Self {
        Self { d, bound, holds: d >= bound - DET_FIT_TOLERANCE }
    }
}

/// Damping coverage of the region where `a >= a0 > 0` is required.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageReport {
    pub verdict: Verdict,
    /// `min a` over the covered samples; the largest admissible `a0`.
    pub effective_a0: f64,
    pub witness: Option<Vec<f64>>,
    pub samples: usize,
}

/// Empirical constant in `|Delta_g a| <= C_eps a + eps`.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonConstant {
    pub epsilon: f64,
    pub c_epsilon: f64,
    /// Samples where `a = 0` yet `|Delta_g a| > eps`.
    pub hard_violations: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    pub id: AssumptionId,
    pub verdict: Verdict,
    /// Worst-margin sample of the main matrix inequality.
    pub witness: Option<Witness>,
    pub fit: Option<DetFit>,
    /// Pointwise largest admissible `alpha(x)` (Assumption A).
    pub alpha_max: Option<Envelope>,
    /// Largest `delta` for which the full-vector inequality holds on every
    /// sample (B, C, appendix).
    pub delta_max: Option<f64>,
    pub remark_bound: Option<RemarkBound>,
    pub coverage: Option<CoverageReport>,
    pub c_epsilon: Vec<EpsilonConstant>,
    pub conditions: Vec<Condition>,
}

impl AssumptionReport {
    fn new(id: AssumptionId) -> Self {
        Self {
            id,
            verdict: Verdict::HoldsWithMargin,
            witness: None,
            fit: None,
            alpha_max: None,
            delta_max: None,
            remark_bound: None,
            coverage: None,
            c_epsilon: Vec::new(),
            conditions: Vec::new(),
        }
    }

    fn finish(mut self) -> Self {
        self.verdict = self.conditions.iter().map(|c| c.verdict).min().unwrap_or(Verdict::Holds);
        self
    }

    /// Names of the sub-conditions that failed.
    pub fn violations(&self) -> Vec<&str> {
        self.conditions.iter().filter(|c| c.verdict == Verdict::Fails).map(|c| c.name.as_str()).collect()
    }

    pub fn condition(&self, name: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.name == name)
    }
}

/// Tensor-product sampler over an annulus `r_min <= |x| <= r_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShellSampler {
    pub n: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub radii: usize,
    pub directions: usize,
    pub seed: u64,
}

impl ShellSampler {
    pub fn new(n: usize, r_min: f64, r_max: f64) -> Self {
        Self { n, r_min, r_max, radii: 64, directions: 128, seed: 0 }
    }

    pub fn with_density(mut self, radii: usize, directions: usize) -> Self {
        self.radii = radii;
        self.directions = directions;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn points(&self) -> Result<Vec<Vec<f64>>> {
        if !(self.r_min > 0.0) || !(self.r_max >= self.r_min) {
            return Err(Error::Domain(format!(
                "sampler radii must satisfy 0 < r_min <= r_max, got [{}, {}]",
                self.r_min, self.r_max
            )));
        }
        let dirs = sphere_directions(self.n, self.directions, self.seed);
        let mut out = Vec::with_capacity(self.radii * dirs.len());
        for r in linspace(self.r_min, self.r_max, self.radii) {
            for d in &dirs {
                out.push(d.iter().map(|c| c * r).collect());
            }
        }
        Ok(out)
    }
}

fn require_positive_radius(x: &[f64]) -> Result<f64> {
    let r = norm(x);
    if !(r > 0.0) {
        return Err(Error::Domain("sample point at the origin".to_string()));
    }
    Ok(r)
}

/// `|G x/|x| - x/|x||_inf`.
fn radial_eigen_residual(g: &DMatrix<f64>, x: &[f64]) -> f64 {
    let r = norm(x);
    let u = DVector::from_iterator(x.len(), x.iter().map(|c| c / r));
    (g * &u - &u).amax()
}

fn half_r_dgdr<M: Metric + ?Sized>(field: &M, x: &[f64], r: f64) -> DMatrix<f64> {
    let d = field.radial_derivative(x);
    (&d + d.transpose()) * (0.25 * r)
}

/// `1 + min over unit-g tangent X of <(r/2) dG/dr X, X>`: the largest
/// `alpha` allowed at `x` by the tangent inequality.
pub fn alpha_max_at<M: Metric + ?Sized>(field: &M, x: &[f64]) -> Result<f64> {
    let r = require_positive_radius(x)?;
    let g = eval_metric(field, x)?;
    let u = DVector::from_iterator(x.len(), x.iter().map(|c| c / r));
    // tangent vectors are g-orthogonal to the radial direction: X . (G u) = 0
    let basis = complement_basis(&(&g * u));
    let m = basis.transpose() * half_r_dgdr(field, x, r) * &basis;
    let gt = basis.transpose() * &g * &basis;
    Ok(1.0 + min_generalized_eigen(&m, &gt)?.0)
}

/// `1 + min over unit-g X in R^n of <(r/2) dG/dr X, X>`, unclipped; the
/// full-vector inequality at level `delta` holds iff `delta` does not exceed it.
pub fn delta_bound_at<M: Metric + ?Sized>(field: &M, x: &[f64]) -> Result<f64> {
    let r = require_positive_radius(x)?;
    let g = eval_metric(field, x)?;
    Ok(1.0 + min_generalized_eigen(&half_r_dgdr(field, x, r), &g)?.0)
}

fn det_fit_condition(report: &mut AssumptionReport, fit: &DetFit) {
    let c = Condition {
        name: "det-power-law".to_string(),
        verdict: if fit.max_residual <= DET_FIT_TOLERANCE { Verdict::Holds } else { Verdict::Fails },
        worst: None,
    };
    report.conditions.push(c);
    report.fit = Some(*fit);
}

fn radial_eigen_condition<M: Metric + ?Sized>(field: &M, samples: &[&Vec<f64>]) -> Result<Condition> {
    let mut t = WorstTracker::new();
    for x in samples {
        let g = eval_metric(field, x)?;
        let res = radial_eigen_residual(&g, x);
        t.push(x, -res, RADIAL_EIGENVECTOR_TOLERANCE * (1.0 + g.norm()));
    }
    let mut c = Condition::from_tracker("radial-eigenvector", t);
    if c.verdict == Verdict::HoldsWithMargin {
        c.verdict = Verdict::Holds;
    }
    Ok(c)
}

/// Assumption A on the exterior-domain `samples`: radial eigenvector, the
/// tangent inequality at `alpha(x)`, the determinant power law, the bound
/// `d >= 2(1-n)`, and `a = 0`.
pub fn check_assumption_a<M, A>(
    field: &M,
    samples: &[Vec<f64>],
    alpha: A,
    damping: &DampingProfile,
) -> Result<AssumptionReport>
where
    M: Metric + ?Sized,
    A: Fn(&[f64]) -> f64,
{
    let mut report = AssumptionReport::new(AssumptionId::A);
    let all: Vec<&Vec<f64>> = samples.iter().collect();
    for x in &all {
        require_positive_radius(x)?;
    }
    report.conditions.push(radial_eigen_condition(field, &all)?);

    let mut tangent = WorstTracker::new();
    let mut negative_alpha = WorstTracker::new();
    let mut env = None;
    for x in samples {
        let g = eval_metric(field, x)?;
        let amax = alpha_max_at(field, x)?;
        let a = alpha(x);
        tangent.push(x, amax - a, psd_tolerance(&g));
        negative_alpha.push(x, a, 0.0);
        Envelope::push(&mut env, x, amax);
    }
    report.witness = tangent.worst.clone();
    report.alpha_max = env;
    report.conditions.push(Condition::from_tracker("tangent-inequality", tangent));
    let mut alpha_cond = Condition::from_tracker("alpha-nonnegative", negative_alpha);
    if alpha_cond.verdict == Verdict::Holds {
        alpha_cond.verdict = Verdict::HoldsWithMargin;
    }
    report.conditions.push(alpha_cond);

    let fit = metric_determinant_fit(field, samples)?;
    det_fit_condition(&mut report, &fit);
    let bound = RemarkBound::new(fit.d, 2.0 * (1.0 - field.dim() as f64));
    report.conditions.push(Condition::scalar(
        "remark-d-lower-bound",
        bound.d - bound.bound,
        DET_FIT_TOLERANCE,
        Vec::new(),
    ));
    report.remark_bound = Some(bound);

    let mut zero = WorstTracker::new();
    for x in samples {
        zero.push(x, -damping.at(x), 0.0);
    }
    let mut zero_cond = Condition::from_tracker("damping-vanishes", zero);
    if zero_cond.verdict != Verdict::Fails {
        zero_cond.verdict = Verdict::Holds;
    }
    report.conditions.push(zero_cond);
    Ok(report.finish())
}

/// Parameters shared by the damping assumptions B and C.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DampedCheck {
    pub delta: f64,
    pub r0: f64,
    pub eps0: f64,
    /// Collar width around the obstacle boundary (B only).
    pub eps1: Option<f64>,
    /// Radius of the obstacle boundary `Gamma`.
    pub r_in: f64,
}

impl DampedCheck {
    fn validate(&self, needs_collar: bool) -> Result<()> {
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(Error::Config(format!("delta must lie in (0, 1], got {}", self.delta)));
        }
        if !(self.eps0 > 0.0 && self.eps0 < self.r0 - self.r_in) {
            return Err(Error::Config(format!(
                "eps0 must lie in (0, R0 - r_in) = (0, {}), got {}",
                self.r0 - self.r_in,
                self.eps0
            )));
        }
        match (needs_collar, self.eps1) {
            (true, Some(e1)) if !(e1 > 0.0 && 2.0 * e1 < self.eps0) => {
                Err(Error::Config(format!("eps1 must satisfy 0 < 2 eps1 < eps0 = {}, got {e1}", self.eps0)))
            }
            (true, None) => Err(Error::Config("assumption B needs a collar width eps1".to_string())),
            _ => Ok(()),
        }
    }
}

fn full_vector_condition<M: Metric + ?Sized>(
    field: &M,
    samples: &[&Vec<f64>],
    delta: f64,
    report: &mut AssumptionReport,
) -> Result<()> {
    let mut t = WorstTracker::new();
    let mut dmax = f64::INFINITY;
    for x in samples {
        let g = eval_metric(field, x)?;
        let bound = delta_bound_at(field, x)?;
        t.push(x, bound - delta, psd_tolerance(&g));
        dmax = dmax.min(bound);
    }
    report.witness = t.worst.clone();
    report.delta_max = Some(dmax.min(1.0));
    report.conditions.push(Condition::from_tracker("full-vector-inequality", t));
    Ok(())
}

fn coverage<M: Metric + ?Sized>(damping: &DampingProfile, covered: &[&Vec<f64>], _field: &M) -> CoverageReport {
    let mut min = f64::INFINITY;
    let mut witness = None;
    for x in covered {
        let a = damping.at(x);
        if a < min {
            min = a;
            witness = Some((*x).clone());
        }
    }
    let verdict = if covered.is_empty() || min > 0.0 { Verdict::Holds } else { Verdict::Fails };
    CoverageReport {
        verdict,
        effective_a0: if covered.is_empty() { 0.0 } else { min },
        witness,
        samples: covered.len(),
    }
}

/// Empirical `C_eps` over `samples` for each `eps` in [`EPSILON_GRID`].
pub fn epsilon_constants<M: Metric + ?Sized>(
    field: &M,
    damping: &DampingProfile,
    samples: &[Vec<f64>],
) -> Result<Vec<EpsilonConstant>> {
    let mut values = Vec::with_capacity(samples.len());
    for x in samples {
        values.push((damping.at(x), damping_laplacian(field, damping, x)?.abs()));
    }
    Ok(EPSILON_GRID
        .iter()
        .map(|&eps| {
            let mut c = 0.0_f64;
            let mut hard = Vec::new();
            for (x, &(a, lap)) in samples.iter().zip(&values) {
                if a > 0.0 {
                    c = c.max((lap - eps).max(0.0) / a);
                } else if lap > eps {
                    hard.push(x.clone());
                }
            }
            EpsilonConstant { epsilon: eps, c_epsilon: c, hard_violations: hard }
        })
        .collect())
}

fn damped_common<M: Metric + ?Sized>(
    id: AssumptionId,
    field: &M,
    damping: &DampingProfile,
    samples: &[Vec<f64>],
    params: &DampedCheck,
) -> Result<AssumptionReport> {
    params.validate(id == AssumptionId::B)?;
    for x in samples {
        require_positive_radius(x)?;
    }
    let mut report = AssumptionReport::new(id);
    let inner_region: Vec<&Vec<f64>> = samples.iter().filter(|x| norm(x) < params.r0).collect();

    if id == AssumptionId::C {
        let ball: Vec<&Vec<f64>> = samples.iter().filter(|x| norm(x) <= params.r0).collect();
        report.conditions.push(radial_eigen_condition(field, &ball)?);
        let owned: Vec<Vec<f64>> = inner_region.iter().map(|x| (*x).clone()).collect();
        let fit = metric_determinant_fit(field, &owned)?;
        det_fit_condition(&mut report, &fit);
        let bound = RemarkBound::new(fit.d, 2.0 * (field.dim() as f64 - 1.0) * (params.delta - 1.0));
        report.conditions.push(Condition::scalar(
            "remark-d-lower-bound",
            bound.d - bound.bound,
            DET_FIT_TOLERANCE,
            Vec::new(),
        ));
        report.remark_bound = Some(bound);
    }

    full_vector_condition(field, &inner_region, params.delta, &mut report)?;

    let outer_start = params.r0 - params.eps0;
    let collar = params.eps1.filter(|_| id == AssumptionId::B);
    let covered: Vec<&Vec<f64>> = samples
        .iter()
        .filter(|x| {
            let r = norm(x);
            r >= outer_start || collar.is_some_and(|e1| r - params.r_in < e1)
        })
        .collect();
    let cov = coverage(damping, &covered, field);
    report.conditions.push(Condition {
        name: "damping-coverage".to_string(),
        verdict: cov.verdict,
        worst: cov.witness.clone().map(|p| Witness { point: p, margin: cov.effective_a0 }),
    });
    report.coverage = Some(cov);

    report.c_epsilon = epsilon_constants(field, damping, samples)?;
    let hard = report.c_epsilon.iter().any(|e| !e.hard_violations.is_empty());
    report.conditions.push(Condition {
        name: "laplacian-bound".to_string(),
        verdict: if hard { Verdict::Fails } else { Verdict::Holds },
        worst: None,
    });
    Ok(report.finish())
}

/// Assumption B: full-vector inequality on `Omega(R0)`, damping coverage of
/// `{|x| >= R0 - eps0}` and of the collar `r_in <= |x| < r_in + eps1`, and the
/// empirical `C_eps` table.
pub fn check_assumption_b<M: Metric + ?Sized>(
    field: &M,
    damping: &DampingProfile,
    samples: &[Vec<f64>],
    params: &DampedCheck,
) -> Result<AssumptionReport> {
    damped_common(AssumptionId::B, field, damping, samples, params)
}

/// Assumption C: as B without the collar, plus the radial eigenvector
/// condition and determinant power law on `Omega(R0)` and the bound
/// `d >= 2(n-1)(delta-1)`.
pub fn check_assumption_c<M: Metric + ?Sized>(
    field: &M,
    damping: &DampingProfile,
    samples: &[Vec<f64>],
    params: &DampedCheck,
) -> Result<AssumptionReport> {
    damped_common(AssumptionId::C, field, damping, samples, params)
}

/// The strong geometric condition on a bounded domain sampled by `samples`.
pub fn check_appendix_condition<M: Metric + ?Sized>(
    field: &M,
    samples: &[Vec<f64>],
    delta: f64,
) -> Result<AssumptionReport> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Config(format!("delta must lie in (0, 1], got {delta}")));
    }
    for x in samples {
        require_positive_radius(x)?;
    }
    let mut report = AssumptionReport::new(AssumptionId::Appendix);
    let all: Vec<&Vec<f64>> = samples.iter().collect();
    report.conditions.push(radial_eigen_condition(field, &all)?);
    let fit = metric_determinant_fit(field, samples)?;
    det_fit_condition(&mut report, &fit);
    let bound = RemarkBound::new(fit.d, 2.0 * (field.dim() as f64 - 1.0) * (delta - 1.0));
    report.conditions.push(Condition::scalar(
        "remark-d-lower-bound",
        bound.d - bound.bound,
        DET_FIT_TOLERANCE,
        Vec::new(),
    ));
    report.remark_bound = Some(bound);
    full_vector_condition(field, &all, delta, &mut report)?;
    Ok(report.finish())
}

/// A boundary point with its unit outward normal (pointing into the obstacle).
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySample {
    pub point: Vec<f64>,
    pub normal: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryReport {
    pub verdict: Verdict,
    /// `max dr/dnu` over the samples.
    pub max_value: f64,
    pub witness: Option<Vec<f64>>,
}

/// Samples of the sphere `|x| = radius` with `nu = -grad_g r / |grad_g r|_g`.
pub fn sphere_boundary_samples<M: Metric + ?Sized>(
    field: &M,
    radius: f64,
    directions: usize,
    seed: u64,
) -> Result<Vec<BoundarySample>> {
    sphere_directions(field.dim(), directions, seed)
        .into_iter()
        .map(|d| {
            let x: Vec<f64> = d.iter().map(|c| c * radius).collect();
            let g = eval_metric(field, &x)?;
            let g_inv = g.try_inverse().ok_or_else(|| Error::Domain("metric not invertible".to_string()))?;
            let grad = g_inv * DVector::from_column_slice(&d);
            let len = libm::sqrt(grad.dot(&DVector::from_column_slice(&d)));
            let normal = grad.iter().map(|c| -c / len).collect();
            Ok(BoundarySample { point: x, normal })
        })
        .collect()
}

/// `max <grad_g r, nu>_g = max (x/|x|) . nu` over the boundary samples; the
/// condition holds when this is `<= 0` up to round-off.
pub fn check_boundary_condition<M: Metric + ?Sized>(field: &M, samples: &[BoundarySample]) -> Result<BoundaryReport> {
    let mut max_value = f64::NEG_INFINITY;
    let mut witness = None;
    for s in samples {
        let r = require_positive_radius(&s.point)?;
        let g = eval_metric(field, &s.point)?;
        let len = libm::sqrt(inner(&g, &s.normal, &s.normal));
        if (len - 1.0).abs() > 1e-8 {
            return Err(Error::Geometry {
                message: format!("boundary normal at {:?} has g-length {len}", s.point),
                eigenvalue: len,
            });
        }
        let v: f64 = s.point.iter().zip(&s.normal).map(|(a, b)| a * b / r).sum();
        if v > max_value {
            max_value = v;
            witness = Some(s.point.clone());
        }
    }
    let verdict = if samples.is_empty() { Verdict::Holds } else { Verdict::from_margin(-max_value, 1e-10) };
    Ok(BoundaryReport { verdict, max_value, witness })
}
