//! Unit-speed geodesics of `(R^n, g)`: RK4 on `x'' + Gamma(x', x') = 0`,
//! exit times from bounded regions, and the escape-time bound
//! `(2/delta) sup |x - x0|_g`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::metric::{christoffel, eval_metric, inner, Metric, MetricTag};
use crate::util::{norm, sphere_directions};

/// Default integration step.
pub const DEFAULT_STEP: f64 = 1e-3;
/// Width of the bracketing interval when locating an exit crossing.
pub const EXIT_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicState {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub t: f64,
}

impl GeodesicState {
    pub fn new(x: Vec<f64>, v: Vec<f64>) -> Self {
        Self { x, v, t: 0.0 }
    }

    /// `|v|_g` at the current position.
    pub fn speed<M: Metric + ?Sized>(&self, field: &M) -> Result<f64> {
        let g = eval_metric(field, &self.x)?;
        Ok(libm::sqrt(inner(&g, &self.v, &self.v)))
    }

    /// Rescales `v` to unit `g`-length.
    pub fn normalized<M: Metric + ?Sized>(mut self, field: &M) -> Result<Self> {
        let s = self.speed(field)?;
        if !(s > 0.0) {
            return Err(Error::Domain("geodesic velocity must be nonzero".into()));
        }
        self.v.iter_mut().for_each(|c| *c /= s);
        Ok(self)
    }
}

fn acceleration<M: Metric + ?Sized>(field: &M, x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    let n = x.len();
    if field.tag() == MetricTag::Flat {
        return Ok(vec![0.0; n]);
    }
    let gamma = christoffel(field, x)?;
    Ok((0..n)
        .map(|k| {
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    acc += gamma[k * n * n + i * n + j] * v[i] * v[j];
                }
            }
            -acc
        })
        .collect())
}

fn axpy(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(p, q)| p + s * q).collect()
}

/// One classical RK4 step of size `h`.
pub fn geodesic_step<M: Metric + ?Sized>(field: &M, state: &GeodesicState, h: f64) -> Result<GeodesicState> {
    if !(h > 0.0) {
        return Err(Error::Config(format!("geodesic step must be positive, got {h}")));
    }
    let (x, v) = (&state.x, &state.v);
    let k1x = v.clone();
    let k1v = acceleration(field, x, v)?;
    let x2 = axpy(x, 0.5 * h, &k1x);
    let k2x = axpy(v, 0.5 * h, &k1v);
    let k2v = acceleration(field, &x2, &k2x)?;
    let x3 = axpy(x, 0.5 * h, &k2x);
    let k3x = axpy(v, 0.5 * h, &k2v);
    let k3v = acceleration(field, &x3, &k3x)?;
    let x4 = axpy(x, h, &k3x);
    let k4x = axpy(v, h, &k3v);
    let k4v = acceleration(field, &x4, &k4x)?;
    let comb = |a: &[f64], k1: &[f64], k2: &[f64], k3: &[f64], k4: &[f64]| -> Vec<f64> {
        (0..a.len()).map(|i| a[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect()
    };
    Ok(GeodesicState { x: comb(x, &k1x, &k2x, &k3x, &k4x), v: comb(v, &k1v, &k2v, &k3v, &k4v), t: state.t + h })
}

/// Bounded region in which geodesics are traced.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    Ball { center: Vec<f64>, radius: f64 },
    Shell { center: Vec<f64>, inner: f64, outer: f64 },
}

impl Region {
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Region::Ball { center, radius } => dist(x, center) < *radius,
            Region::Shell { center, inner, outer } => {
                let d = dist(x, center);
                d > *inner && d < *outer
            }
        }
    }

    pub fn center(&self) -> &[f64] {
        match self {
            Region::Ball { center, .. } | Region::Shell { center, .. } => center,
        }
    }

    pub fn outer_radius(&self) -> f64 {
        match self {
            Region::Ball { radius, .. } => *radius,
            Region::Shell { outer, .. } => *outer,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            Region::Ball { radius, .. } => *radius > 0.0,
            Region::Shell { inner, outer, .. } => *inner >= 0.0 && outer > inner,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid geodesic region {self:?}")))
        }
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    libm::sqrt(a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    /// Time of the first crossing out of the region, if any before `t_max`.
    pub exit_time: Option<f64>,
    pub final_state: GeodesicState,
    /// Every accepted state (only when recording).
    pub path: Vec<GeodesicState>,
    /// `max | |v|_g - 1 |` over accepted steps.
    pub speed_drift: f64,
}

/// Integrates from `initial` until the position leaves `region` or `t_max`
/// is reached. The crossing is located by bisecting the last step.
pub fn trace_until_exit<M: Metric + ?Sized>(
    field: &M,
    region: &Region,
    initial: &GeodesicState,
    t_max: f64,
    h: f64,
    record: bool,
) -> Result<Trace> {
    if !region.contains(&initial.x) {
        return Err(Error::Domain(format!("initial position {:?} lies outside the region", initial.x)));
    }
    if !(t_max > 0.0) {
        return Err(Error::Config(format!("t_max must be positive, got {t_max}")));
    }
    let speed0 = initial.speed(field)?;
    let mut drift: f64 = 0.0;
    let mut path = if record { vec![initial.clone()] } else { Vec::new() };
    let mut state = initial.clone();
    let t_end = initial.t + t_max;
    while state.t < t_end - 1e-12 {
        let step = h.min(t_end - state.t);
        let next = geodesic_step(field, &state, step)?;
        if !region.contains(&next.x) {
            let (mut lo, mut hi) = (0.0, step);
            let mut out = next;
            while hi - lo > EXIT_TOLERANCE {
                let mid = 0.5 * (lo + hi);
                let trial = geodesic_step(field, &state, mid)?;
                if region.contains(&trial.x) {
                    lo = mid;
                } else {
                    hi = mid;
                    out = trial;
                }
            }
            if record {
                path.push(out.clone());
            }
            return Ok(Trace { exit_time: Some(out.t - initial.t), final_state: out, path, speed_drift: drift });
        }
        drift = drift.max((next.speed(field)? - speed0).abs());
        if record {
            path.push(next.clone());
        }
        state = next;
    }
    Ok(Trace { exit_time: None, final_state: state, path, speed_drift: drift })
}

/// Random direction, unit in `G(x)`.
fn random_unit<M: Metric + ?Sized, R: Rng>(field: &M, x: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    let g = eval_metric(field, x)?;
    loop {
        let v: Vec<f64> = (0..x.len()).map(|_| StandardNormal.sample(rng)).collect();
        let len = libm::sqrt(inner(&g, &v, &v));
        if len > 1e-12 {
            return Ok(v.into_iter().map(|c| c / len).collect());
        }
    }
}

/// `count` initial conditions in `region`: first boundary probes just inside
/// the outer sphere aimed through `x0` (the longest chords of a flat ball),
/// then uniformly random positions with `g`-uniform random directions.
pub fn sample_initial_conditions<M: Metric + ?Sized>(
    field: &M,
    region: &Region,
    x0: &[f64],
    count: usize,
    seed: u64,
) -> Result<Vec<GeodesicState>> {
    region.validate()?;
    let n = field.dim();
    let center = region.center();
    let outer = region.outer_radius();
    let mut out = Vec::with_capacity(count);
    let probes = (count / 10).min(4 * n);
    for d in sphere_directions(n, probes, seed) {
        let x: Vec<f64> = center.iter().zip(&d).map(|(c, u)| c + outer * (1.0 - 1e-9) * u).collect();
        if !region.contains(&x) {
            continue;
        }
        let aim: Vec<f64> = x0.iter().zip(&x).map(|(a, b)| a - b).collect();
        if norm(&aim) < 1e-12 {
            continue;
        }
        out.push(GeodesicState::new(x, aim).normalized(field)?);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while out.len() < count {
        let p: Vec<f64> = (0..n).map(|_| rng.random_range(-outer..outer)).collect();
        let x: Vec<f64> = center.iter().zip(&p).map(|(c, q)| c + q).collect();
        if !region.contains(&x) {
            continue;
        }
        let v = random_unit(field, &x, &mut rng)?;
        out.push(GeodesicState::new(x, v));
    }
    Ok(out)
}

/// `(2/delta) sup |x - x0|_g` over `points`.
pub fn escape_bound<M: Metric + ?Sized>(field: &M, delta: f64, x0: &[f64], points: &[Vec<f64>]) -> Result<f64> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Config(format!("delta must lie in (0, 1], got {delta}")));
    }
    let mut sup: f64 = 0.0;
    for x in points {
        let g = eval_metric(field, x)?;
        let h: Vec<f64> = x.iter().zip(x0).map(|(a, b)| a - b).collect();
        sup = sup.max(libm::sqrt(inner(&g, &h, &h)));
    }
    Ok(2.0 / delta * sup)
}

/// Sample points covering the closure of `region`: its outer sphere plus
/// the given interior points.
pub fn closure_samples(region: &Region, interior: &[Vec<f64>], directions: usize, seed: u64) -> Vec<Vec<f64>> {
    let center = region.center();
    let mut pts: Vec<Vec<f64>> = interior.to_vec();
    for d in sphere_directions(center.len(), directions, seed) {
        pts.push(center.iter().zip(&d).map(|(c, u)| c + region.outer_radius() * u).collect());
    }
    if let Region::Shell { inner, .. } = region {
        if *inner > 0.0 {
            for d in sphere_directions(center.len(), directions, seed) {
                pts.push(center.iter().zip(&d).map(|(c, u)| c + inner * u).collect());
            }
        }
    }
    pts
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonExit {
    pub id: usize,
    pub final_position: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GccReport {
    pub ic_count: usize,
    pub max_exit_time: f64,
    pub bound: f64,
    pub non_exiting: Vec<NonExit>,
    pub max_speed_drift: f64,
}

impl GccReport {
    /// Summarizes independently computed traces.
    pub fn from_traces(bound: f64, traces: &[Trace]) -> Self {
        let mut max_exit: f64 = 0.0;
        let mut drift: f64 = 0.0;
        let mut non_exiting = Vec::new();
        for (id, t) in traces.iter().enumerate() {
            drift = drift.max(t.speed_drift);
            match t.exit_time {
                Some(e) => max_exit = max_exit.max(e),
                None => non_exiting.push(NonExit { id, final_position: t.final_state.x.clone() }),
            }
        }
        GccReport { ic_count: traces.len(), max_exit_time: max_exit, bound, non_exiting, max_speed_drift: drift }
    }

    pub fn all_exit(&self) -> bool {
        self.non_exiting.is_empty()
    }
}

/// Bound for [`check_gcc`], with the budget validated against it.
pub fn gcc_bound<M: Metric + ?Sized>(
    field: &M,
    region: &Region,
    delta: f64,
    x0: &[f64],
    ics: &[GeodesicState],
    t_budget: f64,
    seed: u64,
) -> Result<f64> {
    let positions: Vec<Vec<f64>> = ics.iter().map(|s| s.x.clone()).collect();
    let pts = closure_samples(region, &positions, 256, seed);
    let bound = escape_bound(field, delta, x0, &pts)?;
    if t_budget < bound {
        return Err(Error::Config(format!(
            "time budget {t_budget} is below the escape bound {bound}; the check would be vacuous"
        )));
    }
    Ok(bound)
}

/// Traces every initial condition for at most `t_budget` and compares the
/// longest exit time with the escape bound.
#[allow(clippy::too_many_arguments)]
pub fn check_gcc<M: Metric + ?Sized>(
    field: &M,
    region: &Region,
    delta: f64,
    x0: &[f64],
    ics: &[GeodesicState],
    t_budget: f64,
    h: f64,
    seed: u64,
) -> Result<GccReport> {
    let bound = gcc_bound(field, region, delta, x0, ics, t_budget, seed)?;
    let traces =
        ics.iter().map(|ic| trace_until_exit(field, region, ic, t_budget, h, false)).collect::<Result<Vec<_>>>()?;
    Ok(GccReport::from_traces(bound, &traces))
}
