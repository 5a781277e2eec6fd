//! Riemannian metrics `g = sum g_ij dx_i dx_j` on `R^n \ {0}` given by their
//! matrix field `G(x)`, plus the differential-geometric quantities the
//! checkers, the solver and the geodesic tracer consume.
//!
//! Every built-in family has the split form
//!
//! ```text
//! G(x) = P(x) + phi(x) (I - P(x)),    P = x x^T / |x|^2,
//! ```
//!
//! so the radial direction is a unit eigenvector of `G` and all the
//! information sits in the scalar tangent factor `phi`. Derivatives of these
//! families are analytic; user fields fall back to central differences.

use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::min_eigenvalue;
use crate::util::{dot, norm, unit_sphere_area, Ramp};

/// Relative step for radial central differences of user fields.
pub const RADIAL_FD_STEP: f64 = 1e-4;
/// Absolute step for spatial central differences of user fields.
pub const SPATIAL_FD_STEP: f64 = 1e-5;

/// Which analytic family (if any) a field belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricTag {
    Flat,
    Example21,
    Warped,
    RadialPower,
    TrappedSphere,
    UserSampled,
}

/// A Riemannian metric field on `R^n`.
pub trait Metric {
    fn dim(&self) -> usize;

    /// `G(x)` without validation. Callers wanting checks use [`eval_metric`].
    fn tensor(&self, x: &[f64]) -> DMatrix<f64>;

    /// `dG/dr = sum_k (x_k/|x|) dG/dx_k`.
    fn radial_derivative(&self, x: &[f64]) -> DMatrix<f64> {
        let r = norm(x);
        let h = RADIAL_FD_STEP * r;
        let xp: Vec<f64> = x.iter().map(|c| c * (r + h) / r).collect();
        let xm: Vec<f64> = x.iter().map(|c| c * (r - h) / r).collect();
        (self.tensor(&xp) - self.tensor(&xm)) / (2.0 * h)
    }

    /// `dG/dx_k`.
    fn partial(&self, x: &[f64], k: usize) -> DMatrix<f64> {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[k] += SPATIAL_FD_STEP;
        xm[k] -= SPATIAL_FD_STEP;
        (self.tensor(&xp) - self.tensor(&xm)) / (2.0 * SPATIAL_FD_STEP)
    }

    /// Whether the field declares `G(x) x/|x| = x/|x|` everywhere.
    fn declares_radial_eigenvector(&self) -> bool {
        false
    }

    fn tag(&self) -> MetricTag {
        MetricTag::UserSampled
    }
}

impl<M: Metric + ?Sized> Metric for &M {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn tensor(&self, x: &[f64]) -> DMatrix<f64> {
        (**self).tensor(x)
    }
    fn radial_derivative(&self, x: &[f64]) -> DMatrix<f64> {
        (**self).radial_derivative(x)
    }
    fn partial(&self, x: &[f64], k: usize) -> DMatrix<f64> {
        (**self).partial(x, k)
    }
    fn declares_radial_eigenvector(&self) -> bool {
        (**self).declares_radial_eigenvector()
    }
    fn tag(&self) -> MetricTag {
        (**self).tag()
    }
}

/// Tangential coefficient `gamma(r, theta)` of a two-dimensional warped
/// metric `g = dr^2 + gamma(r, theta) dtheta^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WarpedProfile {
    /// `gamma = r^2`: the Euclidean plane.
    Euclidean,
    /// `gamma = c0 r^(d+2)`, so `det G = c0 r^d`.
    Power { c0: f64, d: f64 },
    /// `gamma = r^2 (1 + eps cos(mode theta))`.
    AngularBump { eps: f64, mode: u32 },
}

impl WarpedProfile {
    /// `(gamma, d gamma/dr, d gamma/dtheta)`.
    pub fn gamma(&self, r: f64, theta: f64) -> (f64, f64, f64) {
        match *self {
            WarpedProfile::Euclidean => (r * r, 2.0 * r, 0.0),
            WarpedProfile::Power { c0, d } => {
                let g = c0 * libm::pow(r, d + 2.0);
                (g, (d + 2.0) * g / r, 0.0)
            }
            WarpedProfile::AngularBump { eps, mode } => {
                let m = mode as f64;
                let bump = 1.0 + eps * libm::cos(m * theta);
                (r * r * bump, 2.0 * r * bump, -r * r * eps * m * libm::sin(m * theta))
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            WarpedProfile::Euclidean => Ok(()),
            WarpedProfile::Power { c0, .. } if c0 > 0.0 => Ok(()),
            WarpedProfile::Power { c0, .. } => {
                Err(Error::Config(format!("warped power profile needs c0 > 0, got {c0}")))
            }
            WarpedProfile::AngularBump { eps, .. } if eps.abs() < 1.0 => Ok(()),
            WarpedProfile::AngularBump { eps, .. } => {
                Err(Error::Config(format!("angular bump needs |eps| < 1 to stay positive definite, got {eps}")))
            }
        }
    }
}

/// The analytic metric families.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricField {
    /// `G = I`.
    Flat { n: usize },
    /// `G = P + f(r)(I - P)` with `f = r^m` for `r >= d1`, `f = 1` for
    /// `r < d1/2`, and a quintic smoothstep blend in between.
    Example21 { n: usize, m: f64, d1: f64 },
    /// `G = P + r^k (I - P)` for every `r > 0`; `det G = r^(k(n-1))`.
    RadialPower { n: usize, k: f64 },
    /// Sphere-trapping metric: `f = (r2/r)^2` on the collar
    /// `|r - r2| <= r2/10`, blended to `f = 1` by `|r - r2| = r2/5`. On the
    /// collar `dG/dr = -(2/r) G (I - P)`, so the sphere `r = r2` is totally
    /// geodesic.
    TrappedSphere { n: usize, r2: f64 },
    /// Two-dimensional warped product `dr^2 + gamma(r, theta) dtheta^2`.
    Warped { profile: WarpedProfile },
}

impl MetricField {
    pub fn validate(&self) -> Result<()> {
        if self.dim() < 2 {
            return Err(Error::Config(format!("metric dimension must be >= 2, got {}", self.dim())));
        }
        match *self {
            MetricField::Example21 { d1, .. } if d1 <= 0.0 => {
                Err(Error::Config(format!("example21 needs d1 > 0, got {d1}")))
            }
            MetricField::TrappedSphere { r2, .. } if r2 <= 0.0 => {
                Err(Error::Config(format!("trapped sphere needs r2 > 0, got {r2}")))
            }
            MetricField::Warped { profile } => profile.validate(),
            _ => Ok(()),
        }
    }

    /// Tangent factor `phi(x)` and its Euclidean gradient.
    fn tangent_factor(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let r = norm(x);
        let radial = |f: f64, fp: f64| (f, x.iter().map(|c| fp * c / r).collect::<Vec<f64>>());
        match *self {
            MetricField::Flat { n } => (1.0, vec![0.0; n]),
            MetricField::Example21 { m, d1, .. } => {
                let ramp = Ramp::new(0.5 * d1, d1);
                let rm = libm::pow(r, m);
                let s = ramp.value(r);
                let f = 1.0 + s * (rm - 1.0);
                let fp = ramp.d1(r) * (rm - 1.0) + s * m * rm / r;
                radial(f, fp)
            }
            MetricField::RadialPower { k, .. } => {
                let f = libm::pow(r, k);
                radial(f, k * f / r)
            }
            MetricField::TrappedSphere { r2, .. } => {
                let collar = 0.1 * r2;
                let ramp = Ramp::new(collar, 2.0 * collar);
                let dist = r - r2;
                let s = 1.0 - ramp.value(dist.abs());
                let sp = -ramp.d1(dist.abs()) * if dist >= 0.0 { 1.0 } else { -1.0 };
                let q = (r2 / r) * (r2 / r);
                let f = 1.0 + s * (q - 1.0);
                let fp = sp * (q - 1.0) + s * (-2.0 * q / r);
                radial(f, fp)
            }
            MetricField::Warped { profile } => {
                let theta = libm::atan2(x[1], x[0]);
                let (g, gr, gt) = profile.gamma(r, theta);
                let phi = g / (r * r);
                let phi_r = gr / (r * r) - 2.0 * g / (r * r * r);
                let phi_t = gt / (r * r);
                let (c, s) = (x[0] / r, x[1] / r);
                // grad = phi_r e_r + (phi_theta / r) e_theta
                let grad = vec![phi_r * c - phi_t / r * s, phi_r * s + phi_t / r * c];
                (phi, grad)
            }
        }
    }
}

fn projector(x: &[f64]) -> DMatrix<f64> {
    let n = x.len();
    let r2: f64 = dot(x, x);
    DMatrix::from_fn(n, n, |i, j| x[i] * x[j] / r2)
}

impl Metric for MetricField {
    fn dim(&self) -> usize {
        match *self {
            MetricField::Flat { n }
            | MetricField::Example21 { n, .. }
            | MetricField::RadialPower { n, .. }
            | MetricField::TrappedSphere { n, .. } => n,
            MetricField::Warped { .. } => 2,
        }
    }

    fn tensor(&self, x: &[f64]) -> DMatrix<f64> {
        let n = x.len();
        if let MetricField::Flat { .. } = self {
            return DMatrix::identity(n, n);
        }
        let p = projector(x);
        let (phi, _) = self.tangent_factor(x);
        &p + (DMatrix::identity(n, n) - &p) * phi
    }

    fn radial_derivative(&self, x: &[f64]) -> DMatrix<f64> {
        let n = x.len();
        if let MetricField::Flat { .. } = self {
            return DMatrix::zeros(n, n);
        }
        let r = norm(x);
        let (_, grad) = self.tangent_factor(x);
        let phi_r = dot(&grad, x) / r;
        (DMatrix::identity(n, n) - projector(x)) * phi_r
    }

    fn partial(&self, x: &[f64], k: usize) -> DMatrix<f64> {
        let n = x.len();
        if let MetricField::Flat { .. } = self {
            return DMatrix::zeros(n, n);
        }
        let r = norm(x);
        let u: Vec<f64> = x.iter().map(|c| c / r).collect();
        let (phi, grad) = self.tangent_factor(x);
        let dp = DMatrix::from_fn(n, n, |i, j| {
            let dik = if i == k { u[j] } else { 0.0 };
            let djk = if j == k { u[i] } else { 0.0 };
            (dik + djk - 2.0 * u[i] * u[j] * u[k]) / r
        });
        dp * (1.0 - phi) + (DMatrix::identity(n, n) - projector(x)) * grad[k]
    }

    fn declares_radial_eigenvector(&self) -> bool {
        true
    }

    fn tag(&self) -> MetricTag {
        match self {
            MetricField::Flat { .. } => MetricTag::Flat,
            MetricField::Example21 { .. } => MetricTag::Example21,
            MetricField::RadialPower { .. } => MetricTag::RadialPower,
            MetricField::TrappedSphere { .. } => MetricTag::TrappedSphere,
            MetricField::Warped { .. } => MetricTag::Warped,
        }
    }
}

/// A user-provided field; derivatives come from central differences.
pub struct SampledMetric<F> {
    n: usize,
    eval: F,
}

impl<F: Fn(&[f64]) -> DMatrix<f64>> SampledMetric<F> {
    pub fn new(n: usize, eval: F) -> Self {
        Self { n, eval }
    }
}

impl<F: Fn(&[f64]) -> DMatrix<f64>> Metric for SampledMetric<F> {
    fn dim(&self) -> usize {
        self.n
    }
    fn tensor(&self, x: &[f64]) -> DMatrix<f64> {
        (self.eval)(x)
    }
}

fn check_point(n: usize, x: &[f64]) -> Result<f64> {
    if x.len() != n {
        return Err(Error::Domain(format!("point has {} coordinates, metric dimension is {n}", x.len())));
    }
    let r = norm(x);
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain("metric evaluated at the origin or a non-finite point".to_string()));
    }
    Ok(r)
}

/// `G(x)`, symmetrized, with positive definiteness enforced. The origin is
/// rejected for every family except the flat metric, which is regular there.
pub fn eval_metric<M: Metric + ?Sized>(field: &M, x: &[f64]) -> Result<DMatrix<f64>> {
    if field.tag() == MetricTag::Flat && x.len() == field.dim() && x.iter().all(|c| c.is_finite()) {
        return Ok(DMatrix::identity(x.len(), x.len()));
    }
    check_point(field.dim(), x)?;
    let g = field.tensor(x);
    let g = (&g + g.transpose()) * 0.5;
    let lambda = min_eigenvalue(&g);
    if !(lambda > 0.0) {
        return Err(Error::Geometry {
            message: format!("G(x) not positive definite at x = {x:?}"),
            eigenvalue: lambda,
        });
    }
    Ok(g)
}

/// `<v, w>_g = v^T G w`.
pub fn inner(g: &DMatrix<f64>, v: &[f64], w: &[f64]) -> f64 {
    let n = v.len();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += v[i] * g[(i, j)] * w[j];
        }
    }
    acc
}

/// Result of fitting `log det G = log c0 + d log r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetFit {
    pub c0: f64,
    pub d: f64,
    /// Worst absolute residual of the log-linear fit.
    pub max_residual: f64,
}

/// Least-squares fit of the power law `det G(x) = c0 |x|^d` over `samples`.
pub fn metric_determinant_fit<M: Metric + ?Sized>(field: &M, samples: &[Vec<f64>]) -> Result<DetFit> {
    let mut xs = Vec::with_capacity(samples.len());
    let mut ys = Vec::with_capacity(samples.len());
    for x in samples {
        let r = check_point(field.dim(), x)?;
        let det = eval_metric(field, x)?.determinant();
        xs.push(libm::log(r));
        ys.push(libm::log(det));
    }
    let count = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / count;
    let mean_y = ys.iter().sum::<f64>() / count;
    let sxx: f64 = xs.iter().map(|v| (v - mean_x) * (v - mean_x)).sum();
    if xs.len() < 2 || sxx < 1e-24 {
        return Err(Error::Domain("determinant fit needs samples at two or more distinct radii".to_string()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(a, b)| (a - mean_x) * (b - mean_y)).sum();
    let d = sxy / sxx;
    let log_c0 = mean_y - d * mean_x;
    let max_residual = xs.iter().zip(&ys).map(|(a, b)| (b - log_c0 - d * a).abs()).fold(0.0, f64::max);
    Ok(DetFit { c0: libm::exp(log_c0), d, max_residual })
}

/// Directional derivative `sum_k u_k dG/dx_k`.
pub fn directional_derivative<M: Metric + ?Sized>(field: &M, x: &[f64], u: &[f64]) -> DMatrix<f64> {
    let n = x.len();
    let mut acc = DMatrix::zeros(n, n);
    for (k, &uk) in u.iter().enumerate() {
        if uk != 0.0 {
            acc += field.partial(x, k) * uk;
        }
    }
    acc
}

/// `DH(X, X) = <D_X H, X>_g` for `H(x) = b(|x - x0|) (x - x0)`:
///
/// ```text
/// DH(X,X) = b <(G + (s/2) dG/ds) X, X> + s b' (u . X) <u, X>_g,
/// ```
///
/// with `s = |x - x0|` and `u = (x - x0)/s`.
pub fn dh_quadratic_form<M: Metric + ?Sized>(
    field: &M,
    x: &[f64],
    vector: &[f64],
    center: &[f64],
    b: f64,
    b_prime: f64,
) -> Result<f64> {
    let g = eval_metric(field, x)?;
    let offset: Vec<f64> = x.iter().zip(center).map(|(a, c)| a - c).collect();
    let s = norm(&offset);
    if !(s > 0.0) {
        return Err(Error::Domain("dh_quadratic_form evaluated at its center".to_string()));
    }
    let u: Vec<f64> = offset.iter().map(|c| c / s).collect();
    let dg = if center.iter().all(|&c| c == 0.0) {
        field.radial_derivative(x)
    } else {
        directional_derivative(field, x, &u)
    };
    let form = &g + dg * (0.5 * s);
    Ok(b * inner(&form, vector, vector) + s * b_prime * dot(&u, vector) * inner(&g, &u, vector))
}

/// Christoffel symbols of the second kind, `Gamma[k][i][j]` flattened as
/// `k*n*n + i*n + j`.
pub fn christoffel<M: Metric + ?Sized>(field: &M, x: &[f64]) -> Result<Vec<f64>> {
    let n = x.len();
    let g = eval_metric(field, x)?;
    let g_inv = g.try_inverse().ok_or_else(|| Error::Domain("metric not invertible".to_string()))?;
    let dg: Vec<DMatrix<f64>> = (0..n).map(|k| field.partial(x, k)).collect();
    // first kind: c[l][i][j] = (d_i g_jl + d_j g_il - d_l g_ij) / 2
    let mut first = vec![0.0; n * n * n];
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                first[l * n * n + i * n + j] = 0.5 * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
            }
        }
    }
    let mut out = vec![0.0; n * n * n];
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                out[k * n * n + i * n + j] = (0..n).map(|l| g_inv[(k, l)] * first[l * n * n + i * n + j]).sum();
            }
        }
    }
    Ok(out)
}

/// `tr(G^{-1} dG/dr) = d log det G / dr`.
pub fn log_det_radial_derivative<M: Metric + ?Sized>(field: &M, x: &[f64]) -> Result<f64> {
    let g = eval_metric(field, x)?;
    let g_inv = g.try_inverse().ok_or_else(|| Error::Domain("metric not invertible".to_string()))?;
    Ok((g_inv * field.radial_derivative(x)).trace())
}

/// Radial data of a metric with `G x/|x| = x/|x|` and `det G = c0 r^d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialMetricParams {
    pub n: usize,
    pub c0: f64,
    pub d: f64,
}

impl RadialMetricParams {
    pub fn new(n: usize, c0: f64, d: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Config(format!("dimension must be >= 2, got {n}")));
        }
        if !(c0 > 0.0) {
            return Err(Error::Config(format!("c0 must be positive, got {c0}")));
        }
        if !d.is_finite() {
            return Err(Error::Config("d must be finite".to_string()));
        }
        Ok(Self { n, c0, d })
    }

    pub fn flat(n: usize) -> Self {
        Self { n, c0: 1.0, d: 0.0 }
    }

    pub fn from_fit(n: usize, fit: &DetFit) -> Result<Self> {
        Self::new(n, fit.c0, fit.d)
    }

    /// Effective dimension `n + d/2` of the radial reduction.
    pub fn effective_dimension(&self) -> f64 {
        self.n as f64 + 0.5 * self.d
    }

    /// Area density of the sphere of radius `r` in `dx_g`:
    /// `sqrt(c0) |S^{n-1}| r^(n-1+d/2)`.
    pub fn sphere_weight(&self, r: f64) -> f64 {
        libm::sqrt(self.c0) * unit_sphere_area(self.n) * libm::pow(r, self.effective_dimension() - 1.0)
    }

    /// Lower bound on `d` implied by a nonnegative tangent weight.
    pub fn nonnegative_alpha_bound(&self) -> f64 {
        2.0 * (1.0 - self.n as f64)
    }

    /// Lower bound on `d` implied by the full inequality at level `delta`.
    pub fn delta_bound(&self, delta: f64) -> f64 {
        2.0 * (self.n as f64 - 1.0) * (delta - 1.0)
    }
}

/// `Delta_g r = (n + d/2 - 1) / r`.
pub fn delta_g_r(params: &RadialMetricParams, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("radius must be positive, got {r}")));
    }
    Ok((params.effective_dimension() - 1.0) / r)
}

/// `div_g(b(r) x) = b (n + d/2) + r b'`.
pub fn divergence_of_radial_field(params: &RadialMetricParams, r: f64, b: f64, b_prime: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("radius must be positive, got {r}")));
    }
    Ok(b * params.effective_dimension() + r * b_prime)
}

/// Euclidean unit vector of `x`.
pub fn radial_unit(x: &[f64]) -> DVector<f64> {
    let r = norm(x);
    DVector::from_iterator(x.len(), x.iter().map(|c| c / r))
}
