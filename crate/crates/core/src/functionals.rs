//! Quadratures of the conserved and dissipated quantities, discrete
//! dissipation residuals, Morawetz integrals and observability ratios.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::damping::DampingProfile;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::util::trapezoid;

/// Fraction of the radial span treated as the outer monitoring band.
pub const OUTER_BAND_FRACTION: f64 = 0.05;

/// Equation data evaluated on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Physics {
    pub p: f64,
    /// Coefficient of the nonlinearity: 1 when on, 0 for the linear problem.
    pub kappa: f64,
    /// Constant tangent weight `alpha` in the angular Morawetz density.
    pub alpha: f64,
    /// Damping at every node.
    pub a: Vec<f64>,
    /// Discrete `Delta_g a` at every node.
    pub lap_a: Vec<f64>,
    /// Radius below which the lower-order mass term of the observability
    /// inequality is collected.
    pub inner_radius: f64,
}

impl Physics {
    pub fn new(grid: &Grid, damping: &DampingProfile, p: f64, nonlinear: bool, alpha: f64) -> Self {
        let a: Vec<f64> = (0..grid.len()).map(|i| damping.value(grid.radius_of(i))).collect();
        let lap_a = grid.apply_real(&a);
        let inner_radius = match damping.kind {
            crate::damping::DampingKind::Smoothstep => damping.r0 - damping.eps0,
            _ => grid.r_in,
        };
        Self { p, kappa: if nonlinear { 1.0 } else { 0.0 }, alpha, a, lap_a, inner_radius }
    }

    pub fn nonlinear(&self) -> bool {
        self.kappa != 0.0
    }
}

fn pow_abs(z: Complex64, e: f64) -> f64 {
    libm::pow(z.norm_sqr(), 0.5 * e)
}

pub fn mass(grid: &Grid, u: &[Complex64]) -> f64 {
    u.iter().zip(&grid.quadrature).map(|(z, q)| z.norm_sqr() * q).sum()
}

/// `-<L u, u> = sum_e c_e |u_b - u_a|^2`, the discrete `int |grad_g u|^2`.
pub fn kinetic(grid: &Grid, u: &[Complex64]) -> f64 {
    grid.edges.iter().map(|e| e.coef * (u[e.b] - u[e.a]).norm_sqr()).sum()
}

/// `sum q |u|^(p+1)`.
pub fn power_sum(grid: &Grid, u: &[Complex64], p: f64) -> f64 {
    u.iter().zip(&grid.quadrature).map(|(z, q)| pow_abs(*z, p + 1.0) * q).sum()
}

/// `E = (1/2)(M + K) + kappa/(p+1) sum q |u|^(p+1)`.
pub fn energy(grid: &Grid, phys: &Physics, u: &[Complex64]) -> f64 {
    0.5 * (mass(grid, u) + kinetic(grid, u)) + phys.kappa / (phys.p + 1.0) * power_sum(grid, u, phys.p)
}

/// `K + kappa 2/(p+1) sum q |u|^(p+1)`: the part of `2E` whose rate the
/// energy identity prescribes.
fn dissipated_energy(grid: &Grid, phys: &Physics, u: &[Complex64]) -> f64 {
    kinetic(grid, u) + phys.kappa * 2.0 / (phys.p + 1.0) * power_sum(grid, u, phys.p)
}

/// Every pointwise-in-time quantity recorded by the solver.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Observables {
    pub mass: f64,
    pub energy: f64,
    pub kinetic: f64,
    /// `kappa 2/(p+1) int |u|^(p+1)`.
    pub potential: f64,
    /// `int |u|^(p+1) / r`.
    pub morawetz_p1: f64,
    /// `int |u|^2 / r^3`.
    pub morawetz_r3: f64,
    /// `int (alpha / r)(|grad_g u|^2 - |u_r|^2)`.
    pub morawetz_ang: f64,
    /// Mass in the outer band next to `r_out`.
    pub outer_mass: f64,
    /// `int a (|u|^2 + |grad_g u|^2 + kappa |u|^(p+1))`.
    pub damping_work: f64,
    /// Mass inside `|x| < inner_radius`.
    pub inner_mass: f64,
}

impl Observables {
    pub fn compute(grid: &Grid, phys: &Physics, u: &[Complex64]) -> Self {
        let p = phys.p;
        let band_start = grid.r_out - OUTER_BAND_FRACTION * (grid.r_out - grid.r_in);
        let mut o = Observables::default();
        let mut psum = 0.0;
        for (i, (z, q)) in u.iter().zip(&grid.quadrature).enumerate() {
            let r = grid.radius_of(i);
            let m = z.norm_sqr() * q;
            let pw = pow_abs(*z, p + 1.0) * q;
            o.mass += m;
            psum += pw;
            o.morawetz_p1 += pw / r;
            o.morawetz_r3 += m / (r * r * r);
            o.damping_work += phys.a[i] * (m + phys.kappa * pw);
            if r >= band_start {
                o.outer_mass += m;
            }
            if r < phys.inner_radius {
                o.inner_mass += m;
            }
        }
        for e in &grid.edges {
            let g = e.coef * (u[e.b] - u[e.a]).norm_sqr();
            o.kinetic += g;
            o.damping_work += 0.5 * (phys.a[e.a] + phys.a[e.b]) * g;
            if e.angular {
                o.morawetz_ang += phys.alpha / grid.radius_of(e.a) * g;
            }
        }
        o.potential = phys.kappa * 2.0 / (p + 1.0) * psum;
        o.energy = 0.5 * (o.mass + o.kinetic) + phys.kappa / (p + 1.0) * psum;
        o
    }
}

/// Relative residuals of the discrete mass and energy identities over one
/// step `u -> u_next` of size `dt`, evaluated at the midpoint state:
///
/// ```text
/// (M+ - M)/dt + 2 <a v, v>                                   (mass)
/// (F+ - F)/dt + 2 sum_e abar_e c_e |dv|^2 + 2 kappa sum q a |v|^(p+1)
///             - sum q |v|^2 L_h a                            (energy)
/// ```
///
/// normalized by `M` and `E` of the earlier state.
pub fn dissipation_residuals(
    grid: &Grid,
    phys: &Physics,
    u: &[Complex64],
    u_next: &[Complex64],
    dt: f64,
) -> (f64, f64) {
    let v: Vec<Complex64> = u.iter().zip(u_next).map(|(a, b)| (a + b) * 0.5).collect();
    let m0 = mass(grid, u);
    let m1 = mass(grid, u_next);
    let mut damped_mass = 0.0;
    let mut damped_power = 0.0;
    let mut source = 0.0;
    for (i, (z, q)) in v.iter().zip(&grid.quadrature).enumerate() {
        let s = z.norm_sqr() * q;
        damped_mass += phys.a[i] * s;
        damped_power += phys.a[i] * pow_abs(*z, phys.p + 1.0) * q;
        source += s * phys.lap_a[i];
    }
    let damped_grad: f64 =
        grid.edges.iter().map(|e| 0.5 * (phys.a[e.a] + phys.a[e.b]) * e.coef * (v[e.b] - v[e.a]).norm_sqr()).sum();
    let mass_res = ((m1 - m0) / dt + 2.0 * damped_mass).abs();
    let rhs = -2.0 * damped_grad - 2.0 * phys.kappa * damped_power + source;
    let f0 = dissipated_energy(grid, phys, u);
    let f1 = dissipated_energy(grid, phys, u_next);
    let energy_res = ((f1 - f0) / dt - rhs).abs();
    let e0 = energy(grid, phys, u);
    (if m0 > 0.0 { mass_res / m0 } else { mass_res }, if e0 > 0.0 { energy_res / e0 } else { energy_res })
}

/// One row of the diagnostics table.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub obs: Observables,
    /// Largest relative mass-identity residual since the previous record.
    pub mass_identity_residual: f64,
    /// Largest relative energy-identity residual since the previous record.
    pub energy_identity_residual: f64,
    /// Outer-band mass relative to the initial mass.
    pub outer_boundary_mass: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiagnosticsSeries {
    pub records: Vec<DiagnosticsRecord>,
}

impl DiagnosticsSeries {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    pub fn column(&self, f: impl Fn(&DiagnosticsRecord) -> f64) -> Vec<f64> {
        self.records.iter().map(f).collect()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.column(|r| r.obs.energy)
    }

    pub fn masses(&self) -> Vec<f64> {
        self.column(|r| r.obs.mass)
    }

    /// Records with `t <= t_end` (inclusive, with a small slack for round-off).
    pub fn until(&self, t_end: f64) -> DiagnosticsSeries {
        DiagnosticsSeries { records: self.records.iter().filter(|r| r.t <= t_end + 1e-9).copied().collect() }
    }

    pub fn max_outer_boundary_mass(&self) -> f64 {
        self.records.iter().map(|r| r.outer_boundary_mass).fold(0.0, f64::max)
    }

    pub fn max_mass_residual(&self) -> f64 {
        self.records.iter().map(|r| r.mass_identity_residual).fold(0.0, f64::max)
    }

    pub fn max_energy_residual(&self) -> f64 {
        self.records.iter().map(|r| r.energy_identity_residual).fold(0.0, f64::max)
    }
}

/// Time-integrated Morawetz densities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MorawetzIntegrals {
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
}

/// Trapezoid-in-time integrals of `m1`, `m2`, `m3` over the series.
pub fn morawetz_integrals(series: &DiagnosticsSeries) -> Result<MorawetzIntegrals> {
    if series.is_empty() {
        return Err(Error::Config("Morawetz integrals need a non-empty window".into()));
    }
    let t = series.times();
    Ok(MorawetzIntegrals {
        i1: trapezoid(&t, &series.column(|r| r.obs.morawetz_p1)),
        i2: trapezoid(&t, &series.column(|r| r.obs.morawetz_r3)),
        i3: trapezoid(&t, &series.column(|r| r.obs.morawetz_ang)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservabilityRatio {
    /// `E(0) + int_0^T E dt`.
    pub numerator: f64,
    /// `int_0^T int a (|u|^2 + |grad u|^2 + |u|^(p+1)) dt`.
    pub denominator: f64,
    pub ratio: f64,
    /// Ratio with the lower-order `int int_{|x| < R0 - eps0} |u|^2` added to
    /// the denominator.
    pub ratio_with_lower_order: f64,
}

/// Observability ratio over the records with `t <= t_end`.
pub fn observability_ratio(series: &DiagnosticsSeries, t_end: f64) -> Result<ObservabilityRatio> {
    let window = series.until(t_end);
    if window.is_empty() {
        return Err(Error::Config("observability ratio needs a non-empty window".into()));
    }
    let t = window.times();
    let numerator = window.records[0].obs.energy + trapezoid(&t, &window.energies());
    let denominator = trapezoid(&t, &window.column(|r| r.obs.damping_work));
    let lower = trapezoid(&t, &window.column(|r| r.obs.inner_mass));
    if !(denominator >= 1e-14 * numerator) || denominator == 0.0 {
        return Err(Error::Observability { numerator, denominator });
    }
    Ok(ObservabilityRatio {
        numerator,
        denominator,
        ratio: numerator / denominator,
        ratio_with_lower_order: numerator / (denominator + lower),
    })
}

/// Relative spread `(max - min) / mean` of positive values.
pub fn relative_spread(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Fit("spread of an empty set".into()));
    }
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    if !(mean.abs() > 0.0) {
        return Err(Error::Fit(format!("spread undefined for mean {mean}")));
    }
    Ok((max - min) / mean.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_initial_data, InitialData};
    use crate::metric::{RadialMetricParams, WarpedProfile};
    use alloc::vec;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_state_has_zero_functionals() {
        let g = Grid::radial(RadialMetricParams::flat(3), 1.0, 4.0, 30).unwrap();
        let phys = Physics::new(&g, &DampingProfile::none(), 3.0, true, 1.0);
        let o = Observables::compute(&g, &phys, &vec![c(0.0, 0.0); g.len()]);
        assert_eq!(o, Observables::default());
    }

    #[test]
    fn single_node_bump_energy() {
        let g = Grid::radial(RadialMetricParams::flat(3), 1.0, 2.0, 10).unwrap();
        let phys = Physics::new(&g, &DampingProfile::none(), 3.0, true, 1.0);
        let mut u = vec![c(0.0, 0.0); g.len()];
        u[4] = c(1.0, 0.0);
        let pi4 = 4.0 * core::f64::consts::PI;
        let w = |r: f64| pi4 * r * r;
        let (r, h) = (g.radii[4], g.dr);
        let q = w(r) * h;
        let grad = (w(r - 0.5 * h) + w(r + 0.5 * h)) / h;
        let expected = 0.5 * (q + grad) + 0.25 * q;
        assert!((energy(&g, &phys, &u) - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn warped_and_radial_quadratures_agree() {
        let radial = Grid::radial(RadialMetricParams::new(2, 1.0, 0.0).unwrap(), 1.0, 3.0, 40).unwrap();
        let warped = Grid::warped(WarpedProfile::Euclidean, 1.0, 3.0, 40, 8).unwrap();
        let d = InitialData::Gaussian { center: 2.0, width: 0.3, amplitude: 1.0, k: 0.5 };
        let ur = make_initial_data(&d, &radial).unwrap();
        let uw = make_initial_data(&d, &warped).unwrap();
        let damping = DampingProfile::none();
        let er = energy(&radial, &Physics::new(&radial, &damping, 3.0, true, 1.0), &ur.values);
        let ew = energy(&warped, &Physics::new(&warped, &damping, 3.0, true, 1.0), &uw.values);
        assert!((er - ew).abs() < 1e-12 * er);
    }

    #[test]
    fn radial_angular_density_is_zero() {
        let g = Grid::radial(RadialMetricParams::flat(3), 1.0, 3.0, 30).unwrap();
        let phys = Physics::new(&g, &DampingProfile::none(), 3.0, true, 1.0);
        let u =
            make_initial_data(&InitialData::Gaussian { center: 2.0, width: 0.3, amplitude: 1.0, k: 1.0 }, &g).unwrap();
        assert_eq!(Observables::compute(&g, &phys, &u.values).morawetz_ang, 0.0);
    }

    #[test]
    fn observability_guards() {
        let zero = DiagnosticsSeries {
            records: vec![
                DiagnosticsRecord { t: 0.0, ..Default::default() },
                DiagnosticsRecord { t: 1.0, ..Default::default() },
            ],
        };
        assert!(matches!(observability_ratio(&zero, 1.0), Err(Error::Observability { .. })));
        assert!(morawetz_integrals(&DiagnosticsSeries::default()).is_err());
        let i = morawetz_integrals(&zero).unwrap();
        assert_eq!((i.i1, i.i2, i.i3), (0.0, 0.0, 0.0));
    }
}
