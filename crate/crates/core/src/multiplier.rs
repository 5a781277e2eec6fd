//! Discrete checks of the multiplier identities for radial solutions.
//!
//! Only radial grids are supported. There `grad_g u = u_r x_hat`, and for
//! `H = b(r) x` the identities reduce to one-dimensional quadratures:
//!
//! * `DH(grad u, grad u) = (b + r b') |u_r|^2`, since `x_hat` is a unit
//!   geodesic field when it is an eigenvector of `G` with eigenvalue 1;
//! * `div_g H = b (n + d/2) + r b'`;
//! * with Dirichlet data the boundary integrals collapse to
//!   `1/2 [b r w |u_r|^2]` between the inner and outer radius.
//!
//! Space-time integrals use the Crank-Nicolson midpoint `v` and the
//! difference quotient `(u+ - u)/dt` in each step.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::functionals::Physics;
use crate::grid::{FieldState, Grid, GridKind};
use crate::metric::RadialMetricParams;
use crate::solver::{run_simulation_with, RunOutput, SolverConfig, StepView};
use crate::util::Ramp;

/// Vector field `H = b(r) x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MultiplierField {
    /// `H = d/dr`, i.e. `b = 1/r`.
    RadialUnit,
    /// `b = 1` below `r0 - eps0`, smoothly cut to 0 at `r0`.
    Cutoff { r0: f64, eps0: f64 },
    /// `H = x`.
    Position,
}

impl MultiplierField {
    /// `(b, b')` at radius `r`.
    pub fn profile(&self, r: f64) -> (f64, f64) {
        match *self {
            Self::RadialUnit => (1.0 / r, -1.0 / (r * r)),
            Self::Cutoff { r0, eps0 } => {
                let ramp = Ramp::new(r0 - eps0, r0);
                (1.0 - ramp.value(r), -ramp.d1(r))
            }
            Self::Position => (1.0, 0.0),
        }
    }

    fn validate(&self) -> Result<()> {
        if let Self::Cutoff { r0, eps0 } = *self {
            if !(eps0 > 0.0 && r0 > eps0) {
                return Err(Error::Config(format!("cutoff needs r0 > eps0 > 0, got r0={r0}, eps0={eps0}")));
            }
        }
        Ok(())
    }
}

/// Real multiplier `P = c r^(-k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiplierFunction {
    pub c: f64,
    pub k: f64,
}

impl MultiplierFunction {
    /// `(n-1) / (2r)`.
    pub fn standard(n: usize) -> Self {
        Self { c: 0.5 * (n as f64 - 1.0), k: 1.0 }
    }

    /// `(P, P', P'')`.
    pub fn profile(&self, r: f64) -> (f64, f64, f64) {
        let p = self.c * libm::pow(r, -self.k);
        (p, -self.k * p / r, self.k * (self.k + 1.0) * p / (r * r))
    }

    /// `Delta_g P = P'' + (n + d/2 - 1) P' / r`.
    pub fn laplacian(&self, params: &RadialMetricParams, r: f64) -> f64 {
        let (_, d1, d2) = self.profile(r);
        d2 + (params.effective_dimension() - 1.0) * d1 / r
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityTerm {
    pub name: String,
    pub value: f64,
}

/// One identity: `lhs` against the sum of `terms`.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub lhs: IdentityTerm,
    pub terms: Vec<IdentityTerm>,
    pub absolute: f64,
    /// `absolute` divided by the largest term magnitude (0 if all vanish).
    pub residual: f64,
}

impl IdentityReport {
    fn new(lhs: IdentityTerm, terms: Vec<IdentityTerm>) -> Self {
        let absolute = libm::fabs(lhs.value - terms.iter().map(|t| t.value).sum::<f64>());
        let scale = terms.iter().map(|t| libm::fabs(t.value)).fold(libm::fabs(lhs.value), f64::max);
        let residual = if scale > 0.0 { absolute / scale } else { 0.0 };
        Self { lhs, terms, absolute, residual }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierReport {
    /// Vector-field identity.
    pub vector: IdentityReport,
    /// Scalar identity with `P`.
    pub scalar: IdentityReport,
}

impl MultiplierReport {
    pub fn residual(&self) -> f64 {
        self.vector.residual.max(self.scalar.residual)
    }
}

/// Accumulates the space-time integrals step by step.
pub struct MultiplierCheck<'g> {
    grid: &'g Grid,
    params: RadialMetricParams,
    h: MultiplierField,
    p: MultiplierFunction,
    kappa: f64,
    power: f64,
    a: Vec<f64>,
    initial_flux: Option<f64>,
    boundary: f64,
    dh: f64,
    damping: f64,
    div: f64,
    s_time: f64,
    s_grad: f64,
    s_pow: f64,
    s_lap: f64,
}

fn name(s: &str, value: f64) -> IdentityTerm {
    IdentityTerm { name: s.into(), value }
}

impl<'g> MultiplierCheck<'g> {
    pub fn new(grid: &'g Grid, phys: &Physics, h: MultiplierField, p: MultiplierFunction) -> Result<Self> {
        let params = match grid.kind {
            GridKind::Radial(params) => params,
            GridKind::Warped(_) => {
                return Err(Error::Config("multiplier identities are implemented for radial grids only".into()))
            }
        };
        h.validate()?;
        if grid.j_intervals < 3 {
            return Err(Error::Config("multiplier identities need at least 3 radial intervals".into()));
        }
        Ok(Self {
            grid,
            params,
            h,
            p,
            kappa: phys.kappa,
            power: phys.p,
            a: phys.a.clone(),
            initial_flux: None,
            boundary: 0.0,
            dh: 0.0,
            damping: 0.0,
            div: 0.0,
            s_time: 0.0,
            s_grad: 0.0,
            s_pow: 0.0,
            s_lap: 0.0,
        })
    }

    /// Second-order radial derivative at every node.
    fn derivative(&self, u: &[Complex64]) -> Vec<Complex64> {
        let n = u.len();
        let inv = 1.0 / (2.0 * self.grid.dr);
        (0..n)
            .map(|j| {
                if j == 0 {
                    (u[1] * 4.0 - u[0] * 3.0 - u[2]) * inv
                } else if j == n - 1 {
                    (u[n - 1] * 3.0 - u[n - 2] * 4.0 + u[n - 3]) * inv
                } else {
                    (u[j + 1] - u[j - 1]) * inv
                }
            })
            .collect()
    }

    /// `1/2 int Im(u H(u_bar))`.
    fn flux(&self, u: &[Complex64]) -> f64 {
        let ur = self.derivative(u);
        let g = self.grid;
        0.5 * (0..u.len())
            .map(|j| {
                let r = g.radii[j];
                let (b, _) = self.h.profile(r);
                g.quadrature[j] * (u[j] * ur[j].conj() * (b * r)).im
            })
            .sum::<f64>()
    }

    pub fn observe(&mut self, step: &StepView) {
        let u = &step.before.values;
        let un = &step.after.values;
        if self.initial_flux.is_none() {
            self.initial_flux = Some(self.flux(u));
        }
        let dt = step.dt;
        let v: Vec<Complex64> = u.iter().zip(un).map(|(a, b)| (a + b) * 0.5).collect();
        let ut: Vec<Complex64> = u.iter().zip(un).map(|(a, b)| (b - a) / dt).collect();
        let vr = self.derivative(&v);
        let g = self.grid;
        let last = v.len() - 1;
        let edge = |j: usize| {
            let r = g.radii[j];
            let (b, _) = self.h.profile(r);
            0.5 * b * r * self.params.sphere_weight(r) * vr[j].norm_sqr()
        };
        self.boundary += dt * (edge(last) - edge(0));
        let pow_coef = 2.0 / (self.power + 1.0);
        for j in 0..v.len() {
            let q = g.quadrature[j] * dt;
            let r = g.radii[j];
            let (b, bp) = self.h.profile(r);
            let grad = vr[j].norm_sqr();
            let pw = self.kappa * libm::pow(v[j].norm_sqr(), 0.5 * (self.power + 1.0));
            let time = (v[j] * ut[j].conj()).im;
            self.dh += q * (b + r * bp) * grad;
            self.damping += q * self.a[j] * (v[j] * vr[j].conj() * (b * r)).im;
            let div = b * self.params.effective_dimension() + r * bp;
            self.div += 0.5 * q * (time - grad - pow_coef * pw) * div;
            let (p, _, _) = self.p.profile(r);
            self.s_time += q * time * p;
            self.s_grad -= q * grad * p;
            self.s_pow -= q * pw * p;
            self.s_lap -= 0.5 * q * v[j].norm_sqr() * self.p.laplacian(&self.params, r);
        }
    }

    pub fn finish(&self, final_state: &FieldState) -> MultiplierReport {
        let start = self.initial_flux.unwrap_or_else(|| self.flux(&final_state.values));
        let vector = IdentityReport::new(
            name("boundary", self.boundary),
            alloc::vec![
                name("time-boundary", self.flux(&final_state.values) - start),
                name("dh-form", self.dh),
                name("damping", self.damping),
                name("divergence", self.div),
            ],
        );
        let scalar = IdentityReport::new(
            name("laplacian-p", self.s_lap),
            alloc::vec![name("time", self.s_time), name("gradient", self.s_grad), name("power", self.s_pow)],
        );
        MultiplierReport { vector, scalar }
    }
}

/// Runs the scenario and checks both identities along the trajectory.
pub fn multiplier_identity_residual(
    grid: &Grid,
    cfg: &SolverConfig,
    initial: FieldState,
    h: MultiplierField,
    p: MultiplierFunction,
) -> Result<(MultiplierReport, RunOutput)> {
    let phys = Physics::new(grid, &cfg.damping, cfg.p, cfg.nonlinear, cfg.alpha);
    let mut check = MultiplierCheck::new(grid, &phys, h, p)?;
    let out = run_simulation_with(grid, cfg, initial, &mut |s| {
        check.observe(s);
        Ok(())
    })?;
    Ok((check.finish(&out.final_state), out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::damping::DampingProfile;
    use crate::grid::{make_initial_data, InitialData};
    use crate::metric::{dh_quadratic_form, MetricField, WarpedProfile};

    #[test]
    fn dh_closed_form_matches_metric_oracle() {
        let fields = [MetricField::Flat { n: 3 }, MetricField::Example21 { n: 3, m: 2.0, d1: 0.5 }];
        for field in &fields {
            for h in [MultiplierField::RadialUnit, MultiplierField::Cutoff { r0: 4.0, eps0: 1.0 }] {
                for r in [1.2, 3.3, 3.8] {
                    let (b, bp) = h.profile(r);
                    let dh = dh_quadratic_form(field, &[r, 0.0, 0.0], &[1.0, 0.0, 0.0], &[0.0; 3], b, bp).unwrap();
                    assert!((dh - (b + r * bp)).abs() < 1e-6, "{field:?} r={r}: {dh}");
                }
            }
        }
    }

    #[test]
    fn zero_solution_has_zero_residual() {
        let g = Grid::radial(RadialMetricParams::flat(3), 1.0, 5.0, 40).unwrap();
        let cfg = SolverConfig::new(0.01, 0.1);
        let (rep, _) = multiplier_identity_residual(
            &g,
            &cfg,
            FieldState::zeros(&g),
            MultiplierField::RadialUnit,
            MultiplierFunction::standard(3),
        )
        .unwrap();
        assert_eq!(rep.residual(), 0.0);
    }

    #[test]
    fn warped_grid_is_rejected() {
        let g = Grid::warped(WarpedProfile::Euclidean, 1.0, 2.0, 10, 8).unwrap();
        let phys = Physics::new(&g, &DampingProfile::none(), 3.0, true, 1.0);
        assert!(matches!(
            MultiplierCheck::new(&g, &phys, MultiplierField::Position, MultiplierFunction::standard(2)),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn residual_is_small_on_smooth_run() {
        let g = Grid::radial(RadialMetricParams::flat(3), 1.0, 16.0, 600).unwrap();
        let mut cfg = SolverConfig::new(5e-3, 0.5);
        cfg.damping = DampingProfile::smoothstep(0.5, 8.0, 2.0);
        let u0 =
            make_initial_data(&InitialData::Gaussian { center: 6.0, width: 1.0, amplitude: 1.0, k: 1.0 }, &g).unwrap();
        let (rep, _) =
            multiplier_identity_residual(&g, &cfg, u0, MultiplierField::RadialUnit, MultiplierFunction::standard(3))
                .unwrap();
        assert!(rep.vector.residual < 1e-3, "{rep:?}");
        assert!(rep.scalar.residual < 1e-3, "{rep:?}");
    }
}
