//! Crank-Nicolson time stepping of
//! `i u_t + L u + i a u - kappa |u|^(p-1) u = 0` with Dirichlet rows.
//!
//! Each step solves for the midpoint `v = (u+ + u)/2`:
//!
//! ```text
//! (2/dt + a - i L) v = (2/dt) u - i kappa |v|^(p-1) v,
//! ```
//!
//! by fixed-point iteration on the right-hand side. The matrix does not
//! depend on `v`, so it is factored once per run.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::damping::DampingProfile;
use crate::error::{Error, Result};
use crate::functionals::{dissipation_residuals, DiagnosticsRecord, DiagnosticsSeries, Observables, Physics};
use crate::grid::{FieldState, Grid};
use crate::linalg::BandedLu;

/// Relative outer-band mass above which a run is considered contaminated by
/// reflections from the truncation boundary.
pub const TAINT_THRESHOLD: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub p: f64,
    pub nonlinear: bool,
    pub dt: f64,
    pub t_final: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Record diagnostics every `stride` steps (and at the last step).
    pub stride: usize,
    /// Stop once `E(t) <= stop_below * E(0)`.
    pub stop_below: Option<f64>,
    pub damping: DampingProfile,
    /// Tangent weight used by the angular Morawetz density.
    pub alpha: f64,
}

impl SolverConfig {
    pub fn new(dt: f64, t_final: f64) -> Self {
        Self {
            p: 3.0,
            nonlinear: true,
            dt,
            t_final,
            tolerance: 1e-12,
            max_iterations: 50,
            stride: 1,
            stop_below: None,
            damping: DampingProfile::none(),
            alpha: 1.0,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.p > 1.0) {
            return Err(Error::Config(format!("p must be > 1, got {}", self.p)));
        }
        if n >= 3 {
            let crit = (n as f64 + 2.0) / (n as f64 - 2.0);
            if !(self.p < crit) {
                return Err(Error::Config(format!("p must be < (n+2)/(n-2) = {crit}, got {}", self.p)));
            }
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("time.dt must be > 0, got {}", self.dt)));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(Error::Config(format!("time.t_final must be >= 0, got {}", self.t_final)));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Config(format!("time.tolerance must be > 0, got {}", self.tolerance)));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("time.max_iterations must be >= 1".into()));
        }
        if self.stride == 0 {
            return Err(Error::Config("time.stride must be >= 1".into()));
        }
        if !(self.alpha >= 0.0) {
            return Err(Error::Config(format!("alpha must be >= 0, got {}", self.alpha)));
        }
        self.damping.validate()
    }

    pub fn steps(&self) -> usize {
        libm::round(self.t_final / self.dt) as usize
    }
}

/// Factored implicit operator for one grid and configuration.
pub struct Stepper<'g> {
    grid: &'g Grid,
    phys: Physics,
    lu: BandedLu,
    dt: f64,
    tolerance: f64,
    max_iterations: usize,
}

/// One accepted step.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub next: FieldState,
    pub iterations: usize,
}

impl<'g> Stepper<'g> {
    pub fn new(grid: &'g Grid, cfg: &SolverConfig) -> Result<Self> {
        cfg.validate(grid.dimension())?;
        let phys = Physics::new(grid, &cfg.damping, cfg.p, cfg.nonlinear, cfg.alpha);
        let shift: Vec<f64> = phys.a.iter().map(|a| 2.0 / cfg.dt + a).collect();
        let lu = grid.implicit_matrix(&shift).factor()?;
        Ok(Self { grid, phys, lu, dt: cfg.dt, tolerance: cfg.tolerance, max_iterations: cfg.max_iterations })
    }

    pub fn physics(&self) -> &Physics {
        &self.phys
    }

    pub fn grid(&self) -> &Grid {
        self.grid
    }

    /// Advances `state` by one step; `index` is used in error reports.
    pub fn step(&self, state: &FieldState, index: usize) -> Result<StepOutcome> {
        let g = self.grid;
        let nu = g.unknowns();
        let off = g.k_nodes;
        let u = &state.values;
        let scale = g.norm(u).max(f64::MIN_POSITIVE);
        let base: Vec<Complex64> = (0..nu).map(|m| u[m + off] * (2.0 / self.dt)).collect();
        let mut v: Vec<Complex64> = u[off..off + nu].to_vec();
        let mut iterations = 0;
        let mut residual = f64::INFINITY;
        let i = Complex64::new(0.0, 1.0);
        while iterations < self.max_iterations {
            iterations += 1;
            let mut rhs = base.clone();
            if self.phys.nonlinear() {
                for (r, z) in rhs.iter_mut().zip(&v) {
                    *r -= i * self.phys.kappa * libm::pow(z.norm_sqr(), 0.5 * (self.phys.p - 1.0)) * z;
                }
            }
            self.lu.solve_in_place(&mut rhs);
            let diff: f64 =
                rhs.iter().zip(&v).enumerate().map(|(m, (a, b))| (a - b).norm_sqr() * g.quadrature[m + off]).sum();
            residual = libm::sqrt(diff) / scale;
            v = rhs;
            if !self.phys.nonlinear() || residual <= self.tolerance {
                break;
            }
        }
        let time = state.t + self.dt;
        if self.phys.nonlinear() && residual > self.tolerance {
            return Err(Error::Step {
                step: index,
                time,
                residual,
                message: format!(
                    "fixed-point iteration did not converge in {} iterations; try halving dt",
                    self.max_iterations
                ),
            });
        }
        let mut next = FieldState::zeros(g);
        for (m, z) in v.iter().enumerate() {
            next.values[m + off] = z * 2.0 - u[m + off];
        }
        next.t = time;
        if !next.is_finite() {
            return Err(Error::Step { step: index, time, residual, message: "non-finite values".into() });
        }
        Ok(StepOutcome { next, iterations })
    }
}

/// The data a step observer sees.
pub struct StepView<'a> {
    pub index: usize,
    pub dt: f64,
    pub before: &'a FieldState,
    pub after: &'a FieldState,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub series: DiagnosticsSeries,
    pub initial: FieldState,
    pub final_state: FieldState,
    pub steps: usize,
    /// Outer-band mass exceeded [`TAINT_THRESHOLD`] of the initial mass.
    pub tainted: bool,
    pub max_iterations_used: usize,
}

pub fn run_simulation(grid: &Grid, cfg: &SolverConfig, initial: FieldState) -> Result<RunOutput> {
    run_simulation_with(grid, cfg, initial, &mut |_| Ok(()))
}

/// Runs to `t_final`, calling `observer` after every accepted step.
pub fn run_simulation_with(
    grid: &Grid,
    cfg: &SolverConfig,
    initial: FieldState,
    observer: &mut dyn FnMut(&StepView) -> Result<()>,
) -> Result<RunOutput> {
    if initial.values.len() != grid.len() {
        return Err(Error::Config(format!(
            "initial state has {} values, grid has {} nodes",
            initial.values.len(),
            grid.len()
        )));
    }
    let stepper = Stepper::new(grid, cfg)?;
    let phys = stepper.physics();
    let mut state = initial;
    state.enforce_boundary(grid);
    let initial = state.clone();
    let obs0 = Observables::compute(grid, phys, &state.values);
    let mass0 = obs0.mass;
    let relative_outer = |o: &Observables| if mass0 > 0.0 { o.outer_mass / mass0 } else { 0.0 };
    let mut series = DiagnosticsSeries::default();
    series.records.push(DiagnosticsRecord {
        t: state.t,
        obs: obs0,
        mass_identity_residual: 0.0,
        energy_identity_residual: 0.0,
        outer_boundary_mass: relative_outer(&obs0),
    });
    let steps = cfg.steps();
    let t0 = state.t;
    let (mut max_mass_res, mut max_energy_res) = (0.0_f64, 0.0_f64);
    let mut max_iter = 0;
    let mut done = 0;
    for index in 1..=steps {
        let out = stepper.step(&state, index)?;
        let mut next = out.next;
        next.t = t0 + index as f64 * cfg.dt;
        max_iter = max_iter.max(out.iterations);
        let (mr, er) = dissipation_residuals(grid, phys, &state.values, &next.values, cfg.dt);
        max_mass_res = max_mass_res.max(mr);
        max_energy_res = max_energy_res.max(er);
        observer(&StepView { index, dt: cfg.dt, before: &state, after: &next })?;
        state = next;
        done = index;
        let last = index == steps;
        let mut stop = false;
        if index % cfg.stride == 0 || last || cfg.stop_below.is_some() {
            let obs = Observables::compute(grid, phys, &state.values);
            stop = cfg.stop_below.is_some_and(|s| obs.energy <= s * obs0.energy);
            if index % cfg.stride == 0 || last || stop {
                series.records.push(DiagnosticsRecord {
                    t: state.t,
                    obs,
                    mass_identity_residual: max_mass_res,
                    energy_identity_residual: max_energy_res,
                    outer_boundary_mass: relative_outer(&obs),
                });
                max_mass_res = 0.0;
                max_energy_res = 0.0;
            }
        }
        if stop {
            break;
        }
    }
    let tainted = series.max_outer_boundary_mass() > TAINT_THRESHOLD;
    Ok(RunOutput { series, initial, final_state: state, steps: done, tainted, max_iterations_used: max_iter })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::mass;
    use crate::grid::{make_initial_data, InitialData};
    use crate::metric::RadialMetricParams;

    fn radial_grid(j: usize) -> Grid {
        Grid::radial(RadialMetricParams::flat(3), 1.0, 21.0, j).unwrap()
    }

    #[test]
    fn zero_is_a_fixed_point() {
        let g = radial_grid(50);
        let cfg = SolverConfig::new(0.01, 0.1);
        let out = run_simulation(&g, &cfg, FieldState::zeros(&g)).unwrap();
        assert!(out.final_state.values.iter().all(|z| *z == Complex64::new(0.0, 0.0)));
        assert!(out.series.records.iter().all(|r| r.obs.energy == 0.0 && r.obs.mass == 0.0));
    }

    #[test]
    fn free_mass_is_conserved() {
        let g = radial_grid(200);
        let cfg = SolverConfig::new(1e-2, 1.0);
        let u0 =
            make_initial_data(&InitialData::Gaussian { center: 8.0, width: 1.5, amplitude: 1.0, k: 0.5 }, &g).unwrap();
        let m0 = mass(&g, &u0.values);
        let out = run_simulation(&g, &cfg, u0).unwrap();
        assert!((mass(&g, &out.final_state.values) - m0).abs() < 1e-11 * m0);
    }

    #[test]
    fn linear_eigenmode_phase() {
        // one eigenvector of L (a symmetric tridiagonal in the w-weighted
        // basis) rotates by (1 + i lam dt/2)^{-1}(1 - i lam dt/2)
        let g = radial_grid(40);
        let mut cfg = SolverConfig::new(0.05, 0.05);
        cfg.nonlinear = false;
        let nu = g.unknowns();
        let sym = nalgebra::DMatrix::<f64>::from_fn(nu, nu, |r, c| {
            let (i, j) = (g.node_of_unknown(r), g.node_of_unknown(c));
            let lu: Vec<f64> = {
                let mut e = alloc::vec![0.0; g.len()];
                e[j] = 1.0;
                g.apply_real(&e)
            };
            lu[i] * libm::sqrt(g.measure[i] / g.measure[j])
        });
        let sym = (&sym + sym.transpose()) * 0.5;
        let eig = sym.symmetric_eigen();
        let lam = -eig.eigenvalues[3];
        let mut u = FieldState::zeros(&g);
        for m in 0..nu {
            let i = g.node_of_unknown(m);
            u.values[i] = Complex64::new(eig.eigenvectors[(m, 3)] / libm::sqrt(g.measure[i]), 0.0);
        }
        let st = Stepper::new(&g, &cfg).unwrap();
        let next = st.step(&u, 1).unwrap().next;
        let h = Complex64::new(0.0, 0.5 * lam * cfg.dt);
        let factor = (Complex64::new(1.0, 0.0) - h) / (Complex64::new(1.0, 0.0) + h);
        for i in 0..g.len() {
            assert!((next.values[i] - u.values[i] * factor).norm() < 1e-12);
        }
    }

    #[test]
    fn p_must_be_subcritical() {
        let g = radial_grid(20);
        let mut cfg = SolverConfig::new(0.01, 0.1);
        cfg.p = 6.0;
        match Stepper::new(&g, &cfg) {
            Err(Error::Config(msg)) => assert!(msg.contains("(n+2)/(n-2) = 5"), "{msg}"),
            _ => panic!("expected config error"),
        }
    }

    #[test]
    fn large_data_reports_step_error() {
        let g = radial_grid(50);
        let mut cfg = SolverConfig::new(0.5, 1.0);
        cfg.max_iterations = 3;
        let u0 =
            make_initial_data(&InitialData::Gaussian { center: 8.0, width: 1.0, amplitude: 20.0, k: 0.0 }, &g).unwrap();
        match run_simulation(&g, &cfg, u0) {
            Err(Error::Step { step, residual, .. }) => assert!(step == 1 && residual > cfg.tolerance),
            other => panic!("expected step error, got {other:?}"),
        }
    }
}
