//! Computational grids on the annulus `r_in <= r <= r_out`.
//!
//! Both grids store node values `u[j*K + k]` for `j = 0..=J` radial nodes and
//! `k = 0..K` angular nodes (`K = 1` for the radial reduction). The discrete
//! Laplace-Beltrami operator is written edge by edge,
//!
//! ```text
//! (L u)_i = (1 / mu_i) sum_{edges e = (i, i')} c_e (u_i' - u_i),
//! ```
//!
//! with `mu_i` the node measure and `c_e = flux_e * cell / h_e^2`, which makes
//! `L` self-adjoint in the `mu`-weighted inner product.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::BandedMatrix;
use crate::metric::{RadialMetricParams, WarpedProfile};

#[derive(Debug, Clone, PartialEq)]
pub enum GridKind {
    /// Radial functions on a metric with `G x/|x| = x/|x|`, `det G = c0 r^d`.
    Radial(RadialMetricParams),
    /// Two-dimensional warped product `dr^2 + gamma(r, theta) dtheta^2`.
    Warped(WarpedProfile),
}

/// An edge between two node indices with its stiffness `c_e`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub coef: f64,
    /// `true` for edges along the angular direction.
    pub angular: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub kind: GridKind,
    pub r_in: f64,
    pub r_out: f64,
    /// Number of radial intervals; nodes are `0..=j_intervals`.
    pub j_intervals: usize,
    /// Angular nodes (1 for radial grids).
    pub k_nodes: usize,
    pub dr: f64,
    pub dtheta: f64,
    pub radii: Vec<f64>,
    /// Node measure `mu_i` (density times cell size).
    pub measure: Vec<f64>,
    /// Trapezoid quadrature weights: `measure` halved on the boundary rows.
    pub quadrature: Vec<f64>,
    pub edges: Vec<Edge>,
}

impl Grid {
    /// Radial grid with `j_intervals` intervals; node weight
    /// `w(r) = sqrt(c0) |S^{n-1}| r^(n-1+d/2)`.
    pub fn radial(params: RadialMetricParams, r_in: f64, r_out: f64, j_intervals: usize) -> Result<Self> {
        check_radii(r_in, r_out, j_intervals)?;
        let dr = (r_out - r_in) / j_intervals as f64;
        let radii: Vec<f64> = (0..=j_intervals).map(|j| r_in + dr * j as f64).collect();
        let density: Vec<f64> = radii.iter().map(|&r| params.sphere_weight(r)).collect();
        let mut edges = Vec::with_capacity(j_intervals);
        for j in 0..j_intervals {
            let flux = params.sphere_weight(r_in + dr * (j as f64 + 0.5));
            edges.push(Edge { a: j, b: j + 1, coef: flux / dr, angular: false });
        }
        Self::assemble(GridKind::Radial(params), r_in, r_out, j_intervals, 1, dr, 1.0, radii, density, edges, dr)
    }

    /// Warped `(r, theta)` grid with `k_nodes` periodic angular nodes.
    pub fn warped(profile: WarpedProfile, r_in: f64, r_out: f64, j_intervals: usize, k_nodes: usize) -> Result<Self> {
        check_radii(r_in, r_out, j_intervals)?;
        profile.validate().map_err(|e| Error::Grid(format!("{e}")))?;
        if k_nodes < 3 {
            return Err(Error::Grid(format!("warped grid needs at least 3 angular nodes, got {k_nodes}")));
        }
        let dr = (r_out - r_in) / j_intervals as f64;
        let dtheta = 2.0 * PI / k_nodes as f64;
        let cell = dr * dtheta;
        let radii: Vec<f64> = (0..=j_intervals).map(|j| r_in + dr * j as f64).collect();
        let sqrt_gamma = |r: f64, th: f64| libm::sqrt(profile.gamma(r, th).0);
        let mut density = Vec::with_capacity((j_intervals + 1) * k_nodes);
        for &r in &radii {
            for k in 0..k_nodes {
                density.push(sqrt_gamma(r, dtheta * k as f64));
            }
        }
        let mut edges = Vec::new();
        for j in 0..j_intervals {
            let rm = r_in + dr * (j as f64 + 0.5);
            for k in 0..k_nodes {
                let flux = sqrt_gamma(rm, dtheta * k as f64);
                edges.push(Edge {
                    a: j * k_nodes + k,
                    b: (j + 1) * k_nodes + k,
                    coef: flux * cell / (dr * dr),
                    angular: false,
                });
            }
        }
        for (j, &r) in radii.iter().enumerate() {
            for k in 0..k_nodes {
                let flux = 1.0 / sqrt_gamma(r, dtheta * (k as f64 + 0.5));
                let b = j * k_nodes + (k + 1) % k_nodes;
                edges.push(Edge { a: j * k_nodes + k, b, coef: flux * cell / (dtheta * dtheta), angular: true });
            }
        }
        Self::assemble(
            GridKind::Warped(profile),
            r_in,
            r_out,
            j_intervals,
            k_nodes,
            dr,
            dtheta,
            radii,
            density,
            edges,
            cell,
        )
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        kind: GridKind,
        r_in: f64,
        r_out: f64,
        j_intervals: usize,
        k_nodes: usize,
        dr: f64,
        dtheta: f64,
        radii: Vec<f64>,
        density: Vec<f64>,
        edges: Vec<Edge>,
        cell: f64,
    ) -> Result<Self> {
        if let Some(bad) = density.iter().position(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::Grid(format!("non-positive node weight {} at node {bad}", density[bad])));
        }
        if edges.iter().any(|e| !(e.coef > 0.0) || !e.coef.is_finite()) {
            return Err(Error::Grid("non-positive flux coefficient".into()));
        }
        let measure: Vec<f64> = density.iter().map(|w| w * cell).collect();
        let mut quadrature = measure.clone();
        for k in 0..k_nodes {
            quadrature[k] *= 0.5;
            quadrature[j_intervals * k_nodes + k] *= 0.5;
        }
        Ok(Self { kind, r_in, r_out, j_intervals, k_nodes, dr, dtheta, radii, measure, quadrature, edges })
    }

    pub fn len(&self) -> usize {
        (self.j_intervals + 1) * self.k_nodes
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, j: usize, k: usize) -> usize {
        j * self.k_nodes + k
    }

    pub fn radius_of(&self, i: usize) -> f64 {
        self.radii[i / self.k_nodes]
    }

    pub fn theta_of(&self, i: usize) -> f64 {
        (i % self.k_nodes) as f64 * self.dtheta
    }

    pub fn is_boundary(&self, i: usize) -> bool {
        let j = i / self.k_nodes;
        j == 0 || j == self.j_intervals
    }

    /// Effective dimension of the radial reduction (`n + d/2`); 2 for warped grids.
    pub fn dimension(&self) -> usize {
        match &self.kind {
            GridKind::Radial(p) => p.n,
            GridKind::Warped(_) => 2,
        }
    }

    pub fn is_radial(&self) -> bool {
        matches!(self.kind, GridKind::Radial(_))
    }

    /// Number of unknowns (interior nodes).
    pub fn unknowns(&self) -> usize {
        (self.j_intervals - 1) * self.k_nodes
    }

    /// Node index of interior unknown `m`.
    pub fn node_of_unknown(&self, m: usize) -> usize {
        m + self.k_nodes
    }

    /// `L u` at every node; boundary rows use the same stencil with the
    /// missing outer neighbour dropped.
    pub fn apply(&self, u: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); u.len()];
        for e in &self.edges {
            let d = (u[e.b] - u[e.a]) * e.coef;
            out[e.a] += d;
            out[e.b] -= d;
        }
        for (o, mu) in out.iter_mut().zip(&self.measure) {
            *o /= *mu;
        }
        out
    }

    /// Real version of [`Grid::apply`].
    pub fn apply_real(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        for e in &self.edges {
            let d = (u[e.b] - u[e.a]) * e.coef;
            out[e.a] += d;
            out[e.b] -= d;
        }
        for (o, mu) in out.iter_mut().zip(&self.measure) {
            *o /= *mu;
        }
        out
    }

    /// `<u, v>` in the quadrature inner product, conjugate-linear in `u`.
    pub fn inner(&self, u: &[Complex64], v: &[Complex64]) -> Complex64 {
        u.iter().zip(v).zip(&self.quadrature).map(|((a, b), q)| a.conj() * b * *q).sum()
    }

    pub fn norm(&self, u: &[Complex64]) -> f64 {
        libm::sqrt(u.iter().zip(&self.quadrature).map(|(a, q)| a.norm_sqr() * q).sum())
    }

    /// Banded matrix of `diag(shift) - i L` restricted to the interior unknowns.
    pub fn implicit_matrix(&self, shift: &[f64]) -> BandedMatrix {
        let bw = if self.k_nodes == 1 { 1 } else { self.k_nodes };
        let n = self.unknowns();
        let mut m = BandedMatrix::zeros(n, bw, bw);
        for row in 0..n {
            m.add(row, row, Complex64::new(shift[self.node_of_unknown(row)], 0.0));
        }
        let i = Complex64::new(0.0, 1.0);
        for e in &self.edges {
            for (p, q) in [(e.a, e.b), (e.b, e.a)] {
                if self.is_boundary(p) {
                    continue;
                }
                let row = p - self.k_nodes;
                let c = e.coef / self.measure[p];
                // -i L: diagonal gains +i c, neighbour -i c
                m.add(row, row, i * c);
                if !self.is_boundary(q) {
                    m.add(row, q - self.k_nodes, -i * c);
                }
            }
        }
        m
    }
}

fn check_radii(r_in: f64, r_out: f64, j_intervals: usize) -> Result<()> {
    if !(r_in > 0.0) {
        return Err(Error::Grid(format!("grid.r_in must be > 0, got {r_in}")));
    }
    if !(r_out > r_in) {
        return Err(Error::Grid(format!("grid.r_out must exceed r_in = {r_in}, got {r_out}")));
    }
    if j_intervals < 3 {
        return Err(Error::Grid(format!("grid.nodes must be >= 3, got {j_intervals}")));
    }
    Ok(())
}

/// Complex samples on a grid at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub values: Vec<Complex64>,
    pub t: f64,
}

impl FieldState {
    pub fn zeros(grid: &Grid) -> Self {
        Self { values: vec![Complex64::new(0.0, 0.0); grid.len()], t: 0.0 }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { values: self.values.iter().map(|z| z * s).collect(), t: self.t }
    }

    /// Zeroes the Dirichlet rows.
    pub fn enforce_boundary(&mut self, grid: &Grid) {
        for k in 0..grid.k_nodes {
            self.values[grid.index(0, k)] = Complex64::new(0.0, 0.0);
            self.values[grid.index(grid.j_intervals, k)] = Complex64::new(0.0, 0.0);
        }
    }
}

/// Initial data descriptors.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    Zero,
    /// `A exp(-(r - center)^2 / (2 width^2)) exp(i k r)`.
    Gaussian {
        center: f64,
        width: f64,
        amplitude: f64,
        k: f64,
    },
    /// Gaussian times `exp(i mode theta)`; warped grids only unless `mode = 0`.
    Ring {
        center: f64,
        width: f64,
        amplitude: f64,
        k: f64,
        mode: i32,
    },
    /// Explicit node values in storage order.
    Samples(Vec<Complex64>),
}

pub fn make_initial_data(descriptor: &InitialData, grid: &Grid) -> Result<FieldState> {
    let gaussian = |r: f64, center: f64, width: f64, amplitude: f64, k: f64| {
        let s = (r - center) / width;
        Complex64::from_polar(amplitude * libm::exp(-0.5 * s * s), k * r)
    };
    let check_width = |w: f64| {
        if w > 0.0 {
            Ok(())
        } else {
            Err(Error::Config(format!("initial.width must be > 0, got {w}")))
        }
    };
    let mut state = FieldState::zeros(grid);
    match descriptor {
        InitialData::Zero => {}
        InitialData::Gaussian { center, width, amplitude, k } => {
            check_width(*width)?;
            for (i, z) in state.values.iter_mut().enumerate() {
                *z = gaussian(grid.radius_of(i), *center, *width, *amplitude, *k);
            }
        }
        InitialData::Ring { center, width, amplitude, k, mode } => {
            check_width(*width)?;
            if *mode != 0 && grid.is_radial() {
                return Err(Error::Config(format!("initial.mode = {mode} needs an angular grid")));
            }
            for (i, z) in state.values.iter_mut().enumerate() {
                let phase = Complex64::from_polar(1.0, *mode as f64 * grid.theta_of(i));
                *z = gaussian(grid.radius_of(i), *center, *width, *amplitude, *k) * phase;
            }
        }
        InitialData::Samples(values) => {
            if values.len() != grid.len() {
                return Err(Error::Config(format!(
                    "initial.values has {} entries, grid has {} nodes",
                    values.len(),
                    grid.len()
                )));
            }
            state.values.clone_from(values);
        }
    }
    if !state.is_finite() {
        return Err(Error::Config("initial data is not finite".into()));
    }
    state.enforce_boundary(grid);
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn flat_weights_are_sphere_areas() {
        let g = Grid::radial(RadialMetricParams::flat(3), 1.0, 2.0, 10).unwrap();
        assert!((g.measure[0] - 4.0 * PI * 0.1).abs() < 1e-13);
        assert!((g.quadrature[0] - 2.0 * PI * 0.1).abs() < 1e-13);
    }

    #[test]
    fn operator_matches_radial_laplacian() {
        let g = Grid::radial(RadialMetricParams::flat(3), 1.0, 3.0, 400).unwrap();
        let u: Vec<Complex64> = g.radii.iter().map(|r| c(libm::sin(*r), 0.0)).collect();
        let lu = g.apply(&u);
        for j in 1..400 {
            let r = g.radii[j];
            let exact = -libm::sin(r) + 2.0 / r * libm::cos(r);
            assert!((lu[j].re - exact).abs() < 1e-4, "j={j}");
        }
    }

    #[test]
    fn unit_weight_is_second_difference() {
        // n = 1-like weight: n + d/2 - 1 = 0
        let p = RadialMetricParams { n: 2, c0: 1.0, d: -2.0 };
        let g = Grid::radial(p, 1.0, 2.0, 8).unwrap();
        let u: Vec<Complex64> = (0..=8).map(|j| c((j * j) as f64, 0.0)).collect();
        let lu = g.apply(&u);
        let h2 = g.dr * g.dr;
        for j in 1..8 {
            assert!((lu[j].re - 2.0 / h2).abs() < 1e-9);
        }
    }

    #[test]
    fn implicit_matrix_matches_operator() {
        let g = Grid::warped(WarpedProfile::AngularBump { eps: 0.2, mode: 1 }, 1.0, 2.0, 6, 5).unwrap();
        let shift = vec![3.0; g.len()];
        let m = g.implicit_matrix(&shift);
        let u: Vec<Complex64> = (0..g.len())
            .map(|i| if g.is_boundary(i) { c(0.0, 0.0) } else { c(i as f64 * 0.1, 1.0 / (1.0 + i as f64)) })
            .collect();
        let interior: Vec<Complex64> = (0..g.unknowns()).map(|m| u[g.node_of_unknown(m)]).collect();
        let got = m.mul_vec(&interior);
        let lu = g.apply(&u);
        for (row, z) in got.iter().enumerate() {
            let i = g.node_of_unknown(row);
            let want = u[i] * 3.0 - Complex64::new(0.0, 1.0) * lu[i];
            assert!((z - want).norm() < 1e-12);
        }
    }

    #[test]
    fn initial_data_validation() {
        let g = Grid::radial(RadialMetricParams::flat(3), 1.0, 5.0, 20).unwrap();
        assert!(make_initial_data(&InitialData::Samples(vec![c(1.0, 0.0); 3]), &g).is_err());
        let ring = InitialData::Ring { center: 2.0, width: 0.5, amplitude: 1.0, k: 0.0, mode: 2 };
        assert!(matches!(make_initial_data(&ring, &g), Err(Error::Config(_))));
        let s =
            make_initial_data(&InitialData::Gaussian { center: 1.0, width: 0.5, amplitude: 1.0, k: 0.0 }, &g).unwrap();
        assert_eq!(s.values[0], c(0.0, 0.0));
    }

    #[test]
    fn bad_grids_are_rejected() {
        assert!(matches!(Grid::radial(RadialMetricParams::flat(3), 0.0, 1.0, 10), Err(Error::Grid(_))));
        assert!(matches!(Grid::radial(RadialMetricParams::flat(3), 2.0, 1.0, 10), Err(Error::Grid(_))));
        assert!(matches!(Grid::warped(WarpedProfile::Euclidean, 1.0, 2.0, 10, 2), Err(Error::Grid(_))));
    }
}
