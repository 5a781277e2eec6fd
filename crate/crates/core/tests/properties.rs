use morawetz_core::assumptions::{check_appendix_condition, check_assumption_a, ShellSampler, Verdict};
use morawetz_core::damping::DampingProfile;
use morawetz_core::decay::{fit_exponential_rate, FitWindow};
use morawetz_core::functionals::{kinetic, mass, power_sum, Observables, Physics};
use morawetz_core::grid::{FieldState, Grid};
use morawetz_core::metric::{MetricField, RadialMetricParams, WarpedProfile};
use num_complex::Complex64;
use proptest::prelude::*;

fn samples() -> Vec<Vec<f64>> {
    ShellSampler::new(3, 1.0, 3.0).with_density(4, 8).points().unwrap()
}

fn field_strategy() -> impl Strategy<Value = MetricField> {
    prop_oneof![
        Just(MetricField::Flat { n: 3 }),
        (0.2..3.0f64).prop_map(|m| MetricField::Example21 { n: 3, m, d1: 0.5 }),
        (-0.5..1.5f64).prop_map(|k| MetricField::RadialPower { n: 3, k }),
    ]
}

fn radial_grid() -> Grid {
    Grid::radial(RadialMetricParams::new(3, 1.0, 1.0).unwrap(), 1.0, 4.0, 24).unwrap()
}

fn warped_grid() -> Grid {
    Grid::warped(WarpedProfile::AngularBump { eps: 0.3, mode: 2 }, 1.0, 3.0, 10, 12).unwrap()
}

/// Random field vanishing on the Dirichlet rows.
fn state(grid: &Grid, raw: &[(f64, f64)]) -> Vec<Complex64> {
    (0..grid.len())
        .map(|i| {
            if grid.is_boundary(i) {
                Complex64::new(0.0, 0.0)
            } else {
                let (a, b) = raw[i % raw.len()];
                Complex64::new(a, b)
            }
        })
        .collect()
}

fn raw_values() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 8..64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn smaller_alpha_never_worsens_verdict(field in field_strategy(), alpha in 0.0..2.5f64, shrink in 0.0..1.0f64) {
        let s = samples();
        let none = DampingProfile::none();
        let hi = check_assumption_a(&field, &s, |_| alpha, &none).unwrap();
        let lo = check_assumption_a(&field, &s, |_| alpha * shrink, &none).unwrap();
        let tangent = |r: &morawetz_core::assumptions::AssumptionReport| r.condition("tangent-inequality").unwrap().verdict;
        prop_assert!(tangent(&lo) >= tangent(&hi));
    }

    #[test]
    fn smaller_delta_never_worsens_verdict(field in field_strategy(), delta in 0.05..1.0f64, shrink in 0.05..1.0f64) {
        let s = samples();
        let hi = check_appendix_condition(&field, &s, delta).unwrap();
        let lo = check_appendix_condition(&field, &s, delta * shrink).unwrap();
        let full = |r: &morawetz_core::assumptions::AssumptionReport| r.condition("full-vector-inequality").unwrap().verdict;
        prop_assert!(full(&lo) >= full(&hi));
        if hi.verdict.passed() {
            prop_assert!(lo.verdict != Verdict::Fails);
        }
    }

    #[test]
    fn operator_is_symmetric_and_nonpositive(a in raw_values(), b in raw_values(), warped in any::<bool>()) {
        let g = if warped { warped_grid() } else { radial_grid() };
        let u = state(&g, &a);
        let v = state(&g, &b);
        let luv = g.inner(&g.apply(&u), &v);
        let ulv = g.inner(&u, &g.apply(&v));
        let scale = 1.0 + luv.norm();
        prop_assert!((luv - ulv).norm() < 1e-11 * scale);
        let luu = g.inner(&g.apply(&u), &u);
        prop_assert!(luu.re <= 1e-12 * (1.0 + luu.norm()));
        prop_assert!((luu.re + kinetic(&g, &u)).abs() < 1e-10 * (1.0 + luu.re.abs()));
    }

    #[test]
    fn functionals_scale(a in raw_values(), lambda in 0.1..5.0f64, p in 1.5..4.5f64, warped in any::<bool>()) {
        let g = if warped { warped_grid() } else { radial_grid() };
        let u = state(&g, &a);
        let lu: Vec<Complex64> = u.iter().map(|z| z * lambda).collect();
        let rel = |x: f64, y: f64| (x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(f64::MIN_POSITIVE);
        prop_assert!(rel(mass(&g, &lu), lambda * lambda * mass(&g, &u)));
        prop_assert!(rel(kinetic(&g, &lu), lambda * lambda * kinetic(&g, &u)));
        prop_assert!(rel(power_sum(&g, &lu, p), lambda.powf(p + 1.0) * power_sum(&g, &u, p)));
    }

    #[test]
    fn quadratures_add_over_disjoint_supports(a in raw_values(), split in 2usize..20) {
        let g = radial_grid();
        let phys = Physics::new(&g, &DampingProfile::smoothstep(1.0, 3.0, 0.5), 3.0, true, 1.0);
        let u = state(&g, &a);
        // leave a gap of two nodes so no edge couples the pieces
        let lo: Vec<Complex64> = u.iter().enumerate().map(|(i, z)| if i < split { *z } else { Complex64::new(0.0, 0.0) }).collect();
        let hi: Vec<Complex64> = u.iter().enumerate().map(|(i, z)| if i > split + 1 { *z } else { Complex64::new(0.0, 0.0) }).collect();
        let sum: Vec<Complex64> = lo.iter().zip(&hi).map(|(x, y)| x + y).collect();
        let (a, b, c) = (
            Observables::compute(&g, &phys, &lo),
            Observables::compute(&g, &phys, &hi),
            Observables::compute(&g, &phys, &sum),
        );
        for (x, y, z) in [
            (a.mass, b.mass, c.mass),
            (a.energy, b.energy, c.energy),
            (a.kinetic, b.kinetic, c.kinetic),
            (a.potential, b.potential, c.potential),
            (a.morawetz_p1, b.morawetz_p1, c.morawetz_p1),
            (a.morawetz_r3, b.morawetz_r3, c.morawetz_r3),
            (a.damping_work, b.damping_work, c.damping_work),
        ] {
            prop_assert!((x + y - z).abs() <= 1e-12 * (1.0 + z.abs()));
        }
    }

    #[test]
    fn fit_is_scale_invariant(rate in 0.01..2.0f64, noise in prop::collection::vec(-0.05..0.05f64, 50), s in 1e-6..1e6f64) {
        let t: Vec<f64> = (0..50).map(|i| i as f64 * 0.2).collect();
        let e: Vec<f64> = t.iter().zip(&noise).map(|(t, n)| (-rate * t + n).exp()).collect();
        let es: Vec<f64> = e.iter().map(|x| x * s).collect();
        let f = fit_exponential_rate(&t, &e, FitWindow::default()).unwrap();
        let g = fit_exponential_rate(&t, &es, FitWindow::default()).unwrap();
        prop_assert!((f.slope - g.slope).abs() < 1e-12 * (1.0 + f.slope.abs()));
        prop_assert!((f.c1 - g.c1).abs() < 1e-12 * f.c1);
        prop_assert!((f.r_squared - g.r_squared).abs() < 1e-12);
    }

    #[test]
    fn radial_states_have_no_angular_density(a in raw_values()) {
        // theta-independent data on a warped grid
        let g = Grid::warped(WarpedProfile::Power { c0: 1.0, d: 0.0 }, 1.0, 3.0, 12, 8).unwrap();
        let phys = Physics::new(&g, &DampingProfile::none(), 3.0, true, 0.7);
        let mut s = FieldState::zeros(&g);
        for j in 1..g.j_intervals {
            let (x, y) = a[j % a.len()];
            for k in 0..g.k_nodes {
                s.values[g.index(j, k)] = Complex64::new(x, y);
            }
        }
        prop_assert_eq!(Observables::compute(&g, &phys, &s.values).morawetz_ang, 0.0);
    }
}
