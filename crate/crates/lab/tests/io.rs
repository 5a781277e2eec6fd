use morawetz_core::functionals::DiagnosticsSeries;
use morawetz_core::grid::{make_initial_data, Grid, InitialData};
use morawetz_core::metric::{RadialMetricParams, WarpedProfile};
use morawetz_lab::io::{
    diagnostics_csv, parse_snapshot, read_diagnostics_csv, snapshot_bytes, write_series, CSV_HEADER,
};
use num_complex::Complex64;
use proptest::prelude::*;

#[test]
fn empty_series_gives_header_only() {
    let bytes = diagnostics_csv(&DiagnosticsSeries::default()).unwrap();
    assert_eq!(String::from_utf8(bytes).unwrap(), format!("{}\n", CSV_HEADER.join(",")));
}

#[test]
fn csv_round_trips_values() {
    use morawetz_core::solver::{run_simulation, SolverConfig};
    let g = Grid::radial(RadialMetricParams::flat(3), 1.0, 6.0, 60).unwrap();
    let data = InitialData::Gaussian { center: 3.0, width: 0.5, amplitude: 1.0, k: 0.0 };
    let out = run_simulation(&g, &SolverConfig::new(0.05, 0.5), make_initial_data(&data, &g).unwrap()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let files = write_series(dir.path(), "x", &out.series, true, true).unwrap();
    assert_eq!(files.len(), 3);
    let (header, rows) = read_diagnostics_csv(&files[0]).unwrap();
    assert_eq!(header, CSV_HEADER);
    assert_eq!(rows.len(), out.series.len());
    for (row, rec) in rows.iter().zip(&out.series.records) {
        assert_eq!(row[0], rec.t);
        assert_eq!(row[2], rec.obs.energy);
    }
}

#[test]
fn snapshot_rejects_bad_input() {
    assert!(parse_snapshot(b"nope").is_err());
    let g = Grid::radial(RadialMetricParams::flat(2), 1.0, 2.0, 4).unwrap();
    let mut b = snapshot_bytes(&g, &morawetz_core::grid::FieldState::zeros(&g));
    b.pop();
    assert!(parse_snapshot(&b).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn snapshot_round_trip(j in 3usize..30, k in 3usize..8, t in 0.0..100.0f64, seed in any::<u64>()) {
        let g = Grid::warped(WarpedProfile::Euclidean, 1.0, 3.0, j, k).unwrap();
        let mut state = morawetz_core::grid::FieldState::zeros(&g);
        state.t = t;
        for (i, z) in state.values.iter_mut().enumerate() {
            let x = (seed.wrapping_mul(i as u64 + 1) % 1000) as f64 / 7.0;
            *z = Complex64::new(x, -x / 3.0);
        }
        let snap = parse_snapshot(&snapshot_bytes(&g, &state)).unwrap();
        prop_assert_eq!(snap.j, j as u64);
        prop_assert_eq!(snap.k, k as u64);
        prop_assert_eq!(snap.t, t);
        prop_assert_eq!(snap.values.len(), (j + 1) * k);
        for (a, b) in snap.values.iter().zip(&state.values) {
            prop_assert_eq!(*a, (b.re, b.im));
        }
    }
}
