mod common;

use std::f64::consts::PI;

use common::{bessel_j, bessel_zero, spherical_j1_zero};
use drift_spectra::sturm_liouville::{derivative_identity_error, integrated_equation_residual};
use drift_spectra::*;
use proptest::prelude::*;

fn opts() -> SolverOptions {
    SolverOptions::default()
}

#[test]
fn bessel_oracle_reproduces_known_zero() {
    assert!((bessel_zero(0, 1) - 2.404_825_557_695_773).abs() < 1e-12);
    assert!(bessel_j(0, bessel_zero(0, 2)).abs() < 1e-13);
}

#[test]
fn disk_modes_match_bessel_zeros() {
    let ball = ModelBall::euclidean(2, 1.0).unwrap();
    for (k, s) in [(0u32, 1usize), (1, 1), (2, 1), (0, 2), (3, 1)] {
        let modes = solve_radial_modes(&ball, k as usize, s, &opts()).unwrap();
        let j = bessel_zero(k, s);
        assert!((modes[s - 1].lambda - j * j).abs() < 1e-7, "k={k} s={s}: {} vs {}", modes[s - 1].lambda, j * j);
    }
}

#[test]
fn principal_disk_mode_is_bessel_profile() {
    let ball = ModelBall::euclidean(2, 1.0).unwrap();
    let mode = principal_eigenpair(&ball, &opts()).unwrap();
    let j = bessel_zero(0, 1);
    let scale = mode.samples.values[0];
    for (t, a) in mode.samples.t.iter().zip(&mode.samples.values) {
        assert!((a / scale - bessel_j(0, j * t)).abs() < 1e-7);
    }
}

#[test]
fn three_ball_spectrum_to_cutoff_21() {
    let ball = ModelBall::euclidean(3, 1.0).unwrap();
    let table = assemble_spectrum(&ball, 21.0, &opts()).unwrap();
    assert_eq!(table.entries.len(), 2);
    assert!((table.entries[0].lambda - PI * PI).abs() < 1e-8);
    assert_eq!(table.entries[0].multiplicity, 1);
    let z = spherical_j1_zero();
    assert!((table.entries[1].lambda - z * z).abs() < 1e-7);
    assert_eq!((table.entries[1].k, table.entries[1].multiplicity), (1, 3));
}

#[test]
fn eigenvalues_increase_with_level() {
    let ball = ModelBall::new(3, 1.0, WarpingFunction::space_form(1.0).unwrap(), DriftProfile::linear(1.0)).unwrap();
    for i in 1..=2 {
        let mut prev = 0.0;
        for k in 0..=4 {
            let l = solve_radial_modes(&ball, k, i, &opts()).unwrap()[i - 1].lambda;
            assert!(l > prev, "k={k} i={i}");
            prev = l;
        }
    }
}

#[test]
fn level_zero_modes_satisfy_integrated_equation_and_energy_identity() {
    for (m, kappa, c) in [(2, 0.0, 0.0), (3, -1.0, 1.0), (4, 1.0, 0.5)] {
        let ball = ModelBall::new(m, 1.0, WarpingFunction::space_form(kappa).unwrap(), DriftProfile::linear(c)).unwrap();
        for mode in solve_radial_modes(&ball, 0, 3, &opts()).unwrap() {
            assert!(integrated_equation_residual(&mode, &ball) < 1e-6, "m={m}");
            assert!(derivative_identity_error(&mode, &ball) < 1e-5, "m={m}");
        }
    }
}

#[test]
fn same_level_modes_are_weighted_orthogonal() {
    let ball = ModelBall::new(3, 1.0, WarpingFunction::space_form(-1.0).unwrap(), DriftProfile::linear(2.0)).unwrap();
    for k in [0, 2] {
        let modes = solve_radial_modes(&ball, k, 3, &opts()).unwrap();
        for a in &modes {
            for b in &modes {
                let ip = weighted_inner_product(&a.samples, &b.samples, &ball).unwrap();
                let expect = if a.i == b.i { 1.0 } else { 0.0 };
                assert!((ip - expect).abs() < 1e-8, "k={k} ({},{}) {ip}", a.i, b.i);
            }
        }
    }
}

#[test]
fn eigenvalue_error_decays_at_fourth_order() {
    let ball = ModelBall::euclidean(3, 1.0).unwrap();
    let ns = [48usize, 96, 192];
    let errs: Vec<f64> = ns
        .iter()
        .map(|&n| {
            let o = SolverOptions { n_t: n, tol: 1e-12 };
            (principal_eigenpair(&ball, &o).unwrap().lambda - PI * PI).abs()
        })
        .collect();
    let xs: Vec<f64> = ns.iter().map(|n| (1.0 / *n as f64).ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / 3.0, ys.iter().sum::<f64>() / 3.0);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    assert!(slope >= 3.5, "observed order {slope}, errors {errs:?}");
}

#[test]
fn spectrum_csv_has_twelve_digit_rows() {
    let ball = ModelBall::euclidean(2, 1.0).unwrap();
    let csv = assemble_spectrum(&ball, 15.0, &opts()).unwrap().to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "lambda,k,i,multiplicity");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("5.78318596"));
    assert!(lines[2].ends_with(",1,1,2"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn principal_mode_sign_profile_holds(m in 2usize..5, kappa in -1.0f64..1.0, c in 0.0f64..2.0, r0 in 0.5f64..1.5) {
        let ball = ModelBall::new(m, r0, WarpingFunction::space_form(kappa).unwrap(), DriftProfile::linear(c)).unwrap();
        let mode = principal_eigenpair(&ball, &SolverOptions { n_t: 256, tol: 1e-8 }).unwrap();
        prop_assert!(mode.lambda > 0.0);
        prop_assert!(mode.residual < 1e-8);
        prop_assert_eq!(mode.sign_changes(), 0);
    }
}
