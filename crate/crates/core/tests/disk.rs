mod common;

use std::sync::Arc;
use std::time::Instant;

use common::bessel_zero;
use drift_spectra::disk::{principal_and_adjoint, ScalarFn};
use drift_spectra::*;


fn flat(n_t: usize, n_theta: usize, vt: Option<ScalarFn>, vth: Option<ScalarFn>) -> DiskProblem {
    DiskProblem::flat(PolarGrid::new(n_t, n_theta, 1.0).unwrap(), vt, vth).unwrap()
}

#[test]
fn flat_disk_principal_matches_bessel() {
    let j = bessel_zero(0, 1);
    let start = Instant::now();
    let pair = principal_eigenpair_2d(&DiskOperator::new(&flat(256, 128, None, None)), 0.0, 1e-6).unwrap();
    eprintln!("256x128 flat: lambda={} err={:e} in {:?}, {} its", pair.lambda, pair.lambda - j * j, start.elapsed(), pair.iterations);
    assert!((pair.lambda - j * j).abs() < 2e-3);
    assert!(pair.omega.iter().all(|v| *v > 0.0));
}

#[test]
fn flat_disk_converges_at_second_order() {
    let j2 = bessel_zero(0, 1).powi(2);
    let err = |n: usize| {
        let p = principal_eigenpair_2d(&DiskOperator::new(&flat(n, 32, None, None)), 0.0, 1e-9).map_err(|e| e.to_string()).unwrap();
        (p.lambda - j2).abs()
    };
    let (e1, e2) = (err(24), err(48));
    let ratio = e1 / e2;
    eprintln!("errors {e1:e} {e2:e} ratio {ratio}");
    assert!(ratio > 3.0 && ratio < 5.5, "ratio {ratio}");
}

fn radial_1d(c: f64) -> f64 {
    let ball = ModelBall::euclidean(2, 1.0).unwrap().with_drift(DriftProfile::linear(c));
    principal_eigenpair(&ball, &SolverOptions::default()).unwrap().lambda
}

#[test]
fn rotation_field_leaves_principal_pair_unchanged() {
    let base = principal_eigenpair_2d(&DiskOperator::new(&flat(48, 32, None, None)), 0.0, 1e-9).unwrap();
    let rot: ScalarFn = Arc::new(|_, _| 0.5);
    let pair = principal_eigenpair_2d(&DiskOperator::new(&flat(48, 32, None, Some(rot))), 0.0, 1e-9).unwrap();
    assert!((pair.lambda - base.lambda).abs() < 1e-8);
    assert!(pair.angular_std() < 1e-8);
}

#[test]
fn transpose_shares_principal_eigenvalue() {
    let vt: ScalarFn = Arc::new(|t, th| t * (1.0 + 0.3 * th.sin()));
    let vth: ScalarFn = Arc::new(|t, th| 0.4 * t * th.cos());
    let op = DiskOperator::new(&flat(20, 16, Some(vt), Some(vth)));
    let (fwd, adj) = principal_and_adjoint(&op, 1e-12).unwrap();
    assert!((fwd.lambda - adj.lambda).abs() < 1e-10, "{} vs {}", fwd.lambda, adj.lambda);
    assert!(fwd.omega.iter().all(|v| *v > 0.0));
    assert!(adj.omega.iter().all(|v| *v > 0.0));
    let alone = adjoint_principal(&op, 1e-12).unwrap();
    assert!((alone.lambda - adj.lambda).abs() < 1e-12);
}

#[test]
fn zero_drift_adjoint_equals_forward() {
    let metric: drift_spectra::disk::MetricFn = Arc::new(|t, th| {
        let q = 0.1 * t * t * th.cos();
        [t * (1.0 + q), 1.0 + 3.0 * q, 6.0 * q / t]
    });
    let p = DiskProblem::new(PolarGrid::new(24, 16, 1.0).unwrap(), metric, Arc::new(|_, _| 0.0), Arc::new(|_, _| 0.0)).unwrap();
    let (fwd, adj) = principal_and_adjoint(&DiskOperator::new(&p), 1e-11).unwrap();
    for (a, b) in fwd.omega.iter().zip(&adj.omega) {
        assert!((a - b).abs() < 1e-8);
    }
}

#[test]
fn radial_drift_reduces_to_one_dimensional_problem() {
    let vt: ScalarFn = Arc::new(|t, _| t);
    let vth: ScalarFn = Arc::new(|t, _| 0.5 * t);
    let p = flat(128, 64, Some(vt), Some(vth));
    let pair = principal_eigenpair_2d(&DiskOperator::new(&p), 0.0, 1e-8).unwrap();
    let l1 = radial_1d(1.0);
    assert!((pair.lambda - l1).abs() < 5e-3, "{} vs {}", pair.lambda, l1);
    assert!(pair.angular_std() < 1e-3);
    let ball = ModelBall::euclidean(2, 1.0).unwrap().with_drift(DriftProfile::linear(1.0));
    let disk = build_model_disk(&ball, p.grid, None, Some(Arc::new(|t, _| 0.5 * t))).unwrap();
    let pair2 = principal_eigenpair_2d(&DiskOperator::new(&disk), 0.0, 1e-8).unwrap();
    assert!((pair.lambda - pair2.lambda).abs() < 1e-12);
}

#[test]
fn model_disk_construction() {
    let ball = ModelBall::euclidean(2, 1.0).unwrap();
    let g = PolarGrid::new(16, 16, 1.0).unwrap();
    let pert: drift_spectra::disk::MetricFn = Arc::new(|t, th| [0.1 * t * t * th.cos(), 0.2 * t * th.cos(), 0.2 * th.cos()]);
    assert!(build_model_disk(&ball, g, Some(pert), None).is_ok());
    let bad: drift_spectra::disk::MetricFn = Arc::new(|_, th| [-2.0 + th.cos(), 0.0, 0.0]);
    assert!(build_model_disk(&ball, g, Some(bad), None).is_err());
    let b3 = ModelBall::euclidean(3, 1.0).unwrap();
    assert!(build_model_disk(&b3, g, None, None).is_err());
    let pair = principal_eigenpair_2d(&DiskOperator::new(&build_model_disk(&ball, g, None, None).unwrap()), 0.0, 1e-9).unwrap();
    assert!(pair.lambda > 0.0);
    let csv = pair.to_csv();
    assert_eq!(csv.lines().count(), g.len() + 1);
    let json: serde_json::Value = serde_json::from_str(&pair.summary_json()).unwrap();
    assert_eq!(json["grid"]["n_t"], 16);
}
