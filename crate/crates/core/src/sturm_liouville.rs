//! Radial eigenproblems on model balls and assembly of the full spectrum.
//!
//! Each sphere level `k` contributes the Sturm–Liouville problem
//! `(p a')' + (lambda - nu_k / rho^2) p a = 0`, `a(r0) = 0`, regular at the
//! origin. Eigenvalues are located by counting the zeros of the shooting
//! solution (Sturm oscillation), then polished by Newton's method.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::geometry::ModelBall;
use crate::output::fmt12;
use crate::quadrature::{cumulative_hermite, simpson};

/// Grid resolution and convergence tolerance for the radial solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverOptions {
    pub n_t: usize,
    pub tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { n_t: 512, tol: 1e-8 }
    }
}

impl SolverOptions {
    fn validate(&self) -> Result<()> {
        if self.n_t < 8 {
            return Err(invalid(format!("n_t must be at least 8, got {}", self.n_t)));
        }
        if !(self.tol > 0.0) {
            return Err(invalid("tol must be positive"));
        }
        Ok(())
    }
}

/// Samples `(t_j, a(t_j))` on the uniform grid `t_j = j r0 / n_t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialSamples {
    pub t: Vec<f64>,
    pub values: Vec<f64>,
}

impl RadialSamples {
    pub fn step(&self) -> f64 {
        self.t[1] - self.t[0]
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,a\n");
        for (t, a) in self.t.iter().zip(&self.values) {
            s.push_str(&format!("{},{}\n", fmt12(*t), fmt12(*a)));
        }
        s
    }
}

/// One eigenpair `(lambda_{k,i}, a_{k,i})` of the radial problem.
#[derive(Debug, Clone, Serialize)]
pub struct RadialMode {
    pub nu: f64,
    pub k: usize,
    pub i: usize,
    pub lambda: f64,
    pub samples: RadialSamples,
    /// `a'(t_j)` on the same grid.
    pub derivative: Vec<f64>,
    /// Weighted L2 norm after normalization.
    pub norm: f64,
    /// `|a(r0)| / max|a|`.
    pub residual: f64,
}

impl RadialMode {
    /// Cubic Hermite interpolation of the mode at `t` in `[0, r0]`.
    pub fn value_at(&self, t: f64) -> f64 {
        hermite(&self.samples.t, &self.samples.values, &self.derivative, t).0
    }

    /// Interpolated `(a, a')` at `t`.
    pub fn value_and_derivative_at(&self, t: f64) -> (f64, f64) {
        hermite(&self.samples.t, &self.samples.values, &self.derivative, t)
    }

    /// Number of sign changes strictly inside `(0, r0)`.
    pub fn sign_changes(&self) -> usize {
        let v = &self.samples.values;
        let n = v.len() - 1;
        let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let mut last = 0.0;
        let mut count = 0;
        for x in &v[1..n] {
            if x.abs() < 1e-12 * scale {
                continue;
            }
            if last != 0.0 && x.signum() != last {
                count += 1;
            }
            last = x.signum();
        }
        count
    }
}

pub(crate) fn hermite(t: &[f64], v: &[f64], d: &[f64], x: f64) -> (f64, f64) {
    let n = t.len() - 1;
    let h = t[1] - t[0];
    let j = ((x - t[0]) / h).floor().clamp(0.0, (n - 1) as f64) as usize;
    let s = (x - t[j]) / h;
    let (s2, s3) = (s * s, s * s * s);
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    let val = h00 * v[j] + h10 * h * d[j] + h01 * v[j + 1] + h11 * h * d[j + 1];
    let dh00 = 6.0 * s2 - 6.0 * s;
    let dh10 = 3.0 * s2 - 4.0 * s + 1.0;
    let dh01 = -6.0 * s2 + 6.0 * s;
    let dh11 = 3.0 * s2 - 2.0 * s;
    let der = (dh00 * v[j] + dh01 * v[j + 1]) / h + dh10 * d[j] + dh11 * d[j + 1];
    (val, der)
}

/// Sphere eigenvalue `nu_k = k(k+m-2)` of `S^(m-1)` and its multiplicity.
pub fn sphere_eigenvalue(k: usize, m: usize) -> (f64, u64) {
    let nu = (k * (k + m - 2)) as f64;
    if k == 0 {
        return (nu, 1);
    }
    // harmonic polynomials of degree k in m variables
    let mult = binomial(k + m - 1, k) - if k >= 2 { binomial(k + m - 3, k - 2) } else { 0 };
    (nu, mult as u64)
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for j in 0..k {
        c = c * (n - j) as u128 / (j + 1) as u128;
    }
    c
}

/// Nonnegative root of the indicial equation `alpha(alpha + m - 2) = nu`.
pub fn frobenius_exponent(nu: f64, m: usize) -> f64 {
    let b = m as f64 - 2.0;
    0.5 * (-b + (b * b + 4.0 * nu).sqrt())
}

struct Shot {
    a_end: f64,
    ap_end: f64,
    zeros: usize,
    values: Vec<f64>,
    derivs: Vec<f64>,
}

struct Shooter<'a> {
    ball: &'a ModelBall,
    nu: f64,
    alpha: f64,
    n: usize,
}

const RESCALE_ABOVE: f64 = 1e100;

impl Shooter<'_> {
    fn rhs(&self, lambda: f64, t: f64, y: [f64; 2]) -> [f64; 2] {
        let [r, dr, _] = self.ball.rho.eval(t);
        let h = self.ball.drift.h(t);
        let first = (self.ball.m - 1) as f64 * dr / r - h;
        [y[1], -first * y[1] - (lambda - self.nu / (r * r)) * y[0]]
    }

    fn rk4(&self, lambda: f64, t: f64, dt: f64, y: [f64; 2]) -> [f64; 2] {
        let k1 = self.rhs(lambda, t, y);
        let y2 = [y[0] + 0.5 * dt * k1[0], y[1] + 0.5 * dt * k1[1]];
        let k2 = self.rhs(lambda, t + 0.5 * dt, y2);
        let y3 = [y[0] + 0.5 * dt * k2[0], y[1] + 0.5 * dt * k2[1]];
        let k3 = self.rhs(lambda, t + 0.5 * dt, y3);
        let y4 = [y[0] + dt * k3[0], y[1] + dt * k3[1]];
        let k4 = self.rhs(lambda, t + dt, y4);
        [
            y[0] + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            y[1] + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ]
    }

    /// Integrates from `eps` to `r0`. Near the origin the step is a fixed
    /// fraction of `t`, which keeps the Euler-type singular terms resolved;
    /// that fraction shrinks with the grid step so the global order stays 4.
    fn shoot(&self, lambda: f64, record: bool) -> Result<Shot> {
        let r0 = self.ball.r0;
        let n = self.n;
        let h = r0 / n as f64;
        let eps = 1e-6 * r0;
        let rel = (2.0 / n as f64).min(0.05) / (1.0 + self.alpha);

        let mut y = [1.0, self.alpha / eps];
        let mut zeros = 0usize;
        let mut values = Vec::new();
        let mut derivs = Vec::new();
        if record {
            values.reserve(n + 1);
            derivs.reserve(n + 1);
            values.push(if self.alpha == 0.0 { 1.0 } else { 0.0 });
            let d0 = if self.alpha == 1.0 { y[1] } else { 0.0 };
            derivs.push(d0);
        }

        let mut advance = |y: &mut [f64; 2], t: f64, dt: f64, values: &mut Vec<f64>, derivs: &mut Vec<f64>| -> Result<()> {
            let next = self.rk4(lambda, t, dt, *y);
            if !(next[0].is_finite() && next[1].is_finite()) {
                return Err(Error::StepFailure { t, reason: format!("non-finite state at lambda = {lambda}") });
            }
            if next[0] != 0.0 && y[0] != 0.0 && next[0].signum() != y[0].signum() {
                zeros += 1;
            }
            *y = next;
            if y[0].abs() > RESCALE_ABOVE || y[1].abs() > RESCALE_ABOVE * 1e6 {
                let s = 1.0 / y[0].abs().max(y[1].abs() * 1e-6);
                y[0] *= s;
                y[1] *= s;
                values.iter_mut().for_each(|v| *v *= s);
                derivs.iter_mut().for_each(|v| *v *= s);
            }
            Ok(())
        };

        // geometric steps from eps to the first grid node
        let steps = (((h / eps).ln() / rel.ln_1p()).ceil() as usize).max(1);
        let ratio = (h / eps).powf(1.0 / steps as f64);
        let mut t = eps;
        for s in 0..steps {
            let t_next = if s + 1 == steps { h } else { t * ratio };
            advance(&mut y, t, t_next - t, &mut values, &mut derivs)?;
            t = t_next;
        }
        if record {
            values.push(y[0]);
            derivs.push(y[1]);
        }
        for j in 1..n {
            let tj = j as f64 * h;
            let sub = ((h / (rel * tj)).ceil() as usize).max(1);
            let dt = h / sub as f64;
            for s in 0..sub {
                advance(&mut y, tj + s as f64 * dt, dt, &mut values, &mut derivs)?;
            }
            if record {
                values.push(y[0]);
                derivs.push(y[1]);
            }
        }
        Ok(Shot { a_end: y[0], ap_end: y[1], zeros, values, derivs })
    }
}

fn grid(ball: &ModelBall, n: usize) -> Vec<f64> {
    (0..=n).map(|j| ball.r0 * j as f64 / n as f64).collect()
}

/// Finds the `i`-th eigenvalue for level `nu`, given `lo` with fewer than
/// `i` eigenvalues below it.
fn locate(sh: &Shooter, k: usize, i: usize, lo_start: f64, tol: f64, weights: &[f64]) -> Result<(f64, Shot)> {
    let r0 = sh.ball.r0;
    let mut lo = lo_start;
    let est = (std::f64::consts::PI * (i as f64 + 0.5 * k as f64) / r0).powi(2);
    let mut hi = est.max(1.5 * lo + 1e-9);
    let mut n_hi = sh.shoot(hi, false)?.zeros;
    let mut doublings = 0;
    while n_hi < i {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 60 {
            return Err(Error::WindowExhausted { k, i, lo: lo_start, hi });
        }
        n_hi = sh.shoot(hi, false)?.zeros;
    }
    let mut n_lo = if lo == lo_start { sh.shoot(lo, false)?.zeros } else { i - 1 };
    let mut guard = 0;
    while hi - lo > 1e-3 * hi || n_lo != i - 1 || n_hi != i {
        let mid = 0.5 * (lo + hi);
        let nm = sh.shoot(mid, false)?.zeros;
        if nm >= i {
            hi = mid;
            n_hi = nm;
        } else {
            lo = mid;
            n_lo = nm;
        }
        guard += 1;
        if guard > 200 || hi - lo < 1e-15 * hi {
            break;
        }
    }

    // Newton polish on a(r0; lambda), safeguarded by the bracket.
    let h = r0 / sh.n as f64;
    let f_lo = sh.shoot(lo, false)?.a_end;
    let mut lambda = 0.5 * (lo + hi);
    let mut last_step = f64::INFINITY;
    for _ in 0..80 {
        let shot = sh.shoot(lambda, true)?;
        let amax = shot.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let resid = shot.a_end.abs() / amax;
        let converged_step = last_step.abs() < 1e-12 * lambda;
        if resid < tol && converged_step {
            return Ok((lambda, shot));
        }
        if last_step.abs() < 4e-16 * lambda {
            if resid < tol {
                return Ok((lambda, shot));
            }
            return Err(Error::NoConvergence { iterations: 80, residual: resid });
        }
        if shot.a_end.signum() == f_lo.signum() {
            lo = lambda;
        } else {
            hi = lambda;
        }
        let pa2: Vec<f64> = shot.values.iter().zip(weights).map(|(a, p)| p * a * a).collect();
        let da_dlambda = simpson(&pa2, h) / (weights[sh.n] * shot.ap_end);
        let mut next = lambda - shot.a_end / da_dlambda;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        last_step = next - lambda;
        lambda = next;
    }
    Err(Error::NoConvergence { iterations: 80, residual: f64::NAN })
}

fn finish_mode(ball: &ModelBall, k: usize, i: usize, nu: f64, lambda: f64, shot: Shot, weights: &[f64]) -> RadialMode {
    let n = shot.values.len() - 1;
    let h = ball.r0 / n as f64;
    let pa2: Vec<f64> = shot.values.iter().zip(weights).map(|(a, p)| p * a * a).collect();
    let norm = simpson(&pa2, h).sqrt();
    let values: Vec<f64> = shot.values.iter().map(|v| v / norm).collect();
    let derivative: Vec<f64> = shot.derivs.iter().map(|v| v / norm).collect();
    let amax = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let residual = values[n].abs() / amax;
    let pa2: Vec<f64> = values.iter().zip(weights).map(|(a, p)| p * a * a).collect();
    RadialMode {
        nu,
        k,
        i,
        lambda,
        samples: RadialSamples { t: grid(ball, n), values },
        derivative,
        norm: simpson(&pa2, h).sqrt(),
        residual,
    }
}

/// The first `count` eigenpairs of sphere level `k`, each normalized to
/// unit weighted L2 norm with `a > 0` near the origin.
pub fn solve_radial_modes(ball: &ModelBall, k: usize, count: usize, opts: &SolverOptions) -> Result<Vec<RadialMode>> {
    opts.validate()?;
    if count == 0 {
        return Err(invalid("count must be at least 1"));
    }
    let (nu, _) = sphere_eigenvalue(k, ball.m);
    let mut out = Vec::with_capacity(count);
    let mut lo = 0.0;
    for i in 1..=count {
        let mode = solve_one(ball, k, i, nu, lo, opts).map_err(|e| tag(k, i, e))?;
        lo = mode.lambda * (1.0 + 1e-9);
        out.push(mode);
    }
    Ok(out)
}

fn tag(k: usize, i: usize, e: Error) -> Error {
    match e {
        e @ (Error::WindowExhausted { .. } | Error::Mode { .. }) => e,
        other => Error::Mode { k, i, source: Box::new(other) },
    }
}

fn solve_one(ball: &ModelBall, k: usize, i: usize, nu: f64, lo: f64, opts: &SolverOptions) -> Result<RadialMode> {
    let sh = Shooter { ball, nu, alpha: frobenius_exponent(nu, ball.m), n: opts.n_t };
    let weights: Vec<f64> = grid(ball, opts.n_t).iter().map(|t| ball.weight_p(*t)).collect();
    let (lambda, shot) = locate(&sh, k, i, lo, opts.tol, &weights)?;
    Ok(finish_mode(ball, k, i, nu, lambda, shot, &weights))
}

/// The radial principal eigenpair, with its sign profile checked:
/// `a > 0` on `[0, r0)`, `a' < 0` on `(0, r0]`, `a'(0) = 0`.
pub fn principal_eigenpair(ball: &ModelBall, opts: &SolverOptions) -> Result<RadialMode> {
    let mode = solve_radial_modes(ball, 0, 1, opts)?.remove(0);
    let n = mode.samples.values.len() - 1;
    if let Some(j) = (0..n).find(|&j| mode.samples.values[j] <= 0.0) {
        return Err(Error::SignProfile(format!(
            "principal mode not positive at t = {}",
            mode.samples.t[j]
        )));
    }
    if let Some(j) = (1..=n).find(|&j| mode.derivative[j] >= 0.0) {
        return Err(Error::SignProfile(format!(
            "principal mode not decreasing at t = {}",
            mode.samples.t[j]
        )));
    }
    if mode.derivative[0] != 0.0 {
        return Err(Error::SignProfile("principal mode has nonzero slope at the origin".into()));
    }
    Ok(mode)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumEntry {
    pub lambda: f64,
    pub k: usize,
    pub i: usize,
    pub multiplicity: u64,
}

/// Eigenvalues of the drift Laplacian on a model ball up to a cutoff,
/// sorted by `(lambda, k, i)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumTable {
    pub entries: Vec<SpectrumEntry>,
    pub lambda_cutoff: f64,
}

impl SpectrumTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("lambda,k,i,multiplicity\n");
        for e in &self.entries {
            s.push_str(&format!("{},{},{},{}\n", fmt12(e.lambda), e.k, e.i, e.multiplicity));
        }
        s
    }

    /// Eigenvalues repeated by multiplicity.
    pub fn expanded(&self) -> Vec<f64> {
        self.entries
            .iter()
            .flat_map(|e| std::iter::repeat_n(e.lambda, e.multiplicity as usize))
            .collect()
    }
}

pub fn assemble_spectrum(ball: &ModelBall, lambda_cutoff: f64, opts: &SolverOptions) -> Result<SpectrumTable> {
    opts.validate()?;
    let principal = solve_one(ball, 0, 1, 0.0, 0.0, opts).map_err(|e| tag(0, 1, e))?;
    if lambda_cutoff < principal.lambda {
        return Err(invalid(format!(
            "cutoff {lambda_cutoff} lies below the principal eigenvalue {}",
            principal.lambda
        )));
    }
    let mut entries = Vec::new();
    for k in 0.. {
        let (nu, mult) = sphere_eigenvalue(k, ball.m);
        let mut lo = 0.0;
        let mut found_any = false;
        for i in 1.. {
            let lambda = if k == 0 && i == 1 {
                principal.lambda
            } else {
                solve_one(ball, k, i, nu, lo, opts).map_err(|e| tag(k, i, e))?.lambda
            };
            if lambda > lambda_cutoff {
                break;
            }
            found_any = true;
            entries.push(SpectrumEntry { lambda, k, i, multiplicity: mult });
            lo = lambda * (1.0 + 1e-9);
        }
        if !found_any {
            break;
        }
    }
    entries.sort_by(|a, b| a.lambda.total_cmp(&b.lambda).then(a.k.cmp(&b.k)).then(a.i.cmp(&b.i)));
    Ok(SpectrumTable { entries, lambda_cutoff })
}

/// `int_0^r0 a b p dt` by composite Simpson on the common grid.
pub fn weighted_inner_product(a: &RadialSamples, b: &RadialSamples, ball: &ModelBall) -> Result<f64> {
    if a.t.len() != b.t.len() || a.t.len() < 2 || a.t.iter().zip(&b.t).any(|(x, y)| (x - y).abs() > 1e-14 * (1.0 + x.abs())) {
        return Err(invalid("samples are not on a common grid"));
    }
    if a.values.len() != a.t.len() || b.values.len() != b.t.len() {
        return Err(invalid("sample arrays have inconsistent lengths"));
    }
    let f: Vec<f64> = a
        .t
        .iter()
        .zip(a.values.iter().zip(&b.values))
        .map(|(t, (x, y))| x * y * ball.weight_p(*t))
        .collect();
    Ok(simpson(&f, a.step()))
}

/// Largest value of `|p a' + lambda int_0^t p a|` over the grid, relative to
/// `max |p a'|`; zero for an exact level-0 mode.
pub fn integrated_equation_residual(mode: &RadialMode, ball: &ModelBall) -> f64 {
    let t = &mode.samples.t;
    let a = &mode.samples.values;
    let da = &mode.derivative;
    let h = mode.samples.step();
    let pa: Vec<f64> = t.iter().zip(a).map(|(t, a)| ball.weight_p(*t) * a).collect();
    let dpa: Vec<f64> = (0..t.len())
        .map(|j| ball.weight_p_derivative(t[j]) * a[j] + ball.weight_p(t[j]) * da[j])
        .collect();
    let cum = cumulative_hermite(&pa, &dpa, h);
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for j in 0..t.len() {
        let flux = ball.weight_p(t[j]) * da[j];
        scale = scale.max(flux.abs());
        worst = worst.max((flux + mode.lambda * cum[j]).abs());
    }
    worst / scale
}

/// `| ||a'||_p^2 - lambda ||a||_p^2 | / (lambda ||a||_p^2)` for level-0 modes.
pub fn derivative_identity_error(mode: &RadialMode, ball: &ModelBall) -> f64 {
    let h = mode.samples.step();
    let w: Vec<f64> = mode.samples.t.iter().map(|t| ball.weight_p(*t)).collect();
    let d2: Vec<f64> = mode.derivative.iter().zip(&w).map(|(d, p)| p * d * d).collect();
    let a2: Vec<f64> = mode.samples.values.iter().zip(&w).map(|(a, p)| p * a * a).collect();
    let lhs = simpson(&d2, h);
    let rhs = mode.lambda * simpson(&a2, h);
    (lhs - rhs).abs() / rhs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{DriftProfile, WarpingFunction};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn sphere_levels() {
        assert_eq!(sphere_eigenvalue(0, 5), (0.0, 1));
        assert_eq!(sphere_eigenvalue(1, 2), (1.0, 2));
        assert_eq!(sphere_eigenvalue(4, 2), (16.0, 2));
        assert_eq!(sphere_eigenvalue(2, 3), (6.0, 5));
        assert_eq!(sphere_eigenvalue(1, 4), (3.0, 4));
        assert_eq!(sphere_eigenvalue(2, 4), (8.0, 9));
    }

    #[test]
    fn multiplicity_matches_closed_form() {
        fn fact(n: usize) -> u128 {
            (1..=n as u128).product()
        }
        for m in 3..8 {
            for k in 0..8 {
                let closed = (2 * k + m - 2) as u128 * fact(k + m - 3) / (fact(k) * fact(m - 2));
                assert_eq!(sphere_eigenvalue(k, m).1 as u128, closed, "m={m} k={k}");
            }
        }
    }

    #[test]
    fn indicial_roots() {
        assert_eq!(frobenius_exponent(0.0, 3), 0.0);
        assert_eq!(frobenius_exponent(0.0, 5), 0.0);
        assert_relative_eq!(frobenius_exponent(8.0, 4), 2.0, epsilon = 1e-14);
        for m in 2..7 {
            for k in 0..6 {
                let (nu, _) = sphere_eigenvalue(k, m);
                assert_relative_eq!(frobenius_exponent(nu, m), k as f64, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn three_ball_principal_is_pi_squared() {
        let ball = ModelBall::euclidean(3, 1.0).unwrap();
        let mode = principal_eigenpair(&ball, &SolverOptions::default()).unwrap();
        assert!((mode.lambda - PI * PI).abs() < 1e-8, "{}", mode.lambda);
    }

    #[test]
    fn dilation_scales_eigenvalue() {
        let opts = SolverOptions::default();
        let a = principal_eigenpair(&ModelBall::euclidean(2, 1.0).unwrap(), &opts).unwrap();
        let b = principal_eigenpair(&ModelBall::euclidean(2, 2.0).unwrap(), &opts).unwrap();
        assert_relative_eq!(b.lambda, a.lambda / 4.0, max_relative = 1e-9);
    }

    #[test]
    fn higher_modes_have_interior_zeros() {
        let ball = ModelBall::new(3, 1.2, WarpingFunction::space_form(-1.0).unwrap(), DriftProfile::linear(0.5)).unwrap();
        let modes = solve_radial_modes(&ball, 1, 4, &SolverOptions::default()).unwrap();
        for (idx, m) in modes.iter().enumerate() {
            assert_eq!(m.sign_changes(), idx);
            assert!(m.residual < 1e-8);
            assert_relative_eq!(m.norm, 1.0, epsilon = 1e-12);
        }
        for w in modes.windows(2) {
            assert!(w[0].lambda < w[1].lambda);
        }
    }

    #[test]
    fn cutoff_below_principal_rejected() {
        let ball = ModelBall::euclidean(2, 1.0).unwrap();
        assert!(matches!(assemble_spectrum(&ball, 5.0, &SolverOptions::default()), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn inner_product_closed_form() {
        let ball = ModelBall::euclidean(2, 1.0).unwrap();
        let t: Vec<f64> = (0..=64).map(|j| j as f64 / 64.0).collect();
        let s = RadialSamples { values: t.clone(), t };
        assert_relative_eq!(weighted_inner_product(&s, &s, &ball).unwrap(), 0.25, epsilon = 1e-14);
        let other = RadialSamples { t: (0..=32).map(|j| j as f64 / 32.0).collect(), values: vec![0.0; 33] };
        assert!(weighted_inner_product(&s, &other, &ball).is_err());
    }
}
