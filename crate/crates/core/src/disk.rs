//! Drift Laplacians on two-dimensional geodesic disks with metric
//! `dt^2 + J(t, theta)^2 dtheta^2`, and their principal eigenpairs.
//!
//! Unknowns live on rings `t_j = (j + 1/2) dt`, `j = 0..n_t`, with
//! `dt = r0 / (n_t + 1/2)` so that the Dirichlet ring `t = r0` is exactly one
//! step beyond the last unknown ring. The origin is never a node; radial
//! differences across it use the antipodal node on the first ring.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::geometry::ModelBall;
use crate::linalg::{BandedLu, SparseMatrix};
use crate::output::{fmt12, round12};

/// `(t, theta) -> (J, dJ/dt, d2J/dt2)`.
pub type MetricFn = Arc<dyn Fn(f64, f64) -> [f64; 3] + Send + Sync>;
/// A scalar field on the disk.
pub type ScalarFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolarGrid {
    pub n_t: usize,
    pub n_theta: usize,
    pub r0: f64,
}

impl PolarGrid {
    pub fn new(n_t: usize, n_theta: usize, r0: f64) -> Result<Self> {
        if n_t < 2 {
            return Err(invalid(format!("n_t must be at least 2, got {n_t}")));
        }
        if n_theta < 4 || n_theta % 2 != 0 {
            return Err(invalid(format!("n_theta must be even and at least 4, got {n_theta}")));
        }
        if !(r0 > 0.0) {
            return Err(invalid("radius must be positive"));
        }
        Ok(PolarGrid { n_t, n_theta, r0 })
    }

    pub fn dt(&self) -> f64 {
        self.r0 / (self.n_t as f64 + 0.5)
    }

    pub fn dtheta(&self) -> f64 {
        2.0 * PI / self.n_theta as f64
    }

    pub fn t(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.dt()
    }

    pub fn theta(&self, l: usize) -> f64 {
        l as f64 * self.dtheta()
    }

    pub fn len(&self) -> usize {
        self.n_t * self.n_theta
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, j: usize, l: usize) -> usize {
        j * self.n_theta + l
    }

    /// `(t, theta)` of every unknown, in storage order.
    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (0..self.n_t).flat_map(move |j| (0..self.n_theta).map(move |l| (self.t(j), self.theta(l))))
    }

    /// Samples `f` at every unknown.
    pub fn sample(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        self.nodes().map(|(t, th)| f(t, th)).collect()
    }
}

/// Metric and vector field `V = vt d/dt + vtheta d/dtheta` on a disk.
#[derive(Clone)]
pub struct DiskProblem {
    pub grid: PolarGrid,
    metric: MetricFn,
    vt: ScalarFn,
    vtheta: ScalarFn,
    /// First-order upwind differences for the drift instead of centered.
    pub upwind: bool,
}

impl fmt::Debug for DiskProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiskProblem").field("grid", &self.grid).field("upwind", &self.upwind).finish()
    }
}

fn zero_field() -> ScalarFn {
    Arc::new(|_, _| 0.0)
}

impl DiskProblem {
    pub fn new(grid: PolarGrid, metric: MetricFn, vt: ScalarFn, vtheta: ScalarFn) -> Result<Self> {
        let p = DiskProblem { grid, metric, vt, vtheta, upwind: false };
        p.validate()?;
        Ok(p)
    }

    /// Flat disk of radius `r0` (`J = t`) with the given drift components.
    pub fn flat(grid: PolarGrid, vt: Option<ScalarFn>, vtheta: Option<ScalarFn>) -> Result<Self> {
        Self::new(grid, Arc::new(|t, _| [t, 1.0, 0.0]), vt.unwrap_or_else(zero_field), vtheta.unwrap_or_else(zero_field))
    }

    fn validate(&self) -> Result<()> {
        let g = &self.grid;
        let dt = g.dt();
        for j in 0..=g.n_t {
            for half in [0.0, 0.5] {
                let t = g.t(j) - half * dt;
                if t <= 0.0 {
                    continue;
                }
                for l in 0..g.n_theta {
                    for th in [g.theta(l), g.theta(l) + 0.5 * g.dtheta()] {
                        let jv = self.j(t, th);
                        if !(jv > 0.0 && jv.is_finite()) {
                            return Err(invalid(format!("metric coefficient J = {jv} is not positive at (t, theta) = ({t}, {th})")));
                        }
                    }
                }
            }
        }
        let t0 = g.t(0);
        for l in 0..g.n_theta {
            let ratio = self.j(t0, g.theta(l)) / t0;
            if (ratio - 1.0).abs() > 0.05 {
                return Err(invalid(format!("J/t = {ratio} on the first ring; the metric is not polar at the origin")));
            }
        }
        Ok(())
    }

    pub fn j(&self, t: f64, theta: f64) -> f64 {
        (self.metric)(t, theta)[0]
    }

    pub fn metric(&self, t: f64, theta: f64) -> [f64; 3] {
        (self.metric)(t, theta)
    }

    pub fn vt(&self, t: f64, theta: f64) -> f64 {
        (self.vt)(t, theta)
    }

    pub fn vtheta(&self, t: f64, theta: f64) -> f64 {
        (self.vtheta)(t, theta)
    }

    pub fn metric_fn(&self) -> MetricFn {
        self.metric.clone()
    }

    pub fn vt_fn(&self) -> ScalarFn {
        self.vt.clone()
    }

    pub fn vtheta_fn(&self) -> ScalarFn {
        self.vtheta.clone()
    }

    /// Same metric, new drift.
    pub fn with_drift(&self, vt: ScalarFn, vtheta: ScalarFn) -> Self {
        DiskProblem { vt, vtheta, ..self.clone() }
    }

    pub fn without_drift(&self) -> Self {
        self.with_drift(zero_field(), zero_field())
    }

    pub fn with_grid(&self, grid: PolarGrid) -> Result<Self> {
        let p = DiskProblem { grid, ..self.clone() };
        p.validate()?;
        Ok(p)
    }

    /// `|V|^2 = vt^2 + J^2 vtheta^2`.
    pub fn field_norm_sq(&self, t: f64, theta: f64) -> f64 {
        let j = self.j(t, theta);
        let (a, b) = (self.vt(t, theta), self.vtheta(t, theta));
        a * a + j * j * b * b
    }

    /// `div V = (1/J) [d/dt (J vt) + d/dtheta (J vtheta)]`, by centered
    /// differences of the closures.
    pub fn divergence(&self, t: f64, theta: f64) -> f64 {
        let d = 1e-5 * t.max(1e-3);
        let flux_t = |s: f64| self.j(s, theta) * self.vt(s, theta);
        let e = 1e-5;
        let flux_th = |s: f64| self.j(t, s) * self.vtheta(t, s);
        ((flux_t(t + d) - flux_t(t - d)) / (2.0 * d) + (flux_th(theta + e) - flux_th(theta - e)) / (2.0 * e)) / self.j(t, theta)
    }

    /// Volume weights `J dt dtheta` of every unknown.
    pub fn volume_weights(&self) -> Vec<f64> {
        let g = &self.grid;
        let a = g.dt() * g.dtheta();
        g.nodes().map(|(t, th)| self.j(t, th) * a).collect()
    }
}

/// The ring drift coefficient at row `(j, l)` of a first-order term
/// `b_t du/dt + b_theta du/dtheta`, added to `row` with centered or upwind
/// differences.
fn push_first_order(g: &PolarGrid, row: &mut Vec<(usize, f64)>, j: usize, l: usize, bt: f64, bth: f64, upwind: bool) {
    let (n, dt, dth) = (g.n_theta, g.dt(), g.dtheta());
    let me = g.index(j, l);
    let inner = if j == 0 { Some(g.index(0, (l + n / 2) % n)) } else { Some(g.index(j - 1, l)) };
    let outer = if j + 1 < g.n_t { Some(g.index(j + 1, l)) } else { None };
    let left = g.index(j, (l + n - 1) % n);
    let right = g.index(j, (l + 1) % n);
    if upwind {
        if bt > 0.0 {
            row.push((me, bt / dt));
            row.extend(inner.map(|c| (c, -bt / dt)));
        } else {
            row.extend(outer.map(|c| (c, bt / dt)));
            row.push((me, -bt / dt));
        }
        if bth > 0.0 {
            row.push((me, bth / dth));
            row.push((left, -bth / dth));
        } else {
            row.push((right, bth / dth));
            row.push((me, -bth / dth));
        }
    } else {
        row.extend(outer.map(|c| (c, bt / (2.0 * dt))));
        row.extend(inner.map(|c| (c, -bt / (2.0 * dt))));
        row.push((right, bth / (2.0 * dth)));
        row.push((left, -bth / (2.0 * dth)));
    }
}

/// Matrix of `-Delta_V` on the unknowns, Dirichlet at `t = r0`.
pub fn assemble_operator(p: &DiskProblem) -> SparseMatrix {
    let g = &p.grid;
    let (n, dt, dth) = (g.n_theta, g.dt(), g.dtheta());
    let mut rows = Vec::with_capacity(g.len());
    for j in 0..g.n_t {
        let t = g.t(j);
        for l in 0..n {
            let th = g.theta(l);
            let jc = p.j(t, th);
            let me = g.index(j, l);
            let mut row = Vec::with_capacity(9);
            // radial flux; the inner face of the first ring is the origin
            let j_out = p.j(t + 0.5 * dt, th);
            let c_out = j_out / (jc * dt * dt);
            row.push((me, c_out));
            if j + 1 < g.n_t {
                row.push((g.index(j + 1, l), -c_out));
            }
            if j > 0 {
                let c_in = p.j(t - 0.5 * dt, th) / (jc * dt * dt);
                row.push((me, c_in));
                row.push((g.index(j - 1, l), -c_in));
            }
            // angular flux
            let c_r = 1.0 / (jc * p.j(t, th + 0.5 * dth) * dth * dth);
            let c_l = 1.0 / (jc * p.j(t, th - 0.5 * dth) * dth * dth);
            row.push((me, c_r + c_l));
            row.push((g.index(j, (l + 1) % n), -c_r));
            row.push((g.index(j, (l + n - 1) % n), -c_l));
            push_first_order(g, &mut row, j, l, p.vt(t, th), p.vtheta(t, th), p.upwind);
            rows.push(row);
        }
    }
    SparseMatrix::from_rows(rows)
}

/// A principal eigenpair of a disk operator or its transpose.
#[derive(Debug, Clone, Serialize)]
pub struct EigenPair2D {
    pub lambda: f64,
    /// Normalized to maximum 1.
    pub omega: Vec<f64>,
    /// `||A omega - lambda omega||_inf / ||omega||_inf`.
    pub residual: f64,
    pub iterations: usize,
    pub grid: PolarGrid,
}

#[derive(Serialize)]
struct Summary {
    lambda: f64,
    residual: f64,
    iterations: usize,
    grid: PolarGrid,
}

impl EigenPair2D {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,theta,omega\n");
        for ((t, th), w) in self.grid.nodes().zip(&self.omega) {
            s.push_str(&format!("{},{},{}\n", fmt12(t), fmt12(th), fmt12(*w)));
        }
        s
    }

    pub fn summary_json(&self) -> String {
        let s = Summary {
            lambda: round12(self.lambda),
            residual: round12(self.residual),
            iterations: self.iterations,
            grid: self.grid,
        };
        serde_json::to_string_pretty(&s).expect("summary serializes")
    }

    /// Largest standard deviation of `omega` over a ring, relative to
    /// `max omega`.
    pub fn angular_std(&self) -> f64 {
        let n = self.grid.n_theta;
        let max = self.omega.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        self.omega
            .chunks(n)
            .map(|ring| {
                let mean = ring.iter().sum::<f64>() / n as f64;
                (ring.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64).sqrt()
            })
            .fold(0.0, f64::max)
            / max
    }

    /// Ring averages of `omega`.
    pub fn ring_means(&self) -> Vec<f64> {
        let n = self.grid.n_theta;
        self.omega.chunks(n).map(|r| r.iter().sum::<f64>() / n as f64).collect()
    }
}

const MAX_ITERATIONS: usize = 500;

fn residual(a: &SparseMatrix, x: &[f64], lambda: f64) -> f64 {
    let ax = a.matvec(x);
    let num = ax.iter().zip(x).map(|(y, v)| (y - lambda * v).abs()).fold(0.0, f64::max);
    num / x.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn inverse_iteration(
    a: &SparseMatrix,
    lu: &BandedLu,
    transpose: bool,
    weights: &[f64],
    tol: f64,
    grid: PolarGrid,
) -> Result<EigenPair2D> {
    let at = if transpose { Some(a.transpose()) } else { None };
    let op = at.as_ref().unwrap_or(a);
    let mut x = vec![1.0; a.n];
    let mut res = f64::INFINITY;
    // below this the residual is dominated by rounding in the matvec
    let floor = 100.0 * f64::EPSILON * op.norm_inf();
    let (mut best, mut best_it) = (f64::INFINITY, 0);
    for it in 1..=MAX_ITERATIONS {
        let mut y = if transpose { lu.solve_transpose(&x) } else { lu.solve(&x) };
        let sum: f64 = y.iter().sum();
        if sum < 0.0 {
            y.iter_mut().for_each(|v| *v = -*v);
        }
        if y.iter().any(|v| *v < 0.0) {
            y.iter_mut().for_each(|v| *v = v.abs());
        }
        let max = y.iter().fold(0.0f64, |m, v| m.max(*v));
        if !(max > 0.0 && max.is_finite()) {
            return Err(Error::NoConvergence { iterations: it, residual: res });
        }
        y.iter_mut().for_each(|v| *v /= max);
        let ay = op.matvec(&y);
        let num: f64 = y.iter().zip(&ay).zip(weights).map(|((u, v), w)| w * u * v).sum();
        let den: f64 = y.iter().zip(weights).map(|(u, w)| w * u * u).sum();
        let lambda = num / den;
        res = residual(op, &y, lambda);
        x = y;
        if res < 0.9 * best {
            best = res;
            best_it = it;
        }
        let stagnated = it - best_it > 20 && res < floor;
        if res < tol || stagnated {
            if let Some((node, value)) = x.iter().copied().enumerate().find(|(_, v)| !(*v > 0.0)) {
                return Err(Error::NonPrincipal { node, value });
            }
            return Ok(EigenPair2D { lambda, omega: x, residual: res, iterations: it, grid });
        }
    }
    Err(Error::NoConvergence { iterations: MAX_ITERATIONS, residual: res })
}

/// An assembled operator together with its volume weights.
#[derive(Debug, Clone)]
pub struct DiskOperator {
    pub matrix: SparseMatrix,
    pub weights: Vec<f64>,
    pub grid: PolarGrid,
}

impl DiskOperator {
    pub fn new(p: &DiskProblem) -> Self {
        DiskOperator { matrix: assemble_operator(p), weights: p.volume_weights(), grid: p.grid }
    }

    /// `-Delta_V u`.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        self.matrix.matvec(u)
    }
}

/// Shifted inverse iteration from the all-ones vector.
pub fn principal_eigenpair_2d(op: &DiskOperator, shift: f64, tol: f64) -> Result<EigenPair2D> {
    let lu = BandedLu::factor(&op.matrix.shifted(shift))?;
    inverse_iteration(&op.matrix, &lu, false, &op.weights, tol, op.grid)
}

/// Principal pair of the transposed matrix. The eigenvector is returned as
/// `x / W`, the adjoint eigenfunction in the volume-weighted inner product,
/// so that it equals the forward eigenfunction when `V = 0`.
pub fn adjoint_principal(op: &DiskOperator, tol: f64) -> Result<EigenPair2D> {
    let lu = BandedLu::factor(&op.matrix)?;
    let mut pair = inverse_iteration(&op.matrix, &lu, true, &op.weights, tol, op.grid)?;
    pair.omega.iter_mut().zip(&op.weights).for_each(|(v, w)| *v /= w);
    let max = pair.omega.iter().fold(0.0f64, |m, v| m.max(*v));
    pair.omega.iter_mut().for_each(|v| *v /= max);
    Ok(pair)
}

/// Forward and adjoint principal pairs from a single factorization.
pub fn principal_and_adjoint(op: &DiskOperator, tol: f64) -> Result<(EigenPair2D, EigenPair2D)> {
    let lu = BandedLu::factor(&op.matrix)?;
    let fwd = inverse_iteration(&op.matrix, &lu, false, &op.weights, tol, op.grid)?;
    let mut adj = inverse_iteration(&op.matrix, &lu, true, &op.weights, tol, op.grid)?;
    adj.omega.iter_mut().zip(&op.weights).for_each(|(v, w)| *v /= w);
    let max = adj.omega.iter().fold(0.0f64, |m, v| m.max(*v));
    adj.omega.iter_mut().for_each(|v| *v /= max);
    Ok((fwd, adj))
}

/// A two-dimensional model disk `J = rho (1 + P)` carrying the ball's radial
/// drift and an optional angular component. `perturbation` returns
/// `(P, dP/dt, d2P/dt2)`.
pub fn build_model_disk(
    ball: &ModelBall,
    grid: PolarGrid,
    perturbation: Option<MetricFn>,
    drift_angular: Option<ScalarFn>,
) -> Result<DiskProblem> {
    if ball.m != 2 {
        return Err(invalid(format!("disk problems need m = 2, got m = {}", ball.m)));
    }
    if (grid.r0 - ball.r0).abs() > 1e-12 * ball.r0 {
        return Err(invalid("grid radius differs from the ball radius"));
    }
    let rho = ball.rho.clone();
    let metric: MetricFn = match perturbation {
        None => Arc::new(move |t, _| rho.eval(t)),
        Some(pf) => Arc::new(move |t, th| {
            let [r, dr, ddr] = rho.eval(t);
            let [q, dq, ddq] = pf(t, th);
            [r * (1.0 + q), dr * (1.0 + q) + r * dq, ddr * (1.0 + q) + 2.0 * dr * dq + r * ddq]
        }),
    };
    let drift = ball.drift.clone();
    let vt: ScalarFn = Arc::new(move |t, _| drift.h(t));
    DiskProblem::new(grid, metric, vt, drift_angular.unwrap_or_else(zero_field))
}
