//! Computable bounds on the principal eigenvalue: the pointwise Barta
//! bracket, weighted Rayleigh quotients for gradient drifts, and the
//! integral min-max functional `L(u,u) - inf_v Q_u(v)` with its two
//! auxiliary degenerate elliptic solves.
//!
//! All disk functionals are built from the same face energies as the
//! operator in [`crate::disk`]: a face joins two neighbouring unknowns, has
//! length `h` (`dt` radially, `J dtheta` angularly), volume `h * width`, and
//! carries the field component `b` along it.

use serde::Serialize;

use crate::disk::{DiskOperator, DiskProblem, PolarGrid, ScalarFn};
use crate::error::{invalid, Error, Result};
use crate::geometry::ModelBall;
use crate::linalg::{BandedLu, SparseMatrix};
use crate::output::fmt12;
use crate::quadrature::GL3_UNIT;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridPoint {
    pub t: f64,
    pub theta: f64,
}

/// Two-sided bound `inf(-Delta_V u / u) <= lambda <= sup(-Delta_V u / u)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BartaBracket {
    pub lower: f64,
    pub upper: f64,
    pub argmin_point: GridPoint,
    pub argmax_point: GridPoint,
    /// Outermost rings left out of the extremal scan.
    pub excluded_rings: usize,
}

impl BartaBracket {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, lambda: f64) -> bool {
        self.lower <= lambda && lambda <= self.upper
    }

    pub fn csv_row(&self) -> String {
        format!("{},{},{}", fmt12(self.lower), fmt12(self.upper), self.excluded_rings)
    }
}

fn check_positive(u: &[f64], grid: &PolarGrid) -> Result<()> {
    if u.len() != grid.len() {
        return Err(invalid(format!("trial has {} samples, grid has {}", u.len(), grid.len())));
    }
    if let Some((i, v)) = u.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(invalid(format!("trial function must be positive in the interior; u = {v} at node {i}")));
    }
    Ok(())
}

/// Extremes of `apply(u)/u` over interior nodes, skipping the outermost
/// `exclude_rings` rings.
pub fn barta_bracket_with(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    grid: &PolarGrid,
    u: &[f64],
    exclude_rings: usize,
) -> Result<BartaBracket> {
    check_positive(u, grid)?;
    if exclude_rings >= grid.n_t {
        return Err(invalid("exclusion band covers the whole disk"));
    }
    let au = apply(u);
    let scan = (grid.n_t - exclude_rings) * grid.n_theta;
    let (mut lo, mut hi) = ((f64::INFINITY, 0), (f64::NEG_INFINITY, 0));
    for i in 0..scan {
        let r = au[i] / u[i];
        if r < lo.0 {
            lo = (r, i);
        }
        if r > hi.0 {
            hi = (r, i);
        }
    }
    let point = |i: usize| GridPoint { t: grid.t(i / grid.n_theta), theta: grid.theta(i % grid.n_theta) };
    Ok(BartaBracket {
        lower: lo.0,
        upper: hi.0,
        argmin_point: point(lo.1),
        argmax_point: point(hi.1),
        excluded_rings: exclude_rings,
    })
}

/// Barta bracket of the assembled operator with the default one-ring
/// exclusion band.
pub fn barta_bracket(op: &DiskOperator, u: &[f64]) -> Result<BartaBracket> {
    barta_bracket_with(|x| op.apply(x), &op.grid, u, 1)
}

struct Face {
    a: usize,
    b: usize,
    /// face length
    h: f64,
    vol: f64,
    /// field component along the face
    field: f64,
    /// midpoint
    t: f64,
    theta: f64,
}

/// Interior faces of the polar grid (faces on the Dirichlet ring excluded).
fn faces(p: &DiskProblem) -> Vec<Face> {
    let g = &p.grid;
    let (n, dt, dth) = (g.n_theta, g.dt(), g.dtheta());
    let mut out = Vec::with_capacity(2 * g.len());
    for j in 0..g.n_t {
        let t = g.t(j);
        for l in 0..n {
            let th = g.theta(l);
            if j + 1 < g.n_t {
                let tf = t + 0.5 * dt;
                out.push(Face {
                    a: g.index(j, l),
                    b: g.index(j + 1, l),
                    h: dt,
                    vol: p.j(tf, th) * dth * dt,
                    field: p.vt(tf, th),
                    t: tf,
                    theta: th,
                });
            }
            let thf = th + 0.5 * dth;
            let jf = p.j(t, thf);
            out.push(Face {
                a: g.index(j, l),
                b: g.index(j, (l + 1) % n),
                h: jf * dth,
                vol: dt * jf * dth,
                field: jf * p.vtheta(t, thf),
                t,
                theta: thf,
            });
        }
    }
    out
}

fn face_weight(u: &[f64], f: &Face) -> f64 {
    0.5 * (u[f.a] * u[f.a] + u[f.b] * u[f.b])
}

fn weighted_norm_sq(u: &[f64], w: &[f64]) -> f64 {
    u.iter().zip(w).map(|(x, w)| w * x * x).sum()
}

/// `Q_u(v) = int u^2 (|grad v|^2 - g(V, grad v))`.
pub fn q_functional(p: &DiskProblem, u: &[f64], v: &[f64]) -> f64 {
    faces(p)
        .iter()
        .map(|f| {
            let dv = (v[f.b] - v[f.a]) / f.h;
            face_weight(u, f) * f.vol * (dv * dv - f.field * dv)
        })
        .sum()
}

/// `int u^2 |grad v|^2`.
pub fn weighted_dirichlet_energy(p: &DiskProblem, u: &[f64], v: &[f64]) -> f64 {
    faces(p)
        .iter()
        .map(|f| {
            let dv = (v[f.b] - v[f.a]) / f.h;
            face_weight(u, f) * f.vol * dv * dv
        })
        .sum()
}

/// Solves a face-assembled system whose constant vector spans the kernel,
/// pinning node 0 and scaling every row by its diagonal.
fn solve_pinned(n: usize, mut rows: Vec<Vec<(usize, f64)>>, mut rhs: Vec<f64>, pin_value: f64) -> Result<(Vec<f64>, f64)> {
    let original = SparseMatrix::from_rows(rows.clone());
    let original_rhs = rhs.clone();
    rows[0] = vec![(0, 1.0)];
    rhs[0] = pin_value;
    let mut a = SparseMatrix::from_rows(rows);
    for i in 0..n {
        let d = a.get(i, i);
        if !(d.abs() > 0.0) {
            return Err(Error::Singular(format!("zero diagonal at node {i}; the weight vanishes on a whole stencil")));
        }
        let r = a.row_ptr[i]..a.row_ptr[i + 1];
        a.vals[r].iter_mut().for_each(|v| *v /= d);
        rhs[i] /= d;
    }
    let x = BandedLu::factor(&a)?.solve(&rhs);
    let ax = original.matvec(&x);
    let scale = original.norm_inf() * x.iter().fold(0.0f64, |m, v| m.max(v.abs())) + original_rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let res = (1..n).map(|i| (ax[i] - original_rhs[i]).abs()).fold(0.0, f64::max) / scale.max(f64::MIN_POSITIVE);
    Ok((x, res))
}

const AUX_RESIDUAL: f64 = 1e-9;

/// Minimizer `w_u` of `Q_u`, i.e. the solution of `div(u^2 (2 grad w - V)) = 0`
/// with natural boundary conditions, normalized to zero mean over `t < r0/4`.
pub fn solve_w_u(p: &DiskProblem, u: &[f64]) -> Result<Vec<f64>> {
    check_positive(u, &p.grid)?;
    let n = p.grid.len();
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut rhs = vec![0.0; n];
    for f in faces(p) {
        let c = face_weight(u, &f) * f.vol / (f.h * f.h);
        let beta = f.h * f.field;
        rows[f.a].extend([(f.a, c), (f.b, -c)]);
        rows[f.b].extend([(f.b, c), (f.a, -c)]);
        rhs[f.a] -= 0.5 * c * beta;
        rhs[f.b] += 0.5 * c * beta;
    }
    let (mut w, res) = solve_pinned(n, rows, rhs, 0.0)?;
    if res > AUX_RESIDUAL {
        return Err(Error::Singular(format!("w_u system residual {res:e}")));
    }
    gauge(p, &mut w);
    Ok(w)
}

/// Subtracts the volume-weighted mean over the ball `t < r0/4`.
fn gauge(p: &DiskProblem, w: &mut [f64]) {
    let g = &p.grid;
    let weights = p.volume_weights();
    let inner = (0..g.n_t).take_while(|&j| g.t(j) < 0.25 * g.r0).count().max(1) * g.n_theta;
    let mass: f64 = weights[..inner].iter().sum();
    let mean = w[..inner].iter().zip(&weights).map(|(x, m)| x * m).sum::<f64>() / mass;
    w.iter_mut().for_each(|x| *x -= mean);
}

fn bernoulli(x: f64) -> f64 {
    if x.abs() < 1e-6 {
        1.0 - 0.5 * x + x * x / 12.0
    } else {
        x / x.exp_m1()
    }
}

/// Positive solution of `div(omega^2 (grad G + G V)) = 0`, normalized to
/// volume-weighted mean 1. Fluxes use exponential fitting, which keeps the
/// discrete system an M-matrix for any drift.
pub fn solve_g_v(p: &DiskProblem, omega: &[f64]) -> Result<Vec<f64>> {
    check_positive(omega, &p.grid)?;
    let n = p.grid.len();
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for f in faces(p) {
        let d = face_weight(omega, &f) * f.vol / (f.h * f.h);
        let x = f.h * f.field;
        let (bp, bm) = (bernoulli(x), bernoulli(-x));
        // flux (bm G_b - bp G_a) leaves a, enters b
        rows[f.a].extend([(f.a, d * bp), (f.b, -d * bm)]);
        rows[f.b].extend([(f.b, d * bm), (f.a, -d * bp)]);
    }
    let (mut g, res) = solve_pinned(n, rows, vec![0.0; n], 1.0)?;
    if res > AUX_RESIDUAL {
        return Err(Error::Singular(format!("G system residual {res:e}")));
    }
    let weights = p.volume_weights();
    let mean = g.iter().zip(&weights).map(|(x, w)| x * w).sum::<f64>() / weights.iter().sum::<f64>();
    g.iter_mut().for_each(|x| *x /= mean);
    let min_g = g.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min_g > 0.0) {
        return Err(Error::Irreducibility { min_g });
    }
    Ok(g)
}

/// `u_V = omega sqrt(G)`, normalized in the volume-weighted L2 norm.
pub fn optimal_trial(p: &DiskProblem, omega: &[f64], g: &[f64]) -> Vec<f64> {
    let mut u: Vec<f64> = omega.iter().zip(g).map(|(w, g)| w * g.sqrt()).collect();
    let norm = weighted_norm_sq(&u, &p.volume_weights()).sqrt();
    u.iter_mut().for_each(|x| *x /= norm);
    u
}

/// Values of the integral min-max functional at one trial function.
#[derive(Debug, Clone, Serialize)]
pub struct HollandReport {
    /// `L(u,u) = int |grad u|^2 + u g(V, grad u)` for normalized `u`.
    pub l_value: f64,
    /// `inf_v Q_u(v)`.
    pub q_min: f64,
    pub bound: f64,
    pub w_u: Vec<f64>,
    pub g: Option<Vec<f64>>,
    /// True when `Q_min` came from the closed form for radial drifts.
    pub fast_path: bool,
}

impl HollandReport {
    pub fn csv_row(&self) -> String {
        format!("{},{},{}", fmt12(self.l_value), fmt12(self.q_min), fmt12(self.bound))
    }

    pub fn summary_json(&self) -> String {
        serde_json::json!({
            "l_value": crate::output::round12(self.l_value),
            "q_min": crate::output::round12(self.q_min),
            "bound": crate::output::round12(self.bound),
            "fast_path": self.fast_path,
        })
        .to_string()
    }
}

fn normalized(p: &DiskProblem, u: &[f64]) -> Vec<f64> {
    let norm = weighted_norm_sq(u, &p.volume_weights()).sqrt();
    u.iter().map(|x| x / norm).collect()
}

/// `L(u,u) = <u, -Delta_V u>` in the volume-weighted inner product.
pub fn l_functional(op: &DiskOperator, u: &[f64]) -> f64 {
    let au = op.apply(u);
    u.iter().zip(&au).zip(&op.weights).map(|((x, y), w)| w * x * y).sum::<f64>() / weighted_norm_sq(u, &op.weights)
}

/// Checks that `u / (r0 - t)` stays within positive bounds on the outer
/// quarter of the radius; returns those bounds.
pub fn boundary_cone_bounds(grid: &PolarGrid, u: &[f64]) -> Result<(f64, f64)> {
    check_positive(u, grid)?;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for j in 0..grid.n_t {
        let t = grid.t(j);
        if t < 0.75 * grid.r0 {
            continue;
        }
        for l in 0..grid.n_theta {
            let r = u[grid.index(j, l)] / (grid.r0 - t);
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    Ok((lo, hi))
}

/// `L(u,u) - inf_v Q_u(v)` with `Q` minimized by [`solve_w_u`].
pub fn holland_bound(p: &DiskProblem, op: &DiskOperator, u: &[f64]) -> Result<HollandReport> {
    boundary_cone_bounds(&p.grid, u)?;
    let u = normalized(p, u);
    let l_value = l_functional(op, &u);
    let w_u = solve_w_u(p, &u)?;
    let q_min = q_functional(p, &u, &w_u);
    Ok(HollandReport { l_value, q_min, bound: l_value - q_min, w_u, g: None, fast_path: false })
}

/// The bound at the optimal trial `u_V = omega_V sqrt(G_V)`.
pub fn holland_at_optimum(p: &DiskProblem, op: &DiskOperator, omega: &[f64]) -> Result<HollandReport> {
    let g = solve_g_v(p, omega)?;
    let u = optimal_trial(p, omega, &g);
    let mut report = holland_bound(p, op, &u)?;
    report.g = Some(g);
    Ok(report)
}

/// Closed form for a drift `V = h1(t) d/dt`: `Q_min = -1/4 int u^2 h1^2`,
/// attained at `w = H1/2`. Rejects fields with an angular part or angular
/// dependence, where the formula is only an upper estimate of `Q_min`.
pub fn holland_bound_radial(p: &DiskProblem, op: &DiskOperator, u: &[f64]) -> Result<HollandReport> {
    let g = &p.grid;
    for j in 0..g.n_t {
        let t = g.t(j);
        let v0 = p.vt(t, 0.0);
        for l in 0..g.n_theta {
            let th = g.theta(l);
            if p.vtheta(t, th) != 0.0 || (p.vt(t, th) - v0).abs() > 1e-14 * (1.0 + v0.abs()) {
                return Err(invalid("closed-form bound needs a drift of the form h1(t) d/dt"));
            }
        }
    }
    boundary_cone_bounds(g, u)?;
    let u = normalized(p, u);
    let l_value = l_functional(op, &u);
    let fs = faces(p);
    let q_min = -0.25 * fs.iter().map(|f| face_weight(&u, f) * f.vol * f.field * f.field).sum::<f64>();
    // w = H1/2 accumulated along rays with the face values of h1
    let mut w = vec![0.0; g.len()];
    for f in fs.iter().filter(|f| f.b == f.a + g.n_theta) {
        w[f.b] = w[f.a] + 0.5 * f.h * f.field;
    }
    gauge(p, &mut w);
    Ok(HollandReport { l_value, q_min, bound: l_value - q_min, w_u: w, g: None, fast_path: true })
}

/// The volume-weighted L2 normalization used throughout.
pub fn normalize(p: &DiskProblem, u: &[f64]) -> Vec<f64> {
    normalized(p, u)
}

/// Weighted Rayleigh quotient `int |grad u|^2 e^-f / int u^2 e^-f` on a
/// disk, Dirichlet at `t = r0`.
pub fn rayleigh_quotient_2d(p: &DiskProblem, f: &ScalarFn, u: &[f64]) -> Result<f64> {
    let (k, m) = weighted_forms(p, f);
    let den: f64 = u.iter().zip(&m).map(|(x, w)| w * x * x).sum();
    if !(den > 0.0) {
        return Err(invalid("trial function has zero weighted norm"));
    }
    let ku = k.matvec(u);
    Ok(u.iter().zip(&ku).map(|(x, y)| x * y).sum::<f64>() / den)
}

/// Stiffness and lumped mass of the weighted Dirichlet form.
fn weighted_forms(p: &DiskProblem, f: &ScalarFn) -> (SparseMatrix, Vec<f64>) {
    let g = &p.grid;
    let n = g.len();
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for fc in faces(p) {
        let c = (-f(fc.t, fc.theta)).exp() * fc.vol / (fc.h * fc.h);
        rows[fc.a].extend([(fc.a, c), (fc.b, -c)]);
        rows[fc.b].extend([(fc.b, c), (fc.a, -c)]);
    }
    // Dirichlet faces on t = r0
    let (dt, dth) = (g.dt(), g.dtheta());
    let j = g.n_t - 1;
    let tf = g.t(j) + 0.5 * dt;
    for l in 0..g.n_theta {
        let th = g.theta(l);
        let c = (-f(tf, th)).exp() * p.j(tf, th) * dth / dt;
        rows[g.index(j, l)].push((g.index(j, l), c));
    }
    let w = p.volume_weights();
    let m = g.nodes().zip(&w).map(|((t, th), w)| w * (-f(t, th)).exp()).collect();
    (SparseMatrix::from_rows(rows), m)
}

/// Minimum of [`rayleigh_quotient_2d`] over the grid functions, found by
/// inverse iteration on the symmetric weighted form. Returns the minimum and
/// the minimizer (maximum 1).
pub fn rayleigh_minimum_2d(p: &DiskProblem, f: &ScalarFn, tol: f64) -> Result<(f64, Vec<f64>)> {
    let (k, m) = weighted_forms(p, f);
    let lu = BandedLu::factor(&k)?;
    let mut x = vec![1.0; m.len()];
    let mut prev = f64::INFINITY;
    for _ in 0..500 {
        let rhs: Vec<f64> = x.iter().zip(&m).map(|(a, b)| a * b).collect();
        let mut y = lu.solve(&rhs);
        let max = y.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        y.iter_mut().for_each(|v| *v /= max);
        let ky = k.matvec(&y);
        let q = y.iter().zip(&ky).map(|(a, b)| a * b).sum::<f64>() / y.iter().zip(&m).map(|(a, b)| b * a * a).sum::<f64>();
        x = y;
        if (prev - q).abs() < tol * q {
            return Ok((q, x));
        }
        prev = q;
    }
    Err(Error::NoConvergence { iterations: 500, residual: f64::NAN })
}

/// Radial weighted Rayleigh quotient `int a'^2 p / int a^2 p` for a trial on
/// the uniform grid `t_j = j r0 / n` (`a(r0) = 0`), piecewise linear between
/// nodes.
pub fn rayleigh_quotient_radial(ball: &ModelBall, values: &[f64]) -> Result<f64> {
    let n = values.len() - 1;
    if n < 2 || values[n] != 0.0 {
        return Err(invalid("radial trial needs at least 3 nodes and a zero at r0"));
    }
    let (k, m) = radial_forms(ball, n);
    let x = &values[..n];
    let num = tridiag_quadratic(&k, x);
    let den = tridiag_quadratic(&m, x);
    if !(den > 0.0) {
        return Err(invalid("trial function has zero weighted norm"));
    }
    Ok(num / den)
}

/// Tridiagonal matrix as (sub, diag, super).
type Tridiag = (Vec<f64>, Vec<f64>, Vec<f64>);

fn tridiag_quadratic(a: &Tridiag, x: &[f64]) -> f64 {
    let (lo, d, up) = a;
    let mut s = 0.0;
    for i in 0..x.len() {
        let mut y = d[i] * x[i];
        if i > 0 {
            y += lo[i] * x[i - 1];
        }
        if i + 1 < x.len() {
            y += up[i] * x[i + 1];
        }
        s += x[i] * y;
    }
    s
}

/// Piecewise-linear stiffness and mass matrices with weight `p`, unknowns
/// at nodes `0..n` (the node at `r0` is eliminated).
fn radial_forms(ball: &ModelBall, n: usize) -> (Tridiag, Tridiag) {
    let h = ball.r0 / n as f64;
    let mut k = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut m = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for e in 0..n {
        let (mut kw, mut m00, mut m01, mut m11) = (0.0, 0.0, 0.0, 0.0);
        for (s, w) in GL3_UNIT {
            let p = ball.weight_p((e as f64 + s) * h) * w;
            kw += p / h;
            m00 += p * (1.0 - s) * (1.0 - s) * h;
            m01 += p * (1.0 - s) * s * h;
            m11 += p * s * s * h;
        }
        let (a, b) = (e, e + 1);
        k.1[a] += kw;
        m.1[a] += m00;
        if b < n {
            k.1[b] += kw;
            k.2[a] -= kw;
            k.0[b] -= kw;
            m.1[b] += m11;
            m.2[a] += m01;
            m.0[b] += m01;
        }
    }
    (k, m)
}

fn thomas(a: &Tridiag, rhs: &[f64]) -> Vec<f64> {
    let (lo, d, up) = a;
    let n = rhs.len();
    let mut c = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut beta = d[0];
    x[0] = rhs[0] / beta;
    for i in 1..n {
        c[i] = up[i - 1] / beta;
        beta = d[i] - lo[i] * c[i];
        x[i] = (rhs[i] - lo[i] * x[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        x[i] -= c[i + 1] * x[i + 1];
    }
    x
}

fn tridiag_matvec(a: &Tridiag, x: &[f64]) -> Vec<f64> {
    let (lo, d, up) = a;
    (0..x.len())
        .map(|i| {
            let mut y = d[i] * x[i];
            if i > 0 {
                y += lo[i] * x[i - 1];
            }
            if i + 1 < x.len() {
                y += up[i] * x[i + 1];
            }
            y
        })
        .collect()
}

/// Minimum of the radial weighted Rayleigh quotient over piecewise-linear
/// functions on `n` elements, i.e. the principal eigenvalue for the
/// gradient drift `V = grad H`. Returns the minimum and the nodal minimizer
/// (including the zero at `r0`).
pub fn rayleigh_minimum_radial(ball: &ModelBall, n: usize, tol: f64) -> Result<(f64, Vec<f64>)> {
    if n < 4 {
        return Err(invalid("need at least 4 elements"));
    }
    let (k, m) = radial_forms(ball, n);
    let mut x = vec![1.0; n];
    let mut prev = f64::INFINITY;
    for _ in 0..1000 {
        let mut y = thomas(&k, &tridiag_matvec(&m, &x));
        let max = y.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        y.iter_mut().for_each(|v| *v /= max);
        let q = tridiag_quadratic(&k, &y) / tridiag_quadratic(&m, &y);
        x = y;
        if (prev - q).abs() < tol * q {
            x.push(0.0);
            return Ok((q, x));
        }
        prev = q;
    }
    Err(Error::NoConvergence { iterations: 1000, residual: f64::NAN })
}

/// `g(X,Z) + |V+Z|^2/4 - (-|X|^2 - g(V,X))` in the Euclidean plane; never
/// negative, zero exactly at `Z = -2X - V`.
pub fn completing_square_gap(x: [f64; 2], v: [f64; 2], z: [f64; 2]) -> f64 {
    let dot = |a: [f64; 2], b: [f64; 2]| a[0] * b[0] + a[1] * b[1];
    let vz = [v[0] + z[0], v[1] + z[1]];
    dot(x, z) + 0.25 * dot(vz, vz) + dot(x, x) + dot(v, x)
}

/// The minimizing `Z` of [`completing_square_gap`].
pub fn completing_square_optimum(x: [f64; 2], v: [f64; 2]) -> [f64; 2] {
    [-2.0 * x[0] - v[0], -2.0 * x[1] - v[1]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn square_gap_is_nonnegative(x0 in -5.0f64..5.0, x1 in -5.0f64..5.0, v0 in -5.0f64..5.0, v1 in -5.0f64..5.0, z0 in -5.0f64..5.0, z1 in -5.0f64..5.0) {
            let (x, v) = ([x0, x1], [v0, v1]);
            prop_assert!(completing_square_gap(x, v, [z0, z1]) >= -1e-12);
            prop_assert!(completing_square_gap(x, v, completing_square_optimum(x, v)).abs() < 1e-12);
        }
    }

    #[test]
    fn bernoulli_is_smooth_through_zero() {
        for x in [-1e-5, -1e-7, 1e-7, 1e-5] {
            assert!((bernoulli(x) - x / x.exp_m1()).abs() < 1e-9);
        }
        assert_eq!(bernoulli(0.0), 1.0);
        assert!((bernoulli(1.0) - 1.0 / (1f64.exp() - 1.0)).abs() < 1e-15);
    }
}
