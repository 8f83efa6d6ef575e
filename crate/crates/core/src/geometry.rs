//! Spherically symmetric model balls: warping functions, radial drifts and
//! the pointwise geometric quantities derived from them.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::expr::{Expr, Var};
use crate::quadrature::gauss_legendre;

/// `t -> (value, first derivative, second derivative)`.
pub type TripleFn = Arc<dyn Fn(f64) -> [f64; 3] + Send + Sync>;

const ORIGIN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WarpingKind {
    SpaceForm { kappa: f64 },
    Custom,
}

/// The warping function `rho` of a model metric `dt^2 + rho(t)^2 dsigma^2`.
#[derive(Clone)]
pub struct WarpingFunction {
    kind: WarpingKind,
    eval: TripleFn,
    limit: f64,
    third_at_origin: f64,
}

impl fmt::Debug for WarpingFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WarpingFunction")
            .field("kind", &self.kind)
            .field("limit", &self.limit)
            .finish()
    }
}

/// Builds the constant-curvature warping function `sin`, `id` or `sinh`
/// (rescaled by the curvature), defined on `[0, l_cap)`.
pub fn make_space_form(kappa: f64, l_cap: f64) -> Result<WarpingFunction> {
    if !kappa.is_finite() {
        return Err(invalid("curvature must be finite"));
    }
    if !(l_cap > 0.0) {
        return Err(invalid("domain limit must be positive"));
    }
    let eval: TripleFn = if kappa > 0.0 {
        let s = kappa.sqrt();
        if l_cap > PI / s * (1.0 + 1e-15) {
            return Err(invalid(format!(
                "domain limit {l_cap} exceeds pi/sqrt(kappa) = {} for kappa = {kappa}",
                PI / s
            )));
        }
        Arc::new(move |t: f64| {
            let (sn, cs) = (s * t).sin_cos();
            [sn / s, cs, -s * sn]
        })
    } else if kappa < 0.0 {
        let s = (-kappa).sqrt();
        Arc::new(move |t: f64| {
            let x = s * t;
            [x.sinh() / s, x.cosh(), s * x.sinh()]
        })
    } else {
        Arc::new(|t: f64| [t, 1.0, 0.0])
    };
    Ok(WarpingFunction {
        kind: WarpingKind::SpaceForm { kappa },
        eval,
        limit: l_cap,
        third_at_origin: -kappa,
    })
}

impl WarpingFunction {
    /// Space form with its natural domain: `pi/sqrt(kappa)` for positive
    /// curvature, unbounded otherwise.
    pub fn space_form(kappa: f64) -> Result<Self> {
        let l = if kappa > 0.0 { PI / kappa.sqrt() } else { f64::INFINITY };
        make_space_form(kappa, l)
    }

    /// A custom warping function given with analytic first and second
    /// derivatives. `third_at_origin` is `rho'''(0)`, used for the curvature
    /// limit at the origin.
    pub fn custom(eval: TripleFn, limit: f64, third_at_origin: f64) -> Result<Self> {
        if !(limit > 0.0) {
            return Err(invalid("domain limit must be positive"));
        }
        let [r, dr, ddr] = eval(0.0);
        if r.abs() > ORIGIN_TOL || (dr - 1.0).abs() > ORIGIN_TOL || ddr.abs() > ORIGIN_TOL {
            return Err(invalid(format!(
                "warping function must satisfy rho(0)=0, rho'(0)=1, rho''(0)=0; got ({r}, {dr}, {ddr})"
            )));
        }
        let w = WarpingFunction { kind: WarpingKind::Custom, eval, limit, third_at_origin };
        let probe_end = if limit.is_finite() { limit } else { 10.0 };
        w.check_positive(probe_end, 512)?;
        Ok(w)
    }

    /// Parses `rho(t)` from the expression grammar and differentiates it
    /// symbolically.
    pub fn from_expression(src: &str, limit: f64) -> Result<Self> {
        let e = Expr::parse(src)?;
        if e.depends_on(Var::Theta) {
            return Err(Error::Expression("warping function may depend on t only".into()));
        }
        let d1 = e.derivative(Var::T);
        let d2 = d1.derivative(Var::T);
        let third = d2.derivative(Var::T).eval(0.0, 0.0);
        let eval: TripleFn = Arc::new(move |t| [e.eval(t, 0.0), d1.eval(t, 0.0), d2.eval(t, 0.0)]);
        Self::custom(eval, limit, third)
    }

    pub(crate) fn check_positive(&self, up_to: f64, samples: usize) -> Result<()> {
        for j in 1..=samples {
            let t = up_to * j as f64 / samples as f64;
            if t >= self.limit {
                break;
            }
            let r = (self.eval)(t)[0];
            if !(r > 0.0) {
                return Err(invalid(format!("warping function is not positive at t = {t} (rho = {r})")));
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> WarpingKind {
        self.kind
    }

    pub fn limit(&self) -> f64 {
        self.limit
    }

    /// `(rho, rho', rho'')` at `t`.
    pub fn eval(&self, t: f64) -> [f64; 3] {
        (self.eval)(t)
    }

    pub fn rho(&self, t: f64) -> f64 {
        (self.eval)(t)[0]
    }

    pub fn third_at_origin(&self) -> f64 {
        self.third_at_origin
    }
}

/// Radial sectional curvature `-rho''/rho`; at the origin the limit
/// `-rho'''(0)` is returned.
pub fn radial_sectional_curvature(w: &WarpingFunction, t: f64) -> Result<f64> {
    if t < 0.0 || t >= w.limit {
        return Err(invalid(format!("t = {t} outside [0, {})", w.limit)));
    }
    if let WarpingKind::SpaceForm { kappa } = w.kind {
        if t == 0.0 || kappa == 0.0 {
            return Ok(kappa);
        }
    }
    if t == 0.0 {
        return Ok(-w.third_at_origin);
    }
    let [r, _, ddr] = w.eval(t);
    Ok(-ddr / r)
}

/// A radial drift `V = h(t) d/dt` with antiderivative `H`, `H(0) = 0`.
#[derive(Clone)]
pub struct DriftProfile {
    /// `t -> (h, h', H)`.
    eval: TripleFn,
    label: String,
}

impl fmt::Debug for DriftProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DriftProfile").field("label", &self.label).finish()
    }
}

impl DriftProfile {
    pub fn zero() -> Self {
        DriftProfile { eval: Arc::new(|_| [0.0, 0.0, 0.0]), label: "0".into() }
    }

    /// `h(t) = c t`.
    pub fn linear(c: f64) -> Self {
        DriftProfile {
            eval: Arc::new(move |t| [c * t, c, 0.5 * c * t * t]),
            label: format!("{c}*t"),
        }
    }

    /// `h(t) = sum_k coeffs[k] t^k`; the constant coefficient must vanish.
    pub fn polynomial(coeffs: &[f64]) -> Result<Self> {
        if coeffs.first().is_some_and(|c| c.abs() > ORIGIN_TOL) {
            return Err(invalid("drift must vanish at the origin (constant coefficient must be 0)"));
        }
        let c: Vec<f64> = coeffs.to_vec();
        let label = c
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(k, v)| format!("{v}*t^{k}"))
            .collect::<Vec<_>>()
            .join(" + ");
        let eval: TripleFn = Arc::new(move |t| {
            let (mut h, mut dh, mut big) = (0.0, 0.0, 0.0);
            for (k, ck) in c.iter().enumerate().rev() {
                h = h * t + ck;
                big = big * t + ck / (k as f64 + 1.0);
            }
            for (k, ck) in c.iter().enumerate().skip(1).rev() {
                dh = dh * t + ck * k as f64;
            }
            [h, dh, big * t]
        });
        Ok(DriftProfile { eval, label: if label.is_empty() { "0".into() } else { label } })
    }

    /// Parses `h(t)`; `h'` is symbolic and `H` is computed by Gauss–Legendre
    /// quadrature.
    pub fn from_expression(src: &str) -> Result<Self> {
        let e = Expr::parse(src)?;
        if e.depends_on(Var::Theta) {
            return Err(Error::Expression("radial drift may depend on t only".into()));
        }
        let d = e.derivative(Var::T);
        let h0 = e.eval(0.0, 0.0);
        if h0.abs() > ORIGIN_TOL {
            return Err(invalid(format!("drift must vanish at the origin, h(0) = {h0}")));
        }
        let e2 = e.clone();
        let eval: TripleFn = Arc::new(move |t| {
            let panels = (t.abs() * 8.0).ceil().max(1.0) as usize;
            let big = gauss_legendre(|s| e2.eval(s, 0.0), 0.0, t, panels);
            [e2.eval(t, 0.0), d.eval(t, 0.0), big]
        });
        Ok(DriftProfile { eval, label: src.to_string() })
    }

    /// A drift from a closure returning `(h, h', H)`.
    pub fn custom(eval: TripleFn, label: impl Into<String>) -> Result<Self> {
        let [h0, _, big0] = eval(0.0);
        if h0.abs() > ORIGIN_TOL || big0.abs() > ORIGIN_TOL {
            return Err(invalid(format!("drift must satisfy h(0)=0 and H(0)=0; got ({h0}, {big0})")));
        }
        Ok(DriftProfile { eval, label: label.into() })
    }

    /// `s * h`.
    pub fn scaled(&self, s: f64) -> Self {
        let inner = self.eval.clone();
        DriftProfile {
            eval: Arc::new(move |t| {
                let [h, dh, big] = inner(t);
                [s * h, s * dh, s * big]
            }),
            label: format!("{s}*({})", self.label),
        }
    }

    /// `(h, h', H)` at `t`.
    pub fn eval(&self, t: f64) -> [f64; 3] {
        (self.eval)(t)
    }

    pub fn h(&self, t: f64) -> f64 {
        (self.eval)(t)[0]
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `h''` by a centered difference of `h'` (one-sided at the origin).
    pub fn second_derivative(&self, t: f64) -> f64 {
        let d = 1e-4 * (1.0 + t.abs());
        if t < d {
            let f = |s: f64| self.eval(s)[1];
            (-3.0 * f(t) + 4.0 * f(t + d) - f(t + 2.0 * d)) / (2.0 * d)
        } else {
            (self.eval(t + d)[1] - self.eval(t - d)[1]) / (2.0 * d)
        }
    }
}

/// A closed geodesic ball of radius `r0` in an `m`-dimensional model space,
/// carrying a radial drift.
#[derive(Debug, Clone)]
pub struct ModelBall {
    pub m: usize,
    pub r0: f64,
    pub rho: WarpingFunction,
    pub drift: DriftProfile,
}

impl ModelBall {
    pub fn new(m: usize, r0: f64, rho: WarpingFunction, drift: DriftProfile) -> Result<Self> {
        if m < 2 {
            return Err(invalid(format!("dimension must be at least 2, got {m}")));
        }
        if !(r0 > 0.0 && r0.is_finite()) {
            return Err(invalid(format!("radius must be positive, got {r0}")));
        }
        if r0 >= rho.limit() {
            return Err(invalid(format!(
                "radius {r0} must lie below the warping function's domain limit {}",
                rho.limit()
            )));
        }
        rho.check_positive(r0, 256)?;
        Ok(ModelBall { m, r0, rho, drift })
    }

    /// Euclidean ball of radius `r0` without drift.
    pub fn euclidean(m: usize, r0: f64) -> Result<Self> {
        Self::new(m, r0, WarpingFunction::space_form(0.0)?, DriftProfile::zero())
    }

    pub fn with_drift(&self, drift: DriftProfile) -> Self {
        ModelBall { drift, ..self.clone() }
    }

    fn dim_minus_one(&self) -> f64 {
        (self.m - 1) as f64
    }

    /// Sturm–Liouville weight `rho^(m-1) e^(-H)`, zero at the origin.
    pub fn weight_p(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        self.rho.rho(t).powi(self.m as i32 - 1) * (-self.drift.eval(t)[2]).exp()
    }

    /// `p'(t) = p ((m-1) rho'/rho - h)`; at the origin the limit is 1 for
    /// `m = 2` and 0 otherwise.
    pub fn weight_p_derivative(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return if self.m == 2 { 1.0 } else { 0.0 };
        }
        let [r, dr, _] = self.rho.eval(t);
        let [h, _, big] = self.drift.eval(t);
        let n = self.dim_minus_one();
        // p' = (m-1) rho^(m-2) rho' e^-H - h p
        (n * r.powi(self.m as i32 - 2) * dr - h * r.powi(self.m as i32 - 1)) * (-big).exp()
    }

    /// `Delta_0 r = (m-1) rho'/rho` for `t > 0`.
    pub fn laplacian_r(&self, t: f64) -> f64 {
        let [r, dr, _] = self.rho.eval(t);
        self.dim_minus_one() * dr / r
    }

    /// `div(h d/dt) = h' + (m-1) h rho'/rho`, with limit `m h'(0)` at 0.
    pub fn drift_divergence(&self, t: f64) -> f64 {
        let [h, dh, _] = self.drift.eval(t);
        if t <= 0.0 {
            return self.m as f64 * dh;
        }
        dh + h * self.laplacian_r(t)
    }

    /// Model side of the drift condition, `h' - h^2/2 + h (m-1) rho'/rho`,
    /// with limit `m h'(0)` at the origin.
    pub fn model_extra_condition(&self, t: f64) -> f64 {
        let [h, dh, _] = self.drift.eval(t);
        if t <= 0.0 {
            return self.m as f64 * dh;
        }
        extra_condition_lhs(h, dh, self.laplacian_r(t))
    }

    pub fn curvature(&self, t: f64) -> Result<f64> {
        radial_sectional_curvature(&self.rho, t)
    }
}

/// `(J/rho)^(m-1)`, the ratio of volume elements.
pub fn volume_ratio_theta(j_val: f64, rho_val: f64, m: usize) -> Result<f64> {
    if !(rho_val > 0.0) {
        return Err(invalid(format!("rho must be positive, got {rho_val}")));
    }
    if !(j_val > 0.0) {
        return Err(invalid(format!("J must be positive, got {j_val}")));
    }
    Ok((j_val / rho_val).powi(m as i32 - 1))
}

/// `h1' - h1^2/2 + h1 * laplacian_r`.
pub fn extra_condition_lhs(h1: f64, h1_prime: f64, laplacian_r: f64) -> f64 {
    h1_prime - 0.5 * h1 * h1 + h1 * laplacian_r
}
