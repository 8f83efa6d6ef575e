//! Comparison theorems checked on concrete pairs: pointwise premise margins,
//! eigenvalue inequalities, the first-order sandwich around `V = 0`, the
//! gradient-drift derivative, and Riccati rigidity.

use std::sync::Arc;

use serde::Serialize;

use crate::disk::{principal_eigenpair_2d, DiskOperator, DiskProblem, PolarGrid, ScalarFn};
use crate::error::{invalid, Error, Result};
use crate::geometry::{extra_condition_lhs, DriftProfile, ModelBall, WarpingFunction};
use crate::output::{fmt12, round12};
use crate::quadrature::gauss_legendre;
use crate::sturm_liouville::{principal_eigenpair, SolverOptions};
use crate::variational::{solve_w_u, weighted_dirichlet_energy};

/// Which statement a case exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ComparisonMode {
    /// Radial sectional curvature bounded above and `h1 <= h` give a lower bound.
    SectionalLower,
    /// Radial Ricci curvature bounded below and the drift condition give an upper bound.
    RicciUpper,
    /// `div V <= 0` gives `lambda_0 <= lambda_V`.
    Divergence,
    /// Two-sided first-order bracket of `lambda_0` around `lambda_V`.
    Sandwich,
}

impl ComparisonMode {
    pub fn name(self) -> &'static str {
        match self {
            ComparisonMode::SectionalLower => "sectional_lower",
            ComparisonMode::RicciUpper => "ricci_upper",
            ComparisonMode::Divergence => "divergence",
            ComparisonMode::Sandwich => "sandwich",
        }
    }
}

/// The side whose eigenvalue is being bounded.
#[derive(Clone)]
pub enum Subject {
    Ball(ModelBall),
    Disk(DiskProblem),
}

impl Subject {
    fn r0(&self) -> f64 {
        match self {
            Subject::Ball(b) => b.r0,
            Subject::Disk(p) => p.grid.r0,
        }
    }

    fn m(&self) -> usize {
        match self {
            Subject::Ball(b) => b.m,
            Subject::Disk(_) => 2,
        }
    }
}

#[derive(Clone)]
pub struct ComparisonCase {
    pub id: String,
    pub subject: Subject,
    /// Required by the two theorem modes; ignored by the others.
    pub model: Option<ModelBall>,
    pub mode: ComparisonMode,
}

impl ComparisonCase {
    pub fn new(id: impl Into<String>, subject: Subject, model: Option<ModelBall>, mode: ComparisonMode) -> Result<Self> {
        let needs_model = matches!(mode, ComparisonMode::SectionalLower | ComparisonMode::RicciUpper);
        match (&model, needs_model) {
            (None, true) => return Err(invalid(format!("mode {} needs a model ball", mode.name()))),
            (Some(b), _) => {
                if b.m != subject.m() {
                    return Err(invalid(format!("dimension mismatch: subject {} vs model {}", subject.m(), b.m)));
                }
                if (b.r0 - subject.r0()).abs() > 1e-12 * b.r0 {
                    return Err(invalid(format!("radius mismatch: subject {} vs model {}", subject.r0(), b.r0)));
                }
            }
            _ => {}
        }
        if !needs_model && !matches!(subject, Subject::Disk(_)) {
            return Err(invalid(format!("mode {} needs a disk subject", mode.name())));
        }
        Ok(ComparisonCase { id: id.into(), subject, model, mode })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonOptions {
    pub radial: SolverOptions,
    pub disk_tol: f64,
    /// Absolute tolerance on analytically evaluated premise margins.
    pub premise_tol: f64,
    /// Tolerance on margins that involve a finite difference of a closure.
    pub difference_tol: f64,
    /// `C` in the eigenvalue allowance `C dt^2`.
    pub grid_allowance: f64,
    /// Radial sample count for ball subjects.
    pub samples: usize,
}

impl Default for ComparisonOptions {
    fn default() -> Self {
        ComparisonOptions {
            radial: SolverOptions::default(),
            disk_tol: 1e-9,
            premise_tol: 1e-9,
            difference_tol: 1e-6,
            grid_allowance: 20.0,
            samples: 400,
        }
    }
}

/// One premise inequality, `allowed - actual >= 0`, sampled over the domain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Margin {
    pub name: String,
    /// Smallest slack; negative means the premise fails there.
    pub min: f64,
    /// Largest `|allowed - actual|`, zero exactly in an equality case.
    pub max_abs: f64,
    pub tol: f64,
}

impl Margin {
    fn new(name: &str, tol: f64) -> Self {
        Margin { name: name.into(), min: f64::INFINITY, max_abs: 0.0, tol }
    }

    fn push(&mut self, slack: f64) {
        self.min = self.min.min(slack);
        self.max_abs = self.max_abs.max(slack.abs());
    }

    pub fn holds(&self) -> bool {
        self.min >= -self.tol
    }

    pub fn vanishes(&self) -> bool {
        self.max_abs <= self.tol
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonVerdict {
    pub case_id: String,
    pub mode: ComparisonMode,
    pub premises_hold: bool,
    pub margins: Vec<Margin>,
    pub lambda_subject: f64,
    pub lambda_model: f64,
    /// Allowance used in the eigenvalue inequality.
    pub tolerance: f64,
    pub conclusion_holds: bool,
    pub equality_case: bool,
    /// Whether the volume ratio `(J/rho)^(m-1)` moved in the direction the
    /// curvature premise implies.
    pub volume_ratio_monotone: Option<bool>,
    /// Set when the subject drift changes sign, which the statement does not address.
    pub outside_hypotheses: bool,
    /// Sup distance between the subject eigenfunction and the transformed
    /// model eigenfunction in an equality case.
    pub eigenfunction_residual: Option<f64>,
}

impl ComparisonVerdict {
    /// A violation is a case whose premises hold but whose conclusion fails.
    pub fn is_violation(&self) -> bool {
        self.premises_hold && !self.conclusion_holds
    }

    pub fn min_margin(&self) -> f64 {
        self.margins.iter().map(|m| m.min).fold(f64::INFINITY, f64::min)
    }

    pub const CSV_HEADER: &'static str = "case_id,premises,lambda_subject,lambda_model,margin,conclusion";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.case_id,
            if self.premises_hold { "hold" } else { "fail" },
            fmt12(self.lambda_subject),
            fmt12(self.lambda_model),
            fmt12(self.min_margin()),
            if self.conclusion_holds { "hold" } else { "fail" }
        )
    }

    fn rounded(&self) -> ComparisonVerdict {
        let mut v = self.clone();
        v.lambda_subject = round12(v.lambda_subject);
        v.lambda_model = round12(v.lambda_model);
        v.tolerance = round12(v.tolerance);
        v.eigenfunction_residual = v.eigenfunction_residual.map(round12);
        for m in &mut v.margins {
            m.min = round12(m.min);
            m.max_abs = round12(m.max_abs);
        }
        v
    }
}

/// CSV summary of a batch, one row per verdict.
pub fn verdicts_csv(verdicts: &[ComparisonVerdict]) -> String {
    let mut s = String::from(ComparisonVerdict::CSV_HEADER);
    s.push('\n');
    for v in verdicts {
        s.push_str(&v.csv_row());
        s.push('\n');
    }
    s
}

/// JSON array of a batch.
pub fn verdicts_json(verdicts: &[ComparisonVerdict]) -> String {
    let rounded: Vec<_> = verdicts.iter().map(ComparisonVerdict::rounded).collect();
    serde_json::to_string_pretty(&rounded).expect("verdicts serialize")
}

/// Evaluation points `(t, theta)` for the subject, with `t > 0`.
fn subject_points(subject: &Subject, samples: usize) -> Vec<(f64, f64)> {
    match subject {
        Subject::Ball(b) => (1..=samples).map(|i| (b.r0 * i as f64 / samples as f64, 0.0)).collect(),
        Subject::Disk(p) => {
            let g = &p.grid;
            (0..=g.n_t).flat_map(|j| (0..g.n_theta).map(move |l| (g.t(j), g.theta(l)))).collect()
        }
    }
}

fn theta_values(subject: &Subject) -> Vec<f64> {
    match subject {
        Subject::Ball(_) => vec![0.0],
        Subject::Disk(p) => (0..p.grid.n_theta).map(|l| p.grid.theta(l)).collect(),
    }
}

/// `(J, J_t, J_tt)` of the subject at `(t, theta)`.
fn subject_metric(subject: &Subject, t: f64, theta: f64) -> [f64; 3] {
    match subject {
        Subject::Ball(b) => b.rho.eval(t),
        Subject::Disk(p) => p.metric(t, theta),
    }
}

fn subject_drift(subject: &Subject, t: f64, theta: f64) -> f64 {
    match subject {
        Subject::Ball(b) => b.drift.h(t),
        Subject::Disk(p) => p.vt(t, theta),
    }
}

fn subject_drift_derivative(subject: &Subject, t: f64, theta: f64) -> f64 {
    match subject {
        Subject::Ball(b) => b.drift.eval(t)[1],
        Subject::Disk(p) => {
            let d = 1e-5 * t.max(1e-3);
            (p.vt(t + d, theta) - p.vt(t - d, theta)) / (2.0 * d)
        }
    }
}

/// Radial curvature `-J_tt / J` of the subject.
fn subject_curvature(subject: &Subject, t: f64, theta: f64) -> Result<f64> {
    match subject {
        Subject::Ball(b) => b.curvature(t),
        Subject::Disk(_) => {
            let [j, _, jtt] = subject_metric(subject, t, theta);
            Ok(-jtt / j)
        }
    }
}

/// Principal eigenvalue of the subject, with its residual and the grid step.
fn subject_lambda(subject: &Subject, opts: &ComparisonOptions) -> Result<(f64, f64, f64)> {
    match subject {
        Subject::Ball(b) => {
            let mode = principal_eigenpair(b, &opts.radial)?;
            Ok((mode.lambda, mode.residual, b.r0 / opts.radial.n_t as f64))
        }
        Subject::Disk(p) => {
            let pair = principal_eigenpair_2d(&DiskOperator::new(p), 0.0, opts.disk_tol)?;
            Ok((pair.lambda, pair.residual, p.grid.dt()))
        }
    }
}

/// Checks whether `(J/rho)^(m-1)` is monotone along every ray in the given
/// direction (`increasing` or not), sampled at the premise points.
fn volume_ratio_monotone(subject: &Subject, model: &ModelBall, increasing: bool, samples: usize) -> bool {
    let m = model.m as i32 - 1;
    let mut ts: Vec<f64> = subject_points(subject, samples).iter().map(|p| p.0).collect();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    theta_values(subject).into_iter().all(|th| {
        let ratios: Vec<f64> = ts.iter().map(|&t| (subject_metric(subject, t, th)[0] / model.rho.rho(t)).powi(m)).collect();
        ratios.windows(2).all(|w| {
            let d = w[1] - w[0];
            let slack = 1e-12 * w[0].abs().max(1.0);
            if increasing {
                d >= -slack
            } else {
                d <= slack
            }
        })
    })
}

fn model_of(case: &ComparisonCase) -> Result<&ModelBall> {
    case.model.as_ref().ok_or_else(|| invalid(format!("case {} has no model ball", case.id)))
}

fn eigen_allowance(res_s: f64, res_m: f64, dt: f64, opts: &ComparisonOptions) -> f64 {
    res_s + res_m + opts.grid_allowance * dt * dt
}

/// Lower comparison: `K(d/dt, X) <= -rho''/rho` and `h1 <= h` imply
/// `lambda_subject >= lambda_model`.
pub fn verify_sectional_lower(case: &ComparisonCase, opts: &ComparisonOptions) -> Result<ComparisonVerdict> {
    let model = model_of(case)?;
    let subject = &case.subject;
    let mut curvature = Margin::new("curvature", opts.premise_tol);
    let mut drift = Margin::new("drift", opts.premise_tol);
    let mut sign_change = false;
    for (t, th) in subject_points(subject, opts.samples) {
        curvature.push(model.curvature(t)? - subject_curvature(subject, t, th)?);
        let h1 = subject_drift(subject, t, th);
        drift.push(model.drift.h(t) - h1);
        sign_change |= h1 < -opts.premise_tol;
    }
    let premises_hold = curvature.holds() && drift.holds();
    let (ls, rs, dt) = subject_lambda(subject, opts)?;
    let model_mode = principal_eigenpair(model, &opts.radial)?;
    let tolerance = eigen_allowance(rs, model_mode.residual, dt, opts);
    let equality_case = curvature.vanishes() && drift.vanishes();
    Ok(ComparisonVerdict {
        case_id: case.id.clone(),
        mode: case.mode,
        premises_hold,
        volume_ratio_monotone: Some(volume_ratio_monotone(subject, model, true, opts.samples)),
        margins: vec![curvature, drift],
        lambda_subject: ls,
        lambda_model: model_mode.lambda,
        tolerance,
        conclusion_holds: ls >= model_mode.lambda - tolerance,
        equality_case,
        outside_hypotheses: sign_change,
        eigenfunction_residual: None,
    })
}

/// Upper comparison: `Ricci(d/dt, d/dt) >= -(m-1) rho''/rho` and
/// `div V - |V|^2/2 >=` its model value imply `lambda_subject <= lambda_model`.
/// The subject drift must be radial and vanish at the origin; the model drift
/// must be nonnegative.
pub fn verify_ricci_upper(case: &ComparisonCase, opts: &ComparisonOptions) -> Result<ComparisonVerdict> {
    let model = model_of(case)?;
    let subject = &case.subject;
    let m1 = (model.m - 1) as f64;
    let thetas = theta_values(subject);
    if let Subject::Disk(p) = subject {
        for (t, th) in p.grid.nodes() {
            if p.vtheta(t, th) != 0.0 {
                return Err(invalid("the upper comparison needs a radial subject drift"));
            }
        }
    }
    for &th in &thetas {
        let h0 = subject_drift(subject, 0.0, th);
        if h0.abs() > opts.premise_tol {
            return Err(invalid(format!("subject drift is {h0} at the origin, expected 0")));
        }
    }
    let analytic_tol = match subject {
        Subject::Ball(_) => opts.premise_tol,
        Subject::Disk(_) => opts.difference_tol,
    };
    let mut ricci = Margin::new("ricci", opts.premise_tol);
    let mut extra = Margin::new("drift_condition", analytic_tol);
    let mut origin = Margin::new("drift_slope_at_origin", opts.premise_tol);
    let mut nonneg = Margin::new("model_drift_nonnegative", opts.premise_tol);
    let mut sign_change = false;
    for (t, th) in subject_points(subject, opts.samples) {
        ricci.push(m1 * (subject_curvature(subject, t, th)? - model.curvature(t)?));
        let [j, jt, _] = subject_metric(subject, t, th);
        let h1 = subject_drift(subject, t, th);
        let lhs = extra_condition_lhs(h1, subject_drift_derivative(subject, t, th), m1 * jt / j);
        extra.push(lhs - model.model_extra_condition(t));
        nonneg.push(model.drift.h(t));
        sign_change |= h1 < -opts.premise_tol;
    }
    // one-sided slopes at the origin with a step of a tenth of the grid step
    let step = match subject {
        Subject::Ball(_) => subject.r0() / opts.radial.n_t as f64 / 10.0,
        Subject::Disk(p) => p.grid.dt() / 10.0,
    };
    let model_slope = (model.drift.h(step) - model.drift.h(0.0)) / step;
    for &th in &thetas {
        let s = (subject_drift(subject, step, th) - subject_drift(subject, 0.0, th)) / step;
        origin.push(s - model_slope);
    }
    nonneg.push(model.drift.h(0.0));
    let premises_hold = ricci.holds() && extra.holds() && origin.holds() && nonneg.holds();
    let (ls, rs, dt) = subject_lambda(subject, opts)?;
    let model_mode = principal_eigenpair(model, &opts.radial)?;
    let tolerance = eigen_allowance(rs, model_mode.residual, dt, opts);
    let equality_case = ricci.vanishes() && extra.vanishes() && origin.vanishes();
    let eigenfunction_residual = if equality_case { Some(eigenfunction_relation_residual(subject, model, opts)?) } else { None };
    Ok(ComparisonVerdict {
        case_id: case.id.clone(),
        mode: case.mode,
        premises_hold,
        volume_ratio_monotone: Some(volume_ratio_monotone(subject, model, false, opts.samples)),
        margins: vec![ricci, extra, origin, nonneg],
        lambda_subject: ls,
        lambda_model: model_mode.lambda,
        tolerance,
        conclusion_holds: ls <= model_mode.lambda + tolerance,
        equality_case,
        outside_hypotheses: sign_change,
        eigenfunction_residual,
    })
}

/// `max |omega_V - omega_model e^((H1 - H)/2)|` with both sides scaled to
/// unit maximum.
fn eigenfunction_relation_residual(subject: &Subject, model: &ModelBall, opts: &ComparisonOptions) -> Result<f64> {
    let model_mode = principal_eigenpair(model, &opts.radial)?;
    let big_h = |t: f64| model.drift.eval(t)[2];
    match subject {
        Subject::Ball(b) => {
            let sm = principal_eigenpair(b, &opts.radial)?;
            let ts = &sm.samples.t;
            let target: Vec<f64> = ts
                .iter()
                .zip(&model_mode.samples.values)
                .map(|(&t, &w)| w * (0.5 * (b.drift.eval(t)[2] - big_h(t))).exp())
                .collect();
            Ok(sup_distance(&sm.samples.values, &target))
        }
        Subject::Disk(p) => {
            let pair = principal_eigenpair_2d(&DiskOperator::new(p), 0.0, opts.disk_tol)?;
            let target: Vec<f64> = p
                .grid
                .nodes()
                .map(|(t, th)| {
                    let h1_int = gauss_legendre(|s| p.vt(s, th), 0.0, t, 4);
                    model_mode.value_at(t) * (0.5 * (h1_int - big_h(t))).exp()
                })
                .collect();
            Ok(sup_distance(&pair.omega, &target))
        }
    }
}

fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    let ma = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mb = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).map(|(x, y)| (x / ma - y / mb).abs()).fold(0.0, f64::max)
}

/// `div V <= 0` implies `lambda_0 <= lambda_V`. When `div V` vanishes and the
/// field is purely angular, the equality case is recorded if `omega_V` is
/// radial and the two eigenvalues agree.
pub fn verify_divergence(id: &str, p: &DiskProblem, opts: &ComparisonOptions) -> Result<ComparisonVerdict> {
    let mut div = Margin::new("divergence", opts.difference_tol);
    let mut angular_only = true;
    for (t, th) in p.grid.nodes() {
        div.push(-p.divergence(t, th));
        angular_only &= p.vt(t, th) == 0.0;
    }
    let base = principal_eigenpair_2d(&DiskOperator::new(&p.without_drift()), 0.0, opts.disk_tol)?;
    let pair = principal_eigenpair_2d(&DiskOperator::new(p), 0.0, opts.disk_tol)?;
    let dt = p.grid.dt();
    let tolerance = eigen_allowance(base.residual, pair.residual, dt, opts);
    let equality_case = div.vanishes()
        && angular_only
        && (pair.lambda - base.lambda).abs() <= tolerance
        && pair.angular_std() <= opts.grid_allowance * dt * dt;
    Ok(ComparisonVerdict {
        case_id: id.into(),
        mode: ComparisonMode::Divergence,
        premises_hold: div.holds(),
        margins: vec![div],
        lambda_subject: pair.lambda,
        lambda_model: base.lambda,
        tolerance,
        conclusion_holds: base.lambda <= pair.lambda + tolerance,
        equality_case,
        volume_ratio_monotone: None,
        outside_hypotheses: false,
        eigenfunction_residual: None,
    })
}

/// Slacks of `lambda_V + (1/2) int (div V - 2 |grad w|^2) omega_0^2 <= lambda_0
/// <= lambda_V + (1/2) int div V omega_V^2`, with `w` the minimizer of the
/// quadratic functional at `omega_0` and both eigenfunctions normalized in L^2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SandwichReport {
    pub lambda_zero: f64,
    pub lambda_drift: f64,
    pub lower_slack: f64,
    pub upper_slack: f64,
    /// Combined solver residuals plus the grid allowance.
    pub tolerance: f64,
}

impl SandwichReport {
    pub fn holds(&self) -> bool {
        self.lower_slack >= -self.tolerance && self.upper_slack >= -self.tolerance
    }
}

pub fn sandwich(p: &DiskProblem, opts: &ComparisonOptions) -> Result<SandwichReport> {
    let zero = p.without_drift();
    let base = principal_eigenpair_2d(&DiskOperator::new(&zero), 0.0, opts.disk_tol)?;
    let pair = principal_eigenpair_2d(&DiskOperator::new(p), 0.0, opts.disk_tol)?;
    let weights = p.volume_weights();
    let div: Vec<f64> = p.grid.nodes().map(|(t, th)| p.divergence(t, th)).collect();
    let unit = |u: &[f64]| {
        let n: f64 = u.iter().zip(&weights).map(|(x, w)| w * x * x).sum::<f64>().sqrt();
        u.iter().map(|x| x / n).collect::<Vec<_>>()
    };
    let w0 = unit(&base.omega);
    let wv = unit(&pair.omega);
    let div_integral = |u: &[f64]| -> f64 { u.iter().zip(&weights).zip(&div).map(|((x, w), d)| w * d * x * x).sum() };
    let w = solve_w_u(p, &w0)?;
    let energy = weighted_dirichlet_energy(p, &w0, &w);
    let lower_slack = base.lambda - pair.lambda - 0.5 * div_integral(&w0) + energy;
    let upper_slack = pair.lambda + 0.5 * div_integral(&wv) - base.lambda;
    let dt = p.grid.dt();
    Ok(SandwichReport {
        lambda_zero: base.lambda,
        lambda_drift: pair.lambda,
        lower_slack,
        upper_slack,
        tolerance: eigen_allowance(base.residual, pair.residual, dt, opts),
    })
}

/// Sandwich slacks reported as a verdict.
pub fn verify_sandwich(id: &str, p: &DiskProblem, opts: &ComparisonOptions) -> Result<ComparisonVerdict> {
    let r = sandwich(p, opts)?;
    let slack = |name: &str, v: f64| Margin { name: name.into(), min: v, max_abs: v.abs(), tol: r.tolerance };
    let margins = vec![slack("lower_slack", r.lower_slack), slack("upper_slack", r.upper_slack)];
    let equality_case = margins.iter().all(Margin::vanishes);
    Ok(ComparisonVerdict {
        case_id: id.into(),
        mode: ComparisonMode::Sandwich,
        premises_hold: true,
        margins,
        lambda_subject: r.lambda_drift,
        lambda_model: r.lambda_zero,
        tolerance: r.tolerance,
        conclusion_holds: r.holds(),
        equality_case,
        volume_ratio_monotone: None,
        outside_hypotheses: false,
        eigenfunction_residual: None,
    })
}

/// Dispatches a case to its check.
pub fn run_case(case: &ComparisonCase, opts: &ComparisonOptions) -> Result<ComparisonVerdict> {
    match (case.mode, &case.subject) {
        (ComparisonMode::SectionalLower, _) => verify_sectional_lower(case, opts),
        (ComparisonMode::RicciUpper, _) => verify_ricci_upper(case, opts),
        (ComparisonMode::Divergence, Subject::Disk(p)) => verify_divergence(&case.id, p, opts),
        (ComparisonMode::Sandwich, Subject::Disk(p)) => verify_sandwich(&case.id, p, opts),
        (mode, Subject::Ball(_)) => Err(invalid(format!("mode {} needs a disk subject", mode.name()))),
    }
}

/// Runs every case on its own thread, at most `workers` at a time, and
/// returns the results in input order.
pub fn run_batch(cases: &[ComparisonCase], opts: &ComparisonOptions, workers: usize) -> Vec<Result<ComparisonVerdict>> {
    let workers = workers.max(1);
    let mut out: Vec<Option<Result<ComparisonVerdict>>> = (0..cases.len()).map(|_| None).collect();
    for (chunk_cases, chunk_out) in cases.chunks(workers).zip(out.chunks_mut(workers)) {
        std::thread::scope(|s| {
            for (case, slot) in chunk_cases.iter().zip(chunk_out.iter_mut()) {
                s.spawn(move || *slot = Some(run_case(case, opts)));
            }
        });
    }
    out.into_iter().map(|r| r.expect("every case ran")).collect()
}

/// Twelve ball pairs covering both theorems over three pairs of constant
/// curvatures and two pairs of drifts each, all with `r0 = 1`.
pub fn shipped_corpus() -> Vec<ComparisonCase> {
    let ball = |m: usize, kappa: f64, drift: DriftProfile| {
        let rho = WarpingFunction::space_form(kappa).expect("space form");
        ModelBall::new(m, 1.0, rho, drift).expect("valid ball")
    };
    let lin = DriftProfile::linear;
    let mut cases = Vec::new();
    // subject curvature below model curvature
    for (m, ks, km) in [(2, 0.0, 1.0), (3, -1.0, 0.0), (2, -1.0, 1.0)] {
        for (d, (h1, h)) in [(0.0, 0.0), (0.5, 1.0)].into_iter().enumerate() {
            let id = format!("lower_m{m}_k{ks}_vs_k{km}_d{d}");
            let case = ComparisonCase::new(id, Subject::Ball(ball(m, ks, lin(h1))), Some(ball(m, km, lin(h))), ComparisonMode::SectionalLower);
            cases.push(case.expect("consistent case"));
        }
    }
    // subject curvature above model curvature
    for (m, ks, km) in [(2, 1.0, 0.0), (3, 0.0, -1.0), (3, 1.0, -1.0)] {
        for (d, (h1, h)) in [(0.0, 0.0), (0.5, 0.0)].into_iter().enumerate() {
            let id = format!("upper_m{m}_k{ks}_vs_k{km}_d{d}");
            let case = ComparisonCase::new(id, Subject::Ball(ball(m, ks, lin(h1))), Some(ball(m, km, lin(h))), ComparisonMode::RicciUpper);
            cases.push(case.expect("consistent case"));
        }
    }
    cases
}

/// Central difference in `eps` of the principal eigenvalue for the gradient
/// drift `V = eps grad f`, against the exact first-order value `-c0` where
/// `Delta f = 2 c0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivativeReport {
    pub estimate: f64,
    pub c0: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
}

impl DerivativeReport {
    pub fn error(&self) -> f64 {
        (self.estimate + self.c0).abs()
    }
}

fn constant_laplacian(values: impl Iterator<Item = f64>, tol: f64) -> Result<f64> {
    let v: Vec<f64> = values.collect();
    let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(*x), b.max(*x)));
    if !(hi - lo <= tol) {
        return Err(invalid(format!("Laplacian of f is not constant: ranges over [{lo}, {hi}]")));
    }
    Ok(0.5 * (lo + hi))
}

/// Radial version on a zero-drift ball; `grad_f` carries `(f', f'', f)`.
pub fn derivative_lambda_eps_radial(ball: &ModelBall, grad_f: &DriftProfile, eps: f64, opts: &ComparisonOptions) -> Result<DerivativeReport> {
    if !(eps > 0.0) {
        return Err(invalid("eps must be positive"));
    }
    let probe = ball.with_drift(grad_f.clone());
    let n = opts.samples;
    let lap = constant_laplacian((0..=n).map(|i| probe.drift_divergence(ball.r0 * i as f64 / n as f64)), opts.difference_tol)?;
    let lp = principal_eigenpair(&ball.with_drift(grad_f.scaled(eps)), &opts.radial)?.lambda;
    let lm = principal_eigenpair(&ball.with_drift(grad_f.scaled(-eps)), &opts.radial)?.lambda;
    Ok(DerivativeReport { estimate: (lp - lm) / (2.0 * eps), c0: 0.5 * lap, lambda_plus: lp, lambda_minus: lm })
}

/// Disk version; `f` returns `(f_t, f_theta)` and the drift of `p` is replaced
/// by `eps grad f = eps (f_t, f_theta / J^2)`.
pub fn derivative_lambda_eps_2d(
    p: &DiskProblem,
    f: Arc<dyn Fn(f64, f64) -> [f64; 2] + Send + Sync>,
    eps: f64,
    opts: &ComparisonOptions,
) -> Result<DerivativeReport> {
    if !(eps > 0.0) {
        return Err(invalid("eps must be positive"));
    }
    let field = |s: f64| {
        let (f1, f2) = (f.clone(), f.clone());
        let metric = p.metric_fn();
        let vt: ScalarFn = Arc::new(move |t, th| s * f1(t, th)[0]);
        let vth: ScalarFn = Arc::new(move |t, th| {
            let j = metric(t, th)[0];
            s * f2(t, th)[1] / (j * j)
        });
        p.with_drift(vt, vth)
    };
    let unit = field(1.0);
    let lap = constant_laplacian(p.grid.nodes().map(|(t, th)| unit.divergence(t, th)), opts.difference_tol)?;
    let solve = |q: &DiskProblem| principal_eigenpair_2d(&DiskOperator::new(q), 0.0, opts.disk_tol).map(|e| e.lambda);
    let lp = solve(&field(eps))?;
    let lm = solve(&field(-eps))?;
    Ok(DerivativeReport { estimate: (lp - lm) / (2.0 * eps), c0: 0.5 * lap, lambda_plus: lp, lambda_minus: lm })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiccatiOptions {
    pub n_t: usize,
    /// `u'(0)`; the regular solution has slope 0.
    pub initial_slope: f64,
}

impl Default for RiccatiOptions {
    fn default() -> Self {
        RiccatiOptions { n_t: 512, initial_slope: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiccatiReport {
    pub t: Vec<f64>,
    pub h_recovered: Vec<f64>,
    pub sup_error: f64,
}

impl RiccatiReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,h_recovered\n");
        for (t, h) in self.t.iter().zip(&self.h_recovered) {
            s.push_str(&format!("{},{}\n", fmt12(*t), fmt12(*h)));
        }
        s
    }
}

/// Solves `u'' + Delta r u' + (q0/2) u = 0`, `q0 = h' - h^2/2 + h Delta r`,
/// from the regular series at the origin and recovers `h1 = -2 u'/u`.
/// Since `h` itself solves the Riccati equation with `h(0) = 0`, the recovered
/// field must reproduce it. A start off the regular branch, or `u` reaching
/// zero, is reported as [`Error::LogarithmicBranch`].
pub fn riccati_uniqueness(ball: &ModelBall, opts: &RiccatiOptions) -> Result<RiccatiReport> {
    if opts.n_t < 8 {
        return Err(invalid("riccati needs at least 8 grid steps"));
    }
    let m = ball.m as f64;
    let q0 = |t: f64| ball.model_extra_condition(t);
    let lap = |t: f64| ball.laplacian_r(t);
    let hpp0 = ball.drift.second_derivative(0.0);
    let c2 = -q0(0.0) / (4.0 * m);
    let c3 = -hpp0 / 12.0;
    let s = opts.initial_slope;
    let eps = 1e-3 * ball.r0 / opts.n_t as f64;
    let mut u = 1.0 + s * eps + c2 * eps * eps + c3 * eps.powi(3);
    let mut du = s + 2.0 * c2 * eps + 3.0 * c3 * eps * eps;
    let h_eps = -2.0 * du / u;
    if (h_eps - ball.drift.h(eps)).abs() > 1e-6 * (1.0 + ball.drift.h(eps).abs()) {
        return Err(Error::LogarithmicBranch { t: eps, h1: h_eps });
    }
    let rhs = |t: f64, y: [f64; 2]| [y[1], -lap(t) * y[1] - 0.5 * q0(t) * y[0]];
    let rk4 = |t: f64, y: [f64; 2], h: f64| {
        let k1 = rhs(t, y);
        let k2 = rhs(t + h / 2.0, [y[0] + h / 2.0 * k1[0], y[1] + h / 2.0 * k1[1]]);
        let k3 = rhs(t + h / 2.0, [y[0] + h / 2.0 * k2[0], y[1] + h / 2.0 * k2[1]]);
        let k4 = rhs(t + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
        [
            y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ]
    };
    let dt = ball.r0 / opts.n_t as f64;
    let mut t = eps;
    let (mut ts, mut hs) = (Vec::with_capacity(opts.n_t), Vec::with_capacity(opts.n_t));
    let mut sup_error = 0.0f64;
    for j in 1..=opts.n_t {
        let target = j as f64 * dt;
        while t < target {
            // steps proportional to t near the origin, where Delta r ~ (m-1)/t
            let h = (0.05 * t).max(1e-3 * dt).min(dt / 4.0).min(target - t);
            let y = rk4(t, [u, du], h);
            t = if target - (t + h) < 1e-15 * target { target } else { t + h };
            u = y[0];
            du = y[1];
            if !(u > 0.0) {
                return Err(Error::LogarithmicBranch { t, h1: -2.0 * du / u });
            }
        }
        let h1 = -2.0 * du / u;
        sup_error = sup_error.max((h1 - ball.drift.h(target)).abs());
        ts.push(target);
        hs.push(h1);
    }
    Ok(RiccatiReport { t: ts, h_recovered: hs, sup_error })
}

/// `|int phi u_t dM + int u (phi_t + phi Delta r) dM|` on a disk, with `u`
/// vanishing on the boundary ring and `phi` vanishing at the origin.
/// Both integrals use the cell-centred volume weights plus a half cell at the
/// boundary.
pub fn radial_ibp_check(p: &DiskProblem, u: &[f64], phi: &[f64]) -> Result<f64> {
    let g: PolarGrid = p.grid;
    if u.len() != g.len() || phi.len() != g.len() {
        return Err(invalid("sample vectors must match the grid"));
    }
    if g.n_t < 4 {
        return Err(invalid("the probe needs at least 4 rings"));
    }
    let (n, nth, dt) = (g.n_t, g.n_theta, g.dt());
    let at = |v: &[f64], j: usize, l: usize| v[g.index(j, l)];
    let (mut lhs, mut rhs) = (0.0, 0.0);
    for l in 0..nth {
        let th = g.theta(l);
        let anti = (l + nth / 2) % nth;
        for j in 0..n {
            let t = g.t(j);
            // even extension of u through the origin, odd extension of phi
            let (u_prev, phi_prev) = if j == 0 { (at(u, 0, anti), -at(phi, 0, l)) } else { (at(u, j - 1, l), at(phi, j - 1, l)) };
            let (u_next, phi_next) = if j + 1 == n {
                (0.0, 3.0 * at(phi, n - 1, l) - 3.0 * at(phi, n - 2, l) + at(phi, n - 3, l))
            } else {
                (at(u, j + 1, l), at(phi, j + 1, l))
            };
            let u_t = (u_next - u_prev) / (2.0 * dt);
            let phi_t = (phi_next - phi_prev) / (2.0 * dt);
            let [jac, jac_t, _] = p.metric(t, th);
            let w = jac * dt * g.dtheta();
            lhs += w * at(phi, j, l) * u_t;
            rhs -= w * at(u, j, l) * (phi_t + at(phi, j, l) * jac_t / jac);
        }
        // boundary half cell: u = 0 there, so only the left side contributes
        let r0 = g.r0;
        let phi_b = 3.0 * at(phi, n - 1, l) - 3.0 * at(phi, n - 2, l) + at(phi, n - 3, l);
        let u_t_b = (-4.0 * at(u, n - 1, l) + at(u, n - 2, l)) / (2.0 * dt);
        lhs += p.j(r0, th) * 0.5 * dt * g.dtheta() * phi_b * u_t_b;
    }
    Ok((lhs - rhs).abs())
}

/// Checks, on a sampled interval, that `div(h1 d/dt) >= 0` everywhere exactly
/// when `h1 J^(m-1)` is nondecreasing. `h1` returns `(h1, h1')` and `metric`
/// returns `(J, J')`. Returns `(divergence_nonnegative, flux_nondecreasing)`.
pub fn divergence_monotonicity(
    h1: impl Fn(f64) -> [f64; 2],
    metric: impl Fn(f64) -> [f64; 2],
    m: usize,
    t1: f64,
    t2: f64,
    samples: usize,
) -> Result<(bool, bool)> {
    if !(t1 > 0.0 && t2 > t1) || samples < 2 {
        return Err(invalid("need 0 < t1 < t2 and at least two samples"));
    }
    let m1 = (m - 1) as f64;
    let ts: Vec<f64> = (0..=samples).map(|i| t1 + (t2 - t1) * i as f64 / samples as f64).collect();
    let div_ok = ts.iter().all(|&t| {
        let [h, dh] = h1(t);
        let [j, dj] = metric(t);
        dh + m1 * h * dj / j >= 0.0
    });
    let flux: Vec<f64> = ts.iter().map(|&t| h1(t)[0] * metric(t)[0].powi(m as i32 - 1)).collect();
    let mono = flux.windows(2).all(|w| w[1] >= w[0]);
    Ok((div_ok, mono))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn margin_tracks_extremes() {
        let mut m = Margin::new("x", 1e-9);
        m.push(0.5);
        m.push(-0.25);
        assert_eq!(m.min, -0.25);
        assert_eq!(m.max_abs, 0.5);
        assert!(!m.holds());
    }

    #[test]
    fn case_validation() {
        let a = ModelBall::euclidean(2, 1.0).unwrap();
        let b = ModelBall::euclidean(3, 1.0).unwrap();
        assert!(ComparisonCase::new("x", Subject::Ball(a.clone()), Some(b), ComparisonMode::SectionalLower).is_err());
        assert!(ComparisonCase::new("x", Subject::Ball(a.clone()), None, ComparisonMode::RicciUpper).is_err());
        assert!(ComparisonCase::new("x", Subject::Ball(a), None, ComparisonMode::Divergence).is_err());
    }

    #[test]
    fn corpus_shape() {
        let c = shipped_corpus();
        assert_eq!(c.len(), 12);
        let mut ids: Vec<_> = c.iter().map(|x| x.id.clone()).collect();
        ids.dedup();
        assert_eq!(ids.len(), 12);
    }
}
