//! Configuration, dispatch and sweep runner behind the `drift-spectra` binary.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use drift_spectra::comparison::{
    riccati_uniqueness, run_batch, shipped_corpus, verdicts_csv, verdicts_json, ComparisonCase, ComparisonMode,
    ComparisonOptions, ComparisonVerdict, RiccatiOptions, Subject,
};
use drift_spectra::disk::{build_model_disk, principal_and_adjoint, MetricFn, ScalarFn};
use drift_spectra::expr::{Expr, Var};
use drift_spectra::output::{fmt12, round12};
use drift_spectra::variational::{barta_bracket, holland_at_optimum, holland_bound};
use drift_spectra::{
    assemble_spectrum, principal_eigenpair, principal_eigenpair_2d, DiskOperator, DiskProblem, DriftProfile,
    ModelBall, PolarGrid, SolverOptions, WarpingFunction,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_SOLVER: i32 = 1;
pub const EXIT_PREMISE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_CANT_CREATE: i32 = 73;

/// Environment variable that overrides the sweep worker count.
pub const WORKERS_ENV: &str = "DRIFT_SPECTRA_WORKERS";

const RICCATI_TOL: f64 = 1e-6;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("solver error: {0}")]
    Solver(#[from] drift_spectra::Error),
    #[error("cannot write {path}: {source}")]
    Output { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Solver(_) => EXIT_SOLVER,
            CliError::Output { .. } => EXIT_CANT_CREATE,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Problem construction errors are configuration mistakes, not solver failures.
fn bad_input(e: drift_spectra::Error) -> CliError {
    CliError::Usage(e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandName {
    Spectrum,
    Principal,
    Disk2d,
    Bounds,
    Compare,
    Riccati,
    Sweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubjectKind {
    #[default]
    Ball,
    Disk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CompareMode {
    #[default]
    Lower,
    Upper,
    Divergence,
    Sandwich,
}

impl From<CompareMode> for ComparisonMode {
    fn from(m: CompareMode) -> Self {
        match m {
            CompareMode::Lower => ComparisonMode::SectionalLower,
            CompareMode::Upper => ComparisonMode::RicciUpper,
            CompareMode::Divergence => ComparisonMode::Divergence,
            CompareMode::Sandwich => ComparisonMode::Sandwich,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemConfig {
    /// Constant curvature of the space form; ignored when `warping` is set.
    pub space_form: f64,
    /// Warping function `rho(t)` as an expression.
    pub warping: Option<String>,
    pub dim: usize,
    pub radius: f64,
    /// Radial drift component; may depend on `theta` for disk problems.
    pub drift: String,
    pub angular_drift: Option<String>,
    /// Relative metric perturbation `P(t, theta)` with `J = rho (1 + P)`.
    pub perturbation: Option<String>,
    pub subject: SubjectKind,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        ProblemConfig {
            space_form: 0.0,
            warping: None,
            dim: 2,
            radius: 1.0,
            drift: "0".into(),
            angular_drift: None,
            perturbation: None,
            subject: SubjectKind::Ball,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub space_form: f64,
    pub warping: Option<String>,
    pub drift: String,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig { space_form: 0.0, warping: None, drift: "0".into() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Numerics {
    pub n_t: Option<usize>,
    pub n_theta: Option<usize>,
    pub tol: Option<f64>,
    pub lambda_cutoff: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    pub format: Format,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareConfig {
    pub mode: CompareMode,
    /// Run the built-in twelve-case corpus instead of a single case.
    pub corpus: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub name: String,
    pub values: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub axes: Vec<Axis>,
    pub workers: Option<usize>,
}

/// Everything one invocation needs. Mirrors the TOML accepted by `--config`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<CommandName>,
    pub problem: ProblemConfig,
    pub model: ModelConfig,
    pub numerics: Numerics,
    pub output: OutputConfig,
    pub compare: CompareConfig,
    pub sweep: SweepConfig,
}

impl RunConfig {
    pub fn from_toml(src: &str) -> Result<Self, CliError> {
        toml::from_str(src).map_err(|e| usage(format!("config: {e}")))
    }

    fn is_disk(&self) -> bool {
        self.problem.subject == SubjectKind::Disk || matches!(self.command, Some(CommandName::Disk2d | CommandName::Bounds))
    }

    fn n_t(&self) -> usize {
        self.numerics.n_t.unwrap_or(if self.is_disk() { 192 } else { 512 })
    }

    fn n_theta(&self) -> usize {
        self.numerics.n_theta.unwrap_or(128)
    }

    fn tol(&self) -> f64 {
        self.numerics.tol.unwrap_or(if self.is_disk() { 1e-6 } else { 1e-8 })
    }

    fn solver_options(&self) -> SolverOptions {
        let n_t = self.numerics.n_t.unwrap_or(512);
        SolverOptions { n_t, tol: self.numerics.tol.unwrap_or(1e-8) }
    }

    /// Sets one sweepable parameter from its text value.
    pub fn set_param(&mut self, name: &str, value: &str) -> Result<(), CliError> {
        let num = |v: &str| v.trim().parse::<f64>().map_err(|_| usage(format!("{name}: not a number: {v}")));
        let int = |v: &str| v.trim().parse::<usize>().map_err(|_| usage(format!("{name}: not an integer: {v}")));
        match name {
            "space-form" => self.problem.space_form = num(value)?,
            "warping" => self.problem.warping = Some(value.to_string()),
            "dim" => self.problem.dim = int(value)?,
            "radius" => self.problem.radius = num(value)?,
            "drift" => self.problem.drift = value.to_string(),
            "angular-drift" => self.problem.angular_drift = Some(value.to_string()),
            "perturbation" => self.problem.perturbation = Some(value.to_string()),
            "n-t" => self.numerics.n_t = Some(int(value)?),
            "n-theta" => self.numerics.n_theta = Some(int(value)?),
            "tol" => self.numerics.tol = Some(num(value)?),
            "model-space-form" => self.model.space_form = num(value)?,
            "model-drift" => self.model.drift = value.to_string(),
            _ => return Err(usage(format!("unknown sweep parameter '{name}'"))),
        }
        Ok(())
    }
}

#[derive(Debug, Parser, Default)]
#[command(name = "drift-spectra", version, about = "Principal eigenvalues and comparison checks for drift Laplacians on geodesic balls")]
#[command(allow_negative_numbers = true)]
pub struct Cli {
    /// What to compute.
    #[arg(value_enum)]
    pub command: Option<CommandName>,
    /// TOML file with the same sections as the run configuration; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Curvature of the constant-curvature warping function.
    #[arg(long)]
    pub space_form: Option<f64>,
    /// Warping function rho(t) as an expression; overrides --space-form.
    #[arg(long)]
    pub warping: Option<String>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub radius: Option<f64>,
    /// Radial drift component h(t), or h(t, theta) on disks.
    #[arg(long)]
    pub drift: Option<String>,
    /// Angular drift coefficient (disks only).
    #[arg(long)]
    pub angular_drift: Option<String>,
    /// Metric perturbation P(t, theta), J = rho (1 + P) (disks only).
    #[arg(long)]
    pub perturbation: Option<String>,
    /// Treat the problem as a two-dimensional disk.
    #[arg(long, value_enum)]
    pub subject: Option<SubjectKind>,
    /// Eigenvalue cutoff for `spectrum`.
    #[arg(long)]
    pub cutoff: Option<f64>,
    #[arg(long)]
    pub n_t: Option<usize>,
    #[arg(long)]
    pub n_theta: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Result file; without it the result goes to standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Comparison to check with `compare`.
    #[arg(long, value_enum)]
    pub mode: Option<CompareMode>,
    /// Run the built-in comparison corpus.
    #[arg(long)]
    pub corpus: bool,
    #[arg(long)]
    pub model_space_form: Option<f64>,
    #[arg(long)]
    pub model_warping: Option<String>,
    #[arg(long)]
    pub model_drift: Option<String>,
    /// Sweep axis as `name=v1,v2,...`; repeatable.
    #[arg(long = "axis")]
    pub axes: Vec<String>,
    #[arg(long)]
    pub workers: Option<usize>,
}

impl Cli {
    /// Loads `--config` if given and applies every flag on top of it.
    pub fn into_config(self) -> Result<RunConfig, CliError> {
        let mut c = match &self.config {
            Some(path) => {
                let src = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
                RunConfig::from_toml(&src)?
            }
            None => RunConfig::default(),
        };
        if self.command.is_some() {
            c.command = self.command;
        }
        let p = &mut c.problem;
        if let Some(v) = self.space_form {
            p.space_form = v;
        }
        if self.warping.is_some() {
            p.warping = self.warping;
        }
        if let Some(v) = self.dim {
            p.dim = v;
        }
        if let Some(v) = self.radius {
            p.radius = v;
        }
        if let Some(v) = self.drift {
            p.drift = v;
        }
        if self.angular_drift.is_some() {
            p.angular_drift = self.angular_drift;
        }
        if self.perturbation.is_some() {
            p.perturbation = self.perturbation;
        }
        if let Some(v) = self.subject {
            p.subject = v;
        }
        let n = &mut c.numerics;
        n.lambda_cutoff = self.cutoff.or(n.lambda_cutoff);
        n.n_t = self.n_t.or(n.n_t);
        n.n_theta = self.n_theta.or(n.n_theta);
        n.tol = self.tol.or(n.tol);
        if self.output.is_some() {
            c.output.path = self.output;
        }
        if let Some(f) = self.format {
            c.output.format = f;
        }
        if let Some(m) = self.mode {
            c.compare.mode = m;
        }
        c.compare.corpus |= self.corpus;
        if let Some(v) = self.model_space_form {
            c.model.space_form = v;
        }
        if self.model_warping.is_some() {
            c.model.warping = self.model_warping;
        }
        if let Some(v) = self.model_drift {
            c.model.drift = v;
        }
        for a in &self.axes {
            c.sweep.axes.push(parse_axis(a)?);
        }
        c.sweep.workers = self.workers.or(c.sweep.workers);
        Ok(c)
    }
}

/// Parses `name=v1,v2,...`. Expressions never contain commas, since every
/// function in the grammar takes one argument.
pub fn parse_axis(src: &str) -> Result<Axis, CliError> {
    let (name, values) = src.split_once('=').ok_or_else(|| usage(format!("axis '{src}' is not name=v1,v2,...")))?;
    let values: Vec<String> = values.split(',').map(|v| v.trim().to_string()).filter(|v| !v.is_empty()).collect();
    if values.is_empty() {
        return Err(usage(format!("axis '{name}' has no values")));
    }
    Ok(Axis { name: name.trim().to_string(), values })
}

fn warping(space_form: f64, expr: Option<&str>) -> Result<WarpingFunction, CliError> {
    match expr {
        Some(src) => WarpingFunction::from_expression(src, f64::INFINITY),
        None => WarpingFunction::space_form(space_form),
    }
    .map_err(bad_input)
}

fn build_ball(c: &RunConfig) -> Result<ModelBall, CliError> {
    let p = &c.problem;
    let drift = DriftProfile::from_expression(&p.drift).map_err(bad_input)?;
    ModelBall::new(p.dim, p.radius, warping(p.space_form, p.warping.as_deref())?, drift).map_err(bad_input)
}

fn build_model(c: &RunConfig) -> Result<ModelBall, CliError> {
    let m = &c.model;
    let drift = DriftProfile::from_expression(&m.drift).map_err(bad_input)?;
    ModelBall::new(c.problem.dim, c.problem.radius, warping(m.space_form, m.warping.as_deref())?, drift).map_err(bad_input)
}

fn scalar(src: &str) -> Result<ScalarFn, CliError> {
    Ok(Expr::parse(src).map_err(bad_input)?.into_fn())
}

fn build_disk(c: &RunConfig) -> Result<DiskProblem, CliError> {
    let p = &c.problem;
    if p.dim != 2 {
        return Err(usage(format!("disk problems are two-dimensional; got --dim {}", p.dim)));
    }
    let rho = warping(p.space_form, p.warping.as_deref())?;
    let ball = ModelBall::new(2, p.radius, rho, DriftProfile::zero()).map_err(bad_input)?;
    let grid = PolarGrid::new(c.n_t(), c.n_theta(), p.radius).map_err(bad_input)?;
    let perturbation: Option<MetricFn> = match &p.perturbation {
        None => None,
        Some(src) => {
            let e = Expr::parse(src).map_err(bad_input)?;
            let d1 = e.derivative(Var::T);
            let d2 = d1.derivative(Var::T);
            Some(Arc::new(move |t, th| [e.eval(t, th), d1.eval(t, th), d2.eval(t, th)]))
        }
    };
    let angular = p.angular_drift.as_deref().map(scalar).transpose()?;
    let disk = build_model_disk(&ball, grid, perturbation, angular).map_err(bad_input)?;
    let vt = scalar(&p.drift)?;
    Ok(disk.with_drift(vt, disk.vtheta_fn()))
}

/// Result of a successful invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    /// One-line human summary.
    pub summary: String,
    /// File contents in the requested format.
    pub body: String,
    pub exit_code: i32,
}

impl Outcome {
    fn ok(summary: String, body: String) -> Self {
        Outcome { summary, body, exit_code: EXIT_OK }
    }
}

/// Runs a configuration and writes its result file if one was requested.
pub fn run(c: &RunConfig) -> Result<Outcome, CliError> {
    let out = compute(c)?;
    if let Some(path) = &c.output.path {
        write_output(path, &out.body)?;
    }
    Ok(out)
}

pub fn write_output(path: &Path, body: &str) -> Result<(), CliError> {
    std::fs::write(path, body).map_err(|source| CliError::Output { path: path.to_path_buf(), source })
}

/// Computes without touching the filesystem.
pub fn compute(c: &RunConfig) -> Result<Outcome, CliError> {
    let command = c.command.ok_or_else(|| usage("no command given (spectrum, principal, disk2d, bounds, compare, riccati, sweep)"))?;
    match command {
        CommandName::Spectrum => spectrum(c),
        CommandName::Principal => principal(c),
        CommandName::Disk2d => disk2d(c),
        CommandName::Bounds => bounds(c),
        CommandName::Compare => compare(c),
        CommandName::Riccati => riccati(c),
        CommandName::Sweep => sweep(c),
    }
}

fn spectrum(c: &RunConfig) -> Result<Outcome, CliError> {
    let ball = build_ball(c)?;
    let cutoff = c.numerics.lambda_cutoff.ok_or_else(|| usage("spectrum needs --cutoff"))?;
    let opts = c.solver_options();
    let table = assemble_spectrum(&ball, cutoff, &opts)?;
    let count: u64 = table.entries.iter().map(|e| e.multiplicity).sum();
    let summary = format!(
        "spectrum: {} distinct eigenvalues ({count} with multiplicity) below {}; lowest {}",
        table.entries.len(),
        fmt12(cutoff),
        table.entries.first().map_or("none".into(), |e| fmt12(e.lambda))
    );
    let body = match c.output.format {
        Format::Csv => table.to_csv(),
        Format::Json => pretty(json!({
            "lambda_cutoff": round12(cutoff),
            "dim": ball.m,
            "radius": round12(ball.r0),
            "n_t": opts.n_t,
            "tol": opts.tol,
            "entries": table.entries.iter().map(|e| json!({
                "lambda": round12(e.lambda), "k": e.k, "i": e.i, "multiplicity": e.multiplicity,
            })).collect::<Vec<_>>(),
        })),
    };
    Ok(Outcome::ok(summary, body))
}

fn principal(c: &RunConfig) -> Result<Outcome, CliError> {
    let ball = build_ball(c)?;
    let opts = c.solver_options();
    let mode = principal_eigenpair(&ball, &opts)?;
    let summary = format!("principal: lambda = {} (residual {})", fmt12(mode.lambda), fmt12(mode.residual));
    let body = match c.output.format {
        Format::Csv => mode.samples.to_csv(),
        Format::Json => pretty(json!({
            "lambda": round12(mode.lambda),
            "residual": round12(mode.residual),
            "dim": ball.m,
            "radius": round12(ball.r0),
            "drift": ball.drift.label(),
            "n_t": opts.n_t,
            "tol": opts.tol,
        })),
    };
    Ok(Outcome::ok(summary, body))
}

fn disk2d(c: &RunConfig) -> Result<Outcome, CliError> {
    let p = build_disk(c)?;
    let pair = principal_eigenpair_2d(&DiskOperator::new(&p), 0.0, c.tol())?;
    let summary = format!(
        "disk2d: lambda = {} on {}x{} (residual {}, {} iterations)",
        fmt12(pair.lambda),
        p.grid.n_t,
        p.grid.n_theta,
        fmt12(pair.residual),
        pair.iterations
    );
    let body = match c.output.format {
        Format::Csv => pair.to_csv(),
        Format::Json => pair.summary_json(),
    };
    Ok(Outcome::ok(summary, body))
}

fn bounds(c: &RunConfig) -> Result<Outcome, CliError> {
    let p = build_disk(c)?;
    let op = DiskOperator::new(&p);
    let (fwd, _) = principal_and_adjoint(&op, c.tol())?;
    let r0 = p.grid.r0;
    let paraboloid = p.grid.sample(|t, _| r0 * r0 - t * t);
    let rows = [
        ("paraboloid", barta_bracket(&op, &paraboloid)?, holland_bound(&p, &op, &paraboloid)?),
        ("principal", barta_bracket(&op, &fwd.omega)?, holland_at_optimum(&p, &op, &fwd.omega)?),
    ];
    let summary = format!(
        "bounds: lambda = {}; paraboloid Barta [{}, {}], Holland {}; at the principal pair Holland {}",
        fmt12(fwd.lambda),
        fmt12(rows[0].1.lower),
        fmt12(rows[0].1.upper),
        fmt12(rows[0].2.bound),
        fmt12(rows[1].2.bound)
    );
    let body = match c.output.format {
        Format::Csv => {
            let mut s = String::from("trial,barta_lower,barta_upper,excluded_rings,l_value,q_min,holland_bound\n");
            for (name, b, h) in &rows {
                s.push_str(&format!("{name},{},{}\n", b.csv_row(), h.csv_row()));
            }
            s
        }
        Format::Json => pretty(json!({
            "lambda": round12(fwd.lambda),
            "residual": round12(fwd.residual),
            "grid": {"n_t": p.grid.n_t, "n_theta": p.grid.n_theta, "r0": round12(r0)},
            "trials": rows.iter().map(|(name, b, h)| json!({
                "trial": name,
                "barta_lower": round12(b.lower),
                "barta_upper": round12(b.upper),
                "excluded_rings": b.excluded_rings,
                "l_value": round12(h.l_value),
                "q_min": round12(h.q_min),
                "holland_bound": round12(h.bound),
            })).collect::<Vec<_>>(),
        })),
    };
    Ok(Outcome::ok(summary, body))
}

fn comparison_options(c: &RunConfig) -> ComparisonOptions {
    let mut o = ComparisonOptions { radial: c.solver_options(), ..Default::default() };
    if let Some(t) = c.numerics.tol {
        o.disk_tol = t.min(o.disk_tol);
    }
    o
}

fn compare(c: &RunConfig) -> Result<Outcome, CliError> {
    let opts = comparison_options(c);
    let cases = if c.compare.corpus {
        shipped_corpus()
    } else {
        let mode: ComparisonMode = c.compare.mode.into();
        let subject = if c.problem.subject == SubjectKind::Disk { Subject::Disk(build_disk(c)?) } else { Subject::Ball(build_ball(c)?) };
        let model = match mode {
            ComparisonMode::SectionalLower | ComparisonMode::RicciUpper => Some(build_model(c)?),
            _ => None,
        };
        vec![ComparisonCase::new(mode.name(), subject, model, mode).map_err(bad_input)?]
    };
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let verdicts: Vec<ComparisonVerdict> = run_batch(&cases, &opts, workers).into_iter().collect::<Result<_, _>>()?;
    let failed_premises = verdicts.iter().filter(|v| !v.premises_hold).count();
    let violations = verdicts.iter().filter(|v| v.is_violation()).count();
    let summary = if let [v] = verdicts.as_slice() {
        format!(
            "compare {}: premises {}, lambda_subject = {}, lambda_model = {}, min margin {}, conclusion {}",
            v.case_id,
            if v.premises_hold { "hold" } else { "fail" },
            fmt12(v.lambda_subject),
            fmt12(v.lambda_model),
            fmt12(v.min_margin()),
            if v.conclusion_holds { "holds" } else { "fails" }
        )
    } else {
        format!("compare: {} cases, {failed_premises} with failing premises, {violations} violations", verdicts.len())
    };
    let body = match c.output.format {
        Format::Csv => verdicts_csv(&verdicts),
        Format::Json => verdicts_json(&verdicts),
    };
    let exit_code = if failed_premises > 0 {
        EXIT_PREMISE
    } else if violations > 0 {
        EXIT_SOLVER
    } else {
        EXIT_OK
    };
    Ok(Outcome { summary, body, exit_code })
}

fn riccati(c: &RunConfig) -> Result<Outcome, CliError> {
    let ball = build_ball(c)?;
    let opts = RiccatiOptions { n_t: c.numerics.n_t.unwrap_or(512), ..Default::default() };
    let report = riccati_uniqueness(&ball, &opts)?;
    let ok = report.sup_error < RICCATI_TOL;
    let summary = format!(
        "riccati: recovered the drift with sup error {} ({})",
        fmt12(report.sup_error),
        if ok { "within 1e-6" } else { "above 1e-6" }
    );
    let body = match c.output.format {
        Format::Csv => report.to_csv(),
        Format::Json => pretty(json!({
            "sup_error": round12(report.sup_error),
            "n_t": opts.n_t,
            "dim": ball.m,
            "drift": ball.drift.label(),
        })),
    };
    Ok(Outcome { summary, body, exit_code: if ok { EXIT_OK } else { EXIT_SOLVER } })
}

/// Worker count: the environment variable wins over the configuration.
pub fn sweep_workers(c: &RunConfig) -> Result<usize, CliError> {
    let from_env = match std::env::var(WORKERS_ENV) {
        Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| usage(format!("{WORKERS_ENV} must be a positive integer, got '{v}'")))?),
        Err(_) => None,
    };
    let n = from_env.or(c.sweep.workers).unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if n == 0 {
        return Err(usage("workers must be at least 1"));
    }
    Ok(n)
}

/// Every configuration of the sweep, first axis slowest.
pub fn sweep_points(c: &RunConfig) -> Result<Vec<(Vec<String>, RunConfig)>, CliError> {
    let axes = &c.sweep.axes;
    if axes.is_empty() {
        return Err(usage("sweep needs at least one --axis name=v1,v2,..."));
    }
    let mut base = c.clone();
    base.command = Some(if c.problem.subject == SubjectKind::Disk { CommandName::Disk2d } else { CommandName::Principal });
    base.output = OutputConfig::default();
    base.sweep = SweepConfig::default();
    let mut points = vec![(Vec::new(), base)];
    for axis in axes {
        if axis.values.is_empty() {
            return Err(usage(format!("axis '{}' has no values", axis.name)));
        }
        let mut next = Vec::with_capacity(points.len() * axis.values.len());
        for (keys, cfg) in &points {
            for v in &axis.values {
                let mut cfg = cfg.clone();
                cfg.set_param(&axis.name, v)?;
                let mut keys = keys.clone();
                keys.push(v.clone());
                next.push((keys, cfg));
            }
        }
        points = next;
    }
    Ok(points)
}

fn sweep_job(cfg: &RunConfig) -> Result<(f64, f64), CliError> {
    if cfg.problem.subject == SubjectKind::Disk {
        let p = build_disk(cfg)?;
        let pair = principal_eigenpair_2d(&DiskOperator::new(&p), 0.0, cfg.tol())?;
        Ok((pair.lambda, pair.residual))
    } else {
        let mode = principal_eigenpair(&build_ball(cfg)?, &cfg.solver_options())?;
        Ok((mode.lambda, mode.residual))
    }
}

fn sweep(c: &RunConfig) -> Result<Outcome, CliError> {
    let points = sweep_points(c)?;
    let workers = sweep_workers(c)?;
    eprintln!("sweep: {} configurations on {workers} workers", points.len());
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().map_err(|e| usage(e.to_string()))?;
    let results: Vec<Result<(f64, f64), CliError>> = pool.install(|| points.par_iter().map(|(_, cfg)| sweep_job(cfg)).collect());
    let names: Vec<&str> = c.sweep.axes.iter().map(|a| a.name.as_str()).collect();
    let failures = results.iter().filter(|r| r.is_err()).count();
    let body = match c.output.format {
        Format::Csv => {
            let mut s = format!("{},lambda,residual,status\n", names.join(","));
            for ((keys, _), r) in points.iter().zip(&results) {
                let tail = match r {
                    Ok((l, res)) => format!("{},{},ok", fmt12(*l), fmt12(*res)),
                    Err(e) => format!(",,{}", e.to_string().replace([',', '\n'], ";")),
                };
                s.push_str(&format!("{},{tail}\n", keys.join(",")));
            }
            s
        }
        Format::Json => {
            let rows: Vec<_> = points
                .iter()
                .zip(&results)
                .map(|((keys, _), r)| {
                    let mut row = serde_json::Map::new();
                    for (n, k) in names.iter().zip(keys) {
                        row.insert(n.to_string(), json!(k));
                    }
                    match r {
                        Ok((l, res)) => {
                            row.insert("lambda".into(), json!(round12(*l)));
                            row.insert("residual".into(), json!(round12(*res)));
                            row.insert("status".into(), json!("ok"));
                        }
                        Err(e) => {
                            row.insert("status".into(), json!(e.to_string()));
                        }
                    }
                    serde_json::Value::Object(row)
                })
                .collect();
            pretty(json!(rows))
        }
    };
    let summary = format!("sweep: {} configurations, {failures} failed", points.len());
    Ok(Outcome::ok(summary, body))
}

fn pretty(v: serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(&v).expect("json values serialize");
    s.push('\n');
    s
}
