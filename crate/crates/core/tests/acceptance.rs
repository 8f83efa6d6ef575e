//! Acceptance run: one line per criterion, nonzero exit if any fails.

mod common;

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::Instant;

use common::{bessel_zero, spherical_j1_zero};
use drift_spectra::comparison::{
    derivative_lambda_eps_2d, derivative_lambda_eps_radial, divergence_monotonicity, radial_ibp_check, run_batch,
    sandwich, shipped_corpus, ComparisonOptions, RiccatiOptions,
};
use drift_spectra::disk::{principal_and_adjoint, ScalarFn};
use drift_spectra::sturm_liouville::{derivative_identity_error, integrated_equation_residual};
use drift_spectra::variational::{
    barta_bracket, completing_square_gap, completing_square_optimum, holland_at_optimum, holland_bound,
    rayleigh_minimum_radial, solve_g_v, solve_w_u,
};
use drift_spectra::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = std::result::Result<String, String>;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn field(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Option<ScalarFn> {
    Some(Arc::new(f))
}

fn flat_disk(n_t: usize, n_theta: usize, vt: Option<ScalarFn>, vth: Option<ScalarFn>) -> DiskProblem {
    DiskProblem::flat(PolarGrid::new(n_t, n_theta, 1.0).unwrap(), vt, vth).unwrap()
}

fn random_trial(g: &PolarGrid, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let c: Vec<f64> = (0..5).map(|_| rng.random_range(-0.4..0.4)).collect();
    g.sample(|t, th| {
        let s = c[0] * t + c[1] * t * th.cos() + c[2] * t * th.sin() + c[3] * t * t * (2.0 * th).cos() + c[4] * t * t;
        (1.0 - t * t) * s.exp()
    })
}

fn euclidean_baseline() -> Outcome {
    let j = bessel_zero(0, 1);
    let start = Instant::now();
    let mode = principal_eigenpair(&ModelBall::euclidean(2, 1.0).unwrap(), &SolverOptions::default()).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let err = (mode.lambda - j * j).abs();
    ensure(err < 1e-6 && elapsed < 1.0, format!("lambda={:.12} |err|={err:.1e} time={elapsed:.3}s", mode.lambda))
}

fn three_ball_baseline() -> Outcome {
    let mode = principal_eigenpair(&ModelBall::euclidean(3, 1.0).unwrap(), &SolverOptions::default()).unwrap();
    let err = (mode.lambda - PI * PI).abs();
    let exact = |t: f64| if t == 0.0 { PI } else { (PI * t).sin() / t };
    let max = mode.samples.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let sup = mode.samples.t.iter().zip(&mode.samples.values).map(|(&t, a)| (a / max - exact(t) / PI).abs()).fold(0.0, f64::max);
    ensure(err < 1e-8 && sup < 1e-6, format!("|lambda-pi^2|={err:.1e} sup profile error={sup:.1e}"))
}

fn spectrum_assembly() -> Outcome {
    let start = Instant::now();
    let table = assemble_spectrum(&ModelBall::euclidean(2, 1.0).unwrap(), 31.0, &SolverOptions::default()).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let expect = [(0u32, 1usize, 1u64), (1, 1, 2), (2, 1, 2), (0, 2, 1)];
    let mut worst = 0.0f64;
    let mut shape_ok = table.entries.len() == expect.len();
    for (e, (k, s, mult)) in table.entries.iter().zip(expect) {
        let z = bessel_zero(k, s);
        worst = worst.max((e.lambda - z * z).abs());
        shape_ok &= e.k == k as usize && e.multiplicity == mult;
    }
    ensure(shape_ok && worst < 1e-6 && elapsed < 5.0, format!("{} entries, max |err|={worst:.1e}, time={elapsed:.2}s", table.entries.len()))
}

fn gradient_triple() -> Outcome {
    let ball = ModelBall::euclidean(2, 1.0).unwrap().with_drift(DriftProfile::linear(1.0));
    let sl = principal_eigenpair(&ball, &SolverOptions { n_t: 512, tol: 1e-8 }).unwrap().lambda;
    let (rq, _) = rayleigh_minimum_radial(&ball, 4096, 1e-14).unwrap();
    let disk = flat_disk(256, 128, field(|t, _| t), None);
    let two_d = principal_eigenpair_2d(&DiskOperator::new(&disk), 0.0, 1e-8).unwrap().lambda;
    let gap = (sl - rq).abs().max((sl - two_d).abs()).max((rq - two_d).abs());
    ensure(gap < 5e-3, format!("1-D={sl:.8} Rayleigh={rq:.8} 2-D={two_d:.8} max gap={gap:.1e}"))
}

fn angular_reduction() -> Outcome {
    let ball = ModelBall::euclidean(2, 1.0).unwrap().with_drift(DriftProfile::linear(1.0));
    let l1 = principal_eigenpair(&ball, &SolverOptions::default()).unwrap().lambda;
    let disk = flat_disk(256, 128, field(|t, _| t), field(|t, _| 0.5 * t));
    let pair = principal_eigenpair_2d(&DiskOperator::new(&disk), 0.0, 1e-8).unwrap();
    let gap = (pair.lambda - l1).abs();
    let std = pair.angular_std();
    ensure(gap < 5e-3 && std < 1e-3, format!("2-D={:.8} 1-D={l1:.8} gap={gap:.1e} angular std={std:.1e}", pair.lambda))
}

fn barta() -> Outcome {
    let p = flat_disk(64, 32, field(|t, th| t * (1.0 + 0.5 * th.cos())), field(|t, _| 0.3 * t));
    let op = DiskOperator::new(&p);
    let pair = principal_eigenpair_2d(&op, 0.0, 1e-10).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut contained = 0;
    for _ in 0..20 {
        if barta_bracket(&op, &random_trial(&p.grid, &mut rng)).unwrap().contains(pair.lambda) {
            contained += 1;
        }
    }
    let width = barta_bracket(&op, &pair.omega).unwrap().width();
    ensure(
        contained == 20 && width < 10.0 * pair.residual,
        format!("{contained}/20 brackets contain lambda; width at omega={width:.1e}, residual={:.1e}", pair.residual),
    )
}

fn holland() -> Outcome {
    let p = flat_disk(96, 64, None, field(|_, _| 0.5));
    let op = DiskOperator::new(&p);
    let (fwd, _) = principal_and_adjoint(&op, 1e-10).unwrap();
    let at_opt = holland_at_optimum(&p, &op, &fwd.omega).unwrap();
    let opt_gap = (at_opt.bound - fwd.lambda).abs();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst = f64::INFINITY;
    for _ in 0..10 {
        let b = holland_bound(&p, &op, &random_trial(&p.grid, &mut rng)).unwrap().bound;
        worst = worst.min(b - fwd.lambda);
    }
    // V = grad f with f = t^2/2
    let g = PolarGrid::new(64, 32, 1.0).unwrap();
    let grad = flat_disk(64, 32, field(|t, _| t), None);
    let omega = g.sample(|t, th| (1.0 - t * t) * (1.0 + 0.1 * t * th.cos()));
    let gv = solve_g_v(&grad, &omega).unwrap();
    let ratio: Vec<f64> = gv.iter().zip(g.nodes()).map(|(x, (t, _))| x / (-0.5 * t * t).exp()).collect();
    let mean = ratio.iter().sum::<f64>() / ratio.len() as f64;
    let g_err = ratio.iter().map(|r| (r / mean - 1.0).abs()).fold(0.0, f64::max);
    let w = solve_w_u(&grad, &omega).unwrap();
    let shift = w[0] - 0.25 * g.t(0).powi(2);
    let w_err = w.iter().zip(g.nodes()).map(|(x, (t, _))| (x - shift - 0.25 * t * t).abs()).fold(0.0, f64::max);
    ensure(
        opt_gap < 1e-3 && worst >= -1e-6 && g_err < 1e-4 && w_err < 1e-4,
        format!("|bound-lambda| at optimum={opt_gap:.1e}, min trial slack={worst:.2e}, G err={g_err:.1e}, w err={w_err:.1e}"),
    )
}

fn comparison_corpus() -> Outcome {
    let opts = ComparisonOptions::default();
    let cases = shipped_corpus();
    let verdicts: Vec<_> = run_batch(&cases, &opts, 8).into_iter().collect::<std::result::Result<_, _>>().map_err(|e| e.to_string())?;
    let held = verdicts.iter().filter(|v| v.premises_hold).count();
    let violations = verdicts.iter().filter(|v| v.is_violation()).count();
    let lambdas: Vec<f64> = [-1.0, 0.0, 1.0]
        .iter()
        .map(|&k| {
            let b = ModelBall::new(2, 1.0, WarpingFunction::space_form(k).unwrap(), DriftProfile::zero()).unwrap();
            principal_eigenpair(&b, &opts.radial).unwrap().lambda
        })
        .collect();
    let ordered = lambdas[0] >= lambdas[1] && lambdas[1] >= lambdas[2];
    ensure(
        verdicts.len() == 12 && violations == 0 && ordered,
        format!("{} cases, {held} with premises, {violations} violations; lambda(k=-1,0,1)={lambdas:.6?}", verdicts.len()),
    )
}

fn sandwich_slacks() -> Outcome {
    let opts = ComparisonOptions::default();
    let zero = sandwich(&flat_disk(64, 32, None, None), &opts).map_err(|e| e.to_string())?;
    let problems = [
        flat_disk(64, 32, None, field(|_, _| 0.5)),
        flat_disk(64, 32, field(|t, _| 0.3 * t), None),
        flat_disk(64, 32, field(|t, _| -0.5 * t), field(|_, _| 0.3)),
        flat_disk(64, 32, field(|t, th| t * t * (1.0 + 0.5 * th.cos())), None),
        flat_disk(64, 32, field(|t, _| 0.01 * t), None),
    ];
    let mut worst = f64::INFINITY;
    let mut all = true;
    for p in &problems {
        let r = sandwich(p, &opts).map_err(|e| e.to_string())?;
        worst = worst.min((r.lower_slack + r.tolerance).min(r.upper_slack + r.tolerance));
        all &= r.holds();
    }
    let zero_ok = zero.lower_slack.abs() < 1e-10 && zero.upper_slack.abs() < 1e-10;
    ensure(
        all && zero_ok,
        format!("min slack above -tol={worst:.2e}; V=0 slacks {:.1e}, {:.1e}", zero.lower_slack, zero.upper_slack),
    )
}

fn eps_derivative() -> Outcome {
    let opts = ComparisonOptions::default();
    let flat = ModelBall::euclidean(2, 1.0).unwrap();
    let quad = derivative_lambda_eps_radial(&flat, &DriftProfile::linear(1.0), 1e-3, &opts).map_err(|e| e.to_string())?;
    let base = flat_disk(128, 64, None, None);
    let harm = derivative_lambda_eps_2d(&base, Arc::new(|t, th| [th.cos(), -t * th.sin()]), 1e-3, &opts).map_err(|e| e.to_string())?;
    ensure(
        quad.error() < 1e-3 && harm.estimate.abs() < 1e-3,
        format!("f=t^2/2: {:.6} (c0={:.6}); f=t cos: {:.1e}", quad.estimate, quad.c0, harm.estimate),
    )
}

fn riccati() -> Outcome {
    let mut errs = Vec::new();
    for (m, h) in [
        (2, DriftProfile::linear(2.0)),
        (3, DriftProfile::linear(1.0)),
        (3, DriftProfile::polynomial(&[0.0, 1.0, 1.0]).unwrap()),
    ] {
        let b = ModelBall::euclidean(m, 1.0).unwrap().with_drift(h);
        errs.push(riccati_uniqueness(&b, &RiccatiOptions::default()).map_err(|e| e.to_string())?.sup_error);
    }
    let b = ModelBall::euclidean(2, 1.0).unwrap().with_drift(DriftProfile::linear(2.0));
    let wrong = riccati_uniqueness(&b, &RiccatiOptions { initial_slope: 1.0, ..Default::default() });
    let branch = matches!(wrong, Err(Error::LogarithmicBranch { .. }));
    ensure(errs.iter().all(|e| *e < 1e-6) && branch, format!("sup errors {:?}; wrong start rejected: {branch}", errs.iter().map(|e| format!("{e:.1e}")).collect::<Vec<_>>()))
}

fn invariant_suites() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    // integrated equation, orthogonality and derivative identity on a curved drifted ball
    let ball = ModelBall::new(3, 1.0, WarpingFunction::space_form(-1.0).unwrap(), DriftProfile::linear(2.0)).unwrap();
    let modes = solve_radial_modes(&ball, 0, 3, &SolverOptions::default()).unwrap();
    let integ = modes.iter().map(|m| integrated_equation_residual(m, &ball)).fold(0.0, f64::max);
    let deriv = modes.iter().map(|m| derivative_identity_error(m, &ball)).fold(0.0, f64::max);
    let mut orth = 0.0f64;
    for a in &modes {
        for b in &modes {
            let ip = weighted_inner_product(&a.samples, &b.samples, &ball).unwrap();
            orth = orth.max((ip - if a.i == b.i { 1.0 } else { 0.0 }).abs());
        }
    }
    ok &= integ < 1e-6 && deriv < 1e-5 && orth < 1e-8;
    notes.push(format!("integrated eq {integ:.1e}, derivative id {deriv:.1e}, orthogonality {orth:.1e}"));
    let z = spherical_j1_zero();
    let l11 = solve_radial_modes(&ModelBall::euclidean(3, 1.0).unwrap(), 1, 1, &SolverOptions::default()).unwrap()[0].lambda;
    ok &= (l11 - z * z).abs() < 1e-7;
    // transpose spectrum and positivity
    let p = flat_disk(20, 16, field(|t, th| t * (1.0 + 0.3 * th.sin())), field(|t, th| 0.4 * t * th.cos()));
    let (fwd, adj) = principal_and_adjoint(&DiskOperator::new(&p), 1e-12).unwrap();
    let tgap = (fwd.lambda - adj.lambda).abs();
    let positive = fwd.omega.iter().chain(&adj.omega).all(|v| *v > 0.0);
    ok &= tgap < 1e-10 && positive;
    notes.push(format!("transpose gap {tgap:.1e}, positive {positive}"));
    // completing the square
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut min_gap = f64::INFINITY;
    let mut opt_gap = 0.0f64;
    for _ in 0..10_000 {
        let mut v2 = || [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)];
        let (x, v, zz) = (v2(), v2(), v2());
        min_gap = min_gap.min(completing_square_gap(x, v, zz));
        opt_gap = opt_gap.max(completing_square_gap(x, v, completing_square_optimum(x, v)).abs());
    }
    ok &= min_gap >= -1e-12 && opt_gap < 1e-12;
    notes.push(format!("square gap min {min_gap:.1e}"));
    // divergence-monotonicity on random positive radial fields
    let mut mismatches = 0;
    let mut tested = 0;
    for _ in 0..200 {
        let c: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
        let m = rng.random_range(2..5usize);
        let kappa: f64 = rng.random_range(-1.0..1.0);
        let h1 = |t: f64| {
            let s = t - 0.6;
            [1.0 + 0.8 * c[1] * s + c[2] * s * s + c[3] * s * s * s, 0.8 * c[1] + 2.0 * c[2] * s + 3.0 * c[3] * s * s]
        };
        let rho = WarpingFunction::space_form(kappa).unwrap();
        let metric = |t: f64| {
            let e = rho.eval(t);
            [e[0], e[1]]
        };
        let min_div = (0..=2000)
            .map(|i| {
                let t = 0.2 + 0.8 * i as f64 / 2000.0;
                let ([h, dh], [j, dj]) = (h1(t), metric(t));
                dh + (m - 1) as f64 * h * dj / j
            })
            .fold(f64::INFINITY, f64::min);
        if min_div.abs() < 1e-3 {
            continue;
        }
        tested += 1;
        let (a, b) = divergence_monotonicity(h1, metric, m, 0.2, 1.0, 2000).unwrap();
        mismatches += usize::from(a != b);
    }
    ok &= mismatches == 0;
    notes.push(format!("divergence lemma {mismatches}/{tested} mismatches"));
    // integration by parts
    let g = PolarGrid::new(128, 16, 1.0).unwrap();
    let flat = DiskProblem::flat(g, None, None).unwrap();
    let ibp = radial_ibp_check(&flat, &g.sample(|t, _| 1.0 - t * t), &g.sample(|t, _| t)).unwrap();
    ok &= ibp < 20.0 * g.dt() * g.dt();
    notes.push(format!("ibp {ibp:.1e}"));
    ensure(ok, notes.join("; "))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("euclidean disk baseline", euclidean_baseline),
        ("three-ball baseline", three_ball_baseline),
        ("spectrum assembly", spectrum_assembly),
        ("gradient-drift triple agreement", gradient_triple),
        ("angular drift reduction", angular_reduction),
        ("Barta bracket", barta),
        ("Holland functional", holland),
        ("comparison corpus", comparison_corpus),
        ("first-order sandwich", sandwich_slacks),
        ("eps derivative", eps_derivative),
        ("Riccati uniqueness", riccati),
        ("invariant suites", invariant_suites),
    ];
    let total = Instant::now();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("PASS {:>2} {name} ({secs:.2}s): {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({secs:.2}s): {d}", i + 1)
            }
        }
    }
    println!("{} of 12 criteria passed in {:.1}s", 12 - failed, total.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
