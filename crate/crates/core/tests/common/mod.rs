//! Independent reference values used by the integration and acceptance
//! tests. Nothing here calls into the library.
#![allow(dead_code)]

/// `J_n(x)` by its power series, summed until terms are negligible.
pub fn bessel_j(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = half.powi(n as i32) / (1..=n).map(f64::from).product::<f64>();
    let mut sum = term;
    for k in 1..200 {
        term *= -half * half / (k as f64 * (k as f64 + n as f64));
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// The `s`-th positive zero of `J_n`, located by scanning and bisection.
pub fn bessel_zero(n: u32, s: usize) -> f64 {
    let mut found = 0;
    let step = 0.05;
    let mut x = 1e-3;
    let mut fx = bessel_j(n, x);
    loop {
        let y = x + step;
        let fy = bessel_j(n, y);
        if fx.signum() != fy.signum() {
            found += 1;
            if found == s {
                let (mut a, mut b, fa) = (x, y, fx);
                for _ in 0..200 {
                    let c = 0.5 * (a + b);
                    let fc = bessel_j(n, c);
                    if fc.signum() == fa.signum() {
                        a = c;
                    } else {
                        b = c;
                    }
                }
                return 0.5 * (a + b);
            }
        }
        x = y;
        fx = fy;
    }
}

/// First zero of the spherical Bessel function `j_1(x) = sin x / x^2 - cos x / x`,
/// i.e. the root of `tan x = x` in `(pi, 3pi/2)`.
pub fn spherical_j1_zero() -> f64 {
    let (mut a, mut b) = (std::f64::consts::PI + 1e-9, 1.5 * std::f64::consts::PI - 1e-9);
    let f = |x: f64| x.sin() - x * x.cos();
    for _ in 0..200 {
        let c = 0.5 * (a + b);
        if f(c).signum() == f(a).signum() {
            a = c;
        } else {
            b = c;
        }
    }
    0.5 * (a + b)
}
