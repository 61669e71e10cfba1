#![allow(dead_code)]

use std::f64::consts::PI;
use std::io::Write;

use statrs::function::gamma::gamma;

/// Surface area of the unit sphere in `R^d`.
pub fn omega(d: u32) -> f64 {
    let h = d as f64 / 2.0;
    2.0 * PI.powf(h) / gamma(h)
}

/// `∫_0^∞ r^m e^{-a r^2} dr`.
pub fn gauss_moment(m: f64, a: f64) -> f64 {
    gamma((m + 1.0) / 2.0) / (2.0 * a.powf((m + 1.0) / 2.0))
}

/// Composite Simpson rule on `[0, b]` with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, b: f64, n: usize) -> f64 {
    let h = b / n as f64;
    let mut s = f(0.0) + f(b);
    for i in 1..n {
        s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Observed order between the first and last `(h, error)` pairs.
pub fn order(errors: &[(f64, f64)]) -> f64 {
    let (a, b) = (errors[0], errors[errors.len() - 1]);
    (a.1 / b.1).ln() / (a.0 / b.0).ln()
}

/// `u(t, r)` for the linear equation in `d = 3` with `u(0) = 4 e^{-r^2}`,
/// `u_t(0) = 0`: `r u` solves the 1-D wave equation with odd data.
pub fn dalembert(t: f64, r: f64) -> f64 {
    let v = |x: f64| 4.0 * x * (-x * x).exp();
    if r == 0.0 {
        4.0 * (1.0 - 2.0 * t * t) * (-t * t).exp()
    } else {
        (v(r + t) + v(r - t)) / (2.0 * r)
    }
}

/// Writes straight to stdout so the line survives output capture.
pub fn report(line: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}
