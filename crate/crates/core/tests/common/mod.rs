//! Reference solutions built without the library's solvers.
#![allow(dead_code)]

use nalgebra::DMatrix;
use std::f64::consts::PI;

/// `J_n(k a) Y_n(k b) - J_n(k b) Y_n(k a)`.
pub fn bessel_cross(n: i32, k: f64, a: f64, b: f64) -> f64 {
    libm::jn(n, k * a) * libm::yn(n, k * b) - libm::jn(n, k * b) * libm::yn(n, k * a)
}

/// Lowest Dirichlet wavenumber of the annulus `a < r < b` for angular order
/// `n`: the first positive root of the Bessel cross product.
pub fn annulus_wavenumber(n: i32, a: f64, b: f64) -> f64 {
    let f = |k: f64| bessel_cross(n, k, a, b);
    let step = PI / (b - a) / 400.0;
    let mut lo = step;
    let mut f_lo = f(lo);
    loop {
        let hi = lo + step;
        let f_hi = f(hi);
        if (f_lo < 0.0) != (f_hi < 0.0) {
            let (mut lo, mut hi) = (lo, hi);
            loop {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    return mid;
                }
                if (f(mid) < 0.0) == (f_lo < 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
        }
        lo = hi;
        f_lo = f_hi;
    }
}

/// Ring level at zero flux from the annulus wavenumber, in torus units.
pub fn ring_bessel_level(alpha: f64, nu: i32) -> f64 {
    let k = annulus_wavenumber(nu.abs(), 1.0 - alpha, 1.0 + alpha);
    alpha * alpha * k * k
}

/// Lowest `count` eigenvalues of `-alpha^2 g'' + alpha^2 (nu + gamma/2)^2 g`
/// on `(-beta, beta)` with Dirichlet ends, from a dense symmetric
/// finite-difference matrix on `n` interior points.
pub fn ribbon_fd(alpha: f64, beta: f64, gamma: f64, nu: i32, n: usize, count: usize) -> Vec<f64> {
    let h = 2.0 * beta / (n + 1) as f64;
    let shift = alpha * alpha * (nu as f64 + 0.5 * gamma).powi(2);
    let off = -alpha * alpha / (h * h);
    let m = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            -2.0 * off + shift
        } else if i.abs_diff(j) == 1 {
            off
        } else {
            0.0
        }
    });
    let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev.truncate(count);
    ev
}

/// [`ribbon_fd`] on `n` and `2n + 1` points (halving `h`), Richardson-combined.
pub fn ribbon_fd_extrapolated(alpha: f64, beta: f64, gamma: f64, nu: i32, n: usize, count: usize) -> Vec<f64> {
    let coarse = ribbon_fd(alpha, beta, gamma, nu, n, count);
    let fine = ribbon_fd(alpha, beta, gamma, nu, 2 * n + 1, count);
    fine.iter().zip(&coarse).map(|(f, c)| (4.0 * f - c) / 3.0).collect()
}

/// `|a - b| / max(|b|, 1)`.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}
