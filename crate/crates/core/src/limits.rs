//! Flat limiting structures in the torus units.
//!
//! A tube squashed to `beta -> 0` becomes the annulus `1 - alpha <= r <= 1 + alpha`:
//!
//! ```text
//! -alpha^2 (f'' + f'/r) + alpha^2 (nu/r + gamma r/2)^2 f = eps f,   f(1 - alpha) = f(1 + alpha) = 0
//! ```
//!
//! and one stretched to `alpha -> 0` becomes a ribbon of height `2 beta` at
//! unit radius:
//!
//! ```text
//! -alpha^2 g'' + alpha^2 (nu + gamma/2)^2 g = eps g,   g(-beta) = g(beta) = 0
//! ```
//!
//! Both keep `alpha` as the energy scale so their eigenvalues compare directly
//! with the torus ones.

use crate::error::{Error, Result};
use crate::hamiltonian::Coefficients;
use crate::integrator::{propagate_direction, IntegratorOptions, OdeState};
use std::f64::consts::PI;
use std::ops::RangeInclusive;

/// Radial grid intervals for the ring finite-difference solver.
pub const RING_GRID: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingSpec {
    pub alpha: f64,
    pub gamma: f64,
    pub nu: i32,
}

impl RingSpec {
    pub fn new(alpha: f64, gamma: f64, nu: i32) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidShape(format!("ring half-width must lie in (0, 1), got {alpha}")));
        }
        if !gamma.is_finite() {
            return Err(Error::Config(format!("non-finite flux {gamma}")));
        }
        Ok(RingSpec { alpha, gamma, nu })
    }

    pub fn inner(&self) -> f64 {
        1.0 - self.alpha
    }

    pub fn outer(&self) -> f64 {
        1.0 + self.alpha
    }

    /// `(nu/r + gamma r/2)^2`, the azimuthal term without the `alpha^2` factor.
    pub fn azimuthal(&self, r: f64) -> f64 {
        let t = self.nu as f64 / r + 0.5 * self.gamma * r;
        t * t
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RibbonSpec {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub nu: i32,
}

impl RibbonSpec {
    pub fn new(alpha: f64, beta: f64, gamma: f64, nu: i32) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) || !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidShape(format!("ribbon needs alpha > 0 and beta > 0, got ({alpha}, {beta})")));
        }
        if !gamma.is_finite() {
            return Err(Error::Config(format!("non-finite flux {gamma}")));
        }
        Ok(RibbonSpec { alpha, beta, gamma, nu })
    }
}

/// `alpha^2 [(n pi / (2 beta))^2 + (nu + gamma/2)^2]` for `n >= 1`.
pub fn ribbon_level(spec: &RibbonSpec, n: u32) -> Result<f64> {
    if n == 0 {
        return Err(Error::Config("ribbon levels are numbered from 1".into()));
    }
    let k = n as f64 * PI / (2.0 * spec.beta);
    let m = spec.nu as f64 + 0.5 * spec.gamma;
    Ok(spec.alpha * spec.alpha * (k * k + m * m))
}

pub fn ribbon_ground_state(spec: &RibbonSpec) -> f64 {
    ribbon_level(spec, 1).expect("level 1 exists")
}

/// Ribbon ground state minimized over `nu`, ties toward small `|nu|` then positive.
pub fn ribbon_ground_state_min_nu(
    alpha: f64,
    beta: f64,
    gamma: f64,
    nu_range: RangeInclusive<i32>,
) -> Result<(i32, f64)> {
    min_over_nu(nu_range, |nu| Ok(ribbon_ground_state(&RibbonSpec::new(alpha, beta, gamma, nu)?)))
}

fn min_over_nu(nu_range: RangeInclusive<i32>, mut f: impl FnMut(i32) -> Result<f64>) -> Result<(i32, f64)> {
    let mut order: Vec<i32> = nu_range.collect();
    order.sort_by_key(|&n| (n.unsigned_abs(), n < 0));
    let mut best: Option<(i32, f64)> = None;
    for nu in order {
        let e = f(nu)?;
        if best.is_none_or(|(_, b)| e < b - 1e-12 * b.abs().max(1.0)) {
            best = Some((nu, e));
        }
    }
    best.ok_or_else(|| Error::Config("empty nu range".into()))
}

/// Number of eigenvalues below `x` of the symmetric tridiagonal matrix with
/// diagonal `d` and off-diagonal `e`.
fn sturm_count(d: &[f64], e: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..d.len() {
        let off = if i == 0 { 0.0 } else { e[i - 1] * e[i - 1] / q };
        q = d[i] - x - off;
        if q == 0.0 {
            q = -f64::EPSILON * (d[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// The `k`-th smallest (from zero) eigenvalue of a symmetric tridiagonal
/// matrix, by Sturm bisection to adjacent floats.
fn tridiagonal_eigenvalue(d: &[f64], e: &[f64], k: usize) -> f64 {
    let radius = |i: usize| (if i > 0 { e[i - 1].abs() } else { 0.0 }) + (if i < e.len() { e[i].abs() } else { 0.0 });
    let mut lo = (0..d.len()).map(|i| d[i] - radius(i)).fold(f64::INFINITY, f64::min);
    let mut hi = (0..d.len()).map(|i| d[i] + radius(i)).fold(f64::NEG_INFINITY, f64::max);
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return mid;
        }
        if sturm_count(d, e, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
}

/// Lowest ring eigenvalue on `n` radial intervals.
///
/// The operator is written as `-(r f')' + r W f = (eps / alpha^2) r f` and
/// symmetrized with `g = sqrt(r) f`, so the finite-difference matrix is
/// symmetric tridiagonal.
pub fn ring_fd_level(spec: &RingSpec, n: usize, k: usize) -> Result<f64> {
    if n < 8 {
        return Err(Error::Config(format!("ring grid needs at least 8 intervals, got {n}")));
    }
    let a2 = spec.alpha * spec.alpha;
    let h = 2.0 * spec.alpha / n as f64;
    let r = |i: f64| spec.inner() + i * h;
    let m = n - 1;
    let mut d = Vec::with_capacity(m);
    let mut e = Vec::with_capacity(m.saturating_sub(1));
    for i in 1..=m {
        let ri = r(i as f64);
        let stiff = (r(i as f64 - 0.5) + r(i as f64 + 0.5)) / (h * h);
        d.push(a2 * (stiff / ri + spec.azimuthal(ri)));
        if i < m {
            e.push(-a2 * r(i as f64 + 0.5) / (h * h) / (ri * r(i as f64 + 1.0)).sqrt());
        }
    }
    if k >= m {
        return Err(Error::Config(format!("level {k} does not exist on {n} intervals")));
    }
    Ok(tridiagonal_eigenvalue(&d, &e, k))
}

/// Ring ground state: finite differences on [`RING_GRID`] intervals with one
/// Richardson step against half the grid.
pub fn ring_ground_state(spec: &RingSpec) -> Result<f64> {
    let fine = ring_fd_level(spec, RING_GRID, 0)?;
    let coarse = ring_fd_level(spec, RING_GRID / 2, 0)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// The radial ring equation as `f'' = -f'/r + (W(r) - eps/alpha^2) f`.
struct RingRadial<'a>(&'a RingSpec);

impl Coefficients for RingRadial<'_> {
    fn drift(&self, r: f64) -> f64 {
        -1.0 / r
    }

    fn potential(&self, r: f64) -> f64 {
        self.0.azimuthal(r)
    }
}

/// Ring ground state by shooting from the inner edge, kept as an
/// independent cross-check of [`ring_ground_state`].
///
/// Below the lowest eigenvalue the solution with `f(1 - alpha) = 0`,
/// `f'(1 - alpha) = 1` stays positive up to and including the outer edge.
pub fn ring_ground_state_shooting(spec: &RingSpec, opts: &IntegratorOptions) -> Result<f64> {
    let coeffs = RingRadial(spec);
    let (r0, r1) = (spec.inner(), spec.outer());
    let below = |lam: f64| -> Result<bool> {
        let (end, zeros) = propagate_direction(&coeffs, lam, OdeState::new(r0, 0.0, 1.0), r1, opts)?;
        Ok(zeros == 0 && end.psi > 0.0)
    };
    let wmin =
        (0..=256).map(|i| spec.azimuthal(r0 + 2.0 * spec.alpha * i as f64 / 256.0)).fold(f64::INFINITY, f64::min);
    let mut lo = wmin - 1.0;
    let mut hi = wmin + (PI / (2.0 * spec.alpha)).powi(2) + 1.0;
    while !below(lo)? {
        lo -= hi - lo;
    }
    while below(hi)? {
        hi += hi - lo;
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if below(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(spec.alpha * spec.alpha * 0.5 * (lo + hi))
}

/// Ring ground state minimized over `nu`, ties toward small `|nu|` then positive.
pub fn ring_ground_state_min_nu(alpha: f64, gamma: f64, nu_range: RangeInclusive<i32>) -> Result<(i32, f64)> {
    min_over_nu(nu_range, |nu| ring_ground_state(&RingSpec::new(alpha, gamma, nu)?))
}
