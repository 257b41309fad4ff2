//! Eigenvalues of the periodic meridian problem.
//!
//! Two search paths are available:
//!
//! * **Full monodromy.** The periodicity residual `det(M(eps) - I)` is
//!   sampled on an energy grid, sign changes are bisected, and grid minima of
//!   the residual that do not change sign are refined as possible double
//!   roots.
//! * **Parity split.** For reflection-symmetric equations the even states
//!   satisfy `psi'(0) = psi'(pi) = 0` and the odd states
//!   `psi(0) = psi(pi) = 0`, so each branch reduces to a scalar residual on
//!   the half period with simple roots.
//!
//! The lowest eigenvalue has a dedicated search. It is bracketed by the
//! extrema of the potential, since the principal eigenvalue of
//! `-psi'' + drift psi' + V psi` lies in `[min V, max V]`.

use crate::error::{Error, Result};
use crate::geometry::{HamiltonianVariant, TorusShape};
use crate::hamiltonian::{assemble, sampled_range, CoefficientSet, Coefficients, FieldMode};
use crate::integrator::{
    abel_check, drift_integral, monodromy_with, propagate_direction, propagate_sampled_scaled, IntegratorOptions,
    Monodromy, OdeState,
};
use std::f64::consts::{PI, TAU};
use std::ops::RangeInclusive;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
    Unclassified,
}

impl Parity {
    pub fn label(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
            Parity::Unclassified => "unclassified",
        }
    }
}

impl std::fmt::Display for Parity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchWindow {
    pub eps_min: f64,
    pub eps_max: f64,
    pub step: f64,
    pub root_tol: f64,
}

impl Default for SearchWindow {
    fn default() -> Self {
        SearchWindow { eps_min: -20.0, eps_max: 80.0, step: 0.05, root_tol: 1e-9 }
    }
}

impl SearchWindow {
    pub fn new(eps_min: f64, eps_max: f64, step: f64, root_tol: f64) -> Result<Self> {
        let w = SearchWindow { eps_min, eps_max, step, root_tol };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps_min.is_finite() && self.eps_max.is_finite() && self.eps_min < self.eps_max) {
            return Err(Error::InvalidWindow(format!(
                "need eps_min < eps_max, got [{}, {}]",
                self.eps_min, self.eps_max
            )));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::InvalidWindow(format!("step must be positive, got {}", self.step)));
        }
        if !(self.root_tol > 0.0 && self.root_tol.is_finite()) {
            return Err(Error::InvalidWindow(format!("root_tol must be positive, got {}", self.root_tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumOptions {
    pub integrator: IntegratorOptions,
    /// Number of uniform `theta` samples stored with each eigenfunction.
    pub samples: usize,
    /// Relative residual below which a non-crossing minimum is accepted as a
    /// double root.
    pub double_root_threshold: f64,
    pub root_tol: f64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions {
            integrator: IntegratorOptions::default(),
            samples: 512,
            double_root_threshold: 1e-6,
            root_tol: 1e-9,
        }
    }
}

/// How roots are searched for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchPath {
    FullMonodromy,
    ParitySplit,
}

impl SearchPath {
    pub fn for_variant(variant: HamiltonianVariant) -> Self {
        match variant {
            HamiltonianVariant::AsPrinted => SearchPath::FullMonodromy,
            HamiltonianVariant::Rederived => SearchPath::ParitySplit,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenSolution {
    pub epsilon: f64,
    pub parity: Parity,
    /// `(theta, psi)` on a uniform grid over `[0, 2 pi)`, normalized so that
    /// `sum psi^2 w dtheta = 1` with the coefficient weight `w`.
    pub psi_samples: Vec<(f64, f64)>,
    /// Relative matching residual at `epsilon`: `|det(M - I)| / max(1, |tr M|, det M)`
    /// with `det M` from the Abel identity on the full-monodromy path, and the
    /// relative half-period residual on the parity-split path.
    pub residual: f64,
    /// Abel identity residual over the intervals integrated to produce the
    /// state (the full period, or both half-period shots).
    pub abel_residual: f64,
    pub mode: FieldMode,
    /// Half-period problem that produced the state, when the parity split was used.
    pub branch: Option<Parity>,
}

impl EigenSolution {
    /// `sum psi^2 w dtheta` over the stored samples.
    pub fn norm_with<C: Coefficients + ?Sized>(&self, coeffs: &C) -> f64 {
        let h = TAU / self.psi_samples.len() as f64;
        self.psi_samples.iter().map(|&(t, p)| p * p * coeffs.weight(t)).sum::<f64>() * h
    }
}

/// A grid candidate that could not be turned into an eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateFailure {
    pub near: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SpectrumReport {
    pub solutions: Vec<EigenSolution>,
    pub failures: Vec<CandidateFailure>,
}

/// `det M` from the Abel identity, `exp` of the drift integral. The periodic
/// trapezoid rule is refined until it stops changing.
pub fn abel_determinant<C: Coefficients + ?Sized>(coeffs: &C) -> f64 {
    let mut n = 256;
    let mut prev = drift_integral(coeffs, n);
    while n < 1 << 20 {
        n *= 2;
        let next = drift_integral(coeffs, n);
        let done = (next - prev).abs() <= 1e-14 * next.abs().max(1.0);
        prev = next;
        if done {
            break;
        }
    }
    prev.exp()
}

/// Signed `det(M - I)` scaled by `max(1, |tr M|, det M)`, with `det M` exact.
fn signed_full_residual<C: Coefficients + ?Sized>(
    coeffs: &C,
    det: f64,
    eps: f64,
    opts: &IntegratorOptions,
) -> Result<(f64, Monodromy)> {
    let m = monodromy_with(coeffs, eps, opts)?;
    let r = m.trace_residual(det);
    Ok((r / m.trace().abs().max(det).max(1.0), m))
}

/// Bisection on a sign change of `f` in `[lo, hi]`, down to adjacent floats.
/// Returns whichever end of the final bracket has the smaller `|f|`.
fn bisect(mut f: impl FnMut(f64) -> Result<f64>, mut lo: f64, mut hi: f64, mut f_lo: f64) -> Result<f64> {
    if f_lo == 0.0 {
        return Ok(lo);
    }
    let mut f_hi = f64::INFINITY;
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(if f_lo.abs() <= f_hi.abs() { lo } else { hi });
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
            f_hi = fm;
        }
    }
}

/// Golden-section search for the minimum of `g` on `[a, b]`. Returns the
/// first point where `g` turns negative, if any, else the minimizer.
fn golden_min(mut g: impl FnMut(f64) -> Result<f64>, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut gc = g(c)?;
    let mut gd = g(d)?;
    for _ in 0..80 {
        if gc < 0.0 {
            return Ok((c, gc));
        }
        if gd < 0.0 {
            return Ok((d, gd));
        }
        if (b - a).abs() < tol {
            break;
        }
        if gc < gd {
            b = d;
            d = c;
            gd = gc;
            c = b - inv_phi * (b - a);
            gc = g(c)?;
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + inv_phi * (b - a);
            gd = g(d)?;
        }
    }
    Ok(if gc < gd { (c, gc) } else { (d, gd) })
}

#[derive(Debug, Clone, Copy)]
enum RootKind {
    Simple,
    Double,
}

/// Scans the full-monodromy residual from `start` in steps of `step` up to
/// `stop`.
fn scan_full<C: Coefficients + ?Sized>(
    coeffs: &C,
    start: f64,
    stop: f64,
    step: f64,
    root_tol: f64,
    opts: &SpectrumOptions,
    failures: &mut Vec<CandidateFailure>,
) -> Result<Vec<(f64, RootKind)>> {
    let io = &opts.integrator;
    let det = abel_determinant(coeffs);
    let f = |e: f64| signed_full_residual(coeffs, det, e, io).map(|(s, _)| s);
    let mut roots = Vec::new();
    let count = ((stop - start) / step).ceil().max(1.0) as usize;
    let mut grid: Vec<(f64, f64)> = Vec::with_capacity(3);
    for j in 0..=count {
        let e = if j == count { stop } else { start + j as f64 * step };
        let s = f(e)?;
        grid.push((e, s));
        if grid.len() > 3 {
            grid.remove(0);
        }
        let n = grid.len();
        if n >= 2 {
            let (e0, s0) = grid[n - 2];
            let (e1, s1) = grid[n - 1];
            if s0 != 0.0 && (s1 == 0.0 || (s0 < 0.0) != (s1 < 0.0)) {
                let r = if s1 == 0.0 { e1 } else { bisect(f, e0, e1, s0)? };
                roots.push((r, RootKind::Simple));
                // a zero on the grid would otherwise be found twice
                if s1 == 0.0 {
                    grid.clear();
                }
                continue;
            }
        }
        if n == 3 {
            let (ea, sa) = grid[0];
            let (em, sm) = grid[1];
            let (eb, sb) = grid[2];
            let same = (sa < 0.0) == (sm < 0.0) && (sm < 0.0) == (sb < 0.0) && sm != 0.0;
            if same && sm.abs() < sa.abs() && sm.abs() < sb.abs() {
                let sign = sm.signum();
                let (x, gx) = golden_min(|e| f(e).map(|v| sign * v), ea, eb, root_tol)?;
                if gx < 0.0 {
                    let left = bisect(f, ea, x, sa)?;
                    let right = bisect(f, x, eb, gx * sign)?;
                    roots.push((left, RootKind::Simple));
                    roots.push((right, RootKind::Simple));
                } else if gx < opts.double_root_threshold {
                    roots.push((x, RootKind::Double));
                } else if sm.abs() < opts.double_root_threshold {
                    failures.push(CandidateFailure {
                        near: em,
                        reason: format!("residual minimum {gx:e} near {x} does not reach zero"),
                    });
                }
            }
        }
    }
    Ok(roots)
}

/// Two-sided shooting for one parity of a reflection-symmetric equation.
///
/// Solutions are shot from `0` and from `pi` with the parity's boundary
/// data and matched at the lowest point of the potential on `[0, pi]`. Both
/// shots then run toward the well, the direction in which the wanted
/// solution dominates, so the match stays well conditioned when the state
/// decays through a barrier.
struct HalfShot<'a, C: Coefficients + ?Sized> {
    coeffs: &'a C,
    theta_m: f64,
    /// Every local minimum of the potential on `[0, pi]`, deepest first.
    wells: Vec<f64>,
    opts: &'a IntegratorOptions,
}

impl<'a, C: Coefficients + ?Sized> HalfShot<'a, C> {
    fn new(coeffs: &'a C, opts: &'a IntegratorOptions) -> Self {
        let n = 1024;
        let v: Vec<(f64, f64)> = (0..=n).map(|i| PI * i as f64 / n as f64).map(|t| (t, coeffs.potential(t))).collect();
        // reflection symmetry makes both ends stationary points
        let mut wells: Vec<(f64, f64)> = (0..=n)
            .filter(|&i| (i == 0 || v[i].1 <= v[i - 1].1) && (i == n || v[i].1 <= v[i + 1].1))
            .map(|i| v[i])
            .collect();
        wells.sort_by(|a, b| a.1.total_cmp(&b.1));
        wells.dedup_by(|a, b| (a.0 - b.0).abs() < 4.0 * PI / n as f64);
        let wells: Vec<f64> = wells.into_iter().map(|w| w.0).collect();
        HalfShot { coeffs, theta_m: wells[0], wells, opts }
    }

    /// Copy matched at another point.
    fn at(&self, theta_m: f64) -> Self {
        HalfShot { coeffs: self.coeffs, theta_m, wells: self.wells.clone(), opts: self.opts }
    }

    /// The match point where the residual at `eps` is smallest; used once a
    /// root is known, since a state sitting in a shallower well is matched
    /// best inside that well.
    fn best_at(&self, eps: f64, parity: Parity) -> Result<(Self, f64)> {
        let mut best: Option<(Self, f64)> = None;
        for &w in &self.wells {
            let shot = self.at(w);
            let r = shot.residual(eps, parity)?.abs();
            if best.as_ref().is_none_or(|b| r < b.1) {
                best = Some((shot, r));
            }
        }
        Ok(best.expect("at least one well"))
    }

    fn start(parity: Parity, theta: f64) -> OdeState {
        match parity {
            Parity::Odd => OdeState::new(theta, 0.0, 1.0),
            _ => OdeState::new(theta, 1.0, 0.0),
        }
    }

    /// End states of the left and right shots at the match point, with the
    /// number of sign changes of `psi` along each.
    fn ends(&self, eps: f64, parity: Parity) -> Result<((OdeState, usize), (OdeState, usize))> {
        let shoot = |from: f64| -> Result<(OdeState, usize)> {
            let s = Self::start(parity, from);
            if from == self.theta_m {
                return Ok((s, 0));
            }
            propagate_direction(self.coeffs, eps, s, self.theta_m, self.opts)
        };
        Ok((shoot(0.0)?, shoot(PI)?))
    }

    /// Wronskian of the two shots at the match point, divided by the norms of
    /// both states; the sine of the angle between them.
    fn residual(&self, eps: f64, parity: Parity) -> Result<f64> {
        let ((l, _), (r, _)) = self.ends(eps, parity)?;
        Ok((l.psi * r.dpsi - l.dpsi * r.psi) / (l.psi.hypot(l.dpsi) * r.psi.hypot(r.dpsi)))
    }

    /// True exactly when `eps` lies below the lowest even eigenvalue: both
    /// shots stay positive and the left one is steeper at the match point.
    fn below_lowest(&self, eps: f64) -> Result<bool> {
        let ((l, zl), (r, zr)) = self.ends(eps, Parity::Even)?;
        Ok(zl == 0 && zr == 0 && l.psi > 0.0 && r.psi > 0.0 && l.psi * r.dpsi - l.dpsi * r.psi < 0.0)
    }

    /// Eigenfunction on the uniform `n`-point grid, glued from the two shots
    /// and reflected onto `[pi, 2 pi)`.
    fn sample(&self, eps: f64, parity: Parity, n: usize) -> Result<Vec<(f64, f64)>> {
        let grid = sample_grid(n);
        let tm = self.theta_m;
        let mut left: Vec<f64> = grid.iter().copied().filter(|&t| t <= tm).collect();
        left.push(tm);
        let mut right: Vec<f64> = grid.iter().rev().copied().filter(|&t| t > tm && t <= PI).collect();
        if right.first() != Some(&PI) {
            right.insert(0, PI);
        }
        right.push(tm);
        let ls = propagate_sampled_scaled(self.coeffs, eps, Self::start(parity, 0.0), &left, self.opts)?;
        let rs = propagate_sampled_scaled(self.coeffs, eps, Self::start(parity, PI), &right, self.opts)?;
        let (lm, a_m) = *ls.last().expect("match point");
        let (rm, b_m) = *rs.last().expect("match point");
        let k = (lm.psi * rm.psi + lm.dpsi * rm.dpsi) / (rm.psi * rm.psi + rm.dpsi * rm.dpsi);
        let mut pts: Vec<(f64, f64, f64)> = ls[..ls.len() - 1].iter().map(|(s, a)| (s.theta, s.psi, *a)).collect();
        pts.extend(rs[..rs.len() - 1].iter().map(|(s, b)| (s.theta, k * s.psi, b - b_m + a_m)));
        let top = pts.iter().map(|p| p.2).fold(f64::NEG_INFINITY, f64::max);
        let sign = if parity == Parity::Odd { -1.0 } else { 1.0 };
        let mut values = vec![0.0; n];
        for (t, v, lg) in pts {
            let j = (t / TAU * n as f64).round() as usize;
            if j < n {
                values[j] = v * (lg - top).exp();
            }
        }
        for j in 1..n {
            if j > n - j {
                values[j] = sign * values[n - j];
            }
        }
        Ok(grid.into_iter().zip(values).collect())
    }
}

/// Scans both half-period residuals; returns `(eps, parity)` roots.
fn scan_parity<C: Coefficients + ?Sized>(
    coeffs: &C,
    window: &SearchWindow,
    opts: &SpectrumOptions,
) -> Result<Vec<(f64, Parity)>> {
    let shot = HalfShot::new(coeffs, &opts.integrator);
    let even = |e: f64| shot.residual(e, Parity::Even);
    let odd = |e: f64| shot.residual(e, Parity::Odd);
    let count = ((window.eps_max - window.eps_min) / window.step).ceil().max(1.0) as usize;
    let mut roots = Vec::new();
    let mut prev: Option<(f64, f64, f64)> = None;
    for j in 0..=count {
        let e = if j == count { window.eps_max } else { window.eps_min + j as f64 * window.step };
        let (se, so) = (even(e)?, odd(e)?);
        if let Some((e0, se0, so0)) = prev {
            if se0 != 0.0 && (se == 0.0 || (se0 < 0.0) != (se < 0.0)) {
                let r = if se == 0.0 { e } else { bisect(even, e0, e, se0)? };
                roots.push((r, Parity::Even));
            }
            if so0 != 0.0 && (so == 0.0 || (so0 < 0.0) != (so < 0.0)) {
                let r = if so == 0.0 { e } else { bisect(odd, e0, e, so0)? };
                roots.push((r, Parity::Odd));
            }
        } else {
            if se == 0.0 {
                roots.push((e, Parity::Even));
            }
            if so == 0.0 {
                roots.push((e, Parity::Odd));
            }
        }
        // a grid zero was recorded above; a zero left end never opens a bracket
        prev = Some((e, se, so));
    }
    Ok(roots)
}

fn sample_grid(n: usize) -> Vec<f64> {
    (0..n).map(|j| j as f64 * TAU / n as f64).collect()
}

fn normalize(samples: &mut [(f64, f64)], weight: impl Fn(f64) -> f64) {
    let h = TAU / samples.len() as f64;
    let norm: f64 = samples.iter().map(|&(t, p)| p * p * weight(t)).sum::<f64>() * h;
    let peak = samples.iter().map(|s| s.1).fold(0.0f64, |m, p| if p.abs() > m.abs() { p } else { m });
    let scale = peak.signum() / norm.sqrt();
    for s in samples.iter_mut() {
        s.1 *= scale;
    }
}

/// Samples the solution with initial data `(psi, psi')(0) = (a, b)` over a
/// whole period.
fn sample_full<C: Coefficients + ?Sized>(
    coeffs: &C,
    eps: f64,
    a: f64,
    b: f64,
    n: usize,
    opts: &IntegratorOptions,
) -> Result<Vec<(f64, f64)>> {
    let grid = sample_grid(n);
    let states = propagate_sampled_scaled(coeffs, eps, OdeState::new(0.0, a, b), &grid, opts)?;
    let top = states.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    Ok(states.iter().map(|(s, lg)| (s.theta, s.psi * (lg - top).exp())).collect())
}

/// Parity label of a converged solution.
///
/// States from the half-period search keep the label of the problem that
/// produced them when the equation is reflection-symmetric. Otherwise
/// `psi(2 pi - theta)` is compared against `+psi(theta)` and `-psi(theta)` in
/// the discrete `L2` norm, with relative tolerance `1e-4`.
pub fn parity_of<C: Coefficients + ?Sized>(solution: &EigenSolution, coeffs: &C) -> Parity {
    if coeffs.reflection_symmetric() {
        if let Some(b) = solution.branch {
            return b;
        }
    }
    classify_samples(&solution.psi_samples)
}

fn classify_samples(samples: &[(f64, f64)]) -> Parity {
    let n = samples.len();
    let (mut norm, mut even, mut odd) = (0.0, 0.0, 0.0);
    for j in 0..n {
        let p = samples[j].1;
        let q = samples[(n - j) % n].1;
        norm += p * p;
        even += (p - q) * (p - q);
        odd += (p + q) * (p + q);
    }
    let (norm, even, odd) = (norm.sqrt(), even.sqrt(), odd.sqrt());
    if even <= 1e-4 * norm {
        Parity::Even
    } else if odd <= 1e-4 * norm {
        Parity::Odd
    } else {
        Parity::Unclassified
    }
}

fn build_solution<C: Coefficients + ?Sized>(
    coeffs: &C,
    mode: FieldMode,
    eps: f64,
    samples: Vec<(f64, f64)>,
    branch: Option<Parity>,
    opts: &SpectrumOptions,
) -> Result<EigenSolution> {
    let mut samples = samples;
    normalize(&mut samples, |t| coeffs.weight(t));
    let io = &opts.integrator;
    let (residual, abel_residual) = match branch {
        // the sine of the angle between the two shots at the match point;
        // for a symmetric equation det(M - I) factors into the even and odd
        // matching conditions
        Some(p) => {
            let (shot, r) = HalfShot::new(coeffs, io).best_at(eps, p)?;
            let tm = shot.theta_m;
            (r, abel_check(coeffs, eps, 0.0, tm, io)?.max(abel_check(coeffs, eps, PI, tm, io)?))
        }
        None => {
            let m = monodromy_with(coeffs, eps, io)?;
            (m.relative_trace_residual(abel_determinant(coeffs)), abel_check(coeffs, eps, 0.0, TAU, io)?)
        }
    };
    let mut sol = EigenSolution {
        epsilon: eps,
        parity: Parity::Unclassified,
        psi_samples: samples,
        residual,
        abel_residual,
        mode,
        branch,
    };
    sol.parity = parity_of(&sol, coeffs);
    Ok(sol)
}

fn solutions_from_full_root<C: Coefficients + ?Sized>(
    coeffs: &C,
    mode: FieldMode,
    eps: f64,
    opts: &SpectrumOptions,
) -> Result<Vec<EigenSolution>> {
    let m = monodromy_with(coeffs, eps, &opts.integrator)?;
    let dev = ((m.m11 - 1.0).powi(2) + m.m12.powi(2) + m.m21.powi(2) + (m.m22 - 1.0).powi(2)).sqrt();
    let n = opts.samples;
    if dev < 1e-5 {
        // every solution is periodic: report the two fundamental ones
        let a = sample_full(coeffs, eps, 1.0, 0.0, n, &opts.integrator)?;
        let b = sample_full(coeffs, eps, 0.0, 1.0, n, &opts.integrator)?;
        return Ok(vec![
            build_solution(coeffs, mode, eps, a, None, opts)?,
            build_solution(coeffs, mode, eps, b, None, opts)?,
        ]);
    }
    let (a, b) = m.null_vector();
    let s = sample_full(coeffs, eps, a, b, n, &opts.integrator)?;
    Ok(vec![build_solution(coeffs, mode, eps, s, None, opts)?])
}

fn sort_and_dedup(mut sols: Vec<EigenSolution>, root_tol: f64) -> Vec<EigenSolution> {
    sols.sort_by(|a, b| a.epsilon.total_cmp(&b.epsilon));
    let mut out: Vec<EigenSolution> = Vec::with_capacity(sols.len());
    for s in sols {
        let dup = out
            .iter()
            .rev()
            .take_while(|o| s.epsilon - o.epsilon <= 10.0 * root_tol)
            .any(|o| o.parity == s.parity && o.branch == s.branch);
        if !dup {
            out.push(s);
        }
    }
    out
}

/// Eigenvalues inside `window` for an arbitrary coefficient set.
pub fn find_eigenvalues_for<C: Coefficients + ?Sized>(
    coeffs: &C,
    mode: FieldMode,
    path: SearchPath,
    window: &SearchWindow,
    opts: &SpectrumOptions,
) -> Result<SpectrumReport> {
    window.validate()?;
    let mut report = SpectrumReport::default();
    let mut sols = Vec::new();
    match path {
        SearchPath::FullMonodromy => {
            let roots = scan_full(
                coeffs,
                window.eps_min,
                window.eps_max,
                window.step,
                window.root_tol,
                opts,
                &mut report.failures,
            )?;
            for (eps, _) in roots {
                sols.extend(solutions_from_full_root(coeffs, mode, eps, opts)?);
            }
        }
        SearchPath::ParitySplit => {
            let shot = HalfShot::new(coeffs, &opts.integrator);
            for (eps, parity) in scan_parity(coeffs, window, opts)? {
                let s = shot.best_at(eps, parity)?.0.sample(eps, parity, opts.samples)?;
                sols.push(build_solution(coeffs, mode, eps, s, Some(parity), opts)?);
            }
        }
    }
    report.solutions = sort_and_dedup(sols, window.root_tol);
    Ok(report)
}

pub fn find_eigenvalues_with(
    shape: &TorusShape,
    mode: &FieldMode,
    window: &SearchWindow,
    opts: &SpectrumOptions,
) -> Result<SpectrumReport> {
    let c = assemble(shape, mode);
    find_eigenvalues_for(&c, *mode, SearchPath::for_variant(mode.variant), window, opts)
}

/// Ordered eigenvalues of the torus problem inside `window`.
pub fn find_eigenvalues(shape: &TorusShape, mode: &FieldMode, window: &SearchWindow) -> Result<Vec<EigenSolution>> {
    Ok(find_eigenvalues_with(shape, mode, window, &SpectrumOptions::default())?.solutions)
}

/// Minimum of a smooth periodic function from `n` uniform samples, lowered by
/// twice the largest second difference over eight (the interpolation error of
/// a parabola through the lowest sample) plus a roundoff allowance.
fn periodic_min_bound(f: impl Fn(f64) -> f64, n: usize) -> f64 {
    let h = TAU / n as f64;
    let v: Vec<f64> = (0..n).map(|i| f(i as f64 * h)).collect();
    let mut lo = f64::INFINITY;
    let mut curv = 0.0f64;
    let mut size = 0.0f64;
    for i in 0..n {
        let (a, b, c) = (v[(i + n - 1) % n], v[i], v[(i + 1) % n]);
        lo = lo.min(b);
        curv = curv.max((a - 2.0 * b + c).abs());
        size = size.max(b.abs());
    }
    lo - 0.25 * curv - 1e-12 * size.max(1.0)
}

/// Lower bound on the principal eigenvalue from two positive test functions:
/// `1`, giving `min V`, and `exp(g)` with `g' = (drift - mean drift) / 2`,
/// giving `min(V - drift'/2 + drift^2/4) - (mean drift / 2)^2`.
pub fn principal_lower_bound<C: Coefficients + ?Sized>(coeffs: &C, n: usize) -> f64 {
    let mean = drift_integral(coeffs, n) / TAU;
    let half_mean2 = 0.25 * mean * mean;
    let plain = periodic_min_bound(|t| coeffs.potential(t), n);
    let tilted = periodic_min_bound(
        |t| {
            let d = coeffs.drift(t);
            let dd = (coeffs.drift(t + 1e-5) - coeffs.drift(t - 1e-5)) / 2e-5;
            coeffs.potential(t) - 0.5 * dd + 0.25 * d * d
        },
        n,
    ) - half_mean2;
    plain.max(tilted)
}

/// Whether `eps` lies below the principal eigenvalue of the full periodic
/// problem.
///
/// Below the principal eigenvalue the Floquet multipliers are real and
/// straddle `1`, and the Floquet solutions are positive. Above it, either
/// both multipliers sit on one side of `1`, or they are complex, or the
/// Floquet solutions change sign. `det M` is taken from the Abel identity.
fn below_principal<C: Coefficients + ?Sized>(coeffs: &C, det: f64, eps: f64, opts: &IntegratorOptions) -> Result<bool> {
    let m = monodromy_with(coeffs, eps, opts)?;
    if m.trace_residual(det) >= 0.0 {
        return Ok(false);
    }
    let tr = m.trace();
    let mu = 0.5 * (tr + (tr * tr - 4.0 * det).max(0.0).sqrt());
    let v1 = (m.m12, mu - m.m11);
    let v2 = (mu - m.m22, m.m21);
    let (a, b) = if v1.0.hypot(v1.1) >= v2.0.hypot(v2.1) { v1 } else { v2 };
    if a == 0.0 || !a.is_finite() || !b.is_finite() {
        return Ok(false);
    }
    let (end, zeros) = propagate_direction(coeffs, eps, OdeState::new(0.0, a, b), TAU, opts)?;
    Ok(zeros == 0 && end.psi * a > 0.0)
}

/// Lowest eigenvalue of an arbitrary coefficient set.
///
/// The eigenvalue is bracketed between a rigorous lower bound and the
/// potential maximum, then bisected on a predicate that is true exactly below
/// it. `floor` optionally supplies an extra lower bound.
pub fn lowest_eigenvalue_for<C: Coefficients + ?Sized>(
    coeffs: &C,
    mode: FieldMode,
    path: SearchPath,
    floor: Option<f64>,
    opts: &SpectrumOptions,
) -> Result<EigenSolution> {
    let (_, vmax) = sampled_range(|t| coeffs.potential(t), 4096);
    let mut lo = principal_lower_bound(coeffs, 4096);
    if let Some(f) = floor {
        lo = lo.max(f);
    }
    let mut hi = vmax + 1e-2 + 1e-3 * vmax.abs();
    let io = &opts.integrator;
    let det = abel_determinant(coeffs);
    let shot = HalfShot::new(coeffs, io);
    let below = |e: f64| -> Result<bool> {
        match path {
            SearchPath::ParitySplit => shot.below_lowest(e),
            SearchPath::FullMonodromy => below_principal(coeffs, det, e, io),
        }
    };
    let mut widen = 1.0;
    while !below(lo)? {
        hi = hi.min(lo);
        lo -= widen;
        widen *= 2.0;
        if widen > 1e6 {
            return Err(Error::NoRoot { lo, hi });
        }
    }
    widen = 1.0;
    while below(hi)? {
        lo = hi;
        hi += widen;
        widen *= 2.0;
        if widen > 1e6 {
            return Err(Error::NoRoot { lo, hi });
        }
    }
    // to adjacent floats: the residual is set by how fast it moves with eps
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
    match path {
        SearchPath::ParitySplit => {
            let r_lo = shot.residual(lo, Parity::Even)?.abs();
            let r_hi = shot.residual(hi, Parity::Even)?.abs();
            let eps = if r_lo <= r_hi { lo } else { hi };
            let s = shot.best_at(eps, Parity::Even)?.0.sample(eps, Parity::Even, opts.samples)?;
            build_solution(coeffs, mode, eps, s, Some(Parity::Even), opts)
        }
        SearchPath::FullMonodromy => {
            // the root lies between lo and hi; take the end with the smaller residual
            let r_lo = signed_full_residual(coeffs, det, lo, io)?.0.abs();
            let r_hi = signed_full_residual(coeffs, det, hi, io)?.0.abs();
            let eps = if r_lo <= r_hi { lo } else { hi };
            let mut sols = solutions_from_full_root(coeffs, mode, eps, opts)?;
            Ok(sols.swap_remove(0))
        }
    }
}

/// Lowest eigenvalue of the torus problem for one fixed mode.
pub fn lowest_eigenvalue(shape: &TorusShape, mode: &FieldMode, opts: &SpectrumOptions) -> Result<EigenSolution> {
    let c = assemble(shape, mode);
    lowest_eigenvalue_for(&c, *mode, SearchPath::for_variant(mode.variant), None, opts)
}

/// Flux, curvature toggle and variant; everything in a [`FieldMode`] but `nu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeFamily {
    pub gamma: f64,
    pub curvature_on: bool,
    pub variant: HamiltonianVariant,
}

impl ModeFamily {
    pub fn new(gamma: f64, curvature_on: bool, variant: HamiltonianVariant) -> Self {
        ModeFamily { gamma, curvature_on, variant }
    }

    pub fn mode(&self, nu: i32) -> FieldMode {
        FieldMode::new(self.gamma, nu, self.curvature_on, self.variant)
    }
}

/// `nu` values ordered by `|nu|`, positive before negative.
pub fn nu_order(range: &RangeInclusive<i32>) -> Vec<i32> {
    let mut v: Vec<i32> = range.clone().collect();
    v.sort_by_key(|&n| (n.unsigned_abs(), n < 0));
    v
}

/// Minimizes the lowest eigenvalue over `nu_range`.
///
/// Candidates are visited in order of `|nu|`, positive first, and replace the
/// incumbent only when lower by more than `10 root_tol`, which makes ties
/// resolve toward small `|nu|` and then positive `nu`. A candidate is skipped
/// when `eps_0(ref) + min(V_nu - V_ref)` already rules it out; this bound is
/// exact for principal eigenvalues, so skipping never changes the answer.
pub fn ground_state_with(
    shape: &TorusShape,
    family: &ModeFamily,
    nu_range: RangeInclusive<i32>,
    opts: &SpectrumOptions,
) -> Result<(i32, EigenSolution)> {
    let order = nu_order(&nu_range);
    if order.is_empty() {
        return Err(Error::Config("empty nu range".into()));
    }
    let tie = 10.0 * opts.root_tol;
    let path = SearchPath::for_variant(family.variant);
    let mut best: Option<(i32, EigenSolution, CoefficientSet)> = None;
    for nu in order {
        let coeffs = assemble(shape, &family.mode(nu));
        let floor = best.as_ref().map(|(_, sol, reference)| {
            let shift = periodic_min_bound(|t| coeffs.potential(t) - reference.potential(t), 4096);
            sol.epsilon + shift - tie
        });
        if let (Some(f), Some((_, sol, _))) = (floor, best.as_ref()) {
            if f >= sol.epsilon - tie {
                continue;
            }
        }
        let sol = lowest_eigenvalue_for(&coeffs, coeffs.mode, path, floor, opts)?;
        let better = match &best {
            None => true,
            Some((_, b, _)) => sol.epsilon < b.epsilon - tie,
        };
        if better {
            best = Some((nu, sol, coeffs));
        }
    }
    let (nu, sol, _) = best.expect("nonempty range");
    Ok((nu, sol))
}

pub fn ground_state(
    shape: &TorusShape,
    family: &ModeFamily,
    nu_range: RangeInclusive<i32>,
) -> Result<(i32, EigenSolution)> {
    ground_state_with(shape, family, nu_range, &SpectrumOptions::default())
}
