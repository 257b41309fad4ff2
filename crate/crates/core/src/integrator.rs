//! Adaptive propagation of the meridian equation and the monodromy matrix.
//!
//! The second-order equation `psi'' = drift psi' + (V - eps) psi` is
//! integrated as a first-order system with the Dormand-Prince 5(4) pair.
//! Step acceptance uses an error-per-unit-step test: the embedded error
//! estimate divided by the step length must stay below
//! `atol + rtol * |y|` component-wise.

use crate::error::{Error, Result};
use crate::hamiltonian::Coefficients;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeState {
    pub theta: f64,
    pub psi: f64,
    pub dpsi: f64,
}

impl OdeState {
    pub fn new(theta: f64, psi: f64, dpsi: f64) -> Self {
        OdeState { theta, psi, dpsi }
    }

    pub fn is_finite(&self) -> bool {
        self.theta.is_finite() && self.psi.is_finite() && self.dpsi.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorOptions {
    pub rtol: f64,
    pub atol: f64,
    pub initial_step: f64,
    pub max_steps: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions { rtol: 1e-10, atol: 1e-12, initial_step: 1e-2, max_steps: 2_000_000 }
    }
}

impl IntegratorOptions {
    /// Options with relative tolerance `tol`; `tol` must lie in `[1e-13, 1e-6]`.
    pub fn with_tol(tol: f64) -> Result<Self> {
        if !(1e-13..=1e-6).contains(&tol) {
            return Err(Error::InvalidTolerance(tol));
        }
        Ok(IntegratorOptions { rtol: tol, atol: (tol * 1e-2).max(1e-15), ..Default::default() })
    }

    fn validate(&self) -> Result<()> {
        if !(1e-13..=1e-6).contains(&self.rtol) {
            return Err(Error::InvalidTolerance(self.rtol));
        }
        Ok(())
    }
}

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Right-hand side for `N / 2` independent solutions packed as
/// `[psi_0, dpsi_0, psi_1, dpsi_1, ...]`.
#[inline]
fn rhs<C: Coefficients + ?Sized, const N: usize>(c: &C, eps: f64, x: f64, y: &[f64; N]) -> [f64; N] {
    let (drift, v) = c.eval(x);
    let mut out = [0.0; N];
    let mut i = 0;
    while i < N {
        out[i] = y[i + 1];
        out[i + 1] = drift * y[i + 1] + (v - eps) * y[i];
        i += 2;
    }
    out
}

#[inline]
fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (coef, k) in terms {
        let s = h * coef;
        for i in 0..N {
            out[i] += s * k[i];
        }
    }
    out
}

/// Stateful stepper; remembers its step size across consecutive segments.
struct Stepper<'a, C: Coefficients + ?Sized, const N: usize> {
    coeffs: &'a C,
    eps: f64,
    opts: IntegratorOptions,
    h: f64,
    steps: usize,
    /// Rescale the state by a positive factor whenever it grows past `1e100`.
    renormalize: bool,
    /// Natural log of the total factor removed by renormalization.
    log_scale: f64,
}

impl<'a, C: Coefficients + ?Sized, const N: usize> Stepper<'a, C, N> {
    fn new(coeffs: &'a C, eps: f64, opts: IntegratorOptions) -> Self {
        Stepper { coeffs, eps, opts, h: opts.initial_step.abs(), steps: 0, renormalize: false, log_scale: 0.0 }
    }

    /// Advances `(x, y)` to `x_end`, calling `observe` after every accepted step.
    fn advance(
        &mut self,
        x: &mut f64,
        y: &mut [f64; N],
        x_end: f64,
        observe: &mut dyn FnMut(f64, &[f64; N]),
    ) -> Result<()> {
        let dir = if x_end >= *x { 1.0 } else { -1.0 };
        let mut k1 = rhs(self.coeffs, self.eps, *x, y);
        while (x_end - *x) * dir > 0.0 {
            let remaining = (x_end - *x).abs();
            let mut h_abs = self.h.min(remaining);
            let last = h_abs >= remaining;
            if last {
                h_abs = remaining;
            }
            let h_floor = 1e-14 * x.abs().max(1.0);
            if h_abs < h_floor && !last {
                return Err(Error::StepUnderflow { theta: *x, h: h_abs });
            }
            let h = dir * h_abs;

            let c = self.coeffs;
            let e = self.eps;
            let k2 = rhs(c, e, *x + C2 * h, &axpy(y, h, &[(A21, &k1)]));
            let k3 = rhs(c, e, *x + C3 * h, &axpy(y, h, &[(A31, &k1), (A32, &k2)]));
            let k4 = rhs(c, e, *x + C4 * h, &axpy(y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = rhs(c, e, *x + C5 * h, &axpy(y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
            let k6 = rhs(c, e, *x + h, &axpy(y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
            let y_new = axpy(y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
            let x_new = if last { x_end } else { *x + h };
            let k7 = rhs(c, e, x_new, &y_new);

            // relative to the norm of each (psi, psi') pair: a componentwise
            // test stalls where psi' vanishes while psi'' is large
            let mut err = 0.0f64;
            for i in (0..N).step_by(2) {
                let size = y[i].hypot(y[i + 1]).max(y_new[i].hypot(y_new[i + 1]));
                let scale = self.opts.atol + self.opts.rtol * size;
                for j in i..i + 2 {
                    let est = h * (E1 * k1[j] + E3 * k3[j] + E4 * k4[j] + E5 * k5[j] + E6 * k6[j] + E7 * k7[j]);
                    err = err.max(est.abs() / (scale * h_abs));
                }
            }
            self.steps += 1;
            if self.steps > self.opts.max_steps {
                return Err(Error::TooManySteps { theta: *x, max_steps: self.opts.max_steps });
            }
            if !err.is_finite() {
                if y_new.iter().all(|v| v.is_finite()) {
                    // error estimate overflowed; shrink and retry
                    self.h = h_abs * 0.1;
                    continue;
                }
                return Err(Error::NonFinite { theta: *x });
            }

            if err <= 1.0 {
                *x = x_new;
                *y = y_new;
                k1 = k7;
                if self.renormalize {
                    let big = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                    if big > 1e100 {
                        self.log_scale += big.ln();
                        for i in 0..N {
                            y[i] /= big;
                            k1[i] /= big;
                        }
                    }
                }
                observe(*x, y);
                let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.25)).clamp(0.2, 5.0) };
                if !last {
                    self.h = h_abs * grow;
                } else {
                    // keep the natural step for the next segment
                    self.h = self.h.max(h_abs * grow.min(1.0));
                }
            } else {
                let shrink = (0.9 * err.powf(-0.25)).clamp(0.1, 0.9);
                self.h = h_abs * shrink;
                if self.h < h_floor {
                    return Err(Error::StepUnderflow { theta: *x, h: self.h });
                }
            }
        }
        Ok(())
    }
}

fn to_state(x: f64, y: &[f64; 2]) -> OdeState {
    OdeState::new(x, y[0], y[1])
}

/// Propagates one solution from `from` to `to_theta` with relative tolerance `tol`.
pub fn propagate<C: Coefficients + ?Sized>(
    coeffs: &C,
    epsilon: f64,
    from: OdeState,
    to_theta: f64,
    tol: f64,
) -> Result<OdeState> {
    propagate_with(coeffs, epsilon, from, to_theta, &IntegratorOptions::with_tol(tol)?)
}

pub fn propagate_with<C: Coefficients + ?Sized>(
    coeffs: &C,
    epsilon: f64,
    from: OdeState,
    to_theta: f64,
    opts: &IntegratorOptions,
) -> Result<OdeState> {
    Ok(propagate_counting_zeros(coeffs, epsilon, from, to_theta, opts)?.0)
}

/// Propagates and counts sign changes of `psi` strictly after the start point.
pub fn propagate_counting_zeros<C: Coefficients + ?Sized>(
    coeffs: &C,
    epsilon: f64,
    from: OdeState,
    to_theta: f64,
    opts: &IntegratorOptions,
) -> Result<(OdeState, usize)> {
    counting_zeros(coeffs, epsilon, from, to_theta, opts, false)
}

/// Like [`propagate_counting_zeros`], but the state is rescaled by positive
/// factors whenever it grows large, so only its direction is meaningful.
/// Never overflows on exponentially growing solutions.
pub fn propagate_direction<C: Coefficients + ?Sized>(
    coeffs: &C,
    epsilon: f64,
    from: OdeState,
    to_theta: f64,
    opts: &IntegratorOptions,
) -> Result<(OdeState, usize)> {
    counting_zeros(coeffs, epsilon, from, to_theta, opts, true)
}

fn counting_zeros<C: Coefficients + ?Sized>(
    coeffs: &C,
    epsilon: f64,
    from: OdeState,
    to_theta: f64,
    opts: &IntegratorOptions,
    rescale: bool,
) -> Result<(OdeState, usize)> {
    opts.validate()?;
    if !from.is_finite() {
        return Err(Error::NonFinite { theta: from.theta });
    }
    let mut stepper = Stepper::<C, 2>::new(coeffs, epsilon, *opts);
    stepper.renormalize = rescale;
    let mut x = from.theta;
    let mut y = [from.psi, from.dpsi];
    let mut zeros = 0usize;
    let mut last_sign = if from.psi != 0.0 { from.psi.signum() } else { from.dpsi.signum() };
    stepper.advance(&mut x, &mut y, to_theta, &mut |_, s| {
        if s[0] != 0.0 {
            let sg = s[0].signum();
            if sg != last_sign {
                zeros += 1;
                last_sign = sg;
            }
        }
    })?;
    Ok((to_state(x, &y), zeros))
}

/// Propagates through every abscissa in `thetas` (monotone), returning the
/// state at each. The step size carries over between segments.
pub fn propagate_sampled<C: Coefficients + ?Sized>(
    coeffs: &C,
    epsilon: f64,
    from: OdeState,
    thetas: &[f64],
    opts: &IntegratorOptions,
) -> Result<Vec<OdeState>> {
    opts.validate()?;
    let mut stepper = Stepper::<C, 2>::new(coeffs, epsilon, *opts);
    let mut x = from.theta;
    let mut y = [from.psi, from.dpsi];
    let mut out = Vec::with_capacity(thetas.len());
    for &t in thetas {
        stepper.advance(&mut x, &mut y, t, &mut |_, _| {})?;
        out.push(to_state(x, &y));
    }
    Ok(out)
}

/// Like [`propagate_sampled`] but immune to overflow: each returned state
/// must be multiplied by `exp` of its companion log-scale to recover the true
/// solution.
pub fn propagate_sampled_scaled<C: Coefficients + ?Sized>(
    coeffs: &C,
    epsilon: f64,
    from: OdeState,
    thetas: &[f64],
    opts: &IntegratorOptions,
) -> Result<Vec<(OdeState, f64)>> {
    opts.validate()?;
    let mut stepper = Stepper::<C, 2>::new(coeffs, epsilon, *opts);
    stepper.renormalize = true;
    let mut x = from.theta;
    let mut y = [from.psi, from.dpsi];
    let mut out = Vec::with_capacity(thetas.len());
    for &t in thetas {
        stepper.advance(&mut x, &mut y, t, &mut |_, _| {})?;
        out.push((to_state(x, &y), stepper.log_scale));
    }
    Ok(out)
}

/// Endpoint map over one period. Column 1 is the solution started from
/// `(psi, psi') = (1, 0)`, column 2 the one started from `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Monodromy {
    pub m11: f64,
    pub m12: f64,
    pub m21: f64,
    pub m22: f64,
    pub epsilon: f64,
}

impl Monodromy {
    pub fn identity(epsilon: f64) -> Self {
        Monodromy { m11: 1.0, m12: 0.0, m21: 0.0, m22: 1.0, epsilon }
    }

    pub fn det(&self) -> f64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn trace(&self) -> f64 {
        self.m11 + self.m22
    }

    /// `det(M - I)`, written so that no cancellation happens when `M` is
    /// close to the identity.
    pub fn periodicity_residual(&self) -> f64 {
        (self.m11 - 1.0) * (self.m22 - 1.0) - self.m12 * self.m21
    }

    /// `det(M - I) = 1 - tr M + det M` with `det M` supplied exactly (from the
    /// Abel identity). Avoids the cancellation in `m11 m22 - m12 m21` when the
    /// entries are large.
    pub fn trace_residual(&self, det: f64) -> f64 {
        1.0 + det - self.trace()
    }

    /// [`Self::trace_residual`] scaled by `max(1, |tr M|, det M)`.
    pub fn relative_trace_residual(&self, det: f64) -> f64 {
        self.trace_residual(det).abs() / self.trace().abs().max(det).max(1.0)
    }

    /// `|det(M - I)|` scaled by `max(1, ||M - I||_F^2)`; the relative
    /// distance of `M - I` from singularity.
    pub fn relative_residual(&self) -> f64 {
        let a = self.m11 - 1.0;
        let d = self.m22 - 1.0;
        let norm2 = a * a + d * d + self.m12 * self.m12 + self.m21 * self.m21;
        self.periodicity_residual().abs() / norm2.max(1.0)
    }

    /// Eigenvalues of `M` (Floquet multipliers); `None` when complex.
    pub fn multipliers(&self) -> Option<(f64, f64)> {
        let t = self.trace();
        let disc = t * t - 4.0 * self.det();
        if disc < 0.0 {
            return None;
        }
        let q = -0.5 * (t + t.signum() * disc.sqrt());
        if q == 0.0 {
            return Some((0.0, 0.0));
        }
        Some((q, self.det() / q))
    }

    /// Coefficients `(A, B)` of a periodic solution `A psi_A + B psi_B`,
    /// taken from the better-conditioned row of `M - I`.
    pub fn null_vector(&self) -> (f64, f64) {
        let r1 = (self.m11 - 1.0, self.m12);
        let r2 = (self.m21, self.m22 - 1.0);
        let n1 = r1.0.hypot(r1.1);
        let n2 = r2.0.hypot(r2.1);
        let (a, b) = if n1 == 0.0 && n2 == 0.0 {
            (1.0, 0.0)
        } else if n1 >= n2 {
            (r1.1, -r1.0)
        } else {
            (r2.1, -r2.0)
        };
        let n = a.hypot(b);
        (a / n, b / n)
    }
}

pub fn periodicity_residual(m: &Monodromy) -> f64 {
    m.periodicity_residual()
}

/// Fundamental pair propagated from `0` to `to` in a single sweep.
fn fundamental_pair<C: Coefficients + ?Sized>(
    coeffs: &C,
    epsilon: f64,
    to: f64,
    opts: &IntegratorOptions,
) -> Result<[f64; 4]> {
    opts.validate()?;
    let mut stepper = Stepper::<C, 4>::new(coeffs, epsilon, *opts);
    let mut x = 0.0;
    let mut y = [1.0, 0.0, 0.0, 1.0];
    stepper.advance(&mut x, &mut y, to, &mut |_, _| {})?;
    Ok(y)
}

pub fn monodromy<C: Coefficients + ?Sized>(coeffs: &C, epsilon: f64, tol: f64) -> Result<Monodromy> {
    monodromy_with(coeffs, epsilon, &IntegratorOptions::with_tol(tol)?)
}

pub fn monodromy_with<C: Coefficients + ?Sized>(
    coeffs: &C,
    epsilon: f64,
    opts: &IntegratorOptions,
) -> Result<Monodromy> {
    let y = fundamental_pair(coeffs, epsilon, std::f64::consts::TAU, opts)?;
    Ok(Monodromy { m11: y[0], m21: y[1], m12: y[2], m22: y[3], epsilon })
}

/// States of the even (`psi_A`) and odd (`psi_B`) fundamental solutions at
/// `theta = pi`, for reflection-symmetric equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPeriod {
    pub even: OdeState,
    pub odd: OdeState,
}

pub fn half_period<C: Coefficients + ?Sized>(coeffs: &C, epsilon: f64, opts: &IntegratorOptions) -> Result<HalfPeriod> {
    let pi = std::f64::consts::PI;
    let y = fundamental_pair(coeffs, epsilon, pi, opts)?;
    Ok(HalfPeriod { even: OdeState::new(pi, y[0], y[1]), odd: OdeState::new(pi, y[2], y[3]) })
}

/// `integral_0^{2 pi} drift` by the periodic trapezoid rule on `n` points.
pub fn drift_integral<C: Coefficients + ?Sized>(coeffs: &C, n: usize) -> f64 {
    let h = std::f64::consts::TAU / n as f64;
    (0..n).map(|i| coeffs.drift(i as f64 * h)).sum::<f64>() * h
}

/// `integral_a^b drift` by composite Simpson, doubled until it settles.
pub fn drift_integral_between<C: Coefficients + ?Sized>(coeffs: &C, a: f64, b: f64) -> f64 {
    let simpson = |n: usize| {
        let h = (b - a) / n as f64;
        let mut s = coeffs.drift(a) + coeffs.drift(b);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * coeffs.drift(a + i as f64 * h);
        }
        s * h / 3.0
    };
    let mut n = 256;
    let mut prev = simpson(n);
    while n < 1 << 20 {
        n *= 2;
        let next = simpson(n);
        let done = (next - prev).abs() <= 1e-14 * next.abs().max(1.0);
        prev = next;
        if done {
            break;
        }
    }
    prev
}

/// Abel identity check on `[from, to]`.
///
/// The fundamental pair started from the identity at `from` is propagated to
/// `to` and its Wronskian compared with `exp(integral_from^to drift)`, in the
/// relative measure of [`abel_residual`]. The pair is rescaled as it grows,
/// so the check works where the plain monodromy would overflow.
pub fn abel_check<C: Coefficients + ?Sized>(
    coeffs: &C,
    epsilon: f64,
    from: f64,
    to: f64,
    opts: &IntegratorOptions,
) -> Result<f64> {
    opts.validate()?;
    let mut stepper = Stepper::<C, 4>::new(coeffs, epsilon, *opts);
    stepper.renormalize = true;
    let mut x = from;
    let mut y = [1.0, 0.0, 0.0, 1.0];
    stepper.advance(&mut x, &mut y, to, &mut |_, _| {})?;
    // both columns carry the factor exp(-log_scale)
    let expected = (drift_integral_between(coeffs, from, to) - 2.0 * stepper.log_scale).exp();
    let w = y[0] * y[3] - y[2] * y[1];
    let scale = y[0].hypot(y[1]) * y[2].hypot(y[3]);
    Ok((w - expected).abs() / scale.max(expected))
}

/// Deviation of `det M` from the Wronskian prediction `exp(integral drift)`.
///
/// Measured relative to the product of the column norms of `M`, the scale
/// against which the integrator controls its error; for a well-conditioned
/// `M` this is the plain relative error.
pub fn abel_residual(m: &Monodromy, drift_integral: f64) -> f64 {
    let expected = drift_integral.exp();
    let scale = m.m11.hypot(m.m21) * m.m12.hypot(m.m22);
    (m.det() - expected).abs() / scale.max(expected)
}
