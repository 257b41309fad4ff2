//! Scaled geometry of the elliptical torus.
//!
//! Lengths are measured in units of the major radius `R`. The cross-section
//! is an ellipse with horizontal semi-axis `alpha = a/R` and vertical
//! semi-axis `beta = b/R`; the surface point at meridian angle `theta` sits at
//! cylindrical radius `F(theta) = 1 + alpha cos(theta)` and height
//! `beta sin(theta)`.

use crate::error::{Error, Result};

/// Physical major radius at which the flux conversion `gamma = 0.263 B0` holds.
pub const DEFAULT_MAJOR_RADIUS_ANGSTROM: f64 = 500.0;

/// Which curvature potential (and, in the Hamiltonian, which drift term) to use.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HamiltonianVariant {
    /// Coefficients exactly as printed in the published surface equation.
    #[default]
    AsPrinted,
    /// Coefficients rebuilt from the principal curvatures and the
    /// Laplace-Beltrami operator; restores the `theta -> -theta` symmetry.
    Rederived,
}

impl HamiltonianVariant {
    pub fn label(self) -> &'static str {
        match self {
            HamiltonianVariant::AsPrinted => "printed",
            HamiltonianVariant::Rederived => "rederived",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "printed" | "asprinted" | "as-printed" => Some(HamiltonianVariant::AsPrinted),
            "rederived" => Some(HamiltonianVariant::Rederived),
            _ => None,
        }
    }
}

impl std::fmt::Display for HamiltonianVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusShape {
    pub alpha: f64,
    pub beta: f64,
    pub major_radius_angstrom: f64,
}

impl TorusShape {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        Self::with_major_radius(alpha, beta, DEFAULT_MAJOR_RADIUS_ANGSTROM)
    }

    pub fn with_major_radius(alpha: f64, beta: f64, major_radius_angstrom: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidShape(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::InvalidShape(format!("beta must be positive, got {beta}")));
        }
        if !(major_radius_angstrom.is_finite() && major_radius_angstrom > 0.0) {
            return Err(Error::InvalidShape(format!("major radius must be positive, got {major_radius_angstrom}")));
        }
        Ok(TorusShape { alpha, beta, major_radius_angstrom })
    }

    /// Circular cross-section (`a == b`).
    pub fn circular(&self) -> bool {
        (self.alpha - self.beta).abs() < 1e-12
    }

    pub fn profile(&self, theta: f64) -> ProfileSample {
        profile(self, theta)
    }

    pub fn curvatures(&self, theta: f64) -> CurvaturePair {
        curvatures(self, theta)
    }
}

/// Profile functions of the cross-section at one meridian angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSample {
    pub theta: f64,
    /// Arc-length factor `P/R = sqrt(alpha^2 sin^2 + beta^2 cos^2)`.
    pub d: f64,
    /// `P/a = d / alpha`.
    pub p: f64,
    /// Cylindrical radius `1 + alpha cos(theta)`.
    pub f: f64,
    pub df: f64,
    pub dlog_d: f64,
}

/// Principal curvatures in units of `1/R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvaturePair {
    pub kappa_theta: f64,
    pub kappa_phi: f64,
}

pub fn profile(shape: &TorusShape, theta: f64) -> ProfileSample {
    let (s, c) = theta.sin_cos();
    let (a, b) = (shape.alpha, shape.beta);
    let d2 = a * a * s * s + b * b * c * c;
    let d = d2.sqrt();
    ProfileSample { theta, d, p: d / a, f: 1.0 + a * c, df: -a * s, dlog_d: (a * a - b * b) * s * c / d2 }
}

pub fn curvatures(shape: &TorusShape, theta: f64) -> CurvaturePair {
    let pr = profile(shape, theta);
    let (a, b) = (shape.alpha, shape.beta);
    CurvaturePair { kappa_theta: a * b / (pr.d * pr.d * pr.d), kappa_phi: b * theta.cos() / (pr.f * pr.d) }
}

/// Scaled geometric (curvature-induced) potential. Non-positive everywhere.
pub fn curvature_potential(shape: &TorusShape, theta: f64, variant: HamiltonianVariant) -> f64 {
    let (a, b) = (shape.alpha, shape.beta);
    match variant {
        HamiltonianVariant::AsPrinted => {
            let pr = profile(shape, theta);
            let c = theta.cos();
            let d4 = pr.d.powi(4);
            -0.25 * (a * a * b * b / d4 + b * b * c * c / (pr.f * pr.f))
        }
        HamiltonianVariant::Rederived => {
            let k = curvatures(shape, theta);
            let diff = k.kappa_theta - k.kappa_phi;
            -0.25 * a * a * diff * diff
        }
    }
}

/// Default step for [`frame_self_check`].
pub const FRAME_CHECK_STEP: f64 = 1e-5;

// x(theta + s, phi + t) - x(theta, phi) for the scaled embedding
// (F cos phi, F sin phi, beta sin theta), evaluated without cancellation.
fn displacement(shape: &TorusShape, theta: f64, phi: f64, s: f64, t: f64) -> [f64; 3] {
    let dcos = |x: f64, dx: f64| -2.0 * (x + 0.5 * dx).sin() * (0.5 * dx).sin();
    let dsin = |x: f64, dx: f64| 2.0 * (x + 0.5 * dx).cos() * (0.5 * dx).sin();
    let f0 = 1.0 + shape.alpha * theta.cos();
    let df = shape.alpha * dcos(theta, s);
    let (sp, cp) = (phi + t).sin_cos();
    [df * cp + f0 * dcos(phi, t), df * sp + f0 * dsin(phi, t), shape.beta * dsin(theta, s)]
}

fn dot(u: [f64; 3], v: [f64; 3]) -> f64 {
    u[0] * v[0] + u[1] * v[1] + u[2] * v[2]
}

fn cross(u: [f64; 3], v: [f64; 3]) -> [f64; 3] {
    [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]]
}

/// Numerical principal curvatures from central differences of the embedding.
///
/// The surface normal is oriented into the tube so that the outer equator
/// has positive curvature in both directions.
pub fn numerical_curvatures(shape: &TorusShape, theta: f64, h: f64) -> Result<(f64, f64)> {
    if !(h > 0.0 && h <= 1e-4) {
        return Err(Error::InvalidStep(h));
    }
    let phi = 0.0;
    let disp = |s, t| displacement(shape, theta, phi, s, t);
    let comb = |a: [f64; 3], b: [f64; 3], wa: f64, wb: f64, scale: f64| {
        [(wa * a[0] + wb * b[0]) / scale, (wa * a[1] + wb * b[1]) / scale, (wa * a[2] + wb * b[2]) / scale]
    };
    let (tp, tm, pp, pm) = (disp(h, 0.0), disp(-h, 0.0), disp(0.0, h), disp(0.0, -h));
    let x_t = comb(tp, tm, 1.0, -1.0, 2.0 * h);
    let x_p = comb(pp, pm, 1.0, -1.0, 2.0 * h);
    let x_tt = comb(tp, tm, 1.0, 1.0, h * h);
    let x_pp = comb(pp, pm, 1.0, 1.0, h * h);
    let (a, b, c, d) = (disp(h, h), disp(h, -h), disp(-h, h), disp(-h, -h));
    let x_tp = [
        (a[0] - b[0] - c[0] + d[0]) / (4.0 * h * h),
        (a[1] - b[1] - c[1] + d[1]) / (4.0 * h * h),
        (a[2] - b[2] - c[2] + d[2]) / (4.0 * h * h),
    ];

    let nrm = cross(x_t, x_p);
    let len = dot(nrm, nrm).sqrt();
    let n = [nrm[0] / len, nrm[1] / len, nrm[2] / len];

    let (e, f, g) = (dot(x_t, x_t), dot(x_t, x_p), dot(x_p, x_p));
    let (l, m, nn) = (dot(x_tt, n), dot(x_tp, n), dot(x_pp, n));

    // det(II - k I) = 0
    let qa = e * g - f * f;
    let qb = -(e * nn - 2.0 * f * m + g * l);
    let qc = l * nn - m * m;
    let disc = (qb * qb - 4.0 * qa * qc).max(0.0).sqrt();
    let q = -0.5 * (qb + qb.signum() * disc);
    let (k1, k2) = if q == 0.0 { (0.0, 0.0) } else { (q / qa, qc / q) };
    Ok((k1, k2))
}

/// Maximum deviation between numerically extracted and closed-form principal
/// curvatures at `theta`. Second-order accurate in `h`.
pub fn frame_self_check(shape: &TorusShape, theta: f64, h: f64) -> Result<f64> {
    let (k1, k2) = numerical_curvatures(shape, theta, h)?;
    let exact = curvatures(shape, theta);
    let straight = (k1 - exact.kappa_theta).abs().max((k2 - exact.kappa_phi).abs());
    let swapped = (k2 - exact.kappa_theta).abs().max((k1 - exact.kappa_phi).abs());
    Ok(straight.min(swapped))
}
