//! Coefficients of the meridian (`theta`) equation.
//!
//! The surface equation is used in the orientation
//!
//! ```text
//! psi'' = drift(theta) psi' + (potential(theta) - eps) psi
//! ```
//!
//! where `potential` collects the azimuthal kinetic term, the curvature
//! potential, and the diamagnetic and paramagnetic flux terms.

pub use crate::geometry::HamiltonianVariant;
use crate::geometry::{curvature_potential, profile, TorusShape};

/// Flux parameter per tesla for a torus with `R = 500 Å`.
pub const FLUX_PER_TESLA: f64 = 0.263;

/// Dimensionless flux parameter for an axial field of `b0` tesla.
///
/// The conversion factor is tied to the default 500 Å major radius.
pub fn flux_from_tesla(b0: f64) -> f64 {
    FLUX_PER_TESLA * b0
}

pub fn tesla_from_flux(gamma: f64) -> f64 {
    gamma / FLUX_PER_TESLA
}

/// Anything that supplies the coefficients of `psi'' = drift psi' + (V - eps) psi`.
pub trait Coefficients: Sync {
    fn drift(&self, x: f64) -> f64;

    fn potential(&self, x: f64) -> f64;

    /// `(drift, potential)` in one call; override when the two share work.
    fn eval(&self, x: f64) -> (f64, f64) {
        (self.drift(x), self.potential(x))
    }

    /// Normalization measure for eigenfunctions.
    fn weight(&self, _x: f64) -> f64 {
        1.0
    }

    /// Whether the equation is invariant under `x -> -x` (odd drift, even
    /// potential), so that even and odd states separate.
    fn reflection_symmetric(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldMode {
    pub gamma: f64,
    pub nu: i32,
    pub curvature_on: bool,
    pub variant: HamiltonianVariant,
}

impl FieldMode {
    pub fn new(gamma: f64, nu: i32, curvature_on: bool, variant: HamiltonianVariant) -> Self {
        FieldMode { gamma, nu, curvature_on, variant }
    }

    pub fn with_nu(self, nu: i32) -> Self {
        FieldMode { nu, ..self }
    }
}

impl Default for FieldMode {
    fn default() -> Self {
        FieldMode { gamma: 0.0, nu: 0, curvature_on: true, variant: HamiltonianVariant::AsPrinted }
    }
}

/// The `theta`-equation for one shape and field mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientSet {
    pub shape: TorusShape,
    pub mode: FieldMode,
}

pub fn assemble(shape: &TorusShape, mode: &FieldMode) -> CoefficientSet {
    CoefficientSet { shape: *shape, mode: *mode }
}

impl CoefficientSet {
    /// Azimuthal kinetic, diamagnetic and paramagnetic terms (everything in
    /// the potential except the curvature potential).
    pub fn azimuthal_terms(&self, theta: f64) -> f64 {
        let pr = profile(&self.shape, theta);
        let a = self.shape.alpha;
        let (g, nu) = (self.mode.gamma, self.mode.nu as f64);
        pr.d * pr.d * nu * nu / (pr.f * pr.f) + g * g * pr.f * pr.f * a * a * pr.p * pr.p / 4.0 + g * nu * a * a * pr.p
    }

    pub fn paramagnetic(&self, theta: f64) -> f64 {
        let a = self.shape.alpha;
        self.mode.gamma * self.mode.nu as f64 * a * a * profile(&self.shape, theta).p
    }

    /// Minimum and maximum of the potential, sampled on `n` uniform points.
    pub fn potential_range(&self, n: usize) -> (f64, f64) {
        sampled_range(|t| self.potential(t), n)
    }
}

pub(crate) fn sampled_range(f: impl Fn(f64) -> f64, n: usize) -> (f64, f64) {
    let h = std::f64::consts::TAU / n as f64;
    (0..n).map(|i| f(i as f64 * h)).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

impl Coefficients for CoefficientSet {
    fn drift(&self, theta: f64) -> f64 {
        self.eval(theta).0
    }

    fn potential(&self, theta: f64) -> f64 {
        self.eval(theta).1
    }

    fn eval(&self, theta: f64) -> (f64, f64) {
        let (s, c) = theta.sin_cos();
        let (a, b) = (self.shape.alpha, self.shape.beta);
        let d2 = a * a * s * s + b * b * c * c;
        let f = 1.0 + a * c;
        let (g, nu) = (self.mode.gamma, self.mode.nu as f64);
        let p2 = d2 / (a * a);
        let p = p2.sqrt();

        let drift = match self.mode.variant {
            HamiltonianVariant::AsPrinted => a * s / f + (a * a - b * b) / d2,
            HamiltonianVariant::Rederived => a * s / f + (a * a - b * b) * s * c / d2,
        };

        let mut potential = d2 * nu * nu / (f * f) + g * g * f * f * a * a * p2 / 4.0 + g * nu * a * a * p;
        if self.mode.curvature_on {
            potential += match self.mode.variant {
                HamiltonianVariant::AsPrinted => -0.25 * (a * a * b * b / (d2 * d2) + b * b * c * c / (f * f)),
                HamiltonianVariant::Rederived => curvature_potential(&self.shape, theta, HamiltonianVariant::Rederived),
            };
        }
        (drift, potential)
    }

    /// Surface measure `D F`.
    fn weight(&self, theta: f64) -> f64 {
        let pr = profile(&self.shape, theta);
        pr.d * pr.f
    }

    fn reflection_symmetric(&self) -> bool {
        self.mode.variant == HamiltonianVariant::Rederived || self.shape.circular()
    }
}
