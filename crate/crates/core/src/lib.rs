//! Single-particle spectrum of an electron bound to an elliptical toroidal
//! surface in a uniform axial magnetic field.
//!
//! The surface Schrödinger equation separates as `psi(theta) exp(i nu phi)`;
//! the meridian equation is solved by shooting the two fundamental solutions
//! around the cross-section and requiring periodicity. Flat-ring and ribbon
//! limiting problems and a finite-difference cross-check live alongside.

pub mod error;
pub mod geometry;
pub mod hamiltonian;
pub mod integrator;
pub mod limits;
pub mod oracle;
pub mod spectrum;
pub mod sweep;

pub use error::{Error, Result};
pub use geometry::{HamiltonianVariant, TorusShape};
pub use hamiltonian::{assemble, CoefficientSet, Coefficients, FieldMode};
pub use limits::{ribbon_ground_state, ring_ground_state, RibbonSpec, RingSpec};
pub use spectrum::{find_eigenvalues, ground_state, EigenSolution, ModeFamily, Parity, SearchWindow, SpectrumOptions};
pub use sweep::{run_sweep, Solver, SweepConfig, SweepTable};
