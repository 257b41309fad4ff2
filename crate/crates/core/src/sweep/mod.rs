//! Flux sweeps of the ground-state energy and their tabular output.

mod config;
mod emit;

pub use config::{parse_curvature, parse_solvers, parse_variants, ConfigOverrides, OutputFormat, Solver, SweepConfig};
pub use emit::{emit, parse_csv, to_csv, to_plotdata, CSV_HEADER};

use crate::error::Result;
use crate::geometry::{HamiltonianVariant, TorusShape};
use crate::limits::{
    ribbon_ground_state, ribbon_ground_state_min_nu, ring_fd_level, ring_ground_state_min_nu, RibbonSpec, RingSpec,
    RING_GRID,
};
use crate::spectrum::{ground_state_with, lowest_eigenvalue, ModeFamily, Parity, SpectrumOptions};
use rayon::prelude::*;

/// Parity column of a sweep row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowParity {
    Even,
    Odd,
    Unclassified,
    /// Limit solvers carry no `theta` parity.
    None,
    /// The point could not be computed; `epsilon0` and `residual` are NaN.
    Failed,
}

impl RowParity {
    pub fn label(self) -> &'static str {
        match self {
            RowParity::Even => "even",
            RowParity::Odd => "odd",
            RowParity::Unclassified => "unclassified",
            RowParity::None => "none",
            RowParity::Failed => "failed",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        Some(match s {
            "even" => RowParity::Even,
            "odd" => RowParity::Odd,
            "unclassified" => RowParity::Unclassified,
            "none" => RowParity::None,
            "failed" => RowParity::Failed,
            _ => return None,
        })
    }
}

impl From<Parity> for RowParity {
    fn from(p: Parity) -> Self {
        match p {
            Parity::Even => RowParity::Even,
            Parity::Odd => RowParity::Odd,
            Parity::Unclassified => RowParity::Unclassified,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub gamma: f64,
    pub nu_star: i32,
    pub epsilon0: f64,
    pub parity: RowParity,
    pub residual: f64,
    pub solver: Solver,
    /// `None` for limit solvers.
    pub variant: Option<HamiltonianVariant>,
    /// `None` for limit solvers.
    pub curvature: Option<bool>,
    pub alpha: f64,
    pub beta: f64,
}

impl SweepRow {
    pub fn failed(&self) -> bool {
        self.parity == RowParity::Failed
    }

    /// Identifies the curve a row belongs to.
    pub fn curve(&self) -> (Solver, Option<HamiltonianVariant>, Option<bool>) {
        (self.solver, self.variant, self.curvature)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    /// Messages for rows whose computation failed, in row order.
    pub failures: Vec<String>,
}

impl SweepTable {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Rows of one curve, in `gamma` order.
    pub fn curve(
        &self,
        solver: Solver,
        variant: Option<HamiltonianVariant>,
        curvature: Option<bool>,
    ) -> Vec<&SweepRow> {
        self.rows.iter().filter(|r| r.curve() == (solver, variant, curvature)).collect()
    }
}

#[derive(Debug, Clone, Copy)]
enum Curve {
    Torus { variant: HamiltonianVariant, curvature: bool },
    Ring,
    Ribbon,
}

fn curves(cfg: &SweepConfig) -> Vec<Curve> {
    let mut out = Vec::new();
    for &s in &cfg.solvers {
        match s {
            Solver::Torus => {
                for &variant in &cfg.variants {
                    for &curvature in &cfg.curvature {
                        out.push(Curve::Torus { variant, curvature });
                    }
                }
            }
            Solver::Ring => out.push(Curve::Ring),
            Solver::Ribbon => out.push(Curve::Ribbon),
        }
    }
    out
}

struct Point {
    nu: i32,
    epsilon: f64,
    parity: RowParity,
    residual: f64,
}

fn compute(cfg: &SweepConfig, opts: &SpectrumOptions, curve: Curve, gamma: f64) -> Result<Point> {
    let nus = cfg.nu_range();
    match curve {
        Curve::Torus { variant, curvature } => {
            let shape = TorusShape::new(cfg.alpha, cfg.beta)?;
            let family = ModeFamily::new(gamma, curvature, variant);
            let (nu, sol) = match cfg.fixed_nu {
                Some(nu) => (nu, lowest_eigenvalue(&shape, &family.mode(nu), opts)?),
                None => ground_state_with(&shape, &family, nus, opts)?,
            };
            Ok(Point { nu, epsilon: sol.epsilon, parity: sol.parity.into(), residual: sol.residual })
        }
        Curve::Ring => {
            let (nu, epsilon) = match cfg.fixed_nu {
                Some(nu) => (nu, crate::limits::ring_ground_state(&RingSpec::new(cfg.alpha, gamma, nu)?)?),
                None => ring_ground_state_min_nu(cfg.alpha, gamma, nus)?,
            };
            // Richardson correction size as the error estimate
            let spec = RingSpec::new(cfg.alpha, gamma, nu)?;
            let residual = (ring_fd_level(&spec, RING_GRID, 0)? - ring_fd_level(&spec, RING_GRID / 2, 0)?).abs() / 3.0;
            Ok(Point { nu, epsilon, parity: RowParity::None, residual })
        }
        Curve::Ribbon => {
            let (nu, epsilon) = match cfg.fixed_nu {
                Some(nu) => (nu, ribbon_ground_state(&RibbonSpec::new(cfg.alpha, cfg.beta, gamma, nu)?)),
                None => ribbon_ground_state_min_nu(cfg.alpha, cfg.beta, gamma, nus)?,
            };
            Ok(Point { nu, epsilon, parity: RowParity::None, residual: 0.0 })
        }
    }
}

/// Runs every `(gamma, curve)` point on the rayon pool.
///
/// Rows come out sorted by `gamma`, and within one `gamma` in the order
/// solvers, variants and curvature settings were listed, whatever the
/// schedule. A point that fails becomes a `failed` row and the sweep goes on.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepTable> {
    cfg.validate()?;
    let opts = cfg.spectrum_options()?;
    let curves = curves(cfg);
    let jobs: Vec<(f64, Curve)> =
        cfg.gamma_grid().into_iter().flat_map(|g| curves.iter().map(move |&c| (g, c))).collect();
    let results: Vec<(SweepRow, Option<String>)> = jobs
        .par_iter()
        .map(|&(gamma, curve)| {
            let (solver, variant, curvature) = match curve {
                Curve::Torus { variant, curvature } => (Solver::Torus, Some(variant), Some(curvature)),
                Curve::Ring => (Solver::Ring, None, None),
                Curve::Ribbon => (Solver::Ribbon, None, None),
            };
            let mut row = SweepRow {
                gamma,
                nu_star: cfg.fixed_nu.unwrap_or(0),
                epsilon0: f64::NAN,
                parity: RowParity::Failed,
                residual: f64::NAN,
                solver,
                variant,
                curvature,
                alpha: cfg.alpha,
                beta: cfg.beta,
            };
            match compute(cfg, &opts, curve, gamma) {
                Ok(p) => {
                    row.nu_star = p.nu;
                    row.epsilon0 = p.epsilon;
                    row.parity = p.parity;
                    row.residual = p.residual;
                    (row, None)
                }
                Err(e) => (row, Some(format!("{} at gamma = {gamma}: {e}", solver.label()))),
            }
        })
        .collect();
    let mut table = SweepTable::default();
    for (row, msg) in results {
        table.rows.push(row);
        table.failures.extend(msg);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_circular_torus_rows() {
        let cfg = SweepConfig {
            alpha: 0.5,
            beta: 0.5,
            gamma_min: 0.0,
            gamma_max: 1.0,
            gamma_steps: 3,
            curvature: vec![false],
            ..SweepConfig::default()
        };
        let t = run_sweep(&cfg).unwrap();
        assert_eq!(t.rows.len(), 3);
        assert!(t.failures.is_empty());
        assert!(t.rows[0].epsilon0.abs() < 1e-8);
        assert_eq!(t.rows[0].nu_star, 0);
        assert!(t.rows.windows(2).all(|w| w[0].gamma < w[1].gamma));
    }

    #[test]
    fn ribbon_single_row() {
        let cfg = SweepConfig {
            alpha: 0.1,
            beta: 0.5,
            gamma_min: 0.0,
            gamma_max: 0.0,
            gamma_steps: 1,
            solvers: vec![Solver::Ribbon],
            ..SweepConfig::default()
        };
        let t = run_sweep(&cfg).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert!((t.rows[0].epsilon0 - 0.098696).abs() < 1e-6);
        assert_eq!(t.rows[0].parity, RowParity::None);
        assert_eq!(t.rows[0].variant, None);
    }

    #[test]
    fn row_order_follows_config() {
        let cfg = SweepConfig {
            gamma_steps: 2,
            gamma_max: 0.5,
            curvature: vec![true, false],
            solvers: vec![Solver::Ribbon, Solver::Torus],
            ..SweepConfig::default()
        };
        let t = run_sweep(&cfg).unwrap();
        let kinds: Vec<_> = t.rows.iter().map(|r| (r.solver, r.curvature)).collect();
        let one = [(Solver::Ribbon, None), (Solver::Torus, Some(true)), (Solver::Torus, Some(false))];
        assert_eq!(kinds, [one, one].concat());
    }
}
