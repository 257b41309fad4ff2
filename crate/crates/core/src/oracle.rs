//! Finite-difference cross-check of the meridian equation.
//!
//! The periodic operator `-psi'' + drift psi' + V psi` is discretized with
//! second-order central differences on `n` uniform points, giving a cyclic
//! tridiagonal, generally nonsymmetric matrix. Its lowest eigenvalues are
//! found by shift-invert block Krylov iteration with a Rayleigh-Ritz
//! projection; the shift sits below the potential minimum so that the
//! wanted eigenvalues are the dominant ones of the inverse. Nothing here
//! touches the ODE integrator.

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};
use crate::geometry::TorusShape;
use crate::hamiltonian::{assemble, Coefficients, FieldMode};

/// Largest imaginary part tolerated in a reported eigenvalue.
pub const IMAG_TOLERANCE: f64 = 1e-8;

/// Discretized periodic operator. Row `i` reads
/// `lower[i] psi[i-1] + diag[i] psi[i] + upper[i] psi[i+1]`, indices mod `n`.
#[derive(Debug, Clone)]
pub struct FdProblem {
    pub n_grid: usize,
    pub h: f64,
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl FdProblem {
    pub fn new<C: Coefficients + ?Sized>(coeffs: &C, n_grid: usize) -> Result<Self> {
        if n_grid < 8 {
            return Err(Error::InvalidOracle(format!("grid of {n_grid} points is too small")));
        }
        let h = std::f64::consts::TAU / n_grid as f64;
        let h2 = h * h;
        let mut lower = Vec::with_capacity(n_grid);
        let mut diag = Vec::with_capacity(n_grid);
        let mut upper = Vec::with_capacity(n_grid);
        for i in 0..n_grid {
            let (d, v) = coeffs.eval(i as f64 * h);
            lower.push(-1.0 / h2 - d / (2.0 * h));
            diag.push(2.0 / h2 + v);
            upper.push(-1.0 / h2 + d / (2.0 * h));
        }
        Ok(FdProblem { n_grid, h, lower, diag, upper })
    }

    /// Dense copy of the operator.
    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.n_grid;
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, (i + n - 1) % n)] += self.lower[i];
            m[(i, i)] += self.diag[i];
            m[(i, (i + 1) % n)] += self.upper[i];
        }
        m
    }

    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        let n = self.n_grid;
        for i in 0..n {
            out[i] = self.lower[i] * x[(i + n - 1) % n] + self.diag[i] * x[i] + self.upper[i] * x[(i + 1) % n];
        }
    }

    /// Lower bound on the real part of every eigenvalue (Gershgorin).
    pub fn gershgorin_floor(&self) -> f64 {
        (0..self.n_grid).map(|i| self.diag[i] - self.lower[i].abs() - self.upper[i].abs()).fold(f64::INFINITY, f64::min)
    }
}

/// Factorization of a shifted cyclic tridiagonal matrix (Sherman-Morrison
/// correction of a tridiagonal Thomas solve).
struct CyclicSolver {
    sub: Vec<f64>,
    cprime: Vec<f64>,
    denom: Vec<f64>,
    z: Vec<f64>,
    beta_over_gamma: f64,
    z_factor: f64,
}

impl CyclicSolver {
    fn new(p: &FdProblem, shift: f64) -> Self {
        let n = p.n_grid;
        let mut b: Vec<f64> = p.diag.iter().map(|d| d - shift).collect();
        let alpha = p.upper[n - 1];
        let beta = p.lower[0];
        let gamma = -b[0];
        b[0] -= gamma;
        b[n - 1] -= alpha * beta / gamma;

        let sub: Vec<f64> = p.lower.clone();
        let sup: Vec<f64> = p.upper.clone();
        let mut cprime = vec![0.0; n];
        let mut denom = vec![0.0; n];
        denom[0] = b[0];
        cprime[0] = sup[0] / denom[0];
        for i in 1..n {
            denom[i] = b[i] - sub[i] * cprime[i - 1];
            cprime[i] = if i + 1 < n { sup[i] / denom[i] } else { 0.0 };
        }
        let mut solver =
            CyclicSolver { sub, cprime, denom, z: vec![0.0; n], beta_over_gamma: beta / gamma, z_factor: 0.0 };
        let mut u = vec![0.0; n];
        u[0] = gamma;
        u[n - 1] = alpha;
        solver.thomas(&mut u);
        solver.z_factor = 1.0 + u[0] + solver.beta_over_gamma * u[n - 1];
        solver.z = u;
        solver
    }

    fn thomas(&self, r: &mut [f64]) {
        let n = r.len();
        r[0] /= self.denom[0];
        for i in 1..n {
            r[i] = (r[i] - self.sub[i] * r[i - 1]) / self.denom[i];
        }
        for i in (0..n - 1).rev() {
            r[i] -= self.cprime[i] * r[i + 1];
        }
    }

    fn solve(&self, r: &mut [f64]) {
        self.thomas(r);
        let n = r.len();
        let f = (r[0] + self.beta_over_gamma * r[n - 1]) / self.z_factor;
        for (ri, zi) in r.iter_mut().zip(&self.z) {
            *ri -= f * zi;
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sort_by_real(v: &mut [Complex<f64>]) {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// The `k` eigenvalues of smallest real part, ascending.
pub fn fd_spectrum(problem: &FdProblem, k: usize) -> Result<Vec<Complex<f64>>> {
    let n = problem.n_grid;
    if k == 0 || k > n / 4 {
        return Err(Error::InvalidOracle(format!("cannot extract {k} eigenvalues from n = {n}")));
    }
    let shift = problem.gershgorin_floor().min(problem.diag.iter().cloned().fold(f64::INFINITY, f64::min)) - 1.0;
    // diagonal dominance of (A - shift) makes the unpivoted solve stable
    let solver = CyclicSolver::new(problem, shift);

    const BLOCK: usize = 2;
    let max_dim = n.min(400);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut images: Vec<Vec<f64>> = Vec::new();

    let orthonormalize = |basis: &Vec<Vec<f64>>, mut w: Vec<f64>| -> Option<Vec<f64>> {
        let start = dot(&w, &w).sqrt();
        for _ in 0..2 {
            for b in basis {
                let c = dot(&w, b);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
        }
        let norm = dot(&w, &w).sqrt();
        if norm <= 1e-10 * start || norm == 0.0 {
            return None;
        }
        w.iter_mut().for_each(|x| *x /= norm);
        Some(w)
    };

    for s in 0..BLOCK {
        let v: Vec<f64> = (0..n)
            .map(|i| {
                let x = i as f64;
                1.0 + 0.5 * (1.7 * x + 0.3 + s as f64).sin() + 0.25 * (0.37 * x * x + 2.0 * s as f64).cos()
            })
            .collect();
        if let Some(v) = orthonormalize(&basis, v) {
            basis.push(v);
        }
    }

    let mut previous: Option<Vec<Complex<f64>>> = None;
    let mut next_check = (4 * k + 20).max(30);
    let mut applied = 0;
    loop {
        while applied < basis.len() && applied < next_check {
            let mut w = basis[applied].clone();
            solver.solve(&mut w);
            images.push(w.clone());
            applied += 1;
            if basis.len() < max_dim {
                if let Some(v) = orthonormalize(&basis, w) {
                    basis.push(v);
                }
            }
        }
        let p = applied;
        let mut h = DMatrix::<f64>::zeros(p, p);
        for i in 0..p {
            for j in 0..p {
                h[(i, j)] = dot(&basis[i], &images[j]);
            }
        }
        let mut ritz: Vec<Complex<f64>> = h
            .complex_eigenvalues()
            .iter()
            .filter(|mu| mu.norm() > 0.0)
            .map(|mu| Complex::new(shift, 0.0) + Complex::new(1.0, 0.0) / mu)
            .collect();
        sort_by_real(&mut ritz);
        ritz.truncate(k);
        let exhausted = p == basis.len();
        if let Some(prev) = &previous {
            let settled = prev.len() == ritz.len()
                && prev.iter().zip(&ritz).all(|(a, b)| (a - b).norm() <= 1e-11 * b.norm().max(1.0));
            if settled || exhausted {
                return if ritz.len() == k {
                    Ok(ritz)
                } else {
                    Err(Error::InvalidOracle("Krylov space too small".into()))
                };
            }
        } else if exhausted && ritz.len() == k {
            return Ok(ritz);
        }
        previous = Some(ritz);
        next_check += 15;
        if exhausted {
            return Err(Error::InvalidOracle("Krylov iteration did not settle".into()));
        }
    }
}

/// All eigenvalues by dense nonsymmetric QR; for small grids and cross-checks.
pub fn dense_spectrum(problem: &FdProblem) -> Vec<Complex<f64>> {
    let mut v: Vec<Complex<f64>> = problem.matrix().complex_eigenvalues().iter().cloned().collect();
    sort_by_real(&mut v);
    v
}

fn real_parts(values: &[Complex<f64>]) -> Result<Vec<f64>> {
    values
        .iter()
        .map(
            |z| {
                if z.im.abs() > IMAG_TOLERANCE {
                    Err(Error::ComplexEigenvalue { re: z.re, im: z.im })
                } else {
                    Ok(z.re)
                }
            },
        )
        .collect()
}

fn check_request(n_grid: usize, k: usize) -> Result<()> {
    if n_grid < 128 {
        return Err(Error::InvalidOracle(format!("n_grid must be at least 128, got {n_grid}")));
    }
    if k == 0 || k > 10 {
        return Err(Error::InvalidOracle(format!("k must lie in 1..=10, got {k}")));
    }
    Ok(())
}

/// `k` smallest eigenvalues of the `n_grid`-point operator for a coefficient set.
pub fn fd_eigenvalues_for<C: Coefficients + ?Sized>(coeffs: &C, n_grid: usize, k: usize) -> Result<Vec<f64>> {
    check_request(n_grid, k)?;
    real_parts(&fd_spectrum(&FdProblem::new(coeffs, n_grid)?, k)?)
}

pub fn fd_eigenvalues(shape: &TorusShape, mode: &FieldMode, n_grid: usize, k: usize) -> Result<Vec<f64>> {
    fd_eigenvalues_for(&assemble(shape, mode), n_grid, k)
}

/// Richardson combination of the `n_grid` and `n_grid / 2` spectra,
/// removing the leading `h^2` error. Complex values are kept.
pub fn fd_spectrum_extrapolated<C: Coefficients + ?Sized>(
    coeffs: &C,
    n_grid: usize,
    k: usize,
) -> Result<Vec<Complex<f64>>> {
    check_request(n_grid / 2, k)?;
    let fine = fd_spectrum(&FdProblem::new(coeffs, n_grid)?, k)?;
    let coarse = fd_spectrum(&FdProblem::new(coeffs, n_grid / 2)?, k)?;
    Ok(fine.iter().zip(&coarse).map(|(f, c)| (f * 4.0 - c) / 3.0).collect())
}

pub fn fd_eigenvalues_extrapolated<C: Coefficients + ?Sized>(coeffs: &C, n_grid: usize, k: usize) -> Result<Vec<f64>> {
    real_parts(&fd_spectrum_extrapolated(coeffs, n_grid, k)?)
}
