//! Continuous Galerkin time discretization on time slabs.
//!
//! On each interval I_n = (t_{n-1}, t_n] of length τ the cG(1) method
//! couples the end values (v¹, u¹) to the start values (v⁰, u⁰) through
//!
//! ```text
//! [ -τ/2 M   M     ] [v¹]   [ τ/2 M   M      ] [v⁰]   [ 0            ]
//! [  M       τ/2 A ] [u¹] = [ M      -τ/2 A  ] [u⁰] + [ τ/2 (b⁰ + b¹) ]
//! ```
//!
//! Eliminating v¹ leaves the symmetric system K u¹ = r with
//! K = M + τ²/4 A, followed by v¹ = (2/τ)(u¹ − u⁰) − v⁰.

use crate::basis::LagrangeBasis1d;
use crate::error::{Error, Result};
use crate::krylov::{conjugate_gradient, dense_solve, gmres, SolveStats};
use crate::quadrature::{gauss_legendre, gauss_lobatto};
use crate::sparse::SparseOperator;

/// Coefficients α_{κι} = ∫ ξ'_ι ζ_κ and β_{κι} = ∫ ξ_ι ζ_κ on the unit
/// interval, with trial functions ξ (degree r, Gauss–Lobatto nodes) and
/// test functions ζ (degree r−1, Gauss nodes). Rows are test functions.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeCoefficients {
    pub r: usize,
    pub alpha: Vec<Vec<f64>>,
    /// β for τ = 1; see [`TimeCoefficients::beta`].
    pub beta_unit: Vec<Vec<f64>>,
    pub trial_nodes: Vec<f64>,
    pub test_nodes: Vec<f64>,
}

impl TimeCoefficients {
    pub fn new(r: usize) -> Result<Self> {
        if r == 0 {
            return Err(Error::Degree { degree: 0, min: 1 });
        }
        let trial_nodes = gauss_lobatto(r + 1)?.points;
        let test_nodes = if r == 1 { vec![0.5] } else { gauss_legendre(r)?.points };
        let trial = LagrangeBasis1d::new(trial_nodes.clone());
        let test = LagrangeBasis1d::new(test_nodes.clone());
        let rule = gauss_legendre(r + 1)?;
        let mut alpha = vec![vec![0.0; r + 1]; r];
        let mut beta_unit = vec![vec![0.0; r + 1]; r];
        for (mu, &t) in rule.points.iter().enumerate() {
            let w = rule.weights[mu];
            for k in 0..r {
                let z = test.value(k, t);
                for i in 0..=r {
                    alpha[k][i] += w * trial.derivative(i, t) * z;
                    beta_unit[k][i] += w * trial.value(i, t) * z;
                }
            }
        }
        Ok(Self {
            r,
            alpha,
            beta_unit,
            trial_nodes,
            test_nodes,
        })
    }

    pub fn beta(&self, tau: f64) -> Vec<Vec<f64>> {
        self.beta_unit
            .iter()
            .map(|row| row.iter().map(|b| tau * b).collect())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverMethod {
    ConjugateGradient,
    Gmres,
    DenseDirect,
}

impl SolverMethod {
    pub fn name(self) -> &'static str {
        match self {
            SolverMethod::ConjugateGradient => "cg",
            SolverMethod::Gmres => "gmres",
            SolverMethod::DenseDirect => "dense",
        }
    }
}

/// Which of the two algebraically equivalent slab systems is solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemForm {
    Condensed,
    Block,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub method: SolverMethod,
    pub form: SystemForm,
    pub rel_tolerance: f64,
    pub max_iterations: usize,
    pub gmres_restart: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            method: SolverMethod::ConjugateGradient,
            form: SystemForm::Condensed,
            rel_tolerance: 1e-10,
            max_iterations: 100_000,
            gmres_restart: 200,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tolerance > 0.0 && self.rel_tolerance < 1.0) {
            return Err(Error::SolverConfig(format!("tolerance {} outside (0, 1)", self.rel_tolerance)));
        }
        if self.max_iterations == 0 {
            return Err(Error::SolverConfig("max_iterations must be at least 1".into()));
        }
        if self.method == SolverMethod::ConjugateGradient && self.form == SystemForm::Block {
            return Err(Error::SolverConfig("conjugate gradients need the symmetric condensed system".into()));
        }
        Ok(())
    }

    pub fn dense_block() -> Self {
        Self {
            method: SolverMethod::DenseDirect,
            form: SystemForm::Block,
            ..Self::default()
        }
    }
}

/// One interval: operators, step size and the load at both endpoints.
#[derive(Debug, Clone)]
pub struct TimeSlabSystem<'a> {
    pub mass: &'a SparseOperator,
    pub stiffness: &'a SparseOperator,
    pub tau: f64,
    pub b0: Vec<f64>,
    pub b1: Vec<f64>,
}

impl<'a> TimeSlabSystem<'a> {
    pub fn new(mass: &'a SparseOperator, stiffness: &'a SparseOperator, tau: f64, b0: Vec<f64>, b1: Vec<f64>) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::TimeStep(tau));
        }
        let n = mass.nrows();
        if !mass.is_square() || stiffness.nrows() != n || stiffness.ncols() != n || b0.len() != n || b1.len() != n {
            return Err(Error::Dimension(format!(
                "slab system: M {}x{}, A {}x{}, b0 {}, b1 {}",
                mass.nrows(),
                mass.ncols(),
                stiffness.nrows(),
                stiffness.ncols(),
                b0.len(),
                b1.len()
            )));
        }
        Ok(Self { mass, stiffness, tau, b0, b1 })
    }

    /// Homogeneous slab (b⁰ = b¹ = 0).
    pub fn unforced(mass: &'a SparseOperator, stiffness: &'a SparseOperator, tau: f64) -> Result<Self> {
        let n = mass.nrows();
        Self::new(mass, stiffness, tau, vec![0.0; n], vec![0.0; n])
    }

    pub fn n_dofs(&self) -> usize {
        self.mass.nrows()
    }

    fn check_state(&self, u0: &[f64], v0: &[f64]) -> Result<()> {
        if u0.len() != self.n_dofs() || v0.len() != self.n_dofs() {
            return Err(Error::Dimension(format!(
                "initial state sizes {} / {}, expected {}",
                u0.len(),
                v0.len(),
                self.n_dofs()
            )));
        }
        Ok(())
    }

    /// Block matrix L in unknown order (v¹, u¹).
    pub fn block_matrix(&self) -> Result<SparseOperator> {
        build_block_matrix(self.mass, self.stiffness, self.tau)
    }

    /// Right-hand side of the block system.
    pub fn block_rhs(&self, u0: &[f64], v0: &[f64]) -> Result<Vec<f64>> {
        self.check_state(u0, v0)?;
        let n = self.n_dofs();
        let h = 0.5 * self.tau;
        let mv = self.mass.mul_vec(v0);
        let mu = self.mass.mul_vec(u0);
        let au = self.stiffness.mul_vec(u0);
        let mut rhs = vec![0.0; 2 * n];
        for i in 0..n {
            rhs[i] = h * mv[i] + mu[i];
            rhs[n + i] = mv[i] - h * au[i] + h * (self.b0[i] + self.b1[i]);
        }
        Ok(rhs)
    }

    /// K = M + τ²/4 A.
    pub fn condensed_matrix(&self) -> Result<SparseOperator> {
        condensed_matrix(self.mass, self.stiffness, self.tau)
    }

    /// r = τ²/4 (b⁰ + b¹) + (M − τ²/4 A) u⁰ + τ M v⁰.
    pub fn condensed_rhs(&self, u0: &[f64], v0: &[f64]) -> Result<Vec<f64>> {
        self.check_state(u0, v0)?;
        let q = 0.25 * self.tau * self.tau;
        let mu = self.mass.mul_vec(u0);
        let au = self.stiffness.mul_vec(u0);
        let mv = self.mass.mul_vec(v0);
        Ok((0..self.n_dofs())
            .map(|i| q * (self.b0[i] + self.b1[i]) + (mu[i] - q * au[i]) + self.tau * mv[i])
            .collect())
    }

    pub fn build_condensed(&self, u0: &[f64], v0: &[f64]) -> Result<(SparseOperator, Vec<f64>)> {
        Ok((self.condensed_matrix()?, self.condensed_rhs(u0, v0)?))
    }

    /// Advances (u⁰, v⁰) across the slab.
    pub fn step(&self, u0: &[f64], v0: &[f64], solver: &SolverConfig) -> Result<StepResult> {
        solver.validate()?;
        self.check_state(u0, v0)?;
        let n = self.n_dofs();
        match solver.form {
            SystemForm::Condensed => {
                let (k, rhs) = self.build_condensed(u0, v0)?;
                let (u1, stats) = solve(&k, &rhs, u0, solver)?;
                let v1 = postprocess_velocity(&u1, u0, v0, self.tau)?;
                Ok(StepResult { u: u1, v: v1, stats })
            }
            SystemForm::Block => {
                let l = self.block_matrix()?;
                let rhs = self.block_rhs(u0, v0)?;
                let guess: Vec<f64> = v0.iter().chain(u0).copied().collect();
                let (x, stats) = solve(&l, &rhs, &guess, solver)?;
                Ok(StepResult {
                    v: x[..n].to_vec(),
                    u: x[n..].to_vec(),
                    stats,
                })
            }
        }
    }
}

fn solve(matrix: &SparseOperator, rhs: &[f64], guess: &[f64], solver: &SolverConfig) -> Result<(Vec<f64>, SolveStats)> {
    match solver.method {
        SolverMethod::ConjugateGradient => {
            let mut x = guess.to_vec();
            let stats = conjugate_gradient(|v, y| matrix.matvec(v, y), rhs, &mut x, solver.rel_tolerance, solver.max_iterations)?;
            Ok((x, stats))
        }
        SolverMethod::Gmres => {
            let mut x = guess.to_vec();
            let stats = gmres(
                |v, y| matrix.matvec(v, y),
                rhs,
                &mut x,
                solver.rel_tolerance,
                solver.gmres_restart,
                solver.max_iterations,
            )?;
            Ok((x, stats))
        }
        SolverMethod::DenseDirect => {
            let x = dense_solve(matrix, rhs)?;
            let r = matrix.mul_vec(&x);
            let bnorm = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
            let res = r.iter().zip(rhs).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            let rel = if bnorm > 0.0 { res / bnorm } else { res };
            Ok((
                x,
                SolveStats {
                    method: "dense",
                    iterations: 1,
                    relative_residual: rel,
                    history: vec![rel],
                },
            ))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub stats: SolveStats,
}

/// L = [[−τ/2 M, M], [M, τ/2 A]].
pub fn build_block_matrix(mass: &SparseOperator, stiffness: &SparseOperator, tau: f64) -> Result<SparseOperator> {
    if !(tau >= 0.0) {
        return Err(Error::TimeStep(tau));
    }
    SparseOperator::block2x2(&mass.scale(-0.5 * tau), mass, mass, &stiffness.scale(0.5 * tau))
}

/// K = M + τ²/4 A.
pub fn condensed_matrix(mass: &SparseOperator, stiffness: &SparseOperator, tau: f64) -> Result<SparseOperator> {
    if !(tau >= 0.0) {
        return Err(Error::TimeStep(tau));
    }
    SparseOperator::linear_combination(1.0, mass, 0.25 * tau * tau, stiffness)
}

/// v¹ = (2/τ)(u¹ − u⁰) − v⁰.
pub fn postprocess_velocity(u1: &[f64], u0: &[f64], v0: &[f64], tau: f64) -> Result<Vec<f64>> {
    if !(tau > 0.0) {
        return Err(Error::TimeStep(tau));
    }
    if u1.len() != u0.len() || v0.len() != u0.len() {
        return Err(Error::Dimension("velocity postprocess: vector sizes differ".into()));
    }
    let s = 2.0 / tau;
    Ok((0..u0.len()).map(|i| s * (u1[i] - u0[i]) - v0[i]).collect())
}

/// E = ½ (vᵀ M v + uᵀ A u).
pub fn energy(mass: &SparseOperator, stiffness: &SparseOperator, u: &[f64], v: &[f64]) -> f64 {
    let mv = mass.mul_vec(v);
    let au = stiffness.mul_vec(u);
    let vmv: f64 = v.iter().zip(&mv).map(|(a, b)| a * b).sum();
    let uau: f64 = u.iter().zip(&au).map(|(a, b)| a * b).sum();
    0.5 * (vmv + uau)
}

/// `n` equal intervals of [0, T].
pub fn uniform_grid(end_time: f64, n: usize) -> Result<Vec<f64>> {
    if n == 0 || !(end_time > 0.0) {
        return Err(Error::TimeGrid);
    }
    Ok((0..=n).map(|k| end_time * k as f64 / n as f64).collect())
}

/// Uniform grid of [0, T] with step `tau`; `T / tau` must be an integer.
pub fn uniform_grid_with_step(end_time: f64, tau: f64) -> Result<Vec<f64>> {
    if !(tau > 0.0) {
        return Err(Error::TimeStep(tau));
    }
    let n = (end_time / tau).round();
    if n < 1.0 || ((n * tau - end_time).abs() > 1e-9 * end_time) {
        return Err(Error::TimeGrid);
    }
    uniform_grid(end_time, n as usize)
}

/// Solution values at every grid point plus per-interval solver telemetry.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub u: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub stats: Vec<SolveStats>,
}

impl Trajectory {
    pub fn final_state(&self) -> (&[f64], &[f64]) {
        (self.u.last().unwrap(), self.v.last().unwrap())
    }
}

/// Time loop over `grid` starting from (u⁰, v⁰); `load(t)` assembles b(t).
pub fn run(
    mass: &SparseOperator,
    stiffness: &SparseOperator,
    grid: &[f64],
    u0: Vec<f64>,
    v0: Vec<f64>,
    mut load: impl FnMut(f64) -> Result<Vec<f64>>,
    solver: &SolverConfig,
) -> Result<Trajectory> {
    if grid.len() < 2 || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::TimeGrid);
    }
    solver.validate()?;
    let mut traj = Trajectory {
        times: grid.to_vec(),
        u: vec![u0],
        v: vec![v0],
        stats: Vec::with_capacity(grid.len() - 1),
    };
    let mut b0 = load(grid[0])?;
    for (n, w) in grid.windows(2).enumerate() {
        let b1 = load(w[1])?;
        let slab = TimeSlabSystem::new(mass, stiffness, w[1] - w[0], b0, b1)?;
        let step = slab
            .step(&traj.u[n], &traj.v[n], solver)
            .map_err(|e| Error::Interval { interval: n + 1, source: Box::new(e) })?;
        b0 = slab.b1;
        traj.u.push(step.u);
        traj.v.push(step.v);
        traj.stats.push(step.stats);
    }
    Ok(traj)
}
