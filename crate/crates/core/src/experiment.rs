//! Experiment drivers: time-convergence studies, condition-number sweeps,
//! spectrum and cluster studies and field dumps, with their CSV formats.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};

use crate::discretization::{Scheme, SpatialDiscretization};
use crate::elasticity::IsotropicMaterial;
use crate::error::{Error, Result};
use crate::krylov::conjugate_gradient;
use crate::mesh::build_unit_square_mesh;
use crate::problem::{ElasticProblem, ManufacturedWave};
use crate::quadrature::{gauss_legendre, TensorRule};
use crate::spectral::{
    analyze_spectrum, condition_number_general, condition_number_spd, ConditionMethod, SpectrumReport, DENSE_CAP,
};
use crate::timeslab::{condensed_matrix, run, uniform_grid_with_step, SolverConfig, SolverMethod, SystemForm, Trajectory};
use crate::Vec2;

/// Experiment parameters. Every field can be set from a `key = value` line
/// (see [`ExperimentConfig::set`]).
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub schemes: Vec<Scheme>,
    pub degree: usize,
    pub n: usize,
    pub gamma0: Vec<f64>,
    /// Explicit step sizes; when absent each study uses its own default.
    pub taus: Option<Vec<f64>>,
    pub tau_max: Option<f64>,
    pub halvings: Option<usize>,
    pub end_time: f64,
    pub youngs_modulus: f64,
    pub poisson_ratio: f64,
    pub density: f64,
    pub solver: SolverConfig,
    pub cluster_gap: f64,
    /// `None` picks dense up to [`DENSE_CAP`] unknowns, Lanczos above.
    pub condition_method: Option<ConditionMethod>,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            schemes: vec![Scheme::Sipg],
            degree: 2,
            n: 10,
            gamma0: vec![1e6],
            taus: None,
            tau_max: None,
            halvings: None,
            end_time: 1.0,
            youngs_modulus: 70.0,
            poisson_ratio: 0.34,
            density: 2.8,
            // The Dirichlet lifting dominates ‖b‖ for large γ₀, so a looser
            // relative residual leaves errors above the discretization error.
            solver: SolverConfig {
                rel_tolerance: 1e-13,
                ..SolverConfig::default()
            },
            cluster_gap: 0.02,
            condition_method: None,
            out_dir: PathBuf::from("results"),
        }
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::Config(format!("{key}: '{value}' is not a number")))
}

fn parse_usize(key: &str, value: &str) -> Result<usize> {
    value
        .trim()
        .parse::<usize>()
        .map_err(|_| Error::Config(format!("{key}: '{value}' is not a non-negative integer")))
}

fn parse_list<T>(value: &str, f: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    let items: Vec<T> = value.split(',').filter(|s| !s.trim().is_empty()).map(|s| f(s.trim())).collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(Error::Config(format!("empty list '{value}'")));
    }
    Ok(items)
}

fn join<T>(items: &[T], f: impl Fn(&T) -> String) -> String {
    items.iter().map(f).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    /// Keys accepted by [`ExperimentConfig::set`].
    pub const KEYS: [&'static str; 19] = [
        "scheme",
        "p",
        "n",
        "gamma0",
        "tau",
        "tau_max",
        "halvings",
        "T",
        "E",
        "nu",
        "rho",
        "solver",
        "form",
        "tol",
        "max_iter",
        "restart",
        "gap",
        "cond_method",
        "out",
    ];

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim() {
            "scheme" | "schemes" => self.schemes = parse_list(value, |s| s.parse())?,
            "p" | "degree" => self.degree = parse_usize(key, value)?,
            "n" => self.n = parse_usize(key, value)?,
            "gamma0" => self.gamma0 = parse_list(value, |s| parse_f64(key, s))?,
            "tau" | "taus" => self.taus = Some(parse_list(value, |s| parse_f64(key, s))?),
            "tau_max" => self.tau_max = Some(parse_f64(key, value)?),
            "halvings" => self.halvings = Some(parse_usize(key, value)?),
            "T" | "end_time" => self.end_time = parse_f64(key, value)?,
            "E" => self.youngs_modulus = parse_f64(key, value)?,
            "nu" => self.poisson_ratio = parse_f64(key, value)?,
            "rho" => self.density = parse_f64(key, value)?,
            "solver" => {
                self.solver.method = match value.to_ascii_lowercase().as_str() {
                    "cg" => SolverMethod::ConjugateGradient,
                    "gmres" => SolverMethod::Gmres,
                    "dense" => SolverMethod::DenseDirect,
                    other => return Err(Error::Config(format!("solver: unknown method '{other}'"))),
                }
            }
            "form" => {
                self.solver.form = match value.to_ascii_lowercase().as_str() {
                    "condensed" => SystemForm::Condensed,
                    "block" => SystemForm::Block,
                    other => return Err(Error::Config(format!("form: unknown system form '{other}'"))),
                }
            }
            "tol" => self.solver.rel_tolerance = parse_f64(key, value)?,
            "max_iter" => self.solver.max_iterations = parse_usize(key, value)?,
            "restart" => self.solver.gmres_restart = parse_usize(key, value)?,
            "gap" => self.cluster_gap = parse_f64(key, value)?,
            "cond_method" => {
                self.condition_method = match value.to_ascii_lowercase().as_str() {
                    "auto" => None,
                    "dense" => Some(ConditionMethod::Dense),
                    "lanczos" => Some(ConditionMethod::Lanczos),
                    other => return Err(Error::Config(format!("cond_method: unknown method '{other}'"))),
                }
            }
            "out" => self.out_dir = PathBuf::from(value),
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (number, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value'", number + 1)))?;
            self.set(key, value)
                .map_err(|e| Error::Config(format!("line {}: {e}", number + 1)))?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut c = Self::default();
        c.apply_text(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("n must be at least 1".into()));
        }
        if self.degree == 0 {
            return Err(Error::Config("p must be at least 1".into()));
        }
        if self.gamma0.iter().any(|g| !(*g > 0.0)) {
            return Err(Error::Config("gamma0 must be positive".into()));
        }
        if !(self.end_time > 0.0) {
            return Err(Error::Config("T must be positive".into()));
        }
        if let Some(t) = &self.taus {
            if t.iter().any(|t| !(*t > 0.0)) {
                return Err(Error::Config("time steps must be positive".into()));
            }
        }
        if !(self.cluster_gap > 0.0 && self.cluster_gap < 1.0) {
            return Err(Error::Config("gap must lie in (0, 1)".into()));
        }
        self.material()?;
        self.solver.validate()?;
        Ok(())
    }

    pub fn material(&self) -> Result<IsotropicMaterial> {
        IsotropicMaterial::new(self.youngs_modulus, self.poisson_ratio, self.density)
    }

    /// (scheme, γ₀) pairs; FEM contributes a single series.
    pub fn series(&self) -> Vec<(Scheme, f64)> {
        let mut out = Vec::new();
        for &s in &self.schemes {
            if s == Scheme::Fem {
                out.push((s, f64::NAN));
            } else {
                out.extend(self.gamma0.iter().map(|&g| (s, g)));
            }
        }
        out
    }

    fn halving_taus(&self, tau_max: f64, halvings: usize) -> Vec<f64> {
        let tau_max = self.tau_max.unwrap_or(tau_max);
        let halvings = self.halvings.unwrap_or(halvings);
        (0..=halvings).map(|k| tau_max / 2f64.powi(k as i32)).collect()
    }

    /// Default 1e−1 halved four times, down to 6.25e−3.
    pub fn convergence_taus(&self) -> Vec<f64> {
        self.taus.clone().unwrap_or_else(|| self.halving_taus(1e-1, 4))
    }

    /// Default 1e−1 halved fifteen times, down to ≈ 3.05e−6.
    pub fn condnum_taus(&self) -> Vec<f64> {
        self.taus.clone().unwrap_or_else(|| self.halving_taus(1e-1, 15))
    }

    /// Default decades 1e−1 … 1e−6.
    pub fn spectrum_taus(&self) -> Vec<f64> {
        self.taus.clone().unwrap_or_else(|| (1..=6).map(|k| 10f64.powi(-k)).collect())
    }

    /// Default 1.25e−2.
    pub fn field_tau(&self) -> f64 {
        self.taus.as_ref().map(|t| t[0]).unwrap_or(1.25e-2)
    }

    pub fn discretization(&self, scheme: Scheme, gamma0: f64) -> Result<SpatialDiscretization> {
        let mesh = build_unit_square_mesh(self.n, true)?;
        SpatialDiscretization::new(mesh, self.degree, self.material()?, scheme, gamma0)
    }

    /// The resolved configuration as `key = value` lines.
    pub fn resolved(&self) -> String {
        let mut s = String::new();
        let method = match self.solver.method {
            SolverMethod::ConjugateGradient => "cg",
            SolverMethod::Gmres => "gmres",
            SolverMethod::DenseDirect => "dense",
        };
        let form = match self.solver.form {
            SystemForm::Condensed => "condensed",
            SystemForm::Block => "block",
        };
        let _ = writeln!(s, "scheme = {}", join(&self.schemes, |x| x.name().to_string()));
        let _ = writeln!(s, "p = {}", self.degree);
        let _ = writeln!(s, "n = {}", self.n);
        let _ = writeln!(s, "gamma0 = {}", join(&self.gamma0, |g| format!("{g:e}")));
        if let Some(t) = &self.taus {
            let _ = writeln!(s, "tau = {}", join(t, |g| format!("{g:e}")));
        }
        if let Some(t) = self.tau_max {
            let _ = writeln!(s, "tau_max = {t:e}");
        }
        if let Some(h) = self.halvings {
            let _ = writeln!(s, "halvings = {h}");
        }
        let _ = writeln!(s, "T = {}", self.end_time);
        let _ = writeln!(s, "E = {}", self.youngs_modulus);
        let _ = writeln!(s, "nu = {}", self.poisson_ratio);
        let _ = writeln!(s, "rho = {}", self.density);
        let _ = writeln!(s, "solver = {method}");
        let _ = writeln!(s, "form = {form}");
        let _ = writeln!(s, "tol = {:e}", self.solver.rel_tolerance);
        let _ = writeln!(s, "max_iter = {}", self.solver.max_iterations);
        let _ = writeln!(s, "restart = {}", self.solver.gmres_restart);
        let _ = writeln!(s, "gap = {}", self.cluster_gap);
        let _ = writeln!(s, "cond_method = {}", self.condition_method.map_or("auto", |m| m.name()));
        let _ = writeln!(s, "out = {}", self.out_dir.display());
        s
    }
}

/// Formats a number with 17 significant digits.
pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

fn fmt_opt(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        fmt_num(x)
    }
}

/// Runs the time loop for `problem` on a uniform grid with step `tau`.
pub fn simulate<P: ElasticProblem + ?Sized>(
    disc: &SpatialDiscretization,
    problem: &P,
    end_time: f64,
    tau: f64,
    solver: &SolverConfig,
) -> Result<Trajectory> {
    let grid = uniform_grid_with_step(end_time, tau)?;
    let (u0, v0) = disc.initial_state(problem);
    run(&disc.mass, &disc.stiffness, &grid, u0, v0, |t| disc.load(problem, t), solver)
}

/// Cell-wise displacement coefficients at every grid point, with the
/// Dirichlet values of `problem` filled in for FEM.
pub fn cellwise_displacements<P: ElasticProblem + ?Sized>(disc: &SpatialDiscretization, problem: &P, traj: &Trajectory) -> Vec<Vec<f64>> {
    traj.times
        .iter()
        .zip(&traj.u)
        .map(|(&t, u)| disc.cellwise(u, |x| problem.dirichlet(t, x)))
        .collect()
}

/// ‖u^E − u_τh‖ in L²(0, T; L²(Ω)). `states` are cell-wise coefficient
/// vectors at `times`; the discrete solution is linear in time between them.
pub fn l2l2_error(disc: &SpatialDiscretization, times: &[f64], states: &[Vec<f64>], exact: impl Fn(f64, Vec2) -> Vec2) -> Result<f64> {
    if times.len() < 2 || states.len() != times.len() {
        return Err(Error::Dimension(format!("{} time points, {} states", times.len(), states.len())));
    }
    if states.iter().any(|s| s.len() != disc.layout.n_dofs()) {
        return Err(Error::Dimension("state vector size does not match the cell layout".into()));
    }
    let time_rule = gauss_legendre(3)?;
    let space_rule = TensorRule::gauss(disc.degree + 2)?;
    let basis = disc.basis();
    let ns = basis.n_shapes();
    let shape_values: Vec<Vec<f64>> = space_rule.points.iter().map(|&xi| basis.values_at(xi)).collect();
    let mut total = 0.0;
    for n in 1..times.len() {
        let (t0, t1) = (times[n - 1], times[n]);
        let tau = t1 - t0;
        if !(tau > 0.0) {
            return Err(Error::TimeGrid);
        }
        for (&s, &wt) in time_rule.points.iter().zip(&time_rule.weights) {
            let t = t0 + s * tau;
            let mut slab = 0.0;
            for cell in disc.mesh.cells() {
                let base = disc.layout.cell_dofs(cell.index).start;
                for (q, &xi) in space_rule.points.iter().enumerate() {
                    let mut uh = Vec2::zeros();
                    for c in 0..2 {
                        for k in 0..ns {
                            let i = base + c * ns + k;
                            let coeff = (1.0 - s) * states[n - 1][i] + s * states[n][i];
                            uh[c] += coeff * shape_values[q][k];
                        }
                    }
                    let e = exact(t, cell.map_to_physical(xi)) - uh;
                    slab += space_rule.weights[q] * cell.measure() * e.norm_squared();
                }
            }
            total += wt * tau * slab;
        }
    }
    Ok(total.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub tau: f64,
    pub error: f64,
    /// log₂(e(2τ)/e(τ)) against the previous row; `None` on the first row.
    pub eoc: Option<f64>,
}

/// Experimental orders between consecutive rows of a halving sequence.
pub fn fill_eoc(rows: &mut [ConvergenceRow]) {
    for i in 0..rows.len() {
        rows[i].eoc = (i > 0).then(|| (rows[i - 1].error / rows[i].error).ln() / (rows[i - 1].tau / rows[i].tau).ln());
    }
}

/// Manufactured-solution convergence study for one scheme. `on_run` sees
/// every finished trajectory (for dumps and telemetry).
pub fn run_convergence(
    config: &ExperimentConfig,
    scheme: Scheme,
    gamma0: f64,
    taus: &[f64],
    mut on_run: impl FnMut(f64, &SpatialDiscretization, &Trajectory) -> Result<()>,
) -> Result<Vec<ConvergenceRow>> {
    let disc = config.discretization(scheme, gamma0)?;
    let wave = ManufacturedWave::new(disc.material);
    let mut rows = Vec::with_capacity(taus.len());
    for &tau in taus {
        let traj = simulate(&disc, &wave, config.end_time, tau, &config.solver)?;
        let states = cellwise_displacements(&disc, &wave, &traj);
        let error = l2l2_error(&disc, &traj.times, &states, |t, x| wave.displacement(t, x))?;
        on_run(tau, &disc, &traj)?;
        rows.push(ConvergenceRow { tau, error, eoc: None });
    }
    fill_eoc(&mut rows);
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CondnumRow {
    pub tau: f64,
    pub gamma0: f64,
    pub scheme: Scheme,
    /// NaN when the point failed (e.g. indefinite K).
    pub kappa: f64,
    pub method: String,
    /// Unpreconditioned CG iterations for a reference solve with K.
    pub iterations: Option<usize>,
    pub failure: Option<String>,
}

fn pick_method(config: &ExperimentConfig, n: usize) -> ConditionMethod {
    config
        .condition_method
        .unwrap_or(if n <= DENSE_CAP { ConditionMethod::Dense } else { ConditionMethod::Lanczos })
}

/// CG iterations to solve K x = b for a fixed pseudo-random b.
pub fn reference_cg_iterations(k: &crate::sparse::SparseOperator, solver: &SolverConfig) -> Option<usize> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
    let b: Vec<f64> = (0..k.nrows()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut x = vec![0.0; b.len()];
    conjugate_gradient(|v, y| k.matvec(v, y), &b, &mut x, solver.rel_tolerance, solver.max_iterations)
        .ok()
        .map(|s| s.iterations)
}

/// κ(K(τ)) for every τ; failures are recorded per point.
pub fn run_condnum_sweep(config: &ExperimentConfig, scheme: Scheme, gamma0: f64, taus: &[f64]) -> Result<Vec<CondnumRow>> {
    let disc = config.discretization(scheme, gamma0)?;
    let method = pick_method(config, disc.n_dofs());
    let mut rows = Vec::with_capacity(taus.len());
    for &tau in taus {
        let k = condensed_matrix(&disc.mass, &disc.stiffness, tau)?;
        let outcome = if scheme.is_symmetric() {
            condition_number_spd(&k, method).map(|e| (e.kappa, method.name().to_string()))
        } else {
            condition_number_general(&k).map(|c| (c, "svd".to_string()))
        };
        let iterations = if scheme.is_symmetric() { reference_cg_iterations(&k, &config.solver) } else { None };
        rows.push(match outcome {
            Ok((kappa, m)) => CondnumRow { tau, gamma0, scheme, kappa, method: m, iterations, failure: None },
            Err(e) => CondnumRow {
                tau,
                gamma0,
                scheme,
                kappa: f64::NAN,
                method: "failed".into(),
                iterations,
                failure: Some(e.to_string()),
            },
        });
    }
    Ok(rows)
}

/// Full spectra, normalization and clusters of K(τ) for every τ.
pub fn run_spectrum_study(config: &ExperimentConfig, scheme: Scheme, gamma0: f64, taus: &[f64]) -> Result<Vec<SpectrumReport>> {
    let disc = config.discretization(scheme, gamma0)?;
    if disc.n_dofs() > DENSE_CAP {
        return Err(Error::SizeCap { size: disc.n_dofs(), cap: DENSE_CAP });
    }
    taus.iter()
        .map(|&tau| {
            let k = condensed_matrix(&disc.mass, &disc.stiffness, tau)?;
            let (eigenvalues, normalized, clusters, condition_number) = analyze_spectrum(&k, config.cluster_gap)?;
            Ok(SpectrumReport {
                label: format!("K({})", scheme.name()),
                tau,
                gamma0: disc.penalty().map(|p| p.gamma0),
                consistency: disc.penalty().map(|p| p.consistency() as i32),
                degree: config.degree,
                n: config.n,
                eigenvalues,
                normalized,
                clusters,
                condition_number,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldRow {
    pub cell: usize,
    pub x: Vec2,
    pub u: Vec2,
    pub v: Vec2,
}

/// Displacement and velocity at every cell node at t = T.
pub fn run_field_dump(config: &ExperimentConfig, scheme: Scheme, gamma0: f64, tau: f64) -> Result<(Vec<FieldRow>, SpatialDiscretization, Trajectory)> {
    let disc = config.discretization(scheme, gamma0)?;
    let wave = ManufacturedWave::new(disc.material);
    let traj = simulate(&disc, &wave, config.end_time, tau, &config.solver)?;
    let t = *traj.times.last().unwrap();
    let (u, v) = traj.final_state();
    let uc = disc.cellwise(u, |x| wave.dirichlet(t, x));
    let vc = disc.cellwise(v, |x| wave.dirichlet_velocity(t, x));
    let mut rows = Vec::new();
    for cell in disc.mesh.cells() {
        for k in 0..disc.basis().n_shapes() {
            let xi = disc.basis().node(k);
            rows.push(FieldRow {
                cell: cell.index,
                x: cell.map_to_physical(xi),
                u: disc.evaluate(&uc, cell.index, xi),
                v: disc.evaluate(&vc, cell.index, xi),
            });
        }
    }
    Ok((rows, disc, traj))
}

pub fn write_convergence_csv<W: Write>(mut w: W, series: &[(Scheme, f64, Vec<ConvergenceRow>)]) -> Result<()> {
    writeln!(w, "tau,error,eoc,scheme,gamma0")?;
    for (scheme, gamma0, rows) in series {
        for r in rows {
            writeln!(
                w,
                "{},{},{},{},{}",
                fmt_num(r.tau),
                fmt_num(r.error),
                r.eoc.map(fmt_num).unwrap_or_default(),
                scheme.name(),
                fmt_opt(*gamma0)
            )?;
        }
    }
    Ok(())
}

pub fn write_condnum_csv<W: Write>(mut w: W, rows: &[CondnumRow]) -> Result<()> {
    writeln!(w, "tau,gamma0,scheme,kappa,method,iterations")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            fmt_num(r.tau),
            fmt_opt(r.gamma0),
            r.scheme.name(),
            fmt_num(r.kappa),
            r.method,
            r.iterations.map(|i| i.to_string()).unwrap_or_default()
        )?;
    }
    Ok(())
}

pub fn write_spectrum_csv<W: Write>(mut w: W, reports: &[(Scheme, SpectrumReport)]) -> Result<()> {
    writeln!(w, "tau,gamma0,scheme,eigenvalue,normalized,cluster_id")?;
    for (scheme, r) in reports {
        let g = r.gamma0.map(fmt_num).unwrap_or_default();
        for ((lambda, x), id) in r.eigenvalues.iter().zip(&r.normalized).zip(r.cluster_ids()) {
            writeln!(w, "{},{},{},{},{},{}", fmt_num(r.tau), g, scheme.name(), fmt_num(*lambda), fmt_num(*x), id)?;
        }
    }
    Ok(())
}

pub fn write_field_csv<W: Write>(mut w: W, rows: &[FieldRow]) -> Result<()> {
    writeln!(w, "cell,x,y,u1,u2,v1,v2,u_mag,v_mag")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            r.cell,
            fmt_num(r.x.x),
            fmt_num(r.x.y),
            fmt_num(r.u.x),
            fmt_num(r.u.y),
            fmt_num(r.v.x),
            fmt_num(r.v.y),
            fmt_num(r.u.norm()),
            fmt_num(r.v.norm())
        )?;
    }
    Ok(())
}

/// One row per (time, unknown): `t,dof,u,v`.
pub fn write_trajectory_csv<W: Write>(mut w: W, traj: &Trajectory) -> Result<()> {
    writeln!(w, "t,dof,u,v")?;
    for ((t, u), v) in traj.times.iter().zip(&traj.u).zip(&traj.v) {
        for (i, (a, b)) in u.iter().zip(v).enumerate() {
            writeln!(w, "{},{},{},{}", fmt_num(*t), i, fmt_num(*a), fmt_num(*b))?;
        }
    }
    Ok(())
}

/// One row per interval: `interval,t,method,iterations,residual`.
pub fn write_telemetry_csv<W: Write>(mut w: W, traj: &Trajectory) -> Result<()> {
    writeln!(w, "interval,t,method,iterations,residual")?;
    for (i, s) in traj.stats.iter().enumerate() {
        writeln!(w, "{},{},{},{},{}", i + 1, fmt_num(traj.times[i + 1]), s.method, s.iterations, fmt_num(s.relative_residual))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_parsing() {
        let c = ExperimentConfig::from_text(
            "# desk run\nscheme = SIPG, FEM\nn = 4 # small\ngamma0 = 1e6,1e3\ntau = 0.1,0.05\nsolver = dense\nform = block\n",
        )
        .unwrap();
        assert_eq!(c.schemes, vec![Scheme::Sipg, Scheme::Fem]);
        assert_eq!(c.n, 4);
        assert_eq!(c.gamma0, vec![1e6, 1e3]);
        assert_eq!(c.convergence_taus(), vec![0.1, 0.05]);
        assert_eq!(c.series().len(), 3);
        assert_eq!(c.solver.form, SystemForm::Block);
        assert!(ExperimentConfig::from_text("bogus = 1").is_err());
        assert!(ExperimentConfig::from_text("n = -1").is_err());
        assert!(ExperimentConfig::from_text("n").is_err());
        assert!(ExperimentConfig::from_text("form = block").is_err());
        assert!(ExperimentConfig::from_text("gamma0 = 0").is_err());
    }

    #[test]
    fn resolved_config_roundtrips() {
        let mut c = ExperimentConfig::default();
        c.set("scheme", "NIPG,FEM").unwrap();
        c.set("tau", "0.125").unwrap();
        c.set("cond_method", "lanczos").unwrap();
        let again = ExperimentConfig::from_text(&c.resolved()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn default_tau_sequences() {
        let c = ExperimentConfig::default();
        let t = c.convergence_taus();
        assert_eq!(t.len(), 5);
        assert_eq!(*t.last().unwrap(), 6.25e-3);
        let t = c.condnum_taus();
        assert!((t.last().unwrap() - 3.0517578125e-6).abs() < 1e-18);
        assert_eq!(c.spectrum_taus().len(), 6);
        assert_eq!(c.field_tau(), 1.25e-2);
    }

    #[test]
    fn number_format() {
        assert_eq!(fmt_num(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_num(f64::NAN), "NaN");
        assert_eq!(fmt_opt(f64::NAN), "");
    }

    #[test]
    fn eoc_of_quadratic_sequence() {
        let mut rows: Vec<ConvergenceRow> = [0.1, 0.05, 0.025]
            .iter()
            .map(|&tau| ConvergenceRow { tau, error: 3.0 * tau * tau, eoc: None })
            .collect();
        fill_eoc(&mut rows);
        assert!(rows[0].eoc.is_none());
        assert!((rows[2].eoc.unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn error_of_constant_offset() {
        let c = ExperimentConfig { n: 2, degree: 1, ..Default::default() };
        let disc = c.discretization(Scheme::Sipg, 10.0).unwrap();
        let times = vec![0.0, 0.5, 1.0];
        let zero = vec![0.0; disc.layout.n_dofs()];
        let states = vec![zero.clone(), zero.clone(), zero];
        let e = l2l2_error(&disc, &times, &states, |_, _| Vec2::new(0.3, 0.3)).unwrap();
        assert!((e - 0.3 * 2f64.sqrt()).abs() < 1e-14);
        assert!(l2l2_error(&disc, &times, &states[..2], |_, _| Vec2::zeros()).is_err());
    }
}
