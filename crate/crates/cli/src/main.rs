//! `ewave-study`: runs the elastic wave experiments and writes CSV results.
//!
//! Any configuration key can be overridden on the command line as
//! `--key=value` (for example `--n=20 --gamma0=1e6,1e3`).

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use ewave::discretization::{Scheme, SpatialDiscretization};
use ewave::experiment::{self, ExperimentConfig};
use ewave::spectral::cluster_compactness;
use ewave::timeslab::{build_block_matrix, condensed_matrix, Trajectory};

#[derive(Parser, Debug)]
#[command(name = "ewave-study", version, about = "Space-time elastic wave experiments", after_help = KEY_HELP)]
struct Cli {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `out`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Full-scale 40x40 mesh instead of the 10x10 desk mesh.
    #[arg(long, global = true)]
    full: bool,
    /// Also write the assembled matrices (Matrix Market) into this directory.
    #[arg(long, global = true, value_name = "PATH")]
    emit_matrix: Option<PathBuf>,
    /// Write every time step of every run as CSV.
    #[arg(long, global = true)]
    dump_trajectory: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Manufactured-solution error over a halving sequence of time steps.
    Convergence,
    /// Condition numbers of K(tau) over a sweep of time steps.
    Condnum,
    /// Full spectra and eigenvalue clusters of K(tau).
    Spectrum,
    /// Displacement and velocity at t = T for one run.
    Field,
    /// Assemble and export matrices only.
    Assemble,
}

const KEY_HELP: &str = "Configuration keys (file or --key=value):
  scheme      SIPG, NIPG, IIPG, FEM or a comma list        [SIPG]
  p           polynomial degree                            [2]
  n           cells per axis                               [10, 40 with --full]
  gamma0      penalty factor(s), comma list                [1e6]
  tau         explicit time steps, comma list
  tau_max     largest step of a halving sequence
  halvings    number of halvings
  T           final time                                   [1]
  E, nu, rho  material card                                [70, 0.34, 2.8]
  solver      cg, gmres or dense                           [cg]
  form        condensed or block                           [condensed]
  tol         relative solver tolerance                    [1e-13]
  max_iter    solver iteration cap                         [100000]
  restart     GMRES restart length                         [200]
  gap         cluster gap on the normalized spectrum       [0.02]
  cond_method auto, dense or lanczos                       [auto]
  out         output directory                             [results]";

/// Splits `--key=value` configuration overrides from the arguments clap
/// should see.
fn split_overrides(args: Vec<String>) -> (Vec<String>, Vec<(String, String)>) {
    let mut rest = Vec::new();
    let mut overrides = Vec::new();
    for (i, arg) in args.into_iter().enumerate() {
        if i > 0 {
            if let Some((key, value)) = arg.strip_prefix("--").and_then(|a| a.split_once('=')) {
                if ExperimentConfig::KEYS.contains(&key) || key == "degree" || key == "taus" {
                    overrides.push((key.to_string(), value.to_string()));
                    continue;
                }
            }
        }
        rest.push(arg);
    }
    (rest, overrides)
}

struct Log {
    lines: Vec<String>,
    start: Instant,
}

impl Log {
    fn new() -> Self {
        Self { lines: Vec::new(), start: Instant::now() }
    }

    fn note(&mut self, msg: impl Into<String>) {
        let msg = msg.into();
        eprintln!("{msg}");
        self.lines.push(format!("[{:>9.3}s] {msg}", self.start.elapsed().as_secs_f64()));
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("cannot create {}", path.display()))?))
}

fn series_tag(scheme: Scheme, gamma0: f64) -> String {
    if scheme == Scheme::Fem {
        scheme.name().to_string()
    } else {
        format!("{}_g{gamma0:e}", scheme.name())
    }
}

fn write_mtx(path: &Path, m: &ewave::sparse::SparseOperator) -> Result<()> {
    let mut w = create(path)?;
    m.write_matrix_market(&mut w)?;
    w.flush()?;
    Ok(())
}

fn emit_operators(dir: &Path, disc: &SpatialDiscretization, gamma0: f64, log: &mut Log) -> Result<()> {
    fs::create_dir_all(dir)?;
    let tag = series_tag(disc.scheme, gamma0);
    for (name, m) in [("mass", &disc.mass), ("stiffness", &disc.stiffness)] {
        let path = dir.join(format!("{tag}_{name}.mtx"));
        write_mtx(&path, m)?;
        log.note(format!("wrote {}", path.display()));
    }
    Ok(())
}

fn dump_run(out: &Path, tag: &str, tau: f64, traj: &Trajectory, dump_trajectory: bool, log: &mut Log) -> Result<()> {
    let telemetry = out.join(format!("solver_{tag}_tau{tau:e}.csv"));
    let mut w = create(&telemetry)?;
    experiment::write_telemetry_csv(&mut w, traj)?;
    w.flush()?;
    if dump_trajectory {
        let path = out.join(format!("trajectory_{tag}_tau{tau:e}.csv"));
        let mut w = create(&path)?;
        experiment::write_trajectory_csv(&mut w, traj)?;
        w.flush()?;
        log.note(format!("wrote {}", path.display()));
    }
    Ok(())
}

fn main() -> Result<()> {
    let (args, overrides) = split_overrides(std::env::args().collect());
    let cli = Cli::parse_from(args);

    let mut config = ExperimentConfig::default();
    if cli.full {
        config.n = 40;
    }
    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        config.apply_text(&text).with_context(|| format!("in {}", path.display()))?;
    }
    for (key, value) in &overrides {
        config.set(key, value).with_context(|| format!("--{key}={value}"))?;
    }
    if let Some(out) = &cli.out {
        config.out_dir = out.clone();
    }
    config.validate()?;

    let out = config.out_dir.clone();
    fs::create_dir_all(&out).with_context(|| format!("cannot create {}", out.display()))?;
    let mut log = Log::new();
    log.note(format!("command: {:?}", cli.command));

    let result = execute(cli.command, &cli, &config, &out, &mut log);
    if let Err(e) = &result {
        log.note(format!("error: {e:#}"));
    }
    log.note("done");

    let mut w = create(&out.join("experiment.log"))?;
    writeln!(w, "# resolved configuration")?;
    write!(w, "{}", config.resolved())?;
    writeln!(w, "# log")?;
    for line in &log.lines {
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    result
}

fn execute(command: Command, cli: &Cli, config: &ExperimentConfig, out: &Path, log: &mut Log) -> Result<()> {
    let series = config.series();
    match command {
        Command::Convergence => {
            let taus = config.convergence_taus();
            let mut results = Vec::new();
            for &(scheme, gamma0) in &series {
                let tag = series_tag(scheme, gamma0);
                let t0 = Instant::now();
                let rows = experiment::run_convergence(config, scheme, gamma0, &taus, |tau, disc, traj| {
                    if tau == taus[0] {
                        if let Some(dir) = &cli.emit_matrix {
                            emit_operators(dir, disc, gamma0, log).map_err(|e| ewave::Error::Config(e.to_string()))?;
                        }
                    }
                    let iterations: usize = traj.stats.iter().map(|s| s.iterations).sum();
                    log.note(format!("{tag} tau={tau:e}: {} steps, {iterations} solver iterations", traj.stats.len()));
                    dump_run(out, &tag, tau, traj, cli.dump_trajectory, log).map_err(|e| ewave::Error::Config(e.to_string()))?;
                    Ok(())
                })?;
                log.note(format!("{tag}: convergence study took {:.2?}", t0.elapsed()));
                for r in &rows {
                    println!(
                        "{tag:>14}  tau={:<10.4e} error={:.6e}  eoc={}",
                        r.tau,
                        r.error,
                        r.eoc.map_or("-".to_string(), |e| format!("{e:.3}"))
                    );
                }
                results.push((scheme, gamma0, rows));
            }
            let path = out.join("convergence.csv");
            let mut w = create(&path)?;
            experiment::write_convergence_csv(&mut w, &results)?;
            w.flush()?;
            log.note(format!("wrote {}", path.display()));
        }
        Command::Condnum => {
            let taus = config.condnum_taus();
            let mut all = Vec::new();
            for &(scheme, gamma0) in &series {
                let tag = series_tag(scheme, gamma0);
                let t0 = Instant::now();
                if let Some(dir) = &cli.emit_matrix {
                    emit_operators(dir, &config.discretization(scheme, gamma0)?, gamma0, log)?;
                }
                let rows = experiment::run_condnum_sweep(config, scheme, gamma0, &taus)?;
                for r in &rows {
                    match &r.failure {
                        None => println!("{tag:>14}  tau={:<10.4e} kappa={:.6e} ({})", r.tau, r.kappa, r.method),
                        Some(msg) => {
                            println!("{tag:>14}  tau={:<10.4e} failed: {msg}", r.tau);
                            log.note(format!("{tag} tau={:e}: {msg}", r.tau));
                        }
                    }
                }
                log.note(format!("{tag}: condition sweep took {:.2?}", t0.elapsed()));
                all.extend(rows);
            }
            let path = out.join("condnum.csv");
            let mut w = create(&path)?;
            experiment::write_condnum_csv(&mut w, &all)?;
            w.flush()?;
            log.note(format!("wrote {}", path.display()));
        }
        Command::Spectrum => {
            let taus = config.spectrum_taus();
            let mut all = Vec::new();
            for &(scheme, gamma0) in &series {
                let tag = series_tag(scheme, gamma0);
                let t0 = Instant::now();
                let reports = experiment::run_spectrum_study(config, scheme, gamma0, &taus)?;
                for r in &reports {
                    println!(
                        "{tag:>14}  tau={:<10.4e} kappa={:.6e} clusters={} compactness={:.4e}",
                        r.tau,
                        r.condition_number,
                        r.clusters.len(),
                        cluster_compactness(&r.clusters)
                    );
                }
                log.note(format!("{tag}: spectrum study took {:.2?}", t0.elapsed()));
                all.extend(reports.into_iter().map(|r| (scheme, r)));
            }
            let path = out.join("spectrum.csv");
            let mut w = create(&path)?;
            experiment::write_spectrum_csv(&mut w, &all)?;
            w.flush()?;
            log.note(format!("wrote {}", path.display()));
        }
        Command::Field => {
            let Some(&(scheme, gamma0)) = series.first() else {
                bail!("no scheme configured");
            };
            if series.len() > 1 {
                log.note(format!("field: using the first series only ({})", series_tag(scheme, gamma0)));
            }
            let tau = config.field_tau();
            let tag = series_tag(scheme, gamma0);
            let t0 = Instant::now();
            let (rows, disc, traj) = experiment::run_field_dump(config, scheme, gamma0, tau)?;
            log.note(format!("{tag} tau={tau:e}: run took {:.2?}", t0.elapsed()));
            if let Some(dir) = &cli.emit_matrix {
                emit_operators(dir, &disc, gamma0, log)?;
            }
            dump_run(out, &tag, tau, &traj, cli.dump_trajectory, log)?;
            let path = out.join("field.csv");
            let mut w = create(&path)?;
            experiment::write_field_csv(&mut w, &rows)?;
            w.flush()?;
            let umax = rows.iter().map(|r| r.u.norm()).fold(0.0, f64::max);
            let vmax = rows.iter().map(|r| r.v.norm()).fold(0.0, f64::max);
            println!("{tag}: t={} max|u|={umax:.6} max|v|={vmax:.6}", config.end_time);
            log.note(format!("wrote {}", path.display()));
        }
        Command::Assemble => {
            let dir = cli.emit_matrix.clone().unwrap_or_else(|| out.to_path_buf());
            let tau = config.taus.as_ref().map_or(1e-1, |t| t[0]);
            for &(scheme, gamma0) in &series {
                let t0 = Instant::now();
                let disc = config.discretization(scheme, gamma0)?;
                log.note(format!("{}: assembled {} unknowns in {:.2?}", series_tag(scheme, gamma0), disc.n_dofs(), t0.elapsed()));
                emit_operators(&dir, &disc, gamma0, log)?;
                let tag = series_tag(scheme, gamma0);
                let k = condensed_matrix(&disc.mass, &disc.stiffness, tau)?;
                let l = build_block_matrix(&disc.mass, &disc.stiffness, tau)?;
                for (name, m) in [("condensed", &k), ("block", &l)] {
                    let path = dir.join(format!("{tag}_{name}_tau{tau:e}.mtx"));
                    write_mtx(&path, m)?;
                    log.note(format!("wrote {}", path.display()));
                }
                println!("{tag}: {} unknowns, nnz(M)={} nnz(A)={}", disc.n_dofs(), disc.mass.nnz(), disc.stiffness.nnz());
            }
        }
    }
    Ok(())
}
