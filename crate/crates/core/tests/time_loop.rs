use ewave::discretization::{Scheme, SpatialDiscretization};
use ewave::elasticity::IsotropicMaterial;
use ewave::mesh::build_unit_square_mesh;
use ewave::problem::FreeVibration;
use ewave::sparse::SparseOperator;
use ewave::timeslab::{energy, run, uniform_grid, SolverConfig, SolverMethod, SystemForm, TimeSlabSystem};
use ewave::Vec2;

#[test]
fn decoupled_oscillators_rotate_by_the_trapezoidal_angle() {
    // M u'' + A u = 0 with diagonal M, A: each mode rotates by 2 atan(ωτ/2) per step
    let m = SparseOperator::from_diagonal(&[1.0, 2.0, 0.5]);
    let a = SparseOperator::from_diagonal(&[4.0, 50.0, 0.02]);
    let omega = [2.0, 5.0, 0.2];
    let steps = 40;
    let grid = uniform_grid(2.0, steps).unwrap();
    let tau = 2.0 / steps as f64;
    let traj = run(&m, &a, &grid, vec![1.0; 3], vec![0.0; 3], |_| Ok(vec![0.0; 3]), &SolverConfig::default()).unwrap();
    for (i, w) in omega.iter().enumerate() {
        let theta = 2.0 * (w * tau / 2.0).atan();
        let (u, v) = traj.final_state();
        let expected_u = (steps as f64 * theta).cos();
        let expected_v = -w * (steps as f64 * theta).sin();
        assert!((u[i] - expected_u).abs() < 1e-9, "mode {i}: {} vs {expected_u}", u[i]);
        assert!((v[i] - expected_v).abs() < 1e-9, "mode {i}: {} vs {expected_v}", v[i]);
    }
}

fn bump(x: Vec2) -> Vec2 {
    let s = (std::f64::consts::PI * x.x).sin() * (std::f64::consts::PI * x.y).sin();
    Vec2::new(s * s, -0.5 * s)
}

#[test]
fn every_solver_path_agrees_on_a_dg_slab() {
    let mesh = build_unit_square_mesh(3, true).unwrap();
    let disc = SpatialDiscretization::new(mesh, 2, IsotropicMaterial::reference(), Scheme::Sipg, 10.0).unwrap();
    let u0 = disc.interpolate(bump);
    let v0 = disc.interpolate(|x| bump(x) * 0.3);
    let slab = TimeSlabSystem::unforced(&disc.mass, &disc.stiffness, 0.05).unwrap();
    let reference = slab.step(&u0, &v0, &SolverConfig::dense_block()).unwrap();
    let configs = [
        (SolverMethod::ConjugateGradient, SystemForm::Condensed),
        (SolverMethod::Gmres, SystemForm::Condensed),
        (SolverMethod::Gmres, SystemForm::Block),
        (SolverMethod::DenseDirect, SystemForm::Condensed),
    ];
    let scale = reference.u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    for (method, form) in configs {
        let cfg = SolverConfig { method, form, rel_tolerance: 1e-13, ..SolverConfig::default() };
        let r = slab.step(&u0, &v0, &cfg).unwrap();
        let du = r.u.iter().zip(&reference.u).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let dv = r.v.iter().zip(&reference.v).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(du < 1e-8 * scale, "{method:?}/{form:?}: du = {du}");
        assert!(dv < 1e-6 * scale, "{method:?}/{form:?}: dv = {dv}");
    }
}

#[test]
fn free_vibration_energy_is_conserved_for_fem_and_sipg() {
    let problem = FreeVibration { displacement: bump, velocity: |_| Vec2::zeros() };
    for scheme in [Scheme::Fem, Scheme::Sipg] {
        let mesh = build_unit_square_mesh(4, true).unwrap();
        let disc = SpatialDiscretization::new(mesh, 2, IsotropicMaterial::reference(), scheme, 20.0).unwrap();
        let (u0, v0) = disc.initial_state(&problem);
        let n = disc.n_dofs();
        let grid = uniform_grid(0.5, 25).unwrap();
        let solver = SolverConfig { rel_tolerance: 1e-14, ..SolverConfig::default() };
        let traj = run(&disc.mass, &disc.stiffness, &grid, u0, v0, |_| Ok(vec![0.0; n]), &solver).unwrap();
        let e0 = energy(&disc.mass, &disc.stiffness, &traj.u[0], &traj.v[0]);
        for (u, v) in traj.u.iter().zip(&traj.v) {
            let e = energy(&disc.mass, &disc.stiffness, u, v);
            assert!((e - e0).abs() <= 1e-9 * e0, "{scheme}: {e} vs {e0}");
        }
    }
}

#[test]
fn run_rejects_bad_grids_and_configs() {
    let m = SparseOperator::identity(2);
    let a = SparseOperator::identity(2);
    let zero = |_| Ok(vec![0.0; 2]);
    assert!(run(&m, &a, &[0.0], vec![0.0; 2], vec![0.0; 2], zero, &SolverConfig::default()).is_err());
    assert!(run(&m, &a, &[0.0, 0.5, 0.5], vec![0.0; 2], vec![0.0; 2], zero, &SolverConfig::default()).is_err());
    let cg_block = SolverConfig { form: SystemForm::Block, ..SolverConfig::default() };
    assert!(run(&m, &a, &[0.0, 1.0], vec![0.0; 2], vec![0.0; 2], zero, &cg_block).is_err());
}
