use ewave::dg::{assemble_ip_terms, assemble_mass, assemble_penalty, assemble_stiffness_ip, interpolate, DgDofMap, IpTerms, IpVariant, PenaltyConfig};
use ewave::cg::{assemble_cg_full, CgDofMap};
use ewave::elasticity::IsotropicMaterial;
use ewave::mesh::build_unit_square_mesh;
use ewave::sparse::SparseOperator;
use ewave::Vec2;

fn max_diff(a: &SparseOperator, b: &SparseOperator) -> f64 {
    let d = SparseOperator::linear_combination(1.0, a, -1.0, b).unwrap();
    d.max_abs()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[test]
fn nipg_symmetric_part_is_volume_plus_penalty() {
    let mesh = build_unit_square_mesh(3, true).unwrap();
    let mat = IsotropicMaterial::reference();
    let dofs = DgDofMap::new(&mesh, 2).unwrap();
    let cfg = PenaltyConfig::new(10.0, IpVariant::Nipg).unwrap();
    let a = assemble_stiffness_ip(&mesh, &dofs, &mat, &cfg).unwrap();
    let v = assemble_ip_terms(&mesh, &dofs, &mat, &cfg, IpTerms::VOLUME).unwrap();
    let p = assemble_penalty(&mesh, &dofs, &mat, &cfg).unwrap();
    let sym = SparseOperator::linear_combination(1.0, &a, 1.0, &a.transpose()).unwrap();
    let vp = SparseOperator::linear_combination(2.0, &v, 2.0, &p).unwrap();
    assert!(max_diff(&sym, &vp) <= 1e-12 * vp.max_abs());
}

#[test]
fn sipg_minus_iipg_is_transposed_consistency() {
    let mesh = build_unit_square_mesh(3, true).unwrap();
    let mat = IsotropicMaterial::reference();
    let dofs = DgDofMap::new(&mesh, 2).unwrap();
    let sipg = PenaltyConfig::new(5.0, IpVariant::Sipg).unwrap();
    let iipg = PenaltyConfig::new(5.0, IpVariant::Iipg).unwrap();
    let a_s = assemble_stiffness_ip(&mesh, &dofs, &mat, &sipg).unwrap();
    let a_i = assemble_stiffness_ip(&mesh, &dofs, &mat, &iipg).unwrap();
    let consistency = IpTerms { volume: false, consistency: true, symmetry: false, penalty: false };
    let c = assemble_ip_terms(&mesh, &dofs, &mat, &iipg, consistency).unwrap();
    let diff = SparseOperator::linear_combination(1.0, &a_s, -1.0, &a_i).unwrap();
    assert!(max_diff(&diff, &c.transpose()) <= 1e-12 * a_s.max_abs());
}

#[test]
fn stiffness_is_affine_in_the_penalty_parameter() {
    let mesh = build_unit_square_mesh(2, true).unwrap();
    let mat = IsotropicMaterial::reference();
    let dofs = DgDofMap::new(&mesh, 1).unwrap();
    let base = PenaltyConfig::sipg(10.0).unwrap();
    let scaled = PenaltyConfig::sipg(70.0).unwrap();
    let a1 = assemble_stiffness_ip(&mesh, &dofs, &mat, &base).unwrap();
    let a7 = assemble_stiffness_ip(&mesh, &dofs, &mat, &scaled).unwrap();
    let p = assemble_penalty(&mesh, &dofs, &mat, &base).unwrap();
    let diff = SparseOperator::linear_combination(1.0, &a7, -1.0, &a1).unwrap();
    assert!(max_diff(&diff, &p.scale(6.0)) <= 1e-12 * a7.max_abs());
}

#[test]
fn dg_mass_integrates_density_over_the_domain() {
    let mesh = build_unit_square_mesh(4, true).unwrap();
    let mat = IsotropicMaterial::new(70.0, 0.34, 2.8).unwrap();
    for p in 1..=3 {
        let dofs = DgDofMap::new(&mesh, p).unwrap();
        let m = assemble_mass(&mesh, &dofs, &mat).unwrap();
        let ex = interpolate(&mesh, &dofs, |_| Vec2::new(1.0, 0.0));
        let mass_x = dot(&ex, &m.mul_vec(&ex));
        assert!((mass_x - 2.8).abs() < 1e-12, "p={p}: {mass_x}");
        assert!((m.sum() - 2.0 * 2.8).abs() < 1e-12);
    }
}

#[test]
fn rigid_motions_carry_no_energy_without_dirichlet_faces() {
    let mesh = build_unit_square_mesh(3, false).unwrap();
    let mat = IsotropicMaterial::reference();
    let dofs = DgDofMap::new(&mesh, 2).unwrap();
    let a = assemble_stiffness_ip(&mesh, &dofs, &mat, &PenaltyConfig::sipg(100.0).unwrap()).unwrap();
    let scale = a.max_abs();
    for field in [
        interpolate(&mesh, &dofs, |_| Vec2::new(0.3, -1.2)),
        interpolate(&mesh, &dofs, |x| Vec2::new(-x.y, x.x)),
    ] {
        let r = a.mul_vec(&field);
        assert!(r.iter().all(|v| v.abs() < 1e-10 * scale));
    }
}

#[test]
fn uniaxial_strain_energy_matches_the_p_wave_modulus() {
    // u = (x, 0): ε = e₁⊗e₁, σ:ε = λ + 2μ on the unit square
    let mesh = build_unit_square_mesh(3, false).unwrap();
    let mat = IsotropicMaterial::new(70.0, 0.34, 2.8).unwrap();
    let (lambda, mu) = ewave::elasticity::lame_parameters(70.0, 0.34).unwrap();
    let dofs = DgDofMap::new(&mesh, 1).unwrap();
    let a = assemble_stiffness_ip(&mesh, &dofs, &mat, &PenaltyConfig::sipg(3.0).unwrap()).unwrap();
    let u = interpolate(&mesh, &dofs, |x| Vec2::new(x.x, 0.0));
    let e = dot(&u, &a.mul_vec(&u));
    assert!((e - (lambda + 2.0 * mu)).abs() < 1e-10 * (lambda + 2.0 * mu));

    let cg = CgDofMap::new(&mesh, 2).unwrap();
    let (m, k) = assemble_cg_full(&mesh, &cg, &mat).unwrap();
    let uc = cg.interpolate(|x| Vec2::new(x.x, 0.0));
    assert!((dot(&uc, &k.mul_vec(&uc)) - (lambda + 2.0 * mu)).abs() < 1e-10 * (lambda + 2.0 * mu));
    assert!((m.sum() - 2.0 * 2.8).abs() < 1e-12);
}

#[test]
fn assembled_operators_survive_matrix_market_roundtrip() {
    let mesh = build_unit_square_mesh(2, true).unwrap();
    let mat = IsotropicMaterial::reference();
    let dofs = DgDofMap::new(&mesh, 2).unwrap();
    let a = assemble_stiffness_ip(&mesh, &dofs, &mat, &PenaltyConfig::new(1e3, IpVariant::Nipg).unwrap()).unwrap();
    let mut buf = Vec::new();
    a.write_matrix_market(&mut buf).unwrap();
    let back = SparseOperator::read_matrix_market(buf.as_slice()).unwrap();
    assert_eq!(back.nrows(), a.nrows());
    assert_eq!(back.nnz(), a.nnz());
    assert_eq!(max_diff(&a, &back), 0.0);
}

#[test]
fn lanczos_and_dense_agree_on_a_slab_matrix() {
    use ewave::spectral::{condition_number_spd, ConditionMethod};
    use ewave::timeslab::condensed_matrix;
    let mesh = build_unit_square_mesh(4, true).unwrap();
    let mat = IsotropicMaterial::reference();
    let dofs = DgDofMap::new(&mesh, 2).unwrap();
    let m = assemble_mass(&mesh, &dofs, &mat).unwrap();
    let a = assemble_stiffness_ip(&mesh, &dofs, &mat, &PenaltyConfig::sipg(1e6).unwrap()).unwrap();
    let k = condensed_matrix(&m, &a, 1e-2).unwrap();
    let dense = condition_number_spd(&k, ConditionMethod::Dense).unwrap();
    let lanczos = condition_number_spd(&k, ConditionMethod::Lanczos).unwrap();
    assert!((dense.kappa - lanczos.kappa).abs() < 1e-6 * dense.kappa, "{} vs {}", dense.kappa, lanczos.kappa);
}
