//! Conforming Q_p finite elements for the same elasticity operator.
//!
//! Unknowns live on the global Lagrange node grid with
//! `dof = 2 * node + component`. Dirichlet nodes are eliminated
//! symmetrically: the reduced system couples free unknowns only, and the
//! constrained values enter the load through the coupling blocks.

use crate::basis::TensorLagrange;
use crate::elasticity::IsotropicMaterial;
use crate::error::{Error, Result};
use crate::mesh::{FaceKind, LocalSide, StructuredQuadMesh};
use crate::problem::ElasticProblem;
use crate::quadrature::{gauss_legendre, TensorRule};
use crate::sparse::{SparseOperator, TripletBuilder};
use crate::Vec2;

#[derive(Debug, Clone, PartialEq)]
pub struct CgDofMap {
    degree: usize,
    nx: usize,
    ny: usize,
    origin: Vec2,
    spacing: Vec2,
    constrained: Vec<bool>,
}

impl CgDofMap {
    pub fn new(mesh: &StructuredQuadMesh, degree: usize) -> Result<Self> {
        if degree < 1 {
            return Err(Error::Degree { degree, min: 1 });
        }
        let cell = &mesh.cells()[0];
        let mut map = Self {
            degree,
            nx: mesh.nx,
            ny: mesh.ny,
            origin: Vec2::new(mesh.x_min, mesh.y_min),
            spacing: cell.extents / degree as f64,
            constrained: Vec::new(),
        };
        let mut constrained = vec![false; 2 * map.n_nodes()];
        for face in mesh.boundary_faces().filter(|f| f.kind == FaceKind::DirichletBoundary) {
            for node in map.side_nodes(face.cell_plus, face.side_plus) {
                constrained[2 * node] = true;
                constrained[2 * node + 1] = true;
            }
        }
        map.constrained = constrained;
        Ok(map)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    fn row_len(&self) -> usize {
        self.degree * self.nx + 1
    }

    pub fn n_nodes(&self) -> usize {
        self.row_len() * (self.degree * self.ny + 1)
    }

    pub fn n_dofs(&self) -> usize {
        2 * self.n_nodes()
    }

    pub fn node_point(&self, node: usize) -> Vec2 {
        let (ix, iy) = (node % self.row_len(), node / self.row_len());
        self.origin + Vec2::new(ix as f64 * self.spacing.x, iy as f64 * self.spacing.y)
    }

    /// Global node of local tensor node `k = iy * (p+1) + ix` of `cell`.
    pub fn cell_node(&self, cell: usize, k: usize) -> usize {
        let p = self.degree;
        let (ci, cj) = (cell % self.nx, cell / self.nx);
        let (ix, iy) = (k % (p + 1), k / (p + 1));
        (cj * p + iy) * self.row_len() + ci * p + ix
    }

    pub fn cell_nodes(&self, cell: usize) -> Vec<usize> {
        (0..(self.degree + 1).pow(2)).map(|k| self.cell_node(cell, k)).collect()
    }

    /// Global dofs of `cell` in the dG local order (component-major).
    pub fn cell_dofs(&self, cell: usize) -> Vec<usize> {
        let nodes = self.cell_nodes(cell);
        (0..2).flat_map(|c| nodes.iter().map(move |n| 2 * n + c)).collect()
    }

    fn side_nodes(&self, cell: usize, side: LocalSide) -> Vec<usize> {
        let p = self.degree;
        (0..=p)
            .map(|t| {
                let (ix, iy) = match side {
                    LocalSide::Left => (0, t),
                    LocalSide::Right => (p, t),
                    LocalSide::Bottom => (t, 0),
                    LocalSide::Top => (t, p),
                };
                self.cell_node(cell, iy * (p + 1) + ix)
            })
            .collect()
    }

    pub fn is_constrained(&self, dof: usize) -> bool {
        self.constrained[dof]
    }

    pub fn free_dofs(&self) -> Vec<usize> {
        (0..self.n_dofs()).filter(|&d| !self.constrained[d]).collect()
    }

    pub fn constrained_dofs(&self) -> Vec<usize> {
        (0..self.n_dofs()).filter(|&d| self.constrained[d]).collect()
    }

    /// Nodal values of a vector field, full numbering.
    pub fn interpolate(&self, f: impl Fn(Vec2) -> Vec2) -> Vec<f64> {
        let mut out = vec![0.0; self.n_dofs()];
        for node in 0..self.n_nodes() {
            let v = f(self.node_point(node));
            out[2 * node] = v.x;
            out[2 * node + 1] = v.y;
        }
        out
    }
}

/// Reduced FEM operators after Dirichlet elimination.
#[derive(Debug, Clone)]
pub struct CgSystem {
    pub dofmap: CgDofMap,
    pub material: IsotropicMaterial,
    free: Vec<usize>,
    constrained: Vec<usize>,
    /// M_ff, A_ff
    pub mass: SparseOperator,
    pub stiffness: SparseOperator,
    /// M_fc, A_fc
    pub mass_coupling: SparseOperator,
    pub stiffness_coupling: SparseOperator,
}

/// Full (unconstrained) mass and stiffness matrices.
pub fn assemble_cg_full(
    mesh: &StructuredQuadMesh,
    dofmap: &CgDofMap,
    material: &IsotropicMaterial,
) -> Result<(SparseOperator, SparseOperator)> {
    let p = dofmap.degree();
    let basis = TensorLagrange::new(p)?;
    let ns = basis.n_shapes();
    let nd = 2 * ns;
    let rule = TensorRule::gauss(p + 1)?;
    let n = dofmap.n_dofs();
    let mut mass = TripletBuilder::with_capacity(n, n, mesh.n_cells() * nd * nd);
    let mut stiff = TripletBuilder::with_capacity(n, n, mesh.n_cells() * nd * nd);
    let mut values = vec![0.0; ns];
    let mut grads = vec![Vec2::zeros(); ns];
    let mut m_local = vec![0.0; nd * nd];
    let mut a_local = vec![0.0; nd * nd];
    for cell in mesh.cells() {
        m_local.iter_mut().for_each(|v| *v = 0.0);
        a_local.iter_mut().for_each(|v| *v = 0.0);
        for (q, &xi) in rule.points.iter().enumerate() {
            basis.eval(xi, &mut values, &mut grads);
            let w = rule.weights[q] * cell.measure();
            let g: Vec<Vec2> = grads.iter().map(|g| g.component_div(&cell.extents)).collect();
            for a in 0..nd {
                let (ca, ka) = (a / ns, a % ns);
                for b in 0..nd {
                    let (cb, kb) = (b / ns, b % ns);
                    if ca == cb {
                        m_local[a * nd + b] += w * material.density * values[ka] * values[kb];
                    }
                    // ε(φ_a):ε(φ_b) for φ = N e_c
                    let div = g[ka][ca] * g[kb][cb];
                    let eps = if ca == cb {
                        g[ka][ca] * g[kb][cb] + 0.5 * g[ka][1 - ca] * g[kb][1 - cb]
                    } else {
                        0.5 * g[ka][1 - ca] * g[kb][1 - cb]
                    };
                    a_local[a * nd + b] += w * (material.lambda * div + 2.0 * material.mu * eps);
                }
            }
        }
        let dofs = dofmap.cell_dofs(cell.index);
        mass.add_block(&dofs, &dofs, &m_local);
        stiff.add_block(&dofs, &dofs, &a_local);
    }
    Ok((mass.build(), stiff.build()))
}

impl CgSystem {
    pub fn assemble(mesh: &StructuredQuadMesh, degree: usize, material: &IsotropicMaterial) -> Result<Self> {
        let dofmap = CgDofMap::new(mesh, degree)?;
        let (mass_full, stiff_full) = assemble_cg_full(mesh, &dofmap, material)?;
        let free = dofmap.free_dofs();
        let constrained = dofmap.constrained_dofs();
        Ok(Self {
            mass: mass_full.submatrix(&free, &free),
            stiffness: stiff_full.submatrix(&free, &free),
            mass_coupling: mass_full.submatrix(&free, &constrained),
            stiffness_coupling: stiff_full.submatrix(&free, &constrained),
            dofmap,
            material: *material,
            free,
            constrained,
        })
    }

    pub fn free_dofs(&self) -> &[usize] {
        &self.free
    }

    pub fn constrained_dofs(&self) -> &[usize] {
        &self.constrained
    }

    pub fn n_free(&self) -> usize {
        self.free.len()
    }

    /// Values of `f` at the constrained dofs.
    pub fn constrained_values(&self, f: impl Fn(Vec2) -> Vec2) -> Vec<f64> {
        self.constrained
            .iter()
            .map(|&d| f(self.dofmap.node_point(d / 2))[d % 2])
            .collect()
    }

    /// Full load vector ∫ f·φ + ∫_{Γ_N} h·φ at time `t`.
    pub fn full_load<P: ElasticProblem + ?Sized>(&self, mesh: &StructuredQuadMesh, problem: &P, t: f64) -> Result<Vec<f64>> {
        let p = self.dofmap.degree();
        let basis = TensorLagrange::new(p)?;
        let ns = basis.n_shapes();
        let rule = TensorRule::gauss(p + 1)?;
        let mut out = vec![0.0; self.dofmap.n_dofs()];
        for cell in mesh.cells() {
            let dofs = self.dofmap.cell_dofs(cell.index);
            for (q, &xi) in rule.points.iter().enumerate() {
                let f = problem.forcing(t, cell.map_to_physical(xi));
                let w = rule.weights[q] * cell.measure();
                let v = basis.values_at(xi);
                for c in 0..2 {
                    for k in 0..ns {
                        out[dofs[c * ns + k]] += w * f[c] * v[k];
                    }
                }
            }
        }
        let line = gauss_legendre(p + 1)?;
        for face in mesh.boundary_faces().filter(|f| f.kind == FaceKind::NeumannBoundary) {
            let cell = &mesh.cells()[face.cell_plus];
            let dofs = self.dofmap.cell_dofs(cell.index);
            for (q, &s) in line.points.iter().enumerate() {
                let x = face.point(s);
                let h = problem.neumann(t, x, face.normal);
                let v = basis.values_at(cell.map_to_reference(x));
                let w = line.weights[q] * face.measure;
                for c in 0..2 {
                    for k in 0..ns {
                        out[dofs[c * ns + k]] += w * h[c] * v[k];
                    }
                }
            }
        }
        Ok(out)
    }

    /// Reduced load b_f(t) = F_f(t) − A_fc g(t) − M_fc g̈(t).
    pub fn reduced_load<P: ElasticProblem + ?Sized>(&self, mesh: &StructuredQuadMesh, problem: &P, t: f64) -> Result<Vec<f64>> {
        let full = self.full_load(mesh, problem, t)?;
        let mut out: Vec<f64> = self.free.iter().map(|&d| full[d]).collect();
        if !self.constrained.is_empty() {
            let g = self.constrained_values(|x| problem.dirichlet(t, x));
            let gdd = self.constrained_values(|x| problem.dirichlet_acceleration(t, x));
            let ag = self.stiffness_coupling.mul_vec(&g);
            let mg = self.mass_coupling.mul_vec(&gdd);
            for i in 0..out.len() {
                out[i] -= ag[i] + mg[i];
            }
        }
        Ok(out)
    }

    /// Inserts free values into a full vector, filling constrained dofs with
    /// `boundary`.
    pub fn expand(&self, free_values: &[f64], boundary: impl Fn(Vec2) -> Vec2) -> Vec<f64> {
        let mut full = vec![0.0; self.dofmap.n_dofs()];
        for (i, &d) in self.free.iter().enumerate() {
            full[d] = free_values[i];
        }
        for (&d, v) in self.constrained.iter().zip(self.constrained_values(boundary)) {
            full[d] = v;
        }
        full
    }

    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.free.iter().map(|&d| full[d]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_unit_square_mesh;

    #[test]
    fn node_numbering() {
        let mesh = build_unit_square_mesh(2, true).unwrap();
        let d = CgDofMap::new(&mesh, 2).unwrap();
        assert_eq!(d.n_nodes(), 25);
        assert_eq!(d.cell_nodes(0), vec![0, 1, 2, 5, 6, 7, 10, 11, 12]);
        assert_eq!(d.cell_nodes(3)[0], 12);
        assert_eq!(d.node_point(7), Vec2::new(0.5, 0.25));
        // 16 boundary nodes, both components
        assert_eq!(d.constrained_dofs().len(), 32);
        assert_eq!(d.free_dofs().len(), 18);
    }

    #[test]
    fn neumann_mesh_has_no_constraints() {
        let mesh = build_unit_square_mesh(3, false).unwrap();
        let d = CgDofMap::new(&mesh, 1).unwrap();
        assert!(d.constrained_dofs().is_empty());
    }

    #[test]
    fn full_operators_are_symmetric_and_annihilate_rigid_motion() {
        let mesh = build_unit_square_mesh(3, false).unwrap();
        let m = IsotropicMaterial::reference();
        for p in 1..=3 {
            let d = CgDofMap::new(&mesh, p).unwrap();
            let (mass, stiff) = assemble_cg_full(&mesh, &d, &m).unwrap();
            assert!(stiff.asymmetry() <= 1e-14 * stiff.max_abs());
            assert!((mass.sum() - 2.0 * m.density).abs() < 1e-12);
            let rot = d.interpolate(|x| Vec2::new(-x.y, x.x) + Vec2::new(0.3, -1.0));
            let r = stiff.mul_vec(&rot);
            assert!(r.iter().all(|v| v.abs() < 1e-11), "p={p}");
        }
    }

    #[test]
    fn expand_and_restrict_roundtrip() {
        let mesh = build_unit_square_mesh(2, true).unwrap();
        let sys = CgSystem::assemble(&mesh, 1, &IsotropicMaterial::reference()).unwrap();
        let free: Vec<f64> = (0..sys.n_free()).map(|i| i as f64).collect();
        let full = sys.expand(&free, |x| Vec2::new(x.x, 7.0));
        assert_eq!(sys.restrict(&full), free);
        assert_eq!(full[0], 0.0);
        assert_eq!(full[1], 7.0);
    }
}
