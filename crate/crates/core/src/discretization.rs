//! A spatial scheme (SIPG, NIPG, IIPG or FEM) assembled on a mesh, exposing
//! the semi-discrete operators M and A and the load b(t) to the time loop.

use std::fmt;
use std::str::FromStr;

use crate::basis::TensorLagrange;
use crate::cg::CgSystem;
use crate::dg::{self, DgDofMap, IpVariant, PenaltyConfig};
use crate::elasticity::IsotropicMaterial;
use crate::error::{Error, Result};
use crate::mesh::StructuredQuadMesh;
use crate::problem::ElasticProblem;
use crate::sparse::SparseOperator;
use crate::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Sipg,
    Nipg,
    Iipg,
    Fem,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Sipg, Scheme::Nipg, Scheme::Iipg, Scheme::Fem];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Sipg => "SIPG",
            Scheme::Nipg => "NIPG",
            Scheme::Iipg => "IIPG",
            Scheme::Fem => "FEM",
        }
    }

    pub fn ip_variant(self) -> Option<IpVariant> {
        match self {
            Scheme::Sipg => Some(IpVariant::Sipg),
            Scheme::Nipg => Some(IpVariant::Nipg),
            Scheme::Iipg => Some(IpVariant::Iipg),
            Scheme::Fem => None,
        }
    }

    /// Whether the stiffness matrix is symmetric.
    pub fn is_symmetric(self) -> bool {
        matches!(self, Scheme::Sipg | Scheme::Fem)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "SIPG" => Ok(Scheme::Sipg),
            "NIPG" => Ok(Scheme::Nipg),
            "IIPG" => Ok(Scheme::Iipg),
            "FEM" | "CG" => Ok(Scheme::Fem),
            other => Err(Error::Config(format!("unknown scheme '{other}' (expected SIPG, NIPG, IIPG or FEM)"))),
        }
    }
}

#[derive(Debug, Clone)]
enum Space {
    Dg(PenaltyConfig),
    Cg(Box<CgSystem>),
}

/// Assembled spatial operators. The unknown vector is the dG coefficient
/// vector, or the free (non-Dirichlet) FEM nodal values.
#[derive(Debug, Clone)]
pub struct SpatialDiscretization {
    pub mesh: StructuredQuadMesh,
    pub material: IsotropicMaterial,
    pub degree: usize,
    pub scheme: Scheme,
    pub mass: SparseOperator,
    pub stiffness: SparseOperator,
    /// Cell-wise layout used to evaluate fields of either space.
    pub layout: DgDofMap,
    basis: TensorLagrange,
    space: Space,
}

impl SpatialDiscretization {
    /// `gamma0` is ignored for [`Scheme::Fem`].
    pub fn new(mesh: StructuredQuadMesh, degree: usize, material: IsotropicMaterial, scheme: Scheme, gamma0: f64) -> Result<Self> {
        let layout = DgDofMap::new(&mesh, degree)?;
        let basis = TensorLagrange::new(degree)?;
        let (mass, stiffness, space) = match scheme.ip_variant() {
            Some(variant) => {
                let config = PenaltyConfig::new(gamma0, variant)?;
                let mass = dg::assemble_mass(&mesh, &layout, &material)?;
                let stiffness = dg::assemble_stiffness_ip(&mesh, &layout, &material, &config)?;
                (mass, stiffness, Space::Dg(config))
            }
            None => {
                let sys = CgSystem::assemble(&mesh, degree, &material)?;
                (sys.mass.clone(), sys.stiffness.clone(), Space::Cg(Box::new(sys)))
            }
        };
        Ok(Self {
            mesh,
            material,
            degree,
            scheme,
            mass,
            stiffness,
            layout,
            basis,
            space,
        })
    }

    pub fn n_dofs(&self) -> usize {
        self.mass.nrows()
    }

    pub fn penalty(&self) -> Option<&PenaltyConfig> {
        match &self.space {
            Space::Dg(c) => Some(c),
            Space::Cg(_) => None,
        }
    }

    pub fn cg_system(&self) -> Option<&CgSystem> {
        match &self.space {
            Space::Cg(s) => Some(s),
            Space::Dg(_) => None,
        }
    }

    pub fn basis(&self) -> &TensorLagrange {
        &self.basis
    }

    /// Load vector b(t).
    pub fn load<P: ElasticProblem + ?Sized>(&self, problem: &P, t: f64) -> Result<Vec<f64>> {
        match &self.space {
            Space::Dg(config) => dg::assemble_dg_rhs(&self.mesh, &self.layout, &self.material, config, problem, t),
            Space::Cg(sys) => sys.reduced_load(&self.mesh, problem, t),
        }
    }

    /// Nodal interpolant of `f` in unknown numbering.
    pub fn interpolate(&self, f: impl Fn(Vec2) -> Vec2) -> Vec<f64> {
        match &self.space {
            Space::Dg(_) => dg::interpolate(&self.mesh, &self.layout, f),
            Space::Cg(sys) => sys.restrict(&sys.dofmap.interpolate(f)),
        }
    }

    /// Initial displacement and velocity by nodal interpolation.
    pub fn initial_state<P: ElasticProblem + ?Sized>(&self, problem: &P) -> (Vec<f64>, Vec<f64>) {
        (
            self.interpolate(|x| problem.initial_displacement(x)),
            self.interpolate(|x| problem.initial_velocity(x)),
        )
    }

    /// Cell-wise coefficients (dG layout) of an unknown vector; constrained
    /// FEM values are taken from `boundary`.
    pub fn cellwise(&self, unknowns: &[f64], boundary: impl Fn(Vec2) -> Vec2) -> Vec<f64> {
        match &self.space {
            Space::Dg(_) => unknowns.to_vec(),
            Space::Cg(sys) => {
                let full = sys.expand(unknowns, boundary);
                let mut out = vec![0.0; self.layout.n_dofs()];
                for cell in 0..self.mesh.n_cells() {
                    let base = self.layout.cell_dofs(cell).start;
                    for (local, dof) in sys.dofmap.cell_dofs(cell).into_iter().enumerate() {
                        out[base + local] = full[dof];
                    }
                }
                out
            }
        }
    }

    /// Evaluates cell-wise coefficients at reference point `xi` of `cell`.
    pub fn evaluate(&self, cellwise: &[f64], cell: usize, xi: Vec2) -> Vec2 {
        dg::evaluate(&self.basis, &self.layout, cellwise, cell, xi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_unit_square_mesh;
    use crate::problem::ManufacturedWave;

    #[test]
    fn scheme_parsing() {
        assert_eq!("sipg".parse::<Scheme>().unwrap(), Scheme::Sipg);
        assert_eq!(" FEM ".parse::<Scheme>().unwrap(), Scheme::Fem);
        assert!("LDG".parse::<Scheme>().is_err());
        assert_eq!(Scheme::Nipg.to_string(), "NIPG");
    }

    #[test]
    fn fem_ignores_penalty() {
        let mesh = build_unit_square_mesh(2, true).unwrap();
        let m = IsotropicMaterial::reference();
        let a = SpatialDiscretization::new(mesh.clone(), 2, m, Scheme::Fem, 1.0).unwrap();
        let b = SpatialDiscretization::new(mesh, 2, m, Scheme::Fem, -5.0).unwrap();
        assert_eq!(a.stiffness, b.stiffness);
        assert!(a.penalty().is_none());
        assert_eq!(a.n_dofs(), 2 * 9);
    }

    #[test]
    fn interpolant_evaluates_back_at_nodes() {
        let mesh = build_unit_square_mesh(3, true).unwrap();
        let m = IsotropicMaterial::reference();
        let wave = ManufacturedWave::new(m);
        for scheme in [Scheme::Sipg, Scheme::Fem] {
            let d = SpatialDiscretization::new(mesh.clone(), 2, m, scheme, 10.0).unwrap();
            let u = d.interpolate(|x| wave.displacement(0.2, x));
            let c = d.cellwise(&u, |x| wave.displacement(0.2, x));
            for cell in 0..mesh.n_cells() {
                for k in 0..d.basis().n_shapes() {
                    let xi = d.basis().node(k);
                    let x = mesh.cells()[cell].map_to_physical(xi);
                    assert!((d.evaluate(&c, cell, xi) - wave.displacement(0.2, x)).amax() < 1e-14);
                }
            }
        }
    }
}
