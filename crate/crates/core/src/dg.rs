//! Interior penalty discontinuous Galerkin operators for linear elasticity.
//!
//! The stiffness matrix realizes
//!
//! ```text
//! a_h(u, w) = Σ_K ∫_K σ(u):ε(w)
//!           − Σ_F ∫_F {t_F(u)}·[w]₀
//!           + Σ_F ∫_F [u]₀·(γ_F [w]₀ − S {t_F(w)})
//! ```
//!
//! over interior and Dirichlet faces F. Row index = test function, column
//! index = trial function. Inhomogeneous Dirichlet data is moved to the
//! right-hand side by [`assemble_dg_rhs`].
//!
//! Traces use the face normal n (outward from the plus cell) on both sides:
//! `{t_F(v)} = ½(σ(v⁺) + σ(v⁻))·n` on interior faces, `σ(v⁺)·n` on the
//! boundary.

use std::ops::Range;

use crate::basis::TensorLagrange;
use crate::elasticity::IsotropicMaterial;
use crate::error::{Error, Result};
use crate::mesh::{Cell, Face, FaceKind, StructuredQuadMesh};
use crate::problem::ElasticProblem;
use crate::quadrature::{gauss_legendre, QuadratureRule, TensorRule};
use crate::sparse::{SparseOperator, TripletBuilder};
use crate::{Mat2, Vec2};

/// Cell-wise numbering of the vector-valued dG space. Each cell owns a
/// contiguous block of `2 (p+1)²` unknowns, component-major:
/// `local = component * (p+1)² + shape`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DgDofMap {
    n_cells: usize,
    degree: usize,
    n_shapes: usize,
}

impl DgDofMap {
    pub fn new(mesh: &StructuredQuadMesh, degree: usize) -> Result<Self> {
        if degree < 1 {
            return Err(Error::Degree { degree, min: 1 });
        }
        Ok(Self {
            n_cells: mesh.n_cells(),
            degree,
            n_shapes: (degree + 1) * (degree + 1),
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_shapes(&self) -> usize {
        self.n_shapes
    }

    pub fn dofs_per_cell(&self) -> usize {
        2 * self.n_shapes
    }

    /// N_DoF
    pub fn n_dofs(&self) -> usize {
        self.n_cells * self.dofs_per_cell()
    }

    pub fn cell_dofs(&self, cell: usize) -> Range<usize> {
        let d = self.dofs_per_cell();
        cell * d..(cell + 1) * d
    }

    pub fn global(&self, cell: usize, component: usize, shape: usize) -> usize {
        cell * self.dofs_per_cell() + component * self.n_shapes + shape
    }

    fn check(&self, mesh: &StructuredQuadMesh) -> Result<()> {
        if mesh.n_cells() != self.n_cells {
            return Err(Error::Dimension(format!(
                "dof map built for {} cells, mesh has {}",
                self.n_cells,
                mesh.n_cells()
            )));
        }
        Ok(())
    }
}

/// Interior penalty family, selected by the consistency parameter S.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IpVariant {
    /// S = 1
    Sipg,
    /// S = -1
    Nipg,
    /// S = 0
    Iipg,
}

impl IpVariant {
    pub fn from_consistency(s: i32) -> Result<Self> {
        match s {
            1 => Ok(IpVariant::Sipg),
            -1 => Ok(IpVariant::Nipg),
            0 => Ok(IpVariant::Iipg),
            other => Err(Error::ConsistencyParameter(other)),
        }
    }

    pub fn consistency(self) -> f64 {
        match self {
            IpVariant::Sipg => 1.0,
            IpVariant::Nipg => -1.0,
            IpVariant::Iipg => 0.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            IpVariant::Sipg => "SIPG",
            IpVariant::Nipg => "NIPG",
            IpVariant::Iipg => "IIPG",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyConfig {
    /// Tuning factor γ₀.
    pub gamma0: f64,
    pub variant: IpVariant,
}

impl PenaltyConfig {
    pub fn new(gamma0: f64, variant: IpVariant) -> Result<Self> {
        if !(gamma0 > 0.0) || !gamma0.is_finite() {
            return Err(Error::PenaltyFactor(gamma0));
        }
        Ok(Self { gamma0, variant })
    }

    pub fn from_consistency(gamma0: f64, s: i32) -> Result<Self> {
        Self::new(gamma0, IpVariant::from_consistency(s)?)
    }

    pub fn sipg(gamma0: f64) -> Result<Self> {
        Self::new(gamma0, IpVariant::Sipg)
    }

    pub fn consistency(&self) -> f64 {
        self.variant.consistency()
    }
}

/// γ_F = γ₀ · γ_{F,C} · γ_{F,K} with γ_{F,C} = λ + 2μ and
/// γ_{F,K} = p(p+1)/h_F.
pub fn penalty_value(face: &Face, material: &IsotropicMaterial, config: &PenaltyConfig, p: usize) -> f64 {
    let material_factor = material.p_wave_modulus();
    let shape_factor = (p * (p + 1)) as f64 / face.h_f;
    config.gamma0 * material_factor * shape_factor
}

/// Which parts of the bilinear form to assemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IpTerms {
    pub volume: bool,
    /// −∫ {t_F(u)}·[w]₀
    pub consistency: bool,
    /// −S ∫ [u]₀·{t_F(w)}
    pub symmetry: bool,
    /// γ_F ∫ [u]₀·[w]₀
    pub penalty: bool,
}

impl IpTerms {
    pub const ALL: IpTerms = IpTerms {
        volume: true,
        consistency: true,
        symmetry: true,
        penalty: true,
    };
    pub const PENALTY: IpTerms = IpTerms {
        volume: false,
        consistency: false,
        symmetry: false,
        penalty: true,
    };
    pub const VOLUME: IpTerms = IpTerms {
        volume: true,
        consistency: false,
        symmetry: false,
        penalty: false,
    };
}

/// Gradient of the vector basis function (component c, scalar gradient g):
/// row c holds g.
fn vector_gradient(component: usize, g: Vec2) -> Mat2 {
    let mut m = Mat2::zeros();
    m[(component, 0)] = g.x;
    m[(component, 1)] = g.y;
    m
}

/// Values and physical gradients of all scalar shapes at physical points
/// inside one cell.
struct CellTrace {
    values: Vec<Vec<f64>>,
    gradients: Vec<Vec<Vec2>>,
}

fn trace_at(basis: &TensorLagrange, cell: &Cell, points: &[Vec2]) -> CellTrace {
    let ns = basis.n_shapes();
    let mut values = Vec::with_capacity(points.len());
    let mut gradients = Vec::with_capacity(points.len());
    for &x in points {
        let xi = cell.map_to_reference(x);
        let mut v = vec![0.0; ns];
        let mut g = vec![Vec2::zeros(); ns];
        basis.eval(xi, &mut v, &mut g);
        g.iter_mut().for_each(|gk| *gk = gk.component_div(&cell.extents));
        values.push(v);
        gradients.push(g);
    }
    CellTrace { values, gradients }
}

fn face_points(face: &Face, rule: &QuadratureRule) -> (Vec<Vec2>, Vec<f64>) {
    let points = rule.points.iter().map(|&s| face.point(s)).collect();
    let weights = rule.weights.iter().map(|&w| w * face.measure).collect();
    (points, weights)
}

/// ρ_s-weighted mass matrix; block diagonal with one block per cell.
pub fn assemble_mass(mesh: &StructuredQuadMesh, dofmap: &DgDofMap, material: &IsotropicMaterial) -> Result<SparseOperator> {
    dofmap.check(mesh)?;
    let p = dofmap.degree();
    let basis = TensorLagrange::new(p)?;
    let rule = TensorRule::gauss(p + 1)?;
    let ns = basis.n_shapes();
    let nd = dofmap.dofs_per_cell();

    // Reference scalar mass matrix; the physical one is a scaled copy on
    // every (affine, axis-aligned) cell.
    let mut reference = vec![0.0; ns * ns];
    for (q, &xi) in rule.points.iter().enumerate() {
        let v = basis.values_at(xi);
        for i in 0..ns {
            for j in 0..ns {
                reference[i * ns + j] += rule.weights[q] * v[i] * v[j];
            }
        }
    }

    let mut builder = TripletBuilder::with_capacity(dofmap.n_dofs(), dofmap.n_dofs(), mesh.n_cells() * 2 * ns * ns);
    let mut local = vec![0.0; nd * nd];
    for cell in mesh.cells() {
        let scale = material.density * cell.measure();
        local.iter_mut().for_each(|v| *v = 0.0);
        for c in 0..2 {
            for i in 0..ns {
                for j in 0..ns {
                    local[(c * ns + i) * nd + c * ns + j] = scale * reference[i * ns + j];
                }
            }
        }
        let dofs: Vec<usize> = dofmap.cell_dofs(cell.index).collect();
        for a in 0..nd {
            for b in 0..nd {
                let v = local[a * nd + b];
                if v != 0.0 || (a / ns == b / ns) {
                    builder.push(dofs[a], dofs[b], v);
                }
            }
        }
    }
    Ok(builder.build())
}

/// Interior penalty stiffness matrix A for the configured variant.
pub fn assemble_stiffness_ip(
    mesh: &StructuredQuadMesh,
    dofmap: &DgDofMap,
    material: &IsotropicMaterial,
    config: &PenaltyConfig,
) -> Result<SparseOperator> {
    assemble_ip_terms(mesh, dofmap, material, config, IpTerms::ALL)
}

/// Pure penalty matrix P: γ_F ∫ [u]₀·[w]₀ over interior and Dirichlet faces.
pub fn assemble_penalty(
    mesh: &StructuredQuadMesh,
    dofmap: &DgDofMap,
    material: &IsotropicMaterial,
    config: &PenaltyConfig,
) -> Result<SparseOperator> {
    assemble_ip_terms(mesh, dofmap, material, config, IpTerms::PENALTY)
}

pub fn assemble_ip_terms(
    mesh: &StructuredQuadMesh,
    dofmap: &DgDofMap,
    material: &IsotropicMaterial,
    config: &PenaltyConfig,
    terms: IpTerms,
) -> Result<SparseOperator> {
    dofmap.check(mesh)?;
    let p = dofmap.degree();
    let basis = TensorLagrange::new(p)?;
    let ns = basis.n_shapes();
    let nd = dofmap.dofs_per_cell();
    let s = config.consistency();
    let n = dofmap.n_dofs();
    let mut builder = TripletBuilder::with_capacity(n, n, mesh.n_cells() * nd * nd * 5);

    if terms.volume {
        let rule = TensorRule::gauss(p + 1)?;
        let mut local = vec![0.0; nd * nd];
        let mut div = vec![0.0; nd];
        let mut eps = vec![Mat2::zeros(); nd];
        for cell in mesh.cells() {
            local.iter_mut().for_each(|v| *v = 0.0);
            let points: Vec<Vec2> = rule.points.iter().map(|&xi| cell.map_to_physical(xi)).collect();
            let tr = trace_at(&basis, cell, &points);
            for q in 0..points.len() {
                let w = rule.weights[q] * cell.measure();
                for c in 0..2 {
                    for k in 0..ns {
                        let g = tr.gradients[q][k];
                        div[c * ns + k] = g[c];
                        let grad = vector_gradient(c, g);
                        eps[c * ns + k] = 0.5 * (grad + grad.transpose());
                    }
                }
                for a in 0..nd {
                    for b in 0..nd {
                        let e = eps[a].component_mul(&eps[b]).sum();
                        local[a * nd + b] += w * (material.lambda * (div[a] * div[b]) + 2.0 * material.mu * e);
                    }
                }
            }
            let dofs: Vec<usize> = dofmap.cell_dofs(cell.index).collect();
            builder.add_block(&dofs, &dofs, &local);
        }
    }

    let face_terms = terms.consistency || terms.symmetry || terms.penalty;
    if face_terms {
        let rule = gauss_legendre(p + 1)?;
        for face in mesh.faces() {
            if face.kind == FaceKind::NeumannBoundary {
                continue;
            }
            let gamma = penalty_value(face, material, config, p);
            let (points, weights) = face_points(face, &rule);
            let mut cells = vec![face.cell_plus];
            cells.extend(face.cell_minus);
            let n_sides = cells.len();
            let avg_weight = if n_sides == 2 { 0.5 } else { 1.0 };
            let traces: Vec<CellTrace> = cells.iter().map(|&c| trace_at(&basis, &mesh.cells()[c], &points)).collect();

            let m = n_sides * nd;
            let mut local = vec![0.0; m * m];
            let mut jump = vec![Vec2::zeros(); m];
            let mut avg = vec![Vec2::zeros(); m];
            for q in 0..points.len() {
                for (side, tr) in traces.iter().enumerate() {
                    let sign = if side == 0 { 1.0 } else { -1.0 };
                    for c in 0..2 {
                        for k in 0..ns {
                            let a = side * nd + c * ns + k;
                            let mut value = Vec2::zeros();
                            value[c] = tr.values[q][k];
                            jump[a] = sign * value;
                            let grad = vector_gradient(c, tr.gradients[q][k]);
                            avg[a] = avg_weight * material.stress(&grad).apply(&face.normal);
                        }
                    }
                }
                let w = weights[q];
                for i in 0..m {
                    for j in 0..m {
                        let mut v = 0.0;
                        if terms.consistency {
                            v -= avg[j].dot(&jump[i]);
                        }
                        if terms.symmetry {
                            v -= s * jump[j].dot(&avg[i]);
                        }
                        if terms.penalty {
                            v += gamma * jump[j].dot(&jump[i]);
                        }
                        local[i * m + j] += w * v;
                    }
                }
            }
            let dofs: Vec<usize> = cells.iter().flat_map(|&c| dofmap.cell_dofs(c)).collect();
            builder.add_block(&dofs, &dofs, &local);
        }
    }
    Ok(builder.build())
}

/// Load vector at time `t`: ∫ f·w, the Dirichlet lifting
/// ∫_F g·(γ_F w − S t_F(w)) on Dirichlet faces and ∫_F h·w on Neumann faces.
pub fn assemble_dg_rhs<P: ElasticProblem + ?Sized>(
    mesh: &StructuredQuadMesh,
    dofmap: &DgDofMap,
    material: &IsotropicMaterial,
    config: &PenaltyConfig,
    problem: &P,
    t: f64,
) -> Result<Vec<f64>> {
    dofmap.check(mesh)?;
    let p = dofmap.degree();
    let basis = TensorLagrange::new(p)?;
    let ns = basis.n_shapes();
    let s = config.consistency();
    let mut rhs = vec![0.0; dofmap.n_dofs()];

    let rule = TensorRule::gauss(p + 1)?;
    for cell in mesh.cells() {
        let base = dofmap.cell_dofs(cell.index).start;
        for (q, &xi) in rule.points.iter().enumerate() {
            let x = cell.map_to_physical(xi);
            let f = problem.forcing(t, x);
            let w = rule.weights[q] * cell.measure();
            let v = basis.values_at(xi);
            for c in 0..2 {
                for k in 0..ns {
                    rhs[base + c * ns + k] += w * f[c] * v[k];
                }
            }
        }
    }

    let line = gauss_legendre(p + 1)?;
    for face in mesh.boundary_faces() {
        let cell = &mesh.cells()[face.cell_plus];
        let base = dofmap.cell_dofs(cell.index).start;
        let (points, weights) = face_points(face, &line);
        let tr = trace_at(&basis, cell, &points);
        for (q, &x) in points.iter().enumerate() {
            let w = weights[q];
            match face.kind {
                FaceKind::DirichletBoundary => {
                    let g = problem.dirichlet(t, x);
                    let gamma = penalty_value(face, material, config, p);
                    for c in 0..2 {
                        for k in 0..ns {
                            let mut value = Vec2::zeros();
                            value[c] = tr.values[q][k];
                            let traction = material.stress(&vector_gradient(c, tr.gradients[q][k])).apply(&face.normal);
                            rhs[base + c * ns + k] += w * g.dot(&(gamma * value - s * traction));
                        }
                    }
                }
                FaceKind::NeumannBoundary => {
                    let h = problem.neumann(t, x, face.normal);
                    for c in 0..2 {
                        for k in 0..ns {
                            rhs[base + c * ns + k] += w * h[c] * tr.values[q][k];
                        }
                    }
                }
                FaceKind::Interior => unreachable!("boundary_faces yields boundary faces only"),
            }
        }
    }
    Ok(rhs)
}

/// Nodal interpolation of a vector field into the dG space.
pub fn interpolate(mesh: &StructuredQuadMesh, dofmap: &DgDofMap, f: impl Fn(Vec2) -> Vec2) -> Vec<f64> {
    let basis = TensorLagrange::new(dofmap.degree()).expect("dof map degree is valid");
    let mut out = vec![0.0; dofmap.n_dofs()];
    for cell in mesh.cells() {
        for k in 0..basis.n_shapes() {
            let value = f(cell.map_to_physical(basis.node(k)));
            for c in 0..2 {
                out[dofmap.global(cell.index, c, k)] = value[c];
            }
        }
    }
    out
}

/// Evaluates a dG field at reference point `xi` of `cell`.
pub fn evaluate(basis: &TensorLagrange, dofmap: &DgDofMap, coefficients: &[f64], cell: usize, xi: Vec2) -> Vec2 {
    let v = basis.values_at(xi);
    let base = dofmap.cell_dofs(cell).start;
    let ns = basis.n_shapes();
    let mut out = Vec2::zeros();
    for c in 0..2 {
        out[c] = (0..ns).map(|k| coefficients[base + c * ns + k] * v[k]).sum();
    }
    out
}

/// Jump [v]₀: v⁺ − v⁻ on interior faces, v⁺ on the boundary.
pub fn jump0(kind: FaceKind, plus: Vec2, minus: Option<Vec2>) -> Result<Vec2> {
    match (kind, minus) {
        (FaceKind::Interior, Some(m)) => Ok(plus - m),
        (FaceKind::Interior, None) => Err(Error::Trace("interior face needs a minus trace")),
        (_, None) => Ok(plus),
        (_, Some(_)) => Err(Error::Trace("boundary face has no minus trace")),
    }
}

/// Jump [v]: v⁺ − v⁻ on interior faces, v⁺ − g on the boundary.
pub fn jump(kind: FaceKind, plus: Vec2, minus: Option<Vec2>, g: Vec2) -> Result<Vec2> {
    let j = jump0(kind, plus, minus)?;
    Ok(if kind.is_boundary() { j - g } else { j })
}

/// Average {t}: ½(t⁺ + t⁻) on interior faces, t⁺ on the boundary. Both
/// tractions must be taken with the shared face normal.
pub fn average(kind: FaceKind, plus: Vec2, minus: Option<Vec2>) -> Result<Vec2> {
    match (kind, minus) {
        (FaceKind::Interior, Some(m)) => Ok(0.5 * (plus + m)),
        (FaceKind::Interior, None) => Err(Error::Trace("interior face needs a minus trace")),
        (_, None) => Ok(plus),
        (_, Some(_)) => Err(Error::Trace("boundary face has no minus trace")),
    }
}
