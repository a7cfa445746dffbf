//! Structured quadrilateral meshes of rectangular domains.
//!
//! Cells are numbered row by row (`j * nx + i`). Every face knows its plus
//! cell, which is always the adjacent cell with the smaller index, and its
//! unit normal points out of the plus cell.

use std::fmt;

use crate::error::{Error, Result};
use crate::Vec2;

/// Boundary condition type attached to a face.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FaceKind {
    Interior,
    DirichletBoundary,
    NeumannBoundary,
}

impl FaceKind {
    pub fn is_boundary(self) -> bool {
        self != FaceKind::Interior
    }
}

/// Position of a face relative to a cell, in the fixed local order
/// left, right, bottom, top.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LocalSide {
    Left,
    Right,
    Bottom,
    Top,
}

impl LocalSide {
    pub const ALL: [LocalSide; 4] = [
        LocalSide::Left,
        LocalSide::Right,
        LocalSide::Bottom,
        LocalSide::Top,
    ];

    /// Outward unit normal of this side of an axis-aligned cell.
    pub fn outward_normal(self) -> Vec2 {
        match self {
            LocalSide::Left => Vec2::new(-1.0, 0.0),
            LocalSide::Right => Vec2::new(1.0, 0.0),
            LocalSide::Bottom => Vec2::new(0.0, -1.0),
            LocalSide::Top => Vec2::new(0.0, 1.0),
        }
    }

    /// Axis orthogonal to the side (0 = x, 1 = y).
    pub fn normal_axis(self) -> usize {
        match self {
            LocalSide::Left | LocalSide::Right => 0,
            LocalSide::Bottom | LocalSide::Top => 1,
        }
    }
}

/// Boundary condition for each side of the rectangular domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryMarking {
    pub left: FaceKind,
    pub right: FaceKind,
    pub bottom: FaceKind,
    pub top: FaceKind,
}

impl BoundaryMarking {
    pub fn uniform(kind: FaceKind) -> Self {
        assert!(kind.is_boundary(), "boundary marking must be a boundary kind");
        Self {
            left: kind,
            right: kind,
            bottom: kind,
            top: kind,
        }
    }

    fn side(&self, side: LocalSide) -> FaceKind {
        match side {
            LocalSide::Left => self.left,
            LocalSide::Right => self.right,
            LocalSide::Bottom => self.bottom,
            LocalSide::Top => self.top,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub index: usize,
    /// Lower-left corner.
    pub origin: Vec2,
    pub extents: Vec2,
    /// Diameter h_K.
    pub diameter: f64,
    /// Face indices in local order left, right, bottom, top.
    pub faces: [usize; 4],
}

impl Cell {
    pub fn measure(&self) -> f64 {
        self.extents.x * self.extents.y
    }

    pub fn center(&self) -> Vec2 {
        self.origin + 0.5 * self.extents
    }

    /// Maps a reference point of the unit square to physical coordinates.
    pub fn map_to_physical(&self, reference: Vec2) -> Vec2 {
        self.origin + reference.component_mul(&self.extents)
    }

    /// Inverse of [`Cell::map_to_physical`].
    pub fn map_to_reference(&self, physical: Vec2) -> Vec2 {
        (physical - self.origin).component_div(&self.extents)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    pub index: usize,
    pub kind: FaceKind,
    pub cell_plus: usize,
    pub cell_minus: Option<usize>,
    /// Side of the plus cell this face occupies.
    pub side_plus: LocalSide,
    /// Unit normal, outward from the plus cell.
    pub normal: Vec2,
    /// Face length |F|.
    pub measure: f64,
    /// Cell extent orthogonal to the face, minimized over adjacent cells.
    pub h_f: f64,
    /// End points, ordered along the positive coordinate axis.
    pub vertices: [Vec2; 2],
}

impl Face {
    /// Point on the face at parameter `s` in [0, 1].
    pub fn point(&self, s: f64) -> Vec2 {
        self.vertices[0] + s * (self.vertices[1] - self.vertices[0])
    }

    /// Normal as seen from `cell`: the stored normal for the plus cell,
    /// its negation for the minus cell.
    pub fn normal_from(&self, cell: usize) -> Option<Vec2> {
        if cell == self.cell_plus {
            Some(self.normal)
        } else if self.cell_minus == Some(cell) {
            Some(-self.normal)
        } else {
            None
        }
    }
}

/// Axis-aligned quadrilateral partition of a rectangle.
#[derive(Debug, Clone)]
pub struct StructuredQuadMesh {
    pub nx: usize,
    pub ny: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    cells: Vec<Cell>,
    faces: Vec<Face>,
}

impl StructuredQuadMesh {
    /// Uniform `nx` x `ny` mesh of `[x_min, x_max] x [y_min, y_max]`.
    pub fn new(
        nx: usize,
        ny: usize,
        [x_min, x_max, y_min, y_max]: [f64; 4],
        boundary: BoundaryMarking,
    ) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::EmptyMesh { nx, ny });
        }
        if !(x_max > x_min && y_max > y_min) || ![x_min, x_max, y_min, y_max].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidDomain {
                x_min,
                x_max,
                y_min,
                y_max,
            });
        }
        let dx = (x_max - x_min) / nx as f64;
        let dy = (y_max - y_min) / ny as f64;
        let extents = Vec2::new(dx, dy);

        let mut cells: Vec<Cell> = (0..nx * ny)
            .map(|index| {
                let (i, j) = (index % nx, index / nx);
                Cell {
                    index,
                    origin: Vec2::new(x_min + i as f64 * dx, y_min + j as f64 * dy),
                    extents,
                    diameter: extents.norm(),
                    faces: [usize::MAX; 4],
                }
            })
            .collect();

        let mut faces = Vec::with_capacity(2 * nx * ny + nx + ny);
        for index in 0..nx * ny {
            let (i, j) = (index % nx, index / nx);
            // Left and bottom faces are created here only on the domain
            // boundary; interior ones were created as a neighbour's right/top.
            if i == 0 {
                let id = push_face(&mut faces, &cells[index], LocalSide::Left, None, boundary.side(LocalSide::Left));
                cells[index].faces[0] = id;
            }
            if j == 0 {
                let id = push_face(&mut faces, &cells[index], LocalSide::Bottom, None, boundary.side(LocalSide::Bottom));
                cells[index].faces[2] = id;
            }
            let right = (i + 1 < nx).then(|| index + 1);
            let kind = if right.is_some() { FaceKind::Interior } else { boundary.side(LocalSide::Right) };
            let id = push_face(&mut faces, &cells[index], LocalSide::Right, right, kind);
            cells[index].faces[1] = id;
            if let Some(r) = right {
                cells[r].faces[0] = id;
            }
            let top = (j + 1 < ny).then(|| index + nx);
            let kind = if top.is_some() { FaceKind::Interior } else { boundary.side(LocalSide::Top) };
            let id = push_face(&mut faces, &cells[index], LocalSide::Top, top, kind);
            cells[index].faces[3] = id;
            if let Some(t) = top {
                cells[t].faces[2] = id;
            }
        }

        Ok(Self {
            nx,
            ny,
            x_min,
            x_max,
            y_min,
            y_max,
            cells,
            faces,
        })
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn cell(&self, index: usize) -> Result<&Cell> {
        self.cells.get(index).ok_or(Error::UnknownCell(index))
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn interior_faces(&self) -> impl Iterator<Item = &Face> {
        self.faces.iter().filter(|f| f.kind == FaceKind::Interior)
    }

    pub fn boundary_faces(&self) -> impl Iterator<Item = &Face> {
        self.faces.iter().filter(|f| f.kind.is_boundary())
    }

    /// Global mesh size h = max h_K.
    pub fn h(&self) -> f64 {
        self.cells.iter().map(|c| c.diameter).fold(0.0, f64::max)
    }

    pub fn area(&self) -> f64 {
        (self.x_max - self.x_min) * (self.y_max - self.y_min)
    }

    /// The four faces of `cell` with their local side, ordered left, right,
    /// bottom, top.
    pub fn faces_of_cell(&self, cell: usize) -> Result<[(&Face, LocalSide); 4]> {
        let c = self.cell(cell)?;
        Ok(LocalSide::ALL.map(|side| {
            let face = &self.faces[c.faces[side as usize]];
            (face, side)
        }))
    }
}

fn push_face(faces: &mut Vec<Face>, plus: &Cell, side: LocalSide, minus: Option<usize>, kind: FaceKind) -> usize {
    let axis = side.normal_axis();
    let lo = plus.origin;
    let hi = plus.origin + plus.extents;
    let vertices = match side {
        LocalSide::Left => [lo, Vec2::new(lo.x, hi.y)],
        LocalSide::Right => [Vec2::new(hi.x, lo.y), hi],
        LocalSide::Bottom => [lo, Vec2::new(hi.x, lo.y)],
        LocalSide::Top => [Vec2::new(lo.x, hi.y), hi],
    };
    // Uniform grids: the neighbour shares the orthogonal extent.
    let index = faces.len();
    faces.push(Face {
        index,
        kind,
        cell_plus: plus.index,
        cell_minus: minus,
        side_plus: side,
        normal: side.outward_normal(),
        measure: plus.extents[1 - axis],
        h_f: plus.extents[axis],
        vertices,
    });
    index
}

/// Uniform `n` x `n` mesh of the unit square. All boundary faces are
/// Dirichlet when `dirichlet_all` is set, Neumann otherwise.
pub fn build_unit_square_mesh(n: usize, dirichlet_all: bool) -> Result<StructuredQuadMesh> {
    let kind = if dirichlet_all {
        FaceKind::DirichletBoundary
    } else {
        FaceKind::NeumannBoundary
    };
    StructuredQuadMesh::new(n, n, [0.0, 1.0, 0.0, 1.0], BoundaryMarking::uniform(kind))
}

impl fmt::Display for StructuredQuadMesh {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let interior = self.interior_faces().count();
        write!(
            f,
            "mesh {}x{} on [{}, {}]x[{}, {}]: cells={} faces={} (interior={} boundary={}) h={:.6e}",
            self.nx,
            self.ny,
            self.x_min,
            self.x_max,
            self.y_min,
            self.y_max,
            self.cells.len(),
            self.faces.len(),
            interior,
            self.faces.len() - interior,
            self.h()
        )
    }
}
