//! Space-time discretizations of the 2D elastic wave equation.
//!
//! The crate assembles interior penalty discontinuous Galerkin (SIPG, NIPG,
//! IIPG) and continuous Q_p finite element operators on structured
//! quadrilateral meshes, combines them with a continuous piecewise linear
//! Galerkin method in time into per-interval linear systems, and studies
//! the condition numbers and eigenvalue distributions of those systems.
//!
//! The guide in `book/` walks through the pieces; its code listings are
//! compiled and run as doc-tests of this crate.

pub mod basis;
pub mod cg;
pub mod dg;
pub mod discretization;
pub mod elasticity;
pub mod error;
pub mod experiment;
pub mod krylov;
pub mod mesh;
pub mod problem;
pub mod quadrature;
pub mod sparse;
pub mod spectral;
pub mod timeslab;

pub use error::{Error, Result};

/// Two-component vector (points, displacements, normals).
pub type Vec2 = nalgebra::Vector2<f64>;
/// 2×2 tensor; gradients are stored as `g[(i, j)] = ∂u_i/∂x_j`.
pub type Mat2 = nalgebra::Matrix2<f64>;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/mesh.md")]
    mod mesh {}
    #[doc = include_str!("../../../book/src/shapes.md")]
    mod shapes {}
    #[doc = include_str!("../../../book/src/elasticity.md")]
    mod elasticity {}
    #[doc = include_str!("../../../book/src/interior_penalty.md")]
    mod interior_penalty {}
    #[doc = include_str!("../../../book/src/continuous.md")]
    mod continuous {}
    #[doc = include_str!("../../../book/src/time_slabs.md")]
    mod time_slabs {}
    #[doc = include_str!("../../../book/src/spectra.md")]
    mod spectra {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
