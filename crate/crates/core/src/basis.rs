//! Tensor-product Lagrange shape functions on the unit square.

use crate::error::{Error, Result};
use crate::mesh::Cell;
use crate::quadrature::TensorRule;
use crate::Vec2;

/// One-dimensional Lagrange basis on a set of distinct nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangeBasis1d {
    nodes: Vec<f64>,
}

impl LagrangeBasis1d {
    pub fn new(nodes: Vec<f64>) -> Self {
        Self { nodes }
    }

    /// Degree-`p` basis on equidistant nodes of [0, 1] (a single node at
    /// 1/2 for p = 0).
    pub fn equidistant(p: usize) -> Self {
        if p == 0 {
            return Self::new(vec![0.5]);
        }
        Self::new((0..=p).map(|i| i as f64 / p as f64).collect())
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, i: usize, x: f64) -> f64 {
        let xi = self.nodes[i];
        self.nodes
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &xj)| (x - xj) / (xi - xj))
            .product()
    }

    pub fn derivative(&self, i: usize, x: f64) -> f64 {
        let xi = self.nodes[i];
        let mut sum = 0.0;
        for (k, &xk) in self.nodes.iter().enumerate() {
            if k == i {
                continue;
            }
            let mut term = 1.0 / (xi - xk);
            for (j, &xj) in self.nodes.iter().enumerate() {
                if j != i && j != k {
                    term *= (x - xj) / (xi - xj);
                }
            }
            sum += term;
        }
        sum
    }
}

/// Q_p scalar basis on the unit square; shape `k = iy * (p + 1) + ix`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorLagrange {
    degree: usize,
    line: LagrangeBasis1d,
}

impl TensorLagrange {
    pub fn new(degree: usize) -> Result<Self> {
        if degree < 1 {
            return Err(Error::Degree { degree, min: 1 });
        }
        Ok(Self {
            degree,
            line: LagrangeBasis1d::equidistant(degree),
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_shapes(&self) -> usize {
        (self.degree + 1) * (self.degree + 1)
    }

    pub fn line(&self) -> &LagrangeBasis1d {
        &self.line
    }

    /// Reference coordinates of node `k`.
    pub fn node(&self, k: usize) -> Vec2 {
        let n = self.degree + 1;
        let nodes = self.line.nodes();
        Vec2::new(nodes[k % n], nodes[k / n])
    }

    pub fn nodes(&self) -> Vec<Vec2> {
        (0..self.n_shapes()).map(|k| self.node(k)).collect()
    }

    /// Values and reference gradients of all shapes at `xi`.
    pub fn eval(&self, xi: Vec2, values: &mut [f64], gradients: &mut [Vec2]) {
        let n = self.degree + 1;
        let vx: Vec<f64> = (0..n).map(|i| self.line.value(i, xi.x)).collect();
        let vy: Vec<f64> = (0..n).map(|i| self.line.value(i, xi.y)).collect();
        let dx: Vec<f64> = (0..n).map(|i| self.line.derivative(i, xi.x)).collect();
        let dy: Vec<f64> = (0..n).map(|i| self.line.derivative(i, xi.y)).collect();
        for iy in 0..n {
            for ix in 0..n {
                let k = iy * n + ix;
                values[k] = vx[ix] * vy[iy];
                gradients[k] = Vec2::new(dx[ix] * vy[iy], vx[ix] * dy[iy]);
            }
        }
    }

    pub fn values_at(&self, xi: Vec2) -> Vec<f64> {
        let mut v = vec![0.0; self.n_shapes()];
        let mut g = vec![Vec2::zeros(); self.n_shapes()];
        self.eval(xi, &mut v, &mut g);
        v
    }
}

/// Shape values and reference gradients tabulated at the points of a rule.
#[derive(Debug, Clone)]
pub struct ShapeSet {
    pub basis: TensorLagrange,
    pub nodes: Vec<Vec2>,
    /// `values[q][k]`
    pub values: Vec<Vec<f64>>,
    /// `gradients[q][k]`, with respect to reference coordinates.
    pub gradients: Vec<Vec<Vec2>>,
}

impl ShapeSet {
    pub fn degree(&self) -> usize {
        self.basis.degree()
    }

    pub fn n_shapes(&self) -> usize {
        self.basis.n_shapes()
    }
}

/// Tabulates the degree-`p` tensor Lagrange basis at the points of `rule`.
pub fn lagrange_shapes_2d(p: usize, rule: &TensorRule) -> Result<ShapeSet> {
    let basis = TensorLagrange::new(p)?;
    let ns = basis.n_shapes();
    let mut values = Vec::with_capacity(rule.len());
    let mut gradients = Vec::with_capacity(rule.len());
    for &x in &rule.points {
        let mut v = vec![0.0; ns];
        let mut g = vec![Vec2::zeros(); ns];
        basis.eval(x, &mut v, &mut g);
        values.push(v);
        gradients.push(g);
    }
    Ok(ShapeSet {
        nodes: basis.nodes(),
        basis,
        values,
        gradients,
    })
}

/// Chain rule for the axis-aligned affine cell map.
pub fn map_gradient_to_physical(cell: &Cell, reference: Vec2) -> Result<Vec2> {
    let e = cell.extents;
    if !(e.x > 0.0 && e.y > 0.0) {
        return Err(Error::DegenerateCell(e.x, e.y));
    }
    Ok(reference.component_div(&e))
}
