//! Gauss and Gauss–Lobatto rules on the unit interval, and their tensor
//! products on the unit square.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::Vec2;

/// Quadrature rule on [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    /// Highest polynomial degree integrated exactly.
    pub exactness: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Legendre polynomial P_n and its derivative at `x` in [-1, 1].
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = if (1.0 - x * x).abs() < 1e-300 {
        // P'_n(±1) = (±1)^(n-1) n(n+1)/2
        x.powi(n as i32 - 1) * nf * (nf + 1.0) / 2.0
    } else {
        nf * (p0 - x * p1) / (1.0 - x * x)
    };
    (p1, dp)
}

/// `n`-point Gauss–Legendre rule on [0, 1], exact to degree 2n-1.
pub fn gauss_legendre(n: usize) -> Result<QuadratureRule> {
    if n == 0 {
        return Err(Error::QuadratureSize {
            rule: "Gauss-Legendre",
            min: 1,
            requested: n,
        });
    }
    let mut points = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        // Roots come out in descending order; store ascending on [0, 1].
        points[n - 1 - i] = 0.5 * (x + 1.0);
        weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    symmetrize(&mut points, &mut weights);
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    Ok(QuadratureRule {
        points,
        weights,
        exactness: 2 * n - 1,
    })
}

/// `n`-point Gauss–Lobatto rule on [0, 1] (end points included), exact to
/// degree 2n-3.
pub fn gauss_lobatto(n: usize) -> Result<QuadratureRule> {
    if n < 2 {
        return Err(Error::QuadratureSize {
            rule: "Gauss-Lobatto",
            min: 2,
            requested: n,
        });
    }
    let m = n - 1;
    let mf = m as f64;
    let mut points = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Newton on (1 - x^2) P'_m(x), starting from Chebyshev–Gauss–Lobatto nodes.
        let mut x = (PI * i as f64 / mf).cos();
        if i > 0 && i < m {
            for _ in 0..100 {
                let (p, _) = legendre(m, x);
                let (pm1, _) = legendre(m - 1, x);
                // q = P'_m up to the factor m / (1 - x^2)
                let q = pm1 - x * p;
                // d/dx (P_{m-1} - x P_m) = -(m + 1) P_m
                let dq = -(mf + 1.0) * p;
                let dx = q / dq;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
        }
        let (p, _) = legendre(m, x);
        points[n - 1 - i] = 0.5 * (x + 1.0);
        weights[n - 1 - i] = 1.0 / (mf * (mf + 1.0) * p * p);
    }
    points[0] = 0.0;
    points[n - 1] = 1.0;
    symmetrize(&mut points, &mut weights);
    Ok(QuadratureRule {
        points,
        weights,
        exactness: 2 * n - 3,
    })
}

/// Enforces the mirror symmetry about 1/2 that both rule families have, so
/// that points/weights are bitwise symmetric.
fn symmetrize(points: &mut [f64], weights: &mut [f64]) {
    let n = points.len();
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let x = 0.5 * (points[i] + (1.0 - points[j]));
        points[i] = x;
        points[j] = 1.0 - x;
        let w = 0.5 * (weights[i] + weights[j]);
        weights[i] = w;
        weights[j] = w;
    }
    if n % 2 == 1 {
        points[n / 2] = 0.5;
    }
}

/// Tensor-product rule on the unit square.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorRule {
    pub points: Vec<Vec2>,
    pub weights: Vec<f64>,
    pub exactness: usize,
}

impl TensorRule {
    pub fn new(line: &QuadratureRule) -> Self {
        let mut points = Vec::with_capacity(line.len() * line.len());
        let mut weights = Vec::with_capacity(line.len() * line.len());
        for (&y, &wy) in line.points.iter().zip(&line.weights) {
            for (&x, &wx) in line.points.iter().zip(&line.weights) {
                points.push(Vec2::new(x, y));
                weights.push(wx * wy);
            }
        }
        Self {
            points,
            weights,
            exactness: line.exactness,
        }
    }

    pub fn gauss(n: usize) -> Result<Self> {
        Ok(Self::new(&gauss_legendre(n)?))
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn lobatto_two_points() {
        let r = gauss_lobatto(2).unwrap();
        assert_eq!(r.points, vec![0.0, 1.0]);
        assert_eq!(r.weights, vec![0.5, 0.5]);
        assert!(close(r.integrate(|t| t), 0.5, 1e-16));
    }

    #[test]
    fn lobatto_three_points() {
        let r = gauss_lobatto(3).unwrap();
        for (a, b) in r.points.iter().zip([0.0, 0.5, 1.0]) {
            assert!(close(*a, b, 1e-15));
        }
        for (a, b) in r.weights.iter().zip([1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0]) {
            assert!(close(*a, b, 1e-15));
        }
    }

    #[test]
    fn gauss_small_rules() {
        let r = gauss_legendre(1).unwrap();
        assert_eq!(r.points, vec![0.5]);
        assert!(close(r.weights[0], 1.0, 1e-15));
        let r = gauss_legendre(2).unwrap();
        let d = 0.5 / 3f64.sqrt();
        assert!(close(r.points[0], 0.5 - d, 1e-15));
        assert!(close(r.points[1], 0.5 + d, 1e-15));
        assert!(close(r.weights[0], 0.5, 1e-15) && close(r.weights[1], 0.5, 1e-15));
        let r = gauss_legendre(3).unwrap();
        assert!(close(r.integrate(|t| t.powi(5)), 1.0 / 6.0, 1e-15));
    }

    #[test]
    fn size_errors() {
        assert!(gauss_legendre(0).is_err());
        assert!(gauss_lobatto(1).is_err());
        assert!(gauss_lobatto(0).is_err());
    }

    #[test]
    fn monomial_exactness() {
        for n in 1..=10 {
            let g = gauss_legendre(n).unwrap();
            let s: f64 = g.weights.iter().sum();
            assert!(close(s, 1.0, 1e-14));
            for k in 0..=g.exactness {
                let exact = 1.0 / (k as f64 + 1.0);
                assert!(close(g.integrate(|t| t.powi(k as i32)), exact, 1e-12), "gauss n={n} k={k}");
            }
            assert!(g.weights.iter().all(|&w| w > 0.0));
        }
        for n in 2..=10 {
            let g = gauss_lobatto(n).unwrap();
            for k in 0..=g.exactness {
                let exact = 1.0 / (k as f64 + 1.0);
                assert!(close(g.integrate(|t| t.powi(k as i32)), exact, 1e-12), "lobatto n={n} k={k}");
            }
            assert!(g.weights.iter().all(|&w| w > 0.0));
            // Not exact one degree higher.
            let k = g.exactness + 1;
            assert!(!close(g.integrate(|t| t.powi(k as i32)), 1.0 / (k as f64 + 1.0), 1e-12));
        }
    }

    #[test]
    fn tensor_rule_integrates_products() {
        let r = TensorRule::gauss(3).unwrap();
        let s: f64 = r.weights.iter().sum();
        assert!(close(s, 1.0, 1e-14));
        let v: f64 = r.points.iter().zip(&r.weights).map(|(p, w)| w * p.x.powi(5) * p.y.powi(4)).sum();
        assert!(close(v, 1.0 / 30.0, 1e-14));
    }
}
