//! Isotropic linear elasticity and the travelling-wave manufactured solution.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::{Mat2, Vec2};

/// Converts Young's modulus and Poisson's ratio to the Lamé parameters
/// (λ, μ), using the three-dimensional (plane-strain) relation.
pub fn lame_parameters(youngs_modulus: f64, poisson_ratio: f64) -> Result<(f64, f64)> {
    if !(youngs_modulus > 0.0) || !youngs_modulus.is_finite() {
        return Err(Error::Material(format!("Young's modulus must be positive (got {youngs_modulus})")));
    }
    if !(poisson_ratio > -1.0 && poisson_ratio < 0.5) {
        return Err(Error::Material(format!(
            "Poisson's ratio must lie in (-1, 1/2) (got {poisson_ratio})"
        )));
    }
    let (e, nu) = (youngs_modulus, poisson_ratio);
    let lambda = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
    let mu = e / (2.0 * (1.0 + nu));
    Ok((lambda, mu))
}

/// Symmetrized gradient ε(u) = (∇u + ∇uᵀ)/2, with `grad_u[(i, j)] = ∂u_i/∂x_j`.
pub fn strain(grad_u: &Mat2) -> Mat2 {
    0.5 * (grad_u + grad_u.transpose())
}

/// Symmetric 2×2 stress tensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StressState(pub Mat2);

impl StressState {
    pub fn tensor(&self) -> &Mat2 {
        &self.0
    }

    /// σ·n
    pub fn apply(&self, normal: &Vec2) -> Vec2 {
        self.0 * normal
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsotropicMaterial {
    pub youngs_modulus: f64,
    pub poisson_ratio: f64,
    pub density: f64,
    pub lambda: f64,
    pub mu: f64,
}

impl IsotropicMaterial {
    pub fn new(youngs_modulus: f64, poisson_ratio: f64, density: f64) -> Result<Self> {
        let (lambda, mu) = lame_parameters(youngs_modulus, poisson_ratio)?;
        if !(density > 0.0) || !density.is_finite() {
            return Err(Error::Material(format!("density must be positive (got {density})")));
        }
        Ok(Self {
            youngs_modulus,
            poisson_ratio,
            density,
            lambda,
            mu,
        })
    }

    /// Material card of the reference wave experiment: E = 70, ν = 0.34, ρ_s = 2.8.
    pub fn reference() -> Self {
        Self::new(70.0, 0.34, 2.8).expect("reference card is valid")
    }

    /// λ + 2μ, the P-wave modulus.
    pub fn p_wave_modulus(&self) -> f64 {
        self.lambda + 2.0 * self.mu
    }

    /// σ = λ tr(ε) I + 2μ ε.
    pub fn stress(&self, grad_u: &Mat2) -> StressState {
        let eps = strain(grad_u);
        StressState(self.lambda * eps.trace() * Mat2::identity() + 2.0 * self.mu * eps)
    }

    /// Traction σ(u)·n on a face with unit normal `normal`.
    pub fn traction(&self, grad_u: &Mat2, normal: &Vec2) -> Result<Vec2> {
        let len = normal.norm();
        if (len - 1.0).abs() > 1e-10 {
            return Err(Error::NonUnitNormal(len));
        }
        Ok(self.stress(grad_u).apply(normal))
    }
}

/// Exact displacement and velocity of the travelling wave
/// u = (sin 2π(t + x₁), sin 2π(t + x₂)).
pub fn manufactured_solution(t: f64, x: Vec2) -> (Vec2, Vec2) {
    let a = 2.0 * PI * (t + x.x);
    let b = 2.0 * PI * (t + x.y);
    (
        Vec2::new(a.sin(), b.sin()),
        2.0 * PI * Vec2::new(a.cos(), b.cos()),
    )
}

/// Body force that makes [`manufactured_solution`] satisfy
/// ρ_s ∂ₜv − ∇·σ(u) = f: f_i = 4π²(λ + 2μ − ρ_s) sin 2π(t + x_i).
pub fn manufactured_forcing(material: &IsotropicMaterial, t: f64, x: Vec2) -> Vec2 {
    let c = 4.0 * PI * PI * (material.p_wave_modulus() - material.density);
    let (u, _) = manufactured_solution(t, x);
    c * u
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn lame_conversion() {
        let (l, m) = lame_parameters(70.0, 0.34).unwrap();
        assert!(close(l, 55.50373, 5e-6) && close(m, 26.11940, 5e-6));
        assert_eq!(lame_parameters(1.0, 0.0).unwrap(), (0.0, 0.5));
        let (l, m) = lame_parameters(2.8, 0.4).unwrap();
        assert!(close(l, 4.0, 1e-13) && close(m, 1.0, 1e-13));
        assert!(lame_parameters(1.0, 0.5).is_err());
        assert!(lame_parameters(-1.0, 0.3).is_err());
        assert!(IsotropicMaterial::new(1.0, 0.3, 0.0).is_err());
    }

    fn material(lambda: f64, mu: f64) -> IsotropicMaterial {
        IsotropicMaterial {
            youngs_modulus: f64::NAN,
            poisson_ratio: f64::NAN,
            density: 1.0,
            lambda,
            mu,
        }
    }

    #[test]
    fn stress_examples() {
        let m = material(0.0, 0.5);
        assert_eq!(m.stress(&Mat2::zeros()).0, Mat2::zeros());
        assert_eq!(m.stress(&Mat2::identity()).0, Mat2::identity());
        let m = material(4.0, 1.0);
        let s = m.stress(&Mat2::new(1.0, 0.0, 0.0, 0.0));
        assert_eq!(s.0, Mat2::new(6.0, 0.0, 0.0, 4.0));
        let t = m.traction(&Mat2::new(1.0, 0.0, 0.0, 0.0), &Vec2::new(0.0, 1.0)).unwrap();
        assert_eq!(t, Vec2::new(0.0, 4.0));
    }

    #[test]
    fn traction_examples() {
        let m = material(0.0, 0.5);
        assert_eq!(m.traction(&Mat2::identity(), &Vec2::new(1.0, 0.0)).unwrap(), Vec2::new(1.0, 0.0));
        let rotation = Mat2::new(0.0, -0.3, 0.3, 0.0);
        let m = IsotropicMaterial::reference();
        assert_eq!(m.traction(&rotation, &Vec2::new(0.6, 0.8)).unwrap(), Vec2::zeros());
        assert!(matches!(
            m.traction(&Mat2::identity(), &Vec2::new(1.0, 1.0)),
            Err(Error::NonUnitNormal(_))
        ));
    }

    #[test]
    fn stress_is_linear_and_kills_rotations() {
        let m = IsotropicMaterial::reference();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let g1 = Mat2::from_fn(|_, _| rng.random_range(-1.0..1.0));
            let g2 = Mat2::from_fn(|_, _| rng.random_range(-1.0..1.0));
            let (a, b) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let lhs = m.stress(&(a * g1 + b * g2)).0;
            let rhs = a * m.stress(&g1).0 + b * m.stress(&g2).0;
            assert!((lhs - rhs).amax() < 1e-12 * (1.0 + lhs.amax()));
            let skew = g1 - g1.transpose();
            assert!(m.stress(&skew).0.amax() < 1e-14);
            let s = m.stress(&g1).0;
            assert_eq!(s[(0, 1)], s[(1, 0)]);
        }
    }

    #[test]
    fn manufactured_values() {
        let (u, v) = manufactured_solution(0.0, Vec2::zeros());
        assert_eq!(u, Vec2::zeros());
        assert!(close(v.x, 2.0 * PI, 1e-15) && close(v.y, 2.0 * PI, 1e-15));
        let x = Vec2::new(0.3, 0.71);
        let (u0, v0) = manufactured_solution(0.0, x);
        let (u1, v1) = manufactured_solution(1.0, x);
        assert!((u0 - u1).amax() < 1e-14 && (v0 - v1).amax() < 1e-12);
        let (u, v) = manufactured_solution(0.25, Vec2::zeros());
        assert!((u - Vec2::new(1.0, 1.0)).amax() < 1e-15);
        assert!(v.amax() < 1e-14);
    }

    #[test]
    fn forcing_examples() {
        let m = IsotropicMaterial::reference();
        let f = manufactured_forcing(&m, 0.0, Vec2::new(0.125, 0.0));
        let expected = 4.0 * PI * PI * 104.94254 * (PI / 4.0).sin();
        assert!(close(f.x, expected, 1e-3 * expected.abs()));
        assert!(f.y.abs() < 1e-12);

        let mut m = IsotropicMaterial::new(2.8, 0.4, 1.0).unwrap();
        m.density = m.p_wave_modulus();
        assert!(manufactured_forcing(&m, 0.3, Vec2::new(0.2, 0.9)).amax() < 1e-12);
    }

    /// Finite-difference residual of the displacement–velocity system at
    /// random space-time points.
    #[test]
    fn manufactured_data_satisfy_the_wave_system() {
        let m = IsotropicMaterial::reference();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let h = 1e-4;
        let grad = |t: f64, x: Vec2| {
            let dx = Vec2::new(h, 0.0);
            let dy = Vec2::new(0.0, h);
            let ux = (manufactured_solution(t, x + dx).0 - manufactured_solution(t, x - dx).0) / (2.0 * h);
            let uy = (manufactured_solution(t, x + dy).0 - manufactured_solution(t, x - dy).0) / (2.0 * h);
            Mat2::new(ux.x, uy.x, ux.y, uy.y)
        };
        for _ in 0..100 {
            let t = rng.random_range(0.0..1.0);
            let x = Vec2::new(rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
            // ∂ₜu = v
            let e = 1e-6;
            let dudt = (manufactured_solution(t + e, x).0 - manufactured_solution(t - e, x).0) / (2.0 * e);
            let v = manufactured_solution(t, x).1;
            assert!((dudt - v).norm() <= 1e-5 * v.norm().max(1.0));
            // ρ ∂ₜv − ∇·σ(u) − f
            let dvdt = (manufactured_solution(t + h, x).1 - manufactured_solution(t - h, x).1) / (2.0 * h);
            let sig = |x: Vec2| m.stress(&grad(t, x)).0;
            let dsx = (sig(x + Vec2::new(h, 0.0)) - sig(x - Vec2::new(h, 0.0))) / (2.0 * h);
            let dsy = (sig(x + Vec2::new(0.0, h)) - sig(x - Vec2::new(0.0, h))) / (2.0 * h);
            let div = Vec2::new(dsx[(0, 0)] + dsy[(0, 1)], dsx[(1, 0)] + dsy[(1, 1)]);
            let f = manufactured_forcing(&m, t, x);
            let residual = m.density * dvdt - div - f;
            assert!(residual.norm() <= 1e-4 * f.norm().max(1.0), "residual {}", residual.norm());
        }
    }
}
