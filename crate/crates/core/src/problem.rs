//! Data of an initial-boundary value problem for the elastic wave system.

use crate::elasticity::{manufactured_forcing, manufactured_solution, IsotropicMaterial};
use crate::{Mat2, Vec2};

/// Forcing, boundary and initial data.
///
/// Dirichlet data `g` also supplies its first two time derivatives, which
/// the continuous discretization needs once constrained values are
/// eliminated from the system.
pub trait ElasticProblem: Sync {
    fn forcing(&self, t: f64, x: Vec2) -> Vec2;

    fn dirichlet(&self, t: f64, x: Vec2) -> Vec2;

    fn dirichlet_velocity(&self, _t: f64, _x: Vec2) -> Vec2 {
        Vec2::zeros()
    }

    fn dirichlet_acceleration(&self, _t: f64, _x: Vec2) -> Vec2 {
        Vec2::zeros()
    }

    /// Prescribed traction h on Neumann faces.
    fn neumann(&self, _t: f64, _x: Vec2, _normal: Vec2) -> Vec2 {
        Vec2::zeros()
    }

    fn initial_displacement(&self, x: Vec2) -> Vec2 {
        self.dirichlet(0.0, x)
    }

    fn initial_velocity(&self, x: Vec2) -> Vec2 {
        self.dirichlet_velocity(0.0, x)
    }
}

/// Travelling wave u = (sin 2π(t + x₁), sin 2π(t + x₂)) with matching
/// forcing, Dirichlet and Neumann data.
#[derive(Debug, Clone, Copy)]
pub struct ManufacturedWave {
    pub material: IsotropicMaterial,
}

impl ManufacturedWave {
    pub fn new(material: IsotropicMaterial) -> Self {
        Self { material }
    }

    pub fn displacement(&self, t: f64, x: Vec2) -> Vec2 {
        manufactured_solution(t, x).0
    }

    pub fn velocity(&self, t: f64, x: Vec2) -> Vec2 {
        manufactured_solution(t, x).1
    }

    fn gradient(&self, t: f64, x: Vec2) -> Mat2 {
        let (_, v) = manufactured_solution(t, x);
        // ∂u_i/∂x_i = ∂u_i/∂t, off-diagonal entries vanish
        Mat2::new(v.x, 0.0, 0.0, v.y)
    }
}

impl ElasticProblem for ManufacturedWave {
    fn forcing(&self, t: f64, x: Vec2) -> Vec2 {
        manufactured_forcing(&self.material, t, x)
    }

    fn dirichlet(&self, t: f64, x: Vec2) -> Vec2 {
        self.displacement(t, x)
    }

    fn dirichlet_velocity(&self, t: f64, x: Vec2) -> Vec2 {
        self.velocity(t, x)
    }

    fn dirichlet_acceleration(&self, t: f64, x: Vec2) -> Vec2 {
        -4.0 * std::f64::consts::PI.powi(2) * self.displacement(t, x)
    }

    fn neumann(&self, t: f64, x: Vec2, normal: Vec2) -> Vec2 {
        self.material.stress(&self.gradient(t, x)).apply(&normal)
    }
}

/// Static affine displacement u(x) = B x + c with no body force.
#[derive(Debug, Clone, Copy)]
pub struct AffinePatch {
    pub material: IsotropicMaterial,
    pub gradient: Mat2,
    pub offset: Vec2,
}

impl AffinePatch {
    /// u = (x₁ + 2x₂, 3x₁)
    pub fn standard(material: IsotropicMaterial) -> Self {
        Self {
            material,
            gradient: Mat2::new(1.0, 2.0, 3.0, 0.0),
            offset: Vec2::zeros(),
        }
    }

    pub fn displacement(&self, x: Vec2) -> Vec2 {
        self.gradient * x + self.offset
    }
}

impl ElasticProblem for AffinePatch {
    fn forcing(&self, _t: f64, _x: Vec2) -> Vec2 {
        Vec2::zeros()
    }

    fn dirichlet(&self, _t: f64, x: Vec2) -> Vec2 {
        self.displacement(x)
    }

    fn neumann(&self, _t: f64, _x: Vec2, normal: Vec2) -> Vec2 {
        self.material.stress(&self.gradient).apply(&normal)
    }
}

/// Free vibration: homogeneous boundary data, no forcing, given initial state.
pub struct FreeVibration<U, V> {
    pub displacement: U,
    pub velocity: V,
}

impl<U, V> ElasticProblem for FreeVibration<U, V>
where
    U: Fn(Vec2) -> Vec2 + Sync,
    V: Fn(Vec2) -> Vec2 + Sync,
{
    fn forcing(&self, _t: f64, _x: Vec2) -> Vec2 {
        Vec2::zeros()
    }

    fn dirichlet(&self, _t: f64, _x: Vec2) -> Vec2 {
        Vec2::zeros()
    }

    fn initial_displacement(&self, x: Vec2) -> Vec2 {
        (self.displacement)(x)
    }

    fn initial_velocity(&self, x: Vec2) -> Vec2 {
        (self.velocity)(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manufactured_gradient_matches_finite_differences() {
        let w = ManufacturedWave::new(IsotropicMaterial::reference());
        let (t, x) = (0.37, Vec2::new(0.2, 0.6));
        let h = 1e-6;
        let g = w.gradient(t, x);
        let dx = (w.displacement(t, x + Vec2::new(h, 0.0)) - w.displacement(t, x - Vec2::new(h, 0.0))) / (2.0 * h);
        let dy = (w.displacement(t, x + Vec2::new(0.0, h)) - w.displacement(t, x - Vec2::new(0.0, h))) / (2.0 * h);
        let fd = Mat2::new(dx.x, dy.x, dx.y, dy.y);
        assert!((g - fd).amax() < 1e-6);
    }

    #[test]
    fn dirichlet_acceleration_is_second_time_derivative() {
        let w = ManufacturedWave::new(IsotropicMaterial::reference());
        let (t, x) = (0.61, Vec2::new(0.9, 0.15));
        let h = 1e-5;
        let fd = (w.dirichlet_velocity(t + h, x) - w.dirichlet_velocity(t - h, x)) / (2.0 * h);
        assert!((fd - w.dirichlet_acceleration(t, x)).amax() < 1e-4);
    }
}
