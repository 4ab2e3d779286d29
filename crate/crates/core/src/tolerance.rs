//! Numerical tolerances, kept in one place.

use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative bound on the Riccati fixed-point residual.
    pub riccati_rel: f64,
    /// Absolute interval width at which bisection stops.
    pub bisect_abs: f64,
    /// Residual allowed on the KL boundary equation for returned roots.
    pub boundary_residual: f64,
    /// Allowed |kl - epsilon| for solutions that sit on the constraint.
    pub active_constraint: f64,
    /// Grid size for stationary-point scans.
    pub grid_points: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            riccati_rel: 1e-10,
            bisect_abs: 1e-12,
            boundary_residual: 1e-10,
            active_constraint: 1e-9,
            grid_points: 2048,
        }
    }
}

impl Tolerances {
    /// Converts `value` to `T`, floored at a small multiple of the type's
    /// machine epsilon so that `f32` code paths stay satisfiable.
    pub fn scaled<T: Scalar>(value: f64, eps_multiple: f64) -> T {
        let floor = T::epsilon() * T::lit(eps_multiple);
        T::lit(value).max(floor)
    }

    pub fn riccati<T: Scalar>(&self) -> T {
        Self::scaled(self.riccati_rel, 64.0)
    }

    pub fn bisect<T: Scalar>(&self) -> T {
        Self::scaled(self.bisect_abs, 4.0)
    }

    pub fn boundary<T: Scalar>(&self) -> T {
        Self::scaled(self.boundary_residual, 256.0)
    }

    pub fn active<T: Scalar>(&self) -> T {
        Self::scaled(self.active_constraint, 256.0)
    }
}
