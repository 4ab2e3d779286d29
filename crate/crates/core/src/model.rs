//! Scalar plant/sensor description and the steady-state Kalman filter.
//!
//! The plant is `x[k+1] = a x[k] + w[k]`, `y[k] = c x[k] + v[k]` with
//! `w ~ N(0, q)` and `v ~ N(0, r)`.

use crate::error::{Error, Result};
use crate::tolerance::Tolerances;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams<T> {
    pub a: T,
    pub c: T,
    pub q: T,
    pub r: T,
}

impl<T: Scalar> SystemParams<T> {
    pub fn new(a: T, c: T, q: T, r: T) -> Result<Self> {
        let params = Self { a, c, q, r };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let Self { a, c, q, r } = *self;
        if ![a, c, q, r].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameters(
                "all of a, c, q, r must be finite".into(),
            ));
        }
        if a.abs() >= T::one() {
            return Err(Error::InvalidParameters(format!(
                "|a| = {} violates the stability assumption |a| < 1",
                a.abs()
            )));
        }
        if r <= T::zero() {
            return Err(Error::InvalidParameters(format!(
                "r = {r} violates the measurement-noise assumption r > 0"
            )));
        }
        if q < T::zero() {
            return Err(Error::InvalidParameters(format!(
                "q = {q} violates the process-noise assumption q >= 0"
            )));
        }
        if c == T::zero() && q > T::zero() {
            return Err(Error::InvalidParameters(
                "c = 0 with q > 0 violates the detectability assumption".into(),
            ));
        }
        Ok(())
    }

    /// Variance of the stationary state distribution, `q / (1 - a^2)`.
    pub fn stationary_state_variance(&self) -> T {
        self.q / (T::one() - self.a * self.a)
    }

    /// One application of the a-priori Riccati map
    /// `p -> a^2 p r / (c^2 p + r) + q`.
    pub fn riccati_map(&self, p: T) -> T {
        let Self { a, c, q, r } = *self;
        a * a * p * r / (c * c * p + r) + q
    }
}

/// Steady-state quantities of the sensor's Kalman filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState<T> {
    /// A-priori error variance.
    pub p: T,
    pub k_gain: T,
    /// Innovation variance `c^2 p + r`.
    pub sigma_z2: T,
}

pub fn solve_riccati<T: Scalar>(params: &SystemParams<T>) -> Result<SteadyState<T>> {
    solve_riccati_with(params, &Tolerances::default())
}

/// Solves `c^2 p^2 + (r - c^2 q - a^2 r) p - q r = 0` for its nonnegative
/// root, then checks the result is a fixed point of the Riccati map.
pub fn solve_riccati_with<T: Scalar>(
    params: &SystemParams<T>,
    tol: &Tolerances,
) -> Result<SteadyState<T>> {
    params.validate()?;
    let SystemParams { a, c, q, r } = *params;
    let (two, four) = (T::lit(2.0), T::lit(4.0));

    let alpha = c * c;
    let beta = r - c * c * q - a * a * r;
    let p = if alpha == T::zero() {
        // Only reachable with q = 0 after validation; kept general.
        q / (T::one() - a * a)
    } else {
        let disc = (beta * beta + four * alpha * q * r).sqrt();
        if beta >= T::zero() {
            // Cancellation-free form of the same root.
            if q == T::zero() {
                T::zero()
            } else {
                two * q * r / (beta + disc)
            }
        } else {
            (disc - beta) / (two * alpha)
        }
    };
    // One polishing step; the map contracts near the fixed point.
    let p = params.riccati_map(p).max(T::zero());

    let residual = (p - params.riccati_map(p)).abs();
    if !(residual <= tol.riccati::<T>() * p.max(T::one())) {
        return Err(Error::Numerical(format!(
            "Riccati fixed-point residual {residual} exceeds tolerance"
        )));
    }

    let sigma_z2 = c * c * p + r;
    Ok(SteadyState {
        p,
        k_gain: p * c / sigma_z2,
        sigma_z2,
    })
}

/// `a^2 k^2 sigma_z^2 / ((1 - a^2) p)`: the factor that turns the attack
/// objective `J` into excess degradation, so that `eta = 1 + J * scale`.
pub fn degradation_scale<T: Scalar>(ss: &SteadyState<T>, params: &SystemParams<T>) -> Result<T> {
    let a = params.a;
    if a == T::zero() {
        return Ok(T::zero());
    }
    if ss.p <= T::zero() {
        return Err(Error::DegenerateSystem(
            "a-priori variance p = 0; the degradation ratio is undefined".into(),
        ));
    }
    Ok(a * a * ss.k_gain * ss.k_gain * ss.sigma_z2 / ((T::one() - a * a) * ss.p))
}
