//! KL-divergence stealthiness of the linear attack `zt[k] = T zt[k-1] + S z[k]`.
//!
//! The transmitted sequence is a Gaussian AR(1) process; the nominal
//! innovation is white with variance `sigma_z^2`. All divergences are in nats.

use crate::attack::AttackParams;
use crate::error::{Error, Result};
use crate::numerics::{bisect, Bracket};
use crate::tolerance::Tolerances;
use crate::Scalar;

/// Per-step KL budget `epsilon >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StealthBudget<T> {
    epsilon: T,
}

impl<T: Scalar> StealthBudget<T> {
    pub fn new(epsilon: T) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon >= T::zero()) {
            return Err(Error::InvalidBudget(epsilon.to_f64_lossy()));
        }
        Ok(Self { epsilon })
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }
}

/// Positive roots of the boundary equation `kl_rate(T, S) = epsilon`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SBounds<T> {
    pub s_small: T,
    pub s_large: T,
}

impl<T: Scalar> SBounds<T> {
    /// Whether `|s|` lies in the feasible band `[s_small, s_large]`.
    pub fn contains(&self, s: T) -> bool {
        let m = s.abs();
        self.s_small <= m && m <= self.s_large
    }
}

fn check_attack<T: Scalar>(attack: &AttackParams<T>) -> Result<()> {
    let t = attack.t_coef;
    if !(t.abs() < T::one()) {
        return Err(Error::InfeasibleT {
            t: t.to_f64_lossy(),
            reason: "an epsilon-stealthy attack needs |T| < 1".into(),
        });
    }
    if attack.s_coef == T::zero() {
        return Err(Error::DegenerateAttack);
    }
    if !attack.s_coef.is_finite() {
        return Err(Error::Numerical(format!(
            "S = {} is not finite",
            attack.s_coef
        )));
    }
    Ok(())
}

/// Asymptotic KL rate `-1/2 - ln(S^2)/2 + S^2 / (2 (1 - T^2))`.
pub fn kl_rate<T: Scalar>(attack: &AttackParams<T>) -> Result<T> {
    check_attack(attack)?;
    let half = T::lit(0.5);
    let s2 = attack.s_coef * attack.s_coef;
    let t2 = attack.t_coef * attack.t_coef;
    Ok(-half - half * s2.ln() + s2 / (T::lit(2.0) * (T::one() - t2)))
}

/// Exact KL divergence `D(zt[1..k] || z[1..k])` for the attack started
/// from `zt[0] = 0`.
///
/// The attacked sequence is a unit-lower-triangular transform of the
/// innovations scaled by `S`, so its covariance determinant is
/// `(S^2 sigma_z^2)^k`, and its marginal variances are
/// `S^2 sigma_z^2 (1 - T^(2i)) / (1 - T^2)`. The innovation variance cancels.
pub fn finite_horizon_kl<T: Scalar>(attack: &AttackParams<T>, horizon: usize) -> Result<T> {
    check_attack(attack)?;
    if horizon == 0 {
        return Err(Error::InvalidConfig("horizon must be at least 1".into()));
    }
    let k = T::from_usize(horizon).unwrap();
    let s2 = attack.s_coef * attack.s_coef;
    let t2 = attack.t_coef * attack.t_coef;
    let m = T::one() - t2;
    // sum_{i=1..k} (1 - t2^i) = k - t2 (1 - t2^k) / (1 - t2)
    let tail = if t2 == T::zero() {
        T::zero()
    } else {
        t2 * (T::one() - t2.powi(horizon.min(i32::MAX as usize) as i32)) / m
    };
    let trace = s2 / m * (k - tail);
    Ok(T::lit(0.5) * (trace - k - k * s2.ln()))
}

/// Largest `|T|` for which some `S` meets the budget: `sqrt(1 - e^(-2 eps))`.
pub fn max_feasible_t<T: Scalar>(budget: &StealthBudget<T>) -> T {
    (-(T::lit(-2.0) * budget.epsilon()).exp_m1())
        .max(T::zero())
        .sqrt()
}

/// `kl_rate(T, S) - epsilon`, the signed distance from the constraint boundary.
pub fn boundary_residual<T: Scalar>(t: T, s: T, budget: &StealthBudget<T>) -> Result<T> {
    Ok(kl_rate(&AttackParams::new(t, s))? - budget.epsilon())
}

pub fn solve_s_bounds<T: Scalar>(t: T, budget: &StealthBudget<T>) -> Result<SBounds<T>> {
    solve_s_bounds_with(t, budget, &Tolerances::default())
}

/// Both positive roots of `kl_rate(T, S) = epsilon` in `S`.
///
/// With `u = S^2` and `m = 1 - T^2` the boundary reads
/// `u - m ln u = m (1 + 2 eps)`. The left side is convex with its minimum at
/// `u = m`, so each branch is monotone and bisection on either side of `m`
/// always converges. Roots are refined to full working precision.
pub fn solve_s_bounds_with<T: Scalar>(
    t: T,
    budget: &StealthBudget<T>,
    tol: &Tolerances,
) -> Result<SBounds<T>> {
    let eps = budget.epsilon();
    let t_max = max_feasible_t(budget);
    let slack = tol.boundary::<T>();
    if !t.is_finite() || t.abs() > t_max + slack {
        return Err(Error::InfeasibleT {
            t: t.to_f64_lossy(),
            reason: format!("budget epsilon = {eps} allows at most |T| = {t_max}"),
        });
    }
    if eps == T::zero() {
        return Ok(SBounds {
            s_small: T::one(),
            s_large: T::one(),
        });
    }

    let m = T::one() - t * t;
    let level = m * (T::one() + T::lit(2.0) * eps);
    let g = |u: T| u - m * u.ln() - level;

    if g(m) >= T::zero() {
        // |T| is at (or rounding-level above) the maximum: the roots merge.
        let s = m.sqrt();
        return Ok(SBounds {
            s_small: s,
            s_large: s,
        });
    }

    let lower_lo = m * (-(T::lit(2.0) + T::lit(2.0) * eps)).exp();
    let upper_hi = T::lit(2.0) * m * (T::one() + T::lit(2.0) * eps);
    let u_small = bisect(g, Bracket::new(g, lower_lo, m)?, T::zero())?.x;
    let u_large = bisect(g, Bracket::new(g, m, upper_hi)?, T::zero())?.x;

    let bounds = SBounds {
        s_small: u_small.sqrt(),
        s_large: u_large.sqrt(),
    };
    for s in [bounds.s_small, bounds.s_large] {
        let resid = boundary_residual(t, s, budget)?;
        if !(resid.abs() <= slack) {
            return Err(Error::Numerical(format!(
                "boundary root S = {s} has residual {resid}"
            )));
        }
    }
    Ok(bounds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    fn atk(t: f64, s: f64) -> AttackParams<f64> {
        AttackParams::new(t, s)
    }

    fn budget(eps: f64) -> StealthBudget<f64> {
        StealthBudget::new(eps).unwrap()
    }

    /// Gaussian KL computed from the explicit covariance matrix of
    /// zt[1..k]: zt = S L z with L[i][j] = T^(i-j) for j <= i.
    fn kl_matrix_oracle(t: f64, s: f64, sigma2: f64, k: usize) -> f64 {
        let l = DMatrix::from_fn(k, k, |i, j| {
            if j <= i {
                s * t.powi((i - j) as i32)
            } else {
                0.0
            }
        });
        let cov = &l * l.transpose() * sigma2;
        let logdet = cov
            .clone()
            .cholesky()
            .unwrap()
            .l()
            .diagonal()
            .map(|d| d.ln())
            .sum()
            * 2.0;
        let kf = k as f64;
        0.5 * (cov.trace() / sigma2 - kf - logdet + kf * sigma2.ln())
    }

    /// Direct summation over per-step marginal variances.
    fn kl_sum_oracle(t: f64, s: f64, k: usize) -> f64 {
        let (mut var, mut total) = (0.0, 0.0);
        for _ in 0..k {
            var = t * t * var + s * s;
            total += 0.5 * (var - 1.0 - (s * s).ln());
        }
        total
    }

    #[test]
    fn rate_examples() {
        assert_eq!(kl_rate(&atk(0.0, -1.0)).unwrap(), 0.0);
        assert_eq!(kl_rate(&atk(0.0, 1.0)).unwrap(), 0.0);
        let expect = -0.5 + 0.5 * 4f64.ln() + 0.25 / 1.28;
        assert_abs_diff_eq!(kl_rate(&atk(0.6, -0.5)).unwrap(), expect, epsilon = 1e-15);
        assert_abs_diff_eq!(expect, 0.38847, epsilon = 1e-4);
    }

    #[test]
    fn rate_errors() {
        assert!(matches!(
            kl_rate(&atk(1.0, -1.0)),
            Err(Error::InfeasibleT { .. })
        ));
        assert!(matches!(
            kl_rate(&atk(-1.5, -1.0)),
            Err(Error::InfeasibleT { .. })
        ));
        assert!(matches!(
            kl_rate(&atk(0.2, 0.0)),
            Err(Error::DegenerateAttack)
        ));
        assert!(finite_horizon_kl(&atk(0.2, 1.0), 0).is_err());
    }

    #[test]
    fn finite_horizon_examples() {
        for k in [1, 7, 100] {
            assert_eq!(finite_horizon_kl(&atk(0.0, -1.0), k).unwrap(), 0.0);
            let s: f64 = 1.7;
            let per_step = -0.5 - 0.5 * (s * s).ln() + s * s / 2.0;
            assert_abs_diff_eq!(
                finite_horizon_kl(&atk(0.0, s), k).unwrap(),
                k as f64 * per_step,
                epsilon = 1e-12 * k as f64
            );
        }
        let a = atk(0.6, -0.5);
        let d = finite_horizon_kl(&a, 500).unwrap();
        assert!((d - 500.0 * kl_rate(&a).unwrap()).abs() <= 0.31);
        assert_abs_diff_eq!(d, kl_sum_oracle(0.6, -0.5, 500), epsilon = 1e-9);
    }

    #[test]
    fn finite_horizon_matches_matrix_oracle() {
        for (t, s, sigma2) in [
            (0.6, -0.5, 0.72),
            (-0.3, 1.4, 2.0),
            (0.95, -0.2, 1.0),
            (0.0, 0.8, 0.3),
        ] {
            for k in [1, 2, 5, 30] {
                let got = finite_horizon_kl(&atk(t, s), k).unwrap();
                let oracle = kl_matrix_oracle(t, s, sigma2, k);
                assert_abs_diff_eq!(got, oracle, epsilon = 1e-9 * k as f64);
            }
        }
    }

    #[test]
    fn max_t_examples() {
        assert_eq!(max_feasible_t(&budget(0.0)), 0.0);
        assert_abs_diff_eq!(
            max_feasible_t(&budget(0.5)),
            (1.0 - (-1f64).exp()).sqrt(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(max_feasible_t(&budget(0.5)), 0.79512, epsilon = 1e-4);
        assert_abs_diff_eq!(max_feasible_t(&budget(1.0)), 0.92990, epsilon = 1e-4);
        assert_abs_diff_eq!(
            max_feasible_t(&budget(1.0)),
            (1.0 - (-2f64).exp()).sqrt(),
            epsilon = 1e-15
        );
    }

    /// Bisection oracle on u - ln u = 1 + 2 eps, independent of the solver.
    fn t0_roots_oracle(eps: f64) -> (f64, f64) {
        let solve = |mut lo: f64, mut hi: f64| {
            let g = |u: f64| u - u.ln() - (1.0 + 2.0 * eps);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if (g(mid) > 0.0) == (g(lo) > 0.0) {
                    lo = mid
                } else {
                    hi = mid
                }
            }
            0.5 * (lo + hi)
        };
        (solve(1e-300, 1.0), solve(1.0, 1e3))
    }

    #[test]
    fn s_bounds_examples() {
        let b = solve_s_bounds(0.0, &budget(0.0)).unwrap();
        assert_eq!((b.s_small, b.s_large), (1.0, 1.0));

        let b = solve_s_bounds(0.0, &budget(0.5)).unwrap();
        let (u_small, u_large) = t0_roots_oracle(0.5);
        assert_eq!(format!("{u_small:.5} {u_large:.5}"), "0.15859 3.14619");
        assert_abs_diff_eq!(b.s_small, u_small.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(b.s_large, u_large.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(b.s_small, 0.39823, epsilon = 1e-4);
        assert_abs_diff_eq!(b.s_large, 1.77375, epsilon = 1e-4);

        let t_max = (1.0 - (-1f64).exp()).sqrt();
        let b = solve_s_bounds(t_max, &budget(0.5)).unwrap();
        let merged = (-0.5f64).exp();
        assert_abs_diff_eq!(b.s_small, merged, epsilon = 1e-7);
        assert_abs_diff_eq!(b.s_large, merged, epsilon = 1e-7);
    }

    #[test]
    fn s_bounds_infeasible_t() {
        assert!(matches!(
            solve_s_bounds(0.1, &budget(0.0)),
            Err(Error::InfeasibleT { .. })
        ));
        assert!(matches!(
            solve_s_bounds(0.9, &budget(0.5)),
            Err(Error::InfeasibleT { .. })
        ));
        assert!(StealthBudget::new(-0.1).is_err());
        assert!(StealthBudget::new(f64::NAN).is_err());
    }

    proptest! {
        #[test]
        fn rate_symmetry_and_lower_bound(t in -0.99f64..0.99, s in prop_oneof![-5.0f64..-0.01, 0.01f64..5.0]) {
            let r = kl_rate(&atk(t, s)).unwrap();
            prop_assert_eq!(r, kl_rate(&atk(-t, s)).unwrap());
            prop_assert_eq!(r, kl_rate(&atk(t, -s)).unwrap());
            let floor = -0.5 * (1.0 - t * t).ln();
            prop_assert!(r >= floor - 1e-12);
            prop_assert!(floor >= 0.0);
        }

        #[test]
        fn finite_horizon_from_below(t in -0.95f64..0.95, s in 0.05f64..3.0, k in 1usize..2000) {
            let a = atk(t, s);
            let rate = kl_rate(&a).unwrap();
            let per = finite_horizon_kl(&a, k).unwrap() / k as f64;
            let bound = s * s * t * t / (2.0 * k as f64 * (1.0 - t * t).powi(2));
            prop_assert!(per <= rate + 1e-12);
            prop_assert!(rate - per <= bound + 1e-12);
            let next = finite_horizon_kl(&a, k + 1).unwrap() / (k + 1) as f64;
            prop_assert!(next >= per - 1e-12);
        }

        #[test]
        fn s_bounds_satisfy_boundary(eps in 0.001f64..3.0, frac in 0.0f64..1.0, inner in 0.001f64..0.999) {
            let b = budget(eps);
            let t = frac * max_feasible_t(&b);
            let roots = solve_s_bounds(t, &b).unwrap();
            prop_assert!(roots.s_small > 0.0 && roots.s_small <= roots.s_large);
            let mid = (1.0 - t * t).sqrt();
            prop_assert!(roots.s_small <= mid + 1e-12 && mid <= roots.s_large + 1e-12);
            for s in [roots.s_small, roots.s_large] {
                prop_assert!(boundary_residual(t, s, &b).unwrap().abs() <= 1e-10);
            }
            if roots.s_large - roots.s_small > 1e-6 {
                let s = roots.s_small + inner * (roots.s_large - roots.s_small);
                prop_assert!(kl_rate(&atk(t, -s)).unwrap() < eps);
            }
        }
    }
}
