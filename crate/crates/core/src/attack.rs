//! Attack objective and the three attack strategies.
//!
//! The excess error the attack `(T, S)` induces at the remote estimator is
//! proportional to
//!
//! ```text
//! J(T, S) = (1 - S)^2 + T^2 S^2 / (1 - T^2)
//!           - 2 a T S (1 - S - T^2) / ((1 - T^2)(1 - a T))
//! ```
//!
//! and the degradation ratio is `eta = 1 + J * c0` with `c0` from
//! [`degradation_scale`]. Under a KL budget the maximizer sits on the
//! constraint boundary, which is parameterized by `S` via
//! `T = f(S) = sqrt(1 - S^2 / (2 eps + 1 + ln S^2))` for `S` in
//! `[-s_large(T = 0), -e^(-eps)]`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{degradation_scale, solve_riccati, SteadyState, SystemParams};
use crate::numerics::{bisect, grid_sign_scan};
use crate::stealth::{kl_rate, solve_s_bounds_with, StealthBudget};
use crate::tolerance::Tolerances;
use crate::Scalar;

/// The pair in `zt[k] = T zt[k-1] + S z[k]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackParams<T> {
    pub t_coef: T,
    pub s_coef: T,
}

impl<T: Scalar> AttackParams<T> {
    pub fn new(t_coef: T, s_coef: T) -> Self {
        Self { t_coef, s_coef }
    }

    /// `(0, 1)`: the transmitted innovation is left untouched.
    pub fn no_attack() -> Self {
        Self::new(T::zero(), T::one())
    }

    /// `(0, -1)`: flip the sign of every innovation.
    pub fn sign_flip() -> Self {
        Self::new(T::zero(), -T::one())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    Strict,
    Optimal,
    BaselineT0,
    Custom,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Strict => "strict",
            Strategy::Optimal => "optimal",
            Strategy::BaselineT0 => "baseline-t0",
            Strategy::Custom => "custom",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "strict" => Ok(Strategy::Strict),
            "optimal" => Ok(Strategy::Optimal),
            "baseline-t0" => Ok(Strategy::BaselineT0),
            "custom" => Ok(Strategy::Custom),
            other => Err(format!(
                "unknown strategy '{other}' (expected strict, optimal, baseline-t0 or custom)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackSolution<T> {
    pub params: AttackParams<T>,
    pub j_value: T,
    pub eta_analytic: T,
    /// Achieved KL rate, nats per step.
    pub kl: T,
    pub strategy: Strategy,
}

pub fn objective_j<T: Scalar>(attack: &AttackParams<T>, a: T) -> Result<T> {
    let AttackParams {
        t_coef: t,
        s_coef: s,
    } = *attack;
    if !(t.abs() < T::one()) {
        return Err(Error::InfeasibleT {
            t: t.to_f64_lossy(),
            reason: "the objective requires |T| < 1".into(),
        });
    }
    let one = T::one();
    let two = T::lit(2.0);
    let t2 = t * t;
    let m = one - t2;
    let at = one - a * t;
    if at == T::zero() {
        return Err(Error::Numerical(
            "a * T = 1 makes the objective singular".into(),
        ));
    }
    Ok((one - s) * (one - s) + t2 * s * s / m - two * a * t * s * (one - s - t2) / (m * at))
}

/// `eta = 1 + J(T, S) * c0`.
pub fn eta_of<T: Scalar>(
    attack: &AttackParams<T>,
    ss: &SteadyState<T>,
    params: &SystemParams<T>,
) -> Result<T> {
    let j = objective_j(attack, params.a)?;
    Ok(T::one() + j * degradation_scale(ss, params)?)
}

/// `[-s_large(T = 0), -e^(-eps)]`, the range of `S` covered by `T = f(S)`.
pub fn boundary_bracket<T: Scalar>(budget: &StealthBudget<T>) -> Result<(T, T)> {
    let s_omax = solve_s_bounds_with(T::zero(), budget, &Tolerances::default())?.s_large;
    let hi = -(-budget.epsilon()).exp();
    Ok((-s_omax.max(-hi), hi))
}

fn log_term<T: Scalar>(s: T, budget: &StealthBudget<T>) -> T {
    T::lit(2.0) * budget.epsilon() + T::one() + (s * s).ln()
}

fn check_in_bracket<T: Scalar>(s: T, budget: &StealthBudget<T>) -> Result<()> {
    let (lo, hi) = boundary_bracket(budget)?;
    let slack = T::lit(1e-12) * lo.abs().max(T::one());
    if !(s >= lo - slack && s <= hi + slack) {
        return Err(Error::Domain {
            s: s.to_f64_lossy(),
            lo: lo.to_f64_lossy(),
            hi: hi.to_f64_lossy(),
        });
    }
    Ok(())
}

fn f_unchecked<T: Scalar>(s: T, budget: &StealthBudget<T>) -> T {
    (T::one() - s * s / log_term(s, budget))
        .max(T::zero())
        .sqrt()
}

/// The nonnegative `T` that puts `(T, s)` on the constraint boundary.
pub fn f_of_s<T: Scalar>(s: T, budget: &StealthBudget<T>) -> Result<T> {
    check_in_bracket(s, budget)?;
    Ok(f_unchecked(s, budget))
}

fn j1_unchecked<T: Scalar>(s: T, budget: &StealthBudget<T>, a: T) -> T {
    let two = T::lit(2.0);
    let big_l = log_term(s, budget);
    let denom = T::one() - a * f_unchecked(s, budget);
    -(big_l - T::one()) - two * s / denom + two * big_l / denom
}

/// The objective restricted to the constraint boundary, `J(f(s), s)`.
pub fn j1_of_s<T: Scalar>(s: T, budget: &StealthBudget<T>, a: T) -> Result<T> {
    check_in_bracket(s, budget)?;
    Ok(j1_unchecked(s, budget, a))
}

fn dj1_unchecked<T: Scalar>(s: T, budget: &StealthBudget<T>, a: T) -> T {
    let two = T::lit(2.0);
    let big_l = log_term(s, budget);
    let f = f_unchecked(s, budget);
    let f_prime = -(s * (big_l - T::one()) / (big_l * big_l)) / f;
    let denom = s * (T::one() - a * f) * (T::one() - a * f);
    -two * (a * a * f * f + s - a * s * f - T::one()) / denom
        - two * ((s * s - s * big_l) * a * f_prime) / denom
}

/// Closed-form `dJ1/dS`. Diverges to `+inf` at the `T = 0` end of the
/// bracket, where `f` has a square-root singularity.
pub fn dj1_ds<T: Scalar>(s: T, budget: &StealthBudget<T>, a: T) -> Result<T> {
    check_in_bracket(s, budget)?;
    Ok(dj1_unchecked(s, budget, a))
}

/// Maximizer of `J` on the constraint boundary, with `T` carrying the sign
/// of `a`. Scans `dJ1/dS` for sign changes, refines each by bisection, and
/// compares `J1` at every stationary point and both bracket ends.
pub fn optimal_boundary_point<T: Scalar>(
    budget: &StealthBudget<T>,
    a: T,
    tol: &Tolerances,
) -> Result<AttackParams<T>> {
    if a == T::zero() {
        return Err(Error::DegenerateSystem(
            "a = 0: every attack leaves the estimation error unchanged".into(),
        ));
    }
    if !(a.abs() < T::one()) {
        return Err(Error::InvalidParameters(format!(
            "|a| = {} must be < 1",
            a.abs()
        )));
    }
    if budget.epsilon() == T::zero() {
        return Ok(AttackParams::sign_flip());
    }
    // J is invariant under (a, T) -> (-a, -T), so search with |a|.
    let a_abs = a.abs();
    let (lo, hi) = boundary_bracket(budget)?;
    let j1 = |s: T| j1_unchecked(s, budget, a_abs);
    let dj1 = |s: T| dj1_unchecked(s, budget, a_abs);

    let mut best_s = lo;
    let mut best_j = j1(lo);
    let mut consider = |s: T| {
        let j = j1(s);
        if j > best_j {
            best_j = j;
            best_s = s;
        }
    };
    consider(hi);
    for bracket in grid_sign_scan(dj1, lo, hi, tol.grid_points.max(2)) {
        let root = bisect(dj1, bracket, tol.bisect::<T>())?;
        consider(root.x);
    }

    let t = f_unchecked(best_s, budget);
    let t = if a < T::zero() { -t } else { t };
    Ok(AttackParams::new(t, best_s))
}

/// A system together with its steady state and degradation scale; the
/// entry point for solving attacks on a concrete plant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario<T> {
    pub params: SystemParams<T>,
    pub steady: SteadyState<T>,
    /// `c0` in `eta = 1 + J * c0`.
    pub scale: T,
    pub tol: Tolerances,
}

impl<T: Scalar> Scenario<T> {
    pub fn new(params: SystemParams<T>) -> Result<Self> {
        let steady = solve_riccati(&params)?;
        let scale = degradation_scale(&steady, &params)?;
        Ok(Self {
            params,
            steady,
            scale,
            tol: Tolerances::default(),
        })
    }

    pub fn with_tolerances(mut self, tol: Tolerances) -> Self {
        self.tol = tol;
        self
    }

    pub fn eta_of(&self, attack: &AttackParams<T>) -> Result<T> {
        Ok(T::one() + objective_j(attack, self.params.a)? * self.scale)
    }

    /// Evaluates an arbitrary attack pair.
    pub fn evaluate(
        &self,
        attack: AttackParams<T>,
        strategy: Strategy,
    ) -> Result<AttackSolution<T>> {
        let j_value = objective_j(&attack, self.params.a)?;
        Ok(AttackSolution {
            params: attack,
            j_value,
            eta_analytic: T::one() + j_value * self.scale,
            kl: kl_rate(&attack)?,
            strategy,
        })
    }

    /// Best strictly stealthy attack: flip the sign of the innovation.
    pub fn solve_strict(&self) -> AttackSolution<T> {
        self.evaluate(AttackParams::sign_flip(), Strategy::Strict)
            .expect("(0, -1) is always admissible")
    }

    /// Best memoryless (`T = 0`) attack under the budget.
    pub fn solve_baseline_t0(&self, budget: &StealthBudget<T>) -> Result<AttackSolution<T>> {
        let bounds = solve_s_bounds_with(T::zero(), budget, &self.tol)?;
        let sol = self.evaluate(
            AttackParams::new(T::zero(), -bounds.s_large),
            Strategy::BaselineT0,
        )?;
        self.check_active(&sol, budget)?;
        Ok(sol)
    }

    pub fn solve_optimal(&self, budget: &StealthBudget<T>) -> Result<AttackSolution<T>> {
        if budget.epsilon() == T::zero() {
            let strict = self.solve_strict();
            return Ok(AttackSolution {
                strategy: Strategy::Optimal,
                ..strict
            });
        }
        let point = optimal_boundary_point(budget, self.params.a, &self.tol)?;
        let sol = self.evaluate(point, Strategy::Optimal)?;
        self.check_active(&sol, budget)?;
        Ok(sol)
    }

    pub fn solve(
        &self,
        strategy: Strategy,
        budget: &StealthBudget<T>,
    ) -> Result<AttackSolution<T>> {
        match strategy {
            Strategy::Strict => Ok(self.solve_strict()),
            Strategy::Optimal => self.solve_optimal(budget),
            Strategy::BaselineT0 => self.solve_baseline_t0(budget),
            Strategy::Custom => Err(Error::InvalidConfig(
                "the custom strategy needs explicit (T, S)".into(),
            )),
        }
    }

    fn check_active(&self, sol: &AttackSolution<T>, budget: &StealthBudget<T>) -> Result<()> {
        let gap = (sol.kl - budget.epsilon()).abs();
        if !(gap <= self.tol.active::<T>()) {
            return Err(Error::Numerical(format!(
                "{} attack misses the constraint boundary by {gap}",
                sol.strategy
            )));
        }
        Ok(())
    }
}
