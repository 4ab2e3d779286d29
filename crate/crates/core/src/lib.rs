//! Optimal linear stealthy attacks on scalar remote state estimation.
//!
//! A smart sensor runs a steady-state Kalman filter and transmits its
//! innovations `z[k]`; an attacker replaces them with
//! `zt[k] = T zt[k-1] + S z[k]`. This crate computes the degradation such an
//! attack causes at the remote estimator, the KL-divergence stealthiness of
//! the attack, the attack pairs that maximize degradation for a given KL
//! budget, and a seeded Monte Carlo simulator that checks all of it.
//!
//! All numerics are generic over [`Scalar`] (`f32` or `f64`). The `*64`
//! and `*32` aliases below fix the precision.
//!
//! ```
//! use linattack::{Scenario64, StealthBudget, SystemParams};
//!
//! let sc = Scenario64::new(SystemParams::new(0.4, 1.0, 0.2, 0.5)?)?;
//! let best = sc.solve_optimal(&StealthBudget::new(0.5)?)?;
//! assert!(best.eta_analytic > sc.solve_strict().eta_analytic);
//! # Ok::<(), linattack::Error>(())
//! ```

// `!(x > 0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod attack;
pub mod error;
pub mod model;
pub mod numerics;
pub mod scalar;
pub mod sim;
pub mod stealth;
pub mod tolerance;

pub use attack::{
    boundary_bracket, dj1_ds, eta_of, f_of_s, j1_of_s, objective_j, optimal_boundary_point,
    AttackParams, AttackSolution, Scenario, Strategy,
};
pub use error::{Error, Result};
pub use model::{degradation_scale, solve_riccati, solve_riccati_with, SteadyState, SystemParams};
pub use numerics::{bisect, grid_sign_scan, Bracket, Root};
pub use scalar::Scalar;
pub use sim::{
    empirical_ztilde_stats, monte_carlo_eta, run_rng, simulate_run, RunAccumulators, SimConfig,
    SimResult, ZtildeReport, RNG_FAMILY,
};
pub use stealth::{
    boundary_residual, finite_horizon_kl, kl_rate, max_feasible_t, solve_s_bounds,
    solve_s_bounds_with, SBounds, StealthBudget,
};
pub use tolerance::Tolerances;

pub type SystemParams64 = SystemParams<f64>;
pub type SteadyState64 = SteadyState<f64>;
pub type AttackParams64 = AttackParams<f64>;
pub type AttackSolution64 = AttackSolution<f64>;
pub type StealthBudget64 = StealthBudget<f64>;
pub type SBounds64 = SBounds<f64>;
pub type Scenario64 = Scenario<f64>;
pub type SimResult64 = SimResult<f64>;

pub type SystemParams32 = SystemParams<f32>;
pub type SteadyState32 = SteadyState<f32>;
pub type AttackParams32 = AttackParams<f32>;
pub type AttackSolution32 = AttackSolution<f32>;
pub type StealthBudget32 = StealthBudget<f32>;
pub type SBounds32 = SBounds<f32>;
pub type Scenario32 = Scenario<f32>;
pub type SimResult32 = SimResult<f32>;
