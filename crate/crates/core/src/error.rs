use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid system parameters: {0}")]
    InvalidParameters(String),

    /// |T| >= 1, or T outside the feasible range for the given budget.
    #[error("infeasible attack coefficient T = {t}: {reason}")]
    InfeasibleT { t: f64, reason: String },

    #[error("degenerate attack: S = 0 makes the KL rate diverge")]
    DegenerateAttack,

    #[error("degenerate system: {0}")]
    DegenerateSystem(String),

    #[error("S = {s} lies outside the boundary bracket [{lo}, {hi}]")]
    Domain { s: f64, lo: f64, hi: f64 },

    #[error("invalid bracket [{lo}, {hi}]: {reason}")]
    InvalidBracket { lo: f64, hi: f64, reason: String },

    #[error("invalid stealth budget epsilon = {0} (must be finite and >= 0)")]
    InvalidBudget(f64),

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
