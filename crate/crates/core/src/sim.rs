//! Monte Carlo simulation of plant, smart sensor, attacker and remote
//! estimator, used as the independent check on every closed form.
//!
//! Each step `n = 1..=horizon` of a run:
//!
//! ```text
//! y[n]  = c x[n] + v[n]
//! z[n]  = y[n] - c xh[n|n-1]                 sensor innovation
//! zt[n] = T zt[n-1] + S z[n],  zt[0] = 0     attacked innovation
//! xh[n+1|n]  = a (xh[n|n-1]  + K z[n])       sensor filter
//! xr[n+1|n]  = a (xr[n|n-1]  + K zt[n])      remote estimator
//! x[n+1]     = a x[n] + w[n]
//! ```
//!
//! The run starts from `xh = xr = 0` and `x[1] ~ N(0, q / (1 - a^2))`.
//! The squared a-priori remote error `(x[n] - xr[n|n-1])^2` is averaged over
//! `n = burn_in + 1..=horizon`.
//!
//! Per-run randomness comes from ChaCha8 keyed by the master seed with the
//! run index as the stream id, so each run is independent of scheduling and
//! the final reduction is done in ascending run order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::attack::AttackParams;
use crate::error::{Error, Result};
use crate::model::{SteadyState, SystemParams};
use crate::Scalar;

/// Name of the generator family, recorded alongside results.
pub const RNG_FAMILY: &str = "chacha8(key=seed_from_u64(seed),stream=run_index)";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub runs: usize,
    pub horizon: usize,
    pub seed: u64,
    pub burn_in: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            runs: 100_000,
            horizon: 500,
            seed: 1,
            burn_in: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::InvalidConfig("runs must be at least 1".into()));
        }
        if self.horizon == 0 {
            return Err(Error::InvalidConfig("horizon must be at least 1".into()));
        }
        if self.burn_in >= self.horizon {
            return Err(Error::InvalidConfig(format!(
                "burn_in ({}) must be smaller than horizon ({})",
                self.burn_in, self.horizon
            )));
        }
        Ok(())
    }

    /// Number of steps that enter the averages.
    pub fn window(&self) -> usize {
        self.horizon - self.burn_in
    }
}

/// The generator for run `run_index` under `seed`.
pub fn run_rng(seed: u64, run_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run_index);
    rng
}

/// Sums collected over the averaging window of one trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunAccumulators<T> {
    /// Sum of squared a-priori remote estimation errors.
    pub err_sq: T,
    /// Sum of squared attacked innovations.
    pub zt_sq: T,
    /// Sum of `zt[n] * zt[n-1]`.
    pub zt_lag1: T,
    pub steps: usize,
}

pub fn simulate_run<T, R>(
    params: &SystemParams<T>,
    ss: &SteadyState<T>,
    attack: &AttackParams<T>,
    horizon: usize,
    burn_in: usize,
    rng: &mut R,
) -> RunAccumulators<T>
where
    T: Scalar,
    R: rand::Rng + ?Sized,
{
    let SystemParams { a, c, q, r } = *params;
    let k = ss.k_gain;
    let AttackParams { t_coef, s_coef } = *attack;
    let sd_w = q.sqrt();
    let sd_v = r.sqrt();

    let mut x = params.stationary_state_variance().sqrt() * T::standard_normal(rng);
    let mut xh = T::zero();
    let mut xr = T::zero();
    let mut zt_prev = T::zero();
    let mut acc = RunAccumulators::default();

    for n in 1..=horizon {
        let y = c * x + sd_v * T::standard_normal(rng);
        let z = y - c * xh;
        let zt = t_coef * zt_prev + s_coef * z;

        if n > burn_in {
            let err = x - xr;
            acc.err_sq = acc.err_sq + err * err;
            acc.zt_sq = acc.zt_sq + zt * zt;
            acc.zt_lag1 = acc.zt_lag1 + zt * zt_prev;
            acc.steps += 1;
        }

        xh = a * (xh + k * z);
        xr = a * (xr + k * zt);
        x = a * x + sd_w * T::standard_normal(rng);
        zt_prev = zt;
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimResult<T> {
    pub eta_hat: T,
    /// Ensemble and time average of the squared a-priori remote error.
    pub p_tilde_hat: T,
    pub ztilde_var_hat: T,
    pub ztilde_ac1_hat: T,
    pub stderr_eta: T,
    pub stderr_ztilde_var: T,
    pub stderr_ztilde_ac1: T,
    pub config: SimConfig,
}

impl<T> SimResult<T> {
    pub fn rng_family(&self) -> &'static str {
        RNG_FAMILY
    }
}

fn mean_and_stderr<T: Scalar>(values: impl Iterator<Item = T> + Clone, n: usize) -> (T, T) {
    let nf = T::from_usize(n).unwrap();
    let mean = values.clone().fold(T::zero(), |s, v| s + v) / nf;
    if n < 2 {
        return (mean, T::zero());
    }
    let ss = values.fold(T::zero(), |s, v| s + (v - mean) * (v - mean));
    let sd = (ss / T::from_usize(n - 1).unwrap()).sqrt();
    (mean, sd / nf.sqrt())
}

/// Averages `config.runs` independent trajectories. Results are
/// bit-identical for identical inputs regardless of thread count.
pub fn monte_carlo_eta<T: Scalar>(
    params: &SystemParams<T>,
    ss: &SteadyState<T>,
    attack: &AttackParams<T>,
    config: &SimConfig,
) -> Result<SimResult<T>> {
    config.validate()?;
    params.validate()?;
    if !(attack.t_coef.abs() < T::one()) {
        return Err(Error::InfeasibleT {
            t: attack.t_coef.to_f64_lossy(),
            reason: "the attacked innovation diverges for |T| >= 1".into(),
        });
    }
    if !(ss.p > T::zero()) {
        return Err(Error::DegenerateSystem(
            "p = 0: the degradation ratio is undefined".into(),
        ));
    }

    let runs: Vec<RunAccumulators<T>> = (0..config.runs)
        .into_par_iter()
        .map(|i| {
            let mut rng = run_rng(config.seed, i as u64);
            simulate_run(params, ss, attack, config.horizon, config.burn_in, &mut rng)
        })
        .collect();

    let w = T::from_usize(config.window()).unwrap();
    let n = runs.len();
    let (p_tilde_hat, p_tilde_se) = mean_and_stderr(runs.iter().map(|r| r.err_sq / w), n);
    let (ztilde_var_hat, var_se) = mean_and_stderr(runs.iter().map(|r| r.zt_sq / w), n);

    let total_sq = runs.iter().fold(T::zero(), |s, r| s + r.zt_sq);
    let total_lag = runs.iter().fold(T::zero(), |s, r| s + r.zt_lag1);
    let (ztilde_ac1_hat, ac1_se) = if total_sq > T::zero() {
        let rho = total_lag / total_sq;
        // Delta method on the ratio of means.
        let (_, resid_se) =
            mean_and_stderr(runs.iter().map(|r| (r.zt_lag1 - rho * r.zt_sq) / w), n);
        (rho, resid_se / ztilde_var_hat)
    } else {
        (T::zero(), T::zero())
    };

    Ok(SimResult {
        eta_hat: p_tilde_hat / ss.p,
        p_tilde_hat,
        ztilde_var_hat,
        ztilde_ac1_hat,
        stderr_eta: p_tilde_se / ss.p,
        stderr_ztilde_var: var_se,
        stderr_ztilde_ac1: ac1_se,
        config: *config,
    })
}

/// Comparison of the simulated attacked-innovation moments against the
/// stationary AR(1) values `S^2 sigma_z^2 / (1 - T^2)` and `T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZtildeReport<T> {
    pub expected_var: T,
    pub expected_ac1: T,
    pub var_hat: T,
    pub ac1_hat: T,
    pub var_z_score: T,
    pub ac1_z_score: T,
}

impl<T: Scalar> ZtildeReport<T> {
    pub fn within(&self, z: T) -> bool {
        self.var_z_score.abs() <= z && self.ac1_z_score.abs() <= z
    }
}

fn z_score<T: Scalar>(hat: T, expected: T, se: T) -> T {
    let diff = hat - expected;
    if se > T::zero() {
        diff / se
    } else if diff == T::zero() {
        T::zero()
    } else {
        T::infinity()
    }
}

pub fn empirical_ztilde_stats<T: Scalar>(
    result: &SimResult<T>,
    attack: &AttackParams<T>,
    ss: &SteadyState<T>,
) -> Result<ZtildeReport<T>> {
    let AttackParams { t_coef, s_coef } = *attack;
    if !(t_coef.abs() < T::one()) {
        return Err(Error::InfeasibleT {
            t: t_coef.to_f64_lossy(),
            reason: "stationary moments need |T| < 1".into(),
        });
    }
    if s_coef == T::zero() {
        return Err(Error::DegenerateAttack);
    }
    let decay = (t_coef * t_coef).powi(result.config.horizon.min(i32::MAX as usize) as i32);
    if !(decay < T::lit(1e-6)) {
        return Err(Error::InvalidConfig(format!(
            "horizon {} too short for |T| = {}: transient T^(2k) = {decay}",
            result.config.horizon,
            t_coef.abs()
        )));
    }
    let expected_var = s_coef * s_coef * ss.sigma_z2 / (T::one() - t_coef * t_coef);
    Ok(ZtildeReport {
        expected_var,
        expected_ac1: t_coef,
        var_hat: result.ztilde_var_hat,
        ac1_hat: result.ztilde_ac1_hat,
        var_z_score: z_score(
            result.ztilde_var_hat,
            expected_var,
            result.stderr_ztilde_var,
        ),
        ac1_z_score: z_score(result.ztilde_ac1_hat, t_coef, result.stderr_ztilde_ac1),
    })
}
