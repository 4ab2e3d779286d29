//! `linattack`: design and verify linear stealthy attacks on a scalar
//! remote estimator from the command line.

mod format;
mod range;

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use linattack::{
    finite_horizon_kl, kl_rate, monte_carlo_eta, AttackParams64, AttackSolution64, Scenario64,
    SimConfig, SimResult64, StealthBudget64, Strategy, SystemParams64, RNG_FAMILY,
};
use serde_json::{json, Map, Value};

use crate::format::{cell, num, ANALYTIC_DIGITS, MC_DIGITS};
use crate::range::EpsilonRange;

/// Environment variable that sets the worker thread count.
const THREADS_ENV: &str = "LINATTACK_THREADS";

#[derive(Parser, Debug)]
#[command(
    name = "linattack",
    version,
    about = "Optimal linear stealthy attacks on scalar remote state estimation"
)]
struct Cli {
    #[command(flatten)]
    system: SystemArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Copy)]
struct SystemArgs {
    /// State coefficient
    #[arg(
        long,
        global = true,
        default_value_t = 0.4,
        allow_negative_numbers = true
    )]
    a: f64,
    /// Output coefficient
    #[arg(
        long,
        global = true,
        default_value_t = 1.0,
        allow_negative_numbers = true
    )]
    c: f64,
    /// Process-noise variance
    #[arg(
        long,
        global = true,
        default_value_t = 0.2,
        allow_negative_numbers = true
    )]
    q: f64,
    /// Measurement-noise variance
    #[arg(
        long,
        global = true,
        default_value_t = 0.5,
        allow_negative_numbers = true
    )]
    r: f64,
}

impl SystemArgs {
    fn scenario(&self) -> Result<Scenario64> {
        let params = SystemParams64::new(self.a, self.c, self.q, self.r)?;
        Ok(Scenario64::new(params)?)
    }
}

#[derive(Args, Debug, Clone, Copy)]
struct McArgs {
    /// Independent trajectories
    #[arg(long, default_value_t = 100_000)]
    runs: usize,
    /// Steps per trajectory
    #[arg(long, default_value_t = 500)]
    horizon: usize,
    /// Master RNG seed
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Leading steps excluded from the averages
    #[arg(long, default_value_t = 0)]
    burn_in: usize,
}

impl From<McArgs> for SimConfig {
    fn from(m: McArgs) -> Self {
        SimConfig {
            runs: m.runs,
            horizon: m.horizon,
            seed: m.seed,
            burn_in: m.burn_in,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum OutputFormat {
    Json,
    Text,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum StrategyArg {
    Strict,
    Optimal,
    #[value(name = "baseline-t0")]
    BaselineT0,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Strict => Strategy::Strict,
            StrategyArg::Optimal => Strategy::Optimal,
            StrategyArg::BaselineT0 => Strategy::BaselineT0,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Steady-state Kalman filter quantities
    Steady {
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
    },
    /// Solve for an attack pair under a KL budget
    Solve {
        #[arg(long, value_enum, default_value_t = StrategyArg::Optimal)]
        strategy: StrategyArg,
        /// KL budget in nats per step
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        epsilon: f64,
        /// Grid size for the stationary-point scan
        #[arg(long, default_value_t = 2048)]
        grid: usize,
    },
    /// Tabulate optimal and memoryless attacks over a range of budgets (CSV)
    Sweep {
        /// Budget grid as lo:hi:step
        #[arg(long, default_value = "0:1:0.1")]
        epsilons: EpsilonRange,
        /// Also estimate both ratios by Monte Carlo
        #[arg(long)]
        mc: bool,
        #[command(flatten)]
        mc_args: McArgs,
        /// Output file; stdout when omitted
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo estimate of the degradation ratio
    Simulate {
        /// Attack recursion coefficient (with --s)
        #[arg(
            long,
            requires = "s",
            conflicts_with = "strategy",
            allow_negative_numbers = true
        )]
        t: Option<f64>,
        /// Attack innovation gain (with --t)
        #[arg(long, requires = "t", allow_negative_numbers = true)]
        s: Option<f64>,
        /// Solve for the attack instead of giving --t/--s (default: strict)
        #[arg(long, value_enum)]
        strategy: Option<StrategyArg>,
        /// KL budget in nats per step, used with --strategy
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        epsilon: f64,
        #[command(flatten)]
        mc_args: McArgs,
    },
    /// KL divergence rate of an attack pair
    Kl {
        #[arg(long, allow_negative_numbers = true)]
        t: f64,
        #[arg(long, allow_negative_numbers = true)]
        s: f64,
        /// Also report the exact divergence over this many steps
        #[arg(long)]
        horizon: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(err) = configure_threads() {
        eprintln!("error: {err:#}");
        return ExitCode::FAILURE;
    }
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match run(cli, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .with_context(|| format!("{THREADS_ENV}='{raw}' is not a thread count"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("configuring the thread pool")?;
    Ok(())
}

fn run(cli: Cli, out: &mut impl Write) -> Result<()> {
    match cli.command {
        Command::Steady { format } => cmd_steady(&cli.system, format, out),
        Command::Solve {
            strategy,
            epsilon,
            grid,
        } => cmd_solve(&cli.system, strategy.into(), epsilon, grid, out),
        Command::Sweep {
            epsilons,
            mc,
            mc_args,
            out: path,
        } => {
            let config = mc.then(|| SimConfig::from(mc_args));
            match path {
                Some(path) => {
                    let file = File::create(&path)
                        .with_context(|| format!("cannot write {}", path.display()))?;
                    cmd_sweep(&cli.system, &epsilons, config, file)?;
                    eprintln!("wrote {}", path.display());
                    Ok(())
                }
                None => cmd_sweep(&cli.system, &epsilons, config, &mut *out),
            }
        }
        Command::Simulate {
            t,
            s,
            strategy,
            epsilon,
            mc_args,
        } => {
            let sc = cli.system.scenario()?;
            let attack = match (t, s, strategy) {
                (Some(t), Some(s), None) => custom_attack(&sc, t, s)?,
                (None, None, Some(strategy)) => {
                    sc.solve(strategy.into(), &StealthBudget64::new(epsilon)?)?
                }
                (None, None, None) => sc.solve_strict(),
                _ => bail!("give either --t and --s, or --strategy"),
            };
            cmd_simulate(&sc, &attack, mc_args.into(), out)
        }
        Command::Kl { t, s, horizon } => cmd_kl(t, s, horizon, out),
    }
}

/// Like `Scenario::evaluate`, but `S = 0` is allowed (its KL rate is infinite).
fn custom_attack(sc: &Scenario64, t: f64, s: f64) -> Result<AttackSolution64> {
    ensure!(
        t.is_finite() && s.is_finite(),
        "attack coefficients must be finite"
    );
    ensure!(
        t.abs() < 1.0,
        "invalid attack: |T| = {} must be < 1",
        t.abs()
    );
    let params = AttackParams64::new(t, s);
    let j_value = linattack::objective_j(&params, sc.params.a)?;
    Ok(AttackSolution64 {
        params,
        j_value,
        eta_analytic: 1.0 + j_value * sc.scale,
        kl: kl_rate(&params).unwrap_or(f64::INFINITY),
        strategy: Strategy::Custom,
    })
}

fn write_json(value: &Value, out: &mut impl Write) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn cmd_steady(system: &SystemArgs, format: OutputFormat, out: &mut impl Write) -> Result<()> {
    let params = SystemParams64::new(system.a, system.c, system.q, system.r)?;
    let ss = linattack::solve_riccati(&params)?;
    let scale = linattack::degradation_scale(&ss, &params).ok();
    let d = ANALYTIC_DIGITS;
    match format {
        OutputFormat::Json => {
            let mut obj = Map::new();
            for (key, v) in [
                ("a", params.a),
                ("c", params.c),
                ("q", params.q),
                ("r", params.r),
            ] {
                obj.insert(key.into(), num(v, d));
            }
            obj.insert("p".into(), num(ss.p, d));
            obj.insert("k_gain".into(), num(ss.k_gain, d));
            obj.insert("sigma_z2".into(), num(ss.sigma_z2, d));
            obj.insert("c0".into(), scale.map_or(Value::Null, |c0| num(c0, d)));
            write_json(&Value::Object(obj), out)
        }
        OutputFormat::Text => {
            let rows = [
                ("p", cell(ss.p, d)),
                ("k_gain", cell(ss.k_gain, d)),
                ("sigma_z2", cell(ss.sigma_z2, d)),
                (
                    "c0",
                    scale.map_or_else(|| "undefined".into(), |c0| cell(c0, d)),
                ),
            ];
            for (name, value) in rows {
                writeln!(out, "{name:<10} {value}")?;
            }
            Ok(())
        }
    }
}

fn solution_json(sol: &AttackSolution64, epsilon: Option<f64>) -> Value {
    let d = ANALYTIC_DIGITS;
    let mut obj = Map::new();
    obj.insert("strategy".into(), json!(sol.strategy.as_str()));
    if let Some(eps) = epsilon {
        obj.insert("epsilon".into(), num(eps, d));
    }
    obj.insert("T".into(), num(sol.params.t_coef, d));
    obj.insert("S".into(), num(sol.params.s_coef, d));
    obj.insert("J".into(), num(sol.j_value, d));
    obj.insert("eta".into(), num(sol.eta_analytic, d));
    obj.insert("kl".into(), num(sol.kl, d));
    Value::Object(obj)
}

fn cmd_solve(
    system: &SystemArgs,
    strategy: Strategy,
    epsilon: f64,
    grid: usize,
    out: &mut impl Write,
) -> Result<()> {
    let budget = StealthBudget64::new(epsilon)?;
    ensure!(grid >= 2, "--grid must be at least 2");
    let mut sc = system.scenario()?;
    sc.tol.grid_points = grid;
    let sol = sc.solve(strategy, &budget)?;
    write_json(&solution_json(&sol, Some(epsilon)), out)
}

const SWEEP_HEADER: [&str; 10] = [
    "epsilon",
    "t_opt",
    "s_opt",
    "j_opt",
    "eta_optimal_analytic",
    "eta_baseline_analytic",
    "eta_optimal_mc",
    "eta_baseline_mc",
    "stderr_optimal_mc",
    "stderr_baseline_mc",
];

struct SweepRow {
    epsilon: f64,
    optimal: AttackSolution64,
    baseline: AttackSolution64,
    mc: Option<(SimResult64, SimResult64)>,
}

impl SweepRow {
    fn cells(&self) -> Vec<String> {
        let d = ANALYTIC_DIGITS;
        let mut cells = vec![
            cell(self.epsilon, d),
            cell(self.optimal.params.t_coef, d),
            cell(self.optimal.params.s_coef, d),
            cell(self.optimal.j_value, d),
            cell(self.optimal.eta_analytic, d),
            cell(self.baseline.eta_analytic, d),
        ];
        match &self.mc {
            Some((opt, base)) => cells.extend([
                cell(opt.eta_hat, MC_DIGITS),
                cell(base.eta_hat, MC_DIGITS),
                cell(opt.stderr_eta, MC_DIGITS),
                cell(base.stderr_eta, MC_DIGITS),
            ]),
            None => cells.extend(std::iter::repeat_n(String::new(), 4)),
        }
        cells
    }
}

fn cmd_sweep(
    system: &SystemArgs,
    range: &EpsilonRange,
    mc: Option<SimConfig>,
    sink: impl Write,
) -> Result<()> {
    let sc = system.scenario()?;
    if let Some(config) = &mc {
        config.validate()?;
    }
    let mut rows = Vec::new();
    for epsilon in range.values() {
        let budget = StealthBudget64::new(epsilon)?;
        let optimal = sc.solve_optimal(&budget)?;
        let baseline = sc.solve_baseline_t0(&budget)?;
        let mc = match &mc {
            Some(config) => Some((
                monte_carlo_eta(&sc.params, &sc.steady, &optimal.params, config)?,
                monte_carlo_eta(&sc.params, &sc.steady, &baseline.params, config)?,
            )),
            None => None,
        };
        rows.push(SweepRow {
            epsilon,
            optimal,
            baseline,
            mc,
        });
    }

    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(sink);
    writer.write_record(SWEEP_HEADER)?;
    for row in &rows {
        writer.write_record(row.cells())?;
    }
    writer.flush()?;

    for row in &rows {
        let (opt, base) = (row.optimal.eta_analytic, row.baseline.eta_analytic);
        ensure!(
            opt >= base - 1e-12 && base >= 1.0 - 1e-12,
            "ordering eta_optimal >= eta_baseline >= 1 violated at epsilon = {}: {opt} vs {base}",
            row.epsilon
        );
    }
    Ok(())
}

fn cmd_simulate(
    sc: &Scenario64,
    attack: &AttackSolution64,
    config: SimConfig,
    out: &mut impl Write,
) -> Result<()> {
    let res = monte_carlo_eta(&sc.params, &sc.steady, &attack.params, &config)?;
    let (d, m) = (ANALYTIC_DIGITS, MC_DIGITS);
    let mut obj = Map::new();
    obj.insert("strategy".into(), json!(attack.strategy.as_str()));
    obj.insert("T".into(), num(attack.params.t_coef, d));
    obj.insert("S".into(), num(attack.params.s_coef, d));
    obj.insert("eta_analytic".into(), num(attack.eta_analytic, d));
    obj.insert("eta_hat".into(), num(res.eta_hat, m));
    obj.insert("stderr_eta".into(), num(res.stderr_eta, m));
    obj.insert("p_tilde_hat".into(), num(res.p_tilde_hat, m));
    obj.insert("ztilde_var_hat".into(), num(res.ztilde_var_hat, m));
    obj.insert("stderr_ztilde_var".into(), num(res.stderr_ztilde_var, m));
    obj.insert("ztilde_ac1_hat".into(), num(res.ztilde_ac1_hat, m));
    obj.insert("stderr_ztilde_ac1".into(), num(res.stderr_ztilde_ac1, m));
    obj.insert("runs".into(), json!(config.runs));
    obj.insert("horizon".into(), json!(config.horizon));
    obj.insert("burn_in".into(), json!(config.burn_in));
    obj.insert("seed".into(), json!(config.seed));
    obj.insert("rng".into(), json!(RNG_FAMILY));
    write_json(&Value::Object(obj), out)
}

fn cmd_kl(t: f64, s: f64, horizon: Option<usize>, out: &mut impl Write) -> Result<()> {
    let attack = AttackParams64::new(t, s);
    let rate = kl_rate(&attack)?;
    let d = ANALYTIC_DIGITS;
    let mut obj = Map::new();
    obj.insert("T".into(), num(t, d));
    obj.insert("S".into(), num(s, d));
    obj.insert("kl_rate".into(), num(rate, d));
    if let Some(k) = horizon {
        let total = finite_horizon_kl(&attack, k)?;
        obj.insert("horizon".into(), json!(k));
        obj.insert("finite_horizon_kl".into(), num(total, d));
        obj.insert("per_step".into(), num(total / k as f64, d));
    }
    write_json(&Value::Object(obj), out)
}
