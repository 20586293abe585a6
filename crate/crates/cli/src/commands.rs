//! `pto`, `pso`, `throughput` and `optimize`.

use rayon::prelude::*;

use secrecy_relay::analytic;
use secrecy_relay::model::rate_to_threshold;
use secrecy_relay::montecarlo::{self, MonteCarloConfig, MonteCarloEstimate};
use secrecy_relay::optimizer::{solve_joint, solve_rate_pair, OptimizerConfig, RatePairResult};
use secrecy_relay::{PowerAllocation, QuadratureConfig, SystemParams, WiretapCode};

use crate::config::{dbm_to_watts, Command, RunConfig, SweepVar};
use crate::output::Table;
use crate::Failure;

pub const DEFAULT_BETA: f64 = 0.5;

/// One fully resolved operating point.
#[derive(Debug, Clone, Copy)]
pub struct Point {
    pub params: SystemParams,
    pub beta: f64,
    pub tau_b: f64,
    pub tau_e: f64,
}

impl Point {
    pub fn base(run: &RunConfig) -> Self {
        Self {
            params: run.params,
            beta: run.beta.unwrap_or(DEFAULT_BETA),
            tau_b: rate_to_threshold(run.rate_b),
            tau_e: rate_to_threshold(run.rate_e),
        }
    }

    /// Replace one coordinate by a sweep value.
    pub fn with(mut self, var: SweepVar, x: f64) -> Result<Self, Failure> {
        let b = self.params.to_builder();
        let rebuilt = |b: secrecy_relay::model::SystemParamsBuilder| b.build().map_err(Failure::from_validation);
        match var {
            SweepVar::TauB => self.tau_b = x,
            SweepVar::TauE => self.tau_e = x,
            SweepVar::RateB => self.tau_b = rate_to_threshold(x),
            SweepVar::RateE => self.tau_e = rate_to_threshold(x),
            SweepVar::Beta => self.beta = x,
            SweepVar::Lambda => self.params = rebuilt(b.eav_density(x))?,
            SweepVar::PsDbm => self.params = rebuilt(b.power_source(dbm_to_watts(x)))?,
            SweepVar::PrDbm => self.params = rebuilt(b.power_relay(dbm_to_watts(x)))?,
            SweepVar::Dsr => self.params = rebuilt(b.dist_sr(x))?,
            SweepVar::Drd => self.params = rebuilt(b.dist_rd(x))?,
            SweepVar::Eta => self.params = rebuilt(b.path_loss_exp(x))?,
        }
        Ok(self)
    }

    pub fn allocation(&self) -> Result<PowerAllocation, Failure> {
        let beta = PowerAllocation::new(self.beta).map_err(Failure::from_validation)?;
        self.params.check_allocation(beta).map_err(Failure::from_validation)?;
        Ok(beta)
    }

    fn is_negative_threshold(&self) -> bool {
        !(self.tau_b >= 0.0 && self.tau_e >= 0.0)
    }
}

/// Distinct, reproducible Monte Carlo seed for each grid cell.
pub fn cell_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

pub fn mc_config(run: &RunConfig, index: usize) -> MonteCarloConfig {
    MonteCarloConfig {
        seed: cell_seed(run.monte_carlo.seed, index),
        ..run.monte_carlo
    }
}

/// Code for evaluating `P_to` at `tau_b` alone.
pub fn code_for_pto(tau_b: f64) -> Result<WiretapCode, secrecy_relay::Error> {
    WiretapCode::from_thresholds(tau_b, 0.0)
}

/// Code for evaluating `P_so` at `tau_e` alone.
pub fn code_for_pso(tau_e: f64) -> Result<WiretapCode, secrecy_relay::Error> {
    WiretapCode::from_thresholds(tau_e, tau_e)
}

pub fn p_to_mc(p: &Point, beta: PowerAllocation, cfg: &MonteCarloConfig) -> Result<MonteCarloEstimate, secrecy_relay::Error> {
    montecarlo::estimate_p_to(&p.params, beta, &code_for_pto(p.tau_b)?, cfg)
}

pub fn p_so_mc(p: &Point, beta: PowerAllocation, cfg: &MonteCarloConfig) -> Result<MonteCarloEstimate, secrecy_relay::Error> {
    montecarlo::estimate_p_so(&p.params, beta, &code_for_pso(p.tau_e)?, cfg)
}

fn point_label(run: &RunConfig, index: usize, x: Option<f64>) -> String {
    match (&run.sweep, x) {
        (Some(s), Some(x)) => format!("grid point {index} ({} = {x})", s.variable.column()),
        _ => "the single operating point".into(),
    }
}

fn base_columns(command: &Command, with_mc: bool) -> Vec<&'static str> {
    let mut cols = match command {
        Command::Pto => vec!["tau_b", "beta", "p_to"],
        Command::Pso => vec!["tau_e", "beta", "lambda", "p_so"],
        _ => vec!["rate_b", "rate_e", "beta", "p_to", "p_so", "t_s"],
    };
    if with_mc {
        match command {
            Command::Pto => cols.extend(["p_to_mc", "p_to_mc_stderr"]),
            Command::Pso => cols.extend(["p_so_mc", "p_so_mc_stderr"]),
            _ => cols.extend(["p_to_mc", "p_to_mc_stderr", "p_so_mc", "p_so_mc_stderr"]),
        }
    }
    cols
}

/// Column list of a `pto`, `pso` or `throughput` table.
pub fn sweep_columns(run: &RunConfig) -> Vec<String> {
    let base = base_columns(&run.command, run.with_mc);
    let mut cols: Vec<String> = Vec::new();
    if let Some(s) = &run.sweep {
        if !base.contains(&s.variable.column()) {
            cols.push(s.variable.column().to_string());
        }
    }
    cols.extend(base.iter().map(|c| c.to_string()));
    cols
}

fn evaluate_point(run: &RunConfig, index: usize, x: Option<f64>, p: &Point) -> Result<Vec<f64>, secrecy_relay::Error> {
    let quad = QuadratureConfig::default();
    let beta = PowerAllocation::new(p.beta)?;
    p.params.check_allocation(beta)?;
    let mut row = Vec::new();
    if let (Some(s), Some(x)) = (&run.sweep, x) {
        if !base_columns(&run.command, false).contains(&s.variable.column()) {
            row.push(x);
        }
    }
    let mc = mc_config(run, index);
    match run.command {
        Command::Pto => {
            let code = code_for_pto(p.tau_b)?;
            row.extend([p.tau_b, p.beta, analytic::p_to(&p.params, beta, &code)?]);
            if run.with_mc {
                let e = p_to_mc(p, beta, &mc)?;
                row.extend([e.estimate, e.std_error]);
            }
        }
        Command::Pso => {
            let code = code_for_pso(p.tau_e)?;
            let pso = analytic::p_so(&p.params, beta, &code, &quad)?;
            row.extend([p.tau_e, p.beta, p.params.eav_density(), pso]);
            if run.with_mc {
                let e = p_so_mc(p, beta, &mc)?;
                row.extend([e.estimate, e.std_error]);
            }
        }
        _ => {
            let code = WiretapCode::from_thresholds(p.tau_b, p.tau_e)?;
            let m = analytic::throughput(&p.params, beta, &code, &quad)?;
            row.extend([code.rate_b(), code.rate_e(), p.beta, m.p_to, m.p_so, m.throughput]);
            if run.with_mc {
                let to = p_to_mc(p, beta, &mc)?;
                let so = p_so_mc(p, beta, &MonteCarloConfig { seed: cell_seed(mc.seed, 0), ..mc })?;
                row.extend([to.estimate, to.std_error, so.estimate, so.std_error]);
            }
        }
    }
    Ok(row)
}

/// Evaluate the chosen command on the sweep grid (or the single point).
pub fn sweep(run: &RunConfig) -> Result<(Table, Vec<String>), Failure> {
    let base = Point::base(run);
    let xs: Vec<Option<f64>> = match &run.sweep {
        Some(s) => s.values().into_iter().map(Some).collect(),
        None => vec![None],
    };
    let points: Vec<Point> = xs
        .iter()
        .map(|x| match (x, &run.sweep) {
            (Some(x), Some(s)) => base.with(s.variable, *x),
            _ => Ok(base),
        })
        .collect::<Result<_, _>>()?;
    if let Some((i, _)) = points.iter().enumerate().find(|(_, p)| p.is_negative_threshold()) {
        return Err(Failure::Validation(format!(
            "negative threshold at {}",
            point_label(run, i, xs[i])
        )));
    }
    let rows: Vec<Vec<f64>> = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| evaluate_point(run, i, xs[i], p).map_err(|e| Failure::at(&point_label(run, i, xs[i]), e)))
        .collect::<Result<_, _>>()?;
    let mut table = Table::new(sweep_columns(run));
    table.rows = rows;
    Ok((table, Vec::new()))
}

pub const OPTIMIZE_COLUMNS: [&str; 7] = [
    "beta",
    "r_b_star",
    "r_e_star",
    "t_s_star",
    "feasible",
    "grid_fallback",
    "is_optimum",
];

fn optimize_row(r: &RatePairResult, optimum: bool) -> Vec<f64> {
    vec![
        r.beta,
        r.r_b_star,
        r.r_e_star,
        r.t_s_star,
        f64::from(u8::from(r.feasible)),
        f64::from(u8::from(r.grid_fallback)),
        f64::from(u8::from(optimum)),
    ]
}

/// Optimal rates for `--beta`, or the joint optimum with its full trace.
pub fn optimize(run: &RunConfig) -> Result<(Table, Vec<String>), Failure> {
    if run.sweep.is_some() {
        return Err(Failure::Validation("optimize does not take --sweep".into()));
    }
    let cfg = OptimizerConfig::with_phi(run.phi);
    cfg.validate().map_err(Failure::from_validation)?;
    let mut table = Table::new(OPTIMIZE_COLUMNS.iter().map(|c| c.to_string()).collect());
    let mut diagnostics = Vec::new();
    let label = "the optimization run";
    match run.beta {
        Some(b) => {
            let p = Point { beta: b, ..Point::base(run) };
            let beta = p.allocation()?;
            let r = solve_rate_pair(&run.params, beta, &cfg).map_err(|e| Failure::at(label, e))?;
            table.rows.push(optimize_row(&r, true));
            if r.grid_fallback {
                diagnostics.push(format!("dense grid fallback at beta = {b}"));
            }
        }
        None => {
            let res = solve_joint(&run.params, &cfg).map_err(|e| Failure::at(label, e))?;
            for r in &res.trace {
                table.rows.push(optimize_row(r, r.beta == res.beta_star));
                if r.grid_fallback {
                    diagnostics.push(format!("dense grid fallback at beta = {}", r.beta));
                }
            }
            if !res.feasible {
                diagnostics.push("no power split satisfies the secrecy outage constraint".into());
            }
        }
    }
    Ok((table, diagnostics))
}

