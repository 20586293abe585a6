//! Preset data series for figures 2 to 5.
//!
//! Figures 2 and 3 use `eta = 4`, `N = 4`, `beta = 0.5` and unit distances;
//! figures 4 and 5 use `phi = 0.4`, a 20 dB legitimate mean SNR and a
//! legitimate-to-eavesdropper mean SNR ratio of 20. `--eta`, `--lambda`,
//! `--n` (figures 2, 3), `--beta` (figures 2 to 4) and `--phi` override them.

use rayon::prelude::*;

use secrecy_relay::analytic;
use secrecy_relay::montecarlo::MonteCarloEstimate;
use secrecy_relay::optimizer::{solve_joint, solve_re_star, throughput_at, OptimizerConfig};
use secrecy_relay::{PowerAllocation, QuadratureConfig, SystemParams};

use crate::commands::{code_for_pso, code_for_pto, mc_config, p_so_mc, p_to_mc, Point, DEFAULT_BETA};
use crate::config::{db_to_linear, RunConfig, Sweep, SweepVar};
use crate::output::Table;
use crate::Failure;

pub const FIG45_GAMMA_B_DB: f64 = 20.0;
pub const FIG45_SNR_RATIO: f64 = 20.0;

/// Default x-axis of each figure.
pub fn default_sweep(id: u8) -> Sweep {
    match id {
        2 => Sweep { variable: SweepVar::TauB, start: 0.1, stop: 20.0, points: 20, log: true },
        3 => Sweep { variable: SweepVar::TauE, start: 0.1, stop: 1000.0, points: 20, log: true },
        4 => Sweep { variable: SweepVar::RateB, start: 6.0, stop: 10.0, points: 201, log: false },
        _ => Sweep { variable: SweepVar::Beta, start: 0.01, stop: 1.0, points: 100, log: false },
    }
}

fn allowed(id: u8) -> &'static [SweepVar] {
    match id {
        2 => &[SweepVar::TauB, SweepVar::RateB],
        3 => &[SweepVar::TauE, SweepVar::RateE],
        4 => &[SweepVar::RateB],
        _ => &[SweepVar::Beta],
    }
}

/// Curve label used in column names, e.g. `10` or `2.5`.
fn label(v: f64) -> String {
    format!("{v}").replace('-', "m")
}

/// Parameters for figures 2 and 3: `gamma_b` and `gamma_e` linear mean SNRs.
pub fn fig23_params(run: &RunConfig, gamma_b: f64, gamma_e: f64) -> Result<SystemParams, Failure> {
    SystemParams::normalized(
        run.params.num_antennas(),
        run.params.path_loss_exp(),
        run.params.eav_density(),
        gamma_b,
        gamma_e,
    )
    .map_err(Failure::from_validation)
}

/// Parameters for figures 4 and 5 with `n` antennas.
pub fn fig45_params(run: &RunConfig, n: u32) -> Result<SystemParams, Failure> {
    let gamma_b = db_to_linear(FIG45_GAMMA_B_DB);
    SystemParams::normalized(n, run.params.path_loss_exp(), run.params.eav_density(), gamma_b, gamma_b / FIG45_SNR_RATIO)
        .map_err(Failure::from_validation)
}

pub fn figure(run: &RunConfig, id: u8, curves: &[f64]) -> Result<(Table, Vec<String>), Failure> {
    let sweep = run.sweep.unwrap_or_else(|| default_sweep(id));
    if !allowed(id).contains(&sweep.variable) {
        return Err(Failure::Validation(format!(
            "figure {id} cannot sweep {}",
            sweep.variable.column()
        )));
    }
    let xs = sweep.values();
    match id {
        2 | 3 => fig23(run, id, curves, sweep.variable, &xs),
        4 => fig4(run, curves, &xs),
        5 => fig5(run, curves, &xs),
        other => Err(Failure::Validation(format!("unknown figure {other}"))),
    }
}

fn fig23(run: &RunConfig, id: u8, curves: &[f64], var: SweepVar, xs: &[f64]) -> Result<(Table, Vec<String>), Failure> {
    let (prefix, tag) = if id == 2 { ("p_to", "gb") } else { ("p_so", "ge") };
    let mut cols = vec![var.column().to_string()];
    for &c in curves {
        cols.push(format!("{prefix}_{tag}{}db", label(c)));
        if run.with_mc {
            cols.push(format!("{prefix}_mc_{tag}{}db", label(c)));
            cols.push(format!("{prefix}_mc_stderr_{tag}{}db", label(c)));
        }
    }
    let beta_value = run.beta.unwrap_or(DEFAULT_BETA);
    let params: Vec<SystemParams> = curves
        .iter()
        .map(|&c| {
            let g = db_to_linear(c);
            if id == 2 {
                fig23_params(run, g, g)
            } else {
                fig23_params(run, 1.0, g)
            }
        })
        .collect::<Result<_, _>>()?;
    let beta = PowerAllocation::new(beta_value).map_err(Failure::from_validation)?;
    for p in &params {
        p.check_allocation(beta).map_err(Failure::from_validation)?;
    }
    let quad = QuadratureConfig::default();
    let cells: Vec<(usize, usize)> = (0..xs.len()).flat_map(|i| (0..curves.len()).map(move |j| (i, j))).collect();
    let values: Vec<Vec<f64>> = cells
        .par_iter()
        .map(|&(i, j)| {
            let point = Point { params: params[j], beta: beta_value, tau_b: 0.0, tau_e: 0.0 }.with(var, xs[i])?;
            let where_ = || format!("grid point {i} ({} = {}), curve {}", var.column(), xs[i], curves[j]);
            let mc = mc_config(run, i * curves.len() + j);
            let cell = if id == 2 {
                let code = code_for_pto(point.tau_b).map_err(Failure::from_validation)?;
                let v = analytic::p_to(&point.params, beta, &code).map_err(|e| Failure::at(&where_(), e))?;
                let e = run.with_mc.then(|| p_to_mc(&point, beta, &mc)).transpose().map_err(|e| Failure::at(&where_(), e))?;
                with_estimate(v, e)
            } else {
                let code = code_for_pso(point.tau_e).map_err(Failure::from_validation)?;
                let v = analytic::p_so(&point.params, beta, &code, &quad).map_err(|e| Failure::at(&where_(), e))?;
                let e = run.with_mc.then(|| p_so_mc(&point, beta, &mc)).transpose().map_err(|e| Failure::at(&where_(), e))?;
                with_estimate(v, e)
            };
            Ok(cell)
        })
        .collect::<Result<_, Failure>>()?;
    let mut table = Table::new(cols);
    for (i, &x) in xs.iter().enumerate() {
        let mut row = vec![x];
        for j in 0..curves.len() {
            row.extend(&values[i * curves.len() + j]);
        }
        table.rows.push(row);
    }
    Ok((table, Vec::new()))
}

fn with_estimate(v: f64, e: Option<MonteCarloEstimate>) -> Vec<f64> {
    match e {
        Some(e) => vec![v, e.estimate, e.std_error],
        None => vec![v],
    }
}

fn antenna_counts(curves: &[f64]) -> Vec<u32> {
    curves.iter().map(|&n| n as u32).collect()
}

fn fig4(run: &RunConfig, curves: &[f64], xs: &[f64]) -> Result<(Table, Vec<String>), Failure> {
    let cfg = OptimizerConfig::with_phi(run.phi);
    let beta = PowerAllocation::new(run.beta.unwrap_or(DEFAULT_BETA)).map_err(Failure::from_validation)?;
    let mut cols = vec!["rate_b".to_string()];
    let mut diagnostics = Vec::new();
    let mut series = Vec::new();
    for n in antenna_counts(curves) {
        cols.push(format!("t_s_n{n}"));
        let params = fig45_params(run, n)?;
        params.check_allocation(beta).map_err(Failure::from_validation)?;
        let r_e = solve_re_star(&params, beta, &cfg).map_err(|e| Failure::at(&format!("N = {n}"), e))?;
        diagnostics.push(format!("n={n} r_e_star={}", crate::output::format_value(r_e)));
        series.push(xs.iter().map(|&r_b| throughput_at(&params, beta, r_b, r_e)).collect::<Vec<_>>());
    }
    let mut table = Table::new(cols);
    for (i, &x) in xs.iter().enumerate() {
        let mut row = vec![x];
        row.extend(series.iter().map(|s| s[i]));
        table.rows.push(row);
    }
    Ok((table, diagnostics))
}

fn fig5(run: &RunConfig, curves: &[f64], xs: &[f64]) -> Result<(Table, Vec<String>), Failure> {
    let mut cfg = OptimizerConfig::with_phi(run.phi);
    cfg.beta_grid = xs.to_vec();
    cfg.validate().map_err(Failure::from_validation)?;
    let mut cols = vec!["beta".to_string()];
    let mut diagnostics = Vec::new();
    let mut series = Vec::new();
    for n in antenna_counts(curves) {
        cols.push(format!("t_s_star_n{n}"));
        let params = fig45_params(run, n)?;
        let res = solve_joint(&params, &cfg).map_err(|e| Failure::at(&format!("N = {n}"), e))?;
        diagnostics.push(format!(
            "n={n} beta_star={} r_b_star={} r_e_star={} t_s_star={}",
            crate::output::format_value(res.beta_star),
            crate::output::format_value(res.r_b_star),
            crate::output::format_value(res.r_e_star),
            crate::output::format_value(res.t_s_star),
        ));
        // The trace also holds refinement points; keep the plotted grid.
        let column: Vec<f64> = xs
            .iter()
            .map(|&b| {
                res.trace
                    .iter()
                    .find(|r| r.beta == b)
                    .map_or(0.0, |r| r.t_s_star)
            })
            .collect();
        series.push(column);
    }
    let mut table = Table::new(cols);
    for (i, &x) in xs.iter().enumerate() {
        let mut row = vec![x];
        row.extend(series.iter().map(|s| s[i]));
        table.rows.push(row);
    }
    Ok((table, diagnostics))
}
