//! Wiretap code rates and power split maximising the secrecy throughput
//! subject to `P_so <= phi`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{p_so_at_threshold, transmission_success};
use crate::error::{invalid, Error, Result};
use crate::model::{rate_to_threshold, PowerAllocation, SystemParams};
use crate::quadrature::QuadratureConfig;

/// Slack allowed when checking that `P_so` decreases along evaluated points.
const MONOTONE_TOL: f64 = 1e-7;
const COARSE_POINTS: usize = 201;
const DENSE_POINTS: usize = 10_000;
const REFINE_POINTS: usize = 9;
const INV_PHI: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    /// Secrecy outage constraint `phi`.
    pub phi: f64,
    pub rate_b_bracket: [f64; 2],
    /// Tolerance on `P_so(R_e) - phi`.
    pub root_tol: f64,
    /// Tolerance on rates and on throughput ties (bits per channel use).
    pub rate_tol: f64,
    pub beta_grid: Vec<f64>,
    pub refine_passes: usize,
    pub quadrature: QuadratureConfig,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        let mut beta_grid: Vec<f64> = (1..=99).map(|i| f64::from(i) / 100.0).collect();
        beta_grid.push(1.0);
        Self {
            phi: 0.1,
            rate_b_bracket: [0.0, 20.0],
            root_tol: 1e-8,
            rate_tol: 1e-6,
            beta_grid,
            refine_passes: 2,
            quadrature: QuadratureConfig::default(),
        }
    }
}

impl OptimizerConfig {
    pub fn with_phi(phi: f64) -> Self {
        Self {
            phi,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.phi > 0.0 && self.phi < 1.0) {
            return Err(invalid("phi", "must lie in (0, 1)"));
        }
        let [lo, hi] = self.rate_b_bracket;
        if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
            return Err(invalid("rate_b_bracket", "must satisfy 0 <= min < max < inf"));
        }
        if !(self.root_tol > 0.0 && self.rate_tol > 0.0) {
            return Err(invalid("root_tol", "tolerances must be positive"));
        }
        if self.beta_grid.is_empty() {
            return Err(invalid("beta_grid", "must not be empty"));
        }
        if self.beta_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("beta_grid", "must be strictly increasing"));
        }
        for &b in &self.beta_grid {
            PowerAllocation::new(b)?;
        }
        self.quadrature.validate()
    }
}

/// Optimal rates for one power split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePairResult {
    pub beta: f64,
    pub r_b_star: f64,
    pub r_e_star: f64,
    pub t_s_star: f64,
    pub feasible: bool,
    /// Set when the coarse throughput grid was not unimodal and the dense
    /// grid search was used instead of golden-section refinement.
    pub grid_fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub beta_star: f64,
    pub r_b_star: f64,
    pub r_e_star: f64,
    pub t_s_star: f64,
    pub feasible: bool,
    /// Every evaluated power split, ordered by `beta`.
    pub trace: Vec<RatePairResult>,
}

/// Secrecy throughput at rate `r_b` for a fixed `r_e`.
pub fn throughput_at(params: &SystemParams, beta: PowerAllocation, r_b: f64, r_e: f64) -> f64 {
    if r_b <= r_e {
        return 0.0;
    }
    0.5 * (r_b - r_e) * transmission_success(params, beta, rate_to_threshold(r_b))
}

fn p_so_at_rate(params: &SystemParams, beta: PowerAllocation, r_e: f64, cfg: &OptimizerConfig) -> Result<f64> {
    p_so_at_threshold(params, beta, rate_to_threshold(r_e), &cfg.quadrature)
}

/// Smallest `R_e` with `P_so(R_e) = phi`, found by doubling a bracket and
/// then Illinois false position with bisection safeguarding.
pub fn solve_re_star(params: &SystemParams, beta: PowerAllocation, cfg: &OptimizerConfig) -> Result<f64> {
    cfg.validate()?;
    params.check_allocation(beta)?;
    if params.eav_density() == 0.0 {
        return Ok(0.0);
    }
    let limit = cfg.rate_b_bracket[1] + 10.0;
    let g = |r: f64| p_so_at_rate(params, beta, r, cfg).map(|p| p - cfg.phi);

    let mut visited: Vec<(f64, f64)> = Vec::new();
    let mut lo = 0.0;
    let mut g_lo = g(lo)?;
    visited.push((lo, g_lo));
    if g_lo <= 0.0 {
        return Ok(0.0);
    }
    let mut hi = 0.5_f64.min(limit);
    let mut g_hi;
    loop {
        g_hi = g(hi)?;
        visited.push((hi, g_hi));
        check_monotone(&visited, cfg.phi)?;
        if g_hi.abs() <= cfg.root_tol {
            return Ok(hi);
        }
        if g_hi < 0.0 {
            break;
        }
        if hi >= limit {
            return Err(Error::NoBracket { limit });
        }
        lo = hi;
        g_lo = g_hi;
        hi = (2.0 * hi).min(limit);
    }

    // Illinois: halve the retained endpoint's value when the same side
    // survives twice in a row; fall back to bisection when progress stalls.
    let mut side = 0i8;
    for _ in 0..200 {
        let width = hi - lo;
        let mut x = hi - g_hi * width / (g_hi - g_lo);
        if !(x > lo && x < hi) || width < 1e-15 * hi.max(1.0) {
            x = 0.5 * (lo + hi);
        }
        if width <= 4.0 * f64::EPSILON * hi.max(1.0) {
            return Ok(x);
        }
        let gx = g(x)?;
        visited.push((x, gx));
        if gx.abs() <= cfg.root_tol {
            check_monotone(&visited, cfg.phi)?;
            return Ok(x);
        }
        let before = width;
        if gx > 0.0 {
            lo = x;
            g_lo = gx;
            if side == 1 {
                g_hi *= 0.5;
            }
            side = 1;
        } else {
            hi = x;
            g_hi = gx;
            if side == -1 {
                g_lo *= 0.5;
            }
            side = -1;
        }
        if hi - lo > 0.75 * before {
            // Poor reduction: force a bisection step.
            let mid = 0.5 * (lo + hi);
            let gm = g(mid)?;
            visited.push((mid, gm));
            if gm.abs() <= cfg.root_tol {
                check_monotone(&visited, cfg.phi)?;
                return Ok(mid);
            }
            if gm > 0.0 {
                lo = mid;
                g_lo = gm;
            } else {
                hi = mid;
                g_hi = gm;
            }
            side = 0;
        }
    }
    check_monotone(&visited, cfg.phi)?;
    Ok(0.5 * (lo + hi))
}

fn check_monotone(visited: &[(f64, f64)], phi: f64) -> Result<()> {
    let mut pts = visited.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    for w in pts.windows(2) {
        if w[1].1 > w[0].1 + MONOTONE_TOL {
            return Err(Error::NonMonotone {
                lower: w[0].0,
                upper: w[1].0,
                p_lower: w[0].1 + phi,
                p_upper: w[1].1 + phi,
            });
        }
    }
    Ok(())
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Whether samples rise then fall, ignoring wiggles up to `tol`.
fn is_unimodal(values: &[f64], tol: f64) -> bool {
    let peak = argmax(values);
    values[..=peak].windows(2).all(|w| w[1] >= w[0] - tol) && values[peak..].windows(2).all(|w| w[1] <= w[0] + tol)
}

/// Index of the first maximum.
fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Best `R_b` on `[r_e, r_max]` for a fixed `r_e`: returns `(r_b, t_s, fallback)`.
fn maximize_rate_b(params: &SystemParams, beta: PowerAllocation, r_e: f64, r_max: f64, cfg: &OptimizerConfig) -> (f64, f64, bool) {
    let f = |r: f64| throughput_at(params, beta, r, r_e);
    let refine = |grid: &[f64], values: &[f64]| {
        let i = argmax(values);
        let a = grid[i.saturating_sub(1)];
        let b = grid[(i + 1).min(grid.len() - 1)];
        let (x, fx) = golden_max(f, a, b, 1e-3 * cfg.rate_tol);
        if fx >= values[i] {
            (x, fx)
        } else {
            (grid[i], values[i])
        }
    };
    let coarse = linspace(r_e, r_max, COARSE_POINTS);
    let values: Vec<f64> = coarse.iter().map(|&r| f(r)).collect();
    if is_unimodal(&values, cfg.rate_tol) {
        let (x, fx) = refine(&coarse, &values);
        return (x, fx, false);
    }
    log::warn!("throughput is not unimodal in R_b at beta = {}; using a dense grid", beta.beta());
    let dense = linspace(r_e, r_max, DENSE_POINTS);
    let values: Vec<f64> = dense.iter().map(|&r| f(r)).collect();
    let (x, fx) = refine(&dense, &values);
    (x, fx, true)
}

/// Optimal `(R_b*, R_e*)` for a fixed power split.
pub fn solve_rate_pair(params: &SystemParams, beta: PowerAllocation, cfg: &OptimizerConfig) -> Result<RatePairResult> {
    let r_e = solve_re_star(params, beta, cfg)?;
    let [r_min, r_max] = cfg.rate_b_bracket;
    let infeasible = RatePairResult {
        beta: beta.beta(),
        r_b_star: r_e,
        r_e_star: r_e,
        t_s_star: 0.0,
        feasible: false,
        grid_fallback: false,
    };
    let lower = r_e.max(r_min);
    if lower >= r_max {
        return Ok(infeasible);
    }
    let (r_b, t_s, grid_fallback) = maximize_rate_b(params, beta, r_e, r_max, cfg);
    if !(t_s > 0.0) || r_b <= r_e {
        return Ok(RatePairResult { grid_fallback, ..infeasible });
    }
    Ok(RatePairResult {
        beta: beta.beta(),
        r_b_star: r_b,
        r_e_star: r_e,
        t_s_star: t_s,
        feasible: true,
        grid_fallback,
    })
}

fn evaluate(params: &SystemParams, betas: &[f64], cfg: &OptimizerConfig) -> Result<Vec<RatePairResult>> {
    betas
        .par_iter()
        .map(|&b| solve_rate_pair(params, PowerAllocation::new(b)?, cfg))
        .collect()
}

/// Smallest `beta` whose throughput is within `rate_tol` of the best.
fn incumbent(trace: &[RatePairResult], rate_tol: f64) -> usize {
    let best = trace.iter().map(|r| r.t_s_star).fold(f64::NEG_INFINITY, f64::max);
    trace.iter().position(|r| r.t_s_star >= best - rate_tol).unwrap_or(0)
}

/// Joint optimum over the power split and both rates.
pub fn solve_joint(params: &SystemParams, cfg: &OptimizerConfig) -> Result<OptimizationResult> {
    cfg.validate()?;
    let no_eavesdroppers = params.eav_density() == 0.0;
    let mut grid: Vec<f64> = if params.num_antennas() == 1 {
        // No null space: only full information power is admissible.
        vec![1.0]
    } else {
        cfg.beta_grid.clone()
    };
    if no_eavesdroppers && grid.last() != Some(&1.0) {
        grid.push(1.0);
    }
    let mut trace = evaluate(params, &grid, cfg)?;
    let passes = if no_eavesdroppers { 0 } else { cfg.refine_passes };
    for _ in 0..passes {
        if trace.len() < 2 {
            break;
        }
        let i = incumbent(&trace, cfg.rate_tol);
        let lo = trace[i.saturating_sub(1)].beta;
        let hi = trace[(i + 1).min(trace.len() - 1)].beta;
        let fresh: Vec<f64> = linspace(lo, hi, REFINE_POINTS + 2)
            .into_iter()
            .filter(|b| *b > 0.0 && *b <= 1.0 && !trace.iter().any(|r| r.beta == *b))
            .collect();
        if fresh.is_empty() {
            break;
        }
        trace.extend(evaluate(params, &fresh, cfg)?);
        trace.sort_by(|a, b| a.beta.total_cmp(&b.beta));
    }
    // Without eavesdroppers the throughput strictly increases in beta, so the
    // tie rule would only pick up search noise next to beta = 1.
    let best = if no_eavesdroppers {
        trace[trace.len() - 1]
    } else {
        trace[incumbent(&trace, cfg.rate_tol)]
    };
    Ok(OptimizationResult {
        beta_star: best.beta,
        r_b_star: best.r_b_star,
        r_e_star: best.r_e_star,
        t_s_star: if best.feasible { best.t_s_star } else { 0.0 },
        feasible: best.feasible,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fig5(n: u32) -> SystemParams {
        SystemParams::normalized(n, 4.0, 1.0, 100.0, 5.0).unwrap()
    }

    fn beta(b: f64) -> PowerAllocation {
        PowerAllocation::new(b).unwrap()
    }

    #[test]
    fn no_eavesdroppers_gives_zero_re() {
        let p = SystemParams::normalized(4, 4.0, 0.0, 100.0, 5.0).unwrap();
        assert_eq!(solve_re_star(&p, beta(0.5), &OptimizerConfig::with_phi(0.4)).unwrap(), 0.0);
    }

    #[test]
    fn root_hits_constraint() {
        let cfg = OptimizerConfig::with_phi(0.4);
        let p = fig5(4);
        let r = solve_re_star(&p, beta(0.5), &cfg).unwrap();
        let pso = p_so_at_rate(&p, beta(0.5), r, &cfg).unwrap();
        assert!((pso - 0.4).abs() <= cfg.root_tol, "{pso}");
    }

    #[test]
    fn loose_constraint_pushes_re_down() {
        let p = fig5(4);
        let roots: Vec<f64> = [0.1, 0.4, 0.9, 0.999, 1.0 - 1e-12]
            .iter()
            .map(|&phi| solve_re_star(&p, beta(0.5), &OptimizerConfig::with_phi(phi)).unwrap())
            .collect();
        assert!(roots.windows(2).all(|w| w[1] < w[0]), "{roots:?}");
        assert!(roots[4] < 0.1, "{roots:?}");
    }

    #[test]
    fn bracket_limit_reported() {
        let mut cfg = OptimizerConfig::with_phi(1e-12);
        cfg.rate_b_bracket = [0.0, 0.5];
        let p = SystemParams::normalized(2, 4.0, 50.0, 1.0, 1000.0).unwrap();
        assert!(matches!(solve_re_star(&p, beta(1.0), &cfg), Err(Error::NoBracket { .. })));
    }

    #[test]
    fn invalid_config_rejected() {
        let p = fig5(4);
        assert!(solve_re_star(&p, beta(0.5), &OptimizerConfig::with_phi(1.0)).is_err());
        let mut cfg = OptimizerConfig::with_phi(0.4);
        cfg.rate_b_bracket = [3.0, 1.0];
        assert!(solve_rate_pair(&p, beta(0.5), &cfg).is_err());
        let mut cfg = OptimizerConfig::with_phi(0.4);
        cfg.beta_grid = vec![0.5, 0.2];
        assert!(solve_joint(&p, &cfg).is_err());
    }

    #[test]
    fn infeasible_when_re_exceeds_bracket() {
        let p = fig5(4);
        let mut cfg = OptimizerConfig::with_phi(0.4);
        let r_e = solve_re_star(&p, beta(0.5), &cfg).unwrap();
        cfg.rate_b_bracket = [0.0, 0.5 * r_e];
        let res = solve_rate_pair(&p, beta(0.5), &cfg).unwrap();
        assert!(!res.feasible);
        assert_eq!(res.t_s_star, 0.0);
        assert_eq!(res.r_b_star, res.r_e_star);
    }

    #[test]
    fn rate_pair_matches_exponential_grid_oracle() {
        // N = 1, beta = 1, unit mean SNRs: success = exp(-2 tau_b).
        let p = SystemParams::normalized(1, 4.0, 0.0, 1.0, 1.0).unwrap();
        let cfg = OptimizerConfig::with_phi(0.4);
        let res = solve_rate_pair(&p, beta(1.0), &cfg).unwrap();
        let oracle = |r: f64| 0.5 * r * (-2.0 * (2f64.powf(r) - 1.0)).exp();
        let grid_best = (0..10_000)
            .map(|i| oracle(20.0 * i as f64 / 9_999.0))
            .fold(0.0, f64::max);
        assert!(res.feasible && !res.grid_fallback);
        assert!((res.t_s_star - grid_best).abs() <= cfg.rate_tol);
        assert!(res.t_s_star >= grid_best - 1e-12);
        // Stationary point of r exp(-2(2^r - 1)): 1 = 2 r ln2 2^r.
        let r = res.r_b_star;
        assert_relative_eq!(2.0 * r * std::f64::consts::LN_2 * 2f64.powf(r), 1.0, max_relative = 1e-4);
    }

    #[test]
    fn unimodality_detector() {
        assert!(is_unimodal(&[0.0, 1.0, 2.0, 1.0, 0.0], 1e-9));
        assert!(!is_unimodal(&[0.0, 2.0, 1.0, 2.0, 0.0], 1e-9));
        assert!(is_unimodal(&[0.0, 2.0, 2.0 - 1e-12, 2.0, 0.0], 1e-9));
    }

    #[test]
    fn no_eavesdroppers_uses_full_power() {
        let p = SystemParams::normalized(4, 4.0, 0.0, 100.0, 5.0).unwrap();
        let mut cfg = OptimizerConfig::with_phi(0.4);
        cfg.beta_grid = vec![0.25, 0.5, 0.75, 1.0];
        cfg.refine_passes = 1;
        let res = solve_joint(&p, &cfg).unwrap();
        assert_eq!(res.beta_star, 1.0);
        assert_eq!(res.r_e_star, 0.0);
        assert!(res.trace.windows(2).all(|w| w[0].beta < w[1].beta));
    }

    #[test]
    fn joint_dominates_trace_and_prefers_small_beta() {
        let p = fig5(4);
        let mut cfg = OptimizerConfig::with_phi(0.4);
        cfg.beta_grid = (1..=10).map(|i| f64::from(i) / 10.0).collect();
        cfg.refine_passes = 1;
        let res = solve_joint(&p, &cfg).unwrap();
        for r in &res.trace {
            assert!(res.t_s_star >= r.t_s_star - cfg.rate_tol);
        }
        let first = res.trace.iter().position(|r| r.t_s_star >= res.t_s_star - cfg.rate_tol).unwrap();
        assert_eq!(res.trace[first].beta, res.beta_star);
        assert!(res.trace.len() > 10);
    }

    #[test]
    fn single_antenna_joint_is_full_power() {
        let p = fig5(1);
        let res = solve_joint(&p, &OptimizerConfig::with_phi(0.4)).unwrap();
        assert_eq!(res.beta_star, 1.0);
        assert_eq!(res.trace.len(), 1);
    }
}
