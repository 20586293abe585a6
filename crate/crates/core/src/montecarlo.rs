//! Monte Carlo simulator of the relay wiretap channel, used as an oracle for
//! the analytic outage expressions.
//!
//! Each trial draws its randomness from its own ChaCha8 stream (stream id =
//! trial index), so results do not depend on how trials are scheduled across
//! threads.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::model::{PowerAllocation, SystemParams, WiretapCode};

/// Target for the probability that an eavesdropper outside the disc would
/// have exceeded the threshold.
const TRUNCATION_BIAS: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SimulationMode {
    /// Fading gains drawn from their exact distributions.
    #[default]
    Distributional,
    /// Complex channel vectors and an explicit null-space beamformer.
    ExplicitBeamformer,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloConfig {
    pub num_trials: u64,
    pub seed: u64,
    /// Radius of the simulated disc around the source; `None` picks the
    /// default bound for the operating point.
    pub disc_radius: Option<f64>,
    pub mode: SimulationMode,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        Self {
            num_trials: 1_000_000,
            seed: 0,
            disc_radius: None,
            mode: SimulationMode::Distributional,
        }
    }
}

impl MonteCarloConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_trials == 0 {
            return Err(invalid("num_trials", "must be at least 1"));
        }
        if let Some(r) = self.disc_radius {
            if !(r > 0.0 && r.is_finite()) {
                return Err(invalid("disc_radius", format!("must be finite and > 0, got {r}")));
            }
        }
        Ok(())
    }
}

/// Default disc radius: `2 max{d_sr, (beta P_s ln(1e4) / (tau_e sigma_i1^2))^{1/eta},
/// (P_r ln(1e4) / (tau_e sigma_i2^2))^{1/eta}}`.
pub fn default_disc_radius(params: &SystemParams, beta: PowerAllocation, tau_e: f64) -> Result<f64> {
    if !(tau_e > 0.0) {
        return Err(invalid("disc_radius", "tau_e = 0 requires an explicit disc radius"));
    }
    let eta = params.path_loss_exp();
    let log_bias = (1.0 / TRUNCATION_BIAS).ln();
    let source = (beta.beta() * params.power_source() * log_bias / (tau_e * params.noise_eav1())).powf(1.0 / eta);
    let relay = (params.power_relay() * log_bias / (tau_e * params.noise_eav2())).powf(1.0 / eta);
    Ok(2.0 * params.dist_sr().max(source).max(relay))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub num_trials: u64,
    pub config: MonteCarloConfig,
}

impl MonteCarloEstimate {
    fn from_count(hits: u64, config: MonteCarloConfig) -> Self {
        let n = config.num_trials as f64;
        let p = hits as f64 / n;
        Self {
            estimate: p,
            std_error: (p * (1.0 - p) / n).sqrt(),
            num_trials: config.num_trials,
            config,
        }
    }

    /// Binomial standard error if the true probability were `p`.
    pub fn std_error_at(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.num_trials as f64).sqrt()
    }
}

/// Eavesdropper position relative to the source; the relay sits at
/// `(dist_sr, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Polar {
    pub d_si: f64,
    pub theta: f64,
}

impl Polar {
    pub fn distance_to_relay(&self, d_sr: f64) -> f64 {
        let s = (0.5 * self.theta).sin();
        ((self.d_si - d_sr).powi(2) + 4.0 * d_sr * self.d_si * s * s).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointProcessSample {
    pub points: Vec<Polar>,
}

/// RNG for trial `index` under `seed`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let sample: f64 = Poisson::new(mean).expect("positive finite mean").sample(rng);
    sample as u64
}

fn uniform_disc_point<R: Rng + ?Sized>(r_max: f64, rng: &mut R) -> Polar {
    let u: f64 = rng.random();
    let v: f64 = rng.random();
    Polar {
        d_si: r_max * u.sqrt(),
        theta: -PI + 2.0 * PI * v,
    }
}

/// Homogeneous PPP of density `lambda` on the disc of radius `r_max` around
/// the source.
pub fn sample_ppp<R: Rng + ?Sized>(lambda: f64, r_max: f64, rng: &mut R) -> PointProcessSample {
    let count = poisson_count(lambda * PI * r_max * r_max, rng);
    PointProcessSample {
        points: (0..count).map(|_| uniform_disc_point(r_max, rng)).collect(),
    }
}

fn exp1<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    Exp1.sample(rng)
}

/// Gamma(k, 1) for integer `k` as a sum of unit exponentials.
fn erlang<R: Rng + ?Sized>(k: u32, rng: &mut R) -> f64 {
    (0..k).map(|_| exp1(rng)).sum()
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// `n` i.i.d. CN(0, 1) channel coefficients.
pub fn complex_gaussian_vec<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Complex64> {
    (0..n).map(|_| complex_gaussian(rng)).collect()
}

/// `Gamma_D = min{beta gamma_sr ||h_sr||^2, gamma_rd |h_rd|^2}`.
pub fn trial_gamma_d<R: Rng + ?Sized>(params: &SystemParams, beta: PowerAllocation, rng: &mut R) -> f64 {
    let g_sr = erlang(params.num_antennas(), rng);
    let g_rd = exp1(rng);
    (beta.beta() * params.mean_snr_sr() * g_sr).min(params.mean_snr_rd() * g_rd)
}

/// First-slot SINR for information gain `s` and AN gain `a`.
fn sinr_si(params: &SystemParams, beta: PowerAllocation, d_si: f64, s: f64, a: f64) -> f64 {
    let mean = params.mean_snr_si(d_si);
    let share = beta.noise_share(params.num_antennas());
    beta.beta() * mean * s / (share * mean * a + 1.0)
}

/// `Gamma_E = max_i max{gamma_si, gamma_ri}` with fading drawn from its
/// distributions: `S ~ Exp(1)`, `A ~ Gamma(N - 1, 1)`, `|h_ri|^2 ~ Exp(1)`.
pub fn trial_gamma_e<R: Rng + ?Sized>(
    params: &SystemParams,
    beta: PowerAllocation,
    ppp: &PointProcessSample,
    rng: &mut R,
) -> f64 {
    let an_dims = if beta.beta() < 1.0 { params.num_antennas() - 1 } else { 0 };
    ppp.points
        .iter()
        .map(|pt| {
            let s = exp1(rng);
            let a = erlang(an_dims, rng);
            let g_si = sinr_si(params, beta, pt.d_si, s, a);
            let g_ri = params.mean_snr_ri(pt.distance_to_relay(params.dist_sr())) * exp1(rng);
            g_si.max(g_ri)
        })
        .fold(0.0, f64::max)
}

/// Source precoder `W = [w_S, W_AN]`: matched filter to `h_sr` plus an
/// orthonormal basis of its null space. Stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Beamformer {
    n: usize,
    columns: Vec<Complex64>,
}

impl Beamformer {
    /// Builds `W` from a Householder reflection that maps `e_1` onto the
    /// phase-aligned `h_sr^H / ||h_sr||`.
    pub fn design(h_sr: &[Complex64]) -> Self {
        let n = h_sr.len();
        let norm = h_sr.iter().map(|h| h.norm_sqr()).sum::<f64>().sqrt();
        let u: Vec<Complex64> = h_sr.iter().map(|h| h.conj() / norm).collect();
        let phase = if u[0].norm() > 0.0 { u[0] / u[0].norm() } else { Complex64::new(1.0, 0.0) };
        let x: Vec<Complex64> = u.iter().map(|&ui| ui * phase.conj()).collect();
        let mut v = x.clone();
        v[0] -= 1.0;
        let v_norm_sq: f64 = v.iter().map(|c| c.norm_sqr()).sum();
        let mut columns = vec![Complex64::new(0.0, 0.0); n * n];
        for k in 0..n {
            for j in 0..n {
                let identity = if j == k { 1.0 } else { 0.0 };
                columns[k * n + j] = if v_norm_sq > 1e-300 {
                    Complex64::new(identity, 0.0) - 2.0 * v[j] * v[k].conj() / v_norm_sq
                } else {
                    Complex64::new(identity, 0.0)
                };
            }
        }
        columns[..n].copy_from_slice(&u);
        Self { n, columns }
    }

    pub fn column(&self, k: usize) -> &[Complex64] {
        &self.columns[k * self.n..(k + 1) * self.n]
    }

    /// `h . w_k` for a row vector `h`.
    fn project(&self, h: &[Complex64], k: usize) -> Complex64 {
        h.iter().zip(self.column(k)).map(|(a, b)| a * b).sum()
    }

    /// `(|h w_S|^2, ||h W_AN||^2)`.
    pub fn gains(&self, h: &[Complex64]) -> (f64, f64) {
        let info = self.project(h, 0).norm_sqr();
        let noise = (1..self.n).map(|k| self.project(h, k).norm_sqr()).sum();
        (info, noise)
    }

    /// `max |(W W^H - I)_{jk}|`.
    pub fn unitarity_residual(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for j in 0..n {
            for k in 0..n {
                let entry: Complex64 = (0..n).map(|c| self.columns[c * n + j] * self.columns[c * n + k].conj()).sum();
                let target = if j == k { 1.0 } else { 0.0 };
                worst = worst.max((entry - target).norm());
            }
        }
        worst
    }

    /// `max_k |h_sr w_k|` over the AN columns.
    pub fn null_space_residual(&self, h_sr: &[Complex64]) -> f64 {
        (1..self.n).map(|k| self.project(h_sr, k).norm()).fold(0.0, f64::max)
    }

    /// `| |h_sr w_S|^2 - ||h_sr||^2 |`.
    pub fn matched_filter_residual(&self, h_sr: &[Complex64]) -> f64 {
        let full: f64 = h_sr.iter().map(|h| h.norm_sqr()).sum();
        (self.project(h_sr, 0).norm_sqr() - full).abs()
    }
}

/// `Gamma_E` from explicit channel vectors: draws `h_sr`, designs `W`, then
/// forms each eavesdropper's SINR from `h_si W`.
pub fn explicit_beamformer_trial<R: Rng + ?Sized>(
    params: &SystemParams,
    beta: PowerAllocation,
    ppp: &PointProcessSample,
    rng: &mut R,
) -> f64 {
    let n = params.num_antennas() as usize;
    let w = Beamformer::design(&complex_gaussian_vec(n, rng));
    let mut h_si = vec![Complex64::new(0.0, 0.0); n];
    ppp.points
        .iter()
        .map(|pt| {
            for h in h_si.iter_mut() {
                *h = complex_gaussian(rng);
            }
            let (s, a) = w.gains(&h_si);
            let g_si = sinr_si(params, beta, pt.d_si, s, a);
            let g_ri = params.mean_snr_ri(pt.distance_to_relay(params.dist_sr())) * complex_gaussian(rng).norm_sqr();
            g_si.max(g_ri)
        })
        .fold(0.0, f64::max)
}

/// One destination-SNR draw in explicit mode: `beta gamma_sr |h_sr w_S|^2`
/// against `gamma_rd |h_rd|^2`.
fn explicit_gamma_d<R: Rng + ?Sized>(params: &SystemParams, beta: PowerAllocation, rng: &mut R) -> f64 {
    let h_sr = complex_gaussian_vec(params.num_antennas() as usize, rng);
    let w = Beamformer::design(&h_sr);
    let gain = w.project(&h_sr, 0).norm_sqr();
    let h_rd = complex_gaussian(rng).norm_sqr();
    (beta.beta() * params.mean_snr_sr() * gain).min(params.mean_snr_rd() * h_rd)
}

fn count_hits<F>(cfg: &MonteCarloConfig, hit: F) -> u64
where
    F: Fn(&mut ChaCha8Rng) -> bool + Sync,
{
    (0..cfg.num_trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(cfg.seed, t);
            u64::from(hit(&mut rng))
        })
        .sum()
}

/// Empirical `Pr(Gamma_D <= tau_b)`.
pub fn estimate_p_to(
    params: &SystemParams,
    beta: PowerAllocation,
    code: &WiretapCode,
    cfg: &MonteCarloConfig,
) -> Result<MonteCarloEstimate> {
    cfg.validate()?;
    params.check_allocation(beta)?;
    let tau_b = code.tau_b();
    if tau_b <= 0.0 {
        return Ok(MonteCarloEstimate::from_count(0, *cfg));
    }
    let hits = match cfg.mode {
        SimulationMode::Distributional => count_hits(cfg, |rng| trial_gamma_d(params, beta, rng) <= tau_b),
        SimulationMode::ExplicitBeamformer => count_hits(cfg, |rng| explicit_gamma_d(params, beta, rng) <= tau_b),
    };
    Ok(MonteCarloEstimate::from_count(hits, *cfg))
}

/// Empirical `Pr(Gamma_E > tau_e)`.
///
/// Eavesdroppers are generated one at a time and a trial stops at the first
/// one above the threshold. In distributional mode the AN gain is only drawn
/// when the information gain alone already clears the threshold, since the
/// AN term can only lower the SINR.
pub fn estimate_p_so(
    params: &SystemParams,
    beta: PowerAllocation,
    code: &WiretapCode,
    cfg: &MonteCarloConfig,
) -> Result<MonteCarloEstimate> {
    cfg.validate()?;
    params.check_allocation(beta)?;
    let lambda = params.eav_density();
    let tau_e = code.tau_e();
    let r_max = match cfg.disc_radius {
        Some(r) => r,
        None if lambda == 0.0 => params.dist_sr(),
        None => default_disc_radius(params, beta, tau_e)?,
    };
    let resolved = MonteCarloConfig {
        disc_radius: Some(r_max),
        ..*cfg
    };
    if lambda == 0.0 {
        return Ok(MonteCarloEstimate::from_count(0, resolved));
    }
    let mean_count = lambda * PI * r_max * r_max;
    let d_sr = params.dist_sr();
    let an_dims = if beta.beta() < 1.0 { params.num_antennas() - 1 } else { 0 };
    let share_over_beta = beta.noise_share(params.num_antennas()) / beta.beta();
    let n = params.num_antennas() as usize;

    let hits = match cfg.mode {
        SimulationMode::Distributional => count_hits(&resolved, |rng| {
            let count = poisson_count(mean_count, rng);
            (0..count).any(|_| {
                let pt = uniform_disc_point(r_max, rng);
                let info_floor = tau_e / (beta.beta() * params.mean_snr_si(pt.d_si));
                let s = exp1(rng);
                let slot1 = s > info_floor && s > info_floor + tau_e * share_over_beta * erlang(an_dims, rng);
                let slot2 = params.mean_snr_ri(pt.distance_to_relay(d_sr)) * exp1(rng) > tau_e;
                slot1 || slot2
            })
        }),
        SimulationMode::ExplicitBeamformer => count_hits(&resolved, |rng| {
            let w = Beamformer::design(&complex_gaussian_vec(n, rng));
            let mut h_si = vec![Complex64::new(0.0, 0.0); n];
            let count = poisson_count(mean_count, rng);
            (0..count).any(|_| {
                let pt = uniform_disc_point(r_max, rng);
                for h in h_si.iter_mut() {
                    *h = complex_gaussian(rng);
                }
                let (s, a) = w.gains(&h_si);
                let slot1 = sinr_si(params, beta, pt.d_si, s, a) > tau_e;
                let slot2 = params.mean_snr_ri(pt.distance_to_relay(d_sr)) * complex_gaussian(rng).norm_sqr() > tau_e;
                slot1 || slot2
            })
        }),
    };
    Ok(MonteCarloEstimate::from_count(hits, resolved))
}

/// `count` independent draws of `Gamma_E` on a disc of radius `r_max`.
pub fn sample_gamma_e(
    params: &SystemParams,
    beta: PowerAllocation,
    r_max: f64,
    count: u64,
    seed: u64,
    mode: SimulationMode,
) -> Result<Vec<f64>> {
    params.check_allocation(beta)?;
    if !(r_max > 0.0 && r_max.is_finite()) {
        return Err(invalid("disc_radius", "must be finite and > 0"));
    }
    let lambda = params.eav_density();
    Ok((0..count)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let ppp = sample_ppp(lambda, r_max, &mut rng);
            match mode {
                SimulationMode::Distributional => trial_gamma_e(params, beta, &ppp, &mut rng),
                SimulationMode::ExplicitBeamformer => explicit_beamformer_trial(params, beta, &ppp, &mut rng),
            }
        })
        .collect())
}

/// Kolmogorov-Smirnov statistics.
pub mod ks {
    /// Asymptotic critical value of the two-sample statistic at level `alpha`.
    pub fn two_sample_critical(n: usize, m: usize, alpha: f64) -> f64 {
        let (n, m) = (n as f64, m as f64);
        (-(0.5 * alpha).ln() / 2.0).sqrt() * ((n + m) / (n * m)).sqrt()
    }

    /// Asymptotic critical value of the one-sample statistic.
    pub fn one_sample_critical(n: usize, alpha: f64) -> f64 {
        (-(0.5 * alpha).ln() / 2.0).sqrt() / (n as f64).sqrt()
    }

    /// `sup |F_a - F_b|` of two empirical CDFs; ties are stepped together.
    pub fn two_sample_statistic(a: &[f64], b: &[f64]) -> f64 {
        let mut a = a.to_vec();
        let mut b = b.to_vec();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        let (n, m) = (a.len() as f64, b.len() as f64);
        let (mut i, mut j) = (0, 0);
        let mut d: f64 = 0.0;
        while i < a.len() && j < b.len() {
            let x = a[i].min(b[j]);
            while i < a.len() && a[i] <= x {
                i += 1;
            }
            while j < b.len() && b[j] <= x {
                j += 1;
            }
            d = d.max((i as f64 / n - j as f64 / m).abs());
        }
        d
    }

    /// `sup |F_n - F|` against a continuous CDF.
    pub fn one_sample_statistic<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> f64 {
        let mut s = sample.to_vec();
        s.sort_by(f64::total_cmp);
        let n = s.len() as f64;
        s.iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = cdf(x);
                (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn beta(b: f64) -> PowerAllocation {
        PowerAllocation::new(b).unwrap()
    }

    #[test]
    fn empty_process() {
        let mut rng = trial_rng(1, 0);
        for _ in 0..100 {
            assert!(sample_ppp(0.0, 10.0, &mut rng).points.is_empty());
        }
        let p = SystemParams::builder().num_antennas(2).build().unwrap();
        assert_eq!(trial_gamma_e(&p, beta(0.5), &PointProcessSample::default(), &mut rng), 0.0);
        assert_eq!(explicit_beamformer_trial(&p, beta(0.5), &PointProcessSample::default(), &mut rng), 0.0);
    }

    #[test]
    fn poisson_mean_count() {
        let r_max = (4.0 / PI).sqrt();
        let trials = 100_000;
        let total: usize = (0..trials).map(|t| sample_ppp(1.0, r_max, &mut trial_rng(3, t)).points.len()).sum();
        let mean = total as f64 / trials as f64;
        let se = (4.0 / trials as f64).sqrt();
        assert!((mean - 4.0).abs() < 3.0 * se, "mean count {mean}");
    }

    #[test]
    fn radial_law_is_uniform_on_disc() {
        let r_max = 3.0;
        let mut rng = trial_rng(5, 0);
        let d: Vec<f64> = (0..100_000).map(|_| uniform_disc_point(r_max, &mut rng).d_si).collect();
        let stat = ks::one_sample_statistic(&d, |x| (x / r_max).powi(2));
        assert!(stat < ks::one_sample_critical(d.len(), 0.01), "KS statistic {stat}");
    }

    #[test]
    fn gamma_d_single_antenna_is_exp2() {
        let p = SystemParams::builder().build().unwrap();
        let trials = 1_000_000;
        let sum: f64 = (0..trials).map(|t| trial_gamma_d(&p, PowerAllocation::FULL, &mut trial_rng(9, t))).sum();
        let mean = sum / trials as f64;
        // Exp(2): mean 0.5 and standard deviation 0.5.
        assert!((mean - 0.5).abs() < 3.0 * 0.5 / (trials as f64).sqrt(), "mean {mean}");
        assert!(PowerAllocation::new(0.0).is_err());
    }

    #[test]
    fn full_power_eavesdropper_is_exponential() {
        let p = SystemParams::builder().num_antennas(4).power_relay(1e-9).build().unwrap();
        let ppp = PointProcessSample {
            points: vec![Polar { d_si: 1.3, theta: 0.4 }],
        };
        let mean_si = p.mean_snr_si(1.3);
        let draws: Vec<f64> = (0..50_000)
            .map(|t| trial_gamma_e(&p, PowerAllocation::FULL, &ppp, &mut trial_rng(11, t)))
            .collect();
        let stat = ks::one_sample_statistic(&draws, |x| 1.0 - (-x / mean_si).exp());
        assert!(stat < ks::one_sample_critical(draws.len(), 0.01), "KS statistic {stat}");
    }

    #[test]
    fn an_sinr_matches_its_cdf() {
        let p = SystemParams::builder().num_antennas(4).power_relay(1e-9).build().unwrap();
        let b = beta(0.5);
        let ppp = PointProcessSample {
            points: vec![Polar { d_si: 1.0, theta: 1.0 }],
        };
        let draws: Vec<f64> = (0..50_000).map(|t| trial_gamma_e(&p, b, &ppp, &mut trial_rng(12, t))).collect();
        let stat = ks::one_sample_statistic(&draws, |x| crate::analytic::cdf_gamma_si(x, &p, b, 1.0));
        assert!(stat < ks::one_sample_critical(draws.len(), 0.01), "KS statistic {stat}");
        let below_3 = draws.iter().filter(|&&g| g <= 3.0).count() as f64 / draws.len() as f64;
        assert!((below_3 - 0.999_690_155_977_916_7).abs() < 4.0 * (0.00031f64 / 50_000.0).sqrt());
    }

    #[test]
    fn beamformer_invariants() {
        for n in 1..=8 {
            for t in 0..20 {
                let mut rng = trial_rng(21, t);
                let h = complex_gaussian_vec(n, &mut rng);
                let w = Beamformer::design(&h);
                assert!(w.unitarity_residual() <= 1e-10);
                assert!(w.null_space_residual(&h) <= 1e-10);
                assert!(w.matched_filter_residual(&h) <= 1e-10);
            }
        }
        // Channel already aligned with e_1 takes the identity branch.
        let h = vec![Complex64::new(2.0, 0.0), Complex64::new(0.0, 0.0)];
        let w = Beamformer::design(&h);
        assert!(w.unitarity_residual() <= 1e-14);
        assert!(w.null_space_residual(&h) <= 1e-14);
    }

    #[test]
    fn trivial_estimates_are_exact() {
        let p = SystemParams::builder().num_antennas(4).build().unwrap();
        let cfg = MonteCarloConfig { num_trials: 1000, ..Default::default() };
        let code = WiretapCode::new(0.0, 0.0).unwrap();
        assert_eq!(estimate_p_to(&p, beta(0.5), &code, &cfg).unwrap().estimate, 0.0);
        let quiet = p.to_builder().eav_density(0.0).build().unwrap();
        let code = WiretapCode::new(4.0, 2.0).unwrap();
        let est = estimate_p_so(&quiet, beta(0.5), &code, &cfg).unwrap();
        assert_eq!(est.estimate, 0.0);
        assert_eq!(est.std_error, 0.0);
        let bad = MonteCarloConfig { num_trials: 0, ..cfg };
        assert!(estimate_p_to(&p, beta(0.5), &code, &bad).is_err());
        let open = WiretapCode::new(2.0, 0.0).unwrap();
        assert!(estimate_p_so(&p, beta(0.5), &open, &cfg).is_err());
    }

    #[test]
    fn reproducible() {
        let p = SystemParams::normalized(4, 4.0, 1.0, 10.0, 10.0).unwrap();
        let code = WiretapCode::from_thresholds(3.0, 2.0).unwrap();
        for mode in [SimulationMode::Distributional, SimulationMode::ExplicitBeamformer] {
            let cfg = MonteCarloConfig { num_trials: 20_000, seed: 42, disc_radius: None, mode };
            let a = estimate_p_so(&p, beta(0.5), &code, &cfg).unwrap();
            let b = estimate_p_so(&p, beta(0.5), &code, &cfg).unwrap();
            assert_eq!(a.estimate.to_bits(), b.estimate.to_bits());
            let a = estimate_p_to(&p, beta(0.5), &code, &cfg).unwrap();
            let b = estimate_p_to(&p, beta(0.5), &code, &cfg).unwrap();
            assert_eq!(a.estimate.to_bits(), b.estimate.to_bits());
        }
    }

    #[test]
    fn larger_disc_never_lowers_outage() {
        let p = SystemParams::normalized(4, 4.0, 1.0, 10.0, 10.0).unwrap();
        let code = WiretapCode::from_thresholds(3.0, 2.0).unwrap();
        let b = beta(0.5);
        let default_r = default_disc_radius(&p, b, code.tau_e()).unwrap();
        let mut prev: Option<MonteCarloEstimate> = None;
        for r in [0.5 * default_r, default_r, 1.5 * default_r] {
            let cfg = MonteCarloConfig { num_trials: 200_000, seed: 8, disc_radius: Some(r), mode: SimulationMode::Distributional };
            let est = estimate_p_so(&p, b, &code, &cfg).unwrap();
            if let Some(prev) = prev {
                let noise = 3.0 * (prev.std_error.powi(2) + est.std_error.powi(2)).sqrt();
                assert!(est.estimate >= prev.estimate - noise);
            }
            prev = Some(est);
        }
    }

    #[test]
    fn two_sample_ks_handles_ties() {
        let a = [0.0, 0.0, 1.0, 2.0];
        let b = [0.0, 1.0, 1.0, 2.0];
        assert!((ks::two_sample_statistic(&a, &b) - 0.25).abs() < 1e-15);
        assert_eq!(ks::two_sample_statistic(&a, &a), 0.0);
    }
}
