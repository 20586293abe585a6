//! Closed-form and semi-analytic outage probabilities.
//!
//! The transmission outage is exact. The secrecy outage follows from the
//! probability generating functional of the eavesdropper process:
//! `P_so = 1 - exp(-2 lambda (J1 + J2 - J3))`, where `J1` is closed form and
//! `J2`, `J3` are double integrals over the upper half-plane in polar
//! coordinates centred at the source. For `eta = 2` both have closed forms.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{PowerAllocation, SecrecyMetrics, SystemParams, WiretapCode};
use crate::quadrature::{integrate_1d, integrate_2d_polar, Estimate, PolarGrid, QuadratureConfig};
use crate::special::{erlang_cdf, erlang_survival, gamma_fn};

/// Exponent beyond which `exp(-x)` is treated as zero.
const EXPONENT_CUTOFF: f64 = 700.0;
/// Agreement required between a closed form and its quadrature check.
const CROSS_CHECK_REL: f64 = 1e-6;

/// How a `J` term was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TermMethod {
    ClosedForm,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub value: f64,
    pub err_est: f64,
    pub method: TermMethod,
}

impl Term {
    fn closed(value: f64) -> Self {
        Self {
            value,
            err_est: 0.0,
            method: TermMethod::ClosedForm,
        }
    }

    fn quadrature(est: Estimate, scale: f64) -> Self {
        Self {
            value: est.value * scale,
            err_est: est.err_est * scale,
            method: TermMethod::Quadrature,
        }
    }
}

/// The three integrals of the secrecy outage exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SoTerms {
    pub j1: Term,
    pub j2: Term,
    pub j3: Term,
}

impl SoTerms {
    pub fn err_est(&self) -> f64 {
        self.j1.err_est + self.j2.err_est + self.j3.err_est
    }

    /// `J1 + J2 - J3`, clamped at zero when quadrature noise pushes it
    /// slightly negative. A deficit beyond the error estimate is an error.
    pub fn exponent(&self) -> Result<f64> {
        let raw = self.j1.value + self.j2.value - self.j3.value;
        if raw >= 0.0 {
            return Ok(raw);
        }
        let err = self.err_est();
        if -raw <= err {
            log::warn!("J1 + J2 - J3 = {raw:e} clamped to 0 (error estimate {err:e})");
            Ok(0.0)
        } else {
            Err(Error::NegativeExponent { value: raw, err_est: err })
        }
    }
}

/// CDF of the relay SNR `gamma_sr`: Erlang(N) with scale `beta * mean_snr_sr`.
pub fn cdf_gamma_sr(gamma: f64, params: &SystemParams, beta: PowerAllocation) -> f64 {
    if gamma <= 0.0 {
        return 0.0;
    }
    let x = gamma / (beta.beta() * params.mean_snr_sr());
    erlang_cdf(params.num_antennas(), x)
}

/// CDF of the destination SNR `gamma_rd` (exponential).
pub fn cdf_gamma_rd(gamma: f64, params: &SystemParams) -> f64 {
    exponential_cdf(gamma, params.mean_snr_rd())
}

/// Artificial-noise factor `(1 + (1 - beta) gamma / (beta (N - 1)))^{-(N - 1)}`,
/// via `log1p`; equals 1 when no AN is sent.
pub fn an_attenuation(params: &SystemParams, beta: PowerAllocation, gamma: f64) -> f64 {
    let n = params.num_antennas();
    if n < 2 || beta.beta() >= 1.0 || gamma <= 0.0 {
        return 1.0;
    }
    let m = f64::from(n - 1);
    let b = beta.beta();
    (-m * ((1.0 - b) * gamma / (b * m)).ln_1p()).exp()
}

/// CDF of the first-slot SINR at an eavesdropper `d_si` from the source.
pub fn cdf_gamma_si(gamma: f64, params: &SystemParams, beta: PowerAllocation, d_si: f64) -> f64 {
    if gamma <= 0.0 {
        return 0.0;
    }
    let tail = an_attenuation(params, beta, gamma) * (-gamma / (beta.beta() * params.mean_snr_si(d_si))).exp();
    1.0 - tail
}

/// CDF of the second-slot SNR at an eavesdropper `d_ri` from the relay.
pub fn cdf_gamma_ri(gamma: f64, params: &SystemParams, d_ri: f64) -> f64 {
    exponential_cdf(gamma, params.mean_snr_ri(d_ri))
}

fn exponential_cdf(gamma: f64, mean: f64) -> f64 {
    if gamma <= 0.0 {
        0.0
    } else {
        -(-gamma / mean).exp_m1()
    }
}

/// Transmission outage `Pr(min(gamma_sr, gamma_rd) <= tau_b)` in closed form.
pub fn p_to(params: &SystemParams, beta: PowerAllocation, code: &WiretapCode) -> Result<f64> {
    params.check_allocation(beta)?;
    Ok(p_to_at_threshold(params, beta, code.tau_b()))
}

/// `P_to = F_sr + (1 - F_sr) F_rd`, accurate when the outage is small.
pub(crate) fn p_to_at_threshold(params: &SystemParams, beta: PowerAllocation, tau_b: f64) -> f64 {
    if tau_b <= 0.0 {
        return 0.0;
    }
    let f_sr = cdf_gamma_sr(tau_b, params, beta);
    let f_rd = cdf_gamma_rd(tau_b, params);
    (f_sr + (1.0 - f_sr) * f_rd).clamp(0.0, 1.0)
}

/// `1 - P_to` evaluated directly, accurate when the outage is close to 1.
pub fn transmission_success(params: &SystemParams, beta: PowerAllocation, tau_b: f64) -> f64 {
    if tau_b <= 0.0 {
        return 1.0;
    }
    let x = tau_b / (beta.beta() * params.mean_snr_sr());
    erlang_survival(params.num_antennas(), x) * (-tau_b / params.mean_snr_rd()).exp()
}

/// Relay-slot exponent at an eavesdropper, `(tau_e sigma_i2^2 / P_r) d_ri^eta`,
/// with `d_ri` from the law of cosines.
pub fn psi(theta: f64, d_si: f64, params: &SystemParams, tau_e: f64) -> f64 {
    relay_decay(params, tau_e) * pow_eta(relay_distance_sq(params.dist_sr(), d_si, theta), params.path_loss_exp())
}

/// `d_sr^2 + d^2 - 2 d_sr d cos(theta)` written without cancellation near the
/// relay.
fn relay_distance_sq(d_sr: f64, d: f64, theta: f64) -> f64 {
    let s = (0.5 * theta).sin();
    (d - d_sr).powi(2) + 4.0 * d_sr * d * s * s
}

/// `(r^2)^{eta / 2}`.
fn pow_eta(r_sq: f64, eta: f64) -> f64 {
    if eta == 2.0 {
        r_sq
    } else if eta == 4.0 {
        r_sq * r_sq
    } else {
        r_sq.powf(0.5 * eta)
    }
}

fn source_decay(params: &SystemParams, beta: PowerAllocation, tau_e: f64) -> f64 {
    tau_e * params.noise_eav1() / (beta.beta() * params.power_source())
}

fn relay_decay(params: &SystemParams, tau_e: f64) -> f64 {
    tau_e * params.noise_eav2() / params.power_relay()
}

fn require_positive_threshold(tau_e: f64) -> Result<()> {
    if tau_e > 0.0 && tau_e.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            function: "secrecy outage term",
            value: tau_e,
        })
    }
}

/// `J1 = (pi/eta) (beta P_s / (tau_e sigma_i1^2))^{2/eta} * AN * Gamma(2/eta)`.
pub fn j1(params: &SystemParams, beta: PowerAllocation, tau_e: f64) -> Result<f64> {
    params.check_allocation(beta)?;
    require_positive_threshold(tau_e)?;
    let eta = params.path_loss_exp();
    let scale = source_decay(params, beta, tau_e).powf(-2.0 / eta);
    Ok(PI / eta * scale * an_attenuation(params, beta, tau_e) * gamma_fn(2.0 / eta)?)
}

/// `J1` as the radial integral `pi * AN * int_0^inf d exp(-b d^eta) dd`.
pub fn j1_integral(params: &SystemParams, beta: PowerAllocation, tau_e: f64, cfg: &QuadratureConfig) -> Result<Estimate> {
    params.check_allocation(beta)?;
    require_positive_threshold(tau_e)?;
    let eta = params.path_loss_exp();
    let b = source_decay(params, beta, tau_e);
    // Rescale to unit decay so the integrand lives on an O(1) range.
    let len = b.powf(-1.0 / eta);
    let est = integrate_1d(|u| u * (-u.powf(eta)).exp(), 0.0, f64::INFINITY, cfg)?;
    let scale = PI * an_attenuation(params, beta, tau_e) * len * len;
    Ok(Estimate {
        value: est.value * scale,
        err_est: est.err_est * scale,
    })
}

/// `J2 = int_0^inf int_0^pi d exp(-psi(theta)) dtheta dd`; closed form at
/// `eta = 2`.
pub fn j2(params: &SystemParams, tau_e: f64, cfg: &QuadratureConfig) -> Result<Term> {
    require_positive_threshold(tau_e)?;
    if params.path_loss_exp() != 2.0 {
        return j2_quadrature(params, tau_e, cfg);
    }
    let closed = j2_closed_form_eta2(params, tau_e);
    if cfg.cross_check_closed_forms {
        cross_check("J2", closed, j2_quadrature(params, tau_e, cfg)?.value)?;
    }
    Ok(Term::closed(closed))
}

/// `pi P_r / (2 tau_e sigma_i2^2)`; valid for `eta = 2` only.
pub fn j2_closed_form_eta2(params: &SystemParams, tau_e: f64) -> f64 {
    PI / (2.0 * relay_decay(params, tau_e))
}

/// `J2` by nested quadrature regardless of `eta`.
pub fn j2_quadrature(params: &SystemParams, tau_e: f64, cfg: &QuadratureConfig) -> Result<Term> {
    require_positive_threshold(tau_e)?;
    let eta = params.path_loss_exp();
    let c = relay_decay(params, tau_e);
    let d_sr = params.dist_sr();
    let grid = PolarGrid::new(relay_truncation(params, c, cfg)).with_ridge(d_sr, c.powf(-1.0 / eta));
    let est = integrate_2d_polar(
        |d, theta| d * (-c * pow_eta(relay_distance_sq(d_sr, d, theta), eta)).exp(),
        &grid,
        cfg,
    )?;
    Ok(Term::quadrature(est, 1.0))
}

/// `J3 = AN * int int d exp(-b d^eta) exp(-psi(theta)) dtheta dd`; closed form
/// at `eta = 2`.
pub fn j3(params: &SystemParams, beta: PowerAllocation, tau_e: f64, cfg: &QuadratureConfig) -> Result<Term> {
    params.check_allocation(beta)?;
    require_positive_threshold(tau_e)?;
    if params.path_loss_exp() != 2.0 {
        return j3_quadrature(params, beta, tau_e, cfg);
    }
    let closed = j3_closed_form_eta2(params, beta, tau_e);
    if cfg.cross_check_closed_forms {
        cross_check("J3", closed, j3_quadrature(params, beta, tau_e, cfg)?.value)?;
    }
    Ok(Term::closed(closed))
}

/// `pi beta P_s P_r / (2 tau_e (beta P_s sigma_i2^2 + P_r sigma_i1^2))
///  * exp(-tau_e sigma_i1^2 sigma_i2^2 d_sr^2 / (beta P_s sigma_i2^2 + P_r sigma_i1^2)) * AN`.
pub fn j3_closed_form_eta2(params: &SystemParams, beta: PowerAllocation, tau_e: f64) -> f64 {
    let bps = beta.beta() * params.power_source();
    let pr = params.power_relay();
    let (s1, s2) = (params.noise_eav1(), params.noise_eav2());
    let denom = bps * s2 + pr * s1;
    let d_sr = params.dist_sr();
    PI * bps * pr / (2.0 * tau_e * denom)
        * (-tau_e * s1 * s2 * d_sr * d_sr / denom).exp()
        * an_attenuation(params, beta, tau_e)
}

/// `J3` by nested quadrature regardless of `eta`.
pub fn j3_quadrature(params: &SystemParams, beta: PowerAllocation, tau_e: f64, cfg: &QuadratureConfig) -> Result<Term> {
    params.check_allocation(beta)?;
    require_positive_threshold(tau_e)?;
    let eta = params.path_loss_exp();
    let b = source_decay(params, beta, tau_e);
    let c = relay_decay(params, tau_e);
    let d_sr = params.dist_sr();
    let r_max = relay_truncation(params, c, cfg).max(cfg.truncation_radius(b, eta));
    let grid = PolarGrid::new(r_max)
        .with_ridge(d_sr, c.powf(-1.0 / eta))
        .with_origin_scale(b.powf(-1.0 / eta));
    let est = integrate_2d_polar(
        |d, theta| d * (-b * pow_eta(d * d, eta) - c * pow_eta(relay_distance_sq(d_sr, d, theta), eta)).exp(),
        &grid,
        cfg,
    )?;
    Ok(Term::quadrature(est, an_attenuation(params, beta, tau_e)))
}

/// Radial cut-off for the relay kernel: beyond `d_sr + (ln(1/abs_tol)/c)^{1/eta}`
/// the bound `psi >= c (d - d_sr)^eta` keeps it below `abs_tol`.
fn relay_truncation(params: &SystemParams, c: f64, cfg: &QuadratureConfig) -> f64 {
    let eta = params.path_loss_exp();
    cfg.radial_truncation_factor * params.dist_sr() + cfg.truncation_radius(c, eta)
}

fn cross_check(term: &'static str, closed: f64, quadrature: f64) -> Result<()> {
    let scale = closed.abs().max(quadrature.abs());
    if (closed - quadrature).abs() <= CROSS_CHECK_REL * scale {
        Ok(())
    } else {
        Err(Error::ClosedFormMismatch {
            term,
            closed,
            quadrature,
        })
    }
}

/// All three terms at threshold `tau_e > 0`.
pub fn so_terms(params: &SystemParams, beta: PowerAllocation, tau_e: f64, cfg: &QuadratureConfig) -> Result<SoTerms> {
    Ok(SoTerms {
        j1: Term::closed(j1(params, beta, tau_e)?),
        j2: j2(params, tau_e, cfg)?,
        j3: j3(params, beta, tau_e, cfg)?,
    })
}

/// Secrecy outage `Pr(Gamma_E > tau_e)`.
pub fn p_so(params: &SystemParams, beta: PowerAllocation, code: &WiretapCode, cfg: &QuadratureConfig) -> Result<f64> {
    p_so_at_threshold(params, beta, code.tau_e(), cfg)
}

/// [`p_so`] parameterised by the threshold directly.
pub fn p_so_at_threshold(params: &SystemParams, beta: PowerAllocation, tau_e: f64, cfg: &QuadratureConfig) -> Result<f64> {
    params.check_allocation(beta)?;
    let lambda = params.eav_density();
    if lambda == 0.0 {
        return Ok(0.0);
    }
    if tau_e <= 0.0 {
        return Ok(1.0);
    }
    if tau_e == f64::INFINITY {
        return Ok(0.0);
    }
    let exponent = 2.0 * lambda * so_terms(params, beta, tau_e, cfg)?.exponent()?;
    if exponent > EXPONENT_CUTOFF {
        return Ok(1.0);
    }
    Ok((-(-exponent).exp_m1()).clamp(0.0, 1.0))
}

/// Transmission and secrecy outage plus secrecy throughput for one code.
pub fn throughput(
    params: &SystemParams,
    beta: PowerAllocation,
    code: &WiretapCode,
    cfg: &QuadratureConfig,
) -> Result<SecrecyMetrics> {
    let pto = p_to(params, beta, code)?;
    let pso = p_so(params, beta, code, cfg)?;
    Ok(SecrecyMetrics::new(code, pto, pso))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn beta(b: f64) -> PowerAllocation {
        PowerAllocation::new(b).unwrap()
    }

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn cdf_sr_examples() {
        let p = SystemParams::builder().build().unwrap();
        assert_eq!(cdf_gamma_sr(0.0, &p, PowerAllocation::FULL), 0.0);
        assert_relative_eq!(cdf_gamma_sr(1.0, &p, PowerAllocation::FULL), 1.0 - (-1.0f64).exp(), epsilon = 1e-15);
        let p4 = p.to_builder().num_antennas(4).build().unwrap();
        // x = gamma / (beta * mean) = 4.
        assert_relative_eq!(cdf_gamma_sr(2.0, &p4, beta(0.5)), 0.566_529_879_633_291_2, epsilon = 1e-14);
    }

    #[test]
    fn cdf_rd_examples() {
        let p = SystemParams::builder().build().unwrap();
        assert_eq!(cdf_gamma_rd(0.0, &p), 0.0);
        assert_relative_eq!(cdf_gamma_rd(1.0, &p), 0.632_120_558_828_557_7, epsilon = 1e-15);
        assert_relative_eq!(cdf_gamma_rd(std::f64::consts::LN_2, &p), 0.5, epsilon = 1e-15);
        assert_relative_eq!(cdf_gamma_ri(std::f64::consts::LN_2, &p, 1.0), 0.5, epsilon = 1e-15);
        assert_eq!(cdf_gamma_ri(0.0, &p, 2.0), 0.0);
    }

    #[test]
    fn cdf_si_examples() {
        let p = SystemParams::builder().num_antennas(4).build().unwrap();
        assert_eq!(cdf_gamma_si(0.0, &p, beta(0.5), 1.0), 0.0);
        assert_relative_eq!(cdf_gamma_si(1.0, &p, PowerAllocation::FULL, 1.0), 1.0 - (-1.0f64).exp(), epsilon = 1e-15);
        assert_relative_eq!(cdf_gamma_si(3.0, &p, beta(0.5), 1.0), 1.0 - (-6.0f64).exp() / 8.0, epsilon = 1e-15);
    }

    #[test]
    fn p_to_examples() {
        let p = SystemParams::builder().num_antennas(4).build().unwrap();
        let zero = WiretapCode::new(0.0, 0.0).unwrap();
        assert_eq!(p_to(&p, beta(0.5), &zero).unwrap(), 0.0);

        let loud = p.to_builder().power_source(1e12).power_relay(1e12).build().unwrap();
        let code = WiretapCode::from_thresholds(1.0, 0.0).unwrap();
        assert!(p_to(&loud, beta(0.5), &code).unwrap() < 1e-11);

        let single = SystemParams::builder().build().unwrap();
        assert!(p_to(&single, beta(0.5), &code).is_err());
    }

    #[test]
    fn psi_examples() {
        let p = SystemParams::builder().path_loss_exp(2.0).dist_sr(3.0).build().unwrap();
        assert_eq!(psi(0.0, 3.0, &p, 1.0), 0.0);
        assert_relative_eq!(psi(PI / 2.0, 4.0, &p, 1.0), 25.0, epsilon = 1e-12);
        let p4 = SystemParams::builder().build().unwrap();
        assert_relative_eq!(psi(PI, 1.0, &p4, 1.0), 16.0, epsilon = 1e-12);
        assert_relative_eq!(psi(0.0, 2.5, &p4, 1.0), 1.5f64.powi(4), epsilon = 1e-12);
    }

    #[test]
    fn j1_examples() {
        let p2 = SystemParams::builder().path_loss_exp(2.0).build().unwrap();
        assert_relative_eq!(j1(&p2, PowerAllocation::FULL, 1.0).unwrap(), PI / 2.0, max_relative = 1e-12);
        let p4 = SystemParams::builder().build().unwrap();
        assert_relative_eq!(j1(&p4, PowerAllocation::FULL, 1.0).unwrap(), PI.powf(1.5) / 4.0, max_relative = 1e-12);
        let p44 = p4.to_builder().num_antennas(4).build().unwrap();
        // Oracle: scipy quad of the radial form, 0.41527291849072795.
        assert_relative_eq!(j1(&p44, beta(0.5), 1.0).unwrap(), 0.415_272_918_490_727_9, max_relative = 1e-12);
        let integral = j1_integral(&p44, beta(0.5), 1.0, &cfg()).unwrap();
        assert_relative_eq!(integral.value, 0.415_272_918_490_727_9, max_relative = 1e-8);
        assert!(j1(&p44, beta(0.5), 0.0).is_err());
    }

    #[test]
    fn j2_eta2_examples() {
        let p = SystemParams::builder().path_loss_exp(2.0).power_relay(2.0).build().unwrap();
        let t = j2(&p, 1.0, &cfg()).unwrap();
        assert_eq!(t.method, TermMethod::ClosedForm);
        assert_relative_eq!(t.value, PI, max_relative = 1e-14);
        let q = j2_quadrature(&p, 1.0, &cfg()).unwrap();
        assert_relative_eq!(q.value, PI, max_relative = 1e-7);
        // Unit coefficient, d_sr = 1: pi / 2.
        let unit = SystemParams::builder().path_loss_exp(2.0).build().unwrap();
        assert_relative_eq!(j2_quadrature(&unit, 1.0, &cfg()).unwrap().value, PI / 2.0, max_relative = 1e-7);
    }

    #[test]
    fn j3_eta2_beta_one() {
        let p = SystemParams::builder()
            .path_loss_exp(2.0)
            .power_source(3.0)
            .power_relay(0.5)
            .noise_eav1(2.0)
            .noise_eav2(0.7)
            .dist_sr(1.3)
            .build()
            .unwrap();
        let tau = 0.8;
        let (ps, pr, s1, s2, d) = (3.0, 0.5, 2.0, 0.7, 1.3);
        let expected = PI * ps * pr / (2.0 * tau * (ps * s2 + pr * s1)) * (-tau * s1 * s2 * d * d / (ps * s2 + pr * s1)).exp();
        let t = j3(&p, PowerAllocation::FULL, tau, &cfg()).unwrap();
        assert_relative_eq!(t.value, expected, max_relative = 1e-14);
        let q = j3_quadrature(&p, PowerAllocation::FULL, tau, &cfg()).unwrap();
        assert_relative_eq!(q.value, expected, max_relative = 1e-6);
    }

    #[test]
    fn j3_eta2_with_noise_matches_quadrature() {
        let p = SystemParams::builder().path_loss_exp(2.0).num_antennas(2).build().unwrap();
        let closed = j3_closed_form_eta2(&p, beta(0.5), 1.0);
        let q = j3_quadrature(&p, beta(0.5), 1.0, &cfg()).unwrap();
        assert_relative_eq!(q.value, closed, max_relative = 1e-6);
    }

    #[test]
    fn cross_check_path() {
        let p = SystemParams::builder().path_loss_exp(2.0).num_antennas(3).dist_sr(0.6).build().unwrap();
        let checked = QuadratureConfig {
            cross_check_closed_forms: true,
            ..cfg()
        };
        assert!(j2(&p, 2.0, &checked).is_ok());
        assert!(j3(&p, beta(0.3), 2.0, &checked).is_ok());
        assert!(cross_check("J2", 1.0, 1.1).is_err());
    }

    #[test]
    fn j2_general_eta_translation_invariance() {
        // J2 only depends on the distance to the relay, so shifting the origin
        // gives (pi / eta) Gamma(2 / eta) c^{-2/eta} for every eta.
        for eta in [2.5, 3.0, 4.0, 6.0] {
            let p = SystemParams::builder().path_loss_exp(eta).dist_sr(1.7).power_relay(3.0).build().unwrap();
            let tau = 0.9;
            let c: f64 = tau / 3.0;
            let expected = PI / eta * gamma_fn(2.0 / eta).unwrap() * c.powf(-2.0 / eta);
            let q = j2(&p, tau, &cfg()).unwrap();
            assert_eq!(q.method, TermMethod::Quadrature);
            assert_relative_eq!(q.value, expected, max_relative = 1e-7);
        }
    }

    #[test]
    fn j3_eta4_monte_carlo_integration() {
        use rand::{Rng, SeedableRng};
        let p = SystemParams::builder().num_antennas(4).build().unwrap();
        let b = beta(0.5);
        let q = j3(&p, b, 1.0, &cfg()).unwrap();
        // Uniform sampling of the rectangle [0, R] x [0, pi].
        let r_max = 4.0;
        let samples = 10_000_000;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let area = r_max * PI;
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for _ in 0..samples {
            let d: f64 = rng.random::<f64>() * r_max;
            let theta: f64 = rng.random::<f64>() * PI;
            let v = area * d * (-2.0 * d.powi(4) - relay_distance_sq(1.0, d, theta).powi(2)).exp();
            sum += v;
            sum_sq += v * v;
        }
        let n = samples as f64;
        let mean = sum / n;
        let se = ((sum_sq / n - mean * mean) / n).sqrt();
        let mc = mean * an_attenuation(&p, b, 1.0);
        let se = se * an_attenuation(&p, b, 1.0);
        assert!((q.value - mc).abs() < 4.0 * se, "quadrature {} vs mc {} +- {}", q.value, mc, se);
    }

    #[test]
    fn p_so_limits() {
        let p = SystemParams::builder().num_antennas(4).eav_density(0.0).build().unwrap();
        let code = WiretapCode::new(3.0, 1.0).unwrap();
        assert_eq!(p_so(&p, beta(0.5), &code, &cfg()).unwrap(), 0.0);
        let p = p.to_builder().eav_density(1.0).build().unwrap();
        let open = WiretapCode::new(3.0, 0.0).unwrap();
        assert_eq!(p_so(&p, beta(0.5), &open, &cfg()).unwrap(), 1.0);
        let tight = p_so_at_threshold(&p, beta(0.5), 1e12, &cfg()).unwrap();
        assert!(tight < 1e-5);
        assert_eq!(p_so_at_threshold(&p, beta(0.5), f64::INFINITY, &cfg()).unwrap(), 0.0);
        let dense = p.to_builder().eav_density(1e4).build().unwrap();
        assert_eq!(p_so_at_threshold(&dense, beta(0.5), 0.1, &cfg()).unwrap(), 1.0);
    }

    #[test]
    fn throughput_examples() {
        let p = SystemParams::normalized(4, 4.0, 1.0, 100.0, 5.0).unwrap();
        let flat = WiretapCode::new(2.0, 2.0).unwrap();
        let m = throughput(&p, beta(0.5), &flat, &cfg()).unwrap();
        assert_eq!(m.throughput, 0.0);
        let zero = WiretapCode::new(0.0, 0.0).unwrap();
        let m = throughput(&p, beta(0.5), &zero, &cfg()).unwrap();
        assert_eq!(m.p_to, 0.0);
        assert_eq!(m.throughput, 0.0);
        let code = WiretapCode::new(6.0, 4.0).unwrap();
        let m = throughput(&p, beta(0.5), &code, &cfg()).unwrap();
        assert_relative_eq!(m.throughput, 0.5 * 2.0 * (1.0 - m.p_to), epsilon = 1e-15);
    }

    #[test]
    fn throughput_unimodal_in_rate_b() {
        // Fixed R_e; T_s(R_b) rises then falls on a dense grid.
        for n in [2, 4, 8] {
            let p = SystemParams::normalized(n, 4.0, 1.0, 100.0, 5.0).unwrap();
            let r_e = 4.0;
            let values: Vec<f64> = (0..400)
                .map(|k| {
                    let r_b = r_e + k as f64 * 0.02;
                    let success = transmission_success(&p, beta(0.5), crate::model::rate_to_threshold(r_b));
                    0.5 * (r_b - r_e) * success
                })
                .collect();
            let peak = values.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
            assert!(peak > 0 && peak < values.len() - 1, "no interior maximum for N = {n}");
            assert!(values[..=peak].windows(2).all(|w| w[1] >= w[0]));
            assert!(values[peak..].windows(2).all(|w| w[1] <= w[0]));
        }
    }

    #[test]
    fn zero_density_and_exponent_clamp() {
        let terms = SoTerms {
            j1: Term::closed(1.0),
            j2: Term { value: 1.0, err_est: 1e-9, method: TermMethod::Quadrature },
            j3: Term { value: 2.0 + 5e-10, err_est: 1e-9, method: TermMethod::Quadrature },
        };
        assert_eq!(terms.exponent().unwrap(), 0.0);
        let bad = SoTerms {
            j3: Term { value: 2.1, err_est: 1e-9, method: TermMethod::Quadrature },
            ..terms
        };
        assert!(matches!(bad.exponent(), Err(Error::NegativeExponent { .. })));
    }

    fn params_strategy() -> impl Strategy<Value = (SystemParams, f64)> {
        (1u32..=8, 2.0f64..6.0, 0.05f64..1.0, -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0).prop_map(
            |(n, eta, b, lp, lr, ld)| {
                let p = SystemParams::builder()
                    .num_antennas(n)
                    .path_loss_exp(eta)
                    .power_source(10f64.powf(lp))
                    .power_relay(10f64.powf(lr))
                    .dist_sr(10f64.powf(ld * 0.5))
                    .dist_rd(10f64.powf(-ld * 0.5))
                    .build()
                    .unwrap();
                let b = if n == 1 { 1.0 } else { b };
                (p, b)
            },
        )
    }

    proptest! {
        #[test]
        fn cdfs_are_monotone_distributions((p, b) in params_strategy(), d in 0.1f64..5.0) {
            let b = beta(b);
            let mut prev = [0.0; 4];
            for k in 0..60 {
                let g = 0.05 * k as f64 * (1.0 + k as f64);
                let now = [
                    cdf_gamma_sr(g, &p, b),
                    cdf_gamma_rd(g, &p),
                    cdf_gamma_si(g, &p, b, d),
                    cdf_gamma_ri(g, &p, d),
                ];
                for i in 0..4 {
                    prop_assert!((0.0..=1.0).contains(&now[i]));
                    prop_assert!(now[i] >= prev[i]);
                }
                prev = now;
            }
        }

        #[test]
        fn p_to_factored_form((p, b) in params_strategy(), tau in 0.0f64..50.0) {
            let b = beta(b);
            let code = WiretapCode::from_thresholds(tau, 0.0).unwrap();
            let direct = p_to(&p, b, &code).unwrap();
            let factored = 1.0 - (1.0 - cdf_gamma_sr(code.tau_b(), &p, b)) * (1.0 - cdf_gamma_rd(code.tau_b(), &p));
            prop_assert!((direct - factored).abs() <= 1e-12);
        }

        #[test]
        fn beta_one_reduces_to_exponential((p, _) in params_strategy(), g in 0.0f64..20.0, d in 0.1f64..5.0) {
            let exp_cdf = 1.0 - (-g / p.mean_snr_si(d)).exp();
            prop_assert!((cdf_gamma_si(g, &p, PowerAllocation::FULL, d) - exp_cdf).abs() <= 1e-14);
        }
    }
}
