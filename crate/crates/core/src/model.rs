//! Domain types of the relay wiretap channel.
//!
//! The source (N antennas) sits at the origin, the relay on the polar axis at
//! distance `d_sr`, and eavesdroppers form a homogeneous Poisson point process
//! of density `lambda`. All powers and noise variances are linear.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Physical constants of the channel. Immutable once built.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SystemParamsBuilder")]
pub struct SystemParams {
    num_antennas: u32,
    path_loss_exp: f64,
    eav_density: f64,
    power_source: f64,
    power_relay: f64,
    dist_sr: f64,
    dist_rd: f64,
    noise_relay: f64,
    noise_dest: f64,
    noise_eav1: f64,
    noise_eav2: f64,
}

impl TryFrom<SystemParamsBuilder> for SystemParams {
    type Error = crate::Error;

    fn try_from(raw: SystemParamsBuilder) -> Result<Self> {
        raw.build()
    }
}

/// Builder for [`SystemParams`]. Every field defaults to 1 except `N = 1`,
/// `eta = 4`.
#[derive(Debug, Clone, Copy, Deserialize)]
pub struct SystemParamsBuilder {
    num_antennas: u32,
    path_loss_exp: f64,
    eav_density: f64,
    power_source: f64,
    power_relay: f64,
    dist_sr: f64,
    dist_rd: f64,
    noise_relay: f64,
    noise_dest: f64,
    noise_eav1: f64,
    noise_eav2: f64,
}

impl Default for SystemParamsBuilder {
    fn default() -> Self {
        Self {
            num_antennas: 1,
            path_loss_exp: 4.0,
            eav_density: 1.0,
            power_source: 1.0,
            power_relay: 1.0,
            dist_sr: 1.0,
            dist_rd: 1.0,
            noise_relay: 1.0,
            noise_dest: 1.0,
            noise_eav1: 1.0,
            noise_eav2: 1.0,
        }
    }
}

macro_rules! setter {
    ($name:ident, $ty:ty) => {
        pub fn $name(mut self, value: $ty) -> Self {
            self.$name = value;
            self
        }
    };
}

impl SystemParamsBuilder {
    setter!(num_antennas, u32);
    setter!(path_loss_exp, f64);
    setter!(eav_density, f64);
    setter!(power_source, f64);
    setter!(power_relay, f64);
    setter!(dist_sr, f64);
    setter!(dist_rd, f64);
    setter!(noise_relay, f64);
    setter!(noise_dest, f64);
    setter!(noise_eav1, f64);
    setter!(noise_eav2, f64);

    pub fn build(self) -> Result<SystemParams> {
        if self.num_antennas < 1 {
            return Err(invalid("num_antennas", "must be at least 1"));
        }
        if !(self.path_loss_exp.is_finite() && self.path_loss_exp >= 2.0) {
            return Err(invalid(
                "path_loss_exp",
                format!("must be finite and >= 2, got {}", self.path_loss_exp),
            ));
        }
        if !(self.eav_density.is_finite() && self.eav_density >= 0.0) {
            return Err(invalid(
                "eav_density",
                format!("must be finite and >= 0, got {}", self.eav_density),
            ));
        }
        for (name, value) in [
            ("power_source", self.power_source),
            ("power_relay", self.power_relay),
            ("dist_sr", self.dist_sr),
            ("dist_rd", self.dist_rd),
            ("noise_relay", self.noise_relay),
            ("noise_dest", self.noise_dest),
            ("noise_eav1", self.noise_eav1),
            ("noise_eav2", self.noise_eav2),
        ] {
            positive(name, value)?;
        }
        Ok(SystemParams {
            num_antennas: self.num_antennas,
            path_loss_exp: self.path_loss_exp,
            eav_density: self.eav_density,
            power_source: self.power_source,
            power_relay: self.power_relay,
            dist_sr: self.dist_sr,
            dist_rd: self.dist_rd,
            noise_relay: self.noise_relay,
            noise_dest: self.noise_dest,
            noise_eav1: self.noise_eav1,
            noise_eav2: self.noise_eav2,
        })
    }
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be finite and > 0, got {value}")))
    }
}

impl SystemParams {
    pub fn builder() -> SystemParamsBuilder {
        SystemParamsBuilder::default()
    }

    /// Unit-distance geometry (`d_sr = d_rd = 1`) parameterised by mean SNRs:
    /// `gamma_b` is the mean SNR of both legitimate hops and `gamma_e` is
    /// `P_s / sigma_i1^2 = P_r / sigma_i2^2`, the eavesdropper SNR at unit
    /// distance. Relay and destination noise are 1.
    pub fn normalized(
        num_antennas: u32,
        path_loss_exp: f64,
        eav_density: f64,
        gamma_b: f64,
        gamma_e: f64,
    ) -> Result<Self> {
        positive("gamma_b", gamma_b)?;
        positive("gamma_e", gamma_e)?;
        Self::builder()
            .num_antennas(num_antennas)
            .path_loss_exp(path_loss_exp)
            .eav_density(eav_density)
            .power_source(gamma_b)
            .power_relay(gamma_b)
            .noise_eav1(gamma_b / gamma_e)
            .noise_eav2(gamma_b / gamma_e)
            .build()
    }

    /// Rebuilds with one field changed; used by sweeps.
    pub fn to_builder(&self) -> SystemParamsBuilder {
        SystemParamsBuilder {
            num_antennas: self.num_antennas,
            path_loss_exp: self.path_loss_exp,
            eav_density: self.eav_density,
            power_source: self.power_source,
            power_relay: self.power_relay,
            dist_sr: self.dist_sr,
            dist_rd: self.dist_rd,
            noise_relay: self.noise_relay,
            noise_dest: self.noise_dest,
            noise_eav1: self.noise_eav1,
            noise_eav2: self.noise_eav2,
        }
    }

    pub fn num_antennas(&self) -> u32 {
        self.num_antennas
    }
    pub fn path_loss_exp(&self) -> f64 {
        self.path_loss_exp
    }
    pub fn eav_density(&self) -> f64 {
        self.eav_density
    }
    pub fn power_source(&self) -> f64 {
        self.power_source
    }
    pub fn power_relay(&self) -> f64 {
        self.power_relay
    }
    pub fn dist_sr(&self) -> f64 {
        self.dist_sr
    }
    pub fn dist_rd(&self) -> f64 {
        self.dist_rd
    }
    pub fn noise_relay(&self) -> f64 {
        self.noise_relay
    }
    pub fn noise_dest(&self) -> f64 {
        self.noise_dest
    }
    pub fn noise_eav1(&self) -> f64 {
        self.noise_eav1
    }
    pub fn noise_eav2(&self) -> f64 {
        self.noise_eav2
    }

    /// Mean SNR of the source-relay hop without beamforming gain,
    /// `P_s d_sr^-eta / sigma_r^2`.
    pub fn mean_snr_sr(&self) -> f64 {
        self.power_source * self.dist_sr.powf(-self.path_loss_exp) / self.noise_relay
    }

    /// `P_r d_rd^-eta / sigma_d^2`.
    pub fn mean_snr_rd(&self) -> f64 {
        self.power_relay * self.dist_rd.powf(-self.path_loss_exp) / self.noise_dest
    }

    /// Mean first-slot SNR at an eavesdropper `d_si` from the source.
    pub fn mean_snr_si(&self, d_si: f64) -> f64 {
        self.power_source * d_si.powf(-self.path_loss_exp) / self.noise_eav1
    }

    /// Mean second-slot SNR at an eavesdropper `d_ri` from the relay.
    pub fn mean_snr_ri(&self, d_ri: f64) -> f64 {
        self.power_relay * d_ri.powf(-self.path_loss_exp) / self.noise_eav2
    }

    /// Artificial noise needs at least one null-space dimension.
    pub fn check_allocation(&self, beta: PowerAllocation) -> Result<()> {
        if self.num_antennas == 1 && beta.beta() < 1.0 {
            Err(invalid(
                "beta",
                format!(
                    "beta = {} < 1 needs N >= 2 antennas for artificial noise",
                    beta.beta()
                ),
            ))
        } else {
            Ok(())
        }
    }
}

/// Fraction `beta` of the source power spent on the information signal; the
/// remaining `1 - beta` is spread over `N - 1` artificial-noise beams.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct PowerAllocation(f64);

impl PowerAllocation {
    pub const FULL: PowerAllocation = PowerAllocation(1.0);

    pub fn new(beta: f64) -> Result<Self> {
        if beta > 0.0 && beta <= 1.0 {
            Ok(Self(beta))
        } else {
            Err(invalid("beta", format!("must lie in (0, 1], got {beta}")))
        }
    }

    pub fn beta(self) -> f64 {
        self.0
    }

    /// Per-beam artificial-noise share `(1 - beta) / (N - 1)`; zero at `beta = 1`.
    pub fn noise_share(self, num_antennas: u32) -> f64 {
        if self.0 >= 1.0 || num_antennas < 2 {
            0.0
        } else {
            (1.0 - self.0) / f64::from(num_antennas - 1)
        }
    }
}

impl TryFrom<f64> for PowerAllocation {
    type Error = crate::Error;
    fn try_from(beta: f64) -> Result<Self> {
        Self::new(beta)
    }
}

impl From<PowerAllocation> for f64 {
    fn from(beta: PowerAllocation) -> f64 {
        beta.0
    }
}

/// SNR threshold `2^R - 1` of a code rate in bits per channel use.
pub fn rate_to_threshold(rate: f64) -> f64 {
    (rate * std::f64::consts::LN_2).exp_m1()
}

/// Inverse of [`rate_to_threshold`].
pub fn threshold_to_rate(threshold: f64) -> f64 {
    threshold.ln_1p() / std::f64::consts::LN_2
}

/// Wiretap code rate pair: codeword rate `R_b` and redundancy rate `R_e`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WiretapCode {
    rate_b: f64,
    rate_e: f64,
}

impl WiretapCode {
    pub fn new(rate_b: f64, rate_e: f64) -> Result<Self> {
        if !(rate_e.is_finite() && rate_e >= 0.0) {
            return Err(invalid("rate_e", format!("must be finite and >= 0, got {rate_e}")));
        }
        if !(rate_b.is_finite() && rate_b >= rate_e) {
            return Err(invalid(
                "rate_b",
                format!("must be finite and >= R_e = {rate_e}, got {rate_b}"),
            ));
        }
        Ok(Self { rate_b, rate_e })
    }

    pub fn from_thresholds(tau_b: f64, tau_e: f64) -> Result<Self> {
        if !(tau_b >= 0.0 && tau_e >= 0.0) {
            return Err(invalid("tau", "thresholds must be >= 0"));
        }
        Self::new(threshold_to_rate(tau_b), threshold_to_rate(tau_e))
    }

    pub fn rate_b(&self) -> f64 {
        self.rate_b
    }
    pub fn rate_e(&self) -> f64 {
        self.rate_e
    }
    pub fn tau_b(&self) -> f64 {
        rate_to_threshold(self.rate_b)
    }
    pub fn tau_e(&self) -> f64 {
        rate_to_threshold(self.rate_e)
    }
}

/// Outage probabilities and secrecy throughput at one operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecrecyMetrics {
    pub p_to: f64,
    pub p_so: f64,
    pub throughput: f64,
}

impl SecrecyMetrics {
    /// `T_s = (R_b - R_e)(1 - P_to) / 2`; the half accounts for two time slots.
    pub fn new(code: &WiretapCode, p_to: f64, p_so: f64) -> Self {
        Self {
            p_to,
            p_so,
            throughput: secrecy_throughput(code.rate_b(), code.rate_e(), p_to),
        }
    }
}

pub(crate) fn secrecy_throughput(rate_b: f64, rate_e: f64, p_to: f64) -> f64 {
    (0.5 * (rate_b - rate_e) * (1.0 - p_to)).max(0.0)
}
