//! Command-line flags and the serialisable run configuration they resolve to.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use secrecy_relay::montecarlo::{MonteCarloConfig, SimulationMode};
use secrecy_relay::SystemParams;

use crate::Failure;

#[derive(Debug, Parser)]
#[command(name = "secrecy-relay", version, about = "Secrecy outage, throughput and rate optimization for a relay wiretap channel")]
#[command(allow_negative_numbers = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<CliCommand>,
    #[command(flatten)]
    pub args: CommonArgs,
}

#[derive(Debug, Clone, Subcommand)]
pub enum CliCommand {
    /// Transmission outage probability.
    #[command(allow_negative_numbers = true)]
    Pto,
    /// Secrecy outage probability.
    #[command(allow_negative_numbers = true)]
    Pso,
    /// Both outages and the secrecy throughput.
    #[command(allow_negative_numbers = true)]
    Throughput,
    /// Optimal rates (fixed --beta) or joint rates and power split.
    #[command(allow_negative_numbers = true)]
    Optimize,
    /// Data series of a preset figure (2, 3, 4 or 5).
    #[command(allow_negative_numbers = true)]
    Figure { id: u8 },
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    #[arg(long, global = true)]
    pub eta: Option<f64>,
    /// Number of source antennas.
    #[arg(long, global = true)]
    pub n: Option<u32>,
    /// Eavesdropper density per unit area.
    #[arg(long, global = true)]
    pub lambda: Option<f64>,
    #[arg(long = "ps-dbm", global = true)]
    pub ps_dbm: Option<f64>,
    #[arg(long = "pr-dbm", global = true)]
    pub pr_dbm: Option<f64>,
    #[arg(long, global = true)]
    pub dsr: Option<f64>,
    #[arg(long, global = true)]
    pub drd: Option<f64>,
    #[arg(long = "noise-relay-dbm", global = true)]
    pub noise_relay_dbm: Option<f64>,
    #[arg(long = "noise-dest-dbm", global = true)]
    pub noise_dest_dbm: Option<f64>,
    #[arg(long = "noise-eav1-dbm", global = true)]
    pub noise_eav1_dbm: Option<f64>,
    #[arg(long = "noise-eav2-dbm", global = true)]
    pub noise_eav2_dbm: Option<f64>,
    /// Fraction of source power carrying information.
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    /// Codeword rate R_b in bits per channel use.
    #[arg(long, global = true)]
    pub rb: Option<f64>,
    /// Redundancy rate R_e in bits per channel use.
    #[arg(long, global = true)]
    pub re: Option<f64>,
    /// Secrecy outage constraint.
    #[arg(long, global = true)]
    pub phi: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub mode: Option<ModeArg>,
    /// `<var> <start>..<stop> x<points>`, e.g. `tau-e 0.1..10 x50`.
    #[arg(long, global = true, num_args = 3, allow_hyphen_values = true, value_names = ["VAR", "RANGE", "POINTS"])]
    pub sweep: Option<Vec<String>>,
    /// Log-spaced sweep points.
    #[arg(long, global = true)]
    pub log: bool,
    /// Add Monte Carlo estimates next to the analytic values.
    #[arg(long = "with-mc", global = true)]
    pub with_mc: bool,
    /// Curve values for figures (dB for figures 2 and 3, antenna counts for 4 and 5).
    #[arg(long, global = true, value_delimiter = ',')]
    pub curves: Option<Vec<f64>>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
    /// Re-run the configuration stored in a JSON output file.
    #[arg(long = "from-json", global = true)]
    pub from_json: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Distributional,
    ExplicitBeamformer,
}

impl From<ModeArg> for SimulationMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Distributional => SimulationMode::Distributional,
            ModeArg::ExplicitBeamformer => SimulationMode::ExplicitBeamformer,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "name")]
pub enum Command {
    Pto,
    Pso,
    Throughput,
    Optimize,
    Figure { id: u8, curves: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepVar {
    TauB,
    TauE,
    RateB,
    RateE,
    Beta,
    Lambda,
    PsDbm,
    PrDbm,
    Dsr,
    Drd,
    Eta,
}

impl SweepVar {
    pub fn parse(s: &str) -> Result<Self, Failure> {
        Ok(match s {
            "tau-b" => Self::TauB,
            "tau-e" => Self::TauE,
            "rb" | "rate-b" => Self::RateB,
            "re" | "rate-e" => Self::RateE,
            "beta" => Self::Beta,
            "lambda" => Self::Lambda,
            "ps-dbm" => Self::PsDbm,
            "pr-dbm" => Self::PrDbm,
            "dsr" => Self::Dsr,
            "drd" => Self::Drd,
            "eta" => Self::Eta,
            other => return Err(Failure::Validation(format!("unknown sweep variable `{other}`"))),
        })
    }

    /// Column name in tabular output.
    pub fn column(self) -> &'static str {
        match self {
            Self::TauB => "tau_b",
            Self::TauE => "tau_e",
            Self::RateB => "rate_b",
            Self::RateE => "rate_e",
            Self::Beta => "beta",
            Self::Lambda => "lambda",
            Self::PsDbm => "ps_dbm",
            Self::PrDbm => "pr_dbm",
            Self::Dsr => "dsr",
            Self::Drd => "drd",
            Self::Eta => "eta",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub variable: SweepVar,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub log: bool,
}

impl Sweep {
    pub fn parse(words: &[String], log: bool) -> Result<Self, Failure> {
        let bad = |msg: String| Failure::Validation(msg);
        let [var, range, points] = words else {
            return Err(bad("--sweep takes <var> <start>..<stop> x<points>".into()));
        };
        let variable = SweepVar::parse(var)?;
        let (a, b) = range
            .split_once("..")
            .ok_or_else(|| bad(format!("malformed sweep range `{range}`")))?;
        let start: f64 = a.trim().parse().map_err(|_| bad(format!("malformed sweep start `{a}`")))?;
        let stop: f64 = b.trim().parse().map_err(|_| bad(format!("malformed sweep stop `{b}`")))?;
        let points: usize = points
            .strip_prefix('x')
            .and_then(|p| p.parse().ok())
            .ok_or_else(|| bad(format!("malformed point count `{points}`, expected e.g. x50")))?;
        let sweep = Self { variable, start, stop, points, log };
        sweep.validate()?;
        Ok(sweep)
    }

    pub fn validate(&self) -> Result<(), Failure> {
        if !(self.start.is_finite() && self.stop.is_finite() && self.start < self.stop) {
            return Err(Failure::Validation(format!(
                "sweep bounds must be finite and increasing, got {}..{}",
                self.start, self.stop
            )));
        }
        if self.points < 2 {
            return Err(Failure::Validation("a sweep needs at least 2 points".into()));
        }
        if self.log && self.start <= 0.0 {
            return Err(Failure::Validation("log sweeps need a positive start".into()));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                if i == n - 1 {
                    self.stop
                } else if self.log {
                    (self.start.ln() + t * (self.stop / self.start).ln()).exp()
                } else {
                    self.start + t * (self.stop - self.start)
                }
            })
            .collect()
    }
}

/// Everything needed to reproduce a run; echoed into every output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub params: SystemParams,
    pub beta: Option<f64>,
    pub rate_b: f64,
    pub rate_e: f64,
    pub phi: f64,
    pub sweep: Option<Sweep>,
    pub with_mc: bool,
    pub monte_carlo: MonteCarloConfig,
    pub format: OutputFormat,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub const DEFAULT_POWER_DBM: f64 = 20.0;
pub const DEFAULT_NOISE_DBM: f64 = 0.0;

impl CommonArgs {
    pub fn system_params(&self) -> Result<SystemParams, Failure> {
        let power = |v: Option<f64>| dbm_to_watts(v.unwrap_or(DEFAULT_POWER_DBM));
        let noise = |v: Option<f64>| dbm_to_watts(v.unwrap_or(DEFAULT_NOISE_DBM));
        SystemParams::builder()
            .num_antennas(self.n.unwrap_or(4))
            .path_loss_exp(self.eta.unwrap_or(4.0))
            .eav_density(self.lambda.unwrap_or(1.0))
            .power_source(power(self.ps_dbm))
            .power_relay(power(self.pr_dbm))
            .dist_sr(self.dsr.unwrap_or(1.0))
            .dist_rd(self.drd.unwrap_or(1.0))
            .noise_relay(noise(self.noise_relay_dbm))
            .noise_dest(noise(self.noise_dest_dbm))
            .noise_eav1(noise(self.noise_eav1_dbm))
            .noise_eav2(noise(self.noise_eav2_dbm))
            .build()
            .map_err(Failure::from_validation)
    }

    pub fn resolve(&self, command: &CliCommand) -> Result<RunConfig, Failure> {
        let command = match command {
            CliCommand::Pto => Command::Pto,
            CliCommand::Pso => Command::Pso,
            CliCommand::Throughput => Command::Throughput,
            CliCommand::Optimize => Command::Optimize,
            CliCommand::Figure { id } => {
                let curves = match (self.curves.clone(), id) {
                    (Some(c), _) => c,
                    (None, 2) => vec![0.0, 10.0, 20.0],
                    (None, 3) => vec![0.0, 10.0],
                    (None, 4 | 5) => vec![2.0, 4.0, 8.0],
                    (None, other) => return Err(Failure::Validation(format!("unknown figure {other}"))),
                };
                Command::Figure { id: *id, curves }
            }
        };
        let sweep = self.sweep.as_deref().map(|w| Sweep::parse(w, self.log)).transpose()?;
        let defaults = MonteCarloConfig::default();
        let run = RunConfig {
            command,
            params: self.system_params()?,
            beta: self.beta,
            rate_b: self.rb.unwrap_or(1.0),
            rate_e: self.re.unwrap_or(0.5),
            phi: self.phi.unwrap_or(0.4),
            sweep,
            with_mc: self.with_mc,
            monte_carlo: MonteCarloConfig {
                num_trials: self.trials.unwrap_or(defaults.num_trials),
                seed: self.seed.unwrap_or(1),
                disc_radius: None,
                mode: self.mode.map(Into::into).unwrap_or_default(),
            },
            format: self.format.unwrap_or_default(),
            out: self.out.clone(),
        };
        run.validate()?;
        Ok(run)
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), Failure> {
        if let Some(s) = &self.sweep {
            s.validate()?;
        }
        self.monte_carlo.validate().map_err(Failure::from_validation)?;
        if !(self.phi > 0.0 && self.phi < 1.0) {
            return Err(Failure::Validation(format!("--phi must lie in (0, 1), got {}", self.phi)));
        }
        if let Command::Figure { id, curves } = &self.command {
            if !(2..=5).contains(id) {
                return Err(Failure::Validation(format!("unknown figure {id}")));
            }
            if curves.is_empty() {
                return Err(Failure::Validation("--curves must not be empty".into()));
            }
            if *id >= 4 && curves.iter().any(|&n| !(n >= 1.0 && n.fract() == 0.0 && n <= 1024.0)) {
                return Err(Failure::Validation("antenna counts in --curves must be positive integers".into()));
            }
        }
        Ok(())
    }
}
