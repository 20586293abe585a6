//! Secrecy performance of a decode-and-forward relay wiretap channel with a
//! multi-antenna source sending artificial noise and eavesdroppers scattered
//! as a Poisson point process.
//!
//! - [`analytic`]: transmission/secrecy outage probabilities and throughput.
//! - [`montecarlo`]: an independent simulator of the same model.
//! - [`optimizer`]: wiretap code rates and power split maximising throughput
//!   under a secrecy outage constraint.

pub mod analytic;
pub mod error;
pub mod model;
pub mod montecarlo;
pub mod optimizer;
pub mod quadrature;
pub mod special;

pub use error::{Error, Result};
pub use model::{PowerAllocation, SecrecyMetrics, SystemParams, WiretapCode};
pub use quadrature::QuadratureConfig;
