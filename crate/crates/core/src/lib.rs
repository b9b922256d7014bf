//! Monte Carlo estimation of uplink success probability in multi-cell
//! LoRa networks.
//!
//! Gateways and end-devices form independent Poisson point processes on a
//! disk. A tagged device at the origin transmits to its nearest gateway
//! with the spreading factor its distance ring dictates; the uplink
//! succeeds when both the SNR condition (fading channel against the SF
//! demodulation threshold) and the SIR condition (signal against
//! aggregate same- or cross-SF interference from concurrently active
//! devices) hold. Sweeping the gateway distance yields the
//! distance-probability curves under Rayleigh or Rician fading, with
//! closed-form connection-probability oracles for verification.
//!
//! Module map:
//!
//! - [`lora_params`]: SF table, SIR threshold matrix, duty cycles, ring
//!   boundaries.
//! - [`geometry`]: Poisson point processes on a disk, nearest queries.
//! - [`channel`]: noise floor, Friis gain, fading samplers, Marcum Q and
//!   connection-probability closed forms.
//! - [`engine`]: trial evaluation and distance sweeps.
//! - [`rng`]: counter-based per-trial stream derivation.
//! - [`config`] / [`output`]: flat key-value configs, manifests, CSV.

// `!(x > 0.0)` style guards reject NaN along with the out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod config;
pub mod engine;
pub mod error;
pub mod geometry;
pub mod lora_params;
pub mod output;
pub mod rng;

pub use channel::{analytic_conn_prob, marcum_q1, FadingModel, LinkBudget};
pub use engine::{
    run_sweep, CurveEstimate, GatewayMode, H1H2Coupling, InterferenceMode, SimConfig, Simulation,
};
pub use error::{Error, Result};
