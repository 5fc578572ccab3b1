//! Cooperative rate-splitting over a jointly-transmitting multi-cell
//! downlink: channel model, achievable-rate calculus, successive convex
//! approximation for the max-min rate problem in half- and full-duplex
//! relaying, and a Monte Carlo experiment harness.

pub mod cvxsub;
pub mod error;
pub mod harness;
pub mod netmodel;
pub mod oracle;
pub mod rates;
pub mod sca;

pub use error::{Error, Result};
pub use netmodel::{generate_channels, stack_channels, to_linear, ChannelRealization, NetworkConfig};
pub use rates::{evaluate, Mode, RateReport, Solution};
pub use sca::{baseline_rsma, sca_fd, sca_hd, solve_scheme, ScaOutcome, ScaSettings, Scheme};
pub use harness::{ExperimentSpec, ResultTable};
