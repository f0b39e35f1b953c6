//! Finite-alphabet rate evaluation for relay and diamond networks with a
//! rate-limited cooperation facilitator (CF).
//!
//! The crate is organised bottom-up:
//!
//! - [`prob`]: joint pmfs, conditional kernels, entropy and mutual information.
//! - [`lp`]: a small dense two-phase simplex solver.
//! - [`relaynet`]: the CF achievable rate for the relay channel with orthogonal
//!   receiver components and the classical partial-decode-forward /
//!   compress-forward (PD/CF) bound.
//! - [`slope`]: perturbations of the compression test channel, derivative
//!   formulas, the direction LP, the λ alignment check, and the
//!   deterministic-reduction graph.
//! - [`zoo`]: the modulo-additive and BEC-pair relay channels.
//! - [`diamond3`]: the three-relay diamond network built on a two-user MAC.
//! - [`run`]: the command dispatcher behind the `cfdiamond` binary.
//!
//! All rates are in bits per channel use.

pub mod diamond3;
pub mod error;
pub mod lp;
pub mod prob;
pub mod random;
pub mod relaynet;
pub mod run;
pub mod slope;
pub mod tol;
pub mod zoo;

pub use error::{Error, ErrorKind, Result};
pub use prob::{Alphabet, CondKernel, FiniteDist};
pub use relaynet::{CodingDist, RateReport, RelayNetSpec};
pub use tol::Tolerances;
