//! Exact filtering of a finite-state continuous-time Markov chain observed
//! through a noise-free map `Y_t = h(X_t)`.
//!
//! Between observation jumps the conditional law of the hidden state moves
//! deterministically on a face of the probability simplex; at each jump it
//! is re-conditioned on the new level set. The resulting belief process is a
//! piecewise-deterministic Markov process, which this crate simulates
//! directly and uses to solve a discounted optimal stopping problem under
//! partial observation.
//!
//! Layout:
//!
//! * [`chain`]: generators, observation maps, path sampling, matrix
//!   exponentials and the sub-generator exit-time oracle.
//! * [`filter`]: the flow on the effective simplex, the conditioning
//!   operator, the continuous filter, its discrete-time approximation and
//!   prediction.
//! * [`pdp`]: jump rate, transition measure, sojourn law, direct simulation,
//!   jump-time densities and the nonlinear exit-time formula.
//! * [`stopping`]: grid value iteration, stopping rules and Monte Carlo
//!   policy evaluation.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod chain;
pub mod error;
pub mod filter;
pub mod linalg;
pub mod pdp;
pub mod rng;
pub mod stopping;

pub(crate) mod quad;

pub use chain::{Distribution, Label, Model, ObservationModel, PiecewisePath, RateMatrix};
pub use error::{Error, Result};
pub use filter::{FacePoint, FilterTrajectory, JumpRecord, Segment};
pub use linalg::Matrix;
pub use pdp::{JumpLaw, PdpTrajectory, Sojourn};
pub use rng::RandomSource;

/// Jump denominators and rates below this are treated as zero.
pub const DEG_TOL: f64 = 1e-12;
