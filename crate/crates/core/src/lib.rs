//! Linear time-invariant anytime-reliable tree codes.
//!
//! The crate is split along the lines of the experiment pipeline:
//!
//! - [`channel`]: binary-input output-symmetric channels and the analytic
//!   exponent toolkit (Gallager, Jelinek, cutoff and critical rates).
//! - [`treecode`]: GF(2) block arithmetic, the Toeplitz code ensemble and
//!   causal encoding.
//! - [`seqdec`]: stack and Fano sequential decoders driven by the biased
//!   Fano metric, plus a brute-force maximum-likelihood oracle.
//! - [`control`]: the cart-stick plant, quantizer, deadbeat state
//!   reconstruction and the closed loop over a noisy link.
//! - [`harness`]: seeded Monte Carlo campaigns that emit CSV.

pub mod channel;
pub mod control;
pub mod error;
pub mod harness;
pub mod seqdec;
pub mod treecode;

pub use error::{Error, Result};
