//! Relay selection for a blocked source that pays relay candidates with
//! wireless power transfer.
//!
//! A source whose direct link to the access point is non-line-of-sight
//! procures relay service from nearby devices. A candidate is willing to
//! relay once the total source power (communication plus a power-transfer
//! share) lets it harvest enough to pay for its own retransmission; that
//! breakeven power is the candidate's private valuation. The source runs a
//! buyer-optimal reverse auction over those valuations, using the lognormal
//! fading statistics it knows to compute virtual valuations.
//!
//! Modules, bottom up:
//! - [`numerics`]: normal distribution functions, Mills ratio, bisection.
//! - [`channel`]: path loss, lognormal fading, SNR-driven powers.
//! - [`valuation`]: valuation law, virtual valuation and its inverse.
//! - [`mechanism`]: Myerson, Vickrey and full-information outcomes.
//! - [`sim`]: scenario generation and Monte Carlo aggregation.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod error;
pub mod mechanism;
pub mod numerics;
pub mod sim;
pub mod valuation;

pub use error::{Error, Result};
