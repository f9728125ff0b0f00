//! Equilibria of homogeneous-goods consumer-search markets under linear
//! prices and two-part tariffs.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure
//! function of immutable inputs, so solved equilibria can be shared across
//! threads freely. IO, configuration and the command line live in the
//! `tariffsearch` companion crate.
//!
//! Module map:
//!
//! - [`demand`]: demand curves, revenue, and the surplus map `v(π)`.
//! - [`offer`]: equal-profit offer distributions shared by every solver.
//! - [`stahl`]: shoppers/nonshoppers sequential search, both regimes.
//! - [`extcost`]: continuously distributed search costs.
//! - [`noisy`]: noisy search with a random number of responses.
//! - [`welfare`]: exact surplus accounting and regime comparisons.
//! - [`verify`]: numerical certification of solved profiles.
//! - [`simulate`]: seeded Monte Carlo replay of a solved market.

#![no_std]
// `!(x > 0.0)` is used on purpose so that NaN takes the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod demand;
pub mod error;
pub mod extcost;
pub mod noisy;
pub mod numeric;
pub mod offer;
pub mod simulate;
pub mod stahl;
pub mod verify;
pub mod welfare;

pub use demand::{DemandCurve, DemandFamily, SolverOptions, SurplusMap};
pub use error::{Error, Result};
pub use offer::{Clientele, OfferDistribution, OfferLaw, SupportCdf, TabulatedCdf};
pub use stahl::{MarketParams, Regime, SequentialEquilibrium};
