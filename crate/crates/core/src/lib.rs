//! A stochastic model of closing call auctions.
//!
//! The crate covers the clearing mechanics of a single auction
//! ([`auction`]), the exact and asymptotic law of the lower clearing price
//! ([`analytic`]), Monte Carlo generation of auction returns ([`simulate`]),
//! empirical tail estimation ([`estimation`]) and an order-level data
//! pipeline producing per-stock and group reports ([`pipeline`]).

pub mod analytic;
pub mod auction;
pub mod cli;
pub mod error;
pub mod estimation;
pub mod pipeline;
pub mod placement;
pub mod simulate;

pub use error::{Error, Result};
