//! Revenue-optimal pricing and auctions when a buyer's value is revealed by
//! a signal that is correct with some probability and otherwise an
//! independent draw from the prior.
//!
//! Modules are layered bottom-up: [`distributions`] provides priors,
//! [`posterior`] the signal-conditioned value laws, [`ironing`] the ironed
//! virtual values, [`pricing`] single-buyer posted prices, [`auctions`]
//! multi-buyer mechanisms and revenue estimation, and [`expcli`] the
//! experiment drivers behind the command-line tool.

pub mod auctions;
pub mod distributions;
pub mod error;
pub mod expcli;
pub mod ironing;
pub mod numerics;
pub mod posterior;
pub mod pricing;

pub use distributions::Prior;
pub use error::{Error, Result};
