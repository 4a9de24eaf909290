//! Simulator and verification lab for coded distributed computing.
//!
//! The crate covers four areas:
//!
//! - [`model`]: files, toy map/reduce functions, placements, computation
//!   assignments, and exact load measurement.
//! - [`analytics`]: the closed-form storage-computation-communication
//!   tradeoff surface.
//! - [`scheme`]: construction and bit-exact simulation of the D3C family of
//!   map-shuffle-reduce schemes (M-CDC when `g = r`), plus scheme sharing.
//! - [`converse`]: counting quantities behind the lower bound, and exhaustive
//!   or randomized checks of it on small instances.
//!
//! [`harness`] ties these together into the experiments exposed by the `scc`
//! binary. All loads are exact rationals ([`Q`]).

pub mod analytics;
pub mod bits;
pub mod combin;
pub mod converse;
pub mod error;
pub mod exec;
pub mod harness;
pub mod model;
pub mod rational;
pub mod scheme;

pub use error::{Error, Result};
pub use exec::Exec;
pub use rational::Q;
