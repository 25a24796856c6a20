//! Exact negative-dependence checks for generalized independent urn models.
//!
//! Everything in this crate is exact rational (or exact integer) arithmetic;
//! there is no floating point anywhere. The crate is `no_std` and only needs
//! `alloc`; file formats and the command line live in the companion crate.
//!
//! Layout:
//!
//! - [`urn`]: urn models and the measures they induce (enumeration,
//!   occupation, interval, conditional ball-set measures, refinement).
//! - [`measure`]: finite measures on boxes of `ℕ^n`, up-sets, conditioning,
//!   correlation tests, stochastic dominance, external fields.
//! - [`negdep`]: property checkers (NA, NC, CNA, CNC, NMP, ULC, Rayleigh, SCP,
//!   FM, CFM) returning reports with replayable witnesses.
//! - [`bipartite`]: weighted bipartite normalized matching (Hall, LYM on
//!   independent sets, flow certificates) and the ranked-poset LYM check.
//! - [`orient`]: multigraph orientation counting, its deletion/contraction and
//!   vertex-splitting recurrences, and the link back to urn measures.
#![cfg_attr(all(not(feature = "std"), not(test)), no_std)]

extern crate alloc;

pub mod bipartite;
pub mod bits;
pub mod error;
pub mod family;
pub mod flow;
pub mod limits;
pub mod measure;
pub mod negdep;
pub mod orient;
pub mod rational;
pub mod showcase;
pub mod urn;

pub use error::{Error, Result};
pub use limits::Limits;
pub use rational::Rational;
