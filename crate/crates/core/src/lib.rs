//! Buy-many pricing workbench.
//!
//! Priced set functions over the subset lattice of `n` items, the buyer's
//! best response to them, and the machinery relating general Sybil-proof
//! pricings to item and bundle pricings: scaled item pricings, lottery menus,
//! hard instance families and core-tail decompositions.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! `*64` aliases at the crate root fix `f64`.

// `!(x > 0)` is how validation rejects NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod demand;
pub mod coretail;
pub mod error;
pub mod gen;
pub mod io;
pub mod lattice;
pub mod lottery;
pub mod lowerbound;
pub mod rng;
pub mod scaling;
pub mod scalar;
pub mod simple_opt;
pub mod subset;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use subset::{ItemUniverse, Subset};

pub type Pricing64 = lattice::Pricing<f64>;
pub type Valuation64 = lattice::Valuation<f64>;
pub type ValuationDistribution64 = lattice::ValuationDistribution<f64>;
pub type Tolerance64 = lattice::ToleranceConfig<f64>;
