//! Subset-lattice foundations: pricing and valuation representations,
//! deterministic Sybil-proofness checks and the buy-many cover closure.

mod closure;
mod pricing;
mod sybil;
mod tolerance;
mod valuation;

pub use closure::{buy_many_closure, closure_query, closure_table};
pub use pricing::{additive_extension, CoverOptions, Pricing, PricingForm};
pub use sybil::{check_deterministic_sybil_proof, SybilCheck, Violation, Witness};
pub use tolerance::ToleranceConfig;
pub use valuation::{Valuation, ValuationDistribution, ValuationForm};
pub(crate) use valuation::normalization_slack;
