use thiserror::Error;

use crate::subset::Subset;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("item count {n} outside supported range 1..={max}")]
    UniverseSize { n: usize, max: usize },

    #[error("operation enumerates all subsets; {n} items exceeds the enumeration cap of {max}")]
    NotEnumerable { n: usize, max: usize },

    #[error("universe mismatch: expected {expected} items, found {found}")]
    UniverseMismatch { expected: usize, found: usize },

    #[error("subset {set} references items outside a universe of {n}")]
    SubsetOutOfRange { set: Subset, n: usize },

    #[error("invalid table: {0}")]
    InvalidTable(String),

    #[error("invalid value {value} for {what}")]
    InvalidValue { what: &'static str, value: f64 },

    #[error("valuation is not monotone: v({smaller}) > v({larger})")]
    NonMonotoneValuation { smaller: Subset, larger: Subset },

    #[error("probabilities sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },

    #[error("empty support")]
    EmptySupport,

    #[error("price of item {item} is infinite")]
    InfiniteItemPrice { item: usize },

    #[error("price of set {set} is infinite")]
    InfiniteSetPrice { set: Subset },

    #[error("pricing exceeds its upper bound on {set}: {lower} > {upper}")]
    NotDominated { set: Subset, lower: f64, upper: f64 },

    #[error("pricing is not monotone and subadditive (witness {0} / {1})")]
    NotSybilProof(Subset, Subset),

    #[error("pointwise approximation factor is infinite (zero price on {set})")]
    InfiniteFactor { set: Subset },

    #[error("support of {found} exceeds the enumeration budget of {max}; use the grid search instead")]
    SupportTooLarge { found: usize, max: usize },

    #[error("valuation kind {0} not supported here")]
    UnsupportedValuation(&'static str),

    #[error("truncation exponent {needed} exceeds a_max = {a_max}; raise a_max")]
    TruncationNotReached { needed: u32, a_max: u32 },

    #[error("item {item} cannot be acquired from this menu")]
    Unreachable { item: usize },

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("set system: placed {placed} of {wanted} sets before exhausting {tries} draws")]
    SetSystemBudget {
        placed: usize,
        wanted: usize,
        tries: usize,
    },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("no-arbitrage condition fails for sets {i} and {j}: {lhs} > {rhs}")]
    Arbitrage { i: usize, j: usize, lhs: f64, rhs: f64 },

    #[error("matroid spec infeasible: {0}")]
    MatroidInfeasible(String),

    #[error("core-tail split is tail-only; use the tail-only path of the decomposition report")]
    TailOnly,
}

pub type Result<T> = std::result::Result<T, Error>;
