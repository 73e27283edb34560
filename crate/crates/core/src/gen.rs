//! Random integer-valued instances for experiments and property tests.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::demand::DemandDistribution;
use crate::error::{Error, Result};
use crate::lattice::{buy_many_closure, Pricing, Valuation, ValuationDistribution};
use crate::scalar::Scalar;
use crate::subset::{ItemUniverse, Subset};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubadditiveFamily {
    /// Cover closure of random options, every singleton offered.
    Closure,
    /// Maximum of a few additive clauses.
    Xos,
    /// `min(B, Σ w_i)`.
    BudgetAdditive,
}

impl SubadditiveFamily {
    pub const ALL: [Self; 3] = [Self::Closure, Self::Xos, Self::BudgetAdditive];
}

fn random_nonempty<R: Rng>(n: usize, rng: &mut R) -> Subset {
    Subset(rng.gen_range(1..=Subset::full(n).bits()))
}

fn table<T: Scalar>(universe: ItemUniverse, f: impl Fn(Subset) -> u64) -> Result<Pricing<T>> {
    Pricing::explicit(universe, universe.subsets().map(|s| T::of(f(s) as f64)).collect())
}

/// Monotone subadditive pricing with finite integer prices in `0..=max_price`
/// per base option or weight.
pub fn random_subadditive_pricing<T: Scalar, R: Rng>(
    universe: ItemUniverse,
    family: SubadditiveFamily,
    max_price: u32,
    rng: &mut R,
) -> Result<Pricing<T>> {
    let n = universe.n();
    let max_price = max_price.max(1) as u64;
    match family {
        SubadditiveFamily::Closure => {
            let mut options: Vec<(Subset, T)> = (0..n)
                .map(|i| (Subset::singleton(i), T::of(rng.gen_range(1..=max_price) as f64)))
                .collect();
            for _ in 0..rng.gen_range(0..=2 * n) {
                let s = random_nonempty(n, rng);
                options.push((s, T::of(rng.gen_range(1..=max_price * s.len() as u64) as f64)));
            }
            Pricing::cover(universe, options)
        }
        SubadditiveFamily::Xos => {
            let clauses: Vec<Vec<u64>> = (0..rng.gen_range(1..=3))
                .map(|_| (0..n).map(|_| rng.gen_range(0..=max_price)).collect())
                .collect();
            table(universe, |s| {
                clauses
                    .iter()
                    .map(|w| s.items().map(|i| w[i]).sum::<u64>())
                    .max()
                    .unwrap_or(0)
            })
        }
        SubadditiveFamily::BudgetAdditive => {
            let w: Vec<u64> = (0..n).map(|_| rng.gen_range(0..=max_price)).collect();
            let cap = rng.gen_range(1..=max_price * n as u64);
            table(universe, |s| s.items().map(|i| w[i]).sum::<u64>().min(cap))
        }
    }
}

/// A family drawn uniformly, then a pricing from it.
pub fn random_pricing<T: Scalar, R: Rng>(universe: ItemUniverse, max_price: u32, rng: &mut R) -> Result<Pricing<T>> {
    let family = SubadditiveFamily::ALL[rng.gen_range(0..3)];
    random_subadditive_pricing(universe, family, max_price, rng)
}

/// Additive, unit-demand, single-minded or XOS valuation with integer
/// values in `0..=max_value` per item or clause entry.
pub fn random_valuation<T: Scalar, R: Rng>(universe: ItemUniverse, max_value: u32, rng: &mut R) -> Result<Valuation<T>> {
    let n = universe.n();
    let max_value = max_value.max(1) as u64;
    let item_values = |rng: &mut R| -> Vec<T> { (0..n).map(|_| T::of(rng.gen_range(0..=max_value) as f64)).collect() };
    match rng.gen_range(0..4) {
        0 => Valuation::additive(universe, item_values(rng)),
        1 => Valuation::unit_demand(universe, item_values(rng)),
        2 => {
            let s = random_nonempty(n, rng);
            let v = rng.gen_range(1..=max_value * s.len() as u64);
            Valuation::single_minded(universe, s, T::of(v as f64))
        }
        _ => {
            let clauses: Vec<Vec<u64>> = (0..rng.gen_range(1..=3))
                .map(|_| (0..n).map(|_| rng.gen_range(0..=max_value)).collect())
                .collect();
            let table = universe
                .subsets()
                .map(|s| {
                    let v = clauses
                        .iter()
                        .map(|w| s.items().map(|i| w[i]).sum::<u64>())
                        .max()
                        .unwrap_or(0);
                    T::of(v as f64)
                })
                .collect();
            Valuation::explicit(universe, table)
        }
    }
}

/// `1..=max_types` random valuations with random integer weights.
pub fn random_distribution<T: Scalar, R: Rng>(
    universe: ItemUniverse,
    max_types: usize,
    max_value: u32,
    rng: &mut R,
) -> Result<ValuationDistribution<T>> {
    let k = rng.gen_range(1..=max_types.max(1));
    let masses = (0..k)
        .map(|_| Ok((T::of(rng.gen_range(1..=10) as f64), random_valuation(universe, max_value, rng)?)))
        .collect::<Result<Vec<_>>>()?;
    ValuationDistribution::normalized(masses)
}

/// Product demand with marginals on a grid of twentieths, some of them
/// deliberately small so that tails occur.
pub fn random_product<T: Scalar, R: Rng>(universe: ItemUniverse, rng: &mut R) -> Result<DemandDistribution<T>> {
    let scale = if rng.gen_bool(0.5) { 20 } else { 80 };
    let marginals = (0..universe.n())
        .map(|_| T::of(rng.gen_range(0..=20) as f64 / scale as f64))
        .collect();
    DemandDistribution::product(universe, marginals)
}

/// The instance where selling every set separately extracts a `1/n` share
/// of the expected grand value.
#[derive(Clone, Debug)]
pub struct HartNisan<T> {
    /// Nonempty subsets ordered by size, then bitset value.
    pub sets: Vec<Subset>,
    /// Type `i` (1-based) has weight `∝ n^{−i}` and values each item of
    /// `S_i` at `n^i/|S_i|`.
    pub d: ValuationDistribution<T>,
    /// `S_i ↦ n^{i−1}`, as listed (monotone, not subadditive).
    pub raw: Pricing<T>,
    /// Buy-many closure of the raw options.
    pub closure: Pricing<T>,
}

pub const HART_NISAN_MAX_N: usize = 8;

pub fn gen_hart_nisan<T: Scalar>(n: usize) -> Result<HartNisan<T>> {
    if !(2..=HART_NISAN_MAX_N).contains(&n) {
        return Err(Error::InvalidParams(format!(
            "hart-nisan needs 2 <= n <= {HART_NISAN_MAX_N}, got {n}"
        )));
    }
    let universe = ItemUniverse::new(n)?;
    let mut sets: Vec<Subset> = universe.subsets().filter(|s| !s.is_empty()).collect();
    sets.sort_by_key(|s| (s.len(), s.bits()));
    let nf = T::of_usize(n);
    let mut table = vec![T::zero(); universe.lattice_size()];
    let mut options = Vec::with_capacity(sets.len());
    let mut masses = Vec::with_capacity(sets.len());
    for (idx, &s) in sets.iter().enumerate() {
        let i = idx as i32 + 1;
        let price = nf.powi(i - 1);
        table[s.bits() as usize] = price;
        options.push((s, price));
        let per = nf.powi(i) / T::of_usize(s.len());
        let mut values = vec![T::zero(); n];
        for item in s.items() {
            values[item] = per;
        }
        masses.push((nf.powi(-i), Valuation::additive(universe, values)?));
    }
    Ok(HartNisan {
        d: ValuationDistribution::normalized(masses)?,
        raw: Pricing::explicit(universe, table)?,
        closure: buy_many_closure(&options, universe)?,
        sets,
    })
}
