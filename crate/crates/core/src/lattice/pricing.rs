use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::lattice::closure::{closure_query, closure_table};
use crate::scalar::Scalar;
use crate::subset::{ItemUniverse, Subset};

/// Base options of a cover closure, with the lazily built price table.
///
/// The table is built at most once, on first evaluation, and is read-only
/// afterwards; concurrent readers block on the same initialization.
#[derive(Clone, Debug)]
pub struct CoverOptions<T> {
    options: Vec<(Subset, T)>,
    table: OnceLock<Vec<T>>,
}

impl<T> CoverOptions<T> {
    pub fn options(&self) -> &[(Subset, T)] {
        &self.options
    }
}

#[derive(Clone, Debug)]
pub enum PricingForm<T> {
    /// One price per subset, indexed by bitset. `+inf` marks an unavailable set.
    Explicit(Vec<T>),
    /// Additive: each set costs the sum of its item prices.
    Item(Vec<T>),
    /// Every nonempty set costs the same.
    Bundle(T),
    /// Cheapest collection of base options covering the set.
    Cover(CoverOptions<T>),
    /// `factor * inner`.
    Scaled { factor: T, inner: Box<Pricing<T>> },
}

/// A deterministic price for every set of items.
#[derive(Clone, Debug)]
pub struct Pricing<T> {
    universe: ItemUniverse,
    form: PricingForm<T>,
    // Exact (tolerance-free) monotonicity, known structurally or checked at
    // construction. Enables best-response search restricted to the
    // valuation's relevant items.
    monotone: bool,
}

fn check_price<T: Scalar>(what: &'static str, x: T, allow_inf: bool) -> Result<()> {
    let bad = x.is_nan() || x < T::zero() || (!allow_inf && x.is_infinite());
    if bad {
        return Err(Error::InvalidValue {
            what,
            value: x.to_f64_lossy(),
        });
    }
    Ok(())
}

impl<T: Scalar> Pricing<T> {
    /// Full table over all `2^n` sets. `table[0]` must be zero; entries may be
    /// `+inf` for sets that cannot be bought.
    pub fn explicit(universe: ItemUniverse, table: Vec<T>) -> Result<Self> {
        universe.require_enumerable()?;
        if table.len() != universe.lattice_size() {
            return Err(Error::InvalidTable(format!(
                "expected {} entries, found {}",
                universe.lattice_size(),
                table.len()
            )));
        }
        for &x in &table {
            check_price("explicit price", x, true)?;
        }
        if table[0] != T::zero() {
            return Err(Error::InvalidTable("price of the empty set must be 0".into()));
        }
        let monotone = table_is_monotone(universe, &table);
        Ok(Self {
            universe,
            form: PricingForm::Explicit(table),
            monotone,
        })
    }

    pub fn item(universe: ItemUniverse, prices: Vec<T>) -> Result<Self> {
        if prices.len() != universe.n() {
            return Err(Error::UniverseMismatch {
                expected: universe.n(),
                found: prices.len(),
            });
        }
        for &x in &prices {
            check_price("item price", x, false)?;
        }
        Ok(Self {
            universe,
            form: PricingForm::Item(prices),
            monotone: true,
        })
    }

    pub fn bundle(universe: ItemUniverse, price: T) -> Result<Self> {
        check_price("bundle price", price, true)?;
        Ok(Self {
            universe,
            form: PricingForm::Bundle(price),
            monotone: true,
        })
    }

    /// Cover closure of the given base options. Options on the empty set are
    /// dropped; they never help cover anything.
    pub fn cover(universe: ItemUniverse, options: Vec<(Subset, T)>) -> Result<Self> {
        for &(s, c) in &options {
            universe.check(s)?;
            check_price("option price", c, false)?;
        }
        let options = options.into_iter().filter(|(s, _)| !s.is_empty()).collect();
        Ok(Self {
            universe,
            form: PricingForm::Cover(CoverOptions {
                options,
                table: OnceLock::new(),
            }),
            monotone: true,
        })
    }

    pub fn scaled(factor: T, inner: Pricing<T>) -> Result<Self> {
        if !(factor > T::zero()) || !factor.is_finite() {
            return Err(Error::InvalidValue {
                what: "scale factor",
                value: factor.to_f64_lossy(),
            });
        }
        Ok(Self {
            universe: inner.universe,
            monotone: inner.monotone,
            form: PricingForm::Scaled {
                factor,
                inner: Box::new(inner),
            },
        })
    }

    #[inline]
    pub fn universe(&self) -> ItemUniverse {
        self.universe
    }

    #[inline]
    pub fn form(&self) -> &PricingForm<T> {
        &self.form
    }

    /// Whether `S ⊆ T ⇒ p(S) ≤ p(T)` holds exactly.
    #[inline]
    pub fn is_exactly_monotone(&self) -> bool {
        self.monotone
    }

    /// Price of `s`. Panics if `s` leaves the universe (debug builds).
    pub fn price(&self, s: Subset) -> T {
        debug_assert!(s.is_subset_of(self.universe.full()));
        match &self.form {
            PricingForm::Explicit(table) => table[s.bits() as usize],
            PricingForm::Item(prices) => s.items().map(|i| prices[i]).fold(T::zero(), |a, x| a + x),
            PricingForm::Bundle(price) => {
                if s.is_empty() {
                    T::zero()
                } else {
                    *price
                }
            }
            PricingForm::Cover(cover) => {
                if self.universe.is_enumerable() {
                    cover
                        .table
                        .get_or_init(|| closure_table(self.universe, &cover.options))
                        [s.bits() as usize]
                } else {
                    closure_query(&cover.options, s)
                }
            }
            PricingForm::Scaled { factor, inner } => *factor * inner.price(s),
        }
    }

    /// All `2^n` prices, indexed by bitset.
    pub fn table(&self) -> Result<Vec<T>> {
        self.universe.require_enumerable()?;
        match &self.form {
            PricingForm::Explicit(t) => Ok(t.clone()),
            _ => Ok(self.universe.subsets().map(|s| self.price(s)).collect()),
        }
    }

    /// `(S, p(S))` for every nonempty `S` with a finite price.
    pub fn graph(&self) -> Result<Vec<(Subset, T)>> {
        let table = self.table()?;
        Ok(self
            .universe
            .subsets()
            .skip(1)
            .filter(|s| table[s.bits() as usize].is_finite())
            .map(|s| (s, table[s.bits() as usize]))
            .collect())
    }

    /// True when some set has an infinite price.
    pub fn is_partial(&self) -> Result<bool> {
        Ok(self.table()?.iter().any(|x| x.is_infinite()))
    }

    /// Convenience: `factor * self` without consuming `self`.
    pub fn scaled_by(&self, factor: T) -> Result<Self> {
        Self::scaled(factor, self.clone())
    }
}

fn table_is_monotone<T: Scalar>(universe: ItemUniverse, table: &[T]) -> bool {
    // Single-item additions suffice for exact monotonicity.
    universe.subsets().all(|s| {
        (0..universe.n())
            .filter(|&i| !s.contains(i))
            .all(|i| table[s.bits() as usize] <= table[s.insert(i).bits() as usize])
    })
}

/// Item pricing agreeing with `p` on singletons.
pub fn additive_extension<T: Scalar>(p: &Pricing<T>) -> Result<Pricing<T>> {
    let n = p.universe().n();
    let mut prices = Vec::with_capacity(n);
    for i in 0..n {
        let x = p.price(Subset::singleton(i));
        if !x.is_finite() {
            return Err(Error::InfiniteItemPrice { item: i });
        }
        prices.push(x);
    }
    Pricing::item(p.universe(), prices)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(n: usize) -> ItemUniverse {
        ItemUniverse::new(n).unwrap()
    }

    #[test]
    fn evaluation_of_each_form() {
        let item = Pricing::item(u(3), vec![1.0, 2.0, 4.0]).unwrap();
        assert_eq!(item.price(Subset::from_items([0, 2])), 5.0);
        assert_eq!(item.price(Subset::EMPTY), 0.0);

        let bundle = Pricing::bundle(u(3), 5.0).unwrap();
        assert_eq!(bundle.price(Subset::EMPTY), 0.0);
        assert_eq!(bundle.price(Subset::singleton(1)), 5.0);

        let scaled = Pricing::scaled(0.5, item.clone()).unwrap();
        assert_eq!(scaled.price(Subset::full(3)), 3.5);

        let cover = Pricing::cover(
            u(3),
            vec![(Subset::from_items([0, 1]), 2.0), (Subset::from_items([1, 2]), 2.0)],
        )
        .unwrap();
        assert_eq!(cover.price(Subset::singleton(2)), 2.0);
        assert_eq!(cover.price(Subset::full(3)), 4.0);
    }

    #[test]
    fn explicit_validation() {
        assert!(Pricing::explicit(u(1), vec![1.0, 1.0]).is_err());
        assert!(Pricing::explicit(u(1), vec![0.0]).is_err());
        assert!(Pricing::explicit(u(1), vec![0.0, -1.0]).is_err());
        assert!(Pricing::explicit(u(1), vec![0.0, f64::NAN]).is_err());
        let partial = Pricing::explicit(u(1), vec![0.0, f64::INFINITY]).unwrap();
        assert!(partial.is_partial().unwrap());
        let non_mono = Pricing::explicit(u(2), vec![0.0, 2.0, 0.0, 1.0]).unwrap();
        assert!(!non_mono.is_exactly_monotone());
    }

    #[test]
    fn additive_extension_examples() {
        let p = Pricing::explicit(u(2), vec![0.0, 1.0, 1.0, 1.5]).unwrap();
        let q = additive_extension(&p).unwrap();
        assert_eq!(q.price(Subset::full(2)), 2.0);

        let b = Pricing::bundle(u(3), 5.0).unwrap();
        let q = additive_extension(&b).unwrap();
        assert!(matches!(q.form(), PricingForm::Item(v) if v == &vec![5.0, 5.0, 5.0]));
        assert_eq!(q.price(Subset::full(3)), 15.0);

        let item = Pricing::item(u(3), vec![1.0, 0.0, 3.0]).unwrap();
        let q = additive_extension(&item).unwrap();
        for s in u(3).subsets() {
            assert_eq!(q.price(s), item.price(s));
        }

        let partial = Pricing::cover(u(2), vec![(Subset::singleton(0), 1.0)]).unwrap();
        assert_eq!(
            additive_extension(&partial).unwrap_err(),
            Error::InfiniteItemPrice { item: 1 }
        );
    }

    #[test]
    fn cover_on_large_universe_answers_point_queries() {
        let big = u(40);
        let p = Pricing::cover(
            big,
            vec![
                (Subset::from_items([30, 31]), 3.0),
                (Subset::from_items([31, 35]), 1.0),
                (Subset::singleton(30), 1.5),
            ],
        )
        .unwrap();
        assert_eq!(p.price(Subset::from_items([30, 31])), 2.5);
        assert_eq!(p.price(Subset::singleton(0)), f64::INFINITY);
        assert!(p.table().is_err());
    }

    #[test]
    fn generic_over_f32() {
        let p = Pricing::<f32>::cover(
            u(2),
            vec![(Subset::singleton(0), 1.0), (Subset::singleton(1), 1.0), (Subset::full(2), 3.0)],
        )
        .unwrap();
        assert_eq!(p.price(Subset::full(2)), 2.0f32);
    }
}
