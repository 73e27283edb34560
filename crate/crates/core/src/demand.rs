//! Buyer best response, revenue and demand distributions for deterministic
//! pricings.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{Pricing, ToleranceConfig, Valuation, ValuationDistribution, ValuationForm};
use crate::scalar::{ordered_sum, Scalar};
use crate::subset::{ItemUniverse, Subset};

/// Cap on the number of relevant items a single best-response scan expands.
const MAX_SCAN_ITEMS: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DemandResult<T> {
    pub chosen_set: Subset,
    pub price_paid: T,
    pub utility: T,
}

/// Seller-favorable order among near-optimal sets: higher price, then fewer
/// items, then smaller bitset.
#[inline]
fn preferred<T: Scalar>(a: (Subset, T), b: (Subset, T)) -> bool {
    if a.1 != b.1 {
        return a.1 > b.1;
    }
    if a.0.len() != b.0.len() {
        return a.0.len() < b.0.len();
    }
    a.0 < b.0
}

/// Utility-maximizing set of `v` against `p`.
///
/// Utilities within `tol.eps_tie` of the maximum count as ties, resolved by
/// highest price, then smallest cardinality, then smallest bitset.
///
/// When `p` is exactly monotone the scan covers only subsets of
/// `v.support()`: items outside it add no value and never lower the price.
/// A single-minded buyer then chooses between the empty set and its target.
pub fn best_response<T: Scalar>(
    v: &Valuation<T>,
    p: &Pricing<T>,
    tol: &ToleranceConfig<T>,
) -> DemandResult<T> {
    debug_assert_eq!(v.universe(), p.universe());
    let empty = DemandResult {
        chosen_set: Subset::EMPTY,
        price_paid: T::zero(),
        utility: T::zero(),
    };
    let scan = if p.is_exactly_monotone() {
        if let ValuationForm::SingleMinded { set, value } = v.form() {
            let price = p.price(*set);
            let u = *value - price;
            if set.is_empty() || !price.is_finite() {
                return empty;
            }
            let best = u.max(T::zero());
            let s_ok = u >= best - tol.eps_tie;
            let empty_ok = T::zero() >= best - tol.eps_tie;
            let pick_s = s_ok && (!empty_ok || preferred((*set, price), (Subset::EMPTY, T::zero())));
            return if pick_s {
                DemandResult {
                    chosen_set: *set,
                    price_paid: price,
                    utility: u,
                }
            } else {
                empty
            };
        }
        v.support()
    } else {
        v.universe().full()
    };
    assert!(
        scan.len() <= MAX_SCAN_ITEMS,
        "best response over {} relevant items",
        scan.len()
    );

    let mut cands: Vec<(Subset, T, T)> = Vec::with_capacity(1 << scan.len());
    let mut best = T::neg_infinity();
    for s in scan.submasks() {
        let price = p.price(s);
        if !price.is_finite() {
            continue;
        }
        let u = v.value(s) - price;
        if u > best {
            best = u;
        }
        cands.push((s, price, u));
    }
    let floor = best - tol.eps_tie;
    let mut chosen: Option<(Subset, T, T)> = None;
    for &(s, price, u) in &cands {
        if u < floor {
            continue;
        }
        match chosen {
            Some((cs, cp, _)) if !preferred((s, price), (cs, cp)) => {}
            _ => chosen = Some((s, price, u)),
        }
    }
    chosen.map_or(empty, |(s, price, u)| DemandResult {
        chosen_set: s,
        price_paid: price,
        utility: u,
    })
}

/// Expected payment `Σ w · p(λ_p(v))` over the support of `d`.
pub fn revenue<T: Scalar>(
    d: &ValuationDistribution<T>,
    p: &Pricing<T>,
    tol: &ToleranceConfig<T>,
) -> T {
    let parts: Vec<T> = d
        .support()
        .par_iter()
        .map(|(w, v)| *w * best_response(v, p, tol).price_paid)
        .collect();
    ordered_sum(parts)
}

/// Per-type revenue `Rev_v(p)`, in support order.
pub fn revenue_by_type<T: Scalar>(
    d: &ValuationDistribution<T>,
    p: &Pricing<T>,
    tol: &ToleranceConfig<T>,
) -> Vec<T> {
    d.support()
        .par_iter()
        .map(|(_, v)| best_response(v, p, tol).price_paid)
        .collect()
}

/// Distribution of the set a buyer purchases.
#[derive(Clone, Debug, PartialEq)]
pub enum DemandDistribution<T> {
    /// Finite list of `(probability, set)`.
    Explicit {
        universe: ItemUniverse,
        outcomes: Vec<(T, Subset)>,
    },
    /// Item `i` is bought independently with probability `marginals[i]`.
    ProductMarginals {
        universe: ItemUniverse,
        marginals: Vec<T>,
    },
}

impl<T: Scalar> DemandDistribution<T> {
    pub fn explicit(universe: ItemUniverse, outcomes: Vec<(T, Subset)>) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(Error::EmptySupport);
        }
        let mut sum = T::zero();
        for &(w, s) in &outcomes {
            universe.check(s)?;
            if !(w >= T::zero()) || !w.is_finite() {
                return Err(Error::InvalidValue {
                    what: "demand probability",
                    value: w.to_f64_lossy(),
                });
            }
            sum = sum + w;
        }
        if (sum - T::one()).abs()
            > crate::lattice::normalization_slack::<T>(outcomes.len())
        {
            return Err(Error::NotNormalized {
                sum: sum.to_f64_lossy(),
            });
        }
        Ok(Self::Explicit { universe, outcomes })
    }

    /// Uniform over the given sets (repeats add weight).
    pub fn uniform(universe: ItemUniverse, sets: &[Subset]) -> Result<Self> {
        let w = T::one() / T::of_usize(sets.len().max(1));
        Self::explicit(universe, sets.iter().map(|&s| (w, s)).collect())
    }

    pub fn product(universe: ItemUniverse, marginals: Vec<T>) -> Result<Self> {
        if marginals.len() != universe.n() {
            return Err(Error::UniverseMismatch {
                expected: universe.n(),
                found: marginals.len(),
            });
        }
        for &m in &marginals {
            if !(m >= T::zero() && m <= T::one()) {
                return Err(Error::InvalidValue {
                    what: "marginal probability",
                    value: m.to_f64_lossy(),
                });
            }
        }
        Ok(Self::ProductMarginals {
            universe,
            marginals,
        })
    }

    pub fn universe(&self) -> ItemUniverse {
        match self {
            Self::Explicit { universe, .. } | Self::ProductMarginals { universe, .. } => *universe,
        }
    }

    /// Outcomes with positive probability. Product marginals are expanded by
    /// enumerating all `2^n` sets.
    pub fn outcomes(&self) -> Result<Vec<(T, Subset)>> {
        match self {
            Self::Explicit { outcomes, .. } => {
                Ok(outcomes.iter().copied().filter(|(w, _)| *w > T::zero()).collect())
            }
            Self::ProductMarginals {
                universe,
                marginals,
            } => {
                universe.require_enumerable()?;
                Ok(product_outcomes(marginals, universe.full()))
            }
        }
    }

    /// `Pr[i ∈ S]` for every item.
    pub fn marginals(&self) -> Vec<T> {
        match self {
            Self::ProductMarginals { marginals, .. } => marginals.clone(),
            Self::Explicit { universe, outcomes } => (0..universe.n())
                .map(|i| {
                    outcomes
                        .iter()
                        .filter(|(_, s)| s.contains(i))
                        .fold(T::zero(), |a, (w, _)| a + *w)
                })
                .collect(),
        }
    }

    /// `E_{S∼Π}[f(S)]`.
    pub fn expectation(&self, f: impl Fn(Subset) -> T) -> Result<T> {
        Ok(ordered_sum(
            self.outcomes()?.into_iter().map(|(w, s)| w * f(s)),
        ))
    }
}

/// Outcomes of independent item draws restricted to the items of `mask`
/// (items outside `mask` are never included). Zero-probability outcomes are
/// dropped.
pub fn product_outcomes<T: Scalar>(marginals: &[T], mask: Subset) -> Vec<(T, Subset)> {
    mask.submasks()
        .filter_map(|s| {
            let w = mask.items().fold(T::one(), |acc, i| {
                acc * if s.contains(i) {
                    marginals[i]
                } else {
                    T::one() - marginals[i]
                }
            });
            (w > T::zero()).then_some((w, s))
        })
        .collect()
}

/// `Π_{p,D}`: the sets bought by buyers drawn from `d`, with equal sets merged.
pub fn demand_distribution<T: Scalar>(
    p: &Pricing<T>,
    d: &ValuationDistribution<T>,
    tol: &ToleranceConfig<T>,
) -> DemandDistribution<T> {
    let chosen: Vec<(T, Subset)> = d
        .support()
        .par_iter()
        .map(|(w, v)| (*w, best_response(v, p, tol).chosen_set))
        .collect();
    let mut merged: BTreeMap<Subset, T> = BTreeMap::new();
    for (w, s) in chosen {
        let e = merged.entry(s).or_insert_with(T::zero);
        *e = *e + w;
    }
    DemandDistribution::Explicit {
        universe: d.universe(),
        outcomes: merged.into_iter().map(|(s, w)| (w, s)).collect(),
    }
}

/// Single-minded buyers reproducing a demand distribution: each outcome `S`
/// becomes a buyer valuing every superset of `S` at `p(S)`.
pub fn singleminded_from_demand<T: Scalar>(
    demand: &DemandDistribution<T>,
    p: &Pricing<T>,
) -> Result<ValuationDistribution<T>> {
    demand.universe().same_as(p.universe())?;
    let mut support = Vec::new();
    for (w, s) in demand.outcomes()? {
        let price = p.price(s);
        if !price.is_finite() {
            return Err(Error::InfiniteSetPrice { set: s });
        }
        support.push((w, Valuation::single_minded(p.universe(), s, price)?));
    }
    ValuationDistribution::new(support)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn u(n: usize) -> ItemUniverse {
        ItemUniverse::new(n).unwrap()
    }

    fn tol() -> ToleranceConfig<f64> {
        ToleranceConfig::default()
    }

    /// Enumerates all sets, ignoring every structural shortcut.
    fn brute_best(v: &Valuation<f64>, p: &Pricing<f64>, eps: f64) -> (Subset, f64) {
        let all: Vec<_> = v
            .universe()
            .subsets()
            .map(|s| (s, p.price(s), v.value(s) - p.price(s)))
            .collect();
        let best = all.iter().map(|x| x.2).fold(f64::NEG_INFINITY, f64::max);
        let mut ties: Vec<_> = all.into_iter().filter(|x| x.2 >= best - eps).collect();
        ties.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .unwrap()
                .then(a.0.len().cmp(&b.0.len()))
                .then(a.0.cmp(&b.0))
        });
        (ties[0].0, ties[0].1)
    }

    #[test]
    fn additive_buyer_takes_the_cheap_item() {
        let v = Valuation::additive(u(2), vec![1.0, 2.0]).unwrap();
        let p = Pricing::item(u(2), vec![0.5, 3.0]).unwrap();
        let r = best_response(&v, &p, &tol());
        assert_eq!(r.chosen_set, Subset::singleton(0));
        assert_eq!(r.price_paid, 0.5);
        assert_eq!(r.utility, 0.5);
    }

    #[test]
    fn zero_valuation_buys_nothing() {
        let v = Valuation::zero(u(3));
        let p = Pricing::explicit(u(3), vec![0.0, 1.0, 1.0, 2.0, 0.5, 1.0, 1.0, 2.0]).unwrap();
        let r = best_response(&v, &p, &tol());
        assert_eq!(r.chosen_set, Subset::EMPTY);
        assert_eq!(r.price_paid, 0.0);
    }

    #[test]
    fn indifferent_buyer_purchases() {
        let v = Valuation::single_minded(u(1), Subset::singleton(0), 1.0).unwrap();
        let p = Pricing::item(u(1), vec![1.0]).unwrap();
        let r = best_response(&v, &p, &tol());
        assert_eq!(r.chosen_set, Subset::singleton(0));
        assert_eq!(r.price_paid, 1.0);
        assert_eq!(r.utility, 0.0);
    }

    #[test]
    fn tie_prefers_price_then_size() {
        // both {0} and {1} give utility 1; {1} is pricier
        let v = Valuation::additive(u(2), vec![2.0, 3.0]).unwrap();
        let p = Pricing::explicit(u(2), vec![0.0, 1.0, 2.0, 5.0]).unwrap();
        assert_eq!(best_response(&v, &p, &tol()).chosen_set, Subset::singleton(1));
        // equal price, equal utility: smaller set wins
        let v = Valuation::additive(u(2), vec![1.0, 0.0]).unwrap();
        let p = Pricing::bundle(u(2), 0.5).unwrap();
        assert_eq!(best_response(&v, &p, &tol()).chosen_set, Subset::singleton(0));
    }

    #[test]
    fn shortcut_agrees_with_full_scan() {
        let n = 4;
        let p = Pricing::cover(
            u(n),
            vec![
                (Subset::from_items([0, 1]), 1.5),
                (Subset::from_items([2]), 0.75),
                (Subset::from_items([1, 2, 3]), 2.25),
                (Subset::from_items([0]), 1.0),
                (Subset::from_items([3]), 1.25),
            ],
        )
        .unwrap();
        let vals = vec![
            Valuation::single_minded(u(n), Subset::from_items([0, 3]), 2.5).unwrap(),
            Valuation::single_minded(u(n), Subset::from_items([1, 2]), 1.0).unwrap(),
            Valuation::additive(u(n), vec![0.0, 1.0, 1.0, 0.0]).unwrap(),
            Valuation::unit_demand(u(n), vec![2.0, 0.0, 0.5, 3.0]).unwrap(),
        ];
        for v in &vals {
            let r = best_response(v, &p, &tol());
            let (s, price) = brute_best(v, &p, 1e-9);
            assert_eq!((r.chosen_set, r.price_paid), (s, price), "{v:?}");
        }
    }

    #[test]
    fn revenue_examples() {
        let v = Valuation::single_minded(u(1), Subset::singleton(0), 3.0).unwrap();
        let d = ValuationDistribution::point_mass(v);
        let p = Pricing::item(u(1), vec![2.0]).unwrap();
        assert_eq!(revenue(&d, &p, &tol()), 2.0);
        let huge = Pricing::bundle(u(1), 1e300).unwrap();
        assert_eq!(revenue(&d, &huge, &tol()), 0.0);
    }

    #[test]
    fn demand_distribution_examples() {
        let d = ValuationDistribution::point_mass(Valuation::zero(u(2)));
        let p = Pricing::item(u(2), vec![1.0, 1.0]).unwrap();
        assert_eq!(
            demand_distribution(&p, &d, &tol()).outcomes().unwrap(),
            vec![(1.0, Subset::EMPTY)]
        );

        let d = ValuationDistribution::new(vec![
            (0.3, Valuation::single_minded(u(2), Subset::singleton(0), 2.0).unwrap()),
            (0.7, Valuation::single_minded(u(2), Subset::singleton(1), 2.0).unwrap()),
        ])
        .unwrap();
        let pi = demand_distribution(&p, &d, &tol()).outcomes().unwrap();
        assert_eq!(pi, vec![(0.3, Subset::singleton(0)), (0.7, Subset::singleton(1))]);
    }

    #[test]
    fn singleminded_examples() {
        let p = Pricing::item(u(2), vec![3.0, 4.0]).unwrap();
        let pi = DemandDistribution::uniform(u(2), &[Subset::singleton(0), Subset::singleton(1)]).unwrap();
        let d = singleminded_from_demand(&pi, &p).unwrap();
        assert_eq!(
            d.support()[1].1,
            Valuation::single_minded(u(2), Subset::singleton(1), 4.0).unwrap()
        );

        let p = Pricing::item(u(2), vec![1.0, 1.0]).unwrap();
        let pi = DemandDistribution::product(u(2), vec![0.5, 0.5]).unwrap();
        let d = singleminded_from_demand(&pi, &p).unwrap();
        assert_eq!(d.len(), 4);
        assert_abs_diff_eq!(revenue(&d, &p, &tol()), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pi.expectation(|s| p.price(s)).unwrap(), 1.0, epsilon = 1e-12);

        let partial = Pricing::cover(u(2), vec![(Subset::singleton(0), 1.0)]).unwrap();
        let pi = DemandDistribution::uniform(u(2), &[Subset::singleton(1)]).unwrap();
        assert_eq!(
            singleminded_from_demand(&pi, &partial).unwrap_err(),
            Error::InfiniteSetPrice {
                set: Subset::singleton(1)
            }
        );
    }
}
