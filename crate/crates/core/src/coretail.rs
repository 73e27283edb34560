//! Core-tail decomposition of a subadditive pricing under product demand.
//!
//! Items are ordered by descending singleton price. The tail is the longest
//! prefix whose purchase probabilities sum to less than ½; everything else
//! is the core. Tail revenue is recovered by item prices, core revenue by a
//! bundle price, since `p(S ∩ core)` concentrates around its median.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::demand::{product_outcomes, revenue, singleminded_from_demand, DemandDistribution};
use crate::error::{Error, Result};
use crate::lattice::{Pricing, ToleranceConfig};
use crate::rng::task_rng;
use crate::scalar::{ordered_sum, Scalar};
use crate::simple_opt::brev_exact;
use crate::subset::{Subset, MAX_ENUMERABLE_ITEMS};

/// Final constant of the decomposition, `8 + 4/((1 − e^{−1/2}) ln 2)` rounded up.
pub const DECOMPOSITION_CONSTANT: f64 = 22.67;

/// `1 − e^{−1/2}`.
pub fn jensen_floor() -> f64 {
    1.0 - (-0.5f64).exp()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Standard,
    TailOnly,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Self::Standard => "standard",
            Self::TailOnly => "tail-only",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoreTailSplit {
    /// Items by descending singleton price, ties by index.
    pub order: Vec<usize>,
    /// Number of tail items: `order[..k]`.
    pub k: usize,
    pub tail: Subset,
    pub core: Subset,
    pub regime: Regime,
}

impl CoreTailSplit {
    /// The first core item, whose singleton price is `c`.
    pub fn pivot(&self) -> Option<usize> {
        self.order.get(self.k).copied()
    }
}

fn product_marginals<T: Scalar>(pi: &DemandDistribution<T>) -> Result<&[T]> {
    match pi {
        DemandDistribution::ProductMarginals { marginals, .. } => Ok(marginals),
        DemandDistribution::Explicit { .. } => Err(Error::InvalidParams(
            "core-tail decomposition needs a product demand distribution".into(),
        )),
    }
}

pub fn split_core_tail<T: Scalar>(p: &Pricing<T>, pi: &DemandDistribution<T>) -> Result<CoreTailSplit> {
    p.universe().same_as(pi.universe())?;
    let marginals = product_marginals(pi)?;
    let n = p.universe().n();
    let singles: Vec<T> = (0..n).map(|i| p.price(Subset::singleton(i))).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        singles[b]
            .partial_cmp(&singles[a])
            .expect("comparable prices")
            .then(a.cmp(&b))
    });
    let half = T::half();
    let mut cum = T::zero();
    let mut k = n;
    for (idx, &i) in order.iter().enumerate() {
        cum = cum + marginals[i];
        if cum >= half {
            k = idx;
            break;
        }
    }
    let tail = Subset::from_items(order[..k].iter().copied());
    let regime = if k == n { Regime::TailOnly } else { Regime::Standard };
    Ok(CoreTailSplit {
        order,
        k,
        tail,
        core: Subset::full(n).difference(tail),
        regime,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoreStats<T> {
    /// `inf{t : Pr[p(S ∩ core) > t] < 1/2}`.
    pub a: T,
    /// Singleton price of the first core item.
    pub c: T,
    pub core_mean: T,
    /// `3a + (4/ln 2)c`.
    pub bound: T,
    /// Whether `a` and `core_mean` come from exact enumeration.
    pub exact: bool,
}

/// `(value, probability)` pairs of `p(S ∩ core)`, merged and ascending.
pub fn core_value_distribution<T: Scalar>(
    p: &Pricing<T>,
    pi: &DemandDistribution<T>,
    split: &CoreTailSplit,
) -> Result<Vec<(T, T)>> {
    let marginals = product_marginals(pi)?;
    if split.core.len() > MAX_ENUMERABLE_ITEMS {
        return Err(Error::NotEnumerable {
            n: split.core.len(),
            max: MAX_ENUMERABLE_ITEMS,
        });
    }
    let mut pairs: Vec<(T, T)> = product_outcomes(marginals, split.core)
        .into_iter()
        .map(|(w, s)| (p.price(s), w))
        .collect();
    if let Some(&(v, _)) = pairs.iter().find(|(v, _)| !v.is_finite()) {
        return Err(Error::InvalidValue {
            what: "core price",
            value: v.to_f64_lossy(),
        });
    }
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite"));
    let mut merged: Vec<(T, Vec<T>)> = Vec::new();
    for (v, w) in pairs {
        match merged.last_mut() {
            Some((last, ws)) if *last == v => ws.push(w),
            _ => merged.push((v, vec![w])),
        }
    }
    Ok(merged.into_iter().map(|(v, ws)| (v, ordered_sum(ws))).collect())
}

fn median_of<T: Scalar>(dist: &[(T, T)]) -> T {
    let mut below = T::zero();
    for &(v, w) in dist {
        below = below + w;
        // Pr[X > v] = 1 − Pr[X ≤ v]
        if T::one() - below < T::half() {
            return v;
        }
    }
    dist.last().map_or(T::zero(), |d| d.0)
}

fn pivot_price<T: Scalar>(p: &Pricing<T>, split: &CoreTailSplit) -> Result<T> {
    let i = split.pivot().ok_or_else(|| {
        Error::InvalidParams("tail-only regime has no core; use decomposition_report".into())
    })?;
    Ok(p.price(Subset::singleton(i)))
}

fn stats_from<T: Scalar>(a: T, c: T, core_mean: T, exact: bool) -> CoreStats<T> {
    CoreStats {
        a,
        c,
        core_mean,
        bound: T::of(3.0) * a + T::of(4.0 / std::f64::consts::LN_2) * c,
        exact,
    }
}

/// Median, pivot price and mean of the core price, by enumeration over the
/// core coordinates.
pub fn core_stats<T: Scalar>(p: &Pricing<T>, pi: &DemandDistribution<T>, split: &CoreTailSplit) -> Result<CoreStats<T>> {
    let c = pivot_price(p, split)?;
    let dist = core_value_distribution(p, pi, split)?;
    let mean = ordered_sum(dist.iter().map(|&(v, w)| v * w));
    Ok(stats_from(median_of(&dist), c, mean, true))
}

/// As [`core_stats`], estimating the median and mean from `samples` draws
/// of stream `0` of `seed`.
pub fn core_stats_mc<T: Scalar>(
    p: &Pricing<T>,
    pi: &DemandDistribution<T>,
    split: &CoreTailSplit,
    samples: usize,
    seed: u64,
) -> Result<CoreStats<T>> {
    let c = pivot_price(p, split)?;
    let marginals = product_marginals(pi)?;
    if samples == 0 {
        return Err(Error::InvalidParams("need at least one sample".into()));
    }
    let mut rng = task_rng(seed, 0);
    let mut draws: Vec<T> = (0..samples)
        .map(|_| {
            let s = split
                .core
                .items()
                .filter(|&i| rng.gen::<f64>() < marginals[i].to_f64_lossy())
                .fold(Subset::EMPTY, Subset::insert);
            p.price(s)
        })
        .collect();
    let mean = ordered_sum(draws.iter().copied()) / T::of_usize(samples);
    draws.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let w = T::one() / T::of_usize(samples);
    let dist: Vec<(T, T)> = draws.into_iter().map(|v| (v, w)).collect();
    Ok(stats_from(median_of(&dist), c, mean, false))
}

/// Item prices `p({i})` on the tail, zero on the core.
pub fn tail_pricing<T: Scalar>(p: &Pricing<T>, split: &CoreTailSplit) -> Result<Pricing<T>> {
    let n = p.universe().n();
    let prices = (0..n)
        .map(|i| {
            if !split.tail.contains(i) {
                return Ok(T::zero());
            }
            let x = p.price(Subset::singleton(i));
            if x.is_finite() {
                Ok(x)
            } else {
                Err(Error::InfiniteItemPrice { item: i })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Pricing::item(p.universe(), prices)
}

/// `Pr[some item among the first k+1 is bought]`.
pub fn pivot_hit_probability<T: Scalar>(marginals: &[T], split: &CoreTailSplit) -> T {
    let upto = (split.k + 1).min(split.order.len());
    T::one()
        - split.order[..upto]
            .iter()
            .fold(T::one(), |acc, &i| acc * (T::one() - marginals[i]))
}

/// Exact `Pr[p(S ∩ core) ≥ 3a + x]` for each `x`, next to `2^{2 − x/c}`.
pub fn concentration_profile<T: Scalar>(
    p: &Pricing<T>,
    pi: &DemandDistribution<T>,
    split: &CoreTailSplit,
    xs: &[T],
) -> Result<Vec<(T, T, T)>> {
    let stats = core_stats(p, pi, split)?;
    let dist = core_value_distribution(p, pi, split)?;
    Ok(xs
        .iter()
        .map(|&x| {
            let thr = T::of(3.0) * stats.a + x;
            let tail = ordered_sum(dist.iter().filter(|(v, _)| *v >= thr).map(|&(_, w)| w));
            let bound = if stats.c > T::zero() {
                T::two().powf(T::two() - x / stats.c)
            } else {
                T::infinity()
            };
            (x, tail, bound)
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Inequality<T> {
    pub lhs: T,
    pub rhs: T,
}

impl<T: Scalar> Inequality<T> {
    /// `lhs ≤ rhs + eps`.
    pub fn holds(&self, eps: T) -> bool {
        self.lhs <= self.rhs + eps
    }

    pub fn slack(&self) -> T {
        self.rhs - self.lhs
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport<T> {
    pub split: CoreTailSplit,
    pub rev: T,
    pub e_tail: T,
    pub e_core: T,
    /// Zero in the tail-only regime.
    pub a: T,
    pub c: T,
    pub hit_probability: T,
    pub brev: T,
    pub bundle_a_revenue: T,
    pub bundle_c_revenue: T,
    pub tail_srev: T,
    /// `rev / max(tail_srev, brev)`.
    pub ratio: T,
    /// `E[p(S_core)] ≤ 3a + (4/ln 2)c`.
    pub concentration: Inequality<T>,
    /// `E[p(S_core)] ≤ (6 + 4/((1 − e^{−1/2}) ln 2))·BRev`.
    pub core_chain: Inequality<T>,
    /// `E[p(S_tail)] ≤ 2·Rev(tail pricing)`.
    pub tail_chain: Inequality<T>,
    /// `Rev ≤ 22.67·max(tail_srev, BRev)`.
    pub total: Inequality<T>,
    /// `1 − e^{−1/2} ≤ Pr[pivot hit]`.
    pub jensen: Inequality<T>,
    /// `a/2 ≤ Rev(bundle at a)`.
    pub bundle_a: Inequality<T>,
    /// `(1 − e^{−1/2})c ≤ Rev(bundle at c)`.
    pub bundle_c: Inequality<T>,
}

impl<T: Scalar> DecompositionReport<T> {
    /// Named inequalities in report order.
    pub fn inequalities(&self) -> [(&'static str, Inequality<T>); 7] {
        [
            ("concentration", self.concentration),
            ("core_chain", self.core_chain),
            ("tail_chain", self.tail_chain),
            ("total", self.total),
            ("jensen", self.jensen),
            ("bundle_a", self.bundle_a),
            ("bundle_c", self.bundle_c),
        ]
    }

    pub fn violations(&self, eps: T) -> Vec<&'static str> {
        self.inequalities()
            .into_iter()
            .filter(|(_, q)| !q.holds(eps))
            .map(|(name, _)| name)
            .collect()
    }

    pub fn holds(&self, eps: T) -> bool {
        self.violations(eps).is_empty()
    }
}

/// Full decomposition of `E_Π[p(S)]` against the bundle and tail-item
/// witnesses, with every step of the chain checked by enumeration.
///
/// `p` must be monotone and subadditive with finite prices, and `Π` a
/// product distribution over an enumerable universe.
pub fn decomposition_report<T: Scalar>(
    p: &Pricing<T>,
    pi: &DemandDistribution<T>,
    tol: &ToleranceConfig<T>,
) -> Result<DecompositionReport<T>> {
    let split = split_core_tail(p, pi)?;
    let marginals = product_marginals(pi)?;
    let d = singleminded_from_demand(pi, p)?;
    let rev = pi.expectation(|s| p.price(s))?;
    let e_tail = ordered_sum(
        product_outcomes(marginals, split.tail)
            .into_iter()
            .map(|(w, s)| w * p.price(s)),
    );
    let brev = brev_exact(&d, tol)?.value;
    let q = tail_pricing(p, &split)?;
    let tail_srev = revenue(&d, &q, tol);
    let universe = p.universe();
    let jf = T::of(jensen_floor());
    let (a, c, e_core, core_bound, hit, bundle_a, bundle_c) = match split.regime {
        Regime::Standard => {
            let stats = core_stats(p, pi, &split)?;
            let hit = pivot_hit_probability(marginals, &split);
            let ra = revenue(&d, &Pricing::bundle(universe, stats.a)?, tol);
            let rc = revenue(&d, &Pricing::bundle(universe, stats.c)?, tol);
            (stats.a, stats.c, stats.core_mean, stats.bound, hit, ra, rc)
        }
        Regime::TailOnly => {
            let z = T::zero();
            (z, z, z, z, T::one(), z, z)
        }
    };
    let core_factor = T::of(6.0 + 4.0 / (jensen_floor() * std::f64::consts::LN_2));
    let best = tail_srev.max(brev);
    let ratio = if best > T::zero() {
        rev / best
    } else if rev > T::zero() {
        T::infinity()
    } else {
        T::zero()
    };
    Ok(DecompositionReport {
        rev,
        e_tail,
        e_core,
        a,
        c,
        hit_probability: hit,
        brev,
        bundle_a_revenue: bundle_a,
        bundle_c_revenue: bundle_c,
        tail_srev,
        ratio,
        concentration: Inequality { lhs: e_core, rhs: core_bound },
        core_chain: Inequality { lhs: e_core, rhs: core_factor * brev },
        tail_chain: Inequality { lhs: e_tail, rhs: T::two() * tail_srev },
        total: Inequality { lhs: rev, rhs: T::of(DECOMPOSITION_CONSTANT) * best },
        jensen: Inequality { lhs: if split.regime == Regime::Standard { jf } else { T::zero() }, rhs: hit },
        bundle_a: Inequality { lhs: a * T::half(), rhs: bundle_a },
        bundle_c: Inequality { lhs: jf * c, rhs: bundle_c },
        split,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{random_pricing, random_product};
    use crate::subset::ItemUniverse;
    use approx::assert_abs_diff_eq;

    fn u(n: usize) -> ItemUniverse {
        ItemUniverse::new(n).unwrap()
    }

    fn tol() -> ToleranceConfig<f64> {
        ToleranceConfig::default()
    }

    #[test]
    fn split_examples() {
        let p = Pricing::item(u(3), vec![3.0, 2.0, 1.0]).unwrap();
        let pi = DemandDistribution::product(u(3), vec![0.3, 0.3, 0.1]).unwrap();
        let s = split_core_tail(&p, &pi).unwrap();
        assert_eq!((s.k, s.tail, s.regime), (1, Subset::singleton(0), Regime::Standard));

        let pi = DemandDistribution::product(u(3), vec![0.6, 0.3, 0.1]).unwrap();
        let s = split_core_tail(&p, &pi).unwrap();
        assert_eq!((s.k, s.tail), (0, Subset::EMPTY));

        let p2 = Pricing::item(u(2), vec![1.0, 1.0]).unwrap();
        let pi = DemandDistribution::product(u(2), vec![0.1, 0.1]).unwrap();
        let s = split_core_tail(&p2, &pi).unwrap();
        assert_eq!((s.tail, s.regime), (Subset::full(2), Regime::TailOnly));
        assert!(core_stats(&p2, &pi, &s).is_err());
    }

    #[test]
    fn split_sorts_by_price_then_index() {
        let p = Pricing::item(u(3), vec![1.0, 5.0, 1.0]).unwrap();
        let pi = DemandDistribution::product(u(3), vec![0.3, 0.3, 0.3]).unwrap();
        let s = split_core_tail(&p, &pi).unwrap();
        assert_eq!(s.order, vec![1, 0, 2]);
        assert_eq!(s.tail, Subset::singleton(1));
        assert_eq!(s.pivot(), Some(0));
    }

    #[test]
    fn core_stats_examples() {
        let p = Pricing::item(u(3), vec![9.0, 1.0, 1.0]).unwrap();
        let pi = DemandDistribution::product(u(3), vec![0.2, 0.5, 0.5]).unwrap();
        let s = split_core_tail(&p, &pi).unwrap();
        assert_eq!(s.core, Subset::from_items([1, 2]));
        assert_eq!(
            core_value_distribution(&p, &pi, &s).unwrap(),
            vec![(0.0, 0.25), (1.0, 0.5), (2.0, 0.25)]
        );
        let st = core_stats(&p, &pi, &s).unwrap();
        assert_eq!((st.a, st.c, st.core_mean), (1.0, 1.0, 1.0));

        let z = Pricing::item(u(3), vec![9.0, 0.0, 0.0]).unwrap();
        let st = core_stats(&z, &pi, &split_core_tail(&z, &pi).unwrap()).unwrap();
        assert_eq!((st.a, st.core_mean), (0.0, 0.0));
    }

    #[test]
    fn median_convention_on_exact_half() {
        // Pr[X > 0] = 1/2 is not < 1/2, so the median moves up to 1
        assert_eq!(median_of(&[(0.0, 0.5), (1.0, 0.5)]), 1.0);
        assert_eq!(median_of(&[(0.0, 0.6), (1.0, 0.4)]), 0.0);
    }

    #[test]
    fn tail_pricing_examples() {
        let p = Pricing::item(u(4), vec![5.0, 3.0, 2.0, 1.0]).unwrap();
        let pi = DemandDistribution::product(u(4), vec![0.2, 0.2, 0.5, 0.5]).unwrap();
        let s = split_core_tail(&p, &pi).unwrap();
        assert_eq!(s.k, 2);
        let q = tail_pricing(&p, &s).unwrap();
        assert_eq!(q.table().unwrap()[Subset::full(4).bits() as usize], 8.0);
        let pi0 = DemandDistribution::product(u(4), vec![0.6, 0.2, 0.5, 0.5]).unwrap();
        let q0 = tail_pricing(&p, &split_core_tail(&p, &pi0).unwrap()).unwrap();
        assert_eq!(q0.price(Subset::full(4)), 0.0);
    }

    #[test]
    fn additive_pricing_is_its_own_witness() {
        let p = Pricing::item(u(3), vec![4.0, 2.0, 1.0]).unwrap();
        let pi = DemandDistribution::product(u(3), vec![0.1, 0.1, 0.1]).unwrap();
        let r = decomposition_report(&p, &pi, &tol()).unwrap();
        assert_eq!(r.split.regime, Regime::TailOnly);
        assert_abs_diff_eq!(r.rev, r.tail_srev, epsilon = 1e-12);
        assert!(r.ratio <= 1.0 + 1e-12);
    }

    #[test]
    fn random_reports_hold() {
        let mut rng = task_rng(11, 0);
        for _ in 0..60 {
            let n = rng.gen_range(1..=7);
            let p = random_pricing::<f64, _>(u(n), 12, &mut rng).unwrap();
            let pi = random_product(u(n), &mut rng).unwrap();
            let r = decomposition_report(&p, &pi, &tol()).unwrap();
            assert!(r.holds(1e-6), "{:?}: {r:?}", r.violations(1e-6));
            if r.split.regime == Regime::Standard {
                let xs: Vec<f64> = [1.0, 2.0, 4.0].iter().map(|m| m * r.c).collect();
                for (_, tail, bound) in concentration_profile(&p, &pi, &r.split, &xs).unwrap() {
                    assert!(tail <= bound + 1e-9);
                }
            }
        }
    }

    #[test]
    fn mc_stats_track_exact() {
        let p = Pricing::item(u(4), vec![9.0, 2.0, 2.0, 1.0]).unwrap();
        let pi = DemandDistribution::product(u(4), vec![0.3, 0.5, 0.4, 0.6]).unwrap();
        let s = split_core_tail(&p, &pi).unwrap();
        let exact: CoreStats<f64> = core_stats(&p, &pi, &s).unwrap();
        let mc = core_stats_mc(&p, &pi, &s, 40_000, 2).unwrap();
        assert!((exact.core_mean - mc.core_mean).abs() < 0.05);
        assert_eq!(exact.a, mc.a);
    }
}
