//! Optimal simple pricings: the best bundle price, the best item pricing for
//! single-minded buyers, and a grid search over item prices for everything
//! else.

pub mod simplex;

use rand::Rng;
use rayon::prelude::*;

use crate::demand::revenue;
use crate::error::{Error, Result};
use crate::lattice::{Pricing, ToleranceConfig, ValuationDistribution, ValuationForm};
use crate::rng::task_rng;
use crate::scalar::Scalar;
use crate::subset::Subset;

/// Largest single-minded support the exact item-pricing search accepts.
pub const MAX_EXACT_SUPPORT: usize = 14;

/// Valuations with more relevant items than this contribute only singleton
/// and whole-support levels to the grid.
const MAX_LEVEL_ITEMS: usize = 12;

const MAX_SWEEPS: usize = 64;

#[derive(Clone, Debug)]
pub struct SimpleOptResult<T> {
    pub best_pricing: Pricing<T>,
    pub value: T,
    pub exact: bool,
}

/// Optimal bundle price. Some grand-bundle value is always optimal; among
/// equally good candidates the lowest wins.
pub fn brev_exact<T: Scalar>(
    d: &ValuationDistribution<T>,
    tol: &ToleranceConfig<T>,
) -> Result<SimpleOptResult<T>> {
    let mut grand: Vec<(T, T)> = d
        .support()
        .iter()
        .map(|(w, v)| (v.grand_value(), *w))
        .collect();
    grand.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite values"));
    // suffix[i] = mass of grand[i..]
    let mut suffix = vec![T::zero(); grand.len() + 1];
    for i in (0..grand.len()).rev() {
        suffix[i] = suffix[i + 1] + grand[i].1;
    }
    let mut best = (T::zero(), T::zero());
    for &(t, _) in &grand {
        if t <= T::zero() {
            continue;
        }
        let first = grand.partition_point(|(g, _)| *g < t - tol.eps_tie);
        let r = t * suffix[first];
        if r > best.1 {
            best = (t, r);
        }
    }
    let pricing = Pricing::bundle(d.universe(), best.0)?;
    let value = revenue(d, &pricing, tol);
    Ok(SimpleOptResult {
        best_pricing: pricing,
        value,
        exact: true,
    })
}

/// Optimal item pricing for a distribution of single-minded buyers.
///
/// For every set `A` of buyer types, the best prices that keep every type in
/// `A` buying come from an LP: maximize `Σ_{j∈A} w_j q(S_j)` subject to
/// `q(S_j) ≤ value_j` for `j ∈ A`, `q ≥ 0`. Types outside `A` may buy as
/// well, which only adds revenue, so the best LP value over all `A` is the
/// optimum.
pub fn srev_exact_singleminded<T: Scalar>(
    d: &ValuationDistribution<T>,
    tol: &ToleranceConfig<T>,
) -> Result<SimpleOptResult<T>> {
    let mut types = Vec::with_capacity(d.len());
    for (w, v) in d.support() {
        match v.form() {
            ValuationForm::SingleMinded { set, value } => types.push((*w, *set, *value)),
            _ => return Err(Error::UnsupportedValuation(v.kind_name())),
        }
    }
    if types.len() > MAX_EXACT_SUPPORT {
        return Err(Error::SupportTooLarge {
            found: types.len(),
            max: MAX_EXACT_SUPPORT,
        });
    }
    let n = d.universe().n();
    let k = types.len();
    let solved: Vec<Result<(T, Vec<T>)>> = (0u32..1 << k)
        .into_par_iter()
        .map(|mask| {
            let served: Vec<_> = (0..k).filter(|j| mask >> j & 1 == 1).map(|j| types[j]).collect();
            let items: Vec<usize> = served
                .iter()
                .fold(Subset::EMPTY, |acc, t| acc.union(t.1))
                .items()
                .collect();
            if items.is_empty() {
                return Ok((T::zero(), vec![T::zero(); n]));
            }
            let c: Vec<T> = items
                .iter()
                .map(|&i| {
                    served
                        .iter()
                        .filter(|t| t.1.contains(i))
                        .fold(T::zero(), |a, t| a + t.0)
                })
                .collect();
            let a: Vec<Vec<T>> = served
                .iter()
                .map(|t| {
                    items
                        .iter()
                        .map(|&i| if t.1.contains(i) { T::one() } else { T::zero() })
                        .collect()
                })
                .collect();
            let b: Vec<T> = served.iter().map(|t| t.2).collect();
            let sol = simplex::maximize(&c, &a, &b)?;
            let mut q = vec![T::zero(); n];
            for (&i, x) in items.iter().zip(sol.x) {
                q[i] = x;
            }
            Ok((sol.value, q))
        })
        .collect();
    let mut best: Option<(T, Vec<T>)> = None;
    for r in solved {
        let (v, q) = r?;
        if best.as_ref().map_or(true, |b| v > b.0) {
            best = Some((v, q));
        }
    }
    let (_, q) = best.expect("at least the empty serve set");
    let pricing = Pricing::item(d.universe(), q)?;
    let value = revenue(d, &pricing, tol);
    Ok(SimpleOptResult {
        best_pricing: pricing,
        value,
        exact: true,
    })
}

/// Candidate price levels for each item: the per-item averages `v(S)/|S|`
/// over sets of relevant items containing it, thinned to at most
/// `levels_per_item` evenly spaced order statistics, plus zero.
fn price_levels<T: Scalar>(d: &ValuationDistribution<T>, levels_per_item: usize) -> Vec<Vec<T>> {
    let n = d.universe().n();
    let mut levels: Vec<Vec<T>> = vec![Vec::new(); n];
    for (_, v) in d.support() {
        let support = v.support();
        let mut push = |s: Subset| {
            let x = v.value(s) / T::of_usize(s.len());
            for i in s.items() {
                levels[i].push(x);
            }
        };
        if support.len() <= MAX_LEVEL_ITEMS {
            support.submasks().skip(1).for_each(&mut push);
        } else {
            support.items().map(Subset::singleton).for_each(&mut push);
            push(support);
        }
    }
    levels
        .into_iter()
        .map(|mut l| {
            l.retain(|x| *x > T::zero());
            l.sort_by(|a, b| a.partial_cmp(b).expect("finite levels"));
            l.dedup();
            let picked: Vec<T> = if l.len() <= levels_per_item {
                l
            } else if levels_per_item == 1 {
                vec![l[l.len() - 1]]
            } else {
                let last = l.len() - 1;
                let mut idx: Vec<usize> = (0..levels_per_item)
                    .map(|k| (k * last + (levels_per_item - 1) / 2) / (levels_per_item - 1))
                    .collect();
                idx.dedup();
                idx.into_iter().map(|i| l[i]).collect()
            };
            std::iter::once(T::zero()).chain(picked).collect()
        })
        .collect()
}

/// Item-pricing search by coordinate ascent over a grid of value levels.
///
/// Restart 0 starts every item at its highest level; the others start at
/// levels drawn from stream `r` of `seed`. The result is the revenue of an
/// actual item pricing, so it never exceeds the true optimum.
pub fn srev_grid<T: Scalar>(
    d: &ValuationDistribution<T>,
    levels_per_item: usize,
    restarts: usize,
    seed: u64,
    tol: &ToleranceConfig<T>,
) -> Result<SimpleOptResult<T>> {
    if levels_per_item == 0 || restarts == 0 {
        return Err(Error::InvalidParams(
            "levels_per_item and restarts must be at least 1".into(),
        ));
    }
    let universe = d.universe();
    let n = universe.n();
    let levels = price_levels(d, levels_per_item);
    let eval = |idx: &[usize]| -> T {
        let q = (0..n).map(|i| levels[i][idx[i]]).collect();
        revenue(d, &Pricing::item(universe, q).expect("grid prices are valid"), tol)
    };

    let runs: Vec<(T, Vec<usize>)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut idx: Vec<usize> = if r == 0 {
                levels.iter().map(|l| l.len() - 1).collect()
            } else {
                let mut rng = task_rng(seed, r as u64);
                levels.iter().map(|l| rng.gen_range(0..l.len())).collect()
            };
            let mut current = eval(&idx);
            for _ in 0..MAX_SWEEPS {
                let mut moved = false;
                for i in 0..n {
                    let keep = idx[i];
                    let mut best = (current, keep);
                    for li in 0..levels[i].len() {
                        if li == keep {
                            continue;
                        }
                        idx[i] = li;
                        let v = eval(&idx);
                        if v > best.0 + tol.eps_price {
                            best = (v, li);
                        }
                    }
                    idx[i] = best.1;
                    if best.1 != keep {
                        current = best.0;
                        moved = true;
                    }
                }
                if !moved {
                    break;
                }
            }
            (current, idx)
        })
        .collect();

    let (_, idx) = runs
        .into_iter()
        .reduce(|a, b| if b.0 > a.0 { b } else { a })
        .expect("restarts >= 1");
    let q = (0..n).map(|i| levels[i][idx[i]]).collect();
    let pricing = Pricing::item(universe, q)?;
    let value = revenue(d, &pricing, tol);
    Ok(SimpleOptResult {
        best_pricing: pricing,
        value,
        exact: false,
    })
}
