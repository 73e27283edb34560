//! Finite lottery menus: dominance between lotteries, per-item price floors,
//! adaptive acquisition costs and repeated non-adaptive purchases.

use std::collections::VecDeque;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{normalization_slack, Valuation, ValuationForm};
use crate::rng::task_rng;
use crate::scalar::{ordered_sum, Scalar};
use crate::subset::{ItemUniverse, Subset};

/// Largest target the acquisition DP expands (`2^k` states).
pub const MAX_ACQUISITION_ITEMS: usize = 20;

/// Flow deficit tolerated when deciding dominance.
const FLOW_SLACK: f64 = 1e-9;

/// A finite distribution over sets of items.
#[derive(Clone, Debug, PartialEq)]
pub struct Lottery<T> {
    universe: ItemUniverse,
    outcomes: Vec<(T, Subset)>,
}

impl<T: Scalar> Lottery<T> {
    pub fn new(universe: ItemUniverse, outcomes: Vec<(T, Subset)>) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(Error::EmptySupport);
        }
        let mut sum = T::zero();
        for &(p, s) in &outcomes {
            universe.check(s)?;
            if !(p > T::zero()) || !p.is_finite() {
                return Err(Error::InvalidValue {
                    what: "lottery probability",
                    value: p.to_f64_lossy(),
                });
            }
            sum = sum + p;
        }
        if (sum - T::one()).abs() > normalization_slack::<T>(outcomes.len()) {
            return Err(Error::NotNormalized {
                sum: sum.to_f64_lossy(),
            });
        }
        Ok(Self { universe, outcomes })
    }

    pub fn point_mass(universe: ItemUniverse, s: Subset) -> Result<Self> {
        Self::new(universe, vec![(T::one(), s)])
    }

    pub fn universe(&self) -> ItemUniverse {
        self.universe
    }

    pub fn outcomes(&self) -> &[(T, Subset)] {
        &self.outcomes
    }

    /// `Pr[i ∈ λ]`.
    pub fn prob_contains(&self, i: usize) -> T {
        self.outcomes
            .iter()
            .filter(|(_, s)| s.contains(i))
            .fold(T::zero(), |a, (p, _)| a + *p)
    }

    /// `Pr[λ ∩ r = ∅]`.
    pub fn prob_misses(&self, r: Subset) -> T {
        self.outcomes
            .iter()
            .filter(|(_, s)| !s.intersects(r))
            .fold(T::zero(), |a, (p, _)| a + *p)
    }
}

/// Priced lotteries. Buying nothing at price zero is always available and
/// is not listed.
#[derive(Clone, Debug, PartialEq)]
pub struct LotteryMenu<T> {
    universe: ItemUniverse,
    options: Vec<(Lottery<T>, T)>,
}

impl<T: Scalar> LotteryMenu<T> {
    pub fn new(universe: ItemUniverse, options: Vec<(Lottery<T>, T)>) -> Result<Self> {
        for (l, c) in &options {
            universe.same_as(l.universe())?;
            if !(*c >= T::zero()) || !c.is_finite() {
                return Err(Error::InvalidValue {
                    what: "option price",
                    value: c.to_f64_lossy(),
                });
            }
        }
        Ok(Self { universe, options })
    }

    /// Deterministic menu offering each set at its price.
    pub fn point_masses(universe: ItemUniverse, options: &[(Subset, T)]) -> Result<Self> {
        let opts = options
            .iter()
            .map(|&(s, c)| Ok((Lottery::point_mass(universe, s)?, c)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(universe, opts)
    }

    pub fn universe(&self) -> ItemUniverse {
        self.universe
    }

    pub fn options(&self) -> &[(Lottery<T>, T)] {
        &self.options
    }
}

/// Edmonds–Karp on a dense capacity matrix.
fn max_flow<T: Scalar>(cap: &mut [Vec<T>], source: usize, sink: usize) -> T {
    let n = cap.len();
    let mut total = T::zero();
    loop {
        let mut prev = vec![usize::MAX; n];
        prev[source] = source;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for w in 0..n {
                if prev[w] == usize::MAX && cap[u][w] > T::zero() {
                    prev[w] = u;
                    queue.push_back(w);
                }
            }
        }
        if prev[sink] == usize::MAX {
            return total;
        }
        let mut push = T::infinity();
        let mut w = sink;
        while w != source {
            push = push.min(cap[prev[w]][w]);
            w = prev[w];
        }
        let mut w = sink;
        while w != source {
            let u = prev[w];
            cap[u][w] = cap[u][w] - push;
            cap[w][u] = cap[w][u] + push;
            w = u;
        }
        total = total + push;
    }
}

/// Whether some coupling of `a` and `b` always draws a superset from `a`.
///
/// Transportation feasibility: mass from each outcome `S` of `a` may flow
/// to any outcome `S' ⊆ S` of `b`, and `a` dominates `b` iff all of `b`'s
/// mass can be served.
pub fn dominates<T: Scalar>(a: &Lottery<T>, b: &Lottery<T>) -> bool {
    let (na, nb) = (a.outcomes.len(), b.outcomes.len());
    let source = na + nb;
    let sink = source + 1;
    let mut cap = vec![vec![T::zero(); na + nb + 2]; na + nb + 2];
    for (i, &(p, s)) in a.outcomes.iter().enumerate() {
        cap[source][i] = p;
        for (j, &(_, t)) in b.outcomes.iter().enumerate() {
            if t.is_subset_of(s) {
                cap[i][na + j] = T::infinity();
            }
        }
    }
    for (j, &(p, _)) in b.outcomes.iter().enumerate() {
        cap[na + j][sink] = p;
    }
    let demand = b.outcomes.iter().fold(T::zero(), |acc, (p, _)| acc + *p);
    max_flow(&mut cap, source, sink) >= demand - T::of(FLOW_SLACK)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ItemFloors<T> {
    /// `min c / Pr[i ∈ λ]` over options; `+inf` if no option can deliver `i`.
    pub prices: Vec<T>,
    /// Index of the option attaining each floor (first on ties).
    pub argmin: Vec<Option<usize>>,
}

impl<T: Scalar> ItemFloors<T> {
    pub fn unreachable(&self) -> Vec<usize> {
        (0..self.prices.len())
            .filter(|&i| self.argmin[i].is_none())
            .collect()
    }
}

/// Cheapest expected price per copy of each item.
pub fn lottery_item_floor<T: Scalar>(menu: &LotteryMenu<T>) -> ItemFloors<T> {
    let n = menu.universe.n();
    let mut prices = vec![T::infinity(); n];
    let mut argmin = vec![None; n];
    for (k, (l, c)) in menu.options.iter().enumerate() {
        for i in 0..n {
            let p = l.prob_contains(i);
            if p > T::zero() {
                let r = *c / p;
                if argmin[i].is_none() || r < prices[i] {
                    prices[i] = r;
                    argmin[i] = Some(k);
                }
            }
        }
    }
    ItemFloors { prices, argmin }
}

/// Least expected spend to hold every item of `target`, buying options one
/// at a time and choosing each purchase after seeing the previous draws.
///
/// States are the items still missing. An option that misses all of them
/// leaves the state unchanged, so under a fixed option the value solves
/// `V(R) = c + Pr[miss]·V(R) + Σ_{hit} λ(T)·V(R∖T)`; dividing by the hit
/// probability eliminates the self-loop. Every other transition shrinks `R`,
/// so one pass in order of increasing `R` is exact.
pub fn adaptive_acquisition_cost<T: Scalar>(menu: &LotteryMenu<T>, target: Subset) -> Result<T> {
    menu.universe.check(target)?;
    let k = target.len();
    if k > MAX_ACQUISITION_ITEMS {
        return Err(Error::NotEnumerable {
            n: k,
            max: MAX_ACQUISITION_ITEMS,
        });
    }
    let floors = lottery_item_floor(menu);
    if let Some(&i) = floors.unreachable().iter().find(|&&i| target.contains(i)) {
        return Err(Error::Unreachable { item: i });
    }
    // outcomes projected onto the target's dense index space
    let opts: Vec<(T, Vec<(T, usize)>)> = menu
        .options
        .iter()
        .map(|(l, c)| {
            let outs = l
                .outcomes
                .iter()
                .map(|&(p, s)| (p, s.intersection(target).compress(target)))
                .collect();
            (*c, outs)
        })
        .collect();
    let size = 1usize << k;
    let mut v = vec![T::infinity(); size];
    v[0] = T::zero();
    // every proper submask of r is numerically smaller than r
    for r in 1..size {
        let mut best = T::infinity();
        for (c, outs) in &opts {
            let mut hit = T::zero();
            let mut acc = *c;
            for &(p, t) in outs {
                if t & r != 0 {
                    hit = hit + p;
                    acc = acc + p * v[r & !t];
                }
            }
            if hit > T::zero() {
                let cand = acc / hit;
                if cand < best {
                    best = cand;
                }
            }
        }
        v[r] = best;
    }
    Ok(v[size - 1])
}

/// Plan of the repeated strategy: `m_i = ⌈m / Pr[i ∈ λ_i]⌉` copies of each
/// floor-attaining option `λ_i`, `i ∈ T`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MultisetPlan<T> {
    /// `(item, option index, copies)`.
    pub copies: Vec<(usize, usize, u64)>,
    pub cost: T,
}

fn ceil_ratio<T: Scalar>(m: u32, p: T) -> u64 {
    let x = (T::of(m as f64) / p).to_f64_lossy();
    // treat values within rounding of an integer as that integer
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.max(1.0) {
        r as u64
    } else {
        x.ceil() as u64
    }
}

pub fn multiset_plan<T: Scalar>(menu: &LotteryMenu<T>, t: Subset, m: u32) -> Result<MultisetPlan<T>> {
    if m == 0 {
        return Err(Error::InvalidParams("m must be at least 1".into()));
    }
    menu.universe.check(t)?;
    let floors = lottery_item_floor(menu);
    let mut copies = Vec::new();
    let mut cost = T::zero();
    for i in t.items() {
        let k = floors.argmin[i].ok_or(Error::Unreachable { item: i })?;
        let (l, c) = &menu.options[k];
        let mi = ceil_ratio(m, l.prob_contains(i));
        cost = cost + T::of(mi as f64) * *c;
        copies.push((i, k, mi));
    }
    Ok(MultisetPlan { copies, cost })
}

/// `Pr[U ∩ a = ∅]` for the union `U` of all copies in the plan.
fn prob_union_misses<T: Scalar>(menu: &LotteryMenu<T>, plan: &MultisetPlan<T>, a: Subset) -> T {
    plan.copies.iter().fold(T::one(), |acc, &(_, k, mi)| {
        acc * menu.options[k].0.prob_misses(a).powi(mi as i32)
    })
}

/// Exact expected utility of buying the multiset `Λ_m` for target `t`:
/// `E[v(union of all copies)] − total price`.
///
/// Additive values use per-item inclusion probabilities; single-minded
/// values use inclusion–exclusion over subsets of the desired set.
pub fn multiset_bundle_utility<T: Scalar>(
    menu: &LotteryMenu<T>,
    v: &Valuation<T>,
    t: Subset,
    m: u32,
) -> Result<T> {
    menu.universe.same_as(v.universe())?;
    let plan = multiset_plan(menu, t, m)?;
    let expected = match v.form() {
        ValuationForm::Additive(vals) => ordered_sum((0..vals.len()).map(|j| {
            vals[j] * (T::one() - prob_union_misses(menu, &plan, Subset::singleton(j)))
        })),
        ValuationForm::SingleMinded { set, value } => {
            if set.len() > MAX_ACQUISITION_ITEMS {
                return Err(Error::NotEnumerable {
                    n: set.len(),
                    max: MAX_ACQUISITION_ITEMS,
                });
            }
            let covered = ordered_sum(set.submasks().map(|a| {
                let x = prob_union_misses(menu, &plan, a);
                if a.len() % 2 == 0 {
                    x
                } else {
                    -x
                }
            }));
            *value * covered.max(T::zero())
        }
        _ => return Err(Error::UnsupportedValuation(v.kind_name())),
    };
    Ok(expected - plan.cost)
}

/// Monte Carlo estimate of the same utility for any valuation, with its
/// standard error.
pub fn multiset_bundle_utility_mc<T: Scalar>(
    menu: &LotteryMenu<T>,
    v: &Valuation<T>,
    t: Subset,
    m: u32,
    samples: usize,
    seed: u64,
) -> Result<(T, T)> {
    menu.universe.same_as(v.universe())?;
    let plan = multiset_plan(menu, t, m)?;
    let mut rng = task_rng(seed, 0);
    let mut xs = Vec::with_capacity(samples);
    for _ in 0..samples {
        let mut union = Subset::EMPTY;
        for &(_, k, mi) in &plan.copies {
            let outs = menu.options[k].0.outcomes();
            for _ in 0..mi {
                let mut u = T::of(rng.gen::<f64>());
                let mut pick = outs[outs.len() - 1].1;
                for &(p, s) in outs {
                    if u < p {
                        pick = s;
                        break;
                    }
                    u = u - p;
                }
                union = union.union(pick);
            }
        }
        xs.push(v.value(union));
    }
    let k = T::of_usize(samples.max(1));
    let mean = ordered_sum(xs.iter().copied()) / k;
    let var = ordered_sum(xs.iter().map(|&x| (x - mean) * (x - mean))) / (k - T::one()).max(T::one());
    Ok((mean - plan.cost, (var / k).sqrt()))
}
