//! Randomly scaled item pricings as revenue upper-bound witnesses.
//!
//! Logarithms are natural throughout. The scale `α` has density
//! `1/(α ln(h/ℓ))` on `[ℓ, h]`, which integrates to one only in base `e`.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::demand::best_response;
use crate::error::{Error, Result};
use crate::lattice::{
    additive_extension, check_deterministic_sybil_proof, Pricing, ToleranceConfig, Valuation,
    ValuationDistribution,
};
use crate::rng::task_rng;
use crate::scalar::{ordered_sum, Scalar};
use crate::subset::Subset;

/// Largest universe for the uniform-item-pricing expectation, which
/// enumerates every set `T`.
pub const MAX_COMBINED_ITEMS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScaleDistribution<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Scalar> ScaleDistribution<T> {
    pub fn new(lo: T, hi: T) -> Result<Self> {
        if !(lo > T::zero()) || !hi.is_finite() || hi < lo {
            return Err(Error::InvalidParams(format!(
                "scale range needs 0 < lo <= hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Self { lo, hi })
    }

    /// `ln(h/ℓ)`.
    pub fn log_ratio(&self) -> T {
        (self.hi / self.lo).ln()
    }

    /// Inverse CDF: `ℓ (h/ℓ)^u`.
    pub fn quantile(&self, u: T) -> T {
        if self.lo == self.hi {
            return self.lo;
        }
        self.lo * (self.hi / self.lo).powf(u)
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> T {
        self.quantile(T::of(rng.gen::<f64>()))
    }
}

/// One draw of `α` from stream 0 of `seed`.
pub fn sample_alpha<T: Scalar>(sd: &ScaleDistribution<T>, seed: u64) -> T {
    sd.sample(&mut task_rng(seed, 0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Interval<T> {
    pub start: T,
    pub end: T,
    pub set: Subset,
}

/// The buyer's choice against `αq` as `α` sweeps `[ℓ, h]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BreakpointProfile<T> {
    pub intervals: Vec<Interval<T>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScaledRevenue<T> {
    /// `E_α[Rev_v(αq)]`.
    pub value: T,
    pub profile: BreakpointProfile<T>,
    /// `u(v, ℓq)`.
    pub u_lo: T,
    /// `u(v, hq)`.
    pub u_hi: T,
}

impl<T: Scalar> ScaledRevenue<T> {
    /// `(u(v,ℓq) − u(v,hq)) / ln(h/ℓ)`.
    pub fn utility_drop_bound(&self, sd: &ScaleDistribution<T>) -> T {
        if sd.lo == sd.hi {
            return self.value;
        }
        (self.u_lo - self.u_hi) / sd.log_ratio()
    }
}

/// Exact `E_α[Rev_v(αq)]`.
///
/// Walks the upper envelope of the lines `α ↦ v(S) − α q(S)` from `ℓ` to `h`.
/// Revenue at `α` is `α q(S_α)` and the density is `1/(α ln(h/ℓ))`, so the
/// expectation is `Σ q(S)·|interval| / ln(h/ℓ)`. Ties on the envelope go to
/// the higher price, then fewer items, then the smaller bitset, exactly (no
/// tolerance), so the profile may differ from a tolerance-aware best
/// response only inside `eps_tie` of a breakpoint.
pub fn expected_scaled_revenue<T: Scalar>(
    v: &Valuation<T>,
    q: &Pricing<T>,
    sd: &ScaleDistribution<T>,
) -> Result<ScaledRevenue<T>> {
    v.universe().same_as(q.universe())?;
    let scan = if q.is_exactly_monotone() {
        v.support()
    } else {
        q.universe().require_enumerable()?;
        q.universe().full()
    };
    let mut lines = Vec::with_capacity(1 << scan.len());
    for s in scan.submasks() {
        let c = q.price(s);
        if !c.is_finite() {
            return Err(Error::InfiniteSetPrice { set: s });
        }
        lines.push((s, v.value(s), c));
    }
    let at = |l: &(Subset, T, T), a: T| l.1 - a * l.2;
    // seller-favorable order among exact ties at a point
    let better_at = |x: &(Subset, T, T), y: &(Subset, T, T), a: T| {
        let (ux, uy) = (at(x, a), at(y, a));
        if ux != uy {
            return ux > uy;
        }
        if x.2 != y.2 {
            return x.2 > y.2;
        }
        (x.0.len(), x.0) < (y.0.len(), y.0)
    };
    let argbest = |a: T, f: &dyn Fn(&(Subset, T, T), &(Subset, T, T), T) -> bool| {
        let mut b = 0;
        for k in 1..lines.len() {
            if f(&lines[k], &lines[b], a) {
                b = k;
            }
        }
        b
    };

    let first = argbest(sd.lo, &better_at);
    let u_lo = at(&lines[first], sd.lo);
    let u_hi = at(&lines[argbest(sd.hi, &better_at)], sd.hi);

    if sd.lo == sd.hi {
        let l = lines[first];
        return Ok(ScaledRevenue {
            value: sd.lo * l.2,
            profile: BreakpointProfile {
                intervals: vec![Interval {
                    start: sd.lo,
                    end: sd.hi,
                    set: l.0,
                }],
            },
            u_lo,
            u_hi,
        });
    }

    let mut intervals = Vec::new();
    let mut cur = first;
    let mut a = sd.lo;
    loop {
        let (_, vc, qc) = lines[cur];
        // the line that takes over first: earliest crossing among cheaper
        // lines, then the lowest price, then fewer items, then smaller bitset.
        // Prices strictly decrease along the walk, so it terminates.
        let mut next: Option<(T, usize)> = None;
        for (k, &(st, vt, qt)) in lines.iter().enumerate() {
            if qt >= qc {
                continue;
            }
            let x = ((vc - vt) / (qc - qt)).max(a);
            let better = match next {
                None => true,
                Some((y, j)) => {
                    let (sj, _, qj) = lines[j];
                    x < y || (x == y && (qt, st.len(), st) < (qj, sj.len(), sj))
                }
            };
            if better {
                next = Some((x, k));
            }
        }
        match next {
            Some((x, k)) if x < sd.hi => {
                if x > a {
                    intervals.push(Interval {
                        start: a,
                        end: x,
                        set: lines[cur].0,
                    });
                }
                cur = k;
                a = x;
            }
            _ => {
                intervals.push(Interval {
                    start: a,
                    end: sd.hi,
                    set: lines[cur].0,
                });
                break;
            }
        }
    }
    let lr = sd.log_ratio();
    let q_of = |s: Subset| q.price(s);
    let value = ordered_sum(
        intervals
            .iter()
            .map(|iv| q_of(iv.set) * (iv.end - iv.start)),
    ) / lr;
    Ok(ScaledRevenue {
        value,
        profile: BreakpointProfile { intervals },
        u_lo,
        u_hi,
    })
}

/// Monte Carlo estimate of `E_α[Rev_v(αq)]` with its standard error.
pub fn monte_carlo_scaled_revenue<T: Scalar>(
    v: &Valuation<T>,
    q: &Pricing<T>,
    sd: &ScaleDistribution<T>,
    samples: usize,
    seed: u64,
    tol: &ToleranceConfig<T>,
) -> Result<(T, T)> {
    let mut rng = task_rng(seed, 0);
    let mut xs = Vec::with_capacity(samples);
    for _ in 0..samples {
        let a = sd.sample(&mut rng);
        let scaled = q.scaled_by(a)?;
        xs.push(best_response(v, &scaled, tol).price_paid);
    }
    let k = T::of_usize(samples.max(1));
    let mean = ordered_sum(xs.iter().copied()) / k;
    let var = ordered_sum(xs.iter().map(|&x| (x - mean) * (x - mean))) / (k - T::one()).max(T::one());
    Ok((mean, (var / k).sqrt()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PointwiseFactor<T> {
    /// `max_S q(S)/p(S)`; `+inf` when `p(S) = 0 < q(S)` somewhere.
    pub c: T,
    /// A set attaining `c`.
    pub argmax: Subset,
}

/// Smallest `c` with `q/c ≤ p ≤ q` everywhere.
pub fn pointwise_factor<T: Scalar>(
    p: &Pricing<T>,
    q: &Pricing<T>,
    tol: &ToleranceConfig<T>,
) -> Result<PointwiseFactor<T>> {
    p.universe().same_as(q.universe())?;
    let (pt, qt) = (p.table()?, q.table()?);
    let mut best = PointwiseFactor {
        c: T::one(),
        argmax: Subset::EMPTY,
    };
    for s in p.universe().subsets() {
        let (ps, qs) = (pt[s.bits() as usize], qt[s.bits() as usize]);
        if !ps.is_finite() || !qs.is_finite() {
            return Err(Error::InfiniteSetPrice { set: s });
        }
        if ps > qs + tol.eps_price {
            return Err(Error::NotDominated {
                set: s,
                lower: ps.to_f64_lossy(),
                upper: qs.to_f64_lossy(),
            });
        }
        if qs == T::zero() {
            continue;
        }
        let r = if ps == T::zero() { T::infinity() } else { qs / ps };
        if r > best.c {
            best = PointwiseFactor { c: r, argmax: s };
        }
    }
    Ok(best)
}

fn require_sybil_proof<T: Scalar>(p: &Pricing<T>, tol: &ToleranceConfig<T>) -> Result<()> {
    let check = check_deterministic_sybil_proof(p, tol, 1)?;
    match check.witnesses.first() {
        Some(w) => Err(Error::NotSybilProof(w.first, w.second)),
        None => Ok(()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MarginRow<T> {
    /// Guaranteed side of the inequality.
    pub lhs: T,
    /// Side it must dominate.
    pub rhs: T,
    pub margin: T,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScaledBoundReport<T> {
    pub c: T,
    pub scale: ScaleDistribution<T>,
    /// One row per support type, in support order.
    pub rows: Vec<MarginRow<T>>,
}

impl<T: Scalar> ScaledBoundReport<T> {
    pub fn holds(&self, eps: T) -> bool {
        self.rows.iter().all(|r| r.margin >= -eps)
    }

    pub fn min_margin(&self) -> T {
        self.rows.iter().map(|r| r.margin).fold(T::infinity(), T::min)
    }
}

/// Scaled additive extension against a Sybil-proof pricing: with
/// `c = pointwise_factor(p, q)`, `ℓ = 1/(2c)`, `h = 1`, each type's
/// `E_α[Rev_v(αq)]` is compared with `Rev_v(p) / (2 ln 2c)`.
pub fn scaled_bound_check<T: Scalar>(
    p: &Pricing<T>,
    d: &ValuationDistribution<T>,
    tol: &ToleranceConfig<T>,
) -> Result<ScaledBoundReport<T>> {
    p.universe().same_as(d.universe())?;
    require_sybil_proof(p, tol)?;
    scaled_bound_margins(p, d, tol)
}

/// [`scaled_bound_check`] without the Sybil-proofness precondition, for probing
/// what goes wrong on pricings that are not.
pub fn scaled_bound_margins<T: Scalar>(
    p: &Pricing<T>,
    d: &ValuationDistribution<T>,
    tol: &ToleranceConfig<T>,
) -> Result<ScaledBoundReport<T>> {
    p.universe().same_as(d.universe())?;
    let q = additive_extension(p)?;
    let pf = pointwise_factor(p, &q, tol)?;
    if !pf.c.is_finite() {
        return Err(Error::InfiniteFactor { set: pf.argmax });
    }
    let c = pf.c;
    let sd = ScaleDistribution::new(T::one() / (T::two() * c), T::one())?;
    let denom = T::two() * (T::two() * c).ln();
    let rows: Result<Vec<_>> = d
        .support()
        .par_iter()
        .map(|(_, v)| {
            let lhs = expected_scaled_revenue(v, &q, &sd)?.value;
            let rhs = best_response(v, p, tol).price_paid / denom;
            Ok(MarginRow {
                lhs,
                rhs,
                margin: lhs - rhs,
            })
        })
        .collect();
    Ok(ScaledBoundReport {
        c,
        scale: sd,
        rows: rows?,
    })
}

/// Uniform item pricing charging `2^{a+n} q(T)` per item.
pub fn gt_pricing<T: Scalar>(q: &Pricing<T>, t: Subset, a: u32) -> Result<Pricing<T>> {
    let n = q.universe().n();
    let unit = T::two().powi((a as usize + n) as i32) * q.price(t);
    Pricing::item(q.universe(), vec![unit; n])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CombinedRow<T> {
    /// `E_α[Rev_v(αq)]` with `ℓ = 1/(2n)`, `h = 4n`.
    pub scaled: T,
    /// `E_{T,a}[Rev_v(g_{T,a})]`.
    pub uniform: T,
    /// `ln(8n²)·scaled + 4·uniform`.
    pub lhs: T,
    /// `Rev_v(p)/2`.
    pub target: T,
    pub margin: T,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CombinedReport<T> {
    pub scale: ScaleDistribution<T>,
    /// Largest exponent `a` that contributed a term.
    pub a_used: u32,
    pub rows: Vec<CombinedRow<T>>,
}

impl<T: Scalar> CombinedReport<T> {
    pub fn holds(&self, eps: T) -> bool {
        self.rows.iter().all(|r| r.margin >= -eps)
    }
}

/// Scaled and uniform item pricings together against a Sybil-proof pricing.
///
/// `T` is uniform over all sets and `Pr[a = x] = 2^{−x−1}`. For each `T` the
/// sum over `a` stops at the first exponent whose per-item price exceeds
/// every type's grand-bundle value; from there on nobody buys anything, so
/// the truncation is exact. Fails if that exponent exceeds `a_max`.
pub fn combined_bound_check<T: Scalar>(
    p: &Pricing<T>,
    d: &ValuationDistribution<T>,
    a_max: u32,
    tol: &ToleranceConfig<T>,
) -> Result<CombinedReport<T>> {
    let universe = p.universe();
    universe.same_as(d.universe())?;
    let n = universe.n();
    if n > MAX_COMBINED_ITEMS {
        return Err(Error::NotEnumerable {
            n,
            max: MAX_COMBINED_ITEMS,
        });
    }
    require_sybil_proof(p, tol)?;
    combined_bound_margins(p, d, a_max, tol)
}

/// [`combined_bound_check`] without the Sybil-proofness precondition.
pub fn combined_bound_margins<T: Scalar>(
    p: &Pricing<T>,
    d: &ValuationDistribution<T>,
    a_max: u32,
    tol: &ToleranceConfig<T>,
) -> Result<CombinedReport<T>> {
    let universe = p.universe();
    universe.same_as(d.universe())?;
    let n = universe.n();
    if n > MAX_COMBINED_ITEMS {
        return Err(Error::NotEnumerable {
            n,
            max: MAX_COMBINED_ITEMS,
        });
    }
    let q = additive_extension(p)?;
    let nn = T::of_usize(n);
    let sd = ScaleDistribution::new(T::one() / (T::two() * nn), T::of(4.0) * nn)?;
    let vmax = d
        .support()
        .iter()
        .map(|(_, v)| v.grand_value())
        .fold(T::zero(), T::max);

    // (T, number of exponents with possibly nonzero revenue)
    let mut plan = Vec::new();
    let mut a_used = 0;
    for t in universe.subsets() {
        let qt = q.price(t);
        if qt <= T::zero() || vmax <= T::zero() {
            continue;
        }
        let mut a = 0u32;
        while T::two().powi((a as usize + n) as i32) * qt <= vmax + tol.eps_tie {
            a += 1;
            if a > a_max {
                return Err(Error::TruncationNotReached { needed: a, a_max });
            }
        }
        if a > 0 {
            a_used = a_used.max(a - 1);
            plan.push((t, a));
        }
    }
    let mut gts = Vec::new();
    for &(t, stop) in &plan {
        for a in 0..stop {
            let w = T::two().powi(-(n as i32)) * T::two().powi(-(a as i32) - 1);
            gts.push((w, gt_pricing(&q, t, a)?));
        }
    }

    let ln8n2 = (T::of(8.0) * nn * nn).ln();
    let rows: Result<Vec<_>> = d
        .support()
        .par_iter()
        .map(|(_, v)| {
            let scaled = expected_scaled_revenue(v, &q, &sd)?.value;
            let uniform = ordered_sum(
                gts.iter()
                    .map(|(w, g)| *w * best_response(v, g, tol).price_paid),
            );
            let lhs = ln8n2 * scaled + T::of(4.0) * uniform;
            let target = best_response(v, p, tol).price_paid / T::two();
            Ok(CombinedRow {
                scaled,
                uniform,
                lhs,
                target,
                margin: lhs - target,
            })
        })
        .collect();
    Ok(CombinedReport {
        scale: sd,
        a_used,
        rows: rows?,
    })
}
