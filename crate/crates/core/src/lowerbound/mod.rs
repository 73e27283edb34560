//! Hard instances: almost-disjoint set systems priced at truncated-geometric
//! levels, where general Sybil-proof pricings beat every simple pricing.

pub mod matroid;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::demand::{best_response, revenue, singleminded_from_demand, DemandDistribution};
use crate::error::{Error, Result};
use crate::lattice::{Pricing, ToleranceConfig, Valuation, ValuationDistribution};
use crate::rng::task_rng;
use crate::scalar::{ordered_sum, Scalar};
use crate::simple_opt::{brev_exact, srev_exact_singleminded, srev_grid, MAX_EXACT_SUPPORT};
use crate::subset::{ItemUniverse, Subset};

pub use matroid::{check_mu_tau_large, gen_desk_matroid_spec, matroid_rank, MatroidSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetSystemParams {
    /// Ground set size.
    pub n: usize,
    /// Number of sets.
    pub n_sets: usize,
    /// Size of every set.
    pub d: usize,
    /// Largest allowed pairwise intersection.
    pub t: usize,
    /// Total number of candidate draws before giving up.
    pub max_tries: usize,
}

impl SetSystemParams {
    pub fn validate(&self) -> Result<()> {
        ItemUniverse::new(self.n)?;
        if self.d == 0 || self.d > self.n || self.t >= self.d || self.n_sets == 0 {
            return Err(Error::InvalidParams(format!(
                "set system needs 1 <= d <= n, t < d, N >= 1 (n={}, N={}, d={}, t={})",
                self.n, self.n_sets, self.d, self.t
            )));
        }
        Ok(())
    }
}

/// `N` sets of size `d` over `n` items with pairwise intersections at most
/// `t`, by rejection sampling from stream 0 of `seed`.
pub fn gen_set_system(params: &SetSystemParams, seed: u64) -> Result<Vec<Subset>> {
    params.validate()?;
    let mut rng = task_rng(seed, 0);
    let mut sets: Vec<Subset> = Vec::with_capacity(params.n_sets);
    let mut pool: Vec<usize> = (0..params.n).collect();
    for _ in 0..params.max_tries {
        // partial Fisher-Yates
        for k in 0..params.d {
            let r = rng.gen_range(k..params.n);
            pool.swap(k, r);
        }
        let cand = Subset::from_items(pool[..params.d].iter().copied());
        if sets
            .iter()
            .all(|s| s.intersection(cand).len() <= params.t)
        {
            sets.push(cand);
            if sets.len() == params.n_sets {
                return Ok(sets);
            }
        }
    }
    Err(Error::SetSystemBudget {
        placed: sets.len(),
        wanted: params.n_sets,
        tries: params.max_tries,
    })
}

/// Values `2^k b_min`, `k ∈ 1..=m`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BetaVector {
    pub values: Vec<u64>,
    pub b_min: u64,
    pub m: u32,
}

impl BetaVector {
    pub fn b_max(&self) -> u64 {
        self.b_min << self.m
    }
}

/// `N` independent draws with `Pr[b = 2^k b_min] = 2^{−k}/(1 − 2^{−m})`.
pub fn sample_beta(n_sets: usize, m: u32, b_min: u64, seed: u64) -> Result<BetaVector> {
    if m == 0 || m > 40 || b_min == 0 || b_min.leading_zeros() <= m {
        return Err(Error::InvalidParams(format!(
            "truncated geometric needs 1 <= m <= 40 and 2^m b_min representable (m={m}, b_min={b_min})"
        )));
    }
    let mut rng = task_rng(seed, 0);
    // Pr[k] = 2^{m-k} / (2^m - 1): split [0, 2^m - 1) into blocks of those sizes
    let total = (1u64 << m) - 1;
    let values = (0..n_sets)
        .map(|_| {
            let r = rng.gen_range(0..total);
            let mut acc = 0u64;
            let mut k = 1;
            loop {
                acc += 1u64 << (m - k);
                if r < acc || k == m {
                    break;
                }
                k += 1;
            }
            b_min << k
        })
        .collect();
    Ok(BetaVector { values, b_min, m })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceMode {
    /// Single-minded buyers, pricing half the cover closure of `(S_i, b_i)`.
    Cover,
    /// Single-minded buyers, pricing half the matroid rank completion.
    Matroid,
    /// Uniform additive buyers on `S_i`, pricing the closure of `(S_i, b_i/2)`.
    Additive,
}

impl InstanceMode {
    pub fn name(self) -> &'static str {
        match self {
            Self::Cover => "cover",
            Self::Matroid => "matroid",
            Self::Additive => "additive",
        }
    }
}

#[derive(Clone, Debug)]
pub struct LowerBoundInstance<T> {
    pub mode: InstanceMode,
    pub sets: Vec<Subset>,
    pub beta: BetaVector,
    pub d: ValuationDistribution<T>,
    pub p: Pricing<T>,
    /// Uniform over the sets.
    pub pi: DemandDistribution<T>,
    /// Sets priced strictly below `b_i/2` because cheaper covers exist.
    pub undercut: Vec<usize>,
}

impl<T: Scalar> LowerBoundInstance<T> {
    /// `Σ b_i / (2N)`.
    pub fn target_revenue(&self) -> T {
        let sum: u64 = self.beta.values.iter().sum();
        T::of(sum as f64) / T::of_usize(2 * self.sets.len())
    }
}

fn check_aligned(sets: &[Subset], beta: &BetaVector, universe: ItemUniverse) -> Result<()> {
    if sets.is_empty() || sets.len() != beta.values.len() {
        return Err(Error::InvalidParams(format!(
            "{} sets but {} values",
            sets.len(),
            beta.values.len()
        )));
    }
    for &s in sets {
        universe.check(s)?;
    }
    Ok(())
}

fn undercut_sets<T: Scalar>(p: &Pricing<T>, sets: &[Subset], targets: &[T], tol: &ToleranceConfig<T>) -> Vec<usize> {
    (0..sets.len())
        .filter(|&i| p.price(sets[i]) < targets[i] - tol.eps_price)
        .collect()
}

/// Uniform single-minded buyers `(S_i, b_i)` against half of a completion of
/// `S_i ↦ b_i`.
///
/// Cover mode completes by the cover closure, which works on any universe
/// size. Matroid mode uses the rank function of `spec`, which must realize
/// `rank(S_i) = b_i` for the given sets and values.
pub fn build_singleminded_instance<T: Scalar>(
    universe: ItemUniverse,
    sets: &[Subset],
    beta: &BetaVector,
    mode: InstanceMode,
    spec: Option<&MatroidSpec>,
    tol: &ToleranceConfig<T>,
) -> Result<LowerBoundInstance<T>> {
    check_aligned(sets, beta, universe)?;
    let b: Vec<T> = beta.values.iter().map(|&x| T::of(x as f64)).collect();
    let full = match mode {
        InstanceMode::Cover => Pricing::cover(universe, sets.iter().copied().zip(b.iter().copied()).collect())?,
        InstanceMode::Matroid => {
            let spec = spec.ok_or_else(|| Error::MatroidInfeasible("matroid mode needs a spec".into()))?;
            if spec.ground != universe.n() || spec.sets != sets || spec.b != beta.values {
                return Err(Error::MatroidInfeasible(
                    "spec does not match the sets and values".into(),
                ));
            }
            if let Some(i) = (0..sets.len()).find(|&i| beta.values[i] > sets[i].len() as u64) {
                return Err(Error::MatroidInfeasible(format!(
                    "b_{i} = {} exceeds |S_{i}| = {}",
                    beta.values[i],
                    sets[i].len()
                )));
            }
            if !spec.is_mu_tau_large() {
                return Err(Error::MatroidInfeasible("h is not (mu, tau)-large".into()));
            }
            let ranks = spec.rank_table();
            if let Some(i) = (0..sets.len()).find(|&i| ranks[sets[i].bits() as usize] != beta.values[i]) {
                return Err(Error::MatroidInfeasible(format!(
                    "rank(S_{i}) = {} but b_{i} = {}",
                    ranks[sets[i].bits() as usize], beta.values[i]
                )));
            }
            Pricing::explicit(universe, ranks.into_iter().map(|r| T::of(r as f64)).collect())?
        }
        InstanceMode::Additive => {
            return Err(Error::InvalidParams(
                "additive instances come from build_additive_instance".into(),
            ))
        }
    };
    let p = Pricing::scaled(T::half(), full)?;
    let vals = sets
        .iter()
        .zip(&b)
        .map(|(&s, &x)| Valuation::single_minded(universe, s, x))
        .collect::<Result<Vec<_>>>()?;
    let d = ValuationDistribution::uniform(vals)?;
    let pi = DemandDistribution::uniform(universe, sets)?;
    let halves: Vec<T> = b.iter().map(|&x| x * T::half()).collect();
    let undercut = undercut_sets(&p, sets, &halves, tol);
    Ok(LowerBoundInstance {
        mode,
        sets: sets.to_vec(),
        beta: beta.clone(),
        d,
        p,
        pi,
        undercut,
    })
}

/// Uniform additive buyers worth `b_i/|S_i|` per item of `S_i`, against the
/// cover closure of `(S_i, b_i/2)`.
///
/// Requires that no other set is worth its price to a buyer:
/// `|S_i ∩ S_j| · b_i/|S_i| ≤ b_j/2` for all `i ≠ j`. Each buyer is then
/// verified to pay exactly `b_i/2`.
pub fn build_additive_instance<T: Scalar>(
    universe: ItemUniverse,
    sets: &[Subset],
    beta: &BetaVector,
    tol: &ToleranceConfig<T>,
) -> Result<LowerBoundInstance<T>> {
    check_aligned(sets, beta, universe)?;
    for i in 0..sets.len() {
        for j in 0..sets.len() {
            if i == j {
                continue;
            }
            let shared = sets[i].intersection(sets[j]).len() as f64;
            let lhs = shared * beta.values[i] as f64 / sets[i].len() as f64;
            let rhs = beta.values[j] as f64 / 2.0;
            if lhs > rhs {
                return Err(Error::Arbitrage { i, j, lhs, rhs });
            }
        }
    }
    let halves: Vec<T> = beta.values.iter().map(|&x| T::of(x as f64) * T::half()).collect();
    let p = Pricing::cover(universe, sets.iter().copied().zip(halves.iter().copied()).collect())?;
    let vals = sets
        .iter()
        .zip(&beta.values)
        .map(|(&s, &x)| {
            let per = T::of(x as f64) / T::of_usize(s.len());
            let mut v = vec![T::zero(); universe.n()];
            for i in s.items() {
                v[i] = per;
            }
            Valuation::additive(universe, v)
        })
        .collect::<Result<Vec<_>>>()?;
    for (i, v) in vals.iter().enumerate() {
        let paid = best_response(v, &p, tol).price_paid;
        if (paid - halves[i]).abs() > tol.eps_report {
            return Err(Error::InvalidParams(format!(
                "type {i} pays {paid}, expected {}",
                halves[i]
            )));
        }
    }
    let d = ValuationDistribution::uniform(vals)?;
    let pi = DemandDistribution::uniform(universe, sets)?;
    let undercut = undercut_sets(&p, sets, &halves, tol);
    Ok(LowerBoundInstance {
        mode: InstanceMode::Additive,
        sets: sets.to_vec(),
        beta: beta.clone(),
        d,
        p,
        pi,
        undercut,
    })
}

/// Smallest `c` with `E_Π[q(S)·1{q(S) ≤ p(S)}] ≥ E_Π[p(S)]/c`; `+inf` when
/// `q` never undercuts `p` with a positive price.
pub fn approx_from_below_ratio<T: Scalar>(
    q: &Pricing<T>,
    p: &Pricing<T>,
    pi: &DemandDistribution<T>,
    tol: &ToleranceConfig<T>,
) -> Result<T> {
    let outcomes = pi.outcomes()?;
    let mut num = Vec::with_capacity(outcomes.len());
    let mut den = Vec::with_capacity(outcomes.len());
    for &(w, s) in &outcomes {
        let (ps, qs) = (p.price(s), q.price(s));
        if !ps.is_finite() {
            return Err(Error::InfiniteSetPrice { set: s });
        }
        num.push(w * ps);
        if qs <= ps + tol.eps_price {
            den.push(w * qs);
        }
    }
    let (num, den) = (ordered_sum(num), ordered_sum(den));
    if den <= T::zero() {
        return Ok(T::infinity());
    }
    Ok(num / den)
}

/// Item pricing from the singleton prices of `p`, with items `p` cannot
/// sell at all priced 0.
pub fn finite_additive_extension<T: Scalar>(p: &Pricing<T>) -> Result<Pricing<T>> {
    let n = p.universe().n();
    let prices = (0..n)
        .map(|i| {
            let x = p.price(Subset::singleton(i));
            if x.is_finite() {
                x
            } else {
                T::zero()
            }
        })
        .collect();
    Pricing::item(p.universe(), prices)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapConfig {
    pub grid_levels: usize,
    pub grid_restarts: usize,
    pub grid_seed: u64,
    /// Scaled extensions `2^{−j} q` for `j = 0..=scale_steps`.
    pub scale_steps: u32,
}

impl Default for GapConfig {
    fn default() -> Self {
        Self {
            grid_levels: 16,
            grid_restarts: 4,
            grid_seed: 0,
            scale_steps: 8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapReport<T> {
    pub rev_p: T,
    pub target_revenue: T,
    /// `E_Π[p(S)]`.
    pub expected_price: T,
    /// Exact BRev of single-minded buyers `(S_i, b_i/2)`, the partial
    /// function the completion is meant to extend.
    pub brev_target: T,
    /// `target_revenue / brev_target`.
    pub ratio_brev_target: T,
    /// Exact BRev of the instance's buyers.
    pub brev: T,
    pub brev_price: T,
    /// Exact BRev of the single-minded buyers induced by `(Π, p)`.
    pub brev_induced: T,
    pub brev_induced_price: T,
    pub srev_exact: Option<T>,
    pub srev_grid: T,
    /// Revenue of `2^{−j}` times the additive extension, by `j`.
    pub scaled: Vec<T>,
    pub best_scaled: T,
    pub ratio_brev: T,
    pub ratio_brev_induced: T,
    pub ratio_srev: T,
    pub ratio_scaled: T,
    /// Approximation-from-below ratios against `(p, Π)`.
    pub afb_brev_induced: T,
    pub afb_srev_grid: T,
    pub afb_best_scaled: T,
    /// Induced single-minded revenue ratio of the induced-BRev pricing.
    pub sm_ratio_brev_induced: T,
}

fn ratio<T: Scalar>(a: T, b: T) -> T {
    if b > T::zero() {
        a / b
    } else if a > T::zero() {
        T::infinity()
    } else {
        T::one()
    }
}

/// Uniform single-minded buyers `(S_i, b_i/2)`.
pub fn target_distribution<T: Scalar>(inst: &LowerBoundInstance<T>) -> Result<ValuationDistribution<T>> {
    let universe = inst.p.universe();
    ValuationDistribution::uniform(
        inst.sets
            .iter()
            .zip(&inst.beta.values)
            .map(|(&s, &b)| Valuation::single_minded(universe, s, T::of(b as f64) * T::half()))
            .collect::<Result<Vec<_>>>()?,
    )
}

/// Revenue of `p` against each simple adversary family, with ratios.
pub fn gap_report<T: Scalar>(
    inst: &LowerBoundInstance<T>,
    cfg: &GapConfig,
    tol: &ToleranceConfig<T>,
) -> Result<GapReport<T>> {
    let rev_p = revenue(&inst.d, &inst.p, tol);
    let expected_price = inst.pi.expectation(|s| inst.p.price(s))?;
    let brev = brev_exact(&inst.d, tol)?;
    let target = target_distribution(inst)?;
    let brev_target = brev_exact(&target, tol)?.value;
    let induced = singleminded_from_demand(&inst.pi, &inst.p)?;
    let brev_ind = brev_exact(&induced, tol)?;
    let srev_exact = if inst.d.all_single_minded() && inst.d.len() <= MAX_EXACT_SUPPORT {
        Some(srev_exact_singleminded(&inst.d, tol)?.value)
    } else {
        None
    };
    let grid = srev_grid(&inst.d, cfg.grid_levels, cfg.grid_restarts, cfg.grid_seed, tol)?;
    let q = finite_additive_extension(&inst.p)?;
    let mut scaled = Vec::new();
    let mut best_scaled = (T::zero(), q.clone());
    for j in 0..=cfg.scale_steps {
        let qj = q.scaled_by(T::two().powi(-(j as i32)))?;
        let r = revenue(&inst.d, &qj, tol);
        if r > best_scaled.0 || j == 0 {
            best_scaled = (r, qj);
        }
        scaled.push(r);
    }
    let bundle_of = |res: &crate::simple_opt::SimpleOptResult<T>| match res.best_pricing.form() {
        crate::lattice::PricingForm::Bundle(t) => *t,
        _ => T::zero(),
    };
    let srev_best = srev_exact.unwrap_or(grid.value).max(grid.value);
    let sm_ratio = ratio(
        revenue(&induced, &inst.p, tol),
        revenue(&induced, &brev_ind.best_pricing, tol),
    );
    Ok(GapReport {
        rev_p,
        target_revenue: inst.target_revenue(),
        brev_target,
        ratio_brev_target: ratio(inst.target_revenue(), brev_target),
        expected_price,
        brev: brev.value,
        brev_price: bundle_of(&brev),
        brev_induced: brev_ind.value,
        brev_induced_price: bundle_of(&brev_ind),
        srev_exact,
        srev_grid: grid.value,
        best_scaled: best_scaled.0,
        scaled,
        ratio_brev: ratio(rev_p, brev.value),
        ratio_brev_induced: ratio(expected_price, brev_ind.value),
        ratio_srev: ratio(rev_p, srev_best),
        ratio_scaled: ratio(rev_p, best_scaled.0),
        afb_brev_induced: approx_from_below_ratio(&brev_ind.best_pricing, &inst.p, &inst.pi, tol)?,
        afb_srev_grid: approx_from_below_ratio(&grid.best_pricing, &inst.p, &inst.pi, tol)?,
        afb_best_scaled: approx_from_below_ratio(&best_scaled.1, &inst.p, &inst.pi, tol)?,
        sm_ratio_brev_induced: sm_ratio,
    })
}

/// `max_k 2^{k−1} b_min · Pr[b ≥ 2^k b_min]` for the truncated geometric,
/// i.e. the best bundle revenue from buyers worth `b/2`, in closed form.
pub fn truncated_geometric_half_brev(b_min: f64, m: u32) -> f64 {
    let denom = 1.0 - 2f64.powi(-(m as i32));
    (1..=m)
        .map(|k| b_min * (1.0 - 2f64.powi(k as i32 - 1 - m as i32)) / denom)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// The same population as an explicit single-item distribution: value
/// `2^{k−1} b_min` with probability `2^{−k}/(1−2^{−m})`.
pub fn truncated_geometric_half_values<T: Scalar>(b_min: f64, m: u32) -> Result<ValuationDistribution<T>> {
    let u = ItemUniverse::new(1)?;
    let denom = 1.0 - 2f64.powi(-(m as i32));
    ValuationDistribution::new(
        (1..=m)
            .map(|k| {
                let w = T::of(2f64.powi(-(k as i32)) / denom);
                let v = T::of(2f64.powi(k as i32 - 1) * b_min);
                Ok((w, Valuation::single_minded(u, Subset::singleton(0), v)?))
            })
            .collect::<Result<Vec<_>>>()?,
    )
}
