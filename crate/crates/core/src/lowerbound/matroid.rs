//! Matroids from a coverage-deficit constraint family.
//!
//! For sets `S_1..S_N` and targets `b_j`, let
//! `h(J) = Σ_{j∈J} b_j − (μ|J| − |S(J)|)` with `S(J) = ∪_{j∈J} S_j`. A set `I`
//! is independent when `|I| ≤ μ` and `|I ∩ S(J)| ≤ h(J)` for every `J` with
//! `|J| < τ`. When `h` is `(μ,τ)`-large these sets form a matroid.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::task_rng;
use crate::subset::{ItemUniverse, Subset};

use super::{gen_set_system, SetSystemParams};

pub const MAX_MATROID_GROUND: usize = 14;
pub const MAX_MATROID_SETS: usize = 6;
pub const MAX_MATROID_TAU: usize = 4;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatroidSpec {
    pub ground: usize,
    pub sets: Vec<Subset>,
    pub b: Vec<u64>,
    pub mu: u64,
    pub tau: usize,
}

impl MatroidSpec {
    pub fn new(ground: usize, sets: Vec<Subset>, b: Vec<u64>, mu: u64, tau: usize) -> Result<Self> {
        if ground == 0 || ground > MAX_MATROID_GROUND {
            return Err(Error::MatroidInfeasible(format!(
                "ground size {ground} outside 1..={MAX_MATROID_GROUND}"
            )));
        }
        if sets.is_empty() || sets.len() > MAX_MATROID_SETS {
            return Err(Error::MatroidInfeasible(format!(
                "{} sets, expected 1..={MAX_MATROID_SETS}",
                sets.len()
            )));
        }
        if !(2..=MAX_MATROID_TAU).contains(&tau) {
            return Err(Error::MatroidInfeasible(format!(
                "tau = {tau}, expected 2..={MAX_MATROID_TAU}"
            )));
        }
        if b.len() != sets.len() {
            return Err(Error::MatroidInfeasible("one target per set required".into()));
        }
        let universe = ItemUniverse::new(ground)?;
        for &s in &sets {
            universe.check(s)?;
        }
        if b.iter().any(|&x| x > mu) {
            return Err(Error::MatroidInfeasible("mu below the largest target".into()));
        }
        Ok(Self {
            ground,
            sets,
            b,
            mu,
            tau,
        })
    }

    fn n_sets(&self) -> usize {
        self.sets.len()
    }

    fn union_of(&self, j: u32) -> Subset {
        (0..self.n_sets())
            .filter(|k| j >> k & 1 == 1)
            .fold(Subset::EMPTY, |acc, k| acc.union(self.sets[k]))
    }

    /// `h(J)` for the index set `J` given as a bitmask over the sets.
    pub fn h(&self, j: u32) -> i64 {
        let size = j.count_ones() as i64;
        let b: i64 = (0..self.n_sets())
            .filter(|k| j >> k & 1 == 1)
            .map(|k| self.b[k] as i64)
            .sum();
        b - (self.mu as i64 * size - self.union_of(j).len() as i64)
    }

    /// Index sets `J` with `|J| < τ`, their unions and `h(J)`.
    fn constraints(&self) -> Vec<(Subset, i64)> {
        (0u32..1 << self.n_sets())
            .filter(|j| (j.count_ones() as usize) < self.tau)
            .map(|j| (self.union_of(j), self.h(j)))
            .collect()
    }

    pub fn is_independent(&self, i: Subset) -> bool {
        self.independent_with(&self.constraints(), i)
    }

    fn independent_with(&self, cons: &[(Subset, i64)], i: Subset) -> bool {
        i.len() as u64 <= self.mu
            && cons
                .iter()
                .all(|&(s, h)| (i.intersection(s).len() as i64) <= h)
    }

    /// Size of a largest independent subset of `s`, grown greedily in item
    /// order (exact whenever the family is a matroid).
    pub fn rank(&self, s: Subset) -> u64 {
        let cons = self.constraints();
        self.rank_with(&cons, s)
    }

    fn rank_with(&self, cons: &[(Subset, i64)], s: Subset) -> u64 {
        let mut ind = Subset::EMPTY;
        for x in s.items() {
            let cand = ind.insert(x);
            if self.independent_with(cons, cand) {
                ind = cand;
            }
        }
        ind.len() as u64
    }

    /// Rank of every subset of the ground set, indexed by bitset.
    pub fn rank_table(&self) -> Vec<u64> {
        let cons = self.constraints();
        (0..1u64 << self.ground)
            .map(|s| self.rank_with(&cons, Subset(s)))
            .collect()
    }

    /// `h(J) ≥ 0` for `|J| < τ` and `h(J) ≥ μ` for `τ ≤ |J| ≤ 2τ − 2`.
    pub fn is_mu_tau_large(&self) -> bool {
        (0u32..1 << self.n_sets()).all(|j| {
            let size = j.count_ones() as usize;
            if size < self.tau {
                self.h(j) >= 0
            } else if size <= 2 * self.tau - 2 {
                self.h(j) >= self.mu as i64
            } else {
                true
            }
        })
    }

    /// Conditions under which a maximum independent subset of each `S_i`
    /// has exactly `b_i` elements: `|S_i| = μ`, `b_min ≤ b_i ≤ μ`, pairwise
    /// intersections at most `b_min/2`, and coverage deficit
    /// `μ|J| − |S(J)| ≤ b_min|J|/4` for `2 ≤ |J| < τ`.
    pub fn meets_completion_conditions(&self) -> bool {
        let bmin = *self.b.iter().min().expect("nonempty");
        let sizes_ok = self.sets.iter().all(|s| s.len() as u64 == self.mu);
        let pairs_ok = (0..self.n_sets()).all(|i| {
            (i + 1..self.n_sets())
                .all(|j| 2 * self.sets[i].intersection(self.sets[j]).len() as u64 <= bmin)
        });
        let deficit_ok = (0u32..1 << self.n_sets()).all(|j| {
            let size = j.count_ones() as u64;
            if size < 2 || size as usize >= self.tau {
                return true;
            }
            let deficit = self.mu * size - self.union_of(j).len() as u64;
            4 * deficit <= bmin * size
        });
        sizes_ok && pairs_ok && deficit_ok && self.mu >= 1
    }
}

/// `matroid_rank(spec, S)`.
pub fn matroid_rank(spec: &MatroidSpec, s: Subset) -> u64 {
    spec.rank(s)
}

/// `check_mu_tau_large(spec)`.
pub fn check_mu_tau_large(spec: &MatroidSpec) -> bool {
    spec.is_mu_tau_large()
}

/// Random spec on `ground` items with `n_sets` sets and the given `τ` that
/// is `(μ,τ)`-large and meets the completion conditions. Set size `μ`,
/// `b_min` and the targets are drawn from stream `0` of `seed`; candidate
/// systems are redrawn until both checks pass.
pub fn gen_desk_matroid_spec(ground: usize, n_sets: usize, tau: usize, seed: u64) -> Result<MatroidSpec> {
    const MAX_ATTEMPTS: u64 = 10_000;
    let mut rng = task_rng(seed, 0);
    for attempt in 0..MAX_ATTEMPTS {
        let mu = rng.gen_range(2..=ground.clamp(2, 6)) as u64;
        let bmin = rng.gen_range(1..=mu);
        let t = (bmin / 2) as usize;
        let params = SetSystemParams {
            n: ground,
            n_sets,
            d: mu as usize,
            t,
            max_tries: 200,
        };
        let Ok(mut sets) = gen_set_system(&params, seed.wrapping_add(attempt).wrapping_mul(0x9e37_79b9)) else {
            continue;
        };
        sets.shuffle(&mut rng);
        let mut b: Vec<u64> = (0..n_sets).map(|_| rng.gen_range(bmin..=mu)).collect();
        b[0] = bmin;
        b.shuffle(&mut rng);
        let spec = MatroidSpec::new(ground, sets, b, mu, tau)?;
        if spec.is_mu_tau_large() && spec.meets_completion_conditions() {
            return Ok(spec);
        }
    }
    Err(Error::MatroidInfeasible(format!(
        "no large spec found for ground {ground}, {n_sets} sets, tau {tau}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single() -> MatroidSpec {
        MatroidSpec::new(6, vec![Subset::from_items([0, 1, 2, 3])], vec![2], 4, 2).unwrap()
    }

    #[test]
    fn rank_examples() {
        let spec = single();
        assert_eq!(spec.h(1), 2);
        assert_eq!(matroid_rank(&spec, Subset::from_items([0, 1, 2, 3])), 2);
        assert_eq!(matroid_rank(&spec, Subset::EMPTY), 0);
        assert_eq!(matroid_rank(&spec, Subset::from_items([4, 5])), 2);
        assert_eq!(matroid_rank(&spec, Subset::full(6)), 4);
    }

    #[test]
    fn largeness_examples() {
        assert!(check_mu_tau_large(&single()));
        let zero = MatroidSpec::new(4, vec![Subset::from_items([0, 1])], vec![0], 4, 2).unwrap();
        assert!(!check_mu_tau_large(&zero));
    }

    #[test]
    fn validation() {
        assert!(MatroidSpec::new(15, vec![Subset::singleton(0)], vec![1], 1, 2).is_err());
        assert!(MatroidSpec::new(4, vec![Subset::singleton(0)], vec![3], 2, 2).is_err());
        assert!(MatroidSpec::new(4, vec![Subset::singleton(0)], vec![1], 2, 5).is_err());
    }

    #[test]
    fn desk_specs_realize_targets() {
        for seed in 0..20 {
            let spec = gen_desk_matroid_spec(10, 3, 3, seed).unwrap();
            for (s, &b) in spec.sets.iter().zip(&spec.b) {
                assert_eq!(spec.rank(*s), b, "seed {seed}: {spec:?}");
            }
        }
    }
}
