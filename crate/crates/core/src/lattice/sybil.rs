//! Deterministic Sybil-proofness: a set pricing resists splitting orders
//! exactly when it is monotone and subadditive.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::lattice::pricing::Pricing;
use crate::lattice::tolerance::ToleranceConfig;
use crate::scalar::Scalar;
use crate::subset::Subset;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Violation {
    /// `p(first) > p(second)` although `first ⊆ second`.
    Monotone,
    /// `p(first ∪ second) > p(first) + p(second)`.
    Subadditive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub kind: Violation,
    pub first: Subset,
    pub second: Subset,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SybilCheck {
    pub monotone: bool,
    pub subadditive: bool,
    /// Some set has an infinite price; both checks then cover the finite
    /// region only.
    pub partial: bool,
    pub witnesses: Vec<Witness>,
}

impl SybilCheck {
    pub fn is_sybil_proof(&self) -> bool {
        self.monotone && self.subadditive
    }
}

/// Exhaustive check of monotonicity over all `S ⊆ T` and of subadditivity
/// over all pairs, each up to `tol.eps_price`. At most `max_witnesses`
/// violating pairs are kept, in lexicographic order of the pair.
pub fn check_deterministic_sybil_proof<T: Scalar>(
    p: &Pricing<T>,
    tol: &ToleranceConfig<T>,
    max_witnesses: usize,
) -> Result<SybilCheck> {
    let universe = p.universe();
    let table = p.table()?;
    let eps = tol.eps_price;
    let size = table.len() as u64;
    let partial = table.iter().any(|x| x.is_infinite());
    let price = |s: u64| table[s as usize];

    let mono: Vec<Witness> = (0..size)
        .into_par_iter()
        .flat_map_iter(|s| {
            let ps = price(s);
            // strict supersets of s
            let free = universe.full().bits() & !s;
            let mut found = Vec::new();
            let mut extra = free;
            while extra != 0 && found.len() < max_witnesses {
                let t = s | extra;
                let pt = price(t);
                if pt.is_finite() && ps > pt + eps {
                    found.push(Witness {
                        kind: Violation::Monotone,
                        first: Subset(s),
                        second: Subset(t),
                    });
                }
                extra = (extra - 1) & free;
            }
            found.reverse();
            found
        })
        .collect();

    let sub: Vec<Witness> = (1..size)
        .into_par_iter()
        .flat_map_iter(|s| {
            let ps = price(s);
            let mut found = Vec::new();
            if ps.is_infinite() {
                return found;
            }
            for t in s + 1..size {
                if found.len() >= max_witnesses {
                    break;
                }
                // comparable pairs hold trivially for non-negative prices
                if s & t == s || s & t == t {
                    continue;
                }
                let pt = price(t);
                if pt.is_infinite() {
                    continue;
                }
                if price(s | t) > ps + pt + eps {
                    found.push(Witness {
                        kind: Violation::Subadditive,
                        first: Subset(s),
                        second: Subset(t),
                    });
                }
            }
            found
        })
        .collect();

    let monotone = mono.is_empty();
    let subadditive = sub.is_empty();
    let witnesses = mono
        .into_iter()
        .chain(sub)
        .take(max_witnesses)
        .collect();
    Ok(SybilCheck {
        monotone,
        subadditive,
        partial,
        witnesses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subset::ItemUniverse;

    fn u(n: usize) -> ItemUniverse {
        ItemUniverse::new(n).unwrap()
    }

    fn tol() -> ToleranceConfig<f64> {
        ToleranceConfig::default()
    }

    #[test]
    fn item_pricing_passes() {
        let p = Pricing::item(u(2), vec![1.0, 1.0]).unwrap();
        let r = check_deterministic_sybil_proof(&p, &tol(), 16).unwrap();
        assert!(r.monotone && r.subadditive && !r.partial);
        assert!(r.witnesses.is_empty());
    }

    #[test]
    fn superadditive_pair_is_reported() {
        let p = Pricing::explicit(u(2), vec![0.0, 1.0, 1.0, 3.0]).unwrap();
        let r = check_deterministic_sybil_proof(&p, &tol(), 16).unwrap();
        assert!(r.monotone);
        assert!(!r.subadditive);
        assert_eq!(
            r.witnesses,
            vec![Witness {
                kind: Violation::Subadditive,
                first: Subset::singleton(0),
                second: Subset::singleton(1),
            }]
        );
    }

    #[test]
    fn monotonicity_violation_is_reported() {
        // p({0}) = 2, p({1}) = 0.5, p({0,1}) = 1
        let p = Pricing::explicit(u(2), vec![0.0, 2.0, 0.5, 1.0]).unwrap();
        let r = check_deterministic_sybil_proof(&p, &tol(), 16).unwrap();
        assert!(!r.monotone);
        assert!(r.witnesses.contains(&Witness {
            kind: Violation::Monotone,
            first: Subset::singleton(0),
            second: Subset::full(2),
        }));
    }

    #[test]
    fn tolerance_absorbs_rounding() {
        let p = Pricing::explicit(u(2), vec![0.0, 1.0, 1.0, 2.0 + 1e-12]).unwrap();
        assert!(check_deterministic_sybil_proof(&p, &tol(), 4).unwrap().subadditive);
    }

    #[test]
    fn partial_pricing_flagged() {
        let p = Pricing::explicit(u(2), vec![0.0, 1.0, f64::INFINITY, f64::INFINITY]).unwrap();
        let r = check_deterministic_sybil_proof(&p, &tol(), 4).unwrap();
        assert!(r.partial);
        assert!(r.monotone && r.subadditive);
    }

    #[test]
    fn witness_cap_respected() {
        let n = 4;
        let mut table = vec![0.0; 16];
        for s in 1..16usize {
            table[s] = (s.count_ones() as f64).powi(3);
        }
        let p = Pricing::explicit(u(n), table).unwrap();
        let r = check_deterministic_sybil_proof(&p, &tol(), 3).unwrap();
        assert!(!r.subadditive);
        assert_eq!(r.witnesses.len(), 3);
    }
}
