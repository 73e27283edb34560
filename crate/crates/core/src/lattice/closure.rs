//! Buy-many cover closure: the cheapest collection of base options whose
//! union covers a target set.

use crate::error::Result;
use crate::lattice::pricing::Pricing;
use crate::scalar::Scalar;
use crate::subset::{ItemUniverse, Subset};

/// Largest target a point query will expand (`2^k` states).
const MAX_QUERY_ITEMS: usize = 24;

/// Closure over the whole lattice.
///
/// `f(S) = min over options (T, c) covering the lowest item of S of
/// c + f(S \ T)`. Some option of an optimal cover contains the lowest item,
/// so restricting to those options loses nothing.
pub fn closure_table<T: Scalar>(universe: ItemUniverse, options: &[(Subset, T)]) -> Vec<T> {
    let n = universe.n();
    assert!(universe.is_enumerable(), "closure table over {n} items");
    let mut by_item: Vec<Vec<(u64, T)>> = vec![Vec::new(); n];
    for &(s, c) in options {
        for i in s.items() {
            by_item[i].push((s.bits(), c));
        }
    }
    let size = universe.lattice_size();
    let mut f = vec![T::infinity(); size];
    f[0] = T::zero();
    for s in 1..size as u64 {
        let i = s.trailing_zeros() as usize;
        let mut best = T::infinity();
        for &(t, c) in &by_item[i] {
            let cand = c + f[(s & !t) as usize];
            if cand < best {
                best = cand;
            }
        }
        f[s as usize] = best;
    }
    f
}

/// Closure price of a single set, expanding only the subsets of `target`.
pub fn closure_query<T: Scalar>(options: &[(Subset, T)], target: Subset) -> T {
    let k = target.len();
    assert!(
        k <= MAX_QUERY_ITEMS,
        "closure query on {k} items exceeds {MAX_QUERY_ITEMS}"
    );
    if k == 0 {
        return T::zero();
    }
    let projected: Vec<(usize, T)> = options
        .iter()
        .filter(|(s, _)| s.intersects(target))
        .map(|&(s, c)| (s.intersection(target).compress(target), c))
        .collect();
    let mut by_bit: Vec<Vec<(usize, T)>> = vec![Vec::new(); k];
    for &(t, c) in &projected {
        for b in 0..k {
            if t >> b & 1 == 1 {
                by_bit[b].push((t, c));
            }
        }
    }
    let size = 1usize << k;
    let mut f = vec![T::infinity(); size];
    f[0] = T::zero();
    for s in 1..size {
        let b = s.trailing_zeros() as usize;
        let mut best = T::infinity();
        for &(t, c) in &by_bit[b] {
            let cand = c + f[s & !t];
            if cand < best {
                best = cand;
            }
        }
        f[s] = best;
    }
    f[size - 1]
}

/// Materialized closure of `options` as an explicit table. Sets no union of
/// options can cover are priced `+inf`; with no options at all every nonempty
/// set is, which [`Pricing::is_partial`] reports.
pub fn buy_many_closure<T: Scalar>(
    options: &[(Subset, T)],
    universe: ItemUniverse,
) -> Result<Pricing<T>> {
    universe.require_enumerable()?;
    // Validate through the cover constructor.
    let cover = Pricing::cover(universe, options.to_vec())?;
    Pricing::explicit(universe, cover.table()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(n: usize) -> ItemUniverse {
        ItemUniverse::new(n).unwrap()
    }

    /// Minimum over all sub-collections of options whose union covers the
    /// target. Exponential in the number of options.
    fn brute_force_cover(options: &[(Subset, f64)], target: Subset) -> f64 {
        let mut best = f64::INFINITY;
        for mask in 0u32..1 << options.len() {
            let mut union = Subset::EMPTY;
            let mut cost = 0.0;
            for (k, &(s, c)) in options.iter().enumerate() {
                if mask >> k & 1 == 1 {
                    union = union.union(s);
                    cost += c;
                }
            }
            if target.is_subset_of(union) && cost < best {
                best = cost;
            }
        }
        best
    }

    #[test]
    fn cheaper_to_buy_singletons() {
        let opts = vec![
            (Subset::singleton(0), 1.0),
            (Subset::singleton(1), 1.0),
            (Subset::full(2), 3.0),
        ];
        let f = buy_many_closure(&opts, u(2)).unwrap();
        assert_eq!(f.price(Subset::full(2)), 2.0);
    }

    #[test]
    fn overlapping_options() {
        let opts = vec![(Subset::from_items([0, 1]), 2.0), (Subset::from_items([1, 2]), 2.0)];
        let f = buy_many_closure(&opts, u(3)).unwrap();
        assert_eq!(f.price(Subset::singleton(2)), 2.0);
        assert_eq!(f.price(Subset::full(3)), 4.0);
    }

    #[test]
    fn empty_option_list_is_partial() {
        let f = buy_many_closure::<f64>(&[], u(3)).unwrap();
        assert!(f.is_partial().unwrap());
        assert_eq!(f.price(Subset::EMPTY), 0.0);
        assert!(u(3).subsets().skip(1).all(|s| f.price(s).is_infinite()));
    }

    #[test]
    fn item_pricing_is_its_own_closure() {
        let prices = [0.5, 2.0, 1.25, 3.0];
        let opts: Vec<_> = prices
            .iter()
            .enumerate()
            .map(|(i, &c)| (Subset::singleton(i), c))
            .collect();
        let f = buy_many_closure(&opts, u(4)).unwrap();
        let item = Pricing::item(u(4), prices.to_vec()).unwrap();
        for s in u(4).subsets() {
            assert_eq!(f.price(s), item.price(s));
        }
    }

    #[test]
    fn table_and_point_query_match_brute_force() {
        let opts = vec![
            (Subset::from_items([0, 2]), 3.0),
            (Subset::from_items([1]), 1.5),
            (Subset::from_items([1, 2, 3]), 2.5),
            (Subset::from_items([3, 4]), 0.75),
            (Subset::from_items([0]), 2.0),
        ];
        let table = closure_table(u(5), &opts);
        for s in u(5).subsets() {
            let expect = brute_force_cover(&opts, s);
            assert_eq!(table[s.bits() as usize], expect, "set {s}");
            assert_eq!(closure_query(&opts, s), expect, "set {s}");
        }
    }
}
