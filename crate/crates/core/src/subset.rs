//! Item sets as bitsets, and the item universe they live in.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest universe any subset can address.
pub const MAX_ITEMS: usize = 64;

/// Largest universe for which whole-lattice tables (2^n entries) and
/// exhaustive scans are built.
pub const MAX_ENUMERABLE_ITEMS: usize = 20;

/// A set of items, bit `i` standing for item `i` (0-based).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Subset(pub u64);

impl Subset {
    pub const EMPTY: Subset = Subset(0);

    #[inline]
    pub fn bits(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn singleton(i: usize) -> Self {
        debug_assert!(i < MAX_ITEMS);
        Subset(1u64 << i)
    }

    /// `{0, .., n-1}`.
    #[inline]
    pub fn full(n: usize) -> Self {
        if n >= 64 {
            Subset(u64::MAX)
        } else {
            Subset((1u64 << n) - 1)
        }
    }

    pub fn from_items<I: IntoIterator<Item = usize>>(items: I) -> Self {
        Subset(items.into_iter().fold(0u64, |acc, i| acc | (1u64 << i)))
    }

    #[inline]
    pub fn contains(self, i: usize) -> bool {
        i < MAX_ITEMS && self.0 >> i & 1 == 1
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn union(self, other: Subset) -> Subset {
        Subset(self.0 | other.0)
    }

    #[inline]
    pub fn intersection(self, other: Subset) -> Subset {
        Subset(self.0 & other.0)
    }

    #[inline]
    pub fn difference(self, other: Subset) -> Subset {
        Subset(self.0 & !other.0)
    }

    #[inline]
    pub fn intersects(self, other: Subset) -> bool {
        self.0 & other.0 != 0
    }

    #[inline]
    pub fn is_subset_of(self, other: Subset) -> bool {
        self.0 & !other.0 == 0
    }

    #[inline]
    pub fn insert(self, i: usize) -> Subset {
        Subset(self.0 | 1u64 << i)
    }

    /// Smallest item, if any.
    #[inline]
    pub fn first(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    /// Largest item index plus one (0 for the empty set).
    #[inline]
    pub fn span(self) -> usize {
        64 - self.0.leading_zeros() as usize
    }

    pub fn items(self) -> Items {
        Items(self.0)
    }

    /// Every subset of `self`, in increasing bit order, starting with the
    /// empty set and ending with `self`.
    pub fn submasks(self) -> Submasks {
        Submasks {
            mask: self.0,
            next: Some(0),
        }
    }

    /// Index of this subset into a table over the subsets of `mask`, where
    /// bit `k` of the index is the `k`-th item of `mask`.
    pub fn compress(self, mask: Subset) -> usize {
        let mut idx = 0usize;
        for (k, item) in mask.items().enumerate() {
            if self.contains(item) {
                idx |= 1 << k;
            }
        }
        idx
    }
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, i) in self.items().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{i}")?;
        }
        f.write_str("}")
    }
}

impl Serialize for Subset {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.items())
    }
}

impl<'de> Deserialize<'de> for Subset {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let items = Vec::<usize>::deserialize(deserializer)?;
        let mut bits = 0u64;
        for i in items {
            if i >= MAX_ITEMS {
                return Err(serde::de::Error::custom(format!(
                    "item index {i} exceeds {MAX_ITEMS}"
                )));
            }
            if bits >> i & 1 == 1 {
                return Err(serde::de::Error::custom(format!("item {i} listed twice")));
            }
            bits |= 1 << i;
        }
        Ok(Subset(bits))
    }
}

pub struct Items(u64);

impl Iterator for Items {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Items {}

pub struct Submasks {
    mask: u64,
    next: Option<u64>,
}

impl Iterator for Submasks {
    type Item = Subset;

    #[inline]
    fn next(&mut self) -> Option<Subset> {
        let cur = self.next?;
        self.next = if cur == self.mask {
            None
        } else {
            Some((cur.wrapping_sub(self.mask)) & self.mask)
        };
        Some(Subset(cur))
    }
}

/// The ground set `{0, .., n-1}` of items on sale.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ItemUniverse {
    n: usize,
}

impl ItemUniverse {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_ITEMS {
            return Err(Error::UniverseSize { n, max: MAX_ITEMS });
        }
        Ok(Self { n })
    }

    #[inline]
    pub fn n(self) -> usize {
        self.n
    }

    #[inline]
    pub fn full(self) -> Subset {
        Subset::full(self.n)
    }

    #[inline]
    pub fn is_enumerable(self) -> bool {
        self.n <= MAX_ENUMERABLE_ITEMS
    }

    pub fn require_enumerable(self) -> Result<()> {
        if self.is_enumerable() {
            Ok(())
        } else {
            Err(Error::NotEnumerable {
                n: self.n,
                max: MAX_ENUMERABLE_ITEMS,
            })
        }
    }

    /// Number of subsets, `2^n`. Only meaningful for enumerable universes.
    #[inline]
    pub fn lattice_size(self) -> usize {
        1usize << self.n
    }

    /// All `2^n` subsets in bitset order.
    pub fn subsets(self) -> impl Iterator<Item = Subset> + Clone {
        (0..1u64 << self.n.min(MAX_ENUMERABLE_ITEMS)).map(Subset)
    }

    pub fn check(self, s: Subset) -> Result<()> {
        if s.is_subset_of(self.full()) {
            Ok(())
        } else {
            Err(Error::SubsetOutOfRange { set: s, n: self.n })
        }
    }

    pub fn same_as(self, other: ItemUniverse) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::UniverseMismatch {
                expected: self.n,
                found: other.n,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn submasks_visit_every_subset_once() {
        let mask = Subset::from_items([1, 3, 4]);
        let subs: Vec<_> = mask.submasks().collect();
        assert_eq!(subs.len(), 8);
        assert_eq!(subs[0], Subset::EMPTY);
        assert_eq!(*subs.last().unwrap(), mask);
        assert!(subs.iter().all(|s| s.is_subset_of(mask)));
    }

    #[test]
    fn display_and_json_use_sorted_indices() {
        let s = Subset::from_items([4, 0, 2]);
        assert_eq!(s.to_string(), "{0,2,4}");
        assert_eq!(serde_json::to_string(&s).unwrap(), "[0,2,4]");
        let back: Subset = serde_json::from_str("[2,4,0]").unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<Subset>("[1,1]").is_err());
    }

    #[test]
    fn compress_maps_onto_dense_index() {
        let mask = Subset::from_items([2, 5, 7]);
        assert_eq!(Subset::from_items([5]).compress(mask), 0b010);
        assert_eq!(mask.compress(mask), 0b111);
    }

    #[test]
    fn universe_bounds() {
        assert!(ItemUniverse::new(0).is_err());
        assert!(ItemUniverse::new(65).is_err());
        assert!(ItemUniverse::new(48).unwrap().require_enumerable().is_err());
        assert_eq!(ItemUniverse::new(3).unwrap().subsets().count(), 8);
    }
}
