//! Small subsets of `{0, .., 63}` packed into a `u64`.

use alloc::vec::Vec;
use core::fmt;

/// A subset of a ground set with at most 64 elements.
///
/// Used for ball sets `Z ⊆ [m]`, edge sets `S ⊆ X`, and vertices of `H_X`.
/// Elements are stored 0-based; the display form is 1-based to match the
/// usual mathematical labelling.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Subset(pub u64);

impl Subset {
    pub const EMPTY: Subset = Subset(0);

    pub fn full(n: usize) -> Subset {
        assert!(n <= 64);
        if n == 64 {
            Subset(u64::MAX)
        } else {
            Subset((1u64 << n) - 1)
        }
    }

    pub fn singleton(i: usize) -> Subset {
        Subset(1u64 << i)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(items: I) -> Subset {
        Subset(items.into_iter().fold(0u64, |acc, i| acc | (1u64 << i)))
    }

    pub fn contains(self, i: usize) -> bool {
        i < 64 && self.0 >> i & 1 == 1
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset_of(self, other: Subset) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn union(self, other: Subset) -> Subset {
        Subset(self.0 | other.0)
    }

    pub fn intersection(self, other: Subset) -> Subset {
        Subset(self.0 & other.0)
    }

    pub fn difference(self, other: Subset) -> Subset {
        Subset(self.0 & !other.0)
    }

    pub fn insert(&mut self, i: usize) {
        self.0 |= 1u64 << i;
    }

    pub fn remove(&mut self, i: usize) {
        self.0 &= !(1u64 << i);
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        core::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i)
            }
        })
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }

    /// All subsets of `self`, in increasing order of their bit pattern.
    pub fn subsets(self) -> impl Iterator<Item = Subset> {
        let universe = self.0;
        let mut current = Some(0u64);
        core::iter::from_fn(move || {
            let out = current?;
            current = if out == universe {
                None
            } else {
                Some((out.wrapping_sub(universe)) & universe)
            };
            Some(Subset(out))
        })
    }

    /// All `k`-element subsets of `self`.
    pub fn subsets_of_size(self, k: usize) -> impl Iterator<Item = Subset> {
        self.subsets().filter(move |s| s.len() == k)
    }

    /// Swap the membership of elements `i` and `j`.
    pub fn swap(self, i: usize, j: usize) -> Subset {
        let bi = self.contains(i);
        let bj = self.contains(j);
        let mut out = self;
        out.remove(i);
        out.remove(j);
        if bi {
            out.insert(j);
        }
        if bj {
            out.insert(i);
        }
        out
    }
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        f.write_str("}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_enumerates_power_set() {
        let u = Subset::from_indices([0, 2, 5]);
        let all: Vec<_> = u.subsets().collect();
        assert_eq!(all.len(), 8);
        assert!(all.iter().all(|s| s.is_subset_of(u)));
        assert_eq!(u.subsets_of_size(2).count(), 3);
        assert_eq!(Subset::EMPTY.subsets().count(), 1);
    }

    #[test]
    fn swap_moves_membership() {
        let s = Subset::from_indices([1]);
        assert_eq!(s.swap(1, 4), Subset::from_indices([4]));
        assert_eq!(s.swap(0, 2), s);
        let both = Subset::from_indices([1, 4]);
        assert_eq!(both.swap(1, 4), both);
    }

    #[test]
    fn debug_is_one_based() {
        assert_eq!(alloc::format!("{:?}", Subset::from_indices([0, 2])), "{1,3}");
    }
}
