//! Fixed-width bitset subsets of a ground set `0..n`.

use std::fmt;

use fixedbitset::FixedBitSet;

/// A subset of the ground set `{0, .., size-1}`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subset(FixedBitSet);

impl Subset {
    pub fn empty(ground_size: usize) -> Self {
        Subset(FixedBitSet::with_capacity(ground_size))
    }

    pub fn full(ground_size: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(ground_size);
        bits.insert_range(..);
        Subset(bits)
    }

    /// Builds a subset from element indices. Panics if an index is out of range.
    pub fn from_indices(ground_size: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Subset::empty(ground_size);
        for e in indices {
            s.insert(e);
        }
        s
    }

    /// Decodes the low `ground_size` bits of `mask`.
    pub fn from_mask(ground_size: usize, mask: u64) -> Self {
        Subset::from_indices(ground_size, (0..ground_size).filter(|&e| mask >> e & 1 == 1))
    }

    pub fn ground_size(&self) -> usize {
        self.0.len()
    }

    pub fn len(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_clear()
    }

    pub fn contains(&self, e: usize) -> bool {
        self.0.contains(e)
    }

    /// Returns `true` if `e` was newly inserted.
    pub fn insert(&mut self, e: usize) -> bool {
        !self.0.put(e)
    }

    pub fn remove(&mut self, e: usize) {
        self.0.set(e, false);
    }

    pub fn with(&self, e: usize) -> Subset {
        let mut s = self.clone();
        s.insert(e);
        s
    }

    pub fn is_subset(&self, other: &Subset) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn union_with(&mut self, other: &Subset) {
        self.0.union_with(&other.0);
    }

    /// Elements in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.ones()
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    /// Elements of the ground set not in this subset, increasing.
    pub fn complement(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.zeroes()
    }
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn insert_and_complement() {
        let mut s = Subset::empty(5);
        assert!(s.insert(3));
        assert!(!s.insert(3));
        s.insert(0);
        assert_eq!(s.to_vec(), vec![0, 3]);
        assert_eq!(s.complement().collect::<Vec<_>>(), vec![1, 2, 4]);
        assert_eq!(s.len(), 2);
        assert!(s.is_subset(&Subset::full(5)));
    }

    #[test]
    fn mask_round_trip() {
        let s = Subset::from_mask(6, 0b101001);
        assert_eq!(s.to_vec(), vec![0, 3, 5]);
    }
}
