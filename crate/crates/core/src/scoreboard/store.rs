//! Ordered multisets of boundaries.

use std::collections::BTreeMap;

use super::Boundary;

/// Ordered multiset of boundaries for one variable.
pub trait BoundaryStore: Default + Clone {
    fn insert(&mut self, b: Boundary);
    /// Removes one copy of `b`; false if absent.
    fn remove(&mut self, b: &Boundary) -> bool;
    fn len(&self) -> usize;
    fn iter(&self) -> impl Iterator<Item = &Boundary> + '_;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn to_vec(&self) -> Vec<Boundary> {
        self.iter().cloned().collect()
    }
}

/// Sorted array; linear-time updates, cheap for short lists.
#[derive(Clone, Debug, Default)]
pub struct SortedVecStore {
    items: Vec<Boundary>,
}

impl BoundaryStore for SortedVecStore {
    fn insert(&mut self, b: Boundary) {
        let i = self.items.partition_point(|x| *x <= b);
        self.items.insert(i, b);
    }

    fn remove(&mut self, b: &Boundary) -> bool {
        match self.items.binary_search(b) {
            Ok(i) => {
                self.items.remove(i);
                true
            }
            Err(_) => false,
        }
    }

    fn len(&self) -> usize {
        self.items.len()
    }

    fn iter(&self) -> impl Iterator<Item = &Boundary> + '_ {
        self.items.iter()
    }
}

/// Balanced tree with multiplicities.
#[derive(Clone, Debug, Default)]
pub struct BTreeStore {
    items: BTreeMap<Boundary, usize>,
    len: usize,
}

impl BoundaryStore for BTreeStore {
    fn insert(&mut self, b: Boundary) {
        *self.items.entry(b).or_insert(0) += 1;
        self.len += 1;
    }

    fn remove(&mut self, b: &Boundary) -> bool {
        let Some(n) = self.items.get_mut(b) else {
            return false;
        };
        *n -= 1;
        if *n == 0 {
            self.items.remove(b);
        }
        self.len -= 1;
        true
    }

    fn len(&self) -> usize {
        self.len
    }

    fn iter(&self) -> impl Iterator<Item = &Boundary> + '_ {
        self.items
            .iter()
            .flat_map(|(b, &n)| std::iter::repeat_n(b, n))
    }
}
