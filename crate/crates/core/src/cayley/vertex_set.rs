use std::fmt;

use fixedbitset::FixedBitSet;

/// Index of an element inside a [`super::Ball`]. Ids follow BFS layer order and,
/// within a layer, canonical encoding order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId(pub u32);

impl VertexId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// A subset of a ball's vertices.
#[derive(Clone, PartialEq, Eq)]
pub struct VertexSet {
    bits: FixedBitSet,
}

impl VertexSet {
    pub fn new(capacity: usize) -> Self {
        VertexSet {
            bits: FixedBitSet::with_capacity(capacity),
        }
    }

    pub fn from_ids(capacity: usize, ids: impl IntoIterator<Item = VertexId>) -> Self {
        let mut s = Self::new(capacity);
        for id in ids {
            s.insert(id);
        }
        s
    }

    pub fn full(capacity: usize) -> Self {
        let mut s = Self::new(capacity);
        s.bits.insert_range(..);
        s
    }

    pub fn capacity(&self) -> usize {
        self.bits.len()
    }

    pub fn insert(&mut self, id: VertexId) -> bool {
        !self.bits.put(id.index())
    }

    pub fn remove(&mut self, id: VertexId) {
        self.bits.set(id.index(), false);
    }

    pub fn contains(&self, id: VertexId) -> bool {
        self.bits.contains(id.index())
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    pub fn iter(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.bits.ones().map(|i| VertexId(i as u32))
    }

    pub fn complement(&self) -> VertexSet {
        let mut bits = self.bits.clone();
        bits.toggle_range(..);
        VertexSet { bits }
    }

    pub fn union_with(&mut self, other: &VertexSet) {
        self.bits.union_with(&other.bits);
    }

    pub fn intersect_with(&mut self, other: &VertexSet) {
        self.bits.intersect_with(&other.bits);
    }

    pub fn difference_with(&mut self, other: &VertexSet) {
        self.bits.difference_with(&other.bits);
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.bits.is_subset(&other.bits)
    }

    pub fn is_disjoint(&self, other: &VertexSet) -> bool {
        self.bits.is_disjoint(&other.bits)
    }

    /// Number of members with id below `end` (members of a sub-ball, given its size).
    pub fn count_below(&self, end: usize) -> usize {
        self.bits.count_ones(..end.min(self.bits.len()))
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|v| v.0)).finish()
    }
}
