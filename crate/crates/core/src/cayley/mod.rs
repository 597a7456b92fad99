//! Balls in Cayley graphs: exact BFS layers, growth tables, vertex boundaries
//! and on-disk ball caches.

mod boundary;
mod cache;
mod vertex_set;

use std::ops::Range;
use std::sync::Arc;

use indexmap::IndexSet;
use rayon::prelude::*;
use thiserror::Error;

use crate::group::{Group, GroupElement, GroupError};

pub use boundary::{inner_boundary, outer_boundary};
pub use cache::{read_header, CacheError, CacheHeader, CACHE_FORMAT_VERSION, CACHE_MAGIC};
pub use vertex_set::{VertexId, VertexSet};

/// Neighbor-table marker for a neighbor lying outside the ball.
const OUTSIDE: u32 = u32::MAX;

/// Default memory budget for a single ball: 2 GiB.
pub const DEFAULT_MEMORY_BUDGET: u64 = 2 << 30;

#[derive(Debug, Error)]
pub enum BallError {
    #[error(
        "ball of radius {requested} exceeds the memory budget of {budget} bytes; \
         largest feasible radius is {feasible}"
    )]
    MemoryBudget {
        requested: u32,
        feasible: u32,
        budget: u64,
    },
    #[error("ball has more than u32::MAX - 1 elements")]
    TooLarge,
    #[error(transparent)]
    Group(#[from] GroupError),
}

#[derive(Clone, Copy, Debug)]
pub struct BallOptions {
    /// Upper bound on the estimated resident size of the ball, in bytes.
    pub memory_budget: u64,
}

impl Default for BallOptions {
    fn default() -> Self {
        BallOptions {
            memory_budget: DEFAULT_MEMORY_BUDGET,
        }
    }
}

/// The ball `B_R` around the identity, enumerated layer by layer.
pub struct Ball {
    group: Arc<Group>,
    radius: u32,
    encodings: IndexSet<Box<[u8]>>,
    /// `layer_starts[k]..layer_starts[k + 1]` are the ids of word length `k`.
    layer_starts: Vec<usize>,
    /// Row `id` holds the neighbor id `id · s` for each generator `s`.
    neighbors: Vec<u32>,
}

/// `v(R)` for `R = 0..=R_max`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrowthTable {
    pub entries: Vec<(u32, u64)>,
}

impl GrowthTable {
    pub fn volume(&self, radius: u32) -> Option<u64> {
        self.entries.get(radius as usize).map(|&(_, v)| v)
    }

    pub fn volumes(&self) -> Vec<u64> {
        self.entries.iter().map(|&(_, v)| v).collect()
    }
}

fn estimated_element_bytes(encoding_len: usize, generator_count: usize) -> u64 {
    // boxed bytes + allocator slack + index-map bucket and slot + neighbor row
    (encoding_len + 16 + 16 + 32 + 4 * generator_count) as u64
}

impl Ball {
    /// Enumerate `B_R` with the default memory budget.
    pub fn enumerate(group: &Arc<Group>, radius: u32) -> Result<Ball, BallError> {
        Self::enumerate_with(group, radius, BallOptions::default())
    }

    /// Exact BFS by right multiplication from the identity. Fails without a
    /// partial result when the estimated size exceeds `options.memory_budget`.
    pub fn enumerate_with(
        group: &Arc<Group>,
        radius: u32,
        options: BallOptions,
    ) -> Result<Ball, BallError> {
        let s = group.generator_count();
        let mut encodings: IndexSet<Box<[u8]>> = IndexSet::new();
        let identity = group.encode(&group.identity());
        let mut bytes = estimated_element_bytes(identity.len(), s);
        encodings.insert(identity.into_boxed_slice());
        let mut layer_starts = vec![0usize, 1];
        let mut neighbors: Vec<u32> = Vec::new();
        let check_budget = |bytes: u64, completed: u32| {
            if bytes > options.memory_budget {
                Err(BallError::MemoryBudget {
                    requested: radius,
                    feasible: completed,
                    budget: options.memory_budget,
                })
            } else {
                Ok(())
            }
        };
        check_budget(bytes, 0)?;

        for k in 1..=radius + 1 {
            let frontier = layer_starts[k as usize - 1]..layer_starts[k as usize];
            let products = expand(group, &encodings, frontier, k <= radius)?;
            if k <= radius {
                let mut fresh: Vec<&[u8]> = products
                    .iter()
                    .flat_map(|row| row.iter())
                    .filter_map(|p| match p {
                        Product::Outside(enc) => Some(&enc[..]),
                        _ => None,
                    })
                    .collect();
                fresh.par_sort_unstable();
                fresh.dedup();
                bytes += fresh.iter().map(|e| estimated_element_bytes(e.len(), s)).sum::<u64>();
                check_budget(bytes, k - 1)?;
                if encodings.len() + fresh.len() >= OUTSIDE as usize {
                    return Err(BallError::TooLarge);
                }
                for enc in fresh {
                    encodings.insert(enc.into());
                }
                layer_starts.push(encodings.len());
            }
            neighbors.reserve(products.len() * s);
            for row in products {
                for p in row {
                    neighbors.push(match p {
                        Product::Known(id) => id,
                        Product::Outside(enc) => encodings
                            .get_index_of(&enc[..])
                            .map_or(OUTSIDE, |i| i as u32),
                        Product::Missing => OUTSIDE,
                    });
                }
            }
        }

        Ok(Ball {
            group: group.clone(),
            radius,
            encodings,
            layer_starts,
            neighbors,
        })
    }

    /// Rebuild a ball from already-sorted layers of encodings (used by the cache loader).
    pub(crate) fn from_layers(
        group: &Arc<Group>,
        radius: u32,
        layers: Vec<Vec<Box<[u8]>>>,
    ) -> Result<Ball, BallError> {
        let mut encodings = IndexSet::new();
        let mut layer_starts = vec![0];
        for layer in layers {
            for enc in layer {
                group.decode(&enc)?;
                encodings.insert(enc);
            }
            layer_starts.push(encodings.len());
        }
        let s = group.generator_count();
        let mut neighbors = Vec::with_capacity(encodings.len() * s);
        let rows = expand(group, &encodings, 0..encodings.len(), false)?;
        for row in rows {
            for p in row {
                neighbors.push(match p {
                    Product::Known(id) => id,
                    _ => OUTSIDE,
                });
            }
        }
        Ok(Ball {
            group: group.clone(),
            radius,
            encodings,
            layer_starts,
            neighbors,
        })
    }

    pub fn group(&self) -> &Arc<Group> {
        &self.group
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.encodings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.encodings.is_empty()
    }

    /// Ids of the sphere of radius `k`.
    pub fn layer(&self, k: u32) -> Range<u32> {
        let k = k as usize;
        self.layer_starts[k] as u32..self.layer_starts[k + 1] as u32
    }

    pub fn layer_sizes(&self) -> Vec<u64> {
        self.layer_starts.windows(2).map(|w| (w[1] - w[0]) as u64).collect()
    }

    /// `|B_r|` for `r <= radius`.
    pub fn volume(&self, r: u32) -> u64 {
        self.layer_starts[r.min(self.radius) as usize + 1] as u64
    }

    pub fn growth(&self) -> GrowthTable {
        GrowthTable {
            entries: (0..=self.radius).map(|r| (r, self.volume(r))).collect(),
        }
    }

    pub fn ids(&self) -> impl Iterator<Item = VertexId> {
        (0..self.len() as u32).map(VertexId)
    }

    /// Ids of `B_r` (a prefix of the id range).
    pub fn sub_ball(&self, r: u32) -> Range<u32> {
        0..self.volume(r) as u32
    }

    pub fn word_length(&self, id: VertexId) -> u32 {
        (self.layer_starts.partition_point(|&start| start <= id.index()) - 1) as u32
    }

    pub fn encoding(&self, id: VertexId) -> &[u8] {
        &self.encodings[id.index()]
    }

    pub fn element(&self, id: VertexId) -> GroupElement {
        self.group
            .decode(self.encoding(id))
            .expect("ball stores valid encodings")
    }

    pub fn id_of(&self, element: &GroupElement) -> Option<VertexId> {
        self.id_of_encoding(&self.group.encode(element))
    }

    pub fn id_of_encoding(&self, encoding: &[u8]) -> Option<VertexId> {
        self.encodings.get_index_of(encoding).map(|i| VertexId(i as u32))
    }

    pub fn identity(&self) -> VertexId {
        VertexId(0)
    }

    /// `id · s_j` for every generator `s_j`; `None` when it leaves the ball.
    pub fn neighbors(&self, id: VertexId) -> impl Iterator<Item = Option<VertexId>> + '_ {
        self.neighbor_row(id)
            .iter()
            .map(|&n| (n != OUTSIDE).then_some(VertexId(n)))
    }

    /// Neighbors inside the ball.
    pub fn inner_neighbors(&self, id: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.neighbor_row(id)
            .iter()
            .filter(|&&n| n != OUTSIDE)
            .map(|&n| VertexId(n))
    }

    pub fn neighbor(&self, id: VertexId, generator: usize) -> Option<VertexId> {
        let n = self.neighbor_row(id)[generator];
        (n != OUTSIDE).then_some(VertexId(n))
    }

    fn neighbor_row(&self, id: VertexId) -> &[u32] {
        let s = self.group.generator_count();
        &self.neighbors[id.index() * s..(id.index() + 1) * s]
    }

    /// Members of the ball satisfying `pred`, as a vertex set.
    pub fn select(&self, mut pred: impl FnMut(VertexId, &GroupElement) -> bool) -> VertexSet {
        let mut set = VertexSet::new(self.len());
        for id in self.ids() {
            if pred(id, &self.element(id)) {
                set.insert(id);
            }
        }
        set
    }

    pub fn empty_set(&self) -> VertexSet {
        VertexSet::new(self.len())
    }

    /// Resolve elements to ids, failing on the first element outside the ball.
    pub fn resolve<'a>(
        &self,
        elements: impl IntoIterator<Item = &'a GroupElement>,
    ) -> Result<Vec<VertexId>, GroupElement> {
        elements
            .into_iter()
            .map(|e| self.id_of(e).ok_or_else(|| e.clone()))
            .collect()
    }
}

impl std::fmt::Debug for Ball {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Ball")
            .field("group", &self.group.name())
            .field("radius", &self.radius)
            .field("layers", &self.layer_sizes())
            .finish()
    }
}

enum Product {
    Known(u32),
    Outside(Box<[u8]>),
    Missing,
}

/// Right-multiply every element of `range` by every generator. Products not yet
/// in the ball are kept only when `keep_new` is set.
fn expand(
    group: &Group,
    encodings: &IndexSet<Box<[u8]>>,
    range: Range<usize>,
    keep_new: bool,
) -> Result<Vec<Vec<Product>>, GroupError> {
    let generators = group.generators();
    range
        .into_par_iter()
        .map(|i| {
            let x = group.decode(&encodings[i])?;
            let mut buf = Vec::with_capacity(32);
            Ok(generators
                .iter()
                .map(|s| {
                    buf.clear();
                    group.encode_into(&group.multiply_unchecked(&x, s), &mut buf);
                    match encodings.get_index_of(&buf[..]) {
                        Some(id) => Product::Known(id as u32),
                        None if keep_new => Product::Outside(buf.as_slice().into()),
                        None => Product::Missing,
                    }
                })
                .collect())
        })
        .collect()
}

/// Enumerate `B_R` and return its growth table.
pub fn growth_table(group: &Arc<Group>, max_radius: u32) -> Result<GrowthTable, BallError> {
    Ok(Ball::enumerate(group, max_radius)?.growth())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ball(spec: &str, r: u32) -> Ball {
        Ball::enumerate(&Group::parse(spec).unwrap(), r).unwrap()
    }

    #[test]
    fn lattice_growth() {
        assert_eq!(ball("Z^2", 3).growth().volumes(), vec![1, 5, 13, 25]);
        assert_eq!(ball("Z", 4).growth().volumes(), vec![1, 3, 5, 7, 9]);
    }

    #[test]
    fn free_group_growth() {
        let b = ball("F2", 5);
        for n in 0..=5u32 {
            assert_eq!(b.volume(n), 2 * 3u64.pow(n) - 1);
        }
    }

    #[test]
    fn lamplighter_unit_ball() {
        assert_eq!(ball("Z2wrZ", 1).volume(1), 9);
    }

    #[test]
    fn cyclic_group_saturates() {
        assert_eq!(ball("Z5", 4).growth().volumes(), vec![1, 3, 5, 5, 5]);
    }

    #[test]
    fn layers_are_sorted_and_disjoint() {
        let b = ball("F2xZ", 3);
        for k in 0..=3 {
            let ids: Vec<_> = b.layer(k).map(VertexId).collect();
            for w in ids.windows(2) {
                assert!(b.encoding(w[0]) < b.encoding(w[1]));
            }
            for id in ids {
                assert_eq!(b.word_length(id), k);
            }
        }
    }

    #[test]
    fn neighbor_table_matches_group_law() {
        let b = ball("H3", 3);
        let g = b.group().clone();
        for id in b.ids() {
            let x = b.element(id);
            for (j, n) in b.neighbors(id).enumerate() {
                let y = g.multiply(&x, &g.generators()[j]).unwrap();
                assert_eq!(n, b.id_of(&y));
                if b.word_length(id) < 3 {
                    assert!(n.is_some());
                }
            }
        }
    }

    #[test]
    fn memory_budget_refuses_with_feasible_radius() {
        let g = Group::parse("F2").unwrap();
        let err = Ball::enumerate_with(&g, 10, BallOptions { memory_budget: 20_000 }).unwrap_err();
        match err {
            BallError::MemoryBudget { requested, feasible, .. } => {
                assert_eq!(requested, 10);
                assert!(feasible < 10);
                // The reported radius really fits.
                Ball::enumerate_with(&g, feasible, BallOptions { memory_budget: 20_000 }).unwrap();
            }
            other => panic!("unexpected {other}"),
        }
    }
}
