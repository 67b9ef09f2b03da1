//! Kd-tree with incremental (best-first) nearest-neighbour enumeration.
//!
//! The iterator yields training indices in exactly the order produced by the
//! brute-force sort: a heap holds both unexpanded nodes, keyed by the squared
//! distance from the query to their bounding box, and individual points, keyed
//! by their squared distance. On equal keys nodes are expanded before points
//! are emitted, so every point sharing a distance is in the heap before the
//! first of them is released, and those are then released by index.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use crate::dataset::LabeledDataset;
use crate::search::NormSpec;

const LEAF_SIZE: usize = 12;

#[derive(Debug, Clone)]
struct Node {
    lo: Vec<f64>,
    hi: Vec<f64>,
    /// Range into `KdTree::perm`.
    start: usize,
    end: usize,
    children: Option<(usize, usize)>,
}

/// Static Euclidean kd-tree over a dataset's points.
#[derive(Debug, Clone)]
pub struct KdTree {
    dim: usize,
    coords: Vec<f64>,
    perm: Vec<usize>,
    nodes: Vec<Node>,
}

impl KdTree {
    pub fn build(data: &LabeledDataset) -> Self {
        Self::from_points(data.dim(), data.coords().to_vec())
    }

    /// Builds from a flat row-major buffer of `dim`-dimensional points.
    pub fn from_points(dim: usize, coords: Vec<f64>) -> Self {
        assert!(dim > 0 && coords.len() % dim == 0, "malformed point buffer");
        let n = coords.len() / dim;
        let mut tree = Self {
            dim,
            coords,
            perm: (0..n).collect(),
            nodes: Vec::new(),
        };
        if n > 0 {
            tree.build_node(0, n);
        }
        tree
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    fn build_node(&mut self, start: usize, end: usize) -> usize {
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for &i in &self.perm[start..end] {
            for (j, &v) in self.point(i).iter().enumerate() {
                lo[j] = lo[j].min(v);
                hi[j] = hi[j].max(v);
            }
        }
        let id = self.nodes.len();
        self.nodes.push(Node {
            lo: lo.clone(),
            hi: hi.clone(),
            start,
            end,
            children: None,
        });
        let (axis, spread) = (0..self.dim)
            .map(|j| (j, hi[j] - lo[j]))
            .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if end - start <= LEAF_SIZE || spread <= 0.0 {
            return id;
        }
        let mid = start + (end - start) / 2;
        {
            let dim = self.dim;
            let coords = &self.coords;
            self.perm[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
                coords[a * dim + axis]
                    .total_cmp(&coords[b * dim + axis])
                    .then(a.cmp(&b))
            });
        }
        let left = self.build_node(start, mid);
        let right = self.build_node(mid, end);
        self.nodes[id].children = Some((left, right));
        id
    }

    /// Squared distance from `q` to the node's bounding box, accumulated in the
    /// same order as [`NormSpec::key`] so it never exceeds any contained point's key.
    fn box_key(&self, node: &Node, q: &[f64]) -> f64 {
        q.iter()
            .zip(node.lo.iter().zip(&node.hi))
            .map(|(&x, (&lo, &hi))| {
                let gap = if x < lo {
                    lo - x
                } else if x > hi {
                    x - hi
                } else {
                    0.0
                };
                gap * gap
            })
            .sum()
    }

    /// Lazily enumerates all points in nondecreasing distance from `query`.
    pub fn iter_nearest<'a>(&'a self, query: &'a [f64]) -> NearestIter<'a> {
        assert_eq!(query.len(), self.dim, "query dimension mismatch");
        let mut heap = BinaryHeap::new();
        if !self.nodes.is_empty() {
            heap.push(Reverse(Entry {
                key: self.box_key(&self.nodes[0], query),
                kind: Kind::Node,
                id: 0,
            }));
        }
        NearestIter {
            tree: self,
            query,
            heap,
        }
    }

    /// The `k` nearest indices in order.
    pub fn nearest(&self, query: &[f64], k: usize) -> Vec<usize> {
        self.iter_nearest(query).take(k).collect()
    }

    /// The full distance-ordered permutation.
    pub fn order(&self, query: &[f64]) -> Vec<usize> {
        self.nearest(query, self.len())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Kind {
    Node,
    Point,
}

#[derive(Debug, Clone, Copy)]
struct Entry {
    key: f64,
    kind: Kind,
    id: usize,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key
            .total_cmp(&other.key)
            .then(self.kind.cmp(&other.kind))
            .then(self.id.cmp(&other.id))
    }
}

/// Iterator returned by [`KdTree::iter_nearest`].
pub struct NearestIter<'a> {
    tree: &'a KdTree,
    query: &'a [f64],
    heap: BinaryHeap<Reverse<Entry>>,
}

impl Iterator for NearestIter<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        while let Some(Reverse(entry)) = self.heap.pop() {
            match entry.kind {
                Kind::Point => return Some(entry.id),
                Kind::Node => {
                    let node = &self.tree.nodes[entry.id];
                    match node.children {
                        Some((l, r)) => {
                            for c in [l, r] {
                                self.heap.push(Reverse(Entry {
                                    key: self.tree.box_key(&self.tree.nodes[c], self.query),
                                    kind: Kind::Node,
                                    id: c,
                                }));
                            }
                        }
                        None => {
                            for &i in &self.tree.perm[node.start..node.end] {
                                self.heap.push(Reverse(Entry {
                                    key: NormSpec::Euclidean.key(self.tree.point(i), self.query),
                                    kind: Kind::Point,
                                    id: i,
                                }));
                            }
                        }
                    }
                }
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::order_by_distance;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_point() {
        let tree = KdTree::from_points(2, vec![3.0, 4.0]);
        assert_eq!(tree.order(&[0.0, 0.0]), vec![0]);
    }

    #[test]
    fn duplicate_points_and_grid_ties() {
        // integer grid with repeated points: many exact ties
        let mut coords = Vec::new();
        for x in 0..6 {
            for y in 0..6 {
                coords.extend_from_slice(&[x as f64, y as f64]);
                coords.extend_from_slice(&[x as f64, y as f64]);
            }
        }
        let n = coords.len() / 2;
        let data = LabeledDataset::from_flat(2, coords.clone(), vec![1; n]).unwrap();
        let tree = KdTree::build(&data);
        for q in [[2.5, 2.5], [0.0, 0.0], [3.0, 1.5], [10.0, -4.0]] {
            assert_eq!(tree.order(&q), order_by_distance(&data, &q, NormSpec::Euclidean).unwrap());
        }
    }

    #[test]
    fn ten_thousand_points_hundred_queries() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 10_000;
        let coords: Vec<f64> = (0..n * 5).map(|_| rng.random::<f64>()).collect();
        let data = LabeledDataset::from_flat(5, coords, vec![1; n]).unwrap();
        let tree = KdTree::build(&data);
        for _ in 0..100 {
            let q: Vec<f64> = (0..5).map(|_| rng.random_range(-0.2..1.2)).collect();
            assert_eq!(tree.order(&q), order_by_distance(&data, &q, NormSpec::Euclidean).unwrap());
        }
    }
}
