//! Exact 2D k-nearest-neighbour index over edge pixels.
//!
//! A balanced k-d tree built by median splits. Queries are exact and match
//! brute force including tie handling: neighbours are ordered by squared
//! distance with the insertion index breaking ties, and subtrees are pruned
//! only when strictly farther than the current k-th candidate.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::edgemap::EdgeMap;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
struct Node {
    point: usize,
    axis: u8,
    left: i32,
    right: i32,
}

/// Spatial index over lidar edge pixels in pixel coordinates.
#[derive(Debug, Clone)]
pub struct NearestNeighborIndex {
    points: Vec<[f64; 2]>,
    nodes: Vec<Node>,
    root: i32,
}

/// One k-NN result: the point's insertion index and its squared pixel
/// distance to the query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub dist2: f64,
}

impl Neighbor {
    pub fn distance(&self) -> f64 {
        self.dist2.sqrt()
    }
}

// Max-heap entry ordered by (dist2, index); the heap keeps the k best.
#[derive(PartialEq)]
struct HeapEntry {
    dist2: f64,
    index: usize,
}

impl Eq for HeapEntry {}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist2
            .partial_cmp(&other.dist2)
            .unwrap()
            .then(self.index.cmp(&other.index))
    }
}

impl NearestNeighborIndex {
    /// Indexes all edge pixels of `edges` in segment order.
    pub fn build(edges: &EdgeMap) -> Result<Self> {
        let points: Vec<[f64; 2]> = edges.pixels().map(|(u, v)| [u as f64, v as f64]).collect();
        Self::from_points(points)
    }

    pub fn from_points(points: Vec<[f64; 2]>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyEdgeMap);
        }
        let mut indices: Vec<usize> = (0..points.len()).collect();
        let mut nodes = Vec::with_capacity(points.len());
        let root = build_recursive(&points, &mut indices, 0, &mut nodes);
        Ok(NearestNeighborIndex {
            points,
            nodes,
            root,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, index: usize) -> [f64; 2] {
        self.points[index]
    }

    /// The `k` nearest points to `query`, ordered by `(dist2, index)`.
    /// Returns fewer when the index holds fewer than `k` points.
    pub fn knn(&self, query: [f64; 2], k: usize) -> Vec<Neighbor> {
        let k = k.min(self.points.len());
        if k == 0 {
            return Vec::new();
        }
        let mut heap: BinaryHeap<HeapEntry> = BinaryHeap::with_capacity(k + 1);
        self.search(self.root, query, k, &mut heap);
        let mut result: Vec<Neighbor> = heap
            .into_iter()
            .map(|e| Neighbor {
                index: e.index,
                dist2: e.dist2,
            })
            .collect();
        result.sort_by(|a, b| {
            a.dist2
                .partial_cmp(&b.dist2)
                .unwrap()
                .then(a.index.cmp(&b.index))
        });
        result
    }

    pub fn nearest(&self, query: [f64; 2]) -> Neighbor {
        self.knn(query, 1)[0]
    }

    fn search(&self, node: i32, query: [f64; 2], k: usize, heap: &mut BinaryHeap<HeapEntry>) {
        if node < 0 {
            return;
        }
        let n = self.nodes[node as usize];
        let p = self.points[n.point];
        let d2 = (p[0] - query[0]).powi(2) + (p[1] - query[1]).powi(2);
        let entry = HeapEntry {
            dist2: d2,
            index: n.point,
        };
        if heap.len() < k {
            heap.push(entry);
        } else if entry < *heap.peek().unwrap() {
            heap.push(entry);
            heap.pop();
        }

        let axis = n.axis as usize;
        let diff = query[axis] - p[axis];
        let (near, far) = if diff < 0.0 {
            (n.left, n.right)
        } else {
            (n.right, n.left)
        };
        self.search(near, query, k, heap);
        // Visit the far side unless it is strictly beyond the current k-th
        // distance; equality may still hide lower-index ties.
        let worst = heap.peek().unwrap().dist2;
        if heap.len() < k || diff * diff <= worst {
            self.search(far, query, k, heap);
        }
    }
}

fn build_recursive(
    points: &[[f64; 2]],
    indices: &mut [usize],
    depth: usize,
    nodes: &mut Vec<Node>,
) -> i32 {
    if indices.is_empty() {
        return -1;
    }
    let axis = depth % 2;
    let mid = indices.len() / 2;
    // Total order on (coordinate, index) keeps the build deterministic.
    indices.select_nth_unstable_by(mid, |&a, &b| {
        points[a][axis]
            .partial_cmp(&points[b][axis])
            .unwrap()
            .then(a.cmp(&b))
    });
    let point = indices[mid];
    let slot = nodes.len();
    nodes.push(Node {
        point,
        axis: axis as u8,
        left: -1,
        right: -1,
    });
    let (left_slice, rest) = indices.split_at_mut(mid);
    let right_slice = &mut rest[1..];
    let left = build_recursive(points, left_slice, depth + 1, nodes);
    let right = build_recursive(points, right_slice, depth + 1, nodes);
    nodes[slot].left = left;
    nodes[slot].right = right;
    slot as i32
}

/// Brute-force k-NN with the same `(dist2, index)` ordering; the reference
/// the tree is checked against.
pub fn brute_force_knn(points: &[[f64; 2]], query: [f64; 2], k: usize) -> Vec<Neighbor> {
    let mut all: Vec<Neighbor> = points
        .iter()
        .enumerate()
        .map(|(i, p)| Neighbor {
            index: i,
            dist2: (p[0] - query[0]).powi(2) + (p[1] - query[1]).powi(2),
        })
        .collect();
    all.sort_by(|a, b| {
        a.dist2
            .partial_cmp(&b.dist2)
            .unwrap()
            .then(a.index.cmp(&b.index))
    });
    all.truncate(k);
    all
}
