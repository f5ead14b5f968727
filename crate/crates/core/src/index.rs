//! Exact nearest-neighbour index (kd-tree) over a point cloud.
//!
//! All queries return exactly what a brute-force scan would: distances are
//! compared as squared Euclidean distances and ties break toward the lowest
//! point index.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::point::{Point, PointCloud};

const LEAF_SIZE: usize = 8;

#[derive(Clone, Debug)]
enum Node {
    Leaf { start: u32, end: u32 },
    Split { axis: u8, value: f64, left: u32, right: u32 },
}

#[derive(Clone, Debug)]
pub struct NnIndex {
    cloud: PointCloud,
    /// Point indices, permuted so every node owns a contiguous range.
    order: Vec<u32>,
    nodes: Vec<Node>,
}

/// Candidate ordered by `(squared distance, index)`.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Cand {
    d2: f64,
    idx: u32,
}

impl Eq for Cand {}

impl PartialOrd for Cand {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cand {
    fn cmp(&self, other: &Self) -> Ordering {
        self.d2.total_cmp(&other.d2).then(self.idx.cmp(&other.idx))
    }
}

impl NnIndex {
    pub fn build(cloud: PointCloud) -> Result<Self> {
        if cloud.is_empty() {
            return Err(Error::EmptySet);
        }
        let mut order: Vec<u32> = (0..cloud.len() as u32).collect();
        let mut nodes = Vec::with_capacity(2 * cloud.len() / LEAF_SIZE + 1);
        build_rec(cloud.points(), &mut order, 0, &mut nodes);
        Ok(Self { cloud, order, nodes })
    }

    pub fn cloud(&self) -> &PointCloud {
        &self.cloud
    }

    pub fn points(&self) -> &[Point] {
        self.cloud.points()
    }

    pub fn len(&self) -> usize {
        self.cloud.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cloud.is_empty()
    }

    /// Nearest point as `(index, squared distance)`.
    pub fn nearest(&self, q: &Point) -> (usize, f64) {
        let mut best = Cand { d2: f64::INFINITY, idx: u32::MAX };
        self.nearest_rec(0, q, &mut best);
        (best.idx as usize, best.d2)
    }

    fn nearest_rec(&self, node: usize, q: &Point, best: &mut Cand) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start as usize..end as usize] {
                    let c = Cand { d2: self.points()[i as usize].dist2(q), idx: i };
                    if c < *best {
                        *best = c;
                    }
                }
            }
            Node::Split { axis, value, left, right } => {
                let diff = q[axis as usize] - value;
                let (near, far) = if diff <= 0.0 { (left, right) } else { (right, left) };
                self.nearest_rec(near as usize, q, best);
                // Equal bounds are still visited so index ties resolve exactly.
                if diff * diff <= best.d2 {
                    self.nearest_rec(far as usize, q, best);
                }
            }
        }
    }

    /// The `k` nearest points as `(index, squared distance)`, closest first.
    pub fn k_nearest(&self, q: &Point, k: usize) -> Vec<(usize, f64)> {
        if k == 0 {
            return Vec::new();
        }
        let mut heap = BinaryHeap::with_capacity(k + 1);
        self.knn_rec(0, q, k, &mut heap);
        let mut out: Vec<Cand> = heap.into_vec();
        out.sort();
        out.into_iter().map(|c| (c.idx as usize, c.d2)).collect()
    }

    fn knn_rec(&self, node: usize, q: &Point, k: usize, heap: &mut BinaryHeap<Cand>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start as usize..end as usize] {
                    let c = Cand { d2: self.points()[i as usize].dist2(q), idx: i };
                    if heap.len() < k {
                        heap.push(c);
                    } else if c < *heap.peek().unwrap() {
                        heap.pop();
                        heap.push(c);
                    }
                }
            }
            Node::Split { axis, value, left, right } => {
                let diff = q[axis as usize] - value;
                let (near, far) = if diff <= 0.0 { (left, right) } else { (right, left) };
                self.knn_rec(near as usize, q, k, heap);
                if heap.len() < k || diff * diff <= heap.peek().unwrap().d2 {
                    self.knn_rec(far as usize, q, k, heap);
                }
            }
        }
    }

    /// Indices of all points with `dist2(p, q) <= radius²`, ascending.
    pub fn within(&self, q: &Point, radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        let r2 = radius * radius;
        self.within_rec(0, q, r2, &mut out);
        out.sort_unstable();
        out
    }

    fn within_rec(&self, node: usize, q: &Point, r2: f64, out: &mut Vec<usize>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start as usize..end as usize] {
                    if self.points()[i as usize].dist2(q) <= r2 {
                        out.push(i as usize);
                    }
                }
            }
            Node::Split { axis, value, left, right } => {
                let diff = q[axis as usize] - value;
                let (near, far) = if diff <= 0.0 { (left, right) } else { (right, left) };
                self.within_rec(near as usize, q, r2, out);
                if diff * diff <= r2 {
                    self.within_rec(far as usize, q, r2, out);
                }
            }
        }
    }
}

fn build_rec(points: &[Point], order: &mut [u32], offset: usize, nodes: &mut Vec<Node>) -> u32 {
    let id = nodes.len() as u32;
    if order.len() <= LEAF_SIZE {
        nodes.push(Node::Leaf { start: offset as u32, end: (offset + order.len()) as u32 });
        return id;
    }
    let dim = points[0].dim();
    let axis = (0..dim).max_by(|&a, &b| spread(points, order, a).total_cmp(&spread(points, order, b))).unwrap();
    if spread(points, order, axis) == 0.0 {
        // All points coincide.
        nodes.push(Node::Leaf { start: offset as u32, end: (offset + order.len()) as u32 });
        return id;
    }
    let mid = order.len() / 2;
    order.select_nth_unstable_by(mid, |&a, &b| points[a as usize][axis].total_cmp(&points[b as usize][axis]));
    let value = points[order[mid] as usize][axis];
    nodes.push(Node::Split { axis: axis as u8, value, left: 0, right: 0 });
    let (lo, hi) = order.split_at_mut(mid);
    let left = build_rec(points, lo, offset, nodes);
    let right = build_rec(points, hi, offset + mid, nodes);
    nodes[id as usize] = Node::Split { axis: axis as u8, value, left, right };
    id
}

fn spread(points: &[Point], order: &[u32], axis: usize) -> f64 {
    let (lo, hi) = order.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
        let v = points[i as usize][axis];
        (lo.min(v), hi.max(v))
    });
    hi - lo
}
