use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::Vector3;

const LEAF_SIZE: usize = 8;

#[derive(Clone, Debug)]
enum Node {
    Leaf { start: usize, end: usize },
    Split { axis: usize, value: f64, left: usize, right: usize },
}

/// Static kd-tree over 3D points answering exact k-nearest queries under any
/// distance that is bounded below by `scale * |axis difference|`.
#[derive(Clone, Debug)]
pub(crate) struct KdTree {
    points: Vec<Vector3<f64>>,
    perm: Vec<usize>,
    nodes: Vec<Node>,
}

#[derive(Clone, Copy, Debug)]
struct Candidate {
    dist: f64,
    index: usize,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist
            .total_cmp(&other.dist)
            .then(self.index.cmp(&other.index))
    }
}

impl KdTree {
    pub(crate) fn new(points: Vec<Vector3<f64>>) -> Self {
        let mut tree = KdTree {
            perm: (0..points.len()).collect(),
            points,
            nodes: Vec::new(),
        };
        if !tree.points.is_empty() {
            tree.build(0, tree.points.len());
        }
        tree
    }

    fn build(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let axis = (0..3)
            .max_by(|&a, &b| self.spread(start, end, a).total_cmp(&self.spread(start, end, b)))
            .unwrap_or(0);
        let mid = start + (end - start) / 2;
        let pts = &self.points;
        self.perm[start..end].select_nth_unstable_by(mid - start, |&i, &j| {
            pts[i][axis].total_cmp(&pts[j][axis]).then(i.cmp(&j))
        });
        let value = self.points[self.perm[mid]][axis];
        self.nodes.push(Node::Leaf { start: 0, end: 0 });
        let left = self.build(start, mid);
        let right = self.build(mid, end);
        self.nodes[id] = Node::Split { axis, value, left, right };
        id
    }

    fn spread(&self, start: usize, end: usize, axis: usize) -> f64 {
        let (lo, hi) = self.perm[start..end].iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
            let v = self.points[i][axis];
            (lo.min(v), hi.max(v))
        });
        hi - lo
    }

    /// The `k` indices smallest under `(dist(index), index)`, ascending.
    /// `scale * |query[axis] - point[axis]|` must never exceed `dist`.
    pub(crate) fn nearest<F>(&self, query: &Vector3<f64>, k: usize, scale: f64, dist: F) -> Vec<(usize, f64)>
    where
        F: Fn(usize) -> f64,
    {
        if k == 0 || self.points.is_empty() {
            return Vec::new();
        }
        let mut heap = BinaryHeap::with_capacity(k + 1);
        self.search(0, query, k, scale, &dist, &mut heap);
        let mut out: Vec<Candidate> = heap.into_vec();
        out.sort();
        out.into_iter().map(|c| (c.index, c.dist)).collect()
    }

    fn search<F>(&self, node: usize, query: &Vector3<f64>, k: usize, scale: f64, dist: &F, heap: &mut BinaryHeap<Candidate>)
    where
        F: Fn(usize) -> f64,
    {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &index in &self.perm[start..end] {
                    let c = Candidate { dist: dist(index), index };
                    if heap.len() < k {
                        heap.push(c);
                    } else if c < *heap.peek().expect("heap is full") {
                        heap.pop();
                        heap.push(c);
                    }
                }
            }
            Node::Split { axis, value, left, right } => {
                let delta = query[axis] - value;
                let (near, far) = if delta < 0.0 { (left, right) } else { (right, left) };
                self.search(near, query, k, scale, dist, heap);
                let bound = scale * delta.abs();
                // ties must still be visited: a farther subtree may hold an
                // equal distance with a lower index
                if heap.len() < k || bound <= heap.peek().expect("heap is full").dist {
                    self.search(far, query, k, scale, dist, heap);
                }
            }
        }
    }
}
