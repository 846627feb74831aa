//! A static kd-tree over a point cloud of any ambient dimension.

use super::cloud::{squared_distance, PointCloud};

const LEAF_SIZE: usize = 12;

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone)]
pub struct KdTree {
    dim: usize,
    /// Points in tree order.
    coords: Vec<f64>,
    /// Original index of each point in tree order.
    index: Vec<usize>,
    nodes: Vec<Node>,
}

impl KdTree {
    pub fn new(cloud: &PointCloud) -> Self {
        Self::from_coords(cloud.dim(), cloud.coords())
    }

    pub fn from_coords(dim: usize, coords: &[f64]) -> Self {
        let n = coords.len() / dim;
        let mut order: Vec<usize> = (0..n).collect();
        let mut nodes = Vec::new();
        if n > 0 {
            build(dim, coords, &mut order, 0, n, &mut nodes);
        }
        let mut tree_coords = Vec::with_capacity(coords.len());
        for &i in &order {
            tree_coords.extend_from_slice(&coords[i * dim..(i + 1) * dim]);
        }
        KdTree {
            dim,
            coords: tree_coords,
            index: order,
            nodes,
        }
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    fn point(&self, slot: usize) -> &[f64] {
        &self.coords[slot * self.dim..(slot + 1) * self.dim]
    }

    /// Smallest squared distance from `q` to the set, with the original index
    /// of a point attaining it. The value equals the brute-force minimum of
    /// [`squared_distance`] exactly.
    pub fn nearest(&self, q: &[f64]) -> Option<(f64, usize)> {
        if self.nodes.is_empty() {
            return None;
        }
        let mut best = (f64::INFINITY, usize::MAX);
        self.nearest_in(0, q, &mut best);
        Some((best.0, self.index[best.1]))
    }

    fn nearest_in(&self, node: usize, q: &[f64], best: &mut (f64, usize)) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for slot in start..end {
                    let d = squared_distance(q, self.point(slot));
                    if d < best.0 || (d == best.0 && slot < best.1) {
                        *best = (d, slot);
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = q[axis] - value;
                let (near, far) = if diff < 0.0 {
                    (left, right)
                } else {
                    (right, left)
                };
                self.nearest_in(near, q, best);
                if diff * diff <= best.0 {
                    self.nearest_in(far, q, best);
                }
            }
        }
    }

    /// Calls `visit` with the original index of every point at squared
    /// distance strictly below `radius_sq`.
    pub fn within(&self, q: &[f64], radius_sq: f64, visit: &mut impl FnMut(usize)) {
        if !self.nodes.is_empty() {
            self.within_in(0, q, radius_sq, visit);
        }
    }

    fn within_in(&self, node: usize, q: &[f64], radius_sq: f64, visit: &mut impl FnMut(usize)) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for slot in start..end {
                    if squared_distance(q, self.point(slot)) < radius_sq {
                        visit(self.index[slot]);
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = q[axis] - value;
                let (near, far) = if diff < 0.0 {
                    (left, right)
                } else {
                    (right, left)
                };
                self.within_in(near, q, radius_sq, visit);
                if diff * diff < radius_sq {
                    self.within_in(far, q, radius_sq, visit);
                }
            }
        }
    }

    /// Whether some point lies at squared distance strictly below `radius_sq`.
    pub fn any_within(&self, q: &[f64], radius_sq: f64) -> bool {
        !self.nodes.is_empty() && self.any_in(0, q, radius_sq)
    }

    fn any_in(&self, node: usize, q: &[f64], radius_sq: f64) -> bool {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                (start..end).any(|slot| squared_distance(q, self.point(slot)) < radius_sq)
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = q[axis] - value;
                let (near, far) = if diff < 0.0 {
                    (left, right)
                } else {
                    (right, left)
                };
                self.any_in(near, q, radius_sq)
                    || (diff * diff < radius_sq && self.any_in(far, q, radius_sq))
            }
        }
    }
}

fn build(
    dim: usize,
    coords: &[f64],
    order: &mut [usize],
    start: usize,
    end: usize,
    nodes: &mut Vec<Node>,
) -> usize {
    let id = nodes.len();
    if end - start <= LEAF_SIZE {
        nodes.push(Node::Leaf { start, end });
        return id;
    }
    let slice = &mut order[start..end];
    // split along the widest axis
    let mut axis = 0;
    let mut widest = -1.0;
    for k in 0..dim {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &i in slice.iter() {
            let x = coords[i * dim + k];
            lo = lo.min(x);
            hi = hi.max(x);
        }
        if hi - lo > widest {
            widest = hi - lo;
            axis = k;
        }
    }
    if widest <= 0.0 {
        nodes.push(Node::Leaf { start, end });
        return id;
    }
    let mid = slice.len() / 2;
    slice.select_nth_unstable_by(mid, |&a, &b| {
        coords[a * dim + axis].total_cmp(&coords[b * dim + axis])
    });
    let value = coords[slice[mid] * dim + axis];
    nodes.push(Node::Leaf { start: 0, end: 0 });
    let left = build(dim, coords, order, start, start + mid, nodes);
    let right = build(dim, coords, order, start + mid, end, nodes);
    nodes[id] = Node::Split {
        axis,
        value,
        left,
        right,
    };
    id
}
