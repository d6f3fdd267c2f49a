use alloc::vec::Vec;

use super::EnvPoint;

#[derive(Debug, Clone)]
struct Node {
    point: EnvPoint,
    id: usize,
    axis: u8,
    left: Option<usize>,
    right: Option<usize>,
}

/// Static 2D kd-tree over indexed points.
#[derive(Debug, Clone)]
pub struct KdTree {
    nodes: Vec<Node>,
    root: Option<usize>,
}

fn coord(p: EnvPoint, axis: u8) -> f64 {
    if axis == 0 {
        p.x
    } else {
        p.y
    }
}

impl KdTree {
    pub fn build(points: &[EnvPoint]) -> Self {
        let mut ids: Vec<usize> = (0..points.len()).collect();
        let mut tree = Self { nodes: Vec::with_capacity(points.len()), root: None };
        tree.root = tree.build_rec(points, &mut ids, 0);
        tree
    }

    fn build_rec(&mut self, points: &[EnvPoint], ids: &mut [usize], depth: usize) -> Option<usize> {
        if ids.is_empty() {
            return None;
        }
        let axis = (depth % 2) as u8;
        ids.sort_by(|&a, &b| coord(points[a], axis).total_cmp(&coord(points[b], axis)).then(a.cmp(&b)));
        let mid = ids.len() / 2;
        let id = ids[mid];
        let slot = self.nodes.len();
        self.nodes.push(Node { point: points[id], id, axis, left: None, right: None });
        let (lo, hi) = ids.split_at_mut(mid);
        let left = self.build_rec(points, lo, depth + 1);
        let right = self.build_rec(points, &mut hi[1..], depth + 1);
        self.nodes[slot].left = left;
        self.nodes[slot].right = right;
        Some(slot)
    }

    /// Index of the closest point, lowest index among equals.
    /// Panics on an empty tree.
    pub fn nearest(&self, query: EnvPoint) -> usize {
        let mut best = (f64::INFINITY, usize::MAX);
        self.search(self.root, query, &mut best);
        best.1
    }

    fn search(&self, slot: Option<usize>, q: EnvPoint, best: &mut (f64, usize)) {
        let Some(slot) = slot else { return };
        let node = &self.nodes[slot];
        let d = node.point.distance_squared(q);
        if d < best.0 || (d == best.0 && node.id < best.1) {
            *best = (d, node.id);
        }
        let diff = coord(q, node.axis) - coord(node.point, node.axis);
        let (near, far) = if diff < 0.0 { (node.left, node.right) } else { (node.right, node.left) };
        self.search(near, q, best);
        // `<=` keeps equidistant points on the far side eligible for the tie rule.
        if diff * diff <= best.0 {
            self.search(far, q, best);
        }
    }
}
