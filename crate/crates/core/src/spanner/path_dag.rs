//! Biased skip-list shortcuts over a weighted path.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Shortcut DAG over an ordered path `x_0, …, x_{n-1}` rooted at `x_0`.
///
/// Every edge `(from, to)` has `to < from`. Node `x_i` reaches `x_0` in at
/// most `4·(1 + log2(W/w_i))` hops, `W` being the total weight, and every
/// node has total degree at most 3.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedPathDag {
    weights: Vec<f64>,
    edges: Vec<(usize, usize)>,
}

#[derive(Clone, Copy)]
enum Role {
    Root,
    /// Left or single child: its left end links to the parent's left end.
    UnderLeft(usize),
    /// Right child: its left end links to the left sibling's right end.
    UnderSibling(usize),
}

/// Recursive middle partition: a subpath `[lo, hi]` links its right end to
/// its left end and to the right end of its last child; the interior
/// `(lo, hi)` splits into two subpaths whose interiors each carry at most
/// half the interior weight (a single child when there are ≤ 3 interior nodes).
pub fn build_path_dag(weights: &[f64]) -> Result<WeightedPathDag> {
    if weights.is_empty() {
        return Err(Error::Domain("path DAG over an empty path"));
    }
    if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
        return Err(Error::Domain("path DAG weights must be positive and finite"));
    }
    let n = weights.len();
    let mut prefix = vec![0.0; n + 1];
    for (i, w) in weights.iter().enumerate() {
        prefix[i + 1] = prefix[i] + w;
    }
    let mut edges = Vec::new();
    let mut stack = vec![(0usize, n - 1, Role::Root)];
    while let Some((lo, hi, role)) = stack.pop() {
        if hi > lo {
            edges.push((hi, lo));
        }
        match role {
            Role::Root => {}
            Role::UnderLeft(target) | Role::UnderSibling(target) => edges.push((lo, target)),
        }
        if hi <= lo + 1 {
            continue;
        }
        let (a, b) = (lo + 1, hi - 1);
        if b - a + 1 <= 3 {
            edges.push((hi, b));
            stack.push((a, b, Role::UnderLeft(lo)));
            continue;
        }
        // Split after the first `s` with interior weight of [a, s] ≥ half,
        // clamped so both children keep a non-empty interior-or-ends shape.
        let half = (prefix[b + 1] - prefix[a]) / 2.0;
        let mut s = a;
        while s < b && prefix[s + 1] - prefix[a] < half {
            s += 1;
        }
        let s = s.clamp(a + 1, b - 2);
        // Left child [a, s], right child [s+1, b].
        let (left, right) = ((a, s), (s + 1, b));
        // The left subpath's interior is (a, s), which excludes x_s, so its
        // weight is below half; symmetrically for the right.
        edges.push((hi, right.1));
        stack.push((right.0, right.1, Role::UnderSibling(left.1)));
        stack.push((left.0, left.1, Role::UnderLeft(lo)));
    }
    edges.sort_unstable();
    edges.dedup();
    Ok(WeightedPathDag {
        weights: weights.to_vec(),
        edges,
    })
}

impl WeightedPathDag {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Directed edges `(from, to)`, `to < from`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// In-degree plus out-degree of every node.
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.len()];
        for &(a, b) in &self.edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        deg
    }

    /// Hop count from every node to `x_0` along directed edges.
    pub fn hops_to_root(&self) -> Vec<usize> {
        let n = self.len();
        let mut rev: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(a, b) in &self.edges {
            rev[b].push(a);
        }
        let mut hops = vec![usize::MAX; n];
        hops[0] = 0;
        let mut queue = VecDeque::from([0usize]);
        while let Some(u) = queue.pop_front() {
            for &v in &rev[u] {
                if hops[v] == usize::MAX {
                    hops[v] = hops[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        hops
    }
}
