//! Rooted trees shortcut by heavy-path DAGs.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use super::path_dag::build_path_dag;
use crate::error::{Error, Result};

/// A rooted tree on nodes `0..n` given by parent links.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootedTree {
    parent: Vec<Option<usize>>,
    root: usize,
    children: Vec<Vec<usize>>,
    /// Nodes in breadth-first order from the root.
    order: Vec<usize>,
}

impl RootedTree {
    /// Exactly one entry must be `None`; every other node must reach it.
    pub fn from_parents(parent: Vec<Option<usize>>) -> Result<RootedTree> {
        let n = parent.len();
        let mut roots = parent.iter().enumerate().filter(|(_, p)| p.is_none());
        let root = match (roots.next(), roots.next()) {
            (Some((r, _)), None) => r,
            (None, _) => return Err(Error::CyclicTree(0)),
            (Some(_), Some(_)) => return Err(Error::Domain("parent links contain more than one root")),
        };
        let mut children = vec![Vec::new(); n];
        for (v, p) in parent.iter().enumerate() {
            if let Some(p) = *p {
                if p >= n {
                    return Err(Error::Domain("parent index out of range"));
                }
                children[p].push(v);
            }
        }
        let mut order = Vec::with_capacity(n);
        order.push(root);
        let mut head = 0;
        while head < order.len() {
            let u = order[head];
            head += 1;
            order.extend_from_slice(&children[u]);
        }
        if order.len() != n {
            let mut seen = vec![false; n];
            for &u in &order {
                seen[u] = true;
            }
            let stray = (0..n).find(|&v| !seen[v]).unwrap_or(0);
            return Err(Error::CyclicTree(stray));
        }
        Ok(RootedTree {
            parent,
            root,
            children,
            order,
        })
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    /// Children in increasing id order.
    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    /// Largest number of tree edges at one node.
    pub fn max_degree(&self) -> usize {
        (0..self.len())
            .map(|v| self.children[v].len() + usize::from(self.parent[v].is_some()))
            .max()
            .unwrap_or(0)
    }

    /// Number of nodes in every subtree.
    pub fn subtree_sizes(&self) -> Vec<usize> {
        let mut size = vec![1usize; self.len()];
        for &v in self.order.iter().rev() {
            if let Some(p) = self.parent[v] {
                size[p] += size[v];
            }
        }
        size
    }
}

/// A tree plus descendant-to-ancestor shortcut edges.
///
/// The union of tree and shortcut edges has degree at most `p + 3` for base
/// degree `p`, and every node reaches each of its ancestors in `O(log n)`
/// hops moving only upward.
#[derive(Debug, Clone)]
pub struct AugmentedTreeDag {
    tree: RootedTree,
    /// Shortcuts `(descendant, ancestor)` not already present as tree edges.
    added: Vec<(usize, usize)>,
    up: Vec<Vec<usize>>,
    heavy_paths: Vec<Vec<usize>>,
}

/// Decomposes the tree into heavy paths (each continues to the child with
/// the largest subtree, lowest id on ties) and shortcuts every path with
/// [`build_path_dag`]. A path node weighs one plus the sizes of its light
/// child subtrees.
pub fn augment_tree(tree: &RootedTree) -> AugmentedTreeDag {
    let n = tree.len();
    let size = tree.subtree_sizes();
    let heavy: Vec<Option<usize>> = (0..n)
        .map(|v| {
            tree.children(v)
                .iter()
                .copied()
                .max_by(|&a, &b| size[a].cmp(&size[b]).then(b.cmp(&a)))
        })
        .collect();

    let mut heavy_paths = Vec::new();
    let mut added = Vec::new();
    let mut heads = VecDeque::from([tree.root()]);
    while let Some(head) = heads.pop_front() {
        let mut path = vec![head];
        while let Some(h) = heavy[*path.last().unwrap()] {
            path.push(h);
        }
        let weights: Vec<f64> = path
            .iter()
            .map(|&v| {
                let light: usize = tree
                    .children(v)
                    .iter()
                    .filter(|&&c| Some(c) != heavy[v])
                    .map(|&c| size[c])
                    .sum();
                (1 + light) as f64
            })
            .collect();
        let dag = build_path_dag(&weights).expect("weights are positive");
        for &(a, b) in dag.edges() {
            if a != b + 1 {
                added.push((path[a], path[b]));
            }
        }
        for &v in &path {
            for &c in tree.children(v) {
                if Some(c) != heavy[v] {
                    heads.push_back(c);
                }
            }
        }
        heavy_paths.push(path);
    }
    added.sort_unstable();

    let mut up: Vec<Vec<usize>> = vec![Vec::new(); n];
    for v in 0..n {
        if let Some(p) = tree.parent(v) {
            up[v].push(p);
        }
    }
    for &(a, b) in &added {
        up[a].push(b);
    }
    for list in up.iter_mut() {
        list.sort_unstable();
    }
    AugmentedTreeDag {
        tree: tree.clone(),
        added,
        up,
        heavy_paths,
    }
}

impl AugmentedTreeDag {
    pub fn tree(&self) -> &RootedTree {
        &self.tree
    }

    /// Shortcut edges `(descendant, ancestor)`, excluding tree edges.
    pub fn added_edges(&self) -> &[(usize, usize)] {
        &self.added
    }

    /// Heavy paths, each listed from its top node downward.
    pub fn heavy_paths(&self) -> &[Vec<usize>] {
        &self.heavy_paths
    }

    /// Upward neighbours (tree parent and shortcut targets) of `v`.
    pub fn up(&self, v: usize) -> &[usize] {
        &self.up[v]
    }

    /// Base tree degree `p`.
    pub fn base_degree(&self) -> usize {
        self.tree.max_degree()
    }

    /// Largest degree in the union of tree and shortcut edges.
    pub fn max_degree(&self) -> usize {
        let n = self.tree.len();
        let mut deg = vec![0usize; n];
        for v in 0..n {
            for &a in &self.up[v] {
                deg[v] += 1;
                deg[a] += 1;
            }
        }
        deg.into_iter().max().unwrap_or(0)
    }

    /// Fewest upward hops from `v` to each of its ancestors (and to itself,
    /// at 0 hops), as `(ancestor, hops)` pairs in breadth-first order.
    pub fn ancestor_hops(&self, v: usize) -> Vec<(usize, usize)> {
        let mut out = vec![(v, 0usize)];
        let mut head = 0;
        while head < out.len() {
            let (u, h) = out[head];
            head += 1;
            for &a in &self.up[u] {
                if !out.iter().any(|&(w, _)| w == a) {
                    out.push((a, h + 1));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_ancestor_hops(dag: &AugmentedTreeDag) -> usize {
        (0..dag.tree().len())
            .flat_map(|v| dag.ancestor_hops(v).into_iter().map(|(_, h)| h))
            .max()
            .unwrap()
    }

    #[test]
    fn path_graph_is_one_heavy_path() {
        let n: usize = 200;
        let parents = (0..n).map(|v| v.checked_sub(1)).collect();
        let tree = RootedTree::from_parents(parents).unwrap();
        let dag = augment_tree(&tree);
        assert_eq!(dag.heavy_paths().len(), 1);
        let hops = max_ancestor_hops(&dag) as f64;
        assert!(hops <= 4.0 * libm::log2(n as f64 + 1.0));
        assert!(dag.max_degree() <= tree.max_degree() + 3);
    }

    #[test]
    fn star_leaves_reach_root_in_one_hop() {
        let parents = (0..10).map(|v| if v == 0 { None } else { Some(0) }).collect();
        let dag = augment_tree(&RootedTree::from_parents(parents).unwrap());
        for v in 1..10 {
            assert_eq!(dag.ancestor_hops(v), vec![(v, 0), (0, 1)]);
        }
    }

    #[test]
    fn rejects_cycles_and_forests() {
        assert!(matches!(
            RootedTree::from_parents(vec![None, Some(2), Some(1)]),
            Err(Error::CyclicTree(1))
        ));
        assert!(RootedTree::from_parents(vec![Some(1), Some(0)]).is_err());
        assert!(RootedTree::from_parents(vec![None, None]).is_err());
    }
}
