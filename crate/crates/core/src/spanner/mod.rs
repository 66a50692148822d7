//! Low-stretch, low-hop spanners over a sample.

pub mod path_dag;
pub mod tree;

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::metric::Metric;
use crate::net::NetHierarchy;

pub use path_dag::{build_path_dag, WeightedPathDag};
pub use tree::{augment_tree, AugmentedTreeDag, RootedTree};

/// Largest sample on which [`SpannerMode::Auto`] certifies every pair.
pub const CERTIFY_LIMIT: usize = 2048;

/// Hop budget `⌈8·log2(n+1)⌉` that every certified pair must meet.
pub fn hop_bound(n: usize) -> usize {
    libm::ceil(8.0 * libm::log2(n as f64 + 1.0)) as usize
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum SpannerMode {
    /// [`SpannerMode::Certified`] up to [`CERTIFY_LIMIT`] points, else [`SpannerMode::Eager`].
    #[default]
    Auto,
    /// Start from the net tree and its shortcuts, then add a cross edge for
    /// every pair that has no up-cross-down path within stretch and hops.
    Certified,
    /// Connect all net points of a level within `(4 + 16/δ)·r_ℓ`. Stretch
    /// follows from the net radii; the hop count is bounded structurally.
    Eager,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpannerEdge {
    pub i: usize,
    pub j: usize,
    pub length: f64,
}

/// Undirected spanner over samples `0..n`.
///
/// Every pair `(u, v)` is joined by a path of length at most
/// `(1+δ)·ρ(u, v)` using at most `hop_diameter ≤ hop_bound` edges.
#[derive(Debug, Clone)]
pub struct SpannerGraph {
    n: usize,
    edges: Vec<SpannerEdge>,
    adjacency: Vec<Vec<(usize, f64)>>,
    delta: f64,
    max_degree: usize,
    hop_bound: usize,
    hop_diameter: usize,
    certified: bool,
}

pub fn build_spanner<M: Metric>(d: &Dataset<M>, delta: f64) -> Result<SpannerGraph> {
    build_spanner_with(d, delta, SpannerMode::Auto)
}

/// An ancestor in the compressed tree reached by the fewest upward hops,
/// shortest length among those.
#[derive(Debug, Clone, Copy)]
struct Ascent {
    node: usize,
    hops: usize,
    length: f64,
}

pub fn build_spanner_with<M: Metric>(
    d: &Dataset<M>,
    delta: f64,
    mode: SpannerMode,
) -> Result<SpannerGraph> {
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(Error::Domain("spanner stretch slack must lie in (0, 1/2]"));
    }
    let n = d.len();
    let bound = hop_bound(n);
    if n == 1 {
        return Ok(SpannerGraph::from_edges(n, BTreeSet::new(), d, delta, bound, 0, true));
    }
    let dist = |i: usize, j: usize| d.dist(i, j);
    let net = NetHierarchy::build(n, dist);
    let parents = (0..n)
        .map(|x| match net.parent(x) {
            Some(p) => Some(p),
            None if x == 0 => None,
            None => Some(net.representative(x)),
        })
        .collect();
    let tree = RootedTree::from_parents(parents).expect("net tree is rooted at item 0");
    let dag = augment_tree(&tree);

    let mut edges = BTreeSet::new();
    for v in 0..n {
        for &a in dag.up(v) {
            edges.insert(key(v, a));
        }
    }
    let ascents: Vec<Vec<Ascent>> = (0..n).map(|u| ascents(&dag, u, &dist)).collect();

    let certified = match mode {
        SpannerMode::Certified => true,
        SpannerMode::Eager => false,
        SpannerMode::Auto => n <= CERTIFY_LIMIT,
    };
    let hop_diameter = if certified {
        certify(n, &ascents, &mut edges, &dist, delta, bound)
    } else {
        let gamma = 4.0 + 16.0 / delta;
        for level in 0..net.num_levels() {
            cross_edges(&net, level, gamma * net.radius(level), &dist, &mut edges);
        }
        let climb = ascents
            .iter()
            .flat_map(|a| a.iter().map(|s| s.hops))
            .max()
            .unwrap_or(0);
        (2 * climb + 1).min(bound)
    };
    Ok(SpannerGraph::from_edges(n, edges, d, delta, bound, hop_diameter, certified))
}

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Tree ancestors of `u`, itself first, each with its cheapest upward route.
fn ascents(
    dag: &AugmentedTreeDag,
    u: usize,
    dist: &impl Fn(usize, usize) -> f64,
) -> Vec<Ascent> {
    // Layered search over upward edges: fewest hops first, then length.
    let mut reach: Vec<Ascent> = vec![Ascent { node: u, hops: 0, length: 0.0 }];
    let mut frontier = 0;
    while frontier < reach.len() {
        let layer_end = reach.len();
        for k in frontier..layer_end {
            let Ascent { node, hops, length } = reach[k];
            for &a in dag.up(node) {
                let cand = length + dist(node, a);
                match reach.iter_mut().find(|s| s.node == a) {
                    Some(s) if s.hops == hops + 1 && cand < s.length => s.length = cand,
                    Some(_) => {}
                    None => reach.push(Ascent { node: a, hops: hops + 1, length: cand }),
                }
            }
        }
        frontier = layer_end;
    }
    let mut chain = vec![u];
    while let Some(p) = dag.tree().parent(*chain.last().unwrap()) {
        chain.push(p);
    }
    chain
        .into_iter()
        .map(|a| *reach.iter().find(|s| s.node == a).expect("ancestors are reachable"))
        .collect()
}

/// Adds a cross edge for every pair lacking a valid up-cross-down path and
/// returns the largest hop count used. The cross edge may join ancestors
/// from different levels.
fn certify(
    n: usize,
    chains: &[Vec<Ascent>],
    edges: &mut BTreeSet<(usize, usize)>,
    dist: &impl Fn(usize, usize) -> f64,
    delta: f64,
    bound: usize,
) -> usize {
    let mut worst = 0;
    for u in 0..n {
        for v in (u + 1)..n {
            let limit = (1.0 + delta) * dist(u, v);
            let mut fallback: Option<((usize, usize), usize, usize)> = None;
            let mut found = None;
            'search: for (ia, a) in chains[u].iter().enumerate().rev() {
                for (ib, b) in chains[v].iter().enumerate().rev() {
                    let climb = a.length + b.length;
                    if climb > limit {
                        continue;
                    }
                    if a.node == b.node {
                        if a.hops + b.hops <= bound {
                            found = Some(a.hops + b.hops);
                            break 'search;
                        }
                        continue;
                    }
                    let hops = a.hops + b.hops + 1;
                    if hops > bound || !edges.contains(&key(a.node, b.node)) && fallback.is_some_and(|f| f.2 >= ia + ib) {
                        continue;
                    }
                    if climb + dist(a.node, b.node) > limit {
                        continue;
                    }
                    if edges.contains(&key(a.node, b.node)) {
                        found = Some(hops);
                        break 'search;
                    }
                    fallback = Some((key(a.node, b.node), hops, ia + ib));
                }
            }
            let hops = match (found, fallback) {
                (Some(h), _) => h,
                (None, Some((e, h, _))) => {
                    edges.insert(e);
                    h
                }
                (None, None) => {
                    edges.insert(key(u, v));
                    1
                }
            };
            worst = worst.max(hops);
        }
    }
    worst
}

/// Pairs of level members within `reach`, found by descending the hierarchy.
fn cross_edges(
    net: &NetHierarchy,
    level: usize,
    reach: f64,
    dist: &impl Fn(usize, usize) -> f64,
    edges: &mut BTreeSet<(usize, usize)>,
) {
    let top = net.top_level();
    for &a in net.members(level) {
        // Positions of candidates at the current level; members below a
        // level-k member lie within 2·r_k of it.
        let mut frontier = vec![0usize];
        for k in ((level + 1)..=top).rev() {
            let mut next = Vec::new();
            for &p in &frontier {
                for &c in net.children(k, p) {
                    let z = net.members(k - 1)[c];
                    let slack = if k - 1 > level { 2.0 * net.radius(k - 1) } else { 0.0 };
                    if dist(a, z) <= reach + slack {
                        next.push(c);
                    }
                }
            }
            frontier = next;
        }
        if level == top {
            continue;
        }
        for &c in &frontier {
            let b = net.members(level)[c];
            if b > a {
                edges.insert((a, b));
            }
        }
    }
}

impl SpannerGraph {
    fn from_edges<M: Metric>(
        n: usize,
        keys: BTreeSet<(usize, usize)>,
        d: &Dataset<M>,
        delta: f64,
        hop_bound: usize,
        hop_diameter: usize,
        certified: bool,
    ) -> SpannerGraph {
        let edges: Vec<SpannerEdge> = keys
            .into_iter()
            .map(|(i, j)| SpannerEdge { i, j, length: d.dist(i, j) })
            .collect();
        let mut adjacency = vec![Vec::new(); n];
        for e in &edges {
            adjacency[e.i].push((e.j, e.length));
            adjacency[e.j].push((e.i, e.length));
        }
        let max_degree = adjacency.iter().map(Vec::len).max().unwrap_or(0);
        SpannerGraph {
            n,
            edges,
            adjacency,
            delta,
            max_degree,
            hop_bound,
            hop_diameter,
            certified,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Edges with `i < j`, sorted.
    pub fn edges(&self) -> &[SpannerEdge] {
        &self.edges
    }

    pub fn neighbors(&self, u: usize) -> &[(usize, f64)] {
        &self.adjacency[u]
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// The hop budget `⌈8·log2(n+1)⌉`.
    pub fn hop_bound(&self) -> usize {
        self.hop_bound
    }

    /// Hops sufficient for every pair: measured over all pairs when
    /// [`SpannerGraph::certified`], otherwise a structural upper bound.
    pub fn hop_diameter(&self) -> usize {
        self.hop_diameter
    }

    pub fn certified(&self) -> bool {
        self.certified
    }

    /// Shortest path lengths from `source` using at most `max_hops` edges.
    pub fn hop_limited_distances(&self, source: usize, max_hops: usize) -> Vec<f64> {
        let mut best = vec![f64::INFINITY; self.n];
        best[source] = 0.0;
        let mut layer = best.clone();
        let mut active = vec![source];
        let mut touched = vec![false; self.n];
        for _ in 0..max_hops {
            let mut next_active = Vec::new();
            let mut next = layer.clone();
            for &u in &active {
                for &(v, w) in &self.adjacency[u] {
                    let cand = layer[u] + w;
                    if cand < next[v] {
                        next[v] = cand;
                        if !touched[v] {
                            touched[v] = true;
                            next_active.push(v);
                        }
                    }
                }
            }
            for &v in &next_active {
                touched[v] = false;
                best[v] = best[v].min(next[v]);
            }
            if next_active.is_empty() {
                break;
            }
            layer = next;
            active = next_active;
        }
        best
    }

    /// Largest ratio of hop-limited spanner distance to metric distance over
    /// all pairs at positive distance, using [`SpannerGraph::hop_bound`] hops.
    pub fn measured_stretch<M: Metric>(&self, d: &Dataset<M>) -> f64 {
        let mut worst = 1.0f64;
        for u in 0..self.n {
            let reach = self.hop_limited_distances(u, self.hop_bound);
            for (v, &r) in reach.iter().enumerate().skip(u + 1) {
                let t = d.dist(u, v);
                if t > 0.0 {
                    worst = worst.max(r / t);
                } else if r > 0.0 {
                    worst = f64::INFINITY;
                }
            }
        }
        worst
    }
}
