//! Greedy nets, net hierarchies and doubling dimension estimates.

use alloc::vec;
use alloc::vec::Vec;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::metric::Metric;

/// Guard against distance sets with absurd dynamic range; halving below the
/// smallest subnormal cannot separate anything further.
const MAX_LEVELS: usize = 1100;

/// Greedy `radius`-net of the samples, scanning ids in increasing order.
///
/// Returned ids are ascending. Net points are pairwise more than `radius`
/// apart and every sample lies within `radius` of some net point.
pub fn build_net<M: Metric>(d: &Dataset<M>, radius: f64) -> Vec<usize> {
    greedy_net(d.len(), |i, j| d.dist(i, j), radius)
}

/// [`build_net`] over items `0..m` of an arbitrary distance function.
pub fn greedy_net(m: usize, dist: impl Fn(usize, usize) -> f64, radius: f64) -> Vec<usize> {
    let mut net: Vec<usize> = Vec::new();
    for x in 0..m {
        if net.iter().all(|&z| dist(x, z) > radius) {
            net.push(x);
        }
    }
    net
}

/// Upper bound `(2·diameter/alpha)^ddim` on the size of an `alpha`-separated
/// subset of a set with the given diameter, clamped below at 1.
pub fn packing_bound(diameter: f64, alpha: f64, ddim: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::Domain("packing separation must be positive"));
    }
    if !(diameter >= 0.0) || !(ddim >= 0.0) {
        return Err(Error::Domain("diameter and dimension must be non-negative"));
    }
    Ok(libm::pow(2.0 * diameter / alpha, ddim).max(1.0))
}

/// Empirical doubling dimension: over dyadic radii `R` and up to 128 centers,
/// the largest `log2` of a greedy `R/2`-packing inside a radius-`R` ball.
pub fn estimate_ddim<M: Metric>(d: &Dataset<M>) -> f64 {
    let n = d.len();
    if n < 2 {
        return 0.0;
    }
    let mut diam = 0.0f64;
    let mut min_pos = f64::INFINITY;
    for i in 0..n {
        for j in (i + 1)..n {
            let t = d.dist(i, j);
            diam = diam.max(t);
            if t > 0.0 {
                min_pos = min_pos.min(t);
            }
        }
    }
    if !(diam > 0.0) {
        return 0.0;
    }
    let centers: Vec<usize> = if n <= 128 {
        (0..n).collect()
    } else {
        (0..128).map(|k| k * n / 128).collect()
    };
    let mut best = 0usize;
    let mut ball: Vec<(f64, usize)> = Vec::with_capacity(n);
    let mut chosen: Vec<usize> = Vec::new();
    for &c in &centers {
        let mut radius = diam;
        for _ in 0..64 {
            if radius < min_pos {
                break;
            }
            ball.clear();
            ball.extend((0..n).map(|j| (d.dist(c, j), j)).filter(|&(t, _)| t <= radius));
            ball.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            chosen.clear();
            for &(_, j) in ball.iter() {
                if chosen.iter().all(|&z| d.dist(j, z) >= radius / 2.0) {
                    chosen.push(j);
                }
            }
            best = best.max(chosen.len());
            radius /= 2.0;
        }
    }
    libm::log2(best as f64)
}

/// Nested nets `N_0 ⊇ N_1 ⊇ … ⊇ N_top` over items `0..m`.
///
/// Level `ℓ` has radius `r_ℓ = r_top · 2^{ℓ-top}`; `N_ℓ` is an `r_ℓ`-net of
/// all items and every member of `N_ℓ` has a parent in `N_{ℓ+1}` within
/// `r_{ℓ+1}` (itself when it is also a member there). `N_top = {0}`. Level 0
/// contains one representative, the lowest id, of every class of items at
/// distance zero from each other.
#[derive(Debug, Clone)]
pub struct NetHierarchy {
    radii: Vec<f64>,
    members: Vec<Vec<usize>>,
    children: Vec<Vec<Vec<usize>>>,
    top: Vec<Option<usize>>,
    parent: Vec<Option<usize>>,
    representative: Vec<usize>,
}

impl NetHierarchy {
    /// Builds the hierarchy for items `0..m`, `m ≥ 1`.
    pub fn build(m: usize, dist: impl Fn(usize, usize) -> f64) -> NetHierarchy {
        assert!(m > 0, "net hierarchy over an empty set");
        let r_top = (1..m).map(|x| dist(0, x)).fold(0.0, f64::max);

        // Built top-down; level index t counts from the top.
        let mut radii = vec![r_top];
        let mut members: Vec<Vec<usize>> = vec![vec![0]];
        let mut children_td: Vec<Vec<Vec<usize>>> = Vec::new();
        let mut is_member = vec![false; m];
        is_member[0] = true;
        let mut parent = vec![None; m];
        let mut first_level = vec![None; m];
        first_level[0] = Some(0usize);
        // cand[x]: members of the current level within 4r of x.
        let mut cand: Vec<Vec<usize>> = vec![vec![0]; m];
        // near[x]: nearest member of the current level, ties to the lowest id.
        let mut near: Vec<(f64, usize)> = (0..m).map(|x| (if x == 0 { 0.0 } else { dist(0, x) }, 0)).collect();
        let mut pos = vec![usize::MAX; m];

        loop {
            let r = *radii.last().unwrap();
            let done = (0..m).all(|x| is_member[x] || near[x].0 == 0.0);
            if done || radii.len() >= MAX_LEVELS {
                break;
            }
            let r_new = r / 2.0;
            let prev = members.last().unwrap().clone();
            for (k, &z) in prev.iter().enumerate() {
                pos[z] = k;
            }
            let mut kids: Vec<Vec<usize>> = prev.iter().map(|&z| vec![z]).collect();
            let mut added = Vec::new();
            for x in 0..m {
                if is_member[x] {
                    continue;
                }
                let blocked = cand[x].iter().any(|&z| {
                    kids[pos[z]].iter().any(|&c| dist(x, c) <= r_new)
                });
                if !blocked {
                    let p = near[x].1;
                    kids[pos[p]].push(x);
                    parent[x] = Some(p);
                    first_level[x] = Some(radii.len());
                    added.push(x);
                }
            }
            for &x in &added {
                is_member[x] = true;
            }
            let mut next: Vec<usize> = prev.iter().copied().chain(added.iter().copied()).collect();
            next.sort_unstable();

            for x in 0..m {
                let mut fresh = Vec::new();
                let mut best = (f64::INFINITY, usize::MAX);
                for &z in &cand[x] {
                    for &c in &kids[pos[z]] {
                        let t = if c == x { 0.0 } else { dist(x, c) };
                        if t <= 4.0 * r_new {
                            fresh.push(c);
                        }
                        if t < best.0 || (t == best.0 && c < best.1) {
                            best = (t, c);
                        }
                    }
                }
                fresh.sort_unstable();
                cand[x] = fresh;
                near[x] = best;
            }

            let mut next_pos = vec![usize::MAX; m];
            for (k, &z) in next.iter().enumerate() {
                next_pos[z] = k;
            }
            children_td.push(
                kids.into_iter()
                    .map(|mut v| {
                        v.sort_unstable();
                        v.into_iter().map(|c| next_pos[c]).collect()
                    })
                    .collect(),
            );
            radii.push(r_new);
            members.push(next);
        }

        let levels = radii.len();
        radii.reverse();
        members.reverse();
        // children_td[t] maps positions of top-down level t to level t+1;
        // bottom-up level l = levels-1-t has children in level l-1.
        let mut children: Vec<Vec<Vec<usize>>> = vec![Vec::new()];
        children.extend(children_td.into_iter().rev());
        let top = first_level
            .iter()
            .map(|t| t.map(|t| levels - 1 - t))
            .collect();
        let representative = (0..m)
            .map(|x| if is_member[x] { x } else { near[x].1 })
            .collect();
        NetHierarchy {
            radii,
            members,
            children,
            top,
            parent,
            representative,
        }
    }

    /// Number of items the hierarchy was built over.
    pub fn len(&self) -> usize {
        self.top.len()
    }

    pub fn is_empty(&self) -> bool {
        self.top.is_empty()
    }

    pub fn num_levels(&self) -> usize {
        self.radii.len()
    }

    pub fn top_level(&self) -> usize {
        self.radii.len() - 1
    }

    pub fn radius(&self, level: usize) -> f64 {
        self.radii[level]
    }

    /// Ascending member ids of level `level`.
    pub fn members(&self, level: usize) -> &[usize] {
        &self.members[level]
    }

    /// Positions in `members(level - 1)` of the children of `members(level)[k]`.
    pub fn children(&self, level: usize, k: usize) -> &[usize] {
        &self.children[level][k]
    }

    /// Highest level containing `x`, or `None` when `x` duplicates a
    /// lower-id item at distance zero.
    pub fn item_top(&self, x: usize) -> Option<usize> {
        self.top[x]
    }

    /// Compressed-tree parent: the covering member one level above
    /// `item_top(x)`. `None` for the root and for duplicates.
    pub fn parent(&self, x: usize) -> Option<usize> {
        self.parent[x]
    }

    /// Level-0 member at distance zero from `x` (`x` itself when it is one).
    pub fn representative(&self, x: usize) -> usize {
        self.representative[x]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{Minkowski, Norm};

    fn line(xs: &[f64]) -> Dataset<Minkowski> {
        let points = xs.iter().map(|&x| vec![x]).collect();
        Dataset::new(Minkowski(Norm::L2), points, vec![0.0; xs.len()]).unwrap()
    }

    #[test]
    fn greedy_net_on_a_line() {
        let d = line(&[0.0, 0.4, 1.0, 1.3, 2.0]);
        assert_eq!(build_net(&d, 0.5), vec![0, 2, 4]);
    }

    #[test]
    fn packing_bound_values() {
        assert_eq!(packing_bound(1.0, 0.5, 2.0).unwrap(), 16.0);
        assert_eq!(packing_bound(1.0, 4.0, 2.0).unwrap(), 1.0);
        assert!(packing_bound(1.0, 0.0, 2.0).is_err());
    }

    #[test]
    fn ddim_of_a_grid_is_near_two() {
        let mut points = Vec::new();
        for i in 0..20 {
            for j in 0..20 {
                points.push(vec![i as f64, j as f64]);
            }
        }
        let n = points.len();
        let d = Dataset::new(Minkowski(Norm::Linf), points, vec![0.0; n]).unwrap();
        let k = estimate_ddim(&d);
        assert!((1.5..=3.2).contains(&k), "estimated {k}");
    }

    #[test]
    fn hierarchy_merges_duplicates() {
        let d = line(&[0.0, 1.0, 0.0, 0.5, 1.0]);
        let h = NetHierarchy::build(d.len(), |i, j| d.dist(i, j));
        assert_eq!(h.members(0), &[0, 1, 3]);
        assert_eq!(h.members(h.top_level()), &[0]);
        assert_eq!(h.representative(2), 0);
        assert_eq!(h.representative(4), 1);
        assert_eq!(h.item_top(4), None);
        for l in 0..h.top_level() {
            let r = h.radius(l);
            let m = h.members(l);
            for (a, &x) in m.iter().enumerate() {
                for &y in &m[a + 1..] {
                    assert!(d.dist(x, y) > r);
                }
            }
            for x in 0..d.len() {
                assert!(m.iter().any(|&z| d.dist(x, z) <= r));
            }
        }
    }

    #[test]
    fn single_item_and_all_duplicates() {
        let h = NetHierarchy::build(1, |_, _| 0.0);
        assert_eq!(h.num_levels(), 1);
        let h = NetHierarchy::build(3, |_, _| 0.0);
        assert_eq!(h.num_levels(), 1);
        assert_eq!(h.members(0), &[0]);
        assert_eq!(h.representative(2), 0);
    }
}
