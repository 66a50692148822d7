//! Approximate nearest neighbors by descent through a net hierarchy.

use alloc::vec::Vec;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::metric::Metric;
use crate::net::NetHierarchy;

/// `(1+ε)`-approximate nearest-neighbor index over a subset of a dataset.
///
/// Queries descend the hierarchy keeping every level member that may still
/// have a descendant closer than the best distance seen, and stop once the
/// level radius is small enough that the best candidate is within `1+ε` of
/// optimal. Immutable after construction.
#[derive(Clone)]
pub struct AnnIndex<'a, M: Metric> {
    data: &'a Dataset<M>,
    ids: Vec<usize>,
    /// Lowest dataset id among the items a level-0 member stands for.
    label: Vec<usize>,
    epsilon: f64,
    net: NetHierarchy,
}

pub fn build_index<'a, M: Metric>(
    data: &'a Dataset<M>,
    subset: &[usize],
    epsilon: f64,
) -> Result<AnnIndex<'a, M>> {
    if subset.is_empty() {
        return Err(Error::Domain("nearest-neighbor index over an empty subset"));
    }
    if !(epsilon > 0.0) {
        return Err(Error::Domain("nearest-neighbor slack must be positive"));
    }
    if subset.iter().any(|&i| i >= data.len()) {
        return Err(Error::Domain("subset id out of range"));
    }
    let ids = subset.to_vec();
    let net = NetHierarchy::build(ids.len(), |a, b| data.dist(ids[a], ids[b]));
    let mut label = ids.clone();
    for (local, &id) in ids.iter().enumerate() {
        let rep = net.representative(local);
        label[rep] = label[rep].min(id);
    }
    Ok(AnnIndex {
        data,
        ids,
        label,
        epsilon,
        net,
    })
}

impl<M: Metric> AnnIndex<'_, M> {
    /// Indexed dataset ids, in the order given at build time.
    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Returns an indexed id `p` and `ρ(x, p)` with
    /// `ρ(x, p) ≤ (1+ε)·min_q ρ(x, q)`. Among equally near candidates
    /// found, the lowest dataset id wins.
    pub fn query(&self, x: &M::Point) -> (usize, f64) {
        let net = &self.net;
        let dist = |local: usize| self.data.dist_to(x, self.ids[local]);
        let better = |a: (f64, usize), b: (f64, usize)| a.0 < b.0 || (a.0 == b.0 && a.1 < b.1);

        let root = net.members(net.top_level())[0];
        let mut best = (dist(root), self.label[root]);
        // Positions within the current level paired with their distances.
        let mut frontier: Vec<(usize, f64)> = alloc::vec![(0, best.0)];
        let mut level = net.top_level();
        while level > 0 && best.0 > 0.0 {
            // Every indexed item below a level-ℓ member is within 2·r_ℓ of it.
            if 2.0 * net.radius(level) * (1.0 + self.epsilon) <= self.epsilon * best.0 {
                break;
            }
            let mut next = Vec::new();
            for &(p, _) in &frontier {
                for &c in net.children(level, p) {
                    let local = net.members(level - 1)[c];
                    let t = dist(local);
                    if better((t, self.label[local]), best) {
                        best = (t, self.label[local]);
                    }
                    next.push((c, t));
                }
            }
            level -= 1;
            let slack = if level > 0 { 2.0 * net.radius(level) } else { 0.0 };
            next.retain(|&(_, t)| t <= best.0 + slack);
            frontier = next;
        }
        (best.1, best.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{Minkowski, Norm};
    use alloc::vec;

    fn line(xs: &[f64]) -> Dataset<Minkowski> {
        let points = xs.iter().map(|&x| vec![x]).collect();
        Dataset::new(Minkowski(Norm::L1), points, vec![0.0; xs.len()]).unwrap()
    }

    #[test]
    fn collinear_query() {
        let d = line(&[0.0, 1.0, 2.0]);
        let ix = build_index(&d, &[0, 1, 2], 0.5).unwrap();
        let (p, t) = ix.query(&vec![0.9]);
        assert_eq!(p, 1);
        assert!(t <= 0.15 && (t - 0.1).abs() < 1e-12);
    }

    #[test]
    fn indexed_point_and_duplicates() {
        let d = line(&[0.0, 3.0, 3.0, 5.0]);
        let ix = build_index(&d, &[3, 2, 1], 0.1).unwrap();
        assert_eq!(ix.query(&vec![3.0]), (1, 0.0));
        assert_eq!(ix.query(&vec![5.0]), (3, 0.0));
        let single = build_index(&d, &[0], 0.1).unwrap();
        assert_eq!(single.query(&vec![7.0]), (0, 7.0));
    }

    #[test]
    fn rejects_empty_subset() {
        let d = line(&[0.0]);
        assert!(build_index(&d, &[], 0.1).is_err());
        assert!(build_index(&d, &[0], 0.0).is_err());
    }
}
