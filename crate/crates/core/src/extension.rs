//! Lipschitz extension of fitted sample values to new points.

use alloc::vec::Vec;

use crate::ann::{build_index, AnnIndex};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::metric::Metric;

/// The value `y` minimizing `max_i |y − v_i|/d_i` over `(d_i, v_i)` pairs.
///
/// For the maximizing pair of `(v_i − v_j)/(d_i + d_j)` the optimum is
/// `(v_i·d_j + v_j·d_i)/(d_i + d_j)`; equal ratios go to the smaller `y`.
/// A point at distance zero decides the value outright (lowest index first).
pub fn extend_from(dists: &[f64], values: &[f64]) -> f64 {
    assert!(!dists.is_empty() && dists.len() == values.len(), "extension needs matching non-empty inputs");
    if let Some(i) = dists.iter().position(|&t| t == 0.0) {
        return values[i];
    }
    let n = dists.len();
    let mut best_ratio = 0.0f64;
    let mut best_y = f64::NAN;
    // With every value equal the ratio is 0 at that value.
    let lowest = values.iter().copied().fold(f64::INFINITY, f64::min);
    if values.iter().all(|&v| v == lowest) {
        return lowest;
    }
    for i in 0..n {
        for j in 0..n {
            if values[i] <= values[j] {
                continue;
            }
            let span = dists[i] + dists[j];
            let ratio = (values[i] - values[j]) / span;
            let y = (values[i] * dists[j] + values[j] * dists[i]) / span;
            if ratio > best_ratio || (ratio == best_ratio && y < best_y) {
                best_ratio = ratio;
                best_y = y;
            }
        }
    }
    best_y
}

/// Exact minimax Lipschitz extension of `values` (one per sample) to `x`,
/// by enumerating all sample pairs.
pub fn exact_extension<M: Metric>(d: &Dataset<M>, values: &[f64], x: &M::Point) -> f64 {
    let dists: Vec<f64> = (0..d.len()).map(|j| d.dist_to(x, j)).collect();
    extend_from(&dists, values)
}

struct Bucket<'a, M: Metric> {
    level: f64,
    index: AnnIndex<'a, M>,
}

/// Approximate extension: sample values are rounded up to the grid `jη/2`,
/// each non-empty grid level gets a `(1+η/2)`-approximate nearest-neighbor
/// index, and a query runs the exact pair enumeration over one candidate per
/// level. The answer is within `η` of [`exact_extension`], clamped to `[0, 1]`.
pub struct Predictor<'a, M: Metric> {
    eta: f64,
    rounded: Vec<f64>,
    buckets: Vec<Bucket<'a, M>>,
}

/// Grid index of the smallest multiple of `η/2` at or above `v`.
fn grid_step(v: f64, eta: f64) -> usize {
    let t = v / (eta / 2.0);
    libm::ceil(t - 1e-12 * t.max(1.0)).max(0.0) as usize
}

pub fn build_predictor<'a, M: Metric>(d: &'a Dataset<M>, values: &[f64], eta: f64) -> Result<Predictor<'a, M>> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::Domain("η must lie in (0, 1]"));
    }
    if values.len() != d.len() {
        return Err(Error::Domain("one value per sample point is required"));
    }
    if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
        return Err(Error::InvalidLabel { index, value });
    }
    let steps: Vec<usize> = values.iter().map(|&v| grid_step(v, eta)).collect();
    let top = steps.iter().copied().max().unwrap_or(0);
    let mut members: Vec<Vec<usize>> = (0..=top).map(|_| Vec::new()).collect();
    for (i, &s) in steps.iter().enumerate() {
        members[s].push(i);
    }
    let mut buckets = Vec::new();
    for (s, ids) in members.iter().enumerate() {
        if ids.is_empty() {
            continue;
        }
        buckets.push(Bucket {
            level: s as f64 * eta / 2.0,
            index: build_index(d, ids, eta / 2.0)?,
        });
    }
    let rounded = steps.iter().map(|&s| s as f64 * eta / 2.0).collect();
    Ok(Predictor { eta, rounded, buckets })
}

impl<M: Metric> Predictor<'_, M> {
    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Rounded sample values `f̃_i`.
    pub fn rounded(&self) -> &[f64] {
        &self.rounded
    }

    /// Non-empty grid levels and their member ids.
    pub fn buckets(&self) -> impl Iterator<Item = (f64, &[usize])> {
        self.buckets.iter().map(|b| (b.level, b.index.ids()))
    }

    pub fn predict(&self, x: &M::Point) -> f64 {
        let mut dists = Vec::with_capacity(self.buckets.len());
        let mut levels = Vec::with_capacity(self.buckets.len());
        for b in &self.buckets {
            dists.push(b.index.query(x).1);
            levels.push(b.level);
        }
        extend_from(&dists, &levels).clamp(0.0, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{Minkowski, Norm};
    use alloc::vec;

    #[test]
    fn balance_points() {
        assert_eq!(extend_from(&[1.0, 1.0], &[0.0, 1.0]), 0.5);
        assert_eq!(extend_from(&[1.0, 3.0], &[1.0, 0.0]), 0.75);
        assert_eq!(extend_from(&[2.5], &[0.3]), 0.3);
        assert_eq!(extend_from(&[1.0, 0.0], &[0.2, 0.9]), 0.9);
    }

    #[test]
    fn buckets_on_a_coarse_grid() {
        let points: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64]).collect();
        let d = Dataset::new(Minkowski(Norm::L1), points, vec![0.0; 5]).unwrap();
        let p = build_predictor(&d, &[0.0, 0.2, 0.5, 0.7, 1.0], 1.0).unwrap();
        let levels: Vec<f64> = p.buckets().map(|(l, _)| l).collect();
        assert_eq!(levels, vec![0.0, 0.5, 1.0]);
        assert_eq!(p.rounded(), &[0.0, 0.5, 0.5, 1.0, 1.0]);
        let same = build_predictor(&d, &[0.3; 5], 0.1).unwrap();
        assert_eq!(same.buckets().count(), 1);
        assert!((same.predict(&vec![9.0]) - 0.3).abs() <= 0.1);
    }
}
