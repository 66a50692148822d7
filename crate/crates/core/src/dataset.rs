//! Labeled samples over a metric, with a global distance scale.

use alloc::vec::Vec;
use rand::Rng;

use crate::error::{Error, Result};
use crate::metric::Metric;

/// Largest sample size for which [`Dataset::validate_metric`] checks every triple.
pub const EXHAUSTIVE_TRIANGLE_LIMIT: usize = 512;

/// `n ≥ 1` labeled points. Labels lie in `[0, 1]`. All distances reported by
/// the dataset are the metric's distances multiplied by [`Dataset::scale`].
#[derive(Debug, Clone)]
pub struct Dataset<M: Metric> {
    metric: M,
    points: Vec<M::Point>,
    labels: Vec<f64>,
    scale: f64,
}

impl<M: Metric> Dataset<M> {
    pub fn new(metric: M, points: Vec<M::Point>, labels: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Domain("a dataset needs at least one point"));
        }
        if points.len() != labels.len() {
            return Err(Error::Domain("number of labels differs from number of points"));
        }
        check_labels(&labels)?;
        Ok(Dataset {
            metric,
            points,
            labels,
            scale: 1.0,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Always false: datasets hold at least one point.
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn metric(&self) -> &M {
        &self.metric
    }

    pub fn points(&self) -> &[M::Point] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &M::Point {
        &self.points[i]
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> f64 {
        self.labels[i]
    }

    /// Factor applied to raw metric distances.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Scaled distance between samples `i` and `j`.
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        self.scale * self.metric.distance(&self.points[i], &self.points[j])
    }

    /// Scaled distance from an arbitrary point to sample `j`.
    pub fn dist_to(&self, x: &M::Point, j: usize) -> f64 {
        self.scale * self.metric.distance(x, &self.points[j])
    }

    /// Largest pairwise scaled distance, `O(n²)`.
    pub fn diameter(&self) -> Result<f64> {
        let mut diam = 0.0f64;
        for i in 0..self.len() {
            for j in (i + 1)..self.len() {
                let d = self.dist(i, j);
                if !(d >= 0.0) || !d.is_finite() {
                    return Err(Error::InvalidDistance { i, j, value: d });
                }
                diam = diam.max(d);
            }
        }
        Ok(diam)
    }

    /// Rescales so that the sample diameter becomes 1. A zero diameter (one
    /// point, or all points coincide) leaves the scale unchanged.
    pub fn normalize_diameter(mut self) -> Result<Self> {
        let diam = self.diameter()?;
        if diam > 0.0 {
            self.scale /= diam;
        }
        Ok(self)
    }

    /// Replaces the scale so that distances equal raw distances times `scale`.
    pub fn with_scale(mut self, scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::Domain("distance scale must be positive and finite"));
        }
        self.scale = scale;
        Ok(self)
    }

    /// Replaces the labels, keeping points and scale.
    pub fn with_labels(mut self, labels: Vec<f64>) -> Result<Self> {
        if labels.len() != self.points.len() {
            return Err(Error::Domain("number of labels differs from number of points"));
        }
        check_labels(&labels)?;
        self.labels = labels;
        Ok(self)
    }

    /// Checks finiteness, non-negativity, symmetry and zero self-distance on
    /// all pairs, and the triangle inequality on every triple for
    /// `n ≤ EXHAUSTIVE_TRIANGLE_LIMIT`, otherwise on `10 n` random triples.
    pub fn validate_metric<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<()> {
        let n = self.len();
        for i in 0..n {
            let own = self.metric.distance(&self.points[i], &self.points[i]);
            if own != 0.0 {
                return Err(Error::InvalidDistance { i, j: i, value: own });
            }
            for j in (i + 1)..n {
                let a = self.metric.distance(&self.points[i], &self.points[j]);
                let b = self.metric.distance(&self.points[j], &self.points[i]);
                if !(a >= 0.0) || !a.is_finite() {
                    return Err(Error::InvalidDistance { i, j, value: a });
                }
                if a != b {
                    return Err(Error::Asymmetric { i, j });
                }
            }
        }
        let check = |i: usize, j: usize, k: usize| -> Result<()> {
            let ik = self.dist(i, k);
            let bound = self.dist(i, j) + self.dist(j, k);
            if ik > bound + 1e-12 * bound.max(1.0) {
                return Err(Error::TriangleViolation { i, j, k });
            }
            Ok(())
        };
        if n <= EXHAUSTIVE_TRIANGLE_LIMIT {
            for i in 0..n {
                for j in 0..n {
                    for k in (i + 1)..n {
                        check(i, j, k)?;
                    }
                }
            }
        } else {
            for _ in 0..10 * n {
                check(rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n))?;
            }
        }
        Ok(())
    }
}

fn check_labels(labels: &[f64]) -> Result<()> {
    match labels
        .iter()
        .enumerate()
        .find(|(_, y)| !(0.0..=1.0).contains(*y))
    {
        Some((index, &value)) => Err(Error::InvalidLabel { index, value }),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{DistanceMatrix, Minkowski, Norm};
    use alloc::vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn line(xs: &[f64]) -> Dataset<Minkowski> {
        let points = xs.iter().map(|&x| vec![x]).collect();
        Dataset::new(Minkowski(Norm::L2), points, vec![0.5; xs.len()]).unwrap()
    }

    #[test]
    fn normalization_yields_unit_diameter() {
        let d = line(&[0.0, 2.0, 5.0]).normalize_diameter().unwrap();
        assert!((d.diameter().unwrap() - 1.0).abs() < 1e-15);
        assert!((d.dist(0, 1) - 0.4).abs() < 1e-15);
        let again = d.clone().normalize_diameter().unwrap();
        assert_eq!(again.scale(), d.scale());
    }

    #[test]
    fn degenerate_diameter_keeps_scale() {
        let d = line(&[3.0]).normalize_diameter().unwrap();
        assert_eq!(d.scale(), 1.0);
        let d = line(&[1.0, 1.0]).normalize_diameter().unwrap();
        assert_eq!(d.scale(), 1.0);
    }

    #[test]
    fn rejects_labels_outside_unit_interval() {
        let err = Dataset::new(Minkowski(Norm::L1), vec![vec![0.0]], vec![1.5]).unwrap_err();
        assert_eq!(err, Error::InvalidLabel { index: 0, value: 1.5 });
    }

    #[test]
    fn matrix_validation_catches_violations() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let good = DistanceMatrix::new(3, vec![0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0]).unwrap();
        let d = Dataset::new(good.clone(), good.samples(), vec![0.0; 3]).unwrap();
        assert!(d.validate_metric(&mut rng).is_ok());

        let bad = DistanceMatrix::new(3, vec![0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0]).unwrap();
        let d = Dataset::new(bad.clone(), bad.samples(), vec![0.0; 3]).unwrap();
        assert!(matches!(
            d.validate_metric(&mut rng),
            Err(Error::TriangleViolation { .. })
        ));

        let skew = DistanceMatrix::new(2, vec![0.0, 1.0, 2.0, 0.0]).unwrap();
        let d = Dataset::new(skew.clone(), skew.samples(), vec![0.0; 2]).unwrap();
        assert_eq!(d.validate_metric(&mut rng), Err(Error::Asymmetric { i: 0, j: 1 }));
    }
}
