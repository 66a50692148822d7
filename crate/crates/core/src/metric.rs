//! Distance functions the rest of the crate is generic over.

use alloc::vec::Vec;

/// A distance function over some point representation.
///
/// Implementations are expected to be pseudo-metrics: symmetric,
/// non-negative, zero on identical points and satisfying the triangle
/// inequality. [`crate::Dataset::validate_metric`] spot-checks this.
pub trait Metric {
    type Point: Clone;

    fn distance(&self, a: &Self::Point, b: &Self::Point) -> f64;
}

impl<M: Metric + ?Sized> Metric for &M {
    type Point = M::Point;

    fn distance(&self, a: &Self::Point, b: &Self::Point) -> f64 {
        (**self).distance(a, b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Norm {
    L1,
    L2,
    Linf,
}

impl Norm {
    fn combine(self, diffs: impl Iterator<Item = f64>) -> f64 {
        match self {
            Norm::L1 => diffs.map(f64::abs).sum(),
            Norm::L2 => libm::sqrt(diffs.map(|t| t * t).sum()),
            Norm::Linf => diffs.fold(0.0, |m, t| m.max(t.abs())),
        }
    }
}

/// `ℓ1`, `ℓ2` or `ℓ∞` distance on coordinate vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Minkowski(pub Norm);

impl Metric for Minkowski {
    type Point = Vec<f64>;

    fn distance(&self, a: &Vec<f64>, b: &Vec<f64>) -> f64 {
        self.0.combine(a.iter().zip(b).map(|(x, y)| x - y))
    }
}

/// Flat torus `(ℝ/ℤ)^d`: per-coordinate wrap-around distance combined by a norm.
/// With one coordinate this is the geodesic metric of a circle of length 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Torus(pub Norm);

impl Metric for Torus {
    type Point = Vec<f64>;

    fn distance(&self, a: &Vec<f64>, b: &Vec<f64>) -> f64 {
        self.0.combine(a.iter().zip(b).map(|(x, y)| {
            let t = (x - y).abs() % 1.0;
            t.min(1.0 - t)
        }))
    }
}

/// Uniform metric: distinct labels are at distance 1.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Discrete;

impl Metric for Discrete {
    type Point = usize;

    fn distance(&self, a: &usize, b: &usize) -> f64 {
        if a == b {
            0.0
        } else {
            1.0
        }
    }
}

/// A point of a [`DistanceMatrix`] space.
#[derive(Debug, Clone, PartialEq)]
pub enum MatrixPoint {
    /// Row/column `i` of the matrix.
    Sample(usize),
    /// A point outside the matrix, given by its distances to every sample.
    External(Vec<f64>),
}

/// Explicit `n × n` distance matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl DistanceMatrix {
    /// Returns `None` unless `entries.len() == n * n`.
    pub fn new(n: usize, entries: Vec<f64>) -> Option<Self> {
        (entries.len() == n * n).then_some(DistanceMatrix { n, entries })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    /// Points `Sample(0), …, Sample(n-1)` in id order.
    pub fn samples(&self) -> Vec<MatrixPoint> {
        (0..self.n).map(MatrixPoint::Sample).collect()
    }
}

impl Metric for DistanceMatrix {
    type Point = MatrixPoint;

    /// Distances between two external points are unknown and reported as NaN.
    fn distance(&self, a: &MatrixPoint, b: &MatrixPoint) -> f64 {
        match (a, b) {
            (MatrixPoint::Sample(i), MatrixPoint::Sample(j)) => self.get(*i, *j),
            (MatrixPoint::Sample(i), MatrixPoint::External(row))
            | (MatrixPoint::External(row), MatrixPoint::Sample(i)) => {
                row.get(*i).copied().unwrap_or(f64::NAN)
            }
            (MatrixPoint::External(_), MatrixPoint::External(_)) => f64::NAN,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn norms_on_a_unit_diagonal() {
        let a = vec![0.0, 0.0];
        let b = vec![3.0, 4.0];
        assert_eq!(Minkowski(Norm::L1).distance(&a, &b), 7.0);
        assert_eq!(Minkowski(Norm::L2).distance(&a, &b), 5.0);
        assert_eq!(Minkowski(Norm::Linf).distance(&a, &b), 4.0);
    }

    #[test]
    fn torus_wraps() {
        let t = Torus(Norm::L2);
        let d = t.distance(&vec![0.05], &vec![0.95]);
        assert!((d - 0.1).abs() < 1e-12);
        assert!((t.distance(&vec![0.0], &vec![0.5]) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn matrix_external_rows() {
        let m = DistanceMatrix::new(2, vec![0.0, 2.0, 2.0, 0.0]).unwrap();
        let q = MatrixPoint::External(vec![1.0, 1.5]);
        assert_eq!(m.distance(&q, &MatrixPoint::Sample(1)), 1.5);
        assert_eq!(m.distance(&MatrixPoint::Sample(0), &MatrixPoint::Sample(1)), 2.0);
        assert!(m.distance(&q, &q).is_nan());
        assert!(DistanceMatrix::new(2, vec![0.0]).is_none());
    }
}
