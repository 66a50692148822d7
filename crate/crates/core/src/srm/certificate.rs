//! Constructive check that fitted values are close to a Lipschitz function.

use alloc::vec;
use alloc::vec::Vec;

use super::Hypothesis;
use crate::dataset::Dataset;
use crate::metric::Metric;
use crate::net::build_net;

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothCertificate {
    /// The smoothed values `h̃` on the sample.
    pub values: Vec<f64>,
    /// `max_i |h_i − h̃_i|`.
    pub sup_distance: f64,
    /// Largest pairwise ratio `|h̃_i − h̃_j|/ρ(i, j)` actually attained.
    pub lipschitz: f64,
    /// Target constant `(1+3η)·L′`.
    pub budget: f64,
}

/// Keeps the values on an `(η/L′)`-net and extends them to the rest of the
/// sample one point at a time, clamping each value into the interval
/// allowed by the points already assigned under `(1+3η)·L′`. When the net
/// values are themselves within budget the result is `(1+3η)L′`-Lipschitz.
/// For `L′ = 0` the certificate is the midrange constant.
pub fn smooth_certificate<M: Metric>(d: &Dataset<M>, h: &Hypothesis) -> SmoothCertificate {
    let values = h.values();
    let n = values.len();
    let eta = h.eta();
    let lip = h.lipschitz();
    if lip <= 0.0 {
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let c = 0.5 * (lo + hi);
        return SmoothCertificate {
            values: vec![c; n],
            sup_distance: 0.5 * (hi - lo),
            lipschitz: 0.0,
            budget: 0.0,
        };
    }
    let budget = (1.0 + 3.0 * eta) * lip;
    let net = build_net(d, eta / lip);
    let mut is_net = vec![false; n];
    for &z in &net {
        is_net[z] = true;
    }
    let order: Vec<usize> = net.iter().copied().chain((0..n).filter(|&i| !is_net[i])).collect();
    let mut smooth = vec![f64::NAN; n];
    let mut assigned: Vec<usize> = Vec::with_capacity(n);
    for &x in &order {
        let target = values[x];
        smooth[x] = if is_net[x] {
            target
        } else {
            let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
            for &j in &assigned {
                let reach = budget * d.dist(x, j);
                lo = lo.max(smooth[j] - reach);
                hi = hi.min(smooth[j] + reach);
            }
            if lo <= hi {
                target.clamp(lo, hi)
            } else {
                0.5 * (lo + hi)
            }
        };
        assigned.push(x);
    }
    let sup_distance = (0..n).map(|i| (values[i] - smooth[i]).abs()).fold(0.0, f64::max);
    let mut attained = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let gap = (smooth[i] - smooth[j]).abs();
            let t = d.dist(i, j);
            if t > 0.0 {
                attained = attained.max(gap / t);
            } else if gap > 0.0 {
                attained = f64::INFINITY;
            }
        }
    }
    SmoothCertificate {
        values: smooth,
        sup_distance,
        lipschitz: attained,
        budget,
    }
}
