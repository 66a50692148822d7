//! Fat-shattering dimension and uniform deviation bounds for (perturbed)
//! Lipschitz classes, their inversion, and the stratified risk objective.
//!
//! Distances are assumed normalized to unit diameter. Probabilities are
//! carried as natural logarithms so nothing overflows for `n ≤ 10¹²`.

use crate::error::{Error, Result};

/// Loss exponent `q`: absolute (`q = 1`) or squared (`q = 2`) error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Loss {
    Absolute,
    Squared,
}

impl Loss {
    pub fn exponent(self) -> u32 {
        match self {
            Loss::Absolute => 1,
            Loss::Squared => 2,
        }
    }

    pub fn q(self) -> f64 {
        f64::from(self.exponent())
    }

    pub fn from_exponent(q: u32) -> Option<Loss> {
        match q {
            1 => Some(Loss::Absolute),
            2 => Some(Loss::Squared),
            _ => None,
        }
    }

    /// `|a − b|^q`.
    pub fn eval(self, a: f64, b: f64) -> f64 {
        let t = (a - b).abs();
        match self {
            Loss::Absolute => t,
            Loss::Squared => t * t,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundParams {
    pub n: u64,
    pub lipschitz: f64,
    pub loss: Loss,
    pub ddim: f64,
    pub delta_conf: f64,
    pub eta: f64,
}

impl BoundParams {
    pub fn new(n: u64, lipschitz: f64, loss: Loss, ddim: f64, delta_conf: f64, eta: f64) -> Result<Self> {
        let p = BoundParams {
            n,
            lipschitz,
            loss,
            ddim,
            delta_conf,
            eta,
        };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Domain("sample size must be positive"));
        }
        if !(self.lipschitz >= 0.0) || !self.lipschitz.is_finite() {
            return Err(Error::Domain("Lipschitz constant must be non-negative and finite"));
        }
        if !(self.ddim >= 0.0) || !self.ddim.is_finite() {
            return Err(Error::Domain("doubling dimension must be non-negative and finite"));
        }
        if !(self.delta_conf > 0.0 && self.delta_conf < 1.0) {
            return Err(Error::Domain("confidence δ must lie in (0, 1)"));
        }
        if !(self.eta >= 0.0) || !self.eta.is_finite() {
            return Err(Error::Domain("perturbation η must be non-negative"));
        }
        Ok(())
    }

    pub fn with_lipschitz(self, lipschitz: f64) -> Self {
        BoundParams { lipschitz, ..self }
    }

    pub fn with_n(self, n: u64) -> Self {
        BoundParams { n, ..self }
    }
}

/// Natural logarithm of a probability bound (which may exceed 1).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LogProb(pub f64);

impl LogProb {
    pub fn ln(self) -> f64 {
        self.0
    }

    /// `exp` of the stored logarithm; may be `+∞`.
    pub fn value(self) -> f64 {
        libm::exp(self.0)
    }
}

/// `ln` of the fat-shattering bound at scale `gamma` for the
/// `η`-perturbed class: with `g = γ − qη` and `e = (q+1)/2`,
/// `(1 + g^{-e})·max(1, (L·g^{-e})^{ddim+1})`.
pub fn ln_fat_dim_bound(p: &BoundParams, gamma: f64) -> Result<f64> {
    p.validate()?;
    let q = p.loss.q();
    if !(gamma <= 0.5) || !(q * p.eta < gamma) {
        return Err(Error::Domain("fat-shattering scale must satisfy qη < γ ≤ 1/2"));
    }
    let e = (q + 1.0) / 2.0;
    let ln_ge = e * libm::log(gamma - q * p.eta);
    let ln_head = libm::log1p(libm::exp(-ln_ge));
    let ln_tail = if p.lipschitz > 0.0 {
        ((p.ddim + 1.0) * (libm::log(p.lipschitz) - ln_ge)).max(0.0)
    } else {
        0.0
    };
    Ok(ln_head + ln_tail)
}

pub fn fat_dim_bound(p: &BoundParams, gamma: f64) -> Result<f64> {
    ln_fat_dim_bound(p, gamma).map(libm::exp)
}

/// Uniform deviation tail
/// `24n·(288n/ε²)^{d·log2(24en/ε)}·exp(−ε²n/36)` with `d` the fat-shattering
/// bound at scale `ε/24`.
pub fn deviation_prob_bound(p: &BoundParams, eps: f64) -> Result<LogProb> {
    p.validate()?;
    let n = p.n as f64;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain("deviation ε must lie in (0, 1)"));
    }
    if n * eps * eps < 2.0 {
        return Err(Error::Domain("deviation bound needs n ≥ 2/ε²"));
    }
    if !(p.eta < eps / (24.0 * p.loss.q())) {
        return Err(Error::Domain("deviation bound needs η < ε/(24q)"));
    }
    let d = libm::exp(ln_fat_dim_bound(p, eps / 24.0)?);
    let e = core::f64::consts::E;
    let exponent = d * libm::log2(24.0 * e * n / eps);
    let ln = libm::log(24.0 * n) + exponent * libm::log(288.0 * n / (eps * eps)) - eps * eps * n / 36.0;
    Ok(LogProb(ln))
}

/// Ratio between consecutive points of the `ε` search grid.
pub const EPS_GRID_RATIO: f64 = 1.02;

/// Smallest `ε = 1.02^{-k}`, `k ≥ 1`, `ε ≥ √(2/n)`, whose deviation tail is
/// at most `δ`; 1 when no grid point qualifies. Grid points with
/// `η ≥ ε/(24q)` are skipped.
pub fn invert_eps(p: &BoundParams) -> f64 {
    invert_eps_ln(p, libm::log(p.delta_conf))
}

fn invert_eps_ln(p: &BoundParams, ln_delta: f64) -> f64 {
    let floor = libm::sqrt(2.0 / p.n as f64);
    let mut best = 1.0;
    let mut eps = 1.0 / EPS_GRID_RATIO;
    while eps >= floor {
        if let Ok(bound) = deviation_prob_bound(p, eps) {
            if bound.ln() <= ln_delta {
                best = eps;
            }
        }
        eps /= EPS_GRID_RATIO;
    }
    best
}

/// Stratum `k = max(1, ⌈L/η_grid⌉)` and the penalty at `L_k = k·η_grid`
/// with confidence `δ·2^{-k}`. A relative slack of `1e-9` keeps grid-aligned
/// `L` in its own stratum despite rounding.
pub fn stratified_penalty(p: &BoundParams, eta_grid: f64) -> Result<(u64, f64)> {
    p.validate()?;
    if !(eta_grid > 0.0) || !eta_grid.is_finite() {
        return Err(Error::Domain("stratification step must be positive"));
    }
    let k = stratum(p.lipschitz, eta_grid);
    let lk = k as f64 * eta_grid;
    let ln_delta = libm::log(p.delta_conf) - k as f64 * core::f64::consts::LN_2;
    Ok((k, invert_eps_ln(&p.with_lipschitz(lk), ln_delta)))
}

pub fn stratum(lipschitz: f64, eta_grid: f64) -> u64 {
    let ratio = lipschitz / eta_grid;
    (libm::ceil(ratio - 1e-9 * ratio.max(1.0)) as u64).max(1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskReport {
    pub empirical_risk: f64,
    pub stratum: u64,
    pub penalty: f64,
    /// `24·q·η`.
    pub perturbation: f64,
    pub total: f64,
}

/// `R_n + ε(n, L_k, δ·2^{-k}) + 24qη`.
pub fn total_bound(empirical: f64, p: &BoundParams, eta_grid: f64) -> Result<RiskReport> {
    if !(0.0..=1.0).contains(&empirical) {
        return Err(Error::Domain("empirical risk must lie in [0, 1]"));
    }
    let (stratum, penalty) = stratified_penalty(p, eta_grid)?;
    let perturbation = 24.0 * p.loss.q() * p.eta;
    Ok(RiskReport {
        empirical_risk: empirical,
        stratum,
        penalty,
        perturbation,
        total: empirical + penalty + perturbation,
    })
}

/// Shape of the asymptotic rate
/// `max(√(ln(n/δ)/n), (L^{ddim+1}·ln²n/n)^{1/(2 + (q+1)(ddim+1)/2)})`
/// without its unspecified constant. Not used as a penalty; kept to compare
/// the decay of [`invert_eps`] against.
pub fn asymptotic_rate(p: &BoundParams) -> f64 {
    let n = p.n as f64;
    let ln_n = libm::log(n);
    let first = libm::sqrt(libm::log(n / p.delta_conf) / n);
    let power = 1.0 / (2.0 + (p.loss.q() + 1.0) * (p.ddim + 1.0) / 2.0);
    let second = libm::pow(libm::pow(p.lipschitz, p.ddim + 1.0) * ln_n * ln_n / n, power);
    first.max(second)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: u64, l: f64, loss: Loss, ddim: f64) -> BoundParams {
        BoundParams::new(n, l, loss, ddim, 0.1, 0.0).unwrap()
    }

    #[test]
    fn fat_bound_closed_forms() {
        let a = fat_dim_bound(&params(10, 1.0, Loss::Absolute, 1.0), 0.5).unwrap();
        assert!((a - 12.0).abs() < 1e-9);
        let b = fat_dim_bound(&params(10, 1.0, Loss::Squared, 0.0), 0.25).unwrap();
        assert!((b - 72.0).abs() < 1e-9);
        let c = fat_dim_bound(&params(10, 0.0, Loss::Absolute, 2.0), 0.25).unwrap();
        assert!((c - 5.0).abs() < 1e-12);
        assert!(fat_dim_bound(&params(10, 1.0, Loss::Absolute, 1.0), 0.6).is_err());
        let perturbed = BoundParams { eta: 0.2, ..params(10, 1.0, Loss::Squared, 0.0) };
        assert!(fat_dim_bound(&perturbed, 0.4).is_err());
    }

    #[test]
    fn deviation_bound_regimes() {
        // d ≈ 1.1e5 here, so the tail only drops below 1 past n ≈ 5e10.
        let mid = params(1_000_000, 1.0, Loss::Absolute, 1.0);
        assert!(deviation_prob_bound(&mid, 0.5).unwrap().ln() > 6.0e7);
        let big = mid.with_n(100_000_000_000);
        let at_big = deviation_prob_bound(&big, 0.5).unwrap();
        assert!(at_big.value() < 1.0);
        let bigger = deviation_prob_bound(&big.with_n(1_000_000_000_000), 0.5).unwrap();
        assert!(bigger.ln() < at_big.ln());
        let tiny = deviation_prob_bound(&params(3, 1.0, Loss::Absolute, 1.0), 0.9).unwrap();
        assert!(tiny.ln().is_finite() && tiny.value() > 1.0);
        assert!(deviation_prob_bound(&params(3, 1.0, Loss::Absolute, 1.0), 0.5).is_err());
    }

    #[test]
    fn inversion_is_vacuous_for_tiny_samples() {
        assert_eq!(invert_eps(&params(4, 1.0, Loss::Absolute, 1.0)), 1.0);
    }

    #[test]
    fn stratum_arithmetic() {
        let p = params(100, 3.2, Loss::Absolute, 1.0);
        assert_eq!(stratified_penalty(&p, 1.0).unwrap().0, 4);
        assert_eq!(stratified_penalty(&p.with_lipschitz(0.0), 0.5).unwrap().0, 1);
        assert_eq!(stratum(0.15, 0.05), 3);
        assert_eq!(stratum(3.0 * 0.1, 0.1), 3);
    }

    #[test]
    fn perturbation_terms() {
        let p = BoundParams::new(100, 1.0, Loss::Absolute, 1.0, 0.1, 0.01).unwrap();
        let r = total_bound(0.1, &p, 0.01).unwrap();
        assert!((r.perturbation - 0.24).abs() < 1e-12);
        assert!((r.total - (0.1 + r.penalty + 0.24)).abs() < 1e-12);
        let p2 = BoundParams { loss: Loss::Squared, ..p };
        assert!((total_bound(0.1, &p2, 0.01).unwrap().perturbation - 0.48).abs() < 1e-12);
        let p0 = BoundParams { eta: 0.0, ..p };
        let r0 = total_bound(0.0, &p0, 0.01).unwrap();
        assert_eq!(r0.total, r0.penalty);
    }
}
