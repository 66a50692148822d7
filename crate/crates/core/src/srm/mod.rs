//! Structural risk minimization over Lipschitz budgets.
//!
//! For a budget `L` the ERM problem is posed as packing/covering
//! feasibility over the spanner's edges ([`program`]), the objective level
//! is found by binary search ([`search::search_r`]) and `L` itself by a
//! second binary search against the stratified penalty
//! ([`search::search_lipschitz`]).

pub mod certificate;
pub mod program;
pub mod search;

use alloc::vec::Vec;

use crate::bounds::{self, BoundParams, Loss, RiskReport};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::metric::Metric;
use crate::net::estimate_ddim;
use crate::solver::SolverOptions;
use crate::spanner::{build_spanner, SpannerGraph};

pub use certificate::{smooth_certificate, SmoothCertificate};
pub use program::{build_erm_program, solve_erm, solve_erm_with, ErmProgram, ErmSolution, ErmValues};
pub use search::{empirical_risk, search_lipschitz, search_r, RSearch, SearchContext, SrmConfig};

/// Fitted sample values with their Lipschitz budget and risk bound.
#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis {
    values: Vec<f64>,
    lipschitz: f64,
    eta: f64,
    loss: Loss,
    r: f64,
    beta: f64,
    risk: RiskReport,
}

impl Hypothesis {
    /// Rebuilds a hypothesis from stored parts; values must lie in `[0, 1]`.
    pub fn from_parts(values: Vec<f64>, lipschitz: f64, loss: Loss, eta: f64, risk: RiskReport) -> Result<Self> {
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidLabel { index, value });
        }
        if !(eta > 0.0) || !(lipschitz >= 0.0) {
            return Err(Error::Domain("hypothesis needs η > 0 and L ≥ 0"));
        }
        Ok(Hypothesis {
            values,
            lipschitz,
            eta,
            loss,
            r: f64::NAN,
            beta: f64::NAN,
            risk,
        })
    }

    fn assemble<M: Metric>(
        values: &[f64],
        d: &Dataset<M>,
        lipschitz: f64,
        r: f64,
        config: &SrmConfig,
        params: &BoundParams,
        sp: &SpannerGraph,
    ) -> Result<Self> {
        let risk = empirical_risk(d.labels(), values, config.loss);
        let report = bounds::total_bound(risk.min(1.0), &params.with_lipschitz(lipschitz), config.eta)?;
        Ok(Hypothesis {
            values: values.to_vec(),
            lipschitz,
            eta: config.eta,
            loss: config.loss,
            r,
            beta: program::beta_for(config.eta, config.loss, sp),
            risk: report,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The budget `L′` the values were fitted under.
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn loss(&self) -> Loss {
        self.loss
    }

    /// Objective level of the final feasible probe (NaN when loaded).
    pub fn r(&self) -> f64 {
        self.r
    }

    /// Solver relaxation used in the fit (NaN when loaded).
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn risk(&self) -> &RiskReport {
        &self.risk
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub loss: Loss,
    pub eta: f64,
    pub delta_conf: f64,
    /// Spanner stretch slack; `η` when `None`.
    pub spanner_delta: Option<f64>,
    pub solver: SolverOptions,
}

impl FitOptions {
    pub fn new(loss: Loss, eta: f64, delta_conf: f64) -> Self {
        FitOptions {
            loss,
            eta,
            delta_conf,
            spanner_delta: None,
            solver: SolverOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Fit {
    pub hypothesis: Hypothesis,
    pub spanner: SpannerGraph,
    pub ddim: f64,
    pub solves: usize,
    pub iterations: usize,
}

/// Builds the spanner, estimates the doubling dimension and runs the
/// Lipschitz search. Distances are used as given; normalize the dataset
/// to unit diameter first for the bounds to apply.
pub fn fit<M: Metric>(d: &Dataset<M>, options: &FitOptions) -> Result<Fit> {
    let FitOptions { loss, eta, delta_conf, spanner_delta, solver } = *options;
    if !(eta > 0.0 && eta <= 0.25) {
        return Err(Error::Domain("η must lie in (0, 1/4]"));
    }
    let spanner = build_spanner(d, spanner_delta.unwrap_or(eta))?;
    let ddim = estimate_ddim(d);
    let config = SrmConfig { loss, eta, delta_conf, ddim };
    let mut ctx = SearchContext::new(solver);
    let hypothesis = search_lipschitz(d, &spanner, &config, &mut ctx)?;
    Ok(Fit {
        hypothesis,
        spanner,
        ddim,
        solves: ctx.solves,
        iterations: ctx.iterations,
    })
}
