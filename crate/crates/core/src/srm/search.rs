//! Binary searches over the objective level `r` and the Lipschitz budget `L`.

use super::program::{build_erm_program, solve_erm_with, ErmSolution, ErmValues};
use super::Hypothesis;
use crate::bounds::{self, BoundParams, Loss};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::metric::Metric;
use crate::solver::{SolverOptions, WarmStart};
use crate::spanner::SpannerGraph;

/// Solver settings and the warm start shared by consecutive probes.
#[derive(Debug, Clone, Default)]
pub struct SearchContext {
    pub options: SolverOptions,
    warm: Option<WarmStart>,
    /// Number of program solves so far.
    pub solves: usize,
    /// Solver iterations summed over all solves.
    pub iterations: usize,
}

impl SearchContext {
    pub fn new(options: SolverOptions) -> Self {
        SearchContext {
            options,
            ..SearchContext::default()
        }
    }
}

/// Smallest feasible objective level on the grid `r = kη` and its solution.
#[derive(Debug, Clone, PartialEq)]
pub struct RSearch {
    pub r: f64,
    pub solution: ErmValues,
}

/// Mean loss `(1/n)·Σ|y_i − f_i|^q`.
pub fn empirical_risk(labels: &[f64], values: &[f64], loss: Loss) -> f64 {
    labels.iter().zip(values).map(|(&y, &f)| loss.eval(y, f)).sum::<f64>() / labels.len() as f64
}

fn probe<M: Metric>(
    d: &Dataset<M>,
    sp: &SpannerGraph,
    lipschitz: f64,
    r: f64,
    loss: Loss,
    eta: f64,
    ctx: &mut SearchContext,
) -> Result<Option<ErmValues>> {
    let prog = build_erm_program(d, sp, lipschitz, r, loss, eta)?;
    let (solution, state) = solve_erm_with(&prog, &ctx.options, ctx.warm.as_ref())?;
    ctx.solves += 1;
    Ok(match solution {
        ErmSolution::Feasible(values) => {
            ctx.iterations += values.iterations;
            ctx.warm = Some(state);
            Some(values)
        }
        ErmSolution::Infeasible { iterations } => {
            ctx.iterations += iterations;
            None
        }
    })
}

/// Binary search for the least feasible `r = kη`. The grid runs from the
/// objective's floor (`⌊ȳ/η⌋` for `q = 1`, `2` for `q = 2`, at least 1) to
/// `⌈2/η⌉`, where the constant fit is always feasible.
pub fn search_r<M: Metric>(
    d: &Dataset<M>,
    sp: &SpannerGraph,
    lipschitz: f64,
    loss: Loss,
    eta: f64,
    ctx: &mut SearchContext,
) -> Result<RSearch> {
    let mean = d.labels().iter().sum::<f64>() / d.len() as f64;
    let mut lo = match loss {
        Loss::Absolute => libm::floor(mean / eta + 1e-9) as usize,
        Loss::Squared => 2,
    }
    .max(1);
    let mut hi = libm::ceil(2.0 / eta - 1e-9) as usize;
    let Some(mut best) = probe(d, sp, lipschitz, hi as f64 * eta, loss, eta, ctx)? else {
        return Err(Error::Domain("objective level 2 is infeasible"));
    };
    // Invariant: hi is feasible with solution `best`; levels below lo unknown
    // but below the objective's floor.
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        match probe(d, sp, lipschitz, mid as f64 * eta, loss, eta, ctx)? {
            Some(sol) => {
                hi = mid;
                best = sol;
            }
            None => lo = mid + 1,
        }
    }
    Ok(RSearch {
        r: hi as f64 * eta,
        solution: best,
    })
}

/// Inputs of a structural risk minimization run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SrmConfig {
    pub loss: Loss,
    pub eta: f64,
    pub delta_conf: f64,
    /// Doubling dimension plugged into the penalty.
    pub ddim: f64,
}

/// Searches `L = kη`, `k ∈ [0, ⌈n²/η²⌉]`, for the least `k` whose ERM
/// solution has empirical risk at most the stratified penalty at `L_k`,
/// taking the top of the grid when no `k` qualifies.
pub fn search_lipschitz<M: Metric>(
    d: &Dataset<M>,
    sp: &SpannerGraph,
    config: &SrmConfig,
    ctx: &mut SearchContext,
) -> Result<Hypothesis> {
    let n = d.len();
    let eta = config.eta;
    let params = BoundParams::new(n as u64, 0.0, config.loss, config.ddim, config.delta_conf, eta)?;
    if n == 1 {
        let values = d.labels().to_vec();
        return Hypothesis::assemble(&values, d, 0.0, 2.0 * eta, config, &params, sp);
    }
    let n_f = n as f64;
    let k_max = libm::ceil(n_f * n_f / (eta * eta)) as u64;

    let evaluate = |k: u64, ctx: &mut SearchContext| -> Result<(bool, RSearch)> {
        let lipschitz = k as f64 * eta;
        let found = search_r(d, sp, lipschitz, config.loss, eta, ctx)?;
        let risk = empirical_risk(d.labels(), &found.solution.values, config.loss);
        let (_, penalty) = bounds::stratified_penalty(&params.with_lipschitz(lipschitz), eta)?;
        Ok((risk <= penalty, found))
    };

    let (ok0, at0) = evaluate(0, ctx)?;
    let (k, chosen) = if ok0 {
        (0, at0)
    } else {
        let (ok_top, at_top) = evaluate(k_max, ctx)?;
        if !ok_top {
            (k_max, at_top)
        } else {
            // Invariant: predicate false at lo, true at hi.
            let (mut lo, mut hi, mut best) = (0u64, k_max, at_top);
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                let (ok, found) = evaluate(mid, ctx)?;
                if ok {
                    hi = mid;
                    best = found;
                } else {
                    lo = mid;
                }
            }
            (hi, best)
        }
    };
    Hypothesis::assemble(&chosen.solution.values, d, k as f64 * eta, chosen.r, config, &params, sp)
}

/// Lipschitz grid values probed by [`search_lipschitz`] never exceed this.
pub fn lipschitz_cap(n: usize, eta: f64) -> f64 {
    let n = n as f64;
    libm::ceil(n * n / (eta * eta)) * eta
}
