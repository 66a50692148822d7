//! The spanner-sparsified ERM feasibility programs.

use alloc::vec;
use alloc::vec::Vec;

use crate::bounds::Loss;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::metric::Metric;
use crate::solver::{self, PackingCoveringProgram, SolverOptions, SparseMatrix, Status, WarmStart};
use crate::spanner::SpannerGraph;

/// Relaxation `β = η²/(24·q·H)` with `H = max(1, hop diameter)`.
pub fn beta_for(eta: f64, loss: Loss, sp: &SpannerGraph) -> f64 {
    eta * eta / (24.0 * loss.q() * sp.hop_diameter().max(1) as f64)
}

/// Tangent slopes `jη`, `j = 0..=⌊1/η⌋`.
pub fn tangent_grid(eta: f64) -> Vec<f64> {
    let top = libm::floor(1.0 / eta + 1e-9) as usize;
    (0..=top).map(|j| j as f64 * eta).collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RowCounts {
    /// `f + x̃` (and for `q = 2`, `f + w`) packing and covering rows.
    pub negation: usize,
    pub edge: usize,
    /// `f + w ≥ y` rows (`q = 1`) or tangent rows (`q = 2`).
    pub loss: usize,
    pub objective: usize,
}

impl RowCounts {
    pub fn total(&self) -> usize {
        self.negation + self.edge + self.loss + self.objective
    }
}

/// Feasibility form of ERM at Lipschitz budget `L` and objective level `r`.
///
/// Variables for point `i`: `f_i` at `i`, the negated `x̃_i` at `n + i`,
/// `w_i` at `2n + i`, and for `q = 2` the loss bound `v_i` at `3n + i`.
///
/// * `q = 1`: `w_i ≥ y_i − f_i` via `f_i + w_i ≥ y_i`, and
///   `(1/n)·Σ(f_i + 2w_i) ≤ r`, whose least value is `(1/n)·Σ(y_i + |y_i − f_i|)`.
/// * `q = 2`: `w_i` is a second negation of `f_i`; tangent rows
///   `v_i + 2jη·f_i ≥ 2jη·y_i − (jη)² + 2η` and
///   `v_i + 2jη·w_i ≥ −2jη·y_i − (jη)² + 2η + 2jη(1+β)` (rows with a
///   negative right-hand side dropped), and `(1/n)·Σ v_i ≤ r`.
///
/// Each spanner edge `(i, j)` gives `f_i + x̃_j ≤ 1 + Lρ` and `f_j + x̃_i ≤ 1 + Lρ`.
#[derive(Debug, Clone)]
pub struct ErmProgram {
    program: PackingCoveringProgram,
    n: usize,
    loss: Loss,
    lipschitz: f64,
    r: f64,
    eta: f64,
    labels: Vec<f64>,
    edges: Vec<(usize, usize, f64)>,
    counts: RowCounts,
}

pub fn build_erm_program<M: Metric>(
    d: &Dataset<M>,
    sp: &SpannerGraph,
    lipschitz: f64,
    r: f64,
    loss: Loss,
    eta: f64,
) -> Result<ErmProgram> {
    if !(eta > 0.0 && eta <= 0.25) {
        return Err(Error::Domain("η must lie in (0, 1/4]"));
    }
    if !(lipschitz >= 0.0) || !lipschitz.is_finite() {
        return Err(Error::Domain("Lipschitz budget must be non-negative"));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain("objective level r must be positive"));
    }
    if sp.n() != d.len() {
        return Err(Error::Domain("spanner and dataset sizes differ"));
    }
    let n = d.len();
    let beta = beta_for(eta, loss, sp);
    let vars = match loss {
        Loss::Absolute => 3 * n,
        Loss::Squared => 4 * n,
    };
    let (f, neg, w, v) = (0, n, 2 * n, 3 * n);
    let mut pack: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut pack_rhs = Vec::new();
    let mut cover: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut cover_rhs = Vec::new();
    let mut counts = RowCounts::default();

    for i in 0..n {
        let (_, p_row, c_row) = solver::encode_difference_pair(f + i, neg + i);
        pack.push(p_row);
        pack_rhs.push(1.0);
        cover.push(c_row);
        cover_rhs.push(1.0);
        counts.negation += 2;
    }
    let edges: Vec<(usize, usize, f64)> = sp.edges().iter().map(|e| (e.i, e.j, e.length)).collect();
    for &(i, j, rho) in &edges {
        let rhs = 1.0 + lipschitz * rho;
        pack.push(vec![(f + i, 1.0), (neg + j, 1.0)]);
        pack_rhs.push(rhs);
        pack.push(vec![(f + j, 1.0), (neg + i, 1.0)]);
        pack_rhs.push(rhs);
        counts.edge += 2;
    }
    let scale = 1.0 / n as f64;
    match loss {
        Loss::Absolute => {
            for i in 0..n {
                cover.push(vec![(f + i, 1.0), (w + i, 1.0)]);
                cover_rhs.push(d.label(i));
                counts.loss += 1;
            }
            pack.push((0..n).flat_map(|i| [(f + i, scale), (w + i, 2.0 * scale)]).collect());
            pack_rhs.push(r);
        }
        Loss::Squared => {
            for i in 0..n {
                let (_, p_row, c_row) = solver::encode_difference_pair(f + i, w + i);
                pack.push(p_row);
                pack_rhs.push(1.0);
                cover.push(c_row);
                cover_rhs.push(1.0);
                counts.negation += 2;
            }
            let slopes = tangent_grid(eta);
            for i in 0..n {
                let y = d.label(i);
                for (j, &a) in slopes.iter().enumerate() {
                    let below = 2.0 * a * y - a * a + 2.0 * eta;
                    if below >= 0.0 {
                        cover.push(vec![(v + i, 1.0), (f + i, 2.0 * a)]);
                        cover_rhs.push(below);
                        counts.loss += 1;
                    }
                    // At j = 0 both tangent families coincide.
                    let above = -2.0 * a * y - a * a + 2.0 * eta + 2.0 * a * (1.0 + beta);
                    if j > 0 && above >= 0.0 {
                        cover.push(vec![(v + i, 1.0), (w + i, 2.0 * a)]);
                        cover_rhs.push(above);
                        counts.loss += 1;
                    }
                }
            }
            pack.push((0..n).map(|i| (v + i, scale)).collect());
            pack_rhs.push(r);
        }
    }
    counts.objective = 1;
    let program = PackingCoveringProgram::new(
        SparseMatrix::from_rows(vars, &pack),
        pack_rhs,
        SparseMatrix::from_rows(vars, &cover),
        cover_rhs,
        beta,
    )?;
    Ok(ErmProgram {
        program,
        n,
        loss,
        lipschitz,
        r,
        eta,
        labels: d.labels().to_vec(),
        edges,
        counts,
    })
}

/// Values read from a relaxed-feasible solution.
#[derive(Debug, Clone, PartialEq)]
pub struct ErmValues {
    /// `f_i` clamped to `[0, 1]`.
    pub values: Vec<f64>,
    /// Least feasible `w_i` (`q = 1`) or `v_i` (`q = 2`) given the raw solution.
    pub aux: Vec<f64>,
    /// `(1/n)·Σ(y_i + |y_i − f_i|)` (`q = 1`) or `(1/n)·Σ v_i` (`q = 2`) at the clamped values.
    pub objective: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ErmSolution {
    Feasible(ErmValues),
    Infeasible { iterations: usize },
}

impl ErmProgram {
    pub fn program(&self) -> &PackingCoveringProgram {
        &self.program
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn loss(&self) -> Loss {
        self.loss
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn beta(&self) -> f64 {
        self.program.beta()
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn row_counts(&self) -> RowCounts {
        self.counts
    }

    /// Largest number of rows any `f_i` appears in.
    pub fn max_value_incidence(&self) -> usize {
        let mut count = vec![0usize; self.n];
        for m in [self.program.packing(), self.program.covering()] {
            for row in 0..m.nrows() {
                for (c, _) in m.row(row) {
                    if c < self.n {
                        count[c] += 1;
                    }
                }
            }
        }
        count.into_iter().max().unwrap_or(0)
    }

    fn extract(&self, x: &[f64], iterations: usize) -> ErmValues {
        let n = self.n;
        let values: Vec<f64> = x[..n].iter().map(|v| v.clamp(0.0, 1.0)).collect();
        let (aux, objective) = match self.loss {
            Loss::Absolute => {
                let w: Vec<f64> = (0..n).map(|i| (self.labels[i] - values[i]).max(0.0)).collect();
                let obj = (0..n).map(|i| values[i] + 2.0 * w[i]).sum::<f64>() / n as f64;
                (w, obj)
            }
            Loss::Squared => {
                let beta = self.beta();
                let slopes = tangent_grid(self.eta);
                let v: Vec<f64> = (0..n)
                    .map(|i| {
                        let (y, fi, wi) = (self.labels[i], x[i], x[2 * n + i]);
                        slopes.iter().fold(0.0f64, |m, &a| {
                            let below = 2.0 * a * y - a * a + 2.0 * self.eta - 2.0 * a * fi;
                            let above = -2.0 * a * y - a * a + 2.0 * self.eta + 2.0 * a * (1.0 + beta) - 2.0 * a * wi;
                            m.max(below).max(above)
                        })
                    })
                    .collect();
                let obj = v.iter().sum::<f64>() / n as f64;
                (v, obj)
            }
        };
        ErmValues {
            values,
            aux,
            objective,
            iterations,
        }
    }
}

pub fn solve_erm(prog: &ErmProgram) -> Result<ErmSolution> {
    solve_erm_with(prog, &SolverOptions::default(), None).map(|(s, _)| s)
}

/// Solves, optionally warm-started; returns the solver state for reuse.
/// Solver budget exhaustion is an error, distinct from infeasibility.
pub fn solve_erm_with(
    prog: &ErmProgram,
    options: &SolverOptions,
    warm: Option<&WarmStart>,
) -> Result<(ErmSolution, WarmStart)> {
    let (out, state) = solver::solve_with(&prog.program, options, warm)?;
    let solution = match out.status {
        Status::Feasible(x) => ErmSolution::Feasible(prog.extract(&x, out.iterations)),
        Status::Infeasible(_) => ErmSolution::Infeasible {
            iterations: out.iterations,
        },
    };
    Ok((solution, state))
}
