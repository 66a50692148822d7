//! Approximate feasibility for non-negative packing/covering programs.
//!
//! Given `P, C ≥ 0`, `p > 0`, `c ≥ 0` and `β ∈ (0, 1)`, [`solve`] returns
//! either `x ≥ 0` with `Px ≤ (1+β)p` and `Cx ≥ c`, or a Farkas certificate
//! that no `x ≥ 0` has `Px ≤ p` and `Cx ≥ c`. Both outputs are re-verified
//! with fresh matrix-vector products before they are returned.

mod matrix;
mod pdhg;

use alloc::vec::Vec;

use crate::error::{Error, Result};

pub use matrix::SparseMatrix;

/// Iterations allowed per unit of `m·d·max(1, ln m)/β²`.
pub const BUDGET_CONSTANT: f64 = 256.0;

/// Default ceiling on iterations regardless of the program size.
pub const DEFAULT_HARD_CAP: usize = 250_000;

#[derive(Debug, Clone, PartialEq)]
pub struct PackingCoveringProgram {
    packing: SparseMatrix,
    pack_rhs: Vec<f64>,
    covering: SparseMatrix,
    cover_rhs: Vec<f64>,
    beta: f64,
}

impl PackingCoveringProgram {
    pub fn new(
        packing: SparseMatrix,
        pack_rhs: Vec<f64>,
        covering: SparseMatrix,
        cover_rhs: Vec<f64>,
        beta: f64,
    ) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::Domain("relaxation β must lie in (0, 1)"));
        }
        if packing.ncols() != covering.ncols() {
            return Err(Error::Domain("packing and covering matrices disagree on the variable count"));
        }
        if packing.nrows() != pack_rhs.len() || covering.nrows() != cover_rhs.len() {
            return Err(Error::Domain("right-hand side length differs from the row count"));
        }
        let entries_ok = |m: &SparseMatrix| m.values().iter().all(|v| *v >= 0.0 && v.is_finite());
        if !entries_ok(&packing) || !entries_ok(&covering) {
            return Err(Error::Domain("matrix entries must be non-negative and finite"));
        }
        if pack_rhs.iter().any(|p| !(*p > 0.0) || !p.is_finite()) {
            return Err(Error::Domain("packing right-hand sides must be positive"));
        }
        if cover_rhs.iter().any(|c| !(*c >= 0.0) || !c.is_finite()) {
            return Err(Error::Domain("covering right-hand sides must be non-negative"));
        }
        Ok(PackingCoveringProgram {
            packing,
            pack_rhs,
            covering,
            cover_rhs,
            beta,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.packing.ncols()
    }

    /// Total number of rows `m`.
    pub fn num_rows(&self) -> usize {
        self.packing.nrows() + self.covering.nrows()
    }

    /// Largest number of rows any variable appears in (`d`).
    pub fn max_rows_per_var(&self) -> usize {
        let mut count = alloc::vec![0usize; self.num_vars()];
        for m in [&self.packing, &self.covering] {
            for i in 0..m.nrows() {
                for (c, _) in m.row(i) {
                    count[c] += 1;
                }
            }
        }
        count.into_iter().max().unwrap_or(0)
    }

    pub fn packing(&self) -> &SparseMatrix {
        &self.packing
    }

    pub fn pack_rhs(&self) -> &[f64] {
        &self.pack_rhs
    }

    pub fn covering(&self) -> &SparseMatrix {
        &self.covering
    }

    pub fn cover_rhs(&self) -> &[f64] {
        &self.cover_rhs
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `⌈K·m·d·max(1, ln m)/β²⌉` with `K =` [`BUDGET_CONSTANT`].
    pub fn iteration_budget(&self) -> f64 {
        let m = self.num_rows().max(1) as f64;
        let d = self.max_rows_per_var().max(1) as f64;
        libm::ceil(BUDGET_CONSTANT * m * d * libm::log(m).max(1.0) / (self.beta * self.beta))
    }

    /// `x ≥ 0`, `Px ≤ (1+β)p` and `Cx ≥ c`, computed afresh.
    pub fn is_relaxed_feasible(&self, x: &[f64]) -> bool {
        x.len() == self.num_vars()
            && x.iter().all(|v| *v >= 0.0 && v.is_finite())
            && self
                .packing
                .mul(x)
                .iter()
                .zip(&self.pack_rhs)
                .all(|(a, p)| *a <= (1.0 + self.beta) * p)
            && self.covering.mul(x).iter().zip(&self.cover_rhs).all(|(a, c)| a >= c)
    }

    /// `u, z ≥ 0`, `Pᵀu − Cᵀz ≥ 0` and `pᵀu < cᵀz`, computed afresh.
    pub fn is_certificate(&self, cert: &Certificate) -> bool {
        if cert.packing.len() != self.packing.nrows() || cert.covering.len() != self.covering.nrows() {
            return false;
        }
        let nonneg = |v: &[f64]| v.iter().all(|t| *t >= 0.0 && t.is_finite());
        if !nonneg(&cert.packing) || !nonneg(&cert.covering) {
            return false;
        }
        let up = self.packing.mul_transpose(&cert.packing);
        let down = self.covering.mul_transpose(&cert.covering);
        if up.iter().zip(&down).any(|(a, b)| a < b) {
            return false;
        }
        let lhs: f64 = cert.packing.iter().zip(&self.pack_rhs).map(|(u, p)| u * p).sum();
        let rhs: f64 = cert.covering.iter().zip(&self.cover_rhs).map(|(z, c)| z * c).sum();
        lhs < rhs
    }
}

/// Multipliers for the packing (`u`) and covering (`z`) rows proving
/// infeasibility: any feasible `x` would give `pᵀu ≥ uᵀPx ≥ zᵀCx ≥ cᵀz`.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub packing: Vec<f64>,
    pub covering: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    Feasible(Vec<f64>),
    Infeasible(Certificate),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOutcome {
    pub status: Status,
    pub iterations: usize,
}

impl SolverOutcome {
    pub fn solution(&self) -> Option<&[f64]> {
        match &self.status {
            Status::Feasible(x) => Some(x),
            Status::Infeasible(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Ceiling applied on top of [`PackingCoveringProgram::iteration_budget`].
    pub hard_cap: usize,
    /// Iterations between candidate checks and restart decisions.
    pub check_every: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            hard_cap: DEFAULT_HARD_CAP,
            check_every: 64,
        }
    }
}

/// Primal point and row multipliers carried between solves of programs with
/// the same shape. Multipliers are kept in certificate units.
#[derive(Debug, Clone, PartialEq)]
pub struct WarmStart {
    pub x: Vec<f64>,
    pub packing: Vec<f64>,
    pub covering: Vec<f64>,
}

pub fn solve(prog: &PackingCoveringProgram) -> Result<SolverOutcome> {
    solve_with(prog, &SolverOptions::default(), None).map(|(o, _)| o)
}

/// Solves, optionally starting from `warm` (ignored when its shape differs).
/// Running out of iterations is [`Error::BudgetExhausted`].
pub fn solve_with(
    prog: &PackingCoveringProgram,
    options: &SolverOptions,
    warm: Option<&WarmStart>,
) -> Result<(SolverOutcome, WarmStart)> {
    let warm = warm.filter(|w| {
        w.x.len() == prog.num_vars()
            && w.packing.len() == prog.packing.nrows()
            && w.covering.len() == prog.covering.nrows()
    });
    let cap = (options.hard_cap as f64).min(prog.iteration_budget()) as usize;
    let (status, iterations, state) = pdhg::run(prog, cap, options.check_every.max(1), warm)?;
    let verified = match &status {
        Status::Feasible(x) => prog.is_relaxed_feasible(x),
        Status::Infeasible(cert) => prog.is_certificate(cert),
    };
    if !verified {
        return Err(Error::BudgetExhausted { iterations });
    }
    Ok((SolverOutcome { status, iterations }, state))
}

/// Rows forcing a negated companion `x̃ = 1 − f` up to the relaxation:
/// the packing row `f + x̃ ≤ 1` and the covering row `f + x̃ ≥ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferencePair {
    pub value: usize,
    pub negated: usize,
}

impl DifferencePair {
    /// Row coefficients shared by both rows; the right-hand side is 1.
    pub fn row(&self) -> Vec<(usize, f64)> {
        alloc::vec![(self.value, 1.0), (self.negated, 1.0)]
    }

    /// Interval of `x̃` admitted by the relaxed rows when `f` is fixed:
    /// `[1 − f, (1+β) − f]`, clipped at 0.
    pub fn admissible(f: f64, beta: f64) -> (f64, f64) {
        ((1.0 - f).max(0.0), ((1.0 + beta) - f).max(0.0))
    }
}

/// Emits the packing and covering rows of a difference pair.
pub fn encode_difference_pair(value: usize, negated: usize) -> (DifferencePair, Vec<(usize, f64)>, Vec<(usize, f64)>) {
    let pair = DifferencePair { value, negated };
    let row = pair.row();
    (pair, row.clone(), row)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn program(pack: &[Vec<(usize, f64)>], p: &[f64], cover: &[Vec<(usize, f64)>], c: &[f64], n: usize, beta: f64) -> PackingCoveringProgram {
        PackingCoveringProgram::new(
            SparseMatrix::from_rows(n, pack),
            p.to_vec(),
            SparseMatrix::from_rows(n, cover),
            c.to_vec(),
            beta,
        )
        .unwrap()
    }

    #[test]
    fn forced_single_value() {
        let prog = program(&[vec![(0, 1.0)]], &[1.0], &[vec![(0, 1.0)]], &[1.0], 1, 0.01);
        let out = solve(&prog).unwrap();
        let x = out.solution().unwrap();
        assert!(x[0] >= 1.0 && x[0] <= 1.01);
    }

    #[test]
    fn sum_cover_with_unit_packing() {
        let beta = 0.01;
        let prog = program(
            &[vec![(0, 1.0)], vec![(1, 1.0)]],
            &[1.0, 1.0],
            &[vec![(0, 1.0), (1, 1.0)]],
            &[2.0],
            2,
            beta,
        );
        let x = solve(&prog).unwrap().solution().unwrap().to_vec();
        assert!(x[0] + x[1] >= 2.0);
        assert!(x.iter().all(|&v| v <= 1.0 + beta && v >= 1.0 - 2.0 * beta));
    }

    #[test]
    fn incompatible_bounds_are_certified() {
        let prog = program(&[vec![(0, 1.0)]], &[1.0], &[vec![(0, 1.0)]], &[3.0], 1, 0.1);
        match solve(&prog).unwrap().status {
            Status::Infeasible(cert) => assert!(prog.is_certificate(&cert)),
            other => panic!("expected a certificate, got {other:?}"),
        }
    }

    #[test]
    fn empty_covering_row_is_infeasible() {
        let prog = program(&[vec![(0, 1.0)]], &[1.0], &[vec![]], &[1.0], 1, 0.1);
        assert!(matches!(solve(&prog).unwrap().status, Status::Infeasible(_)));
    }

    #[test]
    fn validation() {
        let m = || SparseMatrix::from_rows(1, &[vec![(0, 1.0)]]);
        assert!(PackingCoveringProgram::new(m(), vec![0.0], m(), vec![1.0], 0.1).is_err());
        assert!(PackingCoveringProgram::new(m(), vec![1.0], m(), vec![1.0], 1.0).is_err());
        let neg = SparseMatrix::from_rows(1, &[vec![(0, -1.0)]]);
        assert!(PackingCoveringProgram::new(neg, vec![1.0], m(), vec![1.0], 0.1).is_err());
    }

    #[test]
    fn difference_pair_interval() {
        assert_eq!(DifferencePair::admissible(0.0, 0.1), (1.0, 1.1));
        let (lo, hi) = DifferencePair::admissible(1.0, 0.1);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.1).abs() < 1e-15);
        let (lo, hi) = DifferencePair::admissible(0.4, 0.01);
        assert!((lo - 0.6).abs() < 1e-15 && (hi - 0.61).abs() < 1e-15);
        let (_, pack, cover) = encode_difference_pair(0, 1);
        assert_eq!(pack, vec![(0, 1.0), (1, 1.0)]);
        assert_eq!(pack, cover);
    }
}
