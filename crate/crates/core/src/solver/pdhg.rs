//! Restarted primal-dual hybrid gradient on the Lagrangian
//! `min_{x ≥ 0} max_{y ≥ 0} yᵀ(Ax − b)` with `A = [P/p; −C/c]`, `b = [1; −1]`.
//!
//! Feasible points are read off the primal iterates after rescaling to meet
//! the covering rows exactly; certificates come from the dual iterates (or
//! their drift since the last restart), repaired so that `Pᵀu ≥ Cᵀz` holds
//! exactly.

use alloc::vec;
use alloc::vec::Vec;

use super::{Certificate, PackingCoveringProgram, SparseMatrix, Status, WarmStart};
use crate::error::{Error, Result};

const RUIZ_PASSES: usize = 10;
const POWER_STEPS: usize = 100;
const STEP_FRACTION: f64 = 0.9;

struct Scaled {
    a: SparseMatrix,
    at: SparseMatrix,
    b: Vec<f64>,
    row_scale: Vec<f64>,
    col_scale: Vec<f64>,
    /// Scaled row `r < pack_rows.len()` is packing row `pack_rows[r]`; the
    /// remaining rows are covering rows `cover_rows[r - pack_rows.len()]`.
    pack_rows: Vec<usize>,
    cover_rows: Vec<usize>,
}

fn norm(v: &[f64]) -> f64 {
    libm::sqrt(v.iter().map(|t| t * t).sum())
}

fn scale_program(prog: &PackingCoveringProgram) -> Scaled {
    let n = prog.num_vars();
    let mut rows = Vec::new();
    let mut b = Vec::new();
    let mut pack_rows = Vec::new();
    let mut cover_rows = Vec::new();
    for i in 0..prog.packing.nrows() {
        let p = prog.pack_rhs[i];
        let row: Vec<(usize, f64)> = prog.packing.row(i).map(|(c, v)| (c, v / p)).collect();
        if !row.is_empty() {
            rows.push(row);
            b.push(1.0);
            pack_rows.push(i);
        }
    }
    for j in 0..prog.covering.nrows() {
        let c = prog.cover_rhs[j];
        if c > 0.0 {
            rows.push(prog.covering.row(j).map(|(k, v)| (k, -v / c)).collect());
            b.push(-1.0);
            cover_rows.push(j);
        }
    }
    let mut a = SparseMatrix::from_rows(n, &rows);
    let m = a.nrows();
    let mut row_scale = vec![1.0; m];
    let mut col_scale = vec![1.0; n];
    for _ in 0..RUIZ_PASSES {
        let mut rmax = vec![0.0f64; m];
        let mut cmax = vec![0.0f64; n];
        for (i, r) in rmax.iter_mut().enumerate() {
            for k in a.row_range(i) {
                let v = a.values()[k].abs();
                *r = r.max(v);
                let c = a.col_at(k);
                cmax[c] = cmax[c].max(v);
            }
        }
        let rs: Vec<f64> = rmax.iter().map(|&t| if t > 0.0 { 1.0 / libm::sqrt(t) } else { 1.0 }).collect();
        let cs: Vec<f64> = cmax.iter().map(|&t| if t > 0.0 { 1.0 / libm::sqrt(t) } else { 1.0 }).collect();
        for i in 0..m {
            for k in a.row_range(i) {
                let c = a.col_at(k);
                a.values_mut()[k] *= rs[i] * cs[c];
            }
            row_scale[i] *= rs[i];
        }
        for (s, c) in col_scale.iter_mut().zip(&cs) {
            *s *= c;
        }
    }
    for (bi, s) in b.iter_mut().zip(&row_scale) {
        *bi *= s;
    }
    let at = a.transpose();
    Scaled {
        a,
        at,
        b,
        row_scale,
        col_scale,
        pack_rows,
        cover_rows,
    }
}

fn operator_norm(s: &Scaled) -> f64 {
    let n = s.a.ncols();
    if n == 0 || s.a.nnz() == 0 {
        return 1.0;
    }
    let mut v = vec![1.0 / libm::sqrt(n as f64); n];
    let mut lambda = 0.0;
    for _ in 0..POWER_STEPS {
        let w = s.at.mul(&s.a.mul(&v));
        lambda = norm(&w);
        if lambda == 0.0 {
            return 1.0;
        }
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / lambda;
        }
    }
    libm::sqrt(lambda) * 1.05
}

struct Repair<'a> {
    prog: &'a PackingCoveringProgram,
    /// For each variable, the packing row raising `Pᵀu` at that variable
    /// most cheaply in `pᵀu`.
    cheapest: Vec<Option<(usize, f64)>>,
}

impl<'a> Repair<'a> {
    fn new(prog: &'a PackingCoveringProgram) -> Self {
        let mut cheapest: Vec<Option<(usize, f64)>> = vec![None; prog.num_vars()];
        for i in 0..prog.packing.nrows() {
            let p = prog.pack_rhs[i];
            for (k, v) in prog.packing.row(i) {
                let gain = v / p;
                if cheapest[k].is_none_or(|(_, g)| gain > g) {
                    cheapest[k] = Some((i, gain));
                }
            }
        }
        Repair { prog, cheapest }
    }

    fn certificate(&self, mut u: Vec<f64>, z: Vec<f64>) -> Option<Certificate> {
        let prog = self.prog;
        if z.iter().all(|&t| t == 0.0) {
            return None;
        }
        for _ in 0..2 {
            let up = prog.packing.mul_transpose(&u);
            let down = prog.covering.mul_transpose(&z);
            let mut gap: Vec<f64> = up.iter().zip(&down).map(|(a, b)| a - b).collect();
            if gap.iter().all(|&g| g >= 0.0) {
                break;
            }
            for k in 0..gap.len() {
                if gap[k] >= 0.0 {
                    continue;
                }
                let (i, _) = self.cheapest[k]?;
                let coef = prog.packing.row(i).find(|&(c, _)| c == k).map(|e| e.1)?;
                let bump = -gap[k] / coef * (1.0 + 1e-12);
                u[i] += bump;
                for (c, v) in prog.packing.row(i) {
                    gap[c] += bump * v;
                }
            }
        }
        let cert = Certificate { packing: u, covering: z };
        prog.is_certificate(&cert).then_some(cert)
    }
}

impl Scaled {
    fn split_duals(&self, prog: &PackingCoveringProgram, y: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut u = vec![0.0; prog.packing.nrows()];
        let mut z = vec![0.0; prog.covering.nrows()];
        let np = self.pack_rows.len();
        for (r, &yr) in y.iter().enumerate() {
            let t = yr.max(0.0) * self.row_scale[r];
            if r < np {
                let i = self.pack_rows[r];
                u[i] = t / prog.pack_rhs[i];
            } else {
                let j = self.cover_rows[r - np];
                z[j] = t / prog.cover_rhs[j];
            }
        }
        (u, z)
    }

    fn join_duals(&self, prog: &PackingCoveringProgram, u: &[f64], z: &[f64]) -> Vec<f64> {
        let np = self.pack_rows.len();
        (0..self.b.len())
            .map(|r| {
                let raw = if r < np {
                    let i = self.pack_rows[r];
                    u[i] * prog.pack_rhs[i]
                } else {
                    let j = self.cover_rows[r - np];
                    z[j] * prog.cover_rhs[j]
                };
                (raw / self.row_scale[r]).max(0.0)
            })
            .collect()
    }

    fn unscale_primal(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.col_scale).map(|(v, s)| (v * s).max(0.0)).collect()
    }

    fn kkt(&self, x: &[f64], y: &[f64]) -> f64 {
        let ax = self.a.mul(x);
        let pr: f64 = ax.iter().zip(&self.b).map(|(a, b)| (a - b).max(0.0)).map(|t| t * t).sum();
        let aty = self.at.mul(y);
        let du: f64 = aty.iter().map(|t| (-t).max(0.0)).map(|t| t * t).sum();
        let by: f64 = self.b.iter().zip(y).map(|(b, y)| b * y).sum();
        let gap = (-by).max(0.0);
        libm::sqrt(pr + du + gap * gap)
    }
}

/// Relative margin kept on covering rows, so the check survives any
/// summation order.
const COVER_PAD: f64 = 1e-12;

/// Rescales `x` so every covering row holds with margin about
/// [`COVER_PAD`], then checks packing.
fn primal_candidate(prog: &PackingCoveringProgram, mut x: Vec<f64>) -> Option<Vec<f64>> {
    for _ in 0..4 {
        let cover = prog.covering.mul(&x);
        let mut factor = 0.0f64;
        for (a, &c) in cover.iter().zip(&prog.cover_rhs) {
            if c > 0.0 {
                if !(*a > 0.0) {
                    return None;
                }
                factor = factor.max(c * (1.0 + COVER_PAD) / a);
            }
        }
        if (1.0 - COVER_PAD..=1.0 + COVER_PAD / 2.0).contains(&factor) {
            break;
        }
        for v in x.iter_mut() {
            *v *= factor;
        }
    }
    prog.is_relaxed_feasible(&x).then_some(x)
}

pub(super) fn run(
    prog: &PackingCoveringProgram,
    cap: usize,
    check: usize,
    warm: Option<&WarmStart>,
) -> Result<(Status, usize, WarmStart)> {
    let n = prog.num_vars();
    let done = |status: Status, it: usize, x: Vec<f64>, u: Vec<f64>, z: Vec<f64>| {
        Ok((status, it, WarmStart { x, packing: u, covering: z }))
    };
    let no_packing = vec![0.0; prog.packing.nrows()];
    if prog.cover_rhs.iter().all(|&c| c == 0.0) {
        let x = vec![0.0; n];
        return done(Status::Feasible(x.clone()), 0, x, no_packing, vec![0.0; prog.covering.nrows()]);
    }
    if let Some(j) = (0..prog.covering.nrows()).find(|&j| prog.cover_rhs[j] > 0.0 && prog.covering.row(j).next().is_none()) {
        let mut z = vec![0.0; prog.covering.nrows()];
        z[j] = 1.0;
        let cert = Certificate { packing: no_packing.clone(), covering: z };
        return done(Status::Infeasible(cert), 0, vec![0.0; n], no_packing, vec![0.0; prog.covering.nrows()]);
    }

    let s = scale_program(prog);
    let m = s.b.len();
    let repair = Repair::new(prog);
    let step = STEP_FRACTION / operator_norm(&s);

    let (mut x, mut y) = match warm {
        Some(w) => (
            w.x.iter().zip(&s.col_scale).map(|(v, c)| v / c).collect::<Vec<f64>>(),
            s.join_duals(prog, &w.packing, &w.covering),
        ),
        None => (vec![0.0; n], vec![0.0; m]),
    };
    let finish_feasible = |sol: Vec<f64>, it: usize, y: &[f64]| {
        let (u, z) = s.split_duals(prog, y);
        done(Status::Feasible(sol.clone()), it, sol, u, z)
    };
    if warm.is_some() {
        if let Some(sol) = primal_candidate(prog, s.unscale_primal(&x)) {
            return finish_feasible(sol, 0, &y);
        }
    }

    let mut weight = 1.0f64;
    let mut aty = s.at.mul(&y);
    let mut ad = vec![0.0; m];
    let mut sum_x = vec![0.0; n];
    let mut sum_y = vec![0.0; m];
    let mut count = 0usize;
    let (mut x0, mut y0) = (x.clone(), y.clone());
    let mut anchor_kkt = s.kkt(&x, &y);
    let mut previous_kkt = f64::INFINITY;
    let mut diff = vec![0.0; n];

    for it in 1..=cap {
        let tau = step / weight;
        let sigma = step * weight;
        for k in 0..n {
            let xn = (x[k] - tau * aty[k]).max(0.0);
            diff[k] = 2.0 * xn - x[k];
            x[k] = xn;
        }
        s.a.mul_into(&diff, &mut ad);
        for r in 0..m {
            y[r] = (y[r] + sigma * (ad[r] - s.b[r])).max(0.0);
        }
        aty = s.at.mul(&y);
        for (a, v) in sum_x.iter_mut().zip(&x) {
            *a += v;
        }
        for (a, v) in sum_y.iter_mut().zip(&y) {
            *a += v;
        }
        count += 1;
        if it % check != 0 && it != cap {
            continue;
        }

        let inv = 1.0 / count as f64;
        let avg_x: Vec<f64> = sum_x.iter().map(|v| v * inv).collect();
        let avg_y: Vec<f64> = sum_y.iter().map(|v| v * inv).collect();
        for cand in [&x, &avg_x] {
            if let Some(sol) = primal_candidate(prog, s.unscale_primal(cand)) {
                return finish_feasible(sol, it, &y);
            }
        }
        let drift: Vec<f64> = y.iter().zip(&y0).map(|(a, b)| (a - b).max(0.0)).collect();
        for cand in [&y, &drift] {
            let (u, z) = s.split_duals(prog, cand);
            if let Some(cert) = repair.certificate(u, z) {
                return done(Status::Infeasible(cert), it, s.unscale_primal(&x0), no_packing, vec![0.0; prog.covering.nrows()]);
            }
        }

        let k_cur = s.kkt(&x, &y);
        let k_avg = s.kkt(&avg_x, &avg_y);
        let (cand_x, cand_y, k_cand) = if k_avg < k_cur { (avg_x, avg_y, k_avg) } else { (x.clone(), y.clone(), k_cur) };
        let restart = k_cand <= 0.2 * anchor_kkt
            || (k_cand <= 0.8 * anchor_kkt && k_cand > previous_kkt)
            || count as f64 >= 0.36 * it as f64;
        if restart {
            let dx = norm(&cand_x.iter().zip(&x0).map(|(a, b)| a - b).collect::<Vec<_>>());
            let dy = norm(&cand_y.iter().zip(&y0).map(|(a, b)| a - b).collect::<Vec<_>>());
            if dx > 1e-10 && dy > 1e-10 {
                weight = libm::exp(0.5 * libm::log(dy / dx) + 0.5 * libm::log(weight));
            }
            x = cand_x;
            y = cand_y;
            aty = s.at.mul(&y);
            x0.clone_from(&x);
            y0.clone_from(&y);
            sum_x.iter_mut().for_each(|v| *v = 0.0);
            sum_y.iter_mut().for_each(|v| *v = 0.0);
            count = 0;
            anchor_kkt = k_cand;
            previous_kkt = f64::INFINITY;
        } else {
            previous_kkt = k_cand;
        }
    }
    Err(Error::BudgetExhausted { iterations: cap })
}
