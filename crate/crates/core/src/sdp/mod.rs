//! Dense complex semidefinite programming.
//!
//! Standard form, one PSD block matrix `X = diag(X_1, …, X_k)`:
//!
//! ```text
//! minimize  ⟨C, X⟩   subject to  ⟨A_i, X⟩ = b_i,  X ⪰ 0
//! maximize  b·y      subject to  S = C − Σ y_i A_i ⪰ 0
//! ```
//!
//! with `⟨A, X⟩ = Re tr(A X)`. The solver is an infeasible-start primal-dual
//! path-following method with Nesterov–Todd scaling and a Mehrotra
//! predictor-corrector step. Constraint matrices are stored sparsely.

mod builder;
mod programs;

pub use builder::{LinearTerm, ProblemBuilder};
pub use programs::{
    channel_ht_sdp, diamond_norm, diamond_norm_of_channels, ht_sdp, smoothed_max_sdp, trace_norm_sdp, ChannelHtSdp,
    CHANNEL_SDP_CHOI_LIMIT, DIAMOND_CHOI_LIMIT,
};

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qcore::linalg::{c, eigh, hermitian_deviation, hermitize, identity, inner, CMatrix};

/// Tolerances at which a solution is reported `Optimal`.
pub const FEAS_TOL: f64 = 1e-7;
pub const GAP_TOL: f64 = 1e-6;
pub const MAX_ITER: usize = 200;

/// The iteration keeps going past the reporting tolerances until these are met
/// or progress stalls; the cross-checks downstream need the extra digits.
const TARGET_FEAS: f64 = 1e-11;
const TARGET_GAP: f64 = 1e-11;

const STEP_FRACTION: f64 = 0.98;
const DIVERGENCE_BOUND: f64 = 1e11;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    MaxIter,
}

/// One nonzero `(row, col) -> value` of a constraint matrix in a given block.
#[derive(Debug, Clone, Copy)]
pub struct Entry {
    pub block: usize,
    pub row: usize,
    pub col: usize,
    pub value: Complex64,
}

/// Hermitian constraint matrix with both triangles stored explicitly.
#[derive(Debug, Clone, Default)]
pub struct SparseHermitian {
    entries: Vec<Entry>,
}

impl SparseHermitian {
    pub fn from_map(map: BTreeMap<(usize, usize, usize), Complex64>) -> Self {
        let entries = map
            .into_iter()
            .filter(|(_, v)| v.norm() > 1e-15)
            .map(|((block, row, col), value)| Entry { block, row, col, value })
            .collect();
        SparseHermitian { entries }
    }

    /// Sparse copy of a dense Hermitian matrix living in `block`.
    pub fn from_dense(block: usize, m: &CMatrix) -> Self {
        let mut map = BTreeMap::new();
        for r in 0..m.nrows() {
            for col in 0..m.ncols() {
                map.insert((block, r, col), m[(r, col)]);
            }
        }
        Self::from_map(map)
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `Re tr(A X)`.
    pub fn dot(&self, x: &[CMatrix]) -> f64 {
        self.entries
            .iter()
            .map(|e| (e.value * x[e.block][(e.col, e.row)]).re)
            .sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        SparseHermitian {
            entries: self
                .entries
                .iter()
                .map(|e| Entry {
                    value: e.value * s,
                    ..*e
                })
                .collect(),
        }
    }

    fn frobenius(&self) -> f64 {
        self.entries.iter().map(|e| e.value.norm_sqr()).sum::<f64>().sqrt()
    }

    fn to_dense(&self, blocks: &[usize]) -> Vec<CMatrix> {
        let mut out: Vec<CMatrix> = blocks.iter().map(|&n| CMatrix::zeros(n, n)).collect();
        for e in &self.entries {
            out[e.block][(e.row, e.col)] += e.value;
        }
        out
    }

    fn max_hermitian_deviation(&self, blocks: &[usize]) -> f64 {
        self.to_dense(blocks)
            .iter()
            .map(hermitian_deviation)
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct SdpProblem {
    pub blocks: Vec<usize>,
    pub objective: Vec<CMatrix>,
    pub constraints: Vec<(SparseHermitian, f64)>,
    pub sense: Sense,
    /// `(first constraint index, label)` for named groups of constraints.
    pub groups: Vec<(usize, String)>,
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub primal_value: f64,
    pub dual_value: f64,
    pub x: Vec<CMatrix>,
    pub y: DVector<f64>,
    pub status: SdpStatus,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
}

impl SdpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SdpStatus::Optimal
    }

    pub fn gap(&self) -> f64 {
        (self.primal_value - self.dual_value).abs()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.x.iter().map(|b| eigh(b).min()).fold(f64::INFINITY, f64::min)
    }
}

impl SdpProblem {
    pub fn total_dim(&self) -> usize {
        self.blocks.iter().sum()
    }

    /// Label of the constraint group with the largest residual at `x`.
    pub fn worst_group(&self, x: &[CMatrix]) -> Option<(String, f64)> {
        let mut worst: Option<(String, f64)> = None;
        for (k, (start, label)) in self.groups.iter().enumerate() {
            let end = self.groups.get(k + 1).map_or(self.constraints.len(), |g| g.0);
            let r = self.constraints[*start..end]
                .iter()
                .map(|(a, b)| (a.dot(x) - b).powi(2))
                .sum::<f64>()
                .sqrt();
            if worst.as_ref().is_none_or(|w| r > w.1) {
                worst = Some((label.clone(), r));
            }
        }
        worst
    }

    fn validate(&self) -> Result<()> {
        if self.blocks.is_empty() || self.blocks.contains(&0) {
            return Err(Error::input("SDP needs at least one nonempty block"));
        }
        if self.objective.len() != self.blocks.len()
            || self
                .objective
                .iter()
                .zip(&self.blocks)
                .any(|(m, &n)| m.shape() != (n, n))
        {
            return Err(Error::input("objective blocks do not match block sizes"));
        }
        for (k, m) in self.objective.iter().enumerate() {
            let dev = hermitian_deviation(m);
            if dev > 1e-10 {
                return Err(Error::input(format!(
                    "objective block {k} is not Hermitian ({dev:.2e})"
                )));
            }
        }
        let cap: usize = self.blocks.iter().map(|n| n * n).sum();
        if self.constraints.len() > cap {
            return Err(Error::input(format!(
                "{} constraints exceed the {cap} degrees of freedom",
                self.constraints.len()
            )));
        }
        for (i, (a, b)) in self.constraints.iter().enumerate() {
            if !b.is_finite() {
                return Err(Error::input(format!("constraint {i} has non-finite rhs")));
            }
            if a.entries
                .iter()
                .any(|e| e.block >= self.blocks.len() || e.row >= self.blocks[e.block] || e.col >= self.blocks[e.block])
            {
                return Err(Error::input(format!("constraint {i} indexes outside its block")));
            }
            let dev = a.max_hermitian_deviation(&self.blocks);
            if dev > 1e-10 {
                return Err(Error::input(format!("constraint {i} is not Hermitian ({dev:.2e})")));
            }
        }
        self.check_rank()
    }

    /// Incremental Cholesky on the Gram matrix of the constraints; rows whose
    /// residual norm collapses are linear combinations of earlier rows.
    fn check_rank(&self) -> Result<()> {
        let m = self.constraints.len();
        let mut gram = DMatrix::<f64>::zeros(m, m);
        let maps: Vec<BTreeMap<(usize, usize, usize), Complex64>> = self
            .constraints
            .iter()
            .map(|(a, _)| a.entries.iter().map(|e| ((e.block, e.row, e.col), e.value)).collect())
            .collect();
        for i in 0..m {
            for j in i..m {
                let (small, large) = if maps[i].len() <= maps[j].len() {
                    (&maps[i], &maps[j])
                } else {
                    (&maps[j], &maps[i])
                };
                let mut acc = 0.0;
                for (k, v) in small {
                    if let Some(w) = large.get(k) {
                        acc += (v * w.conj()).re;
                    }
                }
                gram[(i, j)] = acc;
                gram[(j, i)] = acc;
            }
        }
        let mut l = DMatrix::<f64>::zeros(m, m);
        let mut dependent = Vec::new();
        let mut active = Vec::new();
        for i in 0..m {
            let mut row = vec![0.0; m];
            for &j in &active {
                let mut s = gram[(i, j)];
                for &k in &active {
                    if k >= j {
                        break;
                    }
                    s -= row[k] * l[(j, k)];
                }
                row[j] = s / l[(j, j)];
            }
            let mut d = gram[(i, i)];
            for &j in &active {
                d -= row[j] * row[j];
            }
            if gram[(i, i)] == 0.0 || d <= 1e-10 * gram[(i, i)] {
                dependent.push(i);
                continue;
            }
            for &j in &active {
                l[(i, j)] = row[j];
            }
            l[(i, i)] = d.sqrt();
            active.push(i);
        }
        if !dependent.is_empty() {
            return Err(Error::input(format!(
                "linearly dependent constraint rows: {dependent:?}"
            )));
        }
        Ok(())
    }
}

struct Scaling {
    g: CMatrix,
    g_inv: CMatrix,
    d: Vec<f64>,
    w: CMatrix,
}

fn nt_scaling(x: &CMatrix, s: &CMatrix) -> Option<Scaling> {
    let lx = x.clone().cholesky()?.l();
    let ls = s.clone().cholesky()?.l();
    let svd = (ls.adjoint() * &lx).svd(true, true);
    let u = svd.v_t?.adjoint();
    let d: Vec<f64> = svd.singular_values.iter().copied().collect();
    if d.iter().any(|&x| !(x > 0.0)) {
        return None;
    }
    let n = d.len();
    let mut g = &lx * &u;
    for j in 0..n {
        let f = c(1.0 / d[j].sqrt(), 0.0);
        for i in 0..n {
            g[(i, j)] *= f;
        }
    }
    let lx_inv = lx.clone().try_inverse()?;
    let mut g_inv = u.adjoint() * lx_inv;
    for i in 0..n {
        let f = c(d[i].sqrt(), 0.0);
        for j in 0..n {
            g_inv[(i, j)] *= f;
        }
    }
    let w = hermitize(&(&g * g.adjoint()));
    Some(Scaling { g, g_inv, d, w })
}

/// Largest `α ≤ 1` keeping `x + α dx ⪰ 0`, damped by `STEP_FRACTION`.
fn max_step(x: &[CMatrix], dx: &[CMatrix]) -> f64 {
    let mut alpha: f64 = 1.0;
    for (xb, dxb) in x.iter().zip(dx) {
        let e = eigh(xb);
        let inv_sqrt = e.map(|v| 1.0 / v.max(1e-300).sqrt());
        let m = &inv_sqrt * dxb * &inv_sqrt;
        let lam = eigh(&m).min();
        if lam < 0.0 {
            alpha = alpha.min(-STEP_FRACTION / lam);
        }
    }
    alpha
}

fn block_inner(a: &[CMatrix], b: &[CMatrix]) -> f64 {
    a.iter().zip(b).map(|(x, y)| inner(x, y)).sum()
}

fn block_norm(a: &[CMatrix]) -> f64 {
    a.iter().map(|m| m.norm_squared()).sum::<f64>().sqrt()
}

fn axpy(a: &[CMatrix], s: f64, b: &[CMatrix]) -> Vec<CMatrix> {
    a.iter().zip(b).map(|(x, y)| x + y * c(s, 0.0)).collect()
}

struct Engine<'a> {
    p: &'a SdpProblem,
    c: Vec<CMatrix>,
    b: DVector<f64>,
}

impl Engine<'_> {
    fn a_op(&self, x: &[CMatrix]) -> DVector<f64> {
        DVector::from_iterator(
            self.p.constraints.len(),
            self.p.constraints.iter().map(|(a, _)| a.dot(x)),
        )
    }

    fn a_adj(&self, y: &DVector<f64>) -> Vec<CMatrix> {
        let mut out: Vec<CMatrix> = self.p.blocks.iter().map(|&n| CMatrix::zeros(n, n)).collect();
        for ((a, _), &yi) in self.p.constraints.iter().zip(y.iter()) {
            for e in &a.entries {
                out[e.block][(e.row, e.col)] += e.value * yi;
            }
        }
        out
    }

    fn schur(&self, scal: &[Scaling]) -> DMatrix<f64> {
        let m = self.p.constraints.len();
        let mut mat = DMatrix::<f64>::zeros(m, m);
        let nb = self.p.blocks.len();
        for (j, (aj, _)) in self.p.constraints.iter().enumerate() {
            // W A_j W, block by block
            let mut waw: Vec<Option<CMatrix>> = vec![None; nb];
            let mut per_block: Vec<Vec<&Entry>> = vec![Vec::new(); nb];
            for e in &aj.entries {
                per_block[e.block].push(e);
            }
            for (blk, ents) in per_block.iter().enumerate() {
                if ents.is_empty() {
                    continue;
                }
                let w = &scal[blk].w;
                let n = self.p.blocks[blk];
                let prod = if ents.len() > n {
                    let mut dense = CMatrix::zeros(n, n);
                    for e in ents {
                        dense[(e.row, e.col)] += e.value;
                    }
                    w * dense * w
                } else {
                    let mut acc = CMatrix::zeros(n, n);
                    for e in ents {
                        for q in 0..n {
                            let right = w[(e.col, q)] * e.value;
                            for pp in 0..n {
                                acc[(pp, q)] += w[(pp, e.row)] * right;
                            }
                        }
                    }
                    acc
                };
                waw[blk] = Some(prod);
            }
            for (i, (ai, _)) in self.p.constraints.iter().enumerate().skip(j) {
                let mut acc = 0.0;
                for e in &ai.entries {
                    if let Some(pm) = &waw[e.block] {
                        acc += (e.value * pm[(e.col, e.row)]).re;
                    }
                }
                mat[(i, j)] = acc;
                mat[(j, i)] = acc;
            }
        }
        mat
    }

    /// Solves the Newton system for a given centrality right-hand side `rc`
    /// (`ΔX + W ΔS W = rc`).
    fn direction(
        &self,
        chol: &nalgebra::Cholesky<f64, nalgebra::Dyn>,
        scal: &[Scaling],
        rp: &DVector<f64>,
        rd: &[CMatrix],
        rc: &[CMatrix],
    ) -> (Vec<CMatrix>, DVector<f64>, Vec<CMatrix>) {
        let wrdw: Vec<CMatrix> = rd.iter().zip(scal).map(|(r, s)| &s.w * r * &s.w).collect();
        let tmp: Vec<CMatrix> = rc.iter().zip(&wrdw).map(|(a, b)| a - b).collect();
        let rhs = rp - self.a_op(&tmp);
        let dy = chol.solve(&rhs);
        let ady = self.a_adj(&dy);
        let ds: Vec<CMatrix> = rd.iter().zip(&ady).map(|(r, a)| hermitize(&(r - a))).collect();
        let dx: Vec<CMatrix> = rc
            .iter()
            .zip(&ds)
            .zip(scal)
            .map(|((r, d), s)| hermitize(&(r - &s.w * d * &s.w)))
            .collect();
        (dx, dy, ds)
    }
}

fn factor(mut m: DMatrix<f64>) -> Option<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    let scale = m.diagonal().iter().fold(0.0f64, |a, &b| a.max(b.abs())).max(1e-300);
    for attempt in 0..6 {
        if let Some(ch) = m.clone().cholesky() {
            return Some(ch);
        }
        let shift = scale * 1e-14 * 10f64.powi(attempt * 2);
        for i in 0..m.nrows() {
            m[(i, i)] += shift;
        }
    }
    None
}

pub fn solve(p: &SdpProblem) -> Result<SdpSolution> {
    p.validate()?;
    let sign = match p.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let cmat: Vec<CMatrix> = p.objective.iter().map(|m| hermitize(&(m * c(sign, 0.0)))).collect();
    let b = DVector::from_iterator(p.constraints.len(), p.constraints.iter().map(|(_, b)| *b));
    let eng = Engine { p, c: cmat, b };
    let m = p.constraints.len();
    let n_total = p.total_dim() as f64;

    let norm_c = block_norm(&eng.c);
    let norm_b = eng.b.norm();
    let mut xi: f64 = 10f64.max(n_total.sqrt());
    let mut eta: f64 = 10f64.max(n_total.sqrt()).max(norm_c);
    for (a, bi) in &p.constraints {
        let fa = a.frobenius();
        xi = xi.max(n_total * (1.0 + bi.abs()) / (1.0 + fa));
        eta = eta.max(fa);
    }
    let mut x: Vec<CMatrix> = p.blocks.iter().map(|&n| identity(n) * c(xi, 0.0)).collect();
    let mut s: Vec<CMatrix> = p.blocks.iter().map(|&n| identity(n) * c(eta, 0.0)).collect();
    let mut y = DVector::<f64>::zeros(m);

    let mut status = SdpStatus::MaxIter;
    let mut iterations = 0;
    let mut stall = 0;
    let mut best_merit = f64::INFINITY;
    // late iterations can lose accuracy to ill-conditioning; keep the best
    let mut best = (x.clone(), y.clone(), s.clone());
    for it in 0..MAX_ITER {
        iterations = it;
        let rp = &eng.b - eng.a_op(&x);
        let aty = eng.a_adj(&y);
        let rd: Vec<CMatrix> = eng
            .c
            .iter()
            .zip(&s)
            .zip(&aty)
            .map(|((cm, sm), am)| hermitize(&(cm - sm - am)))
            .collect();
        let pobj = block_inner(&eng.c, &x);
        let dobj = eng.b.dot(&y);
        let pinf = rp.norm() / (1.0 + norm_b);
        let dinf = block_norm(&rd) / (1.0 + norm_c);
        let gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        if pinf <= TARGET_FEAS && dinf <= TARGET_FEAS && gap <= TARGET_GAP {
            status = SdpStatus::Optimal;
            break;
        }
        let merit = pinf.max(dinf).max(gap);
        if merit < best_merit * 0.9 {
            stall = 0;
        } else {
            stall += 1;
        }
        if merit < best_merit {
            best_merit = merit;
            best = (x.clone(), y.clone(), s.clone());
        }
        if stall >= 8 {
            break;
        }
        if block_norm(&x) > DIVERGENCE_BOUND * (1.0 + xi) || y.norm() > DIVERGENCE_BOUND * (1.0 + eta) {
            status = SdpStatus::Infeasible;
            break;
        }

        let mu = block_inner(&x, &s) / n_total;
        let scal: Option<Vec<Scaling>> = x.iter().zip(&s).map(|(xb, sb)| nt_scaling(xb, sb)).collect();
        let Some(scal) = scal else { break };
        let Some(chol) = factor(eng.schur(&scal)) else {
            break;
        };

        // predictor
        let rc_aff: Vec<CMatrix> = x.iter().map(|xb| -xb).collect();
        let (dx_a, _, ds_a) = eng.direction(&chol, &scal, &rp, &rd, &rc_aff);
        let ap = max_step(&x, &dx_a);
        let ad = max_step(&s, &ds_a);
        let mu_aff = block_inner(&axpy(&x, ap, &dx_a), &axpy(&s, ad, &ds_a)) / n_total;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // corrector in the scaled space, where X and S both become diag(d)
        let rc: Vec<CMatrix> = scal
            .iter()
            .zip(dx_a.iter().zip(&ds_a))
            .map(|(sc, (dxb, dsb))| {
                let n = sc.d.len();
                let xt = &sc.g_inv * dxb * sc.g_inv.adjoint();
                let st = sc.g.adjoint() * dsb * &sc.g;
                let prod = &xt * &st;
                let h = (&prod + prod.adjoint()) * c(0.5, 0.0);
                let mut r = CMatrix::zeros(n, n);
                for i in 0..n {
                    for j in 0..n {
                        let lyap = h[(i, j)] * (2.0 / (sc.d[i] + sc.d[j]));
                        r[(i, j)] = -lyap;
                    }
                    r[(i, i)] += c(sigma * mu / sc.d[i] - sc.d[i], 0.0);
                }
                hermitize(&(&sc.g * r * sc.g.adjoint()))
            })
            .collect();
        let (dx, dy, ds) = eng.direction(&chol, &scal, &rp, &rd, &rc);
        let ap = max_step(&x, &dx);
        let ad = max_step(&s, &ds);
        x = axpy(&x, ap, &dx).iter().map(hermitize).collect();
        s = axpy(&s, ad, &ds).iter().map(hermitize).collect();
        y += dy * ad;
    }

    if status == SdpStatus::MaxIter {
        (x, y, s) = best;
    }
    let rp = &eng.b - eng.a_op(&x);
    let aty = eng.a_adj(&y);
    let rd: Vec<CMatrix> = eng
        .c
        .iter()
        .zip(&s)
        .zip(&aty)
        .map(|((cm, sm), am)| cm - sm - am)
        .collect();
    let pobj = block_inner(&eng.c, &x);
    let dobj = eng.b.dot(&y);
    let primal_residual = rp.norm() / (1.0 + norm_b);
    let dual_residual = block_norm(&rd) / (1.0 + norm_c);
    if status == SdpStatus::MaxIter
        && primal_residual <= FEAS_TOL
        && dual_residual <= FEAS_TOL
        && (pobj - dobj).abs() <= GAP_TOL * (1.0 + pobj.abs())
    {
        status = SdpStatus::Optimal;
    }
    Ok(SdpSolution {
        primal_value: sign * pobj,
        dual_value: sign * dobj,
        x,
        y,
        status,
        iterations,
        primal_residual,
        dual_residual,
    })
}

/// Solves and insists on an optimal status.
pub fn solve_optimal(p: &SdpProblem, what: &str) -> Result<SdpSolution> {
    let sol = solve(p)?;
    let blame = || match p.worst_group(&sol.x) {
        Some((label, r)) => format!("; worst constraint block '{label}' (residual {r:.2e})"),
        None => String::new(),
    };
    match sol.status {
        SdpStatus::Optimal => Ok(sol),
        SdpStatus::Infeasible => Err(Error::numerical(format!("{what}: SDP reported infeasible{}", blame()))),
        SdpStatus::MaxIter => Err(Error::numerical(format!(
            "{what}: SDP did not converge (primal residual {:.2e}, dual residual {:.2e}, gap {:.2e}){}",
            sol.primal_residual,
            sol.dual_residual,
            sol.gap(),
            blame()
        ))),
    }
}
