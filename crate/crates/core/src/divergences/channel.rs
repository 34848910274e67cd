//! Divergences of a channel from a replacer channel `R^ω`.

use nalgebra::DVector;

use super::ascent::{self, AscentOptions};
use super::oracle::{bloch_grid_states, purified_output_raw};
use super::{neyman_pearson, Certificate, DivergenceKind, DivergenceReport, SUPPORT_TOL};
use crate::channels::Channel;
use crate::error::{Error, Result};
use crate::optim::NelderMead;
use crate::qcore::linalg::{self, c, eigh, kron, CMatrix};
use crate::qcore::random::{complex_gaussian, rng_from_seed};
use crate::qcore::{DensityMatrix, Hermitian};
use crate::sdp::{channel_ht_sdp, smoothed_max_sdp, CHANNEL_SDP_CHOI_LIMIT};

fn check_target(n: &Channel, omega: &Hermitian) -> Result<()> {
    if omega.dim() != n.dim_out() {
        return Err(Error::DimensionMismatch {
            expected: n.dim_out(),
            got: omega.dim(),
        });
    }
    let min = omega.min_eigenvalue();
    if min < -1e-10 {
        return Err(Error::NotPsd(min));
    }
    Ok(())
}

fn full_rank_log(omega: &Hermitian) -> Result<Hermitian> {
    let e = eigh(omega.matrix());
    let scale = e.max().abs().max(1.0);
    if e.min() <= SUPPORT_TOL * scale {
        return Err(Error::input(format!(
            "omega must be full rank (smallest eigenvalue {:.3e})",
            e.min()
        )));
    }
    Ok(Hermitian::from_raw(e.map(f64::ln)))
}

fn check_eps(eps: f64) -> Result<()> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::input(format!("eps must lie in [0, 1), got {eps}")));
    }
    Ok(())
}

/// `D[N‖R^ω]` for full-rank `ω` (normalized or not).
pub fn channel_rel_entropy_replacer(n: &Channel, omega: &Hermitian) -> Result<DivergenceReport> {
    check_target(n, omega)?;
    let log_omega = full_rank_log(omega)?;
    channel_rel_entropy_log(n, &log_omega, &AscentOptions::default())
}

/// `D[N‖R^ω]` with `ln ω` supplied directly.
pub fn channel_rel_entropy_log(n: &Channel, log_omega: &Hermitian, opts: &AscentOptions) -> Result<DivergenceReport> {
    let (best, iterations, audit) = ascent::maximize(n, log_omega, opts)?;
    let certificate = if audit.is_none() {
        Certificate::LowerBound
    } else {
        Certificate::Heuristic
    };
    let mut report = DivergenceReport::new(best.value, DivergenceKind::Relative, certificate);
    report.achieving_input = Some(ascent::purify(&best.rho));
    report.iterations = iterations;
    report.residual = best.gap;
    if let Some(violation) = audit {
        report.warning = Some(format!("concavity audit failed by {violation:.3e}; value is heuristic"));
    } else if best.gap > 1e-6 {
        report.warning = Some(format!("ascent stopped with optimality gap {:.3e}", best.gap));
    }
    Ok(report)
}

/// `D_∞[N‖R^ω] = ln λ_max((I⊗ω)^{-1/2} J_N (I⊗ω)^{-1/2})`, infinite when
/// the Choi matrix leaves `I ⊗ supp ω`.
pub fn channel_max_rel_entropy(n: &Channel, omega: &Hermitian) -> Result<DivergenceReport> {
    check_target(n, omega)?;
    let e = eigh(omega.matrix());
    let scale = e.max().abs().max(1.0);
    let keep = |x: f64| x > SUPPORT_TOL * scale;
    let inv = e.map(|x| if keep(x) { 1.0 / x.sqrt() } else { 0.0 });
    let kernel = e.map(|x| if keep(x) { 0.0 } else { 1.0 });
    let din = n.dim_in();
    let leak = linalg::inner(&kron(&linalg::identity(din), &kernel), n.choi());
    if leak > SUPPORT_TOL * din as f64 {
        let mut r = DivergenceReport::new(f64::INFINITY, DivergenceKind::Max, Certificate::Exact);
        r.warning = Some("Choi matrix is not supported on I ⊗ supp(omega)".into());
        return Ok(r);
    }
    Ok(pencil_report(n, &inv))
}

/// `D_∞[N‖R^ω]` with `ln ω` supplied.
pub fn channel_max_rel_entropy_log(n: &Channel, log_omega: &Hermitian) -> Result<DivergenceReport> {
    if log_omega.dim() != n.dim_out() {
        return Err(Error::DimensionMismatch {
            expected: n.dim_out(),
            got: log_omega.dim(),
        });
    }
    let inv = linalg::expm_herm(&(log_omega.matrix() * c(-0.5, 0.0)));
    Ok(pencil_report(n, &inv))
}

fn pencil_report(n: &Channel, inv_sqrt: &CMatrix) -> DivergenceReport {
    let w = kron(&linalg::identity(n.dim_in()), inv_sqrt);
    let pencil = linalg::hermitize(&(&w * n.choi() * &w));
    let e = eigh(&pencil);
    let mut r = DivergenceReport::new(e.max().ln(), DivergenceKind::Max, Certificate::Exact);
    // every input with full-rank reference attains the pencil value
    let din = n.dim_in();
    r.achieving_input = Some(input_from_amplitudes(&linalg::identity(din)));
    r
}

/// `|ψ⟩ = Σ_i A|i⟩ ⊗ |i⟩`, reference first.
pub fn input_from_amplitudes(a: &CMatrix) -> DensityMatrix {
    let d = a.nrows();
    let norm = a.norm();
    let mut v = DVector::from_element(d * d, c(0.0, 0.0));
    for r in 0..d {
        for i in 0..d {
            v[r * d + i] = a[(r, i)] / norm;
        }
    }
    DensityMatrix::from_raw(linalg::hermitize(&(&v * v.adjoint())))
}

/// Inverse of [`input_from_amplitudes`] for a pure input, up to a global phase.
pub fn amplitudes_from_input(psi: &DensityMatrix) -> Result<CMatrix> {
    let n = psi.dim();
    let d = (n as f64).sqrt().round() as usize;
    if d * d != n {
        return Err(Error::input(format!(
            "input of dimension {n} is not a square bipartition"
        )));
    }
    let e = eigh(psi.matrix());
    let v = e.column(n - 1) * c(e.max().max(0.0).sqrt(), 0.0);
    Ok(CMatrix::from_fn(d, d, |r, i| v[r * d + i]))
}

/// Search effort for the hypothesis-testing supremum over inputs.
#[derive(Debug, Clone)]
pub struct HtBudget {
    /// Random Nelder–Mead restarts in addition to the best seed.
    pub restarts: usize,
    /// Function evaluations per Nelder–Mead run.
    pub max_evals: usize,
    pub seed: u64,
    /// Seed the search with the joint program when the Choi dimension allows.
    pub use_sdp: bool,
    /// Bloch grid density for qubit inputs; 0 disables the grid.
    pub grid_density: usize,
    /// Extra starting inputs, as matrices `A` with `ψ = Σ_i A|i⟩⊗|i⟩`.
    pub seed_inputs: Vec<CMatrix>,
}

impl Default for HtBudget {
    fn default() -> Self {
        HtBudget {
            restarts: 3,
            max_evals: 1500,
            seed: 0x5eed,
            use_sdp: true,
            grid_density: 7,
            seed_inputs: Vec::new(),
        }
    }
}

struct HtObjective<'a> {
    n: &'a Channel,
    omega: CMatrix,
    eps: f64,
}

impl HtObjective<'_> {
    fn at(&self, a: &CMatrix) -> f64 {
        let (out, reference) = purified_output_raw(self.n, a);
        let sigma = kron(&reference, &self.omega);
        match neyman_pearson(&out, &sigma, self.eps) {
            Ok(t) => t.value,
            Err(_) => f64::NEG_INFINITY,
        }
    }

    fn unpack(&self, x: &[f64]) -> CMatrix {
        let d = self.n.dim_in();
        CMatrix::from_fn(d, d, |r, i| c(x[2 * (r * d + i)], x[2 * (r * d + i) + 1]))
    }

    fn pack(a: &CMatrix) -> Vec<f64> {
        let d = a.nrows();
        let mut x = vec![0.0; 2 * d * d];
        for r in 0..d {
            for i in 0..d {
                x[2 * (r * d + i)] = a[(r, i)].re;
                x[2 * (r * d + i) + 1] = a[(r, i)].im;
            }
        }
        x
    }
}

/// `sup_ψ D_H^ε((id⊗N)(ψ) ‖ ψ_R ⊗ ω)` with `ln ω` supplied.
///
/// Candidates: the maximally entangled input, the joint program's optimal
/// reference state (when `ε > 0` and the Choi dimension fits), a Bloch grid for
/// qubit inputs, caller seeds, then Nelder–Mead from the best candidate and
/// from random inputs. Always a lower bound.
pub fn channel_ht_rel_entropy(
    n: &Channel,
    log_omega: &Hermitian,
    eps: f64,
    budget: &HtBudget,
) -> Result<DivergenceReport> {
    check_eps(eps)?;
    if log_omega.dim() != n.dim_out() {
        return Err(Error::DimensionMismatch {
            expected: n.dim_out(),
            got: log_omega.dim(),
        });
    }
    let d = n.dim_in();
    let obj = HtObjective {
        n,
        omega: linalg::expm_herm(log_omega.matrix()),
        eps,
    };
    let mut best_a = linalg::identity(d) * c(1.0 / (d as f64).sqrt(), 0.0);
    let mut best = obj.at(&best_a);
    let consider = |a: CMatrix, best: &mut f64, best_a: &mut CMatrix| {
        let v = obj.at(&a);
        if v > *best {
            *best = v;
            *best_a = a;
        }
    };
    let mut sdp_value = None;
    let mut warning = None;
    let choi_dim = n.dim_in() * n.dim_out();
    if budget.use_sdp && eps > 0.0 {
        if choi_dim <= CHANNEL_SDP_CHOI_LIMIT {
            match channel_ht_sdp(n.choi(), &obj.omega, d, n.dim_out(), eps) {
                Ok(sol) => {
                    sdp_value = Some(sol.value);
                    let tau = linalg::hermitize(&sol.reference_state);
                    consider(linalg::sqrt_psd(&tau), &mut best, &mut best_a);
                }
                Err(e) => warning = Some(format!("joint program skipped: {e}")),
            }
        } else {
            warning = Some(format!(
                "budget exceeded: Choi dimension {choi_dim} above {CHANNEL_SDP_CHOI_LIMIT}, search only"
            ));
        }
    }
    if d == 2 && budget.grid_density >= 2 {
        for rho in bloch_grid_states(budget.grid_density) {
            consider(linalg::sqrt_psd(&rho), &mut best, &mut best_a);
        }
    }
    for a in &budget.seed_inputs {
        if a.nrows() != d || a.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: a.nrows(),
            });
        }
        if a.norm() > 0.0 {
            consider(a.clone(), &mut best, &mut best_a);
        }
    }

    let nm = NelderMead {
        max_evals: budget.max_evals,
        ..NelderMead::default()
    };
    let f = |x: &[f64]| {
        let a = obj.unpack(x);
        if a.norm() < 1e-12 {
            return f64::INFINITY;
        }
        -obj.at(&a)
    };
    let mut rng = rng_from_seed(budget.seed);
    let mut starts = vec![best_a.clone()];
    for _ in 0..budget.restarts {
        starts.push(CMatrix::from_fn(d, d, |_, _| complex_gaussian(&mut rng)));
    }
    let mut evaluations = 0;
    for s in starts {
        let s = &s / c(s.norm(), 0.0);
        let m = nm.minimize(f, &HtObjective::pack(&s));
        evaluations += m.evaluations;
        if -m.value > best {
            best = -m.value;
            best_a = obj.unpack(&m.x);
        }
    }
    let mut report = DivergenceReport::new(best, DivergenceKind::HypothesisTesting, Certificate::LowerBound);
    report.achieving_input = Some(input_from_amplitudes(&best_a));
    report.iterations = evaluations;
    report.residual = sdp_value.map_or(0.0, |v| (v - best).abs());
    report.warning = warning;
    Ok(report)
}

/// Smoothed max-divergence over the diamond ball `‖N − N'‖_⋄ ≤ ε`.
pub fn smoothed_channel_max_rel_entropy(n: &Channel, omega: &Hermitian, eps: f64) -> Result<DivergenceReport> {
    check_target(n, omega)?;
    let log_omega = full_rank_log(omega)?;
    smoothed_channel_max_rel_entropy_log(n, &log_omega, eps)
}

/// As [`smoothed_channel_max_rel_entropy`] with `ln ω` supplied.
pub fn smoothed_channel_max_rel_entropy_log(n: &Channel, log_omega: &Hermitian, eps: f64) -> Result<DivergenceReport> {
    check_eps(eps)?;
    let exact = channel_max_rel_entropy_log(n, log_omega)?;
    if eps == 0.0 {
        let mut r = exact;
        r.kind = DivergenceKind::SmoothedMax;
        return Ok(r);
    }
    let omega = linalg::expm_herm(log_omega.matrix());
    let (value, sol) = match smoothed_max_sdp(n.choi(), &omega, n.dim_in(), n.dim_out(), eps) {
        Ok(v) => v,
        Err(Error::Numerical(msg)) if !msg.contains("budget exceeded") => {
            // N itself lies in the ball, so the unsmoothed value is still an upper bound
            let mut r = exact;
            r.kind = DivergenceKind::SmoothedMax;
            r.certificate = Certificate::UpperBound;
            r.warning = Some(format!(
                "smoothing program failed, reporting the unsmoothed value: {msg}"
            ));
            return Ok(r);
        }
        Err(e) => return Err(e),
    };
    let mut r = DivergenceReport::new(
        value.min(exact.value),
        DivergenceKind::SmoothedMax,
        Certificate::UpperBound,
    );
    r.iterations = sol.iterations;
    r.residual = sol.primal_residual.max(sol.dual_residual);
    r.achieving_input = exact.achieving_input;
    Ok(r)
}
