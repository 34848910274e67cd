//! Entropic mirror ascent for `D[N‖R^ω]`.
//!
//! For a pure input `ψ_RA'` with `ψ_A' = ρ`, the output `(id⊗N)(ψ)` has the
//! same spectrum as the environment state `N^c(ρ)` and `ψ_R` the spectrum of
//! `ρ`, so
//!
//! ```text
//! D((id⊗N)(ψ) ‖ ψ_R ⊗ ω) = S(ρ) − S(N^c(ρ)) − tr(N(ρ) ln ω) =: f(ρ)
//! ```
//!
//! and the channel divergence is the maximum of the concave function `f` over
//! input density matrices. The ascent iterates in log space,
//! `ln ρ ← ln ρ + t G(ρ)` followed by normalization, with
//! `G = −ln ρ + (N^c)†(ln N^c(ρ)) − N†(ln ω)`. Concavity makes the
//! Frank–Wolfe gap `λ_max(G) − tr(ρG)` an upper bound on `f* − f(ρ)`.

use nalgebra::DVector;
use rand::Rng;

use crate::channels::Channel;
use crate::error::{Error, Result};
use crate::qcore::linalg::{self, c, eigh, inner, CMatrix};
use crate::qcore::random::{density_matrix_with, rng_from_seed};
use crate::qcore::{DensityMatrix, Hermitian, SUPPORT_CUTOFF};

#[derive(Debug, Clone)]
pub struct AscentOptions {
    pub seed: u64,
    pub random_starts: usize,
    pub max_iter: usize,
    /// Stop once the Frank–Wolfe gap falls below this.
    pub gap_tol: f64,
    /// Stop once the relative improvement of an accepted step falls below this
    /// for several consecutive steps.
    pub rel_tol: f64,
    pub extra_starts: Vec<DensityMatrix>,
    /// Random pairs used by the concavity midpoint audit.
    pub concavity_pairs: usize,
}

impl Default for AscentOptions {
    fn default() -> Self {
        AscentOptions {
            seed: 0x5eed,
            random_starts: 10,
            max_iter: 5000,
            gap_tol: 1e-10,
            rel_tol: 1e-15,
            extra_starts: Vec::new(),
            concavity_pairs: 100,
        }
    }
}

const STEP_INIT: f64 = 1.0;
const STEP_MAX: f64 = 1e3;
const STEP_MIN: f64 = 1e-12;
const ARMIJO: f64 = 1e-4;

pub(crate) struct Reduction<'a> {
    channel: &'a Channel,
    /// `N†(ln ω)`.
    pulled_back: CMatrix,
}

pub(crate) struct RunResult {
    pub value: f64,
    pub rho: CMatrix,
    pub iterations: usize,
    pub gap: f64,
}

impl<'a> Reduction<'a> {
    pub fn new(channel: &'a Channel, log_omega: &Hermitian) -> Result<Self> {
        if log_omega.dim() != channel.dim_out() {
            return Err(Error::DimensionMismatch {
                expected: channel.dim_out(),
                got: log_omega.dim(),
            });
        }
        Ok(Reduction {
            channel,
            pulled_back: channel.adjoint_raw(log_omega.matrix()),
        })
    }

    pub fn value(&self, rho: &CMatrix) -> f64 {
        let s_in = linalg::entropy_of(rho, SUPPORT_CUTOFF);
        let env = self.channel.complementary_raw(rho);
        let s_env = linalg::entropy_of(&env, SUPPORT_CUTOFF);
        s_in - s_env - inner(rho, &self.pulled_back)
    }

    /// Gradient with `ln ρ` supplied by the caller (the iterate is kept in log space).
    fn gradient(&self, rho: &CMatrix, log_rho: &CMatrix) -> CMatrix {
        let env = self.channel.complementary_raw(rho);
        let e = eigh(&env);
        let scale = e.max().abs().max(1.0);
        let log_env = e.map(|x| if x > SUPPORT_CUTOFF * scale { x.ln() } else { 0.0 });
        let back = self.channel.complementary_adjoint_raw(&log_env);
        linalg::hermitize(&(back - log_rho - &self.pulled_back))
    }

    /// One ascent run from a full-rank start.
    pub fn run(&self, start: &CMatrix, opts: &AscentOptions) -> RunResult {
        let mut log_rho = normalize_log(&floor_log(start));
        let mut rho = exp_log(&log_rho);
        let mut f = self.value(&rho);
        let mut t = STEP_INIT;
        let mut gap = f64::INFINITY;
        let mut slow = 0;
        let mut iterations = 0;
        for it in 0..opts.max_iter {
            iterations = it + 1;
            let g = self.gradient(&rho, &log_rho);
            gap = (linalg::max_eigenvalue(&g) - inner(&rho, &g)).max(0.0);
            if gap <= opts.gap_tol {
                break;
            }
            let mut accepted = false;
            while t >= STEP_MIN {
                let cand_log = normalize_log(&(&log_rho + &g * c(t, 0.0)));
                let cand = exp_log(&cand_log);
                let fc = self.value(&cand);
                let predicted = inner(&g, &(&cand - &rho));
                if fc.is_finite() && fc >= f + ARMIJO * predicted {
                    let gain = fc - f;
                    log_rho = cand_log;
                    rho = cand;
                    f = fc;
                    accepted = true;
                    if gain <= opts.rel_tol * (1.0 + f.abs()) {
                        slow += 1;
                    } else {
                        slow = 0;
                    }
                    t = (2.0 * t).min(STEP_MAX);
                    break;
                }
                t *= 0.5;
            }
            if !accepted || slow >= 5 {
                break;
            }
        }
        RunResult {
            value: f,
            rho,
            iterations,
            gap,
        }
    }

    /// Midpoint concavity check on random input pairs.
    pub fn concavity_audit(&self, pairs: usize, seed: u64) -> Option<f64> {
        let mut rng = rng_from_seed(seed ^ 0xc0ca);
        let d = self.channel.dim_in();
        for _ in 0..pairs {
            let a = density_matrix_with(d, &mut rng);
            let b = density_matrix_with(d, &mut rng);
            let mid = (a.matrix() + b.matrix()) * c(0.5, 0.0);
            let lhs = self.value(&mid);
            let rhs = 0.5 * (self.value(a.matrix()) + self.value(b.matrix()));
            if lhs < rhs - 1e-9 {
                return Some(rhs - lhs);
            }
        }
        None
    }
}

/// `f(ρ)` for a given channel, log-target and input; exposed for audits.
pub fn reduction_objective(n: &Channel, log_omega: &Hermitian, rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != n.dim_in() {
        return Err(Error::DimensionMismatch {
            expected: n.dim_in(),
            got: rho.dim(),
        });
    }
    Ok(Reduction::new(n, log_omega)?.value(rho.matrix()))
}

/// Log of a PSD matrix with eigenvalues floored so the start is interior.
fn floor_log(m: &CMatrix) -> CMatrix {
    eigh(m).map(|x| x.max(1e-12).ln())
}

/// Shifts `h` so that `tr exp(h) = 1`.
fn normalize_log(h: &CMatrix) -> CMatrix {
    let e = eigh(h);
    let top = e.max();
    let lse = top + e.values.iter().map(|x| (x - top).exp()).sum::<f64>().ln();
    h - linalg::identity(h.nrows()) * c(lse, 0.0)
}

fn exp_log(h: &CMatrix) -> CMatrix {
    linalg::expm_herm(h)
}

/// Purification `Σ_k √λ_k |k⟩_R |v_k⟩_A'` of `rho`, reference first.
pub(crate) fn purify(rho: &CMatrix) -> DensityMatrix {
    let d = rho.nrows();
    let e = eigh(rho);
    let mut v = DVector::from_element(d * d, c(0.0, 0.0));
    for k in 0..d {
        let w = e.values[k].max(0.0).sqrt();
        for a in 0..d {
            v[k * d + a] = e.vectors[(a, k)] * w;
        }
    }
    DensityMatrix::from_raw(linalg::hermitize(&(&v * v.adjoint())))
}

/// Multi-start maximization of `f`; returns the best run and the total iteration count.
pub(crate) fn maximize(
    n: &Channel,
    log_omega: &Hermitian,
    opts: &AscentOptions,
) -> Result<(RunResult, usize, Option<f64>)> {
    let red = Reduction::new(n, log_omega)?;
    let d = n.dim_in();
    let mut rng = rng_from_seed(opts.seed);
    let mut starts: Vec<CMatrix> = vec![DensityMatrix::maximally_mixed(d).into_matrix()];
    for s in &opts.extra_starts {
        if s.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: s.dim(),
            });
        }
        starts.push(s.matrix().clone());
    }
    for _ in 0..opts.random_starts {
        // mix toward the center so random starts stay well inside the simplex
        let r = density_matrix_with(d, &mut rng);
        let w: f64 = 0.5 + 0.5 * rng.random::<f64>();
        starts.push(r.matrix() * c(w, 0.0) + linalg::identity(d) * c((1.0 - w) / d as f64, 0.0));
    }
    let mut best: Option<RunResult> = None;
    let mut total = 0;
    for s in &starts {
        let run = red.run(s, opts);
        total += run.iterations;
        // strict improvement keeps the earliest start on ties
        if best.as_ref().is_none_or(|b| run.value > b.value) {
            best = Some(run);
        }
    }
    let audit = red.concavity_audit(opts.concavity_pairs, opts.seed);
    Ok((best.expect("at least one start"), total, audit))
}
