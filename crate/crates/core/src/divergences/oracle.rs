//! Brute-force evaluation of `D[N‖R^ω]` by sweeping over purified inputs.
//! Independent of the ascent: every candidate is scored with the full bipartite
//! relative entropy.

use std::f64::consts::PI;

use super::{rel_entropy_with_log_raw, Certificate, DivergenceKind, DivergenceReport, SUPPORT_TOL};
use crate::channels::Channel;
use crate::error::{Error, Result};
use crate::optim::NelderMead;
use crate::qcore::linalg::{self, c, eigh, kron, CMatrix};
use crate::qcore::random::{ginibre, rng_from_seed};
use crate::qcore::{DensityMatrix, Hermitian};

use super::channel::input_from_amplitudes;

#[derive(Debug, Clone, Copy)]
pub enum OracleMode {
    /// Bloch-ball grid over qubit inputs with `density` points per axis,
    /// optionally polished by Nelder–Mead from the best grid point.
    Grid { density: usize, polish: bool },
    /// Haar-random pure inputs `ψ_RA'` with `|R| = dim_in`.
    Sampling { samples: usize, seed: u64 },
}

/// Output `(A⊗I) J (A⊗I)†` and reference `AA†` of the input
/// `Σ_i A|i⟩⊗|i⟩`, with `A` normalized to unit Frobenius norm.
pub(crate) fn purified_output_raw(n: &Channel, a: &CMatrix) -> (CMatrix, CMatrix) {
    let a = a / c(a.norm(), 0.0);
    let w = kron(&a, &linalg::identity(n.dim_out()));
    let out = linalg::hermitize(&(&w * n.choi() * w.adjoint()));
    let reference = linalg::hermitize(&(&a * a.adjoint()));
    (out, reference)
}

/// `((id⊗N)(ψ), ψ_R)` for `|ψ⟩ = Σ_i A|i⟩⊗|i⟩ / ‖A‖₂`.
pub fn purified_output(n: &Channel, a: &CMatrix) -> Result<(DensityMatrix, DensityMatrix)> {
    if a.nrows() != n.dim_in() || a.ncols() != n.dim_in() {
        return Err(Error::DimensionMismatch {
            expected: n.dim_in(),
            got: a.nrows(),
        });
    }
    if a.norm() == 0.0 {
        return Err(Error::input("input amplitude matrix is zero"));
    }
    let (out, reference) = purified_output_raw(n, a);
    Ok((DensityMatrix::from_raw(out), DensityMatrix::from_raw(reference)))
}

/// Qubit density matrices `(I + r·σ)/2` on a spherical grid:
/// `r_i = i/(d−1)`, `θ_j = πj/(d−1)`, `φ_k = 2πk/(d−1)`.
pub fn bloch_grid_states(density: usize) -> Vec<CMatrix> {
    let d = density.max(2);
    let step = (d - 1) as f64;
    let mut out = Vec::with_capacity(d * d * (d - 1));
    for i in 0..d {
        let r = i as f64 / step;
        for j in 0..d {
            let theta = PI * j as f64 / step;
            for k in 0..d - 1 {
                let phi = 2.0 * PI * k as f64 / step;
                out.push(bloch_state([
                    r * theta.sin() * phi.cos(),
                    r * theta.sin() * phi.sin(),
                    r * theta.cos(),
                ]));
            }
        }
    }
    out
}

fn bloch_state(v: [f64; 3]) -> CMatrix {
    let [x, y, z] = v;
    CMatrix::from_row_slice(
        2,
        2,
        &[
            c(0.5 * (1.0 + z), 0.0),
            c(0.5 * x, -0.5 * y),
            c(0.5 * x, 0.5 * y),
            c(0.5 * (1.0 - z), 0.0),
        ],
    )
}

struct Bipartite<'a> {
    n: &'a Channel,
    log_omega: &'a CMatrix,
}

impl Bipartite<'_> {
    /// `D((id⊗N)(ψ) ‖ ψ_R ⊗ ω)` for `ψ = Σ_i A|i⟩⊗|i⟩`.
    fn score(&self, a: &CMatrix) -> f64 {
        let (out, reference) = purified_output_raw(self.n, a);
        let e = eigh(&reference);
        let log_ref = e.map(|x| if x > SUPPORT_TOL { x.ln() } else { 0.0 });
        let dout = self.n.dim_out();
        let din = self.n.dim_in();
        let log_target = kron(&log_ref, &linalg::identity(dout)) + kron(&linalg::identity(din), self.log_omega);
        rel_entropy_with_log_raw(&out, &log_target)
    }
}

/// Max over sampled inputs of `D((id⊗N)(ψ) ‖ ψ_R ⊗ ω)`; a lower bound on the
/// channel divergence.
pub fn channel_rel_entropy_bruteforce(n: &Channel, omega: &Hermitian, mode: OracleMode) -> Result<DivergenceReport> {
    if omega.dim() != n.dim_out() {
        return Err(Error::DimensionMismatch {
            expected: n.dim_out(),
            got: omega.dim(),
        });
    }
    let e = eigh(omega.matrix());
    if e.min() <= SUPPORT_TOL * e.max().abs().max(1.0) {
        return Err(Error::input("omega must be full rank"));
    }
    let log_omega = e.map(f64::ln);
    let scorer = Bipartite {
        n,
        log_omega: &log_omega,
    };
    let din = n.dim_in();
    let mut best = f64::NEG_INFINITY;
    let mut best_a = linalg::identity(din);
    let mut count = 0;
    match mode {
        OracleMode::Grid { density, polish } => {
            if din != 2 {
                return Err(Error::input(format!(
                    "grid mode needs a qubit input, got dimension {din}"
                )));
            }
            for rho in bloch_grid_states(density) {
                let a = linalg::sqrt_psd(&rho);
                let v = scorer.score(&a);
                count += 1;
                if v > best {
                    best = v;
                    best_a = a;
                }
            }
            if polish {
                // unconstrained coordinates: real and imaginary parts of A
                let unpack = |x: &[f64]| CMatrix::from_fn(2, 2, |r, k| c(x[2 * (2 * r + k)], x[2 * (2 * r + k) + 1]));
                let nm = NelderMead {
                    initial_step: 0.05,
                    max_evals: 4000,
                    f_tol: 1e-14,
                };
                let a0 = &best_a / c(best_a.norm(), 0.0);
                let mut x: Vec<f64> = (0..4)
                    .flat_map(|i| [a0[(i / 2, i % 2)].re, a0[(i / 2, i % 2)].im])
                    .collect();
                for _ in 0..6 {
                    let m = nm.minimize(|x| -scorer.score(&unpack(x)), &x);
                    count += m.evaluations;
                    let gain = -m.value - best;
                    if gain > 0.0 {
                        best = -m.value;
                        best_a = unpack(&m.x);
                    }
                    x = m.x;
                    if gain < 1e-13 {
                        break;
                    }
                }
            }
        }
        OracleMode::Sampling { samples, seed } => {
            let mut rng = rng_from_seed(seed);
            for _ in 0..samples {
                let a = ginibre(din, din, &mut rng);
                let v = scorer.score(&a);
                count += 1;
                if v > best {
                    best = v;
                    best_a = a;
                }
            }
        }
    }
    let mut r = DivergenceReport::new(best, DivergenceKind::Relative, Certificate::LowerBound);
    r.achieving_input = Some(input_from_amplitudes(&best_a));
    r.iterations = count;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_points_are_states() {
        for rho in bloch_grid_states(5) {
            assert!(linalg::min_eigenvalue(&rho) > -1e-12);
            assert!((linalg::trace(&rho).re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn purified_reference_is_a_a_dagger() {
        let n = Channel::random_seeded(2, 3, 2, 4);
        let mut rng = rng_from_seed(9);
        let a = ginibre(2, 2, &mut rng);
        let (out, reference) = purified_output(&n, &a).unwrap();
        let reduced = out.reduce(&[2, 3], &[0]).unwrap();
        assert!((reduced.matrix() - reference.matrix()).norm() < 1e-12);
    }
}
