//! Independent reference computations used by the audits.

use crate::channels::Channel;
use crate::divergences::{max_rel_entropy, SUPPORT_TOL};
use crate::error::{Error, Result};
use crate::optim::NelderMead;
use crate::qcore::linalg::{self, c, kron, CMatrix};
use crate::qcore::random::{ginibre, rng_from_seed, unit_vector};
use crate::qcore::{DensityMatrix, Hermitian};

/// Classical Neyman–Pearson: accept outcomes in decreasing order of `p/q`
/// until `1 − ε` of `p` is covered, splitting the last one.
pub fn classical_type2(p: &[f64], q: &[f64], eps: f64) -> f64 {
    let mut order: Vec<usize> = (0..p.len()).filter(|&i| p[i] > 0.0).collect();
    order.sort_by(|&i, &j| (p[j] * q[i]).total_cmp(&(p[i] * q[j])));
    let mut need = 1.0 - eps;
    let mut type2 = 0.0;
    for i in order {
        if need <= 0.0 {
            break;
        }
        let take = (need / p[i]).min(1.0);
        type2 += take * q[i];
        need -= take * p[i];
    }
    type2
}

/// `max tr(N(|v⟩⟨v|) H)` over `samples` random unit vectors, then polished by
/// Nelder–Mead over the real and imaginary parts of `v`.
pub fn energy_by_sampling(n: &Channel, h: &Hermitian, samples: usize, seed: u64) -> Result<f64> {
    if h.dim() != n.dim_out() {
        return Err(Error::DimensionMismatch {
            expected: n.dim_out(),
            got: h.dim(),
        });
    }
    let d = n.dim_in();
    let energy = |v: &CMatrix| -> f64 {
        let norm = v.norm();
        if norm == 0.0 {
            return f64::NEG_INFINITY;
        }
        let v = v / c(norm, 0.0);
        let rho = DensityMatrix::from_raw(linalg::hermitize(&(&v * v.adjoint())));
        match n.apply(&rho) {
            Ok(out) => h.expectation(&out.as_hermitian()),
            Err(_) => f64::NEG_INFINITY,
        }
    };
    let mut rng = rng_from_seed(seed);
    let mut best = f64::NEG_INFINITY;
    let mut best_v = CMatrix::zeros(d, 1);
    for _ in 0..samples.max(1) {
        let v = CMatrix::from_column_slice(d, 1, unit_vector(d, &mut rng).as_slice());
        let e = energy(&v);
        if e > best {
            best = e;
            best_v = v;
        }
    }
    let unpack = |x: &[f64]| CMatrix::from_fn(d, 1, |i, _| c(x[2 * i], x[2 * i + 1]));
    let x0: Vec<f64> = best_v.iter().flat_map(|z| [z.re, z.im]).collect();
    let nm = NelderMead {
        initial_step: 0.05,
        max_evals: 4000,
        f_tol: 1e-15,
    };
    let m = nm.minimize(|x| -energy(&unpack(x)), &x0);
    Ok(best.max(-m.value))
}

/// Largest `D_∞((id⊗N)(ψ) ‖ ψ_R ⊗ ω)` over `samples` random inputs
/// `ψ = Σ_i A|i⟩⊗|i⟩` with Gaussian `A`.
pub fn sampled_max_divergence(n: &Channel, omega: &Hermitian, samples: usize, seed: u64) -> Result<f64> {
    if omega.dim() != n.dim_out() {
        return Err(Error::DimensionMismatch {
            expected: n.dim_out(),
            got: omega.dim(),
        });
    }
    let din = n.dim_in();
    let dout = n.dim_out();
    let mut rng = rng_from_seed(seed);
    let mut best = f64::NEG_INFINITY;
    for _ in 0..samples {
        let a = ginibre(din, din, &mut rng);
        let a = &a / c(a.norm(), 0.0);
        let w = kron(&a, &linalg::identity(dout));
        let out = DensityMatrix::from_raw(linalg::hermitize(&(&w * n.choi() * w.adjoint())));
        let reference = linalg::hermitize(&(&a * a.adjoint()));
        if linalg::min_eigenvalue(&reference) <= SUPPORT_TOL {
            continue;
        }
        let sigma = Hermitian::from_raw(kron(&reference, omega.matrix()));
        best = best.max(max_rel_entropy(&out, &sigma)?);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classical_test_on_a_fair_coin() {
        // p = (1, 0), q = (1/2, 1/2): accept outcome 0 with weight 1 − ε
        let t = classical_type2(&[1.0, 0.0], &[0.5, 0.5], 0.2);
        assert!((t - 0.4).abs() < 1e-15);
    }

    #[test]
    fn sampled_energy_of_identity_is_top_level() {
        let h = Hermitian::from_real_diagonal(&[0.0, 1.5, 0.25]);
        let e = energy_by_sampling(&Channel::identity(3), &h, 200, 1).unwrap();
        assert!((e - 1.5).abs() < 1e-9);
    }
}
