//! Seeded sampling of states and unitaries.
//!
//! All randomness goes through `ChaCha8Rng`, so a seed fixes the output bit for bit.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::linalg::{c, hermitize, CMatrix};
use super::DensityMatrix;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

pub fn gaussian_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DVector<Complex64> {
    DVector::from_fn(dim, |_, _| complex_gaussian(rng))
}

pub fn unit_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DVector<Complex64> {
    let v = gaussian_vector(dim, rng);
    let n = v.norm();
    v / c(n, 0.0)
}

/// Haar-random unitary (QR of a Ginibre matrix with the phases of `R` removed).
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    haar_isometry(dim, dim, rng)
}

/// Haar-random isometry with `rows >= cols`.
pub fn haar_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    assert!(rows >= cols, "isometry needs rows >= cols");
    let g = ginibre(rows, cols, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..cols {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        for i in 0..rows {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Hilbert–Schmidt random mixed state `GG† / tr(GG†)`.
pub fn density_matrix_with<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DensityMatrix {
    let g = ginibre(dim, dim, rng);
    let rho = &g * g.adjoint();
    let tr = rho.trace().re;
    DensityMatrix::from_raw(hermitize(&(rho / c(tr, 0.0))))
}

pub fn pure_state_with<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DensityMatrix {
    let v = unit_vector(dim, rng);
    DensityMatrix::from_raw(hermitize(&(&v * v.adjoint())))
}

pub fn random_density_matrix(dim: usize, seed: u64) -> DensityMatrix {
    density_matrix_with(dim, &mut rng_from_seed(seed))
}

pub fn random_pure_state(dim: usize, seed: u64) -> DensityMatrix {
    pure_state_with(dim, &mut rng_from_seed(seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::linalg::{max_abs, unitarity_residual};

    #[test]
    fn fixed_seed_is_bit_identical() {
        let a = random_density_matrix(3, 42);
        let b = random_density_matrix(3, 42);
        assert_eq!(a.matrix(), b.matrix());
        let p = random_pure_state(4, 7);
        let q = random_pure_state(4, 7);
        assert_eq!(p.matrix(), q.matrix());
    }

    #[test]
    fn samples_pass_invariants() {
        for seed in 0..50 {
            let rho = random_density_matrix(1 + (seed as usize % 4), seed);
            assert!(DensityMatrix::new(rho.matrix().clone()).is_ok());
            let psi = random_pure_state(3, seed);
            assert!(DensityMatrix::new(psi.matrix().clone()).is_ok());
        }
    }

    #[test]
    fn mean_state_is_maximally_mixed() {
        let dim = 3;
        let mut rng = rng_from_seed(2024);
        let mut acc = CMatrix::zeros(dim, dim);
        let samples = 10_000;
        for _ in 0..samples {
            acc += density_matrix_with(dim, &mut rng).matrix();
        }
        acc /= c(samples as f64, 0.0);
        let dev = acc - CMatrix::identity(dim, dim) / c(dim as f64, 0.0);
        let op_norm = crate::qcore::linalg::eigh(&dev)
            .values
            .iter()
            .fold(0.0f64, |m, x| m.max(x.abs()));
        assert!(op_norm < 0.02, "operator-norm deviation {op_norm}");
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = rng_from_seed(3);
        for d in 1..5 {
            let u = haar_unitary(d, &mut rng);
            assert!(unitarity_residual(&u) < 1e-12);
        }
        let v = haar_isometry(6, 2, &mut rng);
        assert!(max_abs(&(v.adjoint() * &v - CMatrix::identity(2, 2))) < 1e-12);
    }
}
