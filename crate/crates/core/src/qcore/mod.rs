//! Hermitian operators, density matrices and thermal equilibrium objects.
//!
//! Entropies are in nats. Eigenvalues at or below [`SUPPORT_CUTOFF`] are treated
//! as exact zeros when taking logarithms or deciding ranks.

pub mod linalg;
pub mod random;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use linalg::{c, eigh, hermitian_deviation, hermitize, identity, CMatrix};

pub use random::{random_density_matrix, random_pure_state};

/// Tolerance for Hermiticity, positivity and unit trace checks.
pub const STATE_TOL: f64 = 1e-10;

/// Eigenvalues at or below this are outside the support.
pub const SUPPORT_CUTOFF: f64 = 1e-14;

/// A complex Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Hermitian(CMatrix);

impl Hermitian {
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                got: m.ncols(),
            });
        }
        let dev = hermitian_deviation(&m);
        if dev > STATE_TOL {
            return Err(Error::NotHermitian(dev));
        }
        Ok(Hermitian(hermitize(&m)))
    }

    /// Wraps a matrix that is Hermitian by construction. The anti-Hermitian
    /// round-off is removed, nothing is checked.
    pub fn from_raw(m: CMatrix) -> Self {
        Hermitian(hermitize(&m))
    }

    pub fn from_real_diagonal(values: &[f64]) -> Self {
        let d = DVector::from_iterator(values.len(), values.iter().map(|&x| c(x, 0.0)));
        Hermitian(CMatrix::from_diagonal(&d))
    }

    pub fn identity(dim: usize) -> Self {
        Hermitian(identity(dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Hermitian(CMatrix::zeros(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::eigenvalues(&self.0)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::min_eigenvalue(&self.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        linalg::max_eigenvalue(&self.0)
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.0).re
    }

    pub fn scale(&self, s: f64) -> Self {
        Hermitian(self.0.scale(s))
    }

    pub fn sub(&self, other: &Hermitian) -> Self {
        Hermitian(&self.0 - &other.0)
    }

    pub fn add(&self, other: &Hermitian) -> Self {
        Hermitian(&self.0 + &other.0)
    }

    /// `tr(self · other)`.
    pub fn expectation(&self, other: &Hermitian) -> f64 {
        linalg::inner(&self.0, &other.0)
    }
}

/// A positive semidefinite, unit-trace Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        let h = Hermitian::new(m)?;
        let tr = h.trace();
        if (tr - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidTrace(tr));
        }
        let min = h.min_eigenvalue();
        if min < -STATE_TOL {
            return Err(Error::NotPsd(min));
        }
        Ok(DensityMatrix(h.0))
    }

    /// Wraps a matrix that is a state by construction (Hermitized, not checked).
    pub fn from_raw(m: CMatrix) -> Self {
        DensityMatrix(hermitize(&m))
    }

    /// Normalizes a nonzero PSD matrix to unit trace.
    pub fn normalized(m: CMatrix) -> Result<Self> {
        let tr = linalg::trace(&m).re;
        if tr.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::InvalidTrace(tr));
        }
        DensityMatrix::new(m / c(tr, 0.0))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix(identity(dim) / c(dim as f64, 0.0))
    }

    pub fn basis_state(dim: usize, k: usize) -> Self {
        let mut m = CMatrix::zeros(dim, dim);
        m[(k, k)] = c(1.0, 0.0);
        DensityMatrix(m)
    }

    /// `|v⟩⟨v| / ⟨v|v⟩`.
    pub fn pure(v: &DVector<Complex64>) -> Result<Self> {
        let n = v.norm();
        if n == 0.0 {
            return Err(Error::input("zero vector"));
        }
        let u = v / c(n, 0.0);
        Ok(DensityMatrix::from_raw(&u * u.adjoint()))
    }

    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        DensityMatrix::new(Hermitian::from_real_diagonal(probs).0)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn as_hermitian(&self) -> Hermitian {
        Hermitian(self.0.clone())
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::eigenvalues(&self.0)
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix(linalg::kron(&self.0, &other.0))
    }

    /// Reduced state on the listed subsystems.
    pub fn reduce(&self, dims: &[usize], keep: &[usize]) -> Result<DensityMatrix> {
        Ok(DensityMatrix(hermitize(&linalg::partial_trace(&self.0, dims, keep)?)))
    }
}

/// Bath data: Hamiltonian, inverse temperature and the derived Gibbs objects.
#[derive(Debug, Clone)]
pub struct ThermalContext {
    hamiltonian: Hermitian,
    beta: f64,
    gamma: DensityMatrix,
    gamma_hat: Hermitian,
    log_partition: f64,
}

impl ThermalContext {
    pub fn new(hamiltonian: Hermitian, beta: f64) -> Result<Self> {
        thermal_state(&hamiltonian, beta)
    }

    /// Fully degenerate Hamiltonian `Ĥ = 0` on `dim` levels; `γ = I/dim`.
    pub fn degenerate(dim: usize, beta: f64) -> Result<Self> {
        thermal_state(&Hermitian::zeros(dim), beta)
    }

    pub fn hamiltonian(&self) -> &Hermitian {
        &self.hamiltonian
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn gamma(&self) -> &DensityMatrix {
        &self.gamma
    }

    /// Unnormalized thermal operator `exp(-βĤ)`.
    pub fn gamma_hat(&self) -> &Hermitian {
        &self.gamma_hat
    }

    pub fn partition_function(&self) -> f64 {
        self.log_partition.exp()
    }

    pub fn log_partition_function(&self) -> f64 {
        self.log_partition
    }

    /// `-β⁻¹ ln Z`.
    pub fn equilibrium_free_energy(&self) -> f64 {
        -self.log_partition / self.beta
    }

    /// `ln γ = -βĤ - ln Z`, exact even when γ has eigenvalues below the support cutoff.
    pub fn log_gamma(&self) -> Hermitian {
        let n = self.dim();
        Hermitian(self.hamiltonian.0.scale(-self.beta) - identity(n).scale(self.log_partition))
    }

    /// `ln γ̂ = -βĤ`.
    pub fn log_gamma_hat(&self) -> Hermitian {
        Hermitian(self.hamiltonian.0.scale(-self.beta))
    }

    /// True when `Ĥ ∝ I` within the state tolerance.
    pub fn is_degenerate(&self) -> bool {
        let ev = self.hamiltonian.eigenvalues();
        ev[ev.len() - 1] - ev[0] <= STATE_TOL
    }

    /// Context for two noninteracting systems, `Ĥ_A ⊗ I + I ⊗ Ĥ_B`, same bath.
    pub fn noninteracting(&self, other: &ThermalContext) -> Result<ThermalContext> {
        if (self.beta - other.beta).abs() > 1e-12 * self.beta.abs().max(1.0) {
            return Err(Error::input(format!(
                "contexts have different inverse temperatures ({} vs {})",
                self.beta, other.beta
            )));
        }
        let ha = self.hamiltonian.matrix();
        let hb = other.hamiltonian.matrix();
        let h = linalg::kron(ha, &identity(hb.nrows())) + linalg::kron(&identity(ha.nrows()), hb);
        thermal_state(&Hermitian::from_raw(h), self.beta)
    }

    /// `k`-fold noninteracting copy of this context.
    pub fn power(&self, k: usize) -> Result<ThermalContext> {
        let mut out = self.clone();
        for _ in 1..k {
            out = out.noninteracting(self)?;
        }
        Ok(out)
    }
}

/// Gibbs state `exp(-βĤ)/Z`, computed in the eigenbasis of `Ĥ` with an energy
/// shift so large `β` does not overflow.
pub fn thermal_state(h: &Hermitian, beta: f64) -> Result<ThermalContext> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::input(format!("beta must be positive and finite, got {beta}")));
    }
    if h.matrix().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::input("Hamiltonian has non-finite entries"));
    }
    let h = Hermitian::new(h.matrix().clone())?;
    let e = eigh(h.matrix());
    let e0 = e.min();
    let weights: Vec<f64> = e.values.iter().map(|&x| (-beta * (x - e0)).exp()).collect();
    let sum: f64 = weights.iter().sum();
    let log_partition = -beta * e0 + sum.ln();
    let gamma = e.map(|x| (-beta * (x - e0)).exp() / sum);
    let gamma_hat = e.map(|x| (-beta * x).exp());
    Ok(ThermalContext {
        hamiltonian: h,
        beta,
        gamma: DensityMatrix(gamma),
        gamma_hat: Hermitian(gamma_hat),
        log_partition,
    })
}

/// Von Neumann entropy `-tr ρ ln ρ` in nats.
pub fn vn_entropy(rho: &DensityMatrix) -> f64 {
    linalg::entropy_of(rho.matrix(), SUPPORT_CUTOFF).max(0.0)
}

/// `I(A;B) = S(A) + S(B) - S(AB)`.
pub fn mutual_information(rho_ab: &DensityMatrix, dim_a: usize, dim_b: usize) -> Result<f64> {
    if dim_a * dim_b != rho_ab.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho_ab.dim(),
            got: dim_a * dim_b,
        });
    }
    let m = rho_ab.matrix();
    let ra = linalg::trace_out_second(m, dim_a, dim_b);
    let rb = linalg::trace_out_first(m, dim_a, dim_b);
    Ok(
        linalg::entropy_of(&ra, SUPPORT_CUTOFF) + linalg::entropy_of(&rb, SUPPORT_CUTOFF)
            - linalg::entropy_of(m, SUPPORT_CUTOFF),
    )
}

pub fn partial_trace(x: &Hermitian, dims: &[usize], keep: &[usize]) -> Result<Hermitian> {
    Ok(Hermitian::from_raw(linalg::partial_trace(x.matrix(), dims, keep)?))
}

pub fn tensor_product(x: &Hermitian, y: &Hermitian) -> Hermitian {
    Hermitian(linalg::kron(x.matrix(), y.matrix()))
}

/// Logarithm in the eigenbasis, restricted to the support.
///
/// With `psd` set, eigenvalues below `-STATE_TOL` are rejected. Eigenvalues at
/// or below [`SUPPORT_CUTOFF`] are excluded from the support and map to 0.
pub fn matrix_log_safe(x: &Hermitian, psd: bool) -> Result<Hermitian> {
    let e = eigh(x.matrix());
    if psd && e.min() < -STATE_TOL {
        return Err(Error::NotPsd(e.min()));
    }
    Ok(Hermitian(e.map(|v| if v > SUPPORT_CUTOFF { v.ln() } else { 0.0 })))
}

/// Normalized maximally entangled state `|Φ⟩⟨Φ|` with `|Φ⟩ = Σ|ii⟩/√m`.
pub fn max_entangled_state(m: usize) -> Result<DensityMatrix> {
    if m < 2 {
        return Err(Error::input(format!("maximally entangled state needs m >= 2, got {m}")));
    }
    let mut v = DVector::zeros(m * m);
    for i in 0..m {
        v[i * m + i] = c(1.0 / (m as f64).sqrt(), 0.0);
    }
    Ok(DensityMatrix::from_raw(&v * v.adjoint()))
}

/// Sum of absolute eigenvalues.
pub fn trace_norm(x: &Hermitian) -> f64 {
    linalg::trace_norm_herm(x.matrix())
}

#[cfg(test)]
mod tests {
    use super::*;
    use linalg::max_abs;

    #[test]
    fn degenerate_hamiltonian_gives_maximally_mixed_gamma() {
        for m in 1..5 {
            let h = Hermitian::identity(m).scale(2.5);
            let ctx = thermal_state(&h, 0.7).unwrap();
            let diff = ctx.gamma().matrix() - DensityMatrix::maximally_mixed(m).matrix();
            assert!(max_abs(&diff) < 1e-12);
        }
    }

    #[test]
    fn two_level_gibbs_state() {
        // βE = ln 2: Z = 1 + 1/2, γ = diag(2/3, 1/3)
        let e = 1.3;
        let beta = std::f64::consts::LN_2 / e;
        let ctx = thermal_state(&Hermitian::from_real_diagonal(&[0.0, e]), beta).unwrap();
        assert!((ctx.partition_function() - 1.5).abs() < 1e-12);
        let g = ctx.gamma().matrix();
        assert!((g[(0, 0)].re - 2.0 / 3.0).abs() < 1e-12);
        assert!((g[(1, 1)].re - 1.0 / 3.0).abs() < 1e-12);
        let z_from_hat = ctx.gamma_hat().trace();
        assert!((z_from_hat - ctx.partition_function()).abs() < 1e-10);
        let scaled = ctx.gamma_hat().matrix() / c(ctx.partition_function(), 0.0);
        assert!(max_abs(&(scaled - g)) < 1e-10);
    }

    #[test]
    fn ground_state_limit() {
        let ctx = thermal_state(&Hermitian::from_real_diagonal(&[0.0, 1.0]), 40.0).unwrap();
        assert!((ctx.gamma().matrix()[(0, 0)].re - 1.0).abs() < 1e-6);
        assert!(ctx.gamma().matrix()[(1, 1)].re < 1e-6);
        assert!(ctx.gamma().matrix()[(1, 1)].re > 0.0);
    }

    #[test]
    fn thermal_state_rejects_bad_input() {
        assert!(thermal_state(&Hermitian::identity(2), 0.0).is_err());
        assert!(thermal_state(&Hermitian::identity(2), -1.0).is_err());
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = c(1.0, 0.0);
        assert!(Hermitian::new(m).is_err());
    }

    #[test]
    fn entropy_examples() {
        assert!(vn_entropy(&random_pure_state(3, 1)).abs() < 1e-10);
        for m in 1..5 {
            let s = vn_entropy(&DensityMatrix::maximally_mixed(m));
            assert!((s - (m as f64).ln()).abs() < 1e-12);
        }
        let rho = DensityMatrix::diagonal(&[2.0 / 3.0, 1.0 / 3.0]).unwrap();
        let expected = 3f64.ln() - (2.0 / 3.0) * 2f64.ln();
        assert!((vn_entropy(&rho) - expected).abs() < 1e-12);
        assert!((expected - 0.63651).abs() < 1e-5);
    }

    #[test]
    fn mutual_information_examples() {
        let prod = random_density_matrix(2, 3).tensor(&random_density_matrix(3, 4));
        assert!(mutual_information(&prod, 2, 3).unwrap().abs() < 1e-10);
        for m in 2..5 {
            let phi = max_entangled_state(m).unwrap();
            let i = mutual_information(&phi, m, m).unwrap();
            assert!((i - 2.0 * (m as f64).ln()).abs() < 1e-10);
        }
        let cc = DensityMatrix::diagonal(&[0.5, 0.0, 0.0, 0.5]).unwrap();
        assert!((mutual_information(&cc, 2, 2).unwrap() - 2f64.ln()).abs() < 1e-12);
        assert!(mutual_information(&cc, 3, 2).is_err());
    }

    #[test]
    fn max_entangled_marginals() {
        let phi = max_entangled_state(2).unwrap();
        for keep in [0, 1] {
            let r = phi.reduce(&[2, 2], &[keep]).unwrap();
            assert!(max_abs(&(r.matrix() - DensityMatrix::maximally_mixed(2).matrix())) < 1e-12);
        }
        assert!(max_entangled_state(1).is_err());
        let ev = phi.eigenvalues();
        assert!((ev[3] - 1.0).abs() < 1e-12 && ev[2].abs() < 1e-12);
    }

    #[test]
    fn matrix_log_examples() {
        assert!(max_abs(matrix_log_safe(&Hermitian::identity(3), true).unwrap().matrix()) < 1e-14);
        let e = std::f64::consts::E;
        let l = matrix_log_safe(&Hermitian::from_real_diagonal(&[e, e * e]), true).unwrap();
        assert!((l.matrix()[(0, 0)].re - 1.0).abs() < 1e-12);
        assert!((l.matrix()[(1, 1)].re - 2.0).abs() < 1e-12);
        assert!(matrix_log_safe(&Hermitian::from_real_diagonal(&[1.0, -0.1]), true).is_err());
        // kernel maps to zero
        let l = matrix_log_safe(&Hermitian::from_real_diagonal(&[1.0, 0.0]), true).unwrap();
        assert_eq!(l.matrix()[(1, 1)].re, 0.0);
    }

    #[test]
    fn exp_log_round_trip_on_support() {
        for seed in 0..30 {
            // rank-deficient PSD: 3x3 built from a 3x2 factor
            let mut rng = random::rng_from_seed(seed);
            let g = random::ginibre(3, 2, &mut rng);
            let x = Hermitian::from_raw(&g * g.adjoint());
            let log = matrix_log_safe(&x, true).unwrap();
            let proj = linalg::support_projector(x.matrix(), SUPPORT_CUTOFF);
            let back = &proj * linalg::expm_herm(log.matrix()) * &proj;
            assert!(max_abs(&(back - x.matrix())) < 1e-10);
        }
    }

    #[test]
    fn trace_norm_examples() {
        assert!((trace_norm(&random_density_matrix(3, 9).as_hermitian()) - 1.0).abs() < 1e-12);
        assert!((trace_norm(&Hermitian::from_real_diagonal(&[1.0, -1.0])) - 2.0).abs() < 1e-14);
        for seed in 0..50 {
            let a = random_density_matrix(3, seed);
            let b = random_density_matrix(3, seed + 1000);
            assert!(trace_norm(&a.as_hermitian().sub(&b.as_hermitian())) <= 2.0 + 1e-12);
        }
    }

    #[test]
    fn tensor_product_properties() {
        let i = Hermitian::identity(2);
        assert_eq!(tensor_product(&i, &i), Hermitian::identity(4));
        let x = Hermitian::from_real_diagonal(&[1.0, -2.0]);
        let y = random_density_matrix(3, 5).as_hermitian();
        let xy = tensor_product(&x, &y);
        assert!((xy.trace() - x.trace() * y.trace()).abs() < 1e-12);
        let mut ev = xy.eigenvalues();
        let mut pairwise: Vec<f64> = x
            .eigenvalues()
            .iter()
            .flat_map(|a| y.eigenvalues().into_iter().map(move |b| a * b))
            .collect();
        ev.sort_by(f64::total_cmp);
        pairwise.sort_by(f64::total_cmp);
        for (a, b) in ev.iter().zip(&pairwise) {
            assert!((a - b).abs() < 1e-12);
        }
        let back = partial_trace(&xy, &[2, 3], &[1]).unwrap();
        assert!(max_abs(&(back.matrix() - y.matrix().scale(x.trace()))) < 1e-12);
    }

    #[test]
    fn entropy_decreases_with_beta() {
        let h = Hermitian::from_real_diagonal(&[0.0, 0.4, 1.1]);
        let mut prev = f64::INFINITY;
        for beta in [0.1, 0.5, 1.0, 2.0, 5.0] {
            let s = vn_entropy(thermal_state(&h, beta).unwrap().gamma());
            assert!(s <= prev + 1e-12);
            prev = s;
        }
    }
}
