//! Quantum channels held in Kraus form, with cached Choi matrix and
//! complementary channel.
//!
//! Conventions:
//! - Kraus operators are `dim_out × dim_in`.
//! - The Choi matrix is unnormalized, `J = Σ_ij |i⟩⟨j| ⊗ N(|i⟩⟨j|)`, input
//!   factor first, so `tr J = dim_in` and `tr_out J = I`.
//! - The complementary channel acts as `N^c(ρ)[i][j] = tr(K_i ρ K_j†)`; its
//!   output dimension is the number of Kraus operators.

mod weyl;

pub use weyl::{weyl_set, WeylSet};

use nalgebra::DVector;
use rand::Rng;

use crate::error::{Error, Result};
use crate::qcore::linalg::{self, c, eigh, hermitize, identity, kron, max_abs, CMatrix, ZERO};
use crate::qcore::random::{haar_isometry, rng_from_seed};
use crate::qcore::{DensityMatrix, Hermitian, ThermalContext};

/// Completeness residual above which a Kraus list is rejected.
pub const CPTP_REJECT_TOL: f64 = 1e-6;

/// Relative eigenvalue cutoff when extracting Kraus operators from a Choi matrix.
const CHOI_RANK_CUTOFF: f64 = 1e-13;

#[derive(Debug, Clone)]
pub struct Channel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<CMatrix>,
    choi: CMatrix,
    complementary: Vec<CMatrix>,
}

impl Channel {
    pub fn from_kraus(kraus: Vec<CMatrix>) -> Result<Self> {
        let first = kraus.first().ok_or_else(|| Error::input("empty Kraus list"))?;
        let (dim_out, dim_in) = first.shape();
        if dim_in == 0 || dim_out == 0 {
            return Err(Error::input("Kraus operators must be nonempty"));
        }
        for (i, k) in kraus.iter().enumerate() {
            if k.shape() != (dim_out, dim_in) {
                return Err(Error::input(format!(
                    "kraus[{i}] has shape {:?}, expected {:?}",
                    k.shape(),
                    (dim_out, dim_in)
                )));
            }
            if k.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::input(format!("kraus[{i}] has non-finite entries")));
            }
        }
        let residual = completeness_residual(&kraus, dim_in);
        if residual > CPTP_REJECT_TOL {
            return Err(Error::NotTracePreserving(residual));
        }
        Ok(Self::assemble(kraus, dim_in, dim_out))
    }

    fn assemble(kraus: Vec<CMatrix>, dim_in: usize, dim_out: usize) -> Self {
        let choi = choi_from_kraus(&kraus, dim_in, dim_out);
        let complementary = complementary_kraus(&kraus, dim_in, dim_out);
        Channel {
            dim_in,
            dim_out,
            kraus,
            choi,
            complementary,
        }
    }

    /// Minimal Kraus representation from an (unnormalized) Choi matrix.
    pub fn from_choi(choi: &CMatrix, dim_in: usize, dim_out: usize) -> Result<Self> {
        if choi.shape() != (dim_in * dim_out, dim_in * dim_out) {
            return Err(Error::DimensionMismatch {
                expected: dim_in * dim_out,
                got: choi.nrows(),
            });
        }
        let dev = linalg::hermitian_deviation(choi);
        if dev > 1e-9 {
            return Err(Error::NotHermitian(dev));
        }
        let e = eigh(choi);
        if e.min() < -1e-9 {
            return Err(Error::NotPsd(e.min()));
        }
        let cutoff = CHOI_RANK_CUTOFF * e.max().max(1.0);
        let mut kraus = Vec::new();
        for k in (0..e.values.len()).rev() {
            let lam = e.values[k];
            if lam <= cutoff {
                continue;
            }
            let v = e.column(k);
            let s = lam.sqrt();
            kraus.push(CMatrix::from_fn(dim_out, dim_in, |a, i| v[i * dim_out + a] * s));
        }
        if kraus.is_empty() {
            return Err(Error::input("Choi matrix is zero"));
        }
        Channel::from_kraus(kraus)
    }

    /// Unitary channel `ρ ↦ UρU†`.
    pub fn unitary(u: CMatrix) -> Result<Self> {
        let r = linalg::unitarity_residual(&u);
        if r > 1e-9 {
            return Err(Error::NotUnitary(r));
        }
        Channel::from_kraus(vec![u])
    }

    pub fn identity(m: usize) -> Self {
        Self::assemble(vec![identity(m)], m, m)
    }

    /// Replacer `R^ω(ρ) = tr(ρ) ω` with Kraus operators `√λ_k |γ_k⟩⟨e_j|`.
    pub fn replacer(omega: &DensityMatrix, dim_in: usize) -> Self {
        let e = eigh(omega.matrix());
        let d_out = omega.dim();
        let mut kraus = Vec::new();
        for k in (0..d_out).rev() {
            let lam = e.values[k];
            if lam <= crate::qcore::SUPPORT_CUTOFF {
                continue;
            }
            let v = e.column(k) * c(lam.sqrt(), 0.0);
            for j in 0..dim_in {
                let mut kr = CMatrix::zeros(d_out, dim_in);
                kr.set_column(j, &v);
                kraus.push(kr);
            }
        }
        Self::assemble(kraus, dim_in, d_out)
    }

    /// `T^β(ρ) = tr(ρ) γ^β`.
    pub fn absolutely_thermal(ctx: &ThermalContext, dim_in: usize) -> Self {
        Self::replacer(ctx.gamma(), dim_in)
    }

    /// `R^π` built as the uniform mixture of the `m²` Weyl unitary channels.
    pub fn uniform_mixing(m: usize) -> Result<Self> {
        let w = weyl_set(m)?;
        let s = c(1.0 / m as f64, 0.0);
        let kraus = w.unitaries().iter().map(|u| u * s).collect();
        Ok(Self::assemble(kraus, m, m))
    }

    /// Stinespring sampling: a Haar isometry `dim_in → dim_out·kraus_count`
    /// split into Kraus operators.
    pub fn random<R: Rng + ?Sized>(dim_in: usize, dim_out: usize, kraus_count: usize, rng: &mut R) -> Self {
        let v = haar_isometry(dim_out * kraus_count, dim_in, rng);
        let kraus = (0..kraus_count)
            .map(|k| v.rows(k * dim_out, dim_out).into_owned())
            .collect();
        Self::assemble(kraus, dim_in, dim_out)
    }

    pub fn random_seeded(dim_in: usize, dim_out: usize, kraus_count: usize, seed: u64) -> Self {
        Self::random(dim_in, dim_out, kraus_count, &mut rng_from_seed(seed))
    }

    /// Convex combination `Σ p_i N_i`.
    pub fn mixture(weights: &[f64], channels: &[&Channel]) -> Result<Self> {
        if weights.len() != channels.len() || channels.is_empty() {
            return Err(Error::input(
                "weights and channels must be nonempty and of equal length",
            ));
        }
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|&p| p < 0.0) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::input("mixture weights must be a probability vector"));
        }
        let (din, dout) = (channels[0].dim_in, channels[0].dim_out);
        let mut kraus = Vec::new();
        for (&p, ch) in weights.iter().zip(channels) {
            if ch.dim_in != din || ch.dim_out != dout {
                return Err(Error::input("mixed channels must share dimensions"));
            }
            if p == 0.0 {
                continue;
            }
            let s = c(p.sqrt(), 0.0);
            kraus.extend(ch.kraus.iter().map(|k| k * s));
        }
        Ok(Self::assemble(kraus, din, dout).compressed())
    }

    /// Parallel composition `N ⊗ M`.
    pub fn tensor(&self, other: &Channel) -> Channel {
        let mut kraus = Vec::with_capacity(self.kraus.len() * other.kraus.len());
        for a in &self.kraus {
            for b in &other.kraus {
                kraus.push(kron(a, b));
            }
        }
        Self::assemble(kraus, self.dim_in * other.dim_in, self.dim_out * other.dim_out).compressed()
    }

    /// `k`-fold tensor power.
    pub fn power(&self, k: usize) -> Channel {
        let mut out = self.clone();
        for _ in 1..k {
            out = out.tensor(self);
        }
        out
    }

    /// Sequential composition `after ∘ before`.
    pub fn compose(after: &Channel, before: &Channel) -> Result<Channel> {
        if after.dim_in != before.dim_out {
            return Err(Error::DimensionMismatch {
                expected: after.dim_in,
                got: before.dim_out,
            });
        }
        let mut kraus = Vec::with_capacity(after.kraus.len() * before.kraus.len());
        for a in &after.kraus {
            for b in &before.kraus {
                kraus.push(a * b);
            }
        }
        Ok(Self::assemble(kraus, before.dim_in, after.dim_out).compressed())
    }

    /// Replaces an oversized Kraus list by the minimal one from the Choi matrix.
    fn compressed(self) -> Channel {
        if self.kraus.len() <= self.dim_in * self.dim_out {
            return self;
        }
        Channel::from_choi(&self.choi, self.dim_in, self.dim_out).unwrap_or(self)
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn is_square(&self) -> bool {
        self.dim_in == self.dim_out
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn choi(&self) -> &CMatrix {
        &self.choi
    }

    pub fn complementary_kraus(&self) -> &[CMatrix] {
        &self.complementary
    }

    /// Output dimension of the complementary channel.
    pub fn environment_dim(&self) -> usize {
        self.kraus.len()
    }

    /// The unitary, when the channel has a single unitary Kraus operator.
    pub fn as_unitary(&self) -> Option<&CMatrix> {
        match self.kraus.as_slice() {
            [u] if linalg::unitarity_residual(u) <= 1e-9 => Some(u),
            _ => None,
        }
    }

    pub fn completeness_residual(&self) -> f64 {
        completeness_residual(&self.kraus, self.dim_in)
    }

    /// `N(ρ)` on raw matrices; the caller guarantees the shape.
    pub(crate) fn apply_raw(&self, rho: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out += k * rho * k.adjoint();
        }
        hermitize(&out)
    }

    pub(crate) fn adjoint_raw(&self, x: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim_in, self.dim_in);
        for k in &self.kraus {
            out += k.adjoint() * x * k;
        }
        hermitize(&out)
    }

    pub(crate) fn complementary_raw(&self, rho: &CMatrix) -> CMatrix {
        let n = self.kraus.len();
        let mut out = CMatrix::zeros(n, n);
        let left: Vec<CMatrix> = self.kraus.iter().map(|k| k * rho).collect();
        for i in 0..n {
            for j in i..n {
                // tr(K_i ρ K_j†)
                let mut acc = ZERO;
                let kj = &self.kraus[j];
                for a in 0..self.dim_out {
                    for b in 0..self.dim_in {
                        acc += left[i][(a, b)] * kj[(a, b)].conj();
                    }
                }
                out[(i, j)] = acc;
                out[(j, i)] = acc.conj();
            }
        }
        hermitize(&out)
    }

    /// `(N^c)†(X) = Σ_ij X_ij K_i† K_j`, via the complementary Kraus list.
    pub(crate) fn complementary_adjoint_raw(&self, x: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim_in, self.dim_in);
        for e in &self.complementary {
            out += e.adjoint() * x * e;
        }
        hermitize(&out)
    }

    fn check_input(&self, rho: &DensityMatrix) -> Result<()> {
        if rho.dim() != self.dim_in {
            return Err(Error::DimensionMismatch {
                expected: self.dim_in,
                got: rho.dim(),
            });
        }
        Ok(())
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.check_input(rho)?;
        Ok(DensityMatrix::from_raw(self.apply_raw(rho.matrix())))
    }

    /// `(id_R ⊗ N)(ρ_RA')`.
    pub fn apply_with_reference(&self, rho: &DensityMatrix, dim_ref: usize) -> Result<DensityMatrix> {
        if rho.dim() != dim_ref * self.dim_in {
            return Err(Error::DimensionMismatch {
                expected: dim_ref * self.dim_in,
                got: rho.dim(),
            });
        }
        Ok(DensityMatrix::from_raw(
            self.apply_with_reference_raw(rho.matrix(), dim_ref),
        ))
    }

    pub(crate) fn apply_with_reference_raw(&self, rho: &CMatrix, dim_ref: usize) -> CMatrix {
        let id = identity(dim_ref);
        let n = dim_ref * self.dim_out;
        let mut out = CMatrix::zeros(n, n);
        for k in &self.kraus {
            let big = kron(&id, k);
            out += &big * rho * big.adjoint();
        }
        hermitize(&out)
    }

    /// Dispatches on `with_reference`: `id_R ⊗ N` when set, `N` otherwise.
    pub fn apply_general(&self, rho: &DensityMatrix, with_reference: bool, dim_ref: usize) -> Result<DensityMatrix> {
        if with_reference {
            self.apply_with_reference(rho, dim_ref)
        } else {
            self.apply(rho)
        }
    }

    /// `N(ρ) = tr_in[(ρᵀ ⊗ I) J]`, the Choi-contraction route.
    pub fn apply_via_choi(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.check_input(rho)?;
        let lhs = kron(&rho.matrix().transpose(), &identity(self.dim_out));
        let prod = lhs * &self.choi;
        Ok(DensityMatrix::from_raw(linalg::trace_out_first(
            &prod,
            self.dim_in,
            self.dim_out,
        )))
    }

    /// Heisenberg-picture map `N†(X) = Σ K† X K`.
    pub fn adjoint_apply(&self, x: &Hermitian) -> Result<Hermitian> {
        if x.dim() != self.dim_out {
            return Err(Error::DimensionMismatch {
                expected: self.dim_out,
                got: x.dim(),
            });
        }
        Ok(Hermitian::from_raw(self.adjoint_raw(x.matrix())))
    }

    /// Environment state `N^c(ρ)`.
    pub fn complementary_apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.check_input(rho)?;
        Ok(DensityMatrix::from_raw(self.complementary_raw(rho.matrix())))
    }

    /// Largest entrywise difference between Choi matrices.
    pub fn choi_distance(&self, other: &Channel) -> f64 {
        if self.choi.shape() != other.choi.shape() {
            return f64::INFINITY;
        }
        max_abs(&(&self.choi - &other.choi))
    }

    /// Choi matrix of `self - other`, the input to the diamond norm.
    pub fn choi_difference(&self, other: &Channel) -> Result<CMatrix> {
        if self.dim_in != other.dim_in || self.dim_out != other.dim_out {
            return Err(Error::input("channels have different dimensions"));
        }
        Ok(&self.choi - &other.choi)
    }

    /// Returns the same channel with the Kraus list remixed by a unitary on the
    /// Kraus index, `K'_i = Σ_j U_ij K_j`.
    pub fn remix_kraus(&self, u: &CMatrix) -> Result<Channel> {
        let n = self.kraus.len();
        if u.shape() != (n, n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: u.nrows(),
            });
        }
        let kraus = (0..n)
            .map(|i| {
                let mut k = CMatrix::zeros(self.dim_out, self.dim_in);
                for j in 0..n {
                    k += &self.kraus[j] * u[(i, j)];
                }
                k
            })
            .collect();
        Channel::from_kraus(kraus)
    }
}

/// `N ⊗ M` as a free function.
pub fn tensor(n: &Channel, m: &Channel) -> Channel {
    n.tensor(m)
}

/// `after ∘ before` as a free function.
pub fn compose(after: &Channel, before: &Channel) -> Result<Channel> {
    Channel::compose(after, before)
}

pub fn unitary_channel(u: CMatrix) -> Result<Channel> {
    Channel::unitary(u)
}

pub fn identity_channel(m: usize) -> Channel {
    Channel::identity(m)
}

pub fn replacer(omega: &DensityMatrix, dim_in: usize) -> Channel {
    Channel::replacer(omega, dim_in)
}

pub fn absolutely_thermal(ctx: &ThermalContext, dim_in: usize) -> Channel {
    Channel::absolutely_thermal(ctx, dim_in)
}

pub fn uniform_mixing(m: usize) -> Result<Channel> {
    Channel::uniform_mixing(m)
}

fn completeness_residual(kraus: &[CMatrix], dim_in: usize) -> f64 {
    let mut acc = CMatrix::zeros(dim_in, dim_in);
    for k in kraus {
        acc += k.adjoint() * k;
    }
    max_abs(&(acc - identity(dim_in)))
}

fn choi_from_kraus(kraus: &[CMatrix], dim_in: usize, dim_out: usize) -> CMatrix {
    let n = dim_in * dim_out;
    let mut j = CMatrix::zeros(n, n);
    for k in kraus {
        let v = DVector::from_fn(n, |idx, _| k[(idx % dim_out, idx / dim_out)]);
        j += &v * v.adjoint();
    }
    hermitize(&j)
}

/// Kraus operators `E_a = Σ_i |i⟩⟨a| K_i` of the complementary channel.
fn complementary_kraus(kraus: &[CMatrix], dim_in: usize, dim_out: usize) -> Vec<CMatrix> {
    let n = kraus.len();
    (0..dim_out)
        .map(|a| CMatrix::from_fn(n, dim_in, |i, col| kraus[i][(a, col)]))
        .collect()
}

/// Pauli matrices, handy for examples and tests.
pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, c(1.0, 0.0), c(1.0, 0.0), ZERO])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), ZERO, ZERO, c(-1.0, 0.0)])
}

/// Qubit amplitude-damping channel with decay probability `gamma`.
pub fn amplitude_damping(gamma: f64) -> Result<Channel> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::input("damping probability must lie in [0, 1]"));
    }
    let k0 = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), ZERO, ZERO, c((1.0 - gamma).sqrt(), 0.0)]);
    let k1 = CMatrix::from_row_slice(2, 2, &[ZERO, c(gamma.sqrt(), 0.0), ZERO, ZERO]);
    Channel::from_kraus(vec![k0, k1])
}

/// Depolarizing channel `(1-p) id + p R^π` on `m` levels.
pub fn depolarizing(m: usize, p: f64) -> Result<Channel> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::input("depolarizing probability must lie in [0, 1]"));
    }
    let id = Channel::identity(m);
    let mix = Channel::replacer(&DensityMatrix::maximally_mixed(m), m);
    Channel::mixture(&[1.0 - p, p], &[&id, &mix])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::random::{density_matrix_with, haar_unitary};
    use crate::qcore::{max_entangled_state, random_density_matrix, thermal_state, vn_entropy};

    fn assert_channel_invariants(ch: &Channel) {
        assert!(ch.completeness_residual() <= 1e-9);
        let e = eigh(ch.choi());
        assert!(e.min() >= -1e-9);
        let tr_out = linalg::trace_out_second(ch.choi(), ch.dim_in(), ch.dim_out());
        assert!(max_abs(&(tr_out - identity(ch.dim_in()))) <= 1e-9);
        let mut rng = rng_from_seed(77);
        for _ in 0..20 {
            let rho = density_matrix_with(ch.dim_in(), &mut rng);
            let a = ch.apply(&rho).unwrap();
            let b = ch.apply_via_choi(&rho).unwrap();
            assert!(max_abs(&(a.matrix() - b.matrix())) <= 1e-10);
        }
    }

    #[test]
    fn unitary_channel_has_rank_one_choi() {
        let u = haar_unitary(3, &mut rng_from_seed(1));
        let ch = Channel::unitary(u.clone()).unwrap();
        assert_eq!(ch.kraus().len(), 1);
        let ev = eigh(ch.choi()).values;
        assert!(ev.iter().filter(|&&x| x > 1e-10).count() == 1);
        assert_channel_invariants(&ch);
        // U ∘ U† = id
        let inv = Channel::unitary(u.adjoint()).unwrap();
        let both = Channel::compose(&ch, &inv).unwrap();
        assert!(both.choi_distance(&Channel::identity(3)) < 1e-12);
        assert!(Channel::unitary(CMatrix::identity(2, 2) * c(2.0, 0.0)).is_err());
    }

    #[test]
    fn identity_choi_is_m_times_phi() {
        for m in 2..5 {
            let id = Channel::identity(m);
            let phi = max_entangled_state(m).unwrap();
            assert!(max_abs(&(id.choi() - phi.matrix().scale(m as f64))) < 1e-12);
        }
    }

    #[test]
    fn replacer_matches_explicit_kraus_construction() {
        let omega = random_density_matrix(3, 11);
        let r = Channel::replacer(&omega, 2);
        assert_channel_invariants(&r);
        // explicit {√λ_k |γ_k⟩⟨e_j|}
        let e = eigh(omega.matrix());
        let mut kraus = Vec::new();
        for k in 0..3 {
            for j in 0..2 {
                let mut m = CMatrix::zeros(3, 2);
                m.set_column(j, &(e.column(k) * c(e.values[k].sqrt(), 0.0)));
                kraus.push(m);
            }
        }
        let explicit = Channel::from_kraus(kraus).unwrap();
        assert!(r.choi_distance(&explicit) < 1e-12);
        // choi(R^ω) = I ⊗ ω
        let expected = kron(&identity(2), omega.matrix());
        assert!(max_abs(&(r.choi() - expected)) < 1e-12);
        // apply gives ω
        let out = r.apply(&random_density_matrix(2, 3)).unwrap();
        assert!(max_abs(&(out.matrix() - omega.matrix())) < 1e-12);
    }

    #[test]
    fn random_stinespring_channels_pass_invariants() {
        let mut rng = rng_from_seed(5);
        for (din, dout, k) in [(2, 2, 1), (2, 2, 3), (2, 3, 2), (3, 2, 4)] {
            let ch = Channel::random(din, dout, k, &mut rng);
            assert_channel_invariants(&ch);
        }
    }

    #[test]
    fn from_kraus_rejects_non_cptp() {
        let k = CMatrix::identity(2, 2) * c(0.9, 0.0);
        assert!(matches!(
            Channel::from_kraus(vec![k]),
            Err(Error::NotTracePreserving(_))
        ));
        assert!(Channel::from_kraus(vec![]).is_err());
    }

    #[test]
    fn thermal_channel_on_maximally_entangled_input() {
        let ctx = thermal_state(&Hermitian::from_real_diagonal(&[0.0, 0.7]), 1.3).unwrap();
        let t = Channel::absolutely_thermal(&ctx, 2);
        let phi = max_entangled_state(2).unwrap();
        let out = t.apply_with_reference(&phi, 2).unwrap();
        let expected = kron(DensityMatrix::maximally_mixed(2).matrix(), ctx.gamma().matrix());
        assert!(max_abs(&(out.matrix() - expected)) < 1e-12);
        let id_out = Channel::identity(2).apply_with_reference(&phi, 2).unwrap();
        assert!(max_abs(&(id_out.matrix() - phi.matrix())) < 1e-12);
    }

    #[test]
    fn adjoint_examples() {
        let mut rng = rng_from_seed(8);
        let u = haar_unitary(2, &mut rng);
        let ch = Channel::unitary(u.clone()).unwrap();
        let x = random_density_matrix(2, 4).as_hermitian();
        let adj = ch.adjoint_apply(&x).unwrap();
        assert!(max_abs(&(adj.matrix() - u.adjoint() * x.matrix() * &u)) < 1e-12);

        let n = Channel::random(2, 3, 2, &mut rng);
        assert!(max_abs(&(n.adjoint_apply(&Hermitian::identity(3)).unwrap().matrix() - identity(2))) < 1e-9);
        for _ in 0..30 {
            let rho = density_matrix_with(2, &mut rng);
            let g = crate::qcore::random::ginibre(3, 3, &mut rng);
            let x = Hermitian::from_raw(&g + g.adjoint());
            let lhs = x.expectation(&n.apply(&rho).unwrap().as_hermitian());
            let rhs = n.adjoint_apply(&x).unwrap().expectation(&rho.as_hermitian());
            assert!((lhs - rhs).abs() < 1e-10);
        }

        let omega = random_density_matrix(3, 21);
        let r = Channel::replacer(&omega, 2);
        let x = random_density_matrix(3, 22).as_hermitian();
        let adj = r.adjoint_apply(&x).unwrap();
        let expected = identity(2).scale(x.expectation(&omega.as_hermitian()));
        assert!(max_abs(&(adj.matrix() - expected)) < 1e-12);
    }

    #[test]
    fn complementary_examples() {
        let mut rng = rng_from_seed(9);
        let u = Channel::unitary(haar_unitary(3, &mut rng)).unwrap();
        let env = u.complementary_apply(&random_density_matrix(3, 1)).unwrap();
        assert_eq!(env.dim(), 1);
        assert!(vn_entropy(&env).abs() < 1e-12);

        let n = Channel::random(2, 2, 3, &mut rng);
        for seed in 0..10 {
            let psi = crate::qcore::random_pure_state(2, seed);
            let se = vn_entropy(&n.complementary_apply(&psi).unwrap());
            let sb = vn_entropy(&n.apply(&psi).unwrap());
            assert!((se - sb).abs() < 1e-9);
        }

        // replacer: S(N^c(ρ)) = S(ρ ⊗ ω) = S(ρ) + S(ω)
        let omega = random_density_matrix(2, 30);
        let r = Channel::replacer(&omega, 2);
        let rho = random_density_matrix(2, 31);
        let se = vn_entropy(&r.complementary_apply(&rho).unwrap());
        let brute = vn_entropy(&rho.tensor(&omega));
        assert!((se - brute).abs() < 1e-10);
    }

    #[test]
    fn complementary_entropy_invariant_under_kraus_remixing() {
        let mut rng = rng_from_seed(10);
        let n = Channel::random(2, 2, 3, &mut rng);
        let v = haar_unitary(3, &mut rng);
        let m = n.remix_kraus(&v).unwrap();
        assert!(n.choi_distance(&m) < 1e-12);
        for seed in 0..10 {
            let rho = random_density_matrix(2, seed);
            let a = vn_entropy(&n.complementary_apply(&rho).unwrap());
            let b = vn_entropy(&m.complementary_apply(&rho).unwrap());
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn uniform_mixing_equals_maximally_mixed_replacer() {
        for m in 2..5 {
            let w = Channel::uniform_mixing(m).unwrap();
            let r = Channel::replacer(&DensityMatrix::maximally_mixed(m), m);
            assert!(w.choi_distance(&r) < 1e-10);
            let expected = identity(m * m).scale(1.0 / m as f64);
            assert!(max_abs(&(w.choi() - expected)) < 1e-10);
        }
    }

    #[test]
    fn tensor_and_compose() {
        let id2 = Channel::identity(2);
        assert!(id2.tensor(&id2).choi_distance(&Channel::identity(4)) < 1e-12);

        let mut rng = rng_from_seed(12);
        let n = Channel::random(2, 2, 2, &mut rng);
        let m = Channel::random(2, 3, 2, &mut rng);
        let nm = n.tensor(&m);
        assert_channel_invariants(&nm);
        let rho = random_density_matrix(2, 1);
        let sigma = random_density_matrix(2, 2);
        let lhs = nm.apply(&rho.tensor(&sigma)).unwrap();
        let rhs = n.apply(&rho).unwrap().tensor(&m.apply(&sigma).unwrap());
        assert!(max_abs(&(lhs.matrix() - rhs.matrix())) < 1e-12);

        let omega = random_density_matrix(3, 3);
        let r = Channel::replacer(&omega, 2);
        let after = Channel::compose(&r, &n).unwrap();
        assert!(after.choi_distance(&r) < 1e-12);
        assert_channel_invariants(&after);
        assert!(Channel::compose(&n, &m).is_err());
    }

    #[test]
    fn compositions_stay_compact() {
        let mut rng = rng_from_seed(13);
        let a = Channel::random(2, 2, 4, &mut rng);
        let b = Channel::random(2, 2, 4, &mut rng);
        let ab = Channel::compose(&a, &b).unwrap();
        assert!(ab.kraus().len() <= 4);
        assert_channel_invariants(&ab);
    }

    #[test]
    fn from_choi_round_trip() {
        let mut rng = rng_from_seed(14);
        let n = Channel::random(2, 3, 2, &mut rng);
        let back = Channel::from_choi(n.choi(), 2, 3).unwrap();
        assert!(n.choi_distance(&back) < 1e-12);
        assert_eq!(back.kraus().len(), 2);
    }

    #[test]
    fn named_channels() {
        assert_channel_invariants(&amplitude_damping(0.3).unwrap());
        assert_channel_invariants(&depolarizing(3, 0.4).unwrap());
        assert!(amplitude_damping(1.5).is_err());
        let rho = random_density_matrix(2, 4);
        let d = depolarizing(2, 1.0).unwrap().apply(&rho).unwrap();
        assert!(max_abs(&(d.matrix() - DensityMatrix::maximally_mixed(2).matrix())) < 1e-12);
        let _ = (pauli_x(), pauli_y(), pauli_z());
    }
}
