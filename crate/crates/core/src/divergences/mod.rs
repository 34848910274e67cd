//! Relative entropy, max-relative entropy and hypothesis-testing relative
//! entropy, for states and for channels measured against replacer channels.
//!
//! All values are in nats. Support violations are reported as `f64::INFINITY`.

mod ascent;
mod channel;
mod oracle;

pub use ascent::{reduction_objective, AscentOptions};
pub use channel::{
    amplitudes_from_input, channel_ht_rel_entropy, channel_max_rel_entropy, channel_max_rel_entropy_log,
    channel_rel_entropy_log, channel_rel_entropy_replacer, input_from_amplitudes, smoothed_channel_max_rel_entropy,
    smoothed_channel_max_rel_entropy_log, HtBudget,
};
pub use oracle::{bloch_grid_states, channel_rel_entropy_bruteforce, purified_output, OracleMode};

use crate::error::{Error, Result};
use crate::qcore::linalg::{self, eigh, CMatrix};
use crate::qcore::{DensityMatrix, Hermitian};

/// Eigenvalue cutoff for support decisions in state divergences.
pub const SUPPORT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DivergenceKind {
    Relative,
    Max,
    HypothesisTesting,
    SmoothedMax,
}

impl DivergenceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DivergenceKind::Relative => "relative",
            DivergenceKind::Max => "max",
            DivergenceKind::HypothesisTesting => "hypothesis_testing",
            DivergenceKind::SmoothedMax => "smoothed_max",
        }
    }
}

/// How far a reported value can be trusted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Certificate {
    Exact,
    LowerBound,
    UpperBound,
    Heuristic,
}

impl Certificate {
    pub fn as_str(self) -> &'static str {
        match self {
            Certificate::Exact => "exact",
            Certificate::LowerBound => "lower_bound",
            Certificate::UpperBound => "upper_bound",
            Certificate::Heuristic => "heuristic",
        }
    }
}

#[derive(Debug, Clone)]
pub struct DivergenceReport {
    pub value: f64,
    pub kind: DivergenceKind,
    pub certificate: Certificate,
    /// Input state `ψ_RA'` (reference first) attaining or approaching the value.
    pub achieving_input: Option<DensityMatrix>,
    pub iterations: usize,
    /// Final optimality residual; its meaning depends on the method.
    pub residual: f64,
    pub warning: Option<String>,
}

impl DivergenceReport {
    pub(crate) fn new(value: f64, kind: DivergenceKind, certificate: Certificate) -> Self {
        DivergenceReport {
            value,
            kind,
            certificate,
            achieving_input: None,
            iterations: 0,
            residual: 0.0,
            warning: None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        self.value.is_infinite()
    }
}

fn check_pair(rho: &DensityMatrix, sigma: &Hermitian) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            got: sigma.dim(),
        });
    }
    let min = sigma.min_eigenvalue();
    if min < -1e-10 {
        return Err(Error::NotPsd(min));
    }
    Ok(())
}

/// True when `supp ρ ⊆ supp σ`, with supports taken at `SUPPORT_TOL`.
pub fn support_contained(rho: &CMatrix, sigma: &CMatrix) -> bool {
    let e = eigh(sigma);
    let scale = e.max().abs().max(1.0);
    let kernel = e.map(|x| if x > SUPPORT_TOL * scale { 0.0 } else { 1.0 });
    linalg::inner(&kernel, rho) <= SUPPORT_TOL * linalg::trace(rho).re.max(1.0)
}

/// `D(ρ‖σ) = tr ρ (ln ρ − ln σ)`; `σ` may be unnormalized.
pub fn rel_entropy(rho: &DensityMatrix, sigma: &Hermitian) -> Result<f64> {
    check_pair(rho, sigma)?;
    if !support_contained(rho.matrix(), sigma.matrix()) {
        return Ok(f64::INFINITY);
    }
    let e = eigh(sigma.matrix());
    let scale = e.max().abs().max(1.0);
    let log_sigma = e.map(|x| if x > SUPPORT_TOL * scale { x.ln() } else { 0.0 });
    Ok(rel_entropy_with_log_raw(rho.matrix(), &log_sigma))
}

/// `D(ρ‖σ)` with `ln σ` supplied; for Gibbs states `ln σ = −βĤ − ln Z`
/// is known exactly even when `σ` has eigenvalues below double precision.
pub fn rel_entropy_with_log(rho: &DensityMatrix, log_sigma: &Hermitian) -> Result<f64> {
    if rho.dim() != log_sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            got: log_sigma.dim(),
        });
    }
    Ok(rel_entropy_with_log_raw(rho.matrix(), log_sigma.matrix()))
}

pub(crate) fn rel_entropy_with_log_raw(rho: &CMatrix, log_sigma: &CMatrix) -> f64 {
    let neg_s = -linalg::entropy_of(rho, crate::qcore::SUPPORT_CUTOFF);
    neg_s - linalg::inner(rho, log_sigma)
}

/// `D_∞(ρ‖σ) = ln λ_max(σ^{-1/2} ρ σ^{-1/2})` on the support of `σ`.
pub fn max_rel_entropy(rho: &DensityMatrix, sigma: &Hermitian) -> Result<f64> {
    check_pair(rho, sigma)?;
    if !support_contained(rho.matrix(), sigma.matrix()) {
        return Ok(f64::INFINITY);
    }
    let e = eigh(sigma.matrix());
    let scale = e.max().abs().max(1.0);
    let inv = e.map(|x| if x > SUPPORT_TOL * scale { 1.0 / x.sqrt() } else { 0.0 });
    let pencil = &inv * rho.matrix() * &inv;
    Ok(linalg::max_eigenvalue(&pencil).ln())
}

/// Result of the quantum Neyman–Pearson computation.
#[derive(Debug, Clone)]
pub struct HypothesisTest {
    /// `−ln β`.
    pub value: f64,
    /// Minimal type-II error `β = min tr(Λσ)`.
    pub type2: f64,
    /// An optimal test `Λ`.
    pub test: CMatrix,
}

/// `D_H^ε(ρ‖σ) = −ln min{tr(Λσ) : 0 ⪯ Λ ⪯ I, tr(Λρ) ≥ 1 − ε}`.
///
/// `ε = 1` is unbounded and reported as infinity.
pub fn ht_rel_entropy(rho: &DensityMatrix, sigma: &Hermitian, eps: f64) -> Result<f64> {
    check_pair(rho, sigma)?;
    Ok(neyman_pearson(rho.matrix(), sigma.matrix(), eps)?.value)
}

/// Bisection on the threshold `μ` of the dual
/// `β = max_μ≥0 μ(1−ε) − tr(μρ − σ)_+`, whose maximizer is where
/// `tr(P_μ ρ)` crosses `1 − ε`, with `P_μ` the projector onto the positive
/// part of `μρ − σ`. The optimal test is `P_μ` just below `μ*` plus the
/// fraction of the eigenvectors entering at `μ*` that saturates `tr(Λρ) = 1 − ε`.
pub fn neyman_pearson(rho: &CMatrix, sigma: &CMatrix, eps: f64) -> Result<HypothesisTest> {
    if !(0.0..=1.0).contains(&eps) || eps.is_nan() {
        return Err(Error::input(format!("eps must lie in [0, 1), got {eps}")));
    }
    let n = rho.nrows();
    if eps == 1.0 {
        return Ok(HypothesisTest {
            value: f64::INFINITY,
            type2: 0.0,
            test: CMatrix::zeros(n, n),
        });
    }
    let target = 1.0 - eps;
    if eps == 0.0 {
        let e = eigh(rho);
        let scale = e.max().abs().max(1.0);
        let proj = e.map(|x| if x > SUPPORT_TOL * scale { 1.0 } else { 0.0 });
        let beta = linalg::inner(&proj, sigma);
        return Ok(HypothesisTest {
            value: -beta.ln(),
            type2: beta,
            test: proj,
        });
    }
    let shifted = |mu: f64| eigh(&(rho * linalg::c(mu, 0.0) - sigma));
    let accepted = |mu: f64| {
        let proj = shifted(mu).map(|x| if x > 0.0 { 1.0 } else { 0.0 });
        linalg::inner(&proj, rho)
    };
    let mut lo = 0.0;
    let mut hi = 1.0;
    while accepted(hi) < target {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::numerical("Neyman–Pearson threshold search diverged"));
        }
    }
    while hi - lo > 1e-13 * hi {
        let mid = 0.5 * (lo + hi);
        if accepted(mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    // eigenvalues within `tol` of zero at μ* form the boundary subspace
    let mu = 0.5 * (lo + hi);
    let e = shifted(mu);
    let tol = 1e-10 * (mu * linalg::max_abs(rho) + linalg::max_abs(sigma));
    let plus = e.map(|x| if x > tol { 1.0 } else { 0.0 });
    let zero = e.map(|x| if x.abs() <= tol { 1.0 } else { 0.0 });
    let a_plus = linalg::inner(&plus, rho);
    let a_zero = linalg::inner(&zero, rho);
    let q = if a_zero > 0.0 {
        ((target - a_plus) / a_zero).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let test = &plus + zero * linalg::c(q, 0.0);
    let beta = linalg::inner(&test, sigma).max(0.0);
    Ok(HypothesisTest {
        value: -beta.ln(),
        type2: beta,
        test,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::random::{random_density_matrix, random_pure_state};
    use crate::qcore::{thermal_state, vn_entropy};
    use std::f64::consts::LN_2;

    fn half() -> Hermitian {
        DensityMatrix::maximally_mixed(2).as_hermitian()
    }

    #[test]
    fn rel_entropy_examples() {
        let rho = random_density_matrix(3, 1);
        assert!(rel_entropy(&rho, &rho.as_hermitian()).unwrap().abs() < 1e-12);
        let zero = DensityMatrix::basis_state(2, 0);
        assert!((rel_entropy(&zero, &half()).unwrap() - LN_2).abs() < 1e-12);
        let one = DensityMatrix::basis_state(2, 1);
        assert!(rel_entropy(&one, &zero.as_hermitian()).unwrap().is_infinite());
    }

    #[test]
    fn rel_entropy_to_unnormalized_gibbs_is_beta_free_energy() {
        let h = Hermitian::from_real_diagonal(&[0.0, 1.3]);
        let beta = 0.8;
        let ctx = thermal_state(&h, beta).unwrap();
        for seed in 0..20 {
            let rho = random_density_matrix(2, seed);
            let energy = h.expectation(&rho.as_hermitian());
            let ft = energy - vn_entropy(&rho) / beta;
            let d = rel_entropy(&rho, ctx.gamma_hat()).unwrap();
            assert!((d - beta * ft).abs() < 1e-10);
        }
    }

    #[test]
    fn max_rel_entropy_examples() {
        let rho = random_density_matrix(3, 2);
        assert!(max_rel_entropy(&rho, &rho.as_hermitian()).unwrap().abs() < 1e-10);
        let zero = DensityMatrix::basis_state(2, 0);
        assert!((max_rel_entropy(&zero, &half()).unwrap() - LN_2).abs() < 1e-12);
        for seed in 0..50 {
            let a = random_density_matrix(3, 100 + seed);
            let b = random_density_matrix(3, 200 + seed);
            let dmax = max_rel_entropy(&a, &b.as_hermitian()).unwrap();
            let d = rel_entropy(&a, &b.as_hermitian()).unwrap();
            assert!(dmax >= d - 1e-10);
        }
    }

    #[test]
    fn ht_examples() {
        let rho = random_density_matrix(3, 5);
        for eps in [0.0, 0.1, 0.5] {
            let v = ht_rel_entropy(&rho, &rho.as_hermitian(), eps).unwrap();
            assert!((v + (1.0 - eps).ln()).abs() < 1e-10, "eps {eps}: {v}");
        }
        let zero = DensityMatrix::basis_state(2, 0);
        assert!((ht_rel_entropy(&zero, &half(), 0.0).unwrap() - LN_2).abs() < 1e-12);
        assert!(ht_rel_entropy(&zero, &half(), 1.0).unwrap().is_infinite());
        assert!(ht_rel_entropy(&zero, &half(), -0.1).is_err());
        assert!(ht_rel_entropy(&zero, &half(), 1.5).is_err());
    }

    /// Classical Neyman–Pearson: accept outcomes in decreasing order of
    /// `p_i / q_i` until the acceptance probability reaches `1 − ε`.
    fn classical_type2(p: &[f64], q: &[f64], eps: f64) -> f64 {
        let mut idx: Vec<usize> = (0..p.len()).collect();
        idx.sort_by(|&a, &b| (p[b] * q[a]).total_cmp(&(p[a] * q[b])));
        let mut need = 1.0 - eps;
        let mut beta = 0.0;
        for i in idx {
            if need <= 0.0 {
                break;
            }
            let take = if p[i] <= need { 1.0 } else { need / p[i] };
            need -= take * p[i];
            beta += take * q[i];
        }
        beta
    }

    #[test]
    fn commuting_pairs_match_the_classical_test() {
        use rand::Rng;
        let mut rng = crate::qcore::random::rng_from_seed(17);
        for _ in 0..30 {
            let n = 2 + rng.random_range(0..3);
            let mut p: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 0.01).collect();
            let mut q: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 0.01).collect();
            let sp: f64 = p.iter().sum();
            let sq: f64 = q.iter().sum();
            p.iter_mut().for_each(|x| *x /= sp);
            q.iter_mut().for_each(|x| *x /= sq);
            let eps = rng.random::<f64>() * 0.9;
            let rho = DensityMatrix::diagonal(&p).unwrap();
            let sigma = DensityMatrix::diagonal(&q).unwrap().as_hermitian();
            let got = neyman_pearson(rho.matrix(), sigma.matrix(), eps).unwrap();
            let want = classical_type2(&p, &q, eps);
            assert!((got.type2 - want).abs() < 1e-12, "{} vs {want}", got.type2);
        }
    }

    #[test]
    fn neyman_pearson_test_is_feasible_and_optimal() {
        for seed in 0..20 {
            let rho = random_density_matrix(3, seed);
            let sigma = random_density_matrix(3, seed + 50);
            let eps = 0.05 + 0.04 * seed as f64;
            let r = neyman_pearson(rho.matrix(), sigma.matrix(), eps).unwrap();
            let accept = linalg::inner(&r.test, rho.matrix());
            assert!((accept - (1.0 - eps)).abs() < 1e-9);
            assert!(linalg::min_eigenvalue(&r.test) > -1e-12);
            assert!(linalg::max_eigenvalue(&r.test) < 1.0 + 1e-12);
            assert!((linalg::inner(&r.test, sigma.matrix()) - r.type2).abs() < 1e-9);
        }
    }

    #[test]
    fn ht_bounded_by_pure_state_overlap() {
        let psi = random_pure_state(2, 3);
        let v = ht_rel_entropy(&psi, &half(), 0.0).unwrap();
        assert!((v - LN_2).abs() < 1e-12);
    }
}
