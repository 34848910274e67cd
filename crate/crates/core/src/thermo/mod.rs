//! Free energies, work and the thermodynamic quantities of channels.
//!
//! Energies are in the units of the Hamiltonian, entropies in nats, and
//! `β` carries inverse energy units.

mod one_shot;

pub use one_shot::{
    asymptotic_rate_estimate, asymptotic_rate_estimate_seeded, one_shot, one_shot_cost, one_shot_distill, OneShotMode,
    OneShotResult, RateEstimate, RatePoint,
};

use crate::channels::Channel;
use crate::divergences::{self, channel_rel_entropy_log, AscentOptions, Certificate, DivergenceReport};
use crate::error::{Error, Result};
use crate::optim::NelderMead;
use crate::qcore::linalg::{self, c, kron, CMatrix};
use crate::qcore::random::{ginibre, rng_from_seed};
use crate::qcore::{mutual_information, vn_entropy, DensityMatrix, Hermitian, ThermalContext};

/// Mismatch allowed between two routes to the same identity before it is
/// treated as a numerical failure.
const IDENTITY_TOL: f64 = 1e-8;

/// `(F_T, F)` of a state: `F_T = E(ρ) − β⁻¹S(ρ)` and `F = β⁻¹D(ρ‖γ)`.
/// `F_T` is cross-checked against `β⁻¹D(ρ‖γ̂)`.
pub fn state_free_energies(rho: &DensityMatrix, ctx: &ThermalContext) -> Result<(f64, f64)> {
    if rho.dim() != ctx.dim() {
        return Err(Error::DimensionMismatch {
            expected: ctx.dim(),
            got: rho.dim(),
        });
    }
    let beta = ctx.beta();
    let energy = ctx.hamiltonian().expectation(&rho.as_hermitian());
    let ft = energy - vn_entropy(rho) / beta;
    let f = divergences::rel_entropy_with_log(rho, &ctx.log_gamma())? / beta;
    let ft_check = divergences::rel_entropy_with_log(rho, &ctx.log_gamma_hat())? / beta;
    if (ft - ft_check).abs() > IDENTITY_TOL * (1.0 + ft.abs()) {
        return Err(Error::numerical(format!(
            "thermal free energy routes disagree: {ft} vs {ft_check}"
        )));
    }
    Ok((ft, f))
}

/// `β⁻¹ I(A;B) + F(ρ_A) + F(ρ_B)`, validated against `β⁻¹ D(ρ_AB ‖ γ_A⊗γ_B)`.
pub fn extractable_work_bipartite(
    rho_ab: &DensityMatrix,
    ctx_a: &ThermalContext,
    ctx_b: &ThermalContext,
) -> Result<f64> {
    let joint = ctx_a.noninteracting(ctx_b)?;
    let (da, db) = (ctx_a.dim(), ctx_b.dim());
    if rho_ab.dim() != da * db {
        return Err(Error::DimensionMismatch {
            expected: da * db,
            got: rho_ab.dim(),
        });
    }
    let beta = ctx_a.beta();
    let rho_a = rho_ab.reduce(&[da, db], &[0])?;
    let rho_b = rho_ab.reduce(&[da, db], &[1])?;
    let (_, fa) = state_free_energies(&rho_a, ctx_a)?;
    let (_, fb) = state_free_energies(&rho_b, ctx_b)?;
    let work = mutual_information(rho_ab, da, db)? / beta + fa + fb;
    let check = divergences::rel_entropy_with_log(rho_ab, &joint.log_gamma())? / beta;
    if (work - check).abs() > IDENTITY_TOL * (1.0 + work.abs()) {
        return Err(Error::numerical(format!(
            "bipartite work routes disagree: {work} vs {check}"
        )));
    }
    Ok(work)
}

/// Certificates attached to the optimized fields of a [`ThermoReport`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Provenance {
    pub thermal_free_energy: Certificate,
    pub free_energy: Certificate,
    pub energy: Certificate,
    pub entropy: Certificate,
    pub helmholtz_gap: Certificate,
}

#[derive(Debug, Clone)]
pub struct ThermoReport {
    pub beta: f64,
    /// `F_T^β[N] = β⁻¹ D[N‖T̂^β]`.
    pub thermal_free_energy: f64,
    /// `F^β[N] = β⁻¹ D[N‖T^β]`.
    pub free_energy: f64,
    pub extractable_work: f64,
    /// `E[N] = max_ρ tr(N(ρ)Ĥ)`.
    pub energy: f64,
    /// `S[N] = min_ρ S(N^c(ρ)) − S(ρ)`.
    pub entropy: f64,
    /// `E[N] − β⁻¹S[N] − F_T^β[N]`.
    pub helmholtz_gap: f64,
    pub provenance: Provenance,
    /// `|F − (F_T − F_T[T^β])|`, the two routes to the free energy.
    pub identity_residual: f64,
    /// Largest optimality gap among the ascent runs, in nats.
    pub optimality_gap: f64,
    /// Optimality gap of each optimized quantity, in nats.
    pub gaps: [(&'static str, f64); 3],
    pub warnings: Vec<String>,
}

fn require_square(n: &Channel, ctx: &ThermalContext) -> Result<()> {
    if !n.is_square() {
        return Err(Error::input(format!(
            "thermodynamic quantities need a square channel, got {} -> {}",
            n.dim_in(),
            n.dim_out()
        )));
    }
    if n.dim_out() != ctx.dim() {
        return Err(Error::DimensionMismatch {
            expected: ctx.dim(),
            got: n.dim_out(),
        });
    }
    Ok(())
}

/// `D[N‖T^β]` in nats, via the ascent with the exact `ln γ`.
pub fn athermality(n: &Channel, ctx: &ThermalContext, opts: &AscentOptions) -> Result<DivergenceReport> {
    require_square(n, ctx)?;
    channel_rel_entropy_log(n, &ctx.log_gamma(), opts)
}

/// `F^β[N] = β⁻¹ D[N‖T^β]`.
pub fn channel_free_energy(n: &Channel, ctx: &ThermalContext) -> Result<f64> {
    Ok(athermality(n, ctx, &AscentOptions::default())?.value / ctx.beta())
}

/// `F_T^β[N] = β⁻¹ D[N‖T̂^β]`.
pub fn channel_thermal_free_energy(n: &Channel, ctx: &ThermalContext) -> Result<f64> {
    require_square(n, ctx)?;
    Ok(channel_rel_entropy_log(n, &ctx.log_gamma_hat(), &AscentOptions::default())?.value / ctx.beta())
}

/// `E[N] = λ_max(N†(Ĥ))`, with a maximizing pure input.
pub fn channel_energy(n: &Channel, ctx: &ThermalContext) -> Result<(f64, DensityMatrix)> {
    require_square(n, ctx)?;
    let pulled = n.adjoint_apply(ctx.hamiltonian())?;
    let e = linalg::eigh(pulled.matrix());
    let top = e.column(e.values.len() - 1);
    Ok((e.max(), DensityMatrix::from_raw(linalg::projector(&top))))
}

/// `S[N] = −D[N‖R^I]`.
pub fn channel_entropy(n: &Channel, opts: &AscentOptions) -> Result<DivergenceReport> {
    let zero = Hermitian::zeros(n.dim_out());
    let mut r = channel_rel_entropy_log(n, &zero, opts)?;
    r.value = -r.value;
    if r.certificate == Certificate::LowerBound {
        r.certificate = Certificate::UpperBound;
    }
    Ok(r)
}

pub fn channel_thermo_report(n: &Channel, ctx: &ThermalContext) -> Result<ThermoReport> {
    channel_thermo_report_with(n, ctx, &AscentOptions::default())
}

pub fn channel_thermo_report_with(n: &Channel, ctx: &ThermalContext, opts: &AscentOptions) -> Result<ThermoReport> {
    require_square(n, ctx)?;
    let beta = ctx.beta();
    let thermal = channel_rel_entropy_log(n, &ctx.log_gamma_hat(), opts)?;
    let free = channel_rel_entropy_log(n, &ctx.log_gamma(), opts)?;
    let entropy = channel_entropy(n, opts)?;
    let (energy, _) = channel_energy(n, ctx)?;

    let ft = thermal.value / beta;
    let f = free.value / beta;
    let s = entropy.value;
    let mut warnings: Vec<String> = [
        ("thermal_free_energy", &thermal),
        ("free_energy", &free),
        ("entropy", &entropy),
    ]
    .iter()
    .filter_map(|(name, r)| r.warning.as_ref().map(|w| format!("{name}: {w}")))
    .collect();
    // F_T[T^β] = β⁻¹ D(γ‖γ̂) = −β⁻¹ ln Z
    let identity_residual = (f - (ft - ctx.equilibrium_free_energy())).abs();
    if identity_residual > 1e-6 {
        warnings.push(format!("free energy routes disagree by {identity_residual:.3e}"));
    }
    let optimality_gap = thermal.residual.max(free.residual).max(entropy.residual);
    Ok(ThermoReport {
        beta,
        thermal_free_energy: ft,
        free_energy: f,
        extractable_work: f,
        energy,
        entropy: s,
        helmholtz_gap: energy - s / beta - ft,
        provenance: Provenance {
            thermal_free_energy: thermal.certificate,
            free_energy: free.certificate,
            energy: Certificate::Exact,
            entropy: entropy.certificate,
            helmholtz_gap: Certificate::Heuristic,
        },
        identity_residual,
        optimality_gap,
        gaps: [
            ("thermal_free_energy", thermal.residual),
            ("free_energy", free.residual),
            ("entropy", entropy.residual),
        ],
        warnings,
    })
}

/// Net work of converting `N` into `M` in the reversible limit.
#[derive(Debug, Clone)]
pub struct WorkCapacity {
    /// `F_T^β[N] − F_T^β[M]`.
    pub delta_w: f64,
    /// `β⁻¹(D[N‖T^β] − D[M‖T^β])`.
    pub divergence_difference: f64,
    pub residual: f64,
}

pub fn work_capacity(n: &Channel, m: &Channel, ctx: &ThermalContext) -> Result<WorkCapacity> {
    require_square(n, ctx)?;
    require_square(m, ctx)?;
    let beta = ctx.beta();
    let opts = AscentOptions::default();
    let ft_n = channel_rel_entropy_log(n, &ctx.log_gamma_hat(), &opts)?.value / beta;
    let ft_m = channel_rel_entropy_log(m, &ctx.log_gamma_hat(), &opts)?.value / beta;
    let d_n = channel_rel_entropy_log(n, &ctx.log_gamma(), &opts)?.value;
    let d_m = channel_rel_entropy_log(m, &ctx.log_gamma(), &opts)?.value;
    let delta_w = ft_n - ft_m;
    let divergence_difference = (d_n - d_m) / beta;
    let residual = (delta_w - divergence_difference).abs();
    if residual > 1e-6 {
        return Err(Error::numerical(format!(
            "work capacity routes disagree by {residual:.3e}"
        )));
    }
    Ok(WorkCapacity {
        delta_w,
        divergence_difference,
        residual,
    })
}

/// Result of maximizing `β⁻¹ I(R;A) + F(N(ψ_A'))` over pure inputs.
#[derive(Debug, Clone)]
pub struct TwoTermWork {
    pub value: f64,
    pub mutual_information: f64,
    pub output_free_energy: f64,
    pub achieving_input: DensityMatrix,
    pub evaluations: usize,
}

struct TwoTerm<'a> {
    n: &'a Channel,
    log_gamma: Hermitian,
    beta: f64,
}

impl TwoTerm<'_> {
    /// `(β⁻¹ I(R;A), F(N(ψ_A')))` for `ψ = Σ_i A|i⟩⊗|i⟩`, from the bipartite output.
    fn terms(&self, a: &CMatrix) -> (f64, f64) {
        let d = self.n.dim_in();
        let dout = self.n.dim_out();
        let a = a / c(a.norm(), 0.0);
        let w = kron(&a, &linalg::identity(dout));
        let out = DensityMatrix::from_raw(linalg::hermitize(&(&w * self.n.choi() * w.adjoint())));
        let i = mutual_information(&out, d, dout).unwrap_or(f64::NAN);
        let marginal = out.reduce(&[d, dout], &[1]).expect("dimensions factor");
        let f = divergences::rel_entropy_with_log(&marginal, &self.log_gamma).unwrap_or(f64::NAN);
        (i / self.beta, f / self.beta)
    }

    fn value(&self, a: &CMatrix) -> f64 {
        let (i, f) = self.terms(a);
        i + f
    }
}

/// Maximizes the two-term work objective directly over pure-input amplitudes,
/// without the complementary-channel reduction used by the divergence path.
pub fn extractable_work_two_term(n: &Channel, ctx: &ThermalContext, seed: u64) -> Result<TwoTermWork> {
    require_square(n, ctx)?;
    let d = n.dim_in();
    let obj = TwoTerm {
        n,
        log_gamma: ctx.log_gamma(),
        beta: ctx.beta(),
    };
    let mut candidates: Vec<CMatrix> = vec![linalg::identity(d)];
    if d == 2 {
        candidates.extend(divergences::bloch_grid_states(9).iter().map(linalg::sqrt_psd));
    }
    let mut rng = rng_from_seed(seed);
    for _ in 0..200 {
        candidates.push(ginibre(d, d, &mut rng));
    }
    let mut scored: Vec<(f64, CMatrix)> = candidates.into_iter().map(|a| (obj.value(&a), a)).collect();
    let mut evaluations = scored.len();
    scored.sort_by(|x, y| y.0.total_cmp(&x.0));

    let pack = |a: &CMatrix| -> Vec<f64> {
        let a = a / c(a.norm(), 0.0);
        a.iter().flat_map(|z| [z.re, z.im]).collect()
    };
    let unpack = |x: &[f64]| CMatrix::from_iterator(d, d, x.chunks(2).map(|p| c(p[0], p[1])));
    let nm = NelderMead {
        initial_step: 0.05,
        max_evals: 3000,
        f_tol: 1e-15,
    };
    let f = |x: &[f64]| {
        let a = unpack(x);
        if a.norm() < 1e-9 {
            return f64::INFINITY;
        }
        -obj.value(&a)
    };
    let (mut best, mut best_a) = scored[0].clone();
    for (_, a) in scored.iter().take(3) {
        let mut x = pack(a);
        // restart from the previous optimum to escape a collapsed simplex
        let mut last = f64::NEG_INFINITY;
        for _ in 0..3 {
            let m = nm.minimize(f, &x);
            evaluations += m.evaluations;
            x = m.x;
            if -m.value > best {
                best = -m.value;
                best_a = unpack(&x);
            }
            if -m.value - last < 1e-12 {
                break;
            }
            last = -m.value;
        }
    }
    let (i, fo) = obj.terms(&best_a);
    Ok(TwoTermWork {
        value: best,
        mutual_information: i * obj.beta,
        output_free_energy: fo,
        achieving_input: divergences::input_from_amplitudes(&best_a),
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::random::random_density_matrix;
    use std::f64::consts::LN_2;

    fn bath(beta: f64) -> ThermalContext {
        ThermalContext::new(Hermitian::from_real_diagonal(&[0.0, 1.0]), beta).unwrap()
    }

    #[test]
    fn state_free_energy_examples() {
        let ctx = bath(0.9);
        let (ft, f) = state_free_energies(ctx.gamma(), &ctx).unwrap();
        assert!(f.abs() < 1e-12);
        assert!((ft - ctx.equilibrium_free_energy()).abs() < 1e-12);
        // βE = ln 2: Z = 3/2 and D(|0⟩⟨0|‖γ) = ln Z
        let beta = LN_2;
        let ctx = bath(beta);
        let (_, f) = state_free_energies(&DensityMatrix::basis_state(2, 0), &ctx).unwrap();
        assert!((f - 1.5f64.ln() / beta).abs() < 1e-12);
        for seed in 0..50 {
            let rho = random_density_matrix(2, seed);
            assert!(state_free_energies(&rho, &ctx).unwrap().1 > 0.0);
        }
    }

    #[test]
    fn bipartite_work_examples() {
        let ctx = ThermalContext::degenerate(2, 1.7).unwrap();
        let phi = crate::qcore::max_entangled_state(2).unwrap();
        let w = extractable_work_bipartite(&phi, &ctx, &ctx).unwrap();
        assert!((w - 2.0 * LN_2 / 1.7).abs() < 1e-10);
        let other = ThermalContext::degenerate(2, 1.0).unwrap();
        assert!(extractable_work_bipartite(&phi, &ctx, &other)
            .unwrap_err()
            .is_input_error());
        let a = random_density_matrix(2, 1);
        let b = random_density_matrix(2, 2);
        let ctx = bath(0.8);
        let w = extractable_work_bipartite(&a.tensor(&b), &ctx, &ctx).unwrap();
        let fa = state_free_energies(&a, &ctx).unwrap().1;
        let fb = state_free_energies(&b, &ctx).unwrap().1;
        assert!((w - fa - fb).abs() < 1e-10);
    }

    #[test]
    fn thermal_channel_report_is_zero() {
        let ctx = bath(1.1);
        let t = Channel::absolutely_thermal(&ctx, 2);
        let r = channel_thermo_report(&t, &ctx).unwrap();
        assert!(r.free_energy.abs() < 1e-9);
        assert_eq!(r.extractable_work, r.free_energy);
        assert!(r.helmholtz_gap.abs() < 1e-8);
    }

    #[test]
    fn identity_with_degenerate_bath() {
        let beta = 0.6;
        let ctx = ThermalContext::degenerate(2, beta).unwrap();
        let r = channel_thermo_report(&Channel::identity(2), &ctx).unwrap();
        assert!((r.free_energy - 2.0 * LN_2 / beta).abs() < 1e-8);
        assert!((r.entropy + LN_2).abs() < 1e-8);
        assert!(r.energy.abs() < 1e-12);
        assert!(r.helmholtz_gap > -1e-8);
    }

    #[test]
    fn replacer_saturates_helmholtz() {
        let ctx = bath(1.4);
        for seed in 0..4 {
            let sigma = random_density_matrix(2, seed);
            let r = channel_thermo_report(&Channel::replacer(&sigma, 2), &ctx).unwrap();
            assert!(r.helmholtz_gap.abs() < 1e-6, "{}", r.helmholtz_gap);
            assert!((r.entropy - vn_entropy(&sigma)).abs() < 1e-6);
        }
    }

    #[test]
    fn work_capacity_examples() {
        let beta = 0.5;
        let ctx = ThermalContext::degenerate(2, beta).unwrap();
        let id = Channel::identity(2);
        let t = Channel::absolutely_thermal(&ctx, 2);
        assert!(work_capacity(&id, &id, &ctx).unwrap().delta_w.abs() < 1e-12);
        let w = work_capacity(&id, &t, &ctx).unwrap();
        assert!((w.delta_w - 2.0 * LN_2 / beta).abs() < 1e-8);
        let back = work_capacity(&t, &id, &ctx).unwrap();
        assert!((w.delta_w + back.delta_w).abs() < 1e-12);
    }

    #[test]
    fn two_term_objective_matches_divergence() {
        let ctx = bath(1.2);
        for seed in 0..3 {
            let n = Channel::random_seeded(2, 2, 2, 300 + seed);
            let two = extractable_work_two_term(&n, &ctx, seed).unwrap();
            let f = channel_free_energy(&n, &ctx).unwrap();
            assert!((two.value - f).abs() < 1e-4, "{} vs {f}", two.value);
        }
    }

    #[test]
    fn non_square_channels_are_rejected() {
        let ctx = bath(1.0);
        let n = Channel::random_seeded(3, 2, 2, 1);
        assert!(channel_thermo_report(&n, &ctx).unwrap_err().is_input_error());
    }
}
