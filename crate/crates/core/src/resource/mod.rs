//! Free objects and free operations: Gibbs-preserving channels, pre/post
//! sandwiches that send `T^β` to `T^β`, golden units and conversion bounds.

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::channels::Channel;
use crate::divergences::{channel_rel_entropy_log, rel_entropy, AscentOptions};
use crate::error::{Error, Result};
use crate::qcore::linalg::{self, eigh, CMatrix};
use crate::qcore::random::{haar_unitary, rng_from_seed};
use crate::qcore::{DensityMatrix, Hermitian, ThermalContext};
use crate::sdp::diamond_norm_of_channels;

/// `‖G(γ) − γ‖₁` at or below this counts as Gibbs-preserving.
pub const GIBBS_TOL: f64 = 1e-9;

/// Diamond-distance tolerance for `Θ(T^β) = T^β`.
pub const CLOSURE_TOL: f64 = 1e-6;

/// Energies closer than this are treated as one degenerate level.
const DEGENERACY_TOL: f64 = 1e-9;

fn require_bath_square(g: &Channel, ctx: &ThermalContext) -> Result<()> {
    if !g.is_square() {
        return Err(Error::input(format!(
            "expected a square channel, got {} -> {}",
            g.dim_in(),
            g.dim_out()
        )));
    }
    if g.dim_in() != ctx.dim() {
        return Err(Error::DimensionMismatch {
            expected: ctx.dim(),
            got: g.dim_in(),
        });
    }
    Ok(())
}

/// Outcome of the Gibbs-preservation test.
#[derive(Debug, Clone, Copy)]
pub struct GibbsCheck {
    pub preserving: bool,
    /// `‖G(γ) − γ‖₁`.
    pub residual: f64,
}

pub fn is_gibbs_preserving(g: &Channel, ctx: &ThermalContext) -> Result<GibbsCheck> {
    require_bath_square(g, ctx)?;
    let out = g.apply(ctx.gamma())?;
    let residual = linalg::trace_norm_herm(&(out.matrix() - ctx.gamma().matrix()));
    Ok(GibbsCheck {
        preserving: residual <= GIBBS_TOL,
        residual,
    })
}

/// Unitary commuting with `Ĥ`: random phases on nondegenerate levels and a
/// Haar unitary inside each degenerate block, in the energy eigenbasis.
pub fn random_energy_conserving_unitary<R: Rng + ?Sized>(h: &Hermitian, rng: &mut R) -> CMatrix {
    let e = eigh(h.matrix());
    let n = h.dim();
    let mut block = CMatrix::zeros(n, n);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && e.values[end] - e.values[start] <= DEGENERACY_TOL {
            end += 1;
        }
        let u = haar_unitary(end - start, rng);
        block.view_mut((start, start), (end - start, end - start)).copy_from(&u);
        start = end;
    }
    &e.vectors * block * e.vectors.adjoint()
}

/// Random convex combination of the identity, `T^β`, energy-conserving
/// unitaries and partial thermalizations `(1−p) id + p T^β`.
pub fn random_gibbs_preserving_channel(ctx: &ThermalContext, seed: u64) -> Result<Channel> {
    let mut rng = rng_from_seed(seed);
    let d = ctx.dim();
    let thermal = Channel::absolutely_thermal(ctx, d);
    let id = Channel::identity(d);
    let mut parts = vec![id.clone(), thermal.clone()];
    for _ in 0..2 {
        parts.push(Channel::unitary(random_energy_conserving_unitary(
            ctx.hamiltonian(),
            &mut rng,
        ))?);
    }
    let p: f64 = rng.random();
    parts.push(Channel::mixture(&[1.0 - p, p], &[&id, &thermal])?);
    // a unitary after a partial thermalization keeps the channel away from the simplex corners
    let u = Channel::unitary(random_energy_conserving_unitary(ctx.hamiltonian(), &mut rng))?;
    parts.push(Channel::compose(&u, &parts[4])?);
    let raw: Vec<f64> = parts.iter().map(|_| Exp1.sample(&mut rng)).collect();
    let total: f64 = raw.iter().sum();
    let mut weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let last = weights.len() - 1;
    weights[last] = 1.0 - weights[..last].iter().sum::<f64>();
    let refs: Vec<&Channel> = parts.iter().collect();
    Channel::mixture(&weights, &refs)
}

/// Memoryless superchannel `Θ(N) = post ∘ N ∘ pre` with a Gibbs-preserving `post`.
#[derive(Debug, Clone)]
pub struct SuperchannelSandwich {
    pub pre: Channel,
    pub post: Channel,
}

impl SuperchannelSandwich {
    /// Checks that `post` preserves the Gibbs state of `ctx`. `pre` may be any channel.
    pub fn new(pre: Channel, post: Channel, ctx: &ThermalContext) -> Result<Self> {
        let check = is_gibbs_preserving(&post, ctx)?;
        if !check.preserving {
            return Err(Error::input(format!(
                "post-processing is not Gibbs-preserving (residual {:.3e})",
                check.residual
            )));
        }
        if pre.dim_out() != ctx.dim() {
            return Err(Error::DimensionMismatch {
                expected: ctx.dim(),
                got: pre.dim_out(),
            });
        }
        Ok(SuperchannelSandwich { pre, post })
    }

    pub fn identity(dim: usize) -> Self {
        SuperchannelSandwich {
            pre: Channel::identity(dim),
            post: Channel::identity(dim),
        }
    }

    /// Random CPTP `pre` and random Gibbs-preserving `post`.
    pub fn random(ctx: &ThermalContext, seed: u64) -> Result<Self> {
        let d = ctx.dim();
        let mut rng = rng_from_seed(seed ^ 0x5a5a);
        let kraus = rng.random_range(1..=d * d);
        let pre = Channel::random(d, d, kraus, &mut rng);
        let post = random_gibbs_preserving_channel(ctx, rng.random())?;
        Self::new(pre, post, ctx)
    }

    /// `‖Θ(T^β) − T^β‖_⋄`.
    pub fn closure_residual(&self, ctx: &ThermalContext) -> Result<f64> {
        let t = Channel::absolutely_thermal(ctx, self.pre.dim_in());
        let image = apply_superchannel(self, &Channel::absolutely_thermal(ctx, ctx.dim()))?;
        diamond_norm_of_channels(&image, &t)
    }
}

pub fn apply_superchannel(theta: &SuperchannelSandwich, n: &Channel) -> Result<Channel> {
    let inner = Channel::compose(n, &theta.pre)?;
    Channel::compose(&theta.post, &inner)
}

/// Smallest diamond distance found within the constructive sandwich family.
#[derive(Debug, Clone)]
pub struct ConversionBound {
    /// Upper bound on the Gibbs-preserving conversion distance.
    pub value: f64,
    pub best: SuperchannelSandwich,
    pub candidates: usize,
}

/// Upper bound on `min_Θ ‖Θ(N) − M‖_⋄` over structured sandwiches (identity,
/// thermalizing post, inverse-unitary pre) and `budget` random ones. Larger
/// budgets extend the same candidate sequence, so the bound never increases.
pub fn conversion_distance_restricted(
    from: &Channel,
    to: &Channel,
    ctx: &ThermalContext,
    budget: usize,
    seed: u64,
) -> Result<ConversionBound> {
    require_bath_square(from, ctx)?;
    require_bath_square(to, ctx)?;
    let d = ctx.dim();
    let mut candidates = vec![
        SuperchannelSandwich::identity(d),
        SuperchannelSandwich::new(Channel::identity(d), Channel::absolutely_thermal(ctx, d), ctx)?,
    ];
    if let Some(u) = from.as_unitary() {
        // pre = U† ∘ M gives U ∘ U† ∘ M = M
        let undo = Channel::unitary(u.adjoint())?;
        candidates.push(SuperchannelSandwich::new(
            Channel::compose(&undo, to)?,
            Channel::identity(d),
            ctx,
        )?);
    }
    for k in 0..budget {
        candidates.push(SuperchannelSandwich::random(ctx, seed.wrapping_add(k as u64))?);
    }
    let mut best: Option<(f64, usize)> = None;
    for (i, theta) in candidates.iter().enumerate() {
        let image = apply_superchannel(theta, from)?;
        let dist = diamond_norm_of_channels(&image, to)?;
        if best.is_none_or(|(v, _)| dist < v) {
            best = Some((dist, i));
        }
    }
    let (value, index) = best.expect("candidate list is nonempty");
    Ok(ConversionBound {
        value,
        best: candidates.swap_remove(index),
        candidates: candidates.len() + 1,
    })
}

/// The pair `(id_m, R^π)`.
#[derive(Debug, Clone)]
pub struct GoldenUnit {
    pub m: usize,
    pub channel: Channel,
    pub free_reference: Channel,
    /// `D[id_m‖R^π]`, recomputed at construction.
    pub divergence: f64,
}

pub fn golden_unit(m: usize) -> Result<GoldenUnit> {
    if m < 2 {
        return Err(Error::input(format!("golden unit needs m >= 2, got {m}")));
    }
    let pi = DensityMatrix::maximally_mixed(m);
    let channel = Channel::identity(m);
    let log_pi = Hermitian::identity(m).scale(-(m as f64).ln());
    let divergence = channel_rel_entropy_log(&channel, &log_pi, &AscentOptions::default())?.value;
    let want = 2.0 * (m as f64).ln();
    if (divergence - want).abs() > 1e-5 {
        return Err(Error::numerical(format!(
            "golden unit divergence {divergence} differs from 2 ln {m}"
        )));
    }
    Ok(GoldenUnit {
        m,
        channel,
        free_reference: Channel::replacer(&pi, m),
        divergence,
    })
}

/// Channel side against twice the state side for one golden unit.
#[derive(Debug, Clone, Copy)]
pub struct DoublingCheck {
    /// `D[id_m‖R^π]`.
    pub channel_divergence: f64,
    /// `D(|0⟩⟨0| ‖ π_m)`.
    pub state_divergence: f64,
    pub residual: f64,
    pub passed: bool,
}

/// `D[id_m‖R^π] = 2 D(|0⟩⟨0|‖π_m)` for a fully degenerate bath on `m` levels.
pub fn golden_unit_doubling_check(m: usize, ctx: &ThermalContext) -> Result<DoublingCheck> {
    if !ctx.is_degenerate() {
        return Err(Error::input("the doubling check needs a fully degenerate Hamiltonian"));
    }
    if ctx.dim() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: ctx.dim(),
        });
    }
    let unit = golden_unit(m)?;
    let state = rel_entropy(&DensityMatrix::basis_state(m, 0), &ctx.gamma().as_hermitian())?;
    let residual = (unit.divergence - 2.0 * state).abs();
    Ok(DoublingCheck {
        channel_divergence: unit.divergence,
        state_divergence: state,
        residual,
        passed: residual <= 1e-5,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::pauli_x;
    use std::f64::consts::LN_2;

    fn bath() -> ThermalContext {
        ThermalContext::new(Hermitian::from_real_diagonal(&[0.0, 0.4, 0.4]), 1.1).unwrap()
    }

    #[test]
    fn energy_conserving_unitaries_fix_gamma() {
        let ctx = bath();
        let mut rng = rng_from_seed(2);
        for _ in 0..10 {
            let u = random_energy_conserving_unitary(ctx.hamiltonian(), &mut rng);
            let comm = &u * ctx.hamiltonian().matrix() - ctx.hamiltonian().matrix() * &u;
            assert!(comm.norm() < 1e-12);
            assert!(linalg::unitarity_residual(&u) < 1e-12);
        }
    }

    #[test]
    fn sampled_channels_are_gibbs_preserving() {
        let ctx = bath();
        for seed in 0..100 {
            let g = random_gibbs_preserving_channel(&ctx, seed).unwrap();
            let check = is_gibbs_preserving(&g, &ctx).unwrap();
            assert!(check.preserving, "seed {seed}: {}", check.residual);
        }
        let t = Channel::absolutely_thermal(&ctx, 3);
        assert!(is_gibbs_preserving(&t, &ctx).unwrap().preserving);
    }

    #[test]
    fn generic_channels_are_not_gibbs_preserving() {
        let ctx = bath();
        for seed in 0..20 {
            let n = Channel::random_seeded(3, 3, 2, seed);
            let check = is_gibbs_preserving(&n, &ctx).unwrap();
            assert!(!check.preserving);
            assert!(check.residual > GIBBS_TOL);
        }
    }

    #[test]
    fn sandwich_keeps_thermal_channel() {
        let ctx = ThermalContext::new(Hermitian::from_real_diagonal(&[0.0, 1.0]), 0.7).unwrap();
        for seed in 0..5 {
            let theta = SuperchannelSandwich::random(&ctx, seed).unwrap();
            assert!(theta.closure_residual(&ctx).unwrap() < CLOSURE_TOL);
        }
        let bad = Channel::unitary(pauli_x()).unwrap();
        assert!(SuperchannelSandwich::new(Channel::identity(2), bad, &ctx).is_err());
    }

    #[test]
    fn conversion_bounds() {
        let ctx = ThermalContext::degenerate(2, 1.0).unwrap();
        let n = Channel::random_seeded(2, 2, 2, 5);
        assert!(conversion_distance_restricted(&n, &n, &ctx, 0, 1).unwrap().value < 1e-6);
        let t = Channel::absolutely_thermal(&ctx, 2);
        assert!(conversion_distance_restricted(&n, &t, &ctx, 0, 1).unwrap().value < 1e-6);
        let a = conversion_distance_restricted(&n, &Channel::identity(2), &ctx, 2, 7)
            .unwrap()
            .value;
        let b = conversion_distance_restricted(&n, &Channel::identity(2), &ctx, 6, 7)
            .unwrap()
            .value;
        assert!(b <= a + 1e-12 && b >= 0.0);
    }

    #[test]
    fn golden_units() {
        for m in 2..=3 {
            let ctx = ThermalContext::degenerate(m, 1.0).unwrap();
            let check = golden_unit_doubling_check(m, &ctx).unwrap();
            assert!(check.passed);
            assert!((check.state_divergence - (m as f64).ln()).abs() < 1e-12);
        }
        assert!((golden_unit(2).unwrap().divergence - 2.0 * LN_2).abs() < 1e-8);
        let ctx = ThermalContext::new(Hermitian::from_real_diagonal(&[0.0, 1.0]), 1.0).unwrap();
        assert!(golden_unit_doubling_check(2, &ctx).unwrap_err().is_input_error());
    }
}
