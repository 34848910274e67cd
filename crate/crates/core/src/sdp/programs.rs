//! The concrete programs used by the rest of the crate.

use super::{solve_optimal, LinearTerm, ProblemBuilder, SdpProblem, SdpSolution, Sense};
use crate::channels::Channel;
use crate::error::{Error, Result};
use crate::qcore::linalg::{c, hermitian_deviation, identity, kron, CMatrix};

/// Largest Choi dimension handed to the joint channel programs. Above this the
/// Schur complement no longer fits a desk-scale budget.
pub const CHANNEL_SDP_CHOI_LIMIT: usize = 16;

/// Largest Choi dimension accepted by the diamond-norm program.
pub const DIAMOND_CHOI_LIMIT: usize = 64;

fn check_square(m: &CMatrix, what: &str) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::input(format!("{what} must be square")));
    }
    let dev = hermitian_deviation(m);
    if dev > 1e-10 {
        return Err(Error::input(format!("{what} is not Hermitian ({dev:.2e})")));
    }
    Ok(())
}

pub(crate) fn trace_norm_problem(h: &CMatrix) -> SdpProblem {
    // min tr P + tr Q  s.t.  P − Q = H
    let n = h.nrows();
    let mut pb = ProblemBuilder::new(vec![n, n], Sense::Minimize);
    pb.set_objective(0, identity(n)).set_objective(1, identity(n));
    pb.add_matrix_equality(&[LinearTerm::ident(0, 1.0), LinearTerm::ident(1, -1.0)], h);
    pb.build()
}

/// `‖H‖₁` as an SDP; used to cross-check the eigenvalue formula.
pub fn trace_norm_sdp(h: &CMatrix) -> Result<f64> {
    check_square(h, "operator")?;
    Ok(solve_optimal(&trace_norm_problem(h), "trace norm")?.primal_value)
}

/// `min tr(Λσ)` over `0 ⪯ Λ ⪯ I` with `tr(Λρ) ≥ 1 − ε`, returned as `−ln` of the optimum.
pub fn ht_sdp(rho: &CMatrix, sigma: &CMatrix, eps: f64) -> Result<f64> {
    check_square(rho, "rho")?;
    check_square(sigma, "sigma")?;
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::input(format!("eps must lie in [0, 1), got {eps}")));
    }
    let n = rho.nrows();
    let mut pb = ProblemBuilder::new(vec![n, n, 1], Sense::Minimize);
    pb.set_objective(0, sigma.clone());
    pb.add_matrix_equality(&[LinearTerm::ident(0, 1.0), LinearTerm::ident(1, 1.0)], &identity(n));
    pb.add_dense_constraint(&[(0, rho.clone()), (2, -identity(1))], 1.0 - eps);
    let sol = solve_optimal(&pb.build(), "hypothesis testing")?;
    Ok(-sol.primal_value.ln())
}

/// Diamond norm of a Hermiticity-preserving map given by its Choi matrix
/// (input factor first), without the ½ normalization:
///
/// `max ⟨J, W⟩` over `−ρ⊗I ⪯ W ⪯ ρ⊗I`, `tr ρ = 1`,
/// written with `P = ρ⊗I − W` and `Q = ρ⊗I + W`.
pub fn diamond_norm(choi: &CMatrix, dim_in: usize, dim_out: usize) -> Result<f64> {
    check_square(choi, "Choi matrix")?;
    let n = dim_in * dim_out;
    if choi.nrows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: choi.nrows(),
        });
    }
    if n > DIAMOND_CHOI_LIMIT {
        return Err(Error::input(format!(
            "Choi dimension {n} exceeds the diamond-norm limit {DIAMOND_CHOI_LIMIT}"
        )));
    }
    if choi.norm() < 1e-14 {
        return Ok(0.0);
    }
    let half = choi * c(0.5, 0.0);
    let mut pb = ProblemBuilder::new(vec![n, n, dim_in], Sense::Maximize);
    pb.set_objective(0, -&half).set_objective(1, half);
    pb.add_matrix_equality(
        &[
            LinearTerm::ident(0, 1.0),
            LinearTerm::ident(1, 1.0),
            LinearTerm::kron_identity_right(2, dim_out, -2.0),
        ],
        &CMatrix::zeros(n, n),
    );
    pb.add_dense_constraint(&[(2, identity(dim_in))], 1.0);
    let sol = solve_optimal(&pb.build(), "diamond norm")?;
    Ok(sol.primal_value.max(0.0))
}

/// `‖a − b‖_⋄`.
pub fn diamond_norm_of_channels(a: &Channel, b: &Channel) -> Result<f64> {
    diamond_norm(&a.choi_difference(b)?, a.dim_in(), a.dim_out())
}

/// Solution of the joint program for the hypothesis-testing divergence of a
/// channel against a replacer.
#[derive(Debug, Clone)]
pub struct ChannelHtSdp {
    /// `−ln` of the optimal type-II error.
    pub value: f64,
    /// Reduced state `ψ_R` of the optimal input.
    pub reference_state: CMatrix,
    pub solution: SdpSolution,
}

/// `min tr(Ω (I⊗ω))` over `0 ⪯ Ω ⪯ τ⊗I`, `tr(Ω J) ≥ 1 − ε`, `tr τ = 1`.
///
/// For a fixed input `ψ` with `ψ_R = τ`, the substitution
/// `Ω = (√τ⊗I) Λ (√τ⊗I)` turns the state-level test into this form, so the
/// joint minimum over `(τ, Ω)` is the channel quantity.
pub fn channel_ht_sdp(
    choi: &CMatrix,
    omega: &CMatrix,
    dim_in: usize,
    dim_out: usize,
    eps: f64,
) -> Result<ChannelHtSdp> {
    check_square(choi, "Choi matrix")?;
    check_square(omega, "omega")?;
    if !(0.0..1.0).contains(&eps) || eps == 0.0 {
        return Err(Error::input("the joint program needs eps in (0, 1)"));
    }
    let n = dim_in * dim_out;
    if n > CHANNEL_SDP_CHOI_LIMIT {
        return Err(Error::numerical(format!(
            "budget exceeded: Choi dimension {n} above {CHANNEL_SDP_CHOI_LIMIT}"
        )));
    }
    let mut pb = ProblemBuilder::new(vec![n, n, dim_in, 1], Sense::Minimize);
    pb.set_objective(0, kron(&identity(dim_in), omega));
    pb.add_matrix_equality(
        &[
            LinearTerm::ident(0, 1.0),
            LinearTerm::ident(1, 1.0),
            LinearTerm::kron_identity_right(2, dim_out, -1.0),
        ],
        &CMatrix::zeros(n, n),
    );
    pb.add_dense_constraint(&[(0, choi.clone()), (3, -identity(1))], 1.0 - eps);
    pb.add_dense_constraint(&[(2, identity(dim_in))], 1.0);
    let sol = solve_optimal(&pb.build(), "channel hypothesis testing")?;
    Ok(ChannelHtSdp {
        value: -sol.primal_value.ln(),
        reference_state: sol.x[2].clone(),
        solution: sol,
    })
}

/// `min λ` over channels `J'` with `J' ⪯ λ (I⊗ω)` and `‖N − N'‖_⋄ ≤ ε`.
///
/// The ball constraint uses the dual form of the diamond norm for a difference
/// of channels: `‖Δ‖_⋄ ≤ 2μ` whenever `Z ⪰ 0`, `Z ⪰ J_Δ` and `tr_2 Z ⪯ μ I`.
/// The witness blocks are stored divided by `ε` so that every block stays of
/// order one as the ball shrinks. Returns `ln λ` and the solution (block 0
/// holds `J'`).
pub fn smoothed_max_sdp(
    choi: &CMatrix,
    omega: &CMatrix,
    dim_in: usize,
    dim_out: usize,
    eps: f64,
) -> Result<(f64, SdpSolution)> {
    check_square(choi, "Choi matrix")?;
    check_square(omega, "omega")?;
    if !(0.0..1.0).contains(&eps) || eps == 0.0 {
        return Err(Error::input("the smoothing program needs eps in (0, 1)"));
    }
    let n = dim_in * dim_out;
    if n > CHANNEL_SDP_CHOI_LIMIT {
        return Err(Error::numerical(format!(
            "budget exceeded: Choi dimension {n} above {CHANNEL_SDP_CHOI_LIMIT}"
        )));
    }
    // blocks: J', Z/ε, S1/ε with S1 = Z − (J − J'), S2 = λ(I⊗ω) − J', λ,
    // S3/ε with S3 = μI − tr_2 Z, μ/ε, slack/ε
    let mut pb = ProblemBuilder::new(vec![n, n, n, n, 1, dim_in, 1, 1], Sense::Minimize);
    pb.set_objective(4, identity(1));
    pb.group("diamond witness Z >= J - J'");
    pb.add_matrix_equality(
        &[
            LinearTerm::ident(2, eps),
            LinearTerm::ident(1, -eps),
            LinearTerm::ident(0, -1.0),
        ],
        &(-choi),
    );
    pb.group("max-divergence J' <= lambda (I x omega)");
    pb.add_matrix_equality(
        &[
            LinearTerm::ident(3, 1.0),
            LinearTerm::ident(0, 1.0),
            LinearTerm::scalar_times(4, -kron(&identity(dim_in), omega)),
        ],
        &CMatrix::zeros(n, n),
    );
    pb.group("diamond witness tr_2 Z <= mu I");
    pb.add_matrix_equality(
        &[
            LinearTerm::ident(5, 1.0),
            LinearTerm::trace_out_second(1, dim_in, dim_out, 1.0),
            LinearTerm::scalar_times(6, -identity(dim_in)),
        ],
        &CMatrix::zeros(dim_in, dim_in),
    );
    // with J' = J + ε(S1/ε − Z/ε) and tr_2 J = I this is tr_2 J' = I, written
    // without the ε factor so the rows stay independent as ε shrinks
    pb.group("trace preservation of J'");
    pb.add_matrix_equality(
        &[
            LinearTerm::trace_out_second(2, dim_in, dim_out, 1.0),
            LinearTerm::trace_out_second(1, dim_in, dim_out, -1.0),
        ],
        &CMatrix::zeros(dim_in, dim_in),
    );
    pb.group("ball radius 2 mu <= eps");
    pb.add_dense_constraint(&[(6, identity(1) * c(2.0, 0.0)), (7, identity(1))], 1.0);
    let sol = solve_optimal(&pb.build(), "smoothed max-divergence")?;
    Ok((sol.primal_value.ln(), sol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{pauli_z, Channel};
    use crate::qcore::linalg::{eigh, hermitize};
    use crate::qcore::random::{ginibre, rng_from_seed};
    use crate::qcore::DensityMatrix;

    #[test]
    fn trace_norm_matches_eigenvalues() {
        let mut rng = rng_from_seed(1);
        for k in 0..20 {
            let n = 2 + k % 3;
            let g = ginibre(n, n, &mut rng);
            let h = hermitize(&(&g + g.adjoint()));
            let want: f64 = eigh(&h).values.iter().map(|x| x.abs()).sum();
            let got = trace_norm_sdp(&h).unwrap();
            assert!((got - want).abs() < 1e-7, "{got} vs {want}");
        }
    }

    #[test]
    fn diamond_identity_vs_uniform_mixing() {
        for m in 2..4 {
            let id = Channel::identity(m);
            let mix = Channel::replacer(&DensityMatrix::maximally_mixed(m), m);
            let d = diamond_norm_of_channels(&id, &mix).unwrap();
            let want = 2.0 * (1.0 - 1.0 / (m * m) as f64);
            assert!((d - want).abs() < 1e-6, "m={m}: {d}");
        }
    }

    #[test]
    fn diamond_orthogonal_unitaries() {
        let a = Channel::identity(2);
        let b = Channel::unitary(pauli_z()).unwrap();
        assert!((diamond_norm_of_channels(&a, &b).unwrap() - 2.0).abs() < 1e-6);
        assert!(diamond_norm_of_channels(&a, &a).unwrap().abs() < 1e-12);
    }
}
