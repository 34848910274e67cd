//! Free operations: random Gibbs-preserving channels, superchannel
//! sandwiches and the free energy before and after, plus golden units.

use athermal::channels::Channel;
use athermal::qcore::{Hermitian, ThermalContext};
use athermal::resource::{
    apply_superchannel, golden_unit, golden_unit_doubling_check, is_gibbs_preserving, random_gibbs_preserving_channel,
    SuperchannelSandwich,
};
use athermal::thermo::channel_free_energy;

fn main() -> athermal::Result<()> {
    let ctx = ThermalContext::new(Hermitian::from_real_diagonal(&[0.0, 0.5, 1.3]), 0.9)?;
    let g = random_gibbs_preserving_channel(&ctx, 4)?;
    let check = is_gibbs_preserving(&g, &ctx)?;
    println!("random Gibbs-preserving channel: residual {:.2e}", check.residual);

    let n = Channel::random_seeded(3, 3, 2, 8);
    let before = channel_free_energy(&n, &ctx)?;
    for seed in 0..5 {
        let theta = SuperchannelSandwich::random(&ctx, seed)?;
        let after = channel_free_energy(&apply_superchannel(&theta, &n)?, &ctx)?;
        println!(
            "F before {before:.6}  after {after:.6}  closure {:.1e}",
            theta.closure_residual(&ctx)?
        );
    }

    for m in 2..=4 {
        let unit = golden_unit(m)?;
        let doubling = golden_unit_doubling_check(m, &ThermalContext::degenerate(m, 1.0)?)?;
        println!(
            "m = {m}: D[id||R^pi] = {:.8}, twice the state value {:.8}",
            unit.divergence,
            2.0 * doubling.state_divergence
        );
    }
    Ok(())
}
