//! The four channel divergences from the absolutely thermal channel, and the
//! mirror ascent checked against a brute-force sweep over inputs.

use athermal::channels::amplitude_damping;
use athermal::divergences::{
    channel_ht_rel_entropy, channel_max_rel_entropy_log, channel_rel_entropy_bruteforce, channel_rel_entropy_log,
    smoothed_channel_max_rel_entropy_log, AscentOptions, HtBudget, OracleMode,
};
use athermal::qcore::{Hermitian, ThermalContext};

fn main() -> athermal::Result<()> {
    let ctx = ThermalContext::new(Hermitian::from_real_diagonal(&[0.0, 0.8]), 1.0)?;
    let n = amplitude_damping(0.4)?;
    let log_gamma = ctx.log_gamma();

    let rel = channel_rel_entropy_log(&n, &log_gamma, &AscentOptions::default())?;
    let grid = channel_rel_entropy_bruteforce(
        &n,
        &ctx.gamma().as_hermitian(),
        OracleMode::Grid {
            density: 9,
            polish: true,
        },
    )?;
    let max = channel_max_rel_entropy_log(&n, &log_gamma)?;
    println!(
        "D       {:.10} ({}), grid sweep {:.10}",
        rel.value,
        rel.certificate.as_str(),
        grid.value
    );
    println!("D_max   {:.10} ({})", max.value, max.certificate.as_str());
    for eps in [0.01, 0.1, 0.3] {
        let ht = channel_ht_rel_entropy(&n, &log_gamma, eps, &HtBudget::default())?;
        let sm = smoothed_channel_max_rel_entropy_log(&n, &log_gamma, eps)?;
        println!("eps {eps:<4}  D_H {:.6}  smoothed D_max {:.6}", ht.value, sm.value);
    }
    Ok(())
}
