//! Free energy, extractable work, energy, entropy and Helmholtz gap of a
//! few qubit channels, with the two routes to the extractable work side by side.

use athermal::channels::{amplitude_damping, depolarizing, Channel};
use athermal::qcore::{Hermitian, ThermalContext};
use athermal::thermo::{channel_thermo_report, extractable_work_two_term};

fn main() -> athermal::Result<()> {
    let ctx = ThermalContext::new(Hermitian::from_real_diagonal(&[0.0, 1.0]), 1.5)?;
    let channels = [
        ("identity", Channel::identity(2)),
        ("amplitude damping 0.3", amplitude_damping(0.3)?),
        ("depolarizing 0.5", depolarizing(2, 0.5)?),
        ("thermal", Channel::absolutely_thermal(&ctx, 2)),
    ];
    println!(
        "{:<22} {:>10} {:>10} {:>10} {:>10} {:>10}",
        "channel", "F_T", "F", "E", "S", "two-term"
    );
    for (name, n) in &channels {
        let r = channel_thermo_report(n, &ctx)?;
        let w = extractable_work_two_term(n, &ctx, 1)?;
        println!(
            "{name:<22} {:>10.6} {:>10.6} {:>10.6} {:>10.6} {:>10.6}",
            r.thermal_free_energy, r.free_energy, r.energy, r.entropy, w.value
        );
    }
    Ok(())
}
