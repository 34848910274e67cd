//! Work capacity of converting channels into each other, and the restricted
//! conversion distance over pre/post sandwiches.

use athermal::channels::{amplitude_damping, Channel};
use athermal::qcore::{Hermitian, ThermalContext};
use athermal::resource::conversion_distance_restricted;
use athermal::thermo::work_capacity;

fn main() -> athermal::Result<()> {
    let ctx = ThermalContext::new(Hermitian::from_real_diagonal(&[0.0, 1.0]), 1.0)?;
    let id = Channel::identity(2);
    let damp = amplitude_damping(0.5)?;
    let t = Channel::absolutely_thermal(&ctx, 2);

    for (name, from, to) in [
        ("id -> damp", &id, &damp),
        ("damp -> T", &damp, &t),
        ("T -> id", &t, &id),
    ] {
        let w = work_capacity(from, to, &ctx)?;
        let d = conversion_distance_restricted(from, to, &ctx, 20, 3)?;
        println!(
            "{name:<11} dW {:>10.6}  divergence form {:>10.6}  conversion distance <= {:.4} ({} sandwiches)",
            w.delta_w, w.divergence_difference, d.value, d.candidates
        );
    }
    Ok(())
}
