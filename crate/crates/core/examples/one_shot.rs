//! One-shot distillation and cost of the qubit identity channel in golden
//! units, and the per-copy trend for one and two copies.

use athermal::channels::Channel;
use athermal::qcore::ThermalContext;
use athermal::thermo::{asymptotic_rate_estimate, one_shot_cost, one_shot_distill};

fn main() -> athermal::Result<()> {
    let ctx = ThermalContext::degenerate(2, 1.0)?;
    let id = Channel::identity(2);
    for eps in [0.01, 0.05, 0.2] {
        let d = one_shot_distill(&id, &ctx, eps)?;
        let c = one_shot_cost(&id, &ctx, eps)?;
        println!(
            "eps {eps:<5} distill {} units (D_H {:.6})  cost {} units (D_max {:.6})",
            d.units, d.raw_divergence, c.units, c.raw_divergence
        );
    }
    let est = asymptotic_rate_estimate(&id, &ctx, 0.05, 2)?;
    println!("target D = {:.6}", est.target);
    for p in &est.points {
        println!(
            "k = {}  ht rate {:.6}  smoothed max rate {:.6}",
            p.copies,
            p.ht_rate(),
            p.smoothed_max_rate()
        );
    }
    Ok(())
}
