//! Runs the quick audit suites and prints one line per property.

use athermal::audit::{run_suite, Suite};

fn main() -> athermal::Result<()> {
    let seed = std::env::var("ATHERMAL_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(1);
    for suite in [Suite::Weyl, Suite::Golden, Suite::Diamond, Suite::Table1, Suite::Oracle] {
        let report = run_suite(suite, seed, None)?;
        for c in &report.checks {
            let verdict = if c.passed { "pass" } else { "FAIL" };
            println!(
                "{suite:<8} {:<34} {verdict} residual {:.2e} <= {:.0e}",
                c.name, c.residual, c.tolerance
            );
        }
    }
    Ok(())
}
