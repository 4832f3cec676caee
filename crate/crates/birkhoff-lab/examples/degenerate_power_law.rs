//! What goes wrong with integrable return times: the same observable
//! and the same normalization, but excursion lengths with a finite
//! mean — the ratio collapses to zero instead of a nondegenerate law.
//!
//! ```text
//! cargo run --example degenerate_power_law
//! ```

use birkhoff_lab::simulate::{self, ScenarioConfig};

fn main() -> birkhoff_lab::Result<()> {
    let n = 100_000;
    let run = simulate::run(&ScenarioConfig::degenerate(2.0, 0.5, n, 5_000, 2))?;

    let mut values = run.ratio_values();
    values.sort_by(f64::total_cmp);
    let q = |p: f64| values[((values.len() - 1) as f64 * p) as usize];
    println!("power-law lengths (gamma = 2), alpha = 0.5, n = {n}:");
    println!(
        "ratio quantiles: 50% = {:.3e}, 90% = {:.3e}, 99% = {:.3e}, max = {:.3e}",
        q(0.5),
        q(0.9),
        q(0.99),
        values[values.len() - 1]
    );

    // The height still spreads over all of [0, n] — heavy enough for
    // excursions of every scale — but its bulk sits near 0 because
    // returns now happen on a finite timescale.
    let mut quarters = [0usize; 4];
    for r in &run.records {
        quarters[((r.height as f64 / n as f64 * 4.0) as usize).min(3)] += 1;
    }
    println!(
        "h/n quarter occupancy: {:.1}% / {:.1}% / {:.1}% / {:.1}%",
        100.0 * quarters[0] as f64 / run.records.len() as f64,
        100.0 * quarters[1] as f64 / run.records.len() as f64,
        100.0 * quarters[2] as f64 / run.records.len() as f64,
        100.0 * quarters[3] as f64 / run.records.len() as f64,
    );

    println!("\nWith a finite mean return time the chain visits the marked state");
    println!("on schedule, the longest excursion grows only polynomially, and");
    println!("e^(n^alpha) outruns every term: the normalized sum is driven to 0.");
    println!("A nondegenerate limit at this normalization needs tails so heavy");
    println!("that the mean diverges — the log-squared family, not this one.");
    Ok(())
}
