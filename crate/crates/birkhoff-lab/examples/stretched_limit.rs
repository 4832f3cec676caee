//! The main event: Birkhoff sums of e^{k^alpha} over the heavy-tailed
//! chain, normalized by e^{n^alpha}, converge to a two-point law — and
//! the last excursion alone decides which point.
//!
//! ```text
//! cargo run --release --example stretched_limit
//! ```

use std::sync::Arc;

use birkhoff_lab::growth::two_point_fit;
use birkhoff_lab::law::{ExcursionLaw, LawSpec};
use birkhoff_lab::renewal::RenewalTable;
use birkhoff_lab::simulate::{self, ScenarioConfig};

fn main() -> birkhoff_lab::Result<()> {
    let alpha = 0.5;
    let samples = 20_000;

    // The exact dominant-term oracle: P(e^{h^alpha - n^alpha} > 1/2)
    // computed from the height law via a window sum that only needs the
    // last ~1400 return masses even at n = 10^6.
    let law = Arc::new(ExcursionLaw::new(LawSpec::log_squared())?);
    let table = RenewalTable::build(law, 4_096)?;

    println!("ratio = S_n f / e^(n^alpha), alpha = {alpha}, {samples} samples per horizon\n");
    println!(
        "{:>9} {:>13} {:>13} {:>10} {:>10}",
        "n", "P(r > 1/2)", "exact dom.", "mass_low", "loc_high"
    );
    for n in [10_000u64, 100_000, 1_000_000] {
        let run = simulate::run(&ScenarioConfig::stretched(alpha, n, samples, 1))?;
        let values = run.ratio_values();
        let frac = values.iter().filter(|&&v| v > 0.5).count() as f64 / values.len() as f64;
        let exact = table.dominant_exceedance(n, alpha, 0.5)?;
        let fit = two_point_fit(&values, 0.5)?;
        println!(
            "{n:>9} {frac:>13.4} {exact:>13.4} {:>10.4} {:>10.4}",
            fit.mass_low,
            fit.loc_high.unwrap_or(f64::NAN)
        );
    }

    println!(
        "\nThe limit pair is (mass_low, loc_high) -> (alpha, 1) = ({alpha}, 1):"
    );
    println!("half the mass collapses to 0, half clusters at 1, and the cluster");
    println!("tightens only logarithmically in n — visible above as the slow");
    println!("march of loc_high toward 1 while the simulated exceedance already");
    println!("tracks the exact dominant-term law to Monte Carlo accuracy.");
    println!("\nWhy the dominant term rules: a single excursion of length l");
    println!("contributes ~e^(l^alpha), so the running maximum of l beats the");
    println!("sum of everything else once tails are this heavy; conditioned on");
    println!("h_n = k the whole sum is e^(k^alpha - n^alpha) (1 + o(1)).");
    Ok(())
}
