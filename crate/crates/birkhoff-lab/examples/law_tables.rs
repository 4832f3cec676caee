//! Tour of the excursion-length laws: tabulates pmf, tail, and hazard
//! for the three families and shows the certified normalizer at work.
//!
//! ```text
//! cargo run --example law_tables
//! ```

use birkhoff_lab::law::{ExcursionLaw, LawSpec};

fn main() -> birkhoff_lab::Result<()> {
    // The workhorse family: p_n = c / (n ln^2 n), n >= 2.  Its tail
    // decays like c / ln s — so slowly that the law has no mean, which
    // is exactly what stretched-exponential normalization needs.
    let heavy = ExcursionLaw::new(LawSpec::log_squared())?;
    println!(
        "log-squared law: c = {:.12} (certified within {:.2e})",
        heavy.c(),
        heavy.c_bound()
    );
    println!("{:>8} {:>12} {:>12} {:>12}", "n", "pmf", "tail", "hazard");
    for n in [2u64, 3, 10, 100, 1_000, 10_000, 100_000] {
        println!(
            "{n:>8} {:>12.6e} {:>12.6e} {:>12.6e}",
            heavy.pmf(n),
            heavy.tail(n),
            heavy.hazard(n)
        );
    }
    println!(
        "tail decay check: tail(s) * ln(s) / c -> 1: {:.4} at 10^3, {:.4} at 10^5",
        heavy.tail(1_000) * (1_000f64).ln() / heavy.c(),
        heavy.tail(100_000) * (100_000f64).ln() / heavy.c(),
    );

    // Restricting the same shape to even lengths renormalizes the
    // constant; this is the chain behind the parity construction.
    let even = ExcursionLaw::new(LawSpec::log_squared_even_only())?;
    println!("\neven-only law: pmf(2) = {:.6}, pmf(3) = {} (odd lengths excluded)",
        even.pmf(2),
        even.pmf(3)
    );

    // A power law with gamma > 2 has finite mean: returns are frequent
    // and the stretched normalization overshoots (the degenerate case).
    let light = ExcursionLaw::new(LawSpec::power_law(2.0))?;
    println!(
        "power law gamma = 2: c = {:.12}, tail(10^4) = {:.3e} (vs {:.3e} heavy)",
        light.c(),
        light.tail(10_000),
        heavy.tail(10_000)
    );

    // gamma <= 1 makes the series diverge; the constructor refuses it.
    match ExcursionLaw::new(LawSpec::power_law(1.0)) {
        Err(e) => println!("gamma = 1 is rejected: {e}"),
        Ok(_) => unreachable!("diverging series must not normalize"),
    }
    Ok(())
}
