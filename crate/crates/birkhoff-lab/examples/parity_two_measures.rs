//! One chain, two starting states, two different limits: over an
//! even-only length law the observable g(k) = e^(k^alpha) / 2^(k odd)
//! distinguishes the marked state from its neighbor forever.
//!
//! ```text
//! cargo run --release --example parity_two_measures
//! ```

use birkhoff_lab::growth::two_point_fit;
use birkhoff_lab::simulate::{self, ScenarioConfig, StartState};

fn main() -> birkhoff_lab::Result<()> {
    let n = 1_000_000; // even horizon: parity of the height is pinned
    let samples = 10_000;

    // Start at the marked state: every excursion has even length, so at
    // an even time the height is even and g(h) carries no halving.
    let p_run = simulate::run(&ScenarioConfig::parity(0.5, n, samples, 5))?;
    // Start one step away: the same even-length excursions now leave
    // the height odd at even times, and g(h) is halved every time.
    let q_run =
        simulate::run(&ScenarioConfig::parity(0.5, n, samples, 5).with_start(StartState::Q1))?;

    let fit_p = two_point_fit(&p_run.ratio_values(), 0.5)?;
    let fit_q = two_point_fit(&q_run.ratio_values(), 0.25)?;
    let loc_p = fit_p.loc_high.expect("P cluster populated");
    let loc_q = fit_q.loc_high.expect("Q cluster populated");

    println!("n = {n}, alpha = 0.5, {samples} samples per start\n");
    println!("start at marked state:   upper cluster at {loc_p:.4} (mass {:.4})", fit_p.mass_high);
    println!("start one step away:     upper cluster at {loc_q:.4} (mass {:.4})", fit_q.mass_high);
    println!("separation factor:       {:.4}", loc_p / loc_q);

    println!("\nBoth runs use the same normalization e^(n^alpha), yet one settles");
    println!("near 1 and the other near 1/2: the starting measure follows the");
    println!("orbit into the limit. For probability-preserving systems a classic");
    println!("theorem forbids this — distributional limits of normalized Birkhoff");
    println!("sums cannot see the (absolutely continuous) starting measure. The");
    println!("conservative, infinite-measure world genuinely differs: here the");
    println!("parity of the height is a conserved bit that the observable reads.");
    Ok(())
}
