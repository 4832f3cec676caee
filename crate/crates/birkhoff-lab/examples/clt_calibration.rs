//! Control experiment: the same sampling, seeding, and KS machinery
//! pointed at a case with a known classical answer — i.i.d. standard
//! normals under sqrt(n) normalization.
//!
//! ```text
//! cargo run --release --example clt_calibration
//! ```

use birkhoff_lab::growth::{ks_distance, standard_normal_cdf};
use birkhoff_lab::simulate::{self, ScenarioConfig};

fn main() -> birkhoff_lab::Result<()> {
    println!("S_n = sum of n i.i.d. N(0,1), ratio = S_n / sqrt(n)\n");
    println!("{:>8} {:>9} {:>10}", "n", "samples", "KS");
    for (n, samples) in [(100u64, 20_000u64), (1_000, 100_000)] {
        let run = simulate::run(&ScenarioConfig::iid_gaussian(n, samples, 6))?;
        let ks = ks_distance(&run.ratio_values(), standard_normal_cdf)?;
        println!("{n:>8} {samples:>9} {ks:>10.4}");
    }

    println!("\nThe ratio is exactly standard normal at every n here, so the KS");
    println!("distance is pure sampling noise (~1/sqrt(samples)). This pins the");
    println!("statistical floor of the harness: when the heavy-tailed runs show");
    println!("KS distances of ~0.1, that is genuine finite-n distance to the");
    println!("limit, not an artifact of the estimator or the RNG streams.");
    Ok(())
}
