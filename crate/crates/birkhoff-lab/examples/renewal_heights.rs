//! The exact renewal machinery: return masses u_s, height
//! distributions, and the algebraic identities that certify them.
//!
//! ```text
//! cargo run --example renewal_heights
//! ```

use std::sync::Arc;

use birkhoff_lab::law::{ExcursionLaw, LawSpec};
use birkhoff_lab::renewal::{composition_oracle, RenewalTable};

fn main() -> birkhoff_lab::Result<()> {
    let law = Arc::new(ExcursionLaw::new(LawSpec::log_squared())?);
    let table = RenewalTable::build(law, 5_000)?;

    // u_s = P(some partial sum of excursion lengths hits exactly s).
    println!("{:>6} {:>14}", "s", "u_s");
    for s in [0u64, 1, 2, 3, 10, 100, 1_000, 5_000] {
        println!("{s:>6} {:>14.8e}", table.u(s)?);
    }

    // Identity 1: completeness.  Partitioning time n by the moment of
    // the last return gives sum_k tail(k) u_{n-k} = 1 exactly.
    println!(
        "\nmax completeness defect over n <= 5000: {:.3e}",
        table.max_completeness_defect()
    );

    // Identity 2: brute force.  For small s the renewal recursion can
    // be checked against literally every composition of s into
    // excursion lengths >= 2.
    let mut worst = 0.0f64;
    for s in 0..=25u64 {
        worst = worst.max((composition_oracle(table.law(), s) - table.u(s)?).abs());
    }
    println!("max |recursion - enumeration| over s <= 25: {worst:.3e}");

    // The height distribution P(h_n = k) = tail(k) u_{n-k}: bulk at
    // small heights, a slowly-decaying tail reaching all the way to n
    // (the chain may simply never have returned).
    let n = 5_000;
    let dist = table.height_distribution(n)?;
    println!("\nheight law at n = {n}: total mass {:.12}", dist.total());
    println!("{:>10} {:>14}", "k", "P(h_n = k)");
    for k in [0u64, 1, 10, 100, 1_000, 2_500, 5_000] {
        println!("{k:>10} {:>14.6e}", dist.prob(k));
    }
    println!(
        "P(h_n = n) = tail(n) = {:.6e} — the no-return atom",
        table.law().tail(n)
    );

    // The window mass P(h_n > n - n^beta) tends to beta: heights
    // concentrate logarithmically near the extremes.
    println!("\n{:>8} {:>12} {:>12}", "n", "beta=0.3", "beta=0.5");
    for n in [500u64, 1_000, 5_000] {
        println!(
            "{n:>8} {:>12.4} {:>12.4}",
            table.window_mass(n, 0.3)?,
            table.window_mass(n, 0.5)?
        );
    }
    println!("(the drift toward beta is logarithmic — run the CLI at nmax 10^5 to see it close in)");
    Ok(())
}
