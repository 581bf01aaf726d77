//! Exact conditional survival of the lower clearing price and its
//! power-law asymptote for Pareto placements.
//!
//! cargo run --example exact_survival

use auction_tails::analytic::{
    asymptote_conditional_delta, survival_lower_delta, survival_lower_delta_tails,
};
use auction_tails::placement::PlacementModel;

fn main() -> auction_tails::Result<()> {
    println!("P(X_lower > M) with N_A = N_B = 2, F_A(M) = F_B(M) = 0.5:");
    for delta in -1..=1 {
        println!(
            "  delta {delta:+}: {:.4}",
            survival_lower_delta(0.5, 0.5, 2, 2, delta)?
        );
    }

    let sell = PlacementModel::pareto(1.0, 1.0)?;
    let buy = PlacementModel::pareto(2.0, 1.0)?;
    let (n_a, n_b) = (3, 4);
    println!("\nN_A = {n_a}, N_B = {n_b}, a_A = 1, a_B = 2");
    println!(
        "{:>8} {:>6} {:>12} {:>12} {:>8}",
        "M", "delta", "exact", "asymptote", "ratio"
    );
    for delta in [-2, 0, 2] {
        for m in [10.0, 100.0, 1e3, 1e4] {
            let exact =
                survival_lower_delta_tails(sell.survival(m), buy.survival(m), n_a, n_b, delta)?;
            let approx = asymptote_conditional_delta(m, &sell, &buy, n_a, n_b, delta)?;
            println!(
                "{m:>8} {delta:>6} {exact:>12.4e} {approx:>12.4e} {:>8.4}",
                exact / approx
            );
        }
    }
    Ok(())
}
