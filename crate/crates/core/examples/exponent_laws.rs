//! Predicted tail exponents with and without market orders, checked against
//! the brute-force minimization and the exact mixture survival.
//!
//! cargo run --example exponent_laws

use auction_tails::analytic::{
    exponent_bruteforce, local_loglog_slope, mixture_survival, mixture_tail_exponent,
    predict_exponents, MarketOrderMode,
};
use auction_tails::placement::PlacementModel;
use auction_tails::simulate::CountsModel;

fn main() -> auction_tails::Result<()> {
    let p = predict_exponents(1.07, 2.37, 0.329)?;
    println!(
        "a_A = 1.07, a_B = 2.37, c = 0.329: {:.2} without market orders, {:.2} with (heavier without: {})",
        p.no_mo, p.with_mo, p.heavier_without_mo
    );

    for c in [0.1, 0.25, 0.5, 0.9] {
        let closed = predict_exponents(1.0, 3.0, c)?.with_mo;
        let brute = exponent_bruteforce(1.0, 3.0, c, 40)?;
        println!("c = {c}: closed form {closed:.4}, brute force {brute:.4}");
    }

    let sell = PlacementModel::pareto(1.0, 1.0)?;
    let buy = PlacementModel::pareto(3.0, 1.0)?;
    let counts = CountsModel::lattice(9, 0.25)?;
    for mode in [MarketOrderMode::With, MarketOrderMode::Without] {
        print!(
            "{mode:?}: support exponent {}, local slopes",
            mixture_tail_exponent(1.0, 3.0, &counts, mode)
        );
        for m in [10.0, 100.0, 1e3, 1e4] {
            let s =
                local_loglog_slope(|x| mixture_survival(x, &sell, &buy, &counts, mode), m, 1.1)?;
            print!(" {s:.3}");
        }
        println!();
    }
    Ok(())
}
