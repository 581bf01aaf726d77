//! Estimates the imbalance constant c from (N_A - N_B, Δ) pairs with a few
//! gross outliers mixed in.
//!
//! cargo run --example imbalance_regression

use auction_tails::estimation::estimate_c;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn main() -> auction_tails::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let noise = Normal::new(0.0, 2.0).expect("valid normal");
    let mut points: Vec<(f64, f64)> = (0..1000)
        .map(|_| {
            let limit_imbalance = rng.gen_range(-200..=200) as f64;
            (
                limit_imbalance,
                0.33 * limit_imbalance + noise.sample(&mut rng),
            )
        })
        .collect();
    for p in points.iter_mut().step_by(97) {
        p.1 = 5_000.0;
    }
    let fit = estimate_c(&points)?;
    println!(
        "c = {:.4}, intercept {:.3}, {} points used, {} removed as outliers",
        fit.c, fit.intercept, fit.used, fit.removed
    );
    Ok(())
}
