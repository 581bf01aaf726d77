//! Log-log CCDF fits and the Hill estimator on Pareto samples.
//!
//! cargo run --release --example fit_tails

use auction_tails::estimation::{hill_estimate, loglog_fit, EmpiricalTail, FitWindow};
use auction_tails::placement::PlacementModel;
use auction_tails::simulate::sample_placement;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> auction_tails::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for a in [1.0, 2.0, 3.0] {
        let xs = sample_placement(&PlacementModel::pareto(a, 1.0)?, 100_000, &mut rng);
        let tail = EmpiricalTail::right(&xs)?;
        let quantiles = loglog_fit(
            &tail,
            FitWindow::Quantiles {
                start: 0.05,
                stop: 0.001,
            },
            false,
        )?;
        let binned = loglog_fit(
            &tail,
            FitWindow::Quantiles {
                start: 0.05,
                stop: 0.001,
            },
            true,
        )?;
        println!(
            "a = {a}: quantile window {:.3} on [{:.2}, {:.2}] ({} points, R² {:.4}), binned {:.3}, Hill {:.3}",
            quantiles.exponent,
            quantiles.x_lo,
            quantiles.x_hi,
            quantiles.points,
            quantiles.r_squared,
            binned.exponent,
            hill_estimate(&tail, 5_000)?
        );
    }

    // a two-sided sample: the left tail is fitted on the negated values
    let model = PlacementModel::two_sided(
        PlacementModel::pareto(1.5, 1.0)?,
        PlacementModel::pareto(3.0, 1.0)?,
        0.5,
    )?;
    let xs = sample_placement(&model, 200_000, &mut rng);
    for tail in [EmpiricalTail::right(&xs)?, EmpiricalTail::left(&xs)?] {
        let fit = loglog_fit(
            &tail,
            FitWindow::Quantiles {
                start: 0.05,
                stop: 0.001,
            },
            false,
        )?;
        println!("{:?} tail: {:.3}", tail.side(), fit.exponent);
    }
    Ok(())
}
