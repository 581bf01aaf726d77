//! Simulates auctions from a TOML config and writes the sample with its
//! metadata sidecar.
//!
//! cargo run --release --example simulate_returns -- configs/demo.toml /tmp/returns.csv

use std::path::PathBuf;

use auction_tails::analytic::MarketOrderMode;
use auction_tails::simulate::{simulate_auctions, write_sample, SimulationConfig};

fn main() -> auction_tails::Result<()> {
    let mut args = std::env::args().skip(1);
    let config = args.next().map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/market_orders.toml")
    });
    let out = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("returns.csv"));

    let config = SimulationConfig::from_file(&config)?;
    for mode in [MarketOrderMode::With, MarketOrderMode::Without] {
        let sample = simulate_auctions(&config.with_mode(mode))?;
        let mut sorted = sample.values.clone();
        sorted.sort_by(f64::total_cmp);
        let q = |p: f64| sorted[((sorted.len() - 1) as f64 * p) as usize];
        println!(
            "{mode:?}: {} returns, {} failed, median {:.3}, 99.9% {:.1}, max {:.1}",
            sample.values.len(),
            sample.failures(),
            q(0.5),
            q(0.999),
            q(1.0)
        );
        if mode == config.mode {
            let meta = write_sample(&sample, &out)?;
            println!("wrote {} and {}", out.display(), meta.display());
        }
    }
    Ok(())
}
