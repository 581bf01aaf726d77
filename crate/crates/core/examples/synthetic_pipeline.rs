//! Writes a synthetic order/trade/metadata fixture with planted parameters,
//! runs the full pipeline on it and compares the estimates.
//!
//! cargo run --release --example synthetic_pipeline -- /tmp/auction-demo

use std::path::PathBuf;

use auction_tails::pipeline::synthetic::{write_fixture, SyntheticFixture};
use auction_tails::pipeline::{run_to_dir, PipelineOptions};

fn main() -> auction_tails::Result<()> {
    let root = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("auction-demo"));
    let fixture = SyntheticFixture::default();
    let input = root.join("input");
    write_fixture(&fixture, &input)?;
    let summary = run_to_dir(
        &input.join("orders.csv"),
        &input.join("trades.csv"),
        &input.join("metadata.csv"),
        &root.join("output"),
        &PipelineOptions::default(),
    )?;
    println!(
        "{} auctions ({} flagged) for {} stocks, {} files in {}",
        summary.auctions,
        summary.flagged_auctions,
        summary.stocks,
        summary.files.len(),
        root.join("output").display()
    );

    let report =
        std::fs::read_to_string(root.join("output/stock_report.csv")).expect("report written");
    let mut lines = report.lines();
    lines.next();
    println!("stock  a_A(l)        a_B(l)        a_A(r)        a_B(r)        c");
    for (stock, line) in fixture.stocks.iter().zip(lines) {
        let f: Vec<&str> = line.split(',').collect();
        println!(
            "{}   {} ({:.2})  {} ({:.2})  {} ({:.2})  {} ({:.2})  {} ({:.2})",
            stock.id,
            f[3],
            stock.a_sell_left,
            f[4],
            stock.a_buy_left,
            f[5],
            stock.a_sell_right,
            f[6],
            stock.a_buy_right,
            f[7],
            stock.c
        );
    }
    Ok(())
}
