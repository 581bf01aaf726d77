//! Clears a small book with and without its market orders.
//!
//! cargo run --example clearing

use auction_tails::auction::{
    alternative_closing_price, build_curves, clear, LimitOrder, OrderBookSnapshot,
};

fn main() -> auction_tails::Result<()> {
    // prices in ticks around a reference of 100
    let sells = vec![
        LimitOrder::sell(98.0),
        LimitOrder::sell(100.0),
        LimitOrder::sell(101.0),
        LimitOrder::sell(104.0),
    ];
    let buys = vec![
        LimitOrder::buy(99.0),
        LimitOrder::buy(102.0),
        LimitOrder::buy(97.0),
    ];
    let book = OrderBookSnapshot::new(sells, buys)?
        .with_market_orders(0, 2)
        .with_reference(100.0)?
        .with_tick_size(Some(1.0))?;

    let (supply, demand) = build_curves(&book);
    println!("  x   D_A  D_B");
    for x in 96..=105 {
        let x = x as f64;
        println!("{x:4} {:4} {:4}", supply.eval(x), demand.eval(x));
    }

    let out = clear(&book)?;
    println!(
        "imbalance {} -> interval [{}, {}), close {}, volume {}, unmatched {}",
        book.imbalance(),
        out.interval.lower,
        out.interval.upper,
        out.closing_price,
        out.executed_volume,
        out.remaining_imbalance
    );
    println!(
        "without market orders: close {}",
        alternative_closing_price(&book)?
    );
    Ok(())
}
