//! Synthetic order, trade and metadata files drawn from the model with
//! planted placement exponents and imbalance constant.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use chrono::{Datelike, Duration, NaiveDate, NaiveTime, Weekday};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::records::Decimal;
use crate::error::{Error, Result};
use crate::placement::PlacementModel;
use crate::simulate::auction_rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticStock {
    pub id: String,
    pub exchange: String,
    pub mcap_eur_bn: f64,
    pub tick_size: String,
    /// Typical reference price in ticks.
    pub base_ticks: i64,
    pub a_sell_left: f64,
    pub a_sell_right: f64,
    pub a_buy_left: f64,
    pub a_buy_right: f64,
    pub c: f64,
    /// Probability that a sell is placed above the reference.
    pub sell_above: f64,
    /// Probability that a buy is placed above the reference.
    pub buy_above: f64,
    /// Pareto scale of every placement arm, in ticks.
    pub scale_ticks: f64,
}

impl SyntheticStock {
    fn placement(&self, left: f64, right: f64, above: f64) -> Result<PlacementModel> {
        PlacementModel::two_sided(
            PlacementModel::pareto(left, self.scale_ticks)?,
            PlacementModel::pareto(right, self.scale_ticks)?,
            above,
        )
    }

    pub fn sell_placement(&self) -> Result<PlacementModel> {
        self.placement(self.a_sell_left, self.a_sell_right, self.sell_above)
    }

    pub fn buy_placement(&self) -> Result<PlacementModel> {
        self.placement(self.a_buy_left, self.a_buy_right, self.buy_above)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticFixture {
    pub seed: u64,
    pub start_date: NaiveDate,
    pub days: u32,
    pub min_orders: u32,
    pub max_orders: u32,
    pub max_order_size: u64,
    /// Standard deviation, in shares, of the noise added to `c (N_A - N_B)`.
    pub imbalance_noise: f64,
    pub stocks: Vec<SyntheticStock>,
}

impl Default for SyntheticFixture {
    fn default() -> Self {
        let stock = |id: &str, exch: &str, mcap, base, a: [f64; 4], c| SyntheticStock {
            id: id.into(),
            exchange: exch.into(),
            mcap_eur_bn: mcap,
            tick_size: "0.01".into(),
            base_ticks: base,
            a_sell_left: a[0],
            a_sell_right: a[1],
            a_buy_left: a[2],
            a_buy_right: a[3],
            c,
            sell_above: 0.6,
            buy_above: 0.4,
            scale_ticks: 50.0,
        };
        Self {
            seed: 20200102,
            start_date: NaiveDate::from_ymd_opt(2019, 1, 2).expect("valid date"),
            days: 1000,
            min_orders: 1,
            max_orders: 200,
            max_order_size: 10,
            imbalance_noise: 3.0,
            stocks: vec![
                stock("SYNA", "AMS", 3.1, 4_000, [2.5, 1.07, 1.17, 2.37], 0.33),
                stock("SYNB", "PAR", 4.8, 9_000, [2.8, 1.3, 0.9, 2.9], 0.2),
                stock("SYNC", "BRU", 12.5, 6_500, [2.2, 1.5, 1.4, 2.6], 0.25),
                stock("SYND", "PAR", 40.0, 15_000, [3.0, 0.9, 1.1, 3.2], 0.15),
            ],
        }
    }
}

fn business_days(start: NaiveDate, n: u32) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(n as usize);
    let mut d = start;
    while out.len() < n as usize {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d += Duration::days(1);
    }
    out
}

fn round_half_away(x: f64) -> i64 {
    x.round() as i64
}

fn time_str(t: NaiveTime) -> String {
    t.format("%H:%M:%S").to_string()
}

/// Writes `orders.csv`, `trades.csv` and `metadata.csv` into `dir`.
pub fn write_fixture(fixture: &SyntheticFixture, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let (orders, trades, metadata) = render_fixture(fixture)?;
    for (name, text) in [
        ("orders.csv", orders),
        ("trades.csv", trades),
        ("metadata.csv", metadata),
    ] {
        let path = dir.join(name);
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

/// The three files as strings.
pub fn render_fixture(fixture: &SyntheticFixture) -> Result<(String, String, String)> {
    if fixture.min_orders == 0
        || fixture.min_orders > fixture.max_orders
        || fixture.max_order_size == 0
    {
        return Err(Error::Config("order count or size range is empty".into()));
    }
    let noise = Normal::new(0.0, fixture.imbalance_noise)
        .map_err(|e| Error::Config(format!("imbalance noise: {e}")))?;
    let days = business_days(fixture.start_date, fixture.days);
    let close = NaiveTime::from_hms_opt(17, 30, 0).expect("valid time");

    let mut orders = String::from("stock,date,time,type,side,price,size\n");
    let mut trades = String::from("stock,date,time,price,size\n");
    let mut metadata = String::from("stock,exchange,mcap_eur_bn,tick_size\n");

    for (s, stock) in fixture.stocks.iter().enumerate() {
        let tick: Decimal = stock
            .tick_size
            .parse()
            .map_err(|e| Error::Config(format!("tick size of {}: {e}", stock.id)))?;
        let price = |ticks: i64| Decimal::new(ticks as i128 * tick.units(), tick.scale());
        let sell_model = stock.sell_placement()?;
        let buy_model = stock.buy_placement()?;
        writeln!(
            metadata,
            "{},{},{},{}",
            stock.id, stock.exchange, stock.mcap_eur_bn, tick
        )
        .unwrap();

        for (d, date) in days.iter().enumerate() {
            let mut rng = auction_rng(fixture.seed, ((s as u64) << 32) | d as u64);
            let x0 = stock.base_ticks + rng.gen_range(-50..=50);

            // two early trades outside the reference window, then the window
            for k in 0..2 {
                let t =
                    NaiveTime::from_hms_opt(15 + k, rng.gen_range(0..60), 0).expect("valid time");
                let p = x0 + rng.gen_range(-30..=30);
                writeln!(
                    trades,
                    "{},{date},{},{},{}",
                    stock.id,
                    time_str(t),
                    price(p),
                    rng.gen_range(1..=500)
                )
                .unwrap();
            }
            for k in 0..6 {
                let t = close - Duration::seconds(280 - 50 * k);
                let p = x0 + rng.gen_range(-2..=2);
                writeln!(
                    trades,
                    "{},{date},{},{},{}",
                    stock.id,
                    time_str(t),
                    price(p),
                    rng.gen_range(1..=500)
                )
                .unwrap();
            }

            let mut volumes = [0u64; 2];
            for (side, model, vol) in [("sell", &sell_model, 0), ("buy", &buy_model, 1)] {
                let n = rng.gen_range(fixture.min_orders..=fixture.max_orders);
                for _ in 0..n {
                    // prices must stay positive; resample the rare deep draws
                    let ticks = loop {
                        let t = x0 + round_half_away(model.quantile(rng.gen::<f64>()));
                        if t >= 1 {
                            break t;
                        }
                    };
                    let size = rng.gen_range(1..=fixture.max_order_size);
                    volumes[vol] += size;
                    let t = close + Duration::seconds(rng.gen_range(0..300));
                    writeln!(
                        orders,
                        "{},{date},{},limit,{side},{},{size}",
                        stock.id,
                        time_str(t),
                        price(ticks)
                    )
                    .unwrap();
                }
            }

            let limit_imbalance = volumes[0] as f64 - volumes[1] as f64;
            let delta = round_half_away(stock.c * limit_imbalance + noise.sample(&mut rng));
            let matched = rng.gen_range(0..=2 * fixture.max_order_size);
            let market_buy = delta.max(0) as u64 + matched;
            let market_sell = (-delta).max(0) as u64 + matched;
            for (side, size) in [("buy", market_buy), ("sell", market_sell)] {
                if size > 0 {
                    let t = close + Duration::seconds(rng.gen_range(0..300));
                    writeln!(
                        orders,
                        "{},{date},{},market,{side},,{size}",
                        stock.id,
                        time_str(t)
                    )
                    .unwrap();
                }
            }
        }
    }
    Ok((orders, trades, metadata))
}
