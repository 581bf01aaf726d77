//! Per-auction aggregation: reference price, tick offsets and clearing with
//! and without market orders.

use std::collections::BTreeMap;

use chrono::{Duration, NaiveDate, NaiveTime};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::records::{Decimal, OrderType, RawOrderRecord, TradeRecord};
use crate::auction::{alternative_closing_price, clear, LimitOrder, OrderBookSnapshot, Side};
use crate::error::{Error, Result};

/// Volume-weighted average price of the trades with `start < time <= end`.
pub fn vwap_reference(trades: &[TradeRecord], start: NaiveTime, end: NaiveTime) -> Result<f64> {
    let (value, volume) = trades
        .iter()
        .filter(|t| t.time > start && t.time <= end)
        .fold((0.0, 0u64), |(v, s), t| {
            (v + t.price.to_f64() * t.size as f64, s + t.size)
        });
    if volume == 0 {
        return Err(Error::NoTradesInWindow);
    }
    Ok(value / volume as f64)
}

/// `(price - reference) / tick` rounded half away from zero.
pub fn to_ticks(price: f64, reference: f64, tick_size: f64) -> i64 {
    ((price - reference) / tick_size).round() as i64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceRule {
    /// Length of the VWAP window in minutes.
    pub window_minutes: i64,
    /// End of continuous trading. When absent the window ends at the last
    /// trade of the day.
    pub close_time: Option<NaiveTime>,
}

impl Default for ReferenceRule {
    fn default() -> Self {
        Self {
            window_minutes: 5,
            close_time: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceSource {
    Vwap,
    LastTrade,
    Missing,
}

/// The reference price with its fallback: VWAP, then the last trade.
pub fn reference_price(
    trades: &[TradeRecord],
    rule: ReferenceRule,
) -> (Option<f64>, ReferenceSource) {
    let Some(last) = trades.iter().max_by_key(|t| t.time) else {
        return (None, ReferenceSource::Missing);
    };
    let end = rule.close_time.unwrap_or(last.time);
    let start = end - Duration::minutes(rule.window_minutes);
    match vwap_reference(trades, start, end) {
        Ok(p) => (Some(p), ReferenceSource::Vwap),
        Err(_) => {
            log::warn!(
                "{} {}: no trades in the reference window, using the last trade",
                last.stock,
                last.date
            );
            (Some(last.price.to_f64()), ReferenceSource::LastTrade)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuctionAggregate {
    pub stock: String,
    pub date: NaiveDate,
    pub reference_price: Option<f64>,
    pub reference_source: ReferenceSource,
    pub tick_size: f64,
    /// Limit sell shares `N_A`.
    pub sell_volume: u64,
    /// Limit buy shares `N_B`.
    pub buy_volume: u64,
    pub market_sell_volume: u64,
    pub market_buy_volume: u64,
    /// `M_B - M_A`.
    pub imbalance: i64,
    pub closing_price: Option<f64>,
    pub closing_return: Option<f64>,
    pub alternative_closing_price: Option<f64>,
    pub alternative_return: Option<f64>,
    pub executed_volume: Option<u64>,
    pub remaining_imbalance: Option<i64>,
    /// Why some fields are missing, if they are.
    pub flag: Option<String>,
    /// Limit prices in ticks from the reference, one per order.
    pub sell_offsets: Vec<i64>,
    pub buy_offsets: Vec<i64>,
}

impl AuctionAggregate {
    /// `N_A - N_B`.
    pub fn limit_imbalance(&self) -> i64 {
        self.sell_volume as i64 - self.buy_volume as i64
    }
}

/// Aggregates the orders and trades of one `(stock, date)`.
///
/// The book is cleared on absolute integer ticks so that step boundaries are
/// exact; the reference enters the closing rule on the same axis.
pub fn aggregate_auction(
    orders: &[RawOrderRecord],
    trades: &[TradeRecord],
    tick_size: Decimal,
    rule: ReferenceRule,
) -> Result<AuctionAggregate> {
    let first = orders
        .first()
        .ok_or_else(|| Error::InsufficientData("auction without orders".into()))?;
    if !tick_size.is_positive() {
        return Err(Error::domain("tick size must be positive"));
    }
    let (stock, date) = (first.stock.clone(), first.date);
    if orders.iter().any(|o| o.stock != stock || o.date != date) {
        return Err(Error::InsufficientData(format!(
            "orders for {stock} {date} mix several auctions"
        )));
    }
    let tick = tick_size.to_f64();

    let mut sells = Vec::new();
    let mut buys = Vec::new();
    let (mut m_a, mut m_b) = (0u64, 0u64);
    for o in orders {
        match (o.order_type, o.side, o.price) {
            (OrderType::Limit, side, Some(p)) => {
                let order = LimitOrder::new(side, p.div_round(tick_size)? as f64, o.size)?;
                match side {
                    Side::Sell => sells.push(order),
                    Side::Buy => buys.push(order),
                }
            }
            (OrderType::Market, Side::Sell, _) => m_a += o.size,
            (OrderType::Market, Side::Buy, _) => m_b += o.size,
            (OrderType::Limit, _, None) => {
                return Err(Error::InvalidOrder("limit order without a price".into()))
            }
        }
    }

    let (reference, reference_source) = reference_price(trades, rule);
    let mut agg = AuctionAggregate {
        stock,
        date,
        reference_price: reference,
        reference_source,
        tick_size: tick,
        sell_volume: sells.iter().map(|o| o.size).sum(),
        buy_volume: buys.iter().map(|o| o.size).sum(),
        market_sell_volume: m_a,
        market_buy_volume: m_b,
        imbalance: m_b as i64 - m_a as i64,
        closing_price: None,
        closing_return: None,
        alternative_closing_price: None,
        alternative_return: None,
        executed_volume: None,
        remaining_imbalance: None,
        flag: None,
        sell_offsets: Vec::new(),
        buy_offsets: Vec::new(),
    };
    let Some(x0) = reference else {
        agg.flag = Some("no_reference".into());
        return Ok(agg);
    };
    let offsets = |v: &[LimitOrder]| -> Vec<i64> {
        v.iter()
            .map(|o| to_ticks(o.price * tick, x0, tick))
            .collect()
    };
    agg.sell_offsets = offsets(&sells);
    agg.buy_offsets = offsets(&buys);

    let book = OrderBookSnapshot::new(sells, buys)?
        .with_market_orders(m_a, m_b)
        .with_reference(x0 / tick)?
        .with_tick_size(Some(1.0))?;
    let mut flags = Vec::new();
    match clear(&book) {
        Ok(outcome) => {
            let c = outcome.closing_price * tick;
            agg.closing_price = Some(c);
            agg.closing_return = Some(c.ln() - x0.ln());
            agg.executed_volume = Some(outcome.executed_volume);
            agg.remaining_imbalance = Some(outcome.remaining_imbalance);
        }
        Err(Error::FailedAuction(_)) => flags.push("failed_auction"),
        Err(e) => return Err(e),
    }
    match alternative_closing_price(&book) {
        Ok(p) => {
            let c = p * tick;
            agg.alternative_closing_price = Some(c);
            agg.alternative_return = Some(c.ln() - x0.ln());
        }
        Err(Error::FailedAuction(_)) => flags.push("failed_alternative"),
        Err(e) => return Err(e),
    }
    for r in [agg.closing_return, agg.alternative_return]
        .into_iter()
        .flatten()
    {
        if !r.is_finite() {
            flags.push("non_finite_return");
        }
    }
    if !flags.is_empty() {
        agg.flag = Some(flags.join(";"));
    }
    Ok(agg)
}

/// Aggregates every `(stock, date)` present in the orders, in key order.
/// `tick_for` supplies each stock's tick size.
pub fn aggregate_all<F>(
    orders: &[RawOrderRecord],
    trades: &[TradeRecord],
    tick_for: F,
    rule: ReferenceRule,
) -> Result<Vec<AuctionAggregate>>
where
    F: Fn(&str) -> Result<Decimal> + Sync,
{
    if orders.is_empty() {
        return Err(Error::InsufficientData("no orders".into()));
    }
    let mut by_key: BTreeMap<(&str, NaiveDate), Vec<RawOrderRecord>> = BTreeMap::new();
    for o in orders {
        by_key
            .entry((&o.stock, o.date))
            .or_default()
            .push(o.clone());
    }
    let mut trades_by_key: BTreeMap<(&str, NaiveDate), Vec<TradeRecord>> = BTreeMap::new();
    for t in trades {
        trades_by_key
            .entry((&t.stock, t.date))
            .or_default()
            .push(t.clone());
    }
    let keys: Vec<_> = by_key.keys().copied().collect();
    keys.par_iter()
        .map(|key| {
            let tick = tick_for(key.0)?;
            let day_trades = trades_by_key.get(key).map(Vec::as_slice).unwrap_or(&[]);
            aggregate_auction(&by_key[key], day_trades, tick, rule)
        })
        .collect()
}
