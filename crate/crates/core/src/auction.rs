//! Mechanics of a single call auction.
//!
//! Prices live on one axis, either log-returns relative to a reference
//! price or integer tick numbers stored as `f64` (exact below 2^53).
//! The supply curve counts sell volume priced at or below `x`, the demand
//! curve counts buy volume priced strictly above `x`; both are
//! right-continuous step functions. Market orders only enter through the
//! imbalance `M_B - M_A`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Buy,
    Sell,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitOrder {
    pub side: Side,
    pub price: f64,
    pub size: u64,
}

impl LimitOrder {
    pub fn new(side: Side, price: f64, size: u64) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidOrder("size must be positive".into()));
        }
        if !price.is_finite() {
            return Err(Error::InvalidOrder(format!("price {price} is not finite")));
        }
        Ok(Self { side, price, size })
    }

    /// Unit-size sell order.
    pub fn sell(price: f64) -> Self {
        Self {
            side: Side::Sell,
            price,
            size: 1,
        }
    }

    /// Unit-size buy order.
    pub fn buy(price: f64) -> Self {
        Self {
            side: Side::Buy,
            price,
            size: 1,
        }
    }
}

/// Every order submitted to one auction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderBookSnapshot {
    sell_orders: Vec<LimitOrder>,
    buy_orders: Vec<LimitOrder>,
    market_sell_volume: u64,
    market_buy_volume: u64,
    reference_price: f64,
    tick_size: Option<f64>,
}

impl OrderBookSnapshot {
    /// A book with limit orders only, reference 0 and continuous prices.
    pub fn new(sell_orders: Vec<LimitOrder>, buy_orders: Vec<LimitOrder>) -> Result<Self> {
        for o in &sell_orders {
            check_order(o, Side::Sell)?;
        }
        for o in &buy_orders {
            check_order(o, Side::Buy)?;
        }
        Ok(Self {
            sell_orders,
            buy_orders,
            market_sell_volume: 0,
            market_buy_volume: 0,
            reference_price: 0.0,
            tick_size: None,
        })
    }

    /// Unit-size orders at the given prices.
    pub fn from_prices(sells: &[f64], buys: &[f64]) -> Result<Self> {
        Self::new(
            sells.iter().map(|&p| LimitOrder::sell(p)).collect(),
            buys.iter().map(|&p| LimitOrder::buy(p)).collect(),
        )
    }

    pub fn with_market_orders(mut self, market_sell_volume: u64, market_buy_volume: u64) -> Self {
        self.market_sell_volume = market_sell_volume;
        self.market_buy_volume = market_buy_volume;
        self
    }

    /// Sets the reference used by the closing-price rule. It lives on the same
    /// axis as the order prices.
    pub fn with_reference(mut self, reference_price: f64) -> Result<Self> {
        if !reference_price.is_finite() {
            return Err(Error::domain("reference price must be finite"));
        }
        self.reference_price = reference_price;
        Ok(self)
    }

    pub fn with_tick_size(mut self, tick_size: Option<f64>) -> Result<Self> {
        if let Some(t) = tick_size {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::domain(format!("tick size {t} must be positive")));
            }
        }
        self.tick_size = tick_size;
        Ok(self)
    }

    /// The same limit orders with all market orders removed.
    pub fn without_market_orders(&self) -> Self {
        Self {
            market_sell_volume: 0,
            market_buy_volume: 0,
            ..self.clone()
        }
    }

    pub fn sell_orders(&self) -> &[LimitOrder] {
        &self.sell_orders
    }

    pub fn buy_orders(&self) -> &[LimitOrder] {
        &self.buy_orders
    }

    pub fn market_sell_volume(&self) -> u64 {
        self.market_sell_volume
    }

    pub fn market_buy_volume(&self) -> u64 {
        self.market_buy_volume
    }

    pub fn reference_price(&self) -> f64 {
        self.reference_price
    }

    pub fn tick_size(&self) -> Option<f64> {
        self.tick_size
    }

    /// Total sell limit volume `N_A`.
    pub fn sell_volume(&self) -> u64 {
        self.sell_orders.iter().map(|o| o.size).sum()
    }

    /// Total buy limit volume `N_B`.
    pub fn buy_volume(&self) -> u64 {
        self.buy_orders.iter().map(|o| o.size).sum()
    }

    /// Market order imbalance `M_B - M_A`.
    pub fn imbalance(&self) -> i64 {
        self.market_buy_volume as i64 - self.market_sell_volume as i64
    }
}

fn check_order(order: &LimitOrder, side: Side) -> Result<()> {
    if order.side != side {
        return Err(Error::InvalidOrder(format!(
            "{:?} order listed among {:?} orders",
            order.side, side
        )));
    }
    LimitOrder::new(order.side, order.price, order.size).map(|_| ())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveDirection {
    Increasing,
    Decreasing,
}

/// Right-continuous step function of cumulative volume.
///
/// `value(x)` is `base` for `x` below the first breakpoint and the value of
/// the last breakpoint at or below `x` otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepCurve {
    direction: CurveDirection,
    base: u64,
    breakpoints: Vec<(f64, u64)>,
}

impl StepCurve {
    /// `D_A(x)`: sell volume priced at or below `x`.
    pub fn supply(orders: &[LimitOrder]) -> Self {
        let mut running = 0u64;
        let breakpoints = grouped_volumes(orders)
            .into_iter()
            .map(|(p, v)| {
                running += v;
                (p, running)
            })
            .collect();
        Self {
            direction: CurveDirection::Increasing,
            base: 0,
            breakpoints,
        }
    }

    /// `D_B(x)`: buy volume priced strictly above `x`.
    pub fn demand(orders: &[LimitOrder]) -> Self {
        let total: u64 = orders.iter().map(|o| o.size).sum();
        let mut running = total;
        let breakpoints = grouped_volumes(orders)
            .into_iter()
            .map(|(p, v)| {
                running -= v;
                (p, running)
            })
            .collect();
        Self {
            direction: CurveDirection::Decreasing,
            base: total,
            breakpoints,
        }
    }

    pub fn direction(&self) -> CurveDirection {
        self.direction
    }

    pub fn breakpoints(&self) -> &[(f64, u64)] {
        &self.breakpoints
    }

    /// Value below every breakpoint.
    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn eval(&self, x: f64) -> u64 {
        let idx = self.breakpoints.partition_point(|&(p, _)| p <= x);
        if idx == 0 {
            self.base
        } else {
            self.breakpoints[idx - 1].1
        }
    }
}

/// Sorted distinct prices with summed sizes.
fn grouped_volumes(orders: &[LimitOrder]) -> Vec<(f64, u64)> {
    let mut pts: Vec<(f64, u64)> = orders.iter().map(|o| (o.price, o.size)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, u64)> = Vec::with_capacity(pts.len());
    for (p, v) in pts {
        match out.last_mut() {
            Some(last) if last.0 == p => last.1 += v,
            _ => out.push((p, v)),
        }
    }
    out
}

pub fn build_curves(book: &OrderBookSnapshot) -> (StepCurve, StepCurve) {
    (
        StepCurve::supply(&book.sell_orders),
        StepCurve::demand(&book.buy_orders),
    )
}

/// The half-open interval `[lower, upper)` of volume-maximizing prices.
/// When `lower == upper` the clearing price is unique.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClearingInterval {
    pub lower: f64,
    pub upper: f64,
}

impl ClearingInterval {
    pub fn is_degenerate(&self) -> bool {
        self.lower == self.upper
    }
}

/// Lower and upper clearing prices of `D_A(x) = D_B(x) + Δ`.
///
/// `lower = inf{x : D_A(x) >= D_B(x) + Δ}` and
/// `upper = inf{x : D_A(x) > D_B(x) + Δ}`. Both are finite exactly when
/// `-N_B < Δ < N_A`; otherwise the auction fails.
pub fn clearing_interval(book: &OrderBookSnapshot) -> Result<ClearingInterval> {
    let (supply, demand) = build_curves(book);
    clearing_interval_from_curves(&supply, &demand, book.imbalance())
}

pub fn clearing_interval_from_curves(
    supply: &StepCurve,
    demand: &StepCurve,
    imbalance: i64,
) -> Result<ClearingInterval> {
    let total_sell = supply.breakpoints.last().map_or(0, |b| b.1) as i128;
    let total_buy = demand.base as i128;
    let delta = imbalance as i128;
    if !(-total_buy < delta && delta < total_sell) {
        return Err(Error::FailedAuction(format!(
            "imbalance {imbalance} outside (-{total_buy}, {total_sell})"
        )));
    }

    // g(x) = D_A(x) - D_B(x) - Δ is non-decreasing and right-continuous; walk
    // the merged breakpoints until it turns non-negative, then positive.
    let (s, d) = (&supply.breakpoints, &demand.breakpoints);
    let (mut i, mut j) = (0usize, 0usize);
    let mut sup_val = 0i128;
    let mut dem_val = total_buy;
    let mut lower = None;
    while i < s.len() || j < d.len() {
        let price = match (s.get(i), d.get(j)) {
            (Some(a), Some(b)) => a.0.min(b.0),
            (Some(a), None) => a.0,
            (None, Some(b)) => b.0,
            (None, None) => unreachable!(),
        };
        while i < s.len() && s[i].0 == price {
            sup_val = s[i].1 as i128;
            i += 1;
        }
        while j < d.len() && d[j].0 == price {
            dem_val = d[j].1 as i128;
            j += 1;
        }
        let g = sup_val - dem_val - delta;
        if lower.is_none() && g >= 0 {
            lower = Some(price);
        }
        if g > 0 {
            let lower = lower.unwrap_or(price);
            return Ok(ClearingInterval {
                lower,
                upper: price,
            });
        }
    }
    // The range check guarantees g > 0 at the highest breakpoint.
    Err(Error::FailedAuction("curves do not cross".into()))
}

/// Picks the admissible clearing price closest to `reference`.
///
/// With a tick size the candidates are the multiples of `tick` in
/// `[lower, upper)`; equidistant candidates resolve to the lower price, and an
/// interval holding no grid point yields `lower`. Without a tick size the
/// reference is clamped to `[lower, upper]`. A degenerate interval always
/// yields `lower`.
pub fn closing_price(interval: ClearingInterval, reference: f64, tick: Option<f64>) -> f64 {
    let ClearingInterval { lower, upper } = interval;
    if interval.is_degenerate() {
        return lower;
    }
    let Some(tick) = tick else {
        return reference.clamp(lower, upper);
    };
    let lo = grid_index(lower / tick, false);
    let hi = grid_index(upper / tick, true);
    if lo > hi {
        return lower;
    }
    let target = reference / tick;
    let k = if target <= lo {
        lo
    } else if target >= hi {
        hi
    } else {
        let below = target.floor();
        if target - below <= below + 1.0 - target {
            below
        } else {
            below + 1.0
        }
    };
    k * tick
}

/// Smallest grid index >= r (or largest index < r when `exclusive_upper`),
/// snapping values within rounding noise of an integer.
fn grid_index(r: f64, exclusive_upper: bool) -> f64 {
    let nearest = r.round();
    let on_grid = (r - nearest).abs() <= 1e-9 * r.abs().max(1.0);
    match (on_grid, exclusive_upper) {
        (true, false) => nearest,
        (true, true) => nearest - 1.0,
        (false, false) => r.ceil(),
        (false, true) => r.floor(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClearingOutcome {
    pub interval: ClearingInterval,
    pub closing_price: f64,
    /// `min(D_A(p) + M_A, D_B(p) + M_B)` at the closing price.
    pub executed_volume: u64,
    /// `(D_B(p) + M_B) - (D_A(p) + M_A)`: unmatched buy volume when positive.
    pub remaining_imbalance: i64,
}

/// Clears the book using its own reference price and tick size.
pub fn clear(book: &OrderBookSnapshot) -> Result<ClearingOutcome> {
    let (supply, demand) = build_curves(book);
    let interval = clearing_interval_from_curves(&supply, &demand, book.imbalance())?;
    let price = closing_price(interval, book.reference_price, book.tick_size);
    let sell_side = supply.eval(price) + book.market_sell_volume;
    let buy_side = demand.eval(price) + book.market_buy_volume;
    Ok(ClearingOutcome {
        interval,
        closing_price: price,
        executed_volume: sell_side.min(buy_side),
        remaining_imbalance: buy_side as i64 - sell_side as i64,
    })
}

/// Closing price of the book after deleting all market orders.
pub fn alternative_closing_price(book: &OrderBookSnapshot) -> Result<f64> {
    if book.sell_orders.is_empty() || book.buy_orders.is_empty() {
        return Err(Error::FailedAuction(
            "alternative price needs limit orders on both sides".into(),
        ));
    }
    let interval = clearing_interval(&book.without_market_orders())?;
    Ok(closing_price(
        interval,
        book.reference_price,
        book.tick_size,
    ))
}
