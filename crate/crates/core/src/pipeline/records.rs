//! Input records and their CSV readers.
//!
//! Orders: `stock,date,time,type,side,price,size` (price empty for market
//! orders). Trades: `stock,date,time,price,size`. Metadata:
//! `stock,exchange,mcap_eur_bn[,tick_size]`. Dates are `YYYY-MM-DD`, times
//! `HH:MM:SS[.fff]` or a full `YYYY-MM-DDTHH:MM:SS[.fff]` timestamp.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use chrono::{NaiveDate, NaiveDateTime, NaiveTime};
use serde::{Deserialize, Serialize};

use crate::auction::Side;
use crate::error::{Error, Result};

/// A decimal number held exactly as `units / 10^scale`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Decimal {
    units: i128,
    scale: u32,
}

impl Decimal {
    pub fn new(units: i128, scale: u32) -> Self {
        Self { units, scale }
    }

    pub fn units(&self) -> i128 {
        self.units
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn to_f64(&self) -> f64 {
        self.units as f64 / 10f64.powi(self.scale as i32)
    }

    pub fn is_positive(&self) -> bool {
        self.units > 0
    }

    /// `self / unit` rounded half away from zero, computed exactly.
    pub fn div_round(&self, unit: Decimal) -> Result<i64> {
        if unit.units <= 0 {
            return Err(Error::domain("tick size must be positive"));
        }
        // a/10^s ÷ b/10^t = a 10^t / (b 10^s)
        let num = self.units * 10i128.pow(unit.scale);
        let den = unit.units * 10i128.pow(self.scale);
        let q = num / den;
        let r = num % den;
        let q = if 2 * r.abs() >= den {
            q + num.signum()
        } else {
            q
        };
        i64::try_from(q).map_err(|_| Error::domain("tick offset overflows"))
    }
}

impl FromStr for Decimal {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        let (negative, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let (int, frac) = body.split_once('.').unwrap_or((body, ""));
        if int.is_empty() && frac.is_empty()
            || !int.bytes().all(|b| b.is_ascii_digit())
            || !frac.bytes().all(|b| b.is_ascii_digit())
            || frac.len() > 18
        {
            return Err(format!("{s:?} is not a decimal number"));
        }
        let digits = format!("{int}{frac}");
        let units: i128 = digits
            .parse()
            .map_err(|_| format!("{s:?} is out of range"))?;
        Ok(Self {
            units: if negative { -units } else { units },
            scale: frac.len() as u32,
        })
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.units < 0 { "-" } else { "" };
        let abs = self.units.unsigned_abs();
        if self.scale == 0 {
            return write!(f, "{sign}{abs}");
        }
        let p = 10u128.pow(self.scale);
        write!(
            f,
            "{sign}{}.{:0width$}",
            abs / p,
            abs % p,
            width = self.scale as usize
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderType {
    Limit,
    Market,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawOrderRecord {
    pub stock: String,
    pub date: NaiveDate,
    pub time: NaiveTime,
    pub order_type: OrderType,
    pub side: Side,
    /// Present exactly for limit orders.
    pub price: Option<Decimal>,
    pub size: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TradeRecord {
    pub stock: String,
    pub date: NaiveDate,
    pub time: NaiveTime,
    pub price: Decimal,
    pub size: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StockMetadata {
    pub stock: String,
    pub exchange: String,
    pub mcap_eur_bn: f64,
    pub tick_size: Option<Decimal>,
}

#[derive(Debug, Deserialize)]
struct OrderRow {
    stock: String,
    date: String,
    time: String,
    #[serde(rename = "type")]
    order_type: String,
    side: String,
    price: String,
    size: String,
}

#[derive(Debug, Deserialize)]
struct TradeRow {
    stock: String,
    date: String,
    time: String,
    price: String,
    size: String,
}

#[derive(Debug, Deserialize)]
struct MetadataRow {
    stock: String,
    exchange: String,
    mcap_eur_bn: String,
    #[serde(default)]
    tick_size: Option<String>,
}

fn parse_err(path: &Path, row: usize, message: impl fmt::Display) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        message: format!("row {row}: {message}"),
    }
}

fn parse_date(s: &str) -> std::result::Result<NaiveDate, String> {
    NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d").map_err(|e| format!("bad date {s:?}: {e}"))
}

fn parse_time(s: &str) -> std::result::Result<NaiveTime, String> {
    let s = s.trim();
    if s.contains('T') {
        return NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S%.f")
            .map(|dt| dt.time())
            .map_err(|e| format!("bad timestamp {s:?}: {e}"));
    }
    NaiveTime::parse_from_str(s, "%H:%M:%S%.f").map_err(|e| format!("bad time {s:?}: {e}"))
}

fn parse_size(s: &str) -> std::result::Result<u64, String> {
    match s.trim().parse::<u64>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(format!("size {s:?} must be a positive integer")),
    }
}

fn parse_positive_price(s: &str) -> std::result::Result<Decimal, String> {
    let d: Decimal = s.parse()?;
    if d.is_positive() {
        Ok(d)
    } else {
        Err(format!("price {s:?} must be positive"))
    }
}

fn reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file))
}

pub fn read_orders(path: &Path) -> Result<Vec<RawOrderRecord>> {
    let mut out = Vec::new();
    for (i, row) in reader(path)?.deserialize::<OrderRow>().enumerate() {
        let line = i + 2;
        let row = row?;
        let order = parse_order(row).map_err(|m| parse_err(path, line, m))?;
        out.push(order);
    }
    Ok(out)
}

fn parse_order(row: OrderRow) -> std::result::Result<RawOrderRecord, String> {
    let order_type = match row.order_type.to_ascii_lowercase().as_str() {
        "limit" => OrderType::Limit,
        "market" => OrderType::Market,
        other => return Err(format!("unknown order type {other:?}")),
    };
    let side = match row.side.to_ascii_lowercase().as_str() {
        "buy" => Side::Buy,
        "sell" => Side::Sell,
        other => return Err(format!("unknown side {other:?}")),
    };
    let price = match (order_type, row.price.trim()) {
        (OrderType::Limit, "") => return Err("limit order without a price".into()),
        (OrderType::Limit, p) => Some(parse_positive_price(p)?),
        (OrderType::Market, "") => None,
        (OrderType::Market, _) => return Err("market order with a price".into()),
    };
    Ok(RawOrderRecord {
        stock: row.stock,
        date: parse_date(&row.date)?,
        time: parse_time(&row.time)?,
        order_type,
        side,
        price,
        size: parse_size(&row.size)?,
    })
}

pub fn read_trades(path: &Path) -> Result<Vec<TradeRecord>> {
    let mut out = Vec::new();
    for (i, row) in reader(path)?.deserialize::<TradeRow>().enumerate() {
        let line = i + 2;
        let row = row?;
        let trade = (|| -> std::result::Result<TradeRecord, String> {
            Ok(TradeRecord {
                date: parse_date(&row.date)?,
                time: parse_time(&row.time)?,
                price: parse_positive_price(&row.price)?,
                size: parse_size(&row.size)?,
                stock: row.stock,
            })
        })()
        .map_err(|m| parse_err(path, line, m))?;
        out.push(trade);
    }
    Ok(out)
}

pub fn read_metadata(path: &Path) -> Result<Vec<StockMetadata>> {
    let mut out = Vec::new();
    for (i, row) in reader(path)?.deserialize::<MetadataRow>().enumerate() {
        let line = i + 2;
        let row = row?;
        let mcap: f64 =
            row.mcap_eur_bn.trim().parse().map_err(|_| {
                parse_err(path, line, format!("bad market cap {:?}", row.mcap_eur_bn))
            })?;
        let tick_size = match row.tick_size.as_deref().map(str::trim) {
            None | Some("") => None,
            Some(t) => Some(parse_positive_price(t).map_err(|m| parse_err(path, line, m))?),
        };
        out.push(StockMetadata {
            stock: row.stock,
            exchange: row.exchange,
            mcap_eur_bn: mcap,
            tick_size,
        });
    }
    Ok(out)
}
